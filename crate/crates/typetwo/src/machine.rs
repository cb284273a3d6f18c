//! Generalized register machines over algebraic structures.
//!
//! One interpreter serves every mode. A [`Carrier`] decides what a register
//! holds and how operations and tests behave: exact rationals, polynomials in
//! a single real input resolved through a [`Resolver`], or stream expressions
//! for machines with LPO tests.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::algebra::{dyadic, enum_poly, eval_interval, first_index, parse_q, q, AlgebraError, Poly, Q};
use crate::spaces::{nu_q, PointDescriptor};
use crate::stream::{pair, small, sym, unpair, Diverged, Make, Realizer, Src, Sym, Tape, UPStream};
use crate::ParseError;

/// Symbolic values above this degree are refused.
pub const SYMBOLIC_DEGREE_GUARD: usize = 64;

/// How far past the requested precision an enclosure may be refined.
const PRECISION_SLACK: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Real,
    Stream,
}

/// Operation and test names with arities. Operations write `R0` from
/// `R1..Rk`; tests read `R1..Rl`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub name: &'static str,
    pub domain: Domain,
    pub ops: &'static [(&'static str, usize)],
    pub tests: &'static [(&'static str, usize)],
}

impl Signature {
    pub const OF: Signature = Signature {
        name: "OF",
        domain: Domain::Real,
        ops: &[("add", 2), ("mul", 2), ("sub", 2), ("div", 2)],
        tests: &[("eq", 2), ("lt", 2)],
    };
    pub const RING: Signature =
        Signature { name: "RING", domain: Domain::Real, ops: &[("add", 2), ("mul", 2)], tests: &[("eq", 2)] };
    pub const ADD1: Signature =
        Signature { name: "ADD1", domain: Domain::Real, ops: &[("add", 2), ("one", 0)], tests: &[("eq", 2)] };
    /// `OF` plus `penum(k, x) = P_k(x)`, defined when `k` is a natural number.
    pub const ALG: Signature = Signature {
        name: "ALG",
        domain: Domain::Real,
        ops: &[("add", 2), ("mul", 2), ("sub", 2), ("div", 2), ("penum", 2)],
        tests: &[("eq", 2), ("lt", 2)],
    };
    /// Positionwise stream transducers with the LPO test.
    pub const LPO: Signature = Signature {
        name: "LPO",
        domain: Domain::Stream,
        ops: &[("zero", 0), ("succ", 1), ("exceed", 2)],
        tests: &[("lpo", 1)],
    };

    pub const ALL: [Signature; 5] = [Self::OF, Self::RING, Self::ADD1, Self::ALG, Self::LPO];

    pub fn by_name(name: &str) -> Option<Signature> {
        Self::ALL.into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn op(&self, name: &str) -> Option<(&'static str, usize)> {
        self.ops.iter().copied().find(|(n, _)| *n == name)
    }

    pub fn test(&self, name: &str) -> Option<(&'static str, usize)> {
        self.tests.iter().copied().find(|(n, _)| *n == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Inc(usize),
    /// Decrement, floored at 0.
    Dec(usize),
    Set(usize, u64),
    /// `I_a := I_b`.
    Copy(usize, usize),
    Jz(usize, usize),
    Goto(usize),
    /// `R_{I0} := R_{I1}`.
    CopyInd,
    Apply(&'static str),
    Branch(&'static str, usize),
    Const(usize, Q),
    Halt,
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Inc(i) => write!(f, "IDX INC I{i}"),
            Instr::Dec(i) => write!(f, "IDX DEC I{i}"),
            Instr::Set(i, v) => write!(f, "IDX SET I{i} {v}"),
            Instr::Copy(a, b) => write!(f, "IDX COPY I{a} I{b}"),
            Instr::Jz(i, t) => write!(f, "IDX JZ I{i} -> @{t}"),
            Instr::Goto(t) => write!(f, "GOTO @{t}"),
            Instr::CopyInd => write!(f, "COPYIND"),
            Instr::Apply(op) => write!(f, "APPLY {op}"),
            Instr::Branch(t, l) => write!(f, "BRANCH {t} -> @{l}"),
            Instr::Const(i, c) => write!(f, "CONST R{i} = {c}"),
            Instr::Halt => write!(f, "HALT"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Program {
    lines: Vec<Instr>,
    sig: Signature,
    constants: bool,
    // source line of each instruction, 1-based
    origin: Vec<usize>,
}

fn reg(tok: &str, prefix: char) -> Option<usize> {
    tok.strip_prefix(prefix).or_else(|| tok.strip_prefix(prefix.to_ascii_lowercase()))?.parse().ok()
}

enum Target {
    Label(String),
}

enum Raw {
    Done(Instr),
    Jz(usize, Target),
    Goto(Target),
    Branch(&'static str, Target),
}

impl Program {
    /// Parses the line-oriented assembly format. `MOV Ra Rb` expands to
    /// `IDX SET I0 a`, `IDX SET I1 b`, `COPYIND`.
    pub fn parse(text: &str, sig: Signature) -> Result<Program, ParseError> {
        let mut raw: Vec<(usize, Raw)> = Vec::new();
        let mut labels: HashMap<String, usize> = HashMap::new();
        let mut constants = false;
        for (no, line) in text.lines().enumerate() {
            let no = no + 1;
            let err = |msg: String| ParseError::new(format!("line {no}: {msg}"));
            let mut body = line.split('#').next().unwrap_or("").trim();
            if body == ".constants" {
                constants = true;
                continue;
            }
            while let Some((head, rest)) = body.split_once(':') {
                let head = head.trim();
                if head.is_empty() || !head.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    break;
                }
                if labels.insert(head.to_string(), raw.len()).is_some() {
                    return Err(err(format!("duplicate label `{head}`")));
                }
                body = rest.trim();
            }
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().filter(|t| *t != "=" && *t != ",").collect();
            let target = |toks: &[&str]| -> Result<Target, ParseError> {
                match toks {
                    ["->", l] => Ok(Target::Label(l.to_string())),
                    _ => Err(err(format!("expected `-> LABEL` in `{body}`"))),
                }
            };
            let idx = |t: &str| reg(t, 'I').ok_or_else(|| err(format!("expected an index register, got `{t}`")));
            let dat = |t: &str| reg(t, 'R').ok_or_else(|| err(format!("expected a data register, got `{t}`")));
            let op = toks[0].to_ascii_uppercase();
            match (op.as_str(), &toks[1..]) {
                ("IDX", [kind, rest @ ..]) => {
                    let instr = match (kind.to_ascii_uppercase().as_str(), rest) {
                        ("INC", [i]) => Raw::Done(Instr::Inc(idx(i)?)),
                        ("DEC", [i]) => Raw::Done(Instr::Dec(idx(i)?)),
                        ("SET", [i, v]) => {
                            let v = v.parse().map_err(|_| err(format!("bad index constant `{v}`")))?;
                            Raw::Done(Instr::Set(idx(i)?, v))
                        }
                        ("COPY", [a, b]) => Raw::Done(Instr::Copy(idx(a)?, idx(b)?)),
                        ("JZ", [i, t @ ..]) => Raw::Jz(idx(i)?, target(t)?),
                        _ => return Err(err(format!("unknown index instruction `{body}`"))),
                    };
                    raw.push((no, instr));
                }
                ("GOTO", [l]) => raw.push((no, Raw::Goto(Target::Label(l.to_string())))),
                ("COPYIND", []) => raw.push((no, Raw::Done(Instr::CopyInd))),
                ("HALT", []) => raw.push((no, Raw::Done(Instr::Halt))),
                ("MOV", [a, b]) => {
                    let (a, b) = (dat(a)?, dat(b)?);
                    raw.push((no, Raw::Done(Instr::Set(0, a as u64))));
                    raw.push((no, Raw::Done(Instr::Set(1, b as u64))));
                    raw.push((no, Raw::Done(Instr::CopyInd)));
                }
                ("APPLY", [name, regs @ ..]) => {
                    let (name, arity) =
                        sig.op(name).ok_or_else(|| err(format!("operation `{name}` not in signature {}", sig.name)))?;
                    check_operands(regs, arity).map_err(err)?;
                    raw.push((no, Raw::Done(Instr::Apply(name))));
                }
                ("BRANCH", [name, rest @ ..]) => {
                    let (name, arity) =
                        sig.test(name).ok_or_else(|| err(format!("test `{name}` not in signature {}", sig.name)))?;
                    let arrow = rest.iter().position(|t| *t == "->").ok_or_else(|| err("missing `->`".into()))?;
                    check_operands(&rest[..arrow], arity).map_err(err)?;
                    raw.push((no, Raw::Branch(name, target(&rest[arrow..])?)));
                }
                ("CONST", [r, v]) => {
                    if !constants {
                        return Err(err("CONST requires the `.constants` directive".into()));
                    }
                    if sig.domain != Domain::Real {
                        return Err(err("CONST is only available over real signatures".into()));
                    }
                    let v = parse_q(v).map_err(|e| err(e.0))?;
                    raw.push((no, Raw::Done(Instr::Const(dat(r)?, v))));
                }
                _ => return Err(err(format!("cannot parse `{body}`"))),
            }
        }
        if raw.is_empty() {
            return Err(ParseError::new("empty program"));
        }
        let resolve = |no: usize, t: &Target| -> Result<usize, ParseError> {
            let Target::Label(l) = t;
            match labels.get(l) {
                Some(&i) if i < raw.len() => Ok(i),
                Some(_) => Err(ParseError::new(format!("line {no}: label `{l}` points past the last instruction"))),
                None => Err(ParseError::new(format!("line {no}: unknown label `{l}`"))),
            }
        };
        let mut lines = Vec::with_capacity(raw.len());
        let mut origin = Vec::with_capacity(raw.len());
        for (no, r) in &raw {
            lines.push(match r {
                Raw::Done(i) => i.clone(),
                Raw::Jz(i, t) => Instr::Jz(*i, resolve(*no, t)?),
                Raw::Goto(t) => Instr::Goto(resolve(*no, t)?),
                Raw::Branch(name, t) => Instr::Branch(name, resolve(*no, t)?),
            });
            origin.push(*no);
        }
        Ok(Program { lines, sig, constants, origin })
    }

    pub fn lines(&self) -> &[Instr] {
        &self.lines
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn uses_constants(&self) -> bool {
        self.constants
    }

    /// Source line of instruction `pc`.
    pub fn source_line(&self, pc: usize) -> Option<usize> {
        self.origin.get(pc).copied()
    }
}

fn check_operands(regs: &[&str], arity: usize) -> Result<(), String> {
    if regs.is_empty() {
        return Ok(());
    }
    let expected: Vec<String> = (1..=arity).map(|i| format!("R{i}")).collect();
    if regs.len() == arity && regs.iter().zip(&expected).all(|(a, b)| a.eq_ignore_ascii_case(b)) {
        Ok(())
    } else {
        Err(format!("operands must be {}", if arity == 0 { "empty".to_string() } else { expected.join(" ") }))
    }
}

#[derive(Clone, Debug)]
pub struct Config<V> {
    pub data: BTreeMap<usize, V>,
    pub index: BTreeMap<usize, u64>,
    pub pc: usize,
}

impl<V: Clone> Config<V> {
    pub fn reg(&self, i: usize, base: &V) -> V {
        self.data.get(&i).cloned().unwrap_or_else(|| base.clone())
    }

    pub fn idx(&self, i: usize) -> u64 {
        self.index.get(&i).copied().unwrap_or(0)
    }
}

/// `I0` holds the input length, `R1..Rn` the inputs, everything else defaults.
pub fn load<V>(inputs: Vec<V>) -> Config<V> {
    let mut index = BTreeMap::new();
    index.insert(0, inputs.len() as u64);
    let data = inputs.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect();
    Config { data, index, pc: 0 }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// Guesses ran out before `HALT`.
    Exhausted { test: usize },
    /// `HALT` reached with guesses left over.
    Unused { left: usize },
    /// A "true" guess on a test whose value is not exactly zero.
    TrueRefuted { test: usize },
    /// A "false" guess on a test whose value is exactly zero.
    FalseOnZero { test: usize },
    /// A "false" guess that precision `precision` does not certify.
    Uncertified { test: usize, precision: u64 },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Exhausted { test } => write!(f, "guesses exhausted at test {test}"),
            Rejection::Unused { left } => write!(f, "{left} guesses unused at HALT"),
            Rejection::TrueRefuted { test } => write!(f, "test {test}: true guess refuted"),
            Rejection::FalseOnZero { test } => write!(f, "test {test}: false guess on an exact zero"),
            Rejection::Uncertified { test, precision } => {
                write!(f, "test {test}: false guess not certified at precision {precision}")
            }
        }
    }
}

/// A run that cannot proceed yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stall {
    Fuel,
    /// The carrier needs this tape position before it can continue.
    Missing(usize),
}

impl From<Diverged> for Stall {
    fn from(_: Diverged) -> Self {
        Stall::Fuel
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Fault {
    Undefined(String),
    Rejected(Rejection),
    Unsupported(String),
    Stalled(Stall),
}

impl From<Stall> for Fault {
    fn from(s: Stall) -> Self {
        Fault::Stalled(s)
    }
}

impl From<AlgebraError> for Fault {
    fn from(e: AlgebraError) -> Self {
        Fault::Unsupported(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<V> {
    Halted(Vec<V>),
    OutOfFuel,
    Undefined(String),
    Rejected(Rejection),
    Unsupported(String),
}

impl<V> Outcome<V> {
    pub fn halted(&self) -> Option<&[V]> {
        match self {
            Outcome::Halted(v) => Some(v),
            _ => None,
        }
    }

    pub fn map<W>(self, f: impl Fn(V) -> W) -> Outcome<W> {
        match self {
            Outcome::Halted(v) => Outcome::Halted(v.into_iter().map(f).collect()),
            Outcome::OutOfFuel => Outcome::OutOfFuel,
            Outcome::Undefined(s) => Outcome::Undefined(s),
            Outcome::Rejected(r) => Outcome::Rejected(r),
            Outcome::Unsupported(s) => Outcome::Unsupported(s),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Outcome<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Halted(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "halted ({})", parts.join(", "))
            }
            Outcome::OutOfFuel => write!(f, "out of fuel"),
            Outcome::Undefined(s) => write!(f, "undefined operation: {s}"),
            Outcome::Rejected(r) => write!(f, "rejected: {r}"),
            Outcome::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

pub trait Carrier {
    type Val: Clone + fmt::Display;
    fn base(&self) -> Self::Val;
    fn constant(&self, c: &Q) -> Result<Self::Val, Fault>;
    fn apply(&mut self, op: &str, args: &[Self::Val]) -> Result<Self::Val, Fault>;
    fn test(&mut self, name: &str, args: &[Self::Val]) -> Result<bool, Fault>;
    /// Called at `HALT`; may still reject.
    fn finish(&mut self) -> Result<(), Fault> {
        Ok(())
    }
}

/// A running program. Steps that stall leave the state untouched.
pub struct Machine<C: Carrier> {
    prog: Rc<Program>,
    pub carrier: C,
    cfg: Config<C::Val>,
    steps: u64,
    branches: Vec<(u64, bool)>,
    stopped: Option<Outcome<C::Val>>,
}

impl<C: Carrier> Machine<C> {
    pub fn new(prog: Rc<Program>, carrier: C, inputs: Vec<C::Val>) -> Self {
        Machine { prog, carrier, cfg: load(inputs), steps: 0, branches: Vec::new(), stopped: None }
    }

    pub fn config(&self) -> &Config<C::Val> {
        &self.cfg
    }

    pub fn config_mut(&mut self) -> &mut Config<C::Val> {
        &mut self.cfg
    }

    pub fn program(&self) -> &Program {
        &self.prog
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `(step, taken)` for every branch executed so far.
    pub fn branches(&self) -> &[(u64, bool)] {
        &self.branches
    }

    pub fn stopped(&self) -> Option<&Outcome<C::Val>> {
        self.stopped.as_ref()
    }

    pub fn has_halted(&self) -> bool {
        matches!(self.stopped, Some(Outcome::Halted(_)))
    }

    fn stop(&mut self, fault: Fault) -> Result<(), Stall> {
        self.stopped = Some(match fault {
            Fault::Undefined(s) => Outcome::Undefined(s),
            Fault::Rejected(r) => Outcome::Rejected(r),
            Fault::Unsupported(s) => Outcome::Unsupported(s),
            Fault::Stalled(s) => return Err(s),
        });
        self.steps += 1;
        Ok(())
    }

    /// Executes one instruction; a no-op once stopped.
    pub fn step(&mut self) -> Result<(), Stall> {
        if self.stopped.is_some() {
            return Ok(());
        }
        let pc = self.cfg.pc;
        let Some(instr) = self.prog.lines.get(pc) else {
            return self.halt();
        };
        let base = self.carrier.base();
        let mut next = pc + 1;
        match instr {
            Instr::Inc(i) => {
                *self.cfg.index.entry(*i).or_insert(0) += 1;
            }
            Instr::Dec(i) => {
                let v = self.cfg.idx(*i);
                self.cfg.index.insert(*i, v.saturating_sub(1));
            }
            Instr::Set(i, v) => {
                self.cfg.index.insert(*i, *v);
            }
            Instr::Copy(a, b) => {
                let v = self.cfg.idx(*b);
                self.cfg.index.insert(*a, v);
            }
            Instr::Jz(i, t) => {
                if self.cfg.idx(*i) == 0 {
                    next = *t;
                }
            }
            Instr::Goto(t) => next = *t,
            Instr::CopyInd => {
                let v = self.cfg.reg(self.cfg.idx(1) as usize, &base);
                self.cfg.data.insert(self.cfg.idx(0) as usize, v);
            }
            Instr::Apply(op) => {
                let arity = self.prog.sig.op(op).map_or(0, |(_, a)| a);
                let args: Vec<C::Val> = (1..=arity).map(|i| self.cfg.reg(i, &base)).collect();
                match self.carrier.apply(op, &args) {
                    Ok(v) => {
                        self.cfg.data.insert(0, v);
                    }
                    Err(f) => return self.stop(f),
                }
            }
            Instr::Branch(test, t) => {
                let arity = self.prog.sig.test(test).map_or(0, |(_, a)| a);
                let args: Vec<C::Val> = (1..=arity).map(|i| self.cfg.reg(i, &base)).collect();
                match self.carrier.test(test, &args) {
                    Ok(taken) => {
                        self.branches.push((self.steps, taken));
                        if taken {
                            next = *t;
                        }
                    }
                    Err(f) => return self.stop(f),
                }
            }
            Instr::Const(i, c) => match self.carrier.constant(c) {
                Ok(v) => {
                    self.cfg.data.insert(*i, v);
                }
                Err(f) => return self.stop(f),
            },
            Instr::Halt => return self.halt(),
        }
        self.cfg.pc = next;
        self.steps += 1;
        Ok(())
    }

    fn halt(&mut self) -> Result<(), Stall> {
        if let Err(f) = self.carrier.finish() {
            return self.stop(f);
        }
        let base = self.carrier.base();
        let outputs = (0..=self.cfg.idx(0) as usize).map(|i| self.cfg.reg(i, &base)).collect();
        self.stopped = Some(Outcome::Halted(outputs));
        self.steps += 1;
        Ok(())
    }

    /// Steps until stopped or `limit` total steps have been taken.
    pub fn run_to(&mut self, limit: u64) -> Result<(), Stall> {
        while self.stopped.is_none() && self.steps < limit {
            self.step()?;
        }
        Ok(())
    }

    /// The final outcome, `OutOfFuel` while still running.
    pub fn outcome(&self) -> Outcome<C::Val> {
        self.stopped.clone().unwrap_or(Outcome::OutOfFuel)
    }
}

fn real_op_on_q(op: &str, a: &[Q]) -> Result<Q, Fault> {
    Ok(match (op, a) {
        ("add", [x, y]) => x + y,
        ("sub", [x, y]) => x - y,
        ("mul", [x, y]) => x * y,
        ("div", [x, y]) => {
            if y.is_zero() {
                return Err(Fault::Undefined("division by zero".into()));
            }
            x / y
        }
        ("one", []) => q(1),
        ("penum", [k, x]) => {
            let k = natural(k).ok_or_else(|| Fault::Undefined(format!("penum index {k} is not a natural number")))?;
            enum_poly(&k.into()).eval(x)
        }
        _ => return Err(Fault::Unsupported(format!("operation `{op}` over the reals"))),
    })
}

fn natural(k: &Q) -> Option<u64> {
    if k.is_integer() && !k.is_negative() {
        k.to_integer().to_u64()
    } else {
        None
    }
}

/// Exact rational arithmetic.
#[derive(Clone, Debug, Default)]
pub struct Exact {
    /// `(test, value, outcome)` per executed test, with `value = R1 − R2`.
    pub log: Vec<(String, Q, bool)>,
}

impl Carrier for Exact {
    type Val = Q;

    fn base(&self) -> Q {
        Q::zero()
    }

    fn constant(&self, c: &Q) -> Result<Q, Fault> {
        Ok(c.clone())
    }

    fn apply(&mut self, op: &str, args: &[Q]) -> Result<Q, Fault> {
        real_op_on_q(op, args)
    }

    fn test(&mut self, name: &str, args: &[Q]) -> Result<bool, Fault> {
        let v = test_value_q(args);
        let out = decide(name, v.cmp(&Q::zero()))?;
        self.log.push((name.to_string(), v, out));
        Ok(out)
    }
}

fn test_value_q(args: &[Q]) -> Q {
    match args {
        [a, b] => a - b,
        [a] => a.clone(),
        _ => Q::zero(),
    }
}

fn decide(test: &str, sign: Ordering) -> Result<bool, Fault> {
    match test {
        "eq" => Ok(sign == Ordering::Equal),
        "lt" => Ok(sign == Ordering::Less),
        _ => Err(Fault::Unsupported(format!("test `{test}` over the reals"))),
    }
}

/// Access to a real input for the symbolic carrier.
pub trait Point {
    /// A closed interval of width `≤ 2^-k` containing the point.
    fn enclose(&self, k: u32) -> Result<(Q, Q), Stall>;
    /// Whether `p` vanishes at the point, when that is decidable.
    fn vanishes(&self, _p: &Poly) -> Option<bool> {
        None
    }
}

impl Point for PointDescriptor {
    fn enclose(&self, k: u32) -> Result<(Q, Q), Stall> {
        Ok(PointDescriptor::enclose(self, k))
    }

    fn vanishes(&self, p: &Poly) -> Option<bool> {
        match self {
            PointDescriptor::Limit(l) if l.certified > 0 => Some(p.is_zero()),
            _ => crate::algebra::is_zero_at(p, self).ok(),
        }
    }
}

/// Tape positions read so far, shared between a realizer and its carriers.
pub type TapeCache = Rc<RefCell<HashMap<usize, Sym>>>;

fn cached(cache: &TapeCache, pos: usize) -> Result<Sym, Stall> {
    cache.borrow().get(&pos).cloned().ok_or(Stall::Missing(pos))
}

/// A real read from a name on the tape: position `j` of the name lies at
/// tape index `stride·j + offset`.
pub struct NamePoint {
    pub cache: TapeCache,
    pub stride: usize,
    pub offset: usize,
}

impl Point for NamePoint {
    fn enclose(&self, k: u32) -> Result<(Q, Q), Stall> {
        let j = k as usize + 1;
        let v = nu_q(&cached(&self.cache, self.stride * j + self.offset)?);
        let e = dyadic(k + 1);
        Ok((&v - &e, v + e))
    }
}

/// A real read straight from a name.
pub struct NameSource(pub Src);

impl Point for NameSource {
    fn enclose(&self, k: u32) -> Result<(Q, Q), Stall> {
        let v = nu_q(&self.0.at(k as usize + 1).map_err(|_| Stall::Fuel)?);
        let e = dyadic(k + 1);
        Ok((&v - &e, v + e))
    }
}

/// Sign information about a test value at a precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Undecided,
    Negative,
    Positive,
}

/// An enclosure of `p(x)` of width `≤ 2^-c`.
pub fn enclose_value(p: &Poly, x: &dyn Point, c: u32) -> Result<(Q, Q), Stall> {
    if p.degree().unwrap_or(0) == 0 {
        let v = p.coeff(0);
        return Ok((v.clone(), v));
    }
    let width = dyadic(c);
    let mut last = None;
    for k in c..=c + PRECISION_SLACK {
        let (lo, hi) = x.enclose(k)?;
        let (a, b) = eval_interval(p, &lo, &hi);
        if &b - &a <= width {
            return Ok((a, b));
        }
        last = Some((a, b));
    }
    Ok(last.expect("nonempty range"))
}

fn verdict(p: &Poly, x: &dyn Point, c: u32) -> Result<Verdict, Stall> {
    let (a, b) = enclose_value(p, x, c)?;
    Ok(if b.is_negative() {
        Verdict::Negative
    } else if a.is_positive() {
        Verdict::Positive
    } else {
        Verdict::Undecided
    })
}

/// Tries to refute `value = 0` at precision `c`. Never decides on an exact zero.
pub fn eval_test_at_precision(value: &Poly, x: &PointDescriptor, c: u32) -> Verdict {
    verdict(value, x, c).expect("descriptors never stall")
}

fn exact_sign(p: &Poly, x: Option<&dyn Point>) -> Result<Ordering, Fault> {
    if p.degree().unwrap_or(0) == 0 {
        return Ok(p.coeff(0).cmp(&Q::zero()));
    }
    let x = x.ok_or_else(|| Fault::Unsupported("symbolic value without a point".into()))?;
    match x.vanishes(p) {
        Some(true) => Ok(Ordering::Equal),
        Some(false) => nonzero_sign(p, x),
        None => Err(Fault::Unsupported("zero test not decidable at this point".into())),
    }
}

fn nonzero_sign(p: &Poly, x: &dyn Point) -> Result<Ordering, Fault> {
    let mut c = 4;
    while c <= 4096 {
        match verdict(p, x, c)? {
            Verdict::Negative => return Ok(Ordering::Less),
            Verdict::Positive => return Ok(Ordering::Greater),
            Verdict::Undecided => c *= 2,
        }
    }
    Err(Fault::Unsupported("sign not separated from zero by precision 4096".into()))
}

/// Bit `n` of an AlgDec₁ answer: whether `enum_poly(n)` vanishes at the input.
pub type AlgDecBits = Rc<dyn Fn(&BigUint) -> Result<bool, Stall>>;

/// How the symbolic carrier answers tests.
#[derive(Clone)]
pub enum Resolver {
    /// Exact truth through minimal polynomials.
    Exact,
    /// Guess code; see [`decode_guess`].
    Guess { codes: Vec<u64>, used: usize },
    /// The precision-`n` simulation: undecided tests count as `value = 0`.
    Precision(u32),
    /// Zero tests read bit `first_index(value)` of an AlgDec₁ name.
    AlgDec(AlgDecBits),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestEvent {
    pub test: String,
    pub value: Poly,
    pub outcome: bool,
}

/// Registers hold polynomials in the single real input `x`.
pub struct Symbolic {
    point: Option<Rc<dyn Point>>,
    pub resolver: Resolver,
    pub log: Vec<TestEvent>,
}

impl Symbolic {
    pub fn new(point: Option<Rc<dyn Point>>, resolver: Resolver) -> Self {
        Symbolic { point, resolver, log: Vec::new() }
    }

    fn point(&self) -> Option<&dyn Point> {
        self.point.as_deref()
    }

    fn vanishes(&self, p: &Poly) -> Result<bool, Fault> {
        if p.degree().unwrap_or(0) == 0 {
            return Ok(p.is_zero());
        }
        self.point()
            .and_then(|x| x.vanishes(p))
            .ok_or_else(|| Fault::Unsupported("zero test not decidable at this point".into()))
    }

    fn resolve(&mut self, name: &str, value: &Poly) -> Result<bool, Fault> {
        let test_no = self.log.len();
        match &mut self.resolver {
            Resolver::Exact => {
                let s = exact_sign(value, self.point.as_deref())?;
                decide(name, s)
            }
            Resolver::Precision(n) => {
                let n = *n;
                let v = match self.point.as_deref() {
                    Some(x) => verdict(value, x, n)?,
                    None => verdict(value, &PointDescriptor::from(0), n)?,
                };
                decide(name, sign_of(v))
            }
            Resolver::Guess { codes, used } => {
                let Some(&code) = codes.get(*used) else {
                    return Err(Fault::Rejected(Rejection::Exhausted { test: test_no }));
                };
                let at = *used;
                let zero = self.vanishes(value)?;
                let out = if code == 0 {
                    if !zero {
                        return Err(Fault::Rejected(Rejection::TrueRefuted { test: test_no }));
                    }
                    decide(name, Ordering::Equal)?
                } else {
                    if zero {
                        return Err(Fault::Rejected(Rejection::FalseOnZero { test: test_no }));
                    }
                    let c = code - 1;
                    let x = self.point.as_deref();
                    let v = match x {
                        Some(x) => verdict(value, x, c.min(u32::MAX as u64) as u32)?,
                        None => verdict(value, &PointDescriptor::from(0), 0)?,
                    };
                    if v == Verdict::Undecided {
                        return Err(Fault::Rejected(Rejection::Uncertified { test: test_no, precision: c }));
                    }
                    decide(name, sign_of(v))?
                };
                if let Resolver::Guess { used, .. } = &mut self.resolver {
                    *used = at + 1;
                }
                Ok(out)
            }
            Resolver::AlgDec(bits) => {
                let bits = bits.clone();
                let zero = if value.degree().unwrap_or(0) == 0 {
                    value.is_zero()
                } else {
                    bits(&first_index(&value.primitive()))?
                };
                if zero {
                    decide(name, Ordering::Equal)
                } else if name == "eq" {
                    Ok(false)
                } else {
                    let x =
                        self.point.as_deref().ok_or_else(|| Fault::Unsupported("order test without a point".into()))?;
                    decide(name, nonzero_sign(value, x)?)
                }
            }
        }
    }
}

fn sign_of(v: Verdict) -> Ordering {
    match v {
        Verdict::Undecided => Ordering::Equal,
        Verdict::Negative => Ordering::Less,
        Verdict::Positive => Ordering::Greater,
    }
}

/// `p(v)` as a polynomial.
pub fn compose(p: &Poly, v: &Poly) -> Poly {
    p.coeffs().iter().rev().fold(Poly::zero(), |acc, c| &(&acc * v) + &Poly::constant(c.clone()))
}

fn guard(p: Poly) -> Result<Poly, Fault> {
    match p.degree() {
        Some(d) if d > SYMBOLIC_DEGREE_GUARD => {
            Err(Fault::Unsupported(format!("symbolic degree {d} exceeds the guard")))
        }
        _ => Ok(p),
    }
}

impl Carrier for Symbolic {
    type Val = Poly;

    fn base(&self) -> Poly {
        Poly::zero()
    }

    fn constant(&self, c: &Q) -> Result<Poly, Fault> {
        Ok(Poly::constant(c.clone()))
    }

    fn apply(&mut self, op: &str, a: &[Poly]) -> Result<Poly, Fault> {
        guard(match (op, a) {
            ("add", [x, y]) => x + y,
            ("sub", [x, y]) => x - y,
            ("mul", [x, y]) => x * y,
            ("div", [x, y]) => match y.degree() {
                None => return Err(Fault::Undefined("division by zero".into())),
                Some(0) => x.scale(&(Q::from_integer(1.into()) / y.coeff(0))),
                Some(_) => return Err(Fault::Unsupported("division by a non-constant polynomial".into())),
            },
            ("one", []) => Poly::one(),
            ("penum", [k, x]) => {
                let k = match k.degree() {
                    None => Some(0),
                    Some(0) => natural(&k.coeff(0)),
                    Some(_) => None,
                }
                .ok_or_else(|| Fault::Undefined("penum index is not a natural number".into()))?;
                compose(&enum_poly(&k.into()), x)
            }
            _ => return Err(Fault::Unsupported(format!("operation `{op}` over the reals"))),
        })
    }

    fn test(&mut self, name: &str, args: &[Poly]) -> Result<bool, Fault> {
        let value = match args {
            [a, b] => a - b,
            [a] => a.clone(),
            _ => Poly::zero(),
        };
        let outcome = self.resolve(name, &value)?;
        self.log.push(TestEvent { test: name.to_string(), value, outcome });
        Ok(outcome)
    }

    fn finish(&mut self) -> Result<(), Fault> {
        if let Resolver::Guess { codes, used } = &self.resolver {
            if *used < codes.len() {
                return Err(Fault::Rejected(Rejection::Unused { left: codes.len() - used }));
            }
        }
        Ok(())
    }
}

/// Positionwise stream expressions over the machine inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    Input(usize),
    Zero,
    Succ(Rc<SExpr>),
    Exceed(Rc<SExpr>, Rc<SExpr>),
}

impl SExpr {
    /// Symbol `i`, reading input `j` at position `i` through `read(j, i)`.
    pub fn at<E>(&self, i: usize, read: &mut dyn FnMut(usize, usize) -> Result<Sym, E>) -> Result<Sym, E> {
        Ok(match self {
            SExpr::Input(j) => read(*j, i)?,
            SExpr::Zero => sym(0),
            SExpr::Succ(a) => a.at(i, read)? + 1u32,
            SExpr::Exceed(a, b) => sym(u64::from(a.at(i, read)? > b.at(i, read)?)),
        })
    }

    /// The ultimately periodic value on ultimately periodic inputs.
    pub fn to_up(&self, inputs: &[UPStream]) -> UPStream {
        let pre = inputs.iter().map(|s| s.prefix().len()).max().unwrap_or(0);
        let per = inputs.iter().map(|s| s.period().len()).fold(1, |a, b| a.lcm(&b));
        let mut read = |j: usize, i: usize| -> Result<Sym, ()> {
            Ok(inputs.get(j).map_or_else(|| sym(0), |s| s.query(i).clone()))
        };
        let prefix = (0..pre).map(|i| self.at(i, &mut read).unwrap()).collect();
        let period = (pre..pre + per).map(|i| self.at(i, &mut read).unwrap()).collect();
        UPStream::new(prefix, period).canonicalize()
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Input(j) => write!(f, "in{j}"),
            SExpr::Zero => write!(f, "zero"),
            SExpr::Succ(a) => write!(f, "succ({a})"),
            SExpr::Exceed(a, b) => write!(f, "exceed({a}, {b})"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum StreamInputs {
    Exact(Vec<UPStream>),
    /// Input `j` at position `i` lives at tape index `locate(j, i)`.
    Tape {
        cache: TapeCache,
        locate: fn(usize, usize, usize) -> usize,
        arity: usize,
    },
}

#[derive(Clone, Debug)]
pub enum StreamResolver {
    Exact,
    Guess {
        codes: Vec<u64>,
        used: usize,
    },
    /// Guess semantics restricted to what `stage` symbols of each test input reveal.
    Stage {
        codes: Vec<u64>,
        used: usize,
        stage: usize,
    },
    /// Guess codes taken at face value: `0` answers true, anything else false.
    Trust {
        codes: Vec<u64>,
        used: usize,
    },
}

/// Stream registers for machines with LPO tests.
pub struct StreamCarrier {
    pub inputs: StreamInputs,
    pub resolver: StreamResolver,
    pub tests: usize,
}

impl StreamCarrier {
    pub fn new(inputs: StreamInputs, resolver: StreamResolver) -> Self {
        StreamCarrier { inputs, resolver, tests: 0 }
    }

    fn symbol(&self, e: &SExpr, i: usize) -> Result<Sym, Stall> {
        match &self.inputs {
            StreamInputs::Exact(v) => {
                let mut read = |j: usize, i: usize| -> Result<Sym, Stall> {
                    Ok(v.get(j).map_or_else(|| sym(0), |s| s.query(i).clone()))
                };
                e.at(i, &mut read)
            }
            StreamInputs::Tape { cache, locate, arity } => {
                let mut read = |j: usize, i: usize| cached(cache, locate(*arity, j, i));
                e.at(i, &mut read)
            }
        }
    }

    /// Whether `e` is `0^ω`; only for exact inputs.
    fn all_zero(&self, e: &SExpr) -> Result<bool, Fault> {
        match &self.inputs {
            StreamInputs::Exact(v) => {
                let up = e.to_up(v);
                Ok(up.prefix().iter().chain(up.period()).all(|s| s.is_zero()))
            }
            StreamInputs::Tape { .. } => Err(Fault::Unsupported("exact LPO test on a tape input".into())),
        }
    }

    fn zeros_through(&self, e: &SExpr, c: usize) -> Result<bool, Fault> {
        for i in 0..=c {
            if !self.symbol(e, i)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl Carrier for StreamCarrier {
    type Val = Rc<SExpr>;

    fn base(&self) -> Rc<SExpr> {
        Rc::new(SExpr::Zero)
    }

    fn constant(&self, _c: &Q) -> Result<Rc<SExpr>, Fault> {
        Err(Fault::Unsupported("constants over streams".into()))
    }

    fn apply(&mut self, op: &str, a: &[Rc<SExpr>]) -> Result<Rc<SExpr>, Fault> {
        Ok(Rc::new(match (op, a) {
            ("zero", []) => SExpr::Zero,
            ("succ", [x]) => SExpr::Succ(x.clone()),
            ("exceed", [x, y]) => SExpr::Exceed(x.clone(), y.clone()),
            _ => return Err(Fault::Unsupported(format!("operation `{op}` over streams"))),
        }))
    }

    fn test(&mut self, name: &str, args: &[Rc<SExpr>]) -> Result<bool, Fault> {
        if name != "lpo" || args.len() != 1 {
            return Err(Fault::Unsupported(format!("test `{name}` over streams")));
        }
        let e = &args[0];
        let test = self.tests;
        let out = match &self.resolver {
            StreamResolver::Exact => self.all_zero(e)?,
            StreamResolver::Guess { codes, used } => {
                let code = *codes.get(*used).ok_or(Fault::Rejected(Rejection::Exhausted { test }))?;
                if code == 0 {
                    if !self.all_zero(e)? {
                        return Err(Fault::Rejected(Rejection::TrueRefuted { test }));
                    }
                    true
                } else {
                    if self.zeros_through(e, (code - 1) as usize)? {
                        return Err(Fault::Rejected(Rejection::Uncertified { test, precision: code - 1 }));
                    }
                    false
                }
            }
            StreamResolver::Stage { codes, used, stage } => {
                let code = *codes.get(*used).ok_or(Fault::Rejected(Rejection::Exhausted { test }))?;
                if code == 0 {
                    if *stage > 0 && !self.zeros_through(e, stage - 1)? {
                        return Err(Fault::Rejected(Rejection::TrueRefuted { test }));
                    }
                    true
                } else {
                    let c = (code - 1) as usize;
                    if c < *stage && self.zeros_through(e, c)? {
                        return Err(Fault::Rejected(Rejection::Uncertified { test, precision: code - 1 }));
                    }
                    false
                }
            }
            StreamResolver::Trust { codes, used } => {
                *codes.get(*used).ok_or(Fault::Rejected(Rejection::Exhausted { test }))? == 0
            }
        };
        match &mut self.resolver {
            StreamResolver::Guess { used, .. }
            | StreamResolver::Stage { used, .. }
            | StreamResolver::Trust { used, .. } => *used += 1,
            StreamResolver::Exact => {}
        }
        self.tests += 1;
        Ok(out)
    }

    fn finish(&mut self) -> Result<(), Fault> {
        match &self.resolver {
            StreamResolver::Guess { codes, used } | StreamResolver::Stage { codes, used, .. }
                if *used < codes.len() =>
            {
                Err(Fault::Rejected(Rejection::Unused { left: codes.len() - used }))
            }
            _ => Ok(()),
        }
    }
}

/// Guess-code sequence from its number: `0 ↦ []`, `n+1 ↦ a :: decode(r)` with `⟨a, r⟩ = n`.
pub fn decode_guess(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = n;
    while n > 0 {
        let (a, rest) = unpair(n - 1);
        out.push(a);
        n = rest;
    }
    out
}

/// Inverse of [`decode_guess`]; `None` on overflow.
pub fn encode_guess(codes: &[u64]) -> Option<u64> {
    codes.iter().rev().try_fold(0u64, |acc, &a| {
        let s = a.checked_add(acc)?;
        let tri = s.checked_mul(s.checked_add(1)?)? / 2;
        tri.checked_add(acc)?.checked_add(1)
    })
}

/// Exact run over the rationals.
pub fn run(p: &Program, inputs: &[Q], fuel: u64) -> Outcome<Q> {
    run_exact(p, inputs, fuel).0
}

/// Exact run with its test log.
pub fn run_exact(p: &Program, inputs: &[Q], fuel: u64) -> (Outcome<Q>, Vec<(String, Q, bool)>, u64) {
    let mut m = Machine::new(Rc::new(p.clone()), Exact::default(), inputs.to_vec());
    m.run_to(fuel).expect("exact runs never stall");
    (m.outcome(), std::mem::take(&mut m.carrier.log), m.steps())
}

/// Exact run with the precision argument `n` in `I1`.
pub fn run_analytic(p: &Program, inputs: &[Q], n: u64, fuel: u64) -> Outcome<Q> {
    let mut m = Machine::new(Rc::new(p.clone()), Exact::default(), inputs.to_vec());
    m.config_mut().index.insert(1, n);
    m.run_to(fuel).expect("exact runs never stall");
    m.outcome()
}

/// Rational inputs become constants; all other inputs must denote one point `x`.
pub fn symbolic_inputs(inputs: &[PointDescriptor]) -> Result<(Vec<Poly>, Option<Rc<dyn Point>>), String> {
    let mut point: Option<PointDescriptor> = None;
    let mut vals = Vec::new();
    for d in inputs {
        match d {
            PointDescriptor::Rat(r) => vals.push(Poly::constant(r.clone())),
            other => {
                match &point {
                    Some(p) if p != other => return Err("at most one non-rational input is supported".into()),
                    _ => point = Some(other.clone()),
                }
                vals.push(Poly::x());
            }
        }
    }
    Ok((vals, point.map(|p| Rc::new(p) as Rc<dyn Point>)))
}

fn symbolic_machine(p: &Program, inputs: &[PointDescriptor], resolver: Resolver) -> Result<Machine<Symbolic>, String> {
    let (vals, point) = symbolic_inputs(inputs)?;
    Ok(Machine::new(Rc::new(p.clone()), Symbolic::new(point, resolver), vals))
}

fn finish_symbolic(m: &mut Machine<Symbolic>, fuel: u64) -> Outcome<Poly> {
    match m.run_to(fuel) {
        Ok(()) => m.outcome(),
        Err(_) => Outcome::OutOfFuel,
    }
}

/// Exact run on descriptors, tracking registers as polynomials in `x`.
pub fn run_symbolic(p: &Program, inputs: &[PointDescriptor], fuel: u64) -> (Outcome<Poly>, Vec<TestEvent>) {
    match symbolic_machine(p, inputs, Resolver::Exact) {
        Ok(mut m) => {
            let out = finish_symbolic(&mut m, fuel);
            (out, m.carrier.log)
        }
        Err(e) => (Outcome::Unsupported(e), Vec::new()),
    }
}

/// Simulates `p` answering the `i`th test from guess `codes[i]`.
pub fn guess_run(p: &Program, inputs: &[PointDescriptor], codes: &[u64], fuel: u64) -> Outcome<Poly> {
    match symbolic_machine(p, inputs, Resolver::Guess { codes: codes.to_vec(), used: 0 }) {
        Ok(mut m) => finish_symbolic(&mut m, fuel),
        Err(e) => Outcome::Unsupported(e),
    }
}

/// The guess code read off an exact halting run: `0` for zero tests, `c+1`
/// with `c` the least certifying precision otherwise.
pub fn guess_code_for(p: &Program, inputs: &[PointDescriptor], fuel: u64) -> Option<Vec<u64>> {
    let (out, log) = run_symbolic(p, inputs, fuel);
    out.halted()?;
    let (_, point) = symbolic_inputs(inputs).ok()?;
    let origin = PointDescriptor::from(0);
    let x: &dyn Point = point.as_deref().unwrap_or(&origin);
    log.iter()
        .map(|e| {
            if e.value.is_zero() || x.vanishes(&e.value) == Some(true) {
                return Some(0);
            }
            (0..=4096u32).find(|&c| verdict(&e.value, x, c).ok() != Some(Verdict::Undecided)).map(|c| c as u64 + 1)
        })
        .collect()
}

/// The precision-`n` simulation `A_n`.
pub fn precision_machine(p: Rc<Program>, inputs: Vec<Poly>, point: Option<Rc<dyn Point>>, n: u32) -> Machine<Symbolic> {
    Machine::new(p, Symbolic::new(point, Resolver::Precision(n)), inputs)
}

/// Whether two machines branch differently within `l` steps.
fn diverge_within(a: &[(u64, bool)], b: &[(u64, bool)], l: u64) -> bool {
    a.iter().zip(b).take_while(|(x, _)| x.0 < l).any(|(x, y)| x != y)
}

/// `A_m` refutes `A_n` within `l` steps: they take different branches.
pub fn refutes(p: &Program, inputs: &[PointDescriptor], n: u32, m: u32, l: u64) -> bool {
    let Ok((vals, point)) = symbolic_inputs(inputs) else {
        return false;
    };
    let prog = Rc::new(p.clone());
    let mut a = precision_machine(prog.clone(), vals.clone(), point.clone(), n);
    let mut b = precision_machine(prog, vals, point, m);
    if a.run_to(l).is_err() || b.run_to(l).is_err() {
        return false;
    }
    diverge_within(a.branches(), b.branches(), l)
}

/// The loop emitting a bit stream with finitely many 1s iff the machine halts.
pub struct HaltingSim {
    prog: Rc<Program>,
    inputs: Vec<Poly>,
    point: Option<Rc<dyn Point>>,
    sims: HashMap<u32, Machine<Symbolic>>,
    n: u32,
    k: u64,
    last_change: u64,
    work: u64,
}

/// What one loop iteration wrote.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Iteration {
    pub not_halted: bool,
    pub refuted: bool,
}

impl Iteration {
    pub fn bits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3);
        if self.not_halted {
            out.push(1);
        }
        if self.refuted {
            out.push(1);
        }
        out.push(0);
        out
    }
}

impl HaltingSim {
    pub fn new(prog: Rc<Program>, inputs: Vec<Poly>, point: Option<Rc<dyn Point>>) -> Self {
        HaltingSim { prog, inputs, point, sims: HashMap::new(), n: 0, k: 0, last_change: 0, work: 0 }
    }

    pub fn for_descriptors(prog: Rc<Program>, inputs: &[PointDescriptor]) -> Result<Self, String> {
        let (vals, point) = symbolic_inputs(inputs)?;
        Ok(HaltingSim::new(prog, vals, point))
    }

    pub fn current(&self) -> u32 {
        self.n
    }

    pub fn iterations(&self) -> u64 {
        self.k
    }

    /// Iteration at which `n` last changed.
    pub fn last_change(&self) -> u64 {
        self.last_change
    }

    /// Machine steps executed so far, over all `A_n`.
    pub fn work(&self) -> u64 {
        self.work
    }

    fn advance(&mut self, n: u32, steps: u64) -> Result<(), Stall> {
        let (prog, inputs, point) = (&self.prog, &self.inputs, &self.point);
        let m = self.sims.entry(n).or_insert_with(|| precision_machine(prog.clone(), inputs.clone(), point.clone(), n));
        let before = m.steps();
        let r = m.run_to(steps);
        self.work += m.steps() - before;
        r
    }

    pub fn machine(&self, n: u32) -> Option<&Machine<Symbolic>> {
        self.sims.get(&n)
    }

    /// Runs iteration `k`. Retrying after a stall is safe.
    pub fn iterate(&mut self) -> Result<Iteration, Stall> {
        let k = self.k;
        let (m, l) = unpair(k);
        let n = self.n;
        self.advance(n, k)?;
        let not_halted = !self.sims[&n].has_halted();
        let mut refuted = false;
        if m > n as u64 && m <= u32::MAX as u64 {
            let m = m as u32;
            self.advance(m, l)?;
            refuted = diverge_within(self.sims[&n].branches(), self.sims[&m].branches(), l);
            if refuted {
                self.n = m;
                self.last_change = k;
            }
        }
        self.k += 1;
        Ok(Iteration { not_halted, refuted })
    }
}

/// Realizer of the halting stream for a single real input read from the tape.
pub fn halting_stream(p: Rc<Program>) -> Make {
    halting_realizer(move |_| Some(p.clone()), None, 1, 0)
}

struct HaltingRealizer {
    resolve: Rc<dyn Fn(u64) -> Option<Rc<Program>>>,
    program_at: Option<usize>,
    cache: TapeCache,
    stride: usize,
    offset: usize,
    sim: Option<HaltingSim>,
    queue: VecDeque<u8>,
}

/// Halting stream realizer. The program comes from `resolve(e)` where `e` is the
/// tape symbol at `program_at` (or `0` when absent); name position `j` of
/// the real input sits at tape index `stride·j + offset`. Unknown programs
/// behave like a machine that never halts.
pub fn halting_realizer(
    resolve: impl Fn(u64) -> Option<Rc<Program>> + 'static,
    program_at: Option<usize>,
    stride: usize,
    offset: usize,
) -> Make {
    let resolve: Rc<dyn Fn(u64) -> Option<Rc<Program>>> = Rc::new(resolve);
    Rc::new(move || {
        Box::new(HaltingRealizer {
            resolve: resolve.clone(),
            program_at,
            cache: Rc::new(RefCell::new(HashMap::new())),
            stride,
            offset,
            sim: None,
            queue: VecDeque::new(),
        })
    })
}

const NEVER_HALTS: &str = "spin: GOTO spin";

impl Realizer for HaltingRealizer {
    fn next(&mut self, tape: &mut Tape) -> Result<Sym, Diverged> {
        if self.sim.is_none() {
            let e = match self.program_at {
                Some(i) => small(&tape.get(i)?),
                None => 0,
            };
            let prog = (self.resolve)(e)
                .unwrap_or_else(|| Rc::new(Program::parse(NEVER_HALTS, Signature::ADD1).expect("fixed program")));
            let point: Rc<dyn Point> =
                Rc::new(NamePoint { cache: self.cache.clone(), stride: self.stride, offset: self.offset });
            self.sim = Some(HaltingSim::new(prog, vec![Poly::x()], Some(point)));
        }
        loop {
            if let Some(b) = self.queue.pop_front() {
                return Ok(sym(b as u64));
            }
            let sim = self.sim.as_mut().unwrap();
            let before = sim.work();
            match sim.iterate() {
                Ok(it) => {
                    let spent = sim.work() - before;
                    tape.tick(spent)?;
                    self.queue.extend(it.bits());
                }
                Err(Stall::Missing(i)) => {
                    let s = tape.get(i)?;
                    self.cache.borrow_mut().insert(i, s);
                }
                Err(Stall::Fuel) => return Err(Diverged),
            }
        }
    }
}

/// Least `n` such that every `A_m` with `m ≥ n` answers each test on the
/// exact path correctly; `None` if the exact run does not halt.
pub fn correct_precision(p: &Program, x: &PointDescriptor, fuel: u64) -> Option<u32> {
    let (out, log) = run_symbolic(p, std::slice::from_ref(x), fuel);
    out.halted()?;
    let mut need = 0u32;
    for e in &log {
        if x.vanishes(&e.value) == Some(true) || e.value.is_zero() {
            continue;
        }
        // a lower bound on |P(x)| from a separating enclosure
        let mut c = 4;
        let lb = loop {
            let (a, b) = enclose_value(&e.value, x, c).ok()?;
            if a.is_positive() {
                break a;
            }
            if b.is_negative() {
                break -b;
            }
            c *= 2;
            if c > 4096 {
                return None;
            }
        };
        let mut n = 0u32;
        while dyadic(n) >= lb {
            n += 1;
        }
        need = need.max(n);
    }
    Some(need)
}

/// Structural certificate for a halting run: an iteration `T < max_iters`
/// after which the halting stream provably emits only 0s, together with the
/// bits emitted before `T`.
pub fn halting_stabilization(p: &Program, x: &PointDescriptor, max_iters: u64, fuel: u64) -> Option<(u64, Vec<u8>)> {
    let need = correct_precision(p, x, fuel)?;
    let (_, exact_log) = run_symbolic(p, std::slice::from_ref(x), fuel);
    let exact: Vec<bool> = exact_log.iter().map(|e| e.outcome).collect();
    let prog = Rc::new(p.clone());
    let mut sim = HaltingSim::for_descriptors(prog, std::slice::from_ref(x)).ok()?;
    let mut bits = Vec::new();
    let mut per_iter = Vec::new();
    for _ in 0..max_iters {
        let it = sim.iterate().ok()?;
        per_iter.push(bits.len());
        bits.extend(it.bits());
    }
    let n = sim.current();
    let a = sim.machine(n)?;
    if !a.has_halted() || a.branches().iter().map(|b| b.1).collect::<Vec<_>>() != exact {
        return None;
    }
    let s = a.steps();
    let mut t = sim.last_change().max(s);
    for m in n as u64 + 1..need as u64 {
        let mut l = s;
        while pair(m, l) <= sim.last_change() {
            l += 1;
        }
        t = t.max(pair(m, l));
    }
    let t = t + 1;
    if t >= max_iters {
        return None;
    }
    let start = per_iter[t as usize];
    if bits[start..].contains(&1) {
        return None;
    }
    Some((t, bits[..start].to_vec()))
}

/// Simulates `p` on the single real input `x`, kept symbolic, answering zero
/// tests from AlgDec₁ bits. With `precision = Some(n)` the argument `n` is
/// placed in `I1`.
pub fn simulate_with_algdec(
    p: &Program,
    x: Rc<dyn Point>,
    bits: AlgDecBits,
    precision: Option<u64>,
    fuel: u64,
) -> Outcome<Poly> {
    let mut m = algdec_machine(Rc::new(p.clone()), x, bits, precision);
    finish_symbolic(&mut m, fuel)
}

/// The machine run by [`simulate_with_algdec`], for callers that resolve
/// [`Stall::Missing`] themselves.
pub fn algdec_machine(p: Rc<Program>, x: Rc<dyn Point>, bits: AlgDecBits, precision: Option<u64>) -> Machine<Symbolic> {
    let mut m = Machine::new(p, Symbolic::new(Some(x), Resolver::AlgDec(bits)), vec![Poly::x()]);
    if let Some(n) = precision {
        m.config_mut().index.insert(1, n);
    }
    m
}

/// Exact run of an LPO machine on ultimately periodic inputs.
pub fn run_streams(p: &Program, inputs: &[UPStream], fuel: u64) -> (Outcome<UPStream>, usize) {
    let mut m = stream_machine(p, StreamInputs::Exact(inputs.to_vec()), StreamResolver::Exact, inputs.len());
    let out = match m.run_to(fuel) {
        Ok(()) => m.outcome().map(|e| e.to_up(inputs)),
        Err(_) => Outcome::OutOfFuel,
    };
    (out, m.carrier.tests)
}

pub fn stream_machine(
    p: &Program,
    inputs: StreamInputs,
    resolver: StreamResolver,
    arity: usize,
) -> Machine<StreamCarrier> {
    let vals = (0..arity).map(|j| Rc::new(SExpr::Input(j))).collect();
    Machine::new(Rc::new(p.clone()), StreamCarrier::new(inputs, resolver), vals)
}

/// Guess semantics for LPO machines.
pub fn guess_run_streams(p: &Program, inputs: &[UPStream], codes: &[u64], fuel: u64) -> Outcome<UPStream> {
    let mut m = stream_machine(
        p,
        StreamInputs::Exact(inputs.to_vec()),
        StreamResolver::Guess { codes: codes.to_vec(), used: 0 },
        inputs.len(),
    );
    match m.run_to(fuel) {
        Ok(()) => m.outcome().map(|e| e.to_up(inputs)),
        Err(_) => Outcome::OutOfFuel,
    }
}

/// The guess code of an exact LPO run: `0` for `0^ω`, else one more than
/// the position of the first nonzero symbol.
pub fn stream_guess_code_for(p: &Program, inputs: &[UPStream], fuel: u64) -> Option<Vec<u64>> {
    let mut m = stream_machine(p, StreamInputs::Exact(inputs.to_vec()), StreamResolver::Exact, inputs.len());
    let mut codes = Vec::new();
    let mut pending: Vec<Rc<SExpr>> = Vec::new();
    // record each test argument by stepping manually
    while m.stopped().is_none() && m.steps() < fuel {
        let pc = m.config().pc;
        if let Some(Instr::Branch(_, _)) = m.program().lines().get(pc) {
            pending.push(m.config().reg(1, &Rc::new(SExpr::Zero)));
        }
        m.step().ok()?;
    }
    if !m.has_halted() {
        return None;
    }
    for e in pending {
        let up = e.to_up(inputs);
        let first = (0..up.prefix().len() + up.period().len()).find(|&i| !up.query(i).is_zero());
        codes.push(first.map_or(0, |i| i as u64 + 1));
    }
    Some(codes)
}

/// Stage-`s` rejection of guess number `g`, reading inputs from the tape cache.
pub fn lpo_rejected_by(p: &Program, inputs: StreamInputs, arity: usize, g: u64, stage: usize) -> Result<bool, Stall> {
    let codes = decode_guess(g);
    let mut m = stream_machine(p, inputs, StreamResolver::Stage { codes, used: 0, stage }, arity);
    m.run_to(stage as u64)?;
    Ok(matches!(m.stopped(), Some(Outcome::Rejected(_))))
}

/// Where a real input's halting behavior is known in closed form.
pub type HaltPredicate = fn(&PointDescriptor) -> Option<bool>;

/// A program shipped with the workbench.
#[derive(Clone)]
pub struct Shipped {
    pub name: &'static str,
    pub sig: Signature,
    pub text: String,
    pub about: &'static str,
    pub halts: HaltPredicate,
}

impl Shipped {
    pub fn program(&self) -> Rc<Program> {
        Rc::new(Program::parse(&self.text, self.sig).expect("shipped programs parse"))
    }
}

fn always(_: &PointDescriptor) -> Option<bool> {
    Some(true)
}

fn never_halts(_: &PointDescriptor) -> Option<bool> {
    Some(false)
}

fn rational_value(x: &PointDescriptor) -> Option<Option<Q>> {
    match x {
        PointDescriptor::Rat(r) => Some(Some(r.clone())),
        PointDescriptor::Alg(_) => Some(None),
        PointDescriptor::Limit(l) if l.certified > 0 => Some(None),
        PointDescriptor::Limit(_) => None,
    }
}

fn halts_nonneg_rational(x: &PointDescriptor) -> Option<bool> {
    rational_value(x).map(|r| r.is_some_and(|r| !r.is_negative()))
}

fn halts_rational(x: &PointDescriptor) -> Option<bool> {
    rational_value(x).map(|r| r.is_some())
}

fn halts_natural(x: &PointDescriptor) -> Option<bool> {
    rational_value(x).map(|r| r.is_some_and(|r| r.is_integer() && !r.is_negative()))
}

fn idq_body(one: &str) -> String {
    format!(
        "\
        MOV R5 R1
        MOV R2 R1
        APPLY add
        MOV R2 R0
        BRANCH eq R1 R2 -> zero      # x = x + x
        IDX SET I4 0                 # diagonal a + b
diag:   IDX SET I3 0                 # b = m - 1
pair:   IDX COPY I2 I4               # a = n - 1 = diagonal - b
        IDX COPY I5 I3
sub:    IDX JZ I5 -> sub_done
        IDX DEC I2
        IDX DEC I5
        GOTO sub
sub_done: {one}
        MOV R6 R0
        IDX COPY I5 I2
n_loop: IDX JZ I5 -> n_done
        {one}
        MOV R2 R0
        MOV R1 R6
        APPLY add
        MOV R6 R0
        IDX DEC I5
        GOTO n_loop
n_done: MOV R7 R5
        IDX COPY I5 I3
m_loop: IDX JZ I5 -> m_done
        MOV R1 R7
        MOV R2 R5
        APPLY add
        MOV R7 R0
        IDX DEC I5
        GOTO m_loop
m_done: MOV R1 R6
        MOV R2 R7
        BRANCH eq R1 R2 -> found     # n = m·x
        IDX COPY I5 I2
        IDX JZ I5 -> next_diag
        IDX INC I3
        GOTO pair
next_diag: IDX INC I4
        GOTO diag
found:  {one}
        MOV R8 R0
        IDX COPY I5 I3
f_loop: IDX JZ I5 -> f_done
        {one}
        MOV R2 R0
        MOV R1 R8
        APPLY add
        MOV R8 R0
        IDX DEC I5
        GOTO f_loop
f_done: MOV R1 R8
        MOV R0 R6
        IDX SET I0 1
        HALT
zero:   {one}
        MOV R1 R0
        MOV R0 R9
        IDX SET I0 1
        HALT
"
    )
}

/// The shipped program family; the position in this list is the program index.
pub fn shipped() -> Vec<Shipped> {
    let s = |name, sig, text: &str, about, halts| Shipped { name, sig, text: text.to_string(), about, halts };
    vec![
        Shipped {
            name: "idq",
            sig: Signature::ADD1,
            text: format!("# n/m for a nonnegative rational input\n{}", idq_body("APPLY one")),
            about: "id on nonnegative rationals over (R,+,=,1); outputs (n, m) with m·x = n",
            halts: halts_nonneg_rational,
        },
        Shipped {
            name: "ratq",
            sig: Signature::OF,
            text: format!(
                ".constants\n        CONST R10 = 1\n        MOV R2 R9\n        BRANCH lt R1 R2 -> flip\n        GOTO start\n\
                 flip:   MOV R2 R1\n        MOV R1 R9\n        APPLY sub\n        MOV R1 R0\n\
                 start:\n{}",
                idq_body("MOV R0 R10")
            ),
            about: "n/m for |x|; halts exactly on rationals",
            halts: halts_rational,
        },
        s("halt_now", Signature::ADD1, "HALT", "halts at once", always),
        s("diverge", Signature::ADD1, "spin: GOTO spin", "never halts", never_halts),
        s(
            "double",
            Signature::ADD1,
            "MOV R2 R1\nAPPLY add\nIDX SET I0 0\nHALT",
            "x + x",
            always,
        ),
        s(
            "is_zero",
            Signature::ADD1,
            "MOV R2 R1\nAPPLY add\nMOV R2 R0\nBRANCH eq -> yes\nMOV R0 R9\nIDX SET I0 0\nHALT\nyes: APPLY one\nIDX SET I0 0\nHALT",
            "1 if x = 0 else 0",
            always,
        ),
        s(
            "sign",
            Signature::OF,
            ".constants\nCONST R10 = 1\nCONST R11 = -1\nMOV R2 R9\nBRANCH lt -> neg\nBRANCH eq -> zero\n\
             MOV R0 R10\nGOTO out\nneg: MOV R0 R11\nGOTO out\nzero: MOV R0 R9\nout: IDX SET I0 0\nHALT",
            "sign of x",
            always,
        ),
        s(
            "floor",
            Signature::OF,
            ".constants\nCONST R10 = 1\nMOV R5 R1\nloop: MOV R1 R6\nMOV R2 R10\nAPPLY add\nMOV R7 R0\n\
             MOV R1 R5\nMOV R2 R7\nBRANCH lt -> done\nMOV R6 R7\nGOTO loop\ndone: MOV R0 R6\nIDX SET I0 0\nHALT",
            "floor of x for x ≥ 0, else 0",
            always,
        ),
        s(
            "divide",
            Signature::OF,
            "APPLY div\nIDX SET I0 0\nHALT",
            "R1 / R2",
            always,
        ),
        s(
            "nat_test",
            Signature::ADD1,
            "loop: MOV R2 R6\nBRANCH eq -> done\nMOV R7 R1\nAPPLY one\nMOV R2 R0\nMOV R1 R6\nAPPLY add\nMOV R6 R0\n\
             MOV R1 R7\nGOTO loop\ndone: MOV R0 R6\nIDX SET I0 0\nHALT",
            "halts iff x is a natural number, outputting x",
            halts_natural,
        ),
        s(
            "root_sqrt2",
            Signature::RING,
            ".constants\nCONST R10 = -2\nCONST R11 = 1\nMOV R2 R1\nAPPLY mul\nMOV R1 R0\nMOV R2 R10\nAPPLY add\n\
             MOV R1 R0\nMOV R2 R9\nBRANCH eq -> yes\nMOV R0 R9\nIDX SET I0 0\nHALT\nyes: MOV R0 R11\nIDX SET I0 0\nHALT",
            "1 if x² = 2 else 0",
            always,
        ),
        s(
            "idempotent",
            Signature::RING,
            ".constants\nCONST R11 = 1\nMOV R2 R1\nAPPLY mul\nMOV R2 R0\nBRANCH eq -> yes\nMOV R0 R9\nIDX SET I0 0\nHALT\n\
             yes: MOV R0 R11\nIDX SET I0 0\nHALT",
            "1 if x² = x else 0",
            always,
        ),
        s(
            "root_order",
            Signature::RING,
            ".constants\nCONST R10 = 1\nMOV R5 R1\nMOV R6 R1\nIDX SET I4 4\nloop: MOV R1 R6\nMOV R2 R10\n\
             BRANCH eq -> hit\nIDX INC I5\nIDX DEC I4\nIDX JZ I4 -> miss\nMOV R1 R6\nMOV R2 R5\nAPPLY mul\nMOV R6 R0\n\
             GOTO loop\nhit: IDX INC I5\nMOV R0 R9\ncount: IDX JZ I5 -> out\nMOV R1 R0\nMOV R2 R10\nAPPLY add\n\
             IDX DEC I5\nGOTO count\nmiss: MOV R0 R9\nout: IDX SET I0 0\nHALT",
            "least k ≤ 4 with x^k = 1, else 0",
            always,
        ),
        s(
            "small_int",
            Signature::RING,
            ".constants\nCONST R10 = 0\nCONST R11 = 1\nCONST R12 = -1\nCONST R13 = 2\nCONST R14 = -2\nCONST R15 = 3\n\
             CONST R16 = -3\nIDX SET I3 10\nloop: IDX COPY I1 I3\nIDX SET I0 2\nCOPYIND\nBRANCH eq -> hit\nIDX INC I3\n\
             IDX SET I4 17\nIDX COPY I5 I3\nsub: IDX JZ I4 -> out_x\nIDX DEC I4\nIDX DEC I5\nGOTO sub_chk\n\
             sub_chk: IDX JZ I5 -> loop_end\nGOTO sub\nloop_end: GOTO loop\nout_x: MOV R2 R11\nAPPLY mul\nIDX SET I0 0\nHALT\n\
             hit: MOV R0 R2\nIDX SET I0 0\nHALT",
            "x itself, found among −3..3 by equality tests when possible",
            always,
        ),
        s(
            "ident",
            Signature::OF,
            "MOV R0 R1\nIDX SET I0 0\nHALT",
            "G(n, x) = x for every n",
            always,
        ),
        s(
            "algdec_partial",
            Signature::ALG,
            ".constants
        IDX COPY I2 I1          # remaining terms
        CONST R10 = 1
        CONST R11 = 1/4
        MOV R5 R1
        MOV R7 R11              # weight 4^(-k-1)
loop:   MOV R1 R6
        MOV R2 R5
        APPLY penum
        MOV R1 R0
        MOV R2 R9
        BRANCH eq -> hit
        GOTO next
hit:    MOV R1 R8
        MOV R2 R7
        APPLY add
        MOV R8 R0
next:   IDX JZ I2 -> done
        IDX DEC I2
        MOV R1 R6
        MOV R2 R10
        APPLY add
        MOV R6 R0
        MOV R1 R7
        MOV R2 R11
        APPLY mul
        MOV R7 R0
        GOTO loop
done:   MOV R0 R8
        IDX SET I0 0
        HALT",
            "G(n, x) = Σ_{k ≤ n, P_k(x) = 0} 4^(-k-1)",
            always,
        ),
        s(
            "lpo_max",
            Signature::LPO,
            "        MOV R5 R1
loop:   MOV R1 R5
        MOV R2 R6
        APPLY exceed             # positions where p exceeds i
        MOV R1 R0
        BRANCH lpo -> done
        MOV R1 R6
        APPLY succ
        MOV R6 R0
        GOTO loop
done:   MOV R0 R6
        IDX SET I0 0
        HALT",
            "max of a bounded sequence, as the constant stream",
            always,
        ),
        s(
            "lpo_count",
            Signature::LPO,
            "        IDX COPY I2 I0
        IDX SET I3 1
loop:   IDX JZ I2 -> done
        IDX SET I0 1
        IDX COPY I1 I3
        COPYIND
        BRANCH lpo -> hit
        GOTO step
hit:    MOV R1 R100
        APPLY succ
        MOV R100 R0
step:   IDX INC I3
        IDX DEC I2
        GOTO loop
done:   MOV R0 R100
        IDX SET I0 0
        HALT",
            "number of inputs equal to 0^ω",
            always,
        ),
    ]
}

pub fn shipped_named(name: &str) -> Option<Shipped> {
    shipped().into_iter().find(|s| s.name == name)
}

pub fn shipped_index(name: &str) -> Option<u64> {
    shipped().iter().position(|s| s.name == name).map(|i| i as u64)
}

pub fn shipped_at(e: u64) -> Option<Shipped> {
    shipped().into_iter().nth(e as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qr;

    fn prog(name: &str) -> Program {
        let s = shipped_named(name).unwrap();
        Program::parse(&s.text, s.sig).unwrap()
    }

    fn sqrt2() -> PointDescriptor {
        "alg:[-2,0,1]#1".parse().unwrap()
    }

    // first (n, m) with n, m ≥ 1 in Cantor order of (n−1, m−1) with m·x = n
    fn idq_oracle(x: &Q) -> (Q, Q) {
        if x.is_zero() {
            return (q(0), q(1));
        }
        for k in 0.. {
            let (a, b) = unpair(k);
            let (n, m) = (q(a as i64 + 1), q(b as i64 + 1));
            if &m * x == n {
                return (n, m);
            }
        }
        unreachable!()
    }

    #[test]
    fn every_shipped_program_parses() {
        for s in shipped() {
            Program::parse(&s.text, s.sig).unwrap_or_else(|e| panic!("{}: {e}", s.name));
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Program::parse("HALT\nAPPLY frobnicate\n", Signature::OF).unwrap_err();
        assert!(e.0.starts_with("line 2:"), "{e}");
        let e = Program::parse("GOTO nowhere", Signature::OF).unwrap_err();
        assert!(e.0.contains("line 1") && e.0.contains("nowhere"));
        let e = Program::parse("CONST R1 = 2", Signature::OF).unwrap_err();
        assert!(e.0.contains("constants"));
        assert!(Program::parse("APPLY add R1 R3\nHALT", Signature::OF).is_err());
        assert!(Program::parse("L3: APPLY add R1 R2\nBRANCH eq -> L3\nHALT", Signature::OF).is_ok());
    }

    #[test]
    fn load_examples() {
        let c: Config<Q> = load(vec![]);
        assert_eq!(c.idx(0), 0);
        assert_eq!(c.reg(3, &q(0)), q(0));
        let c = load(vec![qr(1, 2)]);
        assert_eq!((c.idx(0), c.reg(1, &q(0))), (1, qr(1, 2)));
        assert_eq!(load(vec![q(1), q(2), q(3)]).idx(0), 3);
    }

    #[test]
    fn idq_examples() {
        let p = prog("idq");
        assert_eq!(run(&p, &[qr(3, 4)], 1_000_000), Outcome::Halted(vec![q(3), q(4)]));
        assert_eq!(run(&p, &[q(0)], 1_000), Outcome::Halted(vec![q(0), q(1)]));
        for (a, b) in [(1, 2), (5, 3), (2, 4), (7, 1), (0, 5)] {
            let x = qr(a, b);
            let (n, m) = idq_oracle(&x);
            assert_eq!(run(&p, &[x], 10_000_000), Outcome::Halted(vec![n, m]));
        }
        assert_eq!(run(&p, &[qr(3, 4)], 10), Outcome::OutOfFuel);
        let r = prog("ratq");
        assert_eq!(run(&r, &[qr(-3, 4)], 1_000_000), Outcome::Halted(vec![q(3), q(4)]));
    }

    #[test]
    fn division_by_zero_is_undefined() {
        let p = prog("divide");
        assert!(matches!(run(&p, &[q(1), q(0)], 100), Outcome::Undefined(_)));
        assert_eq!(run(&p, &[q(1), q(4)], 100), Outcome::Halted(vec![qr(1, 4)]));
    }

    #[test]
    fn small_programs() {
        let cases: &[(&str, Q, Q)] = &[
            ("double", qr(3, 2), q(3)),
            ("is_zero", q(0), q(1)),
            ("is_zero", q(5), q(0)),
            ("sign", qr(-1, 3), q(-1)),
            ("floor", qr(7, 2), q(3)),
            ("floor", qr(-7, 2), q(0)),
            ("nat_test", q(4), q(4)),
            ("root_sqrt2", q(2), q(0)),
            ("idempotent", q(1), q(1)),
            ("root_order", q(-1), q(2)),
            ("root_order", q(2), q(0)),
            ("small_int", q(-2), q(-2)),
            ("small_int", qr(5, 2), qr(5, 2)),
            ("ident", qr(2, 7), qr(2, 7)),
        ];
        for (name, x, want) in cases {
            let out = run(&prog(name), std::slice::from_ref(x), 100_000);
            assert_eq!(out, Outcome::Halted(vec![want.clone()]), "{name} on {x}");
        }
        assert_eq!(run(&prog("nat_test"), &[qr(1, 2)], 10_000), Outcome::OutOfFuel);
        assert_eq!(run(&prog("diverge"), &[q(1)], 10_000), Outcome::OutOfFuel);
    }

    #[test]
    fn guess_examples() {
        let p = prog("idq");
        let half = PointDescriptor::rat(1, 2);
        let codes = guess_code_for(&p, std::slice::from_ref(&half), 1_000_000).unwrap();
        // read the outcomes off the exact trace independently
        let (_, log, _) = run_exact(&p, &[qr(1, 2)], 1_000_000);
        let expected: Vec<u64> = log.iter().map(|(_, v, _)| if v.is_zero() { 0 } else { 1 }).collect();
        assert_eq!(codes, expected);
        assert_eq!(
            guess_run(&p, std::slice::from_ref(&half), &codes, 1_000_000),
            Outcome::Halted(vec![Poly::constant(q(1)), Poly::constant(q(2))])
        );
        // the all-true guesses on √2
        for len in 0..6 {
            let out = guess_run(&p, &[sqrt2()], &vec![0; len], 1_000_000);
            assert!(matches!(out, Outcome::Rejected(_)), "{len}: {out}");
        }
        assert!(matches!(guess_run(&p, &[sqrt2()], &[0], 1000), Outcome::Rejected(Rejection::TrueRefuted { test: 0 })));
        // a false guess on an exactly true test
        let z = prog("is_zero");
        assert!(matches!(
            guess_run(&z, &[PointDescriptor::rat(0, 1)], &[5], 1000),
            Outcome::Rejected(Rejection::FalseOnZero { .. })
        ));
        assert!(matches!(
            guess_run(&z, &[PointDescriptor::rat(0, 1)], &[0, 0], 1000),
            Outcome::Rejected(Rejection::Unused { .. })
        ));
    }

    #[test]
    fn guess_code_numbers() {
        for n in 0..2000 {
            assert_eq!(encode_guess(&decode_guess(n)), Some(n));
        }
        assert_eq!(decode_guess(0), Vec::<u64>::new());
        assert_eq!(decode_guess(1), vec![0]);
        assert_eq!(encode_guess(&[1, 1, 1, 0]), Some(434));
    }

    #[test]
    fn precision_examples() {
        let x = Poly::x();
        assert_eq!(eval_test_at_precision(&x, &sqrt2(), 2), Verdict::Positive);
        for c in 0..20 {
            assert_eq!(eval_test_at_precision(&x, &PointDescriptor::rat(0, 1), c), Verdict::Undecided);
        }
        let below = &x - &Poly::one();
        assert_eq!(eval_test_at_precision(&below, &PointDescriptor::rat(1, 2), 4), Verdict::Negative);
        // √2 − 1.41 is about 0.0042: undecided coarsely, decided finely
        let close = &x - &Poly::constant(qr(141, 100));
        assert_eq!(eval_test_at_precision(&close, &sqrt2(), 3), Verdict::Undecided);
        assert_eq!(eval_test_at_precision(&close, &sqrt2(), 12), Verdict::Positive);
    }

    #[test]
    fn refutation_examples() {
        let p = prog("idq");
        let half = [PointDescriptor::rat(1, 2)];
        for m in 1..=50 {
            for l in 0..=50 {
                assert!(!refutes(&p, &half, 0, m, l));
            }
        }
        assert!(!refutes(&p, &[sqrt2()], 0, 40, 0));
        // A_0 takes 1 = 1·√2 as true and halts; a fine A_m does not
        let (vals, point) = symbolic_inputs(&[sqrt2()]).unwrap();
        let mut coarse = precision_machine(Rc::new(p.clone()), vals, point, 0);
        coarse.run_to(100_000).unwrap();
        assert!(coarse.has_halted());
        assert!(refutes(&p, &[sqrt2()], 0, 20, 100_000));
    }

    #[test]
    fn halting_stream_examples() {
        let now = shipped_named("halt_now").unwrap().program();
        let mut sim = HaltingSim::for_descriptors(now, &[PointDescriptor::rat(5, 1)]).unwrap();
        let bits: Vec<u8> = (0..200).flat_map(|_| sim.iterate().unwrap().bits()).collect();
        assert_eq!(bits.iter().filter(|&&b| b == 1).count(), 1);
        assert_eq!(&bits[..2], &[1, 0]);

        let p = prog("idq");
        let (t, head) = halting_stabilization(&p, &PointDescriptor::rat(1, 2), 50_000, 1_000_000).unwrap();
        assert!(t < 50_000 && head.contains(&1));

        let idq = Rc::new(p);
        let mut sim = HaltingSim::for_descriptors(idq, &[sqrt2()]).unwrap();
        let ones: usize = (0..10_000).map(|_| sim.iterate().unwrap().bits().iter().filter(|&&b| b == 1).count()).sum();
        assert!(ones >= 10, "{ones}");
    }

    #[test]
    fn halting_realizer_reads_the_name() {
        use crate::stream::{run, RunBudget};
        let idq = shipped_named("idq").unwrap().program();
        let x = PointDescriptor::rat(3, 4);
        let mut sim = HaltingSim::for_descriptors(idq.clone(), std::slice::from_ref(&x)).unwrap();
        let direct: Vec<u8> = (0..300).flat_map(|_| sim.iterate().unwrap().bits()).take(300).collect();
        let trace = run(&halting_stream(idq), x.real_name(), RunBudget::new(10_000_000, 300)).unwrap();
        let streamed: Vec<u8> = trace.output.iter().map(|s| small(s) as u8).collect();
        // name enclosures differ from descriptor enclosures, so compare counts only
        assert_eq!(streamed.len(), direct.len());
        assert!(streamed.iter().all(|&b| b <= 1));
    }

    #[test]
    fn algdec_simulation_examples() {
        let x = sqrt2();
        let bits: AlgDecBits = {
            let x = x.clone();
            Rc::new(move |n| Ok(x.vanishes(&enum_poly(n)).unwrap()))
        };
        let root = prog("root_sqrt2");
        let out = simulate_with_algdec(&root, Rc::new(x.clone()), bits.clone(), None, 10_000);
        assert_eq!(out, Outcome::Halted(vec![Poly::one()]));
        let mut s = Symbolic::new(Some(Rc::new(x.clone())), Resolver::AlgDec(bits.clone()));
        assert!(!s.test("eq", &[Poly::x(), Poly::one()]).unwrap());
        assert!(s.test("eq", &[&Poly::x() * &Poly::x(), Poly::constant(q(2))]).unwrap());
        for name in ["root_sqrt2", "idempotent", "root_order", "small_int"] {
            let p = prog(name);
            for r in [q(2), q(1), q(-1), qr(1, 2), q(0)] {
                let d = PointDescriptor::Rat(r.clone());
                let bits: AlgDecBits = {
                    let d = d.clone();
                    Rc::new(move |n| Ok(d.vanishes(&enum_poly(n)).unwrap()))
                };
                let sim = simulate_with_algdec(&p, Rc::new(d.clone()), bits, None, 100_000).map(|v| v.eval(&r));
                assert_eq!(sim, run(&p, std::slice::from_ref(&r), 100_000), "{name} on {r}");
            }
        }
    }

    #[test]
    fn analytic_partial_sums() {
        let p = prog("algdec_partial");
        let x = q(1);
        for n in 0..8u64 {
            let out = run_analytic(&p, std::slice::from_ref(&x), n, 1_000_000);
            let want: Q = (0..=n)
                .filter(|&k| enum_poly(&k.into()).eval(&x).is_zero())
                .map(|k| Q::new(1.into(), num_bigint::BigInt::from(4u32).pow(k as u32 + 1)))
                .fold(q(0), |a, b| a + b);
            assert_eq!(out, Outcome::Halted(vec![want]));
        }
        let id = prog("ident");
        assert_eq!(run_analytic(&id, &[qr(2, 3)], 9, 100), Outcome::Halted(vec![qr(2, 3)]));
    }

    #[test]
    fn lpo_machines() {
        let p = prog("lpo_max");
        let s = UPStream::from_u64(&[0, 3, 1], &[3]);
        let (out, _) = run_streams(&p, std::slice::from_ref(&s), 10_000);
        assert_eq!(out, Outcome::Halted(vec![UPStream::constant(3)]));
        let codes = stream_guess_code_for(&p, std::slice::from_ref(&s), 10_000).unwrap();
        assert_eq!(codes, vec![2, 2, 2, 0]);
        assert_eq!(guess_run_streams(&p, std::slice::from_ref(&s), &codes, 10_000), out);
        assert!(matches!(guess_run_streams(&p, std::slice::from_ref(&s), &[0], 10_000), Outcome::Rejected(_)));
        assert!(matches!(guess_run_streams(&p, std::slice::from_ref(&s), &[1, 2, 2, 0], 10_000), Outcome::Rejected(_)));
        let c = prog("lpo_count");
        let ins = [UPStream::constant(0), UPStream::from_u64(&[1], &[0]), UPStream::constant(0)];
        assert_eq!(run_streams(&c, &ins, 10_000).0, Outcome::Halted(vec![UPStream::constant(2)]));
    }
}
