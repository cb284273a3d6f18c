//! Reduction witnesses as honest stream transducers, and the harness that
//! checks them against ideal oracles.
//!
//! A witness has one or more stages. Stage `i` runs its pre-processor on
//! the interleaving of the input name with the answers of the earlier
//! stages, and its oracle answers the structured push of that stage. The
//! post-processor reads the input name interleaved with every answer.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{dyadic, enum_algebraic, enum_poly_u64, first_index, is_zero_at, Poly, Q};
use crate::machine::{
    algdec_machine, decode_guess, encode_guess, guess_run_streams, halting_realizer, lpo_rejected_by, shipped_at,
    shipped_index, stream_guess_code_for, stream_machine, AlgDecBits, HaltingSim, NamePoint, NameSource, Outcome,
    Point, Program, Stall, StreamInputs, StreamResolver, TapeCache,
};
use crate::problems::{
    transducer_index, Answer, Bits, ClosedSet, Count, DomainError, Form, Instance, MarkerScan, Problem, Schedule,
    TRANSDUCERS,
};
use crate::spaces::{marker, markers_within, nu_q, nu_q_inv, sierp_name, NatSet, PointDescriptor};
use crate::stream::{
    pair, positional, run, small, stateful, sym, take, unpair, Diverged, Interleave, Make, Rule, RunBudget, Source,
    Src, Sym, Tape, UPStream,
};
use crate::ParseError;

pub const DEPTH: usize = 64;
pub const FUEL: u64 = 1_000_000;

/// Maps a source instance and the answers of earlier stages to the
/// structured instance handed to this stage's oracle.
pub type Push = Rc<dyn Fn(&Instance, &[Answer]) -> Result<Instance, DomainError>>;

#[derive(Clone)]
pub struct Stage {
    pub pre: Make,
    pub oracle: Problem,
    pub push: Push,
}

#[derive(Clone)]
pub struct Witness {
    pub id: &'static str,
    pub source: Problem,
    pub about: &'static str,
    pub stages: Vec<Stage>,
    pub post: Make,
}

impl Witness {
    /// The oracle side, innermost stage last: `C_ℕ ⋆ isFinite_𝕊` for a pipeline.
    pub fn target(&self) -> String {
        let names: Vec<&str> = self.stages.iter().rev().map(|s| s.oracle.title()).collect();
        names.join(" ⋆ ")
    }

    pub fn statement(&self) -> String {
        format!("{} ≤ {}", self.source.title(), self.target())
    }
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id, self.statement())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown witness `{0}`")]
pub struct UnknownWitness(pub String);

pub const IDS: [&str; 38] = [
    "R1", "R2", "R3a", "R3b", "R3c", "R3d", "R3e", "R3f", "R3g", "R3h", "R3i", "R3j", "R4a", "R4b", "R5", "R6", "R7a",
    "R7b", "R8", "R9", "R10", "R11", "R12a", "R12b", "R13", "R14", "R15", "R16", "R17", "R18", "R19", "R20", "R21",
    "R22", "R23", "R24", "R25", "R26",
];

pub fn registry() -> &'static [&'static str] {
    &IDS
}

/// Ids named by `id`: itself, or the members of a group such as `R3`.
pub fn expand(id: &str) -> Result<Vec<&'static str>, UnknownWitness> {
    if let Some(&one) = registry().iter().find(|&&r| r == id) {
        return Ok(vec![one]);
    }
    let members: Vec<&'static str> = registry()
        .iter()
        .copied()
        .filter(|r| r.starts_with(id) && r[id.len()..].chars().all(|c| c.is_ascii_lowercase()))
        .collect();
    if members.is_empty() || id.is_empty() {
        return Err(UnknownWitness(id.to_string()));
    }
    Ok(members)
}

pub fn get_witness(id: &str) -> Result<Witness, UnknownWitness> {
    let w = match id {
        "R1" => r1(),
        "R2" => r2(),
        "R3a" => r3a(),
        "R3b" => r3b(),
        "R3c" => r3c(),
        "R3d" => r3d(),
        "R3e" => r3e(),
        "R3f" => r3f(),
        "R3g" => r3g(),
        "R3h" => r3h(),
        "R3i" => r3i(),
        "R3j" => r3j(),
        "R4a" => r4a(),
        "R4b" => r4b(),
        "R5" => r5(),
        "R6" => r6(),
        "R7a" => r7(true),
        "R7b" => r7(false),
        "R8" => r8(),
        "R9" => r9(),
        "R10" => r10(),
        "R11" => r11(),
        "R12a" => r12a(),
        "R12b" => r12b(),
        "R13" => r13(),
        "R14" => r14(),
        "R15" => r15(),
        "R16" => r16(),
        "R17" => r17(),
        "R18" => r18(),
        "R19" => r19(),
        "R20" => r20(),
        "R21" => r21(),
        "R22" => r22(),
        "R23" => r23(),
        "R24" => r24(),
        "R25" => r25(),
        "R26" => r26(),
        _ => return Err(UnknownWitness(id.to_string())),
    };
    Ok(w)
}

/// `w` with the first stage's push name changed at position `at`.
pub fn corrupted(mut w: Witness, at: usize) -> Witness {
    let inner = w.stages[0].push.clone();
    w.stages[0].push = Rc::new(move |x, a| {
        let mut y = inner(x, a)?;
        y.name = Rc::new(Corrupt { base: y.name.clone(), at });
        Ok(y)
    });
    w
}

struct Corrupt {
    base: Src,
    at: usize,
}

impl Source for Corrupt {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        let s = self.base.at(i)?;
        Ok(if i == self.at {
            if s.is_zero() {
                sym(1)
            } else {
                sym(0)
            }
        } else {
            s
        })
    }
}

fn single(
    id: &'static str,
    source: Problem,
    target: Problem,
    about: &'static str,
    pre: Make,
    push: Push,
    post: Make,
) -> Witness {
    Witness { id, source, about, stages: vec![Stage { pre, oracle: target, push }], post }
}

fn push(f: impl Fn(&Instance) -> Result<Instance, DomainError> + 'static) -> Push {
    Rc::new(move |x, _| f(x))
}

fn same() -> Push {
    push(|x| Ok(x.clone()))
}

type Read<'a> = dyn FnMut(usize) -> Result<Sym, Diverged> + 'a;

/// Answer position `i` on a post-processor tape of a single-stage witness.
fn ans(t: &mut Tape, i: usize) -> Result<Sym, Diverged> {
    t.get(2 * i + 1)
}

/// Input position `i` on a post-processor tape of a single-stage witness.
fn inp(t: &mut Tape, i: usize) -> Result<Sym, Diverged> {
    t.get(2 * i)
}

fn copy_answer() -> Make {
    positional(|k, t| ans(t, k))
}

fn total(src: &Src, i: usize) -> Sym {
    src.at(i).expect("structured names are total")
}

/// Runs a stepper against a tape.
fn realizer<S: Clone + 'static>(
    init: S,
    step: impl Fn(&mut S, &mut Read) -> Result<Sym, Diverged> + Clone + 'static,
) -> Make {
    stateful(init, move |s, t| step(s, &mut |i| t.get(i)))
}

/// The same stepper run on a structured name, memoized.
fn replay<S: 'static>(init: S, src: Src, step: impl Fn(&mut S, &mut Read) -> Result<Sym, Diverged> + 'static) -> Src {
    let state = RefCell::new((init, Vec::<Sym>::new()));
    Rule::new(move |i| {
        let mut st = state.borrow_mut();
        let (s, out) = &mut *st;
        while out.len() <= i {
            let sym = step(s, &mut |k| Ok(total(&src, k))).expect("structured names are total");
            out.push(sym);
        }
        out[i].clone()
    })
}

/// Exclusion decided at stage `t` from the first `need(t)` input symbols.
type StageRule = Rc<dyn Fn(&[Sym], u64, usize) -> bool>;

/// Builds the canonical closed-set name of a stage rule, reading input on demand.
#[derive(Clone)]
struct NameBuilder {
    rule: StageRule,
    need: fn(usize) -> usize,
    sched: Schedule,
    word: Vec<Sym>,
    out: Vec<Sym>,
    pos: usize,
}

impl NameBuilder {
    fn new(rule: StageRule, need: fn(usize) -> usize) -> Self {
        NameBuilder { rule, need, sched: Schedule::default(), word: Vec::new(), out: Vec::new(), pos: 0 }
    }

    fn at(&mut self, i: usize, read: &mut Read) -> Result<Sym, Diverged> {
        while self.out.len() <= i {
            let need = self.need;
            let n = need(self.sched.stage());
            while self.word.len() < n {
                let s = read(self.word.len())?;
                self.word.push(s);
            }
            let (word, rule) = (&self.word, &self.rule);
            let syms = self.sched.advance::<()>(|c, s| Ok(rule(&word[..need(s)], c, s))).expect("infallible");
            self.out.extend(syms);
        }
        Ok(self.out[i].clone())
    }

    fn next(&mut self, read: &mut Read) -> Result<Sym, Diverged> {
        let s = self.at(self.pos, read)?;
        self.pos += 1;
        Ok(s)
    }
}

fn upto(t: usize) -> usize {
    t
}

fn through(t: usize) -> usize {
    t + 1
}

fn closed_pre(rule: StageRule, need: fn(usize) -> usize) -> Make {
    realizer(NameBuilder::new(rule, need), |nb, read| nb.next(read))
}

/// A pushed closed set whose exclusions are read off the source name.
fn closed_push(
    label: String,
    least: Option<u64>,
    member: impl Fn(u64) -> bool + 'static,
    src: Src,
    rule: StageRule,
    need: fn(usize) -> usize,
) -> Instance {
    let word = RefCell::new(Vec::<Sym>::new());
    let set = ClosedSet::new(label, least, member, move |c, t| {
        let n = need(t);
        let mut w = word.borrow_mut();
        while w.len() < n {
            let k = w.len();
            w.push(total(&src, k));
        }
        rule(&w[..n], c, t)
    });
    Instance::closed(set)
}

/// Stage at which every number below `least` has been excluded in a closed name.
fn settle_stage(name: &Src, least: u64) -> usize {
    let mut scan = MarkerScan::default();
    let mut s = 0;
    while scan.least_absent() < least {
        scan.push(&total(name, s));
        s += 1;
    }
    s
}

fn least_absent_after(read: &mut Read, s: usize) -> Result<u64, Diverged> {
    let mut scan = MarkerScan::default();
    for i in 0..s {
        scan.push(&read(i)?);
    }
    Ok(scan.least_absent())
}

/// Closed-name scanner emitting `0` while its zero count lags the last
/// stage at which the least unexcluded number moved, then `1`.
#[derive(Clone, Default)]
struct SortEncoder {
    scan: MarkerScan,
    least: u64,
    last_move: u64,
    zeros: u64,
    step: usize,
}

impl SortEncoder {
    fn next(&mut self, read: &mut Read) -> Result<Sym, Diverged> {
        if self.step >= 1 {
            let s = read(self.step - 1)?;
            self.scan.push(&s);
            let l = self.scan.least_absent();
            if l != self.least {
                self.least = l;
                self.last_move = self.step as u64;
            }
        }
        self.step += 1;
        Ok(if self.zeros < self.last_move {
            self.zeros += 1;
            sym(0)
        } else {
            sym(1)
        })
    }
}

fn sort_zeros(read: &mut Read) -> Result<u64, Diverged> {
    let mut n = 0;
    while read(n as usize)?.is_zero() {
        n += 1;
    }
    Ok(n)
}

// ---- R1, R2: max_ℕℕ and LPO⋄

fn r1() -> Witness {
    let e = shipped_index("lpo_max").expect("shipped");
    single(
        "R1",
        Problem::MaxNN,
        Problem::LpoDiamond,
        "run the max-search program with LPO tests on p",
        positional(move |k, t| if k % 2 == 0 { Ok(sym(pair(e, 1))) } else { t.get(k / 2) }),
        push(move |x| Ok(Instance::diamond(e, &[x.as_seq()?.clone()]))),
        positional(|_, t| ans(t, 1)),
    )
}

fn program_of(e: u64) -> Option<Rc<Program>> {
    shipped_at(e).map(|s| s.program())
}

/// Input `j` of an LPO⋄ name at position `i`.
fn diamond_locate(arity: usize, j: usize, i: usize) -> usize {
    2 * (arity * i + j) + 1
}

#[derive(Clone, Default)]
struct GuessScan {
    head: Option<(Rc<Program>, usize, TapeCache)>,
    sched: Schedule,
    queue: VecDeque<Sym>,
}

fn r2_pre() -> Make {
    stateful(GuessScan::default(), |st: &mut GuessScan, t: &mut Tape| {
        if st.head.is_none() {
            let (e, k) = unpair(t.get_small(0)?);
            let Some(p) = program_of(e) else {
                return crate::stream::never()().next(t);
            };
            st.head = Some((p, k as usize, Rc::new(RefCell::new(HashMap::new()))));
        }
        let (p, k, cache) = st.head.clone().expect("set above");
        while st.queue.is_empty() {
            let stage = st.sched.stage() as u64;
            let inputs = || StreamInputs::Tape { cache: cache.clone(), locate: diamond_locate, arity: k };
            match st.sched.advance(|g, s| lpo_rejected_by(&p, inputs(), k, g, s)) {
                Ok(syms) => {
                    t.tick(stage * (stage + 1))?;
                    st.queue.extend(syms);
                }
                Err(Stall::Missing(i)) => {
                    let s = t.get(i)?;
                    cache.borrow_mut().insert(i, s);
                }
                Err(Stall::Fuel) => return Err(Diverged),
            }
        }
        Ok(st.queue.pop_front().expect("nonempty"))
    })
}

fn r2_push(x: &Instance) -> Result<Instance, DomainError> {
    let Form::Diamond { program, inputs } = &x.form else {
        return Err(DomainError("expected an LPO⋄ instance".into()));
    };
    let p = program_of(*program).ok_or(DomainError("unknown program".into()))?;
    let truth = stream_guess_code_for(&p, inputs, FUEL).ok_or(DomainError("program does not halt".into()))?;
    let bound = encode_guess(&truth).ok_or(DomainError("guess code too large".into()))?;
    let (pm, ins) = (p.clone(), inputs.clone());
    let member = move |g: u64| !matches!(guess_run_streams(&pm, &ins, &decode_guess(g), FUEL), Outcome::Rejected(_));
    let least = (0..=bound).find(|&g| member(g));
    let (pe, ie) = (p.clone(), inputs.clone());
    let k = inputs.len();
    let set = ClosedSet::new(format!("never rejected by {}", x.label), least, member, move |g, s| {
        lpo_rejected_by(&pe, StreamInputs::Exact(ie.clone()), k, g, s).expect("exact inputs never stall")
    });
    Ok(Instance::closed(set))
}

#[derive(Clone, Default)]
struct TrustRun {
    outs: Option<(Vec<Rc<crate::machine::SExpr>>, usize)>,
    pos: usize,
}

fn r2_post() -> Make {
    stateful(TrustRun::default(), |st: &mut TrustRun, t: &mut Tape| {
        if st.outs.is_none() {
            let g = t.get_small(1)?;
            let (e, k) = unpair(t.get_small(0)?);
            let Some(p) = program_of(e) else {
                return crate::stream::never()().next(t);
            };
            let k = k as usize;
            let resolver = StreamResolver::Trust { codes: decode_guess(g), used: 0 };
            let mut m = stream_machine(&p, StreamInputs::Exact(vec![]), resolver, k);
            while m.stopped().is_none() {
                t.tick(1)?;
                m.step().map_err(|_| Diverged)?;
            }
            match m.outcome() {
                Outcome::Halted(v) => st.outs = Some((v, k)),
                _ => loop {
                    t.tick(1)?;
                },
            }
        }
        let (outs, k) = st.outs.clone().expect("set above");
        let n = st.pos;
        let s = if n.is_multiple_of(2) {
            sym(outs.len() as u64)
        } else if outs.is_empty() {
            sym(0)
        } else {
            let m = n / 2;
            let e = &outs[m % outs.len()];
            let mut read = |j: usize, i: usize| t.get(2 * diamond_locate(k, j, i));
            e.at(m / outs.len(), &mut read)?
        };
        st.pos += 1;
        Ok(s)
    })
}

fn r2() -> Witness {
    single(
        "R2",
        Problem::LpoDiamond,
        Problem::Cn,
        "guess codes never rejected form a closed set; any member replays the run",
        r2_pre(),
        push(r2_push),
        r2_post(),
    )
}

// ---- R3: C_ℕ and its equivalents

fn r3a_rule() -> StageRule {
    Rc::new(|w: &[Sym], c: u64, t: usize| {
        let (n, s) = unpair(c);
        let s = s as usize;
        if markers_within(&w[..t]).contains(&n) {
            return true;
        }
        let below = |len: usize| {
            let seen = markers_within(&w[..len]);
            (0..n).all(|m| seen.contains(&m))
        };
        !below(s) || (s > 0 && below(s - 1))
    })
}

fn r3a() -> Witness {
    single(
        "R3a",
        Problem::Cn,
        Problem::Ucn,
        "the single pair ⟨min A, stage at which everything below it is excluded⟩",
        closed_pre(r3a_rule(), upto),
        push(|x| {
            let a = x.as_closed()?;
            let n = a.least.ok_or(DomainError("empty closed set".into()))?;
            let c = pair(n, settle_stage(&x.name, n) as u64);
            Ok(closed_push(format!("{{{c}}}"), Some(c), move |d| d == c, x.name.clone(), r3a_rule(), upto))
        }),
        positional(|_, t| Ok(sym(unpair(small(&ans(t, 0)?)).0))),
    )
}

fn r3b() -> Witness {
    single("R3b", Problem::Ucn, Problem::Cn, "identity", crate::stream::identity(), same(), copy_answer())
}

fn r3c() -> Witness {
    single("R3c", Problem::Cn, Problem::Min, "identity", crate::stream::identity(), same(), copy_answer())
}

/// `p(i)` = least number not excluded within `i+1` symbols.
fn least_absent_stepper() -> impl Fn(&mut MarkerScan, &mut Read) -> Result<Sym, Diverged> + Clone {
    |scan, read| {
        let s = read(scan.read())?;
        scan.push(&s);
        Ok(sym(scan.least_absent()))
    }
}

fn r3d() -> Witness {
    single(
        "R3d",
        Problem::Min,
        Problem::MaxNN,
        "the least unexcluded number after each symbol",
        realizer(MarkerScan::default(), least_absent_stepper()),
        push(|x| {
            let n = x.as_closed()?.least.ok_or(DomainError("empty closed set".into()))?;
            let s = settle_stage(&x.name, n);
            let mut scan = MarkerScan::default();
            let mut prefix = Vec::new();
            for i in 0..s {
                scan.push(&total(&x.name, i));
                if i + 1 < s {
                    prefix.push(sym(scan.least_absent()));
                }
            }
            Ok(Instance::seq(&UPStream::new(prefix, vec![sym(n)])))
        }),
        copy_answer(),
    )
}

fn r3e_rule() -> StageRule {
    Rc::new(|w: &[Sym], c: u64, t: usize| {
        let (m, i) = unpair(c);
        let m = sym(m);
        w[i as usize] != m || w[..=t].iter().any(|v| *v > m)
    })
}

fn r3e() -> Witness {
    single(
        "R3e",
        Problem::MaxNN,
        Problem::Cn,
        "pairs ⟨m, i⟩ with p(i) = m and no later value above m",
        closed_pre(r3e_rule(), through),
        push(|x| {
            let p = x.as_seq()?.clone();
            let top = small(&p.max_symbol());
            let first = (0..).find(|&i| small(p.query(i)) == top).expect("max is attained");
            let c = pair(top, first as u64);
            let member = move |d: u64| {
                let (m, i) = unpair(d);
                m == top && small(p.query(i as usize)) == top
            };
            Ok(closed_push(format!("argmax of {}", x.label), Some(c), member, x.name.clone(), r3e_rule(), through))
        }),
        positional(|_, t| Ok(sym(unpair(small(&ans(t, 0)?)).0))),
    )
}

fn markers_stepper() -> impl Fn(&mut (usize, VecDeque<Sym>), &mut Read) -> Result<Sym, Diverged> + Clone {
    |(i, queue), read| {
        if queue.is_empty() {
            let v = small(&read(*i)?);
            *i += 1;
            queue.extend(marker(v));
        }
        Ok(queue.pop_front().expect("nonempty"))
    }
}

fn r3f() -> Witness {
    single(
        "R3f",
        Problem::MaxNN,
        Problem::MaxOpen,
        "enumerate the values of p as an open set",
        realizer((0usize, VecDeque::new()), markers_stepper()),
        push(|x| {
            let p = x.as_seq()?;
            let values: BTreeSet<u64> = p.prefix().iter().chain(p.period()).map(small).collect();
            let name = replay((0usize, VecDeque::new()), x.name.clone(), markers_stepper());
            Ok(Instance::new(NatSet::Finite(values.clone()).to_string(), Form::Open(values), name))
        }),
        copy_answer(),
    )
}

fn r3g() -> Witness {
    single(
        "R3g",
        Problem::MaxOpen,
        Problem::MaxNN,
        "largest enumerated number so far",
        realizer(MarkerScan::default(), |scan: &mut MarkerScan, read: &mut Read| {
            let s = read(scan.read())?;
            scan.push(&s);
            Ok(sym(scan.greatest().unwrap_or(0)))
        }),
        push(|x| {
            let u = x.as_open()?;
            let top = *u.iter().next_back().ok_or(DomainError("empty open set".into()))?;
            let mut scan = MarkerScan::default();
            let mut prefix = Vec::new();
            while scan.greatest() != Some(top) {
                scan.push(&total(&x.name, scan.read()));
                prefix.push(sym(scan.greatest().unwrap_or(0)));
            }
            prefix.pop();
            Ok(Instance::seq(&UPStream::new(prefix, vec![sym(top)])))
        }),
        copy_answer(),
    )
}

fn r3h() -> Witness {
    single(
        "R3h",
        Problem::Bound,
        Problem::MaxOpen,
        "add 0 to the set",
        positional(|k, t| if k < 3 { Ok(marker(0)[k].clone()) } else { t.get(k - 3) }),
        push(|x| {
            let mut u = x.as_open()?.clone();
            u.insert(0);
            let base = x.name.clone();
            let name = Rule::new(move |k| if k < 3 { marker(0)[k].clone() } else { total(&base, k - 3) });
            Ok(Instance::new(NatSet::Finite(u.clone()).to_string(), Form::Open(u), name))
        }),
        copy_answer(),
    )
}

fn r3i_rule() -> StageRule {
    Rc::new(|w: &[Sym], n: u64, t: usize| markers_within(&w[..t]).iter().any(|&m| m > n))
}

fn r3i() -> Witness {
    single(
        "R3i",
        Problem::Bound,
        Problem::Cn,
        "numbers not below any enumerated number",
        closed_pre(r3i_rule(), upto),
        push(|x| {
            let top = x.as_open()?.iter().next_back().copied().unwrap_or(0);
            Ok(closed_push(format!("[{top}, ∞)"), Some(top), move |n| n >= top, x.name.clone(), r3i_rule(), upto))
        }),
        copy_answer(),
    )
}

/// Stage markers: `0` always, then each stage `s` at which the least
/// unexcluded number moves.
fn moves_stepper() -> impl Fn(&mut (MarkerScan, bool, VecDeque<Sym>), &mut Read) -> Result<Sym, Diverged> + Clone {
    |(scan, started, queue), read| {
        if queue.is_empty() {
            if !*started {
                *started = true;
                queue.extend(marker(0));
            } else {
                let before = scan.least_absent();
                let s = read(scan.read())?;
                scan.push(&s);
                if scan.least_absent() != before {
                    queue.extend(marker(scan.read() as u64));
                } else {
                    queue.push_back(sym(0));
                }
            }
        }
        Ok(queue.pop_front().expect("nonempty"))
    }
}

fn r3j() -> Witness {
    single(
        "R3j",
        Problem::Cn,
        Problem::Bound,
        "stages at which the least unexcluded number moves; any bound fixes it",
        realizer((MarkerScan::default(), false, VecDeque::new()), moves_stepper()),
        push(|x| {
            let n = x.as_closed()?.least.ok_or(DomainError("empty closed set".into()))?;
            let mut scan = MarkerScan::default();
            let mut stages = BTreeSet::from([0u64]);
            let mut last = 0;
            while scan.least_absent() < n {
                scan.push(&total(&x.name, scan.read()));
                if scan.least_absent() != last {
                    last = scan.least_absent();
                    stages.insert(scan.read() as u64);
                }
            }
            let name = replay((MarkerScan::default(), false, VecDeque::new()), x.name.clone(), moves_stepper());
            Ok(Instance::new(NatSet::Finite(stages.clone()).to_string(), Form::Open(stages), name))
        }),
        stateful(None, |l: &mut Option<u64>, t: &mut Tape| {
            if l.is_none() {
                let b = small(&ans(t, 0)?) as usize;
                *l = Some(least_absent_after(&mut |i| inp(t, i), b)?);
            }
            Ok(sym(l.expect("set above")))
        }),
    )
}

// ---- R4: lim_Δ

fn r4a() -> Witness {
    let pre = positional(|k, t| {
        let (i, _) = unpair(k as u64);
        let l = least_absent_after(&mut |j| t.get(j), i as usize)?;
        Ok(nu_q_inv(&Q::from_integer(l.into())))
    });
    single(
        "R4a",
        Problem::Cn,
        Problem::LimDelta,
        "the least unexcluded number after i symbols, as the i-th rational",
        pre,
        push(|x| {
            let n = x.as_closed()?.least.ok_or(DomainError("empty closed set".into()))?;
            let s = settle_stage(&x.name, n);
            let code = |v: u64| nu_q_inv(&Q::from_integer(v.into()));
            let mut scan = MarkerScan::default();
            let mut prefix = vec![code(0)];
            for i in 0..s {
                scan.push(&total(&x.name, i));
                prefix.push(code(scan.least_absent()));
            }
            prefix.pop();
            Ok(Instance::real_seq(&UPStream::new(prefix, vec![code(n)])))
        }),
        positional(|_, t| {
            let v = nu_q(&ans(t, 1)?);
            Ok(sym(v.round().to_integer().to_u64().unwrap_or(0)))
        }),
    )
}

fn r4b_rule() -> StageRule {
    Rc::new(|w: &[Sym], i: u64, t: usize| {
        let at = |j: u64| nu_q(&w[pair(j, t as u64) as usize]);
        let xi = at(i);
        let gap = dyadic(t as u32) * Q::from_integer(2.into());
        (i + 1..=t as u64).any(|j| (&at(j) - &xi).abs() > gap)
    })
}

fn r4b_need(t: usize) -> usize {
    pair(t as u64, t as u64) as usize + 1
}

fn r4b() -> Witness {
    single(
        "R4b",
        Problem::LimDelta,
        Problem::Cn,
        "indices from which the sequence is constant; copy that term",
        closed_pre(r4b_rule(), r4b_need),
        push(|x| {
            let Form::RealSeq(codes) = &x.form else {
                return Err(DomainError("expected a rational sequence".into()));
            };
            let c = codes.canonicalize();
            if c.period().len() != 1 {
                return Err(DomainError("sequence is not eventually constant".into()));
            }
            let limit = c.period()[0].clone();
            let from = c.prefix().iter().rposition(|v| *v != limit).map_or(0, |i| i as u64 + 1);
            Ok(closed_push(
                format!("[{from}, ∞)"),
                Some(from),
                move |i| i >= from,
                x.name.clone(),
                r4b_rule(),
                r4b_need,
            ))
        }),
        stateful((None, 0usize), |(i, k): &mut (Option<u64>, usize), t: &mut Tape| {
            let i = *i.get_or_insert(small(&ans(t, 0)?));
            let s = inp(t, pair(i, *k as u64) as usize)?;
            *k += 1;
            Ok(s)
        }),
    )
}

// ---- R5, R6: Denominator and Numerator

/// Running state for the dyadic construction.
#[derive(Clone)]
struct DyadicRun {
    numerator_form: bool,
    x: Q,
    v: u64,
    i: usize,
}

impl DyadicRun {
    fn new(numerator_form: bool) -> Self {
        DyadicRun { numerator_form, x: Q::one(), v: 0, i: 0 }
    }

    /// Consumes `p(i)` and returns `x_{i+1}`.
    fn feed(&mut self, p: u64) -> Q {
        let n = self.i as u64;
        let v = if n == 0 { p } else { self.v.max(p) };
        if n == 0 || v != self.v {
            self.x = if self.numerator_form { power_over_odd(&self.x, v, n) } else { odd_over_power(&self.x, v, n) };
        }
        self.v = v;
        self.i += 1;
        self.x.clone()
    }
}

fn nearest_odd(r: &Q) -> BigUint {
    let f = r.floor();
    let below = if (r - &f) < Q::new(1.into(), 2.into()) { f.clone() } else { f.clone() + Q::one() };
    let n = below.to_integer();
    let n = if n.is_odd() {
        n
    } else if *r >= Q::from_integer(n.clone()) || n.is_zero() {
        n + 1
    } else {
        n - 1
    };
    n.to_biguint().unwrap_or_else(BigUint::one)
}

/// `o / 2^⟨k,v⟩` for the least `k` with exponent at least `n+2`.
fn odd_over_power(x: &Q, v: u64, n: u64) -> Q {
    let k = (0..).find(|&k| pair(k, v) >= n + 2).expect("pairing is unbounded");
    let e = pair(k, v) as usize;
    let scale = BigUint::one() << e;
    let o = nearest_odd(&(x * Q::from_integer(scale.clone().into())));
    Q::new(o.into(), scale.into())
}

/// `2^⟨v,k⟩ / o` for the least `k` staying within `2^-(n+2)` of `x`.
fn power_over_odd(x: &Q, v: u64, n: u64) -> Q {
    let bound = dyadic(n as u32 + 2);
    for k in 0.. {
        let e = pair(v, k) as usize;
        let scale = BigUint::one() << e;
        let o = nearest_odd(&(Q::from_integer(scale.clone().into()) / x));
        let y = Q::new(scale.into(), o.into());
        if (&y - x).abs() <= bound {
            return y;
        }
    }
    unreachable!("the search is unbounded")
}

fn dyadic_witness(id: &'static str, numerator_form: bool) -> Witness {
    let target = if numerator_form { Problem::Numerator } else { Problem::Denominator };
    let stepper = move |run: &mut DyadicRun, read: &mut Read| -> Result<Sym, Diverged> {
        let p = small(&read(run.i)?);
        Ok(nu_q_inv(&run.feed(p)))
    };
    single(
        id,
        Problem::MaxNN,
        target,
        if numerator_form {
            "rationals 2^⟨v,k⟩/o following the running max v"
        } else {
            "rationals o/2^⟨k,v⟩ following the running max v"
        },
        realizer(DyadicRun::new(numerator_form), stepper),
        push(move |x| {
            let p = x.as_seq()?;
            let top = small(&p.max_symbol());
            let settle = (0..).find(|&i| small(p.query(i)) == top).expect("max is attained");
            let mut run = DyadicRun::new(numerator_form);
            let mut last = Q::one();
            for i in 0..=settle {
                last = run.feed(small(p.query(i)));
            }
            let name = replay(DyadicRun::new(numerator_form), x.name.clone(), stepper);
            let point = PointDescriptor::Rat(last);
            Ok(Instance::new(point.to_string(), Form::Real { point, rational: Some(true) }, name))
        }),
        positional(move |_, t| {
            let a = BigUint::from_bytes_be(&ans(t, 0)?.to_bytes_be());
            let e = a.bits().saturating_sub(1);
            let (l, r) = unpair(e);
            Ok(sym(if numerator_form { l } else { r }))
        }),
    )
}

fn r5() -> Witness {
    dyadic_witness("R5", false)
}

fn r6() -> Witness {
    dyadic_witness("R6", true)
}

// ---- R7, R8: id_ℚ

/// Reads a discrete rational `0^k 1 0^n 1 0^m 1` from the answer.
fn read_discrete(t: &mut Tape) -> Result<(BigUint, BigUint), Diverged> {
    let mut i = 0;
    while ans(t, i)?.is_zero() {
        i += 1;
    }
    let count = |t: &mut Tape, i: &mut usize| -> Result<u64, Diverged> {
        *i += 1;
        let mut c = 0;
        while ans(t, *i)?.is_zero() {
            c += 1;
            *i += 1;
        }
        Ok(c)
    };
    let n = count(t, &mut i)?;
    let m = count(t, &mut i)?;
    Ok((n.into(), (m + 1).into()))
}

fn r7(denominator: bool) -> Witness {
    let (id, source) = if denominator { ("R7a", Problem::Denominator) } else { ("R7b", Problem::Numerator) };
    single(
        id,
        source,
        Problem::IdQ,
        "identity, then read off the reduced fraction",
        crate::stream::identity(),
        same(),
        stateful(None, move |v: &mut Option<Sym>, t: &mut Tape| {
            if v.is_none() {
                let (n, m) = read_discrete(t)?;
                let (n, m) = crate::problems::lowest_terms(&n, &m);
                *v = Some(if denominator { m } else { n });
            }
            Ok(v.clone().expect("set above"))
        }),
    )
}

fn r8_rule() -> StageRule {
    Rc::new(|w: &[Sym], c: u64, t: usize| {
        let (n, m) = unpair(c);
        if m == 0 {
            return true;
        }
        let (n, m) = (Q::from_integer(n.into()), Q::from_integer(m.into()));
        (0..=t).any(|k| (&m * nu_q(&w[k]) - &n).abs() >= &m * dyadic(k as u32))
    })
}

fn r8() -> Witness {
    single(
        "R8",
        Problem::IdQ,
        Problem::Cn,
        "pairs ⟨n, m⟩ with m ≠ 0 and m·x = n",
        closed_pre(r8_rule(), through),
        push(|x| {
            let Form::Real { point: PointDescriptor::Rat(r), .. } = &x.form else {
                return Err(DomainError("expected a rational".into()));
            };
            if r.is_negative() {
                return Err(DomainError("expected a nonnegative rational".into()));
            }
            let (a, b) = (r.numer().to_u64().unwrap_or(u64::MAX), r.denom().to_u64().unwrap_or(u64::MAX));
            let r = r.clone();
            let member = move |c: u64| {
                let (n, m) = unpair(c);
                m != 0 && Q::from_integer(m.into()) * &r == Q::from_integer(n.into())
            };
            Ok(closed_push(
                format!("fractions of {}", x.label),
                Some(pair(a, b)),
                member,
                x.name.clone(),
                r8_rule(),
                through,
            ))
        }),
        stateful((None, 0usize), |(name, k): &mut (Option<UPStream>, usize), t: &mut Tape| {
            if name.is_none() {
                let (n, m) = unpair(small(&ans(t, 0)?));
                let r = Q::new(n.into(), m.max(1).into());
                *name = crate::spaces::delta_q_name(&r, 0).ok();
            }
            let s = name.as_ref().map_or(sym(0), |u| u.query(*k).clone());
            *k += 1;
            Ok(s)
        }),
    )
}

// ---- R9–R12: rationality, halting, infinity

fn r9() -> Witness {
    let e = shipped_index("ratq").expect("shipped");
    single(
        "R9",
        Problem::ChiQ,
        Problem::ChiH,
        "pair the input with the program halting exactly on rationals",
        positional(move |k, t| if k % 2 == 0 { Ok(sym(e)) } else { t.get(k / 2) }),
        push(move |x| Ok(Instance::halting(e, x.as_real()?.0))),
        copy_answer(),
    )
}

fn r10() -> Witness {
    single(
        "R10",
        Problem::ChiH,
        Problem::IsInfinite,
        "halting stream: finitely many 1s iff the machine halts",
        halting_realizer(program_of, Some(0), 2, 1),
        push(|x| {
            let Form::Halting { program, point } = &x.form else {
                return Err(DomainError("expected a program and a real".into()));
            };
            let s = shipped_at(*program).ok_or(DomainError("unknown program".into()))?;
            let halts = (s.halts)(point).ok_or(DomainError("halting unknown here".into()))?;
            let real: Rc<dyn Point> = Rc::new(NameSource(point.real_name()));
            let sim = RefCell::new((HaltingSim::new(s.program(), vec![Poly::x()], Some(real)), Vec::<Sym>::new()));
            let name = Rule::new(move |i| {
                let mut st = sim.borrow_mut();
                let (sim, out) = &mut *st;
                while out.len() <= i {
                    let it = sim.iterate().expect("descriptor names never stall");
                    out.extend(it.bits().into_iter().map(|b| sym(b as u64)));
                }
                out[i].clone()
            });
            let ones = if halts { Count::Finitely } else { Count::Infinitely };
            let bits = Bits { zeros: Some(Count::Infinitely), ones: Some(ones) };
            Ok(Instance::new(format!("halting stream of {}", x.label), Form::Bits(bits, None), name))
        }),
        positional(|_, t| Ok(sym(1 - small(&ans(t, 0)?).min(1)))),
    )
}

/// Digit position of `a_i`, for `i ≥ 1`.
fn tri(i: u64) -> u64 {
    i * (i + 1) / 2
}

/// `0.a₁0a₂00a₃…` truncated to `d` decimal digits.
fn decimal_truncation(read: &mut Read, d: u64) -> Result<Q, Diverged> {
    let mut x = Q::zero();
    let mut i = 1;
    while tri(i) <= d {
        if small(&read(i as usize - 1)?) == 1 {
            x += Q::new(1.into(), BigUint::from(10u32).pow(tri(i) as u32).into());
        }
        i += 1;
    }
    Ok(x)
}

fn r11() -> Witness {
    single(
        "R11",
        Problem::IsInfinite,
        Problem::ChiQ,
        "the real 0.a₁0a₂00a₃000… is rational iff p has finitely many 1s",
        positional(|j, t| Ok(nu_q_inv(&decimal_truncation(&mut |i| t.get(i), j as u64 + 1)?))),
        push(|x| {
            let p = x.as_binary()?.clone();
            let src = x.name.clone();
            let name = Rule::new(move |j| {
                nu_q_inv(&decimal_truncation(&mut |i| Ok(total(&src, i)), j as u64 + 1).expect("total"))
            });
            let (point, rational) = match p.count_finite(&sym(1)) {
                Some(_) => {
                    let last = p.prefix().len() as u64 + 1;
                    let d = (1..).map(tri).find(|&d| d >= tri(last)).expect("unbounded");
                    let src = p.source();
                    (PointDescriptor::Rat(decimal_truncation(&mut |i| Ok(total(&src, i)), d).expect("total")), true)
                }
                None => {
                    let src = p.source();
                    let rule =
                        move |k: u32| decimal_truncation(&mut |i| Ok(total(&src, i)), k as u64 + 1).expect("total");
                    (PointDescriptor::limit_rule(format!("decimal({p})"), rule, 0), false)
                }
            };
            Ok(Instance::new(format!("0.a₁0a₂… of {p}"), Form::Real { point, rational: Some(rational) }, name))
        }),
        positional(|_, t| Ok(sym(1 - small(&ans(t, 0)?).min(1)))),
    )
}

/// Output of a built-in transducer on an ultimately periodic input.
pub fn transducer_output(machine: u64, p: &UPStream) -> UPStream {
    let t = &TRANSDUCERS[machine as usize];
    let mut state = 0u8;
    let mut out = Vec::new();
    for a in p.prefix() {
        out.push(sym(u64::from((t.emits)(&mut state, small(a)))));
    }
    let mut seen: HashMap<u8, usize> = HashMap::new();
    loop {
        if let Some(&start) = seen.get(&state) {
            let period = out.split_off(start);
            return UPStream::new(out, period).canonicalize();
        }
        seen.insert(state, out.len());
        for a in p.period() {
            out.push(sym(u64::from((t.emits)(&mut state, small(a)))));
        }
    }
}

fn r12a() -> Witness {
    single(
        "R12a",
        Problem::IsDefined,
        Problem::IsInfinite,
        "write 1 whenever the machine emits",
        stateful((None, 0u8, 0usize), |(m, state, i): &mut (Option<u64>, u8, usize), t: &mut Tape| {
            if m.is_none() {
                *m = Some(t.get_small(0)?);
            }
            let Some(tr) = TRANSDUCERS.get(m.expect("set above") as usize) else {
                return crate::stream::never()().next(t);
            };
            let b = t.get_small(2 * *i + 1)?;
            *i += 1;
            Ok(sym(u64::from((tr.emits)(state, b))))
        }),
        push(|x| {
            let Form::Defined { machine, input } = &x.form else {
                return Err(DomainError("expected a machine and a stream".into()));
            };
            Ok(Instance::binary(&transducer_output(*machine, input)))
        }),
        copy_answer(),
    )
}

fn r12b() -> Witness {
    let e = transducer_index("copy_ones").expect("built in");
    single(
        "R12b",
        Problem::IsInfinite,
        Problem::IsDefined,
        "the machine copying each 1",
        positional(move |k, t| if k % 2 == 0 { Ok(sym(e)) } else { t.get(k / 2) }),
        push(move |x| Ok(Instance::defined(e, x.as_binary()?))),
        copy_answer(),
    )
}

// ---- R13, R14: Type_𝔞 and Sort

fn separated(q: &Q, err: &Q, a: &PointDescriptor, k: u32) -> bool {
    let (lo, hi) = a.enclose(k);
    q + err < lo || q - err > hi
}

/// Step `j`: emit 0 and move on when the input is separated from the current candidate.
fn type_stepper() -> impl Fn(&mut (usize, usize), &mut Read) -> Result<Sym, Diverged> + Clone {
    |(n, j), read| {
        let q = nu_q(&read(*j + 2)?);
        let hit = separated(&q, &dyadic(*j as u32 + 2), &enum_algebraic(*n), *j as u32 + 3);
        *j += 1;
        Ok(if hit {
            *n += 1;
            sym(0)
        } else {
            sym(1)
        })
    }
}

fn r13() -> Witness {
    single(
        "R13",
        Problem::TypeA,
        Problem::Sort,
        "test x against a₀, a₁, … writing a 0 for each refutation",
        realizer((0usize, 0usize), type_stepper()),
        push(|x| {
            let point = x.as_real()?.0.clone();
            let zeros = match &point {
                PointDescriptor::Limit(l) if l.certified > 0 => Count::Infinitely,
                PointDescriptor::Limit(_) => return Err(DomainError("limit point not certified".into())),
                _ => Count::Exactly(
                    crate::algebra::algebraic_index(&point).ok_or(DomainError("index out of reach".into()))? as u64,
                ),
            };
            let name = replay((0usize, 0usize), x.name.clone(), type_stepper());
            let bits = Bits { zeros: Some(zeros), ones: None };
            Ok(Instance::new(format!("refutations for {}", x.label), Form::Bits(bits, None), name))
        }),
        positional(|j, t| {
            for n in 0..=j + 1 {
                if !ans(t, n)?.is_zero() {
                    return Ok(nu_q_inv(&dyadic(n as u32)));
                }
            }
            Ok(nu_q_inv(&Q::zero()))
        }),
    )
}

const LOOKAHEAD: usize = 16;

thread_local! {
    static NEIGHBOURS: RefCell<HashMap<(usize, u32, Vec<usize>), usize>> = RefCell::new(HashMap::new());
}

/// Least unused index `m` with `|a_m − a_c| < 2^-k`, certified by enclosures.
fn neighbour(c: usize, k: u32, used: &[usize]) -> usize {
    let key = (c, k, used.to_vec());
    if let Some(m) = NEIGHBOURS.with(|t| t.borrow().get(&key).copied()) {
        return m;
    }
    let (clo, chi) = enum_algebraic(c).enclose(k + 4);
    let r = dyadic(k);
    let m = (0..)
        .filter(|m| !used.contains(m))
        .find(|&m| {
            let (lo, hi) = enum_algebraic(m).enclose(k + 4);
            (&hi - &clo).abs().max((&chi - &lo).abs()) < r
        })
        .expect("algebraic numbers are dense");
    NEIGHBOURS.with(|t| t.borrow_mut().insert(key, m));
    m
}

/// Candidate indices for a Sort input: a zero read while producing output
/// `i` moves the candidate to a fresh neighbour at radius `2^-(i+3+z)`.
#[derive(Clone, Default)]
struct Candidates {
    used: Vec<usize>,
    read: usize,
}

impl Candidates {
    fn current(&self) -> usize {
        self.used.last().copied().unwrap_or(0)
    }

    fn zeros(&self) -> usize {
        self.used.len().saturating_sub(1)
    }

    /// Reads input position `self.read`, switching on a zero.
    fn feed(&mut self, read: &mut Read) -> Result<(), Diverged> {
        if self.used.is_empty() {
            self.used.push(0);
        }
        let s = read(self.read)?;
        let i = self.read.saturating_sub(LOOKAHEAD - 1);
        if s.is_zero() {
            let k = (i + 3 + self.zeros()) as u32;
            let m = neighbour(self.current(), k, &self.used);
            self.used.push(m);
        }
        self.read += 1;
        Ok(())
    }
}

fn candidate_stepper() -> impl Fn(&mut (Candidates, usize), &mut Read) -> Result<Sym, Diverged> + Clone {
    |(cands, i), read| {
        while cands.read < *i + LOOKAHEAD {
            cands.feed(read)?;
        }
        let a = enum_algebraic(cands.current());
        *i += 1;
        Ok(nu_q_inv(&a.approx(*i as u32 + 1)))
    }
}

fn r14() -> Witness {
    single(
        "R14",
        Problem::Sort,
        Problem::TypeA,
        "walk through distinct algebraic numbers, moving on each 0; the type tells where the walk stopped",
        realizer((Candidates::default(), 0usize), candidate_stepper()),
        push(|x| {
            let p = x.as_binary()?.clone();
            if p.count_finite(&sym(0)).is_none() {
                return Err(DomainError("infinitely many 0s".into()));
            }
            let mut cands = Candidates::default();
            let src = p.source();
            let horizon = (p.prefix().len() + p.period().len()).max(LOOKAHEAD);
            while cands.read < horizon {
                cands.feed(&mut |i| Ok(total(&src, i))).expect("total");
            }
            let point = enum_algebraic(cands.current());
            let name = replay((Candidates::default(), 0usize), x.name.clone(), candidate_stepper());
            Ok(Instance::new(format!("walk on {p}"), Form::Real { point, rational: None }, name))
        }),
        r14_post(),
    )
}

/// Sort output from the candidate walk: output `j` is 1 once the candidate
/// matching the type has at most `j` zeros before it.
fn r14_post() -> Make {
    stateful((Candidates::default(), 0usize, 0usize), |(cands, checked, j), t: &mut Tape| {
        let out = loop {
            if cands.used.is_empty() {
                cands.used.push(0);
            }
            let mut found = None;
            while *checked < cands.used.len() {
                let m = cands.used[*checked];
                let q = nu_q(&ans(t, m + 3)?);
                if (&q - dyadic(m as u32)).abs() < dyadic(m as u32 + 2) {
                    found = Some(*checked);
                    break;
                }
                *checked += 1;
            }
            if let Some(z) = found {
                break u64::from(*j >= z);
            }
            if cands.zeros() > *j {
                break 0;
            }
            cands.feed(&mut |i| inp(t, i))?;
        };
        *j += 1;
        Ok(sym(out))
    })
}

// ---- R15–R19: Sort, lim, C_ℕ

fn r15() -> Witness {
    single(
        "R15",
        Problem::Cn,
        Problem::Sort,
        "one 0 per stage up to the last move of the least unexcluded number",
        realizer(SortEncoder::default(), |e: &mut SortEncoder, read: &mut Read| e.next(read)),
        push(|x| {
            let n = x.as_closed()?.least.ok_or(DomainError("empty closed set".into()))?;
            let m = settle_stage(&x.name, n) as u64;
            let name =
                replay(SortEncoder::default(), x.name.clone(), |e: &mut SortEncoder, read: &mut Read| e.next(read));
            let bits = Bits { zeros: Some(Count::Exactly(m)), ones: Some(Count::Infinitely) };
            Ok(Instance::new(format!("stages of {}", x.label), Form::Bits(bits, None), name))
        }),
        stateful(None, |l: &mut Option<u64>, t: &mut Tape| {
            if l.is_none() {
                let m = sort_zeros(&mut |i| ans(t, i))?;
                *l = Some(least_absent_after(&mut |i| inp(t, i), m as usize)?);
            }
            Ok(sym(l.expect("set above")))
        }),
    )
}

fn r16() -> Witness {
    let q = |k: usize, read: &mut Read| -> Result<Sym, Diverged> {
        let (n, i) = unpair(k as u64);
        let mut zeros = 0;
        for j in 0..=i as usize {
            if zeros >= n {
                break;
            }
            if read(j)?.is_zero() {
                zeros += 1;
            }
        }
        Ok(sym(u64::from(zeros < n)))
    };
    single(
        "R16",
        Problem::Sort,
        Problem::Lim,
        "column n settles on 0 iff p has at least n zeros",
        positional(move |k, t| q(k, &mut |i| t.get(i))),
        push(move |x| {
            let z = x.as_binary()?.count_finite(&sym(0)).map(|n| n as u64);
            let cols = Rc::new(move |n: usize| Some(u64::from(z.is_some_and(|z| (n as u64) > z))));
            let src = x.name.clone();
            let name = Rule::new(move |k| q(k, &mut |i| Ok(total(&src, i))).expect("total"));
            Ok(Instance::new(format!("zero counts of {}", x.label), Form::Columns(cols), name))
        }),
        positional(|j, t| ans(t, j + 1)),
    )
}

fn column_rule() -> StageRule {
    Rc::new(|w: &[Sym], c: u64, t: usize| {
        let (v, i0) = unpair(c);
        let v = sym(v);
        (i0 as usize..=t).any(|i| w[i] != v)
    })
}

/// Closed name of `{⟨v, i₀⟩ : column constant v from i₀ on}` and its Sort encoding.
#[derive(Clone)]
struct ColumnSort {
    names: NameBuilder,
    enc: SortEncoder,
    out: Vec<Sym>,
}

impl ColumnSort {
    fn new() -> Self {
        ColumnSort { names: NameBuilder::new(column_rule(), through), enc: SortEncoder::default(), out: Vec::new() }
    }

    fn at(&mut self, j: usize, col: &mut Read) -> Result<Sym, Diverged> {
        while self.out.len() <= j {
            let names = &mut self.names;
            let s = self.enc.next(&mut |i| names.at(i, col))?;
            self.out.push(s);
        }
        Ok(self.out[j].clone())
    }
}

fn r17() -> Witness {
    let pre = stateful((HashMap::<u64, ColumnSort>::new(), 0u64), |(cols, k), t: &mut Tape| {
        let (n, j) = unpair(*k);
        let col = cols.entry(n).or_insert_with(ColumnSort::new);
        let s = col.at(j as usize, &mut |i| t.get(pair(n, i as u64) as usize))?;
        *k += 1;
        Ok(s)
    });
    single(
        "R17",
        Problem::Lim,
        Problem::SortFamily,
        "per column, the stage encoding of where the column settles",
        pre,
        push(|x| {
            let p = x.as_seq()?.clone();
            let limits = match Problem::Lim.ideal(x)? {
                Answer::Seq(f) => f,
                _ => unreachable!(),
            };
            let src = x.name.clone();
            let label = format!("columns of {}", x.label);
            Ok(Instance::family(label, move |n| column_instance(&p, &src, n as u64, limits(n))))
        }),
        stateful(HashMap::<u64, u64>::new(), |memo, t: &mut Tape| {
            let n = memo.len() as u64;
            let m = sort_zeros(&mut |j| ans(t, pair(n, j as u64) as usize))?;
            let mut names = NameBuilder::new(column_rule(), through);
            let l = least_absent_after(
                &mut |i| {
                    let mut col = |k: usize| inp(t, pair(n, k as u64) as usize);
                    names.at(i, &mut col)
                },
                m as usize,
            )?;
            memo.insert(n, l);
            Ok(sym(unpair(l).0))
        }),
    )
}

fn column_instance(p: &UPStream, src: &Src, n: u64, v: u64) -> Instance {
    let from = (0..)
        .find(|&i0| {
            let a = p.prefix().len() as u64;
            let per = 2 * p.period().len() as u64;
            let start = (i0..).find(|&i| pair(n, i) >= a).expect("unbounded");
            (i0..start + per).all(|i| small(p.query(pair(n, i) as usize)) == v)
        })
        .expect("column settles");
    let least = pair(v, from);
    let col_src = {
        let src = src.clone();
        Rule::new(move |i| total(&src, pair(n, i as u64) as usize))
    };
    let names = RefCell::new(NameBuilder::new(column_rule(), through));
    let closed: Src = {
        let col_src = col_src.clone();
        Rule::new(move |i| names.borrow_mut().at(i, &mut |k| Ok(total(&col_src, k))).expect("total"))
    };
    let m = settle_stage(&closed, least) as u64;
    let state = RefCell::new(ColumnSort::new());
    let name = Rule::new(move |j| state.borrow_mut().at(j, &mut |i| Ok(total(&col_src, i))).expect("total"));
    let bits = Bits { zeros: Some(Count::Exactly(m)), ones: Some(Count::Infinitely) };
    Instance::new(format!("column {n}"), Form::Bits(bits, None), name)
}

fn r18_rule() -> StageRule {
    Rc::new(|w: &[Sym], n: u64, t: usize| w[..t].iter().filter(|s| !s.is_zero()).count() as u64 > n)
}

fn r18() -> Witness {
    single(
        "R18",
        Problem::IsInfiniteS,
        Problem::Tcn,
        "bounds on the number of 1s; any bound is exceeded iff there are infinitely many",
        closed_pre(r18_rule(), upto),
        push(|x| {
            let ones = x.as_binary()?.count_finite(&sym(1)).map(|n| n as u64);
            let member = move |n: u64| ones.is_some_and(|o| n >= o);
            Ok(closed_push(format!("bounds for {}", x.label), ones, member, x.name.clone(), r18_rule(), upto))
        }),
        stateful((None, 0usize, 0u64), |(m, j, ones): &mut (Option<u64>, usize, u64), t: &mut Tape| {
            if m.is_none() {
                *m = Some(small(&ans(t, 0)?));
            }
            if !inp(t, *j)?.is_zero() {
                *ones += 1;
            }
            *j += 1;
            Ok(sym(u64::from(*ones > m.expect("set above"))))
        }),
    )
}

fn r19() -> Witness {
    single(
        "R19",
        Problem::IsFiniteS,
        Problem::Sort,
        "swap 0s and 1s",
        crate::stream::bit_swap(),
        push(|x| {
            let p = x.as_binary()?;
            let flip = |w: &[Sym]| w.iter().map(|s| sym(1 - small(s).min(1))).collect::<Vec<_>>();
            Ok(Instance::binary(&UPStream::new(flip(p.prefix()), flip(p.period()))))
        }),
        copy_answer(),
    )
}

// ---- R20, R21: compositional products

/// Source position `i` of component `j` in a stride-3 tuple name.
fn third(t: &mut Tape, j: usize, i: usize) -> Result<Sym, Diverged> {
    inp(t, 3 * i + j)
}

fn r20() -> Witness {
    let pre = positional(|k, t| {
        let m = k / 2;
        if k % 2 == 1 {
            return t.get(3 * m);
        }
        for s in 0..=m {
            if !t.get(3 * s)?.is_zero() {
                return t.get(3 * (m - s) + 1);
            }
        }
        t.get(3 * m + 2)
    });
    single(
        "R20",
        Problem::SortStarLpo,
        Problem::SortTimesLpo,
        "feed q₁ to Sort, restarting with q₀ at the first 1 of p",
        pre,
        push(|x| {
            let parts = x.parts(3)?;
            let (p, q0, q1) = (parts[0].as_binary()?, parts[1].as_binary()?, parts[2].as_binary()?);
            let r = match (0..p.prefix().len() + p.period().len()).find(|&i| !p.query(i).is_zero()) {
                None => q1.clone(),
                Some(t) => {
                    let mut prefix = q1.take(t);
                    prefix.extend_from_slice(q0.prefix());
                    UPStream::new(prefix, q0.period().to_vec())
                }
            };
            Ok(Instance::tuple(vec![Instance::binary(&r), Instance::binary(p)]))
        }),
        stateful(None, |shift: &mut Option<(usize, usize)>, t: &mut Tape| {
            if shift.is_none() {
                let c = if small(&t.get(3)?) == 1 {
                    0
                } else {
                    let mut s = 0;
                    while third(t, 0, s)?.is_zero() {
                        s += 1;
                    }
                    let mut c = 0;
                    for i in 0..s {
                        if third(t, 2, i)?.is_zero() {
                            c += 1;
                        }
                    }
                    c
                };
                *shift = Some((c, 0));
            }
            let (c, j) = shift.expect("set above");
            *shift = Some((c, j + 1));
            t.get(4 * (j + c) + 1)
        }),
    )
}

/// Switch times of the running max of `p` up to position `m`, with the max after each.
fn switches(read: &mut Read, m: usize) -> Result<Vec<(usize, u64)>, Diverged> {
    let mut out = vec![(0, small(&read(0)?))];
    for i in 1..=m {
        let v = small(&read(i)?);
        if v > out.last().expect("nonempty").1 {
            out.push((i, v));
        }
    }
    Ok(out)
}

fn r21_r(
    read_p: &mut Read,
    read_q: &mut dyn FnMut(u64, usize) -> Result<Sym, Diverged>,
    m: usize,
) -> Result<Sym, Diverged> {
    let (s, v) = *switches(read_p, m)?.last().expect("nonempty");
    read_q(v, m - s)
}

fn r21() -> Witness {
    let pre = positional(|k, t| {
        let m = k / 2;
        if k % 2 == 1 {
            return t.get(2 * m);
        }
        let (s, v) = *switches(&mut |i| t.get(2 * i), m)?.last().expect("nonempty");
        t.get(2 * pair(v, (m - s) as u64) as usize + 1)
    });
    let _ = r21_r;
    single(
        "R21",
        Problem::SortStarMax,
        Problem::SortTimesMax,
        "feed q_v to Sort, restarting whenever the running max v grows",
        pre,
        push(|x| {
            let parts = x.parts(2)?;
            let p = parts[0].as_seq()?.clone();
            let Form::Family(qs) = &parts[1].form else {
                return Err(DomainError("expected a family".into()));
            };
            let top = small(&p.max_symbol());
            let last = (0..).find(|&i| small(p.query(i)) == top).expect("max is attained");
            let psrc = p.source();
            let sw = switches(&mut |i| Ok(total(&psrc, i)), last).expect("total");
            let mut prefix = Vec::new();
            for w in sw.windows(2) {
                let (s, v) = w[0];
                let q = qs(v as usize);
                prefix.extend((0..w[1].0 - s).map(|i| total(&q.name, i)));
            }
            let qm = qs(top as usize);
            let qm = qm.as_binary()?;
            prefix.extend_from_slice(qm.prefix());
            let r = UPStream::new(prefix, qm.period().to_vec());
            Ok(Instance::tuple(vec![Instance::binary(&r), Instance::seq(&p)]))
        }),
        stateful(None, |shift: &mut Option<(usize, usize)>, t: &mut Tape| {
            if shift.is_none() {
                let top = small(&t.get(3)?);
                let mut last = 0;
                while small(&inp(t, 2 * last)?) != top {
                    last += 1;
                }
                let cell = RefCell::new(&mut *t);
                let mut read_p = |i: usize| cell.borrow_mut().get(4 * i);
                let sw = switches(&mut read_p, last)?;
                let mut c = 0;
                for w in sw.windows(2) {
                    let (s, v) = w[0];
                    for i in 0..w[1].0 - s {
                        if cell.borrow_mut().get(2 * (2 * pair(v, i as u64) as usize + 1))?.is_zero() {
                            c += 1;
                        }
                    }
                }
                *shift = Some((c, 0));
            }
            let (c, j) = shift.expect("set above");
            *shift = Some((c, j + 1));
            t.get(4 * (j + c) + 1)
        }),
    )
}

// ---- R22, R23: pipelines

fn r22() -> Witness {
    let stage1 = Stage {
        pre: realizer((MarkerScan::default(), 0u64), |(scan, least): &mut (MarkerScan, u64), read: &mut Read| {
            let s = read(scan.read())?;
            scan.push(&s);
            let l = scan.least_absent();
            let moved = l != *least;
            *least = l;
            Ok(sym(u64::from(moved)))
        }),
        oracle: Problem::IsFiniteS,
        push: Rc::new(|x, _| {
            let a = x.as_closed()?;
            let src = x.name.clone();
            let name =
                replay((MarkerScan::default(), 0u64), src, |(scan, least): &mut (MarkerScan, u64), read: &mut Read| {
                    let s = read(scan.read())?;
                    scan.push(&s);
                    let l = scan.least_absent();
                    let moved = l != *least;
                    *least = l;
                    Ok(sym(u64::from(moved)))
                });
            let ones = if a.is_empty() { Count::Infinitely } else { Count::Finitely };
            let bits = Bits { zeros: None, ones: Some(ones) };
            Ok(Instance::new(format!("moves of {}", x.label), Form::Bits(bits, None), name))
        }),
    };
    let stage2 = Stage {
        pre: positional(|k, t| t.get(2 * k + 1)),
        oracle: Problem::Lpo,
        push: Rc::new(|_, a| match a {
            [Answer::Sierp(top)] => Ok(Instance::binary(&sierp_name(*top))),
            _ => Err(DomainError("expected a Sierpiński answer".into())),
        }),
    };
    let stage3 = Stage {
        pre: stateful(None, |all: &mut Option<bool>, t: &mut Tape| {
            if all.is_none() {
                *all = Some(small(&t.get(2)?) == 1);
            }
            Ok(sym(0))
        })
        .pipe_copy_unless(),
        oracle: Problem::Cn,
        push: Rc::new(|x, a| match a {
            [_, Answer::Bit(false)] => Ok(x.clone()),
            [_, Answer::Bit(true)] => Ok(Instance::closed(ClosedSet::of_natset(&NatSet::cofinite([])))),
            _ => Err(DomainError("expected an LPO answer".into())),
        }),
    };
    Witness {
        id: "R22",
        source: Problem::Tcn,
        about: "decide emptiness through isFinite_𝕊 and LPO, then choose from A or from ℕ",
        stages: vec![stage1, stage2, stage3],
        post: positional(|_, t| t.get(3)),
    }
}

trait PipeCopyUnless {
    fn pipe_copy_unless(self) -> Make;
}

impl PipeCopyUnless for Make {
    /// Stage 3 of a stride-3 tape: copies the input, or writes `0^ω` when LPO said 1.
    fn pipe_copy_unless(self) -> Make {
        stateful((None, 0usize), |(all, k): &mut (Option<bool>, usize), t: &mut Tape| {
            if all.is_none() {
                *all = Some(small(&t.get(2)?) == 1);
            }
            let s = if all.expect("set above") { sym(0) } else { t.get(3 * *k)? };
            *k += 1;
            Ok(s)
        })
    }
}

fn r23() -> Witness {
    let stage1 = Stage {
        pre: crate::stream::bit_swap(),
        oracle: Problem::IsInfiniteS,
        push: Rc::new(|x, _| {
            let p = x.as_binary()?;
            let flip = |w: &[Sym]| w.iter().map(|s| sym(1 - small(s).min(1))).collect::<Vec<_>>();
            Ok(Instance::binary(&UPStream::new(flip(p.prefix()), flip(p.period()))))
        }),
    };
    let stage2 = Stage {
        pre: positional(|k, t| t.get(2 * k + 1)),
        oracle: Problem::Lpo,
        push: Rc::new(|_, a| match a {
            [Answer::Sierp(top)] => Ok(Instance::binary(&sierp_name(*top))),
            _ => Err(DomainError("expected a Sierpiński answer".into())),
        }),
    };
    let stage3 = Stage {
        pre: stateful((None, 0usize, 0u64), |(finite, k, zeros): &mut (Option<bool>, usize, u64), t: &mut Tape| {
            if finite.is_none() {
                *finite = Some(small(&t.get(2)?) == 1);
            }
            if !finite.expect("set above") {
                return Ok(sym(0));
            }
            if t.get(3 * *k)?.is_zero() {
                *zeros += 1;
            }
            *k += 1;
            Ok(sym(*zeros))
        }),
        oracle: Problem::MaxNN,
        push: Rc::new(|x, a| match a {
            [_, Answer::Bit(true)] => {
                let p = x.as_binary()?;
                let n = p.count_finite(&sym(0)).ok_or(DomainError("infinitely many 0s".into()))?;
                let mut prefix = Vec::new();
                let mut z = 0;
                let mut i = 0;
                while z < n {
                    if p.query(i).is_zero() {
                        z += 1;
                    }
                    prefix.push(sym(z as u64));
                    i += 1;
                }
                prefix.pop();
                Ok(Instance::seq(&UPStream::new(prefix, vec![sym(n as u64)])))
            }
            [_, Answer::Bit(false)] => Ok(Instance::seq(&UPStream::constant(0))),
            _ => Err(DomainError("expected an LPO answer".into())),
        }),
    };
    Witness {
        id: "R23",
        source: Problem::Sort,
        about: "decide finiteness of the 0s, then take the max of the running zero count",
        stages: vec![stage1, stage2, stage3],
        post: stateful(None, |m: &mut Option<(Option<u64>, u64)>, t: &mut Tape| {
            if m.is_none() {
                let finite = small(&t.get(2)?) == 1;
                let top = if finite { Some(small(&t.get(3)?)) } else { None };
                *m = Some((top, 0));
            }
            let (top, j) = m.expect("set above");
            *m = Some((top, j + 1));
            Ok(sym(u64::from(top.is_some_and(|n| j >= n))))
        }),
    }
}

// ---- R24–R26: AlgDec₁

fn minpoly_of(a: &PointDescriptor) -> Poly {
    match a {
        PointDescriptor::Rat(r) => Poly::linear_root(r).primitive(),
        PointDescriptor::Alg(al) => al.minpoly().clone(),
        PointDescriptor::Limit(_) => unreachable!("enumerated points are algebraic"),
    }
}

/// Decides bit `n` of AlgDec₁ for the real on the input, consulting the type on the answer.
#[derive(Clone, Default)]
struct BitDecider {
    index: Option<Option<usize>>,
    stage: usize,
    bits: Vec<bool>,
}

impl BitDecider {
    fn bit(&mut self, n: usize, t: &mut Tape) -> Result<bool, Diverged> {
        while self.bits.len() <= n {
            let k = self.bits.len();
            let p = enum_poly_u64(k as u64);
            let mut s = 0;
            let b = loop {
                if let Some(Some(m)) = self.index {
                    break is_zero_at(&p, &enum_algebraic(m)).expect("algebraic");
                }
                if self.index.is_none() && s >= self.stage {
                    let q = nu_q(&ans(t, s)?);
                    if q.abs() > dyadic(s as u32) * Q::from_integer(2.into()) {
                        let mut hit = None;
                        for m in 0..=s {
                            let r = nu_q(&ans(t, m + 3)?);
                            if (&r - dyadic(m as u32)).abs() < dyadic(m as u32 + 2) {
                                hit = Some(m);
                                break;
                            }
                        }
                        self.index = Some(hit);
                    }
                    self.stage = s + 1;
                }
                if p.is_zero() {
                    break true;
                }
                let q = nu_q(&inp(t, s)?);
                let e = dyadic(s as u32);
                let (lo, hi) = crate::algebra::eval_interval(&p, &(&q - &e), &(&q + &e));
                if lo.is_positive() || hi.is_negative() {
                    break false;
                }
                t.tick(1)?;
                s += 1;
            };
            self.bits.push(b);
        }
        Ok(self.bits[n])
    }
}

fn r24() -> Witness {
    single(
        "R24",
        Problem::AlgDec1,
        Problem::TypeA,
        "the type names a_m; then vanishing is divisibility by its minimal polynomial",
        crate::stream::identity(),
        same(),
        stateful((BitDecider::default(), 0usize), |(d, j): &mut (BitDecider, usize), t: &mut Tape| {
            let terms = *j / 2 + 3;
            let mut sum = Q::zero();
            let mut w = Q::new(1.into(), 4.into());
            for n in 0..terms {
                if d.bit(n, t)? {
                    sum += &w;
                }
                w /= Q::from_integer(4.into());
            }
            *j += 1;
            Ok(nu_q_inv(&sum))
        }),
    )
}

/// Bit `n` of an AlgDec₁ real from its name position `2n+4`.
fn algdec_bit(q: &Q, n: usize) -> bool {
    let scale = Q::from_integer(BigUint::from(4u32).pow(n as u32 + 1).into());
    let v = (q * scale + Q::new(1.into(), 4.into())).floor().to_integer();
    (v % 4u32) == 1u32.into()
}

fn r25() -> Witness {
    single(
        "R25",
        Problem::TypeA,
        Problem::AlgDec1,
        "find a_i near x; one AlgDec₁ bit at its minimal polynomial confirms x = a_i",
        crate::stream::identity(),
        same(),
        stateful(
            (HashMap::<usize, bool>::new(), 0usize),
            |(memo, j): &mut (HashMap<usize, bool>, usize), t: &mut Tape| {
                let mut out = Q::zero();
                for i in 0..=*j + 1 {
                    let hit = match memo.get(&i) {
                        Some(&h) => h,
                        None => {
                            let a = enum_algebraic(i);
                            let mut apart = false;
                            for s in 0..=DEPTH {
                                t.tick(1)?;
                                if separated(&nu_q(&inp(t, s)?), &dyadic(s as u32), &a, s as u32 + 2) {
                                    apart = true;
                                    break;
                                }
                            }
                            let h = !apart && {
                                let n = first_index(&minpoly_of(&a)).to_usize().expect("small index");
                                algdec_bit(&nu_q(&ans(t, 2 * n + 4)?), n)
                            };
                            memo.insert(i, h);
                            h
                        }
                    };
                    if hit {
                        out = dyadic(i as u32);
                        break;
                    }
                }
                *j += 1;
                Ok(nu_q_inv(&out))
            },
        ),
    )
}

fn r26() -> Witness {
    let prog = shipped_index("algdec_partial").and_then(program_of).expect("shipped");
    single(
        "R26",
        Problem::AlgDec1,
        Problem::AlgDec1,
        "run the partial-sum program with zero tests answered from AlgDec₁ bits",
        crate::stream::identity(),
        same(),
        stateful((None::<TapeCache>, 0u64), move |(cache, i): &mut (Option<TapeCache>, u64), t: &mut Tape| {
            let cache = cache.get_or_insert_with(|| Rc::new(RefCell::new(HashMap::new()))).clone();
            let point: Rc<dyn Point> = Rc::new(NamePoint { cache: cache.clone(), stride: 2, offset: 0 });
            let bc = cache.clone();
            let bits: AlgDecBits = Rc::new(move |n: &BigUint| {
                let n = n.to_usize().ok_or(Stall::Fuel)?;
                let pos = 2 * (2 * n + 4) + 1;
                let s = bc.borrow().get(&pos).cloned().ok_or(Stall::Missing(pos))?;
                Ok(algdec_bit(&nu_q(&s), n))
            });
            loop {
                let mut m = algdec_machine(prog.clone(), point.clone(), bits.clone(), Some(*i + 1));
                let before = t.fuel().left();
                let r = m.run_to(before);
                match r {
                    Ok(()) => {
                        t.tick(m.steps())?;
                        let v = match m.outcome() {
                            Outcome::Halted(v) => v[0].coeff(0),
                            _ => loop {
                                t.tick(1)?;
                            },
                        };
                        *i += 1;
                        return Ok(nu_q_inv(&v));
                    }
                    Err(Stall::Missing(pos)) => {
                        let s = t.get(pos)?;
                        cache.borrow_mut().insert(pos, s);
                    }
                    Err(Stall::Fuel) => return Err(Diverged),
                }
            }
        }),
    )
}

// ---- verification

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Status {
    pub fn tag(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail(_) => "FAIL",
            Status::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            Status::Pass => "",
            Status::Fail(s) | Status::Inconclusive(s) => s,
        }
    }
}

/// Outcome of comparing pre-processor outputs with pushed names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree { stage: usize, position: usize },
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct EntryReport {
    pub id: String,
    pub input: String,
    pub prefix: Status,
    pub soundness: Status,
    pub pre_queries: usize,
    pub post_queries: usize,
    pub fuel_used: u64,
    pub micros: u128,
}

impl EntryReport {
    pub fn status(&self) -> Status {
        for s in [&self.prefix, &self.soundness] {
            if let Status::Fail(_) = s {
                return s.clone();
            }
        }
        for s in [&self.prefix, &self.soundness] {
            if let Status::Inconclusive(_) = s {
                return s.clone();
            }
        }
        Status::Pass
    }
}

/// Everything a witness run produced on one input.
pub struct Run {
    pub pushed: Vec<Instance>,
    pub pre_outputs: Vec<Vec<Sym>>,
    pub answers: Vec<Answer>,
    pub post_output: Vec<Sym>,
    pub pre_queries: usize,
    pub post_queries: usize,
    pub fuel_used: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunError {
    Push { stage: usize, error: DomainError },
    Oracle { stage: usize, error: DomainError },
    Diverged { stage: Option<usize> },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Push { stage, error } => write!(f, "push of stage {stage}: {error}"),
            RunError::Oracle { stage, error } => write!(f, "oracle of stage {stage}: {error}"),
            RunError::Diverged { stage: Some(s) } => write!(f, "pre-processor of stage {s} ran out of fuel"),
            RunError::Diverged { stage: None } => write!(f, "post-processor ran out of fuel"),
        }
    }
}

fn tape_of(x: &Instance, answers: &[Answer]) -> Src {
    let mut parts = vec![x.name.clone()];
    parts.extend(answers.iter().map(Answer::name));
    Rc::new(Interleave(parts))
}

/// Runs every stage to `depth` and the post-processor to `depth`, each with `fuel`.
pub fn execute(w: &Witness, x: &Instance, depth: usize, fuel: u64) -> Result<Run, RunError> {
    let mut res = Run {
        pushed: Vec::new(),
        pre_outputs: Vec::new(),
        answers: Vec::new(),
        post_output: Vec::new(),
        pre_queries: 0,
        post_queries: 0,
        fuel_used: 0,
    };
    for (i, stage) in w.stages.iter().enumerate() {
        let y = (stage.push)(x, &res.answers).map_err(|error| RunError::Push { stage: i, error })?;
        let trace = run_pre(stage, x, &res.answers, depth, fuel).map_err(|_| RunError::Diverged { stage: Some(i) })?;
        res.pre_queries += trace.queries;
        res.fuel_used += trace.fuel_used;
        res.pre_outputs.push(trace.output);
        let a = stage.oracle.ideal(&y).map_err(|error| RunError::Oracle { stage: i, error })?;
        res.pushed.push(y);
        res.answers.push(a);
    }
    let trace = run(&w.post, tape_of(x, &res.answers), RunBudget::new(fuel, depth))
        .map_err(|_| RunError::Diverged { stage: None })?;
    res.post_queries = trace.queries;
    res.fuel_used += trace.fuel_used;
    res.post_output = trace.output;
    Ok(res)
}

fn run_pre(
    stage: &Stage,
    x: &Instance,
    answers: &[Answer],
    depth: usize,
    fuel: u64,
) -> Result<crate::stream::Trace, Diverged> {
    run(&stage.pre, tape_of(x, answers), RunBudget::new(fuel, depth))
}

/// First position where a pre-processor output and its pushed name differ.
pub fn structured_push_check(w: &Witness, x: &Instance, depth: usize) -> Agreement {
    let mut answers = Vec::new();
    for (i, stage) in w.stages.iter().enumerate() {
        let y = match (stage.push)(x, &answers) {
            Ok(y) => y,
            Err(e) => return Agreement::Inconclusive(e.to_string()),
        };
        let out = match run_pre(stage, x, &answers, depth, FUEL) {
            Ok(t) => t.output,
            Err(_) => return Agreement::Inconclusive(format!("stage {i} ran out of fuel")),
        };
        let want = match take(&y.name, depth) {
            Ok(w) => w,
            Err(_) => return Agreement::Inconclusive("pushed name diverged".into()),
        };
        if let Some(p) = (0..depth).find(|&k| out[k] != want[k]) {
            return Agreement::Disagree { stage: i, position: p };
        }
        match stage.oracle.ideal(&y) {
            Ok(a) => answers.push(a),
            Err(e) => return Agreement::Inconclusive(e.to_string()),
        }
    }
    Agreement::Agree
}

/// Checks prefix consistency and soundness of `w` on one input.
pub fn verify_one(w: &Witness, id: &str, literal: &str, depth: usize, fuel: u64) -> Result<EntryReport, ParseError> {
    let x = w.source.parse_instance(literal)?;
    let start = Instant::now();
    let mut report = EntryReport {
        id: id.to_string(),
        input: literal.to_string(),
        prefix: Status::Pass,
        soundness: Status::Pass,
        pre_queries: 0,
        post_queries: 0,
        fuel_used: 0,
        micros: 0,
    };
    match execute(w, &x, depth, fuel) {
        Ok(r) => {
            report.pre_queries = r.pre_queries;
            report.post_queries = r.post_queries;
            report.fuel_used = r.fuel_used;
            for (i, (out, y)) in r.pre_outputs.iter().zip(&r.pushed).enumerate() {
                match take(&y.name, depth) {
                    Ok(want) => {
                        if let Some(p) = (0..depth).find(|&k| out[k] != want[k]) {
                            report.prefix = Status::Fail(format!(
                                "stage {i} position {p}: pre-processor wrote {}, pushed name has {}",
                                out[p], want[p]
                            ));
                            break;
                        }
                    }
                    Err(_) => report.prefix = Status::Inconclusive("pushed name diverged".into()),
                }
            }
            if let Err(e) = w.source.validate(&x, &r.post_output) {
                report.soundness = Status::Fail(e);
            }
        }
        Err(e @ RunError::Diverged { .. }) => {
            report.prefix = Status::Inconclusive(e.to_string());
            report.soundness = Status::Inconclusive(e.to_string());
        }
        Err(e) => report.soundness = Status::Fail(e.to_string()),
    }
    report.micros = start.elapsed().as_micros();
    Ok(report)
}

pub fn verify_witness(id: &str, corpus: &[String], depth: usize, fuel: u64) -> Result<Vec<EntryReport>, ManifestError> {
    let w = witness_for(id)?;
    corpus
        .iter()
        .map(|lit| {
            verify_one(&w, id, lit, depth, fuel).map_err(|e| ManifestError::Literal(id.to_string(), lit.clone(), e))
        })
        .collect()
}

/// Looks up an id, honoring the `/corrupt` suffix of negative controls.
pub fn witness_for(id: &str) -> Result<Witness, UnknownWitness> {
    match id.strip_suffix("/corrupt") {
        Some(base) => Ok(corrupted(get_witness(base)?, 5)),
        None => get_witness(id),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error(transparent)]
    Unknown(#[from] UnknownWitness),
    #[error("{0}: input `{1}`: {2}")]
    Literal(String, String, ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub depth: usize,
    pub fuel: u64,
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    /// Lines `depth N`, `fuel N`, and `ID LITERAL`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
        let mut m = Manifest { depth: DEPTH, fuel: FUEL, entries: Vec::new() };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let num = |s: &str| {
                s.replace('_', "").parse::<u64>().map_err(|_| ManifestError::Syntax(n + 1, format!("bad number `{s}`")))
            };
            match head {
                "depth" => m.depth = num(rest)? as usize,
                "fuel" => m.fuel = num(rest)?,
                id => {
                    if rest.is_empty() {
                        return Err(ManifestError::Syntax(n + 1, format!("`{id}` has no input")));
                    }
                    m.entries.push((id.to_string(), rest.to_string()));
                }
            }
        }
        m.check()?;
        Ok(m)
    }

    /// Every id is registered and every literal parses.
    pub fn check(&self) -> Result<(), ManifestError> {
        for (id, lit) in &self.entries {
            let w = witness_for(id)?;
            w.source.parse_instance(lit).map_err(|e| ManifestError::Literal(id.clone(), lit.clone(), e))?;
        }
        Ok(())
    }

    pub fn select(&self, suite: &str) -> Result<Manifest, UnknownWitness> {
        if suite == "all" {
            return Ok(self.clone());
        }
        let ids = expand(suite)?;
        let entries = self
            .entries
            .iter()
            .filter(|(id, _)| {
                ids.contains(&id.as_str()) || id.strip_suffix("/corrupt").is_some_and(|b| ids.contains(&b))
            })
            .cloned()
            .collect();
        Ok(Manifest { entries, ..self.clone() })
    }
}

/// Verifies every entry, spreading them over `threads` workers; the report
/// keeps manifest order.
pub fn verify_manifest(m: &Manifest, threads: usize) -> Vec<EntryReport> {
    let threads = threads.max(1).min(m.entries.len().max(1));
    let mut slots: Vec<Option<EntryReport>> = vec![None; m.entries.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let entries = &m.entries;
                let (depth, fuel) = (m.depth, m.fuel);
                scope.spawn(move || {
                    let mut cache: HashMap<String, Witness> = HashMap::new();
                    let mut out = Vec::new();
                    for (i, (id, lit)) in entries.iter().enumerate().filter(|(i, _)| i % threads == k) {
                        let w = cache.entry(id.clone()).or_insert_with(|| witness_for(id).expect("checked manifest"));
                        let r = verify_one(w, id, lit, depth, fuel).expect("checked manifest");
                        out.push((i, r));
                    }
                    out
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("verification worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every entry ran")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(id: &str, lit: &str) -> EntryReport {
        let w = get_witness(id).unwrap();
        let r = verify_one(&w, id, lit, DEPTH, FUEL).unwrap();
        assert_eq!(r.status(), Status::Pass, "{id} on {lit}: {:?} / {:?}", r.prefix, r.soundness);
        r
    }

    #[test]
    fn registry_is_complete() {
        for id in registry() {
            assert_eq!(get_witness(id).unwrap().id, *id);
        }
        assert_eq!(expand("R3").unwrap().len(), 10);
        assert!(get_witness("R99").is_err());
    }

    #[test]
    fn swap_agrees_on_ones() {
        let w = get_witness("R19").unwrap();
        let x = Problem::IsFiniteS.parse_instance(":1").unwrap();
        assert_eq!(structured_push_check(&w, &x, DEPTH), Agreement::Agree);
        let out = run(&w.stages[0].pre, x.name.clone(), RunBudget::new(FUEL, 8)).unwrap();
        assert!(out.output.iter().all(|s| s.is_zero()));
        let bad = corrupted(w, 5);
        assert_eq!(structured_push_check(&bad, &x, DEPTH), Agreement::Disagree { stage: 0, position: 5 });
    }

    #[test]
    fn zero_count_columns() {
        let w = get_witness("R16").unwrap();
        let x = Problem::Sort.parse_instance("0110:1").unwrap();
        let out = run(&w.stages[0].pre, x.name.clone(), RunBudget::new(FUEL, 40)).unwrap().output;
        let p = [0, 1, 1, 0, 1];
        for (k, s) in out.iter().enumerate() {
            let (n, i) = unpair(k as u64);
            let zeros = p.iter().take(i as usize + 1).filter(|&&b| b == 0).count() as u64;
            assert_eq!(s.is_zero(), zeros >= n, "position {k}");
        }
    }

    #[test]
    fn decimal_digits() {
        let w = get_witness("R11").unwrap();
        let x = Problem::IsInfinite.parse_instance("11:0").unwrap();
        let out = run(&w.stages[0].pre, x.name.clone(), RunBudget::new(FUEL, 6)).unwrap().output;
        assert_eq!(nu_q(&out[5]), Q::new(101.into(), 1000.into()));
    }

    #[test]
    fn simple_witnesses_pass() {
        check("R19", "01:1");
        check("R19", ":0");
        check("R12b", "0:01");
        check("R12a", "copy_ones@1:0");
        check("R3b", "set:{4}");
        check("R3c", "coset:{0,1}");
        check("R3h", "set:{2,5}");
        check("R3h", "set:{}");
        check("R3i", "set:{2,5}");
        check("R9", "rat:1/3");
        check("R7a", "rat:6/8");
        check("R7b", "rat:0");
    }

    #[test]
    fn closed_set_witnesses_pass() {
        check("R3a", "set:{3,7}");
        check("R3d", "coset:{0,1,2}");
        check("R3e", "0,3,1:2");
        check("R3f", "0,3,1:2");
        check("R3g", "set:{1,6}");
        check("R3j", "set:{2,9}");
        check("R4a", "set:{2,9}");
        check("R4b", "1,1/2:2");
        check("R8", "rat:3/4");
        check("R15", "set:{2,5}");
        check("R18", "0110:0");
        check("R18", ":01");
    }

    #[test]
    fn dyadic_witnesses_pass() {
        check("R5", "0,2,1:1");
        check("R6", "0,2,1:1");
        check("R5", ":0");
    }

    #[test]
    fn machine_witnesses_pass() {
        check("R1", "0,2,1:1");
        check("R2", "lpo_max@01:1");
        check("R2", "lpo_count@:0;1:0");
        check("R10", "idq@rat:1/2");
        check("R11", "01:0");
        check("R11", ":01");
    }

    #[test]
    fn sort_compositions_pass() {
        check("R16", "0110:1");
        check("R17", "2,1:0");
        check("R20", ":0|0:1|00:1");
        check("R20", "001:0|0:1|00:1");
        check("R21", "0,1:0|0:1;000:1");
        check("R22", "set:{3}");
        check("R22", "set:{}");
        check("R23", "010:1");
        check("R23", ":0");
    }

    #[test]
    fn algebraic_witnesses_pass() {
        check("R13", "rat:-1/2");
        check("R13", "lim:e");
        check("R14", "0:1");
        check("R24", "rat:1");
        check("R24", "lim:e");
        check("R25", "alg:[-2,0,1]#1");
        check("R26", "rat:1");
    }
}
