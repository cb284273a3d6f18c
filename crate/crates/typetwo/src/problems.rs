//! Catalog of problems: structured instances, omniscient ideal oracles, and
//! validators that judge finite prefixes of answer names.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{algebraic_index, dyadic, enum_poly_u64, is_zero_at, parse_q, Q};
use crate::machine::{run_streams, shipped_at, shipped_index, shipped_named, Domain, Outcome};
use crate::spaces::{
    baire_nat, bit_name, check_real_name, delta_q_name, marker, nat_name, nu_q, nu_q_inv, sierp_name, NatSet,
    PointDescriptor,
};
use crate::stream::{interleave, pair, small, sym, tuple_stream, unpair, Interleave, Rule, Src, Sym, UPStream};
use crate::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("outside the domain: {0}")]
pub struct DomainError(pub String);

fn domain<T>(msg: impl Into<String>) -> Result<T, DomainError> {
    Err(DomainError(msg.into()))
}

/// How often a symbol occurs in a binary stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Exactly(u64),
    /// Finitely often, number unknown.
    Finitely,
    Infinitely,
}

impl Count {
    pub fn of(s: &UPStream, a: u64) -> Count {
        match s.count_finite(&sym(a)) {
            Some(n) => Count::Exactly(n as u64),
            None => Count::Infinitely,
        }
    }

    pub fn is_finite(self) -> bool {
        self != Count::Infinitely
    }
}

/// A binary stream whose name is known only as a source, with whatever is
/// known about its symbol counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bits {
    pub zeros: Option<Count>,
    pub ones: Option<Count>,
}

impl Bits {
    pub fn of(s: &UPStream) -> Bits {
        Bits { zeros: Some(Count::of(s, 0)), ones: Some(Count::of(s, 1)) }
    }
}

/// Stage-indexed exclusion test: `excluded(n, s)` is monotone in `s`.
pub type Exclusion = Rc<dyn Fn(u64, usize) -> bool>;

/// A closed subset of ℕ with its canonical name.
#[derive(Clone)]
pub struct ClosedSet {
    pub label: String,
    pub least: Option<u64>,
    member: Rc<dyn Fn(u64) -> bool>,
    excluded: Exclusion,
}

impl ClosedSet {
    pub fn new(
        label: impl Into<String>,
        least: Option<u64>,
        member: impl Fn(u64) -> bool + 'static,
        excluded: impl Fn(u64, usize) -> bool + 'static,
    ) -> Self {
        ClosedSet { label: label.into(), least, member: Rc::new(member), excluded: Rc::new(excluded) }
    }

    /// Excludes every non-member at the first stage it is considered.
    pub fn of_natset(set: &NatSet) -> Self {
        let (a, b) = (set.clone(), set.clone());
        ClosedSet::new(set.to_string(), set.least(), move |n| a.contains(n), move |n, _| !b.contains(n))
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.member)(n)
    }

    pub fn is_empty(&self) -> bool {
        self.least.is_none()
    }

    pub fn name(&self) -> Src {
        let ex = self.excluded.clone();
        schedule_name(move |n, s| ex(n, s))
    }
}

/// The canonical enumeration of exclusions. At stage `s` every `n ≤ s`
/// that is excluded by stage `s` and not yet listed gets its marker
/// `01^{n+1}0`; then a single `0` closes the stage.
#[derive(Clone, Debug, Default)]
pub struct Schedule {
    stage: usize,
    listed: BTreeSet<u64>,
}

impl Schedule {
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Symbols of the next stage. Leaves the schedule untouched on failure.
    pub fn advance<E>(&mut self, mut excluded: impl FnMut(u64, usize) -> Result<bool, E>) -> Result<Vec<Sym>, E> {
        let s = self.stage;
        let mut out = Vec::new();
        let mut fresh = Vec::new();
        for n in 0..=s as u64 {
            if !self.listed.contains(&n) && excluded(n, s)? {
                out.extend(marker(n));
                fresh.push(n);
            }
        }
        out.push(sym(0));
        self.listed.extend(fresh);
        self.stage += 1;
        Ok(out)
    }
}

/// Name produced by the canonical schedule.
pub fn schedule_name(excluded: impl Fn(u64, usize) -> bool + 'static) -> Src {
    let state = std::cell::RefCell::new((Schedule::default(), Vec::<Sym>::new()));
    Rule::new(move |i| {
        let mut st = state.borrow_mut();
        let (sched, buf) = &mut *st;
        while buf.len() <= i {
            let next = sched.advance::<()>(|n, s| Ok(excluded(n, s))).expect("infallible");
            buf.extend(next);
        }
        buf[i].clone()
    })
}

/// Incremental reader of set names: collects completed markers.
#[derive(Clone, Debug, Default)]
pub struct MarkerScan {
    ones: Option<usize>,
    read: usize,
    pub seen: BTreeSet<u64>,
}

impl MarkerScan {
    pub fn push(&mut self, s: &Sym) {
        self.read += 1;
        if s.is_zero() {
            if let Some(k) = self.ones.filter(|&k| k > 0) {
                self.seen.insert(k as u64 - 1);
            }
            self.ones = Some(0);
        } else if *s == sym(1) {
            self.ones = self.ones.map(|k| k + 1);
        } else {
            self.ones = None;
        }
    }

    /// Number of symbols consumed.
    pub fn read(&self) -> usize {
        self.read
    }

    /// Least number without a completed marker.
    pub fn least_absent(&self) -> u64 {
        (0..).find(|n| !self.seen.contains(n)).expect("finite set")
    }

    pub fn greatest(&self) -> Option<u64> {
        self.seen.iter().next_back().copied()
    }
}

/// A finite strict partial order on `[0, size)`, closed under transitivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteOrder {
    size: u64,
    rel: BTreeSet<(u64, u64)>,
}

impl FiniteOrder {
    pub fn new(edges: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, ParseError> {
        let mut rel: BTreeSet<(u64, u64)> = edges.into_iter().collect();
        loop {
            let extra: Vec<(u64, u64)> = rel
                .iter()
                .flat_map(|&(a, b)| rel.range((b, 0)..=(b, u64::MAX)).map(move |&(_, c)| (a, c)))
                .filter(|e| !rel.contains(e))
                .collect();
            if extra.is_empty() {
                break;
            }
            rel.extend(extra);
        }
        if rel.iter().any(|&(a, b)| a == b) {
            return Err(ParseError::new("relation has a cycle"));
        }
        let size = rel.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Ok(FiniteOrder { size, rel })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn holds(&self, a: u64, b: u64) -> bool {
        self.rel.contains(&(a, b))
    }
}

impl fmt::Display for FiniteOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.rel.iter().map(|(a, b)| format!("({a},{b})")).collect();
        write!(f, "{}", edges.join(","))
    }
}

/// Built-in stream transducers for isDefined. Each reads one input bit per
/// step and possibly emits.
#[derive(Clone, Copy)]
pub struct Transducer {
    pub name: &'static str,
    pub about: &'static str,
    /// Whether the machine emits on this step; the state starts at 0.
    pub emits: fn(&mut u8, u64) -> bool,
    pub productive: fn(&UPStream) -> bool,
}

pub const TRANSDUCERS: [Transducer; 5] = [
    Transducer {
        name: "copy_ones",
        about: "emits a symbol for each 1 read",
        emits: |_, b| b == 1,
        productive: |p| Count::of(p, 1) == Count::Infinitely,
    },
    Transducer { name: "always", about: "emits on every step", emits: |_, _| true, productive: |_| true },
    Transducer { name: "never", about: "never emits", emits: |_, _| false, productive: |_| false },
    Transducer {
        name: "copy_zeros",
        about: "emits a symbol for each 0 read",
        emits: |_, b| b == 0,
        productive: |p| Count::of(p, 0) == Count::Infinitely,
    },
    Transducer {
        name: "after_first_one",
        about: "silent until the first 1, then emits on every step",
        emits: |st, b| {
            if b == 1 {
                *st = 1;
            }
            *st == 1
        },
        productive: |p| Count::of(p, 1) != Count::Exactly(0),
    },
];

pub fn transducer_index(name: &str) -> Option<u64> {
    TRANSDUCERS.iter().position(|t| t.name == name).map(|i| i as u64)
}

/// Structured input of a problem.
#[derive(Clone)]
pub enum Form {
    /// Counts, plus the stream itself when it is ultimately periodic.
    Bits(Bits, Option<UPStream>),
    /// A sequence over ℕ.
    Seq(UPStream),
    /// A sequence of rationals, as ν_ℚ codes.
    RealSeq(UPStream),
    /// Input to lim given by its column limits.
    Columns(Rc<dyn Fn(usize) -> Option<u64>>),
    Closed(ClosedSet),
    /// A finite open set.
    Open(BTreeSet<u64>),
    Real {
        point: PointDescriptor,
        rational: Option<bool>,
    },
    Halting {
        program: u64,
        point: PointDescriptor,
    },
    Defined {
        machine: u64,
        input: UPStream,
    },
    Diamond {
        program: u64,
        inputs: Vec<UPStream>,
    },
    Order {
        order: FiniteOrder,
        seq: UPStream,
    },
    Tuple(Vec<Instance>),
    Family(Rc<dyn Fn(usize) -> Instance>),
}

/// A structured input together with its stream name.
#[derive(Clone)]
pub struct Instance {
    pub label: String,
    pub form: Form,
    pub name: Src,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl Instance {
    pub fn new(label: impl Into<String>, form: Form, name: Src) -> Self {
        Instance { label: label.into(), form, name }
    }

    pub fn binary(s: &UPStream) -> Self {
        Instance::new(s.to_string(), Form::Bits(Bits::of(s), Some(s.clone())), s.source())
    }

    pub fn seq(s: &UPStream) -> Self {
        Instance::new(s.to_string(), Form::Seq(s.clone()), s.source())
    }

    pub fn closed(set: ClosedSet) -> Self {
        let name = set.name();
        Instance::new(set.label.clone(), Form::Closed(set), name)
    }

    pub fn open(set: &BTreeSet<u64>) -> Self {
        let name = crate::spaces::open_name(&NatSet::Finite(set.clone()));
        Instance::new(NatSet::Finite(set.clone()).to_string(), Form::Open(set.clone()), name)
    }

    pub fn real(x: &PointDescriptor) -> Self {
        Instance::new(x.to_string(), Form::Real { point: x.clone(), rational: None }, x.real_name())
    }

    /// Rationals as eventually constant real sequences, named columnwise.
    pub fn real_seq(codes: &UPStream) -> Self {
        let c = codes.clone();
        let name = tuple_stream(move |i| UPStream::new(vec![], vec![c.query(i).clone()]).source());
        Instance::new(render_real_seq(codes), Form::RealSeq(codes.clone()), name)
    }

    pub fn halting(program: u64, x: &PointDescriptor) -> Self {
        let label = format!("{}@{}", shipped_at(program).map_or("?", |s| s.name), x);
        let name = interleave(UPStream::constant(program).source(), x.real_name());
        Instance::new(label, Form::Halting { program, point: x.clone() }, name)
    }

    pub fn defined(machine: u64, p: &UPStream) -> Self {
        let label = format!("{}@{}", TRANSDUCERS.get(machine as usize).map_or("?", |t| t.name), p);
        let name = interleave(UPStream::constant(machine).source(), p.source());
        Instance::new(label, Form::Defined { machine, input: p.clone() }, name)
    }

    pub fn diamond(program: u64, inputs: &[UPStream]) -> Self {
        let k = inputs.len() as u64;
        let label = format!(
            "{}@{}",
            shipped_at(program).map_or("?", |s| s.name),
            inputs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";")
        );
        let parts: Vec<Src> = inputs.iter().map(|s| s.source()).collect();
        let name = interleave(UPStream::constant(pair(program, k)).source(), Rc::new(Interleave(parts)));
        Instance::new(label, Form::Diamond { program, inputs: inputs.to_vec() }, name)
    }

    pub fn order(order: FiniteOrder, seq: &UPStream) -> Self {
        let label = format!("order:{order};seq:{}", render_pairs(seq));
        Instance::new(label, Form::Order { order, seq: seq.clone() }, seq.source())
    }

    /// Finite product, named by interleaving.
    pub fn tuple(parts: Vec<Instance>) -> Self {
        let label = parts.iter().map(|p| p.label.clone()).collect::<Vec<_>>().join("|");
        let name: Src = Rc::new(Interleave(parts.iter().map(|p| p.name.clone()).collect()));
        Instance::new(label, Form::Tuple(parts), name)
    }

    /// Countable product, named by pairing.
    pub fn family(label: impl Into<String>, f: impl Fn(usize) -> Instance + 'static) -> Self {
        let f: Rc<dyn Fn(usize) -> Instance> = Rc::new(f);
        let g = f.clone();
        let name = tuple_stream(move |i| g(i).name);
        Instance::new(label, Form::Family(f), name)
    }

    pub fn bits(&self) -> Result<Bits, DomainError> {
        match &self.form {
            Form::Bits(b, _) => Ok(*b),
            _ => domain("expected a binary stream"),
        }
    }

    pub fn as_binary(&self) -> Result<&UPStream, DomainError> {
        match &self.form {
            Form::Bits(_, Some(s)) => Ok(s),
            _ => domain("expected an ultimately periodic binary stream"),
        }
    }

    pub fn as_seq(&self) -> Result<&UPStream, DomainError> {
        match &self.form {
            Form::Seq(s) => Ok(s),
            _ => domain("expected a sequence over ℕ"),
        }
    }

    pub fn as_closed(&self) -> Result<&ClosedSet, DomainError> {
        match &self.form {
            Form::Closed(c) => Ok(c),
            _ => domain("expected a closed set"),
        }
    }

    pub fn as_open(&self) -> Result<&BTreeSet<u64>, DomainError> {
        match &self.form {
            Form::Open(s) => Ok(s),
            _ => domain("expected a finite open set"),
        }
    }

    pub fn as_real(&self) -> Result<(&PointDescriptor, Option<bool>), DomainError> {
        match &self.form {
            Form::Real { point, rational } => Ok((point, *rational)),
            _ => domain("expected a real"),
        }
    }

    pub fn parts(&self, n: usize) -> Result<&[Instance], DomainError> {
        match &self.form {
            Form::Tuple(v) if v.len() == n => Ok(v),
            _ => domain(format!("expected a {n}-tuple")),
        }
    }
}

fn render_real_seq(codes: &UPStream) -> String {
    let show = |w: &[Sym]| w.iter().map(|c| show_q(&nu_q(c))).collect::<Vec<_>>().join(",");
    format!("{}:{}", show(codes.prefix()), show(codes.period()))
}

fn show_q(r: &Q) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn render_pairs(seq: &UPStream) -> String {
    let show = |w: &[Sym]| {
        w.iter()
            .map(|c| {
                let (n, x) = unpair(small(c));
                format!("({n},{x})")
            })
            .collect::<String>()
    };
    format!("{}:{}", show(seq.prefix()), show(seq.period()))
}

/// An answer of an ideal oracle.
#[derive(Clone)]
pub enum Answer {
    Nat(BigUint),
    Bit(bool),
    Sierp(bool),
    /// `0^n1^ω`, or `0^ω` for `None`.
    Sorted(Option<u64>),
    Real(PointDescriptor),
    Discrete(Q),
    /// A sequence over ℕ given positionwise.
    Seq(Rc<dyn Fn(usize) -> u64>),
    /// Machine outputs; named `len^ω` interleaved with the outputs.
    Outputs(Vec<UPStream>),
    Tuple(Vec<Answer>),
    Family(Rc<dyn Fn(usize) -> Answer>),
}

pub fn sorted_name(n: Option<u64>) -> UPStream {
    match n {
        Some(n) => nat_name(n),
        None => UPStream::constant(0),
    }
}

pub fn outputs_name(outs: &[UPStream]) -> Src {
    let mut parts: Vec<Src> = outs.iter().map(|s| s.source()).collect();
    if parts.is_empty() {
        parts.push(UPStream::constant(0).source());
    }
    interleave(UPStream::constant(outs.len() as u64).source(), Rc::new(Interleave(parts)))
}

impl Answer {
    pub fn nat(n: u64) -> Answer {
        Answer::Nat(BigUint::from(n))
    }

    pub fn name(&self) -> Src {
        match self {
            Answer::Nat(n) => baire_nat(n).source(),
            Answer::Bit(b) => bit_name(*b).source(),
            Answer::Sierp(t) => sierp_name(*t).source(),
            Answer::Sorted(n) => sorted_name(*n).source(),
            Answer::Real(x) => x.real_name(),
            Answer::Discrete(r) => delta_q_name(r, 0).expect("nonnegative").source(),
            Answer::Seq(f) => {
                let f = f.clone();
                Rule::new(move |i| sym(f(i)))
            }
            Answer::Outputs(outs) => outputs_name(outs),
            Answer::Tuple(parts) => Rc::new(Interleave(parts.iter().map(Answer::name).collect())),
            Answer::Family(f) => {
                let f = f.clone();
                tuple_stream(move |i| f(i).name())
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Answer::Nat(n) => n.to_string(),
            Answer::Bit(b) => u8::from(*b).to_string(),
            Answer::Sierp(t) => (if *t { "⊤" } else { "⊥" }).to_string(),
            Answer::Sorted(Some(n)) if *n <= 16 => format!("{}1^ω", "0".repeat(*n as usize)),
            Answer::Sorted(Some(n)) => format!("0^{n}1^ω"),
            Answer::Sorted(None) => "0^ω".to_string(),
            Answer::Real(PointDescriptor::Rat(r)) => show_q(r),
            Answer::Real(x) => x.to_string(),
            Answer::Discrete(r) => show_q(r),
            Answer::Seq(f) => {
                let head: Vec<String> = (0..8).map(|i| f(i).to_string()).collect();
                format!("({}, …)", head.join(", "))
            }
            Answer::Outputs(outs) => outs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
            Answer::Tuple(parts) => format!("({})", parts.iter().map(Answer::render).collect::<Vec<_>>().join(", ")),
            Answer::Family(f) => {
                let head: Vec<String> = (0..4).map(|i| f(i).render()).collect();
                format!("({}, …)", head.join(", "))
            }
        }
    }
}

/// The set of legal answers, as far as a finite prefix can be judged.
#[derive(Clone)]
pub enum Legal {
    Nat(Rc<dyn Fn(&BigUint) -> bool>),
    /// Exactly one name is legal.
    Unique(Src),
    Real(PointDescriptor),
    Sierp(bool),
    Discrete(Q),
    Product(Vec<Legal>),
    Family(Rc<dyn Fn(usize) -> Legal>),
}

impl Legal {
    pub fn nat_eq(n: u64) -> Legal {
        let n = BigUint::from(n);
        Legal::Nat(Rc::new(move |m| *m == n))
    }

    pub fn unique_up(s: UPStream) -> Legal {
        Legal::Unique(s.source())
    }

    /// `Ok` iff the prefix extends to a legal answer name.
    pub fn check(&self, out: &[Sym]) -> Result<(), String> {
        match self {
            Legal::Nat(ok) => match out.first() {
                None => Ok(()),
                Some(n) => {
                    if let Some(i) = out.iter().position(|s| s != n) {
                        return Err(format!("natural-number name changes at position {i}"));
                    }
                    if ok(n) {
                        Ok(())
                    } else {
                        Err(format!("answer {n} is not legal"))
                    }
                }
            },
            Legal::Unique(name) => {
                for (i, s) in out.iter().enumerate() {
                    let want = name.at(i).map_err(|_| "ideal name diverged".to_string())?;
                    if *s != want {
                        return Err(format!("position {i}: got {s}, the answer name has {want}"));
                    }
                }
                Ok(())
            }
            Legal::Real(x) => {
                let src = UPStream::new(out.to_vec(), vec![sym(0)]).source();
                check_real_name(&src, x, out.len()).map_err(|i| format!("real name off at position {i}"))
            }
            // checked to the given depth: ⊤ must show itself within the prefix
            Legal::Sierp(true) => match out.iter().any(|s| !s.is_zero()) || out.is_empty() {
                true => Ok(()),
                false => Err(format!("no nonzero symbol for ⊤ within {} positions", out.len())),
            },
            Legal::Sierp(false) => match out.iter().position(|s| !s.is_zero()) {
                Some(i) => Err(format!("⊥ has only 0s, found {} at {i}", out[i])),
                None => Ok(()),
            },
            Legal::Discrete(r) => {
                let k = out.iter().take_while(|s| s.is_zero()).count();
                let want = delta_q_name(r, k).map_err(|e| e.to_string())?;
                if let Some((i, _)) = out.iter().enumerate().find(|(i, s)| *s != want.query(*i)) {
                    return Err(format!("discrete name off at position {i}"));
                }
                if !out.is_empty() && out.len() <= want.prefix().len() {
                    return Err(format!("discrete name incomplete within {} positions", out.len()));
                }
                Ok(())
            }
            Legal::Product(parts) => {
                let k = parts.len();
                for (j, part) in parts.iter().enumerate() {
                    let sub: Vec<Sym> = out.iter().skip(j).step_by(k).cloned().collect();
                    part.check(&sub).map_err(|e| format!("component {j}: {e}"))?;
                }
                Ok(())
            }
            Legal::Family(f) => {
                let mut cols: Vec<Vec<Sym>> = Vec::new();
                for (idx, s) in out.iter().enumerate() {
                    let (i, _) = unpair(idx as u64);
                    let i = i as usize;
                    if cols.len() <= i {
                        cols.resize(i + 1, Vec::new());
                    }
                    cols[i].push(s.clone());
                }
                for (i, col) in cols.iter().enumerate() {
                    f(i).check(col).map_err(|e| format!("column {i}: {e}"))?;
                }
                Ok(())
            }
        }
    }
}

/// Every problem in the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    Lpo,
    Sort,
    Cn,
    Ucn,
    Min,
    MaxOpen,
    MaxNN,
    Bound,
    LimDelta,
    Lim,
    IsInfinite,
    IsFiniteS,
    IsInfiniteS,
    Tcn,
    TypeA,
    AlgDec1,
    LR,
    IsDefined,
    ChiQ,
    ChiH,
    IdQ,
    Numerator,
    Denominator,
    LpoDiamond,
    SortTimesLpo,
    SortTimesMax,
    SortFamily,
    SortStarLpo,
    SortStarMax,
}

impl Problem {
    pub const ALL: [Problem; 29] = [
        Problem::Lpo,
        Problem::Sort,
        Problem::Cn,
        Problem::Ucn,
        Problem::Min,
        Problem::MaxOpen,
        Problem::MaxNN,
        Problem::Bound,
        Problem::LimDelta,
        Problem::Lim,
        Problem::IsInfinite,
        Problem::IsFiniteS,
        Problem::IsInfiniteS,
        Problem::Tcn,
        Problem::TypeA,
        Problem::AlgDec1,
        Problem::LR,
        Problem::IsDefined,
        Problem::ChiQ,
        Problem::ChiH,
        Problem::IdQ,
        Problem::Numerator,
        Problem::Denominator,
        Problem::LpoDiamond,
        Problem::SortTimesLpo,
        Problem::SortTimesMax,
        Problem::SortFamily,
        Problem::SortStarLpo,
        Problem::SortStarMax,
    ];

    pub fn id(self) -> &'static str {
        self.meta().0
    }

    pub fn title(self) -> &'static str {
        self.meta().1
    }

    /// Type and input literal syntax.
    pub fn about(self) -> &'static str {
        self.meta().2
    }

    fn meta(self) -> (&'static str, &'static str, &'static str) {
        use Problem::*;
        match self {
            Lpo => ("lpo", "LPO", "{0,1}^ℕ → {0,1}; binary stream `010:0`"),
            Sort => ("sort", "Sort", "{0,1}^ℕ → {0,1}^ℕ; binary stream"),
            Cn => ("cn", "C_ℕ", "𝒜(ℕ) ⇉ ℕ; `set:{3,7}` or `coset:{0}`"),
            Ucn => ("ucn", "UC_ℕ", "singletons in 𝒜(ℕ) → ℕ; `set:{4}`"),
            Min => ("min", "min", "𝒜(ℕ) → ℕ; closed set"),
            MaxOpen => ("max_open", "max_𝒪", "bounded 𝒪(ℕ) → ℕ; `set:{1,4}`"),
            MaxNN => ("max_nn", "max_ℕℕ", "ℕ^ℕ → ℕ; stream `0,3,1:3`"),
            Bound => ("bound", "Bound", "bounded 𝒪(ℕ) ⇉ ℕ; finite set"),
            LimDelta => ("lim_delta", "lim_Δ", "eventually constant ℝ^ℕ → ℝ; rationals `1,1/2:2`"),
            Lim => ("lim", "lim", "ℕ^ℕ → ℕ^ℕ; stream with stabilizing columns"),
            IsInfinite => ("isinfinite", "isInfinite", "{0,1}^ℕ → {0,1}; binary stream"),
            IsFiniteS => ("isfinite_s", "isFinite_𝕊", "{0,1}^ℕ → 𝕊; binary stream"),
            IsInfiniteS => ("isinfinite_s", "isInfinite_𝕊", "{0,1}^ℕ → 𝕊; binary stream"),
            Tcn => ("tcn", "TC_ℕ", "𝒜(ℕ) ⇉ ℕ, total; closed set"),
            TypeA => ("type_a", "Type_𝔞", "ℝ → [0,1]; descriptor `rat:1/2`, `alg:[-2,0,1]#1`, `lim:e`"),
            AlgDec1 => ("algdec1", "AlgDec₁", "ℝ → [0,1]; descriptor"),
            LR => ("l_r", "L_R", "ℕ^ℕ → ℕ; `order:(0,1);seq:(1,5)(0,7):(0,7)`"),
            IsDefined => ("isdefined", "isDefined", "ℕ × {0,1}^ℕ → {0,1}; `copy_ones@0:1`"),
            ChiQ => ("chi_q", "χ_ℚ", "ℝ → {0,1}; descriptor"),
            ChiH => ("chi_h", "χ_ℍ", "ℕ × ℝ → {0,1}; `idq@rat:1/2`"),
            IdQ => ("idq", "id_ℚ^{e,d}", "ℚ₊ (real name) → ℚ₊ (discrete name); `rat:3/4`"),
            Numerator => ("numerator", "Numerator", "ℚ₊ ⇉ ℕ; `rat:3/4`"),
            Denominator => ("denominator", "Denominator", "ℚ₊ ⇉ ℕ; `rat:3/4`"),
            LpoDiamond => ("lpo_diamond", "LPO⋄", "programs with LPO tests; `lpo_max@0,3,1:3`"),
            SortTimesLpo => ("sort_x_lpo", "Sort × LPO", "pair of binary streams `p|q`"),
            SortTimesMax => ("sort_x_max", "Sort × max_ℕℕ", "`p|q`, p binary, q over ℕ"),
            SortFamily => ("sort_family", "⨂Sort", "binary streams `q0;q1;…`, the last one repeated"),
            SortStarLpo => ("sort_star_lpo", "Sort ⋆ LPO", "table `p|q0|q1`: Sort(q_{LPO(p)})"),
            SortStarMax => ("sort_star_max", "Sort ⋆ max_ℕℕ", "table `p|q0;q1;…`: Sort(q_{max p})"),
        }
    }

    pub fn from_id(id: &str) -> Option<Problem> {
        Problem::ALL.into_iter().find(|p| p.id() == id)
    }

    pub fn parse_instance(self, lit: &str) -> Result<Instance, ParseError> {
        use Problem::*;
        let lit = lit.trim();
        match self {
            Lpo | Sort | IsInfinite | IsFiniteS | IsInfiniteS => binary_instance(lit),
            Cn | Ucn | Min | Tcn => Ok(Instance::closed(ClosedSet::of_natset(&lit.parse()?))),
            MaxOpen | Bound => match lit.parse::<NatSet>()? {
                NatSet::Finite(s) => Ok(Instance::open(&s)),
                NatSet::Cofinite(_) => Err(ParseError::new("open sets here must be finite")),
            },
            MaxNN | Lim => Ok(Instance::seq(&lit.parse()?)),
            LimDelta => Ok(Instance::real_seq(&parse_real_seq(lit)?)),
            TypeA | AlgDec1 | ChiQ | IdQ | Numerator | Denominator => Ok(Instance::real(&lit.parse()?)),
            LR => parse_order_instance(lit),
            IsDefined => {
                let (m, p) = split_at_sign(lit)?;
                let idx = transducer_index(m).ok_or_else(|| ParseError::new(format!("unknown machine `{m}`")))?;
                Ok(Instance::defined(idx, &binary(p)?))
            }
            ChiH => {
                let (m, x) = split_at_sign(lit)?;
                let e = shipped_index(m).ok_or_else(|| ParseError::new(format!("unknown program `{m}`")))?;
                if shipped_named(m).is_some_and(|s| s.sig.domain != Domain::Real) {
                    return Err(ParseError::new(format!("`{m}` does not run on reals")));
                }
                Ok(Instance::halting(e, &x.parse()?))
            }
            LpoDiamond => {
                let (m, ins) = split_at_sign(lit)?;
                let e = shipped_index(m).ok_or_else(|| ParseError::new(format!("unknown program `{m}`")))?;
                if shipped_named(m).is_some_and(|s| s.sig.domain != Domain::Stream) {
                    return Err(ParseError::new(format!("`{m}` is not an LPO program")));
                }
                let inputs = ins.split(';').map(|s| s.parse()).collect::<Result<Vec<UPStream>, _>>()?;
                Ok(Instance::diamond(e, &inputs))
            }
            SortTimesLpo => {
                let [p, q] = split_bar::<2>(lit)?;
                Ok(Instance::tuple(vec![binary_instance(p)?, binary_instance(q)?]))
            }
            SortTimesMax => {
                let [p, q] = split_bar::<2>(lit)?;
                Ok(Instance::tuple(vec![binary_instance(p)?, Instance::seq(&q.parse()?)]))
            }
            SortFamily => sort_family(lit),
            SortStarLpo => {
                let [p, q0, q1] = split_bar::<3>(lit)?;
                Ok(Instance::tuple(vec![binary_instance(p)?, binary_instance(q0)?, binary_instance(q1)?]))
            }
            SortStarMax => {
                let [p, qs] = split_bar::<2>(lit)?;
                Ok(Instance::tuple(vec![Instance::seq(&p.parse()?), sort_family(qs)?]))
            }
        }
    }

    /// The omniscient oracle: reads the structured form, never a name.
    pub fn ideal(self, x: &Instance) -> Result<Answer, DomainError> {
        use Problem::*;
        Ok(match self {
            Lpo => Answer::Bit(lpo_value(x)?),
            Sort => Answer::Sorted(zeros_of(x)?),
            Cn | Min => Answer::nat(nonempty_least(x.as_closed()?)?),
            Ucn => {
                let a = x.as_closed()?;
                let n = nonempty_least(a)?;
                if (n + 1..n + 1 + 4096).any(|m| a.contains(m)) {
                    return domain("set is not a singleton");
                }
                Answer::nat(n)
            }
            Tcn => Answer::nat(x.as_closed()?.least.unwrap_or(0)),
            MaxOpen => Answer::nat(*x.as_open()?.iter().next_back().ok_or(DomainError("empty open set".into()))?),
            Bound => Answer::nat(x.as_open()?.iter().next_back().copied().unwrap_or(0)),
            MaxNN => Answer::Nat(x.as_seq()?.max_symbol()),
            LimDelta => Answer::Real(PointDescriptor::Rat(lim_delta_value(x)?)),
            Lim => Answer::Seq(column_limits(x)?),
            IsInfinite => Answer::Bit(ones_infinite(x)?),
            IsFiniteS => Answer::Sierp(!ones_infinite(x)?),
            IsInfiniteS => Answer::Sierp(ones_infinite(x)?),
            TypeA => Answer::Real(PointDescriptor::Rat(type_a_value(x.as_real()?.0)?)),
            AlgDec1 => Answer::Real(algdec1_point(x.as_real()?.0)?),
            LR => match &x.form {
                Form::Order { order, seq } => Answer::Nat(l_r_value(order, seq)?.into()),
                _ => return domain("expected an order and a sequence"),
            },
            IsDefined => match &x.form {
                Form::Defined { machine, input } => {
                    let t = TRANSDUCERS.get(*machine as usize).ok_or(DomainError("unknown machine".into()))?;
                    Answer::Bit((t.productive)(input))
                }
                _ => return domain("expected a machine and a stream"),
            },
            ChiQ => Answer::Bit(is_rational(x)?),
            ChiH => match &x.form {
                Form::Halting { program, point } => {
                    let s = shipped_at(*program).ok_or(DomainError("unknown program".into()))?;
                    Answer::Bit((s.halts)(point).ok_or(DomainError(format!("halting of {} unknown here", s.name)))?)
                }
                _ => return domain("expected a program and a real"),
            },
            IdQ => Answer::Discrete(nonneg_rational(x)?),
            Numerator => Answer::Nat(nonneg_rational(x)?.numer().magnitude().clone()),
            Denominator => Answer::Nat(nonneg_rational(x)?.denom().magnitude().clone()),
            LpoDiamond => match &x.form {
                Form::Diamond { program, inputs } => {
                    let p = shipped_at(*program).ok_or(DomainError("unknown program".into()))?.program();
                    match run_streams(&p, inputs, 1_000_000).0 {
                        Outcome::Halted(outs) => Answer::Outputs(outs),
                        other => return domain(format!("machine does not halt: {other}")),
                    }
                }
                _ => return domain("expected a program and inputs"),
            },
            SortTimesLpo => {
                let [p, q] = x.parts(2)? else { unreachable!() };
                Answer::Tuple(vec![Sort.ideal(p)?, Lpo.ideal(q)?])
            }
            SortTimesMax => {
                let [p, q] = x.parts(2)? else { unreachable!() };
                Answer::Tuple(vec![Sort.ideal(p)?, MaxNN.ideal(q)?])
            }
            SortFamily => match &x.form {
                Form::Family(f) => {
                    let f = f.clone();
                    zeros_of(&f(0))?;
                    Answer::Family(Rc::new(move |i| Answer::Sorted(zeros_of(&f(i)).unwrap_or(None))))
                }
                _ => return domain("expected a family"),
            },
            SortStarLpo => {
                let [p, q0, q1] = x.parts(3)? else { unreachable!() };
                Sort.ideal(if lpo_value(p)? { q1 } else { q0 })?
            }
            SortStarMax => {
                let [p, qs] = x.parts(2)? else { unreachable!() };
                let m = small(&x_max(p)?) as usize;
                match &qs.form {
                    Form::Family(f) => Sort.ideal(&f(m))?,
                    _ => return domain("expected a family of Sort inputs"),
                }
            }
        })
    }

    /// Legal answers on `x`; multivalued problems admit several.
    pub fn legal(self, x: &Instance) -> Result<Legal, DomainError> {
        use Problem::*;
        Ok(match self {
            Cn | Ucn => {
                let a = x.as_closed()?.clone();
                nonempty_least(&a)?;
                Legal::Nat(Rc::new(move |n| n.to_u64().is_some_and(|n| a.contains(n))))
            }
            Tcn => {
                let a = x.as_closed()?.clone();
                Legal::Nat(Rc::new(move |n| a.is_empty() || n.to_u64().is_some_and(|n| a.contains(n))))
            }
            Bound => {
                let m = x.as_open()?.iter().next_back().copied().unwrap_or(0);
                Legal::Nat(Rc::new(move |n| *n >= BigUint::from(m)))
            }
            Denominator if nonneg_rational(x)?.is_zero() => Legal::Nat(Rc::new(|n| !n.is_zero())),
            IsFiniteS | IsInfiniteS => match self.ideal(x)? {
                Answer::Sierp(t) => Legal::Sierp(t),
                _ => unreachable!(),
            },
            IdQ => Legal::Discrete(nonneg_rational(x)?),
            SortTimesLpo | SortTimesMax => {
                let parts = x.parts(2)?;
                let second = if self == SortTimesLpo { Lpo } else { MaxNN };
                Legal::Product(vec![Sort.legal(&parts[0])?, second.legal(&parts[1])?])
            }
            SortFamily => match &x.form {
                Form::Family(f) => {
                    let f = f.clone();
                    Legal::Family(Rc::new(move |i| Legal::unique_up(sorted_name(zeros_of(&f(i)).unwrap_or(None)))))
                }
                _ => return domain("expected a family"),
            },
            _ => match self.ideal(x)? {
                Answer::Nat(n) => {
                    let n = n.clone();
                    Legal::Nat(Rc::new(move |m| *m == n))
                }
                Answer::Real(p) => Legal::Real(p),
                a => Legal::Unique(a.name()),
            },
        })
    }

    /// Whether `out` is a prefix of some legal answer name.
    pub fn validate(self, x: &Instance, out: &[Sym]) -> Result<(), String> {
        self.legal(x).map_err(|e| e.to_string())?.check(out)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.title())
    }
}

fn x_max(p: &Instance) -> Result<Sym, DomainError> {
    Ok(p.as_seq()?.max_symbol())
}

fn nonempty_least(a: &ClosedSet) -> Result<u64, DomainError> {
    a.least.ok_or_else(|| DomainError("empty closed set".into()))
}

fn lpo_value(x: &Instance) -> Result<bool, DomainError> {
    match x.bits()?.ones {
        Some(Count::Exactly(0)) => Ok(true),
        Some(_) => Ok(false),
        None => domain("count of 1s unknown"),
    }
}

fn zeros_of(x: &Instance) -> Result<Option<u64>, DomainError> {
    match x.bits()?.zeros {
        Some(Count::Exactly(n)) => Ok(Some(n)),
        Some(Count::Infinitely) => Ok(None),
        _ => domain("number of 0s unknown"),
    }
}

fn ones_infinite(x: &Instance) -> Result<bool, DomainError> {
    match x.bits()?.ones {
        Some(c) => Ok(!c.is_finite()),
        None => domain("finiteness of 1s unknown"),
    }
}

fn lim_delta_value(x: &Instance) -> Result<Q, DomainError> {
    match &x.form {
        Form::RealSeq(s) => {
            let c = s.canonicalize();
            if c.period().len() != 1 {
                return domain("sequence is not eventually constant");
            }
            Ok(nu_q(&c.period()[0]))
        }
        _ => domain("expected a sequence of rationals"),
    }
}

/// Column limits of `p` viewed as `n ↦ (i ↦ p(⟨n,i⟩))`.
fn column_limits(x: &Instance) -> Result<Rc<dyn Fn(usize) -> u64>, DomainError> {
    match &x.form {
        Form::Columns(f) => {
            let f = f.clone();
            f(0).ok_or(DomainError("column 0 does not stabilize".into()))?;
            Ok(Rc::new(move |n| f(n).unwrap_or(0)))
        }
        Form::Seq(p) => {
            let p = p.clone();
            let a = p.prefix().len() as u64;
            let per = 2 * p.period().len() as u64;
            let n0 = (0..).find(|&n| pair(n, 0) >= a).expect("pairing is unbounded");
            let mut limits = Vec::new();
            for n in 0..n0 + per {
                let i0 = (0..).find(|&i| pair(n, i) >= a).expect("pairing is unbounded");
                let v = p.query(pair(n, i0) as usize).clone();
                if (i0..i0 + per).any(|i| *p.query(pair(n, i) as usize) != v) {
                    return domain(format!("column {n} does not stabilize"));
                }
                limits.push(small(&v));
            }
            Ok(Rc::new(move |n| {
                let n = n as u64;
                let k = if n < n0 + per { n } else { n0 + (n - n0) % per };
                limits[k as usize]
            }))
        }
        _ => domain("expected a sequence over ℕ"),
    }
}

/// `2^-n` for `x = enum_algebraic(n)`, 0 off the enumeration.
pub fn type_a_value(x: &PointDescriptor) -> Result<Q, DomainError> {
    match x {
        PointDescriptor::Limit(l) if l.certified > 0 => Ok(Q::zero()),
        PointDescriptor::Limit(_) => domain("limit point not certified non-algebraic"),
        _ => {
            let n = algebraic_index(x).ok_or(DomainError("algebraic index out of reach".into()))?;
            Ok(dyadic(n as u32))
        }
    }
}

/// Bits `AlgDec₁(x)(n)` for `n < upto`.
pub fn algdec1_bits(x: &PointDescriptor, upto: usize) -> Result<Vec<bool>, DomainError> {
    if let PointDescriptor::Limit(l) = x {
        if upto > l.certified {
            return domain("beyond the certification bound");
        }
        return Ok(vec![false; upto]);
    }
    Ok((0..upto as u64).map(|n| is_zero_at(&enum_poly_u64(n), x).expect("algebraic point")).collect())
}

/// `∑_{P_n(x)=0} 4^{-n-1}` as a point with partial-sum approximations.
pub fn algdec1_point(x: &PointDescriptor) -> Result<PointDescriptor, DomainError> {
    if let PointDescriptor::Limit(l) = x {
        if l.certified == 0 {
            return domain("limit point not certified non-algebraic");
        }
        return Ok(PointDescriptor::Rat(Q::zero()));
    }
    let x = x.clone();
    let bits = std::cell::RefCell::new(Vec::<bool>::new());
    let label = format!("algdec({x})");
    Ok(PointDescriptor::limit_rule(
        label,
        move |k| {
            // the tail after n terms is below 4^-n / 3
            let terms = k as usize / 2 + 2;
            let mut b = bits.borrow_mut();
            while b.len() < terms {
                let n = b.len() as u64;
                b.push(is_zero_at(&enum_poly_u64(n), &x).expect("algebraic point"));
            }
            let quarter = Q::new(1.into(), 4.into());
            let mut w = quarter.clone();
            let mut sum = Q::zero();
            for &bit in b.iter().take(terms) {
                if bit {
                    sum += &w;
                }
                w *= &quarter;
            }
            // centre of the interval [sum, sum + tail]
            sum + w * Q::new(2.into(), 3.into())
        },
        0,
    ))
}

fn is_rational(x: &Instance) -> Result<bool, DomainError> {
    let (p, flag) = x.as_real()?;
    if let Some(r) = flag {
        return Ok(r);
    }
    match p {
        PointDescriptor::Rat(_) => Ok(true),
        PointDescriptor::Alg(_) => Ok(false),
        PointDescriptor::Limit(l) if l.certified > 0 => Ok(false),
        PointDescriptor::Limit(_) => domain("rationality of this limit point unknown"),
    }
}

fn nonneg_rational(x: &Instance) -> Result<Q, DomainError> {
    match x.as_real()?.0 {
        PointDescriptor::Rat(r) if !r.is_negative() => Ok(r.clone()),
        _ => domain("expected a nonnegative rational"),
    }
}

fn l_r_value(order: &FiniteOrder, seq: &UPStream) -> Result<u64, DomainError> {
    let n = seq.prefix().len() + seq.period().len();
    let at = |i: usize| unpair(small(seq.query(i)));
    for i in 0..n {
        let ((n0, x0), (n1, x1)) = (at(i), at(i + 1));
        if n0 >= order.size().max(1) || n1 >= order.size().max(1) {
            return domain(format!("rank {} outside the ground set", n0.max(n1)));
        }
        if x0 != x1 && !order.holds(n1, n0) {
            return domain(format!("value changes at {i} without a descent"));
        }
        if x0 == x1 && n0 != n1 {
            return domain(format!("rank changes at {i} without a value change"));
        }
    }
    let first = at(seq.prefix().len()).1;
    if seq.period().iter().any(|c| unpair(small(c)).1 != first) {
        return domain("sequence does not stabilize");
    }
    Ok(first)
}

fn binary(lit: &str) -> Result<UPStream, ParseError> {
    let s: UPStream = lit.parse()?;
    if !s.is_binary() {
        return Err(ParseError::new(format!("`{lit}` is not binary")));
    }
    Ok(s)
}

fn binary_instance(lit: &str) -> Result<Instance, ParseError> {
    Ok(Instance::binary(&binary(lit)?))
}

fn split_at_sign(lit: &str) -> Result<(&str, &str), ParseError> {
    lit.split_once('@').map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| ParseError::new(format!("`{lit}` lacks `@`")))
}

fn split_bar<const N: usize>(lit: &str) -> Result<[&str; N], ParseError> {
    let parts: Vec<&str> = lit.split('|').map(str::trim).collect();
    parts.try_into().map_err(|_| ParseError::new(format!("`{lit}` needs {N} parts separated by `|`")))
}

fn sort_family(lit: &str) -> Result<Instance, ParseError> {
    let streams = lit.split(';').map(binary).collect::<Result<Vec<_>, _>>()?;
    let parts: Vec<Instance> = streams.iter().map(Instance::binary).collect();
    let label = streams.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
    Ok(Instance::family(label, move |i| parts[i.min(parts.len() - 1)].clone()))
}

/// `a,b:c` over rationals, as ν_ℚ codes.
pub fn parse_real_seq(lit: &str) -> Result<UPStream, ParseError> {
    let (u, v) = lit.split_once(':').ok_or_else(|| ParseError::new(format!("`{lit}` lacks `:`")))?;
    let word = |w: &str| -> Result<Vec<Sym>, ParseError> {
        w.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| parse_q(t).map(|r| nu_q_inv(&r))).collect()
    };
    let period = word(v)?;
    if period.is_empty() {
        return Err(ParseError::new("empty period"));
    }
    Ok(UPStream::new(word(u)?, period))
}

fn parse_pairs(w: &str) -> Result<Vec<Sym>, ParseError> {
    let bad = || ParseError::new(format!("bad pair list `{w}`"));
    let mut out = Vec::new();
    let mut rest = w.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(bad)?;
        let (inner, tail) = body.split_once(')').ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        out.push(sym(pair(a, b)));
        rest = tail.trim_start_matches(',').trim();
    }
    Ok(out)
}

fn parse_order_instance(lit: &str) -> Result<Instance, ParseError> {
    let (o, s) = lit.split_once(';').ok_or_else(|| ParseError::new("expected `order:…;seq:…`"))?;
    let o = o.trim().strip_prefix("order:").ok_or_else(|| ParseError::new("missing `order:`"))?;
    let s = s.trim().strip_prefix("seq:").ok_or_else(|| ParseError::new("missing `seq:`"))?;
    let edges: Vec<(u64, u64)> = parse_pairs(o)?.iter().map(|c| unpair(small(c))).collect();
    let (u, v) = s.split_once(':').ok_or_else(|| ParseError::new("sequence lacks `:`"))?;
    let period = parse_pairs(v)?;
    if period.is_empty() {
        return Err(ParseError::new("empty period"));
    }
    Ok(Instance::order(FiniteOrder::new(edges)?, &UPStream::new(parse_pairs(u)?, period)))
}

/// Reduced numerator and denominator of a nonnegative rational.
pub fn lowest_terms(n: &BigUint, m: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    let g = n.gcd(m);
    (n / &g, m / &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{enum_algebraic, q};

    fn solve(p: Problem, lit: &str) -> Result<String, DomainError> {
        let x = p.parse_instance(lit).unwrap();
        p.ideal(&x).map(|a| a.render())
    }

    #[test]
    fn lpo_and_sort_examples() {
        assert_eq!(solve(Problem::Lpo, ":0").unwrap(), "1");
        assert_eq!(solve(Problem::Lpo, "001:0").unwrap(), "0");
        assert_eq!(solve(Problem::Lpo, ":01").unwrap(), "0");
        assert_eq!(solve(Problem::Sort, "010:1").unwrap(), "001^ω");
        assert_eq!(solve(Problem::Sort, "1:10").unwrap(), "0^ω");
        assert_eq!(solve(Problem::Sort, ":1").unwrap(), "1^ω");
        assert!(Problem::Lpo.parse_instance("012:0").is_err());
    }

    #[test]
    fn choice_examples() {
        assert_eq!(solve(Problem::Cn, "set:{3,7}").unwrap(), "3");
        assert_eq!(solve(Problem::Cn, "coset:{0}").unwrap(), "1");
        assert!(solve(Problem::Cn, "set:{}").is_err());
        assert_eq!(solve(Problem::Min, "set:{5,9}").unwrap(), "5");
        assert_eq!(solve(Problem::MaxNN, "031:3").unwrap(), "3");
        assert_eq!(solve(Problem::Ucn, "set:{4}").unwrap(), "4");
        assert!(solve(Problem::Ucn, "set:{4,5}").is_err());
        let b = Problem::Bound.parse_instance("set:{1,4}").unwrap();
        assert!(Problem::Bound.validate(&b, &vec![sym(10); 4]).is_ok());
        assert!(Problem::Bound.validate(&b, &vec![sym(3); 4]).is_err());
        let e = Problem::Tcn.parse_instance("set:{}").unwrap();
        assert!(Problem::Tcn.validate(&e, &vec![sym(17); 3]).is_ok());
        let two = Problem::Tcn.parse_instance("set:{2}").unwrap();
        assert!(Problem::Tcn.validate(&two, &[sym(2)]).is_ok());
        assert!(Problem::Tcn.validate(&two, &[sym(3)]).is_err());
    }

    #[test]
    fn validator_matches_brute_force_scan() {
        for lit in ["set:{3,7}", "coset:{0,1,5}", "set:{}", "set:{0}"] {
            for p in [Problem::Cn, Problem::Tcn] {
                let x = p.parse_instance(lit).unwrap();
                let set: NatSet = lit.parse().unwrap();
                for n in 0..64 {
                    let want = set.contains(n) || (p == Problem::Tcn && set.is_empty());
                    let got = p.validate(&x, &vec![sym(n); 4]).is_ok();
                    assert_eq!(got, want, "{p:?} {lit} {n}");
                }
            }
        }
    }

    #[test]
    fn closed_names_list_exclusions() {
        let a = ClosedSet::of_natset(&"set:{3,7}".parse().unwrap());
        let w = crate::stream::take(&a.name(), 40).unwrap();
        let seen = crate::spaces::markers_within(&w);
        assert!(seen.contains(&0) && seen.contains(&2) && !seen.contains(&3));
        let mut scan = MarkerScan::default();
        w.iter().for_each(|s| scan.push(s));
        assert_eq!(scan.seen, seen);
        assert_eq!(scan.least_absent(), 3);
    }

    #[test]
    fn lim_examples() {
        let x = Problem::Lim.parse_instance(":4").unwrap();
        match Problem::Lim.ideal(&x).unwrap() {
            Answer::Seq(f) => assert!((0..20).all(|n| f(n) == 4)),
            _ => panic!(),
        }
        assert!(solve(Problem::Lim, ":01").is_err());
        // column n is 1 at i = 0 and 0 afterwards when only ⟨n,0⟩ positions hold 1
        let pre: Vec<u64> = (0..28u64).map(|k| u64::from(unpair(k).1 == 0)).collect();
        let x = Instance::seq(&UPStream::from_u64(&pre, &[0]));
        match Problem::Lim.ideal(&x).unwrap() {
            Answer::Seq(f) => assert!((0..30).all(|n| f(n) == 0)),
            _ => panic!(),
        }
        assert_eq!(solve(Problem::LimDelta, "1,2:2").unwrap(), "2");
        assert_eq!(solve(Problem::LimDelta, ":3").unwrap(), "3");
        assert!(solve(Problem::LimDelta, ":1,2").is_err());
    }

    #[test]
    fn infinity_examples() {
        assert_eq!(solve(Problem::IsInfinite, "1:0").unwrap(), "0");
        assert_eq!(solve(Problem::IsInfinite, ":01").unwrap(), "1");
        assert_eq!(solve(Problem::IsFiniteS, "111:0").unwrap(), "⊤");
        assert_eq!(solve(Problem::IsDefined, "copy_ones@:01").unwrap(), "1");
        assert_eq!(solve(Problem::IsDefined, "copy_ones@1:0").unwrap(), "0");
        assert_eq!(solve(Problem::IsDefined, "always@1:0").unwrap(), "1");
    }

    #[test]
    fn real_valued_examples() {
        assert_eq!(solve(Problem::TypeA, "lim:e").unwrap(), "0");
        let five = enum_algebraic(5);
        let x = Instance::real(&five);
        match Problem::TypeA.ideal(&x).unwrap() {
            Answer::Real(PointDescriptor::Rat(r)) => assert_eq!(r, dyadic(5)),
            _ => panic!(),
        }
        assert_eq!(solve(Problem::TypeA, "rat:0").unwrap(), "1");
        assert_eq!(solve(Problem::Numerator, "rat:6/8").unwrap(), "3");
        assert_eq!(solve(Problem::Denominator, "rat:6/8").unwrap(), "4");
        assert_eq!(solve(Problem::IdQ, "rat:3/4").unwrap(), "3/4");
        assert_eq!(solve(Problem::ChiQ, "alg:[-2,0,1]#1").unwrap(), "0");
        assert_eq!(solve(Problem::ChiH, "idq@rat:1/2").unwrap(), "1");
        assert_eq!(solve(Problem::ChiH, "idq@alg:[-2,0,1]#1").unwrap(), "0");
        let bits = algdec1_bits(&PointDescriptor::from(1), 400).unwrap();
        for (n, b) in bits.iter().enumerate() {
            assert_eq!(*b, enum_poly_u64(n as u64).eval(&q(1)).is_zero());
        }
        let d = Instance::real(&PointDescriptor::from(0));
        assert!(Problem::Denominator.validate(&d, &vec![sym(5); 3]).is_ok());
    }

    #[test]
    fn order_examples() {
        assert_eq!(solve(Problem::LR, "order:(0,1);seq::(1,5)").unwrap(), "5");
        assert_eq!(solve(Problem::LR, "order:(0,1);seq:(1,5)(1,5):(0,7)").unwrap(), "7");
        assert!(solve(Problem::LR, "order:(0,1);seq:(0,5):(1,7)").is_err());
        assert!(FiniteOrder::new([(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn diamond_and_tables() {
        let out = solve(Problem::LpoDiamond, "lpo_max@031:3").unwrap();
        assert_eq!(out, ":3");
        let t = Problem::SortStarLpo.parse_instance(":0|0:1|00:1").unwrap();
        assert_eq!(Problem::SortStarLpo.ideal(&t).unwrap().render(), "001^ω");
        let t = Problem::SortStarMax.parse_instance("0,1:0|0:1;000:1").unwrap();
        assert_eq!(Problem::SortStarMax.ideal(&t).unwrap().render(), "0001^ω");
    }

    #[test]
    fn ideal_answers_pass_their_validators() {
        let cases: &[(Problem, &str)] = &[
            (Problem::Lpo, "01:0"),
            (Problem::Sort, "0110:1"),
            (Problem::Cn, "coset:{0,2}"),
            (Problem::MaxOpen, "set:{2,9}"),
            (Problem::LimDelta, "1/2:3/4"),
            (Problem::Lim, "1:2"),
            (Problem::TypeA, "alg:[-1,-1,1]#1"),
            (Problem::AlgDec1, "rat:1"),
            (Problem::IdQ, "rat:5/3"),
            (Problem::IsInfiniteS, ":10"),
            (Problem::SortTimesLpo, "0:1|:0"),
            (Problem::SortFamily, "0:1;:0"),
            (Problem::LpoDiamond, "lpo_count@:0;1:0"),
        ];
        for &(p, lit) in cases {
            let x = p.parse_instance(lit).unwrap();
            let a = p.ideal(&x).unwrap();
            let w = crate::stream::take(&a.name(), 40).unwrap();
            assert!(p.validate(&x, &w).is_ok(), "{p:?} {lit}");
        }
    }
}
