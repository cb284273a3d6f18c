//! Ultimately periodic streams, lazy sources, and the monotone realizer engine.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::ParseError;

/// A stream symbol. Cantor space is the restriction to symbols `0` and `1`.
pub type Sym = BigUint;

pub fn sym(n: u64) -> Sym {
    BigUint::from(n)
}

/// Saturating conversion, for realizers that only care about small symbols.
pub fn small(s: &Sym) -> u64 {
    s.to_u64().unwrap_or(u64::MAX)
}

/// Cantor pairing `(n+m)(n+m+1)/2 + m`.
pub fn pair(n: u64, m: u64) -> u64 {
    let s = n + m;
    s * (s + 1) / 2 + m
}

pub fn unpair(k: u64) -> (u64, u64) {
    let w = ((((8 * k as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    // float sqrt can be off by one near perfect squares
    let mut w = w;
    while (w + 1) * (w + 2) / 2 <= k {
        w += 1;
    }
    while w * (w + 1) / 2 > k {
        w -= 1;
    }
    let m = k - w * (w + 1) / 2;
    (w - m, m)
}

pub fn pair_big(n: &BigUint, m: &BigUint) -> BigUint {
    let s = n + m;
    (&s * (&s + 1u32)) / 2u32 + m
}

pub fn unpair_big(k: &BigUint) -> (BigUint, BigUint) {
    let disc: BigUint = k * 8u32 + 1u32;
    let w = (disc.sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let m = k - t;
    (w - &m, m)
}

/// Ultimately periodic stream `prefix · period^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPStream {
    prefix: Vec<Sym>,
    period: Vec<Sym>,
}

impl UPStream {
    pub fn new(prefix: Vec<Sym>, period: Vec<Sym>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        UPStream { prefix, period }
    }

    pub fn from_u64(prefix: &[u64], period: &[u64]) -> Self {
        Self::new(prefix.iter().map(|&a| sym(a)).collect(), period.iter().map(|&a| sym(a)).collect())
    }

    pub fn constant(a: u64) -> Self {
        Self::from_u64(&[], &[a])
    }

    pub fn prefix(&self) -> &[Sym] {
        &self.prefix
    }

    pub fn period(&self) -> &[Sym] {
        &self.period
    }

    pub fn query(&self, i: usize) -> &Sym {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<Sym> {
        (0..n).map(|i| self.query(i).clone()).collect()
    }

    pub fn canonicalize(&self) -> UPStream {
        let n = self.period.len();
        let root =
            (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.period[i] == self.period[i - d])).unwrap_or(n);
        let mut period = self.period[..root].to_vec();
        let mut prefix = self.prefix.clone();
        while let Some(last) = prefix.last() {
            if last != period.last().unwrap() {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        UPStream { prefix, period }
    }

    pub fn same_sequence(&self, other: &UPStream) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    pub fn is_binary(&self) -> bool {
        self.prefix.iter().chain(&self.period).all(|s| *s <= sym(1))
    }

    /// Occurrences of `a` in one unrolling; `None` when `a` recurs forever.
    pub fn count_finite(&self, a: &Sym) -> Option<usize> {
        if self.period.contains(a) {
            None
        } else {
            Some(self.prefix.iter().filter(|s| *s == a).count())
        }
    }

    pub fn max_symbol(&self) -> Sym {
        self.prefix.iter().chain(&self.period).max().cloned().unwrap_or_default()
    }

    pub fn source(&self) -> Src {
        Rc::new(self.clone())
    }
}

fn render_word(w: &[Sym], commas: bool) -> String {
    if commas {
        let mut s = w.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        if w.len() == 1 {
            s.push(',');
        }
        s
    } else {
        w.iter().map(|a| a.to_string()).collect()
    }
}

impl fmt::Display for UPStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let commas = self.prefix.iter().chain(&self.period).any(|a| *a > sym(9));
        write!(f, "{}:{}", render_word(&self.prefix, commas), render_word(&self.period, commas))
    }
}

fn parse_word(s: &str, commas: bool) -> Result<Vec<Sym>, ParseError> {
    let bad = || ParseError::new(format!("bad stream word `{s}`"));
    if commas {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| t.parse::<BigUint>().map_err(|_| bad())).collect()
    } else {
        s.chars().map(|c| c.to_digit(10).map(|d| sym(d as u64)).ok_or_else(bad)).collect()
    }
}

impl FromStr for UPStream {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (u, v) =
            s.trim().split_once(':').ok_or_else(|| ParseError::new(format!("stream literal `{s}` lacks `:`")))?;
        let commas = s.contains(',');
        let prefix = parse_word(u, commas)?;
        let period = parse_word(v, commas)?;
        if period.is_empty() {
            return Err(ParseError::new(format!("stream literal `{s}` has an empty period")));
        }
        Ok(UPStream::new(prefix, period))
    }
}

/// Fuel exhaustion. Never a verdict about correctness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("diverged: fuel exhausted")]
pub struct Diverged;

/// Shared step counter for one composite evaluation.
#[derive(Clone, Debug)]
pub struct Fuel(Rc<Cell<u64>>);

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Fuel(Rc::new(Cell::new(steps)))
    }

    pub fn burn(&self, n: u64) -> Result<(), Diverged> {
        let left = self.0.get();
        if left < n {
            self.0.set(0);
            return Err(Diverged);
        }
        self.0.set(left - n);
        Ok(())
    }

    pub fn left(&self) -> u64 {
        self.0.get()
    }
}

/// Read access to an infinite sequence. Lazy sources may run out of fuel.
pub trait Source {
    fn at(&self, i: usize) -> Result<Sym, Diverged>;
}

pub type Src = Rc<dyn Source>;

impl Source for UPStream {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        Ok(self.query(i).clone())
    }
}

/// A total stream given by a rule on indices.
#[derive(Clone)]
pub struct Rule(pub Rc<dyn Fn(usize) -> Sym>);

impl Rule {
    pub fn new(f: impl Fn(usize) -> Sym + 'static) -> Src {
        Rc::new(Rule(Rc::new(f)))
    }
}

impl Source for Rule {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        Ok((self.0)(i))
    }
}

/// Stride-k interleaving: `result(k·i + j) = parts[j](i)`.
pub struct Interleave(pub Vec<Src>);

impl Source for Interleave {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        let k = self.0.len();
        self.0[i % k].at(i / k)
    }
}

pub fn interleave(a: Src, b: Src) -> Src {
    Rc::new(Interleave(vec![a, b]))
}

/// The stream `i ↦ parts[j](i)` when `src` is a stride-k interleaving.
pub struct Strand {
    pub src: Src,
    pub stride: usize,
    pub index: usize,
}

impl Source for Strand {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        self.src.at(self.stride * i + self.index)
    }
}

/// Countable tuple: `result(⟨i,j⟩) = family(i)(j)`.
pub struct Tuple {
    family: Rc<dyn Fn(usize) -> Src>,
    cache: RefCell<HashMap<usize, Src>>,
}

impl Source for Tuple {
    fn at(&self, k: usize) -> Result<Sym, Diverged> {
        let (i, j) = unpair(k as u64);
        let s = self.cache.borrow_mut().entry(i as usize).or_insert_with(|| (self.family)(i as usize)).clone();
        s.at(j as usize)
    }
}

pub fn tuple_stream(family: impl Fn(usize) -> Src + 'static) -> Src {
    Rc::new(Tuple { family: Rc::new(family), cache: RefCell::new(HashMap::new()) })
}

/// `base` with every symbol at index `≥ from` replaced via `f`.
pub struct Patched {
    pub base: Src,
    pub from: usize,
    pub f: fn(Sym) -> Sym,
}

impl Source for Patched {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        let a = self.base.at(i)?;
        Ok(if i >= self.from { (self.f)(a) } else { a })
    }
}

/// Input tape of a realizer: counts queries and charges fuel per read.
pub struct Tape {
    src: Src,
    fuel: Fuel,
    seen: Vec<bool>,
    distinct: usize,
}

impl Tape {
    pub fn new(src: Src, fuel: Fuel) -> Self {
        Tape { src, fuel, seen: Vec::new(), distinct: 0 }
    }

    pub fn get(&mut self, i: usize) -> Result<Sym, Diverged> {
        self.fuel.burn(1)?;
        if i >= self.seen.len() {
            self.seen.resize(i + 1, false);
        }
        if !self.seen[i] {
            self.seen[i] = true;
            self.distinct += 1;
        }
        self.src.at(i)
    }

    pub fn get_small(&mut self, i: usize) -> Result<u64, Diverged> {
        self.get(i).map(|s| small(&s))
    }

    /// Reads component `j` at index `i` of a stride-`k` interleaved input.
    pub fn strand(&mut self, k: usize, j: usize, i: usize) -> Result<Sym, Diverged> {
        self.get(k * i + j)
    }

    pub fn strand_small(&mut self, k: usize, j: usize, i: usize) -> Result<u64, Diverged> {
        self.get_small(k * i + j)
    }

    /// Charges internal work that does not touch the input.
    pub fn tick(&mut self, n: u64) -> Result<(), Diverged> {
        self.fuel.burn(n)
    }

    pub fn fuel(&self) -> &Fuel {
        &self.fuel
    }

    pub fn source(&self) -> Src {
        self.src.clone()
    }

    /// One past the largest inspected index.
    pub fn footprint(&self) -> usize {
        self.seen.len()
    }

    /// Number of distinct inspected positions.
    pub fn queries(&self) -> usize {
        self.distinct
    }
}

/// A write-once transducer: each call emits the next output symbol.
pub trait Realizer {
    fn next(&mut self, tape: &mut Tape) -> Result<Sym, Diverged>;
}

pub type Make = Rc<dyn Fn() -> Box<dyn Realizer>>;

struct Positional<F>(F, usize);

impl<F: FnMut(usize, &mut Tape) -> Result<Sym, Diverged>> Realizer for Positional<F> {
    fn next(&mut self, tape: &mut Tape) -> Result<Sym, Diverged> {
        let s = (self.0)(self.1, tape)?;
        self.1 += 1;
        Ok(s)
    }
}

/// Output position `k` is `f(k, tape)`.
pub fn positional(f: impl Fn(usize, &mut Tape) -> Result<Sym, Diverged> + Clone + 'static) -> Make {
    Rc::new(move || Box::new(Positional(f.clone(), 0)))
}

struct Stateful<S, F>(S, F);

impl<S, F: FnMut(&mut S, &mut Tape) -> Result<Sym, Diverged>> Realizer for Stateful<S, F> {
    fn next(&mut self, tape: &mut Tape) -> Result<Sym, Diverged> {
        (self.1)(&mut self.0, tape)
    }
}

/// A realizer with private state. `f` must leave the state untouched when it fails.
pub fn stateful<S: Clone + 'static>(
    init: S,
    f: impl Fn(&mut S, &mut Tape) -> Result<Sym, Diverged> + Clone + 'static,
) -> Make {
    Rc::new(move || Box::new(Stateful(init.clone(), f.clone())))
}

pub fn identity() -> Make {
    positional(|k, t| t.get(k))
}

/// Swaps 0s and 1s.
pub fn bit_swap() -> Make {
    positional(|k, t| Ok(sym(1 - small(&t.get(k)?).min(1))))
}

/// Component `j` of a stride-`k` interleaved input.
pub fn strand(k: usize, j: usize) -> Make {
    positional(move |i, t| t.strand(k, j, i))
}

pub fn never() -> Make {
    positional(|_, t| loop {
        t.tick(1)?;
    })
}

/// Output of a realizer on a source, produced on demand.
pub struct Lazy {
    inner: RefCell<(Box<dyn Realizer>, Tape, Vec<Sym>)>,
}

impl Lazy {
    pub fn new(make: &Make, input: Src, fuel: Fuel) -> Src {
        Rc::new(Lazy { inner: RefCell::new((make(), Tape::new(input, fuel), Vec::new())) })
    }
}

impl Source for Lazy {
    fn at(&self, i: usize) -> Result<Sym, Diverged> {
        let mut guard = self.inner.borrow_mut();
        let (r, tape, buf) = &mut *guard;
        while buf.len() <= i {
            tape.tick(1)?;
            let s = r.next(tape)?;
            buf.push(s);
        }
        Ok(buf[i].clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunBudget {
    pub fuel: u64,
    pub out_len: usize,
}

impl RunBudget {
    pub fn new(fuel: u64, out_len: usize) -> Self {
        RunBudget { fuel, out_len }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub output: Vec<Sym>,
    pub queries: usize,
    pub footprint: usize,
    pub fuel_used: u64,
}

pub fn run_with(make: &Make, input: Src, fuel: Fuel, out_len: usize) -> Result<Trace, Diverged> {
    let start = fuel.left();
    let mut r = make();
    let mut tape = Tape::new(input, fuel.clone());
    let mut output = Vec::with_capacity(out_len);
    while output.len() < out_len {
        tape.tick(1)?;
        output.push(r.next(&mut tape)?);
    }
    Ok(Trace { output, queries: tape.queries(), footprint: tape.footprint(), fuel_used: start - fuel.left() })
}

pub fn run(make: &Make, input: Src, budget: RunBudget) -> Result<Trace, Diverged> {
    run_with(make, input, Fuel::new(budget.fuel), budget.out_len)
}

/// Oracle side of a reduction: maps the pre-processed stream to an answer stream.
pub type Oracle<'a> = &'a dyn Fn(Src) -> Src;

/// Evaluates `K⟨id, G∘H⟩` on `input`.
pub fn weihrauch_apply(k: &Make, h: &Make, g: Oracle, input: Src, budget: RunBudget) -> Result<Trace, Diverged> {
    let fuel = Fuel::new(budget.fuel);
    let pushed = Lazy::new(h, input.clone(), fuel.clone());
    let answer = g(pushed);
    run_with(k, interleave(input, answer), fuel, budget.out_len)
}

/// Reads a finite prefix of a source, failing on divergence.
pub fn take(src: &Src, n: usize) -> Result<Vec<Sym>, Diverged> {
    (0..n).map(|i| src.at(i)).collect()
}

pub fn is_zero(s: &Sym) -> bool {
    s.is_zero()
}

pub fn render(word: &[Sym]) -> String {
    if word.iter().all(|a| *a <= sym(9)) {
        word.iter().map(|a| a.to_string()).collect()
    } else {
        word.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(s: &str) -> UPStream {
        s.parse().unwrap()
    }

    fn brute_pair(n: u64, m: u64) -> u64 {
        // walk the diagonals
        let mut k = 0;
        for d in 0.. {
            for j in 0..=d {
                if d - j == n && j == m {
                    return k;
                }
                k += 1;
            }
        }
        unreachable!()
    }

    #[test]
    fn query_examples() {
        assert_eq!(*up("01:1").query(0), sym(0));
        assert_eq!(*up(":10").query(3), sym(0));
        assert_eq!(*up("0:1").query(5), sym(1));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(up("0:11").canonicalize(), up("0:1"));
        assert_eq!(up(":0").canonicalize(), up(":0"));
        let s = up("01:10");
        let c = s.canonicalize();
        // brute-force: shortest (prefix, period) denoting the same first 2(|u|+|v|) symbols
        let n = 2 * (s.prefix().len() + s.period().len());
        let want = s.take(n);
        let mut best = None;
        'outer: for total in 1..=n {
            for plen in 0..total {
                let cand = UPStream::new(want[..plen].to_vec(), want[plen..total].to_vec());
                if cand.take(n) == want {
                    best = Some(cand);
                    break 'outer;
                }
            }
        }
        assert_eq!(c, best.unwrap());
        assert_eq!(c, up("01:10"));
        assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn literal_round_trip() {
        for lit in ["010:1", ":1", "0,3,1:3,", "12,:0"] {
            let s = up(lit);
            assert_eq!(up(&s.to_string()), s);
        }
        assert_eq!(up("0,3,1:3").query(1), &sym(3));
        assert_eq!(up("12,:0").query(0), &sym(12));
        assert!("01".parse::<UPStream>().is_err());
        assert!("01:".parse::<UPStream>().is_err());
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 2), brute_pair(1, 2));
        assert_eq!(pair(1, 2), 8);
        assert_eq!(unpair(8), (1, 2));
        for n in 0..30 {
            for m in 0..30 {
                assert_eq!(pair(n, m), brute_pair(n, m));
            }
        }
        let k = BigUint::from(8u32);
        assert_eq!(unpair_big(&k), (sym(1), sym(2)));
        assert_eq!(pair_big(&sym(1), &sym(2)), sym(8));
    }

    #[test]
    fn run_examples() {
        let s = up("101:0").source();
        let t = run(&identity(), s, RunBudget::new(1000, 5)).unwrap();
        assert_eq!(render(&t.output), "10100");
        let t = run(&bit_swap(), up(":1").source(), RunBudget::new(1000, 4)).unwrap();
        assert_eq!(render(&t.output), "0000");
        assert_eq!(run(&never(), up(":1").source(), RunBudget::new(1000, 1)), Err(Diverged));
    }

    #[test]
    fn tuple_examples() {
        let t = tuple_stream(|i| UPStream::constant(i as u64).source());
        assert_eq!(t.at(pair(2, 5) as usize).unwrap(), sym(2));
        let t = tuple_stream(|i| UPStream::constant(if i == 0 { 1 } else { 0 }).source());
        assert_eq!(t.at(0).unwrap(), sym(1));
        let p = up("01:1").source();
        let q = up(":0").source();
        let both = interleave(p.clone(), q);
        for i in 0..10 {
            assert_eq!(both.at(2 * i).unwrap(), p.at(i).unwrap());
        }
    }

    #[test]
    fn weihrauch_projections() {
        let x = up("0110:01").source();
        let id: &dyn Fn(Src) -> Src = &|s| s;
        let b = RunBudget::new(10_000, 12);
        let second = weihrauch_apply(&strand(2, 1), &identity(), id, x.clone(), b).unwrap();
        let first = weihrauch_apply(&strand(2, 0), &never(), id, x.clone(), b).unwrap();
        let want = take(&x, 12).unwrap();
        assert_eq!(second.output, want);
        assert_eq!(first.output, want);
    }

    #[test]
    fn footprint_counts_reads() {
        let t = run(&identity(), up(":0").source(), RunBudget::new(100, 7)).unwrap();
        assert_eq!(t.footprint, 7);
        assert_eq!(t.queries, 7);
    }
}
