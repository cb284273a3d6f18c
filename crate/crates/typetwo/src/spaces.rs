//! Represented spaces: rationals, real descriptors, and the stream names of
//! naturals, Sierpiński space, open/closed subsets of ℕ and discrete rationals.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{dyadic, enum_poly_u64, is_irreducible, isolate_roots, q, AlgebraError, Poly, RootInterval, Q};
use crate::stream::{pair_big, small, sym, unpair_big, Diverged, Rule, Src, Sym, UPStream};
use crate::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("malformed name: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> NameError {
    NameError::Malformed(msg.into())
}

/// `ν_ℚ(⟨s,⟨a,b⟩⟩) = (−1)^s · a/(b+1)`.
pub fn nu_q(n: &BigUint) -> Q {
    let (s, ab) = unpair_big(n);
    let (a, b) = unpair_big(&ab);
    let v = Q::new(BigInt::from(a), BigInt::from(b + 1u32));
    if s.bit(0) {
        -v
    } else {
        v
    }
}

/// Least index of `x` under `ν_ℚ`.
pub fn nu_q_inv(x: &Q) -> BigUint {
    let s = BigUint::from(u8::from(x.is_negative()));
    let a = x.numer().abs().to_biguint().expect("nonnegative");
    let b = x.denom().to_biguint().expect("positive") - 1u32;
    pair_big(&s, &pair_big(&a, &b))
}

/// An algebraic number of degree ≥ 2: canonical minimal polynomial and ascending root index.
#[derive(Clone)]
pub struct Algebraic {
    minpoly: Poly,
    index: usize,
    // bisection chain from the isolating interval, shared between clones
    chain: Rc<RefCell<Vec<(Q, Q)>>>,
}

impl Algebraic {
    pub fn minpoly(&self) -> &Poly {
        &self.minpoly
    }

    pub fn root_index(&self) -> usize {
        self.index
    }

    pub fn interval(&self) -> RootInterval {
        let (lo, hi) = self.chain.borrow()[0].clone();
        RootInterval { lo, hi }
    }

    /// An interval of width `< 2^-k` around the root.
    pub fn enclose(&self, k: u32) -> (Q, Q) {
        let width = dyadic(k);
        let mut chain = self.chain.borrow_mut();
        loop {
            if let Some((lo, hi)) = chain.iter().find(|(lo, hi)| (hi - lo) < width) {
                return (lo.clone(), hi.clone());
            }
            let (lo, hi) = chain.last().unwrap().clone();
            let mid = (&lo + &hi) / q(2);
            let s_mid = self.minpoly.eval(&mid);
            let s_lo = self.minpoly.eval(&lo);
            let next = if s_mid.is_zero() {
                (mid.clone(), mid)
            } else if s_mid.is_positive() == s_lo.is_positive() {
                (mid, hi)
            } else {
                (lo, mid)
            };
            chain.push(next);
        }
    }
}

impl PartialEq for Algebraic {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.index == other.index
    }
}

impl Eq for Algebraic {}

impl fmt::Debug for Algebraic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alg:{}#{}", self.minpoly, self.index)
    }
}

/// A real given by a rule of rational approximations, certified non-algebraic
/// against `enum_poly` indices below `certified`.
#[derive(Clone)]
pub struct LimitPoint {
    pub name: String,
    rule: Rc<dyn Fn(u32) -> Q>,
    pub certified: usize,
}

impl LimitPoint {
    pub fn approx(&self, k: u32) -> Q {
        (self.rule)(k)
    }
}

impl PartialEq for LimitPoint {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for LimitPoint {}

impl fmt::Debug for LimitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lim:{}", self.name)
    }
}

/// Finite description of a real.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointDescriptor {
    Rat(Q),
    Alg(Algebraic),
    Limit(LimitPoint),
}

/// Certification depth for the built-in limit points.
pub const LIMIT_CERTIFIED: usize = 4096;

impl PointDescriptor {
    pub fn rat(n: i64, d: i64) -> Self {
        PointDescriptor::Rat(crate::algebra::qr(n, d))
    }

    /// Validated constructor: canonical irreducible minimal polynomial of degree ≥ 2.
    pub fn alg(minpoly: Poly, index: usize) -> Result<Self, AlgebraError> {
        let canon = minpoly.primitive();
        let bad = |m: &str| Err(AlgebraError::InvalidDescriptor(m.to_string()));
        if canon != minpoly {
            return bad("minimal polynomial must be integer-primitive with positive leading coefficient");
        }
        if minpoly.degree().unwrap_or(0) < 2 {
            return bad("minimal polynomial must have degree at least 2");
        }
        if !is_irreducible(&minpoly)? {
            return bad("minimal polynomial must be irreducible");
        }
        if index >= isolate_roots(&minpoly).len() {
            return bad("root index exceeds the number of real roots");
        }
        Ok(Self::alg_unchecked(minpoly, index))
    }

    pub(crate) fn alg_unchecked(minpoly: Poly, index: usize) -> Self {
        let iv = isolate_roots(&minpoly).swap_remove(index);
        PointDescriptor::Alg(Algebraic { minpoly, index, chain: Rc::new(RefCell::new(vec![(iv.lo, iv.hi)])) })
    }

    pub fn limit(name: &str) -> Option<Self> {
        let rule: Rc<dyn Fn(u32) -> Q> = match name {
            "zero" => Rc::new(|_| Q::zero()),
            "e" => Rc::new(euler_approx),
            _ => {
                let base = match name.strip_prefix("liouville") {
                    Some("") => 10,
                    Some(b) => b.parse::<u32>().ok().filter(|&b| b >= 2)?,
                    None => return None,
                };
                Rc::new(move |k| liouville_approx(base, k))
            }
        };
        let certified = if name == "zero" { 0 } else { LIMIT_CERTIFIED };
        Some(PointDescriptor::Limit(LimitPoint { name: name.to_string(), rule, certified }))
    }

    /// A limit point from an approximation rule with `|x − rule(k)| < 2^-k`.
    pub fn limit_rule(name: impl Into<String>, rule: impl Fn(u32) -> Q + 'static, certified: usize) -> Self {
        PointDescriptor::Limit(LimitPoint { name: name.into(), rule: Rc::new(rule), certified })
    }

    /// `|x − approx(k)| < 2^-k`.
    pub fn approx(&self, k: u32) -> Q {
        match self {
            PointDescriptor::Rat(r) => r.clone(),
            PointDescriptor::Alg(a) => {
                let (lo, hi) = a.enclose(k);
                (lo + hi) / q(2)
            }
            PointDescriptor::Limit(l) => l.approx(k),
        }
    }

    /// A closed interval of width `≤ 2^-k` containing the point.
    pub fn enclose(&self, k: u32) -> (Q, Q) {
        match self {
            PointDescriptor::Rat(r) => (r.clone(), r.clone()),
            PointDescriptor::Alg(a) => a.enclose(k),
            PointDescriptor::Limit(l) => {
                let c = l.approx(k + 1);
                let e = dyadic(k + 1);
                (&c - &e, c + e)
            }
        }
    }

    pub fn is_algebraic(&self) -> bool {
        !matches!(self, PointDescriptor::Limit(_))
    }

    /// Index of the stream name used throughout: position `i` codes `approx(i+1)`.
    pub fn real_name(&self) -> Src {
        let d = self.clone();
        let memo: RefCell<HashMap<usize, Sym>> = RefCell::new(HashMap::new());
        Rule::new(move |i| memo.borrow_mut().entry(i).or_insert_with(|| nu_q_inv(&d.approx(i as u32 + 1))).clone())
    }
}

fn euler_approx(k: u32) -> Q {
    // tail after 1/m! is below 2/(m+1)!
    let mut sum = Q::zero();
    let mut fact = BigInt::one();
    let mut m = 0u32;
    loop {
        if m > 0 {
            fact *= m;
        }
        sum += Q::new(BigInt::one(), fact.clone());
        let next = &fact * (m + 1);
        if Q::new(BigInt::from(2), next) < dyadic(k) {
            return sum;
        }
        m += 1;
    }
}

fn liouville_approx(base: u32, k: u32) -> Q {
    let mut sum = Q::zero();
    let mut fact = 1u64;
    let mut j = 1u64;
    loop {
        fact *= j;
        sum += Q::new(BigInt::one(), BigInt::from(base).pow(fact as u32));
        let next = fact * (j + 1);
        // tail below 2·base^-(j+1)!
        if (next as f64) * (base as f64).log2() > k as f64 + 2.0 {
            return sum;
        }
        j += 1;
    }
}

impl fmt::Display for PointDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointDescriptor::Rat(r) if r.is_integer() => write!(f, "rat:{}", r.numer()),
            PointDescriptor::Rat(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
            PointDescriptor::Alg(a) => write!(f, "alg:{}#{}", a.minpoly, a.index),
            PointDescriptor::Limit(l) => write!(f, "lim:{}", l.name),
        }
    }
}

impl FromStr for PointDescriptor {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(r) = s.strip_prefix("rat:") {
            return crate::algebra::parse_q(r).map(PointDescriptor::Rat);
        }
        if let Some(rest) = s.strip_prefix("alg:") {
            let (poly, idx) =
                rest.rsplit_once('#').ok_or_else(|| ParseError::new(format!("descriptor `{s}` lacks `#index`")))?;
            let poly: Poly = poly.parse()?;
            let idx: usize = idx.trim().parse().map_err(|_| ParseError::new(format!("bad root index in `{s}`")))?;
            return PointDescriptor::alg(poly, idx).map_err(|e| ParseError::new(e.to_string()));
        }
        if let Some(name) = s.strip_prefix("lim:") {
            return PointDescriptor::limit(name.trim())
                .ok_or_else(|| ParseError::new(format!("unknown limit rule `{name}`")));
        }
        Err(ParseError::new(format!("unknown descriptor `{s}`")))
    }
}

/// `approx` as a free function.
pub fn approx(d: &PointDescriptor, k: u32) -> Q {
    d.approx(k)
}

pub fn real_name_of(d: &PointDescriptor) -> Src {
    d.real_name()
}

/// Checks `|x − ν_ℚ(name(i))| < 2^-i` for `i < depth`; returns the first bad position.
pub fn check_real_name(name: &Src, x: &PointDescriptor, depth: usize) -> Result<(), usize> {
    for i in 0..depth {
        let v = name.at(i).map(|c| nu_q(&c)).map_err(|_| i)?;
        let (lo, hi) = x.enclose(i as u32 + 8);
        let err = (&v - &lo).abs().max((&v - &hi).abs());
        if err >= dyadic(i as u32) {
            return Err(i);
        }
    }
    Ok(())
}

/// `0^n 1^ω`.
pub fn nat_name(n: u64) -> UPStream {
    UPStream::new(vec![sym(0); n as usize], vec![sym(1)])
}

pub fn decode_nat(s: &UPStream) -> Result<u64, NameError> {
    if !s.is_binary() {
        return Err(malformed("symbol above 1 in a natural-number name"));
    }
    let c = s.canonicalize();
    if c.period() != [sym(1)] || c.prefix().iter().any(|a| *a != sym(0)) {
        return Err(malformed("not of shape 0^n1^ω"));
    }
    Ok(c.prefix().len() as u64)
}

/// Reads `0^n1…` from a source, looking at most `depth` symbols ahead.
pub fn decode_nat_src(src: &Src, depth: usize) -> Result<Option<u64>, Diverged> {
    for i in 0..depth {
        match small(&src.at(i)?) {
            0 => {}
            1 => return Ok(Some(i as u64)),
            _ => return Ok(None),
        }
    }
    Ok(None)
}

/// Baire-style natural: the constant stream `n^ω`.
pub fn baire_nat(n: &BigUint) -> UPStream {
    UPStream::new(vec![], vec![n.clone()])
}

pub fn bit_name(b: bool) -> UPStream {
    UPStream::constant(u64::from(b))
}

/// `⊤ ↦ 1^ω`, `⊥ ↦ 0^ω`.
pub fn sierp_name(top: bool) -> UPStream {
    bit_name(top)
}

/// `⊥` iff the stream is `0^ω`.
pub fn decode_sierp(s: &UPStream) -> bool {
    s.prefix().iter().chain(s.period()).any(|a| !a.is_zero())
}

/// A subset of ℕ that is finite or cofinite.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NatSet {
    Finite(BTreeSet<u64>),
    Cofinite(BTreeSet<u64>),
}

impl NatSet {
    pub fn finite(xs: impl IntoIterator<Item = u64>) -> Self {
        NatSet::Finite(xs.into_iter().collect())
    }

    pub fn cofinite(missing: impl IntoIterator<Item = u64>) -> Self {
        NatSet::Cofinite(missing.into_iter().collect())
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            NatSet::Finite(s) => s.contains(&n),
            NatSet::Cofinite(s) => !s.contains(&n),
        }
    }

    pub fn complement(&self) -> NatSet {
        match self {
            NatSet::Finite(s) => NatSet::Cofinite(s.clone()),
            NatSet::Cofinite(s) => NatSet::Finite(s.clone()),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, NatSet::Finite(s) if s.is_empty())
    }

    pub fn least(&self) -> Option<u64> {
        match self {
            NatSet::Finite(s) => s.iter().next().copied(),
            NatSet::Cofinite(s) => (0..).find(|n| !s.contains(n)),
        }
    }

    pub fn greatest(&self) -> Option<u64> {
        match self {
            NatSet::Finite(s) => s.iter().next_back().copied(),
            NatSet::Cofinite(_) => None,
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            NatSet::Finite(s) => Some(s.len()),
            NatSet::Cofinite(_) => None,
        }
    }

    /// Members below `bound`, ascending.
    pub fn members_below(&self, bound: u64) -> Vec<u64> {
        (0..bound).filter(|&n| self.contains(n)).collect()
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<u64>| s.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        match self {
            NatSet::Finite(s) => write!(f, "set:{{{}}}", list(s)),
            NatSet::Cofinite(s) => write!(f, "coset:{{{}}}", list(s)),
        }
    }
}

impl FromStr for NatSet {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (cofinite, body) = if let Some(b) = s.strip_prefix("set:") {
            (false, b)
        } else if let Some(b) = s.strip_prefix("coset:") {
            (true, b)
        } else {
            return Err(ParseError::new(format!("set literal `{s}` must start with set: or coset:")));
        };
        let inner = body
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| ParseError::new(format!("set literal `{s}` needs braces")))?;
        let xs = inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| ParseError::new(format!("bad element `{t}`"))))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(if cofinite { NatSet::Cofinite(xs) } else { NatSet::Finite(xs) })
    }
}

/// `01^{n+1}0`.
pub fn marker(n: u64) -> Vec<Sym> {
    let mut w = vec![sym(0)];
    w.extend(std::iter::repeat_n(sym(1), n as usize + 1));
    w.push(sym(0));
    w
}

/// Enumerates the markers `01^{n+1}0` for members `n`, in ascending order.
pub fn open_name(set: &NatSet) -> Src {
    match set {
        NatSet::Finite(s) => {
            let prefix: Vec<Sym> = s.iter().flat_map(|&n| marker(n)).collect();
            UPStream::new(prefix, vec![sym(0)]).source()
        }
        NatSet::Cofinite(missing) => {
            let missing = missing.clone();
            let table: RefCell<Vec<Sym>> = RefCell::new(Vec::new());
            let next: RefCell<u64> = RefCell::new(0);
            Rule::new(move |i| {
                let mut t = table.borrow_mut();
                let mut n = next.borrow_mut();
                while t.len() <= i {
                    if !missing.contains(&n) {
                        t.extend(marker(*n));
                    }
                    *n += 1;
                }
                t[i].clone()
            })
        }
    }
}

/// A closed set is named by enumerating its complement.
pub fn closed_name_of(set: &NatSet) -> Src {
    open_name(&set.complement())
}

/// `true` iff `01^{n+1}0` occurs within the first `stage` symbols.
pub fn open_contains(s: &Src, n: u64, stage: usize) -> Result<bool, Diverged> {
    let w = marker(n);
    if stage < w.len() {
        return Ok(false);
    }
    let seen: Vec<Sym> = (0..stage).map(|i| s.at(i)).collect::<Result<_, _>>()?;
    Ok(seen.windows(w.len()).any(|win| win == w.as_slice()))
}

/// All markers completed within the first `stage` symbols.
pub fn markers_within(word: &[Sym]) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut i = 0;
    while i < word.len() {
        if word[i].is_zero() {
            let mut j = i + 1;
            while j < word.len() && word[j] == sym(1) {
                j += 1;
            }
            if j < word.len() && j > i + 1 && word[j].is_zero() {
                out.insert((j - i - 2) as u64);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    out
}

/// `0^k 1 0^n 1 0^m 1^ω` naming `n/(m+1)`, with `n/(m+1)` in lowest terms.
pub fn delta_q_name(r: &Q, k: usize) -> Result<UPStream, NameError> {
    if r.is_negative() {
        return Err(malformed("discrete rational names cover nonnegative values"));
    }
    let n = r.numer().to_usize().ok_or_else(|| malformed("numerator too large"))?;
    let m = (r.denom() - BigInt::one()).to_usize().ok_or_else(|| malformed("denominator too large"))?;
    let mut prefix = vec![sym(0); k];
    prefix.push(sym(1));
    prefix.extend(vec![sym(0); n]);
    prefix.push(sym(1));
    prefix.extend(vec![sym(0); m]);
    Ok(UPStream::new(prefix, vec![sym(1)]))
}

pub fn delta_q_decode(s: &UPStream) -> Result<Q, NameError> {
    if !s.is_binary() {
        return Err(malformed("symbol above 1"));
    }
    let c = s.canonicalize();
    if c.period() != [sym(1)] {
        return Err(malformed("tail must be 1^ω"));
    }
    let word: Vec<u64> = c.prefix().iter().map(small).collect();
    // pad with enough tail 1s to expose the three separators
    let word: Vec<u64> = word.into_iter().chain([1, 1, 1]).collect();
    let ones: Vec<usize> = word.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i).collect();
    let (a, b) = (ones[0], ones[1]);
    let n = b - a - 1;
    let m = ones[2] - b - 1;
    Ok(Q::new(BigInt::from(n), BigInt::from(m + 1)))
}

/// Whether `p` vanishes at the point, certified for limit points below their bound.
pub fn vanishes_at(p: &Poly, x: &PointDescriptor) -> Result<bool, AlgebraError> {
    crate::algebra::is_zero_at(p, x)
}

/// Re-certifies a limit point against `enum_poly` indices below `bound` by
/// interval evaluation; `false` if some polynomial could not be separated from 0.
pub fn certify_limit(x: &PointDescriptor, bound: u64, max_precision: u32) -> bool {
    (0..bound).all(|n| {
        let p = enum_poly_u64(n);
        (8..=max_precision).step_by(8).any(|k| excludes_zero(&p, x, k))
    })
}

/// Whether an interval enclosure of `p(x)` at precision `k` avoids 0.
pub fn excludes_zero(p: &Poly, x: &PointDescriptor, k: u32) -> bool {
    let (lo, hi) = x.enclose(k);
    let (vlo, vhi) = crate::algebra::eval_interval(p, &lo, &hi);
    vlo.is_positive() || vhi.is_negative()
}

impl From<i64> for PointDescriptor {
    fn from(n: i64) -> Self {
        PointDescriptor::Rat(q(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qr;

    fn brute_nu_inv(x: &Q) -> u64 {
        (0u64..).find(|&n| nu_q(&BigUint::from(n)) == *x).unwrap()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu_q(&BigUint::zero()), Q::zero());
        for x in [qr(1, 2), qr(-3, 4), q(2), q(-1), qr(2, 3)] {
            assert_eq!(nu_q_inv(&x), BigUint::from(brute_nu_inv(&x)));
            assert_eq!(nu_q(&nu_q_inv(&x)), x);
        }
    }

    #[test]
    fn approx_examples() {
        let third = PointDescriptor::rat(1, 3);
        assert_eq!(third.approx(10), qr(1, 3));
        let sqrt2: PointDescriptor = "alg:[-2,0,1]#1".parse().unwrap();
        let a = sqrt2.approx(4);
        assert!((&a * &a - q(2)).abs() < qr(1, 4));
        assert!(a > qr(1414, 1000) - qr(1, 16) && a < qr(1415, 1000) + qr(1, 16));
        let neg: PointDescriptor = "alg:[-2,0,1]#0".parse().unwrap();
        let b = neg.approx(2);
        assert!(b < q(0) && (&b * &b - q(2)).abs() < q(1));
        assert!("alg:[-2,0,1]#2".parse::<PointDescriptor>().is_err());
        assert!("alg:[-1,0,1]#0".parse::<PointDescriptor>().is_err());
    }

    #[test]
    fn names_examples() {
        let two = PointDescriptor::from(2);
        let name = two.real_name();
        assert_eq!(name.at(5).unwrap(), nu_q_inv(&q(2)));
        let zero = PointDescriptor::limit("zero").unwrap();
        assert_eq!(zero.real_name().at(3).unwrap(), BigUint::zero());
        for d in ["alg:[-2,0,1]#1", "lim:e", "lim:liouville", "rat:-7/3"] {
            let x: PointDescriptor = d.parse().unwrap();
            assert_eq!(check_real_name(&x.real_name(), &x, 32), Ok(()));
        }
    }

    #[test]
    fn nat_and_sierp() {
        assert_eq!(decode_nat(&"000:1".parse().unwrap()), Ok(3));
        assert_eq!(decode_nat(&":1".parse().unwrap()), Ok(0));
        assert!(decode_nat(&":0".parse().unwrap()).is_err());
        assert!(!decode_sierp(&":0".parse().unwrap()));
        assert!(decode_sierp(&"0001:0".parse().unwrap()));
    }

    #[test]
    fn delta_q_examples() {
        assert_eq!(delta_q_decode(&"00100010:1".parse().unwrap()), Ok(qr(3, 2)));
        assert_eq!(delta_q_decode(&"10101:1".parse().unwrap()), Ok(qr(1, 2)));
        assert_eq!(delta_q_decode(&"1100000:1".parse().unwrap()), Ok(q(0)));
        let r = qr(5, 7);
        assert_eq!(delta_q_decode(&delta_q_name(&r, 3).unwrap()), Ok(r));
    }

    #[test]
    fn open_closed_examples() {
        let s: Src = "0110:1".parse::<UPStream>().unwrap().source();
        assert!(open_contains(&s, 1, 4).unwrap());
        let s: Src = "010:1".parse::<UPStream>().unwrap().source();
        assert!(open_contains(&s, 0, 3).unwrap());
        let s: Src = ":1".parse::<UPStream>().unwrap().source();
        assert!(!open_contains(&s, 4, 100).unwrap());

        let three = closed_name_of(&NatSet::finite([3]));
        let stage = 400;
        for n in 0..20 {
            assert_eq!(open_contains(&three, n, stage).unwrap(), n != 3);
        }
        let all = closed_name_of(&NatSet::cofinite([]));
        assert_eq!(all.at(0).unwrap(), sym(0));
        assert!(!(0..10).any(|n| open_contains(&all, n, 200).unwrap()));
        let empty = closed_name_of(&NatSet::finite([]));
        assert!((0..10).all(|n| open_contains(&empty, n, 200).unwrap()));
    }

    #[test]
    fn limit_certification() {
        let l = PointDescriptor::limit("liouville").unwrap();
        assert!(certify_limit(&l, 300, 64));
        let e = PointDescriptor::limit("e").unwrap();
        assert!(certify_limit(&e, 300, 64));
        assert!(!certify_limit(&PointDescriptor::limit("zero").unwrap(), 300, 64));
    }
}
