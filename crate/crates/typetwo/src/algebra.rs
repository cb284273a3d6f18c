//! Exact univariate polynomials over ℚ: Sturm root isolation, Kronecker
//! factorization, minimal polynomials and the polynomial/algebraic enumerations.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::spaces::{nu_q, nu_q_inv, PointDescriptor};
use crate::stream::{pair_big, unpair, unpair_big};
use crate::ParseError;

pub type Q = BigRational;

/// Factorization refuses inputs above this degree.
pub const DEGREE_GUARD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("degree {0} exceeds the factorization guard")]
    DegreeGuard(usize),
    #[error("interval endpoint is a root")]
    EndpointRoot,
    #[error("no factor has a root in the interval")]
    Inconsistent,
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("not decidable for limit descriptors")]
    Undecidable,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-k`.
pub fn dyadic(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

/// Coefficients in ascending degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&a| q(a)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `x - r`.
    pub fn linear_root(r: &Q) -> Self {
        Self::new(vec![-r.clone(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &Q) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Q::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::one(), |acc, _| &acc * self)
    }

    pub fn divmod(&self, d: &Poly) -> Result<(Poly, Poly), AlgebraError> {
        let dd = d.degree().ok_or(AlgebraError::DivisionByZero)?;
        let lead = d.lead().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / lead;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dj;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly, AlgebraError> {
        self.divmod(d).map(|(_, r)| r)
    }

    pub fn divides(&self, p: &Poly) -> bool {
        p.rem(self).is_ok_and(|r| r.is_zero())
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => Poly::zero(),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    pub fn squarefree_part(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.divmod(&g).expect("gcd is nonzero").0.monic()
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        Poly::new(ints.into_iter().map(|c| Q::from_integer(c / &g)).collect())
    }

    /// Coefficients as integers; meaningful after `primitive`.
    pub fn int_coeffs(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|c| c.to_integer()).collect()
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

fn render_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(render_q).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub fn parse_q(s: &str) -> Result<Q, ParseError> {
    let s = s.trim();
    let bad = || ParseError::new(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => s.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
    }
}

impl FromStr for Poly {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| ParseError::new(format!("polynomial `{s}` must be `[c0,c1,...]`")))?;
        if inner.trim().is_empty() {
            return Ok(Poly::zero());
        }
        inner.split(',').map(parse_q).collect::<Result<Vec<_>, _>>().map(Poly::new)
    }
}

fn sign(x: &Q) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm chain of a nonzero polynomial.
pub struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    pub fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone()];
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(d);
        }
        while chain.len() >= 2 {
            let n = chain.len();
            let r = -&chain[n - 2].rem(&chain[n - 1]).expect("nonzero");
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        Sturm { chain }
    }

    fn variations(&self, x: &Q) -> usize {
        let mut last = 0;
        let mut v = 0;
        for p in &self.chain {
            let s = sign(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    v += 1;
                }
                last = s;
            }
        }
        v
    }

    /// Distinct roots in `(lo, hi)`; endpoints must not be roots.
    pub fn count(&self, lo: &Q, hi: &Q) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

pub fn sturm_count(p: &Poly, lo: &Q, hi: &Q) -> Result<usize, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::DivisionByZero);
    }
    if p.eval(lo).is_zero() || p.eval(hi).is_zero() {
        return Err(AlgebraError::EndpointRoot);
    }
    if lo >= hi {
        return Ok(0);
    }
    Ok(Sturm::new(p).count(lo, hi))
}

/// Strict bound on the absolute value of every root.
pub fn root_bound(p: &Poly) -> Q {
    let lead = p.lead().expect("nonzero polynomial").abs();
    let m = p.coeffs[..p.coeffs.len() - 1].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Q::zero);
    m + Q::one()
}

/// Interval enclosure of `p` over `[lo, hi]` by Horner evaluation.
pub fn eval_interval(p: &Poly, lo: &Q, hi: &Q) -> (Q, Q) {
    let mut acc = (Q::zero(), Q::zero());
    for c in p.coeffs.iter().rev() {
        let prods = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
        let min = prods.iter().min().unwrap().clone();
        let max = prods.iter().max().unwrap().clone();
        acc = (min + c, max + c);
    }
    acc
}

/// `(lo, hi)` with non-root endpoints, containing exactly one root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RootInterval {
    pub fn contains(&self, x: &Q) -> bool {
        &self.lo < x && x <= &self.hi
    }
}

pub fn isolate_roots(p: &Poly) -> Vec<RootInterval> {
    let sq = p.squarefree_part();
    if sq.degree().unwrap_or(0) == 0 {
        return vec![];
    }
    let sturm = Sturm::new(&sq);
    let b = root_bound(&sq);
    let mut out = Vec::new();
    let total = sturm.count(&-b.clone(), &b);
    split_roots(&sq, &sturm, -b.clone(), b, total, &mut out);
    out
}

fn split_roots(sq: &Poly, sturm: &Sturm, lo: Q, hi: Q, n: usize, out: &mut Vec<RootInterval>) {
    match n {
        0 => {}
        1 => out.push(RootInterval { lo, hi }),
        _ => {
            let two = q(2);
            let mut mid = (&lo + &hi) / &two;
            while sq.eval(&mid).is_zero() {
                mid = (&lo + &mid) / &two;
            }
            let left = sturm.count(&lo, &mid);
            split_roots(sq, sturm, lo, mid.clone(), left, out);
            split_roots(sq, sturm, mid, hi, n - left, out);
        }
    }
}

/// Shrinks an isolating interval of a squarefree polynomial below `width`.
/// Returns a degenerate interval when a bisection point hits the root.
pub fn refine(sq: &Poly, iv: &RootInterval, width: &Q) -> (Q, Q) {
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let s_lo = sign(&sq.eval(&lo));
    let two = q(2);
    while &(&hi - &lo) >= width {
        let mid = (&lo + &hi) / &two;
        let s = sign(&sq.eval(&mid));
        if s == 0 {
            return (mid.clone(), mid);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// A rational within `2^-k` of the isolated root.
pub fn approx_root(sq: &Poly, iv: &RootInterval, k: u32) -> Q {
    let (lo, hi) = refine(sq, iv, &dyadic(k));
    (lo + hi) / q(2)
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > 1 << 40 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small.into_iter().map(BigInt::from).collect())
}

fn rational_root(f: &Poly) -> Option<Q> {
    let c = f.int_coeffs();
    let (c0, cn) = (c.first()?, c.last()?);
    if c0.is_zero() {
        return Some(Q::zero());
    }
    let (num, den) = (divisors(c0)?, divisors(cn)?);
    for b in &den {
        for a in &num {
            for r in [Q::new(a.clone(), b.clone()), Q::new(-a.clone(), b.clone())] {
                if f.eval(&r).is_zero() {
                    return Some(r);
                }
            }
        }
    }
    None
}

fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> Poly {
    // Newton divided differences
    let n = xs.len();
    let xq: Vec<Q> = xs.iter().cloned().map(Q::from_integer).collect();
    let mut dd: Vec<Q> = ys.iter().cloned().map(Q::from_integer).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xq[i] - &xq[i - level]);
        }
    }
    let mut p = Poly::constant(dd[n - 1].clone());
    for i in (0..n - 1).rev() {
        p = &(&p * &Poly::linear_root(&xq[i])) + &Poly::constant(dd[i].clone());
    }
    p
}

/// A factor of degree exactly `d` of an integer-primitive `f` without rational roots.
fn kronecker_factor(f: &Poly, d: usize) -> Option<Poly> {
    let mut points: Vec<(BigInt, BigInt, Vec<BigInt>)> = (-9i64..=9)
        .filter_map(|x| {
            let x = BigInt::from(x);
            let v = f.eval(&Q::from_integer(x.clone())).to_integer();
            divisors(&v).map(|ds| (x, v, ds))
        })
        .collect();
    if points.len() < d + 2 {
        return None;
    }
    points.sort_by_key(|(x, _, ds)| (ds.len(), x.abs()));
    let (basis, checks) = points.split_at(d + 1);
    let xs: Vec<BigInt> = basis.iter().map(|(x, _, _)| x.clone()).collect();
    let lead_f = f.int_coeffs().last().cloned().unwrap();
    let mut choice = vec![0usize; d + 1];
    loop {
        let ys: Vec<BigInt> = (0..=d)
            .map(|i| {
                let ds = &basis[i].2;
                let k = choice[i];
                let v = ds[k / 2].clone();
                if k % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let g = interpolate(&xs, &ys);
        if g.degree() == Some(d) && g.has_integer_coeffs() {
            let lead_g = g.int_coeffs().last().cloned().unwrap();
            let ok = lead_f.is_multiple_of(&lead_g)
                && checks.iter().all(|(x, v, _)| {
                    let gx = g.eval(&Q::from_integer(x.clone())).to_integer();
                    !gx.is_zero() && v.is_multiple_of(&gx)
                });
            if ok && g.divides(f) {
                return Some(g.primitive());
            }
        }
        // odometer; the first point keeps a positive value to skip ±g duplicates
        let mut i = 0;
        loop {
            if i > d {
                return None;
            }
            choice[i] += if i == 0 { 2 } else { 1 };
            let limit = if i == 0 { basis[0].2.len() * 2 } else { basis[i].2.len() * 2 };
            if choice[i] < limit {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn split_irreducible(f: Poly, out: &mut Vec<Poly>) {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return;
    }
    if n <= 3 {
        out.push(f);
        return;
    }
    for d in 2..=n / 2 {
        if let Some(g) = kronecker_factor(&f, d) {
            let h = f.divmod(&g).expect("nonzero").0.primitive();
            split_irreducible(g, out);
            split_irreducible(h, out);
            return;
        }
    }
    out.push(f);
}

/// Irreducible canonical factors with multiplicity; their product equals `p` up to a constant.
pub fn factorize(p: &Poly) -> Result<Vec<Poly>, AlgebraError> {
    let n = p.degree().ok_or(AlgebraError::DivisionByZero)?;
    if n > DEGREE_GUARD {
        return Err(AlgebraError::DegreeGuard(n));
    }
    let mut f = p.primitive();
    let mut out = Vec::new();
    while f.degree().unwrap_or(0) > 0 {
        match rational_root(&f) {
            Some(r) => {
                let lin = Poly::linear_root(&r).primitive();
                f = f.divmod(&lin).expect("nonzero").0.primitive();
                out.push(lin);
            }
            None => break,
        }
    }
    split_irreducible(f, &mut out);
    out.sort();
    Ok(out)
}

pub fn is_irreducible(p: &Poly) -> Result<bool, AlgebraError> {
    Ok(p.degree().unwrap_or(0) >= 1 && factorize(p)?.len() == 1)
}

/// The irreducible factor of `vanishing` with a root in `(iso.lo, iso.hi]`.
pub fn minimal_polynomial(vanishing: &Poly, iso: &RootInterval) -> Result<Poly, AlgebraError> {
    let mut factors = factorize(vanishing)?;
    factors.dedup();
    let mut found = Vec::new();
    for f in factors {
        let hit = if f.eval(&iso.hi).is_zero() {
            true
        } else if f.eval(&iso.lo).is_zero() {
            // an irreducible factor vanishing at a rational point is linear
            false
        } else {
            iso.lo < iso.hi && Sturm::new(&f).count(&iso.lo, &iso.hi) > 0
        };
        if hit {
            found.push(f);
        }
    }
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        _ => Err(AlgebraError::Inconsistent),
    }
}

fn enum_poly_codes(n: &BigUint) -> Vec<BigUint> {
    let (d, mut c) = unpair_big(n);
    let d = d.to_usize().unwrap_or(usize::MAX);
    let mut codes = Vec::new();
    for _ in 0..d {
        if c.is_zero() {
            break;
        }
        let (head, tail) = unpair_big(&c);
        codes.push(head);
        c = tail;
    }
    codes.push(c);
    codes
}

/// The `n`th nonzero polynomial: `n = ⟨d, c⟩`, `c` unpairs iteratively into
/// `d+1` ν_ℚ coefficient codes; the zero result is replaced by `1`.
pub fn enum_poly(n: &BigUint) -> Poly {
    let p = Poly::new(enum_poly_codes(n).iter().map(nu_q).collect());
    if p.is_zero() {
        Poly::one()
    } else {
        p
    }
}

pub fn enum_poly_u64(n: u64) -> Poly {
    let (d, mut c) = unpair(n);
    let mut coeffs = Vec::new();
    for _ in 0..d {
        if c == 0 {
            break;
        }
        let (head, tail) = unpair(c);
        coeffs.push(nu_q(&BigUint::from(head)));
        c = tail;
    }
    coeffs.push(nu_q(&BigUint::from(c)));
    let p = Poly::new(coeffs);
    if p.is_zero() {
        Poly::one()
    } else {
        p
    }
}

/// An index of `p` under `enum_poly`.
pub fn poly_index(p: &Poly) -> BigUint {
    if p.is_zero() {
        return BigUint::zero();
    }
    let d = p.degree().unwrap();
    let codes: Vec<BigUint> = p.coeffs().iter().map(nu_q_inv).collect();
    let mut c = codes[d].clone();
    for code in codes[..d].iter().rev() {
        c = pair_big(code, &c);
    }
    pair_big(&BigUint::from(d), &c)
}

fn pair_wide(n: u128, m: u128) -> u128 {
    let s = n.saturating_add(m);
    s.saturating_mul(s.saturating_add(1)) / 2 + m
}

/// Codes `⟨s,⟨a,b⟩⟩` that are the least index of their rational, up to `bound`.
fn least_codes(bound: u128) -> Vec<u128> {
    let mut out = vec![0];
    for y in 1u128.. {
        if pair_wide(0, y) > bound {
            break;
        }
        let (a, b) = unpair(y as u64);
        if a == 0 || num_integer::gcd(a, b + 1) != 1 {
            continue;
        }
        for s in 0..2 {
            let c = pair_wide(s, y);
            if c <= bound {
                out.push(c);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Iterated pairings of `levels` least codes, last one nonzero, with value at most `bound`.
fn code_tuples(levels: usize, bound: u128, codes: &[u128]) -> Vec<(u128, Vec<u128>)> {
    if levels == 1 {
        return codes.iter().filter(|&&c| c != 0 && c <= bound).map(|&c| (c, vec![c])).collect();
    }
    let rest = code_tuples(levels - 1, bound, codes);
    let mut out = Vec::new();
    for &k in codes {
        if pair_wide(k, 0) > bound {
            break;
        }
        for (r, tail) in &rest {
            let v = pair_wide(k, *r);
            if v > bound {
                break;
            }
            let mut t = vec![k];
            t.extend_from_slice(tail);
            out.push((v, t));
        }
    }
    out.sort_unstable();
    out
}

/// First `enum_poly` index of any rational multiple of the canonical `p`.
pub fn first_index(p: &Poly) -> BigUint {
    // optimal multipliers are ±1/v with v dividing the lcm of the coefficients
    let l = p.int_coeffs().iter().filter(|c| !c.is_zero()).fold(BigInt::one(), |acc, c| acc.lcm(c));
    let l = l.to_u64().unwrap_or(1);
    let mut best: Option<BigUint> = None;
    for v in (1..=l).filter(|v| l % v == 0) {
        for sgn in [1, -1] {
            let n = poly_index(&p.scale(&qr(sgn, v as i64)));
            if best.as_ref().is_none_or(|b| n < *b) {
                best = Some(n);
            }
        }
    }
    best.expect("nonzero polynomial")
}

struct AlgTable {
    horizon: u128,
    polys: Vec<(Poly, Vec<RootInterval>)>,
    rank: HashMap<Poly, usize>,
    // ⟨i,j⟩ codes surviving the root-count filter
    kept: Vec<(usize, usize)>,
    next_code: u64,
}

thread_local! {
    static TABLE: RefCell<AlgTable> = RefCell::new(AlgTable {
        horizon: 0,
        polys: Vec::new(),
        rank: HashMap::new(),
        kept: Vec::new(),
        next_code: 0,
    });
}

impl AlgTable {
    /// Rebuilds the table from every irreducible whose first index is at most `horizon`.
    fn extend_to(&mut self, horizon: u128) {
        let codes = least_codes(horizon);
        let mut found: HashMap<Poly, u128> = HashMap::new();
        for d in 1..=DEGREE_GUARD {
            let (mut lo, mut hi) = (0u128, 1u128 << 64);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if pair_wide(d as u128, mid) <= horizon {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            let cmax = lo;
            for (_, tuple) in code_tuples(d + 1, cmax, &codes) {
                let p = Poly::new(tuple.iter().map(|&c| nu_q(&BigUint::from(c))).collect()).primitive();
                if found.contains_key(&p) || self.rank.contains_key(&p) {
                    continue;
                }
                if !is_irreducible(&p).unwrap_or(false) {
                    continue;
                }
                let first = first_index(&p).to_u128().unwrap_or(u128::MAX);
                if first <= horizon {
                    found.insert(p, first);
                }
            }
        }
        let mut fresh: Vec<(u128, Poly)> = found.into_iter().map(|(p, n)| (n, p)).collect();
        fresh.sort();
        for (_, p) in fresh {
            let roots = isolate_roots(&p);
            self.rank.insert(p.clone(), self.polys.len());
            self.polys.push((p, roots));
        }
        self.horizon = horizon;
    }

    fn grow_polys(&mut self, i: usize) {
        while self.polys.len() <= i {
            let next = if self.horizon == 0 { 1 << 12 } else { self.horizon.saturating_mul(64) };
            self.extend_to(next);
        }
    }

    fn grow_kept(&mut self, n: usize) {
        while self.kept.len() <= n {
            let (i, j) = unpair(self.next_code);
            self.next_code += 1;
            let (i, j) = (i as usize, j as usize);
            self.grow_polys(i);
            if j < self.polys[i].1.len() {
                self.kept.push((i, j));
            }
        }
    }

    fn descriptor(&self, i: usize, j: usize) -> PointDescriptor {
        let (p, _) = &self.polys[i];
        if p.degree() == Some(1) {
            PointDescriptor::Rat(-p.coeff(0) / p.coeff(1))
        } else {
            PointDescriptor::alg_unchecked(p.clone(), j)
        }
    }
}

/// The `n`th real algebraic number, without repetitions.
pub fn enum_algebraic(n: usize) -> PointDescriptor {
    TABLE.with(|t| {
        let mut t = t.borrow_mut();
        t.grow_kept(n);
        let (i, j) = t.kept[n];
        t.descriptor(i, j)
    })
}

/// The `i`th canonical irreducible polynomial in first-occurrence order.
pub fn irreducible_at(i: usize) -> Poly {
    TABLE.with(|t| {
        let mut t = t.borrow_mut();
        t.grow_polys(i);
        t.polys[i].0.clone()
    })
}

/// Position of `x` in `enum_algebraic`; `None` for limit descriptors.
pub fn algebraic_index(x: &PointDescriptor) -> Option<usize> {
    let (poly, j) = match x {
        PointDescriptor::Rat(r) => (Poly::linear_root(r).primitive(), 0),
        PointDescriptor::Alg(a) => (a.minpoly().clone(), a.root_index()),
        PointDescriptor::Limit(_) => return None,
    };
    if poly.degree()? > DEGREE_GUARD {
        return None;
    }
    let first = first_index(&poly).to_u128()?;
    TABLE.with(|t| {
        let mut t = t.borrow_mut();
        while t.horizon < first {
            let next = if t.horizon == 0 { 1 << 12 } else { t.horizon.saturating_mul(64) };
            t.extend_to(next.max(first));
        }
        let i = *t.rank.get(&poly)?;
        let code = crate::stream::pair(i as u64, j as u64);
        while t.next_code <= code {
            let n = t.kept.len();
            t.grow_kept(n);
        }
        t.kept.iter().position(|&(a, b)| a == i && b == j)
    })
}

/// Whether `p` vanishes at `x`, via divisibility by the minimal polynomial.
pub fn is_zero_at(p: &Poly, x: &PointDescriptor) -> Result<bool, AlgebraError> {
    match x {
        PointDescriptor::Rat(r) => Ok(p.eval(r).is_zero()),
        PointDescriptor::Alg(a) => Ok(a.minpoly().divides(p)),
        PointDescriptor::Limit(_) => Err(AlgebraError::Undecidable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn arithmetic_examples() {
        let (quot, rem) = p(&[-1, 0, 1]).divmod(&p(&[-1, 1])).unwrap();
        assert_eq!(quot, p(&[1, 1]));
        assert!(rem.is_zero());
        assert_eq!(p(&[-1, 0, 1]).gcd(&p(&[1, -2, 1])), p(&[-1, 1]));
        assert_eq!(p(&[-1, 1]).pow(2).squarefree_part(), p(&[-1, 1]));
        assert_eq!(p(&[1]).divmod(&Poly::zero()), Err(AlgebraError::DivisionByZero));
    }

    #[test]
    fn sturm_examples() {
        let f = p(&[-2, 0, 1]);
        assert_eq!(sturm_count(&f, &q(0), &q(2)).unwrap(), 1);
        assert_eq!(sturm_count(&f, &q(-2), &q(2)).unwrap(), 2);
        assert_eq!(sturm_count(&p(&[1, 0, 1]), &q(-10), &q(10)).unwrap(), 0);
        assert_eq!(sturm_count(&p(&[-1, 1]), &q(1), &q(2)), Err(AlgebraError::EndpointRoot));
    }

    #[test]
    fn isolation_examples() {
        let roots = isolate_roots(&p(&[-2, 0, 1]));
        assert_eq!(roots.len(), 2);
        assert!(roots[1].contains(&qr(1414, 1000)) || roots[1].contains(&qr(1415, 1000)));
        let x = approx_root(&p(&[-2, 0, 1]), &roots[1], 20);
        assert!((&x * &x - q(2)).abs() < dyadic(17));
        let lin = isolate_roots(&p(&[-3, 2]));
        assert_eq!(lin.len(), 1);
        assert!(lin[0].contains(&qr(3, 2)));
        assert!(isolate_roots(&p(&[1, 0, 1])).is_empty());
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factorize(&p(&[-1, 0, 1])).unwrap(), vec![p(&[-1, 1]), p(&[1, 1])]);
        assert_eq!(factorize(&p(&[-2, 0, 1])).unwrap(), vec![p(&[-2, 0, 1])]);
        let mut f = factorize(&p(&[-1, 0, 0, 0, 1])).unwrap();
        f.sort_by_key(|g| g.degree());
        assert_eq!(f, vec![p(&[-1, 1]), p(&[1, 1]), p(&[1, 0, 1])]);
        // two quartics need the Kronecker search at degree 4
        let prod = &p(&[-2, 0, 0, 0, 1]) * &p(&[1, 1, 0, 0, 1]);
        let f = factorize(&prod).unwrap();
        assert_eq!(f.len(), 2);
        assert!(matches!(factorize(&p(&[1; 10])), Err(AlgebraError::DegreeGuard(9))));
    }

    #[test]
    fn minimal_polynomial_examples() {
        let around1 = RootInterval { lo: qr(1, 2), hi: qr(3, 2) };
        assert_eq!(minimal_polynomial(&p(&[-1, 0, 1]), &around1).unwrap(), p(&[-1, 1]));
        let around_sqrt2 = RootInterval { lo: qr(14, 10), hi: qr(15, 10) };
        assert_eq!(minimal_polynomial(&p(&[-4, 0, 0, 0, 1]), &around_sqrt2).unwrap(), p(&[-2, 0, 1]));
        assert_eq!(minimal_polynomial(&p(&[-1, 1]).pow(3), &around1).unwrap(), p(&[-1, 1]));
    }

    #[test]
    fn enum_poly_round_trip_and_nonzero() {
        for n in 0..2000u64 {
            let f = enum_poly(&BigUint::from(n));
            assert!(!f.is_zero());
            assert_eq!(f, enum_poly_u64(n));
        }
        for c in [[0i64, 1, 0], [-2, 0, 1], [3, -1, 2]] {
            let f = p(&c);
            assert_eq!(enum_poly(&poly_index(&f)), f);
        }
        // x has a small index
        let x_index = poly_index(&Poly::x());
        assert!((0..=x_index.to_u64().unwrap()).any(|n| enum_poly_u64(n) == Poly::x()));
    }

    #[test]
    fn irreducible_order_matches_linear_scan() {
        let mut scanned: Vec<Poly> = Vec::new();
        let mut n = 0u64;
        while scanned.len() < 30 {
            let f = enum_poly_u64(n).primitive();
            n += 1;
            if f.degree().unwrap_or(0) >= 1 && !scanned.contains(&f) && is_irreducible(&f).unwrap() {
                scanned.push(f);
            }
        }
        for (i, f) in scanned.iter().enumerate() {
            assert_eq!(&irreducible_at(i), f, "rank {i}");
            assert!(BigUint::from(n) > first_index(f));
        }
    }

    #[test]
    fn algebraic_enumeration_is_injective() {
        let firsts: Vec<_> = (0..200).map(enum_algebraic).collect();
        for a in 0..firsts.len() {
            for b in a + 1..firsts.len() {
                assert_ne!(firsts[a], firsts[b], "{a} {b}");
            }
        }
        for (n, x) in firsts.iter().enumerate().take(60) {
            assert_eq!(algebraic_index(x), Some(n));
        }
        let sqrt2 = PointDescriptor::alg(p(&[-2, 0, 1]), 1).unwrap();
        let neg = PointDescriptor::alg(p(&[-2, 0, 1]), 0).unwrap();
        let (a, b) = (algebraic_index(&sqrt2).unwrap(), algebraic_index(&neg).unwrap());
        assert_ne!(a, b);
        assert_eq!(enum_algebraic(a), sqrt2);
        let r = PointDescriptor::Rat(qr(-3, 4));
        assert_eq!(enum_algebraic(algebraic_index(&r).unwrap()), r);
    }

    #[test]
    fn zero_test_examples() {
        let sqrt2 = PointDescriptor::alg(p(&[-2, 0, 1]), 1).unwrap();
        assert!(is_zero_at(&p(&[-2, 0, 1]), &sqrt2).unwrap());
        assert!(!is_zero_at(&p(&[-1, 1]), &sqrt2).unwrap());
        assert!(is_zero_at(&p(&[-1, 0, 1]), &PointDescriptor::Rat(q(1))).unwrap());
    }
}
