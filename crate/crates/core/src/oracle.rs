//! Exact ground truth at desk scale.
//!
//! Bivariate systems are solved by eliminating one variable at a time with
//! resultants, isolating the real roots of each eliminant with Sturm
//! sequences and keeping the pairs that survive back-substitution. Nothing
//! here uses floating point, so the results can be used to audit the
//! interval pipeline.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::interval::Box2;
use crate::mpoly::{resultant_z, MPoly, PolyError, Var};

/// Largest total degree the solver accepts by default.
pub const DEFAULT_DEGREE_GUARD: u32 = 16;

/// Widths at which a point is re-evaluated before a sign is declared zero.
const REFINEMENT_LADDER: [i32; 4] = [30, 60, 120, 240];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("total degree {degree} exceeds the oracle guard {guard}")]
    DegreeGuardExceeded { degree: u32, guard: u32 },
    #[error("the system does not have finitely many solutions")]
    NotZeroDimensional,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Dense univariate polynomial with rational coefficients, lowest degree
/// first, leading zeros stripped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<BigRational>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().cloned().map(BigRational::from_integer).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UPoly {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * BigRational::from_integer(k.into())).collect())
    }

    /// Integer multiple with coprime coefficients and positive leading
    /// coefficient.
    pub fn primitive(&self) -> Vec<BigInt> {
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
        normalize(ints)
    }

    /// The polynomial as a univariate `MPoly` in `v`, or `None` when other
    /// variables occur.
    pub fn from_mpoly(m: &MPoly, v: Var) -> Option<UPoly> {
        let mut coeffs = vec![BigRational::zero(); m.degree(v) as usize + 1];
        for (e, c) in m.terms() {
            if (0..3).any(|i| i != v.index() && e[i] != 0) {
                return None;
            }
            coeffs[e[v.index()] as usize] = c.clone();
        }
        Some(Self::new(coeffs))
    }

    pub fn to_mpoly(&self, v: Var) -> MPoly {
        MPoly::from_terms(self.coeffs.iter().enumerate().map(|(k, c)| {
            let mut e = [0; 3];
            e[v.index()] = k as u32;
            (e, c.clone())
        }))
    }

    /// Greatest common divisor, primitive with positive leading coefficient.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        if self.is_zero() {
            return Self::from_bigints(&o.primitive());
        }
        if o.is_zero() {
            return Self::from_bigints(&self.primitive());
        }
        Self::from_bigints(&modular::gcd(&self.primitive(), &o.primitive()))
    }

    /// Exact quotient; panics when the division leaves a remainder.
    pub fn div_exact(&self, d: &UPoly) -> UPoly {
        let dd = d.degree().expect("nonzero divisor");
        let mut r = self.coeffs.clone();
        let Some(n) = self.degree() else { return UPoly::zero() };
        assert!(n >= dd, "inexact division");
        let mut q = vec![BigRational::zero(); n - dd + 1];
        let lc = &d.coeffs[dd];
        for k in (0..=n - dd).rev() {
            let t = &r[k + dd] / lc;
            for (i, c) in d.coeffs.iter().enumerate() {
                r[k + i] -= &t * c;
            }
            q[k] = t;
        }
        assert!(r.iter().all(Zero::is_zero), "inexact division");
        Self::new(q)
    }

    /// `p / gcd(p, p')`, primitive.
    pub fn squarefree_part(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        Self::from_bigints(&self.div_exact(&g).primitive())
    }
}

fn normalize(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return v;
    }
    let g = if v.last().is_some_and(Signed::is_negative) { -g } else { g };
    v.iter().map(|c| c / &g).collect()
}

/// Gcd of primitive integer polynomials from images modulo word-sized
/// primes, combined by Chinese remaindering and confirmed by exact trial
/// division.
mod modular {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    fn mul(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        r
    }

    fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    fn is_prime(n: u64) -> bool {
        if n < 2 || n.is_multiple_of(2) {
            return n == 2;
        }
        let (mut d, mut s) = (n - 1, 0);
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = pow(a % n, d, n);
            if x == 0 || x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mul(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    fn primes() -> impl Iterator<Item = u64> {
        (0..).map(|k| (1u64 << 62) - 1 - 2 * k).filter(|&n| is_prime(n))
    }

    fn reduce(a: &[BigInt], p: u64) -> Vec<u64> {
        let bp = BigInt::from(p);
        a.iter().map(|c| c.mod_floor(&bp).to_u64().expect("reduced")).collect()
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// Monic gcd over `Z/p`.
    fn gcd_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let lb = inv(*b.last().unwrap(), p);
            while a.len() >= b.len() {
                let t = mul(*a.last().unwrap(), lb, p);
                let k = a.len() - b.len();
                for (i, c) in b.iter().enumerate() {
                    a[k + i] = (a[k + i] + p - mul(t, *c, p)) % p;
                }
                trim(&mut a);
            }
            std::mem::swap(&mut a, &mut b);
        }
        let l = inv(*a.last().expect("nonzero inputs"), p);
        a.iter().map(|c| mul(*c, l, p)).collect()
    }

    fn divides(g: &[BigInt], a: &[BigInt]) -> bool {
        let mut r = a.to_vec();
        let lg = g.last().unwrap();
        while r.len() >= g.len() {
            let (t, rem) = r.last().unwrap().div_rem(lg);
            if !rem.is_zero() {
                return false;
            }
            let k = r.len() - g.len();
            for (i, c) in g.iter().enumerate() {
                r[k + i] -= &t * c;
            }
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        r.is_empty()
    }

    fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
        let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        let g = if v.last().is_some_and(Signed::is_negative) { -g } else { g };
        v.iter().map(|c| c / &g).collect()
    }

    pub fn gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let (la, lb) = (a.last().unwrap(), b.last().unwrap());
        if a.len() == 1 || b.len() == 1 {
            return vec![BigInt::one()];
        }
        let lg = la.gcd(lb);
        let mut modulus = BigInt::one();
        let mut image: Vec<BigInt> = Vec::new();
        let mut last: Option<Vec<BigInt>> = None;
        for p in primes() {
            let bp = BigInt::from(p);
            if (la % &bp).is_zero() || (lb % &bp).is_zero() {
                continue;
            }
            let gp = gcd_mod(&reduce(a, p), &reduce(b, p), p);
            if gp.len() == 1 {
                return vec![BigInt::one()];
            }
            let s = reduce(std::slice::from_ref(&lg), p)[0];
            let gp: Vec<u64> = gp.iter().map(|c| mul(*c, s, p)).collect();
            if image.is_empty() || gp.len() < image.len() {
                // earlier primes were unlucky
                image = gp.iter().map(|&c| BigInt::from(c)).collect();
                modulus = bp;
                last = None;
                continue;
            }
            if gp.len() > image.len() {
                continue;
            }
            let m_inv = inv(reduce(std::slice::from_ref(&modulus), p)[0], p);
            for (c, &r) in image.iter_mut().zip(&gp) {
                let cur = reduce(std::slice::from_ref(c), p)[0];
                let t = mul((r + p - cur) % p, m_inv, p);
                *c += &modulus * BigInt::from(t);
            }
            modulus *= &bp;
            let half = &modulus >> 1;
            let sym: Vec<BigInt> = image.iter().map(|c| if *c > half { c - &modulus } else { c.clone() }).collect();
            let cand = primitive(sym);
            if last.as_ref() == Some(&cand) && divides(&cand, a) && divides(&cand, b) {
                return cand;
            }
            last = Some(cand);
        }
        unreachable!("infinitely many primes")
    }
}

/// Sign of an integer polynomial at a rational point.
fn sign_at(p: &[BigInt], t: &BigRational) -> Ordering {
    let (n, d) = (t.numer(), t.denom());
    let mut acc = BigInt::zero();
    let mut dpow = BigInt::one();
    for c in p.iter().rev() {
        acc = acc * n + c * &dpow;
        dpow *= d;
    }
    acc.cmp(&BigInt::zero())
}

/// `−rem(a, b)` up to a positive factor, primitive.
fn negated_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    let mut steps = 0u32;
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let lr = r[r.len() - 1].clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (i, c) in b.iter().enumerate() {
            r[k + i] -= &lr * c;
        }
        steps += 1;
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    // r = lb^steps · rem
    let flip = !(lb.is_negative() && steps % 2 == 1);
    let r = normalize_content(r);
    if flip {
        r.into_iter().map(|c| -c).collect()
    } else {
        r
    }
}

/// Divides by the positive content, keeping signs.
fn normalize_content(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        v
    } else {
        v.iter().map(|c| c / &g).collect()
    }
}

struct Sturm {
    seq: Vec<Vec<BigInt>>,
}

impl Sturm {
    fn new(p: &[BigInt]) -> Self {
        let dp: Vec<BigInt> = p.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
        let mut seq = vec![p.to_vec(), normalize_content(dp)];
        while seq.last().is_some_and(|s| s.len() > 1) {
            let n = seq.len();
            let r = negated_remainder(&seq[n - 2], &seq[n - 1]);
            if r.is_empty() {
                break;
            }
            seq.push(r);
        }
        Sturm { seq }
    }

    fn variations(&self, t: &BigRational) -> usize {
        let mut last = Ordering::Equal;
        let mut v = 0;
        for s in &self.seq {
            let c = sign_at(s, t);
            if c != Ordering::Equal {
                if last != Ordering::Equal && c != last {
                    v += 1;
                }
                last = c;
            }
        }
        v
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a) - self.variations(b)
    }
}

/// An isolating interval `(lo, hi)` for one simple root of `poly`, or a
/// degenerate interval when the root is a known rational.
#[derive(Clone, Debug)]
pub struct RootInterval {
    poly: Arc<Vec<BigInt>>,
    lo: BigRational,
    hi: BigRational,
}

impl RootInterval {
    fn exact(v: BigRational) -> Self {
        RootInterval { poly: Arc::new(Vec::new()), lo: v.clone(), hi: v }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn approx(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }

    /// Bisects until the width is at most `w`.
    pub fn refine(&mut self, w: &BigRational) {
        if self.is_exact() {
            return;
        }
        let s_lo = sign_at(&self.poly, &self.lo);
        while self.width() > *w {
            let m = self.midpoint();
            match sign_at(&self.poly, &m) {
                Ordering::Equal => {
                    self.lo = m.clone();
                    self.hi = m;
                    return;
                }
                s if s == s_lo => self.lo = m,
                _ => self.hi = m,
            }
        }
    }

    /// Whether the root is also a root of `q`.
    fn is_root_of(&self, q: &UPoly) -> bool {
        if self.is_exact() {
            return q.eval(&self.lo).is_zero();
        }
        let g = UPoly::from_bigints(&self.poly).gcd(q);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        // g divides the defining polynomial, whose only root here is simple
        let g = g.primitive();
        sign_at(&g, &self.lo) != sign_at(&g, &self.hi)
    }
}

/// Real roots of a squarefree polynomial in the closed range `[lo, hi]`,
/// in increasing order. Roots that land on a dyadic split point or on the
/// range ends are returned as exact intervals.
pub fn sturm_isolate(p: &UPoly, lo: &BigRational, hi: &BigRational) -> Vec<RootInterval> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 || lo > hi {
        return out;
    }
    let mut q = p.clone();
    let mut ends = Vec::new();
    for e in [lo, hi] {
        if q.eval(e).is_zero() && !ends.contains(e) {
            ends.push(e.clone());
            q = q.div_exact(&linear(e));
        }
    }
    if lo < hi {
        isolate_open(&q, lo, hi, &mut out);
    }
    out.extend(ends.into_iter().map(RootInterval::exact));
    out.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    out
}

fn linear(r: &BigRational) -> UPoly {
    UPoly::new(vec![-r.clone(), BigRational::one()])
}

/// Roots in the open interval `(a, b)`; `p` does not vanish at either end.
fn isolate_open(p: &UPoly, a: &BigRational, b: &BigRational, out: &mut Vec<RootInterval>) {
    if p.degree().unwrap_or(0) == 0 {
        return;
    }
    let poly = Arc::new(p.primitive());
    let sturm = Sturm::new(&poly);
    let n = sturm.count(a, b);
    let mut stack = vec![(a.clone(), b.clone(), n)];
    while let Some((a, b, n)) = stack.pop() {
        match n {
            0 => {}
            1 => out.push(RootInterval { poly: poly.clone(), lo: a, hi: b }),
            _ => {
                let m = (&a + &b) / BigRational::from_integer(2.into());
                if sign_at(&poly, &m) == Ordering::Equal {
                    out.push(RootInterval::exact(m.clone()));
                    let q = p.div_exact(&linear(&m));
                    isolate_open(&q, &a, &m, out);
                    isolate_open(&q, &m, &b, out);
                    continue;
                }
                let left = sturm.count(&a, &m);
                stack.push((a, m.clone(), left));
                stack.push((m, b, n - left));
            }
        }
    }
}

/// Real roots of a squarefree polynomial in the closed range `[lo, hi]`,
/// in increasing order, by Descartes' rule of signs on bisected intervals.
/// Same contract as [`sturm_isolate`] but without the coefficient growth of
/// Sturm sequences, so it scales to the eliminants of the solver.
pub fn isolate_real_roots(p: &UPoly, lo: &BigRational, hi: &BigRational) -> Vec<RootInterval> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 || lo > hi {
        return out;
    }
    let poly = p.primitive();
    let mut exact: Vec<BigRational> = Vec::new();
    for e in [lo, hi] {
        if sign_at(&poly, e) == Ordering::Equal && !exact.contains(e) {
            exact.push(e.clone());
        }
    }
    if lo < hi {
        let two = BigRational::from_integer(2.into());
        let mut stack = vec![(to_unit_interval(&poly, lo, hi), lo.clone(), hi.clone())];
        while let Some((q, a, b)) = stack.pop() {
            match descartes_bound(&q) {
                0 => {}
                1 => out.push(deflated_interval(&poly, a, b)),
                _ => {
                    let m = (&a + &b) / &two;
                    let left = halve(&q);
                    if left.iter().fold(BigInt::zero(), |s, c| s + c).is_zero() {
                        exact.push(m.clone());
                    }
                    let right = normalize_content(taylor_shift(&left));
                    stack.push((normalize_content(left), a, m.clone()));
                    stack.push((right, m, b));
                }
            }
        }
    }
    out.extend(exact.into_iter().map(RootInterval::exact));
    out.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    out
}

/// `p(a + (b − a) t)` up to a positive factor.
fn to_unit_interval(p: &[BigInt], a: &BigRational, b: &BigRational) -> Vec<BigInt> {
    let w = b - a;
    let d = a.denom() * w.denom();
    let (sa, sb) = (a.numer() * w.denom(), w.numer() * a.denom());
    // Horner in t with x = (sa + sb t) / d, scaled by d^n
    let mut acc: Vec<BigInt> = vec![p.last().unwrap().clone()];
    let mut dpow = BigInt::one();
    for c in p.iter().rev().skip(1) {
        dpow *= &d;
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (i, v) in acc.iter().enumerate() {
            next[i] += v * &sa;
            next[i + 1] += v * &sb;
        }
        next[0] += c * &dpow;
        acc = next;
    }
    normalize_content(acc)
}

/// `q(t + 1)`.
fn taylor_shift(q: &[BigInt]) -> Vec<BigInt> {
    let mut c = q.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1].clone();
            c[j] += t;
        }
    }
    c
}

/// `2^n q(t / 2)`, the left half mapped back to `[0, 1]`.
fn halve(q: &[BigInt]) -> Vec<BigInt> {
    let n = q.len() - 1;
    q.iter().enumerate().map(|(i, c)| c << (n - i)).collect()
}

/// Sign variations of `(1 + t)^n q(1 / (1 + t))`: an upper bound on the
/// roots in `(0, 1)` that is exact when it is 0 or 1.
fn descartes_bound(q: &[BigInt]) -> usize {
    let rev: Vec<BigInt> = q.iter().rev().cloned().collect();
    let shifted = taylor_shift(&rev);
    let mut v = 0;
    let mut last = Ordering::Equal;
    for c in &shifted {
        let s = c.cmp(&BigInt::zero());
        if s != Ordering::Equal {
            if last != Ordering::Equal && s != last {
                v += 1;
            }
            last = s;
        }
    }
    v
}

/// Isolating interval for the single root in `(a, b)`, with any root at an
/// end divided out so the defining polynomial is nonzero at both ends.
fn deflated_interval(p: &[BigInt], a: BigRational, b: BigRational) -> RootInterval {
    let mut q = UPoly::from_bigints(p);
    for e in [&a, &b] {
        if q.eval(e).is_zero() {
            q = q.div_exact(&linear(e));
        }
    }
    RootInterval { poly: Arc::new(q.primitive()), lo: a, hi: b }
}

/// A real point given by isolating intervals for both coordinates.
#[derive(Clone, Debug)]
pub struct ExactPoint {
    pub x: RootInterval,
    pub y: RootInterval,
}

impl ExactPoint {
    pub fn refine(&mut self, w: &BigRational) {
        self.x.refine(w);
        self.y.refine(w);
    }

    pub fn approx(&self) -> (f64, f64) {
        (self.x.approx(), self.y.approx())
    }

    pub fn is_exact(&self) -> bool {
        self.x.is_exact() && self.y.is_exact()
    }

    fn rat_box(&self) -> [RatInterval; 2] {
        [RatInterval::new(self.x.lo.clone(), self.x.hi.clone()), RatInterval::new(self.y.lo.clone(), self.y.hi.clone())]
    }

    /// Whether the point lies in the closed box.
    pub fn in_box(&self, b: &RatBox) -> bool {
        b.x.0 <= self.x.lo && self.x.hi <= b.x.1 && b.y.0 <= self.y.lo && self.y.hi <= b.y.1
    }

    /// Whether the point lies on the boundary of the box.
    pub fn on_boundary(&self, b: &RatBox) -> bool {
        let on = |r: &RootInterval, (lo, hi): &(BigRational, BigRational)| r.is_exact() && (r.lo == *lo || r.lo == *hi);
        self.in_box(b) && (on(&self.x, &b.x) || on(&self.y, &b.y))
    }

    /// Interval value of a polynomial in `x, y` over the current enclosure.
    pub fn enclose(&self, m: &MPoly) -> RatInterval {
        eval_interval(m, &self.rat_box())
    }

    /// Sign of `m` at the point, refining until the enclosure excludes zero.
    /// `None` when the finest level still straddles zero at an inexact
    /// point.
    pub fn sign_of(&mut self, m: &MPoly) -> Option<Ordering> {
        if self.is_exact() {
            let v = m.eval_exact(&[self.x.lo.clone(), self.y.lo.clone(), BigRational::zero()]).expect("bivariate");
            return Some(v.cmp(&BigRational::zero()));
        }
        for digits in REFINEMENT_LADDER {
            self.refine(&pow10(-digits));
            if let Some(s) = self.enclose(m).sign() {
                return Some(s);
            }
            if self.is_exact() {
                return self.sign_of(m);
            }
        }
        None
    }
}

pub fn pow10(k: i32) -> BigRational {
    let t = BigRational::from_integer(BigInt::from(10).pow(k.unsigned_abs()));
    if k < 0 {
        t.recip()
    } else {
        t
    }
}

fn rat_to_f64(q: &BigRational) -> f64 {
    crate::interval::rational_to_f64(q, crate::interval::Dir::Down)
}

/// A closed rational box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatBox {
    pub x: (BigRational, BigRational),
    pub y: (BigRational, BigRational),
}

impl RatBox {
    pub fn from_f64(xlo: f64, xhi: f64, ylo: f64, yhi: f64) -> Self {
        let r = |v: f64| BigRational::from_float(v).expect("finite endpoint");
        RatBox { x: (r(xlo), r(xhi)), y: (r(ylo), r(yhi)) }
    }

    pub fn from_box(b: &Box2<f64>) -> Self {
        let [(xl, xh), (yl, yh)] = b.to_f64_bounds();
        Self::from_f64(xl, xh, yl, yh)
    }
}

/// Closed interval with rational endpoints; every operation is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        RatInterval { lo, hi }
    }

    fn point(v: BigRational) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Sign of every member, `None` when zero is inside and the interval is
    /// not the point zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    fn add(&self, o: &Self) -> Self {
        RatInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        RatInterval { lo: c.iter().min().unwrap().clone(), hi: c.iter().max().unwrap().clone() }
    }

    fn scale(&self, s: &BigRational) -> Self {
        let (a, b) = (&self.lo * s, &self.hi * s);
        if s.is_negative() {
            RatInterval { lo: b, hi: a }
        } else {
            RatInterval { lo: a, hi: b }
        }
    }

    fn pow(&self, n: u32) -> Self {
        let (a, b) = (num_traits::pow(self.lo.clone(), n as usize), num_traits::pow(self.hi.clone(), n as usize));
        if n % 2 == 1 || !self.lo.is_negative() {
            RatInterval { lo: a, hi: b }
        } else if !self.hi.is_positive() {
            RatInterval { lo: b, hi: a }
        } else {
            RatInterval { lo: BigRational::zero(), hi: a.max(b) }
        }
    }
}

/// Range enclosure of a polynomial in `x, y` over a rational box.
pub fn eval_interval(m: &MPoly, b: &[RatInterval; 2]) -> RatInterval {
    let pows = |iv: &RatInterval, n: u32| (0..=n).map(|k| iv.pow(k)).collect::<Vec<_>>();
    let px = pows(&b[0], m.degree(Var::X));
    let py = pows(&b[1], m.degree(Var::Y));
    let mut acc = RatInterval::point(BigRational::zero());
    for (e, c) in m.terms() {
        assert_eq!(e[2], 0, "bivariate polynomial expected");
        acc = acc.add(&px[e[0] as usize].mul(&py[e[1] as usize]).scale(c));
    }
    acc
}

/// `Res_y(a, b)` as a polynomial in `x`.
fn res_y(a: &MPoly, b: &MPoly) -> UPoly {
    let sw = |m: &MPoly| m.compose(&MPoly::x(), &MPoly::z(), &MPoly::y());
    let r = resultant_z(&sw(a), &sw(b)).expect("nonzero equations");
    UPoly::from_mpoly(&r, Var::X).expect("eliminant in x")
}

/// Squarefree eliminant in `x` whose roots contain the `x`-coordinates of
/// every common zero: the gcd of the resultants of the first equation with
/// each of the others that are not identically zero.
fn eliminant(eqs: &[&MPoly]) -> Result<UPoly, OracleError> {
    let n = eqs.len();
    let first: Vec<(usize, usize)> = (1..n).map(|j| (0, j)).collect();
    let rest: Vec<(usize, usize)> = (1..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    for group in [first, rest] {
        let mut acc: Option<UPoly> = None;
        for (i, j) in group {
            let r = res_y(eqs[i], eqs[j]);
            if r.is_zero() {
                continue;
            }
            acc = Some(match acc {
                None => r,
                Some(g) => g.gcd(&r),
            });
        }
        if let Some(g) = acc {
            return Ok(g.squarefree_part());
        }
    }
    Err(OracleError::NotZeroDimensional)
}

fn check_guard(eqs: &[&MPoly], guard: u32) -> Result<(), OracleError> {
    for e in eqs {
        let d = e.total_degree();
        if d > guard {
            return Err(OracleError::DegreeGuardExceeded { degree: d, guard });
        }
    }
    Ok(())
}

/// All real common zeros in the closed box of bivariate polynomials.
pub fn oracle_solve(eqs: &[&MPoly], b: &RatBox) -> Result<Vec<ExactPoint>, OracleError> {
    assert!(eqs.len() >= 2, "need at least two equations");
    if eqs.iter().any(|e| e.is_zero()) {
        return Err(OracleError::NotZeroDimensional);
    }
    let swapped: Vec<MPoly> = eqs.iter().map(|e| e.swap_xy()).collect();
    let swapped: Vec<&MPoly> = swapped.iter().collect();
    let (ex, ey) = rayon::join(|| eliminant(eqs), || eliminant(&swapped));
    let xs = isolate_real_roots(&ex?, &b.x.0, &b.x.1);
    let ys = isolate_real_roots(&ey?, &b.y.0, &b.y.1);
    let w = pow10(-REFINEMENT_LADDER[0]);
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            let mut pt = ExactPoint { x: x.clone(), y: y.clone() };
            pt.refine(&w);
            let vanishes = |pt: &ExactPoint, e: &MPoly| {
                if pt.is_exact() {
                    pt.clone().sign_of(e) == Some(Ordering::Equal)
                } else {
                    pt.enclose(e).contains_zero()
                }
            };
            if eqs.iter().all(|e| vanishes(&pt, e)) {
                out.push(pt);
            }
        }
    }
    Ok(out)
}

/// Exact classification of a singular point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactKind {
    Node,
    OrdinaryCusp,
    Other,
}

#[derive(Clone, Debug)]
pub struct OracleSingularPoint {
    pub point: ExactPoint,
    pub kind: ExactKind,
    /// Sign of the Hessian determinant; `Equal` at cusps and worse.
    pub hessian_sign: Ordering,
}

/// `Res_z(P, Q)` with the oracle's degree guard applied.
pub fn oracle_curve(p: &MPoly, q: &MPoly, guard: u32) -> Result<MPoly, OracleError> {
    let f = resultant_z(p, q)?;
    check_guard(&[&f], guard)?;
    Ok(f)
}

/// Singular points of `f = Res_z(P, Q)` in the box.
pub fn oracle_singular_points(p: &MPoly, q: &MPoly, b: &RatBox) -> Result<Vec<OracleSingularPoint>, OracleError> {
    oracle_singular_points_with_guard(p, q, b, DEFAULT_DEGREE_GUARD)
}

pub fn oracle_singular_points_with_guard(p: &MPoly, q: &MPoly, b: &RatBox, guard: u32) -> Result<Vec<OracleSingularPoint>, OracleError> {
    let f = oracle_curve(p, q, guard)?;
    singular_points_of(&f, b)
}

/// Singular points of a plane curve `f(x, y) = 0` in the box.
pub fn singular_points_of(f: &MPoly, b: &RatBox) -> Result<Vec<OracleSingularPoint>, OracleError> {
    if f.total_degree() <= 1 {
        return Ok(Vec::new());
    }
    let fx = f.derivative(Var::X, 1);
    let fy = f.derivative(Var::Y, 1);
    let pts = oracle_solve(&[f, &fx, &fy], b)?;
    Ok(pts.into_iter().map(|pt| classify_point(f, pt)).collect())
}

fn classify_point(f: &MPoly, mut point: ExactPoint) -> OracleSingularPoint {
    let fxx = f.dxy(2, 0);
    let fxy = f.dxy(1, 1);
    let fyy = f.dxy(0, 2);
    let hess = &(&fxx * &fyy) - &(&fxy * &fxy);
    let hessian_sign = match point.sign_of(&hess) {
        Some(s) => s,
        None if hessian_vanishes(&point, &hess, f) => Ordering::Equal,
        None => {
            // the fallback proved H ≠ 0, so refinement eventually separates it
            let mut w = pow10(-REFINEMENT_LADDER[REFINEMENT_LADDER.len() - 1]);
            loop {
                w = &w * &w;
                point.refine(&w);
                if let Some(s) = point.enclose(&hess).sign() {
                    break s;
                }
            }
        }
    };
    let kind = if hessian_sign != Ordering::Equal {
        ExactKind::Node
    } else if ordinary_cusp(f, &mut point, &fxx, &fxy, &fyy) {
        ExactKind::OrdinaryCusp
    } else {
        ExactKind::Other
    };
    OracleSingularPoint { point, kind, hessian_sign }
}

/// Exact test that `H` vanishes at the point: both coordinates must be
/// roots of the eliminants of `(H, g)` for some equation `g` of the point.
fn hessian_vanishes(pt: &ExactPoint, hess: &MPoly, f: &MPoly) -> bool {
    let partner = [f.derivative(Var::X, 1), f.derivative(Var::Y, 1), f.clone()];
    for g in partner.iter().filter(|g| !g.is_zero()) {
        let rx = res_y(hess, g);
        let ry = res_y(&hess.swap_xy(), &g.swap_xy());
        if rx.is_zero() || ry.is_zero() {
            continue;
        }
        return pt.x.is_root_of(&rx) && pt.y.is_root_of(&ry);
    }
    true
}

/// The cubic Taylor form is nonzero along the kernel of the Hessian.
fn ordinary_cusp(f: &MPoly, pt: &mut ExactPoint, fxx: &MPoly, fxy: &MPoly, fyy: &MPoly) -> bool {
    let (a, c) = (pt.sign_of(fxx), pt.sign_of(fyy));
    let nonzero = |s: Option<Ordering>| s.is_some_and(|s| s != Ordering::Equal);
    // kernel of [[a, b], [b, c]] with ac = b²
    let dir = if nonzero(c) {
        [fyy.clone(), -fxy.clone()]
    } else if nonzero(a) {
        [fxy.clone(), -fxx.clone()]
    } else {
        return false;
    };
    let cubic = [f.dxy(3, 0), f.dxy(2, 1), f.dxy(1, 2), f.dxy(0, 3)];
    let (u, v) = (&dir[0], &dir[1]);
    let three = MPoly::int(3);
    let terms = [
        &cubic[0] * &u.pow(3),
        &(&three * &cubic[1]) * &(&u.pow(2) * v),
        &(&three * &cubic[2]) * &(u * &v.pow(2)),
        &cubic[3] * &v.pow(3),
    ];
    let form = terms.iter().fold(MPoly::zero(), |acc, t| &acc + t);
    nonzero(pt.sign_of(&form))
}

/// Real solutions of a 2×2 system in a closed box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RootCount {
    /// Every solution in the closed box, boundary included.
    pub inside: usize,
    /// Those lying on the boundary.
    pub on_boundary: usize,
}

pub fn oracle_count_roots_in_box(system: (&MPoly, &MPoly), b: &RatBox) -> Result<RootCount, OracleError> {
    oracle_count_roots_with_guard(system, b, DEFAULT_DEGREE_GUARD)
}

pub fn oracle_count_roots_with_guard(system: (&MPoly, &MPoly), b: &RatBox, guard: u32) -> Result<RootCount, OracleError> {
    check_guard(&[system.0, system.1], guard)?;
    let pts = oracle_solve(&[system.0, system.1], b)?;
    Ok(RootCount { inside: pts.len(), on_boundary: pts.iter().filter(|p| p.on_boundary(b)).count() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn unit() -> RatBox {
        RatBox::from_f64(-1.0, 1.0, -1.0, 1.0)
    }

    fn cusp_pair() -> (MPoly, MPoly) {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)]);
        let q = p.derivative(Var::Z, 1);
        (p, q)
    }

    #[test]
    fn sturm_two_roots() {
        let roots = sturm_isolate(&UPoly::from_ints(&[-1, 0, 1]), &r(-2), &r(2));
        assert_eq!(roots.len(), 2);
        assert!(roots[0].hi() <= &r(0) && roots[0].lo() <= &r(-1) && &r(-1) <= roots[0].hi());
        assert!(roots[1].lo() >= &r(0) && roots[1].lo() <= &r(1) && &r(1) <= roots[1].hi());
    }

    #[test]
    fn sturm_no_real_roots() {
        assert!(sturm_isolate(&UPoly::from_ints(&[1, 0, 1]), &r(-10), &r(10)).is_empty());
    }

    #[test]
    fn sturm_after_squarefree_part() {
        let p = UPoly::from_ints(&[0, 0, 0, 4]).squarefree_part();
        assert_eq!(p, UPoly::from_ints(&[0, 1]));
        let roots = sturm_isolate(&p, &r(-1), &r(1));
        assert_eq!(roots.len(), 1);
        assert!(roots[0].lo() <= &r(0) && &r(0) <= roots[0].hi());
    }

    #[test]
    fn descartes_agrees_with_sturm() {
        // (x² − 2)(x − 1/2)(3x + 1)(x² + 1)(x − 1), with roots at a split point and an end
        let fs = [vec![-2, 0, 1], vec![-1, 2], vec![1, 3], vec![1, 0, 1], vec![-1, 1]];
        let p = fs.iter().fold(MPoly::one(), |acc, c| &acc * &UPoly::from_ints(c).to_mpoly(Var::X));
        let p = UPoly::from_mpoly(&p, Var::X).unwrap();
        let (lo, hi) = (r(-1), r(1));
        let a = sturm_isolate(&p, &lo, &hi);
        let b = isolate_real_roots(&p, &lo, &hi);
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        assert!(b[2].is_exact() && b[2].lo() == &r(1));
        let w = pow10(-20);
        for (mut u, mut v) in a.into_iter().zip(b) {
            u.refine(&w);
            v.refine(&w);
            assert!(u.lo() <= v.hi() && v.lo() <= u.hi());
        }
        assert!(isolate_real_roots(&UPoly::from_ints(&[1, 0, 1]), &r(-10), &r(10)).is_empty());
    }

    #[test]
    fn root_on_a_split_point_is_exact() {
        // x (2x − 1)(2x + 1) on [−1, 1] is first split at 0
        let p = UPoly::from_ints(&[0, -1, 0, 4]);
        let roots = isolate_real_roots(&p, &r(-1), &r(1));
        assert_eq!(roots.len(), 3);
        assert!(roots[1].is_exact() && roots[1].lo().is_zero());
        assert!(!roots[0].is_exact() && !roots[2].is_exact());
    }

    #[test]
    fn refinement_keeps_the_root() {
        // x² − 2 on [0, 2]
        let mut roots = sturm_isolate(&UPoly::from_ints(&[-2, 0, 1]), &r(0), &r(2));
        assert_eq!(roots.len(), 1);
        roots[0].refine(&pow10(-40));
        let (lo, hi) = (roots[0].lo().clone(), roots[0].hi().clone());
        assert!(&lo * &lo < r(2) && &hi * &hi > r(2));
        assert!(roots[0].width() <= pow10(-40));
    }

    #[test]
    fn squarefree_of_repeated_factors() {
        // (x − 1)² (x + 2)³
        let a = UPoly::from_ints(&[-1, 1]);
        let b = UPoly::from_ints(&[2, 1]);
        let mul = |p: &UPoly, q: &UPoly| UPoly::from_mpoly(&(&p.to_mpoly(Var::X) * &q.to_mpoly(Var::X)), Var::X).unwrap();
        let p = mul(&mul(&a, &a), &mul(&mul(&b, &b), &b));
        assert_eq!(p.squarefree_part(), mul(&a, &b));
        let roots = sturm_isolate(&p.squarefree_part(), &r(-3), &r(3));
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn cusp_singular_point() {
        let (p, q) = cusp_pair();
        let pts = oracle_singular_points(&p, &q, &unit()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, ExactKind::OrdinaryCusp);
        assert_eq!(pts[0].hessian_sign, Ordering::Equal);
        let (x, y) = pts[0].point.approx();
        assert!(x.abs() < 1e-25 && y.abs() < 1e-25);
    }

    #[test]
    fn node_singular_point() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 0, 0, 1)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 2), (2, 1, 0, 1), (-1, 0, 0, 1), (1, 0, 1, 0), (-1, 1, 0, 0)]);
        let pts = oracle_singular_points(&p, &q, &unit()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, ExactKind::Node);
        assert_eq!(pts[0].hessian_sign, Ordering::Less);
    }

    #[test]
    fn linear_curve_has_no_singular_points() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 1, 0, 0)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 1), (-5, 0, 0, 0)]);
        assert!(oracle_singular_points(&p, &q, &unit()).unwrap().is_empty());
    }

    #[test]
    fn degree_guard() {
        let f = MPoly::from_int_terms(&[(1, 18, 0, 0), (1, 0, 0, 2)]);
        let q = f.derivative(Var::Z, 1);
        let err = oracle_singular_points_with_guard(&f, &q, &unit(), 14).unwrap_err();
        assert_eq!(err, OracleError::DegreeGuardExceeded { degree: 18, guard: 14 });
    }

    #[test]
    fn root_counts() {
        let c = |a: &[(i64, u32, u32, u32)], b: &[(i64, u32, u32, u32)], bx: RatBox| {
            oracle_count_roots_in_box((&MPoly::from_int_terms(a), &MPoly::from_int_terms(b)), &bx).unwrap()
        };
        assert_eq!(c(&[(6, 1, 0, 0)], &[(9, 0, 1, 0)], unit()).inside, 1);
        let small = RatBox::from_f64(-0.1, 0.1, -0.1, 0.1);
        assert_eq!(c(&[(12, 2, 0, 0)], &[(54, 0, 1, 0)], small).inside, 1);
        let half = RatBox::from_f64(-0.5, 0.5, -0.5, 0.5);
        assert_eq!(c(&[(1, 2, 0, 0), (-1, 0, 0, 0)], &[(1, 0, 1, 0)], half).inside, 0);
    }

    #[test]
    fn boundary_roots_reported() {
        // x² − 1 = 0, y = 0 in [−1, 1]²: both roots sit on the edges
        let n = oracle_count_roots_in_box(
            (&MPoly::from_int_terms(&[(1, 2, 0, 0), (-1, 0, 0, 0)]), &MPoly::from_int_terms(&[(1, 0, 1, 0)])),
            &unit(),
        )
        .unwrap();
        assert_eq!(n, RootCount { inside: 2, on_boundary: 2 });
    }

    #[test]
    fn irrational_solutions_back_substitute() {
        // x² + y² = 1, x = y: two points (±1/√2, ±1/√2)
        let a = MPoly::from_int_terms(&[(1, 2, 0, 0), (1, 0, 2, 0), (-1, 0, 0, 0)]);
        let b = MPoly::from_int_terms(&[(1, 1, 0, 0), (-1, 0, 1, 0)]);
        let pts = oracle_solve(&[&a, &b], &unit()).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert!(p.x.width() <= pow10(-30));
            let (x, y) = p.approx();
            assert!((x.abs() - 0.5f64.sqrt()).abs() < 1e-15 && (x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn positive_definite_isolated_point() {
        // x² + y² has an isolated real point at the origin
        let f = MPoly::from_int_terms(&[(1, 2, 0, 0), (1, 0, 2, 0)]);
        let pts = singular_points_of(&f, &unit()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, ExactKind::Node);
        assert_eq!(pts[0].hessian_sign, Ordering::Greater);
    }

    #[test]
    fn tacnode_is_other() {
        // y² − x⁴: Hessian degenerate and the cubic form vanishes
        let f = MPoly::from_int_terms(&[(1, 0, 2, 0), (-1, 4, 0, 0)]);
        let pts = singular_points_of(&f, &unit()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].kind, ExactKind::Other);
    }
}
