//! Endpoint scalars with directed rounding.
//!
//! `f64` rounds to nearest in hardware; the directed results are recovered
//! exactly from error-free transformations (TwoSum, FMA residuals), so no
//! global rounding mode is ever touched and concurrent evaluators cannot
//! interfere.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Rounding direction for a single operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Down,
    Up,
}

/// Scalar type usable as an interval endpoint.
///
/// Every binary operation takes the rounding direction; results are the
/// exact value rounded in that direction (or a bound beyond it).
pub trait Float: Clone + Debug + PartialEq + PartialOrd + Send + Sync + 'static {
    /// Mantissa bits carried by values made with `prec`.
    fn precision_bits(prec: u32) -> u32;
    fn zero(prec: u32) -> Self;
    fn from_i64(v: i64, prec: u32) -> Self;
    fn from_f64(v: f64, prec: u32) -> Self;
    fn from_rational(q: &BigRational, prec: u32, dir: Dir) -> Self;
    fn infinity(negative: bool, prec: u32) -> Self;
    fn to_f64(&self, dir: Dir) -> f64;
    /// Exact value when finite.
    fn to_rational(&self) -> Option<BigRational>;
    fn is_finite(&self) -> bool;
    fn is_nan(&self) -> bool;
    fn add(&self, o: &Self, dir: Dir) -> Self;
    fn sub(&self, o: &Self, dir: Dir) -> Self;
    fn mul(&self, o: &Self, dir: Dir) -> Self;
    fn div(&self, o: &Self, dir: Dir) -> Self;
    fn sqrt(&self, dir: Dir) -> Self;
    fn neg(&self) -> Self;
    /// Multiplication by a power of two, exact barring overflow.
    fn ldexp(&self, k: i32, dir: Dir) -> Self;
    /// A representable point of `[lo, hi]` close to its midpoint.
    fn midpoint(lo: &Self, hi: &Self) -> Self;
    fn prec(&self) -> u32;

    fn is_zero(&self) -> bool {
        *self == Self::zero(self.prec())
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero(self.prec())
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero(self.prec())
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
    fn min_of(a: &Self, b: &Self) -> Self {
        if b < a {
            b.clone()
        } else {
            a.clone()
        }
    }
    fn max_of(a: &Self, b: &Self) -> Self {
        if b > a {
            b.clone()
        } else {
            a.clone()
        }
    }
    fn cmp_total(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
}

#[inline]
fn bump(v: f64, err_sign: Ordering, dir: Dir) -> f64 {
    match (dir, err_sign) {
        (Dir::Up, Ordering::Greater) => v.next_up(),
        (Dir::Down, Ordering::Less) => v.next_down(),
        _ => v,
    }
}

#[inline]
fn sign(v: f64) -> Ordering {
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Handles results that overflowed or became NaN.
#[inline]
fn settle(v: f64, dir: Dir) -> f64 {
    if v.is_nan() {
        match dir {
            Dir::Down => f64::NEG_INFINITY,
            Dir::Up => f64::INFINITY,
        }
    } else {
        v
    }
}

impl Float for f64 {
    fn precision_bits(_prec: u32) -> u32 {
        53
    }
    fn zero(_: u32) -> Self {
        0.0
    }
    fn from_i64(v: i64, _: u32) -> Self {
        let f = v as f64;
        // exact for |v| < 2^53, which is all callers use
        debug_assert_eq!(f as i64, v);
        f
    }
    fn from_f64(v: f64, _: u32) -> Self {
        v
    }
    fn from_rational(q: &BigRational, _: u32, dir: Dir) -> Self {
        rational_to_f64(q, dir)
    }
    fn infinity(negative: bool, _: u32) -> Self {
        if negative {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }
    fn to_f64(&self, _: Dir) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_nan(&self) -> bool {
        f64::is_nan(*self)
    }
    #[inline]
    fn add(&self, o: &Self, dir: Dir) -> Self {
        let (a, b) = (*self, *o);
        let s = a + b;
        if !s.is_finite() {
            return settle(s, dir);
        }
        // TwoSum
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        bump(s, sign(err), dir)
    }
    #[inline]
    fn sub(&self, o: &Self, dir: Dir) -> Self {
        self.add(&-*o, dir)
    }
    #[inline]
    fn mul(&self, o: &Self, dir: Dir) -> Self {
        let (a, b) = (*self, *o);
        let p = a * b;
        if !p.is_finite() {
            return settle(p, dir);
        }
        if p == 0.0 {
            if a == 0.0 || b == 0.0 {
                return 0.0;
            }
            // underflow to zero
            let neg = (a < 0.0) != (b < 0.0);
            return match (dir, neg) {
                (Dir::Up, false) => f64::from_bits(1),
                (Dir::Down, true) => -f64::from_bits(1),
                _ => 0.0,
            };
        }
        let err = a.mul_add(b, -p);
        if err == 0.0 && p.abs() < f64::MIN_POSITIVE {
            // subnormal products: the FMA residual may itself underflow
            return bump(bump(p, Ordering::Greater, dir), Ordering::Less, dir);
        }
        bump(p, sign(err), dir)
    }
    #[inline]
    fn div(&self, o: &Self, dir: Dir) -> Self {
        let (a, b) = (*self, *o);
        let q = a / b;
        if !q.is_finite() || b.is_infinite() {
            return settle(q, dir);
        }
        if a == 0.0 {
            return 0.0;
        }
        if q.abs() < f64::MIN_POSITIVE {
            return bump(bump(q, Ordering::Greater, dir), Ordering::Less, dir);
        }
        // a - q b: positive means the true quotient exceeds q when b > 0
        let r = (-q).mul_add(b, a);
        let s = if b > 0.0 { sign(r) } else { sign(r).reverse() };
        bump(q, s, dir)
    }
    fn sqrt(&self, dir: Dir) -> Self {
        if *self < 0.0 {
            return f64::NAN;
        }
        let s = f64::sqrt(*self);
        if !s.is_finite() || s == 0.0 {
            return s;
        }
        let r = (-s).mul_add(s, *self);
        bump(s, sign(r), dir)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn ldexp(&self, k: i32, dir: Dir) -> Self {
        let f = 2f64.powi(k);
        self.mul(&f, dir)
    }
    fn midpoint(lo: &Self, hi: &Self) -> Self {
        if lo.is_infinite() || hi.is_infinite() {
            return match (lo.is_infinite(), hi.is_infinite()) {
                (true, true) => 0.0,
                (true, false) => (hi - 1.0).min(-1.0).min(*hi),
                _ => (lo + 1.0).max(1.0).max(*lo),
            };
        }
        let m = 0.5 * lo + 0.5 * hi;
        m.clamp(*lo, *hi)
    }
    fn prec(&self) -> u32 {
        53
    }
}

/// Nearest-below or nearest-above `f64` of an exact rational.
pub fn rational_to_f64(q: &BigRational, dir: Dir) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let approx = q.to_f64().unwrap_or(if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY });
    if !approx.is_finite() {
        return match dir {
            Dir::Down if q.is_positive() => f64::MAX,
            Dir::Up if q.is_negative() => f64::MIN,
            _ => approx,
        };
    }
    let exact = BigRational::from_float(approx).expect("finite");
    match (dir, exact.cmp(q)) {
        (Dir::Down, Ordering::Greater) => approx.next_down(),
        (Dir::Up, Ordering::Less) => approx.next_up(),
        _ => approx,
    }
}

/// `m * 2^e` as an exact rational.
pub(crate) fn dyadic_rational(m: &BigInt, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(m << (e as usize))
    } else {
        BigRational::new(m.clone(), BigInt::from(1) << ((-e) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(v: f64) -> BigRational {
        BigRational::from_float(v).unwrap()
    }

    proptest! {
        #[test]
        fn directed_ops_bracket_the_exact_result(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (qa, qb) = (exact(a), exact(b));
            let checks: [(fn(&f64, &f64, Dir) -> f64, BigRational); 3] = [
                (<f64 as Float>::add, &qa + &qb),
                (<f64 as Float>::sub, &qa - &qb),
                (<f64 as Float>::mul, &qa * &qb),
            ];
            for (op, truth) in checks.iter() {
                let lo = op(&a, &b, Dir::Down);
                let hi = op(&a, &b, Dir::Up);
                prop_assert!(exact(lo) <= *truth && *truth <= exact(hi));
                prop_assert!(hi == lo || hi == lo.next_up());
            }
            if b != 0.0 {
                let truth = &qa / &qb;
                let lo = Float::div(&a, &b, Dir::Down);
                let hi = Float::div(&a, &b, Dir::Up);
                prop_assert!(exact(lo) <= truth && truth <= exact(hi));
            }
            let r = a.abs();
            let (lo, hi) = (Float::sqrt(&r, Dir::Down), Float::sqrt(&r, Dir::Up));
            prop_assert!(exact(lo) * exact(lo) <= exact(r) && exact(r) <= exact(hi) * exact(hi));
        }
    }

    #[test]
    fn exact_operations_do_not_widen() {
        assert_eq!(Float::add(&1.0, &2.0, Dir::Up), 3.0);
        assert_eq!(Float::mul(&0.5, &4.0, Dir::Down), 2.0);
        assert_eq!(Float::div(&1.0, &4.0, Dir::Up), 0.25);
        let third = BigRational::new(1.into(), 3.into());
        let (lo, hi) = (rational_to_f64(&third, Dir::Down), rational_to_f64(&third, Dir::Up));
        assert_eq!(lo.next_up(), hi);
        assert!(exact(lo) < third && third < exact(hi));
    }
}
