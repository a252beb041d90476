//! Software binary floating point with a runtime mantissa width.
//!
//! A finite value is `mant * 2^exp` with `mant` odd (or zero). Every
//! operation computes the exact result (or enough of it to decide the
//! rounding) and rounds it to `prec` bits in the requested direction.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::float::{dyadic_rational, rational_to_f64, Dir, Float};

#[derive(Clone, Debug)]
pub enum BigFloat {
    Finite { mant: BigInt, exp: i64, prec: u32 },
    Inf { neg: bool, prec: u32 },
}

fn bits(m: &BigInt) -> i64 {
    m.bits() as i64
}

impl BigFloat {
    fn finite(mant: BigInt, exp: i64, prec: u32) -> Self {
        if mant.is_zero() {
            return BigFloat::Finite { mant, exp: 0, prec };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            BigFloat::Finite { mant: mant >> tz as usize, exp: exp + tz as i64, prec }
        } else {
            BigFloat::Finite { mant, exp, prec }
        }
    }

    /// Rounds the exact value `mant * 2^exp` to `prec` bits.
    fn round(mant: BigInt, exp: i64, prec: u32, dir: Dir) -> Self {
        let nb = bits(&mant);
        let p = prec as i64;
        if nb <= p {
            return Self::finite(mant, exp, prec);
        }
        let shift = (nb - p) as usize;
        let floor = &mant >> shift; // arithmetic shift: rounds toward -inf
        let inexact = (&floor << shift) != mant;
        let q = if inexact && dir == Dir::Up { floor + 1 } else { floor };
        Self::finite(q, exp + shift as i64, prec)
    }

    fn parts(&self) -> Option<(&BigInt, i64)> {
        match self {
            BigFloat::Finite { mant, exp, .. } => Some((mant, *exp)),
            BigFloat::Inf { .. } => None,
        }
    }

    fn signum(&self) -> i32 {
        match self {
            BigFloat::Finite { mant, .. } => match mant.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
            BigFloat::Inf { neg, .. } => {
                if *neg {
                    -1
                } else {
                    1
                }
            }
        }
    }

    fn dir_inf(dir: Dir, prec: u32) -> Self {
        BigFloat::Inf { neg: dir == Dir::Down, prec }
    }

    fn quotient(num: &BigInt, den: &BigInt, exp: i64, prec: u32, dir: Dir) -> Self {
        // |num / den| gets at least prec + 2 significant bits
        let s = (prec as i64 + 2 + bits(den) - bits(num)).max(0) as usize;
        let shifted = num << s;
        let (q, r) = shifted.div_mod_floor(den);
        // ceil at a finer grid then again at `prec`: the grids are nested
        let q = if !r.is_zero() && dir == Dir::Up { q + 1 } else { q };
        Self::round(q, exp - s as i64, prec, dir)
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        match (self, other) {
            (BigFloat::Inf { .. }, BigFloat::Inf { .. }) => Some(Ordering::Equal),
            (BigFloat::Inf { neg, .. }, _) => Some(if *neg { Ordering::Less } else { Ordering::Greater }),
            (_, BigFloat::Inf { neg, .. }) => Some(if *neg { Ordering::Greater } else { Ordering::Less }),
            (
                BigFloat::Finite { mant: ma, exp: ea, .. },
                BigFloat::Finite { mant: mb, exp: eb, .. },
            ) => {
                if sa == 0 {
                    return Some(Ordering::Equal);
                }
                let (ta, tb) = (bits(ma) + ea, bits(mb) + eb);
                let mag = if ta != tb {
                    ta.cmp(&tb)
                } else {
                    let e = (*ea).min(*eb);
                    let a = ma.abs() << (ea - e) as usize;
                    let b = mb.abs() << (eb - e) as usize;
                    a.cmp(&b)
                };
                Some(if sa > 0 { mag } else { mag.reverse() })
            }
        }
    }
}

impl Float for BigFloat {
    fn precision_bits(prec: u32) -> u32 {
        prec
    }
    fn zero(prec: u32) -> Self {
        BigFloat::Finite { mant: BigInt::zero(), exp: 0, prec }
    }
    fn from_i64(v: i64, prec: u32) -> Self {
        Self::round(BigInt::from(v), 0, prec, Dir::Down)
    }
    fn from_f64(v: f64, prec: u32) -> Self {
        if v.is_infinite() {
            return BigFloat::Inf { neg: v < 0.0, prec };
        }
        let q = BigRational::from_float(v).expect("finite f64");
        Self::from_rational(&q, prec.max(53), Dir::Down)
    }
    fn from_rational(q: &BigRational, prec: u32, dir: Dir) -> Self {
        let (n, d) = (q.numer(), q.denom());
        if d.is_one() {
            return Self::round(n.clone(), 0, prec, dir);
        }
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz as usize).is_one() {
            return Self::round(n.clone(), -(tz as i64), prec, dir);
        }
        Self::quotient(n, d, 0, prec, dir)
    }
    fn infinity(negative: bool, prec: u32) -> Self {
        BigFloat::Inf { neg: negative, prec }
    }
    fn to_f64(&self, dir: Dir) -> f64 {
        match self {
            BigFloat::Inf { neg, .. } => {
                if *neg {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            BigFloat::Finite { mant, exp, .. } => rational_to_f64(&dyadic_rational(mant, *exp), dir),
        }
    }
    fn to_rational(&self) -> Option<BigRational> {
        self.parts().map(|(m, e)| dyadic_rational(m, e))
    }
    fn is_finite(&self) -> bool {
        matches!(self, BigFloat::Finite { .. })
    }
    fn is_nan(&self) -> bool {
        false
    }
    fn add(&self, o: &Self, dir: Dir) -> Self {
        let prec = self.prec().max(o.prec());
        match (self.parts(), o.parts()) {
            (None, None) => {
                if self.signum() == o.signum() {
                    self.clone()
                } else {
                    Self::dir_inf(dir, prec)
                }
            }
            (None, _) => self.clone(),
            (_, None) => o.clone(),
            (Some((ma, ea)), Some((mb, eb))) => {
                if ma.is_zero() {
                    return Self::round(mb.clone(), eb, prec, dir);
                }
                if mb.is_zero() {
                    return Self::round(ma.clone(), ea, prec, dir);
                }
                // order so that `a` holds the larger top bit
                let (ma, ea, mb, eb) = if bits(ma) + ea >= bits(mb) + eb {
                    (ma, ea, mb, eb)
                } else {
                    (mb, eb, ma, ea)
                };
                let k = prec as i64 + 2;
                let top_b = bits(mb) + eb;
                let low_a = ea;
                if top_b < low_a - k {
                    // `b` only acts as a sticky bit below the rounding position
                    let shifted = (ma << k as usize) + mb.signum();
                    return Self::round(shifted, ea - k, prec, dir);
                }
                let e = ea.min(eb);
                let sum = (ma << (ea - e) as usize) + (mb << (eb - e) as usize);
                Self::round(sum, e, prec, dir)
            }
        }
    }
    fn sub(&self, o: &Self, dir: Dir) -> Self {
        self.add(&o.neg(), dir)
    }
    fn mul(&self, o: &Self, dir: Dir) -> Self {
        let prec = self.prec().max(o.prec());
        match (self.parts(), o.parts()) {
            (Some((ma, ea)), Some((mb, eb))) => Self::round(ma * mb, ea + eb, prec, dir),
            _ => {
                let s = self.signum() * o.signum();
                if s == 0 {
                    Self::zero(prec)
                } else {
                    BigFloat::Inf { neg: s < 0, prec }
                }
            }
        }
    }
    fn div(&self, o: &Self, dir: Dir) -> Self {
        let prec = self.prec().max(o.prec());
        match (self.parts(), o.parts()) {
            (Some((ma, ea)), Some((mb, eb))) => {
                if mb.is_zero() {
                    if ma.is_zero() {
                        return Self::dir_inf(dir, prec);
                    }
                    return BigFloat::Inf { neg: ma.is_negative(), prec };
                }
                // keep the denominator positive for floor semantics
                let (n, d) = if mb.is_negative() { (-ma, -mb) } else { (ma.clone(), mb.clone()) };
                Self::quotient(&n, &d, ea - eb, prec, dir)
            }
            (Some(_), None) => Self::zero(prec),
            (None, Some(_)) => {
                let s = if o.signum() < 0 { -self.signum() } else { self.signum() };
                BigFloat::Inf { neg: s < 0, prec }
            }
            (None, None) => Self::dir_inf(dir, prec),
        }
    }
    fn sqrt(&self, dir: Dir) -> Self {
        let prec = self.prec();
        match self {
            BigFloat::Inf { neg: false, .. } => self.clone(),
            BigFloat::Inf { neg: true, .. } => Self::dir_inf(dir, prec),
            BigFloat::Finite { mant, exp, .. } => {
                if mant.is_zero() {
                    return self.clone();
                }
                assert!(mant.is_positive(), "sqrt of negative BigFloat");
                let want = 2 * prec as i64 + 4;
                let mut t = (want - bits(mant)).max(0);
                if (exp - t) % 2 != 0 {
                    t += 1;
                }
                let m = mant << t as usize;
                let e = exp - t;
                let r = m.sqrt();
                let inexact = &r * &r != m;
                let r = if inexact && dir == Dir::Up { r + 1 } else { r };
                Self::round(r, e / 2, prec, dir)
            }
        }
    }
    fn neg(&self) -> Self {
        match self {
            BigFloat::Finite { mant, exp, prec } => BigFloat::Finite { mant: -mant, exp: *exp, prec: *prec },
            BigFloat::Inf { neg, prec } => BigFloat::Inf { neg: !neg, prec: *prec },
        }
    }
    fn ldexp(&self, k: i32, _dir: Dir) -> Self {
        match self {
            BigFloat::Finite { mant, exp, prec } => {
                BigFloat::Finite { mant: mant.clone(), exp: exp + k as i64, prec: *prec }
            }
            inf => inf.clone(),
        }
    }
    fn midpoint(lo: &Self, hi: &Self) -> Self {
        let prec = lo.prec().max(hi.prec());
        match (lo.parts(), hi.parts()) {
            (Some((ma, ea)), Some((mb, eb))) => {
                let e = ea.min(eb);
                let sum = (ma << (ea - e) as usize) + (mb << (eb - e) as usize);
                let m = Self::round(sum, e - 1, prec, Dir::Down);
                if m < *lo {
                    lo.clone()
                } else if m > *hi {
                    hi.clone()
                } else {
                    m
                }
            }
            (None, None) => Self::zero(prec),
            (None, Some(_)) => {
                let c = hi.sub(&Self::from_i64(1, prec), Dir::Down).abs();
                Self::min_of(&c.neg(), hi)
            }
            (Some(_), None) => {
                let c = lo.add(&Self::from_i64(1, prec), Dir::Up).abs();
                Self::max_of(&c, lo)
            }
        }
    }
    fn prec(&self) -> u32 {
        match self {
            BigFloat::Finite { prec, .. } | BigFloat::Inf { prec, .. } => *prec,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn val(b: &BigFloat) -> BigRational {
        b.to_rational().unwrap()
    }

    proptest! {
        #[test]
        fn directed_ops_bracket_exact(an in -10_000i64..10_000, ad in 1i64..1000, bn in -10_000i64..10_000, bd in 1i64..1000, prec in 8u32..140) {
            let (qa, qb) = (q(an, ad), q(bn, bd));
            let lo_a = BigFloat::from_rational(&qa, prec, Dir::Down);
            let hi_a = BigFloat::from_rational(&qa, prec, Dir::Up);
            prop_assert!(val(&lo_a) <= qa && qa <= val(&hi_a));
            let a = lo_a;
            let b = BigFloat::from_rational(&qb, prec, Dir::Up);
            let (ea, eb) = (val(&a), val(&b));
            let cases: Vec<(BigFloat, BigFloat, BigRational)> = vec![
                (a.add(&b, Dir::Down), a.add(&b, Dir::Up), &ea + &eb),
                (a.sub(&b, Dir::Down), a.sub(&b, Dir::Up), &ea - &eb),
                (a.mul(&b, Dir::Down), a.mul(&b, Dir::Up), &ea * &eb),
            ];
            for (lo, hi, t) in cases {
                prop_assert!(val(&lo) <= t && t <= val(&hi));
            }
            if !eb.is_zero() {
                let t = &ea / &eb;
                prop_assert!(val(&a.div(&b, Dir::Down)) <= t && t <= val(&a.div(&b, Dir::Up)));
            }
            let r = a.abs();
            let (lo, hi) = (r.sqrt(Dir::Down), r.sqrt(Dir::Up));
            let er = val(&r);
            prop_assert!(val(&lo) * val(&lo) <= er && er <= val(&hi) * val(&hi));
        }
    }

    #[test]
    fn precision_is_respected() {
        let third = q(1, 3);
        for prec in [53u32, 128, 256] {
            let lo = BigFloat::from_rational(&third, prec, Dir::Down);
            let hi = BigFloat::from_rational(&third, prec, Dir::Up);
            let w = val(&hi) - val(&lo);
            // one unit in the last place of 1/3 at `prec` bits
            let ulp = BigRational::new(1.into(), BigInt::one() << (prec as usize + 1));
            assert_eq!(w, ulp);
        }
        let a = BigFloat::from_i64(1, 128);
        let tiny = BigFloat::from_rational(&BigRational::new(1.into(), BigInt::one() << 1000usize), 128, Dir::Down);
        let up = a.add(&tiny, Dir::Up);
        let down = a.add(&tiny, Dir::Down);
        assert_eq!(down, a);
        assert!(up > a);
        assert_eq!(val(&up) - val(&a), BigRational::new(1.into(), BigInt::one() << 127usize));
    }

    #[test]
    fn ordering_and_infinities() {
        let p = 64;
        let a = BigFloat::from_i64(-3, p);
        let b = BigFloat::from_rational(&q(1, 1024), p, Dir::Down);
        assert!(a < b);
        assert!(BigFloat::infinity(true, p) < a);
        assert!(BigFloat::infinity(false, p) > b);
        assert_eq!(BigFloat::from_i64(6, p), BigFloat::from_i64(3, p).ldexp(1, Dir::Down));
        assert_eq!(a.to_f64(Dir::Down), -3.0);
    }
}
