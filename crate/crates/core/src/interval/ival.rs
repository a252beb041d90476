use std::fmt;

use num_rational::BigRational;

use super::float::{Dir, Float};

/// Closed interval `[lo, hi]` with outward-rounded arithmetic.
///
/// Endpoints may be infinite; they are never NaN and `lo <= hi` always.
/// Intersections that come out empty are reported as `None`.
#[derive(Clone, PartialEq)]
pub struct Interval<F: Float> {
    lo: F,
    hi: F,
}

impl<F: Float> fmt::Debug for Interval<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo.to_f64(Dir::Down), self.hi.to_f64(Dir::Up))
    }
}

impl<F: Float> Interval<F> {
    pub fn new(lo: F, hi: F) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan(), "NaN interval endpoint");
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(v: F) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(F::zero(prec))
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::point(F::from_i64(v, prec))
    }

    pub fn from_f64s(lo: f64, hi: f64, prec: u32) -> Self {
        Self::new(F::from_f64(lo, prec), F::from_f64(hi, prec))
    }

    /// Smallest enclosure of an exact rational.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Interval {
            lo: F::from_rational(q, prec, Dir::Down),
            hi: F::from_rational(q, prec, Dir::Up),
        }
    }

    pub fn from_rationals(lo: &BigRational, hi: &BigRational, prec: u32) -> Self {
        Self::new(F::from_rational(lo, prec, Dir::Down), F::from_rational(hi, prec, Dir::Up))
    }

    pub fn entire(prec: u32) -> Self {
        Interval { lo: F::infinity(true, prec), hi: F::infinity(false, prec) }
    }

    pub fn lo(&self) -> &F {
        &self.lo
    }

    pub fn hi(&self) -> &F {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, v: &F) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        match (self.lo.to_rational(), self.hi.to_rational()) {
            (Some(l), Some(h)) => l <= *q && *q <= h,
            (None, Some(h)) => self.lo.is_negative() && *q <= h,
            (Some(l), None) => l <= *q && self.hi.is_positive(),
            (None, None) => self.lo.is_negative() && self.hi.is_positive(),
        }
    }

    /// Strictly positive everywhere.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn subset_of(&self, o: &Self) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    /// Contained in the interior of `o`.
    pub fn interior_of(&self, o: &Self) -> bool {
        o.lo < self.lo && self.hi < o.hi
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = F::max_of(&self.lo, &o.lo);
        let hi = F::min_of(&self.hi, &o.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn hull(&self, o: &Self) -> Self {
        Interval { lo: F::min_of(&self.lo, &o.lo), hi: F::max_of(&self.hi, &o.hi) }
    }

    /// Width rounded up.
    pub fn width(&self) -> F {
        self.hi.sub(&self.lo, Dir::Up)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64(Dir::Up)
    }

    pub fn mid(&self) -> F {
        F::midpoint(&self.lo, &self.hi)
    }

    /// Largest absolute value.
    pub fn mag(&self) -> F {
        F::max_of(&self.lo.abs(), &self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> F {
        if self.contains_zero() {
            F::zero(self.prec())
        } else {
            F::min_of(&self.lo.abs(), &self.hi.abs())
        }
    }

    pub fn neg(&self) -> Self {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Interval { lo: self.lo.add(&o.lo, Dir::Down), hi: self.hi.add(&o.hi, Dir::Up) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Interval { lo: self.lo.sub(&o.hi, Dir::Down), hi: self.hi.sub(&o.lo, Dir::Up) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b, c, d) = (&self.lo, &self.hi, &o.lo, &o.hi);
        if !a.is_negative() && !c.is_negative() {
            return Interval { lo: a.mul(c, Dir::Down), hi: b.mul(d, Dir::Up) };
        }
        if !b.is_positive() && !d.is_positive() {
            return Interval { lo: b.mul(d, Dir::Down), hi: a.mul(c, Dir::Up) };
        }
        let cands = [(a, c), (a, d), (b, c), (b, d)];
        let mut lo = cands[0].0.mul(cands[0].1, Dir::Down);
        let mut hi = cands[0].0.mul(cands[0].1, Dir::Up);
        for (x, y) in &cands[1..] {
            lo = F::min_of(&lo, &x.mul(y, Dir::Down));
            hi = F::max_of(&hi, &x.mul(y, Dir::Up));
        }
        Interval { lo, hi }
    }

    /// Multiplication by a point value.
    pub fn scale(&self, s: &F) -> Self {
        self.mul(&Interval::point(s.clone()))
    }

    pub fn sqr(&self) -> Self {
        if self.contains_zero() {
            let m = self.mag();
            Interval { lo: F::zero(self.prec()), hi: m.mul(&m, Dir::Up) }
        } else {
            let (l, h) = (self.mig(), self.mag());
            Interval { lo: l.mul(&l, Dir::Down), hi: h.mul(&h, Dir::Up) }
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        match n {
            0 => Self::from_i64(1, self.prec()),
            1 => self.clone(),
            _ if n.is_multiple_of(2) => self.sqr().powi(n / 2),
            _ => self.mul(&self.powi(n - 1)),
        }
    }

    /// Division; the result is the whole line when `o` contains zero.
    pub fn div(&self, o: &Self) -> Self {
        if o.contains_zero() {
            return Self::entire(self.prec().max(o.prec()));
        }
        let (a, b, c, d) = (&self.lo, &self.hi, &o.lo, &o.hi);
        let cands = [(a, c), (a, d), (b, c), (b, d)];
        let mut lo = cands[0].0.div(cands[0].1, Dir::Down);
        let mut hi = cands[0].0.div(cands[0].1, Dir::Up);
        for (x, y) in &cands[1..] {
            lo = F::min_of(&lo, &x.div(y, Dir::Down));
            hi = F::max_of(&hi, &x.div(y, Dir::Up));
        }
        Interval { lo, hi }
    }

    /// Square root of the non-negative part; `None` if entirely negative.
    pub fn sqrt(&self) -> Option<Self> {
        if self.hi.is_negative() {
            return None;
        }
        let lo = if self.lo.is_positive() { self.lo.sqrt(Dir::Down) } else { F::zero(self.prec()) };
        Some(Interval { lo, hi: self.hi.sqrt(Dir::Up) })
    }

    pub fn half(&self) -> Self {
        Interval { lo: self.lo.ldexp(-1, Dir::Down), hi: self.hi.ldexp(-1, Dir::Up) }
    }

    /// Symmetric enlargement about the midpoint by `factor` of the radius.
    pub fn inflate(&self, rel: f64) -> Self {
        let p = self.prec();
        let w = self.width().mul(&F::from_f64(rel * 0.5, p), Dir::Up);
        Interval { lo: self.lo.sub(&w, Dir::Down), hi: self.hi.add(&w, Dir::Up) }
    }

    /// Splits at the midpoint.
    pub fn bisect(&self) -> (Self, Self) {
        let m = self.mid();
        (Interval { lo: self.lo.clone(), hi: m.clone() }, Interval { lo: m, hi: self.hi.clone() })
    }

    /// Converts to another endpoint type, rounding outward.
    pub fn convert<G: Float>(&self, prec: u32) -> Interval<G> {
        let conv = |v: &F, dir: Dir| -> G {
            match v.to_rational() {
                Some(q) => G::from_rational(&q, prec, dir),
                None => G::infinity(v.is_negative(), prec),
            }
        };
        Interval { lo: conv(&self.lo, Dir::Down), hi: conv(&self.hi, Dir::Up) }
    }

    pub fn to_f64_bounds(&self) -> (f64, f64) {
        (self.lo.to_f64(Dir::Down), self.hi.to_f64(Dir::Up))
    }
}
