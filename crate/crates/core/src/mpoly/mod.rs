//! Exact sparse polynomials in `x, y, z` over the rationals.
//!
//! Everything in this module is exact. Interval code downstream only ever
//! sees these polynomials through [`crate::interval::CompiledPoly`].

mod bivariate;
mod json;
mod subres;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use json::{PolyFile, PolyFormatError};
pub use subres::{resultant_z, subresultant_chain, SubresultantData};


/// Exponent triple `(ex, ey, ez)`.
pub type Exponent = [u32; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("degree too low for the subresultant chain up to index 2 (deg_z P = {p}, deg_z Q = {q})")]
    DegreeTooLow { p: u32, q: u32 },
    #[error("point has {given} coordinates but the polynomial needs {needed}")]
    ArityMismatch { given: usize, needed: usize },
    #[error("equal z-degrees 2 need a constant leading coefficient in Q")]
    NonConstantLeadingCoefficient,
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
}

/// Sparse polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct MPoly {
    terms: BTreeMap<Exponent, BigRational>,
    degs: [u32; 3],
}

impl MPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_terms([([0, 0, 0], c)])
    }

    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v.index()] = 1;
        Self::from_terms([(e, BigRational::one())])
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }
    pub fn y() -> Self {
        Self::var(Var::Y)
    }
    pub fn z() -> Self {
        Self::var(Var::Z)
    }

    /// Builds a polynomial from (exponent, coefficient) pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, BigRational)>>(terms: I) -> Self {
        let mut map: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert_with(BigRational::zero) += c;
        }
        Self::from_map(map)
    }

    /// Integer-coefficient convenience constructor: `[(c, ex, ey, ez)]`.
    pub fn from_int_terms(terms: &[(i64, u32, u32, u32)]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(c, a, b, d)| ([a, b, d], BigRational::from_integer(c.into()))),
        )
    }

    fn from_map(mut map: BTreeMap<Exponent, BigRational>) -> Self {
        map.retain(|_, c| !c.is_zero());
        let mut degs = [0; 3];
        for e in map.keys() {
            for i in 0..3 {
                degs[i] = degs[i].max(e[i]);
            }
        }
        MPoly { terms: map, degs }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == [0, 0, 0])
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    /// Degree in `v`; the zero polynomial has degree 0.
    pub fn degree(&self, v: Var) -> u32 {
        self.degs[v.index()]
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    /// Whether only `x` and `y` occur.
    pub fn is_bivariate(&self) -> bool {
        self.degs[2] == 0
    }

    pub fn coeff(&self, e: &Exponent) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
            degs: self.degs,
        }
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut acc = MPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative of the given order with respect to `v`.
    pub fn derivative(&self, v: Var, order: u32) -> MPoly {
        let i = v.index();
        let terms = self.terms.iter().filter_map(|(e, c)| {
            if e[i] < order {
                return None;
            }
            let mut falling = BigInt::one();
            for k in 0..order {
                falling *= e[i] - k;
            }
            let mut ne = *e;
            ne[i] -= order;
            Some((ne, c * BigRational::from_integer(falling)))
        });
        MPoly::from_terms(terms)
    }

    /// Mixed partial `d^(i+j) / dx^i dy^j`.
    pub fn dxy(&self, i: u32, j: u32) -> MPoly {
        self.derivative(Var::X, i).derivative(Var::Y, j)
    }

    /// Coefficient of `z^k`, as a polynomial in `(x, y)`.
    pub fn coeff_z(&self, k: u32) -> MPoly {
        MPoly::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| e[2] == k)
                .map(|(e, c)| ([e[0], e[1], 0], c.clone())),
        )
    }

    /// Leading coefficient with respect to `z`.
    pub fn leading_coeff_z(&self) -> MPoly {
        self.coeff_z(self.degree(Var::Z))
    }

    /// Exact evaluation. A pair evaluates a bivariate polynomial; a triple
    /// evaluates anything.
    pub fn eval_exact(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        let needed = if self.is_bivariate() { 2 } else { 3 };
        if point.len() < needed || point.len() > 3 {
            return Err(PolyError::ArityMismatch { given: point.len(), needed });
        }
        let zero = BigRational::zero();
        let coords = [
            &point[0],
            &point[1],
            point.get(2).unwrap_or(&zero),
        ];
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..3 {
                if e[i] > 0 {
                    t *= num_traits::pow(coords[i].clone(), e[i] as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitutes `x -> xs`, `y -> ys`, `z -> zs`.
    pub fn compose(&self, xs: &MPoly, ys: &MPoly, zs: &MPoly) -> MPoly {
        let mut pows: [Vec<MPoly>; 3] = [vec![MPoly::one()], vec![MPoly::one()], vec![MPoly::one()]];
        let subs = [xs, ys, zs];
        for i in 0..3 {
            for k in 1..=self.degs[i] as usize {
                let next = &pows[i][k - 1] * subs[i];
                pows[i].push(next);
            }
        }
        let mut acc = MPoly::zero();
        for (e, c) in &self.terms {
            let t = &(&pows[0][e[0] as usize] * &pows[1][e[1] as usize]) * &pows[2][e[2] as usize];
            acc = &acc + &t.scale(c);
        }
        acc
    }

    /// Multiplies by the least common multiple of the denominators, giving
    /// an integer polynomial; returns the multiplier too.
    pub fn clear_denominators(&self) -> (MPoly, BigInt) {
        let mut l = BigInt::one();
        for c in self.terms.values() {
            l = num_integer::Integer::lcm(&l, c.denom());
        }
        (self.scale(&BigRational::from_integer(l.clone())), l)
    }

    pub fn max_abs_coeff(&self) -> BigRational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
    }

    /// Swaps the roles of `x` and `y`.
    pub fn swap_xy(&self) -> MPoly {
        MPoly::from_terms(self.terms.iter().map(|(e, c)| ([e[1], e[0], e[2]], c.clone())))
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut map = self.terms.clone();
        for (e, c) in &rhs.terms {
            *map.entry(*e).or_insert_with(BigRational::zero) += c;
        }
        MPoly::from_map(map)
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        let mut map = self.terms.clone();
        for (e, c) in &rhs.terms {
            *map.entry(*e).or_insert_with(BigRational::zero) -= c;
        }
        MPoly::from_map(map)
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            degs: self.degs,
        }
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        let mut map: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *map.entry(e).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        MPoly::from_map(map)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MPoly {
            type Output = MPoly;
            fn $m(self, rhs: MPoly) -> MPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (i, name) in ["x", "y", "z"].iter().enumerate() {
                match e[i] {
                    0 => {}
                    1 => write!(f, "*{}", name)?,
                    k => write!(f, "*{}^{}", name, k)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({})", self)
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> MPoly {
        // z^3 + x z + y
        MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)])
    }

    #[test]
    fn derivative_examples() {
        let p = cubic();
        assert_eq!(
            p.derivative(Var::Z, 1),
            MPoly::from_int_terms(&[(3, 0, 0, 2), (1, 1, 0, 0)])
        );
        assert_eq!(MPoly::int(5).derivative(Var::X, 1), MPoly::zero());
        assert_eq!(p.derivative(Var::Z, 2), MPoly::from_int_terms(&[(6, 0, 0, 1)]));
        assert!(p.derivative(Var::Z, 4).is_zero());
    }

    #[test]
    fn leading_coeff_examples() {
        assert_eq!(cubic().leading_coeff_z(), MPoly::one());
        let p = MPoly::from_int_terms(&[(1, 2, 0, 2), (1, 0, 1, 2), (-1, 0, 0, 1)]);
        assert_eq!(p.leading_coeff_z(), MPoly::from_int_terms(&[(1, 2, 0, 0), (1, 0, 1, 0)]));
        let q = MPoly::from_int_terms(&[(1, 1, 0, 0), (1, 0, 1, 0)]);
        assert_eq!(q.leading_coeff_z(), q);
    }

    #[test]
    fn eval_examples() {
        let f = MPoly::from_int_terms(&[(4, 3, 0, 0), (27, 0, 2, 0)]);
        let z = BigRational::zero();
        let o = BigRational::one();
        assert_eq!(f.eval_exact(&[z.clone(), z.clone()]).unwrap(), z);
        assert_eq!(f.eval_exact(&[o.clone(), o.clone()]).unwrap(), BigRational::from_integer(31.into()));
        assert_eq!(cubic().eval_exact(&[z.clone(), z.clone(), z.clone()]).unwrap(), z);
        assert_eq!(
            cubic().eval_exact(&[z.clone(), z.clone()]),
            Err(PolyError::ArityMismatch { given: 2, needed: 3 })
        );
    }

    #[test]
    fn canonical_form() {
        let a = &MPoly::x() + &MPoly::y();
        let b = &(&MPoly::y() + &MPoly::x()) + &(&MPoly::z() - &MPoly::z());
        assert_eq!(a, b);
        assert_eq!(b.degree(Var::Z), 0);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn compose_and_clear() {
        let p = MPoly::from_terms([([1, 0, 0], rat(1, 2)), ([0, 1, 0], rat(2, 3))]);
        let (q, l) = p.clear_denominators();
        assert_eq!(l, BigInt::from(6));
        assert_eq!(q, MPoly::from_int_terms(&[(3, 1, 0, 0), (4, 0, 1, 0)]));
        let c = cubic().compose(&MPoly::y(), &MPoly::x(), &MPoly::z());
        assert_eq!(c, MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 0, 1, 1), (1, 1, 0, 0)]));
    }
}
