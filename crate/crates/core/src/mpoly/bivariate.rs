//! Integer polynomials in `(x, y)`: the coefficient ring of the
//! subresultant computation.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Sparse polynomial in `Z[x, y]`, terms sorted by `(ex, ey)` lex.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct ZPoly2 {
    pub(crate) terms: BTreeMap<(u32, u32), BigInt>,
}

impl ZPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, 0), c);
        }
        ZPoly2 { terms }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Self {
        ZPoly2 { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let entry = terms.entry(*e).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        ZPoly2 { terms }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut acc: HashMap<(u32, u32), BigInt> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len() / 2 + 1);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = (ea.0 + eb.0, ea.1 + eb.1);
                let prod = ca * cb;
                match acc.get_mut(&e) {
                    Some(v) => *v += prod,
                    None => {
                        acc.insert(e, prod);
                    }
                }
            }
        }
        ZPoly2 { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division; panics if `rhs` does not divide `self`, which only
    /// happens on a broken subresultant invariant.
    pub fn div_exact(&self, rhs: &Self) -> Self {
        self.try_div_exact(rhs).expect("inexact division in Z[x,y]")
    }

    pub fn try_div_exact(&self, rhs: &Self) -> Option<Self> {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        if rhs.terms.len() == 1 {
            let (&(dx, dy), dc) = rhs.terms.iter().next().unwrap();
            let mut terms = BTreeMap::new();
            for (&(ex, ey), c) in &self.terms {
                if ex < dx || ey < dy {
                    return None;
                }
                let (q, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return None;
                }
                terms.insert((ex - dx, ey - dy), q);
            }
            return Some(ZPoly2 { terms });
        }
        let (&(lx, ly), lc) = rhs.terms.iter().next_back().unwrap();
        let mut rem = self.terms.clone();
        let mut quot = BTreeMap::new();
        while let Some((&(ex, ey), c)) = rem.iter().next_back() {
            if ex < lx || ey < ly {
                return None;
            }
            let (q, r) = c.div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            let (qx, qy) = (ex - lx, ey - ly);
            for (&(dx, dy), dc) in &rhs.terms {
                let e = (dx + qx, dy + qy);
                let entry = rem.entry(e).or_insert_with(BigInt::zero);
                *entry -= &q * dc;
                if entry.is_zero() {
                    rem.remove(&e);
                }
            }
            quot.insert((qx, qy), q);
        }
        Some(ZPoly2 { terms: quot })
    }
}

/// Polynomial in `z` with `Z[x, y]` coefficients, dense in `z`, no
/// trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct ZPolyZ {
    pub(crate) coeffs: Vec<ZPoly2>,
}

impl ZPolyZ {
    pub fn new(mut coeffs: Vec<ZPoly2>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPolyZ { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `z`; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> &ZPoly2 {
        self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    pub fn coeff(&self, k: usize) -> ZPoly2 {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &ZPoly2) -> Self {
        ZPolyZ::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn div_exact_scalar(&self, c: &ZPoly2) -> Self {
        ZPolyZ::new(self.coeffs.iter().map(|a| a.div_exact(c)).collect())
    }

    pub fn neg(&self) -> Self {
        ZPolyZ { coeffs: self.coeffs.iter().map(|a| a.neg()).collect() }
    }

    /// `lc(b)^(deg a - deg b + 1) * a  mod  b`.
    pub fn prem(&self, b: &ZPolyZ) -> ZPolyZ {
        let db = b.degree().expect("prem by zero");
        let Some(da) = self.degree() else { return ZPolyZ::default() };
        if da < db {
            return self.clone();
        }
        let lb = b.lc().clone();
        let mut r = self.coeffs.clone();
        let mut steps = da - db + 1;
        let mut top = da;
        loop {
            // r := lb * r - r[top] * z^(top-db) * b
            let t = r[top].clone();
            for c in r.iter_mut() {
                *c = c.mul(&lb);
            }
            if !t.is_zero() {
                for (k, bc) in b.coeffs.iter().enumerate() {
                    let idx = top - db + k;
                    r[idx] = r[idx].sub(&bc.mul(&t));
                }
            }
            steps -= 1;
            debug_assert!(r[top].is_zero());
            r.truncate(top);
            if top == db {
                break;
            }
            top -= 1;
        }
        debug_assert_eq!(steps, 0);
        ZPolyZ::new(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(i64, u32, u32)]) -> ZPoly2 {
        ZPoly2 {
            terms: terms
                .iter()
                .filter(|t| t.0 != 0)
                .map(|&(c, a, b)| ((a, b), BigInt::from(c)))
                .collect(),
        }
    }

    #[test]
    fn exact_division_recovers_factor() {
        let a = p(&[(3, 2, 0), (-1, 1, 1), (5, 0, 0)]);
        let b = p(&[(2, 0, 3), (1, 1, 0), (-7, 0, 0)]);
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&b), a);
        assert_eq!(prod.div_exact(&a), b);
        assert!(a.try_div_exact(&b).is_none());
    }

    #[test]
    fn prem_matches_definition() {
        // prem(z^2 + x, 2z + y) = 4 (z^2 + x) mod (2z + y) = y^2 + 4x
        let a = ZPolyZ::new(vec![p(&[(1, 1, 0)]), ZPoly2::zero(), ZPoly2::one()]);
        let b = ZPolyZ::new(vec![p(&[(1, 0, 1)]), p(&[(2, 0, 0)])]);
        let r = a.prem(&b);
        assert_eq!(r, ZPolyZ::new(vec![p(&[(1, 0, 2), (4, 1, 0)])]));
    }
}
