//! Subresultant chain with respect to `z`, determinantal convention.
//!
//! The chain is computed over `Z[x, y]` with the Ducos variant of the
//! subresultant PRS (Lazard's trick for defective steps), after clearing
//! denominators. `S_j(aP, bQ) = a^(q-j) b^(p-j) S_j(P, Q)` undoes the scaling.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::bivariate::{ZPoly2, ZPolyZ};
use super::{MPoly, PolyError, Var};

/// The low end of the subresultant chain of `(P, Q)` w.r.t. `z`.
///
/// `S_2 = s22 z^2 + s21 z + s20`, `S_1 = s11 z + s10`, `S_0 = f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubresultantData {
    pub f: MPoly,
    pub s10: MPoly,
    pub s11: MPoly,
    pub s20: MPoly,
    pub s21: MPoly,
    pub s22: MPoly,
    pub deg_z_p: u32,
    pub deg_z_q: u32,
    /// `f = convention_scalar * det Sylvester(P, Q)`. Always one here: the
    /// PRS reproduces the determinantal subresultants exactly.
    pub convention_scalar: BigRational,
}

impl SubresultantData {
    /// `s22^2 f - (s22 s10^2 - s21 s11 s10 + s20 s11^2)`; zero by construction.
    ///
    /// Evaluated over `Z[x, y]` after scaling all six polynomials by a common
    /// denominator (the identity is homogeneous of degree 3).
    pub fn identity_defect(&self) -> MPoly {
        let all = [&self.f, &self.s10, &self.s11, &self.s20, &self.s21, &self.s22];
        let mut l = BigInt::one();
        for p in all {
            for (_, c) in p.terms() {
                l = num_integer::Integer::lcm(&l, c.denom());
            }
        }
        let lr = BigRational::from_integer(l.clone());
        let z: Vec<ZPoly2> = all.iter().map(|p| to_zpoly2(&p.scale(&lr))).collect();
        let (f, s10, s11, s20, s21, s22) = (&z[0], &z[1], &z[2], &z[3], &z[4], &z[5]);
        let lhs = s22.mul(s22).mul(f);
        let rhs = s22
            .mul(&s10.mul(s10))
            .sub(&s21.mul(s11).mul(s10))
            .add(&s20.mul(&s11.mul(s11)));
        to_mpoly(&lhs.sub(&rhs), &num_traits::pow(l, 3))
    }

    /// `S_2` as a polynomial in `x, y, z`.
    pub fn s2(&self) -> MPoly {
        let z = MPoly::z();
        &(&(&self.s22 * &(&z * &z)) + &(&self.s21 * &z)) + &self.s20
    }

    /// `S_1` as a polynomial in `x, y, z`.
    pub fn s1(&self) -> MPoly {
        &(&self.s11 * &MPoly::z()) + &self.s10
    }
}

fn to_zpolyz(p: &MPoly) -> ZPolyZ {
    let dz = p.degree(Var::Z) as usize;
    let mut coeffs = vec![ZPoly2::zero(); dz + 1];
    for (e, c) in p.terms() {
        debug_assert!(c.is_integer());
        coeffs[e[2] as usize]
            .terms
            .insert((e[0], e[1]), c.numer().clone());
    }
    ZPolyZ::new(coeffs)
}

fn to_zpoly2(p: &MPoly) -> ZPoly2 {
    ZPoly2 {
        terms: p.terms().map(|(e, c)| ((e[0], e[1]), c.numer().clone())).collect(),
    }
}

fn to_mpoly(c: &ZPoly2, divisor: &BigInt) -> MPoly {
    MPoly::from_terms(
        c.terms
            .iter()
            .map(|(&(a, b), v)| ([a, b, 0], BigRational::new(v.clone(), divisor.clone()))),
    )
}

/// `x^n / y^(n-1)` with exact intermediate divisions (Lazard).
fn lazard_power(x: &ZPoly2, y: &ZPoly2, n: u32) -> ZPoly2 {
    let mut c = x.clone();
    for _ in 1..n {
        c = c.mul(x).div_exact(y);
    }
    c
}

/// Full chain `j -> S_j` for `deg a >= deg b >= 1`; indices below `deg b`
/// that are absent are zero.
fn ducos_chain(a_in: &ZPolyZ, b_in: &ZPolyZ) -> BTreeMap<usize, ZPolyZ> {
    let p = a_in.degree().unwrap();
    let q = b_in.degree().unwrap();
    debug_assert!(p >= q && q >= 1);
    let mut chain = BTreeMap::new();
    let lcb = b_in.lc().clone();
    let mut s;
    if p > q {
        chain.insert(q, b_in.scale(&lcb.pow((p - q - 1) as u32)));
        s = lcb.pow((p - q) as u32);
    } else {
        chain.insert(q, b_in.clone());
        s = ZPoly2::one();
    }
    let mut a = b_in.clone();
    let mut b = a_in.prem(&b_in.neg());
    loop {
        if b.is_zero() {
            break;
        }
        let d = a.degree().unwrap();
        let e = b.degree().unwrap();
        chain.insert(d - 1, b.clone());
        let delta = (d - e) as u32;
        let c = if delta > 1 {
            let t = lazard_power(b.lc(), &s, delta - 1);
            let c = b.scale(&t).div_exact_scalar(&s);
            chain.insert(e, c.clone());
            c
        } else {
            b.clone()
        };
        if e == 0 {
            break;
        }
        let denom = s.pow(delta).mul(a.lc());
        b = a.prem(&c.neg()).div_exact_scalar(&denom);
        s = c.lc().clone();
        a = c;
    }
    chain
}

/// Computes `s22, s21, s20, s11, s10` and the resultant `f` of `P` and `Q`
/// with respect to `z`. Needs `min(deg_z P, deg_z Q) >= 2`.
pub fn subresultant_chain(p: &MPoly, q: &MPoly) -> Result<SubresultantData, PolyError> {
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let dp = p.degree(Var::Z);
    let dq = q.degree(Var::Z);
    if dp.min(dq) < 2 {
        return Err(PolyError::DegreeTooLow { p: dp, q: dq });
    }
    let (pi, sa) = p.clear_denominators();
    let (qi, sb) = q.clear_denominators();
    let (zp, zq) = (to_zpolyz(&pi), to_zpolyz(&qi));
    let swapped = dq > dp;
    let chain = if swapped { ducos_chain(&zq, &zp) } else { ducos_chain(&zp, &zq) };
    let (pu, qu) = (dp as usize, dq as usize);

    let get = |j: usize| -> (ZPolyZ, BigInt) {
        let mut s = chain.get(&j).cloned().unwrap_or_default();
        if swapped && ((pu - j) * (qu - j)) % 2 == 1 {
            s = s.neg();
        }
        let scale = if pu == qu && j == qu {
            BigInt::from(1)
        } else {
            num_traits::pow(sa.clone(), qu - j) * num_traits::pow(sb.clone(), pu - j)
        };
        (s, scale)
    };

    if pu == qu && qu == 2 {
        // S_2 := Q / lc(Q): the only normalisation of the top polynomial for
        // which Res(S_2, S_1) = s22^2 f holds when the degrees are equal.
        let lc = q.leading_coeff_z();
        if !lc.is_constant() {
            if !p.leading_coeff_z().is_constant() {
                return Err(PolyError::NonConstantLeadingCoefficient);
            }
            // S_1(Q, P) = -S_1(P, Q) and the resultants agree (pq even)
            let mut d = subresultant_chain(q, p)?;
            d.s11 = -&d.s11;
            d.s10 = -&d.s10;
            std::mem::swap(&mut d.deg_z_p, &mut d.deg_z_q);
            return Ok(d);
        }
        let c = lc.coeff(&[0, 0, 0]);
        let inv = BigRational::one() / c;
        let sq = q.scale(&inv);
        let z2 = |k: u32| sq.coeff_z(k);
        let s22 = z2(2);
        let s21 = z2(1);
        let s20 = z2(0);
        return finish(dp, dq, (s20, s21, s22), get(1), get(0));
    }
    let (s2, k2) = get(2);
    let s2c = (
        to_mpoly(&s2.coeff(0), &k2),
        to_mpoly(&s2.coeff(1), &k2),
        to_mpoly(&s2.coeff(2), &k2),
    );
    finish(dp, dq, s2c, get(1), get(0))
}

/// Resultant of `P` and `Q` with respect to `z` (Sylvester determinant).
///
/// Unlike [`subresultant_chain`] this accepts any degrees.
pub fn resultant_z(p: &MPoly, q: &MPoly) -> Result<MPoly, PolyError> {
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let dp = p.degree(Var::Z) as usize;
    let dq = q.degree(Var::Z) as usize;
    if dq == 0 {
        return Ok(q.pow(dp as u32));
    }
    if dp == 0 {
        return Ok(p.pow(dq as u32));
    }
    let (pi, sa) = p.clear_denominators();
    let (qi, sb) = q.clear_denominators();
    let (zp, zq) = (to_zpolyz(&pi), to_zpolyz(&qi));
    let swapped = dq > dp;
    let chain = if swapped { ducos_chain(&zq, &zp) } else { ducos_chain(&zp, &zq) };
    let mut s0 = chain.get(&0).cloned().unwrap_or_default();
    if swapped && (dp * dq) % 2 == 1 {
        s0 = s0.neg();
    }
    let scale = num_traits::pow(sa, dq) * num_traits::pow(sb, dp);
    Ok(to_mpoly(&s0.coeff(0), &scale))
}

fn finish(
    dp: u32,
    dq: u32,
    (s20, s21, s22): (MPoly, MPoly, MPoly),
    (s1, k1): (ZPolyZ, BigInt),
    (s0, k0): (ZPolyZ, BigInt),
) -> Result<SubresultantData, PolyError> {
    let data = SubresultantData {
        f: to_mpoly(&s0.coeff(0), &k0),
        s10: to_mpoly(&s1.coeff(0), &k1),
        s11: to_mpoly(&s1.coeff(1), &k1),
        s20,
        s21,
        s22,
        deg_z_p: dp,
        deg_z_q: dq,
        convention_scalar: BigRational::one(),
    };
    assert!(
        data.identity_defect().is_zero(),
        "subresultant quadratic identity violated"
    );
    Ok(data)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Determinantal subresultant `S_j` straight from the definition:
    /// rows `z^(q-j-1) P, ..., P, z^(p-j-1) Q, ..., Q`, `S_j = sum_i det(M_i) z^i`
    /// where `M_i` keeps the first `p+q-2j-1` columns plus the column of `z^i`.
    pub(crate) fn determinantal_sres(p: &MPoly, q: &MPoly, j: usize) -> Vec<MPoly> {
        let dp = p.degree(Var::Z) as usize;
        let dq = q.degree(Var::Z) as usize;
        let n = dp + dq - j;
        let mut rows: Vec<Vec<MPoly>> = Vec::new();
        let push = |rows: &mut Vec<Vec<MPoly>>, poly: &MPoly, deg: usize, shift: usize| {
            // columns indexed by power n-1 .. 0
            let mut row = vec![MPoly::zero(); n];
            for k in 0..=deg {
                let pow = k + shift;
                row[n - 1 - pow] = poly.coeff_z(k as u32);
            }
            rows.push(row);
        };
        for s in (0..dq - j).rev() {
            push(&mut rows, p, dp, s);
        }
        for s in (0..dp - j).rev() {
            push(&mut rows, q, dq, s);
        }
        let m = rows.len();
        let mut out = Vec::new();
        for i in 0..=j {
            let cols: Vec<usize> = (0..m - 1).chain(std::iter::once(n - 1 - i)).collect();
            let mat: Vec<Vec<MPoly>> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            out.push(cofactor_det(&mat));
        }
        out
    }

    fn cofactor_det(m: &[Vec<MPoly>]) -> MPoly {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = MPoly::zero();
        for c in 0..n {
            if m[0][c].is_zero() {
                continue;
            }
            let minor: Vec<Vec<MPoly>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| v.clone()).collect())
                .collect();
            let t = &m[0][c] * &cofactor_det(&minor);
            acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
        }
        acc
    }

    fn cubic() -> MPoly {
        MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)])
    }

    #[test]
    fn cusp_chain() {
        let p = cubic();
        let q = p.derivative(Var::Z, 1);
        let d = subresultant_chain(&p, &q).unwrap();
        assert_eq!(d.s22, MPoly::int(3));
        assert!(d.s21.is_zero());
        assert_eq!(d.s20, MPoly::x());
        assert_eq!(d.s11, MPoly::from_int_terms(&[(6, 1, 0, 0)]));
        assert_eq!(d.s10, MPoly::from_int_terms(&[(9, 0, 1, 0)]));
        assert_eq!(d.f, MPoly::from_int_terms(&[(4, 3, 0, 0), (27, 0, 2, 0)]));
        let det = determinantal_sres(&p, &q, 1);
        assert_eq!(det[0], d.s10);
        assert_eq!(det[1], d.s11);
        assert_eq!(determinantal_sres(&p, &q, 0)[0], d.f);
    }

    #[test]
    fn node_chain() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 0, 0, 1)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 2), (2, 1, 0, 1), (-1, 0, 0, 1), (1, 0, 1, 0), (-1, 1, 0, 0)]);
        let d = subresultant_chain(&p, &q).unwrap();
        assert_eq!(d.s11, MPoly::from_int_terms(&[(2, 1, 0, 0)]));
        assert_eq!(d.s10, MPoly::from_int_terms(&[(1, 0, 1, 0), (-1, 1, 0, 0)]));
        assert_eq!(d.f, MPoly::from_int_terms(&[(1, 0, 2, 0), (-1, 2, 0, 0)]));
    }

    #[test]
    fn defective_chain() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 0, 0, 0)]);
        let q = MPoly::from_int_terms(&[(3, 0, 0, 2)]);
        let d = subresultant_chain(&p, &q).unwrap();
        assert!(d.s11.is_zero());
        assert_eq!(d.s10, MPoly::int(9));
        assert_eq!(d.f, MPoly::int(27));
        assert_eq!(determinantal_sres(&p, &q, 0)[0], d.f);
    }

    #[test]
    fn degree_too_low() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 0)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 1), (1, 0, 1, 0)]);
        assert_eq!(subresultant_chain(&p, &q), Err(PolyError::DegreeTooLow { p: 3, q: 1 }));
    }

    #[test]
    fn ducos_matches_determinants_on_random_inputs() {
        use rand::Rng;
        let mut rng = crate::random::rng(7);
        for _ in 0..40 {
            let dp = rng.gen_range(2..=4);
            let dq = rng.gen_range(2..=4);
            let p = crate::random::dense_poly(&mut rng, dp, 3);
            let mut q = crate::random::dense_poly(&mut rng, dq, 3);
            if rng.gen_bool(0.3) {
                // rational coefficients exercise the denominator scaling
                q = q.scale(&crate::mpoly::rat(1, 3));
            }
            let d = subresultant_chain(&p, &q).unwrap();
            let s1 = determinantal_sres(&p, &q, 1);
            let s0 = determinantal_sres(&p, &q, 0);
            assert_eq!(d.s10, s1[0]);
            assert_eq!(d.s11, s1[1]);
            assert_eq!(d.f, s0[0]);
            if dp.max(dq) > 2 {
                let s2 = determinantal_sres(&p, &q, 2);
                assert_eq!((d.s20.clone(), d.s21.clone(), d.s22.clone()), (s2[0].clone(), s2[1].clone(), s2[2].clone()));
            }
        }
    }

    #[test]
    fn resultant_of_low_degree_pairs() {
        let p = MPoly::from_int_terms(&[(1, 1, 0, 1), (1, 0, 0, 0)]);
        let q = MPoly::from_int_terms(&[(1, 1, 0, 1), (-1, 0, 0, 0)]);
        assert_eq!(resultant_z(&p, &q).unwrap(), MPoly::from_int_terms(&[(-2, 1, 0, 0)]));
        let mut rng = crate::random::rng(11);
        for _ in 0..20 {
            let a = crate::random::dense_poly(&mut rng, 3, 4);
            let b = crate::random::dense_poly(&mut rng, 1, 4).scale(&crate::mpoly::rat(1, 3));
            let det = &determinantal_sres(&b, &a, 0)[0];
            assert_eq!(&resultant_z(&b, &a).unwrap(), det);
            let det = &determinantal_sres(&a, &b, 0)[0];
            assert_eq!(&resultant_z(&a, &b).unwrap(), det);
        }
    }

    #[test]
    fn equal_degree_two_with_constant_lead_on_p_only() {
        // Q has lead x + 2, P is monic: the chain swaps and stays consistent
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (1, 1, 0, 1), (-1, 0, 1, 0)]);
        let q = MPoly::from_int_terms(&[(1, 1, 0, 2), (2, 0, 0, 2), (3, 0, 0, 1), (1, 0, 1, 0)]);
        let d = subresultant_chain(&p, &q).unwrap();
        assert_eq!(d.s11, determinantal_sres(&p, &q, 1)[1]);
        assert_eq!(d.s10, determinantal_sres(&p, &q, 1)[0]);
        assert_eq!(d.f, determinantal_sres(&p, &q, 0)[0]);
        assert!(d.identity_defect().is_zero());
    }
}
