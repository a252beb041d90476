//! Krawczyk existence and uniqueness test for square systems of 2 or 3
//! polynomials.

use super::boxes::IBox;
use super::compiled::CompiledPoly;
use super::float::{Dir, Float};
use super::ival::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrawczykStatus {
    /// `K(B)` lies in the interior of `B`: exactly one zero in `B`.
    Certified,
    /// `K(B)` misses `B`: no zero in `B`.
    NoZero,
    Inconclusive,
    SingularMidpointJacobian,
}

#[derive(Clone, Debug)]
pub struct KrawczykResult<F: Float, const N: usize> {
    pub status: KrawczykStatus,
    /// The Krawczyk image, absent when the midpoint Jacobian is singular.
    pub image: Option<IBox<F, N>>,
    /// `B ∩ K(B)` when nonempty.
    pub contracted: Option<IBox<F, N>>,
}

impl<F: Float, const N: usize> KrawczykResult<F, N> {
    pub fn certified(&self) -> bool {
        self.status == KrawczykStatus::Certified
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("the Krawczyk image misses the box, so it holds no zero")]
    EmptyIntersection,
    #[error("midpoint Jacobian is singular")]
    SingularMidpointJacobian,
}

/// Approximate inverse of a 2×2 or 3×3 matrix by the adjugate formula.
fn inverse<F: Float>(a: &[Vec<F>], prec: u32) -> Option<Vec<Vec<F>>> {
    let n = a.len();
    let d = Dir::Up;
    let m = |x: &F, y: &F| x.mul(y, d);
    let s = |x: &F, y: &F| x.sub(y, d);
    let adj: Vec<Vec<F>> = match n {
        2 => vec![vec![a[1][1].clone(), a[0][1].neg()], vec![a[1][0].neg(), a[0][0].clone()]],
        3 => {
            let cof = |r0: usize, r1: usize, c0: usize, c1: usize| s(&m(&a[r0][c0], &a[r1][c1]), &m(&a[r0][c1], &a[r1][c0]));
            // adj[i][j] = cofactor(j, i)
            vec![
                vec![cof(1, 2, 1, 2), cof(0, 2, 1, 2).neg(), cof(0, 1, 1, 2)],
                vec![cof(1, 2, 0, 2).neg(), cof(0, 2, 0, 2), cof(0, 1, 0, 2).neg()],
                vec![cof(1, 2, 0, 1), cof(0, 2, 0, 1).neg(), cof(0, 1, 0, 1)],
            ]
        }
        _ => panic!("Krawczyk supports dimensions 2 and 3"),
    };
    let mut det = F::zero(prec);
    for k in 0..n {
        det = det.add(&m(&a[0][k], &adj[k][0]), d);
    }
    if det.is_zero() || !det.is_finite() {
        return None;
    }
    let inv: Vec<Vec<F>> = adj.iter().map(|row| row.iter().map(|v| v.div(&det, d)).collect()).collect();
    if inv.iter().flatten().all(F::is_finite) {
        Some(inv)
    } else {
        None
    }
}

/// One Krawczyk step `K(B) = c − Y F(c) + (I − Y J(B))(B − c)`.
///
/// `Y` approximates the inverse of the Jacobian at the midpoint `c`; the
/// test is sound for any choice of `Y`.
pub fn krawczyk<F: Float, const N: usize>(system: &[&CompiledPoly; N], b: &IBox<F, N>) -> KrawczykResult<F, N> {
    let prec = b.prec();
    let insts: Vec<_> = system.iter().map(|p| p.instance::<F>(prec)).collect();
    let c = b.midpoint();
    let fc: Vec<Interval<F>> = insts.iter().map(|e| e.at_point(&c)).collect();
    let jc: Vec<Vec<F>> = insts.iter().map(|e| e.gradient_at_point(&c).iter().map(Interval::mid).collect()).collect();
    let Some(y) = inverse(&jc, prec) else {
        return KrawczykResult { status: KrawczykStatus::SingularMidpointJacobian, image: None, contracted: None };
    };
    let jb: Vec<Vec<Interval<F>>> = insts.iter().map(|e| e.gradient(&b.axes)).collect();
    let delta: Vec<Interval<F>> = (0..N).map(|i| b.axes[i].sub(&Interval::point(c[i].clone()))).collect();
    let axes: [Interval<F>; N] = std::array::from_fn(|i| {
        let mut acc = Interval::point(c[i].clone());
        for (k, fk) in fc.iter().enumerate() {
            acc = acc.sub(&fk.scale(&y[i][k]));
        }
        for j in 0..N {
            // (I − Y J(B))_{ij}
            let mut e = if i == j { Interval::from_i64(1, prec) } else { Interval::zero(prec) };
            for (k, row) in jb.iter().enumerate() {
                e = e.sub(&row[j].scale(&y[i][k]));
            }
            acc = acc.add(&e.mul(&delta[j]));
        }
        acc
    });
    let k = IBox::new(axes);
    let contracted = k.intersect(b);
    let status = if k.interior_of(b) {
        KrawczykStatus::Certified
    } else if contracted.is_none() {
        KrawczykStatus::NoZero
    } else {
        KrawczykStatus::Inconclusive
    };
    KrawczykResult { status, image: Some(k), contracted }
}

/// `B ∩ K(B)`.
pub fn contract<F: Float, const N: usize>(system: &[&CompiledPoly; N], b: &IBox<F, N>) -> Result<IBox<F, N>, ContractError> {
    let r = krawczyk(system, b);
    match r.status {
        KrawczykStatus::SingularMidpointJacobian => Err(ContractError::SingularMidpointJacobian),
        KrawczykStatus::NoZero => Err(ContractError::EmptyIntersection),
        _ => Ok(r.contracted.expect("nonempty")),
    }
}
