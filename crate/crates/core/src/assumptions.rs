//! Budgeted subdivision check of the genericity assumptions on `(P, Q)`
//! over a box: the leading coefficients have no common zero (A3), the
//! space curve is smooth (A1), at most two of its points lie above each
//! point of the plane (A2) and the deflated system is regular (A4).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::interval::{complex_quadratic_enclosure, Box2, CompiledPoly, ComplexBox, Extension, Interval};
use crate::mpoly::{resultant_z, MPoly, PolyError, Var};
use crate::system::{cauchy_bound, compile_z_coeffs, CurveSystem, TangentSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Check {
    A1,
    A2,
    A3,
    A4,
}

/// The test a box failed, naming the branch of the checking procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallReason {
    /// Both leading coefficients may vanish on the box.
    LeadingCoefficients,
    /// `s11 ≠ 0` but the tangent may vanish above the box.
    TangentSingleRoot,
    /// `s22 ≠ 0` but the tangent may vanish above the box.
    TangentDoubleRoot,
    /// The Jacobian determinant of `(s11, s10)` may vanish.
    Jacobian,
    /// `f`, `s11` and `s22` may all vanish on the box.
    Undecided,
}

impl StallReason {
    pub fn check(self) -> Check {
        match self {
            StallReason::LeadingCoefficients => Check::A3,
            StallReason::TangentSingleRoot | StallReason::TangentDoubleRoot => Check::A1,
            StallReason::Jacobian => Check::A4,
            StallReason::Undecided => Check::A2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StalledBox {
    pub bbox: Box2<f64>,
    pub reason: StallReason,
    pub depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionStatus {
    Verified,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckStats {
    pub boxes_processed: usize,
    pub max_depth_reached: u32,
}

#[derive(Clone, Debug)]
pub struct AssumptionVerdict {
    pub status: AssumptionStatus,
    /// Undischarged boxes, sorted lexicographically.
    pub stalled: Vec<StalledBox>,
    pub stats: CheckStats,
}

impl AssumptionVerdict {
    pub fn verified(&self) -> bool {
        self.status == AssumptionStatus::Verified
    }

    pub fn stalled_checks(&self) -> Vec<Check> {
        let mut v: Vec<Check> = self.stalled.iter().map(|s| s.reason.check()).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Everything the per-box test evaluates, borrowed from its owner.
struct Checker<'a> {
    f: &'a CompiledPoly,
    s11: &'a CompiledPoly,
    s10: &'a CompiledPoly,
    /// `(s22, s21, s20)`; absent when one input is linear in `z`.
    upper: Option<[&'a CompiledPoly; 3]>,
    lead_p: &'a CompiledPoly,
    lead_q: &'a CompiledPoly,
    coeffs_p: &'a [CompiledPoly],
    coeffs_q: &'a [CompiledPoly],
    tangent: &'a TangentSystem,
}

/// Owned schemes for a pair where one polynomial is linear in `z`. The
/// linear polynomial `a z + b` plays the role of `s11 z + s10`.
struct LinearPair {
    f: CompiledPoly,
    s11: CompiledPoly,
    s10: CompiledPoly,
    lead_p: CompiledPoly,
    lead_q: CompiledPoly,
    coeffs_p: Vec<CompiledPoly>,
    coeffs_q: Vec<CompiledPoly>,
    tangent: TangentSystem,
}

impl LinearPair {
    fn new(p: &MPoly, q: &MPoly, ext: Extension) -> Result<Self, PolyError> {
        let lin = if q.degree(Var::Z) == 1 { q } else { p };
        let c2 = |m: &MPoly| CompiledPoly::with_extension(m, 2, ext);
        Ok(LinearPair {
            f: c2(&resultant_z(p, q)?),
            s11: c2(&lin.coeff_z(1)),
            s10: c2(&lin.coeff_z(0)),
            lead_p: c2(&p.leading_coeff_z()),
            lead_q: c2(&q.leading_coeff_z()),
            coeffs_p: compile_z_coeffs(p, ext),
            coeffs_q: compile_z_coeffs(q, ext),
            tangent: TangentSystem::new(p, q, ext),
        })
    }

    fn checker(&self) -> Checker<'_> {
        Checker {
            f: &self.f,
            s11: &self.s11,
            s10: &self.s10,
            upper: None,
            lead_p: &self.lead_p,
            lead_q: &self.lead_q,
            coeffs_p: &self.coeffs_p,
            coeffs_q: &self.coeffs_q,
            tangent: &self.tangent,
        }
    }
}

impl<'a> Checker<'a> {
    fn from_system(sys: &'a CurveSystem) -> Self {
        Checker {
            f: &sys.f,
            s11: &sys.s11,
            s10: &sys.s10,
            upper: Some([&sys.s22, &sys.s21, &sys.s20]),
            lead_p: &sys.lead_p,
            lead_q: &sys.lead_q,
            coeffs_p: &sys.coeffs_p,
            coeffs_q: &sys.coeffs_q,
            tangent: &sys.tangent,
        }
    }

    fn z_guard(&self, b: &Box2<f64>) -> Interval<f64> {
        let z = cauchy_bound(&[self.coeffs_p, self.coeffs_q], b);
        Interval::new(-z, z)
    }

    /// `None` when the box is discharged.
    /// Enclosures of the real roots of `S_2` over the box, when `s22` is
    /// bounded away from zero there.
    fn s2_real_roots(&self, b: &Box2<f64>) -> Option<Vec<Interval<f64>>> {
        let [s22, s21, s20] = self.upper?;
        let a = s22.eval_box(b);
        if a.contains_zero() {
            return None;
        }
        let roots = complex_quadratic_enclosure(&a, &s21.eval_box(b), &s20.eval_box(b)).ok()?;
        Some(roots.into_iter().filter(|r| r.im.contains_zero()).map(|r| r.re).collect())
    }

    fn examine(&self, b: &Box2<f64>) -> Option<StallReason> {
        if self.lead_p.eval_box(b).contains_zero() && self.lead_q.eval_box(b).contains_zero() {
            return Some(StallReason::LeadingCoefficients);
        }
        if !self.f.eval_box(b).contains_zero() {
            return None;
        }
        let s11 = self.s11.eval_box(b);
        if !s11.contains_zero() {
            let iz = self.s10.eval_box(b).neg().div(&s11);
            let iz = iz.intersect(&self.z_guard(b))?;
            // common roots are also roots of S_2, whose enclosure shrinks
            // near a cusp where -s10/s11 does not
            let pieces = match self.s2_real_roots(b) {
                Some(rs) => rs.iter().filter_map(|r| r.intersect(&iz)).collect(),
                None => vec![iz],
            };
            let vanishes = pieces.into_iter().any(|iz| self.tangent.components.iter().all(|t| t.eval_box(&b.extend_z(iz.clone())).contains_zero()));
            return vanishes.then_some(StallReason::TangentSingleRoot);
        }
        let Some([s22, s21, s20]) = self.upper else {
            return Some(StallReason::Undecided);
        };
        let a = s22.eval_box(b);
        if a.contains_zero() {
            return Some(StallReason::Undecided);
        }
        let roots = complex_quadratic_enclosure(&a, &s21.eval_box(b), &s20.eval_box(b)).expect("0 ∉ s22");
        let guard = self.z_guard(b);
        let x = ComplexBox::real(b.axes[0].clone());
        let y = ComplexBox::real(b.axes[1].clone());
        for r in roots {
            let (Some(re), Some(im)) = (r.re.intersect(&guard), r.im.intersect(&guard)) else {
                continue;
            };
            let vars = [x.clone(), y.clone(), ComplexBox::new(re, im)];
            let vanishes = self.tangent.components.iter().all(|t| t.instance::<f64>(53).complex(&vars).contains_zero());
            if vanishes {
                return Some(StallReason::TangentDoubleRoot);
            }
        }
        let g11 = self.s11.gradient_box(b);
        let g10 = self.s10.gradient_box(b);
        let det = g11[0].mul(&g10[1]).sub(&g11[1].mul(&g10[0]));
        det.contains_zero().then_some(StallReason::Jacobian)
    }

    fn run(&self, b0: &Box2<f64>, budget: &Budget) -> AssumptionVerdict {
        let mut stats = CheckStats::default();
        let mut stalled = Vec::new();
        // each queued box carries the reason its parent was split
        let mut level: Vec<(Box2<f64>, StallReason)> = vec![(b0.clone(), StallReason::Undecided)];
        let mut depth = 0u32;
        while !level.is_empty() {
            let room = budget.max_boxes.saturating_sub(stats.boxes_processed);
            if room < level.len() {
                for (b, r) in level.drain(room..) {
                    stalled.push(StalledBox { bbox: b, reason: r, depth });
                }
            }
            if level.is_empty() {
                break;
            }
            stats.boxes_processed += level.len();
            stats.max_depth_reached = depth;
            let outcomes: Vec<Option<StallReason>> = level.par_iter().map(|(b, _)| self.examine(b)).collect();
            let mut next = Vec::new();
            for ((b, _), out) in level.into_iter().zip(outcomes) {
                let Some(reason) = out else { continue };
                if depth >= budget.max_depth {
                    stalled.push(StalledBox { bbox: b, reason, depth });
                    continue;
                }
                let mut kids = b.quadrisect();
                kids.sort_by(|a, c| a.lex_cmp(c));
                next.extend(kids.into_iter().map(|k| (k, reason)));
            }
            level = next;
            depth += 1;
        }
        stalled.sort_by(|a, b| a.bbox.lex_cmp(&b.bbox));
        let status = if stalled.is_empty() { AssumptionStatus::Verified } else { AssumptionStatus::BudgetExhausted };
        AssumptionVerdict { status, stalled, stats }
    }
}

/// Checks the assumptions for the pair `(P, Q)` over `b0`.
///
/// Pairs where one polynomial is linear in `z` are accepted: the linear
/// polynomial then stands in for `S_1`, and a box where it may vanish
/// identically in `z` cannot be discharged.
pub fn check_assumptions(p: &MPoly, q: &MPoly, b0: &Box2<f64>, budget: &Budget) -> Result<AssumptionVerdict, PolyError> {
    let (dp, dq) = (p.degree(Var::Z), q.degree(Var::Z));
    if dp.min(dq) >= 2 {
        let sys = CurveSystem::new(p, q)?;
        return Ok(check_system(&sys, b0, budget));
    }
    if dp.min(dq) == 0 || p.is_zero() || q.is_zero() {
        return Err(PolyError::DegreeTooLow { p: dp, q: dq });
    }
    let lin = LinearPair::new(p, q, Extension::default())?;
    Ok(lin.checker().run(b0, budget))
}

pub fn check_system(sys: &CurveSystem, b0: &Box2<f64>, budget: &Budget) -> AssumptionVerdict {
    Checker::from_system(sys).run(b0, budget)
}
