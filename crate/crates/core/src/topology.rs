//! Local topology at a certified singularity: node or cusp, number of real
//! branches, exclusion of nearby closed loops and the count of branches
//! crossing the box boundary.
//!
//! Every refinement loop contracts the box with the Krawczyk operator of
//! `(s11, s10)` and climbs the precision ladder when `f64` stops making
//! progress.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Budget, CurveMode};
use crate::interval::{below_precision_floor, contract, krawczyk, ladder, BigFloat, Box2, Box3, CompiledPoly, Dir, Extension, Float, IBox, Interval, Precision};
use crate::isolate::CandidateBox;
use crate::mpoly::{MPoly, Var};
use crate::system::{Chart, CurveSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    Node,
    #[serde(rename = "cusp")]
    OrdinaryCusp,
}

/// Test that settled the type of the singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationTest {
    HessianPositive,
    HessianNegative,
    /// Krawczyk certificate for `(P, P_z, P_zz)` above the box.
    TriplePoint,
}

/// Test that certified the absence of closed loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopTest {
    /// `0 ∉ □f_xx □f_yy − □f_xy □f_xy`.
    HessianProduct,
    /// `K_(f_x, f_y)(B) ⊂ int(B)`.
    GradientKrawczyk,
    /// The cusp quantity in `x`-first form.
    CuspI,
    /// The same with `x` and `y` swapped.
    CuspISwapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Classification,
    LoopExclusion,
    BoundaryMatch,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Classification => "classification",
            Phase::LoopExclusion => "loop exclusion",
            Phase::BoundaryMatch => "boundary matching",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hint {
    /// The Hessian test never separates from zero, as happens at a cusp.
    /// Rerun in discriminant mode if `Q = P_z`.
    PossibleCusp,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum TopologyError {
    #[error("budget exhausted during {phase}{}", if hint.is_some() { " (possible cusp: rerun in discriminant mode if Q = P_z)" } else { "" })]
    BudgetExhausted { phase: Phase, hint: Option<Hint>, last_box: Box2<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CrossingError {
    #[error("a corner stays on the curve after shrinking the box")]
    CornerZeroUnresolved,
    #[error("an edge root could not be certified simple")]
    NonSimpleEdgeRoot,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub classification: Option<ClassificationTest>,
    pub loop_test: Option<LoopTest>,
    /// Highest precision the refinement needed.
    pub precision: Option<Precision>,
    /// Krawczyk contractions of `(s11, s10)` over all phases.
    pub contractions: u32,
    /// Corner shrinks used by the last boundary count.
    pub corner_retries: u32,
}

/// Working box at the precision it was last refined in.
#[derive(Clone, Debug, PartialEq)]
pub enum WorkBox {
    Double(Box2<f64>),
    Multi(Box2<BigFloat>),
}

impl WorkBox {
    pub fn precision(&self) -> Precision {
        match self {
            WorkBox::Double(_) => Precision::Double,
            WorkBox::Multi(b) => Precision::Bits(b.prec()),
        }
    }

    /// Outward `f64` enclosure.
    pub fn to_f64(&self) -> Box2<f64> {
        match self {
            WorkBox::Double(b) => b.clone(),
            WorkBox::Multi(b) => IBox::from_f64s(b.to_f64_bounds(), 53),
        }
    }
}

/// Endpoint types the ladder moves through.
pub trait Endpoint: Float {
    fn wrap(b: Box2<Self>) -> WorkBox;
}

impl Endpoint for f64 {
    fn wrap(b: Box2<f64>) -> WorkBox {
        WorkBox::Double(b)
    }
}

impl Endpoint for BigFloat {
    fn wrap(b: Box2<BigFloat>) -> WorkBox {
        WorkBox::Multi(b)
    }
}

#[derive(Clone, Debug)]
pub struct SingularityReport {
    /// Final box in chart coordinates, rounded outward to `f64`.
    pub bbox: Box2<f64>,
    pub chart: Chart,
    pub kind: SingularityKind,
    /// 0 or 4 for a node, 2 for a cusp.
    pub branches: u32,
    pub loop_free: bool,
    pub boundary_crossings: Option<u32>,
    /// Enclosure of the triple root of `P` above a discriminant cusp.
    pub triple_root_box: Option<Box3<f64>>,
    pub diagnostics: Diagnostics,
    /// The box at working precision.
    pub work: WorkBox,
}

impl SingularityReport {
    fn set_box(&mut self, w: WorkBox) {
        self.bbox = w.to_f64();
        let p = w.precision();
        if self.diagnostics.precision.is_none_or(|q| q.bits() < p.bits()) {
            self.diagnostics.precision = Some(p);
        }
        self.work = w;
    }

    /// Enclosure in plane coordinates.
    pub fn plane_box(&self) -> Box2<f64> {
        self.chart.to_plane(&self.bbox)
    }
}

/// Derivatives of `f` up to order three and the Hessian determinant.
#[derive(Clone, Debug)]
pub struct CurveDerivatives {
    pub f: CompiledPoly,
    pub fx: CompiledPoly,
    pub fy: CompiledPoly,
    pub fxx: CompiledPoly,
    pub fxy: CompiledPoly,
    pub fyy: CompiledPoly,
    pub fxxx: CompiledPoly,
    pub fxxy: CompiledPoly,
    pub fxyy: CompiledPoly,
    pub fyyy: CompiledPoly,
    pub hessian_det: CompiledPoly,
}

impl CurveDerivatives {
    pub fn new(f: &MPoly, ext: Extension) -> Self {
        let c = |i: u32, j: u32| CompiledPoly::with_extension(&f.dxy(i, j), 2, ext);
        let (fxx, fxy, fyy) = (f.dxy(2, 0), f.dxy(1, 1), f.dxy(0, 2));
        let det = &(&fxx * &fyy) - &(&fxy * &fxy);
        CurveDerivatives {
            f: c(0, 0),
            fx: c(1, 0),
            fy: c(0, 1),
            fxx: c(2, 0),
            fxy: c(1, 1),
            fyy: c(0, 2),
            fxxx: c(3, 0),
            fxxy: c(2, 1),
            fxyy: c(1, 2),
            fyyy: c(0, 3),
            hessian_det: CompiledPoly::with_extension(&det, 2, ext),
        }
    }

    pub fn of(sys: &CurveSystem) -> Self {
        Self::new(&sys.f_poly(), sys.extension())
    }

    /// `I` and `I'` of the cusp loop test, in that order.
    pub fn cusp_quantities<F: Float>(&self, b: &Box2<F>) -> [Interval<F>; 2] {
        let e = |p: &CompiledPoly| p.eval_box(b);
        let (xx, xy, yy) = (e(&self.fxx), e(&self.fxy), e(&self.fyy));
        let (xxx, xxy, xyy, yyy) = (e(&self.fxxx), e(&self.fxxy), e(&self.fxyy), e(&self.fyyy));
        // (second derivatives, third derivatives) as (uu, uv, vv), (uuu, uuv, uvv, vvv)
        let quantity = |uu: &Interval<F>, uv: &Interval<F>, vv: &Interval<F>, uuu: &Interval<F>, uuv: &Interval<F>, uvv: &Interval<F>, vvv: &Interval<F>| {
            let prec = b.prec();
            let three = Interval::from_i64(3, prec);
            let two = Interval::from_i64(2, prec);
            let j = vv.clone();
            let k = vv.sqr().mul(uuu).sub(&three.mul(vv).mul(uv).mul(uuv)).add(&three.mul(&uv.sqr()).mul(uvv)).sub(&uv.mul(uu).mul(vvv));
            let l = vv.mul(uuv).add(&uu.mul(vvv)).sub(&two.mul(uv).mul(uvv));
            // the two products are independent interval products
            let m = vv.mul(uv).sub(&uv.mul(vv));
            j.mul(&j.mul(&k).sub(&l.mul(&m)))
        };
        [quantity(&xx, &xy, &yy, &xxx, &xxy, &xyy, &yyy), quantity(&yy, &xy, &xx, &yyy, &xyy, &xxy, &xxx)]
    }

    /// Node loop test; the cheap Hessian product first.
    pub fn node_loop_test<F: Float>(&self, b: &Box2<F>) -> Option<LoopTest> {
        let (xx, xy, yy) = (self.fxx.eval_box(b), self.fxy.eval_box(b), self.fyy.eval_box(b));
        if !xx.mul(&yy).sub(&xy.mul(&xy)).contains_zero() {
            return Some(LoopTest::HessianProduct);
        }
        krawczyk(&[&self.fx, &self.fy], b).certified().then_some(LoopTest::GradientKrawczyk)
    }

    pub fn cusp_loop_test<F: Float>(&self, b: &Box2<F>) -> Option<LoopTest> {
        let [i, i2] = self.cusp_quantities(b);
        if !i.contains_zero() {
            Some(LoopTest::CuspI)
        } else if !i2.contains_zero() {
            Some(LoopTest::CuspISwapped)
        } else {
            None
        }
    }

    pub fn loop_test<F: Float>(&self, kind: SingularityKind, b: &Box2<F>) -> Option<LoopTest> {
        match kind {
            SingularityKind::Node => self.node_loop_test(b),
            SingularityKind::OrdinaryCusp => self.cusp_loop_test(b),
        }
    }
}

/// `(P, P_z, P_zz)` compiled in three variables.
#[derive(Clone, Debug)]
pub struct TriplePointSystem {
    pub components: [CompiledPoly; 3],
}

impl TriplePointSystem {
    pub fn of(sys: &CurveSystem) -> Self {
        let p = sys.p_poly();
        let pz = p.derivative(Var::Z, 1);
        let pzz = p.derivative(Var::Z, 2);
        let c = |m: &MPoly| CompiledPoly::with_extension(m, 3, sys.extension());
        TriplePointSystem { components: [c(&p), c(&pz), c(&pzz)] }
    }

    /// Certified triple-root box above `b`, with `z` in `-□s21 / (2 □s22)`.
    pub fn certify<F: Float>(&self, sys: &CurveSystem, b: &Box2<F>) -> Option<Box3<F>> {
        let s22 = sys.s22.eval_box(b);
        if s22.contains_zero() {
            return None;
        }
        let two = Interval::from_i64(2, b.prec());
        let iz = sys.s21.eval_box(b).neg().div(&two.mul(&s22));
        if !iz.is_bounded() {
            return None;
        }
        // any z-range holding I_z will do; give it the width of b so the
        // Krawczyk box is not flat
        let half = b.diameter().ldexp(-1, Dir::Up);
        let m = iz.mid();
        let iz = iz.hull(&Interval::new(m.sub(&half, Dir::Down), m.add(&half, Dir::Up)));
        let [p, pz, pzz] = &self.components;
        let r = krawczyk(&[p, pz, pzz], &b.extend_z(iz));
        if r.certified() {
            r.contracted
        } else {
            None
        }
    }
}

/// One refinement loop: a test on the current box, contraction otherwise.
trait Stage {
    type Out;
    fn test<F: Endpoint>(&mut self, b: &Box2<F>) -> Option<Self::Out>;
}

enum Level<T> {
    Done(T, WorkBox),
    Stalled(WorkBox),
    OutOfIterations(WorkBox),
}

fn run_level<F: Endpoint, S: Stage>(sys: &CurveSystem, stage: &mut S, mut b: Box2<F>, iters: &mut u32, max_iters: u32) -> Level<S::Out> {
    loop {
        if let Some(out) = stage.test(&b) {
            return Level::Done(out, F::wrap(b));
        }
        if *iters >= max_iters {
            return Level::OutOfIterations(F::wrap(b));
        }
        *iters += 1;
        let nb = match contract(&sys.deflated(), &b) {
            Ok(nb) if below_precision_floor(&nb) => pad(&nb, &b),
            Ok(nb) => nb,
            Err(_) => return Level::Stalled(F::wrap(b)),
        };
        if nb == b {
            return Level::Stalled(F::wrap(b));
        }
        b = nb;
    }
}

/// Widens axes of `b` narrower than the precision floor to about that
/// width, staying inside `outer`. Tests need boxes with an interior.
fn pad<F: Float>(b: &Box2<F>, outer: &Box2<F>) -> Box2<F> {
    let prec = b.prec();
    let bits = F::precision_bits(prec);
    IBox::new(std::array::from_fn(|i| {
        let a = &b.axes[i];
        let scale = a.mag().to_f64(Dir::Up).max(1.0);
        let half = F::from_f64(10.0 * 2f64.powi(1 - bits as i32) * scale, prec);
        let m = a.mid();
        let wide = Interval::new(m.sub(&half, Dir::Down), m.add(&half, Dir::Up)).hull(a);
        wide.intersect(&outer.axes[i]).unwrap_or_else(|| a.clone())
    }))
}

/// Runs a stage from `start`, moving up the precision ladder each time
/// contraction stalls. Returns the last box when the ladder or the
/// iteration budget runs out.
fn drive<S: Stage>(sys: &CurveSystem, stage: &mut S, start: WorkBox, budget: &Budget, diag: &mut Diagnostics) -> Result<(S::Out, WorkBox), WorkBox> {
    let mut cur = start;
    for rung in ladder(budget.max_precision_bits) {
        if rung.bits() < cur.precision().bits() {
            continue;
        }
        let mut iters = 0;
        let out = match (rung, &cur) {
            (Precision::Double, WorkBox::Double(b)) => run_level(sys, stage, b.clone(), &mut iters, budget.max_iterations),
            (Precision::Bits(bits), WorkBox::Double(b)) => run_level(sys, stage, b.convert::<BigFloat>(bits), &mut iters, budget.max_iterations),
            (Precision::Bits(bits), WorkBox::Multi(b)) => run_level(sys, stage, b.convert::<BigFloat>(bits), &mut iters, budget.max_iterations),
            (Precision::Double, WorkBox::Multi(_)) => unreachable!("ladder only climbs"),
        };
        diag.contractions += iters;
        match out {
            Level::Done(v, w) => return Ok((v, w)),
            Level::Stalled(w) => cur = w,
            Level::OutOfIterations(w) => return Err(w),
        }
    }
    Err(cur)
}

struct ResultantClassifier<'a> {
    derivs: &'a CurveDerivatives,
}

impl Stage for ResultantClassifier<'_> {
    type Out = ClassificationTest;
    fn test<F: Endpoint>(&mut self, b: &Box2<F>) -> Option<ClassificationTest> {
        hessian_sign(self.derivs, b)
    }
}

fn hessian_sign<F: Float>(derivs: &CurveDerivatives, b: &Box2<F>) -> Option<ClassificationTest> {
    let det = derivs.hessian_det.eval_box(b);
    if det.is_positive() {
        Some(ClassificationTest::HessianPositive)
    } else if det.is_negative() {
        Some(ClassificationTest::HessianNegative)
    } else {
        None
    }
}

struct DiscriminantClassifier<'a> {
    sys: &'a CurveSystem,
    derivs: &'a CurveDerivatives,
    triple: &'a TriplePointSystem,
    triple_box: Option<Box3<f64>>,
}

impl Stage for DiscriminantClassifier<'_> {
    type Out = ClassificationTest;
    fn test<F: Endpoint>(&mut self, b: &Box2<F>) -> Option<ClassificationTest> {
        if let Some(t) = hessian_sign(self.derivs, b) {
            return Some(t);
        }
        let t = self.triple.certify(self.sys, b)?;
        self.triple_box = Some(IBox::from_f64s(t.to_f64_bounds(), 53));
        Some(ClassificationTest::TriplePoint)
    }
}

fn node_report(c: &CandidateBox, test: ClassificationTest) -> SingularityReport {
    let branches = if test == ClassificationTest::HessianPositive { 0 } else { 4 };
    SingularityReport {
        bbox: c.bbox.clone(),
        chart: c.chart,
        kind: SingularityKind::Node,
        branches,
        loop_free: false,
        boundary_crossings: None,
        triple_root_box: None,
        diagnostics: Diagnostics { classification: Some(test), ..Diagnostics::default() },
        work: WorkBox::Double(c.bbox.clone()),
    }
}

/// Branch count at a resultant singularity from the sign of the Hessian
/// determinant. A cusp never settles and ends in `BudgetExhausted` with a
/// cusp hint.
pub fn classify_resultant(sys: &CurveSystem, derivs: &CurveDerivatives, c: &CandidateBox, budget: &Budget) -> Result<SingularityReport, TopologyError> {
    let mut diag = Diagnostics::default();
    let mut stage = ResultantClassifier { derivs };
    match drive(sys, &mut stage, WorkBox::Double(pad(&c.bbox, &c.certificate.region)), budget, &mut diag) {
        Ok((test, w)) => {
            let mut r = node_report(c, test);
            r.diagnostics.contractions = diag.contractions;
            r.set_box(w);
            Ok(r)
        }
        Err(w) => Err(TopologyError::BudgetExhausted { phase: Phase::Classification, hint: Some(Hint::PossibleCusp), last_box: w.to_f64() }),
    }
}

/// Node or ordinary cusp at a discriminant singularity.
pub fn classify_discriminant(sys: &CurveSystem, derivs: &CurveDerivatives, triple: &TriplePointSystem, c: &CandidateBox, budget: &Budget) -> Result<SingularityReport, TopologyError> {
    let mut diag = Diagnostics::default();
    let mut stage = DiscriminantClassifier { sys, derivs, triple, triple_box: None };
    match drive(sys, &mut stage, WorkBox::Double(pad(&c.bbox, &c.certificate.region)), budget, &mut diag) {
        Ok((test, w)) => {
            let mut r = node_report(c, test);
            if test == ClassificationTest::TriplePoint {
                r.kind = SingularityKind::OrdinaryCusp;
                r.branches = 2;
                r.triple_root_box = stage.triple_box;
            }
            r.diagnostics.contractions = diag.contractions;
            r.set_box(w);
            Ok(r)
        }
        Err(w) => Err(TopologyError::BudgetExhausted { phase: Phase::Classification, hint: None, last_box: w.to_f64() }),
    }
}

struct LoopStage<'a> {
    derivs: &'a CurveDerivatives,
    kind: SingularityKind,
}

impl Stage for LoopStage<'_> {
    type Out = LoopTest;
    fn test<F: Endpoint>(&mut self, b: &Box2<F>) -> Option<LoopTest> {
        self.derivs.loop_test(self.kind, b)
    }
}

/// Contracts until the box provably holds no closed loop of the curve.
pub fn certify_no_loop(sys: &CurveSystem, derivs: &CurveDerivatives, mut r: SingularityReport, budget: &Budget) -> Result<SingularityReport, TopologyError> {
    let mut stage = LoopStage { derivs, kind: r.kind };
    match drive(sys, &mut stage, r.work.clone(), budget, &mut r.diagnostics) {
        Ok((t, w)) => {
            r.loop_free = true;
            r.diagnostics.loop_test = Some(t);
            r.set_box(w);
            Ok(r)
        }
        Err(w) => Err(TopologyError::BudgetExhausted { phase: Phase::LoopExclusion, hint: None, last_box: w.to_f64() }),
    }
}

/// Signs of `f` along one edge, counting simple roots by bisection.
struct EdgeCounter<'a, F: Float> {
    f: &'a CompiledPoly,
    /// Index of the free axis.
    axis: usize,
    fixed: Interval<F>,
}

impl<F: Float> EdgeCounter<'_, F> {
    const MAX_DEPTH: u32 = 200;

    fn at(&self, t: Interval<F>) -> Box2<F> {
        let mut axes = [self.fixed.clone(), self.fixed.clone()];
        axes[self.axis] = t;
        IBox::new(axes)
    }

    fn value(&self, t: &F) -> Interval<F> {
        self.f.eval_box(&self.at(Interval::point(t.clone())))
    }

    /// Simple roots in the open segment `t`; `f` is nonzero at both ends.
    fn count(&self, t: &Interval<F>, depth: u32) -> Result<u32, CrossingError> {
        let b = self.at(t.clone());
        if !self.f.eval_box(&b).contains_zero() {
            return Ok(0);
        }
        let slope = self.f.gradient_box(&b)[self.axis].clone();
        if !slope.contains_zero() {
            let (lo, hi) = (self.value(t.lo()), self.value(t.hi()));
            return Ok(u32::from(lo.is_positive() != hi.is_positive()));
        }
        if depth >= Self::MAX_DEPTH || below_precision_floor(&IBox::new([t.clone()])) {
            return Err(CrossingError::NonSimpleEdgeRoot);
        }
        // split off the midpoint when the curve passes exactly through it
        let w = t.width();
        let prec = t.prec();
        for k in [0i64, 1, -1, 3, -3] {
            let offset = w.mul(&F::from_i64(k, prec), Dir::Down).ldexp(-6, Dir::Down);
            let m = t.mid().add(&offset, Dir::Down);
            if !(*t.lo() < m && m < *t.hi()) || self.value(&m).contains_zero() {
                continue;
            }
            let left = Interval::new(t.lo().clone(), m.clone());
            let right = Interval::new(m, t.hi().clone());
            return Ok(self.count(&left, depth + 1)? + self.count(&right, depth + 1)?);
        }
        Err(CrossingError::NonSimpleEdgeRoot)
    }
}

/// Number of simple zeros of `f` on the boundary of `b`, or `None` when a
/// corner may lie on the curve.
fn crossings_exact_box<F: Float>(f: &CompiledPoly, b: &Box2<F>) -> Result<Option<u32>, CrossingError> {
    let [x, y] = &b.axes;
    for cx in [x.lo(), x.hi()] {
        for cy in [y.lo(), y.hi()] {
            let v = f.eval_box(&IBox::new([Interval::point(cx.clone()), Interval::point(cy.clone())]));
            if v.contains_zero() {
                return Ok(None);
            }
        }
    }
    let mut total = 0;
    for (axis, fixed) in [(0, y.lo()), (0, y.hi()), (1, x.lo()), (1, x.hi())] {
        let e = EdgeCounter { f, axis, fixed: Interval::point(fixed.clone()) };
        total += e.count(&b.axes[axis], 0)?;
    }
    Ok(Some(total))
}

const CORNER_SHRINK: f64 = 1e-3;
const CORNER_RETRIES: u32 = 8;

/// Shrinks the box about its center by a relative `1e-3` in `x` and half
/// that in `y`, so corners on a diagonal through the center move off it.
fn shrink<F: Float>(b: &Box2<F>) -> Box2<F> {
    let prec = b.prec();
    IBox::new(std::array::from_fn(|i| {
        let a = &b.axes[i];
        let rel = if i == 0 { CORNER_SHRINK } else { CORNER_SHRINK / 2.0 };
        let cut = a.width().mul(&F::from_f64(rel / 2.0, prec), Dir::Down);
        let lo = a.lo().add(&cut, Dir::Up);
        let hi = a.hi().sub(&cut, Dir::Down);
        if lo < hi {
            Interval::new(lo, hi)
        } else {
            a.clone()
        }
    }))
}

/// Boundary count with corner shrinking. `keep` decides whether a shrunk
/// box is still acceptable; returns the count, the box it holds for and
/// the number of shrinks.
fn crossings_with_retries<F: Float>(f: &CompiledPoly, b: &Box2<F>, keep: impl Fn(&Box2<F>) -> bool) -> Result<(u32, Box2<F>, u32), CrossingError> {
    let mut cur = b.clone();
    for retry in 0..=CORNER_RETRIES {
        if retry > 0 {
            cur = shrink(&cur);
            if !keep(&cur) {
                break;
            }
        }
        if let Some(n) = crossings_exact_box(f, &cur)? {
            return Ok((n, cur, retry));
        }
    }
    Err(CrossingError::CornerZeroUnresolved)
}

/// Number of branches of `f = 0` crossing the boundary of `b`, each a
/// certified simple edge root. Corners on the curve are moved off by
/// shrinking the box, a bounded number of times.
pub fn count_boundary_crossings<F: Float>(f: &CompiledPoly, b: &Box2<F>) -> Result<u32, CrossingError> {
    crossings_with_retries(f, b, |_| true).map(|(n, _, _)| n)
}

struct MatchStage<'a> {
    sys: &'a CurveSystem,
    derivs: &'a CurveDerivatives,
    kind: SingularityKind,
    branches: u32,
    max_bits: u32,
    found: Option<(LoopTest, u32)>,
}

impl MatchStage<'_> {
    fn try_at<F: Endpoint>(&mut self, b: &Box2<F>, core: &Box2<F>) -> Result<Option<WorkBox>, CrossingError> {
        // a shrunk box must still hold the zero enclosed by B ∩ K(B)
        let keep = |s: &Box2<F>| core.subset_of(s);
        let (n, used, retries) = crossings_with_retries(&self.derivs.f, b, keep)?;
        if n != self.branches {
            return Ok(None);
        }
        let Some(t) = self.derivs.loop_test(self.kind, &used) else {
            return Ok(None);
        };
        self.found = Some((t, retries));
        Ok(Some(F::wrap(used)))
    }
}

impl Stage for MatchStage<'_> {
    type Out = WorkBox;
    /// Edge roots are often resolvable by more precision on the same box
    /// long before contraction helps, so the ladder is tried first here.
    fn test<F: Endpoint>(&mut self, b: &Box2<F>) -> Option<WorkBox> {
        let core = contract(&self.sys.deflated(), b).ok()?;
        if let Ok(w) = self.try_at(b, &core) {
            return w;
        }
        let have = F::precision_bits(b.prec());
        for rung in ladder(self.max_bits) {
            if rung.bits() <= have {
                continue;
            }
            let (bb, cc) = (b.convert::<BigFloat>(rung.bits()), core.convert::<BigFloat>(rung.bits()));
            if let Ok(w) = self.try_at(&bb, &cc) {
                return w;
            }
        }
        None
    }
}

/// Contracts until the number of boundary crossings equals the branch
/// count, keeping the loop certificate on the final box.
pub fn refine_to_match(sys: &CurveSystem, derivs: &CurveDerivatives, mut r: SingularityReport, budget: &Budget) -> Result<SingularityReport, TopologyError> {
    let mut stage = MatchStage { sys, derivs, kind: r.kind, branches: r.branches, max_bits: budget.max_precision_bits, found: None };
    match drive(sys, &mut stage, r.work.clone(), budget, &mut r.diagnostics) {
        Ok((used, _)) => {
            let (t, retries) = stage.found.expect("set on success");
            r.loop_free = true;
            r.diagnostics.loop_test = Some(t);
            r.diagnostics.corner_retries = retries;
            r.boundary_crossings = Some(r.branches);
            r.set_box(used);
            Ok(r)
        }
        Err(w) => Err(TopologyError::BudgetExhausted { phase: Phase::BoundaryMatch, hint: None, last_box: w.to_f64() }),
    }
}

/// Schemes shared by every singularity of one chart.
#[derive(Clone, Debug)]
pub struct TopologyContext {
    pub sys: CurveSystem,
    pub derivs: CurveDerivatives,
    pub triple: Option<TriplePointSystem>,
    pub mode: CurveMode,
}

impl TopologyContext {
    pub fn new(sys: CurveSystem, mode: CurveMode) -> Self {
        let derivs = CurveDerivatives::of(&sys);
        let triple = (mode == CurveMode::Discriminant).then(|| TriplePointSystem::of(&sys));
        TopologyContext { sys, derivs, triple, mode }
    }

    pub fn classify(&self, c: &CandidateBox, budget: &Budget) -> Result<SingularityReport, TopologyError> {
        match &self.triple {
            Some(t) => classify_discriminant(&self.sys, &self.derivs, t, c, budget),
            None => classify_resultant(&self.sys, &self.derivs, c, budget),
        }
    }

    /// Classification, loop exclusion and boundary matching in turn.
    ///
    /// The type belongs to the point, not to the box, so the later phases
    /// restart from the isolation box: classification may need a box far
    /// too small for edge root counting.
    pub fn analyze(&self, c: &CandidateBox, budget: &Budget) -> Result<SingularityReport, TopologyError> {
        let mut r = self.classify(c, budget)?;
        r.work = WorkBox::Double(pad(&c.bbox, &c.certificate.region));
        let r = certify_no_loop(&self.sys, &self.derivs, r, budget)?;
        refine_to_match(&self.sys, &self.derivs, r, budget)
    }
}

/// Local topology of every candidate, in parallel, in input order.
/// `plane` is the system in plane coordinates; each candidate is handled
/// in its own chart.
pub fn analyze_all(plane: &CurveSystem, cands: &[CandidateBox], mode: CurveMode, budget: &Budget) -> Vec<Result<SingularityReport, TopologyError>> {
    let mut charts: Vec<Chart> = cands.iter().map(|c| c.chart).collect();
    charts.sort();
    charts.dedup();
    let ctxs: Vec<(Chart, TopologyContext)> = charts.into_iter().map(|ch| (ch, TopologyContext::new(plane.in_chart(ch), mode))).collect();
    cands
        .par_iter()
        .map(|c| {
            let ctx = &ctxs.iter().find(|(ch, _)| *ch == c.chart).expect("context per chart").1;
            ctx.analyze(c, budget)
        })
        .collect()
}

/// Largest diameters, found on a log scale, of boxes centered at a cusp
/// for which each test first succeeds.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Thresholds {
    /// `K_(s11, s10)(B) ⊂ int(B)`.
    pub contraction: Option<f64>,
    /// Cusp recognized through the triple-point certificate.
    pub classification: Option<f64>,
    /// Cusp loop test.
    pub loop_test: Option<f64>,
}

/// Box of diameter `d` about `center` at `bits` of precision.
pub fn centered_box(center: &[BigFloat; 2], d: f64, bits: u32) -> Box2<BigFloat> {
    let h = BigFloat::from_f64(d / 2.0, bits);
    IBox::new(std::array::from_fn(|i| Interval::new(center[i].sub(&h, Dir::Down), center[i].add(&h, Dir::Up))))
}

/// Scans diameters `10^(-k/steps)` from `max_d` down to `min_d` and
/// reports, for each test, the first (largest) diameter that passes.
pub fn first_success_diameters(ctx: &TopologyContext, center: &[BigFloat; 2], max_d: f64, min_d: f64, steps_per_decade: u32, bits: u32) -> Thresholds {
    let mut out = Thresholds::default();
    let decades = (max_d / min_d).log10();
    let n = (decades * steps_per_decade as f64).ceil() as u32;
    for k in 0..=n {
        let d = max_d * 10f64.powf(-(k as f64) / steps_per_decade as f64);
        let b = centered_box(center, d, bits);
        if out.contraction.is_none() && krawczyk(&ctx.sys.deflated(), &b).certified() {
            out.contraction = Some(d);
        }
        if out.classification.is_none() && hessian_sign(&ctx.derivs, &b).is_none() {
            if let Some(t) = &ctx.triple {
                if t.certify(&ctx.sys, &b).is_some() {
                    out.classification = Some(d);
                }
            }
        }
        if out.loop_test.is_none() && ctx.derivs.cusp_loop_test(&b).is_some() {
            out.loop_test = Some(d);
        }
        if out.contraction.is_some() && out.classification.is_some() && out.loop_test.is_some() {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::isolate::isolate_in_box;

    fn b2(x: (f64, f64), y: (f64, f64)) -> Box2<f64> {
        IBox::from_f64s([x, y], 53)
    }

    fn cusp_p() -> MPoly {
        MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)])
    }

    fn node_pair() -> (MPoly, MPoly) {
        (
            MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 0, 0, 1)]),
            MPoly::from_int_terms(&[(1, 0, 0, 2), (2, 1, 0, 1), (-1, 0, 0, 1), (1, 0, 1, 0), (-1, 1, 0, 0)]),
        )
    }

    fn first_candidate(p: &MPoly, q: &MPoly) -> (CurveSystem, CandidateBox) {
        let unit = b2((-1.0, 1.0), (-1.0, 1.0));
        let r = isolate_in_box(p, q, &unit, &EngineConfig::default(), false).unwrap();
        assert_eq!(r.candidates.len(), 1);
        (CurveSystem::new(p, q).unwrap(), r.candidates[0].clone())
    }

    #[test]
    fn node_fixture_has_four_branches() {
        let (p, q) = node_pair();
        let (sys, c) = first_candidate(&p, &q);
        let ctx = TopologyContext::new(sys, CurveMode::Resultant);
        let r = ctx.analyze(&c, &Budget::default()).unwrap();
        assert_eq!((r.kind, r.branches, r.loop_free, r.boundary_crossings), (SingularityKind::Node, 4, true, Some(4)));
        assert!(r.bbox.contains_point(&[0.0, 0.0]));
    }

    #[test]
    fn resultant_mode_cusp_exhausts_with_hint() {
        let p = cusp_p();
        let (sys, c) = first_candidate(&p, &p.derivative(Var::Z, 1));
        let ctx = TopologyContext::new(sys, CurveMode::Resultant);
        let budget = Budget { max_precision_bits: 128, ..Budget::default() };
        match ctx.classify(&c, &budget) {
            Err(TopologyError::BudgetExhausted { phase: Phase::Classification, hint: Some(Hint::PossibleCusp), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn discriminant_mode_cusp() {
        let p = cusp_p();
        let (sys, c) = first_candidate(&p, &p.derivative(Var::Z, 1));
        let ctx = TopologyContext::new(sys, CurveMode::Discriminant);
        let r = ctx.analyze(&c, &Budget::default()).unwrap();
        assert_eq!((r.kind, r.branches, r.loop_free, r.boundary_crossings), (SingularityKind::OrdinaryCusp, 2, true, Some(2)));
        assert!(r.triple_root_box.unwrap().contains_point(&[0.0, 0.0, 0.0]));
        assert!(r.bbox.contains_point(&[0.0, 0.0]) && r.bbox.diameter_f64() <= 1e-3);
        assert_eq!(r.diagnostics.classification, Some(ClassificationTest::TriplePoint));
    }

    #[test]
    fn isolated_point_has_no_branches() {
        // Q(±i) = y ∓ ix, so f = x² + y²
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (1, 0, 0, 0)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 1, 0, 1), (1, 0, 1, 0), (1, 0, 0, 0)]);
        let (sys, c) = first_candidate(&p, &q);
        let ctx = TopologyContext::new(sys, CurveMode::Resultant);
        let r = ctx.analyze(&c, &Budget::default()).unwrap();
        assert_eq!((r.kind, r.branches, r.loop_free, r.boundary_crossings), (SingularityKind::Node, 0, true, Some(0)));
        assert_eq!(r.diagnostics.classification, Some(ClassificationTest::HessianPositive));
    }

    #[test]
    fn cusp_loop_quantities_on_the_model_cusp() {
        let f = MPoly::from_int_terms(&[(4, 3, 0, 0), (27, 0, 2, 0)]);
        let d = CurveDerivatives::new(&f, Extension::default());
        let [i, _] = d.cusp_quantities(&b2((-0.1, 0.1), (-0.1, 0.1)));
        assert_eq!(i.to_f64_bounds(), (54.0 * 54.0 * 69984.0, 54.0 * 54.0 * 69984.0));
        assert_eq!(d.cusp_loop_test(&b2((-0.1, 0.1), (-0.1, 0.1))), Some(LoopTest::CuspI));
    }

    #[test]
    fn node_loop_test_on_the_model_node() {
        let f = MPoly::from_int_terms(&[(1, 0, 2, 0), (-1, 2, 0, 0)]);
        let d = CurveDerivatives::new(&f, Extension::default());
        let b = b2((-0.5, 0.5), (-0.5, 0.5));
        assert!(krawczyk(&[&d.fx, &d.fy], &b).certified());
        assert!(d.node_loop_test(&b).is_some());
    }

    #[test]
    fn boundary_crossings_of_model_curves() {
        let node = CompiledPoly::new(&MPoly::from_int_terms(&[(1, 0, 2, 0), (-1, 2, 0, 0)]), 2);
        assert_eq!(count_boundary_crossings(&node, &b2((-0.6, 0.4), (-0.5, 0.5))), Ok(4));
        // corners on the curve: shrinking moves them off
        assert_eq!(count_boundary_crossings(&node, &b2((-1.0, 1.0), (-1.0, 1.0))), Ok(4));
        let cusp = CompiledPoly::new(&MPoly::from_int_terms(&[(4, 3, 0, 0), (27, 0, 2, 0)]), 2);
        assert_eq!(count_boundary_crossings(&cusp, &b2((-0.1, 0.1), (-0.1, 0.1))), Ok(2));
        let empty = CompiledPoly::new(&MPoly::from_int_terms(&[(1, 2, 0, 0), (1, 0, 2, 0), (1, 0, 0, 0)]), 2);
        assert_eq!(count_boundary_crossings(&empty, &b2((-3.0, 2.0), (-1.0, 5.0))), Ok(0));
    }
}
