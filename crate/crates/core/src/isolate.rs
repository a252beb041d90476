//! Subdivision isolation of the singular points of `f = Res_z(P, Q)` as the
//! regular zeros of `(s11, s10)` where `s22 ≠ 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assumptions::{check_system, AssumptionVerdict};
use crate::config::{with_jobs, EngineConfig};
use crate::interval::{contract, krawczyk, Box2, CompiledPoly, IBox, Interval, KrawczykStatus};
use crate::mpoly::{MPoly, PolyError};
pub use crate::system::Chart;
use crate::system::CurveSystem;

/// Record of the Krawczyk test that accepted a box.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Inflated box on which `K ⊂ int` held: the zero is unique in here.
    pub region: Box2<f64>,
    /// Subdivision depth of the accepted box.
    pub depth: u32,
}

/// Interval values cached when a box was accepted.
#[derive(Clone, Debug)]
pub struct CachedValues {
    pub f: Interval<f64>,
    pub s11: Interval<f64>,
    pub s10: Interval<f64>,
    pub s22: Interval<f64>,
}

#[derive(Clone, Debug)]
pub struct CandidateBox {
    /// Contracted enclosure of the singular point, in chart coordinates.
    pub bbox: Box2<f64>,
    pub chart: Chart,
    pub certificate: Certificate,
    pub values: CachedValues,
}

impl CandidateBox {
    /// Enclosure in the original `(x, y)` plane.
    pub fn plane_box(&self) -> Box2<f64> {
        self.chart.to_plane(&self.bbox)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsolationStatus {
    Complete,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IsolationStats {
    pub boxes_processed: usize,
    pub max_depth_reached: u32,
    /// Smallest diameter of an accepted box before contraction.
    pub min_accepted_diameter: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Isolation {
    pub status: IsolationStatus,
    pub candidates: Vec<CandidateBox>,
    /// Boxes still undecided when the budget ran out.
    pub frontier: Vec<Box2<f64>>,
    pub stats: IsolationStats,
}

#[derive(Debug, thiserror::Error)]
pub enum IsolateError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("assumptions not verified on the {chart:?} chart ({} stalled boxes)", verdict.stalled.len())]
    AssumptionNotVerified { chart: Chart, verdict: Box<AssumptionVerdict> },
}

enum Outcome {
    Discard,
    Split,
    Accept(Box<CandidateBox>),
}

fn examine(sys: &CurveSystem, b: &Box2<f64>, depth: u32, chart: Chart, eps: f64) -> Outcome {
    let f = sys.f.eval_box(b);
    if !f.contains_zero() {
        return Outcome::Discard;
    }
    let s11 = sys.s11.eval_box(b);
    if !s11.contains_zero() {
        return Outcome::Discard;
    }
    let s10 = sys.s10.eval_box(b);
    if !s10.contains_zero() {
        return Outcome::Discard;
    }
    let region = b.inflate(eps);
    let k = krawczyk(&sys.deflated(), &region);
    match k.status {
        // no zero of (s11, s10) in the inflated box, hence none in b
        KrawczykStatus::NoZero => Outcome::Discard,
        KrawczykStatus::Certified => {
            let s22 = sys.s22.eval_box(&region);
            if s22.contains_zero() {
                return Outcome::Split;
            }
            Outcome::Accept(Box::new(CandidateBox {
                bbox: k.contracted.expect("certified"),
                chart,
                certificate: Certificate { region, depth },
                values: CachedValues { f, s11, s10, s22 },
            }))
        }
        _ => Outcome::Split,
    }
}

/// Whether two certified candidates enclose the same zero. Each bbox holds
/// its zero and each region holds exactly one zero, so containment of one
/// bbox in the other's region means the same zero, and disjoint bboxes mean
/// different zeros. Contraction shrinks bboxes until one case applies.
fn same_zero(system: &[&CompiledPoly; 2], a: &mut CandidateBox, c: &mut CandidateBox) -> bool {
    for _ in 0..64 {
        if a.bbox.intersect(&c.bbox).is_none() {
            return false;
        }
        if a.bbox.subset_of(&c.certificate.region) || c.bbox.subset_of(&a.certificate.region) {
            return true;
        }
        let (Ok(na), Ok(nc)) = (contract(system, &a.bbox), contract(system, &c.bbox)) else {
            return false;
        };
        if na == a.bbox && nc == c.bbox {
            return false;
        }
        a.bbox = na;
        c.bbox = nc;
    }
    false
}

fn merge_duplicates(sys: &CurveSystem, cands: Vec<CandidateBox>) -> Vec<CandidateBox> {
    let system = sys.deflated();
    let mut kept: Vec<CandidateBox> = Vec::new();
    'next: for mut c in cands {
        for k in kept.iter_mut() {
            if same_zero(&system, k, &mut c) {
                if let Some(both) = k.bbox.intersect(&c.bbox) {
                    k.bbox = both;
                }
                continue 'next;
            }
        }
        kept.push(c);
    }
    kept
}

/// Algorithm core without the assumption gate.
pub fn isolate_system(sys: &CurveSystem, b0: &Box2<f64>, chart: Chart, cfg: &EngineConfig) -> Isolation {
    with_jobs(cfg.jobs, || isolate_inner(sys, b0, chart, cfg))
}

fn isolate_inner(sys: &CurveSystem, b0: &Box2<f64>, chart: Chart, cfg: &EngineConfig) -> Isolation {
    let budget = &cfg.budget;
    let mut stats = IsolationStats::default();
    let mut cands = Vec::new();
    let mut frontier = Vec::new();
    let mut level = vec![b0.clone()];
    let mut depth = 0u32;
    while !level.is_empty() {
        let room = budget.max_boxes.saturating_sub(stats.boxes_processed);
        if room < level.len() {
            frontier.extend(level.drain(room..));
        }
        if level.is_empty() {
            break;
        }
        stats.boxes_processed += level.len();
        stats.max_depth_reached = depth;
        let outcomes: Vec<Outcome> = level.par_iter().map(|b| examine(sys, b, depth, chart, cfg.inflation)).collect();
        let mut next = Vec::new();
        for (b, out) in level.into_iter().zip(outcomes) {
            match out {
                Outcome::Discard => {}
                Outcome::Accept(c) => {
                    let d = b.diameter_f64();
                    stats.min_accepted_diameter = Some(stats.min_accepted_diameter.map_or(d, |m: f64| m.min(d)));
                    cands.push(*c);
                }
                Outcome::Split if depth >= budget.max_depth => frontier.push(b),
                Outcome::Split => {
                    let mut kids = b.quadrisect();
                    kids.sort_by(|a, c| a.lex_cmp(c));
                    next.extend(kids);
                }
            }
        }
        level = next;
        depth += 1;
    }
    let mut candidates = merge_duplicates(sys, cands);
    candidates.sort_by(|a, b| a.bbox.lex_cmp(&b.bbox));
    frontier.sort_by(|a, b| a.lex_cmp(b));
    let status = if frontier.is_empty() { IsolationStatus::Complete } else { IsolationStatus::BudgetExhausted };
    Isolation { status, candidates, frontier, stats }
}

/// Isolates the singular points of `Res_z(P, Q)` in `b0`.
///
/// The assumptions are checked first unless `allow_unverified` is set.
pub fn isolate_in_box(p: &MPoly, q: &MPoly, b0: &Box2<f64>, cfg: &EngineConfig, allow_unverified: bool) -> Result<Isolation, IsolateError> {
    let sys = CurveSystem::with_extension(p, q, cfg.extension)?;
    gate(&sys, b0, Chart::Identity, cfg, allow_unverified)?;
    Ok(isolate_system(&sys, b0, Chart::Identity, cfg))
}

/// Runs the assumption checker. Stalled boxes on the chart's line at
/// infinity do not block and are returned instead.
fn gate(sys: &CurveSystem, b0: &Box2<f64>, chart: Chart, cfg: &EngineConfig, allow_unverified: bool) -> Result<Vec<Box2<f64>>, IsolateError> {
    if allow_unverified {
        return Ok(Vec::new());
    }
    let v = with_jobs(cfg.jobs, || check_system(sys, b0, &cfg.budget));
    if v.verified() {
        return Ok(Vec::new());
    }
    if v.stalled.iter().all(|s| chart.touches_infinity(&s.bbox)) {
        return Ok(v.stalled.into_iter().map(|s| s.bbox).collect());
    }
    Err(IsolateError::AssumptionNotVerified { chart, verdict: Box::new(v) })
}

/// Boxes inflated by `eps` about their centers, with any that touch or
/// overlap merged into their bounding box.
pub fn inflate_and_cluster(boxes: &[Box2<f64>], eps: f64) -> Vec<Box2<f64>> {
    let mut out: Vec<Box2<f64>> = boxes.iter().map(|b| b.inflate(eps)).collect();
    loop {
        let mut merged = false;
        let mut i = 0;
        while i < out.len() {
            let mut j = i + 1;
            while j < out.len() {
                if out[i].meets(&out[j]) {
                    let b = out.swap_remove(j);
                    out[i] = out[i].hull(&b);
                    merged = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !merged {
            break;
        }
    }
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

/// Isolation over all of `ℝ²` through the three charts.
#[derive(Clone, Debug)]
pub struct GlobalIsolation {
    pub status: IsolationStatus,
    /// Back-mapped to the plane, merged across charts.
    pub candidates: Vec<CandidateBox>,
    pub per_chart: Vec<(Chart, Isolation)>,
    /// Chart boxes on a line at infinity where the assumption checker
    /// stalled. They map to points beyond `1/width` in the plane.
    pub unchecked_at_infinity: Vec<(Chart, Box2<f64>)>,
}

pub fn isolate_global(p: &MPoly, q: &MPoly, cfg: &EngineConfig, allow_unverified: bool) -> Result<GlobalIsolation, IsolateError> {
    let unit: Box2<f64> = IBox::from_f64s([(-1.0, 1.0), (-1.0, 1.0)], 53);
    let plane = CurveSystem::with_extension(p, q, cfg.extension)?;
    let mut per_chart = Vec::new();
    let mut unchecked_at_infinity = Vec::new();
    for chart in Chart::ALL {
        let sys = plane.in_chart(chart);
        let skipped = gate(&sys, &unit, chart, cfg, allow_unverified)?;
        unchecked_at_infinity.extend(skipped.into_iter().map(|b| (chart, b)));
        per_chart.push((chart, isolate_system(&sys, &unit, chart, cfg)));
    }
    let status = if per_chart.iter().all(|(_, r)| r.status == IsolationStatus::Complete) {
        IsolationStatus::Complete
    } else {
        IsolationStatus::BudgetExhausted
    };
    let all: Vec<CandidateBox> = per_chart.iter().flat_map(|(_, r)| r.candidates.iter().cloned()).collect();
    let candidates = merge_across_charts(&plane, all, cfg.inflation);
    Ok(GlobalIsolation { status, candidates, per_chart, unchecked_at_infinity })
}

/// Clusters back-mapped boxes; a cluster of several is re-certified by one
/// Krawczyk call on its inflated hull in plane coordinates.
pub fn merge_across_charts(plane: &CurveSystem, all: Vec<CandidateBox>, eps: f64) -> Vec<CandidateBox> {
    let mapped: Vec<Box2<f64>> = all.iter().map(CandidateBox::plane_box).collect();
    let clusters = inflate_and_cluster(&mapped, 0.0);
    let mut out = Vec::new();
    for cl in clusters {
        let members: Vec<usize> = (0..all.len()).filter(|&i| mapped[i].subset_of(&cl)).collect();
        let first = all[members[0]].clone();
        if members.len() == 1 {
            out.push(first);
            continue;
        }
        let region = cl.inflate(eps);
        let k = if region.is_bounded() { Some(krawczyk(&plane.deflated(), &region)) } else { None };
        match k {
            Some(k) if k.certified() => out.push(CandidateBox {
                bbox: k.contracted.expect("certified"),
                chart: Chart::Identity,
                certificate: Certificate { region, depth: first.certificate.depth },
                values: first.values.clone(),
            }),
            // could not re-certify as one zero; keep the chart results apart
            _ => out.extend(members.iter().map(|&i| all[i].clone())),
        }
    }
    out.sort_by(|a, b| a.chart.cmp(&b.chart).then(a.bbox.lex_cmp(&b.bbox)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Box2<f64> {
        IBox::from_f64s([(-1.0, 1.0), (-1.0, 1.0)], 53)
    }

    fn cusp() -> (MPoly, MPoly) {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)]);
        let q = p.derivative(crate::mpoly::Var::Z, 1);
        (p, q)
    }

    fn node() -> (MPoly, MPoly) {
        (
            MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 0, 0, 1)]),
            MPoly::from_int_terms(&[(1, 0, 0, 2), (2, 1, 0, 1), (-1, 0, 0, 1), (1, 0, 1, 0), (-1, 1, 0, 0)]),
        )
    }

    #[test]
    fn cusp_isolated_once() {
        let (p, q) = cusp();
        let r = isolate_in_box(&p, &q, &unit(), &EngineConfig::default(), false).unwrap();
        assert_eq!(r.status, IsolationStatus::Complete);
        assert_eq!(r.candidates.len(), 1);
        assert!(r.candidates[0].bbox.contains_point(&[0.0, 0.0]));
    }

    #[test]
    fn node_isolated_once() {
        let (p, q) = node();
        let r = isolate_in_box(&p, &q, &unit(), &EngineConfig::default(), false).unwrap();
        assert_eq!(r.candidates.len(), 1);
        assert!(r.candidates[0].bbox.contains_point(&[0.0, 0.0]));
    }

    #[test]
    fn smooth_curve_has_no_candidates() {
        let p = MPoly::from_int_terms(&[(1, 0, 0, 2), (-1, 1, 0, 0)]);
        let q = MPoly::from_int_terms(&[(1, 0, 0, 2), (-25, 0, 0, 0)]);
        let r = isolate_in_box(&p, &q, &unit(), &EngineConfig::default(), true).unwrap();
        assert!(r.candidates.is_empty());
    }

    #[test]
    fn global_isolation_of_fixtures() {
        for (p, q) in [cusp(), node()] {
            let r = isolate_global(&p, &q, &EngineConfig::default(), false).unwrap();
            assert_eq!(r.status, IsolationStatus::Complete);
            assert_eq!(r.candidates.len(), 1);
            assert!(r.candidates[0].plane_box().contains_point(&[0.0, 0.0]));
        }
    }

    #[test]
    fn chart_invariance_inside_the_unit_box() {
        for (p, q) in [cusp(), node()] {
            let local = isolate_in_box(&p, &q, &unit(), &EngineConfig::default(), false).unwrap();
            let global = isolate_global(&p, &q, &EngineConfig::default(), false).unwrap();
            let (a, b) = (local.candidates[0].bbox.to_f64_bounds(), global.candidates[0].plane_box().to_f64_bounds());
            for k in 0..2 {
                assert!((a[k].0 - b[k].0).abs() <= 1e-10 && (a[k].1 - b[k].1).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn chart_transform_is_the_cleared_numerator() {
        // Q = z² + (2x − 1)z + (y − x) with x = 1/u, y = v/u, times u
        let (_, q) = node();
        let t = Chart::ChartU.transform(&q);
        assert_eq!(t, MPoly::from_int_terms(&[(1, 1, 0, 2), (2, 0, 0, 1), (-1, 1, 0, 1), (1, 0, 1, 0), (-1, 0, 0, 0)]));
        // a group shares one power: (6x, 9y) -> (6, 9v) in the u chart
        let g = Chart::ChartU.transform_group(&[&MPoly::from_int_terms(&[(6, 1, 0, 0)]), &MPoly::from_int_terms(&[(9, 0, 1, 0)])]);
        assert_eq!(g, vec![MPoly::int(6), MPoly::from_int_terms(&[(9, 0, 1, 0)])]);
    }

    #[test]
    fn clustering() {
        let a: Box2<f64> = IBox::from_f64s([(0.0, 1.0), (0.0, 1.0)], 53);
        let b: Box2<f64> = IBox::from_f64s([(1.0, 2.0), (0.0, 1.0)], 53);
        let far: Box2<f64> = IBox::from_f64s([(5.0, 6.0), (5.0, 6.0)], 53);
        assert_eq!(inflate_and_cluster(&[a.clone(), far.clone()], 0.0).len(), 2);
        assert_eq!(inflate_and_cluster(&[a.clone(), b], 0.0), vec![IBox::from_f64s([(0.0, 2.0), (0.0, 1.0)], 53)]);
        assert_eq!(inflate_and_cluster(&[a], 0.1)[0].to_f64_bounds(), [(-0.05, 1.05), (-0.05, 1.05)]);
    }
}
