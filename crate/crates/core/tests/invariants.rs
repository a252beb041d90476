//! Property tests tying the numeric pipeline to exact computations on
//! random desk-scale instances.

use std::cmp::Ordering;

use num_rational::BigRational;
use proptest::prelude::*;

use singuline::assumptions::check_system;
use singuline::config::{with_jobs, Budget, CurveMode, EngineConfig};
use singuline::interval::{contract, BigFloat, Box2, CompiledPoly, IBox};
use singuline::isolate::{isolate_in_box, CandidateBox};
use singuline::mpoly::{rat, resultant_z, MPoly, Var};
use singuline::oracle::{oracle_singular_points, oracle_solve, pow10, ExactKind, ExactPoint, RatBox};
use singuline::random::{dense_pair, dense_poly, rng};
use singuline::system::CurveSystem;
use singuline::topology::{SingularityKind, TopologyContext};

fn unit() -> Box2<f64> {
    IBox::from_f64s([(-1.0, 1.0), (-1.0, 1.0)], 53)
}

fn unit_rat() -> RatBox {
    RatBox::from_f64(-1.0, 1.0, -1.0, 1.0)
}

fn few(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// A random degree-3 pair that passes the assumption checks, with its
/// certified candidates.
fn verified_instance(seed: u64) -> Option<(MPoly, MPoly, Vec<CandidateBox>)> {
    let (p, q) = dense_pair(seed, 3, 8);
    let iso = isolate_in_box(&p, &q, &unit(), &EngineConfig::default(), false).ok()?;
    Some((p, q, iso.candidates))
}

fn exact_sign(p: &mut ExactPoint, m: &MPoly) -> Option<Ordering> {
    p.sign_of(m)
}

fn arb_small_poly() -> impl Strategy<Value = MPoly> {
    (any::<u64>(), 1u32..4).prop_map(|(s, d)| dense_poly(&mut rng(s), d, 6))
}

fn arb_rational() -> impl Strategy<Value = BigRational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(few(24))]

    #[test]
    fn mixed_partials_commute(p in arb_small_poly()) {
        let a = p.derivative(Var::X, 1).derivative(Var::Y, 1);
        let b = p.derivative(Var::Y, 1).derivative(Var::X, 1);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exact_evaluation_is_a_ring_homomorphism(p in arb_small_poly(), q in arb_small_poly(), pt in proptest::array::uniform3(arb_rational())) {
        let e = |m: &MPoly| m.eval_exact(&pt).unwrap();
        prop_assert_eq!(e(&(&p * &q)), e(&p) * e(&q));
        prop_assert_eq!(e(&(&p + &q)), e(&p) + e(&q));
    }

    #[test]
    fn resultant_is_unchanged_by_adding_a_multiple(seed in any::<u64>(), c in arb_rational()) {
        let (p, q) = dense_pair(seed, 2, 6);
        prop_assume!(p.degree(Var::Z) == q.degree(Var::Z) && p.degree(Var::Z) >= 1);
        let shifted = &q + &p.scale(&c);
        prop_assume!(shifted.degree(Var::Z) == p.degree(Var::Z));
        let r0 = resultant_z(&p, &q).unwrap();
        let r1 = resultant_z(&p, &shifted).unwrap();
        // equal up to a nonzero constant
        let (e, c0) = r0.terms().next().map(|(e, c)| (*e, c.clone())).unwrap();
        let c1 = r1.coeff(&e);
        prop_assert!(c1 != BigRational::from_integer(0.into()));
        prop_assert_eq!(r0.scale(&(c1 / c0)), r1);
    }
}

proptest! {
    #![proptest_config(few(6))]

    #[test]
    fn assumption_verdict_ignores_worker_count(seed in 0u64..200) {
        let (p, q) = dense_pair(seed, 3, 8);
        let sys = CurveSystem::new(&p, &q).unwrap();
        let budget = Budget { max_boxes: 20_000, ..Budget::default() };
        let one = with_jobs(Some(1), || check_system(&sys, &unit(), &budget));
        let four = with_jobs(Some(4), || check_system(&sys, &unit(), &budget));
        prop_assert_eq!(one.status, four.status);
        let boxes = |v: &singuline::assumptions::AssumptionVerdict| v.stalled.iter().map(|s| (s.bbox.to_f64_bounds(), s.reason)).collect::<Vec<_>>();
        prop_assert_eq!(boxes(&one), boxes(&four));
    }

    #[test]
    fn verified_instances_have_only_nodes_and_cusps(seed in 0u64..200) {
        let Some((p, q, _)) = verified_instance(seed) else { return Ok(()) };
        for s in oracle_singular_points(&p, &q, &unit_rat()).unwrap() {
            prop_assert!(s.kind != ExactKind::Other, "seed {seed}: {:?}", s.point.approx());
        }
    }

    #[test]
    fn certified_boxes_match_exact_singular_points(seed in 0u64..200) {
        let Some((p, q, cands)) = verified_instance(seed) else { return Ok(()) };
        let exact = oracle_singular_points(&p, &q, &unit_rat()).unwrap();
        let boxes: Vec<RatBox> = cands.iter().map(|c| RatBox::from_box(&c.plane_box())).collect();
        for b in &boxes {
            prop_assert_eq!(exact.iter().filter(|s| s.point.in_box(b)).count(), 1);
        }
        for s in &exact {
            prop_assert_eq!(boxes.iter().filter(|b| s.point.in_box(b)).count(), 1);
        }
    }

    #[test]
    fn refined_boxes_stay_singular(seed in 0u64..200) {
        let Some((p, q, cands)) = verified_instance(seed) else { return Ok(()) };
        let sys = CurveSystem::new(&p, &q).unwrap();
        let f = sys.f_poly();
        let polys = [f.clone(), f.derivative(Var::X, 1), f.derivative(Var::Y, 1)].map(|m| CompiledPoly::new(&m, 2));
        for c in &cands {
            let mut b: Box2<BigFloat> = c.bbox.convert(128);
            for _ in 0..50 {
                if b.diameter_f64() <= 1e-6 {
                    break;
                }
                b = contract(&sys.deflated(), &b).unwrap();
            }
            prop_assert!(b.diameter_f64() <= 1e-6);
            for g in &polys {
                prop_assert!(g.eval_box(&b).contains_zero());
            }
        }
    }

    #[test]
    fn exact_singular_points_back_substitute(seed in 0u64..200) {
        let (p, q) = dense_pair(seed, 3, 8);
        let f = resultant_z(&p, &q).unwrap();
        let derivs = [f.clone(), f.derivative(Var::X, 1), f.derivative(Var::Y, 1)];
        for mut s in oracle_singular_points(&p, &q, &unit_rat()).unwrap() {
            s.point.refine(&pow10(-30));
            for g in &derivs {
                prop_assert!(s.point.enclose(g).contains_zero());
            }
        }
    }

    #[test]
    fn subresultant_zeros_are_the_singular_points(seed in 0u64..200) {
        let Some((p, q, _)) = verified_instance(seed) else { return Ok(()) };
        let sys = CurveSystem::new(&p, &q).unwrap();
        let d = &sys.sres;
        let sres: Vec<ExactPoint> = oracle_solve(&[&d.s11, &d.s10], &unit_rat())
            .unwrap()
            .into_iter()
            // undecided signs at 1e-240 are zeros of s22, which are excluded
            .filter_map(|mut pt| matches!(exact_sign(&mut pt, &d.s22), Some(Ordering::Less | Ordering::Greater)).then_some(pt))
            .collect();
        let sing = oracle_singular_points(&p, &q, &unit_rat()).unwrap();
        prop_assert_eq!(sres.len(), sing.len());
        // match the two solution sets by refined coordinates
        let jac = &(&d.s11.derivative(Var::X, 1) * &d.s10.derivative(Var::Y, 1)) - &(&d.s11.derivative(Var::Y, 1) * &d.s10.derivative(Var::X, 1));
        for mut s in sing {
            s.point.refine(&pow10(-30));
            let hit = sres.iter().filter(|r| {
                let (a, b) = (r.approx(), s.point.approx());
                (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
            }).count();
            prop_assert_eq!(hit, 1);
            // regular zero of (s11, s10) iff node or cusp
            let regular = matches!(exact_sign(&mut s.point, &jac), Some(Ordering::Less | Ordering::Greater));
            prop_assert_eq!(regular, s.kind != ExactKind::Other);
        }
    }

    #[test]
    fn classification_and_loops_agree_with_exact_data(seed in 0u64..200) {
        let Some((p, q, cands)) = verified_instance(seed) else { return Ok(()) };
        let sys = CurveSystem::new(&p, &q).unwrap();
        let f = sys.f_poly();
        let (fx, fy) = (f.derivative(Var::X, 1), f.derivative(Var::Y, 1));
        let ctx = TopologyContext::new(sys, CurveMode::Resultant);
        let exact = oracle_singular_points(&p, &q, &unit_rat()).unwrap();
        for c in &cands {
            let Ok(r) = ctx.analyze(c, &Budget::default()) else { continue };
            let b = RatBox::from_box(&r.plane_box());
            let s = exact.iter().find(|s| s.point.in_box(&b)).expect("exact point in final box");
            prop_assert_eq!(s.kind, ExactKind::Node);
            prop_assert_eq!(r.kind, SingularityKind::Node);
            let branches = if s.hessian_sign == Ordering::Less { 4 } else { 0 };
            prop_assert_eq!(r.branches, branches);
            if r.loop_free {
                prop_assert_eq!(oracle_solve(&[&fx, &fy], &b).unwrap().len(), 1);
            }
        }
    }
}

fn cusp_p() -> MPoly {
    MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)])
}

proptest! {
    #![proptest_config(few(64))]

    /// Enlarging a box never turns a failing cusp loop test into a passing one.
    #[test]
    fn cusp_loop_test_is_conservative(
        x0 in -1e-2f64..1e-2, y0 in -1e-2f64..1e-2, w in 1e-6f64..1e-1, h in 1e-6f64..1e-1,
        gx in 0.0f64..1e-1, gy in 0.0f64..1e-1,
    ) {
        let sys = CurveSystem::discriminant(&cusp_p()).unwrap();
        let ctx = TopologyContext::new(sys, CurveMode::Discriminant);
        let small: Box2<f64> = IBox::from_f64s([(x0, x0 + w), (y0, y0 + h)], 53);
        let large: Box2<f64> = IBox::from_f64s([(x0 - gx, x0 + w + gx), (y0 - gy, y0 + h + gy)], 53);
        if ctx.derivs.cusp_loop_test(&small).is_none() {
            prop_assert!(ctx.derivs.cusp_loop_test(&large).is_none());
        }
    }
}

/// `(z³ + zx − y)((x − δ)² + (z − 1)² + y²) − (δ/3)²` with `δ = 2^-k`.
fn p_cusp(k: u32) -> MPoly {
    let d = rat(1, 1 << k);
    let (x, y, z) = (MPoly::x(), MPoly::y(), MPoly::z());
    let a = &(&z.pow(3) + &(&z * &x)) - &y;
    let b = &(&(&x - &MPoly::constant(d.clone())).pow(2) + &(&z - &MPoly::int(1)).pow(2)) + &y.pow(2);
    let third = &d / &BigRational::from_integer(3.into());
    &(&a * &b) - &MPoly::constant(&third * &third)
}

/// Cusps certified in discriminant mode are exactly the singular points
/// above which `P_z` has a double root, i.e. `P` a triple root.
#[test]
fn cusps_sit_below_triple_roots() {
    for p in [cusp_p(), p_cusp(6)] {
        let pz = p.derivative(Var::Z, 1);
        let pzz = p.derivative(Var::Z, 2);
        let triple = resultant_z(&pz, &pzz).unwrap();
        let sys = CurveSystem::discriminant(&p).unwrap();
        let f = sys.f_poly();
        let iso = isolate_in_box(&p, &pz, &unit(), &EngineConfig::default(), false).unwrap();
        let ctx = TopologyContext::new(sys, CurveMode::Discriminant);
        let below = oracle_solve(&[&f, &triple], &unit_rat()).unwrap();
        let mut cusps = 0;
        for c in &iso.candidates {
            let r = ctx.analyze(c, &Budget::default()).unwrap();
            let b = RatBox::from_box(&r.plane_box());
            let hit = below.iter().any(|pt| pt.in_box(&b));
            assert_eq!(r.kind == SingularityKind::OrdinaryCusp, hit);
            assert_eq!(r.kind == SingularityKind::OrdinaryCusp, r.triple_root_box.is_some());
            cusps += usize::from(hit);
        }
        assert_eq!(cusps, 1);
    }
}

/// Contracted diameters shrink quadratically on a nonlinear system.
#[test]
fn contraction_ratio_stays_bounded() {
    let sys = CurveSystem::discriminant(&p_cusp(6)).unwrap();
    let iso = isolate_in_box(&p_cusp(6), &p_cusp(6).derivative(Var::Z, 1), &unit(), &EngineConfig::default(), false).unwrap();
    let center = iso.candidates[0].bbox.convert::<BigFloat>(256).midpoint();
    let mut b = singuline::topology::centered_box(&center, 1e-6, 256);
    let mut ratios = Vec::new();
    for _ in 0..5 {
        let nb = contract(&sys.deflated(), &b).unwrap();
        if singuline::interval::below_precision_floor(&nb) {
            break;
        }
        ratios.push(nb.diameter_f64() / b.diameter_f64().powi(2));
        b = nb;
    }
    assert!(ratios.len() >= 4, "{ratios:?}");
    let (lo, hi) = ratios[1..].iter().fold((f64::INFINITY, 0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(hi <= 10.0 * lo, "{ratios:?}");
    assert!(ratios.iter().all(|r| *r < 1e5), "{ratios:?}");
}
