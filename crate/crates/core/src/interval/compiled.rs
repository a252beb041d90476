//! Horner-factored evaluation schemes for polynomials, with precompiled
//! first and second partial derivatives.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;

use super::boxes::{ComplexBox, IBox};
use super::float::Float;
use super::ival::Interval;
use crate::mpoly::{Exponent, MPoly, Var};

/// Which interval extension `eval` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Extension {
    /// Order-two centered form intersected with the Horner range.
    #[default]
    Centered,
    /// Plain Horner evaluation.
    Horner,
}

/// Nested sparse Horner form. Exponents are stored in descending order.
#[derive(Clone, Debug)]
enum Scheme<C> {
    Const(C),
    Sum { var: usize, terms: Vec<(u32, Scheme<C>)> },
}

impl Scheme<BigRational> {
    fn build(terms: Vec<(Exponent, BigRational)>, var: usize, nvars: usize) -> Self {
        if var == nvars || terms.iter().all(|(e, _)| e[var..nvars].iter().all(|&k| k == 0)) {
            let mut c = BigRational::zero();
            for (_, t) in terms {
                c += t;
            }
            return Scheme::Const(c);
        }
        let mut groups: std::collections::BTreeMap<u32, Vec<(Exponent, BigRational)>> = Default::default();
        for (e, c) in terms {
            groups.entry(e[var]).or_default().push((e, c));
        }
        let terms = groups.into_iter().rev().map(|(k, ts)| (k, Scheme::build(ts, var + 1, nvars))).collect();
        Scheme::Sum { var, terms }
    }

    fn from_poly(p: &MPoly, nvars: usize) -> Self {
        Scheme::build(p.terms().map(|(e, c)| (*e, c.clone())).collect(), 0, nvars)
    }

    fn instantiate<F: Float>(&self, prec: u32) -> Scheme<Interval<F>> {
        match self {
            Scheme::Const(c) => Scheme::Const(Interval::from_rational(c, prec)),
            Scheme::Sum { var, terms } => Scheme::Sum {
                var: *var,
                terms: terms.iter().map(|(k, s)| (*k, s.instantiate(prec))).collect(),
            },
        }
    }
}

/// Values a scheme can be evaluated over.
pub trait Ring<F: Float>: Clone {
    fn lift(c: &Interval<F>) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn powi(&self, n: u32) -> Self;
}

impl<F: Float> Ring<F> for Interval<F> {
    fn lift(c: &Interval<F>) -> Self {
        c.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Interval::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Interval::mul(self, o)
    }
    fn powi(&self, n: u32) -> Self {
        Interval::powi(self, n)
    }
}

impl<F: Float> Ring<F> for ComplexBox<F> {
    fn lift(c: &Interval<F>) -> Self {
        ComplexBox::real(c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        ComplexBox::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ComplexBox::mul(self, o)
    }
    fn powi(&self, n: u32) -> Self {
        ComplexBox::powi(self, n)
    }
}

impl<F: Float> Scheme<Interval<F>> {
    fn eval<R: Ring<F>>(&self, vars: &[R]) -> R {
        match self {
            Scheme::Const(c) => R::lift(c),
            Scheme::Sum { var, terms } => {
                let v = &vars[*var];
                let (mut prev, first) = (&terms[0].0, &terms[0].1);
                let mut acc = first.eval(vars);
                for (k, s) in &terms[1..] {
                    acc = acc.mul(&v.powi(prev - k)).add(&s.eval(vars));
                    prev = k;
                }
                if *prev > 0 {
                    acc = acc.mul(&v.powi(*prev));
                }
                acc
            }
        }
    }
}

/// A compiled polynomial instantiated at one working precision.
#[derive(Debug)]
pub struct PolyEval<F: Float> {
    nvars: usize,
    prec: u32,
    extension: Extension,
    value: Scheme<Interval<F>>,
    grad: Vec<Scheme<Interval<F>>>,
    /// Upper triangle, row-major.
    hess: Vec<Scheme<Interval<F>>>,
}

fn hess_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl<F: Float> PolyEval<F> {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn horner(&self, b: &[Interval<F>]) -> Interval<F> {
        self.value.eval(b)
    }

    pub fn at_point(&self, p: &[F]) -> Interval<F> {
        let pts: Vec<Interval<F>> = p.iter().cloned().map(Interval::point).collect();
        self.value.eval(&pts)
    }

    pub fn complex(&self, vars: &[ComplexBox<F>]) -> ComplexBox<F> {
        self.value.eval(vars)
    }

    pub fn partial_horner(&self, i: usize, b: &[Interval<F>]) -> Interval<F> {
        self.grad[i].eval(b)
    }

    pub fn second_horner(&self, i: usize, j: usize, b: &[Interval<F>]) -> Interval<F> {
        self.hess[hess_index(self.nvars, i, j)].eval(b)
    }

    /// Range enclosure using the configured extension.
    pub fn eval(&self, b: &[Interval<F>]) -> Interval<F> {
        let h = self.horner(b);
        if self.extension == Extension::Horner || !b.iter().all(Interval::is_bounded) {
            return h;
        }
        let c = self.centered(b);
        // both enclose the range, so their intersection is nonempty in exact terms
        c.intersect(&h).unwrap_or(h)
    }

    /// Order-two centered form about the box midpoint.
    pub fn centered(&self, b: &[Interval<F>]) -> Interval<F> {
        let n = self.nvars;
        let c: Vec<F> = b.iter().map(Interval::mid).collect();
        let cp: Vec<Interval<F>> = c.iter().cloned().map(Interval::point).collect();
        let d: Vec<Interval<F>> = b.iter().zip(&cp).map(|(bi, ci)| bi.sub(ci)).collect();
        let mut acc = self.value.eval(&cp);
        for i in 0..n {
            acc = acc.add(&self.grad[i].eval(&cp).mul(&d[i]));
        }
        let mut quad = Interval::zero(self.prec);
        for i in 0..n {
            quad = quad.add(&self.second_horner(i, i, b).mul(&d[i].sqr()).half());
            for j in i + 1..n {
                quad = quad.add(&self.second_horner(i, j, b).mul(&d[i].mul(&d[j])));
            }
        }
        acc.add(&quad)
    }

    /// Enclosure of the gradient over the box.
    pub fn gradient(&self, b: &[Interval<F>]) -> Vec<Interval<F>> {
        let n = self.nvars;
        let bounded = b.iter().all(Interval::is_bounded);
        if self.extension == Extension::Horner || !bounded {
            return (0..n).map(|i| self.grad[i].eval(b)).collect();
        }
        let cp: Vec<Interval<F>> = b.iter().map(|bi| Interval::point(bi.mid())).collect();
        let d: Vec<Interval<F>> = b.iter().zip(&cp).map(|(bi, ci)| bi.sub(ci)).collect();
        (0..n)
            .map(|i| {
                let h = self.grad[i].eval(b);
                let mut acc = self.grad[i].eval(&cp);
                for j in 0..n {
                    acc = acc.add(&self.second_horner(i, j, b).mul(&d[j]));
                }
                acc.intersect(&h).unwrap_or(h)
            })
            .collect()
    }

    pub fn gradient_at_point(&self, p: &[F]) -> Vec<Interval<F>> {
        let pts: Vec<Interval<F>> = p.iter().cloned().map(Interval::point).collect();
        (0..self.nvars).map(|i| self.grad[i].eval(&pts)).collect()
    }
}

/// Exact evaluation schemes for a polynomial in 2 or 3 variables.
pub struct CompiledPoly {
    poly: MPoly,
    nvars: usize,
    extension: Extension,
    value: Scheme<BigRational>,
    grad: Vec<Scheme<BigRational>>,
    hess: Vec<Scheme<BigRational>>,
    cache: Mutex<HashMap<(TypeId, u32), Arc<dyn Any + Send + Sync>>>,
}

impl std::fmt::Debug for CompiledPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompiledPoly").field("poly", &self.poly).field("nvars", &self.nvars).finish()
    }
}

impl Clone for CompiledPoly {
    fn clone(&self) -> Self {
        CompiledPoly::with_extension(&self.poly, self.nvars, self.extension)
    }
}

const VARS: [Var; 3] = [Var::X, Var::Y, Var::Z];

impl CompiledPoly {
    pub fn new(poly: &MPoly, nvars: usize) -> Self {
        Self::with_extension(poly, nvars, Extension::default())
    }

    /// Panics if `poly` involves a variable beyond the first `nvars`.
    pub fn with_extension(poly: &MPoly, nvars: usize, extension: Extension) -> Self {
        assert!((1..=3).contains(&nvars), "between 1 and 3 variables");
        for v in &VARS[nvars..] {
            assert_eq!(poly.degree(*v), 0, "polynomial uses {v:?} but only {nvars} variables compiled");
        }
        let grad_polys: Vec<MPoly> = VARS[..nvars].iter().map(|v| poly.derivative(*v, 1)).collect();
        let mut hess = Vec::with_capacity(nvars * (nvars + 1) / 2);
        for i in 0..nvars {
            for j in i..nvars {
                hess.push(Scheme::from_poly(&grad_polys[i].derivative(VARS[j], 1), nvars));
            }
        }
        CompiledPoly {
            poly: poly.clone(),
            nvars,
            extension,
            value: Scheme::from_poly(poly, nvars),
            grad: grad_polys.iter().map(|g| Scheme::from_poly(g, nvars)).collect(),
            hess,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn poly(&self) -> &MPoly {
        &self.poly
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// Scheme with coefficients rounded outward to precision `prec`.
    pub fn instance<F: Float>(&self, prec: u32) -> Arc<PolyEval<F>> {
        let key = (TypeId::of::<F>(), prec);
        let mut cache = self.cache.lock().expect("cache poisoned");
        if let Some(e) = cache.get(&key) {
            return Arc::clone(e).downcast::<PolyEval<F>>().expect("type keyed");
        }
        let inst = Arc::new(PolyEval {
            nvars: self.nvars,
            prec,
            extension: self.extension,
            value: self.value.instantiate(prec),
            grad: self.grad.iter().map(|s| s.instantiate(prec)).collect(),
            hess: self.hess.iter().map(|s| s.instantiate(prec)).collect(),
        });
        cache.insert(key, inst.clone());
        inst
    }

    /// Range enclosure over a box of matching dimension.
    pub fn eval_box<F: Float, const N: usize>(&self, b: &IBox<F, N>) -> Interval<F> {
        assert_eq!(N, self.nvars, "box dimension");
        self.instance::<F>(b.prec()).eval(&b.axes)
    }

    pub fn horner_box<F: Float, const N: usize>(&self, b: &IBox<F, N>) -> Interval<F> {
        assert_eq!(N, self.nvars, "box dimension");
        self.instance::<F>(b.prec()).horner(&b.axes)
    }

    pub fn gradient_box<F: Float, const N: usize>(&self, b: &IBox<F, N>) -> Vec<Interval<F>> {
        assert_eq!(N, self.nvars, "box dimension");
        self.instance::<F>(b.prec()).gradient(&b.axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{BigFloat, Box2};
    use crate::mpoly::rat;
    use proptest::prelude::*;

    fn b2(x: (f64, f64), y: (f64, f64)) -> Box2<f64> {
        IBox::from_f64s([x, y], 53)
    }

    #[test]
    fn square_on_symmetric_box() {
        let f = CompiledPoly::new(&MPoly::from_int_terms(&[(1, 2, 0, 0)]), 2);
        let h = 0.25;
        let r = f.eval_box(&b2((-h, h), (-h, h)));
        assert_eq!(r.to_f64_bounds(), (0.0, h * h));
    }

    #[test]
    fn cusp_curve_range_contains_zero() {
        let f = CompiledPoly::new(&MPoly::from_int_terms(&[(4, 3, 0, 0), (27, 0, 2, 0)]), 2);
        let r = f.eval_box(&b2((-0.1, 0.1), (-0.1, 0.1)));
        assert!(r.contains_zero());
        let (lo, hi) = r.to_f64_bounds();
        assert!(lo <= -0.004 && hi >= 0.274);
    }

    #[test]
    fn constants_are_exact() {
        let f = CompiledPoly::new(&MPoly::int(5), 2);
        assert_eq!(f.eval_box(&b2((-3.0, 7.0), (1.0, 2.0))).to_f64_bounds(), (5.0, 5.0));
        let big: Box2<BigFloat> = b2((-3.0, 7.0), (1.0, 2.0)).convert(128);
        assert_eq!(f.eval_box(&big).to_f64_bounds(), (5.0, 5.0));
    }

    #[test]
    fn complex_evaluation_of_z_squared_plus_one() {
        let f = CompiledPoly::new(&MPoly::from_int_terms(&[(1, 0, 0, 2), (1, 0, 0, 0)]), 3);
        let inst = f.instance::<f64>(53);
        let zero = ComplexBox::real(Interval::zero(53));
        let i = ComplexBox::new(Interval::zero(53), Interval::from_i64(1, 53));
        assert!(inst.complex(&[zero.clone(), zero.clone(), i]).contains_zero());
        let two = ComplexBox::real(Interval::from_i64(2, 53));
        assert!(!inst.complex(&[zero.clone(), zero, two]).contains_zero());
    }

    fn arb_poly() -> impl Strategy<Value = MPoly> {
        proptest::collection::vec((-20i64..20, 0u32..4, 0u32..4), 1..8)
            .prop_map(|ts| MPoly::from_int_terms(&ts.iter().map(|&(c, a, b)| (c, a, b, 0)).collect::<Vec<_>>()))
    }

    fn arb_box() -> impl Strategy<Value = [(f64, f64); 2]> {
        ((-2.0f64..2.0, 0.0f64..1.5), (-2.0f64..2.0, 0.0f64..1.5)).prop_map(|((a, w), (b, v))| [(a, a + w), (b, b + v)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enclosure_contains_sampled_values(p in arb_poly(), bx in arb_box(), seed in any::<u64>()) {
            use rand::Rng;
            let f = CompiledPoly::new(&p, 2);
            let b = IBox::<f64, 2>::from_f64s(bx, 53);
            let r = f.eval_box(&b);
            let g = f.gradient_box(&b);
            let mut rng = crate::random::rng(seed);
            for _ in 0..200 {
                let x = rng.gen_range(bx[0].0..=bx[0].1);
                let y = rng.gen_range(bx[1].0..=bx[1].1);
                let pt = [BigRational::from_float(x).unwrap(), BigRational::from_float(y).unwrap()];
                prop_assert!(r.contains_rational(&p.eval_exact(&pt).unwrap()));
                prop_assert!(g[0].contains_rational(&p.derivative(Var::X, 1).eval_exact(&pt).unwrap()));
                prop_assert!(g[1].contains_rational(&p.derivative(Var::Y, 1).eval_exact(&pt).unwrap()));
            }
        }

        #[test]
        fn horner_is_inclusion_monotone(p in arb_poly(), bx in arb_box(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let f = CompiledPoly::new(&p, 2);
            let outer = IBox::<f64, 2>::from_f64s(bx, 53);
            let inner = IBox::<f64, 2>::from_f64s([
                (bx[0].0 + s * (bx[0].1 - bx[0].0) * 0.5, bx[0].1 - t * (bx[0].1 - bx[0].0) * 0.5),
                (bx[1].0 + t * (bx[1].1 - bx[1].0) * 0.5, bx[1].1 - s * (bx[1].1 - bx[1].0) * 0.5),
            ], 53);
            prop_assert!(inner.subset_of(&outer));
            prop_assert!(f.horner_box(&inner).subset_of(&f.horner_box(&outer)));
        }
    }

    #[test]
    fn centered_form_converges_quadratically() {
        // x^3 - 2xy + y^2 around (0.3, -0.2): overestimation shrinks like h^2
        let p = MPoly::from_int_terms(&[(1, 3, 0, 0), (-2, 1, 1, 0), (1, 0, 2, 0)]);
        let f = CompiledPoly::new(&p, 2);
        let c = [rat(3, 10), rat(-1, 5)];
        let mut prev_excess = None;
        for k in 4..12 {
            let h = 2f64.powi(-k);
            let b = b2((0.3 - h, 0.3 + h), (-0.2 - h, -0.2 + h));
            let r = f.eval_box(&b);
            // the true range has width ≈ 2h·|∇f|·√2 at most; the excess is O(h^2)
            let grad = f.instance::<f64>(53).gradient_at_point(&[0.3, -0.2]);
            let lin = 2.0 * h * (grad[0].mag().abs() + grad[1].mag().abs());
            let excess = (r.width_f64() - lin).abs();
            if let Some(pe) = prev_excess {
                assert!(excess <= pe * 0.3 + 1e-14, "excess {excess} vs {pe}");
            }
            prev_excess = Some(excess);
            assert!(r.contains_rational(&p.eval_exact(&c).unwrap()));
        }
    }
}
