//! A `(P, Q)` pair with its subresultant data and every compiled scheme the
//! subdivision stages evaluate.

use serde::{Deserialize, Serialize};

use crate::interval::{Box2, CompiledPoly, Dir, Extension, Float, IBox, Interval};
use crate::mpoly::{subresultant_chain, MPoly, PolyError, SubresultantData, Var};

/// Coordinate patch used in global mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `(x, y)` itself on `[-1, 1]²`.
    Identity,
    /// `(x, y) = (1/u, v/u)`, covering `|x| ≥ max(1, |y|)`.
    ChartU,
    /// `(x, y) = (u/v, 1/v)`, covering `|y| ≥ max(1, |x|)`.
    ChartV,
}

impl Chart {
    pub const ALL: [Chart; 3] = [Chart::Identity, Chart::ChartU, Chart::ChartV];

    /// Numerators of the polynomials after the chart substitution, all
    /// multiplied by the same power of the denominator so that ratios
    /// between them are preserved. `z` is untouched.
    pub fn transform_group(self, polys: &[&MPoly]) -> Vec<MPoly> {
        let deg = polys.iter().flat_map(|p| p.terms().map(|(e, _)| e[0] + e[1])).max().unwrap_or(0);
        polys
            .iter()
            .map(|p| {
                MPoly::from_terms(p.terms().map(|(e, c)| {
                    let (a, b) = (e[0], e[1]);
                    let ex = match self {
                        Chart::Identity => *e,
                        // x^a y^b = v^b u^-(a+b)
                        Chart::ChartU => [deg - a - b, b, e[2]],
                        // x^a y^b = u^a v^-(a+b)
                        Chart::ChartV => [a, deg - a - b, e[2]],
                    };
                    (ex, c.clone())
                }))
            })
            .collect()
    }

    pub fn transform(self, p: &MPoly) -> MPoly {
        self.transform_group(&[p]).pop().expect("one polynomial")
    }

    /// Whether the box meets the chart's line at infinity, which maps to
    /// no point of the plane.
    pub fn touches_infinity(self, b: &Box2<f64>) -> bool {
        match self {
            Chart::Identity => false,
            Chart::ChartU => b.axes[0].contains_zero(),
            Chart::ChartV => b.axes[1].contains_zero(),
        }
    }

    /// Image in `(x, y)` of a box in chart coordinates. Boxes touching the
    /// line at infinity come back with infinite endpoints.
    pub fn to_plane(self, b: &Box2<f64>) -> Box2<f64> {
        let (u, v) = (&b.axes[0], &b.axes[1]);
        let one = Interval::from_i64(1, 53);
        match self {
            Chart::Identity => b.clone(),
            Chart::ChartU => IBox::new([one.div(u), v.div(u)]),
            Chart::ChartV => IBox::new([u.div(v), one.div(v)]),
        }
    }
}

/// The three components of `t = ∇P × ∇Q`.
#[derive(Debug, Clone)]
pub struct TangentSystem {
    pub components: [CompiledPoly; 3],
}

impl TangentSystem {
    pub fn polys(p: &MPoly, q: &MPoly) -> [MPoly; 3] {
        let gp = [p.derivative(Var::X, 1), p.derivative(Var::Y, 1), p.derivative(Var::Z, 1)];
        let gq = [q.derivative(Var::X, 1), q.derivative(Var::Y, 1), q.derivative(Var::Z, 1)];
        let cross = |i: usize, j: usize| &(&gp[i] * &gq[j]) - &(&gp[j] * &gq[i]);
        [cross(1, 2), cross(2, 0), cross(0, 1)]
    }

    pub fn new(p: &MPoly, q: &MPoly, ext: Extension) -> Self {
        Self::in_chart(p, q, Chart::Identity, ext)
    }

    /// Components transformed one by one: only their common zeros matter.
    pub fn in_chart(p: &MPoly, q: &MPoly, chart: Chart, ext: Extension) -> Self {
        let [a, b, c] = Self::polys(p, q);
        let c3 = |m: &MPoly| CompiledPoly::with_extension(&chart.transform(m), 3, ext);
        TangentSystem { components: [c3(&a), c3(&b), c3(&c)] }
    }
}

/// The pair `(P, Q)` with compiled schemes for every quantity the
/// subdivision stages evaluate, expressed in one chart.
#[derive(Debug, Clone)]
pub struct CurveSystem {
    pub p: MPoly,
    pub q: MPoly,
    /// Subresultant data in the original plane coordinates.
    pub sres: SubresultantData,
    pub chart: Chart,
    pub f: CompiledPoly,
    pub s10: CompiledPoly,
    pub s11: CompiledPoly,
    pub s20: CompiledPoly,
    pub s21: CompiledPoly,
    pub s22: CompiledPoly,
    pub lead_p: CompiledPoly,
    pub lead_q: CompiledPoly,
    /// Coefficients of `P` and `Q` in `z`, lowest degree first.
    pub coeffs_p: Vec<CompiledPoly>,
    pub coeffs_q: Vec<CompiledPoly>,
    pub tangent: TangentSystem,
    extension: Extension,
}

impl CurveSystem {
    pub fn new(p: &MPoly, q: &MPoly) -> Result<Self, PolyError> {
        Self::with_extension(p, q, Extension::default())
    }

    pub fn with_extension(p: &MPoly, q: &MPoly, ext: Extension) -> Result<Self, PolyError> {
        let sres = subresultant_chain(p, q)?;
        Ok(Self::assemble(p, q, sres, Chart::Identity, ext))
    }

    /// The same system in another chart. `f`, `S_1` and `S_2` are each
    /// transformed as a group so their roots in `z` are unchanged.
    pub fn in_chart(&self, chart: Chart) -> Self {
        Self::assemble(&self.p, &self.q, self.sres.clone(), chart, self.extension)
    }

    fn assemble(p: &MPoly, q: &MPoly, sres: SubresultantData, chart: Chart, ext: Extension) -> Self {
        let c2 = |m: &MPoly| CompiledPoly::with_extension(m, 2, ext);
        let f = chart.transform(&sres.f);
        let s1 = chart.transform_group(&[&sres.s11, &sres.s10]);
        let s2 = chart.transform_group(&[&sres.s22, &sres.s21, &sres.s20]);
        let (pc, qc) = (chart.transform(p), chart.transform(q));
        CurveSystem {
            f: c2(&f),
            s11: c2(&s1[0]),
            s10: c2(&s1[1]),
            s22: c2(&s2[0]),
            s21: c2(&s2[1]),
            s20: c2(&s2[2]),
            lead_p: c2(&chart.transform(&p.leading_coeff_z())),
            lead_q: c2(&chart.transform(&q.leading_coeff_z())),
            coeffs_p: compile_z_coeffs(&pc, ext),
            coeffs_q: compile_z_coeffs(&qc, ext),
            tangent: TangentSystem::in_chart(p, q, chart, ext),
            p: p.clone(),
            q: q.clone(),
            sres,
            chart,
            extension: ext,
        }
    }

    /// `Q := P_z`.
    pub fn discriminant(p: &MPoly) -> Result<Self, PolyError> {
        Self::new(p, &p.derivative(Var::Z, 1))
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// `f` as a polynomial in this chart's coordinates.
    pub fn f_poly(&self) -> MPoly {
        self.chart.transform(&self.sres.f)
    }

    /// `P` in this chart's coordinates, `z` untouched.
    pub fn p_poly(&self) -> MPoly {
        self.chart.transform(&self.p)
    }

    /// `(s11, s10)`, the deflated system whose regular zeros are the
    /// singular points.
    pub fn deflated(&self) -> [&CompiledPoly; 2] {
        [&self.s11, &self.s10]
    }

    /// Bound `Z` with every common root `z` of `P` and `Q` above `B`
    /// satisfying `|z| ≤ Z`.
    pub fn root_bound<F: Float>(&self, b: &IBox<F, 2>) -> F {
        cauchy_bound(&[&self.coeffs_p, &self.coeffs_q], b)
    }

    pub fn z_guard<F: Float>(&self, b: &IBox<F, 2>) -> Interval<F> {
        let z = self.root_bound(b);
        Interval::new(z.neg(), z)
    }
}

/// Cauchy root bound over a box, the best over several polynomials given
/// by their `z`-coefficients (lowest first). Common roots obey each bound.
/// Infinite when no leading coefficient is bounded away from zero.
pub fn cauchy_bound<F: Float>(coeff_sets: &[&[CompiledPoly]], b: &IBox<F, 2>) -> F {
    let prec = b.prec();
    let mut best = F::infinity(false, prec);
    for coeffs in coeff_sets {
        let (lead, rest) = coeffs.split_last().expect("nonzero polynomial");
        let lc = lead.eval_box(b);
        if lc.contains_zero() {
            continue;
        }
        let mut m = F::zero(prec);
        for c in rest {
            m = F::max_of(&m, &c.eval_box(b).mag());
        }
        let bound = F::from_i64(1, prec).add(&m.div(&lc.mig(), Dir::Up), Dir::Up);
        best = F::min_of(&best, &bound);
    }
    best
}

/// `z`-coefficients of a polynomial compiled in `(x, y)`, lowest first.
pub fn compile_z_coeffs(m: &MPoly, ext: Extension) -> Vec<CompiledPoly> {
    (0..=m.degree(Var::Z)).map(|k| CompiledPoly::with_extension(&m.coeff_z(k), 2, ext)).collect()
}
