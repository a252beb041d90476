use std::fmt;

use super::float::{Dir, Float};
use super::ival::Interval;

/// Axis-aligned box in `N` dimensions.
#[derive(Clone, PartialEq)]
pub struct IBox<F: Float, const N: usize> {
    pub axes: [Interval<F>; N],
}

pub type Box2<F> = IBox<F, 2>;
pub type Box3<F> = IBox<F, 3>;

impl<F: Float, const N: usize> fmt::Debug for IBox<F, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.axes.iter()).finish()
    }
}

impl<F: Float, const N: usize> IBox<F, N> {
    pub fn new(axes: [Interval<F>; N]) -> Self {
        IBox { axes }
    }

    pub fn from_f64s(bounds: [(f64, f64); N], prec: u32) -> Self {
        IBox { axes: std::array::from_fn(|i| Interval::from_f64s(bounds[i].0, bounds[i].1, prec)) }
    }

    pub fn prec(&self) -> u32 {
        self.axes.iter().map(Interval::prec).max().unwrap_or(53)
    }

    pub fn is_bounded(&self) -> bool {
        self.axes.iter().all(Interval::is_bounded)
    }

    /// Largest axis width, rounded up.
    pub fn diameter(&self) -> F {
        let mut d = self.axes[0].width();
        for a in &self.axes[1..] {
            d = F::max_of(&d, &a.width());
        }
        d
    }

    pub fn diameter_f64(&self) -> f64 {
        self.diameter().to_f64(Dir::Up)
    }

    pub fn midpoint(&self) -> [F; N] {
        std::array::from_fn(|i| self.axes[i].mid())
    }

    pub fn mid_box(&self) -> Self {
        IBox { axes: std::array::from_fn(|i| Interval::point(self.axes[i].mid())) }
    }

    pub fn subset_of(&self, o: &Self) -> bool {
        self.axes.iter().zip(&o.axes).all(|(a, b)| a.subset_of(b))
    }

    pub fn interior_of(&self, o: &Self) -> bool {
        self.axes.iter().zip(&o.axes).all(|(a, b)| a.interior_of(b))
    }

    pub fn contains_point(&self, p: &[F; N]) -> bool {
        self.axes.iter().zip(p).all(|(a, v)| a.contains(v))
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let mut axes = Vec::with_capacity(N);
        for (a, b) in self.axes.iter().zip(&o.axes) {
            axes.push(a.intersect(b)?);
        }
        Some(IBox { axes: axes.try_into().expect("length N") })
    }

    pub fn hull(&self, o: &Self) -> Self {
        IBox { axes: std::array::from_fn(|i| self.axes[i].hull(&o.axes[i])) }
    }

    /// Whether the boxes share at least one point (touching counts).
    pub fn meets(&self, o: &Self) -> bool {
        self.intersect(o).is_some()
    }

    pub fn inflate(&self, rel: f64) -> Self {
        IBox { axes: std::array::from_fn(|i| self.axes[i].inflate(rel)) }
    }

    /// Index of the widest axis; ties go to the lowest index.
    pub fn widest_axis(&self) -> usize {
        let mut best = 0;
        let mut w = self.axes[0].width();
        for (i, a) in self.axes.iter().enumerate().skip(1) {
            let wi = a.width();
            if wi > w {
                best = i;
                w = wi;
            }
        }
        best
    }

    /// Halves along the widest axis; the lower half comes first.
    pub fn bisect(&self) -> (Self, Self) {
        let k = self.widest_axis();
        let (lo, hi) = self.axes[k].bisect();
        let mut a = self.clone();
        let mut b = self.clone();
        a.axes[k] = lo;
        b.axes[k] = hi;
        (a, b)
    }

    /// Four children by halving both axes of a planar box.
    pub fn quadrisect(&self) -> Vec<Self> {
        let (a, b) = self.bisect();
        let mut out = Vec::with_capacity(4);
        for h in [a, b] {
            let (c, d) = h.bisect();
            out.push(c);
            out.push(d);
        }
        out
    }

    pub fn convert<G: Float>(&self, prec: u32) -> IBox<G, N> {
        IBox { axes: std::array::from_fn(|i| self.axes[i].convert(prec)) }
    }

    pub fn to_f64_bounds(&self) -> [(f64, f64); N] {
        std::array::from_fn(|i| self.axes[i].to_f64_bounds())
    }

    /// Lexicographic order on (lo, hi) per axis.
    pub fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        for (a, b) in self.axes.iter().zip(&o.axes) {
            let c = a.lo().cmp_total(b.lo()).then(a.hi().cmp_total(b.hi()));
            if c.is_ne() {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl<F: Float> Box2<F> {
    pub fn extend_z(&self, z: Interval<F>) -> Box3<F> {
        IBox { axes: [self.axes[0].clone(), self.axes[1].clone(), z] }
    }
}

impl<F: Float> Box3<F> {
    pub fn xy(&self) -> Box2<F> {
        IBox { axes: [self.axes[0].clone(), self.axes[1].clone()] }
    }
}

/// Rectangle in the complex plane.
#[derive(Clone, PartialEq)]
pub struct ComplexBox<F: Float> {
    pub re: Interval<F>,
    pub im: Interval<F>,
}

impl<F: Float> fmt::Debug for ComplexBox<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

impl<F: Float> ComplexBox<F> {
    pub fn new(re: Interval<F>, im: Interval<F>) -> Self {
        ComplexBox { re, im }
    }

    pub fn real(re: Interval<F>) -> Self {
        let p = re.prec();
        ComplexBox { re, im: Interval::zero(p) }
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn hull(&self, o: &Self) -> Self {
        ComplexBox { re: self.re.hull(&o.re), im: self.im.hull(&o.im) }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexBox { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexBox { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexBox {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn sqr(&self) -> Self {
        ComplexBox { re: self.re.sqr().sub(&self.im.sqr()), im: self.re.mul(&self.im).scale(&F::from_i64(2, self.re.prec())) }
    }

    pub fn powi(&self, n: u32) -> Self {
        match n {
            0 => ComplexBox::real(Interval::from_i64(1, self.re.prec())),
            1 => self.clone(),
            _ if n.is_multiple_of(2) => self.sqr().powi(n / 2),
            _ => self.mul(&self.powi(n - 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_prefers_x_on_ties() {
        let b: Box2<f64> = IBox::from_f64s([(0.0, 1.0), (0.0, 1.0)], 53);
        let (l, r) = b.bisect();
        assert_eq!(l.to_f64_bounds(), [(0.0, 0.5), (0.0, 1.0)]);
        assert_eq!(r.to_f64_bounds(), [(0.5, 1.0), (0.0, 1.0)]);
        let kids = b.quadrisect();
        assert_eq!(kids.len(), 4);
        assert_eq!(kids[3].to_f64_bounds(), [(0.5, 1.0), (0.5, 1.0)]);
        assert_eq!(b.inflate(0.1).to_f64_bounds(), [(-0.05, 1.05), (-0.05, 1.05)]);
    }

    #[test]
    fn complex_products() {
        let i = ComplexBox::new(Interval::<f64>::zero(53), Interval::from_i64(1, 53));
        let m = i.sqr();
        assert_eq!(m.re.to_f64_bounds(), (-1.0, -1.0));
        assert_eq!(m.im.to_f64_bounds(), (0.0, 0.0));
        assert_eq!(i.powi(3).im.to_f64_bounds(), (-1.0, -1.0));
    }
}
