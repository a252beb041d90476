use super::boxes::ComplexBox;
use super::float::Float;
use super::ival::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("leading coefficient interval contains zero")]
pub struct LeadingContainsZero;

/// Boxes enclosing both roots of every quadratic `a z² + b z + c` with
/// coefficients drawn from the given intervals.
///
/// A discriminant straddling zero yields both the real-root and the
/// conjugate-pair enclosures; these are hulled pairwise so at most two boxes
/// come back.
pub fn complex_quadratic_enclosure<F: Float>(
    a: &Interval<F>,
    b: &Interval<F>,
    c: &Interval<F>,
) -> Result<Vec<ComplexBox<F>>, LeadingContainsZero> {
    if a.contains_zero() {
        return Err(LeadingContainsZero);
    }
    let p = a.prec().max(b.prec()).max(c.prec());
    let four = Interval::from_i64(4, p);
    let two_a = a.add(a);
    let disc = b.sqr().sub(&four.mul(a).mul(c));
    let nonneg = Interval::new(F::zero(p), F::infinity(false, p));
    let mut real = None;
    if let Some(d) = disc.intersect(&nonneg) {
        let s = d.sqrt().expect("non-negative");
        let nb = b.neg();
        real = Some((nb.sub(&s).div(&two_a), nb.add(&s).div(&two_a)));
    }
    let mut pair = None;
    if let Some(d) = disc.neg().intersect(&nonneg) {
        let t = d.sqrt().expect("non-negative");
        let re = b.neg().div(&two_a);
        let im = t.div(&two_a);
        pair = Some((ComplexBox::new(re.clone(), im.clone()), ComplexBox::new(re, im.neg())));
    }
    Ok(match (real, pair) {
        (Some((r1, r2)), None) => vec![ComplexBox::real(r1), ComplexBox::real(r2)],
        (None, Some((z1, z2))) => vec![z1, z2],
        (Some((r1, r2)), Some((z1, z2))) => vec![ComplexBox::real(r1).hull(&z1), ComplexBox::real(r2).hull(&z2)],
        (None, None) => unreachable!("an interval meets [0, inf) or (-inf, 0]"),
    })
}
