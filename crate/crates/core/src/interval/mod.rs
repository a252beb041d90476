//! Interval arithmetic with outward rounding at several working precisions.

mod bigfloat;
mod boxes;
mod compiled;
mod float;
mod ival;
mod krawczyk;
mod quadratic;

pub use bigfloat::BigFloat;
pub use boxes::{Box2, Box3, ComplexBox, IBox};
pub use compiled::{CompiledPoly, Extension, PolyEval, Ring};
pub use float::{rational_to_f64, Dir, Float};
pub use ival::Interval;
pub use krawczyk::{contract, krawczyk, ContractError, KrawczykResult, KrawczykStatus};
pub use quadratic::{complex_quadratic_enclosure, LeadingContainsZero};

use serde::{Deserialize, Serialize};

/// Working precision of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Precision {
    /// Hardware `f64`.
    Double,
    /// Software floating point with this many mantissa bits.
    Bits(u32),
}

impl Precision {
    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::Bits(b) => b,
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::Double => write!(f, "double"),
            Precision::Bits(b) => write!(f, "{b}-bit"),
        }
    }
}

/// Rungs tried in order: `f64`, then 128 and 256 bits, capped at `max_bits`.
pub fn ladder(max_bits: u32) -> Vec<Precision> {
    let mut out = vec![Precision::Double];
    for b in [128, 256] {
        if b <= max_bits {
            out.push(Precision::Bits(b));
        }
    }
    if max_bits > 256 {
        out.push(Precision::Bits(max_bits));
    }
    out
}

/// Whether a box is too small to make progress at `f64`: its diameter is
/// below ten machine epsilons relative to its center.
pub fn below_double_floor<F: Float, const N: usize>(b: &IBox<F, N>) -> bool {
    floor_test(b, 53)
}

/// Same test at the box's own working precision.
pub fn below_precision_floor<F: Float, const N: usize>(b: &IBox<F, N>) -> bool {
    floor_test(b, F::precision_bits(b.prec()))
}

fn floor_test<F: Float, const N: usize>(b: &IBox<F, N>, bits: u32) -> bool {
    let scale = b.axes.iter().map(|a| a.mag().to_f64(Dir::Up)).fold(1.0f64, |m, v| m.max(v).min(f64::MAX));
    b.diameter_f64() < 10.0 * 2f64.powi(1 - bits as i32) * scale
}
