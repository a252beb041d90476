//! Random dense integer polynomials, as used for benchmark instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mpoly::MPoly;

/// Dense polynomial in `x, y, z` of total degree `degree` whose coefficients
/// are uniform integers with `|c| < 2^bits`.
pub fn dense_poly<R: Rng>(rng: &mut R, degree: u32, bits: u32) -> MPoly {
    let bound: i64 = 1 << bits;
    let mut terms = Vec::new();
    for ex in 0..=degree {
        for ey in 0..=degree - ex {
            for ez in 0..=degree - ex - ey {
                terms.push((rng.gen_range(-bound + 1..bound), ex, ey, ez));
            }
        }
    }
    let p = MPoly::from_int_terms(&terms);
    // keep the z-degree equal to the total degree
    if p.coeff(&[0, 0, degree]) == num_rational::BigRational::from_integer(0.into()) {
        return &p + &MPoly::from_int_terms(&[(1, 0, 0, degree)]);
    }
    p
}

/// Reproducible pair `(P, Q)` of dense polynomials.
pub fn dense_pair(seed: u64, degree: u32, bits: u32) -> (MPoly, MPoly) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (dense_poly(&mut rng, degree, bits), dense_poly(&mut rng, degree, bits))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
