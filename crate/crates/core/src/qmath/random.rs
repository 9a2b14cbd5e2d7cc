//! Reproducible random states.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), a portable counter-based
//! generator: the same 64-bit seed and stream index produce the same draws
//! on every platform. Gaussian variates use the Box-Muller transform on two
//! 53-bit uniforms, `u1 ∈ (0, 1]` and `u2 ∈ [0, 1)`:
//!
//! ```text
//! r = sqrt(-2 ln u1),  (x, y) = (r cos 2πu2, r sin 2πu2)
//! ```
//!
//! Each complex Gaussian entry consumes one Box-Muller pair, real part
//! first.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DensityMatrix, Operator};
use crate::error::{input_err, Result};

pub type SimRng = ChaCha8Rng;

/// Generator for sample `index` of a run seeded with `seed`; distinct
/// indices give independent ChaCha streams.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Pair of independent standard normal variates.
pub fn box_muller<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_MINUS_53;
    let u2 = (rng.next_u64() >> 11) as f64 * TWO_POW_MINUS_53;
    let r = (-2.0 * u1.ln()).sqrt();
    let phase = std::f64::consts::TAU * u2;
    (r * phase.cos(), r * phase.sin())
}

/// `dim × dim` Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let data = (0..dim * dim)
        .map(|_| {
            let (re, im) = box_muller(rng);
            Complex64::new(re, im)
        })
        .collect();
    Operator::new(dim, dim, data).expect("power-of-two Ginibre shape")
}

/// Density matrix drawn from the Hilbert-Schmidt measure: `G G† / tr(G G†)`.
pub fn random_density_hs<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim < 2 || !dim.is_power_of_two() {
        return input_err(format!("dimension {dim} is not a power of two ≥ 2"));
    }
    let g = ginibre(dim, rng);
    let mut ggd = g.matmul(&g.adjoint());
    // exact hermiticity so downstream tolerances see no accumulated skew
    for i in 0..dim {
        ggd[(i, i)].im = 0.0;
        for j in (i + 1)..dim {
            let z = (ggd[(i, j)] + ggd[(j, i)].conj()) * 0.5;
            ggd[(i, j)] = z;
            ggd[(j, i)] = z.conj();
        }
    }
    DensityMatrix::from_unnormalized(ggd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::hermitian_eigenvalues;

    #[test]
    fn normalized_and_positive() {
        for seed in 0..20 {
            let rho = random_density_hs(8, &mut substream(seed, 0)).unwrap();
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            let ev = hermitian_eigenvalues(rho.as_operator()).unwrap();
            assert!(ev[0] >= 0.0 || ev[0].abs() < 1e-12);
        }
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a = random_density_hs(4, &mut substream(7, 3)).unwrap();
        let b = random_density_hs(4, &mut substream(7, 3)).unwrap();
        let c = random_density_hs(4, &mut substream(7, 4)).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs_diff(&c) > 1e-6);
    }

    #[test]
    fn box_muller_moments() {
        let mut rng = substream(1, 0);
        let n = 50_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (x, y) = box_muller(&mut rng);
            s1 += x + y;
            s2 += x * x + y * y;
        }
        let m = 2.0 * n as f64;
        assert!((s1 / m).abs() < 0.01);
        assert!((s2 / m - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(random_density_hs(1, &mut substream(0, 0)).is_err());
        assert!(random_density_hs(6, &mut substream(0, 0)).is_err());
    }
}
