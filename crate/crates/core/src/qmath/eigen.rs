//! Eigenvalues of small Hermitian matrices by cyclic Jacobi rotations.
//!
//! A Hermitian `H = A + iB` of size n is replaced by the real symmetric
//! matrix `[[A, -B], [B, A]]` of size 2n, whose spectrum is that of `H` with
//! every eigenvalue doubled. Real Jacobi sweeps are then run until the
//! off-diagonal Frobenius norm drops below `OFF_DIAGONAL_TOL` (scaled by the
//! matrix norm when that exceeds one).

use super::state::HERMITIAN_TOL;
use super::Operator;
use crate::error::{input_err, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Real eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    if !h.is_square() {
        return input_err("eigenvalues require a square operator");
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return input_err(format!("operator is not Hermitian (defect {defect:e})"));
    }
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize to remove the tolerated hermiticity defect
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(&mut a, m);
    let mut doubled: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    doubled.sort_by(|x, y| x.total_cmp(y));
    Ok(doubled.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

fn off_diagonal_norm(a: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                s += a[i * m + j] * a[i * m + j];
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes the row-major symmetric matrix `a` in place.
fn jacobi_symmetric(a: &mut [f64], m: usize) {
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a, m) <= OFF_DIAGONAL_TOL * scale {
            return;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::gates;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn pauli_z_spectrum() {
        assert_eq!(hermitian_eigenvalues(&gates::pauli_z()).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn maximally_mixed_spectrum() {
        let ev = hermitian_eigenvalues(&Operator::identity(8).scale_real(0.125)).unwrap();
        assert_eq!(ev.len(), 8);
        assert!(ev.iter().all(|&x| (x - 0.125).abs() < 1e-15));
    }

    #[test]
    fn pauli_y_is_handled_through_imaginary_part() {
        let ev = hermitian_eigenvalues(&gates::pauli_y()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Operator::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(hermitian_eigenvalues(&m).is_err());
    }

    fn hermitian_from(n: usize, raw: &[f64]) -> Operator {
        let mut h = Operator::zeros(n, n);
        let mut it = raw.iter();
        for i in 0..n {
            h[(i, i)] = Complex64::new(*it.next().unwrap(), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(*it.next().unwrap(), *it.next().unwrap());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    proptest! {
        #[test]
        fn two_by_two_matches_characteristic_roots(raw in proptest::collection::vec(-2.0f64..2.0, 4)) {
            let h = hermitian_from(2, &raw);
            let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
            let b2 = h[(0, 1)].norm_sqr();
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b2).sqrt();
            let ev = hermitian_eigenvalues(&h).unwrap();
            prop_assert!((ev[0] - (mid - rad)).abs() < 1e-8);
            prop_assert!((ev[1] - (mid + rad)).abs() < 1e-8);
        }

        // Power sums tr(H^k), k = 1..4, fix the four roots of the
        // characteristic polynomial of a 4x4 matrix (Newton's identities).
        #[test]
        fn four_by_four_matches_power_sums(raw in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let h = hermitian_from(4, &raw);
            let ev = hermitian_eigenvalues(&h).unwrap();
            let mut power = Operator::identity(4);
            for k in 1..=4 {
                power = power.matmul(&h);
                let expected = power.trace().re;
                let got: f64 = ev.iter().map(|x| x.powi(k)).sum();
                prop_assert!((expected - got).abs() < 1e-8, "k={} {} vs {}", k, expected, got);
            }
            // ascending order
            prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
