use num_complex::Complex64;

use super::eigen::hermitian_eigenvalues;
use super::operator::{partial_trace_op, Operator};
use crate::error::{input_err, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Normalized pure state on a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Accepts amplitudes that already have unit norm (within 1e-12).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() || amplitudes.len() < 2 {
            return input_err(format!("state length {} is not a power of two ≥ 2", amplitudes.len()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return input_err(format!("state norm {norm} differs from 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return input_err("cannot normalize a zero or non-finite vector");
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return input_err(format!("basis index {index} out of range for dimension {dim}"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `U|ψ⟩` for a unitary `U`; renormalizes to absorb roundoff.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        if u.cols() != self.dim() {
            return input_err("operator and state dimensions differ");
        }
        Self::normalized(u.apply(&self.amplitudes))
    }

    pub fn projector(&self) -> Operator {
        Operator::outer(&self.amplitudes, &self.amplitudes).expect("power-of-two length")
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, unit-trace, positive semidefinite operator.
///
/// Construction checks hermiticity and trace. Positivity costs an
/// eigendecomposition, so it is checked on request via
/// [`DensityMatrix::min_eigenvalue`]; every constructor inside the crate
/// produces positive operators by construction (Kraus maps, Ginibre
/// products, normalized measurement branches).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_square() || op.dim() < 2 {
            return input_err("density matrix must be square with dimension ≥ 2");
        }
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return input_err(format!("density matrix is not Hermitian (defect {defect:e})"));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return input_err(format!("density matrix trace {tr} differs from 1"));
        }
        Ok(Self { op })
    }

    /// Divides a positive operator by its trace.
    pub fn from_unnormalized(op: Operator) -> Result<Self> {
        let tr = op.trace().re;
        if !(tr > 0.0) {
            return input_err(format!("cannot normalize operator with trace {tr}"));
        }
        Self::new(op.scale_real(1.0 / tr))
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self { op: psi.projector() }
    }

    /// `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() || dim < 2 {
            return input_err(format!("dimension {dim} is not a power of two ≥ 2"));
        }
        Ok(Self {
            op: Operator::identity(dim).scale_real(1.0 / dim as f64),
        })
    }

    /// Wraps an operator the caller guarantees to be a valid state up to
    /// roundoff.
    pub(crate) fn from_trusted(op: Operator) -> Self {
        debug_assert!(op.is_hermitian(1e-8), "defect {}", op.hermiticity_defect());
        Self { op }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.op.num_qubits()
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.op[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.op)
            .expect("density matrix is Hermitian")
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// Hermitian, unit trace and PSD within the module tolerances.
    pub fn is_valid(&self) -> bool {
        self.op.is_hermitian(HERMITIAN_TOL)
            && (self.trace() - 1.0).abs() <= TRACE_TOL
            && self.min_eigenvalue() >= -POSITIVITY_TOL
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &Operator) -> Self {
        Self::from_trusted(u.conjugate(&self.op))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.op.max_abs_diff(&other.op)
    }

    /// `⟨ψ|ρ|ψ⟩` without clipping.
    pub fn expectation(&self, psi: &StateVector) -> Complex64 {
        let rho_psi = self.op.apply(psi.amplitudes());
        psi.amplitudes().iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Reduced state on the `keep` qubits, ordered as listed.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_op(&rho.op, keep).map(DensityMatrix::from_trusted)
}

/// `⟨ψ|ρ|ψ⟩`, clipped into `[0, 1]`.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return input_err(format!(
            "state dimension {} does not match density matrix dimension {}",
            psi.dim(),
            rho.dim()
        ));
    }
    Ok(rho.expectation(psi).re.clamp(0.0, 1.0))
}
