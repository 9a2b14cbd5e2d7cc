//! Dense complex linear algebra on qubit registers.
//!
//! Qubit 0 is the most significant bit of a computational-basis label, so
//! `|k1 k2 k3⟩` has index `4·k1 + 2·k2 + k3`.

mod eigen;
pub mod gates;
mod operator;
pub mod random;
mod state;

pub use num_complex::Complex64 as Complex;

pub use eigen::hermitian_eigenvalues;
pub use operator::{embed, kron, kron_all, partial_trace_op, partial_transpose, permute_qubits, qubit_count, Operator};
pub use random::{random_density_hs, substream, SimRng};
pub use state::{
    fidelity_with_pure, partial_trace, DensityMatrix, StateVector, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL,
};

/// Tolerance for exact algebraic identities in double precision.
pub const ALGEBRA_TOL: f64 = 1e-10;
