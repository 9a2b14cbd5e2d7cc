//! Fixed one- and two-qubit matrices.

use num_complex::Complex64;

use super::Operator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn two_by_two(entries: [Complex64; 4]) -> Operator {
    Operator::new(2, 2, entries.to_vec()).expect("2x2 literal")
}

pub fn identity2() -> Operator {
    Operator::identity(2)
}

pub fn pauli_x() -> Operator {
    two_by_two([ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Operator {
    two_by_two([ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Operator {
    two_by_two([ONE, ZERO, ZERO, -ONE])
}

/// `-iY`, the real rotation `[[0,-1],[1,0]]`.
pub fn minus_i_y() -> Operator {
    pauli_y().scale(-I)
}

/// `H = (X + Z)/√2`.
pub fn hadamard() -> Operator {
    (&pauli_x() + &pauli_z()).scale_real(std::f64::consts::FRAC_1_SQRT_2)
}

/// `|kk'⟩ ↦ |k'k⟩`.
pub fn swap() -> Operator {
    Operator::from_real(4, 4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]).expect("swap literal")
}
