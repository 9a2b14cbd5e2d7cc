//! The 3-qubit W basis and the operators built around it.
//!
//! `|W^{k1k2k3}⟩ = U |k1k2k3⟩` with `U = (1·Z·X + Z·X·1 + X·1·Z)/√3`. The
//! stabilizer generators `K_j` have eigenvalue `(-1)^{k_j}` on
//! `|W^{k1k2k3}⟩`, and the dual basis `Λ†|W^k⟩` is mutually unbiased with
//! the W basis.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::qmath::gates::{hadamard, identity2, minus_i_y, pauli_x, pauli_y, pauli_z};
use crate::qmath::{embed, kron_all, Operator, StateVector};

/// Label `k1k2k3` of a W-basis vector, stored as `4·k1 + 2·k2 + k3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WLabel(u8);

impl WLabel {
    pub const W000: WLabel = WLabel(0);
    pub const W111: WLabel = WLabel(7);

    pub fn new(k1: u8, k2: u8, k3: u8) -> Result<Self> {
        if k1 > 1 || k2 > 1 || k3 > 1 {
            return input_err(format!("W label bits must be 0 or 1, got {k1}{k2}{k3}"));
        }
        Ok(Self(k1 << 2 | k2 << 1 | k3))
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index > 7 {
            return input_err(format!("W label index {index} out of range"));
        }
        Ok(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Bit `k_j` for `j ∈ {1, 2, 3}`.
    pub fn bit(self, j: usize) -> u8 {
        debug_assert!((1..=3).contains(&j));
        (self.0 >> (3 - j)) & 1
    }

    pub fn all() -> impl Iterator<Item = WLabel> {
        (0..8u8).map(WLabel)
    }
}

impl fmt::Display for WLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.bit(1), self.bit(2), self.bit(3))
    }
}

impl FromStr for WLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Input(format!("bad W label {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match bits[..] {
            [k1, k2, k3] => WLabel::new(k1, k2, k3),
            _ => input_err(format!("W label {s:?} must have three bits")),
        }
    }
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Table of W-basis vectors: `(sign, computational index)` triples.
const W_TABLE: [[(f64, usize); 3]; 8] = [
    [(1.0, 0b001), (1.0, 0b010), (1.0, 0b100)],
    [(1.0, 0b000), (1.0, 0b011), (-1.0, 0b101)],
    [(-1.0, 0b011), (1.0, 0b000), (1.0, 0b110)],
    [(-1.0, 0b010), (1.0, 0b001), (-1.0, 0b111)],
    [(1.0, 0b101), (-1.0, 0b110), (1.0, 0b000)],
    [(1.0, 0b100), (-1.0, 0b111), (-1.0, 0b001)],
    [(-1.0, 0b111), (-1.0, 0b100), (1.0, 0b010)],
    [(-1.0, 0b110), (-1.0, 0b101), (-1.0, 0b011)],
];

pub fn w_basis_vector(label: WLabel) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    for &(sign, idx) in &W_TABLE[label.index()] {
        amps[idx] = Complex64::new(sign * INV_SQRT3, 0.0);
    }
    StateVector::normalized(amps).expect("table rows are non-zero")
}

/// `|W^000⟩`, the distillation target.
pub fn w_state() -> StateVector {
    w_basis_vector(WLabel::W000)
}

/// The eight W-basis vectors as the columns of a unitary.
pub fn u_wbasis() -> Operator {
    let (i, x, z) = (identity2(), pauli_x(), pauli_z());
    let sum = &(&kron_all([&i, &z, &x]) + &kron_all([&z, &x, &i])) + &kron_all([&x, &i, &z]);
    sum.scale_real(INV_SQRT3)
}

/// Subset of the generators `{K1, K2, K3}`; bit `j-1` marks `K_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct StabilizerSet(u8);

impl StabilizerSet {
    pub const IDENTITY: StabilizerSet = StabilizerSet(0);

    pub fn from_generators(generators: &[usize]) -> Result<Self> {
        let mut mask = 0u8;
        for &j in generators {
            if !(1..=3).contains(&j) {
                return input_err(format!("stabilizer generator index {j} not in 1..=3"));
            }
            mask ^= 1 << (j - 1);
        }
        Ok(Self(mask))
    }

    pub fn contains(self, j: usize) -> bool {
        (1..=3).contains(&j) && self.0 & (1 << (j - 1)) != 0
    }

    /// Symmetric difference, i.e. the label of the product of two elements.
    pub fn product(self, other: StabilizerSet) -> StabilizerSet {
        StabilizerSet(self.0 ^ other.0)
    }

    pub fn all() -> impl Iterator<Item = StabilizerSet> {
        (0..8u8).map(StabilizerSet)
    }

    /// Eigenvalue sign `(-1)^{Σ_{j∈S} k_j}` on `|W^k⟩`.
    pub fn sign_on(self, k: WLabel) -> f64 {
        let parity: u8 = (1..=3).filter(|&j| self.contains(j)).map(|j| k.bit(j)).sum();
        if parity.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for StabilizerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        for j in 1..=3 {
            if self.contains(j) {
                write!(f, "K{j}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerElement {
    pub label: StabilizerSet,
    pub matrix: Operator,
}

/// `Σ c · P1⊗P2⊗P3` for Pauli strings written as "XXZ", "1YY", ...
fn pauli_sum(terms: &[(f64, &str)]) -> Operator {
    let factor = |c: char| match c {
        'X' => pauli_x(),
        'Y' => pauli_y(),
        'Z' => pauli_z(),
        _ => identity2(),
    };
    terms.iter().fold(Operator::zeros(8, 8), |acc, &(coeff, word)| {
        let f: Vec<Operator> = word.chars().map(factor).collect();
        &acc + &kron_all(&f).scale_real(coeff)
    })
}

/// Stabilizer element from its explicit Pauli expansion.
pub fn stabilizer(label: StabilizerSet) -> StabilizerElement {
    const T: f64 = 2.0 / 3.0;
    const S: f64 = 1.0 / 3.0;
    let matrix = match label.0 {
        0 => Operator::identity(8),
        0b001 => pauli_sum(&[(T, "XXZ"), (T, "YZY"), (S, "Z11")]),
        0b010 => pauli_sum(&[(T, "ZXX"), (T, "YYZ"), (S, "1Z1")]),
        0b100 => pauli_sum(&[(T, "XZX"), (T, "ZYY"), (S, "11Z")]),
        0b011 => pauli_sum(&[(T, "1XX"), (T, "Y1Y"), (-S, "ZZ1")]),
        0b101 => pauli_sum(&[(T, "XX1"), (T, "1YY"), (-S, "Z1Z")]),
        0b110 => pauli_sum(&[(T, "X1X"), (T, "YY1"), (-S, "1ZZ")]),
        _ => pauli_sum(&[(-1.0, "ZZZ")]),
    };
    StabilizerElement { label, matrix }
}

/// The same element built from the spectral decomposition
/// `Σ_k (-1)^{Σ_{j∈S} k_j} |W^k⟩⟨W^k|`.
pub fn stabilizer_spectral(label: StabilizerSet) -> Operator {
    WLabel::all().fold(Operator::zeros(8, 8), |acc, k| {
        &acc + &w_basis_vector(k).projector().scale_real(label.sign_on(k))
    })
}

/// Generator `K_j`, `j ∈ {1, 2, 3}`.
pub fn generator(j: usize) -> Result<Operator> {
    Ok(stabilizer(StabilizerSet::from_generators(&[j])?).matrix)
}

/// Local unitary with `R_k |W^000⟩ = |W^k⟩`, a product of single-qubit
/// factors.
pub fn relabel_unitary(label: WLabel) -> Operator {
    let (i, x, z, my) = (identity2(), pauli_x(), pauli_z(), minus_i_y());
    let factors: [&Operator; 3] = match label.index() {
        0 => [&i, &i, &i],
        1 => [&z, &i, &x],
        2 => [&i, &x, &z],
        3 => [&z, &x, &my],
        4 => [&x, &z, &i],
        5 => [&my, &z, &x],
        6 => [&x, &my, &z],
        _ => [&my, &my, &my],
    };
    kron_all(factors)
}

/// `Λ = H⊗H⊗H · SWAP_13`.
pub fn lambda_op() -> Operator {
    let h = hadamard();
    let swap13 = embed(&crate::qmath::gates::swap(), 3, &[0, 2]).expect("valid targets");
    kron_all([&h, &h, &h]).matmul(&swap13)
}

/// `Λ† |W^k⟩`.
pub fn dual_w_basis_vector(label: WLabel) -> StateVector {
    w_basis_vector(label)
        .evolve(&lambda_op().adjoint())
        .expect("unitary image of a unit vector")
}

/// Permutation fixing `|000⟩`, `|111⟩` and exchanging `|001⟩↔|110⟩`,
/// `|010⟩↔|101⟩`, `|100⟩↔|011⟩`.
pub fn v_exchange() -> Operator {
    let mut v = Operator::zeros(8, 8);
    for b in 0..8 {
        let image = if b == 0 || b == 7 { b } else { 7 - b };
        v[(image, b)] = Complex64::new(1.0, 0.0);
    }
    v
}
