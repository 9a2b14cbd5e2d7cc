//! The three-copies-to-one recurrence.
//!
//! Three copies of a 3-qubit state are laid out copy-major on nine qubits
//! (`A1 B1 C1 A2 B2 C2 A3 B3 C3`), so party A holds qubits `{0, 3, 6}`, B
//! holds `{1, 4, 7}` and C holds `{2, 5, 8}`. Each party measures the local
//! stabilizers `K1K2` and `K1K3` on its three qubits and, on a coincident
//! outcome, contracts them to one qubit. Subprotocol `P` keeps the outcomes
//! 1, 2, 3 in the W basis; the dual `P̄` first applies `V` locally and keeps
//! outcome 0 in the complementary basis `Λ†|W⟩`.
//!
//! A branch is described per party by a `d × 8` map `L` (the contraction
//! composed with the measurement projector). The branch output
//! `Σ (L⊗L⊗L) γ (L⊗L⊗L)†` is computed by [`contract_three_copies`] without
//! ever forming the 512-dimensional `γ = ρ⊗ρ⊗ρ`; [`dense_branch_output`]
//! does the same thing with explicit 512-dimensional matrices and serves as
//! the reference in tests.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::experiments::{classify_state, Classification};
use crate::qmath::gates::hadamard;
use crate::qmath::{kron, kron_all, permute_qubits, DensityMatrix, Operator};
use crate::wstructure::{
    dual_w_basis_vector, lambda_op, relabel_unitary, stabilizer, v_exchange, w_basis_vector, w_state, StabilizerSet,
    WLabel,
};

/// Success probabilities below this are treated as "never fires".
pub const DEGENERATE_CUTOFF: f64 = 1e-14;
/// Diagonal entries and subprotocol fidelities closer than this are ties.
pub const TIE_TOL: f64 = 1e-12;
/// Entrywise distance below which consecutive states count as unchanged.
pub const FIXED_POINT_TOL: f64 = 1e-9;
/// Consecutive unchanged steps required to declare a fixed point.
pub const FIXED_POINT_REPEATS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            "C" | "c" => Ok(Party::C),
            _ => input_err(format!("unknown party {s:?}")),
        }
    }
}

/// Placement of the nine qubits of `ρ⊗ρ⊗ρ`: global index
/// `3·(copy-1) + party`.
#[derive(Clone, Copy, Debug, Default)]
pub struct QubitLayout;

impl QubitLayout {
    pub const QUBITS: usize = 9;

    pub fn global(party: Party, copy: usize) -> usize {
        debug_assert!((1..=3).contains(&copy));
        3 * (copy - 1) + party.ordinal()
    }

    pub fn party_of(global: usize) -> Party {
        Party::ALL[global % 3]
    }

    pub fn copy_of(global: usize) -> usize {
        global / 3 + 1
    }

    /// The party's qubits in local order (copy 1, 2, 3).
    pub fn party_qubits(party: Party) -> [usize; 3] {
        [1, 2, 3].map(|c| Self::global(party, c))
    }

    pub fn copy_qubits(copy: usize) -> [usize; 3] {
        Party::ALL.map(|p| Self::global(p, copy))
    }
}

/// Two-bit outcome `[m1, m2]` of measuring `K1K2` and `K1K3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OutcomePair {
    pub m1: u8,
    pub m2: u8,
}

impl OutcomePair {
    pub const ZERO: OutcomePair = OutcomePair { m1: 0, m2: 0 };
    pub const ONE: OutcomePair = OutcomePair { m1: 0, m2: 1 };
    pub const TWO: OutcomePair = OutcomePair { m1: 1, m2: 0 };
    pub const THREE: OutcomePair = OutcomePair { m1: 1, m2: 1 };
    pub const ALL: [OutcomePair; 4] = [Self::ZERO, Self::ONE, Self::TWO, Self::THREE];

    pub fn new(m1: u8, m2: u8) -> Result<Self> {
        if m1 > 1 || m2 > 1 {
            return input_err(format!("outcome bits must be 0 or 1, got [{m1},{m2}]"));
        }
        Ok(Self { m1, m2 })
    }

    /// W-basis labels `(x, y)` selected by this outcome; the majority rule
    /// sends `x` to `|0⟩` and `y` to `|1⟩`.
    fn support(self) -> (WLabel, WLabel) {
        let pick = |a: usize, b: usize| (WLabel::from_index(a).unwrap(), WLabel::from_index(b).unwrap());
        match (self.m1, self.m2) {
            (0, 0) => pick(0b000, 0b111),
            (0, 1) => pick(0b001, 0b110),
            (1, 0) => pick(0b010, 0b101),
            _ => pick(0b100, 0b011),
        }
    }
}

impl fmt::Display for OutcomePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.m1, self.m2)
    }
}

/// `M_m = ¼(1 + (-1)^{m1} K1K2)(1 + (-1)^{m2} K1K3)`.
pub fn measurement_operator(m: OutcomePair) -> Operator {
    let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
    let id = Operator::identity(8);
    let k1k2 = stabilizer(StabilizerSet::from_generators(&[1, 2]).unwrap()).matrix;
    let k1k3 = stabilizer(StabilizerSet::from_generators(&[1, 3]).unwrap()).matrix;
    let first = &id + &k1k2.scale_real(sign(m.m1));
    let second = &id + &k1k3.scale_real(sign(m.m2));
    first.matmul(&second).scale_real(0.25)
}

/// `Λ† M_m Λ`, the projector onto the dual basis vectors of outcome `m`.
pub fn dual_measurement_operator(m: OutcomePair) -> Operator {
    let lambda = lambda_op();
    lambda.adjoint().matmul(&measurement_operator(m)).matmul(&lambda)
}

/// Majority-rule contraction `2 × 8`.
///
/// Plain: `|0⟩⟨W_x| + |1⟩⟨W_y|` for outcomes 1, 2, 3. Dual (outcome 0
/// only): `H|1⟩⟨W̄_000| + H|0⟩⟨W̄_111|`.
pub fn contraction(m: OutcomePair, dual: bool) -> Result<Operator> {
    if dual {
        if m != OutcomePair::ZERO {
            return input_err(format!("dual contraction is only defined for outcome [0,0], got {m}"));
        }
        let h = hadamard();
        let h0 = h.apply(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let h1 = h.apply(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let a = Operator::outer(&h1, dual_w_basis_vector(WLabel::W000).amplitudes())?;
        let b = Operator::outer(&h0, dual_w_basis_vector(WLabel::W111).amplitudes())?;
        return Ok(&a + &b);
    }
    if m == OutcomePair::ZERO {
        return input_err("plain contraction is only defined for outcomes [0,1], [1,0], [1,1]");
    }
    let (x, y) = m.support();
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let one = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let a = Operator::outer(&zero, w_basis_vector(x).amplitudes())?;
    let b = Operator::outer(&one, w_basis_vector(y).amplitudes())?;
    Ok(&a + &b)
}

/// Where `V` acts in the dual subprotocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum VPlacement {
    /// On each party's own three qubits (one from every copy).
    #[default]
    PerParty,
    /// On each copy's A, B, C qubits before regrouping by party.
    PerCopy,
}

impl fmt::Display for VPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VPlacement::PerParty => "per-party",
            VPlacement::PerCopy => "per-copy",
        })
    }
}

impl FromStr for VPlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-party" => Ok(VPlacement::PerParty),
            "per-copy" => Ok(VPlacement::PerCopy),
            _ => input_err(format!("unknown V placement {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub v_placement: VPlacement,
    /// Relabel to the canonical frame before every step and compare the
    /// subprotocols on their canonical fidelity. When false, only the
    /// initial state is relabeled and raw fidelities are compared.
    pub relabel_every_step: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            v_placement: VPlacement::PerParty,
            relabel_every_step: true,
        }
    }
}

/// One party's branch map in the doubled (ket ⊗ bra) index space.
///
/// Row `α` is either a pair `(a, a')` of output indices, or a single row
/// holding `Σ_a` when the branch is only needed for its trace. Column
/// `x1·16 + x2·4 + x3` combines the three local qubits, `x_c = 2·i_c + i'_c`
/// with `i_c` the row and `i'_c` the column bit of copy `c`.
#[derive(Clone, Debug)]
pub struct PartyMap {
    out_dim: usize,
    traced: bool,
    data: Vec<Complex64>,
}

impl PartyMap {
    fn split(x: usize) -> (usize, usize) {
        // local index i1i2i3 / i'1i'2i'3 from the 3 doubled digits
        let (x1, x2, x3) = (x >> 4, (x >> 2) & 3, x & 3);
        let row = (x1 >> 1) << 2 | (x2 >> 1) << 1 | (x3 >> 1);
        let col = (x1 & 1) << 2 | (x2 & 1) << 1 | (x3 & 1);
        (row, col)
    }

    pub fn new(l: &Operator) -> Self {
        assert_eq!(l.cols(), 8, "party maps act on three local qubits");
        let d = l.rows();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d * 64];
        for a in 0..d {
            for b in 0..d {
                for x in 0..64 {
                    let (i, ip) = Self::split(x);
                    data[(a * d + b) * 64 + x] = l[(a, i)] * l[(b, ip)].conj();
                }
            }
        }
        Self {
            out_dim: d,
            traced: false,
            data,
        }
    }

    pub fn traced(l: &Operator) -> Self {
        assert_eq!(l.cols(), 8, "party maps act on three local qubits");
        let mut data = vec![Complex64::new(0.0, 0.0); 64];
        for (x, slot) in data.iter_mut().enumerate() {
            let (i, ip) = Self::split(x);
            *slot = (0..l.rows()).map(|a| l[(a, i)] * l[(a, ip)].conj()).sum();
        }
        Self {
            out_dim: 1,
            traced: true,
            data,
        }
    }

    fn rows(&self) -> usize {
        if self.traced {
            1
        } else {
            self.out_dim * self.out_dim
        }
    }
}

/// `Σ (L_A ⊗ L_B ⊗ L_C) (ρ⊗ρ⊗ρ) (L_A ⊗ L_B ⊗ L_C)†` with each `L` acting on
/// its party's three qubits; output qubits are ordered A, B, C. Traced party
/// maps drop their output qubit (summing it out).
pub fn contract_three_copies(rho: &DensityMatrix, maps: [&PartyMap; 3]) -> Operator {
    assert_eq!(rho.dim(), 8, "three-copy contraction needs a 3-qubit state");
    // r[x][y][z], x/y/z the doubled indices of parties A/B/C
    let mut r = [Complex64::new(0.0, 0.0); 64];
    for (idx, slot) in r.iter_mut().enumerate() {
        let (x, y, z) = (idx >> 4, (idx >> 2) & 3, idx & 3);
        let row = (x >> 1) << 2 | (y >> 1) << 1 | (z >> 1);
        let col = (x & 1) << 2 | (y & 1) << 1 | (z & 1);
        *slot = rho.get(row, col);
    }
    // r as [x][yz] with yz = y·4 + z
    let rx = |x: usize, yz: usize| r[x * 16 + yz];

    let [da, db, dc] = maps;
    let na = da.rows();
    let zero = Complex64::new(0.0, 0.0);

    // t1[α][x2][x3][yz1] = Σ_x1 D_A[α][x1 x2 x3] r[x1][yz1]
    let mut t1 = vec![zero; na * 16 * 16];
    for alpha in 0..na {
        let drow = &da.data[alpha * 64..(alpha + 1) * 64];
        for x23 in 0..16 {
            let out = &mut t1[(alpha * 16 + x23) * 16..(alpha * 16 + x23 + 1) * 16];
            for x1 in 0..4 {
                let coeff = drow[x1 * 16 + x23];
                if coeff == zero {
                    continue;
                }
                for (yz1, o) in out.iter_mut().enumerate() {
                    *o += coeff * rx(x1, yz1);
                }
            }
        }
    }
    // t2[α][x3][yz1][yz2] = Σ_x2 t1[α][x2][x3][yz1] r[x2][yz2]
    let mut t2 = vec![zero; na * 4 * 256];
    for alpha in 0..na {
        for x3 in 0..4 {
            for yz1 in 0..16 {
                let base = ((alpha * 4 + x3) * 16 + yz1) * 16;
                for x2 in 0..4 {
                    let coeff = t1[(alpha * 16 + x2 * 4 + x3) * 16 + yz1];
                    if coeff == zero {
                        continue;
                    }
                    for yz2 in 0..16 {
                        t2[base + yz2] += coeff * rx(x2, yz2);
                    }
                }
            }
        }
    }
    // t3[α][yz1][yz2][yz3] = Σ_x3 t2[α][x3][yz1][yz2] r[x3][yz3]
    let mut t3 = vec![zero; na * 4096];
    for alpha in 0..na {
        for yz12 in 0..256 {
            let base = (alpha * 256 + yz12) * 16;
            for x3 in 0..4 {
                let coeff = t2[(alpha * 4 + x3) * 256 + yz12];
                if coeff == zero {
                    continue;
                }
                for yz3 in 0..16 {
                    t3[base + yz3] += coeff * rx(x3, yz3);
                }
            }
        }
    }
    // u[α][β][z1z2z3] = Σ_{y1y2y3} D_B[β][y1y2y3] t3[α][y1z1][y2z2][y3z3]
    let nb = db.rows();
    let mut u = vec![zero; na * nb * 64];
    for alpha in 0..na {
        let t = &t3[alpha * 4096..(alpha + 1) * 4096];
        for beta in 0..nb {
            let drow = &db.data[beta * 64..(beta + 1) * 64];
            let out = &mut u[(alpha * nb + beta) * 64..(alpha * nb + beta + 1) * 64];
            for (y, &coeff) in drow.iter().enumerate() {
                if coeff == zero {
                    continue;
                }
                let (y1, y2, y3) = (y >> 4, (y >> 2) & 3, y & 3);
                for (z, o) in out.iter_mut().enumerate() {
                    let (z1, z2, z3) = (z >> 4, (z >> 2) & 3, z & 3);
                    *o += coeff * t[((y1 * 4 + z1) * 16 + (y2 * 4 + z2)) * 16 + (y3 * 4 + z3)];
                }
            }
        }
    }
    // o[α][β][γ] = Σ_z D_C[γ][z] u[α][β][z]
    let nc = dc.rows();
    let mut o = vec![zero; na * nb * nc];
    for ab in 0..na * nb {
        let urow = &u[ab * 64..(ab + 1) * 64];
        for gamma in 0..nc {
            let drow = &dc.data[gamma * 64..(gamma + 1) * 64];
            o[ab * nc + gamma] = drow.iter().zip(urow).map(|(d, v)| d * v).sum();
        }
    }

    // reassemble (a a')(b b')(c c') into a (abc) × (a'b'c') operator
    let dims = [da, db, dc].map(|m| if m.traced { 1 } else { m.out_dim });
    let out_dim = dims[0] * dims[1] * dims[2];
    let mut result = Operator::zeros(out_dim, out_dim);
    let pair = |m: &PartyMap, idx: usize| {
        if m.traced {
            (0, 0)
        } else {
            (idx / m.out_dim, idx % m.out_dim)
        }
    };
    for alpha in 0..na {
        let (a, ap) = pair(da, alpha);
        for beta in 0..nb {
            let (b, bp) = pair(db, beta);
            for gamma in 0..nc {
                let (c, cp) = pair(dc, gamma);
                let row = (a * dims[1] + b) * dims[2] + c;
                let col = (ap * dims[1] + bp) * dims[2] + cp;
                result[(row, col)] = o[(alpha * nb + beta) * nc + gamma];
            }
        }
    }
    result
}

/// Dense reference for one branch: `T γ T†` with the `8 × 512` map
/// `T = (L⊗L⊗L)·Π`, `Π` regrouping copy-major qubits into party-major
/// order and `γ = ρ⊗ρ⊗ρ`.
pub fn dense_branch_map(l: &Operator) -> Operator {
    let order: Vec<usize> = Party::ALL.iter().flat_map(|&p| QubitLayout::party_qubits(p)).collect();
    let regroup = permute_qubits(QubitLayout::QUBITS, &order).expect("valid layout");
    kron_all([l, l, l]).matmul(&regroup)
}

pub fn dense_branch_output(rho: &DensityMatrix, l: &Operator) -> Operator {
    let op = rho.as_operator();
    let gamma = kron(&kron(op, op), op);
    dense_branch_map(l).conjugate(&gamma)
}

/// Effective per-party map of the dual branch: the contraction, composed
/// with `V` when `V` acts on the party's own qubits.
fn dual_party_map(placement: VPlacement) -> Operator {
    let l = contraction(OutcomePair::ZERO, true).expect("dual outcome");
    match placement {
        VPlacement::PerParty => l.matmul(&v_exchange()),
        VPlacement::PerCopy => l,
    }
}

fn dual_input(rho: &DensityMatrix, placement: VPlacement) -> DensityMatrix {
    match placement {
        VPlacement::PerParty => rho.clone(),
        VPlacement::PerCopy => rho.evolve(&v_exchange()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subprotocol {
    P,
    PBar,
}

impl fmt::Display for Subprotocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subprotocol::P => "P",
            Subprotocol::PBar => "Pbar",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub rho_out: DensityMatrix,
    pub p_success: f64,
    pub subprotocol: Subprotocol,
    /// `⟨W^000|ρ_out|W^000⟩`.
    pub fidelity: f64,
    /// Relabeling applied to the output to make `|W^000⟩` its
    /// dominant W-basis component (`None` when already canonical).
    pub relabel_applied: Option<WLabel>,
}

fn finish_branch(unnormalized: Operator, subprotocol: Subprotocol) -> Result<StepResult> {
    let p = unnormalized.trace().re;
    if !(p >= DEGENERATE_CUTOFF) {
        return Err(Error::DegenerateOutcome(p));
    }
    let mut out = unnormalized.scale_real(1.0 / p);
    hermitize(&mut out);
    let rho_out = DensityMatrix::from_trusted(out);
    let fidelity = rho_out.expectation(&w_state()).re;
    Ok(StepResult {
        rho_out,
        p_success: p,
        subprotocol,
        fidelity,
        relabel_applied: None,
    })
}

fn hermitize(op: &mut Operator) {
    let n = op.dim();
    for i in 0..n {
        op[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let z = (op[(i, j)] + op[(j, i)].conj()) * 0.5;
            op[(i, j)] = z;
            op[(j, i)] = z.conj();
        }
    }
}

fn require_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 8 {
        return input_err(format!(
            "protocol input must be a 3-qubit state, got dimension {}",
            rho.dim()
        ));
    }
    Ok(())
}

/// Subprotocol `P`: coincident outcomes 1, 2, 3 with the majority rule.
pub fn run_p(rho: &DensityMatrix) -> Result<StepResult> {
    require_three_qubits(rho)?;
    let mut acc = Operator::zeros(8, 8);
    for m in [OutcomePair::ONE, OutcomePair::TWO, OutcomePair::THREE] {
        let map = PartyMap::new(&contraction(m, false)?);
        acc = &acc + &contract_three_copies(rho, [&map, &map, &map]);
    }
    finish_branch(acc, Subprotocol::P)
}

/// Subprotocol `P̄`: local `V`, then coincident dual outcome 0.
pub fn run_pbar(rho: &DensityMatrix, placement: VPlacement) -> Result<StepResult> {
    require_three_qubits(rho)?;
    let map = PartyMap::new(&dual_party_map(placement));
    let input = dual_input(rho, placement);
    finish_branch(contract_three_copies(&input, [&map, &map, &map]), Subprotocol::PBar)
}

/// Probability of the joint local outcome `[m_A, m_B, m_C]` on `ρ⊗ρ⊗ρ`, in
/// the W basis or (after `V`) in the dual basis.
pub fn joint_outcome_probability(
    rho: &DensityMatrix,
    outcomes: [OutcomePair; 3],
    dual: bool,
    placement: VPlacement,
) -> Result<f64> {
    require_three_qubits(rho)?;
    let projector = |m: OutcomePair| {
        if dual {
            let p = dual_measurement_operator(m);
            match placement {
                VPlacement::PerParty => p.matmul(&v_exchange()),
                VPlacement::PerCopy => p,
            }
        } else {
            measurement_operator(m)
        }
    };
    let maps = outcomes.map(|m| PartyMap::traced(&projector(m)));
    let input = if dual { dual_input(rho, placement) } else { rho.clone() };
    Ok(contract_three_copies(&input, [&maps[0], &maps[1], &maps[2]])[(0, 0)].re)
}

/// W-basis diagonal `⟨W^k|ρ|W^k⟩` for all eight labels.
pub fn w_diagonal(rho: &DensityMatrix) -> [f64; 8] {
    let mut d = [0.0; 8];
    for k in WLabel::all() {
        d[k.index()] = rho.expectation(&w_basis_vector(k)).re;
    }
    d
}

/// Largest W-basis diagonal entry: the fidelity after canonical relabeling.
pub fn canonical_fidelity(rho: &DensityMatrix) -> f64 {
    w_diagonal(rho).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Conjugates `ρ` by the relabeling unitary that brings its dominant W-basis
/// component to `|W^000⟩`. Ties resolve to the smallest label.
pub fn relabel_to_canonical(rho: &DensityMatrix) -> Result<(DensityMatrix, WLabel)> {
    require_three_qubits(rho)?;
    let d = w_diagonal(rho);
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = d.iter().position(|&x| x >= max - TIE_TOL).unwrap_or(0);
    let label = WLabel::from_index(best)?;
    if label == WLabel::W000 {
        return Ok((rho.clone(), label));
    }
    let r = relabel_unitary(label);
    Ok((rho.evolve(&r.adjoint()), label))
}

fn canonicalize(mut step: StepResult) -> StepResult {
    let (rho, label) = relabel_to_canonical(&step.rho_out).expect("3-qubit output");
    if label != WLabel::W000 {
        step.fidelity = rho.expectation(&w_state()).re;
        step.rho_out = rho;
        step.relabel_applied = Some(label);
    }
    step
}

/// One recurrence step: runs `P` and `P̄` and keeps the one whose output has
/// the strictly higher fidelity (ties go to `P`).
pub fn distill_step(rho: &DensityMatrix, config: &ProtocolConfig) -> Result<StepResult> {
    let input = if config.relabel_every_step {
        relabel_to_canonical(rho)?.0
    } else {
        require_three_qubits(rho)?;
        rho.clone()
    };
    let post = |s: StepResult| if config.relabel_every_step { canonicalize(s) } else { s };
    let plain = run_p(&input).map(post);
    let dual = run_pbar(&input, config.v_placement).map(post);
    match (plain, dual) {
        (Ok(p), Ok(d)) => Ok(if d.fidelity > p.fidelity + TIE_TOL { d } else { p }),
        (Ok(p), Err(_)) => Ok(p),
        (Err(_), Ok(d)) => Ok(d),
        (Err(e), Err(_)) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    TargetReached,
    FixedPoint,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Canonical input state (after the initial relabeling).
    pub initial: DensityMatrix,
    pub initial_relabel: WLabel,
    pub initial_fidelity: f64,
    pub steps: Vec<StepResult>,
    pub termination: Termination,
    pub target_fidelity: f64,
    pub classification: Classification,
    /// `Π p_i / 3^k`; 1 when no step was needed.
    pub yield_estimate: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.steps.last().map_or(&self.initial, |s| &s.rho_out)
    }

    pub fn final_fidelity(&self) -> f64 {
        self.steps.last().map_or(self.initial_fidelity, |s| s.fidelity)
    }

    /// Fidelity before the first step and after each step.
    pub fn fidelities(&self) -> Vec<f64> {
        std::iter::once(self.initial_fidelity)
            .chain(self.steps.iter().map(|s| s.fidelity))
            .collect()
    }
}

/// Iterates [`distill_step`] until the fidelity reaches `target_f`, the state
/// stops changing, or `max_steps` steps have run.
pub fn distill_run(
    rho: &DensityMatrix,
    max_steps: usize,
    target_f: f64,
    config: &ProtocolConfig,
) -> Result<Trajectory> {
    if max_steps < 1 {
        return input_err("max_steps must be at least 1");
    }
    if !(target_f > 0.0 && target_f < 1.0) {
        return input_err(format!("target fidelity {target_f} outside (0, 1)"));
    }
    require_three_qubits(rho)?;
    let (initial, initial_relabel) = relabel_to_canonical(rho)?;
    let initial_fidelity = initial.expectation(&w_state()).re;

    let mut steps: Vec<StepResult> = Vec::new();
    let mut termination = Termination::MaxSteps;
    if initial_fidelity >= target_f {
        termination = Termination::TargetReached;
    } else {
        let mut unchanged = 0;
        let mut current = initial.clone();
        for _ in 0..max_steps {
            let step = distill_step(&current, config)?;
            let moved = step.rho_out.max_abs_diff(&current);
            current = step.rho_out.clone();
            let reached = step.fidelity >= target_f;
            steps.push(step);
            if reached {
                termination = Termination::TargetReached;
                break;
            }
            unchanged = if moved <= FIXED_POINT_TOL { unchanged + 1 } else { 0 };
            if unchanged >= FIXED_POINT_REPEATS {
                termination = Termination::FixedPoint;
                break;
            }
        }
    }

    let yield_estimate = steps.iter().map(|s| s.p_success / 3.0).product();
    let mut traj = Trajectory {
        initial,
        initial_relabel,
        initial_fidelity,
        steps,
        termination,
        target_fidelity: target_f,
        classification: Classification::Transient,
        yield_estimate,
    };
    traj.classification = classify_state(&traj);
    Ok(traj)
}
