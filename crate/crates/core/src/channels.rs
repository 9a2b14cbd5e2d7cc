//! Local noise acting independently on each party's qubit.
//!
//! Dephasing with reliability `μ` keeps `ρ` with weight `(1+μ)/2` and
//! applies `Z` otherwise; depolarizing keeps `ρ` with weight `μ` and replaces
//! the qubit by the maximally mixed state otherwise. Applied to all three
//! qubits of `|W^000⟩⟨W^000|` they give fidelities `(1+2μ²)/3` and
//! `(3+μ+9μ²+11μ³)/24`.

use std::fmt;
use std::str::FromStr;

use crate::error::{input_err, Error, Result};
use crate::qmath::gates::{identity2, pauli_x, pauli_y, pauli_z};
use crate::qmath::{embed, DensityMatrix, Operator};
use crate::wstructure::w_state;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Dephasing,
    Depolarizing,
}

impl ChannelKind {
    /// Fidelity with `|W^000⟩` after the channel hits all three qubits.
    pub fn w_fidelity(self, mu: f64) -> f64 {
        match self {
            ChannelKind::Dephasing => (1.0 + 2.0 * mu * mu) / 3.0,
            ChannelKind::Depolarizing => (3.0 + mu + 9.0 * mu * mu + 11.0 * mu * mu * mu) / 24.0,
        }
    }

    /// Smallest fidelity reachable (at `μ = 0`).
    pub fn min_fidelity(self) -> f64 {
        match self {
            ChannelKind::Dephasing => 1.0 / 3.0,
            ChannelKind::Depolarizing => 1.0 / 8.0,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Depolarizing => "depolarizing",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(ChannelKind::Dephasing),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => input_err(format!("unknown channel {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    kind: ChannelKind,
    mu: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return input_err(format!("channel reliability {mu} outside [0, 1]"));
        }
        Ok(Self { kind, mu })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Single-qubit Kraus operators.
    pub fn kraus(&self) -> Vec<Operator> {
        let mu = self.mu;
        match self.kind {
            ChannelKind::Dephasing => vec![
                identity2().scale_real(((1.0 + mu) / 2.0).sqrt()),
                pauli_z().scale_real(((1.0 - mu) / 2.0).sqrt()),
            ],
            ChannelKind::Depolarizing => {
                let w = ((1.0 - mu) / 4.0).sqrt();
                vec![
                    identity2().scale_real(((1.0 + 3.0 * mu) / 4.0).sqrt()),
                    pauli_x().scale_real(w),
                    pauli_y().scale_real(w),
                    pauli_z().scale_real(w),
                ]
            }
        }
    }
}

/// Applies the channel to one qubit of `rho`.
pub fn apply_channel(rho: &DensityMatrix, spec: &ChannelSpec, qubit: usize) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    let mut out = Operator::zeros(rho.dim(), rho.dim());
    for k in spec.kraus() {
        let lifted = embed(&k, n, &[qubit])?;
        out = &out + &lifted.conjugate(rho.as_operator());
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// `|W^000⟩⟨W^000|` after the same channel on each of the three qubits.
pub fn noisy_w(spec: &ChannelSpec) -> DensityMatrix {
    let mut rho = DensityMatrix::from_pure(&w_state());
    for q in 0..3 {
        rho = apply_channel(&rho, spec, q).expect("qubit index in range");
    }
    rho
}

/// Rounding allowance on the ends of the fidelity ranges.
const RANGE_SLACK: f64 = 1e-12;

/// Channel reliability that produces a noisy W state of fidelity `f`.
pub fn mu_for_fidelity(kind: ChannelKind, f: f64) -> Result<f64> {
    let lo = kind.min_fidelity();
    if !(lo - RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&f) {
        return input_err(format!("fidelity {f} unreachable by {kind} noise (range [{lo}, 1])"));
    }
    let f = f.clamp(lo, 1.0);
    match kind {
        ChannelKind::Dephasing => Ok(((3.0 * f - 1.0) / 2.0).max(0.0).sqrt()),
        ChannelKind::Depolarizing => {
            // monotone increasing on [0, 1]
            let (mut a, mut b) = (0.0f64, 1.0f64);
            while b - a > 1e-13 {
                let mid = 0.5 * (a + b);
                if kind.w_fidelity(mid) < f {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Ok(0.5 * (a + b))
        }
    }
}

/// Noisy W state of the given channel family with fidelity `f`.
pub fn noisy_w_with_fidelity(kind: ChannelKind, f: f64) -> Result<DensityMatrix> {
    let mu = mu_for_fidelity(kind, f)?;
    Ok(noisy_w(&ChannelSpec::new(kind, mu)?))
}

/// One application of the closed-form recurrence for dephased W states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceValue {
    pub fidelity: f64,
    pub success_probability: f64,
}

/// Output fidelity and success probability of one protocol step on three
/// copies of a locally dephased W state with fidelity `f`.
pub fn dephasing_fidelity_map(f: f64) -> Result<RecurrenceValue> {
    if !(1.0 / 3.0 - RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&f) {
        return input_err(format!("fidelity {f} outside the physical range [1/3, 1]"));
    }
    let g = 1.0 - f;
    let num = 25.0 / 81.0 * f.powi(3) + f * g * g / 18.0 + g.powi(3) / 324.0;
    let den = 25.0 / 81.0 * f.powi(3) + f * f * g / 9.0 + 2.0 / 27.0 * f * g * g + 17.0 / 162.0 * g.powi(3);
    Ok(RecurrenceValue {
        fidelity: num / den,
        success_probability: den,
    })
}
