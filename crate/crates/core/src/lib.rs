//! Distillation of the 3-qubit W state by complementary stabilizer
//! measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmath`]: dense complex linear algebra on qubit registers.
//! - [`wstructure`]: the W basis, its stabilizer group, the relabeling
//!   unitaries and the mutually unbiased dual basis.
//! - [`channels`]: local dephasing / depolarizing noise and the closed-form
//!   fidelity recurrence for dephased W states.
//! - [`protocol`]: the three-copies-to-one subprotocols, the greedy step
//!   selector and the recurrence driver.
//! - [`experiments`]: thresholds, yield curves, PPT sweeps and random-state
//!   branch statistics.
//! - [`cli`]: the command-line front end used by the `wdistill` binary.

pub mod channels;
pub mod cli;
mod error;
pub mod experiments;
pub mod protocol;
pub mod qmath;
pub mod wstructure;

pub use error::{Error, Result};
pub use qmath::{Complex, DensityMatrix, Operator, StateVector};
pub use wstructure::WLabel;
