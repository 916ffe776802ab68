//! Dynamics backends and diagnostics for a two-qubit system dissipatively
//! coupled to a stream of qutrit ancillas.
//!
//! The crate provides four cross-validating ways to propagate the same
//! physics, plus the measures used to diagnose synchronization:
//!
//! - [`collision`]: the exact stroboscopic collision-model engine. Each
//!   collision applies `U = U_I U_S` on the joint qubit⊗qubit⊗qutrit space
//!   and traces out the ancilla.
//! - [`lindblad`]: continuous-time master equations — the effective
//!   two-body-dissipator model, its excited-state-eliminated reduction, and
//!   the 12-dimensional qutrit spontaneous-emission model.
//! - [`sse`]: diffusive (homodyne) stochastic Schrödinger trajectories and
//!   ensemble averaging.
//! - [`circuit`]: a gate-level realization (Trotterized collisions, ancilla
//!   encoding/reset, statevector and noisy density-matrix simulation with
//!   finite-shot sampling).
//! - [`metrics`]: Pearson correlation, concurrence, von Neumann entropy,
//!   mutual information, fidelity.
//! - [`qops`]: the dense complex linear-algebra kernel underneath all of it.
//!
//! The crate is `no_std`-compatible (`alloc` required). All transcendental
//! math goes through [`libm`] so results are bit-identical across platforms.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod collision;
mod error;
pub mod lindblad;
mod math;
pub mod metrics;
pub mod qops;
pub mod rng;
pub mod series;
pub mod sse;

pub use error::{Error, Result};
pub use qops::{DensityMatrix, Operator, PureState, C64};
pub use series::{ObservableSeries, Record};
