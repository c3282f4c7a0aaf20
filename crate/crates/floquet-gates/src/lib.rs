//! Floquet analysis of a resonantly driven two-level system and fast
//! single-qubit gate optimization.
//!
//! The crate models a qubit with level splitting `delta` driven by a
//! resonant field `A(t) cos(omega t + phi)`, where the envelope `A(t)` is a
//! trapezoid with linear edges. It provides:
//!
//! - the extended-space Floquet eigenproblem for the periodic problem at
//!   fixed amplitude, with analytic strong-drive results for comparison
//!   ([`floquet`]);
//! - exact state propagation (Schrödinger) and open-system propagation
//!   (Lindblad) under the pulsed drive ([`propagate`]);
//! - decomposition of a propagated state onto the instantaneous Floquet
//!   modes, first-order (adiabatic perturbation theory) and exact
//!   transition amplitudes across pulse edges ([`dynamics`]);
//! - quantum process tomography, rotation extraction, and fidelity measures
//!   ([`tomography`]);
//! - transition-amplitude sweeps, edge-time optimization, amplitude
//!   calibration, and a staged gate optimizer ([`optimize`]);
//! - data-parallel helpers used by the sweeps ([`par`]), backed by a work
//!   pool when the `parallel` feature (default) is enabled and by plain
//!   sequential iteration otherwise.
//!
//! Units: angular frequencies throughout (`delta`, `omega`, amplitudes) and
//! their inverse for times; `hbar = 1`. The computational basis is the bare
//! qubit basis with `sigma_z |0> = +|0>` and ground state `|0>`.

pub mod bessel;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod floquet;
mod ode;
pub mod optimize;
pub mod par;
pub mod propagate;
pub mod pulse;
pub mod tomography;

pub use drive::DriveConfig;
pub use error::{Error, Result};
pub use pulse::PulseEnvelope;
