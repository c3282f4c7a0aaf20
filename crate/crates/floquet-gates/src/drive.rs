//! Drive configuration: qubit splitting, drive frequency, and drive phase.

use crate::error::{Error, Result};

/// Wrap an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(phi: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = phi.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Parameters of the driven-qubit Hamiltonian
/// `H(t) = -(delta/2) sigma_z + A(t) cos(omega t + phi) sigma_x`,
/// with `sigma_z |0> = |0>` so that `|0>` is the ground state.
///
/// All frequencies are angular; times are measured in `1/omega` unless a
/// caller chooses otherwise. `hbar = 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    delta: f64,
    omega: f64,
    phi: f64,
}

impl DriveConfig {
    /// Create a configuration. Requires `delta > 0` and `omega > 0`; `phi`
    /// is wrapped into `(-pi, pi]`.
    pub fn new(delta: f64, omega: f64, phi: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!("omega must be positive, got {omega}")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid(format!("phi must be finite, got {phi}")));
        }
        Ok(DriveConfig {
            delta,
            omega,
            phi: wrap_angle(phi),
        })
    }

    /// Resonant drive (`omega = delta`) with phase zero.
    pub fn resonant(delta: f64) -> Result<Self> {
        DriveConfig::new(delta, delta, 0.0)
    }

    /// Same splitting and frequency, different drive phase.
    pub fn with_phase(&self, phi: f64) -> Result<Self> {
        DriveConfig::new(self.delta, self.omega, phi)
    }

    /// Qubit splitting `delta` (angular frequency).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Drive angular frequency `omega`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Drive phase `phi` at `t = 0`, in `(-pi, pi]`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Detuning `delta - omega`.
    pub fn detuning(&self) -> f64 {
        self.delta - self.omega
    }

    /// Drive period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }
}
