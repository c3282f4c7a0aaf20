//! Cosine-ramp pulse envelope, its derivative, hardware quantization, and
//! the instantaneous drive field.

use crate::drive::DriveConfig;
use crate::error::{Error, Result};

/// Three-segment pulse envelope: a half-cosine rise of duration `t_rise`
/// from 0 to `a_max`, a flat plateau of duration `t_plateau`, and a
/// half-cosine fall of duration `t_fall` back to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEnvelope {
    a_max: f64,
    t_rise: f64,
    t_plateau: f64,
    t_fall: f64,
}

impl PulseEnvelope {
    /// Create an envelope. All durations and the peak amplitude must be
    /// finite and non-negative.
    pub fn new(a_max: f64, t_rise: f64, t_plateau: f64, t_fall: f64) -> Result<Self> {
        for (name, v) in [
            ("a_max", a_max),
            ("t_rise", t_rise),
            ("t_plateau", t_plateau),
            ("t_fall", t_fall),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(PulseEnvelope {
            a_max,
            t_rise,
            t_plateau,
            t_fall,
        })
    }

    /// Rise edge in isolation: the envelope ramps up over `t_rise` and the
    /// pulse ends there (no plateau, no fall).
    pub fn rise_only(a_max: f64, t_rise: f64) -> Result<Self> {
        PulseEnvelope::new(a_max, t_rise, 0.0, 0.0)
    }

    /// Fall edge in isolation: the envelope starts at `a_max` and ramps down
    /// over `t_fall`.
    pub fn fall_only(a_max: f64, t_fall: f64) -> Result<Self> {
        PulseEnvelope::new(a_max, 0.0, 0.0, t_fall)
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn t_rise(&self) -> f64 {
        self.t_rise
    }

    pub fn t_plateau(&self) -> f64 {
        self.t_plateau
    }

    pub fn t_fall(&self) -> f64 {
        self.t_fall
    }

    /// Total pulse duration `t_rise + t_plateau + t_fall`.
    pub fn total_duration(&self) -> f64 {
        self.t_rise + self.t_plateau + self.t_fall
    }

    /// Whether `t` lies inside the pulse support `[0, total_duration]`.
    /// Outside this window [`envelope`] returns 0.
    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0 && t <= self.total_duration()
    }

    /// Round each duration to the nearest multiple of `resolution` (exact
    /// half-multiples round up), then clamp `t_rise` and `t_fall` up to
    /// `min_edge`. The peak amplitude is unchanged.
    pub fn quantize(&self, resolution: f64, min_edge: f64) -> Result<PulseEnvelope> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if !(min_edge.is_finite() && min_edge >= 0.0) {
            return Err(Error::invalid(format!(
                "min_edge must be non-negative, got {min_edge}"
            )));
        }
        let round = |t: f64| (t / resolution + 0.5).floor() * resolution;
        PulseEnvelope::new(
            self.a_max,
            round(self.t_rise).max(min_edge),
            round(self.t_plateau),
            round(self.t_fall).max(min_edge),
        )
    }
}

/// Envelope amplitude `A(t)`. Returns 0 outside `[0, total_duration]`;
/// use [`PulseEnvelope::contains`] to detect out-of-range times.
pub fn envelope(p: &PulseEnvelope, t: f64) -> f64 {
    if !p.contains(t) {
        return 0.0;
    }
    if t < p.t_rise {
        0.5 * p.a_max * (1.0 - (std::f64::consts::PI * t / p.t_rise).cos())
    } else if t <= p.t_rise + p.t_plateau {
        p.a_max
    } else {
        // t <= total_duration and t > t_rise + t_plateau imply t_fall > 0
        let xi = t - p.t_rise - p.t_plateau;
        0.5 * p.a_max * (1.0 + (std::f64::consts::PI * xi / p.t_fall).cos())
    }
}

/// Exact time derivative `dA/dt` of the envelope. Returns 0 outside the
/// pulse support and on the plateau.
pub fn envelope_derivative(p: &PulseEnvelope, t: f64) -> f64 {
    if !p.contains(t) {
        return 0.0;
    }
    if t < p.t_rise {
        0.5 * p.a_max * std::f64::consts::PI / p.t_rise
            * (std::f64::consts::PI * t / p.t_rise).sin()
    } else if t <= p.t_rise + p.t_plateau {
        0.0
    } else {
        let xi = t - p.t_rise - p.t_plateau;
        -0.5 * p.a_max * std::f64::consts::PI / p.t_fall
            * (std::f64::consts::PI * xi / p.t_fall).sin()
    }
}

/// Instantaneous drive field `A(t) cos(omega t + phi)`, the coefficient of
/// `sigma_x` in the Hamiltonian.
pub fn drive_field(cfg: &DriveConfig, p: &PulseEnvelope, t: f64) -> f64 {
    envelope(p, t) * (cfg.omega() * t + cfg.phi()).cos()
}
