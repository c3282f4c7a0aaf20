//! Exact time evolution of the driven qubit: Schroedinger propagation of
//! pure states, monodromy (one-period propagator) computation, and Lindblad
//! propagation of density matrices under relaxation.

use nalgebra::{Matrix2, Vector2, Vector4};
use num_complex::Complex;

use crate::drive::DriveConfig;
use crate::error::{Error, Result};
use crate::ode::{self, C64, OdeOpts};
use crate::pulse::{drive_field, PulseEnvelope};

/// Pure state in the lab basis (`|0>` is the ground state).
pub type QuantumState = Vector2<C64>;

/// Density matrix in the lab basis.
pub type DensityMatrix = Matrix2<C64>;

/// Relative and absolute tolerance pair for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationTolerances {
    pub rel: f64,
    pub abs: f64,
}

/// Default tolerances for pure-state propagation.
pub const SCHRODINGER_TOL: IntegrationTolerances = IntegrationTolerances {
    rel: 1e-10,
    abs: 1e-12,
};

/// Default tolerances for density-matrix propagation.
pub const LINDBLAD_TOL: IntegrationTolerances = IntegrationTolerances {
    rel: 1e-9,
    abs: 1e-12,
};

/// Steps per drive period the integrator may not exceed, fixing the maximum
/// step to `period / 40` so the carrier oscillation stays resolved.
const STEPS_PER_PERIOD: f64 = 40.0;

/// A set of Lindblad jump operators with non-negative rates.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    channels: Vec<(Matrix2<C64>, f64)>,
}

impl NoiseModel {
    /// No dissipation; Lindblad propagation reduces to unitary evolution.
    pub fn none() -> Self {
        NoiseModel { channels: Vec::new() }
    }

    /// Amplitude damping toward `|0>` with relaxation time `t1`: jump
    /// operator `|0><1|` at rate `1 / t1`.
    pub fn relaxation(t1: f64) -> Result<Self> {
        if !(t1.is_finite() && t1 > 0.0) {
            return Err(Error::invalid(format!(
                "relaxation time must be positive and finite, got {t1}"
            )));
        }
        let mut sigma_minus = Matrix2::zeros();
        sigma_minus[(0, 1)] = Complex::from(1.0);
        NoiseModel::none().with_channel(sigma_minus, 1.0 / t1)
    }

    /// Add a jump operator with the given rate.
    pub fn with_channel(mut self, op: Matrix2<C64>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::invalid(format!(
                "channel rate must be non-negative and finite, got {rate}"
            )));
        }
        if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("jump operator has non-finite entries"));
        }
        self.channels.push((op, rate));
        Ok(self)
    }

    pub fn channels(&self) -> &[(Matrix2<C64>, f64)] {
        &self.channels
    }

    /// True when every channel has zero rate (or there are none).
    pub fn is_trivial(&self) -> bool {
        self.channels.iter().all(|(_, rate)| *rate == 0.0)
    }
}

/// Lab-frame Hamiltonian `-(delta/2) sigma_z + A(t) cos(omega t + phi)
/// sigma_x` with `sigma_z |0> = +|0>`.
pub fn hamiltonian(cfg: &DriveConfig, p: &PulseEnvelope, t: f64) -> Matrix2<C64> {
    let half_delta = 0.5 * cfg.delta();
    let drive = drive_field(cfg, p, t);
    Matrix2::new(
        Complex::from(-half_delta),
        Complex::from(drive),
        Complex::from(drive),
        Complex::from(half_delta),
    )
}

fn ode_opts(cfg: &DriveConfig, tol: Option<IntegrationTolerances>, default: IntegrationTolerances) -> Result<OdeOpts> {
    let tol = tol.unwrap_or(default);
    if !(tol.rel.is_finite() && tol.rel > 0.0 && tol.abs.is_finite() && tol.abs > 0.0) {
        return Err(Error::invalid(format!(
            "tolerances must be positive and finite, got rel {} abs {}",
            tol.rel, tol.abs
        )));
    }
    Ok(OdeOpts {
        rtol: tol.rel,
        atol: tol.abs,
        max_step: cfg.period() / STEPS_PER_PERIOD,
    })
}

fn check_state(psi: &QuantumState) -> Result<()> {
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("state has non-finite entries"));
    }
    Ok(())
}

/// Propagate a pure state under the Schroedinger equation from `t0` to
/// `t1 >= t0`. The state is never renormalized; norm drift is a direct
/// readout of integration error.
pub fn propagate_schrodinger(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    tol: Option<IntegrationTolerances>,
) -> Result<QuantumState> {
    let mut out = schrodinger_samples(cfg, p, psi0, t0, &[t1], tol)?;
    Ok(out.pop().expect("one sample requested"))
}

/// Propagate a pure state, sampling it at each time in `times`.
pub fn schrodinger_samples(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    psi0: &QuantumState,
    t0: f64,
    times: &[f64],
    tol: Option<IntegrationTolerances>,
) -> Result<Vec<QuantumState>> {
    check_state(psi0)?;
    if !t0.is_finite() || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("propagation times must be finite"));
    }
    let opts = ode_opts(cfg, tol, SCHRODINGER_TOL)?;
    let minus_i = Complex::new(0.0, -1.0);
    let f = |t: f64, y: &Vector2<C64>| -> Vector2<C64> { (hamiltonian(cfg, p, t) * y) * minus_i };
    ode::integrate_samples(&f, *psi0, t0, times, &opts)
}

/// One-period propagator `U(T, 0)` of the constant-amplitude drive
/// `A cos(omega t + phi)`. Errors if the result deviates from unitarity by
/// more than 1e-9 in Frobenius norm.
pub fn monodromy(
    cfg: &DriveConfig,
    a: f64,
    tol: Option<IntegrationTolerances>,
) -> Result<Matrix2<C64>> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be finite and non-negative, got {a}"
        )));
    }
    let t = cfg.period();
    let p = PulseEnvelope::new(a, 0.0, t, 0.0)?;
    let col0 = propagate_schrodinger(cfg, &p, &Vector2::new(Complex::from(1.0), Complex::from(0.0)), 0.0, t, tol)?;
    let col1 = propagate_schrodinger(cfg, &p, &Vector2::new(Complex::from(0.0), Complex::from(1.0)), 0.0, t, tol)?;
    let u = Matrix2::from_columns(&[col0, col1]);
    let defect = (u.adjoint() * u - Matrix2::identity()).norm();
    if defect > 1e-9 {
        return Err(Error::numeric(
            format!("monodromy unitarity defect {defect:.3e} exceeds 1e-9"),
            t,
        ));
    }
    Ok(u)
}

/// Quasienergies extracted from the monodromy eigenphases, folded into
/// `[-omega, 0)` and sorted ascending.
pub fn monodromy_quasienergies(
    cfg: &DriveConfig,
    a: f64,
    tol: Option<IntegrationTolerances>,
) -> Result<[f64; 2]> {
    let u = monodromy(cfg, a, tol)?;
    let period = cfg.period();
    // Eigenvalues of a 2x2 matrix from the trace and determinant.
    let tr = u[(0, 0)] + u[(1, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr * Complex::from(0.25) - det).sqrt();
    let l0 = tr * Complex::from(0.5) + disc;
    let l1 = tr * Complex::from(0.5) - disc;
    let mut eps = [0.0; 2];
    for (i, l) in [l0, l1].iter().enumerate() {
        if l.norm() < 0.5 {
            return Err(Error::numeric(
                "monodromy eigenvalue magnitude far from 1",
                period,
            ));
        }
        // lambda = exp(-i eps T)
        eps[i] = crate::floquet::fold_quasienergy(-l.arg() / period, cfg.omega());
    }
    if eps[0] > eps[1] {
        eps.swap(0, 1);
    }
    Ok(eps)
}

fn flatten(rho: &DensityMatrix) -> Vector4<C64> {
    Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)])
}

fn unflatten(v: &Vector4<C64>) -> DensityMatrix {
    Matrix2::new(v[0], v[1], v[2], v[3])
}

/// Propagate a density matrix under the Lindblad master equation from `t0`
/// to `t1 >= t0`. Errors if the trace drifts from its initial value by more
/// than 1e-6.
pub fn propagate_lindblad(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    noise: &NoiseModel,
    tol: Option<IntegrationTolerances>,
) -> Result<DensityMatrix> {
    if rho0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("density matrix has non-finite entries"));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("propagation times must be finite"));
    }
    let opts = ode_opts(cfg, tol, LINDBLAD_TOL)?;
    let minus_i = Complex::new(0.0, -1.0);
    // Precompute L, L^dagger, and L^dagger L per channel.
    let channels: Vec<(Matrix2<C64>, Matrix2<C64>, Matrix2<C64>, f64)> = noise
        .channels()
        .iter()
        .map(|(l, rate)| (*l, l.adjoint(), l.adjoint() * l, *rate))
        .collect();
    let f = |t: f64, y: &Vector4<C64>| -> Vector4<C64> {
        let rho = unflatten(y);
        let h = hamiltonian(cfg, p, t);
        let mut drho = (h * rho - rho * h) * minus_i;
        for (l, l_dag, l_dag_l, rate) in &channels {
            let half_rate = Complex::from(0.5 * rate);
            drho += (l * rho * l_dag * Complex::from(2.0) - l_dag_l * rho - rho * l_dag_l)
                * half_rate;
        }
        flatten(&drho)
    };
    let out = ode::integrate(&f, flatten(rho0), t0, t1, &opts)?;
    let rho = unflatten(&out);
    let trace0 = (rho0[(0, 0)] + rho0[(1, 1)]).re;
    let trace = (rho[(0, 0)] + rho[(1, 1)]).re;
    if (trace - trace0).abs() > 1e-6 {
        return Err(Error::numeric(
            format!("trace drifted by {:.3e} during Lindblad propagation", trace - trace0),
            t1,
        ));
    }
    Ok(rho)
}

/// Rotating-frame propagator of the full pulse:
/// `V(t_total) U(t_total, 0)` with `V(t) = exp(-i omega t sigma_z / 2)`.
/// Errors if the result deviates from unitarity by more than 1e-9.
pub fn pulse_propagator(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    tol: Option<IntegrationTolerances>,
) -> Result<Matrix2<C64>> {
    let t_tot = p.total_duration();
    let col0 = propagate_schrodinger(
        cfg,
        p,
        &Vector2::new(Complex::from(1.0), Complex::from(0.0)),
        0.0,
        t_tot,
        tol,
    )?;
    let col1 = propagate_schrodinger(
        cfg,
        p,
        &Vector2::new(Complex::from(0.0), Complex::from(1.0)),
        0.0,
        t_tot,
        tol,
    )?;
    let u = Matrix2::from_columns(&[
        rotating_frame_state(&col0, cfg, t_tot),
        rotating_frame_state(&col1, cfg, t_tot),
    ]);
    let defect = (u.adjoint() * u - Matrix2::identity()).norm();
    if defect > 1e-9 {
        return Err(Error::numeric(
            format!("pulse propagator unitarity defect {defect:.3e} exceeds 1e-9"),
            t_tot,
        ));
    }
    Ok(u)
}

/// Apply the rotating-frame transformation `V(t) = exp(-i omega t sigma_z / 2)`
/// to a pure state.
pub fn rotating_frame_state(psi: &QuantumState, cfg: &DriveConfig, t: f64) -> QuantumState {
    let half = 0.5 * cfg.omega() * t;
    Vector2::new(
        psi[0] * Complex::new(0.0, -half).exp(),
        psi[1] * Complex::new(0.0, half).exp(),
    )
}

/// Apply the rotating-frame transformation to a density matrix:
/// `V rho V^dagger`.
pub fn rotating_frame_density(rho: &DensityMatrix, cfg: &DriveConfig, t: f64) -> DensityMatrix {
    let half = 0.5 * cfg.omega() * t;
    let v = Matrix2::from_diagonal(&Vector2::new(
        Complex::new(0.0, -half).exp(),
        Complex::new(0.0, half).exp(),
    ));
    v * rho * v.adjoint()
}
