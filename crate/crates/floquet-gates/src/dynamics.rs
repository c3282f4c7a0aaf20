//! Dynamics in the Floquet frame: decomposition of propagated states onto
//! instantaneous Floquet modes, dynamical phases, amplitude-derivative
//! couplings between branches, and nonadiabatic transition amplitudes for
//! pulse edges, both perturbative (first order in the sweep rate) and exact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use once_cell::sync::Lazy;

use crate::drive::DriveConfig;
use crate::error::{Error, Result};
use crate::floquet::{
    build_floquet_matrix, diagonalize_floquet, floquet_modes_analytic, track_branches,
    FloquetBasis, FloquetSolution,
};
use crate::ode::C64;
use crate::par;
use crate::propagate::{propagate_schrodinger, IntegrationTolerances, QuantumState};
use crate::pulse::{envelope, envelope_derivative, PulseEnvelope};

/// Which edge of a pulse a transition amplitude refers to. Each edge is
/// analyzed in isolation: time runs from 0 over the edge duration, and the
/// drive phase in the supplied config is the phase at the edge start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseEdge {
    Rise,
    Fall,
}

/// Amplitudes of a state in the instantaneous Floquet basis.
///
/// The state is `sum_j c_tilde[j] exp(-i phase_integrals[j]) u_j(A(t), t)`,
/// where branch 0 is the mode that connects to
/// `(|0> + exp(-i phi) |1>)/sqrt(2)` at zero amplitude (the branch gate
/// dynamics starts in) and branch 1 is its orthogonal partner.
#[derive(Debug, Clone)]
pub struct FloquetAmplitudes {
    pub c_tilde: [C64; 2],
    /// Accumulated quasienergy integrals `int_0^t eps_j dt'` supplied by the
    /// caller or the producing routine.
    pub phase_integrals: [f64; 2],
    /// Time the decomposition was taken at.
    pub t: f64,
}

/// First-order transition amplitude for one pulse edge, with a convergence
/// flag for the Fourier window (the window is doubled internally and the
/// flag records whether the result moved by less than 1e-6).
#[derive(Debug, Clone, Copy)]
pub struct TransitionAmplitude {
    pub value: C64,
    pub converged: bool,
}

/// Couplings `D_mu^{(kj)} = sum_q <u_{k,q+mu} | d/dA u_{j,q}>` between
/// Floquet branches at one amplitude, from a central difference.
#[derive(Debug, Clone)]
pub struct DerivativeCoupling {
    couplings: [[Vec<C64>; 2]; 2],
    half_window: i32,
    /// Set when the folded quasienergy gap is within 1e-3 omega of a
    /// degeneracy, where the central difference loses accuracy.
    pub ill_conditioned: bool,
}

impl DerivativeCoupling {
    /// `D_mu^{(kj)}`; zero outside the computed window `|mu| <= 2N`.
    pub fn coupling(&self, k: usize, j: usize, mu: i32) -> C64 {
        let idx = mu + self.half_window;
        if idx < 0 || idx as usize >= self.couplings[k][j].len() {
            Complex::from(0.0)
        } else {
            self.couplings[k][j][idx as usize]
        }
    }

    pub fn half_window(&self) -> i32 {
        self.half_window
    }
}

/// Fourier window half-width used for internally tracked solutions.
const TABLE_TRUNCATION: usize = 30;

/// Target amplitude-grid spacing in units of omega.
const TABLE_SPACING: f64 = 1.25e-3;

/// Bounds on the number of grid segments.
const TABLE_MIN_SEGMENTS: usize = 200;
const TABLE_MAX_SEGMENTS: usize = 2400;

/// Branch-tracked Floquet solutions on a uniform amplitude grid, shared by
/// the dynamics routines. Branch slot 0 is the mode connected to
/// `(|0> + exp(-i phi)|1>)/sqrt(2)` at zero amplitude; quasienergies are
/// continuous (unfolded) along the grid. Built at drive phase zero; phase
/// enters analytically when modes are evaluated.
struct AmplitudeTable {
    omega: f64,
    a_hi: f64,
    h: f64,
    entries: Vec<FloquetSolution>,
    /// Midpoint couplings `D_mu^{(10)}` (into the partner branch) for
    /// segment i, indexed by `mu + 2 * TABLE_TRUNCATION`.
    mid_d10: Vec<Vec<C64>>,
    /// Cumulative trapezoid of the gap over the grid:
    /// `cum_gap[i] ~ int_0^{i h} (eps_0 - eps_1) da`.
    cum_gap: Vec<f64>,
}

static TABLES: Lazy<Mutex<HashMap<(u64, u64), Arc<AmplitudeTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Analytic modes in the zero-amplitude limit. Evaluating at a denormal-size
/// amplitude selects the correct limiting basis even at exact resonance,
/// where the two branches are degenerate at `A = 0` and the formula at
/// exactly zero picks an arbitrary basis of the degenerate subspace.
fn analytic_limit(cfg: &DriveConfig, a: f64, n: usize) -> Result<FloquetSolution> {
    floquet_modes_analytic(cfg, a.max(1e-280), n)
}

/// Swap branch slots of a solution (the analytic formulas put the lower
/// unfolded quasienergy first; the dynamics convention puts the branch the
/// gate starts in first).
fn swap_branches(mut sol: FloquetSolution) -> FloquetSolution {
    sol.quasienergies.swap(0, 1);
    sol.fourier_coeffs.swap(0, 1);
    sol.gauge_anchor.swap(0, 1);
    sol
}

fn build_table(cfg_zero_phase: &DriveConfig, a_hi: f64) -> Result<AmplitudeTable> {
    let omega = cfg_zero_phase.omega();
    let n_seg = ((a_hi / (TABLE_SPACING * omega)).ceil() as usize)
        .clamp(TABLE_MIN_SEGMENTS, TABLE_MAX_SEGMENTS);
    let h = a_hi / n_seg as f64;
    let n = TABLE_TRUNCATION;

    // Branch 0 of the table is the gate's initial branch (upper unfolded
    // quasienergy at small amplitude), which is branch 1 of the formulas.
    let seed = swap_branches(analytic_limit(cfg_zero_phase, 0.0, n)?);

    let fresh: Vec<Result<FloquetSolution>> = par::map_indexed(n_seg, |i| {
        let a = (i + 1) as f64 * h;
        let fm = build_floquet_matrix(cfg_zero_phase, a, n, FloquetBasis::Rotated)?;
        diagonalize_floquet(&fm)
    });

    let mut entries = Vec::with_capacity(n_seg + 1);
    entries.push(seed);
    for sol in fresh {
        let tracked = track_branches(entries.last().expect("seeded"), &sol?)?;
        entries.push(tracked);
    }

    let window = 2 * n as i32;
    let mid_d10: Vec<Vec<C64>> = (0..n_seg)
        .map(|i| {
            let lo = &entries[i];
            let hi = &entries[i + 1];
            (-window..=window)
                .map(|mu| {
                    let mut acc = Complex::from(0.0);
                    for q in -(n as i32)..=(n as i32) {
                        let bra = (lo.coeff(1, q + mu) + hi.coeff(1, q + mu)) * Complex::from(0.5);
                        let ket = (hi.coeff(0, q) - lo.coeff(0, q)) * Complex::from(1.0 / h);
                        acc += bra.dotc(&ket);
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let mut cum_gap = Vec::with_capacity(entries.len());
    let mut acc = 0.0;
    cum_gap.push(0.0);
    for w in entries.windows(2) {
        let g0 = w[0].quasienergies[0] - w[0].quasienergies[1];
        let g1 = w[1].quasienergies[0] - w[1].quasienergies[1];
        acc += 0.5 * (g0 + g1) * h;
        cum_gap.push(acc);
    }

    Ok(AmplitudeTable {
        omega,
        a_hi,
        h,
        entries,
        mid_d10,
        cum_gap,
    })
}

/// Fetch (building or extending if necessary) the shared table for this
/// drive configuration, covering amplitudes up to `a_needed`.
fn table_for(cfg: &DriveConfig, a_needed: f64) -> Result<Arc<AmplitudeTable>> {
    if !(a_needed.is_finite() && a_needed >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be finite and non-negative, got {a_needed}"
        )));
    }
    let key = (cfg.delta().to_bits(), cfg.omega().to_bits());
    let mut map = TABLES.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = map.get(&key) {
        if t.a_hi >= a_needed {
            return Ok(Arc::clone(t));
        }
    }
    let floor = 0.3 * cfg.omega();
    let a_hi = (1.25 * a_needed).max(floor);
    let cfg_zero = cfg.with_phase(0.0)?;
    let table = Arc::new(build_table(&cfg_zero, a_hi)?);
    map.insert(key, Arc::clone(&table));
    Ok(table)
}

impl AmplitudeTable {
    /// Catmull-Rom interpolation of a per-entry scalar at amplitude `a`,
    /// clamping stencil indices at the grid ends.
    fn interp(&self, f: impl Fn(&FloquetSolution) -> f64, a: f64) -> f64 {
        let m = self.entries.len() - 1;
        let x = (a / self.h).clamp(0.0, m as f64);
        let i = (x.floor() as usize).min(m - 1);
        let t = x - i as f64;
        let at = |j: i64| -> f64 {
            let idx = j.clamp(0, m as i64) as usize;
            f(&self.entries[idx])
        };
        let (f0, f1, f2, f3) = (at(i as i64 - 1), at(i as i64), at(i as i64 + 1), at(i as i64 + 2));
        0.5 * (2.0 * f1
            + (f2 - f0) * t
            + (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) * t * t
            + (3.0 * f1 - f0 - 3.0 * f2 + f3) * t * t * t)
    }

    /// Unfolded quasienergy of branch `j` at amplitude `a`.
    fn quasienergy(&self, j: usize, a: f64) -> f64 {
        self.interp(|s| s.quasienergies[j], a)
    }

    /// Unfolded gap `eps_0 - eps_1` (non-negative for this labeling).
    fn gap(&self, a: f64) -> f64 {
        self.interp(|s| s.quasienergies[0] - s.quasienergies[1], a)
    }

    /// Antiderivative of the gap, `int_0^a (eps_0 - eps_1) da'`, from the
    /// cumulative grid plus a trapezoid over the partial segment.
    fn gap_integral(&self, a: f64) -> f64 {
        let m = self.entries.len() - 1;
        let x = (a / self.h).clamp(0.0, m as f64);
        let i = (x.floor() as usize).min(m - 1);
        let t = x - i as f64;
        let g_i = self.entries[i].quasienergies[0] - self.entries[i].quasienergies[1];
        let g_a = self.gap((i as f64 + t) * self.h);
        self.cum_gap[i] + 0.5 * (g_i + g_a) * t * self.h
    }

    /// Linear interpolation of the midpoint coupling `D_mu^{(10)}` at `a`.
    fn d10(&self, mu: i32, a: f64) -> C64 {
        let idx = mu + 2 * TABLE_TRUNCATION as i32;
        if idx < 0 || idx as usize >= self.mid_d10[0].len() {
            return Complex::from(0.0);
        }
        let idx = idx as usize;
        let n_seg = self.mid_d10.len();
        // Midpoint i sits at a = (i + 0.5) h.
        let u = (a / self.h - 0.5).clamp(0.0, (n_seg - 1) as f64);
        let i = (u.floor() as usize).min(n_seg.saturating_sub(2));
        let t = (u - i as f64).clamp(0.0, 1.0);
        self.mid_d10[i][idx] * Complex::from(1.0 - t) + self.mid_d10[i + 1][idx] * Complex::from(t)
    }

    /// Tracked solution at an arbitrary amplitude: a fresh diagonalization
    /// aligned (labels, copy shift, phase) to the nearest grid entry.
    fn solution_at(&self, cfg: &DriveConfig, a: f64) -> Result<FloquetSolution> {
        let idx = ((a / self.h).round() as usize).min(self.entries.len() - 1);
        let anchor = &self.entries[idx];
        if (a - anchor.amplitude).abs() <= 1e-12 * self.omega {
            return Ok(anchor.clone());
        }
        let cfg_zero = cfg.with_phase(0.0)?;
        let fm = build_floquet_matrix(&cfg_zero, a, TABLE_TRUNCATION, FloquetBasis::Rotated)?;
        let fresh = diagonalize_floquet(&fm)?;
        track_branches(anchor, &fresh)
    }
}

/// Return a copy of a solution evaluated at a different drive phase. The
/// Fourier coefficients of the modes are phase-independent; the phase enters
/// only through the `exp(i n (omega t + phi))` factors in `mode_at`.
fn with_phase(sol: &FloquetSolution, phi: f64) -> FloquetSolution {
    let mut out = sol.clone();
    out.phi = phi;
    out
}

/// Decompose a state onto the instantaneous Floquet modes of `sol` at time
/// `t`: `c_tilde[j] = exp(+i phase_integrals[j]) <u_j(t) | psi>`. The
/// solution's branches must be normalized.
pub fn decompose_state(
    state: &QuantumState,
    sol: &FloquetSolution,
    t: f64,
    phase_integrals: [f64; 2],
) -> Result<FloquetAmplitudes> {
    if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("state has non-finite entries"));
    }
    for j in 0..2 {
        let w = sol.fourier_weight(j);
        if (w - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "branch {j} of the Floquet solution is not normalized (weight {w:.9})"
            )));
        }
    }
    let mut c_tilde = [Complex::from(0.0); 2];
    for j in 0..2 {
        let u = sol.mode_at(j, t);
        let phase = Complex::new(0.0, phase_integrals[j]).exp();
        c_tilde[j] = phase * u.dotc(state);
    }
    Ok(FloquetAmplitudes {
        c_tilde,
        phase_integrals,
        t,
    })
}

/// Adaptive Simpson quadrature with interval splitting at the given
/// breakpoints.
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rtol: f64,
) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }

    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));

    // Scale estimate for the absolute tolerance split across subintervals.
    let rough: f64 = cuts
        .windows(2)
        .map(|w| 0.5 * (f(w[0]).abs() + f(w[1]).abs()) * (w[1] - w[0]))
        .sum();
    let tol_total = rtol * rough.max(1e-300);

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let flo = f(lo);
        let fhi = f(hi);
        let m = 0.5 * (lo + hi);
        let fm = f(m);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        let tol = tol_total * (hi - lo) / (b - a);
        total += recurse(f, lo, flo, hi, fhi, fm, whole, tol, 40);
    }
    total
}

/// Accumulated quasienergy gap `int_0^t (eps_0 - eps_1) dt'` along the
/// pulse, using exact (numerically tracked) quasienergies. For a full pulse
/// this is the rotation angle the gate accumulates.
pub fn dynamical_phase(cfg: &DriveConfig, p: &PulseEnvelope, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let table = table_for(cfg, p.a_max())?;
    let f = |tau: f64| table.gap(envelope(p, tau));
    let breaks = [
        p.t_rise(),
        p.t_rise() + p.t_plateau(),
        p.total_duration(),
    ];
    Ok(adaptive_simpson(&f, 0.0, t, &breaks, 1e-9))
}

/// Quasienergy gap `eps_0 - eps_1` at constant amplitude `a`, from the
/// shared tracked table.
pub(crate) fn quasienergy_gap(cfg: &DriveConfig, a: f64) -> Result<f64> {
    let table = table_for(cfg, a)?;
    Ok(table.gap(a))
}

/// Antiderivative of the gap over amplitude, `int_0^a (eps_0 - eps_1) da'`.
/// For a linear ramp from zero to `a` in time `t`, the accumulated angle is
/// `t / a` times this value.
pub(crate) fn quasienergy_gap_integral(cfg: &DriveConfig, a: f64) -> Result<f64> {
    let table = table_for(cfg, a)?;
    Ok(table.gap_integral(a))
}

/// Accumulated quasienergy integral of one branch along the pulse.
fn quasienergy_integral(
    table: &AmplitudeTable,
    p: &PulseEnvelope,
    j: usize,
    t: f64,
) -> f64 {
    let f = |tau: f64| table.quasienergy(j, envelope(p, tau));
    let breaks = [
        p.t_rise(),
        p.t_rise() + p.t_plateau(),
        p.total_duration(),
    ];
    adaptive_simpson(&f, 0.0, t, &breaks, 1e-9)
}

/// Branch-to-branch amplitude-derivative couplings at amplitude `a` from a
/// symmetric difference with step `da` (pass 0 to use the default
/// `1e-4 omega`). Branch labels follow the folded quasienergy ordering at
/// `a`. The window covers `|mu| <= 2 n`.
pub fn derivative_coupling(
    cfg: &DriveConfig,
    a: f64,
    da: f64,
    n: usize,
) -> Result<DerivativeCoupling> {
    let da = if da == 0.0 { 1e-4 * cfg.omega() } else { da };
    if !(da.is_finite() && da > 0.0) {
        return Err(Error::invalid(format!(
            "difference step must be positive and finite, got {da}"
        )));
    }
    if !(a.is_finite() && a - 0.5 * da >= 0.0) {
        return Err(Error::invalid(
            "amplitude minus half the difference step must be non-negative",
        ));
    }
    let cfg_zero = cfg.with_phase(0.0)?;
    let solve = |amp: f64| -> Result<FloquetSolution> {
        let fm = build_floquet_matrix(&cfg_zero, amp, n, FloquetBasis::Rotated)?;
        diagonalize_floquet(&fm)
    };
    let mid = solve(a)?;
    let lo = track_branches(&mid, &solve(a - 0.5 * da)?)?;
    let hi = track_branches(&mid, &solve(a + 0.5 * da)?)?;

    let side = n as i32;
    let window = 2 * side;
    let build = |k: usize, j: usize| -> Vec<C64> {
        (-window..=window)
            .map(|mu| {
                let mut acc = Complex::from(0.0);
                for q in -side..=side {
                    let dk = (hi.coeff(j, q) - lo.coeff(j, q)) * Complex::from(1.0 / da);
                    acc += mid.coeff(k, q + mu).dotc(&dk);
                }
                acc
            })
            .collect()
    };
    let couplings = [[build(0, 0), build(0, 1)], [build(1, 0), build(1, 1)]];
    let gap = mid.quasienergies[1] - mid.quasienergies[0];
    let omega = cfg.omega();
    let ill_conditioned = gap < 1e-3 * omega || (omega - gap) < 1e-3 * omega;
    Ok(DerivativeCoupling {
        couplings,
        half_window: window,
        ill_conditioned,
    })
}

/// Envelope restricted to one edge, in edge-local time starting at 0.
fn edge_envelope(p: &PulseEnvelope, edge: PulseEdge) -> Result<(PulseEnvelope, f64)> {
    match edge {
        PulseEdge::Rise => Ok((PulseEnvelope::rise_only(p.a_max(), p.t_rise())?, p.t_rise())),
        PulseEdge::Fall => Ok((PulseEnvelope::fall_only(p.a_max(), p.t_fall())?, p.t_fall())),
    }
}

/// First-order transition amplitude `N_{0 -> 1}` accumulated over one pulse
/// edge, treated in isolation: edge-local time starts at 0 and `cfg`'s drive
/// phase is the phase at the edge start.
///
/// The integrand sums Fourier copies over `|m| <= n_window` (default 20 when
/// 0 is passed); the window is doubled internally and `converged` records
/// whether the amplitude moved by less than 1e-6.
pub fn apt_transition_amplitude(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    edge: PulseEdge,
    n_window: usize,
) -> Result<TransitionAmplitude> {
    let n_window = if n_window == 0 { 20 } else { n_window };
    if 2 * n_window > 2 * TABLE_TRUNCATION {
        return Err(Error::invalid(format!(
            "Fourier window {n_window} exceeds half the tabulated coupling range {TABLE_TRUNCATION}"
        )));
    }
    let (env, t_e) = edge_envelope(p, edge)?;
    if t_e <= 0.0 {
        return Err(Error::invalid(
            "edge duration must be positive for the adiabatic expansion",
        ));
    }
    let table = table_for(cfg, p.a_max())?;
    let omega = cfg.omega();
    let phi = cfg.phi();

    let steps = 2000usize.max((50.0 * omega * t_e / std::f64::consts::TAU).ceil() as usize);
    let dt = t_e / steps as f64;

    // Integrand at fixed tau for a given window, reusing the accumulated
    // dynamical phase.
    let term = |tau: f64, dyn_phase: f64, window: usize| -> C64 {
        let a = envelope(&env, tau);
        let a_dot = envelope_derivative(&env, tau);
        if a_dot == 0.0 {
            return Complex::from(0.0);
        }
        let base = Complex::new(0.0, -(omega * tau + phi)).exp();
        let mut pos = Complex::from(1.0);
        let mut neg = Complex::from(1.0);
        let mut sum = table.d10(0, a);
        for m in 1..=window as i32 {
            pos *= base;
            neg *= base.conj();
            sum += pos * table.d10(m, a) + neg * table.d10(-m, a);
        }
        sum * Complex::new(0.0, -dyn_phase).exp() * Complex::from(a_dot)
    };

    let mut value_w = Complex::from(0.0);
    let mut value_2w = Complex::from(0.0);
    let mut dyn_phase = 0.0;
    let mut gap_prev = table.gap(envelope(&env, 0.0));
    let mut term_w_prev = term(0.0, 0.0, n_window);
    let mut term_2w_prev = term(0.0, 0.0, 2 * n_window);
    for i in 1..=steps {
        let tau = i as f64 * dt;
        let gap = table.gap(envelope(&env, tau));
        dyn_phase += 0.5 * (gap_prev + gap) * dt;
        gap_prev = gap;
        let tw = term(tau, dyn_phase, n_window);
        let t2w = term(tau, dyn_phase, 2 * n_window);
        value_w += (term_w_prev + tw) * Complex::from(0.5 * dt);
        value_2w += (term_2w_prev + t2w) * Complex::from(0.5 * dt);
        term_w_prev = tw;
        term_2w_prev = t2w;
    }
    let value = -value_2w;
    let converged = (value_2w - value_w).norm() <= 1e-6;
    Ok(TransitionAmplitude { value, converged })
}

/// Exact transition amplitudes for one pulse edge, from full Schroedinger
/// propagation and decomposition onto the tracked Floquet modes at the edge
/// end. The edge is treated in isolation (see [`apt_transition_amplitude`]);
/// the rise starts in branch 0 at zero amplitude, the fall starts in branch
/// 0 at the plateau amplitude. `c_tilde[1]` is the nonadiabatic transition
/// amplitude.
pub fn exact_transition_amplitude(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    edge: PulseEdge,
    tol: Option<IntegrationTolerances>,
) -> Result<FloquetAmplitudes> {
    let (env, t_e) = edge_envelope(p, edge)?;
    let table = table_for(cfg, p.a_max())?;
    let phi = cfg.phi();

    let zero_amp = with_phase(&swap_branches(analytic_limit(
        &cfg.with_phase(0.0)?,
        0.0,
        TABLE_TRUNCATION,
    )?), phi);
    let plateau = with_phase(&table.solution_at(cfg, p.a_max())?, phi);

    let (start, end) = match edge {
        PulseEdge::Rise => (&zero_amp, &plateau),
        PulseEdge::Fall => (&plateau, &zero_amp),
    };
    let psi0 = start.mode_at(0, 0.0);
    let psi = propagate_schrodinger(cfg, &env, &psi0, 0.0, t_e, tol)?;
    let phase_integrals = [
        quasienergy_integral(&table, &env, 0, t_e),
        quasienergy_integral(&table, &env, 1, t_e),
    ];
    decompose_state(&psi, end, t_e, phase_integrals)
}

/// Final state of a pulse in the transitionless (adiabatic) limit: each
/// zero-amplitude mode component of `state0` returns at the end of the pulse
/// carrying its accumulated quasienergy phase, with no inter-branch mixing.
/// Relative to the initial state this is a rotation by the dynamical phase
/// about the equatorial axis at azimuth `-phi`.
pub fn adiabatic_final_state(
    cfg: &DriveConfig,
    p: &PulseEnvelope,
    state0: &QuantumState,
) -> Result<QuantumState> {
    let table = table_for(cfg, p.a_max())?;
    let t_tot = p.total_duration();
    let zero_amp = with_phase(
        &swap_branches(analytic_limit(&cfg.with_phase(0.0)?, 0.0, TABLE_TRUNCATION)?),
        cfg.phi(),
    );
    let mut out = QuantumState::zeros();
    for j in 0..2 {
        let c = zero_amp.mode_at(j, 0.0).dotc(state0);
        let phase = quasienergy_integral(&table, p, j, t_tot);
        out += zero_amp.mode_at(j, t_tot) * (c * Complex::new(0.0, -phase).exp());
    }
    Ok(out)
}
