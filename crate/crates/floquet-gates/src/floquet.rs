//! Floquet eigenproblem for the driven qubit: matrix construction,
//! diagonalization with branch selection and gauge fixing, branch tracking
//! across amplitude sweeps, and the closed-form quasienergies and modes.

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex;

use crate::bessel::jn_signed;
use crate::drive::DriveConfig;
use crate::error::{Error, Result};
use crate::ode::C64;

/// Basis in which the Floquet Hamiltonian is written.
///
/// `Rotated` is the frame obtained from the lab Hamiltonian by a pi/2
/// rotation about y, where the static term is `-(delta/2) sigma_x` and the
/// drive couples like `-A cos(omega t) sigma_z`. `PlusMinus` uses the
/// eigenbasis of `sigma_x` in that rotated frame, which makes the static
/// term diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloquetBasis {
    Rotated,
    PlusMinus,
}

/// The truncated Floquet Hamiltonian together with the metadata needed to
/// interpret its eigenvectors.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    matrix: DMatrix<C64>,
    cfg: DriveConfig,
    amplitude: f64,
    truncation: usize,
    basis: FloquetBasis,
}

impl FloquetMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn config(&self) -> &DriveConfig {
        &self.cfg
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn basis(&self) -> FloquetBasis {
        self.basis
    }
}

/// Phase convention applied to a Floquet mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeAnchor {
    /// The largest-magnitude Fourier component (at the recorded index and
    /// spinor component) was made real positive.
    LargestComponent { n: i32, component: usize },
    /// The phase was chosen to parallel-transport against a neighboring
    /// solution in an amplitude sweep.
    ParallelTransport,
}

/// Quasienergies and lab-basis Fourier coefficients of the two Floquet
/// modes at one drive amplitude.
///
/// Freshly diagonalized solutions have quasienergies folded into
/// `[-omega, 0)` with `quasienergies[0] <= quasienergies[1]`, and the
/// stored `(quasienergy, coefficients)` pairs are copy-consistent: the
/// state `exp(-i eps_j t) sum_n exp(i n (omega t + phi)) u_{j,n}` solves
/// the Schroedinger equation exactly. Solutions relabeled by
/// [`track_branches`] keep quasienergies continuous across fold boundaries
/// and branch crossings instead, so their ordering and zone may differ.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    /// Drive amplitude `A` this solution was computed at.
    pub amplitude: f64,
    /// Quasienergy per branch.
    pub quasienergies: [f64; 2],
    /// Lab-basis Fourier coefficients `u_{j,n}`; index `n + truncation`.
    pub fourier_coeffs: [Vec<Vector2<C64>>; 2],
    /// Fourier window half-width `N`; coefficients run over `[-N, N]`.
    pub truncation: usize,
    /// Phase convention applied per branch.
    pub gauge_anchor: [GaugeAnchor; 2],
    /// Drive angular frequency.
    pub omega: f64,
    /// Drive phase used when evaluating modes at a time.
    pub phi: f64,
    /// Set when the folded quasienergy pair is degenerate (gap within
    /// 1e-6 omega of 0 or omega); branch labels are then arbitrary and
    /// callers should rely on branch tracking.
    pub degenerate: bool,
}

impl FloquetSolution {
    /// Fourier coefficient `u_{j,n}`; zero outside the window.
    pub fn coeff(&self, j: usize, n: i32) -> Vector2<C64> {
        let idx = n + self.truncation as i32;
        if idx < 0 || idx as usize >= self.fourier_coeffs[j].len() {
            Vector2::zeros()
        } else {
            self.fourier_coeffs[j][idx as usize]
        }
    }

    /// Instantaneous mode `u_j(t) = sum_n exp(i n (omega t + phi)) u_{j,n}`.
    pub fn mode_at(&self, j: usize, t: f64) -> Vector2<C64> {
        let phase = self.omega * t + self.phi;
        let step = Complex::new(0.0, phase).exp();
        let n_max = self.truncation as i32;
        // Horner-style accumulation over n from high to low
        let mut acc = Vector2::zeros();
        for n in (-n_max..=n_max).rev() {
            acc = acc * step + self.coeff(j, n);
        }
        acc * Complex::new(0.0, -(n_max as f64) * phase).exp()
    }

    /// Total Fourier weight of branch `j` (1 for a normalized mode).
    pub fn fourier_weight(&self, j: usize) -> f64 {
        self.fourier_coeffs[j].iter().map(|v| v.norm_squared()).sum()
    }

    /// Time-averaged inner product of branch `j` of `self` with branch `k`
    /// of `other`: `sum_n <u_{j,n}|v_{k,n}>`.
    pub fn time_averaged_overlap(&self, j: usize, other: &FloquetSolution, k: usize) -> C64 {
        let w = self.truncation.min(other.truncation) as i32;
        let mut acc = Complex::from(0.0);
        for n in -w..=w {
            acc += self.coeff(j, n).dotc(&other.coeff(k, n));
        }
        acc
    }
}

/// Fold a quasienergy into the zone `[-omega, 0)`.
pub fn fold_quasienergy(eps: f64, omega: f64) -> f64 {
    let r = eps.rem_euclid(omega);
    // rem_euclid can return omega itself when eps is a tiny negative
    // multiple of omega due to rounding
    if r >= omega {
        r - 2.0 * omega
    } else {
        r - omega
    }
}

/// Build the truncated Floquet Hamiltonian with Fourier window `[-N, N]`.
/// The matrix is real symmetric in both bases; it is returned as a complex
/// Hermitian matrix of dimension `2 (2N + 1)`.
pub fn build_floquet_matrix(
    cfg: &DriveConfig,
    a: f64,
    n: usize,
    basis: FloquetBasis,
) -> Result<FloquetMatrix> {
    if n < 1 {
        return Err(Error::invalid(format!("truncation must be >= 1, got {n}")));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be finite and non-negative, got {a}"
        )));
    }
    let side = n as i32;
    let dim = 2 * (2 * n + 1);
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let delta = cfg.delta();
    let omega = cfg.omega();
    let half_a = Complex::from(-0.5 * a);
    for block in -side..=side {
        let b = (2 * (block + side)) as usize;
        match basis {
            FloquetBasis::Rotated => {
                let diag = Complex::from(block as f64 * omega);
                m[(b, b)] = diag;
                m[(b + 1, b + 1)] = diag;
                m[(b, b + 1)] = Complex::from(-0.5 * delta);
                m[(b + 1, b)] = Complex::from(-0.5 * delta);
                if block < side {
                    let bn = b + 2;
                    m[(b, bn)] = half_a;
                    m[(bn, b)] = half_a;
                    m[(b + 1, bn + 1)] = -half_a;
                    m[(bn + 1, b + 1)] = -half_a;
                }
            }
            FloquetBasis::PlusMinus => {
                m[(b, b)] = Complex::from(block as f64 * omega - 0.5 * delta);
                m[(b + 1, b + 1)] = Complex::from(block as f64 * omega + 0.5 * delta);
                if block < side {
                    let bn = b + 2;
                    m[(b, bn + 1)] = half_a;
                    m[(bn + 1, b)] = half_a;
                    m[(b + 1, bn)] = half_a;
                    m[(bn, b + 1)] = half_a;
                }
            }
        }
    }
    Ok(FloquetMatrix {
        matrix: m,
        cfg: *cfg,
        amplitude: a,
        truncation: n,
        basis,
    })
}

/// Degeneracy threshold on the folded gap, in units of omega.
const DEGENERACY_TOL: f64 = 1e-6;

/// Maximum eigenpair residual accepted from the dense solver, in units of
/// omega.
const RESIDUAL_TOL: f64 = 1e-10;

struct EigenPair {
    value: f64,
    // coefficients in the matrix's own basis, index n + N
    coeffs: Vec<Vector2<C64>>,
}

/// Diagonalize a Floquet matrix and extract the two inequivalent branches.
///
/// Quasienergies are folded into `[-omega, 0)` and sorted ascending. The
/// Fourier coefficients are rotated to the lab basis of the original
/// Hamiltonian and gauge-fixed by making each branch's largest-magnitude
/// component real positive.
pub fn diagonalize_floquet(fm: &FloquetMatrix) -> Result<FloquetSolution> {
    let n = fm.truncation;
    let side = n as i32;
    let dim = 2 * (2 * n + 1);
    let omega = fm.cfg.omega();

    // Both supported bases yield a real symmetric matrix; diagonalize the
    // real part after confirming the imaginary part vanishes.
    let all_real = fm.matrix.iter().all(|z| z.im == 0.0);
    if !all_real {
        return Err(Error::numeric(
            "Floquet matrix has unexpected imaginary entries",
            fm.amplitude,
        ));
    }
    let real = fm.matrix.map(|z| z.re);
    let eig = nalgebra::linalg::SymmetricEigen::new(real);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("finite eigenvalues")
    });

    // Residual check on the raw eigenpairs we are about to use.
    let residual_ok = |idx: usize| -> bool {
        let v: DVector<f64> = eig.eigenvectors.column(idx).into();
        let r = fm.matrix.map(|z| z.re) * &v - &v * eig.eigenvalues[idx];
        r.norm() <= RESIDUAL_TOL * omega * dim as f64
    };

    let vec_coeffs = |idx: usize| -> Vec<Vector2<C64>> {
        (0..(2 * n + 1))
            .map(|b| {
                Vector2::new(
                    Complex::from(eig.eigenvectors[(2 * b, idx)]),
                    Complex::from(eig.eigenvectors[(2 * b + 1, idx)]),
                )
            })
            .collect()
    };

    // Per-candidate block weights and centrality score.
    let block_weight = |coeffs: &[Vector2<C64>]| -> Vec<f64> {
        coeffs.iter().map(|v| v.norm_squared()).collect()
    };
    let centrality = |w: &[f64]| -> f64 {
        w.iter()
            .enumerate()
            .map(|(i, wi)| {
                let b = (i as i32 - side) as f64;
                b * b * wi
            })
            .sum()
    };

    // Overlap of `a` with `b` shifted by `s` blocks.
    let shifted_overlap = |a: &[Vector2<C64>], b: &[Vector2<C64>], s: i32| -> f64 {
        let mut acc = Complex::from(0.0);
        for (i, ai) in a.iter().enumerate() {
            let j = i as i32 + s;
            if j >= 0 && (j as usize) < b.len() {
                acc += ai.dotc(&b[j as usize]);
            }
        }
        acc.norm()
    };

    let mut ranked: Vec<(f64, usize)> = order
        .iter()
        .map(|&idx| (centrality(&block_weight(&vec_coeffs(idx))), idx))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite score"));

    let mut chosen: Vec<EigenPair> = Vec::with_capacity(2);
    for &(_, idx) in &ranked {
        let coeffs = vec_coeffs(idx);
        let is_copy = chosen.iter().any(|p| {
            (-3..=3).any(|s| shifted_overlap(&coeffs, &p.coeffs, s) > 0.5)
        });
        if is_copy {
            continue;
        }
        if !residual_ok(idx) {
            return Err(Error::numeric(
                "eigenpair residual exceeds tolerance",
                fm.amplitude,
            ));
        }
        chosen.push(EigenPair {
            value: eig.eigenvalues[idx],
            coeffs,
        });
        if chosen.len() == 2 {
            break;
        }
    }
    if chosen.len() < 2 {
        return Err(Error::numeric(
            "could not identify two inequivalent Floquet branches",
            fm.amplitude,
        ));
    }

    // Fold and sort the two branches by folded quasienergy.
    chosen.sort_by(|a, b| {
        fold_quasienergy(a.value, omega)
            .partial_cmp(&fold_quasienergy(b.value, omega))
            .expect("finite quasienergy")
    });

    let mut quasienergies = [0.0; 2];
    let mut lab_coeffs: [Vec<Vector2<C64>>; 2] = [Vec::new(), Vec::new()];
    let mut anchors = [GaugeAnchor::LargestComponent { n: 0, component: 0 }; 2];

    for (j, pair) in chosen.iter().enumerate() {
        let folded = fold_quasienergy(pair.value, omega);
        quasienergies[j] = folded;
        // Copy-consistent indexing: shifting the quasienergy by m*omega
        // shifts the Fourier index by m.
        let m = ((folded - pair.value) / omega).round() as i32;
        let shifted = shift_blocks(&pair.coeffs, m);
        let weight: f64 = shifted.iter().map(|v| v.norm_squared()).sum();
        if (weight - 1.0).abs() > 1e-10 {
            return Err(Error::numeric(
                "Fourier weight lost at the truncation edge; increase N",
                fm.amplitude,
            ));
        }
        let lab = to_lab_basis(&shifted, fm.basis);
        let (gauged, anchor) = fix_gauge(&lab, side);
        lab_coeffs[j] = gauged;
        anchors[j] = anchor;
    }

    let gap = quasienergies[1] - quasienergies[0];
    let degenerate = gap < DEGENERACY_TOL * omega || (omega - gap) < DEGENERACY_TOL * omega;

    Ok(FloquetSolution {
        amplitude: fm.amplitude,
        quasienergies,
        fourier_coeffs: lab_coeffs,
        truncation: n,
        gauge_anchor: anchors,
        omega,
        phi: fm.cfg.phi(),
        degenerate,
    })
}

/// Shift Fourier blocks: result index `q` holds the input block `q - m`
/// (accompanies replacing `eps` by `eps + m omega`). Blocks shifted out of
/// the window are dropped; vacated blocks are zero.
fn shift_blocks(coeffs: &[Vector2<C64>], m: i32) -> Vec<Vector2<C64>> {
    if m == 0 {
        return coeffs.to_vec();
    }
    let len = coeffs.len() as i32;
    (0..len)
        .map(|q| {
            let src = q - m;
            if src >= 0 && src < len {
                coeffs[src as usize]
            } else {
                Vector2::zeros()
            }
        })
        .collect()
}

/// Convert per-block spinor components from the given basis to the lab
/// basis of the original Hamiltonian.
fn to_lab_basis(coeffs: &[Vector2<C64>], basis: FloquetBasis) -> Vec<Vector2<C64>> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    coeffs
        .iter()
        .map(|v| match basis {
            FloquetBasis::Rotated => Vector2::new(
                (v[0] + v[1]) * Complex::from(inv_sqrt2),
                (-v[0] + v[1]) * Complex::from(inv_sqrt2),
            ),
            FloquetBasis::PlusMinus => Vector2::new(v[0], -v[1]),
        })
        .collect()
}

/// Multiply the mode by a constant phase making its largest-magnitude
/// component real positive. Ties within 1e-9 resolve to the lowest
/// (n, component) index.
fn fix_gauge(coeffs: &[Vector2<C64>], side: i32) -> (Vec<Vector2<C64>>, GaugeAnchor) {
    let mut best = (0usize, 0usize, 0.0f64);
    for (b, v) in coeffs.iter().enumerate() {
        for comp in 0..2 {
            let mag = v[comp].norm();
            if mag > best.2 + 1e-9 {
                best = (b, comp, mag);
            }
        }
    }
    let (b, comp, mag) = best;
    if mag == 0.0 {
        return (
            coeffs.to_vec(),
            GaugeAnchor::LargestComponent { n: 0, component: 0 },
        );
    }
    let phase = coeffs[b][comp] / Complex::from(mag);
    let rot = phase.conj();
    let fixed = coeffs.iter().map(|v| v * rot).collect();
    (
        fixed,
        GaugeAnchor::LargestComponent {
            n: b as i32 - side,
            component: comp,
        },
    )
}

/// Relabel and phase-align `next` against `prev` (parallel transport),
/// keeping quasienergies continuous across fold boundaries and branch
/// crossings. Both solutions must share the truncation window, drive
/// frequency, and drive phase.
pub fn track_branches(prev: &FloquetSolution, next: &FloquetSolution) -> Result<FloquetSolution> {
    if prev.truncation != next.truncation {
        return Err(Error::invalid("track_branches: truncation windows differ"));
    }
    if prev.omega != next.omega || prev.phi != next.phi {
        return Err(Error::invalid("track_branches: drive parameters differ"));
    }

    // Best (overlap, shift) of prev branch j onto next branch k over copy
    // shifts of next.
    let best_match = |j: usize, k: usize| -> (f64, i32, C64) {
        let mut best = (0.0, 0, Complex::from(0.0));
        for s in -2..=2 {
            let shifted = shift_blocks(&next.fourier_coeffs[k], -s);
            let mut acc = Complex::from(0.0);
            for q in 0..shifted.len() {
                acc += prev.fourier_coeffs[j][q].dotc(&shifted[q]);
            }
            if acc.norm() > best.0 {
                best = (acc.norm(), s, acc);
            }
        }
        best
    };

    let direct = (best_match(0, 0), best_match(1, 1));
    let swapped = (best_match(0, 1), best_match(1, 0));
    let direct_score = direct.0 .0 + direct.1 .0;
    let swapped_score = swapped.0 .0 + swapped.1 .0;
    let (assign, matches) = if direct_score >= swapped_score {
        ([0usize, 1usize], direct)
    } else {
        ([1usize, 0usize], swapped)
    };

    let worst = matches.0 .0.min(matches.1 .0);
    if worst < 0.5 {
        return Err(Error::StepTooLarge { overlap: worst });
    }

    let mut quasienergies = [0.0; 2];
    let mut fourier_coeffs: [Vec<Vector2<C64>>; 2] = [Vec::new(), Vec::new()];
    for (j, m) in [(0usize, &matches.0), (1usize, &matches.1)] {
        let k = assign[j];
        let (_, s, overlap) = *m;
        // Copy shift s replaces eps by eps - s*omega and block q by q + s.
        let shifted = shift_blocks(&next.fourier_coeffs[k], -s);
        let phase = (overlap / Complex::from(overlap.norm())).conj();
        fourier_coeffs[j] = shifted.iter().map(|v| v * phase).collect();
        quasienergies[j] = next.quasienergies[k] - s as f64 * next.omega;
    }

    Ok(FloquetSolution {
        amplitude: next.amplitude,
        quasienergies,
        fourier_coeffs,
        truncation: next.truncation,
        gauge_anchor: [GaugeAnchor::ParallelTransport; 2],
        omega: next.omega,
        phi: next.phi,
        degenerate: next.degenerate,
    })
}

/// Closed-form quasienergy pair, unfolded:
/// `eps_{0,1} = (-omega -+ sqrt((omega - delta J0(2A/omega))^2 +
/// delta^2 J1(2A/omega)^2)) / 2`.
pub fn quasienergies_analytic(cfg: &DriveConfig, a: f64) -> (f64, f64) {
    let r = rabi_frequency(cfg, a);
    (0.5 * (-cfg.omega() - r), 0.5 * (-cfg.omega() + r))
}

/// Quasienergy gap (generalized Rabi frequency):
/// `sqrt((omega - delta J0(2A/omega))^2 + delta^2 J1(2A/omega)^2)`.
pub fn rabi_frequency(cfg: &DriveConfig, a: f64) -> f64 {
    let x = 2.0 * a / cfg.omega();
    let j0 = jn_signed(0, x);
    let j1 = jn_signed(1, x);
    let re = cfg.omega() - cfg.delta() * j0;
    let im = cfg.delta() * j1;
    re.hypot(im)
}

/// Rotating-wave-approximation Rabi frequency `sqrt(A^2 + (delta-omega)^2)`.
pub fn rwa_rabi(cfg: &DriveConfig, a: f64) -> f64 {
    a.hypot(cfg.detuning())
}

/// Closed-form Floquet modes (Fourier coefficients in the lab basis).
///
/// Branch labels follow the analytic continuation of the formulas: branch 0
/// pairs with the lower unfolded quasienergy `(-omega - Omega_R)/2`. Below
/// the first branch crossing this coincides with ascending folded order;
/// past it the folded ordering may differ.
pub fn floquet_modes_analytic(cfg: &DriveConfig, a: f64, n: usize) -> Result<FloquetSolution> {
    if n < 1 {
        return Err(Error::invalid(format!("truncation must be >= 1, got {n}")));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be finite and non-negative, got {a}"
        )));
    }
    let omega = cfg.omega();
    let delta = cfg.delta();
    let side = n as i32;
    let x2 = 2.0 * a / omega;
    // Mixing angle: natural atan2 branch keeps the modes continuous in A.
    let theta = f64::atan2(delta * jn_signed(1, x2), omega - delta * jn_signed(0, x2));
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let x = a / omega;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    let (eps0_raw, eps1_raw) = quasienergies_analytic(cfg, a);
    let raw = [eps0_raw, eps1_raw];

    let mut quasienergies = [0.0; 2];
    let mut lab_coeffs: [Vec<Vector2<C64>>; 2] = [Vec::new(), Vec::new()];
    let mut anchors = [GaugeAnchor::LargestComponent { n: 0, component: 0 }; 2];

    for j in 0..2 {
        let rotated: Vec<Vector2<C64>> = (-side..=side)
            .map(|q| {
                let jq = jn_signed(q, x);
                let jq1 = jn_signed(q + 1, x);
                let jq_neg = jn_signed(q, -x);
                let jq1_neg = jn_signed(q + 1, -x);
                let (up, dn) = if j == 0 {
                    (c * jq1 + s * jq, -c * jq1_neg + s * jq_neg)
                } else {
                    (-s * jq1 + c * jq, s * jq1_neg + c * jq_neg)
                };
                Vector2::new(
                    Complex::from(inv_sqrt2 * up),
                    Complex::from(inv_sqrt2 * dn),
                )
            })
            .collect();

        let folded = fold_quasienergy(raw[j], omega);
        quasienergies[j] = folded;
        let m = ((folded - raw[j]) / omega).round() as i32;
        let shifted = shift_blocks(&rotated, m);
        let weight: f64 = shifted.iter().map(|v| v.norm_squared()).sum();
        if weight <= 0.0 {
            return Err(Error::numeric(
                "analytic mode weight vanished inside the window; increase N",
                a,
            ));
        }
        let normalized: Vec<Vector2<C64>> = shifted
            .iter()
            .map(|v| v * Complex::from(1.0 / weight.sqrt()))
            .collect();
        let lab = to_lab_basis(&normalized, FloquetBasis::Rotated);
        let (gauged, anchor) = fix_gauge(&lab, side);
        lab_coeffs[j] = gauged;
        anchors[j] = anchor;
    }

    let gap_folded = (quasienergies[1] - quasienergies[0]).abs();
    let degenerate =
        gap_folded < DEGENERACY_TOL * omega || (omega - gap_folded) < DEGENERACY_TOL * omega;

    Ok(FloquetSolution {
        amplitude: a,
        quasienergies,
        fourier_coeffs: lab_coeffs,
        truncation: n,
        gauge_anchor: anchors,
        omega,
        phi: cfg.phi(),
        degenerate,
    })
}

/// Fidelity of the branch-0 modes of two solutions under the time-averaged
/// inner product: `|sum_n <u_{0,n+s,a}|u_{0,n,b}>|^2`, maximized over the
/// relative Fourier-ladder shift `s`. A shift by `s` blocks together with a
/// quasienergy offset `s omega` produces the same Floquet state, so the
/// maximum makes the fidelity independent of which zone copy each solution
/// happens to store.
pub fn mode_fidelity(a: &FloquetSolution, b: &FloquetSolution) -> Result<f64> {
    for (name, sol) in [("first", a), ("second", b)] {
        let w = sol.fourier_weight(0);
        if (w - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "{name} solution's branch 0 is not normalized (weight {w:.9})"
            )));
        }
    }
    let w = a.truncation.min(b.truncation) as i32;
    let mut best: f64 = 0.0;
    for s in -4..=4i32 {
        let mut acc = Complex::from(0.0);
        for n in -w..=w {
            acc += a.coeff(0, n + s).dotc(&b.coeff(0, n));
        }
        best = best.max(acc.norm_sqr());
    }
    Ok(best)
}
