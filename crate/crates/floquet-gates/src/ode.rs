//! Adaptive Dormand-Prince 5(4) integrator over fixed-size complex vectors.
//!
//! Used by the Schroedinger (dimension 2) and vectorized Lindblad
//! (dimension 4) propagators. Steps are clipped to hit requested output
//! times exactly, so no dense-output interpolation is needed.

use nalgebra::SVector;
use num_complex::Complex;

use crate::error::{Error, Result};

pub(crate) type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

const MAX_STEPS: u64 = 10_000_000;

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1 >= t0`, returning `y(t1)`.
pub(crate) fn integrate<const D: usize, F>(
    f: &F,
    y0: SVector<C64, D>,
    t0: f64,
    t1: f64,
    opts: &OdeOpts,
) -> Result<SVector<C64, D>>
where
    F: Fn(f64, &SVector<C64, D>) -> SVector<C64, D>,
{
    let mut out = integrate_samples(f, y0, t0, &[t1], opts)?;
    Ok(out.pop().expect("one sample requested"))
}

/// Integrate from `t0`, returning the state at each time in `times`.
/// `times` must be non-decreasing with `times[0] >= t0`.
pub(crate) fn integrate_samples<const D: usize, F>(
    f: &F,
    y0: SVector<C64, D>,
    t0: f64,
    times: &[f64],
    opts: &OdeOpts,
) -> Result<Vec<SVector<C64, D>>>
where
    F: Fn(f64, &SVector<C64, D>) -> SVector<C64, D>,
{
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times[0] < t0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid(
            "sample times must be non-decreasing and start at or after t0",
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.max_step > 0.0) {
        return Err(Error::invalid("tolerances and max_step must be positive"));
    }

    let mut samples = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let span = times[times.len() - 1] - t0;
    let mut h = (span / 50.0).min(opts.max_step).max(f64::MIN_POSITIVE);
    let mut steps: u64 = 0;

    for &target in times {
        while t < target {
            if steps >= MAX_STEPS {
                return Err(Error::numeric("integrator exceeded step budget", t));
            }
            steps += 1;
            let clipped = h.min(opts.max_step).min(target - t);
            let (y_new, k_last, err) = dp5_step(f, t, &y, &k1, clipped, opts);
            if err <= 1.0 {
                t += clipped;
                y = y_new;
                k1 = k_last;
                let grow = if err > 0.0 {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h = clipped * grow;
            } else {
                h = clipped * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * span.max(1.0) {
                    return Err(Error::numeric("integrator step size underflow", t));
                }
            }
        }
        samples.push(y);
    }
    Ok(samples)
}

/// One Dormand-Prince 5(4) step of size `h` from `(t, y)` with `k1 = f(t,y)`
/// already evaluated (FSAL). Returns (y5, k7, scaled error norm).
fn dp5_step<const D: usize, F>(
    f: &F,
    t: f64,
    y: &SVector<C64, D>,
    k1: &SVector<C64, D>,
    h: f64,
    opts: &OdeOpts,
) -> (SVector<C64, D>, SVector<C64, D>, f64)
where
    F: Fn(f64, &SVector<C64, D>) -> SVector<C64, D>,
{
    let ch = |c: f64| Complex::from(c * h);
    let k2 = f(t + h / 5.0, &(y + k1 * ch(1.0 / 5.0)));
    let k3 = f(
        t + 3.0 / 10.0 * h,
        &(y + k1 * ch(3.0 / 40.0) + k2 * ch(9.0 / 40.0)),
    );
    let k4 = f(
        t + 4.0 / 5.0 * h,
        &(y + k1 * ch(44.0 / 45.0) + k2 * ch(-56.0 / 15.0) + k3 * ch(32.0 / 9.0)),
    );
    let k5 = f(
        t + 8.0 / 9.0 * h,
        &(y + k1 * ch(19372.0 / 6561.0)
            + k2 * ch(-25360.0 / 2187.0)
            + k3 * ch(64448.0 / 6561.0)
            + k4 * ch(-212.0 / 729.0)),
    );
    let k6 = f(
        t + h,
        &(y + k1 * ch(9017.0 / 3168.0)
            + k2 * ch(-355.0 / 33.0)
            + k3 * ch(46732.0 / 5247.0)
            + k4 * ch(49.0 / 176.0)
            + k5 * ch(-5103.0 / 18656.0)),
    );
    let y5 = y
        + k1 * ch(35.0 / 384.0)
        + k3 * ch(500.0 / 1113.0)
        + k4 * ch(125.0 / 192.0)
        + k5 * ch(-2187.0 / 6784.0)
        + k6 * ch(11.0 / 84.0);
    let k7 = f(t + h, &y5);
    let err_vec = k1 * ch(71.0 / 57600.0)
        + k3 * ch(-71.0 / 16695.0)
        + k4 * ch(71.0 / 1920.0)
        + k5 * ch(-17253.0 / 339200.0)
        + k6 * ch(22.0 / 525.0)
        + k7 * ch(-1.0 / 40.0);

    let mut sum = 0.0;
    for i in 0..D {
        let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
        let r = err_vec[i].norm() / scale;
        sum += r * r;
    }
    let err = (sum / D as f64).sqrt();

    (y5, k7, err)
}
