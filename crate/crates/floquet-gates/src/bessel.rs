//! Bessel functions of the first kind with integer order.

use crate::error::{Error, Result};

/// Bessel function of the first kind `J_n(x)` for any integer order and any
/// finite real argument, accurate to better than 1e-12 absolute.
///
/// Negative orders and negative arguments are reduced with
/// `J_{-n}(x) = (-1)^n J_n(x)` and `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("bessel_j argument must be finite, got {x}")));
    }
    Ok(jn_signed(n, x))
}

/// Infallible core used internally where the argument is finite by
/// construction.
pub(crate) fn jn_signed(n: i32, x: f64) -> f64 {
    let mut sign = 1.0;
    let mut n = n;
    let mut x = x;
    if n < 0 {
        n = -n;
        if n % 2 != 0 {
            sign = -sign;
        }
    }
    if x < 0.0 {
        x = -x;
        if n % 2 != 0 {
            sign = -sign;
        }
    }
    sign * libm::jn(n, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(2, f64::INFINITY).is_err());
    }

    #[test]
    fn reflection_identities() {
        for &x in &[0.3, 1.7, 5.2] {
            for n in -6..=6 {
                let a = jn_signed(n, x);
                let b = jn_signed(-n, x) * if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - b).abs() < 1e-14, "J_-n reflection failed at n={n}, x={x}");
                let c = jn_signed(n, -x) * if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - c).abs() < 1e-14, "J_n(-x) parity failed at n={n}, x={x}");
            }
        }
    }
}
