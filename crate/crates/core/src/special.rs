//! Log-domain modified Bessel function of the first kind, order zero.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Crossover between the power series and the large-argument expansion.
const SERIES_LIMIT: f64 = 20.0;
const MAX_TERMS: usize = 500;

/// `ln I0(x)` for `x >= 0`.
///
/// Finite for any finite `x`; `I0` itself overflows `f64` near `x = 713`.
pub fn log_bessel_i0<T: Scalar>(x: T) -> Result<T> {
    Ok(log_bessel_i0_scaled(x)? + x)
}

/// `ln I0(x) - x`, i.e. the log of the exponentially scaled `I0`.
///
/// The Rician density combines this with a Gaussian-like exponent so the
/// large `x` term cancels analytically instead of numerically.
pub fn log_bessel_i0_scaled<T: Scalar>(x: T) -> Result<T> {
    if x.is_nan() || x < T::zero() {
        return Err(Error::domain("log_bessel_i0 argument", x));
    }
    if x.is_infinite() {
        return Ok(T::infinity());
    }
    if x < T::lit(SERIES_LIMIT) {
        Ok(series(x).ln() - x)
    } else {
        Ok(asymptotic_scaled(x))
    }
}

/// `sum_m (x^2/4)^m / (m!)^2`, all terms positive.
fn series<T: Scalar>(x: T) -> T {
    let q = x * x / T::lit(4.0);
    let mut term = T::one();
    let mut sum = T::one();
    for m in 1..MAX_TERMS {
        let mf = T::from_usize_lossy(m);
        term = term * q / (mf * mf);
        sum = sum + term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    sum
}

/// `-1/2 ln(2 pi x) + ln(1 + 1/(8x) + 9/(128 x^2) + ...)`.
fn asymptotic_scaled<T: Scalar>(x: T) -> T {
    let inv8x = T::one() / (T::lit(8.0) * x);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..MAX_TERMS {
        let odd = T::from_usize_lossy(2 * k - 1);
        let next = term * odd * odd * inv8x / T::from_usize_lossy(k);
        // the expansion is asymptotic: stop at the smallest term
        if next >= term {
            break;
        }
        term = next;
        sum = sum + term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    -T::lit(0.5) * (T::TAU() * x).ln() + sum.ln()
}
