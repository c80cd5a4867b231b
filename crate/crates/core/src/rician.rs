//! Rician envelope density parameterized by the power ratio `K` and the
//! dominant amplitude `r_s`.
//!
//! ```text
//! f(r) = (2 r K / r_s^2) exp(-K (r^2 + r_s^2) / r_s^2) I0(2 r K / r_s)
//! ```
//!
//! This is the textbook Rician density with `nu = r_s` and
//! `sigma^2 = r_s^2 / (2K)`. The offset `r_0` is carried alongside but is
//! applied by the censored model, never here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{self, integrate_panels};
use crate::scalar::{db_to_pow, pow_to_db, Scalar};
use crate::special::log_bessel_i0_scaled;

/// Width of the effective support, in units of `sigma`, on either side of `nu`.
pub const TAIL_SIGMAS: f64 = 12.0;
const CDF_PANELS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicianParams<T> {
    k_linear: T,
    r_s: T,
    r_0: T,
}

impl<T: Scalar> RicianParams<T> {
    pub fn new(k_linear: T, r_s: T, r_0: T) -> Result<Self> {
        if !(k_linear > T::zero()) || k_linear.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "K must be positive and finite, got {k_linear}"
            )));
        }
        if !(r_s > T::zero()) || r_s.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "r_s must be positive and finite, got {r_s}"
            )));
        }
        if !r_0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r_0 must be finite, got {r_0}"
            )));
        }
        Ok(RicianParams { k_linear, r_s, r_0 })
    }

    /// Builds from `K` in dB (`K = 10^(K_dB / 10)`).
    pub fn from_k_db(k_db: T, r_s: T, r_0: T) -> Result<Self> {
        Self::new(db_to_pow(k_db), r_s, r_0)
    }

    pub fn k_linear(&self) -> T {
        self.k_linear
    }

    pub fn k_db(&self) -> T {
        pow_to_db(self.k_linear)
    }

    pub fn r_s(&self) -> T {
        self.r_s
    }

    pub fn r_0(&self) -> T {
        self.r_0
    }

    /// Same shape, different offset.
    pub fn with_offset(&self, r_0: T) -> Result<Self> {
        Self::new(self.k_linear, self.r_s, r_0)
    }

    /// All amplitudes multiplied by `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.k_linear, self.r_s * c, self.r_0 * c)
    }

    /// `(nu, sigma)` of the textbook form.
    pub fn to_standard(&self) -> (T, T) {
        to_standard(self)
    }

    /// `[max(0, nu - 12 sigma), nu + 12 sigma]`, outside of which the
    /// unshifted density carries less than `1e-10` of its mass.
    pub fn mass_interval(&self) -> (T, T) {
        let (nu, sigma) = self.to_standard();
        let reach = T::lit(TAIL_SIGMAS) * sigma;
        ((nu - reach).max(T::zero()), nu + reach)
    }
}

pub fn to_standard<T: Scalar>(p: &RicianParams<T>) -> (T, T) {
    (p.r_s, p.r_s / (T::lit(2.0) * p.k_linear).sqrt())
}

/// Natural log of [`rician_pdf`]; `-inf` for `r <= 0`.
pub fn rician_log_pdf<T: Scalar>(r: T, p: &RicianParams<T>) -> T {
    if r.is_nan() {
        return r;
    }
    if r <= T::zero() {
        return T::neg_infinity();
    }
    if r.is_infinite() {
        return T::neg_infinity();
    }
    let k = p.k_linear;
    let rs = p.r_s;
    let arg = T::lit(2.0) * r * k / rs;
    let d = (r - rs) / rs;
    // exp(-K (r^2 + r_s^2) / r_s^2) I0(arg) == exp(-K (r - r_s)^2 / r_s^2) * I0(arg) e^-arg
    let scaled_i0 = log_bessel_i0_scaled(arg).unwrap_or(T::nan());
    T::LN_2() + r.ln() + k.ln() - T::lit(2.0) * rs.ln() - k * d * d + scaled_i0
}

/// Rician density at `r`; zero for `r <= 0`. The offset `r_0` is ignored.
pub fn rician_pdf<T: Scalar>(r: T, p: &RicianParams<T>) -> T {
    rician_log_pdf(r, p).exp()
}

/// `int_0^r rician_pdf`, by adaptive Gauss–Kronrod over fixed panels of the
/// effective support.
pub fn rician_cdf<T: Scalar>(r: T, p: &RicianParams<T>) -> T {
    let (lo, hi) = p.mass_interval();
    if !(r > lo) {
        return T::zero();
    }
    let edges = edges_upto(lo, hi, CDF_PANELS, r);
    let f = |x: T| rician_pdf(x, p);
    let total = integrate_panels(
        &f,
        &edges,
        T::lit(quadrature::DEFAULT_ABS_TOL),
        quadrature::DEFAULT_MAX_DEPTH,
    );
    total.value.max(T::zero()).min(T::one())
}

/// Uniform panel edges of `[lo, hi]`, truncated at `upto`.
pub(crate) fn edges_upto<T: Scalar>(lo: T, hi: T, panels: usize, upto: T) -> Vec<T> {
    let mut edges: Vec<T> = quadrature::uniform_edges(lo, hi, panels)
        .into_iter()
        .take_while(|&e| e < upto)
        .collect();
    edges.push(upto.min(hi));
    edges
}
