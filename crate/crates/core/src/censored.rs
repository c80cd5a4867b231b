//! The observable (censored) sample distribution
//!
//! ```text
//! f_sample(r) = w(r) f(r - r_0) / Z,    Z = int w(r') f(r' - r_0) dr'
//! ```
//!
//! where `f` is the Rician density and `w` a bias function of RSS. The
//! amplitude `r` maps to RSS through `rss_dbm = amp_ref_dbm + 20 log10(r)`.

use rayon::prelude::*;

use crate::bias::BiasFunction;
use crate::error::{Error, Result};
use crate::quadrature::{self, integrate, integrate_panels, uniform_edges};
use crate::rician::{rician_pdf, RicianParams};
use crate::scalar::{amp_to_db, Scalar};

/// Models whose surviving mass is below this are rejected.
pub const MIN_SURVIVING_MASS: f64 = 1e-12;
/// Panels of the cumulative cache over the effective support.
pub const CACHE_PANELS: usize = 2048;

#[derive(Debug, Clone)]
pub struct CensoredModel<T, W> {
    params: RicianParams<T>,
    bias: W,
    amp_ref_dbm: T,
    /// Uniform panel edges over the effective support.
    edges: Vec<T>,
    /// Unnormalized cumulative integral at each edge; the last entry is `Z`.
    cumulative: Vec<T>,
    /// Unnormalized density at each edge.
    density: Vec<T>,
}

impl<T: Scalar, W: BiasFunction<T>> CensoredModel<T, W> {
    pub fn new(params: RicianParams<T>, bias: W, amp_ref_dbm: T) -> Result<Self> {
        if !amp_ref_dbm.is_finite() {
            return Err(Error::domain("amp_ref_dbm", amp_ref_dbm));
        }
        let (lo, hi) = params.mass_interval();
        let r_0 = params.r_0();
        let hi = hi + r_0;
        if !(hi > T::zero()) {
            return Err(Error::FullyCensored { mass: 0.0 });
        }
        let lo = (lo + r_0).max(T::zero());
        let mut model = CensoredModel {
            params,
            bias,
            amp_ref_dbm,
            edges: uniform_edges(lo, hi, CACHE_PANELS),
            cumulative: Vec::new(),
            density: Vec::new(),
        };
        let share = model.panel_tol();
        let pieces: Vec<T> = model
            .edges
            .par_windows(2)
            .map(|w| model.integral(w[0], w[1], share))
            .collect();
        let density: Vec<T> = model
            .edges
            .par_iter()
            .map(|&r| model.weighted_density(r))
            .collect();
        let mut acc = T::zero();
        let mut cumulative = Vec::with_capacity(pieces.len() + 1);
        cumulative.push(acc);
        for p in pieces {
            acc = acc + p;
            cumulative.push(acc);
        }
        model.cumulative = cumulative;
        model.density = density;
        let z = model.normalization_constant();
        if !(z >= T::lit(MIN_SURVIVING_MASS)) {
            return Err(Error::FullyCensored {
                mass: z.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(model)
    }

    pub fn params(&self) -> &RicianParams<T> {
        &self.params
    }

    pub fn bias(&self) -> &W {
        &self.bias
    }

    pub fn amp_ref_dbm(&self) -> T {
        self.amp_ref_dbm
    }

    /// Amplitude interval carrying the model's mass.
    pub fn support(&self) -> (T, T) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    /// Surviving mass `Z`, in `(0, 1]` up to quadrature error.
    pub fn normalization_constant(&self) -> T {
        *self.cumulative.last().unwrap()
    }

    /// RSS in dBm for amplitude `r` (`-inf` at `r = 0`).
    pub fn rss_dbm(&self, r: T) -> T {
        self.amp_ref_dbm + amp_to_db(r)
    }

    /// `w(r) f(r - r_0)` before normalization.
    pub fn weighted_density(&self, r: T) -> T {
        if r < T::zero() {
            return T::zero();
        }
        let f = rician_pdf(r - self.params.r_0(), &self.params);
        if f == T::zero() {
            return T::zero();
        }
        self.bias.weight(self.rss_dbm(r)) * f
    }

    pub fn sample_pdf(&self, r: T) -> T {
        self.weighted_density(r) / self.normalization_constant()
    }

    /// `int_0^r sample_pdf`, integrating from the nearest cached edge.
    pub fn sample_cdf(&self, r: T) -> T {
        self.locate(r, |k| {
            self.cumulative[k] + self.integral(self.edges[k], r, self.panel_tol())
        })
    }

    /// [`Self::sample_cdf`] at many points, by cubic Hermite interpolation
    /// of the cached cumulative integral (whose derivative is the density).
    /// Accurate to about `1e-9` for bias functions that are smooth on the
    /// panel scale.
    pub fn sample_cdf_interpolated(&self, xs: &[T]) -> Vec<T> {
        xs.iter()
            .map(|&r| {
                self.locate(r, |k| {
                    let (a, b) = (self.edges[k], self.edges[k + 1]);
                    let h = b - a;
                    let t = (r - a) / h;
                    let (t2, t3) = (t * t, t * t * t);
                    let two = T::lit(2.0);
                    let h01 = T::lit(3.0) * t2 - two * t3;
                    let h10 = t3 - two * t2 + t;
                    let h11 = t3 - t2;
                    let (c0, c1) = (self.cumulative[k], self.cumulative[k + 1]);
                    c0 + h01 * (c1 - c0) + h * (h10 * self.density[k] + h11 * self.density[k + 1])
                })
            })
            .collect()
    }

    /// Panel index of `r` and normalization of the unnormalized cumulative
    /// value `inside` produces; 0 and 1 outside the support.
    fn locate<F: Fn(usize) -> T>(&self, r: T, inside: F) -> T {
        let (lo, hi) = self.support();
        if !(r > lo) {
            return T::zero();
        }
        if r >= hi {
            return T::one();
        }
        let k = (self.edges.partition_point(|&e| e <= r) - 1).min(self.edges.len() - 2);
        (inside(k) / self.normalization_constant())
            .min(T::one())
            .max(T::zero())
    }

    fn panel_tol(&self) -> T {
        T::lit(quadrature::DEFAULT_ABS_TOL) / T::from_usize_lossy(CACHE_PANELS)
    }

    /// Mean of the censored distribution.
    pub fn mean(&self) -> T {
        let f = |r: T| r * self.weighted_density(r);
        let tol = T::lit(quadrature::DEFAULT_ABS_TOL);
        integrate_panels(&f, &self.edges, tol, quadrature::DEFAULT_MAX_DEPTH).value
            / self.normalization_constant()
    }

    fn integral(&self, a: T, b: T, tol: T) -> T {
        let f = |r: T| self.weighted_density(r);
        integrate(&f, a, b, tol, quadrature::DEFAULT_MAX_DEPTH).value
    }
}

/// `Z` of a model, failing on fully censored parameter sets.
pub fn normalization_constant<T: Scalar, W: BiasFunction<T>>(
    params: RicianParams<T>,
    bias: W,
    amp_ref_dbm: T,
) -> Result<T> {
    Ok(CensoredModel::new(params, bias, amp_ref_dbm)?.normalization_constant())
}
