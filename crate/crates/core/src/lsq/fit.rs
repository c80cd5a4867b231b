//! Fitting the censored (or plain) shifted Rician CDF to an empirical CDF.
//!
//! The optimizer works on `(ln K, ln r_s, r_0)` so every trial point is a
//! valid parameter set. Residuals sit at the sorted samples: the `i`-th
//! (1-based) sample contributes `i/n - F_model(x_(i))`.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions, Termination};
use crate::bias::{BiasFunction, LinkBias, LinkBudget, PacketSpec, Unbiased};
use crate::censored::CensoredModel;
use crate::data::{to_amplitudes, Dataset};
use crate::error::{Error, Result};
use crate::rician::RicianParams;
use crate::scalar::{amp_to_db, Scalar};

/// Smallest sample count accepted by the fitting drivers.
pub const MIN_SAMPLES: usize = 10;
/// Starting `K` when none is given: near-Rayleigh.
pub const AUTO_INIT_K: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Plain shifted Rician, ignoring the cut-off.
    Naive,
    /// Rician reweighted by the packet-success bias.
    Biased,
}

impl FitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMode::Naive => "naive",
            FitMode::Biased => "biased",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    pub params: RicianParams<T>,
    /// RMSE between the model CDF and the ECDF at the sample points.
    pub rmse: T,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub mode: FitMode,
    pub residual_count: usize,
}

/// Residuals `i/n - F(x_(i))` for model CDF values at the sorted samples.
pub fn cdf_residuals<T: Scalar>(model_at_samples: &[T]) -> Vec<T> {
    let n = T::from_usize_lossy(model_at_samples.len());
    model_at_samples
        .iter()
        .enumerate()
        .map(|(i, &f)| T::from_usize_lossy(i + 1) / n - f)
        .collect()
}

fn rms<T: Scalar>(residuals: &[T]) -> T {
    let n = T::from_usize_lossy(residuals.len());
    (residuals.iter().fold(T::zero(), |acc, &r| acc + r * r) / n).sqrt()
}

/// CDF root-mean-square error at the sorted samples.
pub fn cdf_rmse<T: Scalar, F: Fn(T) -> T>(sorted_samples: &[T], model_cdf: F) -> Result<T> {
    if sorted_samples.is_empty() {
        return Err(Error::Empty("cdf_rmse needs at least one sample"));
    }
    let values: Vec<T> = sorted_samples.iter().map(|&x| model_cdf(x)).collect();
    Ok(rms(&cdf_residuals(&values)))
}

/// [`cdf_rmse`] for a censored model, using its batched CDF.
pub fn model_cdf_rmse<T: Scalar, W: BiasFunction<T>>(
    sorted_samples: &[T],
    model: &CensoredModel<T, W>,
) -> Result<T> {
    if sorted_samples.is_empty() {
        return Err(Error::Empty("cdf_rmse needs at least one sample"));
    }
    Ok(rms(&cdf_residuals(&model.sample_cdf_interpolated(sorted_samples))))
}

/// `r_s` = mean amplitude, `K` = 0.1, `r_0` = 0.
pub fn auto_init<T: Scalar>(amplitudes: &[T]) -> Result<RicianParams<T>> {
    if amplitudes.is_empty() {
        return Err(Error::Empty("no amplitudes to initialize from"));
    }
    let mean = amplitudes.iter().fold(T::zero(), |a, &x| a + x)
        / T::from_usize_lossy(amplitudes.len());
    RicianParams::new(T::lit(AUTO_INIT_K), mean, T::zero())
}

fn to_search<T: Scalar>(p: &RicianParams<T>) -> [T; 3] {
    [p.k_linear().ln(), p.r_s().ln(), p.r_0()]
}

fn from_search<T: Scalar>(x: &[T]) -> Option<RicianParams<T>> {
    RicianParams::new(x[0].exp(), x[1].exp(), x[2]).ok()
}

/// Fits `(K, r_s, r_0)` of the model `w * f(r - r_0) / Z` to ascending
/// amplitudes whose dB reference is `amp_ref_dbm`.
pub fn fit_amplitudes<T, W>(
    sorted_amplitudes: &[T],
    amp_ref_dbm: T,
    bias: W,
    init: Option<RicianParams<T>>,
    opts: &LmOptions<T>,
    mode: FitMode,
) -> Result<FitResult<T>>
where
    T: Scalar,
    W: BiasFunction<T> + Clone,
{
    if sorted_amplitudes.len() < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "fitting needs at least {MIN_SAMPLES} samples, got {}",
            sorted_amplitudes.len()
        )));
    }
    if sorted_amplitudes.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter(
            "amplitudes must be finite and sorted ascending".into(),
        ));
    }
    // work on amplitudes relative to their mean so the optimizer path does
    // not depend on the amplitude unit
    let scale = sorted_amplitudes.iter().fold(T::zero(), |a, &x| a + x)
        / T::from_usize_lossy(sorted_amplitudes.len());
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::InvalidParameter(
            "amplitudes must have a positive finite mean".into(),
        ));
    }
    let xs: Vec<T> = sorted_amplitudes.iter().map(|&a| a / scale).collect();
    let ref_dbm = amp_ref_dbm + amp_to_db(scale);
    let init = match init {
        Some(p) => p.scaled(T::one() / scale)?,
        None => auto_init(&xs)?,
    };
    CensoredModel::new(init, bias.clone(), ref_dbm).map_err(|e| {
        Error::Initialization(format!("start point {:?}: {e}", init.scaled(scale)))
    })?;

    let residuals = |x: &[T]| {
        let p = from_search(x)?;
        let model = CensoredModel::new(p, bias.clone(), ref_dbm).ok()?;
        Some(cdf_residuals(&model.sample_cdf_interpolated(&xs)))
    };
    let report = levenberg_marquardt(residuals, &to_search(&init), opts)?;
    let fitted = from_search(&report.x).ok_or_else(|| {
        Error::InvalidParameter(format!("optimizer left the parameter domain: {:?}", report.x))
    })?;
    let model = CensoredModel::new(fitted, bias, ref_dbm)?;
    Ok(FitResult {
        params: fitted.scaled(scale)?,
        rmse: model_cdf_rmse(&xs, &model)?,
        iterations: report.iterations,
        converged: report.converged(),
        termination: report.termination,
        mode,
        residual_count: report.residual_count,
    })
}

/// Censored fit of a dataset's amplitudes under the link-budget bias.
pub fn fit_biased(
    ds: &Dataset,
    lb: &LinkBudget<f64>,
    pkt: &PacketSpec,
    init: Option<RicianParams<f64>>,
    opts: &LmOptions<f64>,
) -> Result<FitResult<f64>> {
    lb.validate()?;
    let (amps, amp_ref) = to_amplitudes(ds)?;
    let bias = LinkBias {
        link: *lb,
        packet: *pkt,
    };
    fit_amplitudes(&amps, amp_ref, bias, init, opts, FitMode::Biased)
}

/// Plain shifted-Rician fit of a dataset's amplitudes.
pub fn fit_naive(
    ds: &Dataset,
    init: Option<RicianParams<f64>>,
    opts: &LmOptions<f64>,
) -> Result<FitResult<f64>> {
    let (amps, amp_ref) = to_amplitudes(ds)?;
    fit_amplitudes(&amps, amp_ref, Unbiased, init, opts, FitMode::Naive)
}
