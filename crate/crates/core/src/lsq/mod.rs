//! Nonlinear least squares and the Rician CDF fitting drivers.

pub mod fit;
pub mod lm;

pub use fit::{
    auto_init, cdf_residuals, cdf_rmse, fit_amplitudes, fit_biased, fit_naive, model_cdf_rmse,
    FitMode, FitResult,
};
pub use lm::{levenberg_marquardt, LmOptions, LmReport, Termination};
