//! Estimation of an unobservable Rician signal-strength distribution from
//! measurements censored by receiver sensitivity.
//!
//! Packets are logged only when decoded, so the observed RSS sample follows
//! the Rician density reweighted by the packet-success probability `w`
//! and renormalized. Fitting that censored model's CDF to the empirical CDF
//! recovers the parameters `(K, r_s, r_0)` of the underlying distribution.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the data, simulation, and
//! command-line layers use.

pub mod bias;
pub mod censored;
pub mod data;
pub mod error;
pub mod lsq;
pub mod quadrature;
pub mod rician;
pub mod scalar;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type RicianParams = rician::RicianParams<f64>;
pub type LinkBudget = bias::LinkBudget<f64>;
pub type LinkBias = bias::LinkBias<f64>;
pub type Censoring = bias::Censoring<f64>;
pub type CensoredModel<W> = censored::CensoredModel<f64, W>;
pub use bias::{PacketSpec, Unbiased};
pub type FitResult = lsq::FitResult<f64>;
pub type LmOptions = lsq::LmOptions<f64>;
pub type EmpiricalCdf = data::EmpiricalCdf<f64>;
pub use data::{Dataset, MeasurementRecord, Reference};
pub use lsq::FitMode;
pub use synth::SynthConfig;
