//! Synthetic censored measurements with known ground truth.
//!
//! Amplitudes are drawn from the shifted Rician and each one is kept with
//! probability `w(rss)`, i.e. the packet is "decoded". This thinning is the
//! physical reception process, so the accepted sample is an independent
//! check on the censored density rather than a draw from it.
//!
//! The generator is ChaCha8 seeded from a `u64`; output is reproducible for
//! a given seed and build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bias::{BiasFunction, Censoring};
use crate::censored::CensoredModel;
use crate::data::{Dataset, MeasurementRecord, Reference};
use crate::error::{Error, Result};
use crate::rician::RicianParams;
use crate::scalar::{amp_to_db, Scalar};

/// Smallest surviving mass the generator accepts.
pub const MIN_ACCEPTANCE_MASS: f64 = 1e-6;
/// Distance stamped on every synthetic record.
pub const PLACEHOLDER_DISTANCE_M: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub true_params: RicianParams<f64>,
    pub censoring: Censoring<f64>,
    pub amp_ref_dbm: f64,
    pub n_accepted: usize,
    pub seed: u64,
    /// Reference declared on the emitted dataset.
    pub reference: Reference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub dataset: Dataset,
    /// Amplitudes drawn, including those discarded or rejected.
    pub draws: u64,
}

impl Synthesized {
    pub fn acceptance_rate(&self) -> f64 {
        self.dataset.len() as f64 / self.draws as f64
    }
}

/// One Rician amplitude as `|(nu + sigma g1) + i sigma g2|`.
pub fn rician_sample<T, R>(p: &RicianParams<T>, rng: &mut R) -> T
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let (nu, sigma) = p.to_standard();
    let g1: T = StandardNormal.sample(rng);
    let g2: T = StandardNormal.sample(rng);
    (nu + sigma * g1).hypot(sigma * g2)
}

pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    Ok(generate_with_stats(cfg)?.dataset)
}

pub fn generate_with_stats(cfg: &SynthConfig) -> Result<Synthesized> {
    if cfg.n_accepted == 0 {
        return Err(Error::InvalidParameter("n_accepted must be >= 1".into()));
    }
    if !cfg.amp_ref_dbm.is_finite() {
        return Err(Error::domain("amp_ref_dbm", cfg.amp_ref_dbm));
    }
    let mass = CensoredModel::new(cfg.true_params, cfg.censoring, cfg.amp_ref_dbm)
        .map(|m| m.normalization_constant())
        .unwrap_or(0.0);
    if !(mass >= MIN_ACCEPTANCE_MASS) {
        return Err(Error::FullyCensored { mass });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r_0 = cfg.true_params.r_0();
    let mut records = Vec::with_capacity(cfg.n_accepted);
    let mut draws = 0u64;
    while records.len() < cfg.n_accepted {
        draws += 1;
        let r = rician_sample(&cfg.true_params, &mut rng) + r_0;
        // negative shifted amplitudes are physically absent
        if !(r > 0.0) {
            continue;
        }
        let rss_db = cfg.amp_ref_dbm + amp_to_db(r);
        let u: f64 = rng.random();
        if u < cfg.censoring.weight(rss_db) {
            records.push(MeasurementRecord {
                distance_m: PLACEHOLDER_DISTANCE_M,
                rss_db,
            });
        }
    }

    let mut dataset = Dataset::new(records, cfg.reference, "synthetic");
    dataset
        .extra
        .push(("truth".into(), serde_json::to_string(cfg)?));
    Ok(Synthesized { dataset, draws })
}
