//! Run configuration file (JSON, schema 1).
//!
//! Every field is optional. A minimal file is `{}`.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "link": { "bitrate_hz": 100000, "bandwidth_hz": 200000, "alpha": 1, "beta": 1 },
//!   "packet": { "payload_bytes": 50 },
//!   "calibration": { "sensitivity_dbm": null, "target_psr": 0.2, "calib_payload_bytes": 20 },
//!   "fit": { "max_iterations": 200, "init": { "k_db": -10, "r_s": 1.0, "r_0": 0.0 } },
//!   "window": { "min_m": 75, "max_m": 125 },
//!   "truth": { "k_db": -30, "r_s": 0.35, "r_0": 20, "amp_ref_db": -27, "censored": true }
//! }
//! ```

use std::path::Path;

use anyhow::{bail, Context};
use censfit::bias::calibrate_noise_ref;
use censfit::{LinkBudget, LmOptions, PacketSpec, Reference, RicianParams};
use serde::Deserialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub link: LinkConfig,
    pub packet: PacketConfig,
    pub calibration: CalibrationConfig,
    pub fit: FitConfig,
    pub window: WindowConfig,
    pub truth: TruthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA,
            link: LinkConfig::default(),
            packet: PacketConfig::default(),
            calibration: CalibrationConfig::default(),
            fit: FitConfig::default(),
            window: WindowConfig::default(),
            truth: TruthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Skips calibration when set.
    pub noise_ref_dbm: Option<f64>,
    pub bitrate_hz: f64,
    pub bandwidth_hz: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        let lb = LinkBudget::default();
        LinkConfig {
            noise_ref_dbm: None,
            bitrate_hz: lb.bitrate_hz,
            bandwidth_hz: lb.bandwidth_hz,
            alpha: lb.alpha,
            beta: lb.beta,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketConfig {
    pub payload_bytes: u32,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig { payload_bytes: 50 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Absolute sensitivity. `None` means RSS values are dB relative to S.
    pub sensitivity_dbm: Option<f64>,
    pub target_psr: f64,
    pub calib_payload_bytes: u32,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            sensitivity_dbm: None,
            target_psr: 0.2,
            calib_payload_bytes: 20,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: Option<usize>,
    pub initial_damping: Option<f64>,
    pub damping_up: Option<f64>,
    pub damping_down: Option<f64>,
    pub cost_rel_tol: Option<f64>,
    pub gradient_inf_tol: Option<f64>,
    pub fd_rel_step: Option<f64>,
    /// Start point in the dataset's normalized amplitude units.
    pub init: Option<ParamsConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub k_db: f64,
    pub r_s: f64,
    pub r_0: f64,
}

impl ParamsConfig {
    pub fn to_params(self) -> censfit::Result<RicianParams> {
        RicianParams::from_k_db(self.k_db, self.r_s, self.r_0)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub min_m: f64,
    pub max_m: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            min_m: 75.0,
            max_m: 125.0,
        }
    }
}

/// Ground truth for `simulate`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthConfig {
    pub k_db: f64,
    pub r_s: f64,
    pub r_0: f64,
    /// RSS of amplitude 1, in the same units as the emitted `rss_db`.
    pub amp_ref_db: f64,
    /// Apply the link-budget bias; `false` keeps every draw.
    pub censored: bool,
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig {
            k_db: -30.0,
            r_s: 0.35,
            r_0: 20.0,
            amp_ref_db: -27.0,
            censored: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let cfg: RunConfig = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", p.display()))?
            }
        };
        if cfg.schema != SCHEMA {
            bail!("unsupported config schema {} (expected {SCHEMA})", cfg.schema);
        }
        if !(cfg.window.min_m <= cfg.window.max_m) {
            bail!(
                "window.min_m ({}) must not exceed window.max_m ({})",
                cfg.window.min_m,
                cfg.window.max_m
            );
        }
        cfg.lm_options()?;
        cfg.packet()?;
        cfg.link_budget()?;
        cfg.init()?;
        Ok(cfg)
    }

    /// Units of RSS values implied by the calibration block.
    pub fn reference(&self) -> Reference {
        match self.calibration.sensitivity_dbm {
            Some(_) => Reference::AbsoluteDbm,
            None => Reference::RelativeToS,
        }
    }

    /// Receiver sensitivity in RSS units: 0 in S-relative mode.
    pub fn sensitivity(&self) -> f64 {
        self.calibration.sensitivity_dbm.unwrap_or(0.0)
    }

    pub fn packet(&self) -> anyhow::Result<PacketSpec> {
        PacketSpec::new(self.packet.payload_bytes).context("packet.payload_bytes")
    }

    pub fn calibration_packet(&self) -> anyhow::Result<PacketSpec> {
        PacketSpec::new(self.calibration.calib_payload_bytes)
            .context("calibration.calib_payload_bytes")
    }

    /// The link budget, calibrated so that calibration packets at S succeed
    /// with `target_psr` unless `noise_ref_dbm` is given explicitly.
    pub fn link_budget(&self) -> anyhow::Result<LinkBudget> {
        let partial = LinkBudget {
            noise_ref_dbm: self.link.noise_ref_dbm.unwrap_or(0.0),
            bitrate_hz: self.link.bitrate_hz,
            bandwidth_hz: self.link.bandwidth_hz,
            sensitivity_dbm: self.sensitivity(),
            alpha: self.link.alpha,
            beta: self.link.beta,
        };
        partial.validate().context("link")?;
        if self.link.noise_ref_dbm.is_some() {
            return Ok(partial);
        }
        let c = &self.calibration;
        if !(c.target_psr > 0.0 && c.target_psr < 1.0) {
            bail!("calibration.target_psr must lie in (0, 1), got {}", c.target_psr);
        }
        calibrate_noise_ref(self.sensitivity(), c.target_psr, &self.calibration_packet()?, &partial)
            .context("calibration")
    }

    pub fn lm_options(&self) -> anyhow::Result<LmOptions> {
        let d = LmOptions::default();
        let f = &self.fit;
        let opts = LmOptions {
            max_iterations: f.max_iterations.unwrap_or(d.max_iterations),
            initial_damping: f.initial_damping.unwrap_or(d.initial_damping),
            damping_up: f.damping_up.unwrap_or(d.damping_up),
            damping_down: f.damping_down.unwrap_or(d.damping_down),
            cost_rel_tol: f.cost_rel_tol.unwrap_or(d.cost_rel_tol),
            gradient_inf_tol: f.gradient_inf_tol.unwrap_or(d.gradient_inf_tol),
            fd_rel_step: f.fd_rel_step.unwrap_or(d.fd_rel_step),
        };
        opts.validate().context("fit options")?;
        Ok(opts)
    }

    pub fn init(&self) -> anyhow::Result<Option<RicianParams>> {
        self.fit
            .init
            .map(|p| p.to_params().context("fit.init"))
            .transpose()
    }
}
