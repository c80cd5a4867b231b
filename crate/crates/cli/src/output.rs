//! Report and curve output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use censfit::bias::BiasFunction;
use censfit::{CensoredModel, EmpiricalCdf, FitResult, LinkBudget, PacketSpec};
use serde::Serialize;

pub const REPORT_SCHEMA: u32 = 1;
pub const CURVE_POINTS: usize = 512;

/// Files staged in memory and written together; if any write fails, the
/// ones already written are removed again.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: &Path, contents: Vec<u8>) {
        self.files.push((path.to_path_buf(), contents));
    }

    pub fn commit(self) -> anyhow::Result<()> {
        let mut written: Vec<&Path> = Vec::new();
        for (path, contents) in &self.files {
            if let Err(e) = write_atomic(path, contents) {
                for p in written {
                    let _ = fs::remove_file(p);
                }
                return Err(e);
            }
            written.push(path);
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub input: String,
    pub source_tag: String,
    /// Unit of `rss_db` in the input.
    pub reference: &'static str,
    pub window_m: [f64; 2],
    pub n_records: usize,
    pub n_samples: usize,
    /// RSS of normalized amplitude 1: the dB mean of the windowed samples.
    pub amp_ref_db: f64,
    pub sensitivity_db: f64,
    pub db_convention: &'static str,
    pub link: LinkBudget,
    pub packet: PacketSpec,
    pub fits: Vec<FitEntry>,
}

#[derive(Debug, Serialize)]
pub struct FitEntry {
    pub mode: &'static str,
    #[serde(rename = "K_dB")]
    pub k_db: f64,
    pub k_linear: f64,
    /// Normalized amplitude units.
    pub r_s: f64,
    /// `20 log10(r_s)`, relative to `amp_ref_db`.
    #[serde(rename = "r_s_dB")]
    pub r_s_db: f64,
    #[serde(rename = "r_s_dB_rel_S")]
    pub r_s_db_rel_s: f64,
    pub r_0: f64,
    /// `amp_ref_db + 20 log10(r_0) - S`; absent for `r_0 <= 0`.
    #[serde(rename = "r_0_dB_rel_S")]
    pub r_0_db_rel_s: Option<f64>,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: censfit::lsq::Termination,
    pub n_samples: usize,
}

impl FitEntry {
    pub fn new(fit: &FitResult, amp_ref_db: f64, sensitivity_db: f64) -> Self {
        let p = fit.params;
        let r_s_db = 20.0 * p.r_s().log10();
        FitEntry {
            mode: fit.mode.as_str(),
            k_db: p.k_db(),
            k_linear: p.k_linear(),
            r_s: p.r_s(),
            r_s_db,
            r_s_db_rel_s: amp_ref_db + r_s_db - sensitivity_db,
            r_0: p.r_0(),
            r_0_db_rel_s: (p.r_0() > 0.0)
                .then(|| amp_ref_db + 20.0 * p.r_0().log10() - sensitivity_db),
            rmse: fit.rmse,
            iterations: fit.iterations,
            converged: fit.converged,
            termination: fit.termination,
            n_samples: fit.residual_count,
        }
    }
}

/// `r,ecdf,model_cdf,model_pdf` on an even grid over the sample range.
pub fn curve_rows<W: BiasFunction<f64>>(
    ecdf: &EmpiricalCdf,
    model: &CensoredModel<W>,
) -> Vec<[f64; 4]> {
    let xs = ecdf.sorted_values();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let grid: Vec<f64> = (0..CURVE_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64)
        .collect();
    let cdf = model.sample_cdf_interpolated(&grid);
    grid.iter()
        .zip(cdf)
        .map(|(&r, c)| [r, ecdf.eval(r), c, model.sample_pdf(r)])
        .collect()
}

pub fn write_curve_block(out: &mut Vec<u8>, rows: &[[f64; 4]]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "ecdf", "model_cdf", "model_pdf"])?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_table(fits: &[FitEntry]) {
    println!(
        "{:<7} {:>9} {:>10} {:>8} {:>10} {:>11} {:>9} {:>5} {:>9}",
        "mode", "K_dB", "r_s", "r_s_dB", "r_0", "r_0_dB(S)", "rmse", "iter", "converged"
    );
    for f in fits {
        let r0_db = f
            .r_0_db_rel_s
            .map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"));
        println!(
            "{:<7} {:>9.3} {:>10.5} {:>8.3} {:>10.5} {:>11} {:>9.6} {:>5} {:>9}",
            f.mode, f.k_db, f.r_s, f.r_s_db, f.r_0, r0_db, f.rmse, f.iterations, f.converged
        );
    }
}
