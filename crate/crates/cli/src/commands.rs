use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use censfit::bias::bias_w;
use censfit::data::{ecdf, filter_distance, load_csv, to_amplitudes, write_csv};
use censfit::lsq::fit::{fit_biased, fit_naive};
use censfit::synth::generate_with_stats;
use censfit::{
    CensoredModel, Censoring, FitMode, FitResult, LinkBias, RicianParams, SynthConfig, Unbiased,
};

use crate::config::RunConfig;
use crate::output::{curve_rows, print_table, write_curve_block, FitEntry, Outputs, Report, REPORT_SCHEMA};

/// A failed command, split by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config, or input data.
    Usage(anyhow::Error),
    /// The numerics could not produce a result.
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Numerical(e) => e,
        }
    }
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn numerical(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn numerical(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Numerical(e.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Naive,
    Biased,
    Both,
}

impl ModeArg {
    fn modes(self) -> &'static [FitMode] {
        match self {
            ModeArg::Naive => &[FitMode::Naive],
            ModeArg::Biased => &[FitMode::Biased],
            ModeArg::Both => &[FitMode::Naive, FitMode::Biased],
        }
    }
}

pub struct FitArgs {
    pub input: PathBuf,
    pub config: Option<PathBuf>,
    pub mode: ModeArg,
    pub output: PathBuf,
    pub curves: Option<PathBuf>,
}

pub fn fit(args: &FitArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref()).usage()?;
    let ds = read_dataset(&args.input)?;
    if ds.reference != cfg.reference() {
        return Err(Failure::Usage(anyhow!(
            "{} declares reference={} but the config calibrates for {} \
             (set or clear calibration.sensitivity_dbm)",
            args.input.display(),
            ds.reference.as_str(),
            cfg.reference().as_str()
        )));
    }
    let windowed = filter_distance(&ds, cfg.window.min_m, cfg.window.max_m)
        .with_context(|| format!("window [{}, {}] m", cfg.window.min_m, cfg.window.max_m))
        .usage()?;
    let (amps, amp_ref) = to_amplitudes(&windowed).usage()?;
    let lb = cfg.link_budget().usage()?;
    let pkt = cfg.packet().usage()?;
    let opts = cfg.lm_options().usage()?;
    let init = cfg.init().usage()?;

    let run = |mode: FitMode| -> censfit::Result<FitResult> {
        match mode {
            FitMode::Naive => fit_naive(&windowed, init, &opts),
            FitMode::Biased => fit_biased(&windowed, &lb, &pkt, init, &opts),
        }
    };
    let results: Vec<censfit::Result<FitResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .mode
            .modes()
            .iter()
            .map(|&m| s.spawn(move || run(m)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fit thread panicked"))
            .collect()
    });
    let mut fits = Vec::new();
    for (mode, r) in args.mode.modes().iter().zip(results) {
        fits.push(r.with_context(|| format!("{} fit", mode.as_str())).numerical()?);
    }

    let sensitivity = cfg.sensitivity();
    let report = Report {
        schema: REPORT_SCHEMA,
        input: args.input.display().to_string(),
        source_tag: windowed.source_tag.clone(),
        reference: windowed.reference.as_str(),
        window_m: [cfg.window.min_m, cfg.window.max_m],
        n_records: ds.len(),
        n_samples: amps.len(),
        amp_ref_db: amp_ref,
        sensitivity_db: sensitivity,
        db_convention: "amplitude dB = 20 log10(amplitude); r_s_dB is relative to amp_ref_db",
        link: lb,
        packet: pkt,
        fits: fits
            .iter()
            .map(|f| FitEntry::new(f, amp_ref, sensitivity))
            .collect(),
    };

    let mut outputs = Outputs::default();
    let mut json = serde_json::to_vec_pretty(&report).usage()?;
    json.push(b'\n');
    outputs.add(&args.output, json);
    if let Some(path) = &args.curves {
        let e = ecdf(&amps).usage()?;
        let mut buf = Vec::new();
        for f in &fits {
            buf.extend_from_slice(format!("# mode={}\n", f.mode.as_str()).as_bytes());
            let rows = match f.mode {
                FitMode::Naive => curve_rows(&e, &model(f.params, Unbiased, amp_ref)?),
                FitMode::Biased => {
                    let bias = LinkBias { link: lb, packet: pkt };
                    curve_rows(&e, &model(f.params, bias, amp_ref)?)
                }
            };
            write_curve_block(&mut buf, &rows).usage()?;
        }
        outputs.add(path, buf);
    }
    outputs.commit().usage()?;
    print_table(&report.fits);
    Ok(())
}

fn model<W: censfit::bias::BiasFunction<f64>>(
    p: RicianParams,
    bias: W,
    amp_ref: f64,
) -> Result<CensoredModel<W>, Failure> {
    CensoredModel::new(p, bias, amp_ref).numerical()
}

fn read_dataset(path: &Path) -> Result<censfit::Dataset, Failure> {
    let file = File::open(path)
        .with_context(|| format!("cannot open input {}", path.display()))
        .usage()?;
    load_csv(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", path.display()))
        .usage()
}

pub struct SimulateArgs {
    pub config: Option<PathBuf>,
    pub n: usize,
    pub seed: u64,
    pub output: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(args.config.as_deref()).usage()?;
    let t = cfg.truth;
    let true_params = RicianParams::from_k_db(t.k_db, t.r_s, t.r_0)
        .context("invalid truth block")
        .usage()?;
    let censoring = if t.censored {
        Censoring::Link(LinkBias {
            link: cfg.link_budget().usage()?,
            packet: cfg.packet().usage()?,
        })
    } else {
        Censoring::None
    };
    let synth = SynthConfig {
        true_params,
        censoring,
        amp_ref_dbm: t.amp_ref_db,
        n_accepted: args.n,
        seed: args.seed,
        reference: cfg.reference(),
    };
    let out = generate_with_stats(&synth)
        .context("invalid truth block")
        .usage()?;
    let mut buf = Vec::new();
    write_csv(&out.dataset, &mut buf).usage()?;
    let mut outputs = Outputs::default();
    outputs.add(&args.output, buf);
    outputs.commit().usage()?;
    println!(
        "wrote {} samples to {} ({} draws, acceptance rate {:.6})",
        out.dataset.len(),
        args.output.display(),
        out.draws,
        out.acceptance_rate()
    );
    Ok(())
}

pub struct BiasCurveArgs {
    pub config: Option<PathBuf>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: f64,
    pub output: PathBuf,
}

/// Default half-width of the RSS range around S.
const CURVE_SPAN_DB: f64 = 20.0;

pub fn bias_curve(args: &BiasCurveArgs) -> Result<(), Failure> {
    if !(args.step > 0.0) || !args.step.is_finite() {
        return Err(Failure::Usage(anyhow!("--step must be positive, got {}", args.step)));
    }
    let cfg = RunConfig::load(args.config.as_deref()).usage()?;
    let s = cfg.sensitivity();
    let from = args.from.unwrap_or(s - CURVE_SPAN_DB);
    let to = args.to.unwrap_or(s + CURVE_SPAN_DB);
    if !(from <= to) || !from.is_finite() || !to.is_finite() {
        return Err(Failure::Usage(anyhow!("empty range: --from {from} --to {to}")));
    }
    let steps = ((to - from) / args.step + 1e-9).floor() as usize;
    if steps >= 10_000_000 {
        return Err(Failure::Usage(anyhow!(
            "range {from}..{to} with step {} is too fine",
            args.step
        )));
    }
    let lb = cfg.link_budget().usage()?;
    let pkt = cfg.packet().usage()?;
    let calib = cfg.calibration_packet().usage()?;

    let mut buf = format!(
        "# calibration: rss_db={s} target_psr={} calib_payload_bytes={} w={}\n",
        cfg.calibration.target_psr,
        calib.payload_bytes(),
        bias_w(s, &lb, &calib)
    )
    .into_bytes();
    buf.extend_from_slice(format!("# payload_bytes={}\n", pkt.payload_bytes()).as_bytes());
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["rss_db", "w"]).usage()?;
        for i in 0..=steps {
            let rss = from + i as f64 * args.step;
            w.write_record([format!("{rss:?}"), format!("{:?}", bias_w(rss, &lb, &pkt))])
                .usage()?;
        }
        w.flush().usage()?;
    }
    let mut outputs = Outputs::default();
    outputs.add(&args.output, buf);
    outputs.commit().usage()?;
    println!("wrote {} rows to {}", steps + 1, args.output.display());
    Ok(())
}
