use censfit::bias::{calibrate_noise_ref, BiasFunction, Censoring, LinkBias, LinkBudget, PacketSpec, Unbiased};
use censfit::censored::CensoredModel;
use censfit::data::{to_amplitudes, Dataset, Reference};
use censfit::lsq::fit::{fit_amplitudes, fit_biased, fit_naive, FitMode};
use censfit::lsq::lm::LmOptions;
use censfit::rician::RicianParams;
use censfit::synth::{generate, SynthConfig};

fn calibrated() -> (LinkBudget<f64>, PacketSpec) {
    let lb = calibrate_noise_ref(0.0, 0.2, &PacketSpec::new(20).unwrap(), &LinkBudget::default())
        .unwrap();
    (lb, PacketSpec::new(50).unwrap())
}

fn link() -> LinkBias<f64> {
    let (link, packet) = calibrated();
    LinkBias { link, packet }
}

fn synth(p: RicianParams<f64>, censoring: Censoring<f64>, amp_ref: f64, n: usize, seed: u64) -> Dataset {
    generate(&SynthConfig {
        true_params: p,
        censoring,
        amp_ref_dbm: amp_ref,
        n_accepted: n,
        seed,
        reference: Reference::RelativeToS,
    })
    .unwrap()
}

/// Generating parameters expressed in the dataset's normalized amplitude units.
fn truth_in_data_units(p: RicianParams<f64>, amp_ref: f64, ds: &Dataset) -> RicianParams<f64> {
    let (_, data_ref) = to_amplitudes(ds).unwrap();
    p.scaled(10f64.powf((amp_ref - data_ref) / 20.0)).unwrap()
}

/// Quantiles `F^-1(i / n)`, `i = 1..=n`, of a model by bisection; a
/// zero-residual sample for the CDF fit.
fn quantiles<W: BiasFunction<f64>>(m: &CensoredModel<f64, W>, n: usize) -> Vec<f64> {
    let (lo, hi) = m.support();
    (1..=n)
        .map(|i| {
            let target = i as f64 / n as f64;
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if m.sample_cdf(mid) < target {
                    a = mid
                } else {
                    b = mid
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn close(a: &RicianParams<f64>, b: &RicianParams<f64>, tol: f64) -> bool {
    (a.k_linear() - b.k_linear()).abs() < tol
        && (a.r_s() - b.r_s()).abs() < tol
        && (a.r_0() - b.r_0()).abs() < tol
}

#[test]
fn noiseless_quantiles_recover_truth() {
    let p = RicianParams::from_k_db(3.0, 1.0, 0.2).unwrap();
    let m = CensoredModel::new(p, Unbiased, 0.0).unwrap();
    let xs = quantiles(&m, 2000);
    let fit = fit_amplitudes(&xs, 0.0, Unbiased, Some(p), &LmOptions::default(), FitMode::Naive)
        .unwrap();
    assert!(fit.converged);
    assert!(close(&fit.params, &p, 1e-3), "{:?}", fit.params);
    assert!(fit.rmse < 1e-3);
}

#[test]
fn censored_quantiles_recover_truth_from_auto_init() {
    let p = RicianParams::from_k_db(3.0, 1.0, 0.5).unwrap();
    let amp_ref = -2.0;
    let m = CensoredModel::new(p, link(), amp_ref).unwrap();
    let z = m.normalization_constant();
    assert!(z > 0.5 && z < 0.7, "Z {z}");
    let xs = quantiles(&m, 2000);
    let opts = LmOptions::default();
    let biased = fit_amplitudes(&xs, amp_ref, link(), None, &opts, FitMode::Biased).unwrap();
    assert!(biased.converged, "{:?}", biased.termination);
    assert!(close(&biased.params, &p, 1e-3), "{:?}", biased.params);

    // ignoring the cut-off misreads the same data
    let naive = fit_amplitudes(&xs, amp_ref, Unbiased, None, &opts, FitMode::Naive).unwrap();
    assert!((naive.params.k_db() - 3.0).abs() > 10.0 * (biased.params.k_db() - 3.0).abs());
    assert!(naive.rmse > 10.0 * biased.rmse);
}

#[test]
fn naive_and_biased_agree_without_censoring() {
    let p = RicianParams::from_k_db(0.0, 1.0, 0.1).unwrap();
    let ds = synth(p, Censoring::None, 0.0, 5000, 8);
    let opts = LmOptions::default();
    let naive = fit_naive(&ds, None, &opts).unwrap();
    // noise reference far below any sample: w == 1 everywhere
    let lb = LinkBudget {
        noise_ref_dbm: -400.0,
        ..LinkBudget::default()
    };
    let biased = fit_biased(&ds, &lb, &PacketSpec::new(50).unwrap(), None, &opts).unwrap();
    assert_eq!(naive.mode, FitMode::Naive);
    assert_eq!(biased.mode, FitMode::Biased);
    assert!(close(&naive.params, &biased.params, 1e-3));
    assert!((naive.rmse - biased.rmse).abs() < 1e-6);
}

#[test]
fn scale_equivariance() {
    let p = RicianParams::from_k_db(0.0, 1.0, 3.0).unwrap();
    let ds = synth(p, Censoring::Link(link()), -8.0, 3000, 21);
    let (amps, amp_ref) = to_amplitudes(&ds).unwrap();
    let opts = LmOptions::default();
    let base = fit_amplitudes(&amps, amp_ref, link(), None, &opts, FitMode::Biased).unwrap();
    assert!(base.converged);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    for &c in &[0.01, 3.7, 250.0] {
        let scaled: Vec<f64> = amps.iter().map(|a| a * c).collect();
        let shifted_ref = amp_ref - 20.0 * c.log10();
        let fit = fit_amplitudes(&scaled, shifted_ref, link(), None, &opts, FitMode::Biased).unwrap();
        assert!(rel(fit.params.k_linear(), base.params.k_linear()) < 1e-6, "c={c}");
        assert!(rel(fit.params.r_s(), c * base.params.r_s()) < 1e-6, "c={c}");
        assert!(rel(fit.params.r_0(), c * base.params.r_0()) < 1e-6, "c={c}");
        assert!((fit.rmse - base.rmse).abs() < 1e-9);
    }
}

#[test]
fn fits_are_deterministic() {
    let p = RicianParams::from_k_db(0.0, 1.0, 3.0).unwrap();
    let ds = synth(p, Censoring::Link(link()), -8.0, 3000, 4);
    let (lb, pkt) = calibrated();
    let opts = LmOptions::default();
    let a = fit_biased(&ds, &lb, &pkt, None, &opts).unwrap();
    let b = fit_biased(&ds, &lb, &pkt, None, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.params.k_linear().to_bits(), b.params.k_linear().to_bits());
    assert_eq!(a.rmse.to_bits(), b.rmse.to_bits());
}

#[test]
fn censored_offset_recovery() {
    // near-Rayleigh, offset well above the spread, about a third censored
    let p = RicianParams::from_k_db(-30.0, 0.35, 20.0).unwrap();
    let amp_ref = -27.0;
    let z = CensoredModel::new(p, link(), amp_ref).unwrap().normalization_constant();
    assert!((0.5..0.7).contains(&z), "Z {z}");
    let ds = synth(p, Censoring::Link(link()), amp_ref, 20_000, 3);
    let truth = truth_in_data_units(p, amp_ref, &ds);
    let (lb, pkt) = calibrated();
    let opts = LmOptions::default();
    let biased = fit_biased(&ds, &lb, &pkt, None, &opts).unwrap();
    let naive = fit_naive(&ds, None, &opts).unwrap();
    let r0_err = |f: &RicianParams<f64>| (20.0 * (f.r_0() / truth.r_0()).abs().log10()).abs();
    assert!(r0_err(&biased.params) < 0.5, "{:?}", biased.params);
    assert!(r0_err(&naive.params) > r0_err(&biased.params));
    assert!(biased.rmse <= 0.6 * naive.rmse, "{} vs {}", biased.rmse, naive.rmse);
}
