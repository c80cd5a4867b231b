use censfit::lsq::lm::{levenberg_marquardt, LmOptions, LmReport};

fn strictly_descending(rep: &LmReport<f64>) -> bool {
    rep.cost_history.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn linear_system_in_three_iterations() {
    let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.5, -1.0, 5.0]];
    let want = [1.5, -2.0, 0.25];
    let b: Vec<f64> = a
        .iter()
        .map(|row| row.iter().zip(&want).map(|(r, x)| r * x).sum())
        .collect();
    let residuals = |x: &[f64]| {
        Some(
            a.iter()
                .zip(&b)
                .map(|(row, bi)| row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() - bi)
                .collect(),
        )
    };
    let opts = LmOptions {
        max_iterations: 3,
        ..LmOptions::default()
    };
    let rep = levenberg_marquardt(residuals, &[0.0, 0.0, 0.0], &opts).unwrap();
    assert!(rep.iterations <= 3);
    for (got, w) in rep.x.iter().zip(want) {
        assert!((got - w).abs() < 1e-10, "{:?}", rep.x);
    }
    assert!(strictly_descending(&rep));
}

#[test]
fn exponential_decay_fit() {
    let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = t.iter().map(|&t| 2.0 * (-t).exp()).collect();
    let residuals = |x: &[f64]| {
        Some(
            t.iter()
                .zip(&y)
                .map(|(&t, &y)| y - x[0] * (x[1] * t).exp())
                .collect(),
        )
    };
    let rep = levenberg_marquardt(residuals, &[1.0, 0.0], &LmOptions::default()).unwrap();
    assert!(rep.converged(), "{:?}", rep.termination);
    assert!((rep.x[0] - 2.0).abs() < 1e-6, "{:?}", rep.x);
    assert!((rep.x[1] + 1.0).abs() < 1e-6, "{:?}", rep.x);
    assert!(strictly_descending(&rep));
}

#[test]
fn rosenbrock_valley() {
    let residuals = |x: &[f64]| Some(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
    let rep = levenberg_marquardt(residuals, &[-1.2, 1.0], &LmOptions::default()).unwrap();
    assert!(rep.converged(), "{:?}", rep.termination);
    assert!((rep.x[0] - 1.0).abs() < 1e-6, "{:?}", rep.x);
    assert!((rep.x[1] - 1.0).abs() < 1e-6, "{:?}", rep.x);
    assert!(strictly_descending(&rep));
    assert_eq!(rep.cost_history.len(), rep.cost_history.iter().filter(|c| c.is_finite()).count());
}

#[test]
fn undefined_region_is_avoided() {
    // log residual is undefined for x <= 0; minimum at x = e^-3
    let residuals = |x: &[f64]| (x[0] > 0.0).then(|| vec![x[0].ln() + 3.0, 0.1 * (x[0] - 0.05)]);
    let rep = levenberg_marquardt(residuals, &[2.0], &LmOptions::default()).unwrap();
    assert!(rep.x[0] > 0.0);
    assert!(rep.converged());
    assert!(strictly_descending(&rep));
}

#[test]
fn max_iterations_is_reported() {
    let residuals = |x: &[f64]| Some(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
    let opts = LmOptions {
        max_iterations: 2,
        ..LmOptions::default()
    };
    let rep = levenberg_marquardt(residuals, &[-1.2, 1.0], &opts).unwrap();
    assert_eq!(rep.iterations, 2);
    assert!(!rep.converged());
}
