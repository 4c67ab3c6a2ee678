use approx::assert_relative_eq;
use grandlp::verify::{
    fit_endpoint_exponent, fit_window, run_suite, sharpness_convolution, sharpness_sobolev_gap, CheckSpec, Side,
    SuiteConfig,
};

#[test]
fn fit_recovers_power() {
    let pts: Vec<(f64, f64)> = fit_window(1e-4, 1e-1, 11).into_iter().map(|d| (2.0 - d, 3.0 * d.powf(-0.7))).collect();
    let fit = fit_endpoint_exponent(&pts, 2.0).unwrap();
    assert_eq!(fit.endpoint, Side::Upper);
    assert_relative_eq!(fit.exponent, -0.7, epsilon = 1e-10);
    assert_relative_eq!(fit.intercept.exp(), 3.0, max_relative = 1e-9);
}

#[test]
fn fit_rejects_thin_windows() {
    let few: Vec<(f64, f64)> = fit_window(1e-4, 1e-1, 5).into_iter().map(|d| (d, d)).collect();
    assert_eq!(fit_endpoint_exponent(&few, 0.0).unwrap_err().name(), "InsufficientData");
    let narrow: Vec<(f64, f64)> = fit_window(1e-2, 5e-2, 11).into_iter().map(|d| (d, d)).collect();
    assert!(fit_endpoint_exponent(&narrow, 0.0).is_err());
}

#[test]
fn sobolev_gap_is_one_over_n() {
    let g = sharpness_sobolev_gap(3, 3, 1.2, 2.4).unwrap();
    assert!(g.pass);
    assert!((g.lower.gap - 1.0 / 3.0).abs() < 0.05);
    assert!((g.upper.gap - 1.0 / 3.0).abs() < 0.05);
    assert_eq!(sharpness_sobolev_gap(3, 1, 1.2, 2.4).unwrap_err().name(), "Unsupported");
}

#[test]
fn convolution_endpoint_rate() {
    let c = sharpness_convolution(4.0 / 3.0, 4.0 / 3.0, 0.0, 0.0).unwrap();
    assert!(c.pass);
    assert!((c.t_fit.unwrap().exponent + 0.5).abs() < 0.05);
    assert!((c.beta_ratio.unwrap() - 1.0).abs() < 0.02);
    assert!(sharpness_convolution(4.0, 4.0, 0.0, 0.0).is_err());
}

#[test]
fn suite_is_deterministic() {
    let config: SuiteConfig = serde_json::from_str(
        r#"{"seed": 3, "checks": [{"kind": "young_constant", "samples": 500}, {"kind": "dilation"}, {"kind": "boyd"}]}"#,
    )
    .unwrap();
    assert!(matches!(config.checks[0], CheckSpec::YoungConstant(_)));
    let a = run_suite(&config);
    let b = run_suite(&config);
    assert!(a.pass);
    assert_eq!(a.to_json(), b.to_json());
    let other = run_suite(&SuiteConfig { seed: 4, ..config });
    assert_ne!(a.to_json(), other.to_json());
}
