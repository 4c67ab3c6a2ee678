use approx::assert_relative_eq;
use grandlp::{ConvexWeight, ExponentInterval, PsiFunction, PsiSpec, SlowlyVarying};
use proptest::prelude::*;

fn pl(a: f64, b: f64, gamma: f64, delta: f64) -> PsiFunction {
    PsiFunction::power_log(a, b, gamma, delta, SlowlyVarying::Unit).unwrap()
}

// Brute-force infimum over a fine grid of the free conjugate variable.
fn grid_min<F: Fn(f64) -> Option<f64>>(lo: f64, hi: f64, f: F) -> f64 {
    (1..20_000)
        .map(|k| lo + (hi - lo) * k as f64 / 20_000.0)
        .filter_map(f)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn power_log_closed_form() {
    let psi = pl(1.5, 4.0, 0.5, 2.0);
    for p in [1.6, 2.0, 3.0, 3.9] {
        let v: f64 = (p - 1.5f64).powf(-0.5) * (4.0 - p as f64).powf(-2.0);
        assert_relative_eq!(psi.eval(p).unwrap(), v, max_relative = 1e-14);
    }
    assert!(psi.eval(1.5).is_err());
    assert!(psi.eval(4.5).is_err());
}

#[test]
fn mult_inf_matches_brute_force() {
    let (l, r) = (pl(2.0, 6.0, 1.0, 1.0), pl(3.0, 8.0, 0.5, 1.5));
    let psi = PsiFunction::mult_inf(&l, &r).unwrap();
    let d = psi.domain();
    assert_relative_eq!(d.a, 1.2, max_relative = 1e-14);
    assert_relative_eq!(d.b, 48.0 / 14.0, max_relative = 1e-14);
    for rr in [1.5, 2.0, 3.0] {
        let brute = grid_min(0.0, 1.0, |u| {
            let (p, q) = (1.0 / u, 1.0 / (1.0 - u));
            Some(l.eval(p * rr).ok()? * r.eval(q * rr).ok()?)
        });
        let v = psi.eval(rr).unwrap();
        assert!(v <= brute * (1.0 + 1e-9));
        assert_relative_eq!(v, brute, max_relative = 1e-4);
    }
}

#[test]
fn conv_inf_matches_brute_force() {
    let (l, r) = (pl(1.1, 1.6, 1.0, 1.0), pl(1.2, 1.8, 0.5, 0.5));
    let psi = PsiFunction::conv_inf(&l, &r).unwrap();
    let d = psi.domain();
    assert_relative_eq!(1.0 / d.a, 1.0 / 1.1 + 1.0 / 1.2 - 1.0, max_relative = 1e-14);
    assert_relative_eq!(1.0 / d.b, 1.0 / 1.6 + 1.0 / 1.8 - 1.0, max_relative = 1e-14);
    let mid = 0.5 * (d.a + d.b);
    let total = 1.0 + 1.0 / mid;
    let brute = grid_min(0.0, 1.0, |u| l.eval(1.0 / u).ok().zip(r.eval(1.0 / (total - u)).ok()).map(|(x, y)| x * y));
    assert_relative_eq!(psi.eval(mid).unwrap(), brute, max_relative = 1e-4);
}

#[test]
fn conv_inf_rejects_large_exponents() {
    let err = PsiFunction::conv_inf(&pl(1.5, 4.0, 1.0, 1.0), &pl(1.5, 4.0, 1.0, 1.0)).unwrap_err();
    assert_eq!(err.name(), "RejectedInput");
}

#[test]
fn sobolev_domain() {
    let nu = PsiFunction::sobolev_nu(&pl(1.2, 2.4, 1.0, 1.0), 3, 3).unwrap();
    assert_relative_eq!(nu.domain().a, 2.0, max_relative = 1e-14);
    assert_relative_eq!(nu.domain().b, 12.0, max_relative = 1e-14);
    let q = 5.0;
    let inner = pl(1.2, 2.4, 1.0, 1.0).eval(q * 3.0 / (q + 3.0)).unwrap();
    assert_relative_eq!(nu.eval(q).unwrap(), q.powf(2.0 / 3.0) * inner, max_relative = 1e-14);
    assert!(PsiFunction::sobolev_nu(&pl(1.2, 3.0, 1.0, 1.0), 3, 3).is_err());
}

#[test]
fn young_fenchel_quadratic() {
    // W(z) = z^2 / 2 on [2, inf) has W*(p) = p^2 / 2 for p >= 2.
    let w = ConvexWeight::Power { coef: 0.5, exponent: 2.0 };
    let psi = PsiFunction::young_fenchel(w, 2.0, 10.0).unwrap();
    for p in [2.5, 4.0, 9.0] {
        assert_relative_eq!(psi.eval(p).unwrap(), (p / 2.0).exp(), max_relative = 1e-8);
    }
}

#[test]
fn psi_document_round_trip() {
    let psi = PsiFunction::conv_inf(&pl(1.1, 1.6, 1.0, 1.0), &pl(1.2, 1.8, 0.5, 0.5)).unwrap();
    let spec = PsiSpec::from(&psi);
    let json = serde_json::to_string(&spec).unwrap();
    let back = PsiFunction::try_from(serde_json::from_str::<PsiSpec>(&json).unwrap()).unwrap();
    assert_eq!(back.eval(1.5).unwrap(), psi.eval(1.5).unwrap());
}

#[test]
fn tabulated_reproduces_nodes() {
    let d = ExponentInterval::new(1.0, 3.0).unwrap();
    let p = vec![1.2, 1.6, 2.0, 2.4, 2.8];
    let v: Vec<f64> = p.iter().map(|x: &f64| 1.0 / ((x - 1.0) * (3.0 - x))).collect();
    let psi = PsiFunction::tabulated(d, p.clone(), v.clone()).unwrap();
    for (x, y) in p.iter().zip(&v) {
        assert_relative_eq!(psi.eval(*x).unwrap(), *y, max_relative = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_scale_identity(a in 1.0f64..3.0, w in 0.5f64..4.0, t in 0.0f64..1.0, u in 0.05f64..0.95) {
        let psi = pl(a, a + w, 1.0, 0.5);
        let gamma = a + t * w;
        let scaled = PsiFunction::power_scale(&psi, gamma).unwrap();
        let d = scaled.domain();
        let p = d.a + u * (d.b - d.a);
        let expected = psi.eval(gamma * p).unwrap().powf(gamma);
        prop_assert!((scaled.eval(p).unwrap() / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_is_pointwise(u in 0.05f64..0.95) {
        let (l, r) = (pl(1.0, 4.0, 1.0, 0.0), pl(2.0, 5.0, 0.0, 2.0));
        let psi = PsiFunction::product(&l, &r).unwrap();
        let p = 2.0 + 2.0 * u;
        prop_assert_eq!(psi.eval(p).unwrap(), l.eval(p).unwrap() * r.eval(p).unwrap());
    }
}
