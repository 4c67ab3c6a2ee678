use approx::assert_relative_eq;
use grandlp::measure::{RadialFunction, WeightedSpace};
use grandlp::operators::{product_check, tensor_check, young_constant, YoungTriple};
use grandlp::{PsiFunction, SlowlyVarying};
use proptest::prelude::*;

fn pl(a: f64, b: f64, gamma: f64, delta: f64) -> PsiFunction {
    PsiFunction::power_log(a, b, gamma, delta, SlowlyVarying::Unit).unwrap()
}

#[test]
fn beckner_constant_at_four_thirds() {
    assert_relative_eq!(young_constant(4.0 / 3.0, 4.0 / 3.0, 1).unwrap(), 2.0 * 3f64.powf(-0.75), max_relative = 1e-13);
    assert_relative_eq!(young_constant(4.0 / 3.0, 4.0 / 3.0, 3).unwrap(), (2.0 * 3f64.powf(-0.75)).powi(3), max_relative = 1e-12);
    assert_relative_eq!(young_constant(1.2, 1.7, 2).unwrap(), young_constant(1.7, 1.2, 2).unwrap(), max_relative = 1e-13);
}

#[test]
fn young_triple_rejects_bad_pairs() {
    assert!(YoungTriple::new(2.5, 2.5).is_err());
    assert!(YoungTriple::new(0.5, 2.0).is_err());
}

#[test]
fn tensor_of_indicators() {
    let f = RadialFunction::indicator(0.0, 2.0);
    let g = RadialFunction::inner_power_log(5.0, 0.0, SlowlyVarying::Unit);
    let rep = tensor_check(&f, &WeightedSpace::half_line(), &pl(1.0, 3.0, 1.0, 1.0), &g, &WeightedSpace::euclidean(2), &pl(1.5, 4.0, 0.5, 1.0)).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn product_of_power_pieces() {
    let space = WeightedSpace::euclidean(1);
    let f = RadialFunction::inner_power_log(6.0, 0.0, SlowlyVarying::Unit);
    let g = RadialFunction::indicator(0.0, 3.0);
    let rep = product_check(&f, &pl(2.0, 6.0, 1.0, 1.0), &g, &pl(2.0, 8.0, 1.0, 1.0), &space).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.ratio <= 1.0 + 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn young_constant_at_most_one(u in 0.0f64..1.0, v in 0.0f64..1.0, n in 1u32..4) {
        // 1/p + 1/q >= 1 with p, q >= 1.
        let ip = 0.5 + 0.5 * u;
        let iq = (1.0 - ip) + v * ip;
        let c = young_constant(1.0 / ip, 1.0 / iq, n).unwrap();
        prop_assert!(c > 0.0 && c <= 1.0 + 1e-12);
    }

    #[test]
    fn triple_residual_vanishes(ip in 0.5f64..1.0, t in 0.0f64..1.0) {
        let iq = (1.0 - ip) + t * ip;
        let y = YoungTriple::new(1.0 / ip, 1.0 / iq).unwrap();
        prop_assert!(y.residual().abs() < 1e-12);
    }
}
