use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    fit_window, representation, sharpness_convolution, sharpness_convolution_outer, sharpness_gamma,
    sharpness_sobolev_gap, two_sided, AsymptoticFit, GammaFamily, Side,
};
use crate::error::{rejected, Error, Result};
use crate::gnorm::{boyd_indices_numeric, dilation_norm_numeric, fundamental_phi};
use crate::measure::{Piece, RadialFunction, Region, WeightedSpace};
use crate::operators::{noncompact_experiment, CircleFunction};
use crate::operators::{
    convolution_check, power_identity, product_check, sobolev_check, tensor_check, young_constant, InequalityReport,
    SobolevConfig, YoungTriple,
};
use crate::psi::{ExponentInterval, PsiFunction, SlowlyVarying};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DilationCheck {
    pub a: f64,
    pub b: f64,
    pub k_max: u32,
}

impl Default for DilationCheck {
    fn default() -> Self {
        Self { a: 2.0, b: 4.0, k_max: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoydCase {
    pub a: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default)]
    pub sigma: f64,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoydCheck {
    pub cases: Vec<BoydCase>,
}

impl Default for BoydCheck {
    fn default() -> Self {
        let case = |a, b, n, sigma| BoydCase { a, b, n, sigma };
        Self {
            cases: vec![case(2.0, 4.0, 1, 0.0), case(1.5, 3.0, 1, 0.0), case(3.0, 6.0, 1, 0.0), case(2.0, 4.0, 2, 1.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhiCheck {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub delta_exponent: f64,
    pub delta: f64,
}

impl Default for PhiCheck {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 2.0,
            gamma: 0.0,
            delta_exponent: 0.1,
            delta: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaOracleCheck {
    pub pieces: usize,
    pub points: usize,
}

impl Default for GammaOracleCheck {
    fn default() -> Self {
        Self { pieces: 10, points: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaCheck {
    pub n: u32,
    pub sigma: f64,
    pub a: f64,
    pub gamma: f64,
    #[serde(rename = "L")]
    pub slowly: SlowlyVarying,
}

impl Default for GammaCheck {
    fn default() -> Self {
        Self {
            n: 1,
            sigma: 0.0,
            a: 1.0,
            gamma: 1.0,
            slowly: SlowlyVarying::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Battery {
    pub instances: usize,
}

impl Default for Battery {
    fn default() -> Self {
        Self { instances: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvolutionBattery {
    pub instances: usize,
    /// Fixed exponents instead of random ones.
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
}

impl Default for ConvolutionBattery {
    fn default() -> Self {
        Self {
            instances: 20,
            a1: None,
            a2: None,
            b1: None,
            b2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct YoungCheck {
    pub samples: usize,
}

impl Default for YoungCheck {
    fn default() -> Self {
        Self { samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvolutionSharpnessCheck {
    pub b1: f64,
    pub b2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Default for ConvolutionSharpnessCheck {
    fn default() -> Self {
        Self {
            b1: 4.0 / 3.0,
            b2: 4.0 / 3.0,
            g1: 0.0,
            g2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvolutionOuterCheck {
    pub a1: f64,
    pub a2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Default for ConvolutionOuterCheck {
    fn default() -> Self {
        Self {
            a1: 1.5,
            a2: 1.5,
            g1: 0.0,
            g2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SobolevGapCheck {
    pub n: u32,
    pub m: u32,
    pub a: f64,
    pub b: f64,
}

impl Default for SobolevGapCheck {
    fn default() -> Self {
        Self {
            n: 3,
            m: 3,
            a: 1.2,
            b: 2.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoncompactCheck {
    pub b: f64,
    pub eps0: f64,
    pub ks: Vec<usize>,
}

impl Default for NoncompactCheck {
    fn default() -> Self {
        Self {
            b: 2.0,
            eps0: 0.5,
            ks: vec![8, 32, 128],
        }
    }
}

/// One configured check; `kind` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckSpec {
    Dilation(DilationCheck),
    Boyd(BoydCheck),
    PhiIndex(PhiCheck),
    GammaOracle(GammaOracleCheck),
    GammaSharpness(GammaCheck),
    Tensor(Battery),
    Product(Battery),
    Power(Battery),
    Sobolev(Battery),
    Convolution(ConvolutionBattery),
    YoungConstant(YoungCheck),
    ConvolutionSharpness(ConvolutionSharpnessCheck),
    ConvolutionSharpnessOuter(ConvolutionOuterCheck),
    SobolevGap(SobolevGapCheck),
    Noncompact(NoncompactCheck),
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::Dilation(_) => "dilation",
            CheckSpec::Boyd(_) => "boyd",
            CheckSpec::PhiIndex(_) => "phi_index",
            CheckSpec::GammaOracle(_) => "gamma_oracle",
            CheckSpec::GammaSharpness(_) => "gamma_sharpness",
            CheckSpec::Tensor(_) => "tensor",
            CheckSpec::Product(_) => "product",
            CheckSpec::Power(_) => "power",
            CheckSpec::Sobolev(_) => "sobolev",
            CheckSpec::Convolution(_) => "convolution",
            CheckSpec::YoungConstant(_) => "young_constant",
            CheckSpec::ConvolutionSharpness(_) => "convolution_sharpness",
            CheckSpec::ConvolutionSharpnessOuter(_) => "convolution_sharpness_outer",
            CheckSpec::SobolevGap(_) => "sobolev_gap",
            CheckSpec::Noncompact(_) => "noncompact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

impl Default for SuiteConfig {
    /// Every check at its default parameters, seed 1.
    fn default() -> Self {
        Self {
            seed: 1,
            checks: vec![
                CheckSpec::Dilation(Default::default()),
                CheckSpec::Boyd(Default::default()),
                CheckSpec::PhiIndex(Default::default()),
                CheckSpec::GammaOracle(Default::default()),
                CheckSpec::GammaSharpness(Default::default()),
                CheckSpec::GammaSharpness(GammaCheck {
                    slowly: SlowlyVarying::LogPower { theta: 0.5 },
                    ..Default::default()
                }),
                CheckSpec::Tensor(Default::default()),
                CheckSpec::Product(Default::default()),
                CheckSpec::Power(Default::default()),
                CheckSpec::Sobolev(Default::default()),
                CheckSpec::Convolution(Default::default()),
                CheckSpec::YoungConstant(Default::default()),
                CheckSpec::ConvolutionSharpness(Default::default()),
                CheckSpec::ConvolutionSharpnessOuter(Default::default()),
                CheckSpec::SobolevGap(Default::default()),
                CheckSpec::Noncompact(Default::default()),
            ],
        }
    }
}

/// A CSV row: abscissa, measured value, model or reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub p_or_t: f64,
    pub value: f64,
    pub model_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub name: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self {
            name: e.name().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub index: usize,
    pub kind: String,
    pub params: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    #[serde(skip)]
    pub series: Vec<SeriesRow>,
    /// Wall time in seconds; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl SuiteEntry {
    /// File name of the entry's CSV.
    pub fn csv_name(&self) -> String {
        format!("{:02}_{}.csv", self.index, self.kind)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("p_or_t,value,model_value\n");
        for r in &self.series {
            out.push_str(&format!("{:e},{:e},{:e}\n", r.p_or_t, r.value, r.model_value));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn entry(&self, kind: &str) -> Option<&SuiteEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }

    pub fn total_seconds(&self) -> f64 {
        self.entries.iter().map(|e| e.seconds).sum()
    }
}

struct Outcome {
    pass: bool,
    result: Value,
    series: Vec<SeriesRow>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn entry_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs every configured check; errors are recorded per entry.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let entries: Vec<SuiteEntry> = config
        .checks
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let start = Instant::now();
            let mut rng = entry_rng(config.seed, index);
            let out = run_check(spec, &mut rng);
            let seconds = start.elapsed().as_secs_f64();
            let params = to_value(spec);
            let kind = spec.kind().to_string();
            match out {
                Ok(o) => SuiteEntry {
                    index,
                    kind,
                    params,
                    pass: o.pass,
                    result: Some(o.result),
                    error: None,
                    series: o.series,
                    seconds,
                },
                Err(e) => SuiteEntry {
                    index,
                    kind,
                    params,
                    pass: false,
                    result: None,
                    error: Some((&e).into()),
                    series: Vec::new(),
                    seconds,
                },
            }
        })
        .collect();
    SuiteReport {
        seed: config.seed,
        pass: entries.iter().all(|e| e.pass),
        entries,
    }
}

fn run_check(spec: &CheckSpec, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    match spec {
        CheckSpec::Dilation(c) => dilation(c),
        CheckSpec::Boyd(c) => boyd(c),
        CheckSpec::PhiIndex(c) => phi_index(c),
        CheckSpec::GammaOracle(c) => gamma_oracle(c, rng),
        CheckSpec::GammaSharpness(c) => gamma_sharpness(c),
        CheckSpec::Tensor(c) => tensor(c, rng),
        CheckSpec::Product(c) => battery(c, rng, product_instance),
        CheckSpec::Power(c) => battery(c, rng, power_instance),
        CheckSpec::Sobolev(c) => battery(c, rng, sobolev_instance),
        CheckSpec::Convolution(c) => convolution(c, rng),
        CheckSpec::YoungConstant(c) => young(c, rng),
        CheckSpec::ConvolutionSharpness(c) => {
            let r = sharpness_convolution(c.b1, c.b2, c.g1, c.g2)?;
            let mut series = r.t_fit.as_ref().map(|f| fit_rows(f)).unwrap_or_default();
            series.extend(fit_rows(&r.p_fit));
            Ok(Outcome {
                pass: r.pass,
                result: to_value(&r),
                series,
            })
        }
        CheckSpec::ConvolutionSharpnessOuter(c) => {
            let r = sharpness_convolution_outer(c.a1, c.a2, c.g1, c.g2)?;
            Ok(Outcome {
                pass: r.pass,
                series: fit_rows(&r.p_fit),
                result: to_value(&r),
            })
        }
        CheckSpec::SobolevGap(c) => {
            let r = sharpness_sobolev_gap(c.n, c.m, c.a, c.b)?;
            let mut series = fit_rows(&r.lower.fit);
            series.extend(fit_rows(&r.upper.fit));
            Ok(Outcome {
                pass: r.pass,
                result: to_value(&r),
                series,
            })
        }
        CheckSpec::Noncompact(c) => noncompact(c),
    }
}

fn fit_rows(fit: &AsymptoticFit) -> Vec<SeriesRow> {
    let sign = if fit.endpoint == Side::Lower { 1.0 } else { -1.0 };
    fit.window
        .iter()
        .enumerate()
        .map(|(i, &d)| SeriesRow {
            p_or_t: fit.at + sign * d,
            value: fit.values[i],
            model_value: fit.model(d),
        })
        .collect()
}

fn dilation(c: &DilationCheck) -> Result<Outcome> {
    let space = WeightedSpace::euclidean(1);
    let f = two_sided(&space, c.a, c.b, 0.0, 0.0);
    let psi = representation(&f, &space, c.a, c.b)?;
    let mut series = Vec::new();
    let mut worst = 0.0f64;
    for k in 1..=c.k_max as i32 {
        for s in [2f64.powi(-k), 2f64.powi(k)] {
            let measured = dilation_norm_numeric(&f, &psi, &space, s)?;
            let model = s.powf(1.0 / c.a).max(s.powf(1.0 / c.b));
            worst = worst.max((measured / model - 1.0).abs());
            series.push(SeriesRow {
                p_or_t: s,
                value: measured,
                model_value: model,
            });
        }
    }
    Ok(Outcome {
        pass: worst <= 0.01,
        result: json!({"max_relative_error": worst, "points": series.len()}),
        series,
    })
}

fn boyd(c: &BoydCheck) -> Result<Outcome> {
    let mut cases = Vec::new();
    let mut pass = !c.cases.is_empty();
    for case in &c.cases {
        let space = WeightedSpace::new(case.n, case.sigma)?;
        let f = two_sided(&space, case.a, case.b, 0.0, 0.0);
        let psi = representation(&f, &space, case.a, case.b)?;
        let est = boyd_indices_numeric(&f, &psi, &space)?;
        let d = space.dim();
        let (e1, e2) = (d / case.b, d / case.a);
        let ok = (est.gamma1 - e1).abs() <= 0.02 && (est.gamma2 - e2).abs() <= 0.02;
        pass &= ok;
        cases.push(json!({
            "case": case,
            "estimate": est,
            "expected": {"gamma1": e1, "gamma2": e2},
            "pass": ok,
        }));
    }
    Ok(Outcome {
        pass,
        result: json!({ "cases": cases }),
        series: Vec::new(),
    })
}

fn phi_index(c: &PhiCheck) -> Result<Outcome> {
    let psi = PsiFunction::power_log(c.a, c.b, c.gamma, c.delta_exponent, SlowlyVarying::Unit)?;
    let lo = fundamental_phi(&psi, c.delta)?;
    let hi = fundamental_phi(&psi, 2.0 * c.delta)?;
    let ratio = hi / lo;
    let expected = 2f64.powf(1.0 / c.b);
    let rel = (ratio / expected - 1.0).abs();
    Ok(Outcome {
        pass: rel <= 0.01,
        result: json!({"phi_delta": lo, "phi_2delta": hi, "ratio": ratio, "expected": expected, "relative_error": rel}),
        series: vec![SeriesRow {
            p_or_t: c.delta,
            value: ratio,
            model_value: expected,
        }],
    })
}

fn random_space(rng: &mut ChaCha8Rng) -> Result<WeightedSpace> {
    let n = rng.gen_range(1..=3);
    let sigma = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
    WeightedSpace::new(n, sigma)
}

fn gamma_oracle(c: &GammaOracleCheck, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut series = Vec::new();
    let mut pieces = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..c.pieces {
        let space = random_space(rng)?;
        let outer = rng.gen_bool(0.5);
        let a = rng.gen_range(1.0..4.0);
        let alpha = rng.gen_range(0.0..2.0);
        let region = if outer { Region::Outer } else { Region::Inner };
        let f = RadialFunction::single(Piece::new(region, -1.0 / a, alpha));
        let crit = a * space.dim();
        let ps: Vec<f64> = if outer {
            fit_window(0.01, 5.0, c.points).into_iter().map(|d| crit + d).collect()
        } else {
            fit_window(0.01, crit - 0.2, c.points).into_iter().map(|d| crit - d).collect()
        };
        let mut piece_worst = 0.0f64;
        for p in ps {
            let quad = f.lp_norm_quadrature(&space, p)?.value;
            let exact = f.lp_norm_exact(&space, p)?.value;
            piece_worst = piece_worst.max((quad / exact - 1.0).abs());
            series.push(SeriesRow {
                p_or_t: p,
                value: quad,
                model_value: exact,
            });
        }
        worst = worst.max(piece_worst);
        pieces.push(json!({
            "n": space.n, "sigma": space.sigma, "outer": outer, "a": a, "alpha": alpha,
            "critical": crit, "max_relative_error": piece_worst,
        }));
    }
    Ok(Outcome {
        pass: worst <= 1e-7,
        result: json!({"max_relative_error": worst, "pieces": pieces}),
        series,
    })
}

fn gamma_sharpness(c: &GammaCheck) -> Result<Outcome> {
    let fam = GammaFamily {
        n: c.n,
        sigma: c.sigma,
        a: c.a,
        gamma: c.gamma,
        slowly: c.slowly,
    };
    let r = sharpness_gamma(&fam)?;
    let series = r
        .trace
        .iter()
        .map(|t| SeriesRow {
            p_or_t: t.p,
            value: t.quadrature,
            model_value: t.model,
        })
        .collect();
    Ok(Outcome {
        pass: r.pass,
        result: to_value(&r),
        series,
    })
}

struct Instance {
    params: Value,
    report: Result<InequalityReport>,
}

fn summarize(instances: Vec<Instance>, extra: Value, extra_pass: bool) -> Outcome {
    let passed = instances.iter().filter(|i| matches!(&i.report, Ok(r) if r.pass)).count();
    let ratios: Vec<f64> = instances.iter().filter_map(|i| i.report.as_ref().ok().map(|r| r.ratio)).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NAN, f64::max);
    let series = instances
        .iter()
        .filter_map(|i| i.report.as_ref().ok())
        .map(|r| SeriesRow {
            p_or_t: r.grid.get("p_star").and_then(Value::as_f64).unwrap_or(f64::NAN),
            value: r.lhs,
            model_value: r.rhs,
        })
        .collect();
    let reports: Vec<Value> = instances
        .iter()
        .map(|i| match &i.report {
            Ok(r) => json!({"params": i.params, "report": r}),
            Err(e) => json!({"params": i.params, "error": ErrorRecord::from(e)}),
        })
        .collect();
    let total = instances.len();
    Outcome {
        pass: total > 0 && passed == total && extra_pass,
        result: json!({
            "instances": total,
            "passed": passed,
            "max_ratio": max_ratio,
            "extra": extra,
            "reports": reports,
        }),
        series,
    }
}

// Parameters are drawn sequentially so results do not depend on scheduling.
fn battery<P, F>(c: &Battery, rng: &mut ChaCha8Rng, make: F) -> Result<Outcome>
where
    F: Fn(&mut ChaCha8Rng) -> P,
    P: FnOnce() -> Instance + Send,
{
    let jobs: Vec<P> = (0..c.instances).map(|_| make(rng)).collect();
    let instances = jobs.into_par_iter().map(|j| j()).collect();
    Ok(summarize(instances, Value::Null, true))
}

fn power_log(a: f64, b: f64, alpha: f64, beta: f64) -> Result<PsiFunction> {
    PsiFunction::power_log(a, b, alpha + 1.0 / a, beta + 1.0 / b, SlowlyVarying::Unit)
}

struct TwoSided {
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
}

impl TwoSided {
    fn draw(rng: &mut ChaCha8Rng, a: (f64, f64), b: (f64, f64), logs: f64) -> Self {
        Self {
            a: rng.gen_range(a.0..a.1),
            b: rng.gen_range(b.0..b.1),
            alpha: rng.gen_range(0.0..logs),
            beta: rng.gen_range(0.0..logs),
        }
    }

    fn f(&self, space: &WeightedSpace) -> RadialFunction {
        two_sided(space, self.a, self.b, self.alpha, self.beta)
    }

    fn psi(&self) -> Result<PsiFunction> {
        power_log(self.a, self.b, self.alpha, self.beta)
    }

    fn json(&self) -> Value {
        json!({"a": self.a, "b": self.b, "alpha": self.alpha, "beta": self.beta})
    }
}

fn tensor(c: &Battery, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut jobs = Vec::new();
    for _ in 0..c.instances {
        let x1 = random_space(rng)?;
        let x2 = random_space(rng)?;
        let f = TwoSided::draw(rng, (1.0, 2.5), (3.0, 6.0), 1.0);
        let g = TwoSided::draw(rng, (1.0, 2.5), (3.0, 6.0), 1.0);
        jobs.push((x1, x2, f, g));
    }
    let instances: Vec<Instance> = jobs
        .into_par_iter()
        .map(|(x1, x2, f, g)| Instance {
            params: json!({"x1": x1, "x2": x2, "f": f.json(), "g": g.json()}),
            report: (|| tensor_check(&f.f(&x1), &x1, &f.psi()?, &g.f(&x2), &x2, &g.psi()?))(),
        })
        .collect();

    let space = WeightedSpace::euclidean(1);
    let f = two_sided(&space, 1.5, 4.0, 0.0, 0.0);
    let g = two_sided(&space, 1.0, 5.0, 0.5, 0.0);
    let rep = tensor_check(&f, &space, &representation(&f, &space, 1.5, 4.0)?, &g, &space, &representation(&g, &space, 1.0, 5.0)?)?;
    let sharp = (rep.ratio - 1.0).abs() <= 1e-6;
    Ok(summarize(
        instances,
        json!({"representation_ratio": rep.ratio, "representation_sharp": sharp}),
        sharp,
    ))
}

fn product_instance(rng: &mut ChaCha8Rng) -> impl FnOnce() -> Instance + Send {
    let space = WeightedSpace::euclidean(rng.gen_range(1..=2));
    let f = TwoSided::draw(rng, (1.5, 3.0), (4.0, 8.0), 1.0);
    let g = TwoSided::draw(rng, (1.5, 3.0), (4.0, 8.0), 1.0);
    move || Instance {
        params: json!({"space": space, "f": f.json(), "g": g.json()}),
        report: (|| product_check(&f.f(&space), &f.psi()?, &g.f(&space), &g.psi()?, &space))(),
    }
}

fn power_instance(rng: &mut ChaCha8Rng) -> impl FnOnce() -> Instance + Send {
    let space = WeightedSpace::euclidean(rng.gen_range(1..=2));
    let f = TwoSided::draw(rng, (1.5, 3.0), (4.0, 8.0), 1.0);
    let gamma = rng.gen_range(f.a..f.b);
    move || Instance {
        params: json!({"space": space, "f": f.json(), "gamma": gamma}),
        report: (|| power_identity(&f.f(&space), &f.psi()?, &space, gamma))(),
    }
}

fn sobolev_instance(rng: &mut ChaCha8Rng) -> impl FnOnce() -> Instance + Send {
    let n = 3u32;
    let m = rng.gen_range(1..=3u32);
    let a = rng.gen_range(1.1..1.4);
    let b = rng.gen_range(2.0..2.6);
    let a_u = rng.gen_range((a - 0.1f64).max(1.0)..=a);
    let b_u = rng.gen_range(b..=(b + 0.3f64).min(2.9));
    let alpha = 1.0 / a + rng.gen_range(0.0..0.5);
    let beta = 1.0 / b + rng.gen_range(0.0..0.5);
    move || Instance {
        params: json!({"n": n, "m": m, "a": a, "b": b, "alpha": alpha, "beta": beta, "profile_a": a_u, "profile_b": b_u}),
        report: (|| {
            let cfg = SobolevConfig::new(n, m, a, b)?;
            let psi = PsiFunction::power_log(a, b, alpha, beta, SlowlyVarying::Unit)?;
            sobolev_check(&super::sobolev_profile(n, a_u, b_u), &psi, &cfg)
        })(),
    }
}

fn convolution(c: &ConvolutionBattery, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    for (x, y, name) in [(c.a1, c.a2, "a"), (c.b1, c.b2, "b")] {
        if let (Some(x), Some(y)) = (x, y) {
            let s = 1.0 / x + 1.0 / y - 1.0;
            if !(s > 0.0) {
                return Err(rejected(format!(
                    "Young condition fails for {name}1 = {x}, {name}2 = {y}: 1/(1/{x} + 1/{y} - 1) = {} is not a valid exponent",
                    1.0 / s
                )));
            }
        }
    }
    let mut jobs = Vec::new();
    for _ in 0..c.instances {
        let mut f = TwoSided::draw(rng, (1.05, 1.3), (1.5, 1.9), 0.3);
        let mut g = TwoSided::draw(rng, (1.05, 1.3), (1.5, 1.9), 0.3);
        f.a = c.a1.unwrap_or(f.a);
        g.a = c.a2.unwrap_or(g.a);
        f.b = c.b1.unwrap_or(f.b);
        g.b = c.b2.unwrap_or(g.b);
        jobs.push((f, g));
    }
    let line = WeightedSpace::euclidean(1);
    let instances = jobs
        .into_par_iter()
        .map(|(f, g)| Instance {
            params: json!({"f": f.json(), "g": g.json()}),
            report: (|| convolution_check(&f.f(&line), &f.psi()?, &g.f(&line), &g.psi()?, None))(),
        })
        .collect();
    Ok(summarize(instances, Value::Null, true))
}

fn young(c: &YoungCheck, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    let mut drawn = 0;
    while drawn < c.samples {
        let (u, v): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if !(u > 0.0 && v > 0.0 && u + v > 1.0) {
            continue;
        }
        let n = rng.gen_range(1..=3);
        let y = YoungTriple::new(1.0 / u, 1.0 / v)?;
        residual = residual.max(y.residual());
        worst = worst.max(young_constant(y.p, y.q, n)?);
        drawn += 1;
    }
    let c43 = young_constant(4.0 / 3.0, 4.0 / 3.0, 1)?;
    let exact = 2.0 * 3f64.powf(-0.75);
    let pass = worst <= 1.0 + 1e-12 && (c43 - exact).abs() <= 1e-10 && residual < 1e-12;
    Ok(Outcome {
        pass,
        result: json!({
            "samples": drawn,
            "max_constant": worst,
            "max_residual": residual,
            "c_4_3": c43,
            "c_4_3_expected": exact,
        }),
        series: vec![SeriesRow {
            p_or_t: 4.0 / 3.0,
            value: c43,
            model_value: exact,
        }],
    })
}

fn noncompact(c: &NoncompactCheck) -> Result<Outcome> {
    if !(c.b > 1.0) {
        return Err(rejected(format!("witness exponent b must exceed 1, got {}", c.b)));
    }
    let b = c.b;
    let witness = CircleFunction::new(RadialFunction::single(Piece::new(Region::Interval([0.0, TAU]), -1.0 / b, 0.0)))?;
    let control = CircleFunction::new(RadialFunction::new(vec![
        Piece::new(Region::Interval([0.0, TAU]), 1.0, 0.0).with_coef(TAU),
        Piece::new(Region::Interval([0.0, TAU]), 2.0, 0.0).with_coef(-1.0),
    ]))?;
    let psi = PsiFunction::tabulate(ExponentInterval::new(1.0, b)?, 2048, |p| {
        let k = 1.0 - p / b;
        Ok((TAU.powf(k) / k).powf(1.0 / p))
    })?;
    let r = noncompact_experiment(&witness, &control, &psi, c.eps0, &c.ks)?;
    let series = r
        .rounds
        .iter()
        .map(|x| SeriesRow {
            p_or_t: x.k as f64,
            value: x.witness_gap,
            model_value: x.control_gap,
        })
        .collect();
    Ok(Outcome {
        pass: r.pass,
        result: to_value(&r),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_passes() {
        let cfg: SuiteConfig = serde_json::from_str(r#"{"seed": 3, "checks": []}"#).unwrap();
        let r = run_suite(&cfg);
        assert!(r.pass && r.entries.is_empty());
    }

    #[test]
    fn parses_documented_config() {
        let cfg: SuiteConfig = serde_json::from_str(
            r#"{"seed":1,"checks":[{"kind":"convolution_sharpness","b1":1.3333,"b2":1.3333,"g1":0,"g2":0},{"kind":"tensor"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.checks[0].kind(), "convolution_sharpness");
        assert_eq!(cfg.checks[1], CheckSpec::Tensor(Battery { instances: 20 }));
        let back: SuiteConfig = serde_json::from_str(&serde_json::to_string(&SuiteConfig::default()).unwrap()).unwrap();
        assert_eq!(back, SuiteConfig::default());
    }

    #[test]
    fn bad_convolution_is_recorded() {
        let cfg: SuiteConfig = serde_json::from_str(
            r#"{"seed":1,"checks":[{"kind":"convolution","b1":4,"b2":4},{"kind":"young_constant","samples":100}]}"#,
        )
        .unwrap();
        let r = run_suite(&cfg);
        assert!(!r.pass);
        assert_eq!(r.entries[0].error.as_ref().unwrap().name, "RejectedInput");
        assert!(r.entries[1].pass);
    }

    #[test]
    fn csv_layout() {
        let cfg: SuiteConfig = serde_json::from_str(r#"{"checks":[{"kind":"phi_index"}]}"#).unwrap();
        let r = run_suite(&cfg);
        let e = &r.entries[0];
        assert_eq!(e.csv_name(), "00_phi_index.csv");
        assert!(e.csv().starts_with("p_or_t,value,model_value\n"));
        assert_eq!(e.csv().lines().count(), 2);
    }
}
