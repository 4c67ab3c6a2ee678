//! Endpoint exponent fits, the sharpness experiments and the suite runner.

mod suite;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::error::{rejected, Error, Result};
use crate::measure::{convolve1d, convolve_at, ConvolutionMode, LpNorm, Piece, RadialFunction, Region, WeightedSpace};
use crate::numeric::fit::least_squares;
use crate::numeric::optimize::logspace;
use crate::psi::{ExponentInterval, PsiFunction, SlowlyVarying};

pub use suite::{run_suite, CheckSpec, ErrorRecord, SeriesRow, SuiteConfig, SuiteEntry, SuiteReport};

/// Largest admissible distance from the endpoint in a fitting window.
pub const MAX_WINDOW: f64 = 0.1;
/// Absolute tolerance on fitted exponents.
pub const EXPONENT_TOL: f64 = 0.05;
/// Relative tolerance on the Beta-constant ratio.
pub const BETA_TOL: f64 = 0.02;
/// Offset of the finite/divergent probes around an endpoint.
pub const PROBE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Least-squares fit of `log v - log_power * log|log dist|` against `log dist`,
/// where `dist = |p - endpoint|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub endpoint: Side,
    pub at: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub log_power: f64,
    pub window: Vec<f64>,
    pub values: Vec<f64>,
}

impl AsymptoticFit {
    pub fn model(&self, dist: f64) -> f64 {
        (self.intercept + self.exponent * dist.ln() + self.log_power * dist.ln().abs().ln()).exp()
    }
}

/// Geometric distances in `[lo, hi]`.
pub fn fit_window(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    logspace(lo, hi, n)
}

pub fn fit_endpoint_exponent(values: &[(f64, f64)], endpoint: f64) -> Result<AsymptoticFit> {
    fit_endpoint_exponent_log(values, endpoint, 0.0)
}

/// As [`fit_endpoint_exponent`], removing a `|log dist|^log_power` factor first.
pub fn fit_endpoint_exponent_log(values: &[(f64, f64)], endpoint: f64, log_power: f64) -> Result<AsymptoticFit> {
    if values.len() < 8 {
        return Err(Error::InsufficientData(format!("need at least 8 points, got {}", values.len())));
    }
    let above = values.iter().all(|&(p, _)| p > endpoint);
    let below = values.iter().all(|&(p, _)| p < endpoint);
    if !above && !below {
        return Err(rejected("points must lie on one side of the endpoint"));
    }
    let mut pts: Vec<(f64, f64)> = values.iter().map(|&(p, v)| ((p - endpoint).abs(), v)).collect();
    if let Some(&(_, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(rejected(format!("fit needs positive finite values, got {v}")));
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(rejected("distances to the endpoint must be distinct"));
    }
    let (dmin, dmax) = (pts[0].0, pts[pts.len() - 1].0);
    if dmax > MAX_WINDOW * (1.0 + 1e-12) {
        return Err(rejected(format!("window reaches {dmax}, beyond {MAX_WINDOW} from the endpoint")));
    }
    if dmax / dmin < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientData(format!(
            "window [{dmin:e}, {dmax:e}] spans less than two decades"
        )));
    }
    if log_power != 0.0 && dmax >= 1.0 {
        return Err(rejected("log correction needs distances below 1"));
    }
    let xs: Vec<f64> = pts.iter().map(|(d, _)| d.ln()).collect();
    let ys: Vec<f64> = pts
        .iter()
        .map(|&(d, v)| v.ln() - log_power * d.ln().abs().ln())
        .collect();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::InsufficientData("degenerate fit".into()))?;
    Ok(AsymptoticFit {
        endpoint: if above { Side::Lower } else { Side::Upper },
        at: endpoint,
        exponent: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        log_power,
        window: pts.iter().map(|(d, _)| *d).collect(),
        values: pts.iter().map(|(_, v)| *v).collect(),
    })
}

/// `f` on the three nested windows `[1e-6, 10^-k]`, `k = 1, 2, 3`, returning
/// `|exponent - expected|` for each.
pub fn window_bias<F>(f: F, endpoint: f64, side: Side, expected: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let sign = if side == Side::Lower { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for hi in [1e-1, 1e-2, 1e-3] {
        let pts = fit_window(1e-6, hi, 11)
            .into_iter()
            .map(|d| Ok((endpoint + sign * d, f(d)?)))
            .collect::<Result<Vec<_>>>()?;
        out.push((fit_endpoint_exponent(&pts, endpoint)?.exponent - expected).abs());
    }
    Ok(out)
}

/// `f = I(r > 1) r^{-1/a} (ln r)^gamma L(ln r)` on `R^n` with weight `|x|^sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFamily {
    pub n: u32,
    pub sigma: f64,
    pub a: f64,
    pub gamma: f64,
    #[serde(rename = "L", default)]
    pub slowly: SlowlyVarying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTracePoint {
    pub p: f64,
    pub quadrature: f64,
    pub model: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSharpness {
    #[serde(rename = "A")]
    pub big_a: f64,
    pub fit: AsymptoticFit,
    pub expected_exponent: f64,
    pub trace: Vec<GammaTracePoint>,
    /// `|ratio - 1|` at `p - A = 0.01`.
    pub deviation_near: f64,
    /// Largest `|ratio - 1|` over `p - A >= 0.01`.
    pub deviation_far: f64,
    /// `|ratio - 1|` does not grow as `p -> A` over the fitting window.
    pub deviation_shrinks: bool,
    pub pass: bool,
}

/// `Omega Gamma(1 + gamma p) kappa^{-gamma p - 1} L^p(1/kappa)`, `kappa = p/a - d`.
fn gamma_model(fam: &GammaFamily, space: &WeightedSpace, p: f64) -> f64 {
    let kappa = p / fam.a - space.dim();
    let gp = fam.gamma * p;
    let ln = statrs::function::gamma::ln_gamma(gp + 1.0) - (gp + 1.0) * kappa.ln() + p * fam.slowly.ln_eval(1.0 / kappa);
    (space.big_omega() * ln.exp()).powf(1.0 / p)
}

/// Compares quadrature norms of the family with the closed Gamma expression
/// and fits the exponent at `A = a (n + sigma)`.
pub fn sharpness_gamma(fam: &GammaFamily) -> Result<GammaSharpness> {
    let space = WeightedSpace::new(fam.n, fam.sigma)?;
    if !(fam.a > 0.0 && fam.gamma >= 0.0) {
        return Err(rejected("family needs a > 0 and gamma >= 0"));
    }
    let f = RadialFunction::outer_power_log(fam.a, fam.gamma, fam.slowly);
    let big_a = fam.a * space.dim();
    let window = fit_window(1e-4, MAX_WINDOW, 11);
    let mut dists = window.clone();
    dists.extend([0.01, 0.25, 0.5, 1.0, 2.0]);
    let trace = dists
        .iter()
        .map(|&d| {
            let p = big_a + d;
            let quadrature = f.lp_norm_quadrature(&space, p)?.value;
            let model = gamma_model(fam, &space, p);
            Ok(GammaTracePoint {
                p,
                quadrature,
                model,
                ratio: quadrature / model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = match fam.slowly {
        SlowlyVarying::LogPower { theta } => theta,
        _ => 0.0,
    };
    let pts: Vec<(f64, f64)> = trace.iter().take(window.len()).map(|t| (t.p, t.quadrature)).collect();
    let fit = fit_endpoint_exponent_log(&pts, big_a, theta)?;
    let expected_exponent = -(fam.gamma + 1.0 / big_a);
    let near = (trace[window.len()].ratio - 1.0).abs();
    let far = trace
        .iter()
        .filter(|t| t.p - big_a >= 0.01 - 1e-12)
        .map(|t| (t.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    let devs: Vec<f64> = trace[..window.len()].iter().map(|t| (t.ratio - 1.0).abs()).collect();
    let shrinks = devs.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-9) + 1e-12);
    let pass = if fam.slowly.is_unit() {
        far <= 1e-7 && (fit.exponent - expected_exponent).abs() <= EXPONENT_TOL
    } else {
        near <= 0.05 && shrinks
    };
    Ok(GammaSharpness {
        big_a,
        fit,
        expected_exponent,
        trace,
        deviation_near: near,
        deviation_far: far,
        deviation_shrinks: shrinks,
        pass,
    })
}

/// Finite just inside an endpoint, divergent just outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointProbe {
    pub endpoint: f64,
    pub inside: f64,
    pub inside_value: Option<f64>,
    pub outside: f64,
    pub outside_error: Option<String>,
    pub exact: bool,
}

fn probe<F: Fn(f64) -> Result<f64>>(norm: F, endpoint: f64, side: Side) -> EndpointProbe {
    let sign = if side == Side::Lower { 1.0 } else { -1.0 };
    let (inside, outside) = (endpoint + sign * PROBE, endpoint - sign * PROBE);
    let inside_value = norm(inside).ok().filter(|v| v.is_finite());
    let outside_error = match norm(outside) {
        Err(e @ (Error::Divergence { .. } | Error::NormInfinite { .. })) => Some(e.name()),
        Ok(v) if v.is_infinite() => Some("NormInfinite"),
        _ => None,
    };
    EndpointProbe {
        endpoint,
        inside,
        inside_value,
        outside,
        exact: inside_value.is_some() && outside_error.is_some(),
        outside_error: outside_error.map(String::from),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSharpness {
    /// `B3` for inner supports, `A3` for outer ones.
    pub endpoint: f64,
    pub t_fit: Option<AsymptoticFit>,
    pub expected_t_exponent: Option<f64>,
    pub p_fit: AsymptoticFit,
    pub expected_p_exponent: f64,
    /// Exponent guaranteed by the G-norm bound at the endpoint.
    pub bound_exponent: f64,
    pub gap: f64,
    pub beta_constant: Option<f64>,
    pub beta_ratio: Option<f64>,
    pub probe: EndpointProbe,
    pub pass: bool,
}

/// `t` at which the Beta constant is compared.
pub const BETA_T: f64 = 1e-6;

fn young_endpoint(x1: f64, x2: f64) -> Result<f64> {
    if !(x1 > 1.0 && x2 > 1.0) {
        return Err(rejected(format!("exponents must exceed 1, got {x1}, {x2}")));
    }
    let s = 1.0 / x1 + 1.0 / x2 - 1.0;
    if !(s > 0.0) {
        return Err(rejected(format!(
            "Young condition fails: 1/{x1} + 1/{x2} <= 1 gives endpoint {}",
            1.0 / s
        )));
    }
    Ok(1.0 / s)
}

fn check_logs(g1: f64, g2: f64) -> Result<()> {
    if !(g1 >= 0.0 && g2 >= 0.0) {
        return Err(rejected("log powers must be non-negative"));
    }
    Ok(())
}

/// `f = I(0 < x < 1) x^{-1/b1} |ln x|^g1`, `g` likewise, convolved on the half
/// line; fits `h(t)` as `t -> 0` and `|h|_p` as `p -> B3`.
pub fn sharpness_convolution(b1: f64, b2: f64, g1: f64, g2: f64) -> Result<ConvolutionSharpness> {
    let b3 = young_endpoint(b1, b2)?;
    check_logs(g1, g2)?;
    let f = RadialFunction::single(Piece::new(Region::Inner, -1.0 / b1, g1));
    let g = RadialFunction::single(Piece::new(Region::Inner, -1.0 / b2, g2));
    let mode = ConvolutionMode::HalfLine;
    let space = mode.space();
    let h = convolve1d(&f, &g, mode)?;
    let lam = g1 + g2;

    let ts = fit_window(1e-8, 1e-4, 11);
    let t_pts = ts
        .iter()
        .map(|&t| Ok((t, convolve_at(&f, &g, mode, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let t_fit = fit_endpoint_exponent_log(&t_pts, 0.0, lam)?;
    let expected_t = 1.0 - 1.0 / b1 - 1.0 / b2;

    let p_pts = fit_window(1e-4, MAX_WINDOW, 11)
        .iter()
        .map(|&d| Ok((b3 - d, h.lp(&space, b3 - d)?)))
        .collect::<Result<Vec<_>>>()?;
    let p_fit = fit_endpoint_exponent(&p_pts, b3)?;
    let bound = -(lam + 1.0 / b1 + 1.0 / b2);
    let expected_p = bound + 1.0;

    let beta_constant = beta(1.0 - 1.0 / b1, 1.0 - 1.0 / b2);
    let model = beta_constant * BETA_T.powf(expected_t) * BETA_T.ln().abs().powf(lam);
    let beta_ratio = convolve_at(&f, &g, mode, BETA_T)? / model;

    let probe = probe(|p| h.lp(&space, p), b3, Side::Upper);
    let gap = p_fit.exponent - bound;
    let pass = (t_fit.exponent - expected_t).abs() <= EXPONENT_TOL
        && (p_fit.exponent - expected_p).abs() <= EXPONENT_TOL
        && (gap - 1.0).abs() <= EXPONENT_TOL
        && (lam > 0.0 || (beta_ratio - 1.0).abs() <= BETA_TOL)
        && probe.exact;
    Ok(ConvolutionSharpness {
        endpoint: b3,
        t_fit: Some(t_fit),
        expected_t_exponent: Some(expected_t),
        p_fit,
        expected_p_exponent: expected_p,
        bound_exponent: bound,
        gap,
        beta_constant: Some(beta_constant),
        beta_ratio: Some(beta_ratio),
        probe,
        pass,
    })
}

/// Outer-support analogue: `f = I(x > 1) x^{-1/a1} (ln x)^g1`, fitted as `p -> A3`.
pub fn sharpness_convolution_outer(a1: f64, a2: f64, g1: f64, g2: f64) -> Result<ConvolutionSharpness> {
    let a3 = young_endpoint(a1, a2)?;
    check_logs(g1, g2)?;
    let f = RadialFunction::single(Piece::new(Region::Outer, -1.0 / a1, g1));
    let g = RadialFunction::single(Piece::new(Region::Outer, -1.0 / a2, g2));
    let mode = ConvolutionMode::HalfLine;
    let space = mode.space();
    let h = convolve1d(&f, &g, mode)?;
    let lam = g1 + g2;
    let p_pts = fit_window(1e-4, MAX_WINDOW, 11)
        .iter()
        .map(|&d| Ok((a3 + d, h.lp(&space, a3 + d)?)))
        .collect::<Result<Vec<_>>>()?;
    let p_fit = fit_endpoint_exponent(&p_pts, a3)?;
    let bound = -(lam + 1.0 / a1 + 1.0 / a2);
    let expected_p = bound + 1.0;
    let probe = probe(|p| h.lp(&space, p), a3, Side::Lower);
    let gap = p_fit.exponent - bound;
    let pass = (p_fit.exponent - expected_p).abs() <= EXPONENT_TOL && (gap - 1.0).abs() <= EXPONENT_TOL && probe.exact;
    Ok(ConvolutionSharpness {
        endpoint: a3,
        t_fit: None,
        expected_t_exponent: None,
        p_fit,
        expected_p_exponent: expected_p,
        bound_exponent: bound,
        gap,
        beta_constant: None,
        beta_ratio: None,
        probe,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointGap {
    pub endpoint: f64,
    pub fit: AsymptoticFit,
    /// Fitted exponent of `| grad u |_p` at the matching endpoint of `(a, b)`.
    pub gradient_exponent: f64,
    pub bound_exponent: f64,
    pub gap: f64,
    pub expected_gap: f64,
    pub probe: EndpointProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevGap {
    pub n: u32,
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub lower: EndpointGap,
    pub upper: EndpointGap,
    pub pass: bool,
}

/// The profile `u = r^{1 - n/b}` inside the unit ball and `r^{1 - n/a}`
/// outside; `|grad u|` is exactly of order `(p - a)^{-1/a}` and `(b - p)^{-1/b}`
/// at the ends of `(a, b)`, so `psi(p) = (p - a)^{-1/a} (b - p)^{-1/b}`.
pub fn sobolev_profile(n: u32, a: f64, b: f64) -> RadialFunction {
    let n = n as f64;
    RadialFunction::new(vec![
        Piece::new(Region::Inner, 1.0 - n / b, 0.0),
        Piece::new(Region::Outer, 1.0 - n / a, 0.0),
    ])
}

/// Measures the endpoint exponents of `|Bu|_q` on `R^m` for the test profile
/// against the exponents `-1/a`, `-1/b` of the bound.
pub fn sharpness_sobolev_gap(n: u32, m: u32, a: f64, b: f64) -> Result<SobolevGap> {
    let cfg = crate::operators::SobolevConfig::new(n, m, a, b)?;
    let (nf, mf) = (n as f64, m as f64);
    let a2 = a * mf / (nf - a);
    let b2 = b * mf / (nf - b);
    if a2 <= 1.0 {
        return Err(Error::Unsupported(format!(
            "a m / (n - a) = {a2} <= 1: the lower trace endpoint is clamped to 1"
        )));
    }
    debug_assert_eq!(cfg.trace_interval(), (a2, b2));
    let (alpha, beta_exp) = (1.0 / a, 1.0 / b);
    let u = sobolev_profile(n, a, b);
    let grad = u.gradient_modulus()?;
    let (xn, xm) = (WeightedSpace::euclidean(n), WeightedSpace::euclidean(m));
    let window = fit_window(1e-4, MAX_WINDOW, 11);

    let side_gap = |end: f64, grad_end: f64, side: Side, bound: f64| -> Result<EndpointGap> {
        let sign = if side == Side::Lower { 1.0 } else { -1.0 };
        let pts = window
            .iter()
            .map(|&d| Ok((end + sign * d, u.lp(&xm, end + sign * d)?)))
            .collect::<Result<Vec<_>>>()?;
        let fit = fit_endpoint_exponent(&pts, end)?;
        let gpts = window
            .iter()
            .map(|&d| Ok((grad_end + sign * d, grad.lp(&xn, grad_end + sign * d)?)))
            .collect::<Result<Vec<_>>>()?;
        let gradient_exponent = fit_endpoint_exponent(&gpts, grad_end)?.exponent;
        Ok(EndpointGap {
            endpoint: end,
            gap: fit.exponent - bound,
            expected_gap: -bound - 1.0 / end,
            fit,
            gradient_exponent,
            bound_exponent: bound,
            probe: probe(|q| u.lp(&xm, q), end, side),
        })
    };
    let lower = side_gap(a2, a, Side::Lower, -alpha)?;
    let upper = side_gap(b2, b, Side::Upper, -beta_exp)?;
    let ok = |g: &EndpointGap| (g.gap - g.expected_gap).abs() <= EXPONENT_TOL && g.probe.exact;
    let pass = ok(&lower) && ok(&upper);
    Ok(SobolevGap {
        n,
        m,
        a,
        b,
        alpha,
        beta: beta_exp,
        a2,
        b2,
        lower,
        upper,
        pass,
    })
}

/// `I(r > 1) r^{-d/a} (ln r)^alpha + I(r < 1) r^{-d/b} |ln r|^beta`: its norm is
/// finite exactly on `(a, b)` and of order `(p - a)^{-alpha - 1/a}`,
/// `(b - p)^{-beta - 1/b}` at the ends.
pub fn two_sided(space: &WeightedSpace, a: f64, b: f64, alpha: f64, beta: f64) -> RadialFunction {
    let d = space.dim();
    RadialFunction::new(vec![
        Piece::new(Region::Outer, -d / a, alpha),
        Piece::new(Region::Inner, -d / b, beta),
    ])
}

/// `psi(p) = |f|_p` tabulated on `(a, b)`.
pub fn representation<F: LpNorm>(f: &F, space: &WeightedSpace, a: f64, b: f64) -> Result<PsiFunction> {
    PsiFunction::tabulate(ExponentInterval::new(a, b)?, 2048, |p| f.lp(space, p))
}
