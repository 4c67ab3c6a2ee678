//! One-dimensional convolution of radial profiles and the sampled functions
//! it produces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LpMethod, LpNorm, LpResult, RadialFunction, WeightedSpace};
use crate::error::{rejected, Error, Result};
use crate::numeric::fit::least_squares;
use crate::numeric::quad::{integrate_semi_infinite, QuadOptions, QuadResult};
use statrs::function::gamma::{gamma, gamma_ur};

// 8-point Gauss–Legendre on [-1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Smallest distance to a breakpoint resolved by the graded node layout.
pub const GRADING_FLOOR: f64 = 1e-8;
/// Geometric panels beyond the last breakpoint cover `[c, c * 2^LOG_PANELS]`.
const LOG_PANELS: i32 = 27;

/// How `f * g` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    /// Profiles live on `(0, inf)`: `h(t) = int_0^t f(y) g(t - y) dy`.
    HalfLine,
    /// Even extensions to `R`: `h(t) = int_R f(|y|) g(|t - y|) dy`.
    Symmetric,
}

impl ConvolutionMode {
    /// The space on which `f`, `g` and `f * g` are measured.
    pub fn space(&self) -> WeightedSpace {
        match self {
            ConvolutionMode::HalfLine => WeightedSpace::half_line(),
            ConvolutionMode::Symmetric => WeightedSpace::euclidean(1),
        }
    }
}

/// `h(t) ~ coef * t^exponent * |ln t|^logpow` beyond the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub coef: f64,
    pub exponent: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub logpow: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl PowerTail {
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.coef * t.powf(self.exponent);
        if self.logpow != 0.0 {
            v *= t.ln().abs().powf(self.logpow);
        }
        v
    }
}

/// Radial function known on a grid, with quadrature weights over the
/// covered span and optional power-law tails outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledRadial {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_tail: Option<PowerTail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_tail: Option<PowerTail>,
}

impl SampledRadial {
    /// Plain samples; norms use the trapezoid rule on the grid.
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self {
            grid,
            values,
            weights: Vec::new(),
            span: None,
            lower_tail: None,
            upper_tail: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 || self.grid.len() != self.values.len() {
            return Err(rejected("sampled function needs matching grid and values of length >= 2"));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) || !(self.grid[0] > 0.0) {
            return Err(rejected("sampled grid must be positive and strictly increasing"));
        }
        if !self.weights.is_empty() && self.weights.len() != self.grid.len() {
            return Err(rejected("weights must match the grid"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(rejected("sampled values must be finite"));
        }
        Ok(())
    }

    fn covered(&self) -> (f64, f64) {
        match self.span {
            Some([lo, hi]) => (lo, hi),
            None => (self.grid[0], *self.grid.last().expect("validated")),
        }
    }

    /// Interpolates the samples; tails (or zero) outside the grid.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.covered();
        if t < self.grid[0] {
            return match self.lower_tail {
                Some(tail) if t > 0.0 => tail.eval(t),
                _ if t >= lo => self.values[0],
                _ => 0.0,
            };
        }
        let last = self.grid.len() - 1;
        if t > self.grid[last] {
            return match self.upper_tail {
                Some(tail) => tail.eval(t),
                None if t <= hi => self.values[last],
                None => 0.0,
            };
        }
        // cubic Lagrange in ln t through the four surrounding nodes
        let i = self.grid.partition_point(|&x| x <= t).clamp(1, last);
        let j0 = i.saturating_sub(2).min(last.saturating_sub(3));
        let idx: Vec<usize> = (j0..(j0 + 4).min(last + 1)).collect();
        let u = t.ln();
        let us: Vec<f64> = idx.iter().map(|&k| self.grid[k].ln()).collect();
        let mut acc = 0.0;
        for (a, &ka) in idx.iter().enumerate() {
            let mut w = 1.0;
            for (b, _) in idx.iter().enumerate() {
                if a != b {
                    w *= (u - us[b]) / (us[a] - us[b]);
                }
            }
            acc += w * self.values[ka];
        }
        acc
    }

    // int t^{d-1} |tail|^p over (0, at) or (at, inf); with s = |ln t| this is
    // |c|^p k^{-(lp+1)} Gamma(lp + 1, k |ln at|).
    fn tail_integral(tail: &PowerTail, d: f64, p: f64, at: f64, lower: bool) -> Result<f64> {
        let k = if lower { d + p * tail.exponent } else { -(d + p * tail.exponent) };
        if !(k > 0.0) {
            return Err(Error::Divergence {
                piece: format!(
                    "sampled {} tail ~ t^{:.6}",
                    if lower { "lower" } else { "upper" },
                    tail.exponent
                ),
                critical: -d / tail.exponent,
            });
        }
        let amp = tail.coef.abs().powf(p);
        if tail.logpow == 0.0 {
            return Ok(amp * at.powf(if lower { k } else { -k }) / k);
        }
        let s0 = at.ln().abs();
        let a = tail.logpow * p + 1.0;
        let upper_gamma = gamma_ur(a, k * s0) * gamma(a);
        Ok(amp * k.powf(-a) * upper_gamma)
    }
}

impl LpNorm for SampledRadial {
    fn lp_norm(&self, space: &WeightedSpace, p: f64) -> Result<LpResult> {
        self.validate()?;
        space.validate()?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(rejected(format!("exponent p must be positive and finite, got {p}")));
        }
        let d = space.dim();
        let body = |t: f64, v: f64| t.powf(d - 1.0) * v.abs().powf(p);
        let mut total = if self.weights.is_empty() {
            self.grid
                .windows(2)
                .zip(self.values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (body(t[0], v[0]) + body(t[1], v[1])))
                .sum()
        } else {
            self.grid
                .iter()
                .zip(&self.values)
                .zip(&self.weights)
                .map(|((&t, &v), &w)| w * body(t, v))
                .sum::<f64>()
        };
        let (lo, hi) = self.covered();
        if let Some(tail) = &self.lower_tail {
            total += Self::tail_integral(tail, d, p, lo, true)?;
        }
        if let Some(tail) = &self.upper_tail {
            total += Self::tail_integral(tail, d, p, hi, false)?;
        }
        let value = (space.big_omega() * total).powf(1.0 / p);
        Ok(LpResult {
            value,
            abs_error_estimate: f64::NAN,
            method: LpMethod::Sampled,
        })
    }
}

// A point where the integrand of the convolution may be singular, with the
// arguments of F and G kept exactly.
#[derive(Debug, Clone, Copy)]
struct Anchor {
    y: f64,
    fa: f64,
    ga: f64,
}

struct Convolver<'a> {
    f: &'a RadialFunction,
    g: &'a RadialFunction,
    mode: ConvolutionMode,
    f_breaks: Vec<f64>,
    g_breaks: Vec<f64>,
    f_reach: f64,
    g_reach: f64,
}

fn reach(f: &RadialFunction) -> f64 {
    f.live_terms().map(|(_, t)| t.r_support().1).fold(0.0, f64::max)
}

fn support_breaks(f: &RadialFunction) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(f.breakpoints());
    b
}

impl<'a> Convolver<'a> {
    fn new(f: &'a RadialFunction, g: &'a RadialFunction, mode: ConvolutionMode) -> Result<Self> {
        f.validate()?;
        g.validate()?;
        for (name, u) in [("f", f), ("g", g)] {
            for (i, t) in u.live_terms() {
                let (lo, hi) = t.r_support();
                if lo == 0.0 && t.shift == 0.0 && t.region.x_bounds().0 == 0.0 && !(t.power > -1.0) {
                    return Err(Error::Divergence {
                        piece: format!("{name}: {} is not locally integrable at 0", t.describe(i)),
                        critical: -1.0,
                    });
                }
                let r_one = t.scale - t.shift;
                if t.logpow <= -1.0 && r_one > lo && r_one < hi {
                    return Err(Error::Divergence {
                        piece: format!("{name}: {} is not locally integrable at x = 1", t.describe(i)),
                        critical: -1.0,
                    });
                }
            }
        }
        let (f_reach, g_reach) = (reach(f), reach(g));
        if f_reach.is_infinite() && g_reach.is_infinite() {
            let top = |u: &RadialFunction| {
                u.live_terms()
                    .filter(|(_, t)| t.r_support().1.is_infinite())
                    .map(|(_, t)| t.power)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let sum = top(f) + top(g);
            if !(sum < -1.0) {
                return Err(Error::Divergence {
                    piece: format!("tails of f and g: exponents sum to {sum} >= -1"),
                    critical: -1.0,
                });
            }
        }
        Ok(Self {
            f,
            g,
            mode,
            f_breaks: support_breaks(f),
            g_breaks: support_breaks(g),
            f_reach,
            g_reach,
        })
    }

    fn big_f(&self, y: f64) -> f64 {
        match self.mode {
            ConvolutionMode::HalfLine if y <= 0.0 => 0.0,
            _ => self.f.eval(y.abs()),
        }
    }

    fn big_g(&self, y: f64) -> f64 {
        match self.mode {
            ConvolutionMode::HalfLine if y <= 0.0 => 0.0,
            _ => self.g.eval(y.abs()),
        }
    }

    fn anchors(&self, t: f64) -> (Vec<Anchor>, f64, f64) {
        let (lo, hi) = match self.mode {
            ConvolutionMode::HalfLine => (0.0, t),
            ConvolutionMode::Symmetric => ((-self.f_reach).max(t - self.g_reach), self.f_reach.min(t + self.g_reach)),
        };
        let signs: &[f64] = match self.mode {
            ConvolutionMode::HalfLine => &[1.0],
            ConvolutionMode::Symmetric => &[1.0, -1.0],
        };
        let mut pts = Vec::new();
        for &b in &self.f_breaks {
            for &s in signs {
                let y = s * b;
                pts.push(Anchor { y, fa: y, ga: t - y });
            }
        }
        for &b in &self.g_breaks {
            for &s in signs {
                let y = t - s * b;
                pts.push(Anchor { y, fa: y, ga: s * b });
            }
        }
        let mut pts: Vec<Anchor> = pts.into_iter().filter(|a| a.y >= lo && a.y <= hi).collect();
        pts.sort_by(|a, b| a.y.total_cmp(&b.y));
        pts.dedup_by(|a, b| (a.y - b.y).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0));
        (pts, lo, hi)
    }

    fn half(&self, fa: f64, ga: f64, dir: f64, width: f64, opts: QuadOptions) -> QuadResult {
        // y = anchor + dir * z, z = width * e^{-v}
        integrate_semi_infinite(
            |v: f64| {
                let z = width * (-v).exp();
                if z <= 0.0 {
                    return 0.0;
                }
                self.big_f(fa + dir * z) * self.big_g(ga - dir * z) * z
            },
            1.0,
            opts,
        )
    }

    fn ray(&self, a: Anchor, dir: f64, opts: QuadOptions) -> QuadResult {
        let near = self.half(a.fa, a.ga, dir, 1.0, opts);
        let far = integrate_semi_infinite(
            |s: f64| self.big_f(a.fa + dir * (1.0 + s)) * self.big_g(a.ga - dir * (1.0 + s)),
            1.0,
            opts,
        );
        near.combine(far)
    }

    fn at(&self, t: f64) -> Result<f64> {
        let opts = QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_intervals: 1500,
        };
        let (pts, lo, hi) = self.anchors(t);
        let mut acc = QuadResult::zero();
        if let Some(first) = pts.first() {
            if lo.is_infinite() {
                acc = acc.combine(self.ray(*first, -1.0, opts));
            }
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b.y - a.y);
            if half <= 0.0 {
                continue;
            }
            acc = acc.combine(self.half(a.fa, a.ga, 1.0, half, opts));
            acc = acc.combine(self.half(b.fa, b.ga, -1.0, half, opts));
        }
        if let Some(last) = pts.last() {
            if hi.is_infinite() {
                acc = acc.combine(self.ray(*last, 1.0, opts));
            }
        }
        if !acc.value.is_finite() {
            return Err(Error::Quadrature {
                value: acc.value,
                abs_error: acc.abs_error,
            });
        }
        Ok(acc.value)
    }

    fn output_breaks(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for &bf in &self.f_breaks {
            for &bg in &self.g_breaks {
                out.push(bf + bg);
                if self.mode == ConvolutionMode::Symmetric {
                    out.push((bf - bg).abs());
                }
            }
        }
        out.retain(|v| v.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        out
    }
}

/// `(f * g)(t)` at a single point.
pub fn convolve_at(f: &RadialFunction, g: &RadialFunction, mode: ConvolutionMode, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(rejected(format!("convolution point must be positive, got {t}")));
    }
    Convolver::new(f, g, mode)?.at(t)
}

fn push_panel(nodes: &mut Vec<(f64, f64)>, a: f64, b: f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    for k in (0..4).rev() {
        nodes.push((c - h * GL_X[k], h * GL_W[k]));
    }
    for k in 0..4 {
        nodes.push((c + h * GL_X[k], h * GL_W[k]));
    }
}

/// Node layout: Gauss–Legendre panels graded geometrically toward every
/// breakpoint of `h` down to [`GRADING_FLOOR`], plus geometric panels out to
/// `2^27` times the last breakpoint when the support is unbounded.
fn layout(breaks: &[f64], unbounded: bool) -> (Vec<(f64, f64)>, [f64; 2]) {
    let mut nodes = Vec::new();
    let mut lower = breaks[0];
    for w in breaks.windows(2) {
        let (c0, c1) = (w[0], w[1]);
        let half = 0.5 * (c1 - c0);
        let levels = (half / GRADING_FLOOR).log2().ceil().max(1.0) as i32;
        // left side, toward c0
        for k in (0..levels).rev() {
            push_panel(&mut nodes, c0 + half * 0.5f64.powi(k + 1), c0 + half * 0.5f64.powi(k));
        }
        let inner = c0 + half * 0.5f64.powi(levels);
        if c0 > 0.0 {
            push_panel(&mut nodes, c0, inner);
        } else {
            lower = inner;
        }
        // right side, toward c1
        for k in 0..levels {
            push_panel(&mut nodes, c1 - half * 0.5f64.powi(k), c1 - half * 0.5f64.powi(k + 1));
        }
        push_panel(&mut nodes, c1 - half * 0.5f64.powi(levels), c1);
    }
    let mut upper = *breaks.last().expect("non-empty");
    if unbounded {
        let c = if upper > 0.0 { upper } else { 1.0 };
        for k in 0..LOG_PANELS {
            push_panel(&mut nodes, c * 2f64.powi(k), c * 2f64.powi(k + 1));
        }
        upper = c * 2f64.powi(LOG_PANELS);
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    (nodes, [lower, upper])
}

fn fit_tail(ts: &[f64], vs: &[f64]) -> Option<PowerTail> {
    if vs.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&xs, &ys)?;
    Some(PowerTail {
        coef: fit.intercept.exp(),
        exponent: fit.slope,
        logpow: 0.0,
    })
}

// (power, logpow) of the pieces reaching `r -> inf` (upper) or `r -> 0`
// (lower); `None` when one of them carries a slowly varying factor or a
// negative coefficient, in which case the tail is fitted instead.
fn end_terms(u: &RadialFunction, upper: bool) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (_, t) in u.live_terms() {
        let (lo, hi) = t.r_support();
        let touches = if upper {
            hi.is_infinite()
        } else {
            lo == 0.0 && t.shift == 0.0 && t.region.x_bounds().0 == 0.0
        };
        if !touches {
            continue;
        }
        if !t.slowly.is_unit() || t.coef < 0.0 {
            return None;
        }
        out.push((t.power, t.logpow));
    }
    Some(out)
}

// Dominant term: largest power at infinity, smallest at zero, then the
// strongest logarithm.
fn dominant(v: Vec<(f64, f64)>, upper: bool) -> Option<(f64, f64)> {
    v.into_iter().reduce(|x, y| {
        let better = if x.0 != y.0 { (y.0 > x.0) == upper } else { y.1 > x.1 };
        if better {
            y
        } else {
            x
        }
    })
}

fn upper_law(f: &RadialFunction, g: &RadialFunction) -> Option<(f64, f64)> {
    match (dominant(end_terms(f, true)?, true), dominant(end_terms(g, true)?, true)) {
        (Some(a), Some(b)) if a.0 > -1.0 && b.0 > -1.0 => Some((1.0 + a.0 + b.0, a.1 + b.1)),
        (Some(a), Some(b)) => {
            if a.0 > b.0 || (a.0 == b.0 && a.1 >= b.1) {
                Some(a)
            } else {
                Some(b)
            }
        }
        (Some(e), None) | (None, Some(e)) => Some(e),
        (None, None) => None,
    }
}

fn lower_law(f: &RadialFunction, g: &RadialFunction, mode: ConvolutionMode) -> Option<(f64, f64)> {
    let a = dominant(end_terms(f, false)?, false)?;
    let b = dominant(end_terms(g, false)?, false)?;
    let s = 1.0 + a.0 + b.0;
    match mode {
        ConvolutionMode::HalfLine => Some((s, a.1 + b.1)),
        ConvolutionMode::Symmetric if s < 0.0 => Some((s, a.1 + b.1)),
        ConvolutionMode::Symmetric if s > 0.0 => Some((0.0, 0.0)),
        ConvolutionMode::Symmetric => None,
    }
}

// Tail with a known law, matched at the outermost node.
fn pinned_tail(t: f64, v: f64, (exponent, logpow): (f64, f64)) -> Option<PowerTail> {
    let shape = PowerTail {
        coef: 1.0,
        exponent,
        logpow,
    };
    let base = shape.eval(t);
    (v > 0.0 && base > 0.0).then(|| PowerTail {
        coef: v / base,
        ..shape
    })
}

/// Samples `f * g` on the graded layout. Node values are computed in parallel.
pub fn convolve1d(f: &RadialFunction, g: &RadialFunction, mode: ConvolutionMode) -> Result<SampledRadial> {
    let conv = Convolver::new(f, g, mode)?;
    let breaks = conv.output_breaks();
    let unbounded = conv.f_reach.is_infinite() || conv.g_reach.is_infinite();
    if breaks.len() < 2 && !unbounded {
        return Err(rejected("convolution of functions with empty support"));
    }
    let (nodes, span) = layout(&breaks, unbounded);
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, _)| conv.at(t))
        .collect::<Result<_>>()?;
    let grid: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let weights: Vec<f64> = nodes.iter().map(|n| n.1).collect();

    let lower_tail = if span[0] == 0.0 {
        None
    } else {
        match lower_law(f, g, mode) {
            Some(e) => pinned_tail(grid[0], values[0], e),
            None => fit_tail(&grid[..8], &values[..8]),
        }
    };
    let n = grid.len();
    let upper_tail = if !unbounded {
        None
    } else {
        match upper_law(f, g) {
            Some(e) => pinned_tail(grid[n - 1], values[n - 1], e),
            None => fit_tail(&grid[n - 8..], &values[n - 8..]),
        }
    };
    Ok(SampledRadial {
        grid,
        values,
        weights,
        span: Some(span),
        lower_tail,
        upper_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Piece, Region};
    use approx::assert_relative_eq;

    fn unit_box() -> RadialFunction {
        RadialFunction::single(Piece::new(Region::Inner, 0.0, 0.0))
    }

    #[test]
    fn triangle_on_half_line() {
        let h = convolve1d(&unit_box(), &unit_box(), ConvolutionMode::HalfLine).unwrap();
        for (t, v) in h.grid.iter().zip(&h.values) {
            let exact = if *t < 1.0 { *t } else { 2.0 - t };
            assert_relative_eq!(*v, exact, max_relative = 1e-9);
        }
        for t in [1e-6, 0.3, 0.9, 1.5] {
            let exact = if t < 1.0 { t } else { 2.0 - t };
            assert_relative_eq!(h.eval(t), exact, max_relative = 1e-5);
        }
        assert_eq!(h.eval(2.5), 0.0);
        // int_0^2 tri^2 = 2/3
        let space = WeightedSpace::half_line();
        assert_relative_eq!(h.lp(&space, 2.0).unwrap(), (2.0f64 / 3.0).sqrt(), max_relative = 1e-10);
        assert_relative_eq!(h.lp(&space, 1.0).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn symmetric_boxes() {
        // f = g = I(|x| < 1): h(t) = 2 - t on (0, 2)
        for t in [0.25, 1.0, 1.75] {
            let v = convolve_at(&unit_box(), &unit_box(), ConvolutionMode::Symmetric, t).unwrap();
            assert_relative_eq!(v, 2.0 - t, max_relative = 1e-10);
        }
    }

    #[test]
    fn beta_asymptotic() {
        let f = RadialFunction::single(Piece::new(Region::Inner, -0.75, 0.0));
        let beta = 7.416_298_709_205_487_7;
        for t in [1e-6, 0.5] {
            let v = convolve_at(&f, &f, ConvolutionMode::HalfLine, t).unwrap();
            assert_relative_eq!(v, beta / t.sqrt(), max_relative = 1e-8);
        }
    }

    #[test]
    fn rejects_non_integrable() {
        let f = RadialFunction::single(Piece::new(Region::Inner, -1.2, 0.0));
        assert_eq!(convolve1d(&f, &unit_box(), ConvolutionMode::HalfLine).unwrap_err().name(), "Divergence");
        let slow = RadialFunction::single(Piece::new(Region::Outer, -0.3, 0.0));
        assert!(convolve_at(&slow, &slow, ConvolutionMode::HalfLine, 2.0).is_err());
    }

    #[test]
    fn sampled_round_trip_and_trapezoid() {
        let s = SampledRadial::from_samples(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(s.lp(&WeightedSpace::half_line(), 1.0).unwrap(), 2.0);
        let back: SampledRadial = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(SampledRadial::from_samples(vec![2.0, 1.0], vec![0.0, 0.0]).is_err());
    }
}
