//! Radial functions on `(R^n, |x|^sigma dx)` and their `L^p` norms.
//!
//! Norms use the polar identity `|f|_p^p = Omega(n) int_0^inf r^{n+sigma-1} |f(r)|^p dr`.
//! Pure power-log pieces are integrated in closed form through the gamma
//! function; everything else goes through exponential substitutions
//! `r = b e^{+-s}` anchored at every breakpoint, which turns algebraic and
//! logarithmic endpoint behaviour into smooth exponential decay in `s`.

mod convolve;

pub use convolve::{convolve1d, convolve_at, ConvolutionMode, PowerTail, SampledRadial, GRADING_FLOOR};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{rejected, Error, Result};
use crate::numeric::quad::{integrate_semi_infinite, QuadOptions, QuadResult};
use crate::psi::SlowlyVarying;

/// `(R^n, |x|^sigma dx)`, or the half line `(0, inf)` with Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    pub n: u32,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub half_line: bool,
}

impl WeightedSpace {
    pub fn new(n: u32, sigma: f64) -> Result<Self> {
        let space = Self {
            n,
            sigma,
            half_line: false,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn euclidean(n: u32) -> Self {
        Self {
            n: n.max(1),
            sigma: 0.0,
            half_line: false,
        }
    }

    /// `(0, inf)` with Lebesgue measure.
    pub fn half_line() -> Self {
        Self {
            n: 1,
            sigma: 0.0,
            half_line: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(rejected("dimension n must be at least 1"));
        }
        if !(self.dim() > 0.0) {
            return Err(rejected(format!("n + sigma must be positive, got {}", self.dim())));
        }
        if self.half_line && self.n != 1 {
            return Err(rejected("the half line is one-dimensional"));
        }
        Ok(())
    }

    /// Homogeneous dimension `n + sigma`.
    pub fn dim(&self) -> f64 {
        self.n as f64 + self.sigma
    }

    /// Volume of the unit ball, `pi^{n/2} / Gamma(n/2 + 1)`.
    pub fn omega(&self) -> f64 {
        PI.powf(self.n as f64 / 2.0) / half_integer_gamma(self.n + 2)
    }

    /// Surface measure `Omega(n) = n omega(n)`; 1 on the half line.
    pub fn big_omega(&self) -> f64 {
        if self.half_line {
            1.0
        } else {
            self.n as f64 * self.omega()
        }
    }

    /// Radius of the ball of unit measure, `[(sigma + n)/Omega(n)]^{1/(sigma + n)}`.
    pub fn radius(&self) -> f64 {
        (self.dim() / self.big_omega()).powf(1.0 / self.dim())
    }
}

// Gamma(k/2) by recurrence from Gamma(1) and Gamma(1/2).
fn half_integer_gamma(k: u32) -> f64 {
    let mut x = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut j = 2 - k % 2;
    while j < k {
        x *= j as f64 / 2.0;
        j += 2;
    }
    x
}

/// Support of a piece in the rescaled variable `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Inner,
    Outer,
    All,
    Interval([f64; 2]),
}

impl Region {
    fn x_bounds(&self) -> (f64, f64) {
        match *self {
            Region::Inner => (0.0, 1.0),
            Region::Outer => (1.0, f64::INFINITY),
            Region::All => (0.0, f64::INFINITY),
            Region::Interval([lo, hi]) => (lo, hi),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// `coef * I(x in region) * x^power * |ln x|^logpow * L(|ln x|)` with
/// `x = (r + shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub region: Region,
    #[serde(default)]
    pub power: f64,
    #[serde(default)]
    pub logpow: f64,
    #[serde(rename = "L", default)]
    pub slowly: SlowlyVarying,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub coef: f64,
}

impl Piece {
    pub fn new(region: Region, power: f64, logpow: f64) -> Self {
        Self {
            region,
            power,
            logpow,
            slowly: SlowlyVarying::Unit,
            shift: 0.0,
            scale: 1.0,
            coef: 1.0,
        }
    }

    pub fn with_coef(self, coef: f64) -> Self {
        Self { coef, ..self }
    }

    pub fn with_slowly(self, slowly: SlowlyVarying) -> Self {
        Self { slowly, ..self }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.power, self.logpow, self.shift, self.scale, self.coef];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(rejected(format!("piece has non-finite parameters: {self:?}")));
        }
        if !(self.scale > 0.0) || self.shift < 0.0 {
            return Err(rejected(format!("piece needs scale > 0 and shift >= 0: {self:?}")));
        }
        if let Region::Interval([lo, hi]) = self.region {
            if !(lo >= 0.0 && lo < hi) {
                return Err(rejected(format!("interval region [{lo}, {hi}] needs 0 <= lo < hi")));
            }
        }
        Ok(())
    }

    /// Support in `r`, as `(lo, hi)`; `hi <= lo` means empty.
    pub fn r_support(&self) -> (f64, f64) {
        let (xl, xh) = self.region.x_bounds();
        ((self.scale * xl - self.shift).max(0.0), self.scale * xh - self.shift)
    }

    fn is_empty(&self) -> bool {
        let (lo, hi) = self.r_support();
        !(hi > lo) || self.coef == 0.0
    }

    /// `(sign, ln |value|)` at `r`; `ln_r` is passed separately so that
    /// unshifted pieces keep full relative accuracy near breakpoints.
    fn signed_ln(&self, r: f64, ln_r: f64) -> Option<(f64, f64)> {
        if self.coef == 0.0 {
            return None;
        }
        // Region membership is decided on ln x so that far tails never overflow.
        let ln_x = if self.shift == 0.0 {
            ln_r - self.scale.ln()
        } else {
            ((r + self.shift) / self.scale).ln()
        };
        let (xl, xh) = self.region.x_bounds();
        let inside = match self.region {
            Region::Interval(_) => ln_x >= xl.ln() && ln_x <= xh.ln(),
            _ => ln_x > xl.ln() && ln_x < xh.ln(),
        };
        if !inside {
            return None;
        }
        let mut acc = self.coef.abs().ln();
        if self.power != 0.0 {
            acc += self.power * ln_x;
        }
        if self.logpow != 0.0 {
            if ln_x == 0.0 {
                return None;
            }
            acc += self.logpow * ln_x.abs().ln();
        }
        acc += self.slowly.ln_eval(ln_x.abs());
        if acc.is_nan() || acc == f64::NEG_INFINITY {
            return None;
        }
        Some((self.coef.signum(), acc))
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        self.signed_ln(r, r.ln()).map_or(0.0, |(s, l)| s * l.exp())
    }

    fn describe(&self, idx: usize) -> String {
        format!(
            "piece {idx} ({:?}, power {}, logpow {}, shift {}, scale {})",
            self.region, self.power, self.logpow, self.shift, self.scale
        )
    }

    /// Symbolic integrability of `r^{d-1} |piece|^p` near its singular points.
    fn check_finite(&self, idx: usize, d: f64, p: f64) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let (lo, hi) = self.r_support();
        let borderline_ok = self.slowly.is_unit() && self.logpow * p < -1.0;
        let diverge = |where_: &str, critical: f64| Error::Divergence {
            piece: format!("{} at {where_}", self.describe(idx)),
            critical,
        };
        let critical = if self.power != 0.0 { -d / self.power } else { f64::INFINITY };
        if hi.is_infinite() {
            let kappa = -(d + p * self.power);
            if kappa < 0.0 || (kappa == 0.0 && !borderline_ok) {
                return Err(diverge("r -> inf", critical));
            }
        }
        if lo == 0.0 && self.shift == 0.0 {
            let kappa = d + p * self.power;
            if kappa < 0.0 || (kappa == 0.0 && !borderline_ok) {
                return Err(diverge("r -> 0", critical));
            }
        }
        let r_one = self.scale - self.shift;
        if self.logpow < 0.0 && r_one >= lo && r_one <= hi && r_one > 0.0 && self.logpow * p <= -1.0 {
            return Err(diverge("x = 1 (log singularity)", -1.0 / self.logpow));
        }
        Ok(())
    }

    fn exact_ok(&self) -> bool {
        self.shift == 0.0
            && self.slowly.is_unit()
            && match self.region {
                Region::Inner | Region::Outer => true,
                Region::Interval(_) => self.logpow == 0.0,
                Region::All => false,
            }
    }
}

/// Exact value of `int_0^inf r^{d-1} |piece(r)|^p dr` (no `Omega(n)` factor).
///
/// Outer pieces give `Gamma(alpha p + 1) kappa^{-alpha p - 1}` with
/// `kappa = -(d + p e)`, inner pieces the same with `kappa = d + p e`.
pub fn exact_gamma_integral(piece: &Piece, space: &WeightedSpace, p: f64) -> Result<f64> {
    piece.validate()?;
    if !piece.exact_ok() {
        return Err(Error::NotExact(format!(
            "piece {piece:?} needs quadrature (shifted, non-unit L, or unsupported region)"
        )));
    }
    let d = space.dim();
    piece.check_finite(0, d, p)?;
    if piece.is_empty() {
        return Ok(0.0);
    }
    let amp = piece.coef.abs().powf(p) * piece.scale.powf(d);
    let ap = piece.logpow * p;
    let k = d + p * piece.power;
    let core = match piece.region {
        Region::Outer => (ln_gamma(ap + 1.0) - (ap + 1.0) * (-k).ln()).exp(),
        Region::Inner => (ln_gamma(ap + 1.0) - (ap + 1.0) * k.ln()).exp(),
        Region::Interval([x0, x1]) => {
            if k == 0.0 {
                (x1 / x0).ln()
            } else {
                (x1.powf(k) - x0.powf(k)) / k
            }
        }
        Region::All => unreachable!("rejected by exact_ok"),
    };
    Ok(amp * core)
}

/// How an [`LpResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpMethod {
    ExactGamma,
    Quadrature,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: LpMethod,
}

/// Anything with computable `L^p` norms on a weighted space.
pub trait LpNorm: Sync {
    fn lp_norm(&self, space: &WeightedSpace, p: f64) -> Result<LpResult>;

    fn lp(&self, space: &WeightedSpace, p: f64) -> Result<f64> {
        self.lp_norm(space, p).map(|r| r.value)
    }
}

/// Finite sum of [`Piece`]s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialFunction {
    pub terms: Vec<Piece>,
}

const QUAD_REL_TOL: f64 = 1e-12;
const REPORT_REL_TOL: f64 = 1e-8;

impl RadialFunction {
    pub fn new(terms: Vec<Piece>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(piece: Piece) -> Self {
        Self { terms: vec![piece] }
    }

    /// `I(|x| > 1) |x|^{-1/a} (ln |x|)^alpha L(ln |x|)`.
    pub fn outer_power_log(a: f64, alpha: f64, slowly: SlowlyVarying) -> Self {
        Self::single(Piece::new(Region::Outer, -1.0 / a, alpha).with_slowly(slowly))
    }

    /// `I(|x| < 1) |x|^{-1/b} |ln |x||^beta L(|ln |x||)`.
    pub fn inner_power_log(b: f64, beta: f64, slowly: SlowlyVarying) -> Self {
        Self::single(Piece::new(Region::Inner, -1.0 / b, beta).with_slowly(slowly))
    }

    /// Indicator of `lo <= r <= hi`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::single(Piece::new(Region::Interval([lo, hi]), 0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        self.terms.iter().try_for_each(Piece::validate)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    pub fn plus(&self, other: &RadialFunction) -> Self {
        Self {
            terms: self.terms.iter().chain(&other.terms).copied().collect(),
        }
    }

    pub fn scaled_by(&self, c: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| t.with_coef(t.coef * c)).collect(),
        }
    }

    /// Dilation `f(r / s)`.
    pub fn dilated(&self, s: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Piece {
                    scale: t.scale * s,
                    shift: t.shift * s,
                    ..*t
                })
                .collect(),
        }
    }

    /// Translation of the profile, `f(r + eps)`.
    pub fn shifted(&self, eps: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Piece {
                    shift: t.shift + eps,
                    ..*t
                })
                .collect(),
        }
    }

    pub(crate) fn live_terms(&self) -> impl Iterator<Item = (usize, &Piece)> {
        self.terms.iter().enumerate().filter(|(_, t)| !t.is_empty())
    }

    fn disjoint(&self) -> bool {
        let mut spans: Vec<(f64, f64)> = self.live_terms().map(|(_, t)| t.r_support()).collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        spans.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// `|f|^gamma` for functions made of disjoint pieces.
    pub fn abs_pow(&self, g: f64) -> Result<Self> {
        if !self.disjoint() {
            return Err(Error::Unsupported("abs_pow needs pieces with disjoint supports".into()));
        }
        let terms = self
            .live_terms()
            .map(|(_, t)| {
                Ok(Piece {
                    power: t.power * g,
                    logpow: t.logpow * g,
                    slowly: pow_slowly(t.slowly, g)?,
                    coef: t.coef.abs().powf(g),
                    ..*t
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { terms })
    }

    /// Pointwise product of unshifted, equally scaled functions.
    pub fn product(&self, other: &RadialFunction) -> Result<Self> {
        let mut terms = Vec::new();
        for (_, f) in self.live_terms() {
            for (_, g) in other.live_terms() {
                if f.shift != 0.0 || g.shift != 0.0 || f.scale != g.scale {
                    return Err(Error::Unsupported(
                        "product needs unshifted pieces with a common scale".into(),
                    ));
                }
                let (fl, fh) = f.region.x_bounds();
                let (gl, gh) = g.region.x_bounds();
                let (lo, hi) = (fl.max(gl), fh.min(gh));
                if !(hi > lo) {
                    continue;
                }
                let region = match (lo, hi) {
                    (l, h) if l == 0.0 && h == 1.0 => Region::Inner,
                    (l, h) if l == 1.0 && h.is_infinite() => Region::Outer,
                    (l, h) if l == 0.0 && h.is_infinite() => Region::All,
                    (l, h) => Region::Interval([l, h]),
                };
                terms.push(Piece {
                    region,
                    power: f.power + g.power,
                    logpow: f.logpow + g.logpow,
                    slowly: mul_slowly(f.slowly, g.slowly)?,
                    shift: 0.0,
                    scale: f.scale,
                    coef: f.coef * g.coef,
                });
            }
        }
        Ok(Self { terms })
    }

    /// Closed-form `u'(r)` for unit-`L` pieces, so that norms (which take
    /// absolute values) are those of `|grad u|`. Jumps at region boundaries
    /// are not differentiated.
    pub fn gradient_modulus(&self) -> Result<Self> {
        let mut out = Vec::new();
        for (_, t) in self.live_terms() {
            if !t.slowly.is_unit() {
                return Err(Error::Unsupported(
                    "gradient of pieces with a slowly varying factor".into(),
                ));
            }
            // Split regions straddling x = 1 so the sign of ln x is fixed.
            let parts: Vec<Region> = match t.region {
                Region::All if t.logpow != 0.0 => vec![Region::Inner, Region::Outer],
                Region::Interval([lo, hi]) if t.logpow != 0.0 && lo < 1.0 && hi > 1.0 => {
                    vec![Region::Interval([lo, 1.0]), Region::Interval([1.0, hi])]
                }
                r => vec![r],
            };
            for region in parts {
                let (xl, xh) = region.x_bounds();
                let ln_sign = if xh <= 1.0 { -1.0 } else if xl >= 1.0 { 1.0 } else { 0.0 };
                let base = Piece { region, ..*t };
                if t.power != 0.0 {
                    out.push(Piece {
                        power: t.power - 1.0,
                        coef: t.coef * t.power / t.scale,
                        ..base
                    });
                }
                if t.logpow != 0.0 {
                    out.push(Piece {
                        power: t.power - 1.0,
                        logpow: t.logpow - 1.0,
                        coef: t.coef * t.logpow * ln_sign / t.scale,
                        ..base
                    });
                }
            }
        }
        if !out.is_empty() && out.iter().all(|t| t.coef <= 0.0) {
            for t in &mut out {
                t.coef = -t.coef;
            }
        }
        Ok(Self { terms: out })
    }

    /// Closed form, available when every piece is a pure power-log piece and
    /// supports are disjoint.
    pub fn lp_norm_exact(&self, space: &WeightedSpace, p: f64) -> Result<LpResult> {
        self.precheck(space, p)?;
        if !self.disjoint() {
            return Err(Error::NotExact("pieces overlap".into()));
        }
        let mut total = 0.0;
        for (_, t) in self.live_terms() {
            total += exact_gamma_integral(t, space, p)?;
        }
        let value = (space.big_omega() * total).powf(1.0 / p);
        Ok(LpResult {
            value,
            abs_error_estimate: 4.0 * f64::EPSILON * value,
            method: LpMethod::ExactGamma,
        })
    }

    /// Quadrature after exponential substitution at every breakpoint.
    pub fn lp_norm_quadrature(&self, space: &WeightedSpace, p: f64) -> Result<LpResult> {
        self.precheck(space, p)?;
        let d = space.dim();
        let breaks = self.breakpoints();
        if breaks.is_empty() {
            return Ok(LpResult {
                value: 0.0,
                abs_error_estimate: 0.0,
                method: LpMethod::Quadrature,
            });
        }
        let kappa = self.decay_rates(d, p);
        let integrand = |r: f64, ln_r: f64| -> f64 {
            match self.ln_abs(r, ln_r) {
                Some(l) => (d * ln_r + p * l).exp(),
                None => 0.0,
            }
        };
        let mut acc = QuadResult::zero();

        let first = breaks[0];
        acc = acc.combine(anchored(&integrand, first, -1.0, f64::INFINITY, kappa.0));
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi / lo).ln();
            acc = acc.combine(anchored(&integrand, lo, 1.0, half, 1.0));
            acc = acc.combine(anchored(&integrand, hi, -1.0, half, 1.0));
        }
        let last = *breaks.last().expect("non-empty");
        acc = acc.combine(anchored(&integrand, last, 1.0, f64::INFINITY, kappa.1));

        if !(acc.value.is_finite()) {
            return Err(Error::Quadrature {
                value: acc.value,
                abs_error: acc.abs_error,
            });
        }
        let omega = space.big_omega();
        let value = (omega * acc.value).powf(1.0 / p);
        let rel = if acc.value > 0.0 { acc.abs_error / acc.value } else { 0.0 };
        let abs_error_estimate = value * rel / p;
        if abs_error_estimate > REPORT_REL_TOL * value {
            return Err(Error::Quadrature {
                value,
                abs_error: abs_error_estimate,
            });
        }
        Ok(LpResult {
            value,
            abs_error_estimate,
            method: LpMethod::Quadrature,
        })
    }

    fn precheck(&self, space: &WeightedSpace, p: f64) -> Result<()> {
        space.validate()?;
        self.validate()?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(rejected(format!("exponent p must be positive and finite, got {p}")));
        }
        let d = space.dim();
        for (i, t) in self.live_terms() {
            t.check_finite(i, d, p)?;
        }
        Ok(())
    }

    fn ln_abs(&self, r: f64, ln_r: f64) -> Option<f64> {
        let mut m = f64::NEG_INFINITY;
        let mut count = 0;
        for t in &self.terms {
            if let Some((_, l)) = t.signed_ln(r, ln_r) {
                m = m.max(l);
                count += 1;
            }
        }
        match count {
            0 => None,
            1 => Some(m),
            _ => {
                let s: f64 = self
                    .terms
                    .iter()
                    .filter_map(|t| t.signed_ln(r, ln_r))
                    .map(|(sg, l)| sg * (l - m).exp())
                    .sum();
                (s != 0.0).then(|| m + s.abs().ln())
            }
        }
    }

    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        for (_, t) in self.live_terms() {
            let (lo, hi) = t.r_support();
            let r_one = t.scale - t.shift;
            for v in [lo, hi, r_one] {
                if v > 0.0 && v.is_finite() && v >= lo && v <= hi {
                    pts.push(v);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
        if pts.is_empty() && self.live_terms().next().is_some() {
            pts.push(1.0);
        }
        pts
    }

    /// Exponential decay rates in `s` of the integrand toward `r -> 0` and `r -> inf`.
    fn decay_rates(&self, d: f64, p: f64) -> (f64, f64) {
        let mut low = f64::INFINITY;
        let mut high = f64::INFINITY;
        for (_, t) in self.live_terms() {
            let (lo, hi) = t.r_support();
            if lo == 0.0 {
                let k = if t.shift == 0.0 { d + p * t.power } else { d };
                low = low.min(k.max(1e-3));
            }
            if hi.is_infinite() {
                high = high.min((-(d + p * t.power)).max(1e-3));
            }
        }
        (low, high)
    }
}

// Integrates `r^d |f|^p ds` with `r = anchor * e^{dir * s}` over `0 < s < span`.
// The finite part uses `s = s0 e^{-v}` so any algebraic behaviour at `s = 0`
// becomes exponential decay in `v`.
fn anchored<F: Fn(f64, f64) -> f64>(f: &F, anchor: f64, dir: f64, span: f64, kappa: f64) -> QuadResult {
    let opts = QuadOptions {
        rel_tol: QUAD_REL_TOL,
        abs_tol: 0.0,
        max_intervals: 2000,
    };
    let ln_anchor = anchor.ln();
    let at = |s: f64| {
        let ln_r = ln_anchor + dir * s;
        f(ln_r.exp(), ln_r)
    };
    let s0 = if span.is_finite() { span } else { 1.0 };
    let near = integrate_semi_infinite(
        |v: f64| {
            let s = s0 * (-v).exp();
            if s <= 0.0 {
                0.0
            } else {
                at(s) * s
            }
        },
        1.0,
        opts,
    );
    if span.is_finite() {
        return near;
    }
    let scale = if kappa.is_finite() { (1.0 / kappa).max(1.0) } else { 1.0 };
    let far = integrate_semi_infinite(|s: f64| at(s0 + s), scale, opts);
    near.combine(far)
}

impl LpNorm for RadialFunction {
    /// Closed form when available, quadrature otherwise.
    fn lp_norm(&self, space: &WeightedSpace, p: f64) -> Result<LpResult> {
        match self.lp_norm_exact(space, p) {
            Err(Error::NotExact(_)) => self.lp_norm_quadrature(space, p),
            other => other,
        }
    }
}

fn pow_slowly(l: SlowlyVarying, g: f64) -> Result<SlowlyVarying> {
    match l {
        SlowlyVarying::Unit => Ok(SlowlyVarying::Unit),
        SlowlyVarying::LogPower { theta } => Ok(SlowlyVarying::LogPower { theta: theta * g }),
        SlowlyVarying::IteratedLog if g == 1.0 => Ok(l),
        SlowlyVarying::IteratedLog => Err(Error::Unsupported("powers of the iterated-log factor".into())),
    }
}

fn mul_slowly(a: SlowlyVarying, b: SlowlyVarying) -> Result<SlowlyVarying> {
    use SlowlyVarying::*;
    match (a, b) {
        (Unit, x) | (x, Unit) => Ok(x),
        (LogPower { theta: t1 }, LogPower { theta: t2 }) => Ok(LogPower { theta: t1 + t2 }),
        _ => Err(Error::Unsupported("products of distinct slowly varying factors".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::integrate;
    use approx::assert_relative_eq;

    fn line() -> WeightedSpace {
        WeightedSpace::euclidean(1)
    }

    #[test]
    fn space_constants() {
        let s3 = WeightedSpace::euclidean(3);
        assert_relative_eq!(s3.omega(), 4.0 * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s3.big_omega(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(line().big_omega(), 2.0, max_relative = 1e-15);
        // unit-measure ball
        let w = WeightedSpace::new(2, 1.0).unwrap();
        let r = w.radius();
        assert_relative_eq!(w.big_omega() * r.powf(w.dim()) / w.dim(), 1.0, max_relative = 1e-14);
        assert!(WeightedSpace::new(1, -1.5).is_err());
    }

    #[test]
    fn indicator_of_unit_interval() {
        let f = RadialFunction::single(Piece::new(Region::Inner, 0.0, 0.0));
        for p in [1.0, 2.0, 3.7] {
            let r = f.lp_norm(&line(), p).unwrap();
            assert_eq!(r.method, LpMethod::ExactGamma);
            assert_relative_eq!(r.value, 2f64.powf(1.0 / p), max_relative = 1e-14);
            let q = f.lp_norm_quadrature(&line(), p).unwrap();
            assert_relative_eq!(q.value, 2f64.powf(1.0 / p), max_relative = 1e-11);
        }
    }

    #[test]
    fn exact_gamma_examples() {
        let outer = Piece::new(Region::Outer, -1.0, 1.0);
        assert_relative_eq!(exact_gamma_integral(&outer, &line(), 2.0).unwrap(), 2.0, max_relative = 1e-14);
        let f = RadialFunction::single(outer);
        assert_relative_eq!(f.lp(&line(), 2.0).unwrap(), 2.0, max_relative = 1e-14);

        let outer0 = Piece::new(Region::Outer, -0.5, 0.0);
        assert_relative_eq!(exact_gamma_integral(&outer0, &line(), 4.0).unwrap(), 1.0, max_relative = 1e-14);
        let inner = Piece::new(Region::Inner, -0.5, 0.0);
        assert_relative_eq!(exact_gamma_integral(&inner, &line(), 1.0).unwrap(), 2.0, max_relative = 1e-14);

        let slow = outer.with_slowly(SlowlyVarying::LogPower { theta: 1.0 });
        assert_eq!(exact_gamma_integral(&slow, &line(), 2.0).unwrap_err().name(), "NotExact");
    }

    #[test]
    fn divergence_is_detected_symbolically() {
        let f = RadialFunction::outer_power_log(2.0, 0.0, SlowlyVarying::Unit);
        let err = f.lp_norm(&line(), 1.5).unwrap_err();
        match err {
            Error::Divergence { critical, .. } => assert_relative_eq!(critical, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        let g = RadialFunction::inner_power_log(2.0, 0.0, SlowlyVarying::Unit);
        assert_eq!(g.lp_norm(&line(), 2.0).unwrap_err().name(), "Divergence");
        assert!(g.lp_norm_quadrature(&line(), 2.5).is_err());
    }

    #[test]
    fn mixed_function_quadrature_matches_exact() {
        let h = RadialFunction::outer_power_log(1.5, 0.7, SlowlyVarying::Unit)
            .plus(&RadialFunction::inner_power_log(4.0, 1.3, SlowlyVarying::Unit));
        let space = WeightedSpace::new(2, 0.5).unwrap();
        for p in [3.8, 5.0, 7.5, 9.9] {
            let e = h.lp_norm_exact(&space, p).unwrap().value;
            let q = h.lp_norm_quadrature(&space, p).unwrap();
            assert!((q.value / e - 1.0).abs() < 1e-9, "p = {p}: {} vs {e}", q.value);
            assert!(q.abs_error_estimate <= 1e-8 * q.value);
        }
    }

    #[test]
    fn slowly_varying_piece_by_quadrature() {
        let l = SlowlyVarying::LogPower { theta: 1.0 };
        let f = RadialFunction::outer_power_log(1.0, 0.0, l);
        // int_1^inf r^{-p} L(ln r)^p dr with L(z) = ln(max(z, e^2))
        let p = 2.0;
        let r = f.lp_norm(&line(), p).unwrap();
        assert_eq!(r.method, LpMethod::Quadrature);
        let oracle = integrate(
            |z: f64| (-(p - 1.0) * z).exp() * l.eval(z).powf(p),
            0.0,
            60.0,
            QuadOptions::default(),
        );
        assert_relative_eq!(r.value, (2.0 * oracle.value).powf(1.0 / p), max_relative = 1e-9);
    }

    #[test]
    fn dilation_scales_norm() {
        let f = RadialFunction::outer_power_log(1.5, 0.5, SlowlyVarying::Unit)
            .plus(&RadialFunction::inner_power_log(3.0, 0.0, SlowlyVarying::Unit));
        for s in [0.01, 3.0, 1e4] {
            for p in [1.7, 2.5] {
                let base = f.lp(&line(), p).unwrap();
                let scaled = f.dilated(s).lp(&line(), p).unwrap();
                assert_relative_eq!(scaled, s.powf(1.0 / p) * base, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn shifted_piece_by_quadrature() {
        // (1 - r)_+ shifted by 0.25: int_0^{0.75} (0.75 - r)^2 dr * 2
        let cap = RadialFunction::new(vec![
            Piece::new(Region::Inner, 0.0, 0.0),
            Piece::new(Region::Inner, 1.0, 0.0).with_coef(-1.0),
        ]);
        let v = cap.shifted(0.25).lp(&line(), 2.0).unwrap();
        assert_relative_eq!(v, (2.0 * 0.75f64.powi(3) / 3.0).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn gradient_examples() {
        let cap = RadialFunction::new(vec![
            Piece::new(Region::Inner, 0.0, 0.0),
            Piece::new(Region::Inner, 1.0, 0.0).with_coef(-1.0),
        ]);
        let g = cap.gradient_modulus().unwrap();
        assert_eq!(g.terms.len(), 1);
        assert_relative_eq!(g.eval(0.3), 1.0);
        assert_eq!(g.eval(1.5), 0.0);

        let a = 2.0;
        let u = RadialFunction::outer_power_log(a, 0.0, SlowlyVarying::Unit);
        let g = u.gradient_modulus().unwrap();
        for r in [1.5, 7.0] {
            assert_relative_eq!(g.eval(r), r.powf(-1.0 / a - 1.0) / a, max_relative = 1e-14);
        }
        let c = RadialFunction::single(Piece::new(Region::All, 0.0, 0.0).with_coef(3.0));
        assert!(c.gradient_modulus().unwrap().terms.is_empty());
    }

    #[test]
    fn gradient_of_log_piece_matches_finite_difference() {
        let u = RadialFunction::outer_power_log(1.5, 2.0, SlowlyVarying::Unit).dilated(2.0);
        let g = u.gradient_modulus().unwrap();
        for r in [2.5, 10.0, 100.0] {
            let h = 1e-6 * r;
            let fd = (u.eval(r + h) - u.eval(r - h)) / (2.0 * h);
            assert_relative_eq!(g.eval(r).abs(), fd.abs(), max_relative = 1e-6);
        }
    }

    #[test]
    fn product_and_power_of_pieces() {
        let f = RadialFunction::inner_power_log(4.0, 0.0, SlowlyVarying::Unit);
        let ff = f.product(&f).unwrap();
        assert_eq!(ff.terms[0].power, -0.5);
        let sq = f.abs_pow(2.0).unwrap();
        for p in [1.2, 1.8] {
            assert_relative_eq!(
                sq.lp(&line(), p).unwrap(),
                f.lp(&line(), 2.0 * p).unwrap().powi(2),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn json_schema() {
        let text = r#"{"terms":[{"region":"outer","power":-1.0,"logpow":1.0,"L":{"kind":"unit"},"shift":0.0,"scale":1.0}]}"#;
        let f: RadialFunction = serde_json::from_str(text).unwrap();
        assert_relative_eq!(f.lp(&line(), 2.0).unwrap(), 2.0, max_relative = 1e-14);
        let g: RadialFunction = serde_json::from_str(r#"{"terms":[{"region":{"interval":[1.0,2.0]}}]}"#).unwrap();
        assert_relative_eq!(g.lp(&line(), 1.0).unwrap(), 2.0, max_relative = 1e-14);
        let back: RadialFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
