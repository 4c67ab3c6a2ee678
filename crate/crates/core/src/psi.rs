//! Psi-class functions on open exponent intervals and their derived
//! constructions.
//!
//! A [`PsiFunction`] is an immutable, cheaply clonable tree. Leaves are the
//! two-sided power-log family, Young–Fenchel exponentials and tabulated
//! functions; inner nodes are pointwise products, power rescalings, the
//! Hölder-curve infimum used for pointwise products of functions, the
//! Young-curve infimum used for convolutions, and the Sobolev exponent map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{rejected, Error, Result};
use crate::numeric::interp::MonotoneCubic;
use crate::numeric::optimize::{golden_max, scan_then_min};

/// Evaluations closer than this to a finite endpoint are rejected.
pub const ENDPOINT_GUARD: f64 = 1e-9;

/// Seed points for the infimum scans.
const INFIMUM_SCAN: usize = 64;

pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn default_infinity() -> f64 {
    f64::INFINITY
}

/// Open interval `(a, b)` of Lebesgue exponents; `b` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentInterval {
    pub a: f64,
    #[serde(with = "inf_as_null", default = "default_infinity")]
    pub b: f64,
}

impl ExponentInterval {
    /// Accepts any `0 < a < b <= inf`. Rescaled domains (`power_scale`) may
    /// dip below 1, so the `a >= 1` requirement of the base families is
    /// enforced by their constructors.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) || b.is_nan() || !(a < b) {
            return Err(rejected(format!("exponent interval ({a}, {b}) requires 0 < a < b")));
        }
        Ok(Self { a, b })
    }

    pub fn contains(&self, p: f64) -> bool {
        self.a < p && p < self.b
    }

    pub fn is_bounded(&self) -> bool {
        self.b.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn intersect(&self, other: &ExponentInterval) -> Option<ExponentInterval> {
        let a = self.a.max(other.a);
        let b = self.b.min(other.b);
        (a < b).then_some(ExponentInterval { a, b })
    }

    /// Rejects `p` outside the interval or within [`ENDPOINT_GUARD`] of an endpoint.
    pub fn guard(&self, p: f64) -> Result<()> {
        if p.is_nan() || p <= self.a + ENDPOINT_GUARD || (self.b.is_finite() && p >= self.b - ENDPOINT_GUARD) {
            return Err(rejected(format!(
                "p = {p} is outside ({}, {}) or within {ENDPOINT_GUARD:e} of an endpoint",
                self.a, self.b
            )));
        }
        if p.is_infinite() {
            return Err(rejected("p = inf"));
        }
        Ok(())
    }

    /// Upper end of the working range: `b` itself when finite.
    pub(crate) fn working_upper(&self) -> f64 {
        if self.b.is_finite() {
            self.b
        } else {
            self.a + 100.0 * self.a.max(1.0)
        }
    }
}

/// Slowly varying factor `L(z)`, frozen at `L(e^2)` below `z = e^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVarying {
    #[default]
    Unit,
    LogPower { theta: f64 },
    IteratedLog,
}

impl SlowlyVarying {
    pub const FREEZE: f64 = 7.389_056_098_930_65; // e^2

    pub fn eval(&self, z: f64) -> f64 {
        let z = if z.is_nan() || z < Self::FREEZE { Self::FREEZE } else { z };
        match *self {
            SlowlyVarying::Unit => 1.0,
            SlowlyVarying::LogPower { theta } => z.ln().powf(theta),
            SlowlyVarying::IteratedLog => z.ln().ln(),
        }
    }

    pub fn ln_eval(&self, z: f64) -> f64 {
        match *self {
            SlowlyVarying::Unit => 0.0,
            _ => self.eval(z).ln(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, SlowlyVarying::Unit) || matches!(self, SlowlyVarying::LogPower { theta } if *theta == 0.0)
    }

    /// Largest `|L(cz)/L(z) - 1|` over `z = 10^k`, `k = k0..=k1`.
    pub fn max_ratio_deviation(&self, c: f64, k0: i32, k1: i32) -> f64 {
        (k0..=k1)
            .map(|k| {
                let z = 10f64.powi(k);
                (self.eval(c * z) / self.eval(z) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Convex weight `W` on `[2, inf)` for the Young–Fenchel construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexWeight {
    /// `W(z) = coef * z^exponent`
    Power { coef: f64, exponent: f64 },
    /// `W(z) = coef * exp(rate * z)`
    Exponential { coef: f64, rate: f64 },
}

impl ConvexWeight {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            ConvexWeight::Power { coef, exponent } => coef * z.powf(exponent),
            ConvexWeight::Exponential { coef, rate } => coef * (rate * z).exp(),
        }
    }

    /// Spot-checks strict monotonicity and midpoint convexity on a geometric
    /// grid over `[2, 2e6]`; returns the first offending `z`.
    pub fn validate(&self) -> Result<()> {
        let zs: Vec<f64> = (0..=240).map(|k| 2.0 * 10f64.powf(k as f64 / 40.0)).collect();
        for w in zs.windows(2) {
            let (z0, z1) = (w[0], w[1]);
            let (w0, w1) = (self.eval(z0), self.eval(z1));
            if !(w1 > w0) {
                return Err(rejected(format!("weight not strictly increasing near z = {z0}")));
            }
            let wm = self.eval(0.5 * (z0 + z1));
            if !(wm < 0.5 * (w0 + w1)) {
                return Err(rejected(format!("weight not strictly convex near z = {z0}")));
            }
        }
        Ok(())
    }
}

/// `W*(p) = sup_{z > 2} (p z - W(z))`.
pub fn young_fenchel(weight: &ConvexWeight, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(rejected(format!("young_fenchel needs p > 0, got {p}")));
    }
    let objective = |z: f64| p * z - weight.eval(z);
    let at_boundary = objective(2.0);

    // Expand until the concave objective turns down.
    let mut step = 1.0;
    let mut prev = at_boundary;
    let mut lo = 2.0;
    loop {
        let z = 2.0 + step;
        let v = objective(z);
        if !(v > prev) {
            break;
        }
        if z > 1e15 || !v.is_finite() {
            return Err(Error::Unbounded(format!(
                "p z - W(z) still increasing at z = {z:e} for p = {p}; W grows too slowly"
            )));
        }
        prev = v;
        lo = 2.0 + 0.5 * step;
        step *= 2.0;
    }
    let lo = if step <= 1.0 { 2.0 } else { lo.max(2.0) };
    let hi = 2.0 + step;
    let ext = golden_max(|z| Some(objective(z)), lo, hi, 1e-15, 400)?;
    Ok(ext.value.max(at_boundary))
}

/// Result of a constrained infimum evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Infimum {
    pub value: f64,
    /// First Hölder/Young exponent at the minimizer.
    pub p: f64,
    /// Its partner on the constraint curve.
    pub q: f64,
    /// Feasible range of `p`.
    pub p_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
enum PsiForm {
    PowerLog {
        a: f64,
        b: f64,
        gamma: f64,
        delta: f64,
        slowly: SlowlyVarying,
    },
    Product(PsiFunction, PsiFunction),
    PowerScale { inner: PsiFunction, gamma: f64 },
    MultInf(PsiFunction, PsiFunction),
    ConvInf(PsiFunction, PsiFunction),
    SobolevNu { inner: PsiFunction, n: u32, m: u32 },
    YoungFenchel { weight: ConvexWeight },
    Tabulated { p: Vec<f64>, values: Vec<f64>, log_interp: MonotoneCubic },
}

#[derive(Debug, PartialEq)]
struct PsiNode {
    domain: ExponentInterval,
    form: PsiForm,
}

/// A positive function on an open exponent interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PsiSpec", into = "PsiSpec")]
pub struct PsiFunction(Arc<PsiNode>);

impl PsiFunction {
    fn from_parts(domain: ExponentInterval, form: PsiForm) -> Self {
        PsiFunction(Arc::new(PsiNode { domain, form }))
    }

    pub fn domain(&self) -> ExponentInterval {
        self.0.domain
    }

    /// Two-sided power-log family
    /// `(p-A)^{-gamma} (B-p)^{-delta} max(L(A/(p-A)), L(B/(B-p)))` on `(A, B)`.
    pub fn power_log(a: f64, b: f64, gamma: f64, delta: f64, slowly: SlowlyVarying) -> Result<Self> {
        if !(a >= 1.0) || !(b.is_finite()) || !(a < b) {
            return Err(rejected(format!("power_log needs 1 <= A < B < inf, got A = {a}, B = {b}")));
        }
        if !(gamma >= 0.0 && delta >= 0.0) || (gamma == 0.0 && delta == 0.0) {
            return Err(rejected(format!(
                "power_log needs gamma, delta >= 0 and not both zero, got ({gamma}, {delta})"
            )));
        }
        Ok(Self::from_parts(
            ExponentInterval::new(a, b)?,
            PsiForm::PowerLog {
                a,
                b,
                gamma,
                delta,
                slowly,
            },
        ))
    }

    /// Pointwise product on the intersection of the two domains.
    pub fn product(lhs: &PsiFunction, rhs: &PsiFunction) -> Result<Self> {
        let domain = lhs.domain().intersect(&rhs.domain()).ok_or_else(|| {
            rejected(format!(
                "product domains ({}, {}) and ({}, {}) do not intersect",
                lhs.domain().a,
                lhs.domain().b,
                rhs.domain().a,
                rhs.domain().b
            ))
        })?;
        Ok(Self::from_parts(domain, PsiForm::Product(lhs.clone(), rhs.clone())))
    }

    /// `psi_gamma(p) = psi(gamma p)^gamma` on `(a/gamma, b/gamma)`, for `gamma in [a, b]`.
    pub fn power_scale(psi: &PsiFunction, gamma: f64) -> Result<Self> {
        let d = psi.domain();
        if !(gamma >= d.a && gamma <= d.b && gamma.is_finite()) {
            return Err(rejected(format!(
                "power_scale exponent {gamma} must lie in [{}, {}]",
                d.a, d.b
            )));
        }
        let domain = ExponentInterval::new(d.a / gamma, d.b / gamma)?;
        Ok(Self::from_parts(
            domain,
            PsiForm::PowerScale {
                inner: psi.clone(),
                gamma,
            },
        ))
    }

    /// `psi_3(r) = inf { psi1(p r) psi2(q r) : 1/p + 1/q = 1 }` on `(A1, B1)`
    /// with `A1 = max(1, a1 a2/(a1 + a2))` and `B1 = b1 b2/(b1 + b2)`.
    pub fn mult_inf(lhs: &PsiFunction, rhs: &PsiFunction) -> Result<Self> {
        let (d1, d2) = (lhs.domain(), rhs.domain());
        let a = (1.0 / (1.0 / d1.a + 1.0 / d2.a)).max(1.0);
        let b = 1.0 / (1.0 / d1.b + 1.0 / d2.b);
        if !(a < b) {
            return Err(rejected(format!("mult_inf domain is empty: A1 = {a} >= B1 = {b}")));
        }
        Ok(Self::from_parts(
            ExponentInterval::new(a, b)?,
            PsiForm::MultInf(lhs.clone(), rhs.clone()),
        ))
    }

    /// `tau(r) = inf { psi1(p) psi2(q) : 1/p + 1/q = 1 + 1/r }` on `(A3, B3)`
    /// with `A3 = a1 a2/(a1 + a2 - a1 a2)` and `B3 = b1 b2/(b1 + b2 - b1 b2)`.
    pub fn conv_inf(lhs: &PsiFunction, rhs: &PsiFunction) -> Result<Self> {
        let (d1, d2) = (lhs.domain(), rhs.domain());
        let sa = 1.0 / d1.a + 1.0 / d2.a - 1.0;
        let sb = 1.0 / d1.b + 1.0 / d2.b - 1.0;
        if !(sa > 0.0) {
            return Err(rejected(format!(
                "Young condition 1/a1 + 1/a2 > 1 fails (1/a1 + 1/a2 - 1 = {sa}, A3 = {})",
                1.0 / sa
            )));
        }
        if !(sb > 0.0) {
            return Err(rejected(format!(
                "Young condition 1/b1 + 1/b2 > 1 fails (1/b1 + 1/b2 - 1 = {sb}, B3 = {})",
                1.0 / sb
            )));
        }
        let (a, b) = (1.0 / sa, 1.0 / sb);
        if !(a < b) {
            return Err(rejected(format!("conv_inf domain is empty: A3 = {a} >= B3 = {b}")));
        }
        Ok(Self::from_parts(
            ExponentInterval::new(a, b)?,
            PsiForm::ConvInf(lhs.clone(), rhs.clone()),
        ))
    }

    /// `nu(q) = q^{1-1/n} psi(q n/(q + m))` on `(A2, B2)` with
    /// `A2 = max(1, a m/(n - a))`, `B2 = b m/(n - b)`.
    pub fn sobolev_nu(psi: &PsiFunction, n: u32, m: u32) -> Result<Self> {
        let d = psi.domain();
        let (nf, mf) = (n as f64, m as f64);
        if m < 1 || m > n {
            return Err(rejected(format!("sobolev_nu needs 1 <= m <= n, got n = {n}, m = {m}")));
        }
        if !(d.a >= 1.0) {
            return Err(rejected(format!("sobolev_nu needs a >= 1, got a = {}", d.a)));
        }
        if !(d.b < nf) {
            return Err(rejected(format!(
                "sobolev_nu needs b < n (b = {} , n = {n}); the case b = n is not supported",
                d.b
            )));
        }
        let a2 = (d.a * mf / (nf - d.a)).max(1.0);
        let b2 = d.b * mf / (nf - d.b);
        let inner_lo = a2 * nf / (a2 + mf);
        let inner_hi = b2 * nf / (b2 + mf);
        let tol = 1e-12 * d.b;
        if inner_lo < d.a - tol || inner_hi > d.b + tol {
            return Err(rejected(format!(
                "exponent map sends ({a2}, {b2}) to ({inner_lo}, {inner_hi}), outside ({}, {})",
                d.a, d.b
            )));
        }
        Ok(Self::from_parts(
            ExponentInterval::new(a2, b2)?,
            PsiForm::SobolevNu {
                inner: psi.clone(),
                n,
                m,
            },
        ))
    }

    /// `psi(p) = exp(W*(p)/p)` on `(a, b)`.
    pub fn young_fenchel(weight: ConvexWeight, a: f64, b: f64) -> Result<Self> {
        Ok(Self::from_parts(
            ExponentInterval::new(a, b)?,
            PsiForm::YoungFenchel { weight },
        ))
    }

    /// Tabulated function; interpolated by a shape-preserving cubic in `ln psi`.
    pub fn tabulated(domain: ExponentInterval, p: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if p.len() != values.len() || p.len() < 2 {
            return Err(rejected("tabulated psi needs at least two (p, value) pairs of equal length"));
        }
        if let Some(&bad) = p.iter().find(|&&x| !domain.contains(x)) {
            return Err(rejected(format!(
                "tabulated node p = {bad} outside ({}, {})",
                domain.a, domain.b
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(rejected(format!("tabulated values must be positive and finite, got {bad}")));
        }
        let log_interp = MonotoneCubic::new(
            p.iter().map(|&x| table_coord(&domain, x)).collect(),
            values.iter().map(|v| v.ln()).collect(),
        )
            .ok_or_else(|| rejected("tabulated nodes must be strictly increasing"))?;
        Ok(Self::from_parts(
            domain,
            PsiForm::Tabulated {
                p,
                values,
                log_interp,
            },
        ))
    }

    /// The constant function `c` on `domain`.
    pub fn constant(domain: ExponentInterval, c: f64) -> Result<Self> {
        let hi = domain.working_upper();
        let nodes = vec![domain.a + (hi - domain.a) / 3.0, hi - (hi - domain.a) / 3.0];
        Self::tabulated(domain, nodes, vec![c, c])
    }

    /// Tabulates `f` on `nodes` points spaced uniformly in `logit((p-a)/(b-a))`,
    /// which clusters them geometrically toward both endpoints.
    pub fn tabulate<F>(domain: ExponentInterval, nodes: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !domain.is_bounded() {
            return Err(rejected("tabulate needs a bounded domain"));
        }
        let w = domain.width();
        let eta = (1e-8_f64).max(4.0 * ENDPOINT_GUARD / w);
        let span = ((1.0 - eta) / eta).ln();
        let n = nodes.max(2);
        let mut ps = Vec::with_capacity(n);
        let mut vs = Vec::with_capacity(n);
        for k in 0..n {
            let s = -span + 2.0 * span * k as f64 / (n - 1) as f64;
            let frac = 1.0 / (1.0 + (-s).exp());
            let p = domain.a + w * frac;
            if !domain.contains(p) || ps.last().is_some_and(|&last| p <= last) {
                continue;
            }
            ps.push(p);
            vs.push(f(p)?);
        }
        Self::tabulated(domain, ps, vs)
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        let node = &*self.0;
        node.domain.guard(p)?;
        let v = match &node.form {
            PsiForm::PowerLog {
                a,
                b,
                gamma,
                delta,
                slowly,
            } => {
                let lf = slowly.eval(a / (p - a)).max(slowly.eval(b / (b - p)));
                (p - a).powf(-gamma) * (b - p).powf(-delta) * lf
            }
            PsiForm::Product(l, r) => l.eval(p)? * r.eval(p)?,
            PsiForm::PowerScale { inner, gamma } => inner.eval(gamma * p)?.powf(*gamma),
            PsiForm::MultInf(..) | PsiForm::ConvInf(..) => self.infimum_at(p)?.value,
            PsiForm::SobolevNu { inner, n, m } => {
                let (nf, mf) = (*n as f64, *m as f64);
                p.powf(1.0 - 1.0 / nf) * inner.eval(p * nf / (p + mf))?
            }
            PsiForm::YoungFenchel { weight } => (young_fenchel(weight, p)? / p).exp(),
            PsiForm::Tabulated { log_interp, .. } => log_interp.eval(table_coord(&node.domain, p)).exp(),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(rejected(format!("psi({p}) = {v} is not positive and finite")));
        }
        Ok(v)
    }

    /// Minimizer data for the infimum forms.
    pub fn infimum_at(&self, r: f64) -> Result<Infimum> {
        self.0.domain.guard(r)?;
        match &self.0.form {
            PsiForm::MultInf(l, rr) => {
                let (d1, d2) = (l.domain(), rr.domain());
                // u = 1/p; pr in (a1, b1) and qr in (a2, b2) with 1/q = 1 - u.
                let u_lo = [0.0, r / d1.b, 1.0 - r / d2.a].into_iter().fold(f64::MIN, f64::max);
                let u_hi = [1.0, r / d1.a, 1.0 - r / d2.b].into_iter().fold(f64::MAX, f64::min);
                let objective = |u: f64| -> Option<f64> {
                    let (p, q) = (1.0 / u, 1.0 / (1.0 - u));
                    Some(l.eval(p * r).ok()? * rr.eval(q * r).ok()?)
                };
                constrained_infimum(r, u_lo, u_hi, objective, |u| 1.0 / (1.0 - u))
            }
            PsiForm::ConvInf(l, rr) => {
                let (d1, d2) = (l.domain(), rr.domain());
                let total = 1.0 + 1.0 / r;
                // u = 1/p, v = 1/q = total - u, both in (0, 1).
                let u_lo = [1.0 / d1.b, 1.0 / r, total - 1.0 / d2.a]
                    .into_iter()
                    .fold(f64::MIN, f64::max);
                let u_hi = [1.0 / d1.a, 1.0, total - 1.0 / d2.b]
                    .into_iter()
                    .fold(f64::MAX, f64::min);
                let objective = |u: f64| -> Option<f64> {
                    let (p, q) = (1.0 / u, 1.0 / (total - u));
                    Some(l.eval(p).ok()? * rr.eval(q).ok()?)
                };
                constrained_infimum(r, u_lo, u_hi, objective, |u| 1.0 / (total - u))
            }
            _ => Err(Error::Unsupported("infimum_at on a non-infimum psi form".into())),
        }
    }

    /// Evaluates on `n` interior points and reports the smallest value.
    pub fn min_on_grid(&self, n: usize) -> Result<f64> {
        let d = self.domain();
        let hi = d.working_upper();
        let margin = 1e-6 * (hi - d.a);
        let mut min = f64::INFINITY;
        for k in 0..n {
            let p = d.a + margin + (hi - d.a - 2.0 * margin) * k as f64 / (n.max(2) - 1) as f64;
            min = min.min(self.eval(p)?);
        }
        Ok(min)
    }

    /// Midpoint test of convexity of `ln psi` on `n` interior points.
    pub fn log_convexity(&self, n: usize) -> LogConvexity {
        let d = self.domain();
        let hi = d.working_upper();
        let margin = 1e-3 * (hi - d.a);
        let ps: Vec<f64> = (0..n.max(3))
            .map(|k| d.a + margin + (hi - d.a - 2.0 * margin) * k as f64 / (n.max(3) - 1) as f64)
            .collect();
        let logs: Vec<Option<f64>> = ps.iter().map(|&p| self.eval(p).ok().map(f64::ln)).collect();
        let mut report = LogConvexity {
            checked: 0,
            violations: 0,
            worst_excess: 0.0,
        };
        for w in logs.windows(3) {
            if let [Some(l0), Some(l1), Some(l2)] = *w {
                report.checked += 1;
                let excess = l1 - 0.5 * (l0 + l2);
                let scale = 1e-10 * (l0.abs() + l2.abs()).max(1.0);
                if excess > scale {
                    report.violations += 1;
                    report.worst_excess = report.worst_excess.max(excess);
                }
            }
        }
        report
    }

    /// Probes `psi` on a geometric sequence of insets toward each endpoint and
    /// reports `(blows_up_at_a, blows_up_at_b)`.
    pub fn endpoint_blowup(&self) -> (bool, bool) {
        let d = self.domain();
        let probe = |toward_b: bool| -> bool {
            if toward_b && !d.is_bounded() {
                return false;
            }
            let w = d.working_upper() - d.a;
            let vals: Vec<f64> = (1..=26)
                .filter_map(|k| {
                    let m = 0.25 * w * 0.5f64.powi(k);
                    if m < 4.0 * ENDPOINT_GUARD {
                        return None;
                    }
                    let p = if toward_b { d.b - m } else { d.a + m };
                    self.eval(p).ok()
                })
                .collect();
            if vals.len() < 4 {
                return false;
            }
            let tail = &vals[vals.len() - 4..];
            tail.windows(2).all(|w| w[1] > w[0]) && vals[vals.len() - 1] > 2.0 * vals[0]
        };
        (probe(false), probe(true))
    }
}

// Tables are interpolated in logit((p-a)/(b-a)), or ln(p-a) on unbounded
// domains, where power-type endpoint blowup becomes linear.
fn table_coord(domain: &ExponentInterval, p: f64) -> f64 {
    let x = p - domain.a;
    if domain.is_bounded() {
        x.ln() - (domain.b - p).ln()
    } else {
        x.ln()
    }
}

/// Outcome of [`PsiFunction::log_convexity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogConvexity {
    pub checked: usize,
    pub violations: usize,
    pub worst_excess: f64,
}

fn constrained_infimum<F, Q>(r: f64, u_lo: f64, u_hi: f64, objective: F, partner: Q) -> Result<Infimum>
where
    F: Fn(f64) -> Option<f64>,
    Q: Fn(f64) -> f64,
{
    if !(u_lo < u_hi) || u_hi <= 0.0 {
        return Err(Error::EmptyWindow {
            at: r,
            detail: format!("1/p window ({u_lo}, {u_hi}) is empty"),
        });
    }
    // Log-spaced in u is log-spaced in p = 1/u.
    let lo = u_lo.max(1e-300).ln();
    let hi = u_hi.ln();
    let inset = 1e-7 * (hi - lo);
    let (lo, hi) = (lo + inset, hi - inset);
    let grid: Vec<f64> = (0..INFIMUM_SCAN)
        .map(|k| lo + (hi - lo) * k as f64 / (INFIMUM_SCAN - 1) as f64)
        .collect();
    let (ext, _) = scan_then_min(|lu: f64| objective(lu.exp()), &grid, 1e-13).map_err(|e| match e {
        Error::InsufficientData(_) => Error::EmptyWindow {
            at: r,
            detail: format!("objective undefined across 1/p window ({u_lo}, {u_hi})"),
        },
        other => other,
    })?;
    let u = ext.x.exp();
    Ok(Infimum {
        value: ext.value,
        p: 1.0 / u,
        q: partner(u),
        p_window: (1.0 / u_hi, if u_lo > 0.0 { 1.0 / u_lo } else { f64::INFINITY }),
    })
}

/// Serialized form of a [`PsiFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PsiSpec {
    PowerLog {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        gamma: f64,
        delta: f64,
        #[serde(rename = "L", default)]
        slowly: SlowlyVarying,
    },
    Product {
        lhs: Box<PsiSpec>,
        rhs: Box<PsiSpec>,
    },
    PowerScale {
        psi: Box<PsiSpec>,
        gamma: f64,
    },
    MultInf {
        lhs: Box<PsiSpec>,
        rhs: Box<PsiSpec>,
    },
    ConvInf {
        lhs: Box<PsiSpec>,
        rhs: Box<PsiSpec>,
    },
    SobolevNu {
        psi: Box<PsiSpec>,
        n: u32,
        m: u32,
    },
    YoungFenchel {
        #[serde(rename = "W")]
        weight: ConvexWeight,
        a: f64,
        #[serde(with = "inf_as_null", default = "default_infinity")]
        b: f64,
    },
    Tabulated {
        a: f64,
        #[serde(with = "inf_as_null", default = "default_infinity")]
        b: f64,
        p: Vec<f64>,
        values: Vec<f64>,
    },
}

impl TryFrom<PsiSpec> for PsiFunction {
    type Error = Error;

    fn try_from(spec: PsiSpec) -> Result<Self> {
        match spec {
            PsiSpec::PowerLog {
                a,
                b,
                gamma,
                delta,
                slowly,
            } => PsiFunction::power_log(a, b, gamma, delta, slowly),
            PsiSpec::Product { lhs, rhs } => {
                PsiFunction::product(&(*lhs).try_into()?, &(*rhs).try_into()?)
            }
            PsiSpec::PowerScale { psi, gamma } => PsiFunction::power_scale(&(*psi).try_into()?, gamma),
            PsiSpec::MultInf { lhs, rhs } => {
                PsiFunction::mult_inf(&(*lhs).try_into()?, &(*rhs).try_into()?)
            }
            PsiSpec::ConvInf { lhs, rhs } => {
                PsiFunction::conv_inf(&(*lhs).try_into()?, &(*rhs).try_into()?)
            }
            PsiSpec::SobolevNu { psi, n, m } => PsiFunction::sobolev_nu(&(*psi).try_into()?, n, m),
            PsiSpec::YoungFenchel { weight, a, b } => PsiFunction::young_fenchel(weight, a, b),
            PsiSpec::Tabulated { a, b, p, values } => {
                PsiFunction::tabulated(ExponentInterval::new(a, b)?, p, values)
            }
        }
    }
}

impl From<PsiFunction> for PsiSpec {
    fn from(psi: PsiFunction) -> Self {
        PsiSpec::from(&psi)
    }
}

impl From<&PsiFunction> for PsiSpec {
    fn from(psi: &PsiFunction) -> Self {
        let boxed = |f: &PsiFunction| Box::new(PsiSpec::from(f));
        match &psi.0.form {
            PsiForm::PowerLog {
                a,
                b,
                gamma,
                delta,
                slowly,
            } => PsiSpec::PowerLog {
                a: *a,
                b: *b,
                gamma: *gamma,
                delta: *delta,
                slowly: *slowly,
            },
            PsiForm::Product(l, r) => PsiSpec::Product {
                lhs: boxed(l),
                rhs: boxed(r),
            },
            PsiForm::PowerScale { inner, gamma } => PsiSpec::PowerScale {
                psi: boxed(inner),
                gamma: *gamma,
            },
            PsiForm::MultInf(l, r) => PsiSpec::MultInf {
                lhs: boxed(l),
                rhs: boxed(r),
            },
            PsiForm::ConvInf(l, r) => PsiSpec::ConvInf {
                lhs: boxed(l),
                rhs: boxed(r),
            },
            PsiForm::SobolevNu { inner, n, m } => PsiSpec::SobolevNu {
                psi: boxed(inner),
                n: *n,
                m: *m,
            },
            PsiForm::YoungFenchel { weight } => PsiSpec::YoungFenchel {
                weight: *weight,
                a: psi.domain().a,
                b: psi.domain().b,
            },
            PsiForm::Tabulated { p, values, .. } => PsiSpec::Tabulated {
                a: psi.domain().a,
                b: psi.domain().b,
                p: p.clone(),
                values: values.clone(),
            },
        }
    }
}
