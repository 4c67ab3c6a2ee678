//! `G(psi)` norms `sup_p |f|_p / psi(p)`, fundamental functions, dilation
//! norms, Boyd indices and the `G^0` membership test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{LpNorm, RadialFunction, WeightedSpace};
use crate::numeric::fit::least_squares;
use crate::numeric::optimize::golden_max;
use crate::psi::{ExponentInterval, PsiFunction, ENDPOINT_GUARD};

/// Points on the main search grid.
pub const GRID_POINTS: usize = 256;
/// Grid inset from each endpoint, relative to the interval width.
pub const GRID_INSET: f64 = 1e-4;
/// Successively tighter insets probed when the maximum sits at the grid edge.
const MIGRATION_INSETS: [f64; 4] = [1e-5, 1e-6, 1e-7, 1e-8];
/// Cut-off below which `G^0` ratios count as vanished, relative to the peak.
pub const G0_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attained {
    Interior,
    EndpointA,
    EndpointB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GNormResult {
    pub norm: f64,
    pub p_star: f64,
    pub attained: Attained,
    pub samples: Vec<(f64, f64)>,
    /// Ratios at the tightening endpoint insets, when the sup migrated there.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trend: Vec<(f64, f64)>,
}

fn width(d: &ExponentInterval) -> f64 {
    d.working_upper() - d.a
}

// Distance from the endpoint, never closer than the psi evaluation guard.
fn inset(d: &ExponentInterval, rel: f64) -> f64 {
    (rel * width(d)).max(4.0 * ENDPOINT_GUARD)
}

/// `sup_p numer(p) / psi(p)` over the domain of `psi`.
pub fn sup_ratio<F>(numer: F, psi: &PsiFunction) -> Result<GNormResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let d = psi.domain();
    let ratio = |p: f64| -> Result<f64> { Ok(numer(p)? / psi.eval(p)?) };
    let lo = d.a + inset(&d, GRID_INSET);
    let hi = if d.is_bounded() { d.b - inset(&d, GRID_INSET) } else { d.working_upper() };
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let samples: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&p| ratio(p).map(|r| (p, r)))
        .collect::<Result<_>>()?;
    let (k, &(p_best, r_best)) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty grid");

    let finish = |norm: f64, p_star: f64, attained: Attained, trend: Vec<(f64, f64)>| GNormResult {
        norm,
        p_star,
        attained,
        samples: samples.clone(),
        trend,
    };

    let toward_a = k == 0;
    let toward_b = k == GRID_POINTS - 1 && d.is_bounded();
    if !toward_a && !toward_b {
        let (l, h) = (grid[k.saturating_sub(1)], grid[(k + 1).min(GRID_POINTS - 1)]);
        let ext = golden_max(|p| ratio(p).ok(), l, h, 1e-12, 300)?;
        return Ok(if ext.value > r_best {
            finish(ext.value, ext.x, Attained::Interior, Vec::new())
        } else {
            finish(r_best, p_best, Attained::Interior, Vec::new())
        });
    }

    // Endpoint side: walk the insets inward in log-distance.
    let (end, dir) = if toward_a { (d.a, 1.0) } else { (d.b, -1.0) };
    let at = |m: f64| end + dir * m;
    let mut trend = vec![(p_best, r_best)];
    for rel in MIGRATION_INSETS {
        let p = at(inset(&d, rel));
        trend.push((p, ratio(p)?));
    }
    let (j, &(pj, rj)) = trend
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty trend");

    if j + 1 < trend.len() {
        // Maximum strictly inside the probed insets: refine in ln(distance).
        let outer = if j == 0 {
            (grid[if toward_a { 1 } else { GRID_POINTS - 2 }] - end).abs()
        } else {
            (trend[j - 1].0 - end).abs()
        };
        let inner = (trend[j + 1].0 - end).abs();
        let ext = golden_max(|x| ratio(at(x.exp())).ok(), inner.ln(), outer.ln(), 1e-12, 300)?;
        return Ok(if ext.value > rj {
            finish(ext.value, at(ext.x.exp()), Attained::Interior, trend)
        } else {
            finish(rj, pj, Attained::Interior, trend)
        });
    }

    // Monotone toward the endpoint: distinguish a finite sup from blowup by
    // whether the per-decade increments shrink.
    let inc: Vec<f64> = trend.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let (prev, last) = (inc[inc.len() - 2], inc[inc.len() - 1]);
    let significant = last > 1e-9 * rj;
    if significant && last >= 0.9 * prev {
        return Err(Error::NotInSpace { endpoint: end, trend });
    }
    let attained = if toward_a { Attained::EndpointA } else { Attained::EndpointB };
    Ok(finish(rj, pj, attained, trend))
}

/// `||f||_{G(psi)}` on `space`.
pub fn g_norm<F: LpNorm>(f: &F, psi: &PsiFunction, space: &WeightedSpace) -> Result<GNormResult> {
    sup_ratio(
        |p| {
            f.lp(space, p).map_err(|e| match e {
                Error::Divergence { .. } => Error::NormInfinite { p },
                other => other,
            })
        },
        psi,
    )
}

/// `phi(delta) = sup_p delta^{1/p} / psi(p)`, the norm of an indicator of a set of measure `delta`.
pub fn fundamental_phi(psi: &PsiFunction, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::RejectedInput(format!("delta must be positive, got {delta}")));
    }
    Ok(sup_ratio(|p| Ok(delta.powf(1.0 / p)), psi)?.norm)
}

/// `||sigma_s|| = max(s^{d/a}, s^{d/b})` with `d = n + sigma`.
pub fn dilation_norm(psi: &PsiFunction, space: &WeightedSpace, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::RejectedInput(format!("dilation factor must be positive, got {s}")));
    }
    let dom = psi.domain();
    let dim = space.dim();
    let hi = s.powf(dim / dom.a);
    let lo = if dom.is_bounded() { s.powf(dim / dom.b) } else { 1.0 };
    Ok(hi.max(lo))
}

/// `||sigma_s f||_{G(psi)} / ||f||_{G(psi)}`, a lower bound for the operator norm.
pub fn dilation_norm_numeric(f: &RadialFunction, psi: &PsiFunction, space: &WeightedSpace, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::RejectedInput(format!("dilation factor must be positive, got {s}")));
    }
    let base = g_norm(f, psi, space)?.norm;
    let moved = g_norm(&f.dilated(s), psi, space)?.norm;
    Ok(moved / base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoydEstimate {
    pub gamma1: f64,
    pub gamma2: f64,
    pub residual1: f64,
    pub residual2: f64,
}

fn slope_of<G: Fn(f64) -> Result<f64>>(norm: G, sign: f64) -> Result<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 10..=30 {
        let s = 2f64.powi(sign as i32 * k);
        xs.push(s.ln());
        ys.push(norm(s)?.ln());
    }
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::InsufficientData("degenerate Boyd fit".into()))?;
    Ok((fit.slope, fit.max_residual))
}

/// Slopes of `log ||sigma_s|| / log s` over `s = 2^{-k}` and `s = 2^k`, `k = 10..30`.
pub fn boyd_indices(psi: &PsiFunction, space: &WeightedSpace) -> Result<BoydEstimate> {
    let (gamma1, residual1) = slope_of(|s| dilation_norm(psi, space, s), -1.0)?;
    let (gamma2, residual2) = slope_of(|s| dilation_norm(psi, space, s), 1.0)?;
    Ok(BoydEstimate {
        gamma1,
        gamma2,
        residual1,
        residual2,
    })
}

/// Boyd indices from numeric dilation norms of a test function `f`.
pub fn boyd_indices_numeric(f: &RadialFunction, psi: &PsiFunction, space: &WeightedSpace) -> Result<BoydEstimate> {
    let base = g_norm(f, psi, space)?.norm;
    let norm = |s: f64| Ok(g_norm(&f.dilated(s), psi, space)?.norm / base);
    let (gamma1, residual1) = slope_of(norm, -1.0)?;
    let (gamma2, residual2) = slope_of(norm, 1.0)?;
    Ok(BoydEstimate {
        gamma1,
        gamma2,
        residual1,
        residual2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointTrend {
    pub endpoint: f64,
    pub ratios: Vec<(f64, f64)>,
    pub decreasing: bool,
    pub vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G0Report {
    pub member: bool,
    pub peak: f64,
    pub trends: Vec<EndpointTrend>,
}

/// Tests `|f|_p / psi(p) -> 0` toward every endpoint where `psi` blows up,
/// probing at distances `(w/4) 2^{-k}`.
pub fn in_g0<F: LpNorm>(f: &F, psi: &PsiFunction, space: &WeightedSpace) -> Result<G0Report> {
    in_g0_with(|p| f.lp(space, p), psi)
}

/// [`in_g0`] for any norm map `p -> |f|_p`.
pub fn in_g0_with<F>(norm: F, psi: &PsiFunction) -> Result<G0Report>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (blow_a, blow_b) = psi.endpoint_blowup();
    if !blow_a && !blow_b {
        return Err(Error::Inapplicable(
            "psi stays bounded at both endpoints, so G^0 is not defined by a limit".into(),
        ));
    }
    let peak = sup_ratio(&norm, psi)?.norm;
    let d = psi.domain();
    let w = width(&d);
    let mut trends = Vec::new();
    for (end, dir, on) in [(d.a, 1.0, blow_a), (d.b, -1.0, blow_b)] {
        if !on {
            continue;
        }
        let mut ratios = Vec::new();
        for k in 0..=28 {
            let m = 0.25 * w * 0.5f64.powi(k);
            if m < 4.0 * ENDPOINT_GUARD {
                break;
            }
            let p = end + dir * m;
            ratios.push((p, norm(p)? / psi.eval(p)?));
        }
        let tail = &ratios[ratios.len().saturating_sub(6)..];
        let decreasing = tail.windows(2).all(|w| w[1].1 < w[0].1);
        let vanishes = ratios.last().is_some_and(|r| r.1 < G0_THRESHOLD * peak);
        trends.push(EndpointTrend {
            endpoint: end,
            ratios,
            decreasing,
            vanishes,
        });
    }
    let member = trends.iter().all(|t| t.decreasing && t.vanishes);
    Ok(G0Report { member, peak, trends })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Piece, Region};
    use crate::psi::SlowlyVarying;
    use approx::assert_relative_eq;

    fn line() -> WeightedSpace {
        WeightedSpace::euclidean(1)
    }

    fn outer_rep() -> (RadialFunction, PsiFunction) {
        // |I(r > 1) r^{-1}|_p = (2/(p-1))^{1/p} on (1, inf); truncate to (1, 5)
        let f = RadialFunction::single(Piece::new(Region::Outer, -1.0, 0.0));
        let dom = ExponentInterval::new(1.0, 5.0).unwrap();
        let psi = PsiFunction::tabulate(dom, 2048, |p| Ok((2.0 / (p - 1.0)).powf(1.0 / p))).unwrap();
        (f, psi)
    }

    #[test]
    fn representation_has_unit_norm() {
        let (f, psi) = outer_rep();
        let r = g_norm(&f, &psi, &line()).unwrap();
        assert_relative_eq!(r.norm, 1.0, epsilon = 1e-6);
        let r3 = g_norm(&f.scaled_by(3.0), &psi, &line()).unwrap();
        assert_relative_eq!(r3.norm, 3.0 * r.norm, max_relative = 1e-12);
        for (p, ratio) in &r.samples {
            assert!(*ratio <= r.norm * (1.0 + 1e-12), "p = {p}");
        }
    }

    #[test]
    fn power_log_representation_is_bounded_both_ways() {
        let (a, b, alpha, beta) = (1.5, 4.0, 0.5, 0.25);
        let h = RadialFunction::outer_power_log(a, alpha, SlowlyVarying::Unit)
            .plus(&RadialFunction::inner_power_log(b, beta, SlowlyVarying::Unit));
        let psi = PsiFunction::power_log(a, b, alpha + 1.0 / a, beta + 1.0 / b, SlowlyVarying::Unit).unwrap();
        let r = g_norm(&h, &psi, &line()).unwrap();
        let min = r.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        assert!(r.norm.is_finite() && min > 0.0);
    }

    #[test]
    fn unbounded_ratio_is_not_in_space() {
        // psi with a weaker blowup at b than |g|_p
        let g = RadialFunction::inner_power_log(2.0, 0.0, SlowlyVarying::Unit);
        let psi = PsiFunction::power_log(1.0, 2.0, 0.0, 0.2, SlowlyVarying::Unit).unwrap();
        match g_norm(&g, &psi, &line()) {
            Err(Error::NotInSpace { endpoint, trend }) => {
                assert_eq!(endpoint, 2.0);
                assert!(trend.len() >= 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        let outer = RadialFunction::outer_power_log(3.0, 0.0, SlowlyVarying::Unit);
        assert_eq!(g_norm(&outer, &psi, &line()).unwrap_err().name(), "NormInfinite");
    }

    #[test]
    fn phi_examples() {
        let one = PsiFunction::constant(ExponentInterval::new(1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(fundamental_phi(&one, 1.0).unwrap(), 1.0, epsilon = 1e-14);

        let psi = PsiFunction::power_log(1.0, 2.0, 0.0, 1.0, SlowlyVarying::Unit).unwrap();
        let delta = 1e-6;
        let v = fundamental_phi(&psi, delta).unwrap();
        let mut oracle = 0.0f64;
        for k in 1..100_000 {
            let p = 1.0 + k as f64 / 100_000.0;
            oracle = oracle.max(delta.powf(1.0 / p) * (2.0 - p));
        }
        assert!(v >= oracle * (1.0 - 1e-12));
        assert_relative_eq!(v, oracle, max_relative = 1e-6);
        assert!(fundamental_phi(&psi, 2.0 * delta).unwrap() >= v);
    }

    #[test]
    fn dilation_examples() {
        let psi = PsiFunction::power_log(2.0, 4.0, 1.0, 1.0, SlowlyVarying::Unit).unwrap();
        let one_d = WeightedSpace::half_line();
        assert_relative_eq!(dilation_norm(&psi, &one_d, 16.0).unwrap(), 4.0, max_relative = 1e-15);
        assert_eq!(dilation_norm(&psi, &one_d, 1.0).unwrap(), 1.0);
        let b = boyd_indices(&psi, &one_d).unwrap();
        assert_relative_eq!(b.gamma1, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.gamma2, 0.5, epsilon = 1e-12);
        assert!(b.residual1 < 1e-6 && b.residual2 < 1e-6);

        let w = WeightedSpace::new(2, 1.0).unwrap();
        let psi13 = PsiFunction::power_log(1.0, 3.0, 1.0, 1.0, SlowlyVarying::Unit).unwrap();
        let b = boyd_indices(&psi13, &w).unwrap();
        assert_relative_eq!(b.gamma1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.gamma2, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn numeric_dilation_matches_for_representation() {
        let space = WeightedSpace::half_line();
        let f = RadialFunction::outer_power_log(2.0, 0.0, SlowlyVarying::Unit)
            .plus(&RadialFunction::inner_power_log(4.0, 0.0, SlowlyVarying::Unit));
        let dom = ExponentInterval::new(2.0, 4.0).unwrap();
        let psi = PsiFunction::tabulate(dom, 2048, |p| f.lp(&space, p)).unwrap();
        for s in [1.0 / 64.0, 0.5, 3.0, 1024.0] {
            let num = dilation_norm_numeric(&f, &psi, &space, s).unwrap();
            let exact = dilation_norm(&psi, &space, s).unwrap();
            assert!((num / exact - 1.0).abs() < 1e-2, "s = {s}: {num} vs {exact}");
            assert!(num <= exact * (1.0 + 1e-6));
        }
    }

    #[test]
    fn g0_membership() {
        let space = line();
        let (a, b) = (1.5, 4.0);
        let h = RadialFunction::outer_power_log(a, 0.0, SlowlyVarying::Unit)
            .plus(&RadialFunction::inner_power_log(b, 0.0, SlowlyVarying::Unit));
        let dom = ExponentInterval::new(a, b).unwrap();
        let rep = PsiFunction::tabulate(dom, 2048, |p| h.lp(&space, p)).unwrap();
        assert!(!in_g0(&h, &rep, &space).unwrap().member);

        let bump = RadialFunction::indicator(1.0, 2.0);
        let psi = PsiFunction::power_log(a, b, 0.0, 1.0, SlowlyVarying::Unit).unwrap();
        assert!(in_g0(&bump, &psi, &space).unwrap().member);

        let flat = PsiFunction::constant(dom, 1.0).unwrap();
        assert_eq!(in_g0(&bump, &flat, &space).unwrap_err().name(), "Inapplicable");
    }
}
