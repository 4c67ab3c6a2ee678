//! Rotations of profiles on the circle `(0, 2 pi]` and the shift-gap
//! experiment behind the non-compactness of the Sobolev embedding.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{rejected, Error, Result};
use crate::gnorm::{in_g0_with, sup_ratio};
use crate::measure::RadialFunction;
use crate::numeric::quad::{integrate, QuadOptions};
use crate::psi::PsiFunction;

// Depth of the exponential substitution before the analytic tail takes over.
const DEPTH: f64 = 60.0;

/// `sum_i c_i u((x + eps_i) mod 2 pi)` for a profile `u` on `(0, 2 pi]`
/// made of pure power pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFunction {
    pub profile: RadialFunction,
    pub terms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct Anchor {
    x: f64,
    // terms whose argument is exactly 0 at x
    singular: Vec<usize>,
}

fn wrap(y: f64) -> f64 {
    let w = y.rem_euclid(TAU);
    if w == 0.0 {
        TAU
    } else {
        w
    }
}

// int_lo^hi |val|^p weight, split at the sign changes of val so that the
// cusps of |val|^p sit on panel ends.
fn abs_pow_integral<V, W>(val: V, weight: W, lo: f64, hi: f64, p: f64, opts: QuadOptions) -> f64
where
    V: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    const SCAN: usize = 16;
    let mut cuts = vec![lo];
    let mut prev = (lo, val(lo));
    let mut scale = prev.1.abs().powf(p) * weight(lo);
    for k in 1..=SCAN {
        let x = lo + (hi - lo) * k as f64 / SCAN as f64;
        let v = val(x);
        scale = scale.max(v.abs().powf(p) * weight(x));
        if prev.1 * v < 0.0 {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            while b - a > 1e-13 * (1.0 + a.abs()) {
                let m = 0.5 * (a + b);
                if val(m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            // roots in rounding noise next to a cut are dropped
            if root - cuts[cuts.len() - 1] > 1e-12 * (hi - lo) && hi - root > 1e-12 * (hi - lo) {
                cuts.push(root);
            }
        }
        prev = (x, v);
    }
    cuts.push(hi);
    let opts = QuadOptions {
        abs_tol: opts.abs_tol.max(1e-15 * scale * (hi - lo)),
        ..opts
    };
    cuts.windows(2)
        .map(|w| integrate(|x| val(x).abs().powf(p) * weight(x), w[0], w[1], opts).value)
        .sum()
}

impl CircleFunction {
    pub fn new(profile: RadialFunction) -> Result<Self> {
        profile.validate()?;
        for (i, t) in profile.live_terms() {
            let (_, hi) = t.r_support();
            if hi > TAU * (1.0 + 1e-12) {
                return Err(rejected(format!("piece {i} reaches beyond 2 pi")));
            }
            if t.logpow != 0.0 || !t.slowly.is_unit() || t.shift != 0.0 {
                return Err(rejected(format!("piece {i}: circle profiles take unshifted pure powers")));
            }
        }
        Ok(Self {
            profile,
            terms: vec![(1.0, 0.0)],
        })
    }

    /// `u((x + eps) mod 2 pi)`.
    pub fn rotated(&self, eps: f64) -> Self {
        Self {
            profile: self.profile.clone(),
            terms: self.terms.iter().map(|&(c, e)| (c, (e + eps).rem_euclid(TAU))).collect(),
        }
    }

    pub fn minus(&self, other: &CircleFunction) -> Result<Self> {
        if self.profile != other.profile {
            return Err(rejected("circle functions differ in profile"));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(c, e)| (-c, e)));
        Ok(Self {
            profile: self.profile.clone(),
            terms,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(c, e)| c * self.profile.eval(wrap(x + e))).sum()
    }

    // Most singular power at 0 and its coefficient.
    fn lead(&self) -> Option<(f64, f64)> {
        self.profile
            .live_terms()
            .filter(|(_, t)| t.r_support().0 == 0.0 && t.power < 0.0)
            .map(|(_, t)| (t.coef * t.scale.powf(-t.power), t.power))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn support_ends(&self) -> Vec<f64> {
        self.profile
            .live_terms()
            .flat_map(|(_, t)| {
                let (lo, hi) = t.r_support();
                [lo, hi]
            })
            .filter(|&b| b > 0.0 && b < TAU * (1.0 - 1e-15))
            .collect()
    }

    fn anchors(&self) -> Vec<Anchor> {
        let mut pts: Vec<Anchor> = Vec::new();
        for (i, &(_, e)) in self.terms.iter().enumerate() {
            pts.push(Anchor {
                x: (TAU - e).rem_euclid(TAU),
                singular: vec![i],
            });
            for b in self.support_ends() {
                pts.push(Anchor {
                    x: (b - e).rem_euclid(TAU),
                    singular: Vec::new(),
                });
            }
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut out: Vec<Anchor> = Vec::new();
        for a in pts {
            match out.last_mut() {
                Some(last) if (a.x - last.x).abs() <= 1e-14 => last.singular.extend(a.singular),
                _ => out.push(a),
            }
        }
        out
    }

    // Value at anchor + dir * z, with exact arguments for terms singular there.
    fn near(&self, anchor: &Anchor, dir: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, &(c, e))| {
                let y = if anchor.singular.contains(&i) {
                    if dir > 0.0 {
                        z
                    } else {
                        TAU - z
                    }
                } else {
                    wrap(anchor.x + dir * z + e)
                };
                c * self.profile.eval(y)
            })
            .sum()
    }

    fn half(&self, anchor: &Anchor, dir: f64, width: f64, p: f64) -> Result<f64> {
        let opts = QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_intervals: 2000,
        };
        let lead = match self.lead() {
            Some(l) if dir > 0.0 && !anchor.singular.is_empty() => l,
            _ => return Ok(abs_pow_integral(|z| self.near(anchor, dir, z), |_| 1.0, 0.0, width, p, opts)),
        };
        let (c, e) = lead;
        let k = 1.0 + p * e;
        if !(k > 0.0) {
            return Err(Error::Divergence {
                piece: "circle profile at its singular point".into(),
                critical: -1.0 / e,
            });
        }
        // x = anchor + width * e^{-v}, then the pure leading power beyond DEPTH
        let z = |v: f64| width * (-v).exp();
        let body_total = abs_pow_integral(|v| self.near(anchor, dir, z(v)), z, 0.0, DEPTH, p, opts);
        let amp: f64 = anchor.singular.iter().map(|&i| self.terms[i].0 * c).sum();
        Ok(body_total + amp.abs().powf(p) * width.powf(k) * (-DEPTH * k).exp() / k)
    }

    /// `(int_0^{2 pi} |v(x)|^p dx)^{1/p}`.
    pub fn lp(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(rejected(format!("exponent p must be positive, got {p}")));
        }
        let pts = self.anchors();
        let mut total = 0.0;
        for (j, a) in pts.iter().enumerate() {
            let (b, bx) = match pts.get(j + 1) {
                Some(b) => (b, b.x),
                None => (&pts[0], pts[0].x + TAU),
            };
            let h = 0.5 * (bx - a.x);
            if h <= 0.0 {
                continue;
            }
            total += self.half(a, 1.0, h, p)?;
            total += self.half(b, -1.0, h, p)?;
        }
        Ok(total.powf(1.0 / p))
    }
}

/// Minimum of `||T_eps u - T_delta u||_{G(psi)}` over distinct grid pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub min_gap: f64,
    pub eps: f64,
    pub delta: f64,
    /// `(|eps - delta|, gap)` for every distinct difference.
    pub differences: Vec<(f64, f64)>,
}

/// Pairwise shift gaps without the `G^0` precondition. Rotation leaves the
/// norms invariant, so each gap depends on `|eps - delta|` only.
pub fn min_shift_gap(u: &CircleFunction, psi: &PsiFunction, eps_grid: &[f64]) -> Result<GapScan> {
    let mut grid = eps_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] == w[1]) || grid[0] < 0.0 {
        return Err(rejected("shift grid needs at least two distinct non-negative values"));
    }
    let mut diffs: Vec<(f64, f64, f64)> = Vec::new();
    for (i, &e) in grid.iter().enumerate() {
        for &d in &grid[i + 1..] {
            diffs.push((d - e, e, d));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    diffs.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * b.0);
    let gaps: Vec<(f64, f64)> = diffs
        .par_iter()
        .map(|&(d, _, _)| {
            let v = u.rotated(d).minus(u)?;
            Ok((d, sup_ratio(|p| v.lp(p), psi)?.norm))
        })
        .collect::<Result<_>>()?;
    let (k, &(_, min_gap)) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty");
    Ok(GapScan {
        min_gap,
        eps: diffs[k].1,
        delta: diffs[k].2,
        differences: gaps,
    })
}

/// [`min_shift_gap`] for a witness outside `G^0(psi)`.
pub fn noncompact_gap(u: &CircleFunction, psi: &PsiFunction, eps_grid: &[f64]) -> Result<GapScan> {
    if in_g0_with(|p| u.lp(p), psi)?.member {
        return Err(Error::Inapplicable(
            "u lies in G^0(psi); the shift family of such u is not separated".into(),
        ));
    }
    min_shift_gap(u, psi, eps_grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncompactRound {
    pub k: usize,
    pub witness_gap: f64,
    pub control_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncompactReport {
    pub eps0: f64,
    pub rounds: Vec<NoncompactRound>,
    pub witness_in_g0: bool,
    pub control_in_g0: bool,
    /// Last-round witness gap over the first-round one.
    pub witness_retention: f64,
    /// First-round control gap over the last-round one.
    pub control_shrinkage: f64,
    pub pass: bool,
}

/// Shift gaps on grids `{eps0 k / K : 0 < k < K}` for each `K` in `ks`.
/// Passes when the witness keeps at least half of its first gap and the
/// control gap shrinks at least tenfold.
pub fn noncompact_experiment(
    witness: &CircleFunction,
    control: &CircleFunction,
    psi: &PsiFunction,
    eps0: f64,
    ks: &[usize],
) -> Result<NoncompactReport> {
    if !(eps0 > 0.0 && eps0 < TAU) || ks.len() < 2 || ks.iter().any(|&k| k < 3) {
        return Err(rejected("need 0 < eps0 < 2 pi and at least two grids with K >= 3"));
    }
    let witness_in_g0 = in_g0_with(|p| witness.lp(p), psi)?.member;
    let control_in_g0 = in_g0_with(|p| control.lp(p), psi)?.member;
    let mut rounds = Vec::new();
    for &k in ks {
        let grid: Vec<f64> = (1..k).map(|j| eps0 * j as f64 / k as f64).collect();
        let w = if witness_in_g0 {
            min_shift_gap(witness, psi, &grid)?
        } else {
            noncompact_gap(witness, psi, &grid)?
        };
        let c = min_shift_gap(control, psi, &grid)?;
        rounds.push(NoncompactRound {
            k,
            witness_gap: w.min_gap,
            control_gap: c.min_gap,
        });
    }
    let (first, last) = (&rounds[0], &rounds[rounds.len() - 1]);
    let witness_retention = rounds.iter().map(|r| r.witness_gap).fold(f64::INFINITY, f64::min) / first.witness_gap;
    let control_shrinkage = first.control_gap / last.control_gap;
    let pass = !witness_in_g0 && control_in_g0 && witness_retention >= 0.5 && control_shrinkage >= 10.0;
    Ok(NoncompactReport {
        eps0,
        rounds,
        witness_in_g0,
        control_in_g0,
        witness_retention,
        control_shrinkage,
        pass,
    })
}
