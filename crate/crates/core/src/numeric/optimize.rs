//! One-dimensional search: grid scans and golden-section refinement.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Points where `f` returns `None` are treated as `-inf`.
pub fn golden_max<F>(f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Result<Extremum>
where
    F: Fn(f64) -> Option<f64>,
{
    if !(lo < hi) {
        return Err(Error::RejectedInput(format!("empty search interval [{lo}, {hi}]")));
    }
    let eval = |x: f64| f(x).filter(|v| !v.is_nan()).unwrap_or(f64::NEG_INFINITY);

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut iterations = 0;

    while (b - a) > x_tol * (1.0 + a.abs().max(b.abs())) {
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                lo: a,
                hi: b,
                iterations,
            });
        }
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }

    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Extremum {
        x,
        value,
        iterations,
    })
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
pub fn golden_min<F>(f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Result<Extremum>
where
    F: Fn(f64) -> Option<f64>,
{
    let ext = golden_max(|x| f(x).map(|v| -v), lo, hi, x_tol, max_iter)?;
    Ok(Extremum {
        value: -ext.value,
        ..ext
    })
}

/// Scans `grid`, then refines the best sample by golden-section search on the
/// bracket formed by its neighbours. `grid` must be strictly increasing.
pub fn scan_then_max<F>(f: F, grid: &[f64], x_tol: f64) -> Result<(Extremum, usize)>
where
    F: Fn(f64) -> Option<f64>,
{
    let samples: Vec<f64> = grid
        .iter()
        .map(|&x| f(x).filter(|v| !v.is_nan()).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let (best, best_val) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if best_val == f64::NEG_INFINITY {
        return Err(Error::InsufficientData(
            "objective undefined on every scan point".into(),
        ));
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if lo < hi {
        let refined = golden_max(&f, lo, hi, x_tol, 200)?;
        if refined.value > best_val {
            return Ok((refined, best));
        }
    }
    Ok((
        Extremum {
            x: grid[best],
            value: best_val,
            iterations: 0,
        },
        best,
    ))
}

/// Same as [`scan_then_max`] for minimization.
pub fn scan_then_min<F>(f: F, grid: &[f64], x_tol: f64) -> Result<(Extremum, usize)>
where
    F: Fn(f64) -> Option<f64>,
{
    let (ext, idx) = scan_then_max(|x| f(x).map(|v| -v), grid, x_tol)?;
    Ok((
        Extremum {
            value: -ext.value,
            ..ext
        },
        idx,
    ))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}
