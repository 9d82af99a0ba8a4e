//! Derivative-free one-dimensional minimization with an explicit
//! unimodality check.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GRID_POINTS: usize = 9;
const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// The minimizer sits on the hard lower bound.
    pub at_lower_bound: bool,
    pub evaluations: usize,
}

/// Golden-section search on `[a, b]`, stopping once the bracket is narrower
/// than `tol`. Returns the best evaluated point.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, usize) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while (b - a) > tol && evals < 500 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    evals += 1;
    let mut best = (mid, fm);
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }
    (best.0, best.1, evals)
}

/// Minimizes `f` over `[lower_bound, ∞)` starting from the bracket
/// `[lo, hi]`.
///
/// The bracket is sampled on a coarse grid; if the smallest sample sits on
/// an edge the bracket is expanded geometrically (never below
/// `lower_bound`). The coarse samples must decrease then increase; any other
/// shape is reported as an error instead of guessing a minimizer.
pub fn minimize_bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    lower_bound: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<Minimum> {
    lo = lo.max(lower_bound);
    if !(hi > lo) {
        hi = lo + (hi - lo).abs().max(tol * 1e3);
    }
    let mut evaluations = 0;
    for expansion in 0..=MAX_EXPANSIONS {
        let xs: Vec<f64> = (0..GRID_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        evaluations += GRID_POINTS;
        if fs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Optimization(format!(
                "objective not finite on bracket [{lo}, {hi}]"
            )));
        }
        let j = argmin(&fs);
        let width = hi - lo;
        if j == GRID_POINTS - 1 {
            hi += width * 2f64.powi(expansion as i32 + 1);
            continue;
        }
        if j == 0 && lo > lower_bound {
            lo = (lo - width * 2f64.powi(expansion as i32 + 1)).max(lower_bound);
            continue;
        }
        check_unimodal(&xs, &fs, j)?;
        let a = if j == 0 { xs[0] } else { xs[j - 1] };
        let b = xs[j + 1];
        let (x, value, evals) = golden_section(&mut f, a, b, 0.5 * tol);
        evaluations += evals;
        let (x, value) = if j == 0 {
            let f0 = fs[0];
            if f0 <= value {
                (xs[0], f0)
            } else {
                (x, value)
            }
        } else {
            (x, value)
        };
        let at_lower_bound = x - lower_bound <= tol;
        return Ok(Minimum {
            x,
            value,
            at_lower_bound,
            evaluations,
        });
    }
    Err(Error::Optimization(format!(
        "minimum not bracketed after {MAX_EXPANSIONS} expansions (last bracket [{lo}, {hi}])"
    )))
}

fn argmin(fs: &[f64]) -> usize {
    fs.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty")
}

fn check_unimodal(xs: &[f64], fs: &[f64], j: usize) -> Result<()> {
    let scale = fs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    let descending = fs[..=j].windows(2).all(|w| w[1] <= w[0] + slack);
    let ascending = fs[j..].windows(2).all(|w| w[1] + slack >= w[0]);
    if descending && ascending {
        Ok(())
    } else {
        Err(Error::Optimization(format!(
            "objective is not unimodal on [{}, {}]",
            xs[0],
            xs[xs.len() - 1]
        )))
    }
}
