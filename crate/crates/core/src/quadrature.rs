//! Gauss–Legendre quadrature: fixed composite rules over caller-supplied
//! breakpoints, and a globally adaptive panel-bisection integrator.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, LogSumExp};

/// Nodes per panel for the composite rule.
pub const PANEL_NODES: usize = 64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mapped `(node, weight)` pairs for `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut acc = CompensatedSum::new();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn rule64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_NODES))
}

fn rule32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Sorted, deduplicated panel edges covering `[a, b]` with spacing at most
/// `max_width`, always including every breakpoint that falls inside.
pub fn panel_edges(a: f64, b: f64, max_width: f64, breakpoints: &[f64]) -> Vec<f64> {
    assert!(b > a && max_width > 0.0);
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));

    let mut edges = Vec::with_capacity(cuts.len() * 4);
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        for j in 0..pieces {
            edges.push(lo + (hi - lo) * j as f64 / pieces as f64);
        }
    }
    edges.push(b);
    edges
}

/// Composite 64-point rule over consecutive `edges`.
pub fn composite<F: FnMut(f64) -> f64>(edges: &[f64], mut f: F) -> f64 {
    let rule = rule64();
    let mut acc = CompensatedSum::new();
    for pair in edges.windows(2) {
        for (x, w) in rule.mapped(pair[0], pair[1]) {
            acc.add(w * f(x));
        }
    }
    acc.value()
}

/// Composite 64-point rule for a positive integrand given by its logarithm.
/// Returns `ln ∫ f`.
pub fn composite_ln<F: FnMut(f64) -> f64>(edges: &[f64], mut ln_f: F) -> f64 {
    let rule = rule64();
    let mut acc = LogSumExp::new();
    for pair in edges.windows(2) {
        for (x, w) in rule.mapped(pair[0], pair[1]) {
            acc.add(ln_f(x) + w.ln());
        }
    }
    acc.ln_value()
}

/// Globally adaptive Gauss–Legendre integration: panels are bisected,
/// largest error estimate first, until the 32/64-point discrepancy summed
/// over all panels is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, abs_tol: f64, rel_tol: f64, mut f: F) -> Result<f64> {
    const MAX_PANELS: usize = 4096;
    let mut eval = |lo: f64, hi: f64| {
        let mut fine = CompensatedSum::new();
        let mut coarse = CompensatedSum::new();
        for (x, w) in rule64().mapped(lo, hi) {
            fine.add(w * f(x));
        }
        for (x, w) in rule32().mapped(lo, hi) {
            coarse.add(w * f(x));
        }
        let v = fine.value();
        (v, (v - coarse.value()).abs())
    };

    let (v, e) = eval(a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = crate::sum::sum(panels.iter().map(|p| p.2));
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "adaptive rule did not converge on [{a}, {b}] (error estimate {err:e})"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = eval(lo, mid);
        let (v2, e2) = eval(mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        for n in [1, 2, 5, 32, 64] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            for i in 0..n {
                assert!((g.nodes[i] + g.nodes[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let g = GaussLegendre::new(5);
        // ∫_{-1}^{1} x^8 = 2/9
        let v = g.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let v = g.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 1024.0 / 10.0).abs() < 1e-12);
        let v = g.integrate(-1.0, 1.0, |x| x.powi(10));
        assert!((v - 2.0 / 11.0).abs() > 1e-6);
    }

    #[test]
    fn composite_gaussian_mass() {
        let edges = panel_edges(-12.0, 12.0, 1.0, &[]);
        let v = composite(&edges, crate::special::norm_pdf);
        assert!((v - 1.0).abs() < 1e-14);
        let ln_v = composite_ln(&edges, crate::special::ln_norm_pdf);
        assert!(ln_v.abs() < 1e-14);
    }

    #[test]
    fn breakpoints_are_kept() {
        let e = panel_edges(0.0, 3.0, 1.0, &[0.5, 2.25, 7.0]);
        assert!(e.contains(&0.5) && e.contains(&2.25));
        assert_eq!(*e.first().unwrap(), 0.0);
        assert_eq!(*e.last().unwrap(), 3.0);
        assert!(e.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 1.0 + 1e-12));
    }

    #[test]
    fn adaptive_handles_kinks() {
        // ∫_{-1}^{2} |x|^{3/2} dx = (1 + 2^{5/2}) / 2.5
        let want = (1.0 + 2f64.powf(2.5)) / 2.5;
        let v = adaptive(-1.0, 2.0, 1e-13, 1e-13, |x: f64| x.abs().powf(1.5)).unwrap();
        assert!((v - want).abs() < 1e-11, "{v} vs {want}");
    }
}
