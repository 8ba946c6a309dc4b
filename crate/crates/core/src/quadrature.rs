//! Gauss–Legendre rules and panel-split integration of piecewise-smooth integrands.

use std::sync::OnceLock;

/// Nodes per panel used throughout the crate.
pub const PANEL_NODES: usize = 32;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The default 32-point rule, computed once.
pub fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES))
}

/// Panel edges on [a, b]: split at every interior breakpoint, then subdivide
/// so that no panel is wider than `max_width`.
pub fn panel_edges(a: f64, b: f64, breakpoints: &[f64], max_width: f64) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut edges = vec![a];
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            edges.push(if k == pieces { hi } else { lo + (hi - lo) * k as f64 / pieces as f64 });
        }
    }
    edges
}

/// Quadrature nodes and weights over the given panels.
pub fn panel_rule(edges: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = default_rule();
    let mut nodes = Vec::with_capacity((edges.len() - 1) * xs.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in edges.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        for (x, wt) in xs.iter().zip(ws.iter()) {
            nodes.push(mid + half * x);
            weights.push(half * wt);
        }
    }
    (nodes, weights)
}

/// ∫_a^b g with panels split at `breakpoints`.
pub fn integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, breakpoints: &[f64], max_width: f64) -> f64 {
    let (nodes, weights) = panel_rule(&panel_edges(a, b, breakpoints, max_width));
    nodes.iter().zip(weights.iter()).map(|(&x, &w)| w * g(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        // ∫ x^14 over [-1,1] = 2/15
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn thirty_two_point_rule_sin() {
        let v = integrate(|x| (7.0 * x).sin(), 0.0, 1.0, &[], 1.0);
        let exact = (1.0 - 7f64.cos()) / 7.0;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn panels_split_at_breakpoints() {
        let e = panel_edges(0.0, 1.0, &[0.3], 0.25);
        assert!(e.contains(&0.3));
        assert!(e.windows(2).all(|w| w[1] - w[0] <= 0.25 + 1e-15));
        let step = integrate(|x| if x < 0.3 { 0.0 } else { 1.0 }, 0.0, 1.0, &[0.3], 1.0);
        assert!((step - 0.7).abs() < 1e-14);
    }
}
