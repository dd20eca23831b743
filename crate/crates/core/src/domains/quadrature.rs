//! Gauss–Legendre rules and panelled radial grids.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev initial guess, refined by Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared cached rule of order `n`.
    pub fn cached(n: usize) -> std::sync::Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<GaussLegendre>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| std::sync::Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A radial node `r` on `(0, 1)` together with `s = 1 - r` (kept separately
/// so boundary-weighted integrands avoid cancellation) and weight `w`.
#[derive(Debug, Clone, Copy)]
pub struct RadialNode {
    pub r: f64,
    pub s: f64,
    pub w: f64,
}

/// Nodes for `∫_0^1 g(r) dr` on panels `[0, 1/2]` and
/// `[1 - 2^-j, 1 - 2^-(j+1)]` for `j = 1 .. depth`, each split at the
/// requested break radii.
pub fn boundary_clustered_nodes(depth: usize, per_panel: usize, breaks: &[f64]) -> Vec<RadialNode> {
    let gl = GaussLegendre::cached(per_panel);
    // Panel edges expressed in s = 1 - r, from s = 1 down to s = 2^-depth.
    let mut edges_s: Vec<f64> = vec![1.0];
    for j in 1..=depth {
        edges_s.push(0.5f64.powi(j as i32));
    }
    for &b in breaks {
        let sb = 1.0 - b;
        if sb > edges_s[edges_s.len() - 1] && sb < 1.0 {
            edges_s.push(sb);
        }
    }
    edges_s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    edges_s.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out = Vec::with_capacity(edges_s.len() * per_panel);
    for pair in edges_s.windows(2) {
        let (s_hi, s_lo) = (pair[0], pair[1]);
        for (s, w) in gl.on_interval(s_lo, s_hi) {
            out.push(RadialNode { r: 1.0 - s, s, w });
        }
    }
    out
}

/// Gauss nodes on `[a, b]` split into `panels` equal pieces.
pub fn panel_nodes(a: f64, b: f64, panels: usize, per_panel: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::cached(per_panel);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * per_panel);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        out.extend(gl.on_interval(lo, lo + width));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(6);
        // degree 11 is exact for a 6-point rule
        let s: f64 = gl.on_interval(0.0, 2.0).map(|(x, w)| w * x.powi(11)).sum();
        assert!((s - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clustered_nodes_cover_unit_interval() {
        let nodes = boundary_clustered_nodes(20, 8, &[0.5]);
        let total: f64 = nodes.iter().map(|n| n.w).sum();
        assert!((total - (1.0 - 0.5f64.powi(20))).abs() < 1e-13);
        let integral: f64 = nodes.iter().map(|n| n.w * n.s.powf(-0.5)).sum();
        // ∫_0^{1-ε} (1-r)^{-1/2} dr = 2 (1 - sqrt(ε))
        let eps = 0.5f64.powi(20);
        assert!((integral - 2.0 * (1.0 - eps.sqrt())).abs() < 1e-10);
    }
}
