use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::map::{Annulus, GridSolution, Normalization, QuasiconformalMap, Repr, SolveDiagnostics};
use super::transforms::{cauchy_transform, supported_in_half_box, CellBeurling};
use crate::domains::{BeltramiCoefficient, ComplexGrid, DomainTag, GridSpec, Mobius};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub grid: GridSpec,
    /// Relative `L²` size of the last Neumann increment at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    /// Terms of the far-field Laurent expansion kept by the solution.
    pub series_terms: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grid: GridSpec::default(),
            tol: 1e-12,
            max_iter: 500,
            series_terms: 96,
        }
    }
}

impl SolverOptions {
    pub fn with_grid(n: usize, half_width: f64) -> Result<Self> {
        Ok(SolverOptions {
            grid: GridSpec::new(n, half_width)?,
            ..Default::default()
        })
    }
}

/// Consecutive increment growth tolerated before declaring divergence.
const GROWTH_STREAK: usize = 5;

fn l2(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Neumann iteration `h ← μ + μ T[h]`; returns `(h, T[h], diagnostics)`.
pub(crate) fn neumann(
    mu: &ComplexGrid,
    opts: &SolverOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>, SolveDiagnostics)> {
    let n = mu.n();
    let beurling = CellBeurling::new(n, !supported_in_half_box(mu));
    let scale = l2(&mu.values);
    let mut h = mu.values.clone();
    let mut trace = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut streak = 0;
    if scale == 0.0 {
        let zero = vec![Complex64::new(0.0, 0.0); n * n];
        let diag = SolveDiagnostics {
            iterations: 0,
            trace,
            max_ratio,
            residual: 0.0,
        };
        return Ok((zero.clone(), zero, diag));
    }
    for it in 1..=opts.max_iter {
        let th = beurling.apply(&h);
        let next: Vec<Complex64> = mu.values.iter().zip(&th).map(|(m, t)| m + m * t).collect();
        let inc = next
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !inc.is_finite() {
            trace.push(inc);
            return Err(Error::NeumannDivergence {
                iterations: it,
                trace,
            });
        }
        if let Some(&prev) = trace.last() {
            if prev > 0.0 {
                let ratio = inc / prev;
                max_ratio = max_ratio.max(ratio);
                streak = if ratio > 1.0 { streak + 1 } else { 0 };
                if streak >= GROWTH_STREAK {
                    trace.push(inc);
                    return Err(Error::NeumannDivergence {
                        iterations: it,
                        trace,
                    });
                }
            }
        }
        trace.push(inc);
        h = next;
        if inc <= opts.tol * scale {
            let th = beurling.apply(&h);
            let diag = SolveDiagnostics {
                iterations: it,
                trace,
                max_ratio,
                residual: f64::NAN,
            };
            return Ok((h, th, diag));
        }
    }
    Err(Error::NeumannDivergence {
        iterations: opts.max_iter,
        trace,
    })
}

/// Nodes at least `band` cells away from any jump of the sampled coefficient.
fn smooth_mask(mu: &ComplexGrid, band: usize) -> Vec<bool> {
    let n = mu.n();
    let thresh = 1e-3 * mu.sup_norm().max(1e-300);
    let mut jump = vec![false; n * n];
    for row in 0..n - 1 {
        for col in 0..n - 1 {
            let v = mu.get(row, col);
            if (v - mu.get(row, col + 1)).norm() > thresh
                || (v - mu.get(row + 1, col)).norm() > thresh
            {
                jump[row * n + col] = true;
            }
        }
    }
    let mut mask = vec![true; n * n];
    let b = band as i64 + 1;
    for row in 0..n {
        for col in 0..n {
            if !jump[row * n + col] {
                continue;
            }
            for dr in -b..=b {
                for dc in -b..=b {
                    let (r, c) = (row as i64 + dr, col as i64 + dc);
                    if r >= 0 && c >= 0 && (r as usize) < n && (c as usize) < n {
                        mask[r as usize * n + c as usize] = false;
                    }
                }
            }
        }
    }
    mask
}

/// `‖∂̄f - μ ∂f‖_∞ / ‖∂f‖_∞` from centred differences of the samples of `f`.
pub(crate) fn finite_difference_residual(f: &ComplexGrid, mu: &ComplexGrid) -> f64 {
    let n = f.n();
    let step = f.spec.spacing();
    let lo = f.spec.margin_nodes().max(2);
    let mask = smooth_mask(mu, 3);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for row in lo..n - lo {
        for col in lo..n - lo {
            if !mask[row * n + col] {
                continue;
            }
            let fx = (f.get(row, col + 1) - f.get(row, col - 1)) / (2.0 * step);
            let fy = (f.get(row + 1, col) - f.get(row - 1, col)) / (2.0 * step);
            let dz = (fx - Complex64::i() * fy) * 0.5;
            let dzbar = (fx + Complex64::i() * fy) * 0.5;
            worst = worst.max((dzbar - mu.get(row, col) * dz).norm());
            scale = scale.max(dz.norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Affine map sending `f0 ↦ 0` and `f1 ↦ 1`.
pub(crate) fn affine_normalizer(f0: Complex64, f1: Complex64) -> Result<Mobius> {
    let d = f1 - f0;
    if !(d.norm() > 0.0) || !d.is_finite() {
        return Err(Error::Invalid("degenerate normalization".into()));
    }
    Ok(Mobius::affine(1.0 / d, -f0 / d))
}

/// Raw solution on the grid, before renormalization.
pub(crate) fn solve_raw(
    mu_grid: &ComplexGrid,
    opts: &SolverOptions,
) -> Result<(Arc<GridSolution>, SolveDiagnostics)> {
    mu_grid.check_margin()?;
    let sup = mu_grid.sup_norm();
    if !(sup < 1.0) {
        return Err(Error::NotQuasiconformal(sup));
    }
    let (h, th, mut diag) = neumann(mu_grid, opts)?;
    let spec = mu_grid.spec;
    let h = ComplexGrid { spec, values: h };
    let p = cauchy_transform(&h)?;
    let mut f = ComplexGrid::from_fn(spec, |z| z);
    for (a, b) in f.values.iter_mut().zip(&p.values) {
        *a += b;
    }
    let fz = ComplexGrid {
        spec,
        values: th.iter().map(|t| Complex64::new(1.0, 0.0) + t).collect(),
    };
    diag.residual = finite_difference_residual(&f, mu_grid);
    Ok((
        Arc::new(GridSolution::new(f, fz, h, opts.series_terms)),
        diag,
    ))
}

/// Normalized solution of `∂̄f = μ ∂f` on the plane fixing `0`, `1` and `∞`.
pub fn solve_plane(mu: &BeltramiCoefficient) -> Result<QuasiconformalMap> {
    solve_plane_with(mu, &SolverOptions::default())
}

pub fn solve_plane_with(
    mu: &BeltramiCoefficient,
    opts: &SolverOptions,
) -> Result<QuasiconformalMap> {
    opts.grid.validate()?;
    let radius = mu.support().radius().ok_or_else(|| {
        Error::Invalid("the plane solver needs a compactly supported coefficient".into())
    })?;
    let mu_grid = mu.sample(opts.grid);
    let (sol, diag) = solve_raw(&mu_grid, opts)?;
    let f0 = sol.jet(Complex64::new(0.0, 0.0))?.value;
    let f1 = sol.jet(Complex64::new(1.0, 0.0))?.value;
    let post = affine_normalizer(f0, f1)?;
    let margin = opts.grid.margin_nodes() as f64 * opts.grid.spacing();
    Ok(QuasiconformalMap::from_parts(
        Repr::Grid(sol),
        post,
        Normalization::FixZeroOneInfinity,
        DomainTag::Plane,
        Some(Annulus {
            inner: radius,
            outer: f64::INFINITY,
        }),
        mu.on_plane(),
        Some(diag),
        opts.grid.half_width - margin,
    ))
}
