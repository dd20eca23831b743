use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::function::{
    BoundaryDomain, BoundaryFunction, BoundaryHomeomorphism, BoundaryNormalization,
};
use super::trace::{boundary_trace_with, Trace, TraceOptions};
use crate::domains::{
    transport_coefficient, BeltramiCoefficient, CayleyDirection, CoefficientKind, DomainTag,
    Support,
};
use crate::error::{Error, Result};
use crate::solver::{
    chain_rule_at, solve_half_plane, solve_plane_with, QuasiconformalMap, SolverOptions,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeldingOptions {
    pub solver: SolverOptions,
    /// Boundary maps are sampled on `[-T, T]`.
    pub truncation: f64,
    pub samples: usize,
}

impl Default for WeldingOptions {
    fn default() -> Self {
        WeldingOptions {
            solver: SolverOptions::with_grid(256, 8.0).expect("valid grid"),
            truncation: 4.0,
            samples: 1024,
        }
    }
}

/// `f^μ|_R = g⁻¹ ∘ f_μ|_R` computed from three plane solves.
#[derive(Debug, Clone)]
pub struct Welding {
    /// The coefficient on the upper half-plane.
    pub mu: BeltramiCoefficient,
    /// Self-map of the upper half-plane with dilatation `μ`.
    pub f_sym: QuasiconformalMap,
    /// Plane map with dilatation `μ` on the upper half-plane, conformal below.
    pub f_mu: QuasiconformalMap,
    /// Plane map conformal on the upper half-plane with `f_μ = g ∘ f^μ`.
    pub g: QuasiconformalMap,
    /// `g⁻¹ ∘ f_μ` on the real line.
    pub h: BoundaryHomeomorphism,
    /// Trace of `f^μ` computed directly.
    pub direct: BoundaryHomeomorphism,
    pub f_trace: BoundaryFunction,
    pub g_trace: BoundaryFunction,
    /// `sup |h - direct|`.
    pub consistency: f64,
}

fn trace_options(opts: &WeldingOptions, truncation: f64) -> TraceOptions {
    TraceOptions {
        samples: opts.samples,
        truncation,
        ..TraceOptions::default()
    }
}

/// `μ` on the upper half-plane, zero below, as a plane coefficient.
fn upper_only(mu: &BeltramiCoefficient) -> Result<BeltramiCoefficient> {
    let inner = mu.clone();
    Ok(BeltramiCoefficient::from_fn(
        DomainTag::Plane,
        mu.support(),
        mu.sup_norm(),
        CoefficientKind::Derived {
            description: "upper half-plane part".into(),
        },
        move |z| if z.im > 0.0 { inner.eval(z) } else { ZERO },
    )?
    .with_breaks(mu.radial_breaks().to_vec(), mu.is_discontinuous()))
}

/// Dilatation of `(f^μ)⁻¹` on the lower half-plane, zero above.
fn lower_inverse_coefficient(
    f_sym: &QuasiconformalMap,
    mu: &BeltramiCoefficient,
) -> Result<BeltramiCoefficient> {
    let radius = mu
        .support()
        .radius()
        .ok_or_else(|| Error::Invalid("welding needs a compactly supported coefficient".into()))?;
    let mut image: f64 = 0.0;
    for k in 0..256 {
        let z = Complex64::from_polar(radius, TAU * k as f64 / 256.0);
        image = image.max(f_sym.eval(z)?.norm());
    }
    let sym = f_sym.source_mu().clone();
    let zero = BeltramiCoefficient::zero(DomainTag::Plane);
    let f = f_sym.clone();
    Ok(BeltramiCoefficient::from_fn(
        DomainTag::Plane,
        Support::Radius(1.02 * image),
        mu.sup_norm(),
        CoefficientKind::Derived {
            description: "reflected inverse coefficient".into(),
        },
        move |w| {
            if w.im >= 0.0 {
                return ZERO;
            }
            chain_rule_at(&zero, &sym, &f, w).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        },
    )?
    .with_breaks(Vec::new(), mu.is_discontinuous()))
}

fn as_homeomorphism(t: Trace) -> Result<BoundaryHomeomorphism> {
    match t {
        Trace::Homeomorphism(h) => Ok(h),
        Trace::Function(_) => Err(Error::Invalid("expected a self-map trace".into())),
    }
}

/// Conformal welding of `μ` on the upper half-plane or the disk (transported by Cayley).
pub fn welding(mu: &BeltramiCoefficient) -> Result<Welding> {
    welding_with(mu, &WeldingOptions::default())
}

pub fn welding_with(mu: &BeltramiCoefficient, opts: &WeldingOptions) -> Result<Welding> {
    let mu = match mu.domain() {
        DomainTag::UpperHalfPlane => mu.clone(),
        DomainTag::UnitDisk => transport_coefficient(mu, CayleyDirection::DiskToHalfPlane)?,
        found => {
            return Err(Error::DomainMismatch {
                expected: "upper half-plane or unit disk",
                found,
            })
        }
    };
    let t = opts.truncation;
    if mu.is_zero() {
        let id = QuasiconformalMap::identity(DomainTag::Plane);
        let h = BoundaryHomeomorphism::identity_line(t, opts.samples);
        let f_trace = h.to_function();
        return Ok(Welding {
            mu,
            f_sym: QuasiconformalMap::identity(DomainTag::UpperHalfPlane),
            f_mu: id.clone(),
            g: id,
            direct: h.clone(),
            h,
            g_trace: f_trace.clone(),
            f_trace,
            consistency: 0.0,
        });
    }
    let f_sym = solve_half_plane(&mu, &opts.solver)?;
    let f_mu = solve_plane_with(&upper_only(&mu)?, &opts.solver)?;
    let g = solve_plane_with(&lower_inverse_coefficient(&f_sym, &mu)?, &opts.solver)?;

    let direct = as_homeomorphism(boundary_trace_with(&f_sym, &trace_options(opts, t))?)?;
    let f_trace = boundary_trace_with(&f_mu, &trace_options(opts, t))?.function();
    let mut values = Vec::with_capacity(f_trace.len());
    let mut seed = None;
    for (&x, &w) in f_trace.params().iter().zip(f_trace.values()) {
        let z = g.invert_point(w, seed.or(Some(Complex64::new(x, 0.0))))?;
        if z.im.abs() > 1e-3 * z.norm().max(1.0) {
            return Err(Error::Invalid(format!(
                "welding left the real line at x = {x}: {z}"
            )));
        }
        values.push(z.re);
        seed = Some(z);
    }
    let h = BoundaryHomeomorphism::new(
        f_trace.domain,
        f_trace.params().to_vec(),
        values,
        BoundaryNormalization::ZeroOneInfinity,
    )?;
    let reach = h.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g_opts = TraceOptions {
        samples: 2 * opts.samples,
        ..trace_options(opts, (1.25 * reach).max(t))
    };
    let g_trace = boundary_trace_with(&g, &g_opts)?.function();
    let consistency = h.sup_distance(&direct);
    Ok(Welding {
        mu,
        f_sym,
        f_mu,
        g,
        h,
        direct,
        f_trace,
        g_trace,
        consistency,
    })
}

/// `log` of difference quotients at sample midpoints.
#[derive(Debug, Clone)]
pub struct LogDerivative {
    pub function: BoundaryFunction,
    /// Sup distance between the quotients at spacing `2h` and the fine result.
    pub resolution_gap: f64,
}

/// Midpoints, quotients.  Circle data include the wrap-around segment, across
/// which the values jump by `period`.
fn quotients(
    params: &[f64],
    values: &[Complex64],
    domain: BoundaryDomain,
    stride: usize,
    period: f64,
) -> (Vec<f64>, Vec<Complex64>) {
    let n = params.len();
    let mut mids = Vec::new();
    let mut qs = Vec::new();
    let mut k = 0;
    while k + stride < n {
        let (a, b) = (k, k + stride);
        mids.push(0.5 * (params[a] + params[b]));
        qs.push((values[b] - values[a]) / (params[b] - params[a]));
        k += stride;
    }
    if domain == BoundaryDomain::Circle && k < n {
        let a = k;
        let (tb, vb) = (
            params[(a + stride) % n] + TAU,
            values[(a + stride) % n] + period,
        );
        mids.push(0.5 * (params[a] + tb));
        qs.push((vb - values[a]) / (tb - params[a]));
    }
    (mids, qs)
}

/// Sorted circle midpoints folded into `[0, 2π)`.
fn fold(
    domain: BoundaryDomain,
    mids: Vec<f64>,
    vals: Vec<Complex64>,
) -> (Vec<f64>, Vec<Complex64>) {
    if domain != BoundaryDomain::Circle {
        return (mids, vals);
    }
    let mut pairs: Vec<(f64, Complex64)> = mids
        .into_iter()
        .map(|m| m.rem_euclid(TAU))
        .zip(vals)
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Continuous branch of `log q`, principal at the sample nearest parameter 0.
fn continuous_log(mids: &[f64], qs: &[Complex64]) -> Result<Vec<Complex64>> {
    if let Some(i) = qs.iter().position(|q| !(q.norm() > 0.0) || !q.is_finite()) {
        return Err(Error::VanishingDerivative(Complex64::new(mids[i], 0.0)));
    }
    let anchor = (0..mids.len())
        .min_by(|&a, &b| mids[a].abs().partial_cmp(&mids[b].abs()).unwrap())
        .unwrap();
    let mut out = vec![ZERO; qs.len()];
    out[anchor] = qs[anchor].ln();
    for k in anchor + 1..qs.len() {
        let mut a = qs[k].arg();
        a -= TAU * ((a - out[k - 1].im) / TAU).round();
        out[k] = Complex64::new(qs[k].norm().ln(), a);
    }
    for k in (0..anchor).rev() {
        let mut a = qs[k].arg();
        a -= TAU * ((a - out[k + 1].im) / TAU).round();
        out[k] = Complex64::new(qs[k].norm().ln(), a);
    }
    Ok(out)
}

/// `log h'` of an increasing boundary map.
pub fn log_derivative(h: &BoundaryHomeomorphism) -> Result<LogDerivative> {
    let values: Vec<Complex64> = h.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for (i, w) in h.values().windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing(i + 1));
        }
    }
    let lift = |mids: Vec<f64>, qs: Vec<Complex64>| -> Result<(Vec<f64>, Vec<Complex64>)> {
        if let Some(i) = qs.iter().position(|q| !(q.re > 0.0)) {
            return Err(Error::NotIncreasing(i + 1));
        }
        let logs = qs.iter().map(|q| Complex64::new(q.re.ln(), 0.0)).collect();
        Ok(fold(h.domain, mids, logs))
    };
    let (m, q) = quotients(h.params(), &values, h.domain, 1, TAU);
    let (m, l) = lift(m, q)?;
    let function = BoundaryFunction::new(h.domain, m, l)?;
    let (cm, cq) = quotients(h.params(), &values, h.domain, 2, TAU);
    let (cm, cl) = lift(cm, cq)?;
    let resolution_gap = cm
        .iter()
        .zip(&cl)
        .map(|(&t, &v)| (v - function.eval(t)).norm())
        .fold(0.0, f64::max);
    Ok(LogDerivative {
        function,
        resolution_gap,
    })
}

/// `log u'` of a complex boundary curve, with a continuous argument.
pub fn log_derivative_curve(u: &BoundaryFunction) -> Result<LogDerivative> {
    let build = |stride: usize| -> Result<(Vec<f64>, Vec<Complex64>)> {
        let (m, q) = quotients(u.params(), u.values(), u.domain, stride, 0.0);
        let (m, q) = fold(u.domain, m, q);
        let l = continuous_log(&m, &q)?;
        Ok((m, l))
    };
    let (m, l) = build(1)?;
    let function = BoundaryFunction::new(u.domain, m, l)?;
    let (cm, cl) = build(2)?;
    let resolution_gap = cm
        .iter()
        .zip(&cl)
        .map(|(&t, &v)| (v - function.eval(t)).norm())
        .fold(0.0, f64::max);
    Ok(LogDerivative {
        function,
        resolution_gap,
    })
}

/// Both sides of `log (g|_R)' ∘ h + log h' = log (f_μ|_R)'` on the sample midpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeldingIdentityReport {
    pub sup_discrepancy: f64,
    pub samples: usize,
    /// `sup |h - trace(f^μ)|` from the welding itself.
    pub consistency: f64,
}

pub fn welding_identity(w: &Welding) -> Result<WeldingIdentityReport> {
    let lh = log_derivative(&w.h)?.function;
    let lf = log_derivative_curve(&w.f_trace)?.function;
    let lg = log_derivative_curve(&w.g_trace)?.function;
    let mut worst: f64 = 0.0;
    for (&x, &l) in lh.params().iter().zip(lh.values()) {
        let lhs = lg.eval(w.h.eval(x)) + l;
        worst = worst.max((lhs - lf.eval(x)).norm());
    }
    Ok(WeldingIdentityReport {
        sup_discrepancy: worst,
        samples: lh.len(),
        consistency: w.consistency,
    })
}

/// Welds `μ` and checks the log-derivative identity.
pub fn welding_identity_check(
    mu: &BeltramiCoefficient,
    opts: &WeldingOptions,
) -> Result<WeldingIdentityReport> {
    welding_identity(&welding_with(mu, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_welds_to_the_identity() {
        let w = welding(&BeltramiCoefficient::zero(DomainTag::UpperHalfPlane)).unwrap();
        for (&x, &y) in w.h.params().iter().zip(w.h.values()) {
            assert_eq!(x, y);
        }
        let r = welding_identity(&w).unwrap();
        assert!(r.sup_discrepancy < 1e-12);
    }

    #[test]
    fn log_derivative_of_affine_maps() {
        let id = BoundaryHomeomorphism::identity_line(4.0, 64);
        let l = log_derivative(&id).unwrap();
        assert!(l.function.values().iter().all(|v| v.norm() < 1e-12));
        let a = 2.5;
        let h = BoundaryHomeomorphism::new(
            id.domain,
            id.params().to_vec(),
            id.params().iter().map(|x| a * x + 0.7).collect(),
            BoundaryNormalization::None,
        )
        .unwrap();
        let l = log_derivative(&h).unwrap();
        assert!(l
            .function
            .values()
            .iter()
            .all(|v| (v.re - a.ln()).abs() < 1e-12));
        assert!(l.resolution_gap < 1e-12);
    }

    #[test]
    fn affine_curve_shifts_the_log_by_a_constant() {
        let a = c(1.5, 0.4);
        let u = BoundaryFunction::line_from_fn(4.0, 256, |x| {
            c(x + 0.2 * (x * 0.5).sin(), 0.1 * x.cos())
        })
        .unwrap();
        let v = u.map_values(|w| a * w + c(0.3, -1.0));
        let lu = log_derivative_curve(&u).unwrap().function;
        let lv = log_derivative_curve(&v).unwrap().function;
        for (x, y) in lu.values().iter().zip(lv.values()) {
            assert!((y - x - a.ln()).norm() < 1e-12);
        }
    }

    #[test]
    fn circle_log_derivative_wraps() {
        let h = BoundaryHomeomorphism::identity_circle(64);
        let l = log_derivative(&h).unwrap();
        assert_eq!(l.function.len(), 64);
        assert!(l.function.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn rejects_plane_coefficients() {
        let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5)
            .unwrap()
            .on_plane();
        assert!(matches!(welding(&mu), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn disk_coefficient_welding_matches_the_direct_trace() {
        let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5).unwrap();
        let w = welding(&mu).unwrap();
        let r = welding_identity(&w).unwrap();
        assert!(w.consistency <= 1e-2, "{}", w.consistency);
        assert!(r.sup_discrepancy <= 5e-2, "{}", r.sup_discrepancy);
    }
}
