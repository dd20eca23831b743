use std::f64::consts::TAU;

use num_complex::Complex64;

use super::function::{
    BoundaryDomain, BoundaryFunction, BoundaryHomeomorphism, BoundaryNormalization,
};
use crate::domains::{DomainTag, HolomorphicFunction};
use crate::error::{Error, Result};
use crate::solver::{Normalization, QuasiconformalMap};

/// Largest fraction of samples allowed to fail the radial Cauchy test.
pub const MAX_UNRELIABLE_FRACTION: f64 = 0.01;

/// Something with boundary values on the circle or the line.
#[derive(Clone, Copy)]
pub enum TraceSource<'a> {
    Map(&'a QuasiconformalMap),
    Holomorphic(&'a HolomorphicFunction),
}

impl<'a> From<&'a QuasiconformalMap> for TraceSource<'a> {
    fn from(f: &'a QuasiconformalMap) -> Self {
        TraceSource::Map(f)
    }
}

impl<'a> From<&'a HolomorphicFunction> for TraceSource<'a> {
    fn from(f: &'a HolomorphicFunction) -> Self {
        TraceSource::Holomorphic(f)
    }
}

/// Boundary values: a homeomorphism for self-maps, a complex function otherwise.
#[derive(Debug, Clone)]
pub enum Trace {
    Function(BoundaryFunction),
    Homeomorphism(BoundaryHomeomorphism),
}

impl Trace {
    pub fn function(&self) -> BoundaryFunction {
        match self {
            Trace::Function(u) => u.clone(),
            Trace::Homeomorphism(h) => h.to_function(),
        }
    }

    pub fn homeomorphism(&self) -> Option<&BoundaryHomeomorphism> {
        match self {
            Trace::Homeomorphism(h) => Some(h),
            Trace::Function(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub samples: usize,
    /// Half-length of the sampled segment for line traces.
    pub truncation: f64,
    /// Radial offsets are `2^{-m}` for `m = 3..=depth`.
    pub depth: u32,
    /// Absolute step below which a radial sequence counts as converged.
    pub cauchy_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            samples: 1024,
            truncation: 8.0,
            depth: 14,
            cauchy_tol: 1e-4,
        }
    }
}

/// Limit of `values` along a sequence with offsets halving at each step.
///
/// Returns the extrapolated value and whether the sequence looks Cauchy.
fn radial_limit(values: &[Complex64], tol: f64) -> (Complex64, bool) {
    let n = values.len();
    let last = values[n - 1];
    if n < 3 {
        return (last, true);
    }
    let d1 = last - values[n - 2];
    let d0 = values[n - 2] - values[n - 3];
    let scale = last.norm().max(1.0);
    if d1.norm() <= 1e-14 * scale {
        return (last, true);
    }
    let q = if d0.norm() > 0.0 {
        d1.norm() / d0.norm()
    } else {
        1.0
    };
    let cauchy = d1.norm() <= tol * scale || q < 0.9;
    if !cauchy {
        return (last, false);
    }
    let q = q.min(0.75);
    (last + d1 * (q / (1.0 - q)), true)
}

/// Boundary values of a map or holomorphic function, by extrapolation along radii.
pub fn boundary_trace<'a>(source: impl Into<TraceSource<'a>>, n_samples: usize) -> Result<Trace> {
    boundary_trace_with(
        source,
        &TraceOptions {
            samples: n_samples,
            ..TraceOptions::default()
        },
    )
}

pub fn boundary_trace_with<'a>(
    source: impl Into<TraceSource<'a>>,
    opts: &TraceOptions,
) -> Result<Trace> {
    if opts.samples < 4 || opts.depth < 5 {
        return Err(Error::Invalid(
            "trace needs at least 4 samples and depth 5".into(),
        ));
    }
    let source = source.into();
    let domain = match source {
        TraceSource::Map(f) => match f.domain() {
            // Plane maps are traced along the real line, approached from above.
            DomainTag::Plane => DomainTag::UpperHalfPlane,
            d => d,
        },
        TraceSource::Holomorphic(phi) => phi.domain(),
    };
    let eval = |z: Complex64| -> Result<Complex64> {
        match source {
            TraceSource::Map(f) => f.eval(z),
            TraceSource::Holomorphic(phi) => Ok(phi.eval(z)),
        }
    };
    let offsets: Vec<f64> = (3..=opts.depth).map(|m| 0.5f64.powi(m as i32)).collect();
    let n = opts.samples;
    let boundary = match domain {
        DomainTag::UnitDisk | DomainTag::ExteriorDisk => BoundaryDomain::Circle,
        DomainTag::UpperHalfPlane | DomainTag::LowerHalfPlane => BoundaryDomain::Line {
            truncation: opts.truncation,
        },
        DomainTag::Plane => unreachable!(),
    };
    let params: Vec<f64> = match boundary {
        BoundaryDomain::Circle => (0..n).map(|j| TAU * j as f64 / n as f64).collect(),
        BoundaryDomain::Line { truncation } => {
            let h = 2.0 * truncation / n as f64;
            (0..n).map(|j| -truncation + (j as f64 + 0.5) * h).collect()
        }
    };
    let approach = |t: f64, eps: f64| -> Complex64 {
        match domain {
            DomainTag::UnitDisk => Complex64::from_polar(1.0 - eps, t),
            DomainTag::ExteriorDisk => Complex64::from_polar(1.0 + eps, t),
            DomainTag::UpperHalfPlane => Complex64::new(t, eps * t.abs().max(1.0)),
            _ => Complex64::new(t, -eps * t.abs().max(1.0)),
        }
    };
    let mut values = Vec::with_capacity(n);
    let mut bad = 0;
    for &t in &params {
        let seq = offsets
            .iter()
            .map(|&e| eval(approach(t, e)))
            .collect::<Result<Vec<_>>>()?;
        let (v, ok) = radial_limit(&seq, opts.cauchy_tol);
        if !ok {
            bad += 1;
        }
        values.push(v);
    }
    if bad as f64 > MAX_UNRELIABLE_FRACTION * n as f64 {
        return Err(Error::UnreliableTrace { bad, total: n });
    }
    let self_map = match source {
        TraceSource::Map(f) => f.domain() == domain,
        TraceSource::Holomorphic(_) => false,
    };
    if !self_map {
        return Ok(Trace::Function(BoundaryFunction::new(
            boundary, params, values,
        )?));
    }
    let normalization = match (source, boundary) {
        (TraceSource::Map(f), BoundaryDomain::Circle)
            if f.normalization() == Normalization::FixThreeBoundaryPoints =>
        {
            BoundaryNormalization::OneMinusOneMinusI
        }
        (TraceSource::Map(f), BoundaryDomain::Line { .. })
            if f.normalization() == Normalization::FixZeroOneInfinity =>
        {
            BoundaryNormalization::ZeroOneInfinity
        }
        _ => BoundaryNormalization::None,
    };
    let lifted = match boundary {
        BoundaryDomain::Circle => {
            // Continuous lift of the argument starting near Θ(0).
            let mut out = Vec::with_capacity(n);
            let mut prev = values[0].arg();
            out.push(prev);
            for v in &values[1..] {
                let mut d = v.arg() - prev;
                d -= TAU * (d / TAU).round();
                prev += d;
                out.push(prev);
            }
            out
        }
        BoundaryDomain::Line { .. } => values.iter().map(|v| v.re).collect(),
    };
    Ok(Trace::Homeomorphism(BoundaryHomeomorphism::new(
        boundary,
        params,
        lifted,
        normalization,
    )?))
}
