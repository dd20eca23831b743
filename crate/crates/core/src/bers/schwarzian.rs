use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::domains::{DomainTag, HolomorphicFunction, LaurentSeries};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shortest truncation of the output series.
const MIN_TERMS: usize = 128;

/// Expansion variable of a series: `1/(z - c)` near infinity or `z - c`.
#[derive(Clone, Copy, PartialEq)]
enum Chart {
    Exterior,
    Taylor,
}

/// Coefficients of `d` as a power series in the chart variable.
fn chart_coefficients(d: &LaurentSeries, chart: Chart, len: usize) -> Vec<Complex64> {
    (0..len as i32)
        .map(|k| match chart {
            Chart::Exterior => d.coefficient(-k),
            Chart::Taylor => d.coefficient(k),
        })
        .collect()
}

/// `n / d` as truncated power series, `d[0] != 0`.
fn divide(n: &[Complex64], d: &[Complex64]) -> Vec<Complex64> {
    let mut q = vec![ZERO; n.len()];
    for k in 0..n.len() {
        let mut acc = n[k];
        for j in 1..=k.min(d.len() - 1) {
            acc -= d[j] * q[k - j];
        }
        q[k] = acc / d[0];
    }
    q
}

fn nonzero_range(s: &LaurentSeries) -> Option<(i32, i32)> {
    let orders: Vec<i32> = (s.min_order..=s.max_order())
        .filter(|n| s.coefficient(*n) != ZERO)
        .collect();
    Some((*orders.first()?, *orders.last()?))
}

/// Schwarzian `f‴/f′ - (3/2)(f″/f′)²` by arithmetic on the Laurent coefficients.
///
/// Series with only non-positive orders in `f′` are expanded in `1/(z - c)`,
/// series with only non-negative orders in `z - c`; mixed series are rejected.
pub fn schwarzian(f: &HolomorphicFunction) -> Result<HolomorphicFunction> {
    let s = f.series().ok_or(Error::UnsupportedRepresentation(
        "Schwarzian needs a Laurent series",
    ))?;
    let d1 = s.derivative();
    let Some((lo, hi)) = nonzero_range(&d1) else {
        return Err(Error::VanishingDerivative(s.center));
    };
    let chart = if hi <= 0 && (lo < 0 || f.domain() == DomainTag::ExteriorDisk) {
        Chart::Exterior
    } else if lo >= 0 {
        Chart::Taylor
    } else {
        return Err(Error::UnsupportedRepresentation(
            "Laurent series with both positive and negative orders",
        ));
    };
    let len = (s.coeffs.len() + 4).max(MIN_TERMS);
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let p1 = chart_coefficients(&d1, chart, len + 1);
    let v = valuation(&p1, check_radius(&d1, chart), chart);
    check_derivative(&d1, chart, v)?;
    if chart == Chart::Taylor && v > 0 {
        return Err(Error::VanishingDerivative(s.center));
    }
    // Dividing every series by the chart variable to the power v keeps f″/f′ regular.
    let shift = |p: Vec<Complex64>| -> Vec<Complex64> { p.into_iter().skip(v).take(len).collect() };
    let p1 = shift(p1);
    let p2 = shift(chart_coefficients(&d2, chart, len + v));
    let p3 = shift(chart_coefficients(&d3, chart, len + v));
    let q1 = divide(&p2, &p1);
    let q2 = divide(&p3, &p1);
    let mut out = vec![ZERO; len];
    for k in 0..len {
        let mut sq = ZERO;
        for j in 0..=k {
            sq += q1[j] * q1[k - j];
        }
        out[k] = q2[k] - 1.5 * sq;
    }
    let series = match chart {
        Chart::Exterior => {
            out.reverse();
            LaurentSeries::new(
                s.center,
                1 - len as i32,
                out,
                s.inner_radius,
                s.outer_radius,
            )
        }
        Chart::Taylor => LaurentSeries::new(s.center, 0, out, s.inner_radius, s.outer_radius),
    };
    Ok(HolomorphicFunction::from_series(
        series.trimmed(0.0),
        f.domain(),
    ))
}

/// Circle just inside the annulus of validity on the side away from the chart
/// centre, pulled in until the truncated series is resolved there.
fn check_radius(d1: &LaurentSeries, chart: Chart) -> f64 {
    let mut radius = match chart {
        Chart::Exterior if d1.inner_radius > 0.0 => 1.05 * d1.inner_radius,
        Chart::Taylor if d1.outer_radius.is_finite() => d1.outer_radius / 1.05,
        _ => 1.0,
    };
    let p = chart_coefficients(
        d1,
        chart,
        (d1.max_order() - d1.min_order + 1).max(1) as usize,
    );
    // Short series are treated as exact.
    if p.len() <= 8 {
        return radius;
    }
    for _ in 0..200 {
        let t = match chart {
            Chart::Exterior => 1.0 / radius,
            Chart::Taylor => radius,
        };
        let terms: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * t.powi(k as i32))
            .collect();
        let max = terms.iter().cloned().fold(0.0, f64::max);
        let tail = terms.iter().rev().take(4).cloned().fold(0.0, f64::max);
        if tail <= 1e-8 * max {
            break;
        }
        radius = match chart {
            Chart::Exterior => radius * 1.02,
            Chart::Taylor => radius / 1.02,
        };
    }
    radius
}

/// Order of vanishing at the chart centre, ignoring terms that are
/// negligible on the check circle.
fn valuation(p: &[Complex64], radius: f64, chart: Chart) -> usize {
    let size = |k: usize| {
        let t = match chart {
            Chart::Exterior => 1.0 / radius,
            Chart::Taylor => radius,
        };
        p[k].norm() * t.powi(k as i32)
    };
    let max = (0..p.len()).map(size).fold(0.0, f64::max);
    (0..p.len())
        .position(|k| size(k) > 1e-12 * max)
        .unwrap_or(0)
}

/// Rejects `f′` with zeros between the check circle and the chart centre.
///
/// The circle sits just inside the annulus of validity; zeros are counted by
/// the winding number of `f′` along it, allowing for a zero at infinity in
/// the exterior chart.
fn check_derivative(d1: &LaurentSeries, chart: Chart, at_infinity: usize) -> Result<()> {
    let radius = check_radius(d1, chart);
    const M: usize = 512;
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    let mut at = d1.center;
    let mut turn = 0.0;
    let mut prev = d1.eval(d1.center + radius);
    for k in 1..=M {
        let z = d1.center + Complex64::from_polar(radius, TAU * k as f64 / M as f64);
        let v = d1.eval(z);
        if !v.is_finite() {
            return Err(Error::VanishingDerivative(z));
        }
        if v.norm() < min {
            min = v.norm();
            at = z;
        }
        max = max.max(v.norm());
        turn += (v / prev).arg();
        prev = v;
    }
    if min <= 1e-8 * max {
        return Err(Error::VanishingDerivative(at));
    }
    let winding = (turn / TAU).round() as i64;
    let zeros = match chart {
        Chart::Exterior => -winding,
        Chart::Taylor => winding,
    };
    let allowed = match chart {
        Chart::Exterior => at_infinity as i64,
        Chart::Taylor => 0,
    };
    if zeros != allowed {
        return Err(Error::VanishingDerivative(at));
    }
    Ok(())
}
