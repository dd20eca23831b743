use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainTag, HolomorphicFunction, LaurentSeries};
use crate::error::{Error, Result};
use crate::solver::QuasiconformalMap;

/// Largest `|f_z̄/f_z|` accepted on a sampling circle.
pub const HOLOMORPHY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn centered(radius: f64) -> Self {
        Circle {
            center: Complex64::new(0.0, 0.0),
            radius,
        }
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }
}

/// A fitted series with the quality of the fit.
#[derive(Debug, Clone)]
pub struct LaurentFit {
    pub function: HolomorphicFunction,
    /// Largest mismatch between the series and the samples at the half-way angles.
    pub residual: f64,
    /// Largest normalized coefficient outside the requested orders.
    pub noise: f64,
}

fn sample_count(orders: &RangeInclusive<i32>) -> usize {
    let span = (orders.end() - orders.start() + 1).max(1) as usize;
    (2 * span).next_power_of_two().max(256)
}

fn domain_for(orders: &RangeInclusive<i32>) -> DomainTag {
    if *orders.start() >= 0 {
        DomainTag::UnitDisk
    } else if *orders.end() <= 1 {
        DomainTag::ExteriorDisk
    } else {
        DomainTag::Plane
    }
}

/// Laurent coefficients of the samples of `f` on `circle` by a discrete Fourier transform.
///
/// Normalized coefficients below four times the out-of-range level are
/// dropped as noise.  `annulus` is recorded as the region of validity.
pub fn laurent_fit(
    f: impl Fn(Complex64) -> Result<Complex64>,
    circle: Circle,
    orders: RangeInclusive<i32>,
    annulus: (f64, f64),
) -> Result<LaurentFit> {
    if orders.is_empty() || !(circle.radius > 0.0) {
        return Err(Error::Invalid(
            "empty order range or degenerate circle".into(),
        ));
    }
    let m = sample_count(&orders);
    let mut buf = Vec::with_capacity(m);
    for k in 0..m {
        buf.push(f(circle.point(TAU * k as f64 / m as f64))?);
    }
    if buf.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite samples on the circle".into()));
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let slot = |n: i32| n.rem_euclid(m as i32) as usize;
    let scale = 1.0 / m as f64;
    let mut noise: f64 = 0.0;
    for n in -(m as i32 / 2)..(m as i32 / 2) {
        if !orders.contains(&n) {
            noise = noise.max(buf[slot(n)].norm() * scale);
        }
    }
    let floor = 4.0 * noise;
    let mut coeffs = Vec::with_capacity(orders.clone().count());
    for n in orders.clone() {
        let c = buf[slot(n)] * scale;
        coeffs.push(if c.norm() <= floor {
            Complex64::new(0.0, 0.0)
        } else {
            c / circle.radius.powi(n)
        });
    }
    let series = LaurentSeries::new(circle.center, *orders.start(), coeffs, annulus.0, annulus.1);
    let function = HolomorphicFunction::from_series(series, domain_for(&orders));
    let mut residual: f64 = 0.0;
    for k in 0..m {
        let z = circle.point(TAU * (k as f64 + 0.5) / m as f64);
        residual = residual.max((function.eval(z) - f(z)?).norm());
    }
    Ok(LaurentFit {
        function,
        residual,
        noise,
    })
}

/// Laurent series of `f` on `circle`, after checking that `f` is conformal there.
pub fn laurent_coefficients(
    f: &QuasiconformalMap,
    circle: Circle,
    orders: RangeInclusive<i32>,
) -> Result<LaurentFit> {
    let m = sample_count(&orders);
    let mut worst: f64 = 0.0;
    for k in 0..m {
        let j = f.jet(circle.point(TAU * k as f64 / m as f64))?;
        worst = worst.max(j.dzbar.norm() / j.dz.norm());
    }
    if !(worst <= HOLOMORPHY_TOL) {
        return Err(Error::NotHolomorphic(worst));
    }
    let annulus = match f.conformal_region() {
        Some(a) if circle.center == Complex64::new(0.0, 0.0) && a.contains(circle.point(0.0)) => {
            (a.inner, a.outer)
        }
        _ => (circle.radius, circle.radius),
    };
    laurent_fit(|z| f.eval(z), circle, orders, annulus)
}

/// Laurent series of a scalar function on `circle`.
pub fn laurent_coefficients_of(
    f: impl Fn(Complex64) -> Complex64,
    circle: Circle,
    orders: RangeInclusive<i32>,
    annulus: (f64, f64),
) -> Result<LaurentFit> {
    laurent_fit(|z| Ok(f(z)), circle, orders, annulus)
}
