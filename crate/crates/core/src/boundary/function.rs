use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::CayleyDirection;
use crate::error::{Error, Result};

/// Half-length used when a circle function is transported to the line.
pub const DEFAULT_TRUNCATION: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryDomain {
    /// Parameter is the angle in `[0, 2π)`.
    Circle,
    /// Parameter is `x ∈ [-T, T]`.
    Line { truncation: f64 },
}

impl BoundaryDomain {
    pub fn truncation(&self) -> Option<f64> {
        match self {
            BoundaryDomain::Circle => None,
            BoundaryDomain::Line { truncation } => Some(*truncation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryNormalization {
    /// `0, 1, ∞` fixed on the line.
    ZeroOneInfinity,
    /// `1, -1, -i` fixed on the circle.
    OneMinusOneMinusI,
    None,
}

/// Metadata written next to boundary CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySidecar {
    pub domain: BoundaryDomain,
    pub truncation: Option<f64>,
    pub normalization: BoundaryNormalization,
    pub homeomorphism: bool,
}

fn check_params(domain: BoundaryDomain, params: &[f64]) -> Result<()> {
    if params.len() < 2 {
        return Err(Error::Invalid("need at least two boundary samples".into()));
    }
    for (i, w) in params.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing(i + 1));
        }
    }
    let (lo, hi) = (params[0], params[params.len() - 1]);
    let ok = match domain {
        BoundaryDomain::Circle => lo >= 0.0 && hi < TAU,
        BoundaryDomain::Line { truncation } => {
            truncation > 0.0
                && lo >= -truncation * (1.0 + 1e-12)
                && hi <= truncation * (1.0 + 1e-12)
        }
    };
    if !ok || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Invalid(format!(
            "boundary parameters [{lo}, {hi}] outside the domain {domain:?}"
        )));
    }
    Ok(())
}

/// Index `k` with `params[k] <= t < params[k+1]` and the fractional position.
fn bracket(params: &[f64], t: f64) -> (usize, f64) {
    let n = params.len();
    let k = match params.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
        Ok(k) => k.min(n - 2),
        Err(0) => 0,
        Err(k) => (k - 1).min(n - 2),
    };
    let f = (t - params[k]) / (params[k + 1] - params[k]);
    (k, f)
}

/// Sampled complex function on the circle or a truncated line, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    pub domain: BoundaryDomain,
    params: Vec<f64>,
    values: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn new(domain: BoundaryDomain, params: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if params.len() != values.len() {
            return Err(Error::Invalid("parameter/value length mismatch".into()));
        }
        check_params(domain, &params)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite boundary value".into()));
        }
        Ok(BoundaryFunction {
            domain,
            params,
            values,
        })
    }

    /// `n` equally spaced angles `2πj/n`.
    pub fn circle_from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let params: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let values = params.iter().map(|&t| f(t)).collect();
        Self::new(BoundaryDomain::Circle, params, values)
    }

    /// `n` cell midpoints of `[-T, T]`.
    pub fn line_from_fn(truncation: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = 2.0 * truncation / n as f64;
        let params: Vec<f64> = (0..n).map(|j| -truncation + (j as f64 + 0.5) * h).collect();
        let values = params.iter().map(|&x| f(x)).collect();
        Self::new(BoundaryDomain::Line { truncation }, params, values)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let n = self.params.len();
        match self.domain {
            BoundaryDomain::Circle => {
                let t = t.rem_euclid(TAU);
                let (first, last) = (self.params[0], self.params[n - 1]);
                if t >= last || t < first {
                    // Wrap-around segment between the last and first sample.
                    let span = first + TAU - last;
                    let d = if t >= last { t - last } else { t + TAU - last };
                    let f = d / span;
                    return self.values[n - 1] * (1.0 - f) + self.values[0] * f;
                }
                let (k, f) = bracket(&self.params, t);
                self.values[k] * (1.0 - f) + self.values[k + 1] * f
            }
            BoundaryDomain::Line { .. } => {
                if t <= self.params[0] {
                    return self.values[0];
                }
                if t >= self.params[n - 1] {
                    return self.values[n - 1];
                }
                let (k, f) = bracket(&self.params, t);
                self.values[k] * (1.0 - f) + self.values[k + 1] * f
            }
        }
    }

    /// Common spacing if the samples are equispaced to relative `1e-9`.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = self.params[1] - self.params[0];
        let uniform = self
            .params
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
        let closes = match self.domain {
            BoundaryDomain::Circle => {
                let wrap = self.params[0] + TAU - self.params[self.params.len() - 1];
                (wrap - h).abs() <= 1e-9 * h
            }
            BoundaryDomain::Line { .. } => true,
        };
        (uniform && closes).then_some(h)
    }

    /// Resampled on the canonical equispaced layout with `n` points.
    pub fn resampled(&self, n: usize) -> Result<Self> {
        match self.domain {
            BoundaryDomain::Circle => Self::circle_from_fn(n, |t| self.eval(t)),
            BoundaryDomain::Line { truncation } => {
                Self::line_from_fn(truncation, n, |x| self.eval(x))
            }
        }
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        BoundaryFunction {
            domain: self.domain,
            params: self.params.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_distance(&self, other: &BoundaryFunction) -> f64 {
        self.params
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (v - other.eval(t)).norm())
            .fold(0.0, f64::max)
    }

    pub fn sidecar(&self) -> BoundarySidecar {
        BoundarySidecar {
            domain: self.domain,
            truncation: self.domain.truncation(),
            normalization: BoundaryNormalization::None,
            homeomorphism: false,
        }
    }
}

/// `θ ↦ x = -cot(θ/2)`, the boundary action of the Cayley map.
pub fn angle_to_line(theta: f64) -> f64 {
    (0.5 * (theta - PI)).tan()
}

/// Inverse of [`angle_to_line`], valued in `(0, 2π)`.
pub fn line_to_angle(x: f64) -> f64 {
    PI + 2.0 * x.atan()
}

/// Push-forward `u ∘ H⁻¹` of boundary data between the circle and the line.
pub fn cayley_boundary(
    u: &BoundaryFunction,
    direction: CayleyDirection,
) -> Result<BoundaryFunction> {
    match (direction, u.domain) {
        (CayleyDirection::DiskToHalfPlane, BoundaryDomain::Circle) => {
            let t = DEFAULT_TRUNCATION;
            let mut params = Vec::new();
            let mut values = Vec::new();
            for (&theta, &v) in u.params.iter().zip(&u.values) {
                if theta == 0.0 {
                    continue;
                }
                let x = angle_to_line(theta);
                if x.abs() <= t {
                    params.push(x);
                    values.push(v);
                }
            }
            BoundaryFunction::new(BoundaryDomain::Line { truncation: t }, params, values)
        }
        (CayleyDirection::HalfPlaneToDisk, BoundaryDomain::Line { .. }) => {
            let params = u.params.iter().map(|&x| line_to_angle(x)).collect();
            BoundaryFunction::new(BoundaryDomain::Circle, params, u.values.clone())
        }
        (_, domain) => Err(Error::Invalid(format!(
            "boundary data on {domain:?} cannot be transported {direction:?}"
        ))),
    }
}

/// Strictly increasing boundary map.  Circle maps are stored as a lift
/// `Θ` of the angle with `Θ(θ + 2π) = Θ(θ) + 2π`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryHomeomorphism {
    pub domain: BoundaryDomain,
    pub normalization: BoundaryNormalization,
    params: Vec<f64>,
    values: Vec<f64>,
}

impl BoundaryHomeomorphism {
    pub fn new(
        domain: BoundaryDomain,
        params: Vec<f64>,
        values: Vec<f64>,
        normalization: BoundaryNormalization,
    ) -> Result<Self> {
        if params.len() != values.len() {
            return Err(Error::Invalid("parameter/value length mismatch".into()));
        }
        check_params(domain, &params)?;
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::NotIncreasing(i + 1));
            }
        }
        if domain == BoundaryDomain::Circle && !(values[values.len() - 1] < values[0] + TAU) {
            return Err(Error::NotIncreasing(values.len() - 1));
        }
        Ok(BoundaryHomeomorphism {
            domain,
            normalization,
            params,
            values,
        })
    }

    pub fn identity_circle(n: usize) -> Self {
        let params: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        Self::new(
            BoundaryDomain::Circle,
            params.clone(),
            params,
            BoundaryNormalization::OneMinusOneMinusI,
        )
        .expect("identity is increasing")
    }

    pub fn identity_line(truncation: f64, n: usize) -> Self {
        let h = 2.0 * truncation / n as f64;
        let params: Vec<f64> = (0..n).map(|j| -truncation + (j as f64 + 0.5) * h).collect();
        Self::new(
            BoundaryDomain::Line { truncation },
            params.clone(),
            params,
            BoundaryNormalization::ZeroOneInfinity,
        )
        .expect("identity is increasing")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Piecewise-linear evaluation; line maps extrapolate linearly from the end segments.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.params.len();
        match self.domain {
            BoundaryDomain::Circle => {
                let turns = (t / TAU).floor();
                let t0 = t - turns * TAU;
                let (first, last) = (self.params[0], self.params[n - 1]);
                let v = if t0 >= last || t0 < first {
                    let span = first + TAU - last;
                    let (d, base) = if t0 >= last {
                        (t0 - last, 0.0)
                    } else {
                        (t0 + TAU - last, -TAU)
                    };
                    let f = d / span;
                    self.values[n - 1] * (1.0 - f) + (self.values[0] + TAU) * f + base
                } else {
                    let (k, f) = bracket(&self.params, t0);
                    self.values[k] * (1.0 - f) + self.values[k + 1] * f
                };
                v + turns * TAU
            }
            BoundaryDomain::Line { .. } => {
                let k = if t <= self.params[0] {
                    0
                } else if t >= self.params[n - 1] {
                    n - 2
                } else {
                    bracket(&self.params, t).0
                };
                let f = (t - self.params[k]) / (self.params[k + 1] - self.params[k]);
                self.values[k] * (1.0 - f) + self.values[k + 1] * f
            }
        }
    }

    /// As a complex boundary function (`e^{iΘ}` on the circle).
    pub fn to_function(&self) -> BoundaryFunction {
        let values = match self.domain {
            BoundaryDomain::Circle => self
                .values
                .iter()
                .map(|&v| Complex64::from_polar(1.0, v))
                .collect(),
            BoundaryDomain::Line { .. } => self
                .values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        };
        BoundaryFunction {
            domain: self.domain,
            params: self.params.clone(),
            values,
        }
    }

    /// Largest deviation from the normalization points, 0 when none are declared.
    pub fn normalization_defect(&self) -> f64 {
        let pts: &[(f64, f64)] = match (self.domain, self.normalization) {
            (BoundaryDomain::Circle, BoundaryNormalization::OneMinusOneMinusI) => {
                &[(0.0, 0.0), (PI, PI), (1.5 * PI, 1.5 * PI)]
            }
            (BoundaryDomain::Line { .. }, BoundaryNormalization::ZeroOneInfinity) => {
                &[(0.0, 0.0), (1.0, 1.0)]
            }
            _ => &[],
        };
        pts.iter()
            .map(|&(t, v)| match self.domain {
                BoundaryDomain::Circle => {
                    let d = (self.eval(t) - v).rem_euclid(TAU);
                    d.min(TAU - d)
                }
                BoundaryDomain::Line { .. } => (self.eval(t) - v).abs(),
            })
            .fold(0.0, f64::max)
    }

    pub fn check_normalization(&self, tol: f64) -> Result<()> {
        let d = self.normalization_defect();
        if d > tol {
            return Err(Error::Invalid(format!(
                "normalization defect {d:e} above {tol:e}"
            )));
        }
        Ok(())
    }

    /// Conjugation `H ∘ h ∘ H⁻¹` (or its inverse) between circle and line maps.
    pub fn conjugate(&self, direction: CayleyDirection, truncation: f64) -> Result<Self> {
        match (direction, self.domain) {
            (CayleyDirection::DiskToHalfPlane, BoundaryDomain::Circle) => {
                let mut params = Vec::new();
                let mut values = Vec::new();
                let shift = self.eval(0.0);
                for (&theta, &v) in self.params.iter().zip(&self.values) {
                    if theta == 0.0 {
                        continue;
                    }
                    let x = angle_to_line(theta);
                    // Lift relative to Θ(0) keeps the image angle inside (0, 2π).
                    let y = angle_to_line((v - shift).rem_euclid(TAU) + shift);
                    if x.abs() <= truncation && y.is_finite() {
                        params.push(x);
                        values.push(y);
                    }
                }
                let normalization = match self.normalization {
                    BoundaryNormalization::OneMinusOneMinusI => {
                        BoundaryNormalization::ZeroOneInfinity
                    }
                    _ => BoundaryNormalization::None,
                };
                Self::new(
                    BoundaryDomain::Line { truncation },
                    params,
                    values,
                    normalization,
                )
            }
            (CayleyDirection::HalfPlaneToDisk, BoundaryDomain::Line { .. }) => {
                let params = self.params.iter().map(|&x| line_to_angle(x)).collect();
                let values = self.values.iter().map(|&y| line_to_angle(y)).collect();
                let normalization = match self.normalization {
                    BoundaryNormalization::ZeroOneInfinity => {
                        BoundaryNormalization::OneMinusOneMinusI
                    }
                    _ => BoundaryNormalization::None,
                };
                Self::new(BoundaryDomain::Circle, params, values, normalization)
            }
            (_, domain) => Err(Error::Invalid(format!(
                "homeomorphism on {domain:?} cannot be conjugated {direction:?}"
            ))),
        }
    }

    pub fn sup_distance(&self, other: &BoundaryHomeomorphism) -> f64 {
        self.params
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (v - other.eval(t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sidecar(&self) -> BoundarySidecar {
        BoundarySidecar {
            domain: self.domain,
            truncation: self.domain.truncation(),
            normalization: self.normalization,
            homeomorphism: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_monotone_parameters() {
        let r = BoundaryFunction::new(
            BoundaryDomain::Line { truncation: 2.0 },
            vec![0.0, 1.0, 1.0],
            vec![Complex64::new(0.0, 0.0); 3],
        );
        assert!(matches!(r, Err(Error::NotIncreasing(2))));
        let h = BoundaryHomeomorphism::new(
            BoundaryDomain::Line { truncation: 2.0 },
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.5, 0.5],
            BoundaryNormalization::None,
        );
        assert!(matches!(h, Err(Error::NotIncreasing(2))));
    }

    #[test]
    fn circle_interpolation_wraps() {
        let u = BoundaryFunction::circle_from_fn(32, |t| Complex64::new(t.cos(), t.sin())).unwrap();
        let t = TAU - 0.1;
        let v = u.eval(t);
        assert!((v - Complex64::from_polar(1.0, t)).norm() < 0.02);
        let h = BoundaryHomeomorphism::identity_circle(16);
        assert!((h.eval(TAU - 0.05) - (TAU - 0.05)).abs() < 1e-12);
        assert!((h.eval(7.0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn identity_conjugates_to_identity() {
        let h = BoundaryHomeomorphism::identity_circle(512);
        let line = h.conjugate(CayleyDirection::DiskToHalfPlane, 16.0).unwrap();
        assert!(line.normalization_defect() < 1e-12);
        for (&x, &y) in line.params().iter().zip(line.values()) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
        assert_eq!(line.normalization, BoundaryNormalization::ZeroOneInfinity);
    }

    proptest! {
        #[test]
        fn angle_line_roundtrip(theta in 0.01f64..6.27) {
            let x = angle_to_line(theta);
            prop_assert!((line_to_angle(x) - theta).abs() < 1e-12);
        }
    }
}
