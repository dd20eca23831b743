use num_complex::Complex64;

use super::{DomainTag, Mobius};
use crate::error::{Error, Result};

/// `Σ a_n (z - c)^n` for `n = min_order ..`, valid on
/// `inner_radius < |z - c| < outer_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    pub center: Complex64,
    pub min_order: i32,
    pub coeffs: Vec<Complex64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl LaurentSeries {
    pub fn new(
        center: Complex64,
        min_order: i32,
        coeffs: Vec<Complex64>,
        inner_radius: f64,
        outer_radius: f64,
    ) -> Self {
        LaurentSeries {
            center,
            min_order,
            coeffs,
            inner_radius,
            outer_radius,
        }
    }

    pub fn max_order(&self) -> i32 {
        self.min_order + self.coeffs.len() as i32 - 1
    }

    pub fn coefficient(&self, order: i32) -> Complex64 {
        let k = order - self.min_order;
        if k < 0 || k as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[k as usize]
        }
    }

    /// Drops coefficients below `cutoff` at both ends.
    pub fn trimmed(mut self, cutoff: f64) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= cutoff {
            self.coeffs.pop();
        }
        let lead = self
            .coeffs
            .iter()
            .position(|c| c.norm() > cutoff)
            .unwrap_or(self.coeffs.len() - 1);
        self.coeffs.drain(..lead);
        self.min_order += lead as i32;
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z - self.center;
        let mut acc = Complex64::new(0.0, 0.0);
        let max = self.max_order();
        // Horner in w over the non-negative part, in 1/w over the negative part.
        if max >= 0 {
            for n in (0.max(self.min_order)..=max).rev() {
                acc = acc * w + self.coefficient(n);
            }
            if self.min_order > 0 {
                acc *= w.powi(self.min_order);
            }
        }
        if self.min_order < 0 {
            // Horner in 1/w from the most negative order up to `top`.
            let inv = 1.0 / w;
            let top = max.min(-1);
            let mut neg = Complex64::new(0.0, 0.0);
            for n in self.min_order..=top {
                neg = neg * inv + self.coefficient(n);
            }
            acc += neg * inv.powi(-top);
        }
        acc
    }

    pub fn derivative(&self) -> LaurentSeries {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            let n = self.min_order + k as i32;
            coeffs.push(c * n as f64);
        }
        let mut out = LaurentSeries::new(
            self.center,
            self.min_order - 1,
            coeffs,
            self.inner_radius,
            self.outer_radius,
        );
        // The constant term differentiates to the (empty) order -1 slot.
        if out.coeffs.len() > 1 || out.min_order != -1 {
            out = out.trimmed(0.0);
        }
        out
    }

    /// Largest term magnitude among the outermost few coefficients, evaluated
    /// on the boundary circles of the annulus of validity.
    pub fn tail_magnitude(&self) -> f64 {
        let k = 4.min(self.coeffs.len());
        let mut tail: f64 = 0.0;
        for i in 0..k {
            let n = self.min_order + i as i32;
            if n < 0 && self.inner_radius > 0.0 {
                tail = tail.max(self.coefficient(n).norm() * self.inner_radius.powi(n));
            }
            let m = self.max_order() - i as i32;
            if m > 0 && self.outer_radius.is_finite() {
                tail = tail.max(self.coefficient(m).norm() * self.outer_radius.powi(m));
            }
        }
        tail
    }
}

/// Holomorphic function with derivatives up to order three.
#[derive(Debug, Clone, PartialEq)]
pub enum HolomorphicFunction {
    Series {
        series: LaurentSeries,
        domain: DomainTag,
    },
    /// `inner ∘ map`, living on `domain`.
    Pullback {
        inner: Box<HolomorphicFunction>,
        map: Mobius,
        domain: DomainTag,
    },
}

impl HolomorphicFunction {
    pub fn from_series(series: LaurentSeries, domain: DomainTag) -> Self {
        HolomorphicFunction::Series { series, domain }
    }

    /// Taylor series about 0 converging on `|z| < radius`.
    pub fn taylor(coeffs: Vec<Complex64>, radius: f64) -> Self {
        Self::from_series(
            LaurentSeries::new(Complex64::new(0.0, 0.0), 0, coeffs, 0.0, radius),
            DomainTag::UnitDisk,
        )
    }

    pub fn zero(domain: DomainTag) -> Self {
        let (inner, outer) = match domain {
            DomainTag::ExteriorDisk => (0.0, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        };
        Self::from_series(
            LaurentSeries::new(
                Complex64::new(0.0, 0.0),
                0,
                vec![Complex64::new(0.0, 0.0)],
                inner,
                outer,
            ),
            domain,
        )
    }

    /// `z^n` on the unit disk.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Self::taylor(c, f64::INFINITY)
    }

    /// `1/(z - a)` expanded about 0, valid for `|z| < |a|`.
    pub fn simple_pole(a: Complex64, terms: usize) -> Self {
        let coeffs = (0..terms).map(|n| -1.0 / a.powi(n as i32 + 1)).collect();
        Self::taylor(coeffs, a.norm())
    }

    /// `z + c / z` on the exterior disk.
    pub fn inversion_map(c: Complex64) -> Self {
        Self::from_series(
            LaurentSeries::new(
                Complex64::new(0.0, 0.0),
                -1,
                vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                c.norm().sqrt(),
                f64::INFINITY,
            ),
            DomainTag::ExteriorDisk,
        )
    }

    /// `-6 c / (z^2 - c)^2` with `c = k r^2`: the Bers image of `k χ_{|z|<r}`.
    pub fn disk_schwarzian(c: Complex64, terms: usize) -> Self {
        // -6c z^-4 Σ (m+1) c^m z^{-2m}
        let len = 4 + 2 * terms;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        let min_order = -(len as i32) + 1;
        for m in 0..terms {
            let order = -4 - 2 * m as i32;
            coeffs[(order - min_order) as usize] = -6.0 * c * (m as f64 + 1.0) * c.powi(m as i32);
        }
        let series = LaurentSeries::new(
            Complex64::new(0.0, 0.0),
            min_order,
            coeffs,
            c.norm().sqrt(),
            f64::INFINITY,
        )
        .trimmed(0.0);
        Self::from_series(series, DomainTag::ExteriorDisk)
    }

    pub fn domain(&self) -> DomainTag {
        match self {
            HolomorphicFunction::Series { domain, .. } => *domain,
            HolomorphicFunction::Pullback { domain, .. } => *domain,
        }
    }

    pub fn series(&self) -> Option<&LaurentSeries> {
        match self {
            HolomorphicFunction::Series { series, .. } => Some(series),
            _ => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicFunction::Series { series, .. } => series.eval(z),
            HolomorphicFunction::Pullback { inner, map, .. } => inner.eval(map.apply(z)),
        }
    }

    /// `[f, f', f'', f''']` at `z`.
    pub fn derivatives(&self, z: Complex64) -> [Complex64; 4] {
        match self {
            HolomorphicFunction::Series { series, .. } => {
                let d1 = series.derivative();
                let d2 = d1.derivative();
                let d3 = d2.derivative();
                [series.eval(z), d1.eval(z), d2.eval(z), d3.eval(z)]
            }
            HolomorphicFunction::Pullback { inner, map, .. } => {
                let w = map.apply(z);
                let [g0, g1, g2, g3] = inner.derivatives(w);
                let [m1, m2, m3] = map.derivatives(z);
                [
                    g0,
                    g1 * m1,
                    g2 * m1 * m1 + g1 * m2,
                    g3 * m1 * m1 * m1 + 3.0 * g2 * m1 * m2 + g1 * m3,
                ]
            }
        }
    }

    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        self.derivatives(z)[1]
    }

    /// Maximum order of the Laurent representation, if the function is a series.
    pub fn max_order(&self) -> Option<i32> {
        self.series().map(|s| {
            let mut m = s.max_order();
            while m > s.min_order && s.coefficient(m).norm() == 0.0 {
                m -= 1;
            }
            m
        })
    }

    /// Checks that the series tail is below `cutoff` relative to the leading scale.
    pub fn check_convergence(&self, cutoff: f64) -> Result<()> {
        if let Some(s) = self.series() {
            let scale = s
                .coeffs
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
                .max(1e-300);
            let tail = s.tail_magnitude();
            if tail > cutoff * scale.max(1.0) {
                return Err(Error::Invalid(format!(
                    "series tail {tail:e} exceeds cutoff on the annulus"
                )));
            }
        }
        Ok(())
    }

    pub fn pullback(self, map: Mobius, domain: DomainTag) -> Self {
        HolomorphicFunction::Pullback {
            inner: Box::new(self),
            map,
            domain,
        }
    }
}
