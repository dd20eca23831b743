use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexGrid, DomainTag, GridSpec};
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Zero outside the closed disk `|z| <= r`.
    Radius(f64),
    Full,
}

impl Support {
    pub fn radius(self) -> Option<f64> {
        match self {
            Support::Radius(r) => Some(r),
            Support::Full => None,
        }
    }
}

/// Provenance of a coefficient; closed forms let downstream code use exact maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientKind {
    Zero,
    /// `k χ_{|z| < r}`.
    ConstantDisk {
        k: [f64; 2],
        r: f64,
    },
    /// `k z / z̄` on the upper half-plane, the dilatation of `z |z|^{α-1}`.
    PowerMap {
        alpha: f64,
    },
    /// Piecewise-constant radial profile.
    Table {
        radii: Vec<f64>,
        values: Vec<[f64; 2]>,
    },
    Grid,
    Derived {
        description: String,
    },
}

/// A measurable coefficient `μ` with `‖μ‖_∞ < 1` on a tagged domain.
#[derive(Clone)]
pub struct BeltramiCoefficient {
    domain: DomainTag,
    support: Support,
    sup_norm: f64,
    kind: CoefficientKind,
    radial_breaks: Vec<f64>,
    discontinuous: bool,
    eval: Evaluator,
}

impl fmt::Debug for BeltramiCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BeltramiCoefficient")
            .field("domain", &self.domain)
            .field("support", &self.support)
            .field("sup_norm", &self.sup_norm)
            .field("kind", &self.kind)
            .finish()
    }
}

impl BeltramiCoefficient {
    /// Wraps `eval`, enforcing zero outside the support and outside the domain.
    pub fn from_fn(
        domain: DomainTag,
        support: Support,
        sup_norm: f64,
        kind: CoefficientKind,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(sup_norm < 1.0) || sup_norm.is_nan() {
            return Err(Error::NotQuasiconformal(sup_norm));
        }
        Ok(BeltramiCoefficient {
            domain,
            support,
            sup_norm,
            kind,
            radial_breaks: Vec::new(),
            discontinuous: false,
            eval: Arc::new(eval),
        })
    }

    pub fn zero(domain: DomainTag) -> Self {
        BeltramiCoefficient {
            domain,
            support: Support::Radius(0.0),
            sup_norm: 0.0,
            kind: CoefficientKind::Zero,
            radial_breaks: Vec::new(),
            discontinuous: false,
            eval: Arc::new(|_| Complex64::new(0.0, 0.0)),
        }
    }

    /// `k χ_{|z|<r}` on the unit disk (`r <= 1`).
    pub fn constant_disk(k: Complex64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Invalid(format!("disk radius {r} outside (0, 1]")));
        }
        let mut mu = Self::from_fn(
            DomainTag::UnitDisk,
            Support::Radius(r),
            k.norm(),
            CoefficientKind::ConstantDisk { k: [k.re, k.im], r },
            move |z| {
                if z.norm_sqr() < r * r {
                    k
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        )?;
        mu.radial_breaks = vec![r];
        mu.discontinuous = true;
        Ok(mu)
    }

    /// `k z / z̄` with `k = (α-1)/(α+1)` on the upper half-plane.
    pub fn power_map(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Invalid(format!(
                "power exponent {alpha} must be positive"
            )));
        }
        let k = (alpha - 1.0) / (alpha + 1.0);
        Self::from_fn(
            DomainTag::UpperHalfPlane,
            Support::Full,
            k.abs(),
            CoefficientKind::PowerMap { alpha },
            move |z| {
                if z.norm_sqr() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    k * z / z.conj()
                }
            },
        )
    }

    /// Piecewise-constant radial profile on the unit disk: `values[j]` on
    /// `radii[j-1] <= |z| < radii[j]` (with `radii[-1] = 0`).
    pub fn radial_table(radii: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(Error::Invalid("table radii/values length mismatch".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 || *radii.last().unwrap() > 1.0
        {
            return Err(Error::Invalid(
                "table radii must increase within (0, 1]".into(),
            ));
        }
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let kind = CoefficientKind::Table {
            radii: radii.clone(),
            values: values.iter().map(|v| [v.re, v.im]).collect(),
        };
        let outer = *radii.last().unwrap();
        let r2 = radii.clone();
        let mut mu = Self::from_fn(
            DomainTag::UnitDisk,
            Support::Radius(outer),
            sup,
            kind,
            move |z| {
                let a = z.norm();
                match r2.iter().position(|&r| a < r) {
                    Some(j) => values[j],
                    None => Complex64::new(0.0, 0.0),
                }
            },
        )?;
        mu.radial_breaks = radii;
        mu.discontinuous = true;
        Ok(mu)
    }

    /// Coefficient given by grid samples with bilinear interpolation.
    pub fn from_grid(domain: DomainTag, grid: ComplexGrid, support: Support) -> Result<Self> {
        let sup = grid.sup_norm();
        let grid = Arc::new(grid);
        let g = grid.clone();
        let mut mu = Self::from_fn(domain, support, sup, CoefficientKind::Grid, move |z| {
            bilinear(&g, z)
        })?;
        mu.discontinuous = true;
        Ok(mu)
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>, discontinuous: bool) -> Self {
        self.radial_breaks = breaks;
        self.discontinuous = discontinuous;
        self
    }

    pub fn with_kind(mut self, kind: CoefficientKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn radial_breaks(&self) -> &[f64] {
        &self.radial_breaks
    }

    pub fn is_discontinuous(&self) -> bool {
        self.discontinuous
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, CoefficientKind::Zero) || self.sup_norm == 0.0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if let Support::Radius(r) = self.support {
            if z.norm_sqr() > r * r {
                return Complex64::new(0.0, 0.0);
            }
        }
        if self.domain != DomainTag::Plane && !self.domain.contains(z) {
            return Complex64::new(0.0, 0.0);
        }
        (self.eval)(z)
    }

    /// `c μ` for real or complex `c` keeping `‖c μ‖_∞ < 1`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        let inner = self.clone();
        let kind = match &self.kind {
            CoefficientKind::ConstantDisk { k, r } => {
                let k = c * Complex64::new(k[0], k[1]);
                CoefficientKind::ConstantDisk {
                    k: [k.re, k.im],
                    r: *r,
                }
            }
            CoefficientKind::Zero => CoefficientKind::Zero,
            _ => CoefficientKind::Derived {
                description: format!("scaled by {c}"),
            },
        };
        let mut out = Self::from_fn(
            self.domain,
            self.support,
            self.sup_norm * c.norm(),
            kind,
            move |z| c * inner.eval(z),
        )?;
        out.radial_breaks = self.radial_breaks.clone();
        out.discontinuous = self.discontinuous;
        Ok(out)
    }

    /// Treat as a coefficient on the plane (zero off its domain).
    pub fn on_plane(&self) -> Self {
        let inner = self.clone();
        let mut out = self.clone();
        out.domain = DomainTag::Plane;
        if self.domain == DomainTag::UnitDisk && self.support == Support::Full {
            out.support = Support::Radius(1.0);
        }
        out.eval = Arc::new(move |z| inner.eval(z));
        out
    }

    /// Cell averages over `grid`, using 4x4 supersampling when discontinuous.
    pub fn sample(&self, spec: GridSpec) -> ComplexGrid {
        let h = spec.spacing();
        let radius = self.support.radius();
        let sub: usize = if self.discontinuous { 4 } else { 1 };
        let offsets: Vec<f64> = (0..sub)
            .map(|k| ((k as f64 + 0.5) / sub as f64 - 0.5) * h)
            .collect();
        let weight = 1.0 / (sub * sub) as f64;
        ComplexGrid::from_fn(spec, |z| {
            if let Some(r) = radius {
                if z.norm() > r + h {
                    return Complex64::new(0.0, 0.0);
                }
            }
            if sub == 1 {
                return self.eval(z);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for &oy in &offsets {
                for &ox in &offsets {
                    acc += self.eval(z + Complex64::new(ox, oy));
                }
            }
            acc * weight
        })
    }

    /// Sup norm estimated from samples on `spec`.
    pub fn sampled_sup_norm(&self, spec: GridSpec) -> f64 {
        ComplexGrid::from_fn(spec, |z| self.eval(z)).sup_norm()
    }
}

fn bilinear(g: &ComplexGrid, z: Complex64) -> Complex64 {
    let (x, y) = g.spec.coordinates(z);
    let n = g.n();
    if x < 0.0 || y < 0.0 || x > (n - 1) as f64 || y > (n - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let ix = (x.floor() as usize).min(n - 2);
    let iy = (y.floor() as usize).min(n - 2);
    let fx = x - ix as f64;
    let fy = y - iy as f64;
    let a = g.get(iy, ix) * (1.0 - fx) + g.get(iy, ix + 1) * fx;
    let b = g.get(iy + 1, ix) * (1.0 - fx) + g.get(iy + 1, ix + 1) * fx;
    a * (1.0 - fy) + b * fy
}

/// JSON description of a coefficient accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientSpec {
    Zero,
    ConstantDisk {
        k: f64,
        #[serde(default)]
        k_im: f64,
        r: f64,
    },
    PowerMap {
        alpha: f64,
    },
    /// Expression-free radial table.
    Table {
        radii: Vec<f64>,
        values: Vec<[f64; 2]>,
    },
    /// Grid in the `domains` serialization (header fields plus base64 `data`).
    Grid {
        grid: serde_json::Value,
        #[serde(default)]
        support_radius: Option<f64>,
    },
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<BeltramiCoefficient> {
        match self {
            CoefficientSpec::Zero => Ok(BeltramiCoefficient::zero(DomainTag::UnitDisk)),
            CoefficientSpec::ConstantDisk { k, k_im, r } => {
                BeltramiCoefficient::constant_disk(Complex64::new(*k, *k_im), *r)
            }
            CoefficientSpec::PowerMap { alpha } => BeltramiCoefficient::power_map(*alpha),
            CoefficientSpec::Table { radii, values } => BeltramiCoefficient::radial_table(
                radii.clone(),
                values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
            ),
            CoefficientSpec::Grid {
                grid,
                support_radius,
            } => {
                let (header, g) = ComplexGrid::from_json(grid)?;
                let support = support_radius.map(Support::Radius).unwrap_or(Support::Full);
                BeltramiCoefficient::from_grid(header.domain, g, support)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_disk_respects_support() {
        let mu = BeltramiCoefficient::constant_disk(Complex64::new(0.3, 0.0), 0.5).unwrap();
        assert_eq!(mu.eval(Complex64::new(0.2, 0.1)), Complex64::new(0.3, 0.0));
        assert_eq!(mu.eval(Complex64::new(0.6, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(mu.sup_norm(), 0.3);
    }

    #[test]
    fn rejects_non_contractive() {
        assert!(matches!(
            BeltramiCoefficient::constant_disk(Complex64::new(1.0, 0.0), 0.5),
            Err(Error::NotQuasiconformal(_))
        ));
    }

    #[test]
    fn disk_coefficients_vanish_outside_disk() {
        let mu = BeltramiCoefficient::from_fn(
            DomainTag::UnitDisk,
            Support::Full,
            0.2,
            CoefficientKind::Derived {
                description: "const".into(),
            },
            |_| Complex64::new(0.2, 0.0),
        )
        .unwrap();
        assert_eq!(mu.eval(Complex64::new(1.5, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(mu.eval(Complex64::new(0.5, 0.0)), Complex64::new(0.2, 0.0));
    }

    #[test]
    fn supersampled_cell_average_tracks_area() {
        let mu = BeltramiCoefficient::constant_disk(Complex64::new(1.0 - 1e-9, 0.0), 0.5).unwrap();
        let spec = GridSpec::new(128, 1.0).unwrap();
        let g = mu.sample(spec);
        let h = spec.spacing();
        let area: f64 = g.values.iter().map(|v| v.re).sum::<f64>() * h * h;
        assert!((area - std::f64::consts::PI * 0.25).abs() < 2e-4);
    }

    #[test]
    fn spec_json_parses() {
        let s: CoefficientSpec =
            serde_json::from_str(r#"{"kind": "constant_disk", "k": 0.3, "r": 0.5}"#).unwrap();
        let mu = s.build().unwrap();
        assert_eq!(mu.sup_norm(), 0.3);
    }
}
