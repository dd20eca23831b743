use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DomainTag;
use crate::error::{Error, Result};

/// Geometry of a square sampling grid: `n x n` nodes with spacing `2 L / n`.
///
/// Node `(row, col)` sits at `center + (col - n/2) h + i (row - n/2) h`, so the
/// center is itself a node and the grid spans `[-L, L - h]` in each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 1024,
            half_width: 4.0,
            center: [0.0, 0.0],
        }
    }
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        let spec = GridSpec {
            n,
            half_width,
            center: [0.0, 0.0],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 8 {
            return Err(Error::GridNotPowerOfTwo(self.n));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::Invalid(format!("half_width {}", self.half_width)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }

    pub fn node(&self, row: usize, col: usize) -> Complex64 {
        let h = self.spacing();
        let half = (self.n / 2) as f64;
        self.center() + Complex64::new((col as f64 - half) * h, (row as f64 - half) * h)
    }

    /// Fractional (col, row) coordinates of `z`.
    pub fn coordinates(&self, z: Complex64) -> (f64, f64) {
        let h = self.spacing();
        let half = (self.n / 2) as f64;
        let d = z - self.center();
        (d.re / h + half, d.im / h + half)
    }

    /// Whether a 4x4 interpolation stencil around `z` fits inside the grid.
    pub fn interpolates(&self, z: Complex64) -> bool {
        let (x, y) = self.coordinates(z);
        let hi = self.n as f64 - 2.0;
        x >= 1.0 && y >= 1.0 && x < hi && y < hi
    }

    /// Width (in nodes) of the outer margin that must carry no support.
    pub fn margin_nodes(&self) -> usize {
        (self.n / 20).max(1)
    }
}

/// Complex samples on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        ComplexGrid {
            spec,
            values: vec![Complex64::new(0.0, 0.0); spec.n * spec.n],
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        let n = spec.n;
        let mut values = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                values.push(f(spec.node(row, col)));
            }
        }
        ComplexGrid { spec, values }
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.spec.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        let n = self.spec.n;
        self.values[row * n + col] = v;
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete L2 norm with area element `h^2`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.spec.spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Rejects grids whose values in the outer 10% band are not negligible.
    pub fn check_margin(&self) -> Result<()> {
        let n = self.spec.n;
        let m = self.spec.margin_nodes();
        let scale = self.sup_norm();
        if scale == 0.0 {
            return Ok(());
        }
        let threshold = 1e-12 * scale;
        for row in 0..n {
            for col in 0..n {
                let inner = row >= m && row < n - m && col >= m && col < n - m;
                if inner {
                    continue;
                }
                let v = self.get(row, col).norm();
                if v > threshold {
                    return Err(Error::SupportInMargin {
                        row,
                        col,
                        magnitude: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Tensor-product cubic Lagrange interpolation; `None` outside the stencil range.
    pub fn interpolate(&self, z: Complex64) -> Option<Complex64> {
        if !self.spec.interpolates(z) {
            return None;
        }
        let (x, y) = self.spec.coordinates(z);
        let (ix, fx) = (x.floor() as usize, x - x.floor());
        let (iy, fy) = (y.floor() as usize, y - y.floor());
        let wx = cubic_weights(fx);
        let wy = cubic_weights(fy);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wya) in wy.iter().enumerate() {
            let row = iy + a - 1;
            let mut line = Complex64::new(0.0, 0.0);
            for (b, wxb) in wx.iter().enumerate() {
                line += self.get(row, ix + b - 1) * wxb;
            }
            acc += line * wya;
        }
        Some(acc)
    }

    pub fn header(&self, domain: DomainTag, normalization: &str) -> GridHeader {
        GridHeader {
            domain,
            center: self.spec.center,
            half_width: self.spec.half_width,
            n: self.spec.n,
            normalization: normalization.to_string(),
        }
    }

    /// Little-endian `(re, im)` f64 pairs, row-major.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(spec: GridSpec, bytes: &[u8]) -> Result<Self> {
        spec.validate()?;
        let expected = spec.n * spec.n * 16;
        if bytes.len() != expected {
            return Err(Error::Serialization(format!(
                "expected {expected} bytes, found {}",
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let grid = ComplexGrid { spec, values };
        if !grid.is_finite() {
            return Err(Error::Serialization("non-finite grid value".into()));
        }
        Ok(grid)
    }

    /// JSON header with the samples embedded as base64 under `data`.
    pub fn to_json(&self, domain: DomainTag, normalization: &str) -> serde_json::Value {
        let mut v = serde_json::to_value(self.header(domain, normalization)).unwrap();
        v["encoding"] = "base64-f64le-complex".into();
        v["data"] = B64.encode(self.to_le_bytes()).into();
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<(GridHeader, Self)> {
        let header: GridHeader = serde_json::from_value(v.clone())?;
        let data = v
            .get("data")
            .and_then(|d| d.as_str())
            .ok_or_else(|| Error::Serialization("missing data field".into()))?;
        let bytes = B64
            .decode(data)
            .map_err(|e| Error::Serialization(e.to_string()))?;
        let spec = GridSpec {
            n: header.n,
            half_width: header.half_width,
            center: header.center,
        };
        let grid = Self::from_le_bytes(spec, &bytes)?;
        Ok((header, grid))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub domain: DomainTag,
    pub center: [f64; 2],
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub normalization: String,
}

/// Lagrange weights for nodes -1, 0, 1, 2 at offset `t` in [0, 1).
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spacing_and_center_node() {
        let spec = GridSpec::new(64, 2.0).unwrap();
        assert_eq!(spec.spacing(), 1.0 / 16.0);
        assert_eq!(spec.node(32, 32), Complex64::new(0.0, 0.0));
        assert!(GridSpec::new(100, 1.0).is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let spec = GridSpec::new(32, 2.0).unwrap();
        let f = |z: Complex64| z * z * z - 2.0 * z.conj() * z + 1.0;
        let g = ComplexGrid::from_fn(spec, f);
        let z = Complex64::new(0.331, -0.217);
        assert!((g.interpolate(z).unwrap() - f(z)).norm() < 1e-12);
        assert!(g.interpolate(Complex64::new(1.99, 0.0)).is_none());
    }

    #[test]
    fn margin_detection() {
        let spec = GridSpec::new(32, 4.0).unwrap();
        let inside = ComplexGrid::from_fn(spec, |z| {
            if z.norm() < 2.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(inside.check_margin().is_ok());
        let wide = ComplexGrid::from_fn(spec, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            wide.check_margin(),
            Err(Error::SupportInMargin { .. })
        ));
    }

    proptest! {
        #[test]
        fn json_roundtrip(seed in 0u64..1000) {
            let spec = GridSpec::new(8, 1.5).unwrap();
            let g = ComplexGrid::from_fn(spec, |z| Complex64::new(
                (z.re * seed as f64).sin(), (z.im + seed as f64).cos()));
            let json = g.to_json(DomainTag::Plane, "none");
            let (header, back) = ComplexGrid::from_json(&json).unwrap();
            prop_assert_eq!(header.n, 8);
            prop_assert_eq!(back, g);
        }
    }
}
