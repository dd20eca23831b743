use num_complex::Complex64;

use crate::error::{Error, Result};

/// Möbius transformation `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mobius::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn affine(scale: Complex64, shift: Complex64) -> Self {
        Mobius::new(scale, shift, ZERO, ONE)
    }

    /// The Cayley transform `-i (z + 1) / (z - 1)` taking the disk to the upper half-plane.
    pub fn cayley() -> Self {
        let i = Complex64::i();
        Mobius::new(-i, -i, ONE, -ONE)
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Image of `z`; the pole maps to `Complex64::infinity()`-like values, so
    /// callers must stay away from `-d/c`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Image of the point at infinity, or `None` when it is infinity itself.
    pub fn at_infinity(&self) -> Option<Complex64> {
        if self.c.norm() < 1e-300 {
            None
        } else {
            Some(self.a / self.c)
        }
    }

    /// First three derivatives at `z`.
    pub fn derivatives(&self, z: Complex64) -> [Complex64; 3] {
        let q = self.c * z + self.d;
        let det = self.determinant();
        let d1 = det / (q * q);
        let d2 = -2.0 * det * self.c / (q * q * q);
        let d3 = 6.0 * det * self.c * self.c / (q * q * q * q);
        [d1, d2, d3]
    }

    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius::new(
            self.a * inner.a + self.b * inner.c,
            self.a * inner.b + self.b * inner.d,
            self.c * inner.a + self.d * inner.c,
            self.c * inner.b + self.d * inner.d,
        )
    }

    pub fn inverse(&self) -> Mobius {
        Mobius::new(self.d, -self.b, -self.c, self.a)
    }

    /// The map sending `z1, z2, z3` to `0, 1, infinity`.
    fn to_standard(z1: Complex64, z2: Complex64, z3: Complex64) -> Result<Mobius> {
        let m = Mobius::new(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1));
        if m.determinant().norm() < 1e-14 {
            return Err(Error::Invalid("degenerate Möbius triple".into()));
        }
        Ok(m)
    }

    /// The unique map with `from[k] -> to[k]` for finite, distinct triples.
    pub fn from_triples(from: [Complex64; 3], to: [Complex64; 3]) -> Result<Mobius> {
        let s = Self::to_standard(from[0], from[1], from[2])?;
        let t = Self::to_standard(to[0], to[1], to[2])?;
        Ok(t.inverse().compose(&s))
    }

    /// Whether the map is affine (fixes infinity).
    pub fn is_affine(&self) -> bool {
        self.c.norm() <= 1e-300
    }
}
