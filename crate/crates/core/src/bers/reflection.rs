use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::domains::{BeltramiCoefficient, CoefficientKind, DomainTag};
use crate::error::{Error, Result};
use crate::solver::{solve_plane_with, QuasiconformalMap, SolverOptions};

/// Quasiconformal reflection `j(ζ) = f_ν((f_ν⁻¹(ζ))*)` across the curve `f_ν(S)`.
#[derive(Debug, Clone)]
pub struct ReflectionMap {
    pub base_nu: BeltramiCoefficient,
    /// Plane map with dilatation `ν` on `D`, conformal on `D*`.
    pub f_nu: QuasiconformalMap,
    /// Largest observed `|ζ - j(ζ)|² |j_z̄(ζ)| ρ_{Ω*}(j(ζ))²` on the samples.
    pub eq3_constant: f64,
    /// Largest `|j(ζ) - ζ|` on samples of the curve.
    pub curve_defect: f64,
}

fn star(z: Complex64) -> Complex64 {
    1.0 / z.conj()
}

/// Radii of the sample circles in `D` used for the empirical constant.
const SAMPLE_RADII: [f64; 4] = [0.6, 0.8, 0.9, 0.95];

impl ReflectionMap {
    pub fn j(&self, zeta: Complex64) -> Result<Complex64> {
        self.j_seeded(zeta, None)
    }

    fn j_seeded(&self, zeta: Complex64, seed: Option<Complex64>) -> Result<Complex64> {
        let z = self.f_nu.invert_point(zeta, seed)?;
        if z.norm_sqr() == 0.0 {
            return Err(Error::InversionFailed {
                w: zeta,
                residual: f64::INFINITY,
            });
        }
        self.f_nu.eval(star(z))
    }

    /// `(j_z, j_z̄)` at `ζ` by centred differences.
    pub fn partials(&self, zeta: Complex64) -> Result<(Complex64, Complex64)> {
        let seed = self.f_nu.invert_point(zeta, None)?;
        let h = 1e-5 * zeta.norm().max(1.0);
        let e = self.j_seeded(zeta + h, Some(seed))?;
        let w = self.j_seeded(zeta - h, Some(seed))?;
        let n = self.j_seeded(zeta + Complex64::new(0.0, h), Some(seed))?;
        let s = self.j_seeded(zeta - Complex64::new(0.0, h), Some(seed))?;
        let jx = (e - w) / (2.0 * h);
        let jy = (n - s) / (2.0 * h);
        Ok((
            (jx - Complex64::i() * jy) * 0.5,
            (jx + Complex64::i() * jy) * 0.5,
        ))
    }

    /// Hyperbolic density of `Ω* = f_ν(D*)` at `f_ν(z)`, `z ∈ D*`.
    pub fn exterior_density(&self, z: Complex64) -> Result<f64> {
        let d = self.f_nu.jet(z)?.dz.norm();
        Ok(2.0 / ((z.norm_sqr() - 1.0) * d))
    }

    /// `|ζ - j(ζ)|² |j_z̄(ζ)| ρ_{Ω*}(j(ζ))²` at `ζ = f_ν(z)`, `z ∈ D`.
    pub fn eq3_ratio(&self, z: Complex64) -> Result<f64> {
        let zeta = self.f_nu.eval(z)?;
        let image = self.f_nu.eval(star(z))?;
        let (_, jzbar) = self.partials(zeta)?;
        let rho = self.exterior_density(star(z))?;
        Ok((zeta - image).norm_sqr() * jzbar.norm() * rho * rho)
    }
}

/// Reflection for `ν` on `D`, using the exact map when `ν` is a constant disk coefficient.
pub fn reflection(nu: &BeltramiCoefficient) -> Result<ReflectionMap> {
    reflection_with(nu, &SolverOptions::default())
}

pub fn reflection_with(nu: &BeltramiCoefficient, opts: &SolverOptions) -> Result<ReflectionMap> {
    if nu.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit disk",
            found: nu.domain(),
        });
    }
    let f_nu = match nu.kind() {
        _ if nu.is_zero() => QuasiconformalMap::identity(DomainTag::Plane),
        CoefficientKind::ConstantDisk { k, r } => {
            QuasiconformalMap::constant_disk(Complex64::new(k[0], k[1]), *r)?
        }
        _ => solve_plane_with(&nu.on_plane(), opts)?,
    };
    let mut map = ReflectionMap {
        base_nu: nu.clone(),
        f_nu,
        eq3_constant: 0.0,
        curve_defect: 0.0,
    };
    let mut c: f64 = 0.0;
    for &r in &SAMPLE_RADII {
        for k in 0..32 {
            let z = Complex64::from_polar(r, TAU * (k as f64 + 0.5) / 32.0);
            c = c.max(map.eq3_ratio(z)?);
        }
    }
    let mut defect: f64 = 0.0;
    for k in 0..64 {
        let zeta = map
            .f_nu
            .eval(Complex64::from_polar(1.0, TAU * k as f64 / 64.0))?;
        defect = defect.max((map.j(zeta)? - zeta).norm());
    }
    map.eq3_constant = c;
    map.curve_defect = defect;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_reflection_is_inversion_in_the_circle() {
        let j = reflection(&BeltramiCoefficient::zero(DomainTag::UnitDisk)).unwrap();
        assert!((j.j(c(0.5, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        for zeta in [c(0.3, 0.4), c(-0.7, 0.1), c(1.5, -2.0)] {
            let back = j.j(j.j(zeta).unwrap()).unwrap();
            assert!((back - zeta).norm() < 1e-12);
            assert!((j.j(zeta).unwrap() - star(zeta)).norm() < 1e-12);
        }
        assert!(j.curve_defect < 1e-12);
        // (1-r²)²/r² · 1/r² · 4r⁴/(1-r²)² = 4 at every point.
        assert!((j.eq3_constant - 4.0).abs() < 1e-6, "{}", j.eq3_constant);
    }

    #[test]
    fn partials_of_the_inversion() {
        let j = reflection(&BeltramiCoefficient::zero(DomainTag::UnitDisk)).unwrap();
        let zeta = c(0.4, 0.3);
        let (jz, jzbar) = j.partials(zeta).unwrap();
        assert!(jz.norm() < 1e-8);
        assert!((jzbar + 1.0 / (zeta.conj() * zeta.conj())).norm() < 1e-8);
    }

    #[test]
    fn constant_disk_reflection_fixes_the_curve() {
        let nu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let j = reflection(&nu).unwrap();
        assert!(j.curve_defect < 1e-3, "{}", j.curve_defect);
        assert!(j.eq3_constant.is_finite() && j.eq3_constant > 0.0);
        let zeta = j.f_nu.eval(c(0.2, 0.1)).unwrap();
        let back = j.j(j.j(zeta).unwrap()).unwrap();
        assert!((back - zeta).norm() < 1e-8);
    }
}
