//! Ambient domains, grids, quadrature and the weighted norms used throughout
//! the crate.
//!
//! The hyperbolic density is normalized to curvature -1: `2/(1-|z|^2)` on the
//! unit disk, `2/(|z|^2-1)` on the exterior disk and `1/Im z` on the upper
//! half-plane.

mod beltrami;
mod cayley;
mod grid;
mod holomorphic;
mod mobius;
mod norms;
pub mod quadrature;

pub use beltrami::{BeltramiCoefficient, CoefficientKind, CoefficientSpec, Support};
pub use cayley::{cayley, cayley_point, transport_coefficient, CayleyDirection, CayleyObject};
pub use grid::{ComplexGrid, GridHeader, GridSpec};
pub use holomorphic::{HolomorphicFunction, LaurentSeries};
pub use mobius::Mobius;
pub(crate) use norms::besov_from_derivative;
pub use norms::{
    ainf_norm, analytic_besov_norm, ap_norm, ap_norm_disk, mp_norm, LadderRule, NormReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    UnitDisk,
    ExteriorDisk,
    UpperHalfPlane,
    LowerHalfPlane,
    Plane,
}

impl DomainTag {
    /// Whether `z` lies strictly inside the domain.
    pub fn contains(self, z: Complex64) -> bool {
        match self {
            DomainTag::UnitDisk => z.norm_sqr() < 1.0,
            DomainTag::ExteriorDisk => z.norm_sqr() > 1.0,
            DomainTag::UpperHalfPlane => z.im > 0.0,
            DomainTag::LowerHalfPlane => z.im < 0.0,
            DomainTag::Plane => z.is_finite(),
        }
    }
}

/// Curvature -1 hyperbolic density of `domain` at `z`.
pub fn hyperbolic_density(domain: DomainTag, z: Complex64) -> Result<f64> {
    if domain == DomainTag::Plane {
        return Err(Error::NoHyperbolicDensity(domain));
    }
    if !domain.contains(z) {
        return Err(Error::NotInterior { z, domain });
    }
    Ok(match domain {
        DomainTag::UnitDisk => 2.0 / (1.0 - z.norm_sqr()),
        DomainTag::ExteriorDisk => 2.0 / (z.norm_sqr() - 1.0),
        DomainTag::UpperHalfPlane => 1.0 / z.im,
        DomainTag::LowerHalfPlane => -1.0 / z.im,
        DomainTag::Plane => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_values() {
        assert_eq!(
            hyperbolic_density(DomainTag::UnitDisk, c(0.0, 0.0)).unwrap(),
            2.0
        );
        assert_eq!(
            hyperbolic_density(DomainTag::UpperHalfPlane, c(0.0, 1.0)).unwrap(),
            1.0
        );
        let d = hyperbolic_density(DomainTag::UnitDisk, c(0.9, 0.0)).unwrap();
        assert!((d - 2.0 / 0.19).abs() < 1e-12);
        assert!((d - 10.526315789473685).abs() < 1e-9);
        let e = hyperbolic_density(DomainTag::ExteriorDisk, c(2.0, 0.0)).unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn density_rejects_boundary_and_plane() {
        assert!(hyperbolic_density(DomainTag::UnitDisk, c(1.0, 0.0)).is_err());
        assert!(hyperbolic_density(DomainTag::UnitDisk, c(0.0, 2.0)).is_err());
        assert!(hyperbolic_density(DomainTag::UpperHalfPlane, c(3.0, 0.0)).is_err());
        assert!(matches!(
            hyperbolic_density(DomainTag::Plane, c(0.0, 0.0)),
            Err(Error::NoHyperbolicDensity(_))
        ));
    }
}
