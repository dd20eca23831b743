use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    BeltramiCoefficient, CoefficientKind, DomainTag, HolomorphicFunction, Mobius, Support,
};
use crate::boundary::BoundaryFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CayleyDirection {
    DiskToHalfPlane,
    HalfPlaneToDisk,
}

impl CayleyDirection {
    pub fn source(self) -> DomainTag {
        match self {
            CayleyDirection::DiskToHalfPlane => DomainTag::UnitDisk,
            CayleyDirection::HalfPlaneToDisk => DomainTag::UpperHalfPlane,
        }
    }

    pub fn target(self) -> DomainTag {
        match self {
            CayleyDirection::DiskToHalfPlane => DomainTag::UpperHalfPlane,
            CayleyDirection::HalfPlaneToDisk => DomainTag::UnitDisk,
        }
    }

    /// The Möbius map realizing this direction.
    pub fn mobius(self) -> Mobius {
        match self {
            CayleyDirection::DiskToHalfPlane => Mobius::cayley(),
            CayleyDirection::HalfPlaneToDisk => Mobius::cayley().inverse(),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            CayleyDirection::DiskToHalfPlane => CayleyDirection::HalfPlaneToDisk,
            CayleyDirection::HalfPlaneToDisk => CayleyDirection::DiskToHalfPlane,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CayleyObject {
    Point(Complex64),
    Holomorphic(HolomorphicFunction),
    Beltrami(BeltramiCoefficient),
    Boundary(BoundaryFunction),
}

const SINGULAR_TOL: f64 = 1e-14;

/// `H(z) = -i (z + 1)/(z - 1)` or its inverse `(ζ - i)/(ζ + i)`.
pub fn cayley_point(z: Complex64, direction: CayleyDirection) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(Error::CayleySingularity(z));
    }
    let pole = match direction {
        CayleyDirection::DiskToHalfPlane => Complex64::new(1.0, 0.0),
        CayleyDirection::HalfPlaneToDisk => Complex64::new(0.0, -1.0),
    };
    if (z - pole).norm() < SINGULAR_TOL {
        return Err(Error::CayleySingularity(z));
    }
    Ok(direction.mobius().apply(z))
}

/// Transports `obj` between the disk and half-plane models.
///
/// Functions are pushed forward (`φ ∘ H⁻¹`), Beltrami coefficients are
/// transformed so that they are the dilatation of the conjugated map
/// `H ∘ f ∘ H⁻¹`.
pub fn cayley(obj: CayleyObject, direction: CayleyDirection) -> Result<CayleyObject> {
    match obj {
        CayleyObject::Point(z) => cayley_point(z, direction).map(CayleyObject::Point),
        CayleyObject::Holomorphic(phi) => {
            expect_domain(phi.domain(), direction)?;
            let back = direction.reversed().mobius();
            Ok(CayleyObject::Holomorphic(
                phi.pullback(back, direction.target()),
            ))
        }
        CayleyObject::Beltrami(mu) => {
            transport_coefficient(&mu, direction).map(CayleyObject::Beltrami)
        }
        CayleyObject::Boundary(u) => {
            crate::boundary::cayley_boundary(&u, direction).map(CayleyObject::Boundary)
        }
    }
}

fn expect_domain(found: DomainTag, direction: CayleyDirection) -> Result<()> {
    if found != direction.source() {
        return Err(Error::DomainMismatch {
            expected: match direction {
                CayleyDirection::DiskToHalfPlane => "unit_disk",
                CayleyDirection::HalfPlaneToDisk => "upper_half_plane",
            },
            found,
        });
    }
    Ok(())
}

/// `ν(ζ) = μ(φ(ζ)) conj(φ'(ζ)) / φ'(ζ)` with `φ` the inverse transport map.
///
/// Radial breaks keep their disk-chart meaning in both models.
pub fn transport_coefficient(
    mu: &BeltramiCoefficient,
    direction: CayleyDirection,
) -> Result<BeltramiCoefficient> {
    expect_domain(mu.domain(), direction)?;
    if mu.is_zero() {
        return Ok(BeltramiCoefficient::zero(direction.target()));
    }
    let back = direction.reversed().mobius();
    let support = match (direction, mu.support()) {
        (CayleyDirection::DiskToHalfPlane, Support::Radius(r)) if r < 1.0 => {
            Support::Radius((1.0 + r) / (1.0 - r))
        }
        _ => Support::Full,
    };
    let inner = mu.clone();
    let out = BeltramiCoefficient::from_fn(
        direction.target(),
        support,
        mu.sup_norm(),
        CoefficientKind::Derived {
            description: format!("cayley {direction:?}"),
        },
        move |z| {
            let w = back.apply(z);
            let d = back.derivatives(z)[0];
            inner.eval(w) * d.conj() / d
        },
    )?;
    Ok(out.with_breaks(mu.radial_breaks().to_vec(), mu.is_discontinuous()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        let d2u = CayleyDirection::DiskToHalfPlane;
        let i = Complex64::i();
        assert!((cayley_point(Complex64::new(0.0, 0.0), d2u).unwrap() - i).norm() < 1e-15);
        assert!(cayley_point(Complex64::new(-1.0, 0.0), d2u).unwrap().norm() < 1e-15);
        assert!((cayley_point(-i, d2u).unwrap() - 1.0).norm() < 1e-15);
        assert!(matches!(
            cayley_point(Complex64::new(1.0, 0.0), d2u),
            Err(Error::CayleySingularity(_))
        ));
    }

    #[test]
    fn transported_coefficient_keeps_modulus() {
        let mu = BeltramiCoefficient::constant_disk(Complex64::new(0.2, 0.0), 0.5).unwrap();
        let nu = transport_coefficient(&mu, CayleyDirection::DiskToHalfPlane).unwrap();
        assert_eq!(nu.domain(), DomainTag::UpperHalfPlane);
        let zeta = Complex64::new(0.1, 1.2);
        let z = cayley_point(zeta, CayleyDirection::HalfPlaneToDisk).unwrap();
        assert!((nu.eval(zeta).norm() - mu.eval(z).norm()).abs() < 1e-15);
        let back = transport_coefficient(&nu, CayleyDirection::HalfPlaneToDisk).unwrap();
        let z = Complex64::new(0.2, -0.3);
        assert!((back.eval(z) - mu.eval(z)).norm() < 1e-14);
    }

    #[test]
    fn holomorphic_pushforward() {
        let phi = HolomorphicFunction::monomial(1);
        let CayleyObject::Holomorphic(psi) = cayley(
            CayleyObject::Holomorphic(phi),
            CayleyDirection::DiskToHalfPlane,
        )
        .unwrap() else {
            panic!("kind changed");
        };
        let zeta = Complex64::new(0.3, 0.8);
        let expected = (zeta - Complex64::i()) / (zeta + Complex64::i());
        assert!((psi.eval(zeta) - expected).norm() < 1e-15);
        assert_eq!(psi.domain(), DomainTag::UpperHalfPlane);
    }

    proptest! {
        #[test]
        fn involution(r in 0.0f64..0.99, t in 0.0f64..6.28) {
            let z = Complex64::from_polar(r, t);
            let w = cayley_point(z, CayleyDirection::DiskToHalfPlane).unwrap();
            prop_assert!(w.im > 0.0);
            let back = cayley_point(w, CayleyDirection::HalfPlaneToDisk).unwrap();
            prop_assert!((back - z).norm() < 1e-12);
        }
    }
}
