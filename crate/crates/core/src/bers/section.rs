use std::f64::consts::TAU;

use num_complex::Complex64;

use super::embedding::{bers_map_with, BersOptions, TeichmullerPoint};
use crate::domains::{
    ainf_norm, BeltramiCoefficient, CoefficientKind, DomainTag, HolomorphicFunction, LaurentSeries,
    Support,
};
use crate::error::{Error, Result};
use crate::solver::{compose, solve_disk_with, QuasiconformalMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `A_∞` norm accepted by [`ahlfors_weill`].
pub const SECTION_NORM_LIMIT: f64 = 2.0;

/// `w ↦ w^{-4} φ(1/w)` for `φ = O(z^{-4})` at infinity, as a closure on `|w| < 1`.
fn inverted(phi: &HolomorphicFunction) -> Box<dyn Fn(Complex64) -> Complex64 + Send + Sync> {
    if let Some(s) = phi.series() {
        if s.center == ZERO && s.max_order() <= -4 {
            let coeffs: Vec<Complex64> =
                (s.min_order..=-4).rev().map(|n| s.coefficient(n)).collect();
            return Box::new(move |w| coeffs.iter().rev().fold(ZERO, |acc, c| acc * w + c));
        }
    }
    let phi = phi.clone();
    Box::new(move |w| {
        // Far point standing in for the limit at infinity.
        let w = if w.norm() < 1e-6 {
            Complex64::new(1e-6, 0.0)
        } else {
            w
        };
        phi.eval(1.0 / w) / w.powi(4)
    })
}

/// `σ(φ)(z*) = -½ (z z*)² (1 - |z|²)² φ(z)` with `z* = 1/z̄`.
///
/// In the variable `ζ = z* ∈ D` this is `-½ (1 - |ζ|²)² ψ(ζ̄)` with
/// `ψ(w) = w^{-4} φ(1/w)`.
pub fn ahlfors_weill(phi: &HolomorphicFunction) -> Result<BeltramiCoefficient> {
    if phi.domain() != DomainTag::ExteriorDisk {
        return Err(Error::DomainMismatch {
            expected: "exterior disk",
            found: phi.domain(),
        });
    }
    let norm = ainf_norm(phi)?;
    if !norm.is_finite() || norm.value >= SECTION_NORM_LIMIT {
        return Err(Error::SectionNormTooLarge(norm.value));
    }
    if norm.value == 0.0 {
        return Ok(BeltramiCoefficient::zero(DomainTag::UnitDisk));
    }
    let psi = inverted(phi);
    BeltramiCoefficient::from_fn(
        DomainTag::UnitDisk,
        Support::Radius(1.0),
        0.5 * norm.value,
        CoefficientKind::Derived {
            description: "Ahlfors-Weill section".into(),
        },
        move |zeta| {
            let t = 1.0 - zeta.norm_sqr();
            -0.5 * t * t * psi(zeta.conj())
        },
    )
}

/// `a + s b` for series about the same centre.
pub(crate) fn add_scaled(
    a: &HolomorphicFunction,
    b: &HolomorphicFunction,
    s: f64,
) -> Result<HolomorphicFunction> {
    let (Some(x), Some(y)) = (a.series(), b.series()) else {
        return Err(Error::UnsupportedRepresentation(
            "sum of non-series functions",
        ));
    };
    if x.center != y.center {
        return Err(Error::UnsupportedRepresentation(
            "sum of series with different centres",
        ));
    }
    let lo = x.min_order.min(y.min_order);
    let hi = x.max_order().max(y.max_order());
    let coeffs = (lo..=hi)
        .map(|n| x.coefficient(n) + s * y.coefficient(n))
        .collect();
    let series = LaurentSeries::new(
        x.center,
        lo,
        coeffs,
        x.inner_radius.max(y.inner_radius),
        x.outer_radius.min(y.outer_radius),
    );
    Ok(HolomorphicFunction::from_series(series, a.domain()))
}

/// Base point of a local section: a coefficient, its disk map and its Bers image.
#[derive(Debug, Clone)]
pub struct SectionBase {
    pub nu: BeltramiCoefficient,
    pub map: QuasiconformalMap,
    pub psi: TeichmullerPoint,
}

impl SectionBase {
    pub fn new(nu: BeltramiCoefficient, opts: &BersOptions) -> Result<Self> {
        let map = solve_disk_with(&nu, &opts.solver)?;
        let psi = bers_map_with(&nu, 2.0, opts)?;
        Ok(SectionBase { nu, map, psi })
    }
}

/// Result of [`local_section`].
#[derive(Debug, Clone)]
pub struct SectionValue {
    pub nu_phi: BeltramiCoefficient,
    pub map: QuasiconformalMap,
    /// Sup of `|Φ(ν_φ) - ψ - φ|` on the test circles.
    pub defect: f64,
    /// Correction steps applied to the datum pulled back to the base.
    pub corrections: usize,
}

/// Correction steps of the datum on the base chart.
const MAX_CORRECTIONS: usize = 3;

fn sup_on_circles(f: &dyn Fn(Complex64) -> Complex64, opts: &BersOptions) -> f64 {
    let mut worst: f64 = 0.0;
    for &r in &opts.circles {
        for k in 0..opts.probe_points {
            let z = Complex64::from_polar(r, TAU * (k as f64 + 0.5) / opts.probe_points as f64);
            worst = worst.max(f(z).norm());
        }
    }
    worst
}

/// Translated section near `ψ = Φ(ν)`: `ν_φ` is the dilatation of
/// `f^{σ(φ̃)} ∘ f^ν`, with the datum `φ̃` corrected until `Φ(ν_φ) ≈ ψ + φ`.
///
/// `tol` bounds the accepted defect on the test circles; the first guess is
/// `φ̃ = φ` and each correction adds the remaining defect.
pub fn local_section(
    base: &SectionBase,
    phi: &HolomorphicFunction,
    epsilon: f64,
    tol: f64,
    opts: &BersOptions,
) -> Result<SectionValue> {
    let size = ainf_norm(phi)?;
    if !size.is_finite() || size.value >= epsilon {
        return Err(Error::SectionInputTooLarge(format!(
            "A_inf norm {} is not below {epsilon}",
            size.value
        )));
    }
    if size.value == 0.0 {
        return Ok(SectionValue {
            nu_phi: base.nu.clone(),
            map: base.map.clone(),
            defect: 0.0,
            corrections: 0,
        });
    }
    let target = add_scaled(&base.psi.bers_image, phi, 1.0)?;
    if base.nu.is_zero() {
        let nu_phi = ahlfors_weill(phi)?;
        let map = solve_disk_with(&nu_phi, &opts.solver)?;
        let image = bers_map_with(&nu_phi, 2.0, opts)?;
        let defect = sup_on_circles(&|z| image.bers_image.eval(z) - target.eval(z), opts);
        return Ok(SectionValue {
            nu_phi,
            map,
            defect,
            corrections: 0,
        });
    }
    let mut datum = phi.clone();
    let mut corrections = 0;
    loop {
        let sigma = ahlfors_weill(&datum)?;
        let g = solve_disk_with(&sigma, &opts.solver)?;
        let map = compose(&g, &base.map)?;
        let nu_phi = map.source_mu().clone();
        let image = bers_map_with(&nu_phi, 2.0, opts)?;
        let diff = add_scaled(&target, &image.bers_image, -1.0)?;
        let defect = sup_on_circles(&|z| diff.eval(z), opts);
        if defect <= tol || corrections == MAX_CORRECTIONS {
            if defect > tol {
                return Err(Error::SectionInputTooLarge(format!(
                    "defect {defect:e} after {corrections} corrections"
                )));
            }
            return Ok(SectionValue {
                nu_phi,
                map,
                defect,
                corrections,
            });
        }
        datum = add_scaled(&datum, &diff, 1.0)?;
        corrections += 1;
    }
}
