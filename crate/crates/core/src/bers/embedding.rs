use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::laurent::{laurent_coefficients, Circle};
use super::schwarzian::schwarzian;
use crate::domains::{
    ainf_norm, ap_norm, BeltramiCoefficient, DomainTag, HolomorphicFunction, LaurentSeries,
    NormReport,
};
use crate::error::{Error, Result};
use crate::solver::{solve_plane_with, QuasiconformalMap, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BersOptions {
    pub solver: SolverOptions,
    /// Radii of the circles on which Laurent data are fitted and compared.
    pub circles: Vec<f64>,
    /// Most negative Laurent order kept in the fits.
    pub max_negative_order: i32,
    /// Largest tolerated weighted disagreement between circles.
    pub consistency_tol: f64,
    /// Points per circle when comparing Bers images.
    pub probe_points: usize,
}

impl Default for BersOptions {
    fn default() -> Self {
        BersOptions {
            solver: SolverOptions::default(),
            circles: vec![1.5, 2.0, 3.0],
            max_negative_order: 127,
            consistency_tol: 1e-3,
            probe_points: 64,
        }
    }
}

impl BersOptions {
    pub fn with_grid(n: usize, half_width: f64) -> Result<Self> {
        Ok(BersOptions {
            solver: SolverOptions::with_grid(n, half_width)?,
            ..Default::default()
        })
    }
}

/// Default tolerance of [`equivalent`].
pub const EQUIVALENCE_TOL: f64 = 1e-2;

/// A Teichmüller class, represented by its Bers image on the exterior disk.
#[derive(Debug, Clone)]
pub struct TeichmullerPoint {
    pub bers_image: HolomorphicFunction,
    pub p: f64,
    pub ap_norm_report: NormReport,
    pub ainf_norm_report: NormReport,
    pub circles_checked: Vec<f64>,
    /// Largest weighted disagreement between the per-circle Schwarzians.
    pub consistency: f64,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    p: f64,
    laurent: Vec<(i32, f64, f64)>,
    ainf: NormReport,
    ap: NormReport,
    circles_checked: Vec<f64>,
}

impl TeichmullerPoint {
    fn from_image(
        bers_image: HolomorphicFunction,
        p: f64,
        circles: Vec<f64>,
        consistency: f64,
    ) -> Result<Self> {
        let ainf = ainf_norm(&bers_image)?;
        let ap = ap_norm(&bers_image, p)?;
        Ok(TeichmullerPoint {
            bers_image,
            p,
            ap_norm_report: ap,
            ainf_norm_report: ainf,
            circles_checked: circles,
            consistency,
        })
    }

    /// Sup of `|Φ₁ - Φ₂|` over `probe` points on each circle.
    pub fn distance_on(&self, other: &TeichmullerPoint, circles: &[f64], probe: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for &r in circles {
            for k in 0..probe {
                let z = Complex64::from_polar(r, TAU * (k as f64 + 0.5) / probe as f64);
                worst = worst.max((self.bers_image.eval(z) - other.bers_image.eval(z)).norm());
            }
        }
        worst
    }

    pub fn distance(&self, other: &TeichmullerPoint) -> f64 {
        let o = BersOptions::default();
        self.distance_on(other, &o.circles, o.probe_points)
    }

    /// Equality of classes up to `tol` in the sup metric on the test circles.
    pub fn approx_eq(&self, other: &TeichmullerPoint, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn to_json(&self) -> serde_json::Value {
        let laurent = match self.bers_image.series() {
            Some(s) => (s.min_order..=s.max_order())
                .filter_map(|n| {
                    let c = s.coefficient(n);
                    (c.norm() > 0.0).then_some((n, c.re, c.im))
                })
                .collect(),
            None => Vec::new(),
        };
        serde_json::to_value(PointJson {
            p: self.p,
            laurent,
            ainf: self.ainf_norm_report.clone(),
            ap: self.ap_norm_report.clone(),
            circles_checked: self.circles_checked.clone(),
        })
        .expect("point serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: PointJson = serde_json::from_value(v.clone())?;
        let bers_image = image_from_terms(&j.laurent);
        Ok(TeichmullerPoint {
            bers_image,
            p: j.p,
            ap_norm_report: j.ap,
            ainf_norm_report: j.ainf,
            circles_checked: j.circles_checked,
            consistency: 0.0,
        })
    }
}

fn image_from_terms(terms: &[(i32, f64, f64)]) -> HolomorphicFunction {
    if terms.is_empty() {
        return HolomorphicFunction::zero(DomainTag::ExteriorDisk);
    }
    let lo = terms.iter().map(|t| t.0).min().unwrap();
    let hi = terms.iter().map(|t| t.0).max().unwrap();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for &(n, re, im) in terms {
        coeffs[(n - lo) as usize] = Complex64::new(re, im);
    }
    HolomorphicFunction::from_series(
        LaurentSeries::new(Complex64::new(0.0, 0.0), lo, coeffs, 1.0, f64::INFINITY),
        DomainTag::ExteriorDisk,
    )
}

/// `max_{|z|=r} (|z|²-1)² |a(z) - b(z)|`.
fn weighted_gap(a: &HolomorphicFunction, b: &HolomorphicFunction, r: f64, probe: usize) -> f64 {
    let w = (r * r - 1.0).powi(2);
    (0..probe)
        .map(|k| {
            let z = Complex64::from_polar(r, TAU * (k as f64 + 0.5) / probe as f64);
            w * (a.eval(z) - b.eval(z)).norm()
        })
        .fold(0.0, f64::max)
}

/// Schwarzian of `f|_{D*}` from Laurent fits on each circle, with the largest
/// weighted disagreement between fits.
pub fn exterior_schwarzian(
    f: &QuasiconformalMap,
    opts: &BersOptions,
) -> Result<(HolomorphicFunction, f64)> {
    if opts.circles.is_empty() {
        return Err(Error::Invalid("no Laurent circles".into()));
    }
    let mut fits = Vec::with_capacity(opts.circles.len());
    for &r in &opts.circles {
        let fit = laurent_coefficients(f, Circle::centered(r), -opts.max_negative_order..=1)?;
        fits.push((r, schwarzian(&fit.function)?));
    }
    let mut gap: f64 = 0.0;
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            let r = fits[i].0.max(fits[j].0);
            gap = gap.max(weighted_gap(&fits[i].1, &fits[j].1, r, opts.probe_points));
        }
    }
    let (_, image) = fits.swap_remove(0);
    let image = match image {
        HolomorphicFunction::Series { series, .. } => {
            HolomorphicFunction::from_series(series, DomainTag::ExteriorDisk)
        }
        other => other,
    };
    Ok((image, gap))
}

/// `Φ(μ)`: Schwarzian of the conformal part on `D*` of the plane solution
/// for `μ` on `D` and zero outside.
pub fn bers_map(mu: &BeltramiCoefficient, p: f64) -> Result<TeichmullerPoint> {
    bers_map_with(mu, p, &BersOptions::default())
}

pub fn bers_map_with(
    mu: &BeltramiCoefficient,
    p: f64,
    opts: &BersOptions,
) -> Result<TeichmullerPoint> {
    if mu.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit disk",
            found: mu.domain(),
        });
    }
    if mu.is_zero() {
        return TeichmullerPoint::from_image(
            HolomorphicFunction::zero(DomainTag::ExteriorDisk),
            p,
            opts.circles.clone(),
            0.0,
        );
    }
    let f = solve_plane_with(&mu.on_plane(), &opts.solver)?;
    let (image, gap) = exterior_schwarzian(&f, opts)?;
    if gap > opts.consistency_tol {
        return Err(Error::InconsistentLaurent(gap));
    }
    TeichmullerPoint::from_image(image, p, opts.circles.clone(), gap)
}

/// Whether `μ₁` and `μ₂` have the same Bers image up to `tol`, and the distance.
pub fn equivalent(
    mu1: &BeltramiCoefficient,
    mu2: &BeltramiCoefficient,
    tol: f64,
) -> Result<(bool, f64)> {
    equivalent_with(mu1, mu2, tol, &BersOptions::default())
}

pub fn equivalent_with(
    mu1: &BeltramiCoefficient,
    mu2: &BeltramiCoefficient,
    tol: f64,
    opts: &BersOptions,
) -> Result<(bool, f64)> {
    let a = bers_map_with(mu1, 2.0, opts)?;
    let b = bers_map_with(mu2, 2.0, opts)?;
    let d = a.distance_on(&b, &opts.circles, opts.probe_points);
    Ok((d <= tol, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Normalization;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn closed(k: f64, r: f64, z: Complex64) -> Complex64 {
        let q = k * r * r;
        -6.0 * q / (z * z - q).powi(2)
    }

    fn opts(n: usize) -> BersOptions {
        BersOptions::with_grid(n, 4.0).unwrap()
    }

    #[test]
    fn zero_coefficient_has_zero_image() {
        let t = bers_map(&BeltramiCoefficient::zero(DomainTag::UnitDisk), 2.0).unwrap();
        assert_eq!(t.bers_image.eval(c(2.0, 0.0)), c(0.0, 0.0));
        assert_eq!(t.ap_norm_report.value, 0.0);
    }

    #[test]
    fn constant_disk_image_matches_closed_form() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let t = bers_map_with(&mu, 2.0, &opts(512)).unwrap();
        let v = t.bers_image.eval(c(2.0, 0.0));
        assert!((v.re + 0.0292101).abs() < 3e-4, "{v}");
        for k in 0..16 {
            let z = Complex64::from_polar(2.0, TAU * k as f64 / 16.0);
            let e = closed(0.3, 0.5, z);
            assert!((t.bers_image.eval(z) - e).norm() / e.norm() < 1e-2);
        }
        assert!(t.consistency < 1e-3);
        assert!(t.ainf_norm_report.is_finite());
    }

    #[test]
    fn closed_form_map_gives_the_same_image() {
        // The exact exterior map z + 0.075/z, with no solver error.
        let f = QuasiconformalMap::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let (image, gap) = exterior_schwarzian(&f, &BersOptions::default()).unwrap();
        assert!(gap < 1e-10);
        for z in [c(2.0, 0.0), c(0.0, 1.5), c(-2.0, 2.0)] {
            assert!((image.eval(z) - closed(0.3, 0.5, z)).norm() < 1e-10);
        }
    }

    #[test]
    fn image_ignores_post_composed_mobius() {
        let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.1), 0.5).unwrap();
        let o = opts(256);
        let f = solve_plane_with(&mu.on_plane(), &o.solver).unwrap();
        let (a, _) = exterior_schwarzian(&f, &o).unwrap();
        // Pole at f(0), inside the image of the disk, so the composite stays
        // holomorphic on the exterior.
        let f0 = f.eval(c(0.0, 0.0)).unwrap();
        let m = crate::domains::Mobius::new(c(1.0, 0.5), c(0.2, 0.0), c(1.0, 0.0), -f0);
        let g = f.with_post(
            m.compose(&f.post()),
            Normalization::FixZeroOneInfinity,
            DomainTag::Plane,
        );
        let (b, _) = exterior_schwarzian(&g, &o).unwrap();
        for k in 0..16 {
            let z = Complex64::from_polar(2.0, TAU * k as f64 / 16.0);
            assert!(
                (a.eval(z) - b.eval(z)).norm() < 1e-6,
                "{}",
                (a.eval(z) - b.eval(z)).norm()
            );
        }
    }

    #[test]
    fn distinct_disk_coefficients_are_not_equivalent() {
        let o = opts(256);
        let m1 = BeltramiCoefficient::constant_disk(c(0.1, 0.0), 0.5).unwrap();
        let m2 = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5).unwrap();
        let (same, d) = equivalent_with(&m1, &m2, EQUIVALENCE_TOL, &o).unwrap();
        let at_two = (closed(0.1, 0.5, c(2.0, 0.0)) - closed(0.2, 0.5, c(2.0, 0.0))).norm();
        assert!(!same);
        assert!(d >= 0.9 * at_two, "{d} vs {at_two}");
        let (same, d) = equivalent_with(&m1, &m1, EQUIVALENCE_TOL, &o).unwrap();
        assert!(same && d == 0.0);
    }

    #[test]
    fn json_roundtrip() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let t = bers_map_with(&mu, 2.0, &opts(256)).unwrap();
        let v = t.to_json();
        for key in ["p", "laurent", "ainf", "ap", "circles_checked"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back = TeichmullerPoint::from_json(&v).unwrap();
        assert!(back.distance(&t) < 1e-14);
    }

    #[test]
    fn rejects_plane_coefficients() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5)
            .unwrap()
            .on_plane();
        assert!(matches!(
            bers_map(&mu, 2.0),
            Err(Error::DomainMismatch { .. })
        ));
    }
}
