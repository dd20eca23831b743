use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::embedding::{bers_map_with, BersOptions};
use super::section::ahlfors_weill;
use crate::domains::{hyperbolic_density, BeltramiCoefficient, DomainTag};
use crate::error::{Error, Result};
use crate::solver::{chain_rule, compose, solve_disk_with, QuasiconformalMap};

/// Largest radius at which distortion is sampled.
pub const DISTORTION_RADIUS: f64 = 0.995;

/// Default step bound of the interpolation `μ_k = kμ/n`.
pub const DEFAULT_DELTA: f64 = 0.3;

/// Cap on the number of steps.
pub const MAX_STEPS: usize = 1000;

/// Directions per sample point.
const DIRECTIONS: usize = 16;

/// `(L_min, L_max)` of `ρ(f(z)) |df_z(e^{iθ})| / ρ(z)` over `points`.
pub fn hyperbolic_distortion_at(f: &QuasiconformalMap, points: &[Complex64]) -> Result<(f64, f64)> {
    if f.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit disk",
            found: f.domain(),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &z in points {
        if z.norm() > DISTORTION_RADIUS + 1e-12 {
            return Err(Error::Invalid(format!(
                "sample {z} is closer to the circle than |z| = {DISTORTION_RADIUS}"
            )));
        }
        let j = f.jet(z)?;
        if !(j.jacobian() > 0.0) {
            return Err(Error::NonPositiveJacobian {
                z,
                jacobian: j.jacobian(),
            });
        }
        let scale = hyperbolic_density(DomainTag::UnitDisk, j.value)?
            / hyperbolic_density(DomainTag::UnitDisk, z)?;
        for k in 0..DIRECTIONS {
            let e = Complex64::from_polar(1.0, PI * k as f64 / DIRECTIONS as f64);
            let d = (j.dz * e + j.dzbar * e.conj()).norm() * scale;
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    Ok((lo, hi))
}

/// Polar sample set `r = 0.995 i/24`, 32 angles per circle.
pub fn distortion_samples() -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=24 {
        let r = DISTORTION_RADIUS * i as f64 / 24.0;
        for k in 0..32 {
            pts.push(Complex64::from_polar(
                r,
                TAU * (k as f64 + 0.5 * (i % 2) as f64) / 32.0,
            ));
        }
    }
    pts
}

/// Hyperbolic bi-Lipschitz constants of a self-map of the disk.
pub fn hyperbolic_distortion(f: &QuasiconformalMap) -> Result<(f64, f64)> {
    hyperbolic_distortion_at(f, &distortion_samples())
}

/// `‖μ_{k+1} ∗ μ_k⁻¹‖_∞` for `μ_k = kμ/n`, attained where `|μ| = ‖μ‖_∞`.
fn step_norm(sup: f64, n: usize, k: usize) -> f64 {
    let (a, b) = (sup * k as f64 / n as f64, sup * (k + 1) as f64 / n as f64);
    (b - a) / (1.0 - a * b)
}

/// Number of interpolation steps for a coefficient of sup norm `sup`.
///
/// A single step suffices when `‖μ‖_∞ < 1/3`; otherwise the smallest `n`
/// with every step below `δ` and `‖μ/n‖_∞ < 1/3`.
pub fn step_count(sup: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0 / 3.0) {
        return Err(Error::InvalidDelta(delta));
    }
    if sup < 1.0 / 3.0 {
        return Ok(1);
    }
    for n in 2..=MAX_STEPS {
        let ok = sup / (n as f64) < 1.0 / 3.0 && (1..n).all(|k| step_norm(sup, n, k) < delta);
        if ok {
            return Ok(n);
        }
    }
    Err(Error::TooManySteps(MAX_STEPS + 1))
}

/// A representative of `[μ]` with a hyperbolically bi-Lipschitz disk map.
#[derive(Debug, Clone)]
pub struct BilipschitzRepresentative {
    pub nu: BeltramiCoefficient,
    pub map: QuasiconformalMap,
    pub steps: usize,
    pub distortion: (f64, f64),
}

pub fn bilipschitz_representative(
    mu: &BeltramiCoefficient,
    delta: f64,
) -> Result<BilipschitzRepresentative> {
    bilipschitz_representative_with(mu, delta, &BersOptions::default())
}

/// `ν₁ = σ(Φ(μ₁))`, then `ν_{k+1}` is the dilatation of
/// `f^{σ(Φ(μ_{k+1} ∗ ν_k⁻¹))} ∘ f^{ν_k}`.
pub fn bilipschitz_representative_with(
    mu: &BeltramiCoefficient,
    delta: f64,
    opts: &BersOptions,
) -> Result<BilipschitzRepresentative> {
    if mu.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit disk",
            found: mu.domain(),
        });
    }
    let n = step_count(mu.sup_norm(), delta)?;
    if mu.is_zero() {
        let map = QuasiconformalMap::identity(DomainTag::UnitDisk);
        return Ok(BilipschitzRepresentative {
            nu: mu.clone(),
            map,
            steps: 1,
            distortion: (1.0, 1.0),
        });
    }
    let step = |k: usize| mu.scaled(Complex64::new(k as f64 / n as f64, 0.0));
    let first = bers_map_with(&step(1)?, 2.0, opts)?;
    let mut nu = ahlfors_weill(&first.bers_image)?;
    let mut map = solve_disk_with(&nu, &opts.solver)?;
    for k in 1..n {
        let target = step(k + 1)?;
        let quotient = chain_rule(&target, &nu, &map)?;
        let image = bers_map_with(&quotient, 2.0, opts)?;
        let sigma = ahlfors_weill(&image.bers_image)?;
        let g = solve_disk_with(&sigma, &opts.solver)?;
        map = compose(&g, &map)?;
        nu = map.source_mu().clone();
    }
    let distortion = hyperbolic_distortion(&map)?;
    Ok(BilipschitzRepresentative {
        nu,
        map,
        steps: n,
        distortion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Mobius;
    use crate::solver::Normalization;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_an_isometry() {
        let (lo, hi) =
            hyperbolic_distortion(&QuasiconformalMap::identity(DomainTag::UnitDisk)).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_automorphism_is_an_isometry() {
        let a = c(0.3, -0.4);
        let rot = Complex64::from_polar(1.0, 0.7);
        let m = Mobius::new(rot, -rot * a, -a.conj(), c(1.0, 0.0));
        let f = QuasiconformalMap::identity(DomainTag::UnitDisk).with_post(
            m,
            Normalization::FixThreeBoundaryPoints,
            DomainTag::UnitDisk,
        );
        let (lo, hi) = hyperbolic_distortion(&f).unwrap();
        assert!(
            (lo - 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6,
            "{lo} {hi}"
        );
    }

    #[test]
    fn rejects_samples_near_the_circle() {
        let f = QuasiconformalMap::identity(DomainTag::UnitDisk);
        assert!(hyperbolic_distortion_at(&f, &[c(0.999, 0.0)]).is_err());
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(0.0, 0.3).unwrap(), 1);
        assert_eq!(step_count(0.1, 0.3).unwrap(), 1);
        assert_eq!(step_count(0.3333, 0.3).unwrap(), 1);
        assert!(step_count(1.0 / 3.0, 0.3).unwrap() >= 2);
        // n = 2 gives 0.3/(1 - 0.18) > 0.3; n = 3 gives 0.2/(1 - 0.24) < 0.3.
        assert_eq!(step_count(0.6, 0.3).unwrap(), 3);
        assert!(matches!(step_count(0.5, 0.5), Err(Error::InvalidDelta(_))));
        assert!(matches!(
            step_count(0.99999999, 1e-4),
            Err(Error::TooManySteps(_))
        ));
    }

    #[test]
    fn zero_coefficient_is_its_own_representative() {
        let r = bilipschitz_representative(
            &BeltramiCoefficient::zero(DomainTag::UnitDisk),
            DEFAULT_DELTA,
        )
        .unwrap();
        assert!(r.nu.is_zero());
        assert_eq!(r.steps, 1);
    }

    #[test]
    fn small_coefficient_takes_one_section_step() {
        let o = BersOptions::with_grid(256, 4.0).unwrap();
        let mu = BeltramiCoefficient::constant_disk(c(0.1, 0.0), 0.5).unwrap();
        let r = bilipschitz_representative_with(&mu, DEFAULT_DELTA, &o).unwrap();
        assert_eq!(r.steps, 1);
        let phi = bers_map_with(&mu, 2.0, &o).unwrap();
        let aw = ahlfors_weill(&phi.bers_image).unwrap();
        for z in [c(0.2, 0.1), c(-0.6, 0.5)] {
            assert_eq!(r.nu.eval(z), aw.eval(z));
        }
        let (lo, hi) = r.distortion;
        assert!(lo > 0.0 && hi.is_finite() && hi / lo <= 2.0, "{lo} {hi}");
    }

    #[test]
    fn large_coefficient_needs_several_steps() {
        let o = BersOptions::with_grid(256, 4.0).unwrap();
        let mu = BeltramiCoefficient::constant_disk(c(0.6, 0.0), 0.5).unwrap();
        let r = bilipschitz_representative_with(&mu, DEFAULT_DELTA, &o).unwrap();
        assert_eq!(r.steps, 3);
        let (lo, hi) = r.distortion;
        assert!(lo > 0.0 && hi.is_finite(), "{lo} {hi}");
        let (same, d) = crate::bers::equivalent_with(&r.nu, &mu, 1e-2, &o).unwrap();
        assert!(same, "{d}");
    }
}
