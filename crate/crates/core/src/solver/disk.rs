use std::sync::Arc;

use num_complex::Complex64;

use super::map::{Annulus, Normalization, QuasiconformalMap, Repr, TwoChart};
use super::plane::{solve_plane_with, solve_raw, SolverOptions};
use crate::domains::{BeltramiCoefficient, CoefficientKind, ComplexGrid, DomainTag, Mobius};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest tolerated chordal distance between `f(1/z̄)` and `1/conj(f(z))`
/// on the symmetry probe points.
pub const SYMMETRY_TOL: f64 = 1e-2;

/// `conj(μ(1/z̄)) z²/z̄²`, the reflection of `μ` to the exterior disk.
fn reflected(mu: &BeltramiCoefficient, z: Complex64) -> Complex64 {
    let zs = 1.0 / z.conj();
    let q = z / z.conj();
    mu.eval(zs).conj() * q * q
}

/// Normalized self-map of the disk with dilatation `μ`, fixing `1, -1, -i`.
pub fn solve_disk(mu: &BeltramiCoefficient) -> Result<QuasiconformalMap> {
    solve_disk_with(mu, &SolverOptions::default())
}

/// The symmetric plane map is `a + 1/F₂(1/(F₁ - a))`: `F₁` solves `μ χ_D`,
/// `a = F₁(0)`, and `F₂` carries the reflected coefficient transported to the
/// chart `u = 1/(F₁ - a)`, where it is compactly supported.
pub fn solve_disk_with(
    mu: &BeltramiCoefficient,
    opts: &SolverOptions,
) -> Result<QuasiconformalMap> {
    if mu.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit disk",
            found: mu.domain(),
        });
    }
    if mu.is_zero() {
        return Ok(QuasiconformalMap::identity(DomainTag::UnitDisk));
    }
    let f = glue(mu, opts)?;
    let defect = symmetry_defect(&f)?;
    if defect > SYMMETRY_TOL {
        return Err(Error::SymmetryDefect(defect));
    }
    Ok(f)
}

fn glue(mu: &BeltramiCoefficient, opts: &SolverOptions) -> Result<QuasiconformalMap> {
    opts.grid.validate()?;
    let r = mu.support().radius().unwrap_or(1.0).min(1.0);
    let spec = opts.grid;
    let (s1, _) = solve_raw(&mu.sample(spec), opts)?;
    let f1 = QuasiconformalMap::from_parts(
        Repr::Grid(s1.clone()),
        Mobius::identity(),
        Normalization::FixZeroOneInfinity,
        DomainTag::Plane,
        None,
        mu.on_plane(),
        None,
        spec.half_width * 0.9,
    );
    let a = s1.jet(ZERO)?.value;

    // Support of the transported coefficient: image of |z| >= 1/r.
    let rho_z = 1.0 / r;
    let mut rho: f64 = 0.0;
    for k in 0..256 {
        let z = Complex64::from_polar(rho_z, 2.0 * std::f64::consts::PI * k as f64 / 256.0);
        rho = rho.max((1.0 / (f1.eval(z)? - a)).norm());
    }
    let rho = 1.05 * rho + 2.0 * spec.spacing();

    let sub: usize = if mu.is_discontinuous() { 4 } else { 1 };
    let h = spec.spacing();
    let offsets: Vec<f64> = (0..sub)
        .map(|k| ((k as f64 + 0.5) / sub as f64 - 0.5) * h)
        .collect();
    let weight = 1.0 / (sub * sub) as f64;
    let nu_at = |w: Complex64| -> Result<Complex64> {
        if w.norm() < 1e-300 {
            return Ok(mu.eval(ZERO).conj());
        }
        let s = a + 1.0 / w;
        let z = f1.invert_point(s, Some(s))?;
        if z.norm_sqr() <= 1.0 {
            return Ok(ZERO);
        }
        let dz = f1.jet(z)?.dz;
        // g = 1/(F₁ - a) has g' = -F₁' w², so g'/conj(g') = (F₁'/conj(F₁')) (w/w̄)².
        let q = w / w.conj();
        Ok(reflected(mu, z) * dz / dz.conj() * q * q)
    };
    let mut nu = ComplexGrid::zeros(spec);
    for row in 0..spec.n {
        for col in 0..spec.n {
            let w0 = spec.node(row, col);
            if w0.norm() > rho {
                continue;
            }
            let mut acc = ZERO;
            for &oy in &offsets {
                for &ox in &offsets {
                    acc += nu_at(w0 + Complex64::new(ox, oy))?;
                }
            }
            nu.set(row, col, acc * weight);
        }
    }
    let (s2, diag) = solve_raw(&nu, opts)?;
    let chart = Arc::new(TwoChart { f1, a, f2: s2 });
    let raw = QuasiconformalMap::from_parts(
        Repr::TwoChart(chart.clone()),
        Mobius::identity(),
        Normalization::FixThreeBoundaryPoints,
        DomainTag::UnitDisk,
        None,
        mu.clone(),
        None,
        1.0,
    );
    let pts = Normalization::FixThreeBoundaryPoints.points();
    let post = Mobius::from_triples(
        [raw.eval(pts[0])?, raw.eval(pts[1])?, raw.eval(pts[2])?],
        pts,
    )?;
    let conformal = (r < 1.0).then_some(Annulus {
        inner: r,
        outer: 1.0 / r,
    });
    let f = QuasiconformalMap::from_parts(
        Repr::TwoChart(chart),
        post,
        Normalization::FixThreeBoundaryPoints,
        DomainTag::UnitDisk,
        conformal,
        mu.clone(),
        Some(diag),
        1.0,
    );
    Ok(f)
}

/// Chordal distance on the Riemann sphere; invariant under `w ↦ 1/w̄`, so an
/// image near `0` does not blow up the comparison near `∞`.
fn chordal(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

/// Largest chordal distance between `f(1/z̄)` and `1/conj(f(z))` over probe
/// points in the disk.
pub fn symmetry_defect(f: &QuasiconformalMap) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &rad in &[0.3, 0.6, 0.9] {
        for k in 0..16 {
            let z =
                Complex64::from_polar(rad, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / 16.0);
            let inside = f.eval(z)?;
            let outside = f.eval(1.0 / z.conj())?;
            worst = worst.max(chordal(outside, 1.0 / inside.conj()));
        }
    }
    Ok(worst)
}

/// Plane map with coefficient `μ` on the upper half-plane and its reflection
/// `conj(μ(z̄))` below; it preserves the real line and fixes `0, 1, ∞`.
pub fn solve_half_plane(
    mu: &BeltramiCoefficient,
    opts: &SolverOptions,
) -> Result<QuasiconformalMap> {
    if mu.domain() != DomainTag::UpperHalfPlane {
        return Err(Error::DomainMismatch {
            expected: "upper half-plane",
            found: mu.domain(),
        });
    }
    let inner = mu.clone();
    let sym = BeltramiCoefficient::from_fn(
        DomainTag::Plane,
        mu.support(),
        mu.sup_norm(),
        CoefficientKind::Derived {
            description: "reflection-symmetric extension".into(),
        },
        move |z| {
            if z.im > 0.0 {
                inner.eval(z)
            } else if z.im < 0.0 {
                inner.eval(z.conj()).conj()
            } else {
                ZERO
            }
        },
    )?
    .with_breaks(mu.radial_breaks().to_vec(), mu.is_discontinuous());
    let f = solve_plane_with(&sym, opts)?;
    Ok(f.with_post(
        f.post(),
        Normalization::FixZeroOneInfinity,
        DomainTag::UpperHalfPlane,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Support;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gives_identity() {
        let f = solve_disk(&BeltramiCoefficient::zero(DomainTag::UnitDisk)).unwrap();
        assert_eq!(f.eval(c(0.3, -0.2)).unwrap(), c(0.3, -0.2));
    }

    #[test]
    fn rejects_plane_coefficients() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5)
            .unwrap()
            .on_plane();
        assert!(matches!(solve_disk(&mu), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn disk_map_preserves_circle_and_fixes_points() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let f = solve_disk_with(&mu, &SolverOptions::with_grid(512, 4.0).unwrap()).unwrap();
        assert!(f.normalization_defect().unwrap() < 1e-6);
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
            worst = worst.max((f.eval(z).unwrap().norm() - 1.0).abs());
        }
        assert!(worst < 1e-4, "{worst}");
        assert!(symmetry_defect(&f).unwrap() < 5e-3);
        // Dilatation inside the disk is the input coefficient.
        let j = f.jet(c(0.1, 0.2)).unwrap();
        assert!((j.dilatation() - c(0.3, 0.0)).norm() < 1e-2);
        assert!(f.jet(c(0.8, 0.0)).unwrap().dilatation().norm() < 1e-3);
    }

    #[test]
    fn half_plane_map_preserves_real_line() {
        let mu = BeltramiCoefficient::from_fn(
            DomainTag::UpperHalfPlane,
            Support::Radius(1.5),
            0.2,
            CoefficientKind::Derived {
                description: "bump".into(),
            },
            |z| {
                let d = (z - c(0.0, 0.7)).norm_sqr();
                if d < 0.25 {
                    c(0.2 * (1.0 - 4.0 * d).powi(2), 0.0)
                } else {
                    ZERO
                }
            },
        )
        .unwrap();
        let f = solve_half_plane(&mu, &SolverOptions::with_grid(256, 4.0).unwrap()).unwrap();
        for x in [-2.0, -0.5, 0.3, 1.0, 4.0] {
            assert!(f.eval(c(x, 0.0)).unwrap().im.abs() < 1e-10);
        }
        assert!(f.eval(c(0.2, 0.5)).unwrap().im > 0.0);
        assert!(f.normalization_defect().unwrap() < 1e-6);
    }
}
