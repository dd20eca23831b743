use num_complex::Complex64;

use super::map::{QuasiconformalMap, Repr};
use crate::domains::{
    BeltramiCoefficient, CoefficientKind, ComplexGrid, DomainTag, GridSpec, Mobius, Support,
};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// Grid on which a map is naturally sampled.
pub fn sampling_spec(f: &QuasiconformalMap) -> GridSpec {
    if let Some(g) = f.grid_solution() {
        return g.f.spec;
    }
    let half_width = match f.domain() {
        DomainTag::UnitDisk => 1.0,
        _ => f.seed_box(),
    };
    GridSpec {
        n: 256,
        half_width,
        center: [0.0, 0.0],
    }
}

/// Centred-difference `∂̄f/∂f` of samples; zero where the stencil leaves `domain`.
pub fn dilatation_of_samples(f: &ComplexGrid, domain: DomainTag) -> Result<ComplexGrid> {
    let spec = f.spec;
    let n = spec.n;
    let step = spec.spacing();
    let mut out = ComplexGrid::zeros(spec);
    for row in 1..n - 1 {
        for col in 1..n - 1 {
            let z = spec.node(row, col);
            if !domain.contains(z) {
                continue;
            }
            let (e, w) = (f.get(row, col + 1), f.get(row, col - 1));
            let (s, nn) = (f.get(row + 1, col), f.get(row - 1, col));
            if !(e.is_finite() && w.is_finite() && s.is_finite() && nn.is_finite()) {
                continue;
            }
            let fx = (e - w) / (2.0 * step);
            let fy = (s - nn) / (2.0 * step);
            let dz = (fx - Complex64::i() * fy) * 0.5;
            let dzbar = (fx + Complex64::i() * fy) * 0.5;
            let jacobian = dz.norm_sqr() - dzbar.norm_sqr();
            if !(jacobian > 0.0) {
                return Err(Error::NonPositiveJacobian { z, jacobian });
            }
            out.set(row, col, dzbar / dz);
        }
    }
    Ok(out)
}

/// Complex dilatation of `f` by centred differences on its sampling grid.
pub fn dilatation(f: &QuasiconformalMap) -> Result<BeltramiCoefficient> {
    dilatation_on(f, sampling_spec(f))
}

pub fn dilatation_on(f: &QuasiconformalMap, spec: GridSpec) -> Result<BeltramiCoefficient> {
    let samples = f.sample(spec);
    let mu = dilatation_of_samples(&samples, f.domain())?;
    BeltramiCoefficient::from_grid(f.domain(), mu, Support::Full)
}

/// Coefficient read off the jets of `f` (NaN where evaluation fails).
fn jet_coefficient(
    f: QuasiconformalMap,
    support: Support,
    bound: f64,
    description: &str,
) -> Result<BeltramiCoefficient> {
    let domain = f.domain();
    BeltramiCoefficient::from_fn(
        domain,
        support,
        bound.min(1.0 - 1e-12),
        CoefficientKind::Derived {
            description: description.into(),
        },
        move |z| match f.jet(z) {
            Ok(j) => j.dilatation(),
            Err(_) => NAN,
        },
    )
}

fn range_of(f: &QuasiconformalMap) -> DomainTag {
    f.domain()
}

/// `f ∘ g`.
pub fn compose(f: &QuasiconformalMap, g: &QuasiconformalMap) -> Result<QuasiconformalMap> {
    let (outer, inner) = (f.domain(), range_of(g));
    let compatible = outer == inner || outer == DomainTag::Plane;
    if !compatible {
        return Err(Error::DomainMismatch {
            expected: "outer map defined on the range of the inner map",
            found: inner,
        });
    }
    let (a, b) = (f.source_mu().sup_norm(), g.source_mu().sup_norm());
    let bound = (a + b) / (1.0 + a * b);
    let draft = QuasiconformalMap::from_parts(
        Repr::Composed(f.clone(), g.clone()),
        Mobius::identity(),
        g.normalization(),
        g.domain(),
        None,
        BeltramiCoefficient::zero(g.domain()),
        None,
        g.seed_box(),
    );
    let mu = jet_coefficient(draft.clone(), Support::Full, bound, "composition")?;
    Ok(QuasiconformalMap::from_parts(
        Repr::Composed(f.clone(), g.clone()),
        Mobius::identity(),
        g.normalization(),
        g.domain(),
        None,
        mu,
        None,
        g.seed_box(),
    ))
}

/// Inverse map, evaluated pointwise by Newton's method.
pub fn invert(f: &QuasiconformalMap) -> Result<QuasiconformalMap> {
    if f.is_closed_form() && f.source_mu().is_zero() {
        return Ok(f.with_post(f.post().inverse(), f.normalization(), f.domain()));
    }
    // Injectivity proxy: positive Jacobian on a coarse grid.
    let coarse = GridSpec {
        n: 32,
        ..sampling_spec(f)
    };
    for row in 1..coarse.n - 1 {
        for col in 1..coarse.n - 1 {
            let z = coarse.node(row, col);
            if !f.domain().contains(z) {
                continue;
            }
            if let Ok(j) = f.jet(z) {
                let jacobian = j.jacobian();
                if !(jacobian > 0.0) {
                    return Err(Error::NonPositiveJacobian { z, jacobian });
                }
            }
        }
    }
    let seed_box = f.seed_box();
    let draft = QuasiconformalMap::from_parts(
        Repr::Inverted(f.clone()),
        Mobius::identity(),
        f.normalization(),
        f.domain(),
        None,
        BeltramiCoefficient::zero(f.domain()),
        None,
        seed_box,
    );
    let mu = jet_coefficient(draft, Support::Full, f.source_mu().sup_norm(), "inverse")?;
    Ok(QuasiconformalMap::from_parts(
        Repr::Inverted(f.clone()),
        Mobius::identity(),
        f.normalization(),
        f.domain(),
        None,
        mu,
        None,
        seed_box,
    ))
}

/// `(μ ∗ ν⁻¹)(w)` at `w = f^ν(z)`.
pub fn chain_rule_at(
    mu: &BeltramiCoefficient,
    nu: &BeltramiCoefficient,
    f_nu: &QuasiconformalMap,
    w: Complex64,
) -> Result<Complex64> {
    let z = f_nu.invert_point(w, None)?;
    let j = f_nu.jet(z)?;
    let (m, v) = (mu.eval(z), nu.eval(z));
    let num = m - v;
    if num == ZERO {
        return Ok(ZERO);
    }
    Ok(num / (1.0 - v.conj() * m) * (j.dz / j.dz.conj()))
}

/// Coefficient of `f^μ ∘ (f^ν)⁻¹` on the image of `f^ν`.
///
/// Evaluation inverts `f^ν` pointwise; points whose preimage cannot be found
/// evaluate to NaN, and [`chain_rule_at`] reports the failure instead.
pub fn chain_rule(
    mu: &BeltramiCoefficient,
    nu: &BeltramiCoefficient,
    f_nu: &QuasiconformalMap,
) -> Result<BeltramiCoefficient> {
    if nu.is_zero() {
        return Ok(mu.clone());
    }
    let (a, b) = (mu.sup_norm(), nu.sup_norm());
    let bound = (a + b) / (1.0 + a * b);
    let support = match (mu.support().radius(), nu.support().radius()) {
        (Some(r1), Some(r2)) => {
            let r = r1.max(r2);
            let mut image: f64 = 0.0;
            for k in 0..256 {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / 256.0);
                image = image.max(f_nu.eval(z)?.norm());
            }
            Support::Radius(image * 1.02)
        }
        _ => Support::Full,
    };
    let domain = match f_nu.domain() {
        DomainTag::UnitDisk => DomainTag::UnitDisk,
        _ => mu.domain(),
    };
    let (mu, nu, f) = (mu.clone(), nu.clone(), f_nu.clone());
    BeltramiCoefficient::from_fn(
        domain,
        support,
        bound.min(1.0 - 1e-12),
        CoefficientKind::Derived {
            description: "chain rule".into(),
        },
        move |w| chain_rule_at(&mu, &nu, &f, w).unwrap_or(NAN),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_plane_with, SolverOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_zero_dilatation() {
        let f = QuasiconformalMap::identity(DomainTag::Plane);
        let mu = dilatation(&f).unwrap();
        assert_eq!(mu.sup_norm(), 0.0);
    }

    #[test]
    fn synthetic_affine_samples() {
        let spec = GridSpec::new(64, 2.0).unwrap();
        let f = ComplexGrid::from_fn(spec, |z| z + 0.3 * z.conj());
        let mu = dilatation_of_samples(&f, DomainTag::Plane).unwrap();
        assert!((mu.get(32, 40) - c(0.3, 0.0)).norm() < 1e-14);
        let g = ComplexGrid::from_fn(spec, |z| z.conj());
        assert!(matches!(
            dilatation_of_samples(&g, DomainTag::Plane),
            Err(Error::NonPositiveJacobian { .. })
        ));
    }

    #[test]
    fn dilatation_roundtrip_away_from_interface() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap();
        let f = solve_plane_with(&mu, &SolverOptions::with_grid(512, 4.0).unwrap()).unwrap();
        let d = dilatation(&f).unwrap();
        let h = 4.0 * 8.0 / 512.0;
        for k in 0..64 {
            let t = k as f64 * 0.1;
            for r in [0.1, 0.3, 0.5 - h, 0.5 + h, 1.0, 2.0] {
                let z = Complex64::from_polar(r, t);
                let e = (d.eval(z) - mu.eval(z)).norm();
                assert!(e < 5e-3, "{z}: {e}");
            }
        }
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.1), 0.5).unwrap();
        let f = solve_plane_with(&mu, &SolverOptions::with_grid(256, 4.0).unwrap()).unwrap();
        let id = compose(&f, &invert(&f).unwrap()).unwrap();
        for w in [
            c(0.1, 0.1),
            c(-0.4, 0.2),
            c(0.45, -0.1),
            c(1.5, 2.0),
            c(-3.0, -1.0),
        ] {
            assert!((id.eval(w).unwrap() - w).norm() < 1e-6);
        }
        let id2 = QuasiconformalMap::identity(DomainTag::Plane);
        let inv = invert(&id2).unwrap();
        assert_eq!(inv.eval(c(0.3, 0.7)).unwrap(), c(0.3, 0.7));
    }

    #[test]
    fn closed_form_affine_composition() {
        let (k1, k2) = (c(0.2, 0.0), c(0.3, 0.0));
        let f1 = QuasiconformalMap::constant_disk(k1, 0.8).unwrap();
        let f2 = QuasiconformalMap::constant_disk(k2, 0.8).unwrap();
        let g = compose(&f1, &f2).unwrap();
        let (c1, c2) = (1.0 / (1.0 + k1 * 0.64), 1.0 / (1.0 + k2 * 0.64));
        for z in [c(0.1, 0.2), c(-0.3, 0.1), c(0.2, -0.4)] {
            let w = c2 * (z + k2 * z.conj());
            let exact = c1 * (w + k1 * w.conj());
            assert!((g.eval(z).unwrap() - exact).norm() < 1e-14);
        }
        let mu = g.source_mu().eval(c(0.1, 0.1));
        let expected = (k2 + k1) / (1.0 + k1 * k2);
        assert!((mu - expected).norm() < 1e-12);
    }

    #[test]
    fn chain_rule_identities() {
        let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.1), 0.5)
            .unwrap()
            .on_plane();
        let zero = BeltramiCoefficient::zero(DomainTag::Plane);
        let id = QuasiconformalMap::identity(DomainTag::Plane);
        let same = chain_rule(&mu, &zero, &id).unwrap();
        for z in [c(0.1, 0.0), c(0.4, 0.4), c(2.0, 0.0)] {
            assert_eq!(same.eval(z), mu.eval(z));
        }
        let f = QuasiconformalMap::constant_disk(c(0.3, 0.1), 0.5).unwrap();
        let zero_out = chain_rule(&mu, &mu, &f).unwrap();
        for z in [c(0.1, 0.0), c(0.2, 0.2), c(0.8, -0.4)] {
            assert_eq!(zero_out.eval(z), ZERO);
        }
    }

    #[test]
    fn chain_rule_affine_case() {
        let (k1, k2) = (0.25, 0.4);
        let mu = BeltramiCoefficient::from_fn(
            DomainTag::Plane,
            Support::Full,
            k1,
            CoefficientKind::Derived {
                description: "constant".into(),
            },
            move |_| c(k1, 0.0),
        )
        .unwrap();
        let f = QuasiconformalMap::affine(c(k2, 0.0)).unwrap();
        let nu = f.source_mu().clone();
        let r = chain_rule(&mu, &nu, &f).unwrap();
        let expected = (k1 - k2) / (1.0 - k2 * k1);
        for w in [c(0.3, 0.1), c(-2.0, 1.0), c(0.0, 0.5)] {
            assert!((r.eval(w) - expected).norm() < 1e-10);
        }
    }
}
