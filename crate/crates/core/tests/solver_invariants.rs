use num_complex::Complex64;
use proptest::prelude::*;
use teichkit_core::domains::{mp_norm, BeltramiCoefficient, CoefficientKind, DomainTag, Support};
use teichkit_core::solver::{
    chain_rule, chain_rule_at, solve_disk_with, solve_plane_with, SolverOptions,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts() -> SolverOptions {
    SolverOptions::with_grid(256, 4.0).unwrap()
}

/// `μ - ν` on the disk, keeping both sets of radial jumps for the quadrature.
fn difference(mu: &BeltramiCoefficient, nu: &BeltramiCoefficient) -> BeltramiCoefficient {
    let (a, b) = (mu.clone(), nu.clone());
    let mut breaks = mu.radial_breaks().to_vec();
    breaks.extend_from_slice(nu.radial_breaks());
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let support = match (mu.support().radius(), nu.support().radius()) {
        (Some(r), Some(s)) if r.max(s) < 1.0 => Support::Radius(r.max(s)),
        _ => Support::Full,
    };
    BeltramiCoefficient::from_fn(
        DomainTag::UnitDisk,
        support,
        (mu.sup_norm() + nu.sup_norm()).min(0.99),
        CoefficientKind::Derived {
            description: "difference".into(),
        },
        move |z| a.eval(z) - b.eval(z),
    )
    .unwrap()
    .with_breaks(breaks, true)
}

#[test]
fn neumann_solves_meet_the_residual_contract() {
    let bump = BeltramiCoefficient::from_fn(
        DomainTag::Plane,
        Support::Radius(1.5),
        0.5,
        CoefficientKind::Derived {
            description: "bump".into(),
        },
        |z| {
            let s = z.norm_sqr();
            if s < 2.25 {
                c(0.5, 0.2) * 0.928 * (-s / (2.25 - s)).exp()
            } else {
                c(0.0, 0.0)
            }
        },
    )
    .unwrap();
    let o = SolverOptions::with_grid(512, 4.0).unwrap();
    let f = solve_plane_with(&bump, &o).unwrap();
    let d = f.diagnostics().unwrap();
    assert!(d.residual <= 1e-3, "{d:?}");
    assert!(d.max_ratio <= bump.sup_norm() + 0.1, "{d:?}");
}

#[test]
fn quotient_norm_is_comparable_with_the_difference() {
    // f^ν bi-Lipschitz for the small base coefficient.
    let nu = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5).unwrap();
    let f_nu = solve_disk_with(&nu, &opts()).unwrap();
    let family = [
        BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5).unwrap(),
        BeltramiCoefficient::constant_disk(c(0.0, 0.25), 0.4).unwrap(),
        BeltramiCoefficient::constant_disk(c(0.1, -0.1), 0.7).unwrap(),
        BeltramiCoefficient::radial_table(vec![0.3, 0.6], vec![c(0.3, 0.0), c(-0.1, 0.1)]).unwrap(),
    ];
    for p in [1.0, 2.0] {
        let mut ratios = Vec::new();
        for mu in &family {
            let q = mp_norm(&chain_rule(mu, &nu, &f_nu).unwrap(), p).unwrap();
            let d = mp_norm(&difference(mu, &nu), p).unwrap();
            assert!(q.is_finite() && d.is_finite());
            ratios.push(q.value / d.value);
        }
        let big_c = ratios.iter().fold(1.0f64, |m, &r| m.max(r).max(1.0 / r));
        for r in &ratios {
            assert!(*r >= 1.0 / big_c && *r <= big_c);
        }
        assert!(big_c < 2.0, "p = {p}: {ratios:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn quotient_by_itself_vanishes(k in 0.05f64..0.5, r in 0.2f64..0.8, arg in 0.0f64..6.28) {
        let mu = BeltramiCoefficient::constant_disk(Complex64::from_polar(k, arg), r).unwrap();
        let f = solve_disk_with(&mu, &SolverOptions::default()).unwrap();
        for w in [c(0.1, 0.2), c(-0.4, 0.3), c(0.0, -0.6)] {
            prop_assert_eq!(chain_rule_at(&mu, &mu, &f, w).unwrap(), c(0.0, 0.0));
        }
    }
}
