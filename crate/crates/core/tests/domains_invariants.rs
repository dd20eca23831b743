use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use teichkit_core::domains::{
    ainf_norm, ap_norm, cayley_point, mp_norm, BeltramiCoefficient, CayleyDirection,
    HolomorphicFunction,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|k| (π r² / (1 - r²))^{1/p}`: the disk integral of the constant weight.
fn constant_disk_norm(k: f64, r: f64, p: f64) -> f64 {
    k * (PI * r * r / (1.0 - r * r)).powf(1.0 / p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mp_norm_of_constant_disks(k in 0.05f64..0.9, r in 0.1f64..0.8, p in 1.0f64..4.0) {
        let mu = BeltramiCoefficient::constant_disk(c(k, 0.0), r).unwrap();
        let n = mp_norm(&mu, p).unwrap();
        let exact = constant_disk_norm(k, r, p);
        prop_assert!(!n.divergent);
        prop_assert!((n.value - exact).abs() <= 1e-6 * exact, "{} {}", n.value, exact);
    }

    #[test]
    fn mp_norm_is_homogeneous(k in 0.05f64..0.5, scale in 0.0f64..1.9, p in 1.0f64..3.0) {
        let mu = BeltramiCoefficient::radial_table(
            vec![0.3, 0.6],
            vec![c(k, 0.1), c(0.5 * k, -0.2 * k)],
        )
        .unwrap();
        let base = mp_norm(&mu, p).unwrap().value;
        let scaled = mp_norm(&mu.scaled(c(scale, 0.0)).unwrap(), p).unwrap().value;
        prop_assert!((scaled - scale * base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn cayley_maps_are_inverse(re in -0.99f64..0.99, im in -0.99f64..0.99) {
        let z = c(re, im);
        prop_assume!(z.norm() < 0.99);
        let w = cayley_point(z, CayleyDirection::DiskToHalfPlane).unwrap();
        prop_assert!(w.im > 0.0);
        let back = cayley_point(w, CayleyDirection::HalfPlaneToDisk).unwrap();
        prop_assert!((back - z).norm() <= 1e-12);
    }
}

#[test]
fn converged_ladders_bracket_their_last_step() {
    let mut reports = Vec::new();
    for (k, r) in [(0.3, 0.5), (0.2, 0.7), (0.6, 0.3)] {
        let mu = BeltramiCoefficient::constant_disk(c(k, 0.0), r).unwrap();
        for p in [1.0, 2.0, 3.0] {
            reports.push(mp_norm(&mu, p).unwrap());
        }
        let phi = HolomorphicFunction::disk_schwarzian(c(k * r * r, 0.0), 64);
        reports.push(ap_norm(&phi, 2.0).unwrap());
    }
    for n in reports {
        assert!(!n.divergent);
        let l = &n.ladder;
        let step = (l[l.len() - 1].1 - l[l.len() - 2].1).abs();
        assert!(step <= n.error_estimate, "{n:?}");
    }
}

#[test]
fn constant_coefficient_on_the_disk_diverges() {
    let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 1.0).unwrap();
    for p in [1.0, 2.0, 3.0] {
        let n = mp_norm(&mu, p).unwrap();
        assert!(n.divergent, "{n:?}");
        assert_eq!(n.ladder.len(), 3);
    }
}

#[test]
fn sup_norm_is_dominated_by_the_integral_norm() {
    // The family -6 k r² / (z² - k r²)² with (k, r) on a grid; the ratio
    // ainf / ap is bounded above on the sample set.
    for p in [1.0, 2.0, 3.0] {
        let mut worst: f64 = 0.0;
        for k in [0.1, 0.3, 0.5, 0.7] {
            for r in [0.3, 0.5, 0.7, 0.9] {
                let phi = HolomorphicFunction::disk_schwarzian(c(k * r * r, 0.0), 96);
                let a = ainf_norm(&phi).unwrap().value;
                let b = ap_norm(&phi, p).unwrap().value;
                worst = worst.max(a / b);
            }
        }
        assert!(worst.is_finite() && worst < 10.0, "p = {p}: {worst}");
    }
}
