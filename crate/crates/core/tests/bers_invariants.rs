use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use teichkit_core::bers::{
    ahlfors_weill, bers_map_with, equivalent_with, exterior_schwarzian, BersOptions,
    EQUIVALENCE_TOL,
};
use teichkit_core::domains::{
    ainf_norm, ap_norm, mp_norm, BeltramiCoefficient, HolomorphicFunction,
};
use teichkit_core::solver::QuasiconformalMap;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `-6q/(z² - q)²`, the image of `k χ_{|z|<r}` with `q = k r²`.
fn closed(q: Complex64, z: Complex64) -> Complex64 {
    -6.0 * q / (z * z - q).powi(2)
}

fn on_circle(r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| Complex64::from_polar(r, TAU * (k as f64 + 0.5) / n as f64))
}

#[test]
fn bers_image_is_controlled_by_the_coefficient_norm() {
    let o = BersOptions::with_grid(256, 4.0).unwrap();
    let mut images = Vec::new();
    for k in [0.1, 0.2, 0.3] {
        for r in [0.3, 0.5, 0.7] {
            let mu = BeltramiCoefficient::constant_disk(c(k, 0.0), r).unwrap();
            let t = bers_map_with(&mu, 2.0, &o).unwrap();
            images.push((mu, t.bers_image));
        }
    }
    for p in [1.0, 2.0, 3.0] {
        let mut ratio: f64 = 0.0;
        let mut ordering: f64 = 0.0;
        for (mu, phi) in &images {
            let a = ap_norm(phi, p).unwrap();
            let m = mp_norm(mu, p).unwrap();
            let sup = ainf_norm(phi).unwrap();
            assert!(a.is_finite() && m.is_finite() && sup.is_finite());
            ratio = ratio.max(a.value / m.value);
            ordering = ordering.max(sup.value / a.value);
        }
        println!("p = {p}: C = {ratio:.4}, c_p = {ordering:.4}");
        assert!(ratio.is_finite() && ratio < 10.0, "p = {p}: {ratio}");
        assert!(
            ordering.is_finite() && ordering < 10.0,
            "p = {p}: {ordering}"
        );
    }
}

#[test]
fn section_inverts_the_bers_map_on_small_data() {
    let o = BersOptions::with_grid(512, 4.0).unwrap();
    let family = [
        c(0.0125, 0.0),
        c(0.025, 0.0),
        c(0.0, 0.02),
        c(-0.015, 0.015),
        c(0.03, -0.01),
    ];
    for q in family {
        let phi = HolomorphicFunction::disk_schwarzian(q, 64);
        assert!(ainf_norm(&phi).unwrap().value < 0.5);
        let sigma = ahlfors_weill(&phi).unwrap();
        let back = bers_map_with(&sigma, 2.0, &o).unwrap();
        let worst = on_circle(2.0, 32)
            .map(|z| (back.bers_image.eval(z) - phi.eval(z)).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 5e-3, "q = {q}: {worst}");
    }
}

#[test]
fn distinct_coefficients_stay_apart() {
    let o = BersOptions::with_grid(256, 4.0).unwrap();
    let ks = [0.1, 0.2, 0.3];
    let z = c(2.0, 0.0);
    for i in 0..ks.len() {
        for j in i + 1..ks.len() {
            let a = BeltramiCoefficient::constant_disk(c(ks[i], 0.0), 0.5).unwrap();
            let b = BeltramiCoefficient::constant_disk(c(ks[j], 0.0), 0.5).unwrap();
            let (same, d) = equivalent_with(&a, &b, EQUIVALENCE_TOL, &o).unwrap();
            let gap = (closed(c(ks[i] * 0.25, 0.0), z) - closed(c(ks[j] * 0.25, 0.0), z)).norm();
            assert!(!same);
            assert!(d >= 0.9 * gap, "{} {}: {d} < {gap}", ks[i], ks[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_exterior_maps_give_the_closed_image(k in 0.05f64..0.6, arg in 0.0f64..6.28, r in 0.2f64..0.8) {
        let k = Complex64::from_polar(k, arg);
        let f = QuasiconformalMap::constant_disk(k, r).unwrap();
        let (image, gap) = exterior_schwarzian(&f, &BersOptions::default()).unwrap();
        prop_assert!(gap < 1e-8);
        for z in on_circle(2.0, 8) {
            let e = closed(k * r * r, z);
            prop_assert!((image.eval(z) - e).norm() <= 1e-8 * e.norm().max(1e-3));
        }
    }

    #[test]
    fn section_modulus_identity(re in -0.08f64..0.08, im in -0.08f64..0.08, rad in 1.05f64..4.0, t in 0.0f64..6.28) {
        let phi = HolomorphicFunction::disk_schwarzian(c(re, im), 64);
        let sigma = ahlfors_weill(&phi).unwrap();
        let z = Complex64::from_polar(rad, t);
        let star = 1.0 / z.conj();
        let lhs = sigma.eval(star).norm();
        let rhs = 0.5 * (z.norm_sqr() - 1.0).powi(2) * phi.eval(z).norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-12));
    }
}
