//! Executable acceptance checks, shared by the test suite and `verify-all`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bers::{
    ahlfors_weill, bers_map_with, bilipschitz_representative_with, equivalent_with, BersOptions,
    DEFAULT_DELTA,
};
use crate::boundary::{
    ba_extend, besov_characterization_check_with, besov_seminorm, boundary_trace, welding,
    welding_identity, BoundaryHomeomorphism, BoundaryNormalization, CharacterizationOptions,
    ExtensionKernel, ROUNDTRIP_TOL,
};
use crate::domains::{
    ainf_norm, analytic_besov_norm, mp_norm, BeltramiCoefficient, CoefficientKind, ComplexGrid,
    DomainTag, GridSpec, HolomorphicFunction, Support,
};
use crate::error::{Error, Result};
use crate::solver::{
    beurling_transform, chain_rule, chain_rule_at, solve_disk_with, solve_plane_with,
    QuasiconformalMap, SolverOptions,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Identifier and short name of each criterion.
pub const CRITERIA: [(u8, &str); 11] = [
    (1, "closed-form Bers image"),
    (2, "closed-form p-norm"),
    (3, "Douglas equality and trace comparability"),
    (4, "Ahlfors-Weill section"),
    (5, "chain-rule identities"),
    (6, "solver residual"),
    (7, "welding consistency"),
    (8, "characterization coherence"),
    (9, "roundtrip"),
    (10, "bi-Lipschitz representative"),
    (11, "Beurling transform"),
];

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn on_circle(r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| Complex64::from_polar(r, TAU * k as f64 / n as f64))
}

/// Runs criterion `id`; stage errors count as failures.
pub fn run(id: u8) -> Result<CriterionResult> {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .ok_or_else(|| Error::Invalid(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let result = match id {
        1 => bers_image(),
        2 => p_norm(),
        3 => douglas(),
        4 => section(),
        5 => chain_rules(),
        6 => residuals(),
        7 => welding_consistency(),
        8 => coherence(),
        9 => roundtrip(),
        10 => bilipschitz(),
        _ => beurling(),
    };
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    Ok(CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run(id).expect("listed criterion"))
        .collect()
}

fn bers_image() -> Result<Outcome> {
    let start = Instant::now();
    let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5)?;
    let t = bers_map_with(&mu, 2.0, &BersOptions::with_grid(1024, 4.0)?)?;
    let secs = start.elapsed().as_secs_f64();
    let worst = on_circle(2.0, 32)
        .map(|z| {
            let e = -0.45 / (z * z - 0.075).powi(2);
            (t.bers_image.eval(z) - e).norm() / e.norm()
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-2 && secs <= 60.0,
        format!("max relative error {worst:.2e} at N = 1024 in {secs:.1} s"),
    )
}

fn p_norm() -> Result<Outcome> {
    let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5)?;
    let n = mp_norm(&mu, 2.0)?;
    let flat = BeltramiCoefficient::constant_disk(c(0.3, 0.0), 1.0)?;
    let d = mp_norm(&flat, 2.0)?;
    outcome(
        (n.value - 0.30700).abs() <= 1e-3 && !n.divergent && d.divergent && d.ladder.len() == 3,
        format!(
            "norm {:.5}, constant coefficient divergent = {} over {} levels",
            n.value,
            d.divergent,
            d.ladder.len()
        ),
    )
}

fn trace_ratio(phi: &HolomorphicFunction, p: f64) -> Result<f64> {
    let u = boundary_trace(phi, 1024)?.function();
    let b = besov_seminorm(&u, p)?;
    let a = analytic_besov_norm(phi, p)?;
    if !(b.is_finite() && a.is_finite()) {
        return Err(Error::Invalid(
            "non-finite seminorm on the test family".into(),
        ));
    }
    Ok(b.value / a.value)
}

fn douglas() -> Result<Outcome> {
    let z = HolomorphicFunction::monomial(1);
    let b = besov_seminorm(&boundary_trace(&z, 1024)?.function(), 2.0)?.value;
    let ratio = trace_ratio(&z, 2.0)?;
    let mut ok =
        (b - TAU).abs() <= 1e-2 * TAU && (ratio - 2.0 * PI.sqrt()).abs() <= 1e-2 * 2.0 * PI.sqrt();
    let family = [
        HolomorphicFunction::monomial(1),
        HolomorphicFunction::monomial(2),
        HolomorphicFunction::monomial(3),
        HolomorphicFunction::simple_pole(c(2.0, 0.0), 80),
    ];
    let mut constants = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let mut cp: f64 = 1.0;
        for phi in &family {
            let r = trace_ratio(phi, p)?;
            cp = cp.max(r).max(1.0 / r);
        }
        ok &= cp.is_finite();
        constants.push(format!("C_{p} = {cp:.3}"));
    }
    outcome(
        ok,
        format!(
            "B_2(trace z) = {b:.5}, ratio {ratio:.5}; {}",
            constants.join(", ")
        ),
    )
}

fn section() -> Result<Outcome> {
    let o = BersOptions::with_grid(512, 4.0)?;
    let family = [
        c(0.025, 0.0),
        c(0.0125, 0.0),
        c(0.0, 0.02),
        c(-0.015, 0.015),
        c(0.03, -0.01),
    ];
    let mut worst: f64 = 0.0;
    for q in family {
        let phi = HolomorphicFunction::disk_schwarzian(q, 64);
        if ainf_norm(&phi)?.value >= 0.5 {
            return Err(Error::Invalid(format!("datum {q} is not small")));
        }
        let back = bers_map_with(&ahlfors_weill(&phi)?, 2.0, &o)?;
        for z in on_circle(2.0, 32) {
            worst = worst.max((back.bers_image.eval(z) - phi.eval(z)).norm());
        }
    }
    outcome(worst <= 5e-3, format!("max defect {worst:.2e} over 5 data"))
}

fn chain_rules() -> Result<Outcome> {
    let mu = BeltramiCoefficient::constant_disk(c(0.3, 0.1), 0.5)?;
    let f = solve_disk_with(&mu, &SolverOptions::with_grid(256, 4.0)?)?;
    let spec = GridSpec::new(16, 1.0)?;
    let mut self_quotient: f64 = 0.0;
    let mut trivial: f64 = 0.0;
    let zero = BeltramiCoefficient::zero(DomainTag::UnitDisk);
    let id = QuasiconformalMap::identity(DomainTag::UnitDisk);
    let same = chain_rule(&mu, &zero, &id)?;
    for row in 0..spec.n {
        for col in 0..spec.n {
            let z = spec.node(row, col);
            if z.norm() >= 0.95 {
                continue;
            }
            self_quotient = self_quotient.max(chain_rule_at(&mu, &mu, &f, z)?.norm());
            trivial = trivial.max((same.eval(z) - mu.eval(z)).norm());
        }
    }
    let (k1, k2) = (0.25, 0.4);
    let constant = BeltramiCoefficient::from_fn(
        DomainTag::Plane,
        Support::Full,
        k1,
        CoefficientKind::Derived {
            description: "constant".into(),
        },
        move |_| c(k1, 0.0),
    )?;
    let affine = QuasiconformalMap::affine(c(k2, 0.0))?;
    let r = chain_rule(&constant, affine.source_mu(), &affine)?;
    let expected = (k1 - k2) / (1.0 - k2 * k1);
    let affine_err = [c(0.3, 0.1), c(-2.0, 1.0), c(0.0, 0.5)]
        .iter()
        .map(|&w| (r.eval(w) - expected).norm())
        .fold(0.0, f64::max);
    outcome(
        self_quotient == 0.0 && trivial == 0.0 && affine_err <= 1e-10,
        format!(
            "|μ∗μ⁻¹| = {self_quotient:e}, |μ∗0⁻¹ - μ| = {trivial:e}, affine error {affine_err:.1e}"
        ),
    )
}

fn residuals() -> Result<Outcome> {
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
                ZERO
            }
        },
    )?;
    let family = [
        bump,
        BeltramiCoefficient::constant_disk(c(0.3, 0.0), 0.5)?.on_plane(),
        BeltramiCoefficient::constant_disk(c(0.2, 0.1), 0.7)?.on_plane(),
        BeltramiCoefficient::constant_disk(c(0.6, 0.0), 0.5)?.on_plane(),
        BeltramiCoefficient::radial_table(vec![0.3, 0.6], vec![c(0.3, 0.0), c(-0.1, 0.1)])?
            .on_plane(),
    ];
    let o = SolverOptions::with_grid(512, 4.0)?;
    let mut ok = true;
    let mut worst_residual: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for mu in &family {
        let f = solve_plane_with(mu, &o)?;
        let d = f
            .diagnostics()
            .ok_or_else(|| Error::Invalid("solver returned no diagnostics".into()))?;
        ok &= d.residual <= 1e-3 && d.max_ratio <= mu.sup_norm() + 0.1;
        worst_residual = worst_residual.max(d.residual);
        worst_excess = worst_excess.max(d.max_ratio - mu.sup_norm());
    }
    outcome(
        ok,
        format!(
            "max residual {worst_residual:.2e}, max ratio - sup {worst_excess:.3} over {} coefficients",
            family.len()
        ),
    )
}

fn welding_consistency() -> Result<Outcome> {
    let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5)?;
    let w = welding(&mu)?;
    let id = welding_identity(&w)?;
    outcome(
        w.consistency <= 1e-2 && id.sup_discrepancy <= 5e-2,
        format!(
            "welding vs trace {:.2e}, log-derivative identity {:.2e}",
            w.consistency, id.sup_discrepancy
        ),
    )
}

fn affine_extension_defect() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (a, b) in [(1.0, 0.0), (2.5, -0.3)] {
        let id = BoundaryHomeomorphism::identity_line(8.0, 300);
        let values = id.params().iter().map(|&x| a * x + b).collect();
        let h = BoundaryHomeomorphism::new(
            id.domain,
            id.params().to_vec(),
            values,
            BoundaryNormalization::None,
        )?;
        let mu = ba_extend(&h, ExtensionKernel::Gaussian)?;
        worst = worst.max(mu.sup_norm());
        for z in [c(0.1, 0.01), c(-3.0, 2.0), c(40.0, 0.5), c(0.0, 100.0)] {
            worst = worst.max(mu.eval(z).norm());
        }
    }
    Ok(worst)
}

fn coherence() -> Result<Outcome> {
    let opts = CharacterizationOptions {
        skip_roundtrip: true,
        ..CharacterizationOptions::default()
    };
    let finite = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5)?;
    let a = besov_characterization_check_with(&finite, 2.0, &opts)?;
    let power = BeltramiCoefficient::power_map(1.5)?;
    let b = besov_characterization_check_with(&power, 2.0, &opts)?;
    let affine = affine_extension_defect()?;
    let verdicts = |r: &crate::boundary::CharacterizationReport| {
        [r.mu_norm.finite(), r.besov.finite(), r.extension.finite()]
    };
    let va = verdicts(&a);
    let vb = verdicts(&b);
    outcome(
        a.coherent
            && b.coherent
            && va.iter().all(|v| *v == Some(true))
            && vb.iter().all(|v| *v == Some(false))
            && affine <= 1e-10,
        format!("finite example {va:?}, power map {vb:?}, affine extension {affine:.1e}"),
    )
}

fn roundtrip() -> Result<Outcome> {
    let mu = BeltramiCoefficient::constant_disk(c(0.2, 0.0), 0.5)?;
    let r = besov_characterization_check_with(&mu, 2.0, &CharacterizationOptions::default())?;
    match r.roundtrip.distance {
        Some(d) => outcome(d <= ROUNDTRIP_TOL, format!("Bers distance {d:.2e}")),
        None => outcome(
            false,
            format!(
                "no distance: {}",
                r.roundtrip
                    .error
                    .or(r.roundtrip.skipped)
                    .unwrap_or_default()
            ),
        ),
    }
}

fn bilipschitz() -> Result<Outcome> {
    let o = BersOptions::with_grid(256, 4.0)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for k in [0.1, 0.3, 0.34, 0.6] {
        let mu = BeltramiCoefficient::constant_disk(c(k, 0.0), 0.5)?;
        let r = bilipschitz_representative_with(&mu, DEFAULT_DELTA, &o)?;
        let (same, d) = equivalent_with(&r.nu, &mu, 1e-2, &o)?;
        let (lo, hi) = r.distortion;
        let single = r.steps == 1;
        ok &= same && lo > 0.0 && hi.is_finite() && single == (k < 1.0 / 3.0);
        rows.push(format!("{k}: {} steps, d = {d:.1e}", r.steps));
    }
    outcome(ok, rows.join("; "))
}

fn beurling() -> Result<Outcome> {
    let spec = GridSpec::new(256, 8.0)?;
    let dbar = ComplexGrid::from_fn(spec, |z| -z * (-z.norm_sqr()).exp());
    let d = ComplexGrid::from_fn(spec, |z| -z.conj() * (-z.norm_sqr()).exp());
    let t = beurling_transform(&dbar)?;
    let err = t
        .values
        .iter()
        .zip(&d.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / d.sup_norm();
    let spec = GridSpec::new(128, 2.0)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut h = ComplexGrid::zeros(spec);
    let mut sum = ZERO;
    for row in 20..108 {
        for col in 20..108 {
            let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            h.set(row, col, v);
            sum += v;
        }
    }
    h.set(64, 64, h.get(64, 64) - sum);
    let iso = (beurling_transform(&h)?.l2_norm() - h.l2_norm()).abs() / h.l2_norm();
    outcome(
        err <= 1e-6 && iso <= 1e-10,
        format!("identity error {err:.1e}, isometry defect {iso:.1e}"),
    )
}
