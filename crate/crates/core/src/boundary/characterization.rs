use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::besov::besov_integral;
use super::extension::{ba_extend, gaussian_extension_integral, ExtensionKernel};
use super::function::{BoundaryDomain, BoundaryHomeomorphism};
use super::trace::{boundary_trace_with, TraceOptions};
use super::welding::{log_derivative, welding_with, WeldingOptions};
use crate::bers::{bers_map_with, BersOptions};
use crate::domains::{
    besov_from_derivative, mp_norm, transport_coefficient, BeltramiCoefficient, CayleyDirection,
    CoefficientKind, DomainTag, HolomorphicFunction, LadderRule, NormReport,
};
use crate::error::{Error, Result};
use crate::solver::QuasiconformalMap;

/// Largest Bers-image distance on `|z| = 2` at which the extension counts as
/// the same class as `μ`.
pub const ROUNDTRIP_TOL: f64 = 0.1;

const ROUNDTRIP_CIRCLE: [f64; 1] = [2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CharacterizationOptions {
    pub welding: WeldingOptions,
    pub bers: BersOptions,
    /// Skip the Bers-image comparison.
    pub skip_roundtrip: bool,
}

impl Default for CharacterizationOptions {
    fn default() -> Self {
        CharacterizationOptions {
            welding: WeldingOptions {
                truncation: 32.0,
                samples: 4096,
                ..WeldingOptions::default()
            },
            bers: BersOptions::default(),
            skip_roundtrip: false,
        }
    }
}

/// Outcome of one stage: a norm or the error that stopped it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stage {
    pub norm: Option<NormReport>,
    pub error: Option<String>,
}

impl Stage {
    fn from(r: Result<NormReport>) -> Self {
        match r {
            Ok(n) => Stage {
                norm: Some(n),
                error: None,
            },
            Err(e) => Stage::failed(e),
        }
    }

    fn failed(e: Error) -> Self {
        Stage {
            norm: None,
            error: Some(e.to_string()),
        }
    }

    /// `Some(true)` for a finite norm, `Some(false)` for a divergent one.
    pub fn finite(&self) -> Option<bool> {
        self.norm.as_ref().map(|n| !n.divergent)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Roundtrip {
    pub distance: Option<f64>,
    pub equivalent: Option<bool>,
    /// Why the comparison was not run.
    pub skipped: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub p: f64,
    /// `‖μ‖_p`.
    pub mu_norm: Stage,
    /// Besov seminorm of `log h'` on the line.
    pub besov: Stage,
    /// `‖Λ h‖_p` of the extension.
    pub extension: Stage,
    pub roundtrip: Roundtrip,
    /// `sup |h - trace(f^μ)|`, absent for closed-form boundary maps.
    pub welding_consistency: Option<f64>,
    pub log_derivative_gap: Option<f64>,
    /// All three finiteness verdicts are available and agree.
    pub coherent: bool,
}

/// `f^μ|_R` from welding, or from the closed form for power maps.
pub fn boundary_map(
    mu: &BeltramiCoefficient,
    opts: &CharacterizationOptions,
) -> Result<(BoundaryHomeomorphism, Option<f64>)> {
    if let CoefficientKind::PowerMap { alpha } = *mu.kind() {
        let f = QuasiconformalMap::power(alpha)?;
        let trace = boundary_trace_with(
            &f,
            &TraceOptions {
                samples: opts.welding.samples,
                truncation: opts.welding.truncation,
                ..TraceOptions::default()
            },
        )?;
        let h = trace
            .homeomorphism()
            .cloned()
            .ok_or_else(|| Error::Invalid("power map trace is not a homeomorphism".into()))?;
        return Ok((h, None));
    }
    let w = welding_with(mu, &opts.welding)?;
    Ok((w.h, Some(w.consistency)))
}

/// `h` restricted to `|x| <= T/4 2^level`, keeping every `2^{2-level}`-th sample.
fn restricted(h: &BoundaryHomeomorphism, level: usize) -> Result<BoundaryHomeomorphism> {
    let BoundaryDomain::Line { truncation } = h.domain else {
        return Err(Error::Invalid(
            "extension needs a line homeomorphism".into(),
        ));
    };
    let t = truncation / (1 << (2 - level)) as f64;
    let stride = 1 << (2 - level);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, (&x, &y)) in h.params().iter().zip(h.values()).enumerate() {
        if x.abs() <= t && i % stride == 0 {
            xs.push(x);
            ys.push(y);
        }
    }
    BoundaryHomeomorphism::new(
        BoundaryDomain::Line { truncation: t },
        xs,
        ys,
        h.normalization,
    )
}

/// Besov seminorm of `log h'` along the same ladder as [`extension_norm`].
///
/// Difference quotients are taken at each level's own spacing, so both the
/// small and the large scales grow with the level.  Returns the report and
/// the two-resolution gap of `log h'` at the finest level.
pub fn log_besov(h: &BoundaryHomeomorphism, p: f64) -> Result<(NormReport, f64)> {
    let mut ladder = Vec::with_capacity(3);
    let mut integrals = Vec::with_capacity(3);
    let (mut spread, mut gap) = (0.0, 0.0);
    for level in 0..3 {
        let l = log_derivative(&restricted(h, level)?)?;
        let (j, s) = besov_integral(&l.function, p)?;
        integrals.push(j);
        ladder.push((l.function.len(), j.max(0.0).powf(1.0 / p)));
        spread = s;
        gap = l.resolution_gap;
    }
    let mut report = LadderRule::default().report(ladder, &integrals);
    if !report.divergent {
        let j = integrals[2].max(0.0);
        report.error_estimate += (j + spread).powf(1.0 / p) - j.powf(1.0 / p);
    }
    Ok((report, gap))
}

/// `‖Λ h‖_p` along a truncation ladder `T/4, T/2, T` with the spacing halved
/// at each step.  Heights below the sample spacing are not resolved by the
/// data and are left out.
pub fn extension_norm(h: &BoundaryHomeomorphism, p: f64) -> Result<NormReport> {
    let mut ladder = Vec::with_capacity(3);
    let mut integrals = Vec::with_capacity(3);
    for level in 0..3 {
        let hl = restricted(h, level)?;
        ba_extend(&hl, ExtensionKernel::Gaussian)?;
        let spacing = hl.params()[1] - hl.params()[0];
        let j = gaussian_extension_integral(&hl, p, spacing)?;
        integrals.push(j);
        ladder.push((hl.len(), j.powf(1.0 / p)));
    }
    Ok(LadderRule::default().report(ladder, &integrals))
}

fn roundtrip(
    mu: &BeltramiCoefficient,
    h: &BoundaryHomeomorphism,
    opts: &CharacterizationOptions,
) -> Result<f64> {
    let disk_mu = match mu.domain() {
        DomainTag::UnitDisk => mu.clone(),
        _ => transport_coefficient(mu, CayleyDirection::HalfPlaneToDisk)?,
    };
    let ext = transport_coefficient(
        &ba_extend(h, ExtensionKernel::Gaussian)?,
        CayleyDirection::HalfPlaneToDisk,
    )?;
    let a = bers_map_with(&disk_mu, 2.0, &opts.bers)?;
    let b = bers_map_with(&ext, 2.0, &opts.bers)?;
    Ok(a.distance_on(&b, &ROUNDTRIP_CIRCLE, opts.bers.probe_points))
}

/// Runs welding, `log h'`, its Besov seminorm, the extension and its norm,
/// and the Bers-image comparison, recording each stage separately.
pub fn besov_characterization_check(
    mu: &BeltramiCoefficient,
    p: f64,
) -> Result<CharacterizationReport> {
    besov_characterization_check_with(mu, p, &CharacterizationOptions::default())
}

pub fn besov_characterization_check_with(
    mu: &BeltramiCoefficient,
    p: f64,
    opts: &CharacterizationOptions,
) -> Result<CharacterizationReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: "must exceed 1",
        });
    }
    if !matches!(mu.domain(), DomainTag::UnitDisk | DomainTag::UpperHalfPlane) {
        return Err(Error::DomainMismatch {
            expected: "unit disk or upper half-plane",
            found: mu.domain(),
        });
    }
    let mu_norm = Stage::from(mp_norm(mu, p));
    let mut report = CharacterizationReport {
        p,
        mu_norm,
        besov: Stage {
            norm: None,
            error: None,
        },
        extension: Stage {
            norm: None,
            error: None,
        },
        roundtrip: Roundtrip {
            distance: None,
            equivalent: None,
            skipped: None,
            error: None,
        },
        welding_consistency: None,
        log_derivative_gap: None,
        coherent: false,
    };
    let (h, consistency) = match boundary_map(mu, opts) {
        Ok(v) => v,
        Err(e) => {
            report.besov = Stage::failed(e);
            report.extension.error = report.besov.error.clone();
            report.roundtrip.error = report.besov.error.clone();
            return Ok(report);
        }
    };
    report.welding_consistency = consistency;
    report.besov = match log_besov(&h, p) {
        Ok((n, gap)) => {
            report.log_derivative_gap = Some(gap);
            Stage::from(Ok(n))
        }
        Err(e) => Stage::failed(e),
    };
    report.extension = Stage::from(extension_norm(&h, p));
    let divergent = [&report.mu_norm, &report.besov, &report.extension]
        .iter()
        .any(|s| s.finite() == Some(false));
    if opts.skip_roundtrip {
        report.roundtrip.skipped = Some("disabled by options".into());
    } else if divergent {
        report.roundtrip.skipped =
            Some("a norm diverges; the class is outside the p-integrable space".into());
    } else {
        match roundtrip(mu, &h, opts) {
            Ok(d) => {
                report.roundtrip.distance = Some(d);
                report.roundtrip.equivalent = Some(d <= ROUNDTRIP_TOL);
            }
            Err(e) => report.roundtrip.error = Some(e.to_string()),
        }
    }
    let verdicts = [
        report.mu_norm.finite(),
        report.besov.finite(),
        report.extension.finite(),
    ];
    report.coherent =
        verdicts.iter().all(|v| v.is_some()) && verdicts.windows(2).all(|w| w[0] == w[1]);
    Ok(report)
}

/// Zeros minus poles of `g` inside `|z| = r`.
fn winding(g: &dyn Fn(Complex64) -> Complex64, r: f64, n: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = g(Complex64::new(r, 0.0)).arg();
    for k in 1..=n {
        let a = g(Complex64::from_polar(r, TAU * k as f64 / n as f64)).arg();
        let mut d = a - prev;
        d -= TAU * (d / TAU).round();
        total += d;
        prev = a;
    }
    (total / TAU).round() as i64
}

/// Point of smallest `|g|` on a polar grid of the disk `|z| < r`.
fn smallest_modulus(g: &dyn Fn(Complex64) -> Complex64, r: f64) -> Complex64 {
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..=64 {
        let rad = r * i as f64 / 64.0;
        for k in 0..128 {
            let z = Complex64::from_polar(rad, TAU * k as f64 / 128.0);
            let m = g(z).norm();
            if m < best.0 {
                best = (m, z);
            }
        }
    }
    best.1
}

/// Analytic Besov norm of `log f'` on the disk.
///
/// For `f` on the exterior disk the norm is taken of `log F'` with
/// `F(w) = 1/f(1/w)`, which is holomorphic on the disk when `f` is univalent
/// with a pole at infinity.
pub fn prebesov_log_derivative(f: &HolomorphicFunction, p: f64) -> Result<NormReport> {
    const EDGE: f64 = 0.999;
    let (dlog, dfz): (
        Box<dyn Fn(Complex64) -> Complex64>,
        Box<dyn Fn(Complex64) -> Complex64>,
    ) = match f.domain() {
        DomainTag::UnitDisk => (
            Box::new(|z| {
                let [_, d1, d2, _] = f.derivatives(z);
                d2 / d1
            }),
            Box::new(|z| f.derivatives(z)[1]),
        ),
        DomainTag::ExteriorDisk => (
            Box::new(|w: Complex64| {
                let z = 1.0 / w;
                let [f0, d1, d2, _] = f.derivatives(z);
                -z * z * (d2 / d1) - 2.0 * z + 2.0 * z * z * d1 / f0
            }),
            Box::new(|w: Complex64| {
                let z = 1.0 / w;
                let [f0, d1, _, _] = f.derivatives(z);
                d1 / (w * w * f0 * f0)
            }),
        ),
        found => {
            return Err(Error::DomainMismatch {
                expected: "unit disk or exterior disk",
                found,
            })
        }
    };
    let exterior = f.domain() == DomainTag::ExteriorDisk;
    // At w = 0 the exterior expression is evaluated at infinity; stay off the centre.
    let probe = |w: Complex64| {
        if exterior && w.norm() < 1e-6 {
            Complex64::new(1.0, 0.0)
        } else {
            dfz(w)
        }
    };
    if winding(&probe, EDGE, 2048) != 0 {
        let z = smallest_modulus(&probe, EDGE);
        return Err(Error::VanishingDerivative(if exterior {
            1.0 / z
        } else {
            z
        }));
    }
    let d = |w: Complex64| {
        if exterior && w.norm() < 1e-12 {
            Complex64::new(0.0, 0.0)
        } else {
            dlog(w)
        }
    };
    besov_from_derivative(DomainTag::UnitDisk, &d, p)
}
