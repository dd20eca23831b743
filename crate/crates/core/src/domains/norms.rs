use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::{boundary_clustered_nodes, panel_nodes, RadialNode};
use super::{BeltramiCoefficient, DomainTag, HolomorphicFunction, LaurentSeries, Mobius, Support};
use crate::error::{Error, Result};

/// A norm value together with its refinement history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    #[serde(with = "extended_real")]
    pub value: f64,
    pub divergent: bool,
    #[serde(with = "extended_real")]
    pub error_estimate: f64,
    /// `(resolution, value)` per ladder level.
    pub ladder: Vec<(usize, f64)>,
}

impl NormReport {
    /// A value known without quadrature.
    pub fn exact(value: f64) -> Self {
        NormReport {
            value,
            divergent: false,
            error_estimate: 0.0,
            ladder: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.divergent && self.value.is_finite()
    }
}

mod extended_real {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// Divergence test applied to a refinement ladder.
///
/// The monitored quantities are the raw integrals (before the `1/p` root) or
/// suprema; a ladder is divergent when each of the last two steps grows by
/// more than `growth`.  Ladders whose final norm is below `noise_floor`
/// are rounding noise and never count as divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRule {
    pub growth: f64,
    pub noise_floor: f64,
}

impl Default for LadderRule {
    fn default() -> Self {
        LadderRule {
            growth: 0.1,
            noise_floor: 1e-10,
        }
    }
}

impl LadderRule {
    pub fn is_divergent(&self, monitored: &[f64]) -> bool {
        let n = monitored.len();
        if n < 3 {
            return false;
        }
        monitored[n - 3..].windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            if !b.is_finite() {
                return true;
            }
            a > 0.0 && b > (1.0 + self.growth) * a
        })
    }

    pub fn report(&self, ladder: Vec<(usize, f64)>, monitored: &[f64]) -> NormReport {
        let noise = ladder.last().is_some_and(|l| l.1.abs() < self.noise_floor);
        if !noise && self.is_divergent(monitored) {
            return NormReport {
                value: f64::INFINITY,
                divergent: true,
                error_estimate: f64::INFINITY,
                ladder,
            };
        }
        let n = ladder.len();
        let value = ladder[n - 1].1;
        let gap = if n >= 2 {
            (value - ladder[n - 2].1).abs()
        } else {
            0.0
        };
        NormReport {
            value,
            divergent: false,
            error_estimate: gap + 1e-14 * value.abs(),
            ladder,
        }
    }
}

const LEVELS: usize = 3;

fn require_p(p: f64, min: f64, strict: bool) -> Result<()> {
    let ok = if strict { p > min } else { p >= min };
    if !ok || !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: if strict {
                "must exceed 1"
            } else {
                "must be at least 1"
            },
        });
    }
    Ok(())
}

fn root(integral: f64, p: f64) -> f64 {
    if integral <= 0.0 {
        0.0
    } else {
        integral.powf(1.0 / p)
    }
}

/// `Σ_r Σ_θ f(z, node) w` with a midpoint-shifted trapezoid rule in angle.
fn polar_sum(
    nodes: &[RadialNode],
    angles: usize,
    f: impl Fn(Complex64, &RadialNode) -> f64,
) -> f64 {
    let dt = TAU / angles as f64;
    let rot: Vec<Complex64> = (0..angles)
        .map(|k| Complex64::from_polar(1.0, (k as f64 + 0.5) * dt))
        .collect();
    let mut total = 0.0;
    for node in nodes {
        let mut ring = 0.0;
        for e in &rot {
            ring += f(e * node.r, node);
        }
        total += ring * dt * node.w;
    }
    total
}

/// Gauss nodes on `[0, r_max]` split at `breaks`.
fn interior_nodes(r_max: f64, breaks: &[f64], panels: usize, per_panel: usize) -> Vec<RadialNode> {
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < r_max));
    edges.push(r_max);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let mut out = Vec::new();
    for w in edges.windows(2) {
        for (r, wt) in panel_nodes(w[0], w[1], panels, per_panel) {
            out.push(RadialNode {
                r,
                s: 1.0 - r,
                w: wt,
            });
        }
    }
    out
}

/// `(∫_D |μ|^p (1-|z|^2)^{-2} dA)^{1/p}`; half-plane coefficients are pulled back by the Cayley map.
pub fn mp_norm(mu: &BeltramiCoefficient, p: f64) -> Result<NormReport> {
    require_p(p, 1.0, false)?;
    let cayley = Mobius::cayley();
    let pulled = match mu.domain() {
        DomainTag::UnitDisk => false,
        DomainTag::UpperHalfPlane => true,
        DomainTag::Plane => return Err(Error::NoHyperbolicDensity(DomainTag::Plane)),
        found => {
            return Err(Error::DomainMismatch {
                expected: "unit_disk or upper_half_plane",
                found,
            })
        }
    };
    if mu.is_zero() {
        return Ok(NormReport::exact(0.0));
    }
    let modulus = |z: Complex64| {
        if pulled {
            mu.eval(cayley.apply(z)).norm()
        } else {
            mu.eval(z).norm()
        }
    };
    let compact = match (pulled, mu.support()) {
        (false, Support::Radius(r)) if r < 1.0 => Some(r),
        _ => None,
    };
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let angles = 64 << level;
        let nodes = match compact {
            Some(r0) => interior_nodes(r0, mu.radial_breaks(), 4 << level, 8),
            None => boundary_clustered_nodes(8 << level, 8, mu.radial_breaks()),
        };
        let integral = polar_sum(&nodes, angles, |z, n| {
            let m = modulus(z);
            if m == 0.0 {
                return 0.0;
            }
            let weight = 1.0 / (n.s * (1.0 + n.r)).powi(2);
            m.powf(p) * weight * n.r
        });
        integrals.push(integral);
        ladder.push((angles, root(integral, p)));
    }
    Ok(LadderRule::default().report(ladder, &integrals))
}

/// Highest order whose coefficient is not negligible against the largest one.
fn effective_top(series: &LaurentSeries) -> i32 {
    let scale = series.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut top = series.max_order();
    while top > series.min_order && series.coefficient(top).norm() <= 1e-13 * scale {
        top -= 1;
    }
    top
}

/// Coefficients of `ψ(w) = w^{-4} φ(1/w)`, a power series when `φ = O(z^{-4})`.
fn inverted_coefficients(series: &LaurentSeries) -> Vec<Complex64> {
    let top = effective_top(series).min(-4);
    (series.min_order..=top)
        .rev()
        .map(|n| series.coefficient(n))
        .collect()
}

fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
}

fn is_zero_function(phi: &HolomorphicFunction) -> bool {
    phi.series()
        .map(|s| s.coeffs.iter().all(|c| c.norm() == 0.0))
        .unwrap_or(false)
}

fn expect_exterior(phi: &HolomorphicFunction) -> Result<()> {
    if phi.domain() != DomainTag::ExteriorDisk {
        return Err(Error::DomainMismatch {
            expected: "exterior_disk",
            found: phi.domain(),
        });
    }
    Ok(())
}

/// Sup of `g` over samples of the polar box `[r_lo, r_hi] x [0, 2π)`, refined by compass search.
fn polar_sup(
    r_lo: f64,
    r_hi: f64,
    radial: usize,
    angles: usize,
    g: &dyn Fn(f64, f64) -> f64,
) -> f64 {
    let dr = (r_hi - r_lo) / radial as f64;
    let dt = TAU / angles as f64;
    let mut best = (g(r_lo, 0.0), r_lo, 0.0);
    for i in 0..=radial {
        let r = r_lo + i as f64 * dr;
        for k in 0..angles {
            let t = k as f64 * dt;
            let v = g(r, t);
            if v > best.0 {
                best = (v, r, t);
            }
        }
    }
    let (mut v, mut r, mut t) = best;
    let (mut sr, mut st) = (dr, dt);
    while sr > 1e-12 * (r_hi - r_lo).max(1.0) || st > 1e-12 {
        let mut moved = false;
        for (a, b) in [(sr, 0.0), (-sr, 0.0), (0.0, st), (0.0, -st)] {
            let rr = (r + a).clamp(r_lo, r_hi);
            let tt = t + b;
            let vv = g(rr, tt);
            if vv > v {
                v = vv;
                r = rr;
                t = tt;
                moved = true;
            }
        }
        if !moved {
            sr *= 0.5;
            st *= 0.5;
        }
    }
    v
}

/// `sup_{|z|>1} (|z|^2 - 1)^2 |φ(z)|` for `φ` on the exterior disk.
pub fn ainf_norm(phi: &HolomorphicFunction) -> Result<NormReport> {
    expect_exterior(phi)?;
    if is_zero_function(phi) {
        return Ok(NormReport::exact(0.0));
    }
    let rule = LadderRule::default();
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut sups = Vec::with_capacity(LEVELS);
    if let Some(series) = phi.series() {
        let top = effective_top(series);
        if top > 0 {
            return Err(Error::GrowthAtInfinity("positive Laurent order"));
        }
        if top <= -4 {
            // Bounded in the chart w = 1/z: (1-|w|^2)^2 |ψ(w)|.
            let psi = inverted_coefficients(series);
            let g = |t: f64, a: f64| {
                let w = Complex64::from_polar(t, a);
                (1.0 - t * t).powi(2) * horner(&psi, w).norm()
            };
            for level in 0..LEVELS {
                let n = 32 << level;
                let v = polar_sup(0.0, 1.0, n, 2 * n, &g);
                sups.push(v);
                ladder.push((n, v));
            }
            return Ok(rule.report(ladder, &sups));
        }
    }
    // Growing outer radius; the ladder detects growth at infinity.
    for level in 0..LEVELS {
        let big_r = 4.0 * (1 << level) as f64;
        let n = 64 << level;
        let g = |r: f64, a: f64| {
            let z = Complex64::from_polar(r, a);
            (r * r - 1.0).powi(2) * phi.eval(z).norm()
        };
        let v = polar_sup(1.0 + 1e-9, big_r, n, 2 * n, &g);
        sups.push(v);
        ladder.push((n, v));
    }
    Ok(rule.report(ladder, &sups))
}

/// Radial nodes on `1 < r <= r_max`, geometrically clustered at `r = 1`.
fn shell_nodes(r_max: f64, depth: usize, outer_panels: usize, per_panel: usize) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    for j in (0..depth).rev() {
        edges.push(0.5f64.powi(j as i32 + 1));
    }
    let span = r_max - 1.0;
    let start = 0.5;
    for k in 0..=outer_panels {
        edges.push(start + (span - start) * k as f64 / outer_panels as f64);
    }
    edges.dedup();
    let mut out = Vec::new();
    for w in edges.windows(2) {
        for (s, wt) in panel_nodes(w[0], w[1], 1, per_panel) {
            out.push((1.0 + s, wt));
        }
    }
    out
}

/// Radius separating the direct quadrature from the tail handled in `w = 1/z`.
pub const AP_OUTER_RADIUS: f64 = 8.0;

/// `(∫_{D*} (|z|^2-1)^{2p-2} |φ|^p dA)^{1/p}`.
///
/// The region `1 < |z| <= 8` is integrated directly.  Series with `φ = O(z^{-4})`
/// have their tail integrated in `w = 1/z`; other representations receive the
/// bound `M^p π / R^2` with `M = max_{|z|=R} |z|^4 |φ|`, split between value
/// and error estimate.
pub fn ap_norm(phi: &HolomorphicFunction, p: f64) -> Result<NormReport> {
    require_p(p, 1.0, false)?;
    expect_exterior(phi)?;
    if is_zero_function(phi) {
        return Ok(NormReport::exact(0.0));
    }
    let big_r = AP_OUTER_RADIUS;
    let psi = match phi.series() {
        Some(series) => {
            if effective_top(series) > -4 {
                return Err(Error::GrowthAtInfinity("A_p requires decay like |z|^-4"));
            }
            Some(inverted_coefficients(series))
        }
        None => None,
    };
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    let mut tail_errors = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let angles = 64 << level;
        let per_panel = 6 + 4 * level;
        let radial: Vec<RadialNode> = shell_nodes(big_r, 24, 8 << level, per_panel)
            .into_iter()
            .map(|(r, w)| RadialNode { r, s: r - 1.0, w })
            .collect();
        let body = polar_sum(&radial, angles, |z, n| {
            let weight = (n.s * (n.r + 1.0)).powf(2.0 * p - 2.0);
            weight * phi.eval(z).norm().powf(p) * n.r
        });
        let (tail, tail_err) = match &psi {
            Some(psi) => {
                let nodes: Vec<RadialNode> = panel_nodes(0.0, 1.0 / big_r, 2 << level, 8)
                    .into_iter()
                    .map(|(r, w)| RadialNode { r, s: 1.0 - r, w })
                    .collect();
                let t = polar_sum(&nodes, angles, |w, n| {
                    (n.s * (1.0 + n.r)).powf(2.0 * p - 2.0) * horner(psi, w).norm().powf(p) * n.r
                });
                (t, 0.0)
            }
            None => {
                let m = (0..256)
                    .map(|k| {
                        let z = Complex64::from_polar(big_r, TAU * k as f64 / 256.0);
                        big_r.powi(4) * phi.eval(z).norm()
                    })
                    .fold(0.0, f64::max);
                let bound = m.powf(p) * PI / (big_r * big_r);
                (0.5 * bound, 0.5 * bound)
            }
        };
        let integral = body + tail;
        integrals.push(integral);
        tail_errors.push(tail_err);
        ladder.push((angles, root(integral, p)));
    }
    let mut report = LadderRule::default().report(ladder, &integrals);
    if !report.divergent {
        let j = integrals[LEVELS - 1];
        report.error_estimate += root(j + tail_errors[LEVELS - 1], p) - root(j, p);
    }
    Ok(report)
}

/// `(∫_D (1-|z|^2)^{2p-2} |φ|^p dA)^{1/p}` for `φ` holomorphic on the disk.
pub fn ap_norm_disk(phi: &HolomorphicFunction, p: f64) -> Result<NormReport> {
    require_p(p, 1.0, false)?;
    if phi.domain() != DomainTag::UnitDisk {
        return Err(Error::DomainMismatch {
            expected: "unit_disk",
            found: phi.domain(),
        });
    }
    if is_zero_function(phi) {
        return Ok(NormReport::exact(0.0));
    }
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let angles = 64 << level;
        let nodes = boundary_clustered_nodes(8 << level, 8, &[]);
        let integral = polar_sum(&nodes, angles, |z, n| {
            (n.s * (1.0 + n.r)).powf(2.0 * p - 2.0) * phi.eval(z).norm().powf(p) * n.r
        });
        integrals.push(integral);
        ladder.push((angles, root(integral, p)));
    }
    Ok(LadderRule::default().report(ladder, &integrals))
}

/// `(∫ |φ'|^p (1-|z|^2)^{p-2} dA)^{1/p}` on the disk, or with weight
/// `(2 Im ζ)^{p-2}` on the upper half-plane.
pub fn analytic_besov_norm(phi: &HolomorphicFunction, p: f64) -> Result<NormReport> {
    let d = |z: Complex64| phi.derivative_at(z);
    besov_from_derivative(phi.domain(), &d, p)
}

/// Analytic Besov norm given only the derivative `dphi`.
pub(crate) fn besov_from_derivative(
    domain: DomainTag,
    dphi: &dyn Fn(Complex64) -> Complex64,
    p: f64,
) -> Result<NormReport> {
    require_p(p, 1.0, true)?;
    match domain {
        DomainTag::UnitDisk => Ok(disk_besov(dphi, p)),
        DomainTag::UpperHalfPlane => Ok(half_plane_besov(dphi, p)),
        found => Err(Error::DomainMismatch {
            expected: "unit_disk or upper_half_plane",
            found,
        }),
    }
}

fn disk_besov(dphi: &dyn Fn(Complex64) -> Complex64, p: f64) -> NormReport {
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let angles = 64 << level;
        let depth = 16 << level;
        let nodes = boundary_clustered_nodes(depth, 8, &[]);
        let mut integral = polar_sum(&nodes, angles, |z, n| {
            dphi(z).norm().powf(p) * (n.s * (1.0 + n.r)).powf(p - 2.0) * n.r
        });
        // Omitted strip s < ε, with (1-r^2) ≈ 2s and φ' frozen at r = 1 - ε.
        let eps = 0.5f64.powi(depth as i32);
        let edge = [RadialNode {
            r: 1.0 - eps,
            s: eps,
            w: 1.0,
        }];
        let ring = polar_sum(&edge, angles, |z, _| dphi(z).norm().powf(p));
        integral += ring * 2f64.powf(p - 2.0) * eps.powf(p - 1.0) / (p - 1.0);
        integrals.push(integral);
        ladder.push((angles, root(integral, p)));
    }
    LadderRule::default().report(ladder, &integrals)
}

fn half_plane_besov(dphi: &dyn Fn(Complex64) -> Complex64, p: f64) -> NormReport {
    // ζ = tan(a) + i tan(b), a ∈ (-π/2, π/2), b ∈ (0, π/2), with clustering at b = 0.
    let half = 0.5 * PI;
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        let a_nodes = panel_nodes(-half, half, 32 << level, 8);
        let depth = 12 << level;
        let b_nodes = boundary_clustered_nodes(depth, 8, &[]);
        let mut integral = 0.0;
        for node in &b_nodes {
            let b = half * node.s;
            let wb = half * node.w;
            let y = b.tan();
            let jb = 1.0 / b.cos().powi(2);
            let weight = (2.0 * y).powf(p - 2.0);
            let mut line = 0.0;
            for &(a, wa) in &a_nodes {
                let x = a.tan();
                let ja = 1.0 / a.cos().powi(2);
                line += wa * ja * dphi(Complex64::new(x, y)).norm().powf(p);
            }
            integral += line * wb * jb * weight;
        }
        // Strip 0 < b < ε with tan b ≈ b and φ' frozen at the strip edge.
        let eps = half * 0.5f64.powi(depth as i32);
        let y = eps.tan();
        let mut line = 0.0;
        for &(a, wa) in &a_nodes {
            let ja = 1.0 / a.cos().powi(2);
            line += wa * ja * dphi(Complex64::new(a.tan(), y)).norm().powf(p);
        }
        integral += line * 2f64.powf(p - 2.0) * eps.powf(p - 1.0) / (p - 1.0);
        integrals.push(integral);
        ladder.push((a_nodes.len(), root(integral, p)));
    }
    LadderRule::default().report(ladder, &integrals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{cayley, CayleyDirection, CayleyObject};
    use proptest::prelude::*;

    fn disk(k: f64, r: f64) -> BeltramiCoefficient {
        BeltramiCoefficient::constant_disk(Complex64::new(k, 0.0), r).unwrap()
    }

    #[test]
    fn mp_closed_form() {
        let rep = mp_norm(&disk(0.3, 0.5), 2.0).unwrap();
        let exact = 0.3 * (PI * 0.25 / 0.75f64).sqrt();
        assert!(!rep.divergent);
        assert!((rep.value - exact).abs() < 1e-10, "{rep:?}");
        assert!((rep.value - 0.30700).abs() < 1e-5);
        assert!(rep.error_estimate >= (rep.ladder[2].1 - rep.ladder[1].1).abs());
    }

    #[test]
    fn mp_zero_and_constant() {
        assert_eq!(
            mp_norm(&BeltramiCoefficient::zero(DomainTag::UnitDisk), 2.0)
                .unwrap()
                .value,
            0.0
        );
        let full = disk(0.3, 1.0);
        for p in [1.0, 2.0, 3.0] {
            let rep = mp_norm(&full, p).unwrap();
            assert!(rep.divergent, "{rep:?}");
            assert_eq!(rep.ladder.len(), 3);
        }
    }

    #[test]
    fn mp_rejects_bad_input() {
        assert!(matches!(
            mp_norm(&disk(0.3, 0.5), 0.5),
            Err(Error::InvalidExponent { .. })
        ));
        let plane = disk(0.3, 0.5).on_plane();
        assert!(matches!(
            mp_norm(&plane, 2.0),
            Err(Error::NoHyperbolicDensity(_))
        ));
    }

    #[test]
    fn mp_is_cayley_invariant() {
        let mu = disk(0.2, 0.5);
        let CayleyObject::Beltrami(nu) = cayley(
            CayleyObject::Beltrami(mu.clone()),
            CayleyDirection::DiskToHalfPlane,
        )
        .unwrap() else {
            panic!()
        };
        let a = mp_norm(&mu, 2.0).unwrap().value;
        let b = mp_norm(&nu, 2.0).unwrap().value;
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
    }

    /// Dense independent sampling of (|z|^2-1)^2 |φ| on a radial grid.
    fn brute_sup(k: f64, r: f64, nr: usize, nt: usize) -> f64 {
        let c = k * r * r;
        let mut best: f64 = 0.0;
        for i in 1..=nr {
            let u = i as f64 / (nr + 1) as f64;
            let rho = 1.0 + u * u / (1.0 - u).powi(3);
            for j in 0..nt {
                let z = Complex64::from_polar(rho, TAU * j as f64 / nt as f64);
                let v = (rho * rho - 1.0).powi(2) * (6.0 * c / (z * z - c).powi(2)).norm();
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn ainf_matches_dense_sampling() {
        let phi = HolomorphicFunction::disk_schwarzian(Complex64::new(0.075, 0.0), 80);
        let rep = ainf_norm(&phi).unwrap();
        let coarse = brute_sup(0.3, 0.5, 400, 720);
        let fine = brute_sup(0.3, 0.5, 1600, 1440);
        assert!((coarse - fine).abs() / fine < 1e-2, "{coarse} {fine}");
        assert!(
            (rep.value - fine).abs() / fine < 1e-2,
            "{} vs {fine}",
            rep.value
        );
        assert!(rep.value >= fine * (1.0 - 1e-9));
    }

    #[test]
    fn ainf_constant_diverges_and_growth_rejected() {
        let one = HolomorphicFunction::from_series(
            LaurentSeries::new(
                Complex64::new(0.0, 0.0),
                0,
                vec![Complex64::new(1.0, 0.0)],
                1.0,
                f64::INFINITY,
            ),
            DomainTag::ExteriorDisk,
        );
        assert!(ainf_norm(&one).unwrap().divergent);
        let z = HolomorphicFunction::inversion_map(Complex64::new(0.1, 0.0));
        assert!(matches!(ainf_norm(&z), Err(Error::GrowthAtInfinity(_))));
        assert_eq!(
            ainf_norm(&HolomorphicFunction::zero(DomainTag::ExteriorDisk))
                .unwrap()
                .value,
            0.0
        );
    }

    /// Midpoint rule on 1 < |z| < 60 in polar coordinates.
    fn brute_ap(c: f64, p: f64) -> f64 {
        let (nr, nt) = (24000usize, 256usize);
        let mut total = 0.0;
        let h = 59.0 / nr as f64;
        for i in 0..nr {
            let rho = 1.0 + (i as f64 + 0.5) * h;
            let mut ring = 0.0;
            for j in 0..nt {
                let z = Complex64::from_polar(rho, TAU * (j as f64 + 0.5) / nt as f64);
                ring += (6.0 * c / (z * z - c).powi(2)).norm().powf(p);
            }
            total += ring * (TAU / nt as f64) * (rho * rho - 1.0).powf(2.0 * p - 2.0) * rho * h;
        }
        total.powf(1.0 / p)
    }

    #[test]
    fn ap_matches_brute_force() {
        let phi = HolomorphicFunction::disk_schwarzian(Complex64::new(0.075, 0.0), 80);
        for p in [1.0, 2.0] {
            let rep = ap_norm(&phi, p).unwrap();
            let oracle = brute_ap(0.075, p);
            assert!(!rep.divergent);
            assert!(
                (rep.value - oracle).abs() / oracle < 1e-3,
                "p={p}: {} vs {oracle}",
                rep.value
            );
        }
        let one = HolomorphicFunction::inversion_map(Complex64::new(0.1, 0.0));
        assert!(ap_norm(&one, 2.0).is_err());
    }

    #[test]
    fn besov_closed_forms() {
        let z = HolomorphicFunction::monomial(1);
        let z2 = HolomorphicFunction::monomial(2);
        let a = analytic_besov_norm(&z, 2.0).unwrap().value;
        let b = analytic_besov_norm(&z2, 2.0).unwrap().value;
        assert!((a - PI.sqrt()).abs() < 1e-9, "{a}");
        assert!((b - (2.0 * PI).sqrt()).abs() < 1e-9, "{b}");
        let c = HolomorphicFunction::taylor(vec![Complex64::new(3.0, 0.0)], f64::INFINITY);
        assert_eq!(analytic_besov_norm(&c, 2.0).unwrap().value, 0.0);
        assert!(analytic_besov_norm(&z, 1.0).is_err());
    }

    #[test]
    fn besov_cayley_invariance() {
        let z = HolomorphicFunction::monomial(1);
        let CayleyObject::Holomorphic(zu) = cayley(
            CayleyObject::Holomorphic(z.clone()),
            CayleyDirection::DiskToHalfPlane,
        )
        .unwrap() else {
            panic!()
        };
        for p in [1.5, 2.0, 3.0] {
            let a = analytic_besov_norm(&z, p).unwrap().value;
            let b = analytic_besov_norm(&zu, p).unwrap().value;
            assert!((a - b).abs() / a < 1e-2, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn report_json_shape() {
        let rep = mp_norm(&disk(0.3, 1.0), 2.0).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["value"], "inf");
        assert!(v["ladder"][0].is_array());
        let back: NormReport = serde_json::from_value(v).unwrap();
        assert!(back.value.is_infinite() && back.divergent);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn mp_scales_linearly(c in 0.05f64..3.0, p in 1.0f64..3.0) {
            let mu = disk(0.3, 0.6);
            let base = mp_norm(&mu, p).unwrap().value;
            let scaled = mp_norm(&mu.scaled(Complex64::new(c, 0.0)).unwrap(), p).unwrap().value;
            prop_assert!((scaled - c * base).abs() <= 1e-9 * c * base);
        }
    }
}
