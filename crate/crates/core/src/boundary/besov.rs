use num_complex::Complex64;
use rayon::prelude::*;

use super::function::{BoundaryDomain, BoundaryFunction};
use crate::domains::{LadderRule, NormReport};
use crate::error::{Error, Result};

/// Excluded diagonal bands, in sample spacings.
pub const BAND_WIDTHS: [usize; 3] = [4, 2, 1];

/// Refinement levels; level `ℓ` uses spacing `h 2^{LEVELS-1-ℓ}`
/// and, on the line, truncation `T 2^{ℓ-LEVELS+1}`.
const LEVELS: usize = 3;

fn pow_p(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// `∬ |u(x₁) - u(x₂)|^p / |x₁ - x₂|²` on uniform samples for each band in [`BAND_WIDTHS`].
///
/// Pairs closer than the band are replaced by `∫ |u'|^p ∫_{|t|<δ} |t|^{p-2} dt`
/// with `δ = (b - 1/2) h`, so every band estimates the full integral.
fn banded_integrals(values: &[Complex64], h: f64, periodic: bool, p: f64) -> [f64; 3] {
    let n = values.len();
    let max_band = BAND_WIDTHS[0];
    // Row sums split into offsets below the widest band and the rest.
    let rows: Vec<([f64; 4], f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut near = [0.0; 4];
            let mut far = 0.0;
            let ui = values[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let k = if periodic {
                    let d = i.abs_diff(j);
                    d.min(n - d)
                } else {
                    i.abs_diff(j)
                };
                let dist = if periodic {
                    2.0 * (0.5 * k as f64 * h).sin()
                } else {
                    k as f64 * h
                };
                let term = pow_p((ui - values[j]).norm(), p) / (dist * dist);
                if k < max_band {
                    near[k] += term;
                } else {
                    far += term;
                }
            }
            (near, far)
        })
        .collect();
    let deriv: Vec<f64> = (0..n)
        .map(|i| {
            let d = if periodic {
                (values[(i + 1) % n] - values[(i + n - 1) % n]) / (2.0 * h)
            } else if i == 0 {
                (values[1] - values[0]) / h
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / h
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            };
            pow_p(d.norm(), p)
        })
        .collect();
    let local: f64 = deriv.iter().sum::<f64>() * h;
    let tail = if periodic {
        0.0
    } else {
        line_tail(values, h, p)
    };
    let mut out = [0.0; 3];
    for (slot, &b) in out.iter_mut().zip(&BAND_WIDTHS) {
        let mut sum = 0.0;
        for (near, far) in &rows {
            sum += far + near[b..max_band].iter().sum::<f64>();
        }
        let delta = (b as f64 - 0.5) * h;
        *slot = sum * h * h + local * 2.0 * delta.powf(p - 1.0) / (p - 1.0) + tail;
    }
    out
}

/// Pairs with one point beyond `±T`, where `u` is continued by its end values.
///
/// Pairs on opposite sides of the segment are not included; they diverge
/// unless both end values agree and then contribute nothing.
fn line_tail(values: &[Complex64], h: f64, p: f64) -> f64 {
    let n = values.len();
    let t = 0.5 * n as f64 * h;
    let (left, right) = (values[0], values[n - 1]);
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let x = -t + (i as f64 + 0.5) * h;
        sum += pow_p((v - right).norm(), p) / (t - x) + pow_p((v - left).norm(), p) / (t + x);
    }
    2.0 * sum * h
}

fn sampled(u: &BoundaryFunction, level: usize) -> Result<(Vec<Complex64>, f64, bool)> {
    let n = u.len();
    let shrink = 1usize << (LEVELS - 1 - level);
    match u.domain {
        BoundaryDomain::Circle => {
            let m = n / shrink;
            if m < 8 {
                return Err(Error::Invalid(format!("{n} circle samples are too few")));
            }
            let v = u.resampled(m)?;
            Ok((v.values().to_vec(), std::f64::consts::TAU / m as f64, true))
        }
        BoundaryDomain::Line { truncation } => {
            let t = truncation / shrink as f64;
            let m = n / (shrink * shrink);
            if m < 8 {
                return Err(Error::Invalid(format!("{n} line samples are too few")));
            }
            let v = BoundaryFunction::line_from_fn(t, m, |x| u.eval(x))?;
            Ok((v.values().to_vec(), 2.0 * t / m as f64, false))
        }
    }
}

/// Raw integral and band spread of equispaced samples, without a ladder.
pub(crate) fn besov_integral(u: &BoundaryFunction, p: f64) -> Result<(f64, f64)> {
    let periodic = u.domain == BoundaryDomain::Circle;
    let (values, h) = match u.uniform_spacing() {
        Some(h) => (u.values().to_vec(), h),
        None => {
            let v = u.resampled(u.len())?;
            let h = v.uniform_spacing().expect("canonical layout is uniform");
            (v.values().to_vec(), h)
        }
    };
    let bands = banded_integrals(&values, h, periodic, p);
    let value = bands[BAND_WIDTHS.len() - 1];
    let spread = bands.iter().map(|b| (b - value).abs()).fold(0.0, f64::max);
    Ok((value, spread))
}

/// `(∬ |u(x₁) - u(x₂)|^p / |x₁ - x₂|² |dx₁| |dx₂|)^{1/p}` on the circle or the line.
///
/// The ladder refines the spacing (and on the line doubles the truncation)
/// at each level; divergence is judged on the raw integrals.  The error
/// estimate combines the band spread and the last ladder step.
pub fn besov_seminorm(u: &BoundaryFunction, p: f64) -> Result<NormReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: "must exceed 1",
        });
    }
    let first = u.values()[0];
    if u.values().iter().all(|&v| v == first) {
        return Ok(NormReport::exact(0.0));
    }
    let mut ladder = Vec::with_capacity(LEVELS);
    let mut integrals = Vec::with_capacity(LEVELS);
    let mut spread = 0.0;
    for level in 0..LEVELS {
        let (values, h, periodic) = sampled(u, level)?;
        let bands = banded_integrals(&values, h, periodic, p);
        let value = bands[BAND_WIDTHS.len() - 1];
        spread = bands.iter().map(|b| (b - value).abs()).fold(0.0, f64::max);
        integrals.push(value);
        ladder.push((values.len(), value.max(0.0).powf(1.0 / p)));
    }
    let mut report = LadderRule::default().report(ladder, &integrals);
    if !report.divergent {
        let j = integrals[LEVELS - 1].max(0.0);
        report.error_estimate += (j + spread).powf(1.0 / p) - j.powf(1.0 / p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_has_zero_seminorm() {
        let u = BoundaryFunction::circle_from_fn(64, |_| Complex64::new(2.0, 1.0)).unwrap();
        assert_eq!(besov_seminorm(&u, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let u = BoundaryFunction::circle_from_fn(64, |t| Complex64::from_polar(1.0, t)).unwrap();
        assert!(matches!(
            besov_seminorm(&u, 1.0),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn circle_identity_at_p_two() {
        // |e^{iθ₁} - e^{iθ₂}| equals the chord, so the integrand is 1 on S x S.
        let u = BoundaryFunction::circle_from_fn(1024, |t| Complex64::from_polar(1.0, t)).unwrap();
        let r = besov_seminorm(&u, 2.0).unwrap();
        assert!((r.value - TAU).abs() < 1e-6 * TAU, "{}", r.value);
        assert!(!r.divergent);
    }

    #[test]
    fn second_power_at_p_two() {
        // |e^{2iθ₁} - e^{2iθ₂}|² / |e^{iθ₁} - e^{iθ₂}|² = 2 + 2 cos(θ₁ - θ₂).
        let u = BoundaryFunction::circle_from_fn(1024, |t| Complex64::from_polar(1.0, 2.0 * t))
            .unwrap();
        let r = besov_seminorm(&u, 2.0).unwrap();
        let exact = (8.0 * PI * PI).sqrt();
        assert!(
            (r.value - exact).abs() < 1e-3 * exact,
            "{} {exact}",
            r.value
        );
    }

    #[test]
    fn other_exponents_on_the_circle() {
        // For u = e^{iθ} the integrand is |chord|^{p-2}; ∫₀^{2π} (2 sin(t/2))^{p-2} dt
        // is 2π Γ(p-1)/Γ(p/2)², which is 8 at p = 3.
        let u = BoundaryFunction::circle_from_fn(1024, |t| Complex64::from_polar(1.0, t)).unwrap();
        let r = besov_seminorm(&u, 3.0).unwrap();
        let exact = (TAU * 8.0f64).powf(1.0 / 3.0);
        assert!(
            (r.value - exact).abs() < 1e-3 * exact,
            "{} {exact}",
            r.value
        );
        // Γ(1/2)/Γ(3/4)² at p = 1.5.
        let r = besov_seminorm(&u, 1.5).unwrap();
        let exact = (TAU * TAU * 1.1803405990160962f64).powf(1.0 / 1.5);
        assert!(
            (r.value - exact).abs() < 1e-2 * exact,
            "{} {exact}",
            r.value
        );
    }

    #[test]
    fn cayley_transport_preserves_the_seminorm() {
        let u = BoundaryFunction::circle_from_fn(4096, |t| {
            Complex64::from_polar(1.0, t) + 0.3 * Complex64::from_polar(1.0, 2.0 * t)
        })
        .unwrap();
        let line =
            super::super::cayley_boundary(&u, crate::domains::CayleyDirection::DiskToHalfPlane)
                .unwrap()
                .resampled(4096)
                .unwrap();
        let a = besov_seminorm(&u, 2.0).unwrap();
        let b = besov_seminorm(&line, 2.0).unwrap();
        assert!((a.value - b.value).abs() < 2e-3 * a.value);
    }

    #[test]
    fn step_on_the_line_diverges() {
        let u = BoundaryFunction::line_from_fn(32.0, 2048, |x| {
            Complex64::new(if x < 0.3 { 0.0 } else { 1.0 }, 0.0)
        })
        .unwrap();
        let r = besov_seminorm(&u, 2.0).unwrap();
        assert!(r.divergent, "{:?}", r.ladder);
    }

    #[test]
    fn bump_on_the_line_converges() {
        let u = BoundaryFunction::line_from_fn(32.0, 2048, |x| Complex64::new((-x * x).exp(), 0.0))
            .unwrap();
        let r = besov_seminorm(&u, 2.0).unwrap();
        assert!(r.is_finite(), "{:?}", r.ladder);
        let l = &r.ladder;
        assert!((l[2].1 - l[1].1).abs() < 1e-2 * l[2].1, "{l:?}");
    }
}
