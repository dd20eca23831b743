use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::{BoundaryDomain, BoundaryHomeomorphism};
use crate::domains::quadrature::GaussLegendre;
use crate::domains::{BeltramiCoefficient, CoefficientKind, DomainTag, Support};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKernel {
    /// `F = φ_t ∗ h + i t (φ_t ∗ h')` with `φ(s) = e^{-s²}/√π`.
    Gaussian,
    /// Averages of `h` over `[x - t, x + t]`; does not fix affine maps.
    Box,
}

/// Gaussian weights beyond this many widths are treated as zero.
const GAUSSIAN_REACH: f64 = 9.0;

/// Piecewise-linear `h` with its end slopes continued to infinity.
#[derive(Debug)]
struct Samples {
    y: Vec<f64>,
    v: Vec<f64>,
    slope: Vec<f64>,
    /// `∫_{y_0}^{y_k} h`.
    prefix: Vec<f64>,
}

impl Samples {
    fn new(h: &BoundaryHomeomorphism) -> Self {
        let y = h.params().to_vec();
        let v = h.values().to_vec();
        let slope: Vec<f64> = y
            .windows(2)
            .zip(v.windows(2))
            .map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0]))
            .collect();
        let mut prefix = vec![0.0; y.len()];
        for k in 1..y.len() {
            prefix[k] = prefix[k - 1] + 0.5 * (v[k] + v[k - 1]) * (y[k] - y[k - 1]);
        }
        Samples {
            y,
            v,
            slope,
            prefix,
        }
    }

    fn segment(&self, x: f64) -> usize {
        match self.y.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(self.y.len() - 2),
            Err(0) => 0,
            Err(k) => (k - 1).min(self.y.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let k = self.segment(x);
        self.v[k] + self.slope[k] * (x - self.y[k])
    }

    /// Antiderivative vanishing at `y_0`, exact for the linear continuation.
    fn integral(&self, x: f64) -> f64 {
        let n = self.y.len();
        let k = if x < self.y[0] {
            0
        } else if x >= self.y[n - 1] {
            n - 1
        } else {
            self.segment(x)
        };
        let s = if k == n - 1 {
            self.slope[n - 2]
        } else {
            self.slope[k]
        };
        let d = x - self.y[k];
        self.prefix[k] + self.v[k] * d + 0.5 * s * d * d
    }

    /// `(A_x, A_xx, A_xxx)` for `A = φ_t ∗ h` with the Gaussian kernel.
    fn gaussian_moments(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let norm = 1.0 / (t * PI.sqrt());
        // Kernel mass, density and its derivative at offset x - y.
        let cdf = |y: f64| 0.5 * (1.0 + libm::erf((x - y) / t));
        let pdf = |y: f64| {
            let u = (x - y) / t;
            norm * (-u * u).exp()
        };
        let dpdf = |y: f64| {
            let u = (x - y) / t;
            -2.0 * u / t * norm * (-u * u).exp()
        };
        let reach = GAUSSIAN_REACH * t;
        let lo = match self
            .y
            .binary_search_by(|p| p.partial_cmp(&(x - reach)).unwrap())
        {
            Ok(k) | Err(k) => k.saturating_sub(1),
        };
        let hi = match self
            .y
            .binary_search_by(|p| p.partial_cmp(&(x + reach)).unwrap())
        {
            Ok(k) | Err(k) => k.min(n - 1),
        };
        let (s_left, s_right) = (self.slope[0], self.slope[n - 2]);
        // Segments outside the window see equal kernel mass at both ends and drop out.
        let mut ax = 0.0;
        let mut axx = 0.0;
        let mut axxx = 0.0;
        // Left continuation (-∞, y_0).
        if lo == 0 {
            ax += s_left * (1.0 - cdf(self.y[0]));
            axx += -s_left * pdf(self.y[0]);
            axxx += -s_left * dpdf(self.y[0]);
        }
        for k in lo..hi.min(n - 1) {
            let (a, b) = (self.y[k], self.y[k + 1]);
            let s = self.slope[k];
            ax += s * (cdf(a) - cdf(b));
            axx += s * (pdf(a) - pdf(b));
            axxx += s * (dpdf(a) - dpdf(b));
        }
        if hi == n - 1 {
            ax += s_right * cdf(self.y[n - 1]);
            axx += s_right * pdf(self.y[n - 1]);
            axxx += s_right * dpdf(self.y[n - 1]);
        }
        (ax, axx, axxx)
    }

    /// `(F_x, F_t)` of the extension at `x + it`.
    fn partials(&self, kernel: ExtensionKernel, x: f64, t: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        match kernel {
            ExtensionKernel::Gaussian => {
                let (ax, axx, axxx) = self.gaussian_moments(x, t);
                // φ_t solves ∂_t φ_t = (t/2) ∂_x² φ_t, so A_t = (t/2) A_xx.
                let fx = ax + i * t * axx;
                let ft = 0.5 * t * axx + i * (ax + 0.5 * t * t * axxx);
                (fx, ft)
            }
            ExtensionKernel::Box => {
                let (hp, hm, h0) = (self.eval(x + t), self.eval(x - t), self.eval(x));
                let (ip, im, i0) = (self.integral(x + t), self.integral(x - t), self.integral(x));
                let u = (ip - im) / (2.0 * t);
                let v = ((ip - i0) - (i0 - im)) / (2.0 * t);
                let ux = (hp - hm) / (2.0 * t);
                let ut = -u / t + (hp + hm) / (2.0 * t);
                let vx = (hp - 2.0 * h0 + hm) / (2.0 * t);
                let vt = -v / t + (hp - hm) / (2.0 * t);
                (ux + i * vx, ut + i * vt)
            }
        }
    }

    fn dilatation(&self, kernel: ExtensionKernel, z: Complex64) -> Complex64 {
        if !(z.im > 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let (fx, ft) = self.partials(kernel, z.re, z.im);
        let i = Complex64::i();
        let dz = 0.5 * (fx - i * ft);
        let dzbar = 0.5 * (fx + i * ft);
        dzbar / dz
    }
}

/// Probe points for the sup-norm check: a band of heights from the sample
/// spacing to well above the sampled segment.
fn probe_points(s: &Samples) -> Vec<Complex64> {
    let n = s.y.len();
    let (a, b) = (s.y[0], s.y[n - 1]);
    let width = b - a;
    let spacing = width / (n - 1) as f64;
    let mut pts = Vec::new();
    let mut t = spacing;
    while t < 4.0 * width {
        let m = 256;
        for k in 0..=m {
            let x = a - width + 3.0 * width * k as f64 / m as f64;
            pts.push(Complex64::new(x, t));
        }
        t *= 1.5;
    }
    pts
}

/// Extension of a line homeomorphism to a quasiconformal self-map of the
/// upper half-plane; returns its dilatation.
pub fn ba_extend(
    h: &BoundaryHomeomorphism,
    kernel: ExtensionKernel,
) -> Result<BeltramiCoefficient> {
    if !matches!(h.domain, BoundaryDomain::Line { .. }) {
        return Err(Error::Invalid(
            "ba_extend needs a homeomorphism of the line".into(),
        ));
    }
    let samples = Arc::new(Samples::new(h));
    let sup = probe_points(&samples)
        .into_iter()
        .map(|z| samples.dilatation(kernel, z).norm())
        .fold(0.0, f64::max);
    if !(sup < 1.0) {
        return Err(Error::ExtensionNotQuasiconformal(sup));
    }
    let s = samples.clone();
    BeltramiCoefficient::from_fn(
        DomainTag::UpperHalfPlane,
        Support::Full,
        sup,
        CoefficientKind::Derived {
            description: format!("{kernel:?} extension"),
        },
        move |z| s.dilatation(kernel, z),
    )
}

/// `∫_{t > t_min} ∫ |μ(x + it)|^p (2t)^{-2} dx dt` for the Gaussian extension,
/// the `p`-th power of its hyperbolic norm restricted to heights above `t_min`.
///
/// Where the kernel window misses every sample `h` is affine and `μ` vanishes
/// to rounding, so each height is integrated over the window reach only.
pub(crate) fn gaussian_extension_integral(
    h: &BoundaryHomeomorphism,
    p: f64,
    t_min: f64,
) -> Result<f64> {
    if !matches!(h.domain, BoundaryDomain::Line { .. }) {
        return Err(Error::Invalid(
            "extension needs a homeomorphism of the line".into(),
        ));
    }
    if !(t_min > 0.0) {
        return Err(Error::Invalid(format!(
            "height cutoff {t_min} must be positive"
        )));
    }
    let s = Samples::new(h);
    let n = s.y.len();
    let (a, b) = (s.y[0], s.y[n - 1]);
    let width = b - a;
    let rule = GaussLegendre::cached(6);
    let row = |t: f64| -> f64 {
        let lo = a - GAUSSIAN_REACH * t;
        let hi = b + GAUSSIAN_REACH * t;
        let m = (((hi - lo) / (0.25 * t)).ceil() as usize).max(64);
        let dx = (hi - lo) / m as f64;
        let terms: Vec<f64> = (0..=m)
            .into_par_iter()
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                let z = Complex64::new(lo + k as f64 * dx, t);
                w * s.dilatation(ExtensionKernel::Gaussian, z).norm().powf(p)
            })
            .collect();
        let sum: f64 = terms.iter().sum();
        sum * dx / (4.0 * t * t)
    };
    let mut total = 0.0;
    let mut t = t_min;
    loop {
        let (u0, u1) = (t.ln(), (2.0 * t).ln());
        let octave: f64 = rule
            .on_interval(u0, u1)
            .map(|(u, w)| w * u.exp() * row(u.exp()))
            .sum();
        total += octave;
        t *= 2.0;
        if (t > 4.0 * width && octave <= 1e-12 * total) || t > 1e8 * width {
            break;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryNormalization;

    fn line_map(t: f64, n: usize, f: impl Fn(f64) -> f64) -> BoundaryHomeomorphism {
        let id = BoundaryHomeomorphism::identity_line(t, n);
        let values = id.params().iter().map(|&x| f(x)).collect();
        BoundaryHomeomorphism::new(
            id.domain,
            id.params().to_vec(),
            values,
            BoundaryNormalization::None,
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_extension_fixes_affine_maps() {
        for h in [
            line_map(8.0, 257, |x| x),
            line_map(8.0, 300, |x| 2.5 * x - 0.3),
        ] {
            let mu = ba_extend(&h, ExtensionKernel::Gaussian).unwrap();
            assert!(mu.sup_norm() < 1e-10, "{}", mu.sup_norm());
            for z in [c(0.1, 0.01), c(-3.0, 2.0), c(40.0, 0.5), c(0.0, 100.0)] {
                assert!(mu.eval(z).norm() < 1e-10, "{z} {}", mu.eval(z));
            }
        }
    }

    #[test]
    fn box_extension_shears_the_identity() {
        let h = line_map(8.0, 257, |x| x);
        let mu = ba_extend(&h, ExtensionKernel::Box).unwrap();
        for z in [c(0.1, 0.01), c(-3.0, 2.0), c(1.0, 30.0)] {
            assert!((mu.eval(z) - 1.0 / 3.0).norm() < 1e-10, "{}", mu.eval(z));
        }
    }

    #[test]
    fn gaussian_extension_of_a_smooth_map() {
        let h = line_map(8.0, 1024, |x| x + 0.1 * (x * 1.5).sin());
        let mu = ba_extend(&h, ExtensionKernel::Gaussian).unwrap();
        assert!(
            mu.sup_norm() > 0.0 && mu.sup_norm() < 0.3,
            "{}",
            mu.sup_norm()
        );
        // Vanishes at the boundary like t h''/h'.
        let near = mu.eval(c(1.0, 1e-3)).norm();
        let far = mu.eval(c(1.0, 1e-1)).norm();
        assert!(near < 0.05 * far, "{near} {far}");
    }

    #[test]
    fn box_partials_match_finite_differences() {
        let h = line_map(4.0, 200, |x| x + 0.2 * x.tanh());
        let s = Samples::new(&h);
        let (x, t) = (0.7, 0.3);
        let f = |x: f64, t: f64| {
            let u = (s.integral(x + t) - s.integral(x - t)) / (2.0 * t);
            let v = ((s.integral(x + t) - s.integral(x)) - (s.integral(x) - s.integral(x - t)))
                / (2.0 * t);
            c(u, v)
        };
        let e = 1e-6;
        let fx = (f(x + e, t) - f(x - e, t)) / (2.0 * e);
        let ft = (f(x, t + e) - f(x, t - e)) / (2.0 * e);
        let (ax, at) = s.partials(ExtensionKernel::Box, x, t);
        assert!(
            (fx - ax).norm() < 1e-6 && (ft - at).norm() < 1e-6,
            "{fx} {ax} {ft} {at}"
        );
    }

    #[test]
    fn gaussian_partials_match_finite_differences() {
        let h = line_map(4.0, 200, |x| x + 0.2 * x.tanh());
        let s = Samples::new(&h);
        let (x, t) = (0.7, 0.3);
        // A = φ_t ∗ h by quadrature on a fine grid.
        let a = |x: f64, t: f64| {
            let m = 20000;
            let (lo, hi) = (x - 12.0 * t, x + 12.0 * t);
            let dy = (hi - lo) / m as f64;
            (0..m)
                .map(|k| {
                    let y = lo + (k as f64 + 0.5) * dy;
                    let u = (x - y) / t;
                    s.eval(y) * (-u * u).exp() / (t * PI.sqrt()) * dy
                })
                .sum::<f64>()
        };
        let e = 1e-4;
        let ax_fd = (a(x + e, t) - a(x - e, t)) / (2.0 * e);
        let at_fd = (a(x, t + e) - a(x, t - e)) / (2.0 * e);
        let (ax, axx, _) = s.gaussian_moments(x, t);
        assert!((ax - ax_fd).abs() < 1e-6, "{ax} {ax_fd}");
        assert!(
            (0.5 * t * axx - at_fd).abs() < 1e-6,
            "{} {at_fd}",
            0.5 * t * axx
        );
    }

    #[test]
    fn rejects_circle_maps() {
        let h = BoundaryHomeomorphism::identity_circle(64);
        assert!(ba_extend(&h, ExtensionKernel::Gaussian).is_err());
    }

    #[test]
    fn half_plane_integral_matches_the_disk_quadrature() {
        // h' = 1 + 0.3 (1 - 2x²) e^{-x²} stays positive.
        let h = line_map(8.0, 2048, |x| x + 0.3 * x * (-x * x).exp());
        let spacing = h.params()[1] - h.params()[0];
        let direct = gaussian_extension_integral(&h, 2.0, 0.25 * spacing).unwrap();
        let mu = ba_extend(&h, ExtensionKernel::Gaussian).unwrap();
        let pulled = crate::domains::mp_norm(&mu, 2.0).unwrap();
        let a = direct.sqrt();
        assert!(
            (a - pulled.value).abs() < 2e-2 * pulled.value,
            "{a} {:?}",
            pulled
        );
    }
}
