use num_complex::Complex64;

use super::fft::{signed_index, Convolver, Fft2, KernelKind};
use crate::domains::ComplexGrid;
use crate::error::{Error, Result};

fn check_input(h: &ComplexGrid) -> Result<()> {
    h.spec.validate()?;
    if !h.is_finite() {
        return Err(Error::Invalid("grid contains non-finite values".into()));
    }
    h.check_margin()
}

/// Solid Cauchy transform `P[h](z) = (1/π) ∬ h(w)/(z - w) dA(w)`, so that `∂̄P[h] = h`.
///
/// `h` is treated as constant on grid cells; the zero-padded (`2N`) linear
/// convolution uses exact cell integrals of the kernel.
pub fn cauchy_transform(h: &ComplexGrid) -> Result<ComplexGrid> {
    check_input(h)?;
    let conv = Convolver::new(KernelKind::Cauchy, h.n(), h.spec.spacing(), true);
    Ok(ComplexGrid {
        spec: h.spec,
        values: conv.apply(&h.values),
    })
}

/// Beurling transform as the periodic Fourier multiplier `conj(ξ)/ξ` on the grid.
///
/// The zero frequency is mapped to zero, so the operator is an exact
/// isometry on mean-zero data.
pub fn beurling_transform(h: &ComplexGrid) -> Result<ComplexGrid> {
    check_input(h)?;
    let n = h.n();
    let fft = Fft2::cached(n);
    let mut buf = h.values.clone();
    fft.forward(&mut buf);
    // Spectrum is stored as s[kx][ky].
    for a in 0..n {
        let kx = signed_index(a, n) as f64;
        for b in 0..n {
            let ky = signed_index(b, n) as f64;
            let xi = Complex64::new(kx, ky);
            let v = &mut buf[a * n + b];
            *v = if a == 0 && b == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                *v * xi.conj() / xi
            };
        }
    }
    fft.inverse(&mut buf);
    Ok(ComplexGrid {
        spec: h.spec,
        values: buf,
    })
}

/// Cell-averaged principal-value Beurling transform used inside the solver.
pub(crate) struct CellBeurling {
    conv: Convolver,
}

impl CellBeurling {
    /// `padded = false` is valid only when the density is supported in the
    /// central half of the grid in each axis.
    pub fn new(n: usize, padded: bool) -> Self {
        CellBeurling {
            conv: Convolver::new(KernelKind::Beurling, n, 1.0, padded),
        }
    }

    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        self.conv.apply(h)
    }
}

/// Whether every non-zero sample lies strictly inside the central half box.
pub(crate) fn supported_in_half_box(h: &ComplexGrid) -> bool {
    let n = h.n();
    let (lo, hi) = (n / 4 + 1, 3 * n / 4 - 1);
    for row in 0..n {
        for col in 0..n {
            if h.get(row, col).norm_sqr() != 0.0
                && !(row >= lo && row < hi && col >= lo && col < hi)
            {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::GridSpec;

    /// `∂̄φ` and `∂φ` for `φ = exp(-a|z|²)`.
    fn gaussian_pair(spec: GridSpec, a: f64) -> (ComplexGrid, ComplexGrid) {
        let dbar = ComplexGrid::from_fn(spec, |z| -a * z * (-a * z.norm_sqr()).exp());
        let d = ComplexGrid::from_fn(spec, |z| -a * z.conj() * (-a * z.norm_sqr()).exp());
        (dbar, d)
    }

    #[test]
    fn spectral_beurling_maps_dbar_to_d() {
        let spec = GridSpec::new(256, 8.0).unwrap();
        let (dbar, d) = gaussian_pair(spec, 1.0);
        let t = beurling_transform(&dbar).unwrap();
        let err = t
            .values
            .iter()
            .zip(&d.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err / d.sup_norm() < 1e-10, "{err}");
    }

    #[test]
    fn cell_beurling_converges_to_continuous_operator() {
        let mut errs = Vec::new();
        for n in [256, 512] {
            let spec = GridSpec::new(n, 8.0).unwrap();
            let (dbar, d) = gaussian_pair(spec, 4.0);
            let t = CellBeurling::new(n, false).apply(&dbar.values);
            // The periodic form is only claimed on the central half box.
            let mut err: f64 = 0.0;
            for row in n / 4..3 * n / 4 {
                for col in n / 4..3 * n / 4 {
                    err = err.max((t[row * n + col] - d.get(row, col)).norm());
                }
            }
            errs.push(err / d.sup_norm());
            // The padded and periodic forms agree for centrally supported data.
            let padded = CellBeurling::new(n, true).apply(&dbar.values);
            let k = (n / 2) * n + n / 2 + 10;
            assert!((t[k] - padded[k]).norm() < 1e-10);
        }
        assert!(errs[0] < 2e-2, "{errs:?}");
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn cauchy_of_disk_indicator() {
        let spec = GridSpec::new(256, 2.0).unwrap();
        let h = spec.spacing();
        // Exact cell areas of the unit disk by 8x8 supersampling.
        let chi = ComplexGrid::from_fn(spec, |z| {
            let mut acc = 0.0;
            for a in 0..8 {
                for b in 0..8 {
                    let w = z + Complex64::new(
                        (a as f64 + 0.5) / 8.0 - 0.5,
                        (b as f64 + 0.5) / 8.0 - 0.5,
                    ) * h;
                    if w.norm_sqr() < 1.0 {
                        acc += 1.0 / 64.0;
                    }
                }
            }
            Complex64::new(acc, 0.0)
        });
        let p = cauchy_transform(&chi).unwrap();
        let mut worst: f64 = 0.0;
        for row in 0..spec.n {
            for col in 0..spec.n {
                let z = spec.node(row, col);
                let r = z.norm();
                if (r - 1.0).abs() < 3.0 * h || r > 1.8 {
                    continue;
                }
                let exact = if r < 1.0 { z.conj() } else { 1.0 / z };
                worst = worst.max((p.get(row, col) - exact).norm());
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn zero_maps_to_zero() {
        let spec = GridSpec::new(64, 2.0).unwrap();
        let z = ComplexGrid::zeros(spec);
        assert_eq!(cauchy_transform(&z).unwrap().sup_norm(), 0.0);
        assert_eq!(beurling_transform(&z).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn cauchy_inverts_dbar_on_bump() {
        let spec = GridSpec::new(1024, 6.0).unwrap();
        let hh = spec.spacing();
        let bump = ComplexGrid::from_fn(spec, |z| Complex64::new(1.0, 0.5) * (-z.norm_sqr()).exp());
        let p = cauchy_transform(&bump).unwrap();
        let n = spec.n;
        let d = |row: usize, col: usize, dr: i64, dc: i64| {
            let at = |k: i64| {
                p.get(
                    (row as i64 + k * dr) as usize,
                    (col as i64 + k * dc) as usize,
                )
            };
            (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * hh)
        };
        let mut worst: f64 = 0.0;
        for row in (n / 4..3 * n / 4).step_by(7) {
            for col in (n / 4..3 * n / 4).step_by(7) {
                let dbar = (d(row, col, 0, 1) + Complex64::i() * d(row, col, 1, 0)) * 0.5;
                worst = worst.max((dbar - bump.get(row, col)).norm());
            }
        }
        assert!(worst / bump.sup_norm() < 1e-4, "{worst}");
    }

    #[test]
    fn spectral_beurling_is_isometric_on_mean_zero_data() {
        use rand::{Rng, SeedableRng};
        let spec = GridSpec::new(128, 2.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut h = ComplexGrid::zeros(spec);
        let mut sum = Complex64::new(0.0, 0.0);
        for row in 20..108 {
            for col in 20..108 {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                h.set(row, col, v);
                sum += v;
            }
        }
        h.set(64, 64, h.get(64, 64) - sum);
        let t = beurling_transform(&h).unwrap();
        assert!((t.l2_norm() - h.l2_norm()).abs() / h.l2_norm() < 1e-10);
    }

    #[test]
    fn rejects_support_in_margin() {
        let spec = GridSpec::new(32, 1.0).unwrap();
        let h = ComplexGrid::from_fn(spec, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            cauchy_transform(&h),
            Err(Error::SupportInMargin { .. })
        ));
        assert!(matches!(
            beurling_transform(&h),
            Err(Error::SupportInMargin { .. })
        ));
    }
}
