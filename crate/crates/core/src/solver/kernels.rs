//! Cell-averaged Cauchy and Beurling kernels on the unit lattice.
//!
//! For a density that is constant on grid cells, the transforms reduce to
//! lattice convolutions whose weights are the exact cell integrals
//! `(1/π) ∫_cell dA/ζ` and `-(1/π) ∫_cell dA/ζ²` (principal value at the
//! origin).  Cells far from the origin use the midpoint value plus the first
//! two non-vanishing square-moment corrections.

use std::f64::consts::PI;

use num_complex::Complex64;

const FAR: i64 = 8;

/// `G` with `∂²G/∂x∂y = 1/ζ`.
fn cauchy_primitive(z: Complex64) -> Complex64 {
    -Complex64::i() * (z * z.ln() - z)
}

/// `G` with `∂²G/∂x∂y = 1/ζ²`.
fn beurling_primitive(z: Complex64) -> Complex64 {
    Complex64::i() * z.ln()
}

fn rectangle(g: fn(Complex64) -> Complex64, x0: f64, x1: f64, y0: f64, y1: f64) -> Complex64 {
    let c = |x: f64, y: f64| g(Complex64::new(x, y));
    c(x1, y1) - c(x0, y1) - c(x1, y0) + c(x0, y0)
}

/// `(1/π) ∫ dA/ζ` over the unit cell centred at `m + i n`.
pub(crate) fn unit_cauchy(m: i64, n: i64) -> Complex64 {
    if m == 0 && n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    // Odd kernel: fold onto cells that avoid the branch cut of the logarithm.
    if m < 0 || (m == 0 && n < 0) {
        return -unit_cauchy(-m, -n);
    }
    let d = Complex64::new(m as f64, n as f64);
    if m.abs().max(n.abs()) >= FAR {
        return (1.0 / d - 1.0 / (60.0 * d.powi(5)) + 1.0 / (720.0 * d.powi(9))) / PI;
    }
    let (x, y) = (m as f64, n as f64);
    rectangle(cauchy_primitive, x - 0.5, x + 0.5, y - 0.5, y + 0.5) / PI
}

/// `-(1/π) PV ∫ dA/ζ²` over the unit cell centred at `m + i n`.
pub(crate) fn unit_beurling(m: i64, n: i64) -> Complex64 {
    if m == 0 && n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if m < 0 || (m == 0 && n < 0) {
        return unit_beurling(-m, -n);
    }
    let d = Complex64::new(m as f64, n as f64);
    if m.abs().max(n.abs()) >= FAR {
        return -(1.0 / (d * d) - 1.0 / (12.0 * d.powi(6)) + 1.0 / (80.0 * d.powi(10))) / PI;
    }
    let (x, y) = (m as f64, n as f64);
    -rectangle(beurling_primitive, x - 0.5, x + 0.5, y - 0.5, y + 0.5) / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tensor Gauss–Legendre reference for a cell away from the origin.
    fn reference(m: i64, n: i64, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let gl = crate::domains::quadrature::GaussLegendre::new(20);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, wx) in gl.on_interval(m as f64 - 0.5, m as f64 + 0.5) {
            for (y, wy) in gl.on_interval(n as f64 - 0.5, n as f64 + 0.5) {
                acc += f(Complex64::new(x, y)) * wx * wy;
            }
        }
        acc / PI
    }

    #[test]
    fn exact_cells_match_quadrature() {
        for &(m, n) in &[(1, 0), (2, -3), (0, 4), (-3, 1), (7, 7), (-1, -5)] {
            let c = reference(m, n, |z| 1.0 / z);
            assert!((unit_cauchy(m, n) - c).norm() < 1e-12, "cauchy {m} {n}");
            let b = -reference(m, n, |z| 1.0 / (z * z));
            assert!((unit_beurling(m, n) - b).norm() < 1e-12, "beurling {m} {n}");
        }
    }

    #[test]
    fn far_field_matches_exact_formula() {
        for &(m, n) in &[(8, 0), (8, 5), (-3, 9), (12, -12)] {
            let (x, y) = (m as f64, n as f64);
            let exact = rectangle(cauchy_primitive, x - 0.5, x + 0.5, y - 0.5, y + 0.5) / PI;
            let q = reference(m, n, |z| 1.0 / z);
            assert!((unit_cauchy(m, n) - q).norm() < 1e-12);
            assert!((exact - q).norm() < 1e-10);
            let qb = -reference(m, n, |z| 1.0 / (z * z));
            assert!((unit_beurling(m, n) - qb).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetries() {
        assert!((unit_cauchy(2, 3) + unit_cauchy(-2, -3)).norm() < 1e-15);
        assert!((unit_beurling(2, 3) - unit_beurling(-2, -3)).norm() < 1e-15);
        // Rotating the cell by i rotates 1/ζ by -i and 1/ζ² by -1.
        assert!((unit_cauchy(-3, 2) - (-Complex64::i()) * unit_cauchy(2, 3)).norm() < 1e-13);
        assert!((unit_beurling(-3, 2) + unit_beurling(2, 3)).norm() < 1e-13);
    }
}
