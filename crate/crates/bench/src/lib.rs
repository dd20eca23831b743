//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use teichkit_core::boundary::{boundary_trace, BoundaryFunction};
use teichkit_core::domains::{BeltramiCoefficient, ComplexGrid, GridSpec, HolomorphicFunction};

/// A smooth compactly supported field on an `n × n` grid of half width 4.
pub fn bump_grid(n: usize) -> ComplexGrid {
    let spec = GridSpec::new(n, 4.0).expect("valid grid");
    ComplexGrid::from_fn(spec, |z| {
        let r2 = z.norm_sqr();
        if r2 < 1.0 {
            Complex64::new(1.0, 0.5) * (-1.0 / (1.0 - r2)).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `0.3 χ_{|z|<1/2}` on the disk.
pub fn disk_indicator() -> BeltramiCoefficient {
    BeltramiCoefficient::constant_disk(Complex64::new(0.3, 0.0), 0.5).expect("valid coefficient")
}

/// The boundary trace of `z²` sampled at `n` points.
pub fn square_trace(n: usize) -> BoundaryFunction {
    boundary_trace(&HolomorphicFunction::monomial(2), n)
        .expect("trace")
        .function()
}
