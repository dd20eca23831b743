//! Boundary values, conformal welding, Besov seminorms on the circle and the
//! line, and the heat-kernel extension back into the half-plane.

mod besov;
mod characterization;
mod extension;
mod function;
mod trace;
mod welding;

pub use besov::{besov_seminorm, BAND_WIDTHS};
pub use characterization::{
    besov_characterization_check, besov_characterization_check_with, boundary_map, extension_norm,
    log_besov, prebesov_log_derivative, CharacterizationOptions, CharacterizationReport, Roundtrip,
    Stage, ROUNDTRIP_TOL,
};
pub use extension::{ba_extend, ExtensionKernel};
pub use function::{
    angle_to_line, cayley_boundary, line_to_angle, BoundaryDomain, BoundaryFunction,
    BoundaryHomeomorphism, BoundaryNormalization, BoundarySidecar, DEFAULT_TRUNCATION,
};
pub use trace::{
    boundary_trace, boundary_trace_with, Trace, TraceOptions, TraceSource, MAX_UNRELIABLE_FRACTION,
};
pub use welding::{
    log_derivative, log_derivative_curve, welding, welding_identity, welding_identity_check,
    welding_with, LogDerivative, Welding, WeldingIdentityReport, WeldingOptions,
};
