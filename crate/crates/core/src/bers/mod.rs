//! Schwarzian derivatives, the Bers map and its sections.

mod embedding;
mod laurent;
mod lipschitz;
mod reflection;
mod schwarzian;
mod section;

pub use embedding::{
    bers_map, bers_map_with, equivalent, equivalent_with, exterior_schwarzian, BersOptions,
    TeichmullerPoint, EQUIVALENCE_TOL,
};
pub use laurent::{
    laurent_coefficients, laurent_coefficients_of, laurent_fit, Circle, LaurentFit, HOLOMORPHY_TOL,
};
pub use lipschitz::{
    bilipschitz_representative, bilipschitz_representative_with, distortion_samples,
    hyperbolic_distortion, hyperbolic_distortion_at, step_count, BilipschitzRepresentative,
    DEFAULT_DELTA, DISTORTION_RADIUS, MAX_STEPS,
};
pub use reflection::{reflection, reflection_with, ReflectionMap};
pub use schwarzian::schwarzian;
pub use section::{ahlfors_weill, local_section, SectionBase, SectionValue, SECTION_NORM_LIMIT};
