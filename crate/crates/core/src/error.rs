use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: &'static str },

    #[error("domain {0:?} carries no hyperbolic density")]
    NoHyperbolicDensity(crate::domains::DomainTag),

    #[error("point {z} is not interior to {domain:?}")]
    NotInterior {
        z: Complex64,
        domain: crate::domains::DomainTag,
    },

    #[error("domain mismatch: expected {expected}, found {found:?}")]
    DomainMismatch {
        expected: &'static str,
        found: crate::domains::DomainTag,
    },

    #[error("Cayley transform is singular at {0}")]
    CayleySingularity(Complex64),

    #[error("Beltrami coefficient has sup norm {0} >= 1")]
    NotQuasiconformal(f64),

    #[error("support reaches the outer grid margin (|h| = {magnitude:e} at node ({row}, {col}))")]
    SupportInMargin {
        row: usize,
        col: usize,
        magnitude: f64,
    },

    #[error("grid resolution {0} is not a power of two")]
    GridNotPowerOfTwo(usize),

    #[error("Neumann iteration failed to converge after {iterations} iterations: {trace:?}")]
    NeumannDivergence { iterations: usize, trace: Vec<f64> },

    #[error("non-positive Jacobian {jacobian:e} at z = {z}")]
    NonPositiveJacobian { z: Complex64, jacobian: f64 },

    #[error("Newton inversion failed at w = {w} (residual {residual:e})")]
    InversionFailed { w: Complex64, residual: f64 },

    #[error("point {0} lies outside the sampled region of the map")]
    OutsideSampledRegion(Complex64),

    #[error("map is not holomorphic on the sampling circle (|f_zbar|/|f_z| = {0:e})")]
    NotHolomorphic(f64),

    #[error("derivative vanishes near z = {0}")]
    VanishingDerivative(Complex64),

    #[error("series representation not supported for this operation: {0}")]
    UnsupportedRepresentation(&'static str),

    #[error("Laurent data inconsistent across circles (discrepancy {0:e})")]
    InconsistentLaurent(f64),

    #[error("growth at infinity is too fast: {0}")]
    GrowthAtInfinity(&'static str),

    #[error("A_infinity norm {0} is outside the Ahlfors-Weill regime (< 2)")]
    SectionNormTooLarge(f64),

    #[error("step count {0} exceeds the cap")]
    TooManySteps(usize),

    #[error("delta = {0} outside (0, 1/3]")]
    InvalidDelta(f64),

    #[error("symmetry defect {0:e} exceeds tolerance")]
    SymmetryDefect(f64),

    #[error("boundary trace unreliable: {bad} of {total} samples fail the radial Cauchy test")]
    UnreliableTrace { bad: usize, total: usize },

    #[error("boundary samples are not strictly increasing at index {0}")]
    NotIncreasing(usize),

    #[error("normalization point {expected} maps to {actual}")]
    NormalizationDefect {
        expected: Complex64,
        actual: Complex64,
    },

    #[error("extension not quasiconformal at this resolution (|mu| = {0})")]
    ExtensionNotQuasiconformal(f64),

    #[error("local section input too large: {0}")]
    SectionInputTooLarge(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
