use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The reduced determinant vanishes but the rates are not in the fully
    /// symmetric maximal-interference configuration, where the family of
    /// fixed points is known.
    #[error("reduced steady-state matrix is singular (det = {det:e}) outside the fully symmetric |phi| = 1 configuration")]
    SingularUnclassified { det: f64 },

    #[error("steady state is not unique; an initial state is required to select the fixed point")]
    MissingInitialState,

    #[error("reduced steady-state matrix is singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("closed-form eigensystem unavailable: {0}")]
    ClosedFormUnavailable(&'static str),

    #[error("matrix is defective: eigenvalue {eigenvalue} has algebraic multiplicity {algebraic} but only {geometric} independent eigenvectors")]
    DefectiveMatrix {
        eigenvalue: num_complex::Complex64,
        algebraic: usize,
        geometric: usize,
    },

    #[error("eigenvector basis is numerically singular (reciprocal condition {rcond:e})")]
    DefectiveBasis { rcond: f64 },

    #[error("RK4 step too large: dt * |L| = {product} exceeds 0.5")]
    StepTooLarge { product: f64 },

    #[error("symmetry required by the closed form is violated: {0}")]
    SymmetryViolated(String),

    #[error("bias is zero; use the linear-response limit instead")]
    ZeroBias,

    #[error("efficiency undefined: dot energy equals the hot chemical potential")]
    EfficiencyUndefined,

    #[error(
        "maximal interference |phi| = 1 is outside the domain of the small-detuning expansion"
    )]
    MaximalInterference,
}
