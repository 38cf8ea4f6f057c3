use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at z = {0}")]
    Pole(f64),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("point lies on the characteristic cone: |P| = {value:e} is below {epsilon:e}")]
    OnCone { value: f64, epsilon: f64 },

    #[error("no pole-separating strip: left poles reach {left}, right poles start at {right}")]
    Separation { left: f64, right: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("differentiation failed: {0}")]
    Differentiation(String),

    #[error("singular Jacobian at x = {0:?}")]
    SingularJacobian(Vec<f64>),

    #[error("level {level} does not intersect the sampled range [{min}, {max}]")]
    EmptyLevelSet { level: f64, min: f64, max: f64 },

    #[error("domain truncation: {0}")]
    Truncation(String),

    #[error("extrapolation did not stabilise: {0}")]
    Extrapolation(String),

    #[error("far-field expansion not applicable: {0}")]
    FarField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
