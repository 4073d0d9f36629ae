use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma pole at nonpositive integer near {0}")]
    GammaPole(Complex64),
    #[error("series parameter degenerate: {0}")]
    ParameterError(String),
    #[error("series divergent for argument {0}")]
    Divergent(Complex64),
    #[error("evaluation outside strip |Im 2z| < a+b at z = {0}")]
    StripViolation(Complex64),
    #[error("pole of the integrand on the shift stencil at {0}")]
    PoleOnStencil(Complex64),
    #[error("evaluator required: {0}")]
    EvaluatorRequired(String),
    #[error("divisors of {0} not declared up to the requested radius")]
    MissingDivisor(String),
    #[error("quadrature contour passes through a divisor at {0}")]
    ContourThroughDivisor(Complex64),
    #[error("degenerate radius grid: {0}")]
    DegenerateGrid(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("identity violated: {0}")]
    IdentityViolation(String),
    #[error("not differentiable at the origin stencil: {0}")]
    NotDifferentiable(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
