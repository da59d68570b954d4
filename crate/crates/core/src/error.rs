use thiserror::Error;

/// Errors raised by space construction, norm evaluation and the functionals.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance table is asymmetric at ({0}, {1})")]
    AsymmetricDistance(usize, usize),
    #[error("distinct points {0} and {1} are at distance zero")]
    ZeroDistanceDistinctPoints(usize, usize),
    #[error("invalid distance at ({0}, {1}): {2}")]
    InvalidDistance(usize, usize, f64),
    #[error("mass of point {0} is not strictly positive")]
    NonpositiveMass(usize),
    #[error("quasi-triangle inequality violated on ({x}, {y}, {z}): ratio {ratio} exceeds K0 = {k0}")]
    QuasiTriangleViolation {
        x: usize,
        y: usize,
        z: usize,
        ratio: f64,
        k0: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("mutual minimum measure is undefined for a point paired with itself")]
    SamePoint,
    #[error("sum overflows the floating-point range (log magnitude {0})")]
    Overflow(f64),
    #[error("domain has no intervals")]
    EmptyDomain,
    #[error("invalid interval domain: {0}")]
    InvalidDomain(String),
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("radius window is too narrow: [{0}, {1}]")]
    WindowTooNarrow(f64, f64),
    #[error("subset is empty")]
    EmptySubset,
    #[error("ball family is empty")]
    EmptyFamily,
    #[error("point {0} is not covered by any ball of the family")]
    UncoveredPoint(usize),
    #[error("weight is not strictly positive at point {0}")]
    NonpositiveWeight(usize),
    #[error("bisection did not converge within {0} iterations")]
    NonconvergentBisection(usize),
    #[error("operator norm {given} is below the observed lower bound {observed}")]
    InvalidOperatorNorm { given: f64, observed: f64 },
    #[error("smoothness parameter s = {0} is outside (0, 1)")]
    SOutOfRange(f64),
    #[error("the iterated antiderivative degenerates at s = 1")]
    SEqualsOne,
    #[error("the space has a single point, so the kernel has only the excluded diagonal")]
    DiagonalOnly,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("norm specification not supported here: {0}")]
    UnsupportedSpec(String),
    #[error("the far-field integral diverges (decay exponent {0} <= 0)")]
    DivergentTail(f64),
    #[error("G_s^(1/q) is not locally in Y at a jump of f (s times the local exponent is {0} >= 1)")]
    DivergentAtJump(f64),
    #[error("invalid s-grid: {0}")]
    InvalidGrid(String),
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
