use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be a power of two and at least 4")]
    InvalidGrid(usize),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("function vanishes within tolerance (min |f| = {min:e}, tolerance {tol:e})")]
    ZeroDivide { min: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear part is not invertible at theta = {theta:.6} (condition {cond:e})")]
    NonInvertibleLinearPart { theta: f64, cond: f64 },

    #[error("transform has no inverse: {0}")]
    NotInvertible(&'static str),

    #[error("structure does not vanish on the circle (max constant term {max:e})")]
    NotVanishingOnGamma { max: f64 },

    #[error("structure is not Poisson (Jacobiator norm {norm:e} exceeds {tol:e})")]
    NotPoisson { norm: f64, tol: f64 },

    #[error("linear part is not dual to a non-resonant algebra (max u coefficient {max_u:e})")]
    StructuralMismatch { max_u: f64 },

    #[error("eigenvalues collide or leave the real axis at theta = {theta:.6} (gap {gap:e})")]
    EigenvalueCollision { theta: f64, gap: f64 },

    #[error("eigenvalues are not proportional along the circle (deviation {deviation:e})")]
    NonProportionalSpectrum { deviation: f64 },

    #[error("eigenvalue scale k(theta) vanishes (min |k| = {min:e})")]
    KVanishes { min: f64 },

    #[error("resonant eigenvalues: divisor {divisor:e} for target {target} with multi-index {multi_index:?}")]
    ResonantInput {
        target: String,
        multi_index: Vec<u32>,
        divisor: f64,
    },

    #[error("resonant divisor {divisor:e} for component x{component} at monomial {multi_index:?}")]
    ResonantDivisor {
        component: usize,
        multi_index: Vec<u32>,
        divisor: f64,
    },

    #[error("bracket {{x{i},x{j}}} has coefficient {magnitude:e} on unexpected monomial {multi_index:?}")]
    UnexpectedMonomial {
        i: usize,
        j: usize,
        multi_index: Vec<u32>,
        magnitude: f64,
    },

    #[error("bracket {{x{i},x{j}}} is not constant after rescaling (variation {variation:e})")]
    NonConstantResidual { i: usize, j: usize, variation: f64 },

    #[error("modular vector field vanishes on the circle (sum of mu = {trace:e})")]
    ZeroModularTrace { trace: f64 },

    #[error("point is not in the positive orthant: {0:?}")]
    NotInPositiveOrthant(Vec<f64>),

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("skew-symmetry violated: {0}")]
    SkewViolation(String),
}

impl Error {
    /// Short stable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::NonFinite(_) => "non-finite",
            Error::ZeroDivide { .. } => "zero-divide",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::NonInvertibleLinearPart { .. } => "non-invertible-linear-part",
            Error::NotInvertible(_) => "not-invertible",
            Error::NotVanishingOnGamma { .. } => "not-vanishing-on-circle",
            Error::NotPoisson { .. } => "not-poisson",
            Error::StructuralMismatch { .. } => "structural-mismatch",
            Error::EigenvalueCollision { .. } => "eigenvalue-collision",
            Error::NonProportionalSpectrum { .. } => "non-proportional-spectrum",
            Error::KVanishes { .. } => "k-vanishes",
            Error::ResonantInput { .. } => "resonant-input",
            Error::ResonantDivisor { .. } => "resonant-divisor",
            Error::UnexpectedMonomial { .. } => "unexpected-monomial",
            Error::NonConstantResidual { .. } => "non-constant-residual",
            Error::ZeroModularTrace { .. } => "zero-modular-trace",
            Error::NotInPositiveOrthant(_) => "not-in-positive-orthant",
            Error::IntegrationFailure(_) => "integration-failure",
            Error::Schema(_) => "schema",
            Error::SkewViolation(_) => "skew-violation",
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_)
            | Error::SkewViolation(_)
            | Error::InvalidGrid(_)
            | Error::NonFinite(_)
            | Error::DimensionMismatch(_)
            | Error::NotInPositiveOrthant(_) => 2,
            Error::NotPoisson { .. } => 3,
            Error::StructuralMismatch { .. }
            | Error::NotVanishingOnGamma { .. }
            | Error::UnexpectedMonomial { .. }
            | Error::NonConstantResidual { .. } => 4,
            Error::ResonantInput { .. } | Error::ResonantDivisor { .. } => 5,
            Error::EigenvalueCollision { .. }
            | Error::NonProportionalSpectrum { .. }
            | Error::KVanishes { .. }
            | Error::ZeroModularTrace { .. }
            | Error::ZeroDivide { .. } => 6,
            Error::NonInvertibleLinearPart { .. } | Error::NotInvertible(_) => 7,
            Error::IntegrationFailure(_) => 8,
        }
    }
}
