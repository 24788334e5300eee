use thiserror::Error;

/// Numerical and structural failures raised by the library.
///
/// Display strings are stable: the CLI forwards them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("exchange requires degree-1 control dependence")]
    ExchangeDegree,

    #[error("degenerate fundamental")]
    DegenerateFundamental,
    #[error("biorthogonality breakdown")]
    BiorthogonalityBreakdown,
    #[error("complex fundamental")]
    ComplexFundamental,
    #[error("eigensolver did not converge")]
    EigenNotConverged,
    #[error("singular bordered system")]
    SingularBordered,
    #[error("singular operator")]
    SingularOperator,
    #[error("zero fundamental source coupling")]
    ZeroFundamentalCoupling,

    #[error("no sign change in bracket")]
    NoSignChange,
    #[error("criticality inside bracket")]
    CriticalityInBracket,
    #[error("non-unique root")]
    NonUniqueRoot,
    #[error("root finder did not converge")]
    RootNotConverged,
    #[error("zero gauge factor")]
    ZeroGaugeFactor,
    #[error("zero gauge reference")]
    ZeroGaugeReference,

    #[error("zero differential weight")]
    ZeroDifferentialWeight,
    #[error("control not linear")]
    ControlNotLinear,
    #[error("order exceeded: requested {requested}, available {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("observability mismatch: bracket {bracket:e}, finite difference {finite_difference:e}")]
    ObservabilityMismatch {
        bracket: f64,
        finite_difference: f64,
    },
    #[error("diagonal-sum identity violated at order {order}: {discrepancy:e}")]
    DiagonalSumViolated { order: usize, discrepancy: f64 },
    #[error("path crosses criticality")]
    PathCrossesCriticality,
    #[error("inverse function not resolvable")]
    InverseNotResolvable,
    #[error("quadrature not converged")]
    QuadratureNotConverged,
    #[error("insufficient samples")]
    InsufficientSamples,
    #[error("rank-deficient sample set")]
    RankDeficientSamples,

    #[error("dimension must be 2")]
    NotTwoByTwo,
    #[error("degenerate 1D instance")]
    DegenerateOneD,
    #[error("constraints det B = det C = B*C = 0 violated")]
    TwoDConstraintsViolated,
    #[error("degenerate 2D instance")]
    DegenerateTwoD,
    #[error("fit residual too large: {0:e}")]
    FitResidual(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
