use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("table dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension {d} exceeds the supported maximum of {max}")]
    DimensionTooLarge { d: usize, max: usize },
    #[error("expected {expected} cells, found {found}")]
    CellCount { expected: usize, found: usize },
    #[error("cell {index} is negative")]
    NegativeCell { index: usize },
    #[error("cells sum to {sum}, not 1")]
    NotNormalized { sum: String },
    #[error("axis {axis} out of range for dimension {d}")]
    AxisOutOfRange { axis: usize, d: usize },
    #[error("axes must be distinct, got {0} twice")]
    SameAxis(usize),
    #[error("univariate margin of axis {axis} is degenerate")]
    DegenerateMargin { axis: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported target for pair ({i}, {j}): {reason}")]
    UnsupportedTarget { i: usize, j: usize, reason: String },
    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),
    #[error("feasible set is empty{}", match .row { Some(r) => format!(" (emptied by constraint row {r})"), None => String::new() })]
    EmptyFeasibleSet { row: Option<usize> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("weights sum to {sum}, not 1")]
    WeightsNotNormalized { sum: String },
    #[error("pmf is not in the polytope (best residual {residual:e})")]
    NotInPolytope { residual: f64 },
    #[error("cell {index} is not strictly positive after smoothing")]
    NonPositiveCell { index: usize },
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("starting pmf is infeasible (residual {residual:e})")]
    InfeasibleStart { residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse {0:?} as an exact number")]
    Parse(String),
}
