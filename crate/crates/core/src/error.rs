use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty shape")]
    EmptyShape,

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("invalid box side {0}: must be >= 1")]
    InvalidBoxSide(i64),

    #[error("window escapes region")]
    WindowEscapesRegion,

    #[error("domains not disjoint")]
    DomainsNotDisjoint,

    #[error("domain mismatch between operands")]
    DomainMismatch,

    #[error("alphabet size {0} is too small: need at least 2")]
    AlphabetTooSmall(u32),

    #[error("not a probability distribution (total mass {0})")]
    NotProbability(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid tiling: {0} violation(s), first: {1}")]
    InvalidTiling(usize, String),

    #[error("shape {0} never occurs in the tiling")]
    ShapeNeverOccurs(usize),

    #[error("shape mismatch between tiling and law")]
    ShapeMismatch,

    #[error(
        "support product {0} exceeds cap {1}: truncate the distributions to their dominant blocks"
    )]
    SupportCapExceeded(usize, usize),

    #[error("test shape does not fit: {0}")]
    TestShapeDoesNotFit(String),

    #[error("no valid positions for the test shape")]
    NoValidPositions,

    #[error("insufficient positions: {got} < {need}")]
    InsufficientPositions { got: usize, need: usize },

    #[error("marginal mismatch: row/column sums differ from stated cell masses by {0}")]
    MarginalMismatch(f64),

    #[error("degenerate table: total mass {0}")]
    DegenerateTable(f64),

    #[error("empty axes")]
    EmptyAxes,

    #[error("invalid axis index {0} for table with {1} axes")]
    InvalidAxis(usize, usize),

    #[error("target outside achievable range: estimates at endpoints are [{at_one}, {at_zero}]")]
    TargetOutsideRange { at_zero: f64, at_one: f64 },

    #[error("tolerance {tol} is below estimator noise floor {floor} (3 standard errors)")]
    ToleranceBelowNoise { tol: f64, floor: f64 },

    #[error("replacement plan does not match the tiling: {0}")]
    PlanMismatch(String),

    #[error("region escape at step {0}")]
    RegionEscape(i64),

    #[error("assignment window [{lo}, {hi}) does not cover index {idx}")]
    WindowExceeded { lo: i64, hi: i64, idx: i64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
