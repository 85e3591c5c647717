use thiserror::Error;

use crate::valued::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("cannot parse axis {0:?} (expected t<k>, u<k> or intrinsic)")]
    ParseAxis(String),

    #[error("zero element has no valuation function")]
    ZeroElement,

    #[error("empty or inverted window [{lo}, {hi}]")]
    EmptyWindow { lo: String, hi: String },

    #[error("domain mismatch between piecewise-affine functions")]
    DomainMismatch,

    #[error("piecewise-affine data is discontinuous at {0}")]
    Discontinuous(String),

    #[error("twisted polynomials use different derivations")]
    DerivationMismatch,

    #[error("zero twisted polynomial")]
    ZeroPolynomial,

    #[error("twisted polynomial is not monic")]
    NotMonic,

    #[error("no vertex of the Newton polygon separates slopes at {0}")]
    NoSeparatingVertex(String),

    #[error("slope {slope} is not below the visibility threshold {threshold}")]
    SlopeNotVisible { slope: String, threshold: String },

    #[error("element has no unique dominant monomial at the given radius")]
    NotAUnit,

    #[error("factorization did not reach precision {precision}; best residual {best}")]
    NoConvergence { precision: String, best: String },

    #[error("module integrability fails for derivations {0} and {1}")]
    NotIntegrable(Axis, Axis),

    #[error("axis {0} is not part of this module")]
    UnknownAxis(Axis),

    #[error("no cyclic vector found among {tried} candidates")]
    CyclicVectorSearch { tried: usize },

    #[error("characteristic polynomial degenerates: {0}")]
    Degenerate(String),

    #[error("no visible gap between subsidiary radii")]
    NoVisibleGap,

    #[error("p = 0 has no Frobenius; the caller must branch")]
    ZeroCharacteristic,

    #[error("capped radius entry cannot be transformed")]
    CappedEntry,

    #[error("intrinsic log-radius {0} equals the pure value p/(p-1); pullback is ambiguous")]
    AmbiguousPureValue(String),

    #[error("intrinsic log-radius {value} violates the precondition {bound}")]
    OutOfRegime { value: String, bound: String },

    #[error("residue {n} is not in 0..{p}")]
    ResidueOutOfRange { n: i64, p: u32 },

    #[error("{0} is not 0 or a prime")]
    BadPrime(u64),

    #[error("tame exponent {n} is zero or divisible by p = {p}")]
    BadTameExponent { n: i64, p: u32 },

    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(String),

    #[error("direction {0:?} is not primitive")]
    NotPrimitive(Vec<i64>),

    #[error("point lies outside the polyhedral set")]
    OutsideSet,

    #[error("polyhedral set is unbounded or has empty interior")]
    NotCompact,

    #[error("slice oracle inconsistent along {direction:?} from {point:?}: {reason}")]
    OracleInconsistent { point: Vec<String>, direction: Vec<i64>, reason: String },

    #[error("profile is not solvable at the boundary: {0}")]
    NotSolvable(String),

    #[error("insufficient certified coverage: {0}")]
    InsufficientCoverage(String),

    #[error("empty axis map")]
    EmptyAxisMap,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
