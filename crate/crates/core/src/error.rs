use thiserror::Error;

/// Errors raised across the walk, spectral and topology layers.
#[derive(Debug, Error)]
pub enum WalkError {
    #[error("site {site:?} lies outside the geometry")]
    SiteOutOfRange { site: (i64, i64) },

    #[error("initial spinor has zero norm")]
    ZeroNormSpinor,

    #[error("translation rule {rule} cannot be combined with boundary {boundary}")]
    RuleBoundaryMismatch { rule: String, boundary: String },

    #[error("state geometry {state} does not match protocol geometry {protocol}")]
    GeometryMismatch { state: String, protocol: String },

    #[error("family {family} requires a {expected} geometry")]
    FamilyGeometryMismatch { family: String, expected: String },

    #[error("angle table has {got} entries, geometry has {expected} sites")]
    ProfileLength { got: usize, expected: usize },

    #[error("non-finite angle in protocol")]
    NonFiniteAngle,

    #[error("dense construction needs {dim} basis states, cap is {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("momentum-space matrix requires uniform angles")]
    NonUniformProfile,

    #[error("band is gapless at k = {k:?} (|sin E| = {sin_e:e})")]
    GaplessPoint { k: (f64, f64), sin_e: f64 },

    #[error("band has {count} gapless grid points")]
    GaplessBand { count: usize },

    #[error("Bloch vector leaves the plane orthogonal to the chiral axis (max |n.A| = {max_dot:e})")]
    NonPlanar { max_dot: f64 },

    #[error("consecutive Bloch vectors subtend {angle} rad after refinement")]
    UnresolvedWinding { angle: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {residual:e}")]
    NonUnitary { residual: f64 },

    #[error("no normalizable bound state: {reason}")]
    NoBoundState { reason: String },

    #[error("E = {energy} subspace is not invariant under the charge operator (leak {leak:e})")]
    SubspaceNotInvariant { energy: f64, leak: f64 },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("tolerance breach: {0}")]
    ToleranceBreach(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WalkError>;
