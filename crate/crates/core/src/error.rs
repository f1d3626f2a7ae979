use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the kernel can report.
///
/// Variants carry enough context to be surfaced verbatim in JSON reports and
/// as CLI diagnostics; [`Error::code`] gives the stable short name used there.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // scalar field
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands come from different scalar backends")]
    BackendMismatch,
    #[error("floating point result is not finite")]
    NonFiniteResult,
    #[error("square root of a negative number")]
    NegativeRadicand,
    #[error("{0} is not the square of a rational")]
    NonSquareRational(String),

    // projective kernel
    #[error("points coincide")]
    CoincidentPoints,
    #[error("lines coincide")]
    CoincidentLines,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("points are not in general position: {0}")]
    DegeneratePosition(String),
    #[error("projective map is singular")]
    SingularMap,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("zero vector is not a projective element")]
    ZeroVector,

    // conics
    #[error("five points do not determine a unique conic")]
    NoUniqueConic,
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("point is not on the conic")]
    PointNotOnConic,
    #[error("conic is degenerate")]
    DegenerateConic,
    #[error("discriminant is not a rational square")]
    NonSquareDiscriminant,
    #[error("point lies inside the conic, no real tangents")]
    InsidePoint,

    // configurations
    #[error("vertex {0} is not on the conic")]
    VertexNotOnConic(String),
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuadrilateral(String),
    #[error("sampler exhausted after {retries} retries: {reason}")]
    SamplerExhausted { retries: usize, reason: String },
    #[error("family {0} is not present")]
    MissingFamily(String),
    #[error("unknown subject {0}")]
    UnknownSubject(String),

    // claims
    #[error("conic is not a circle")]
    NotACircle,
    #[error("vertex {0} of the diagonal triangle is at infinity")]
    InfiniteVertex(String),

    // poncelet
    #[error("degenerate pencil: {0}")]
    DegeneratePencil(String),
    #[error("point lies inside the inner conic")]
    InsideInner,
    #[error("point lies on the inner conic, single tangent")]
    TangentFromOnConic,
    #[error("quadrilateral is not inscribed in the outer conic")]
    NotInscribed,
    #[error("quadrilateral is not circumscribed about the inner conic")]
    NotCircumscribed,
    #[error("transformed conics do not match the canonical pencil: {0}")]
    PencilMismatch(String),
    #[error("sequence degenerated at step {step}: {reason}")]
    SequenceDegenerated { step: usize, reason: String },

    // polygons
    #[error("degenerate diagonals at index {0}")]
    DegenerateDiagonals(usize),

    // documents
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported document version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
}

impl Error {
    /// Stable identifier used in JSON documents (`"absent": "InsidePoint"`).
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::BackendMismatch => "BackendMismatch",
            Error::NonFiniteResult => "NonFiniteResult",
            Error::NegativeRadicand => "NegativeRadicand",
            Error::NonSquareRational(_) => "NonSquareRational",
            Error::CoincidentPoints => "CoincidentPoints",
            Error::CoincidentLines => "CoincidentLines",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::DegeneratePosition(_) => "DegeneratePosition",
            Error::SingularMap => "SingularMap",
            Error::NotCollinear => "NotCollinear",
            Error::ZeroVector => "ZeroVector",
            Error::NoUniqueConic => "NoUniqueConic",
            Error::Inconsistent => "Inconsistent",
            Error::PointNotOnConic => "PointNotOnConic",
            Error::DegenerateConic => "DegenerateConic",
            Error::NonSquareDiscriminant => "NonSquareDiscriminant",
            Error::InsidePoint => "InsidePoint",
            Error::VertexNotOnConic(_) => "VertexNotOnConic",
            Error::DegenerateQuadrilateral(_) => "DegenerateQuadrilateral",
            Error::SamplerExhausted { .. } => "SamplerExhausted",
            Error::MissingFamily(_) => "MissingFamily",
            Error::UnknownSubject(_) => "UnknownSubject",
            Error::NotACircle => "NotACircle",
            Error::InfiniteVertex(_) => "InfiniteVertex",
            Error::DegeneratePencil(_) => "DegeneratePencil",
            Error::InsideInner => "InsideInner",
            Error::TangentFromOnConic => "TangentFromOnConic",
            Error::NotInscribed => "NotInscribed",
            Error::NotCircumscribed => "NotCircumscribed",
            Error::PencilMismatch(_) => "PencilMismatch",
            Error::SequenceDegenerated { .. } => "SequenceDegenerated",
            Error::DegenerateDiagonals(_) => "DegenerateDiagonals",
            Error::Schema(_) => "Schema",
            Error::Version { .. } => "Version",
        }
    }

    /// True for errors caused by the caller's input rather than the kernel.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Inconsistent)
    }
}
