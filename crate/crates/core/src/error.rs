use thiserror::Error;

/// Errors produced by the library. Variants map one-to-one onto the error
/// names used in file formats and CLI messages (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle-not-representable: {0}")]
    AngleNotRepresentable(String),
    #[error("boundary-point: the point lies on the wedge boundary")]
    BoundaryPoint,
    #[error("invalid-walk: {0}")]
    InvalidWalk(String),
    #[error("degenerate-correlation: |rho| = 1")]
    DegenerateCorrelation,
    #[error("insufficient-moments: table has order {have}, need {need}")]
    InsufficientMoments { have: usize, need: usize },
    #[error("singular-angle: M_{{{n},b}} is singular (b = tan(q*pi/{n}))")]
    SingularAngle { n: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resonant-subdegree: internal error, singular system at degree {degree}")]
    ResonantSubdegree { degree: usize },
    #[error("degree-too-high: degree {n} is not below pi/alpha = {p_alpha}")]
    DegreeTooHigh { n: usize, p_alpha: f64 },
    #[error("moment-not-finite: E[tau^{k}] is infinite since {k} >= pi/(2 alpha) = {half_p}")]
    MomentNotFinite { k: usize, half_p: f64 },
    #[error("angle-out-of-range: {0}")]
    AngleOutOfRange(String),
    #[error("resonant-degree: degree {degree} is not below m = {m}")]
    ResonantDegree { degree: usize, m: usize },
    #[error("start-not-interior: start point must have both coordinates >= 1")]
    StartNotInterior,
    #[error("moment-check-invalid: {0}")]
    MomentCheckInvalid(String),
    #[error("insufficient-survivors: {survivors} paths survive past n = 64, need {needed}")]
    InsufficientSurvivors { survivors: u64, needed: u64 },
    #[error("not-representable: {0}")]
    NotRepresentable(String),
    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },
}

impl Error {
    pub fn parse(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            detail: detail.into(),
        }
    }

    /// Short machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AngleNotRepresentable(_) => "angle-not-representable",
            Error::BoundaryPoint => "boundary-point",
            Error::InvalidWalk(_) => "invalid-walk",
            Error::DegenerateCorrelation => "degenerate-correlation",
            Error::InsufficientMoments { .. } => "insufficient-moments",
            Error::SingularAngle { .. } => "singular-angle",
            Error::Precondition(_) => "precondition",
            Error::ResonantSubdegree { .. } => "resonant-subdegree",
            Error::DegreeTooHigh { .. } => "degree-too-high",
            Error::MomentNotFinite { .. } => "moment-not-finite",
            Error::AngleOutOfRange(_) => "angle-out-of-range",
            Error::ResonantDegree { .. } => "resonant-degree",
            Error::StartNotInterior => "start-not-interior",
            Error::MomentCheckInvalid(_) => "moment-check-invalid",
            Error::InsufficientSurvivors { .. } => "insufficient-survivors",
            Error::NotRepresentable(_) => "not-representable",
            Error::Parse { .. } => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
