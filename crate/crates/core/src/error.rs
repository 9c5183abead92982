use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the analysis chain can report.
///
/// Variants are grouped by the stage that raises them; [`Error::stage`] names
/// that stage so callers can attribute a failure without matching on variants.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // geometry / config
    #[error("unknown parameter `{name}` for family {family}")]
    UnknownParameter { family: String, name: String },
    #[error("length `{name}` must be strictly positive (got {value})")]
    NonPositiveLength { name: String, value: f64 },
    #[error("geometry is self-intersecting: {0}")]
    SelfIntersectingGeometry(String),
    #[error("degenerate polyline in electrode `{0}`")]
    DegeneratePolyline(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingRequiredKey(String),
    #[error("unknown trap family `{0}`")]
    UnknownFamily(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // bem
    #[error("collocation matrix is singular (condition estimate {conditioning:e})")]
    SingularMatrix { conditioning: f64 },
    #[error("mesh has {panels} panels, above the configured cap of {cap}")]
    MeshTooLarge { panels: usize, cap: usize },
    #[error("point ({x:.3}, {y:.3}) lies inside a conductor")]
    PointInsideConductor { x: f64, y: f64 },
    #[error("point ({x:.3}, {y:.3}) is too close to a boundary panel")]
    PointTooCloseToBoundary { x: f64, y: f64 },
    #[error("unknown electrode `{0}`")]
    UnknownElectrode(String),

    // analytic
    #[error("evaluation height must be positive (got {0})")]
    NonPositiveHeight(f64),

    // pseudopotential
    #[error("no pseudopotential minimum found in the seed region")]
    NoMinimumFound,
    #[error("{0} distinct pseudopotential minima found in the seed region")]
    MultipleMinimaInRegion(usize),
    #[error("no escape saddle inside the search window (depth exceeds {window_max:.4e} eV)")]
    NoSaddleFound { window_max: f64 },
    #[error("pseudopotential curvature is not positive (eigenvalue {0:e})")]
    NonPositiveCurvature(f64),

    // multipole
    #[error("fit circle intersects an electrode")]
    FitCircleIntersectsElectrode,
    #[error("multipole fit is ill-conditioned: {0}")]
    IllConditionedFit(String),
    #[error("quadrupole coefficient is zero")]
    ZeroQuadrupole,

    // optics
    #[error("ion position lies inside a conductor")]
    IonInsideConductor,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Name of the analysis stage that raised the error.
    pub fn stage(&self) -> &'static str {
        use Error::*;
        match self {
            UnknownParameter { .. }
            | NonPositiveLength { .. }
            | SelfIntersectingGeometry(_)
            | DegeneratePolyline(_) => "geometry",
            ParseError { .. } | MissingRequiredKey(_) | UnknownFamily(_) | InvalidConfig(_) => {
                "config"
            }
            SingularMatrix { .. }
            | MeshTooLarge { .. }
            | PointInsideConductor { .. }
            | PointTooCloseToBoundary { .. }
            | UnknownElectrode(_) => "bem_solver",
            NonPositiveHeight(_) => "analytic_set",
            NoMinimumFound
            | MultipleMinimaInRegion(_)
            | NoSaddleFound { .. }
            | NonPositiveCurvature(_) => "pseudopotential",
            FitCircleIntersectsElectrode | IllConditionedFit(_) | ZeroQuadrupole => "multipole",
            IonInsideConductor => "optics",
            Io(_) => "io",
        }
    }

    /// True for errors caused by the user's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self.stage(), "geometry" | "config" | "io")
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
