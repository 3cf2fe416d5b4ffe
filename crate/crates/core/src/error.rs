use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("point {index} ({x}, {y}) lies outside the window")]
    OutsideWindow { index: usize, x: f64, y: f64 },

    #[error("pattern contains no points")]
    EmptyPattern,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("coordinate {0} is outside [0, 1]")]
    CoordinateDomain(f64),

    #[error("spacings require a pattern on the unit window")]
    NonUnitWindow,

    #[error("unknown kernel '{name}' (available: {available})")]
    UnknownKernel { name: String, available: String },

    /// A zero spacing reached a kernel that is undefined at the origin.
    #[error("kernel '{kernel}' is undefined at t = {t}")]
    DegenerateSpacing { kernel: String, t: f64 },

    #[error("kernel '{kernel}' evaluated to a non-finite value at quadrature node {node}")]
    NumericalDomain { kernel: String, node: f64 },

    #[error("limiting variance {sigma2} is negative beyond rounding")]
    NumericalConsistency { sigma2: f64 },

    #[error("kernel '{0}' has zero limiting variance; no test statistic exists")]
    DegenerateStatistic(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inhibition distance {inhibition_distance} saturated the window after {attempts} consecutive rejections")]
    Infeasible {
        inhibition_distance: f64,
        attempts: u64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name, used by the CLI and the C interface.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse_error",
            Error::OutsideWindow { .. } => "outside_window",
            Error::EmptyPattern => "empty_pattern",
            Error::InvalidWindow(_) => "invalid_window",
            Error::CoordinateDomain(_) => "coordinate_domain",
            Error::NonUnitWindow => "non_unit_window",
            Error::UnknownKernel { .. } => "unknown_kernel",
            Error::DegenerateSpacing { .. } => "degenerate_spacing",
            Error::NumericalDomain { .. } => "numerical_domain",
            Error::NumericalConsistency { .. } => "numerical_consistency",
            Error::DegenerateStatistic(_) => "degenerate_statistic",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Infeasible { .. } => "infeasible",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
