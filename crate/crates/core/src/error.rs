use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A caller asked for something that does not exist (bad index, bad label).
    #[error("usage error: {0}")]
    Usage(String),

    /// A physical parameter outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Frequency outside a tabulated material range.
    #[error("range error: {0}")]
    Range(String),

    /// Loaded tables contradict each other.
    #[error("model consistency error: {0}")]
    Consistency(String),

    /// The Hamiltonian or channel list could not be assembled.
    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The generator has more than one stationary state.
    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("propagation failed: {0}")]
    Stiffness(String),

    #[error("correlation window too short: {0}")]
    WindowTooShort(String),

    #[error("no resonance: {0}")]
    NoResonance(String),

    #[error("sensitivity undefined: {0}")]
    UndefinedSensitivity(String),

    #[error("signal did not stabilise: {0}")]
    NotStabilized(String),

    /// A sweep point failed; carries the grid index and value.
    #[error("solver failed at grid point {index} ({value}): {source}")]
    AtPoint {
        index: usize,
        value: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("data error in {path}: {msg}")]
    Data { path: String, msg: String },
}

impl Error {
    /// True for errors raised by the numerical solvers rather than by input.
    pub fn is_solver(&self) -> bool {
        match self {
            Error::Numerical(_)
            | Error::DegenerateSteadyState(_)
            | Error::Stiffness(_)
            | Error::WindowTooShort(_)
            | Error::NoResonance(_)
            | Error::UndefinedSensitivity(_)
            | Error::NotStabilized(_) => true,
            Error::AtPoint { source, .. } => source.is_solver(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
