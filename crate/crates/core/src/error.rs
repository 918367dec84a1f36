use std::path::PathBuf;

/// Errors raised by the simulation library and the scenario runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("time grid too narrow: norm deficit {deficit:.3e} exceeds {limit:.0e} ({context})")]
    GridTooNarrow {
        deficit: f64,
        limit: f64,
        context: String,
    },

    #[error("wavepackets live on different time grids")]
    GridMismatch,

    #[error("spectra have incompatible frequency axes")]
    AxisMismatch,

    #[error("detuning {delta_f_mhz} MHz aliases on a grid with dt = {dt_ns} ns")]
    Aliasing { delta_f_mhz: f64, dt_ns: f64 },

    #[error("result has zero norm")]
    ZeroNorm,

    #[error("coupling cap too small: required rate exceeds cap over {excess_fraction:.3} of the packet energy (achievable fidelity {achievable_fidelity:.4})")]
    CouplingCapExceeded {
        excess_fraction: f64,
        achievable_fidelity: f64,
    },

    #[error("integration did not converge: trace drift {drift:.3e} after {retries} step halvings")]
    NotConverged { drift: f64, retries: u32 },

    #[error("quadrature did not reach tolerance: error estimate {estimate:.3e} after {evaluations} panel evaluations")]
    QuadratureNotConverged { estimate: f64, evaluations: usize },

    #[error("matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("incomplete Pauli expectation set: missing {0}")]
    IncompleteTomography(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no data: {0}")]
    NoData(String),

    #[error("frequency {f0} GHz outside data range [{lo}, {hi}] GHz")]
    OutOfRange { f0: f64, lo: f64, hi: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
