use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("state `{label}` does not exist in the n={manifold} manifold")]
    UnknownDressedState { manifold: usize, label: String },

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("density matrix violates `{invariant}` (deviation {deviation:e})")]
    InvalidDensity {
        invariant: &'static str,
        deviation: f64,
    },

    #[error("populations are not a valid distribution: {0}")]
    InvalidPopulations(String),

    #[error("dark-state populations are nonzero (dark1={dark1}, dark2={dark2}); use the explicit dark-state override")]
    DarkPopulation { dark1: f64, dark2: f64 },

    #[error("rate generator is not a valid kinetic generator: {0}")]
    InvalidGenerator(String),

    #[error("steady state is not unique: null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("normalization polynomial vanishes (all of gamma, k and pump are zero)")]
    ZeroNormalization,

    #[error("steady-state residual {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("step dt={dt} too large: population {value:e} left [-1e-6, 1+1e-6] at t={time}; use a smaller dt")]
    StepTooLarge { dt: f64, time: f64, value: f64 },

    #[error("time evolution did not relax within t={t_max} (|dP/dt| = {rate:e})")]
    NoRelaxation { t_max: f64, rate: f64 },

    #[error("eigenvalue of rho*rho_tilde is not real and non-negative: {re:e}{im:+e}i")]
    SpinFlipSpectrum { re: f64, im: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("unsupported output format `{0}` (expected csv or json)")]
    UnsupportedFormat(String),

    #[error("at grid point pump={pump}, k={k}: {source}")]
    AtGridPoint {
        pump: f64,
        k: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "threshold bracket failure: C_max(eta={eta_lo})={c_lo:e} and C_max(eta={eta_hi})={c_hi:e}; \
         need zero at the lower end and positive at the upper end"
    )]
    Bracket {
        eta_lo: f64,
        c_lo: f64,
        eta_hi: f64,
        c_hi: f64,
    },

    #[error("fock cutoff {0} is too small (need at least 3)")]
    FockCutoff(usize),

    #[error("cutoff convergence failed: reduced state changed by {difference:e} between N_max={lower} and N_max={upper}; increase the cutoff")]
    CutoffConvergence {
        lower: usize,
        upper: usize,
        difference: f64,
    },
}

impl Error {
    pub(crate) fn at_grid_point(self, pump: f64, k: f64) -> Self {
        Error::AtGridPoint {
            pump,
            k,
            source: Box::new(self),
        }
    }

    /// True for failures of a numerical procedure rather than of the request.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateSteadyState { .. }
            | Error::ZeroNormalization
            | Error::Residual { .. }
            | Error::StepTooLarge { .. }
            | Error::NoRelaxation { .. }
            | Error::SpinFlipSpectrum { .. }
            | Error::Bracket { .. }
            | Error::CutoffConvergence { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
