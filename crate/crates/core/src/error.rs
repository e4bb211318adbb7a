use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cubic root solver residual {residual:e} exceeds {limit:e}")]
    RootSolver { residual: f64, limit: f64 },

    #[error("singular spectral parameter: |det(lambda - A)| = {det_abs:e} at |xi|^2 = {xi_sq}, lambda = {lambda}")]
    SingularParameter {
        xi_sq: f64,
        lambda: Complex64,
        det_abs: f64,
    },

    #[error("singular spectral parameter at grid mode {mode:?}: lambda = {lambda} is an eigenvalue of A(xi)")]
    SingularMode { mode: Vec<i64>, lambda: Complex64 },

    #[error("invalid scaling index j = {0}; expected 0, 1 or 2")]
    InvalidIndex(i64),

    #[error("symbol `{symbol}` is not finite at xi = {xi:?}, lambda = {lambda}")]
    Evaluation {
        symbol: String,
        xi: Vec<f64>,
        lambda: Complex64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite field value in component `{0}`")]
    NonFinite(&'static str),

    #[error("evolved field has imaginary residue {0:e} relative to its real part")]
    ImaginaryResidue(f64),

    #[error("boundary condition {bc} is not defined on a {domain}")]
    InconsistentBoundary { bc: String, domain: String },

    #[error("ghost elimination failed at boundary node {0}: singular local system")]
    GhostElimination(usize),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("generator has an eigenvalue with real part {0:e} above the stability threshold")]
    Unstable(f64),

    #[error("spectral projection is ill conditioned (condition {0:e})")]
    IllConditioned(f64),

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("eigenvalue matching failed between grids {coarse} and {fine}: {detail}")]
    Matching {
        coarse: String,
        fine: String,
        detail: String,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
