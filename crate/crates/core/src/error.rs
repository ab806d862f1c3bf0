use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("right-hand side is not orthogonal to the ground state (mean {mean})")]
    Solvability { mean: String },

    #[error("odd coefficient a[{index}] = {value} is nonzero")]
    ParityViolation { index: usize, value: String },

    #[error("series too short: need {needed} nonzero orders beyond the constant, have {have}")]
    UnderLength { needed: usize, have: usize },

    #[error("basis truncation N_max = {n_max} is below the minimum of 3")]
    TruncationTooSmall { n_max: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    Solver { iterations: usize },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("ambiguous resonance: eigenvalues {first} and {second} are both close to the seed {seed}")]
    Ambiguous {
        seed: String,
        first: String,
        second: String,
    },

    #[error("no convergence within budget (best estimate {best}, last increment {increment:e})")]
    NonConvergence { best: String, increment: f64 },

    #[error("branch jump at continuation step {step}: |dE| = {jump:e} exceeds bound {bound:e}")]
    BranchJump { step: usize, jump: f64, bound: f64 },

    #[error("unsupported Borel-Leroy order q = {0}")]
    UnsupportedOrder(String),

    #[error("degenerate [{l}/{m}] Pade system; try [{}/{}]", l.saturating_sub(1), m.saturating_sub(1))]
    PadeDegenerate { l: usize, m: usize },

    #[error("t = {t} is within {distance:e} of a pole; use the principal-value path")]
    PoleProximity { t: f64, distance: f64 },

    #[error("unsupported pole structure: {0}")]
    UnsupportedPole(String),

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
