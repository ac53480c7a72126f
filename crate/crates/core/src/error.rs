use crate::exprlang::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("cannot parse `{source_text}`: {error}")]
    Parse { source_text: String, error: ParseError },

    #[error(transparent)]
    Domain(#[from] EvalError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("a0*b0 vanishes at x = {x}, t = {t} (|a0*b0| = {value:e})")]
    DegenerateCoefficients { x: f64, t: f64, value: f64 },

    #[error("background term u{0} is not available")]
    MissingBackgroundTerm(usize),

    #[error("gradient catastrophe: characteristics cross at t = {time}")]
    GradientCatastrophe { time: f64 },

    #[error("characteristic feet do not cover the requested x range")]
    CharacteristicsDoNotCover,

    #[error("front constant rho must be nonzero")]
    RhoZero,

    #[error("b0 depends on x (max |b0_x| = {max:e} on the window)")]
    B0DependsOnX { max: f64 },

    #[error("front solution stops at t = {omega_plus} before reaching T = {t_end}")]
    BlowupBeforeT { omega_plus: f64, t_end: f64 },

    #[error("amplitude A(t) collapses at t = {t} (A = {amplitude:e})")]
    FrameDegenerate { t: f64, amplitude: f64 },

    #[error("beta(t) = {beta} <= 0 at t = {t}; flip the sign of rho so the layer decays as tau -> +inf")]
    Orientation { t: f64, beta: f64 },

    #[error("solvability conditions violated: max |alpha_{index}| = {value:e} > {tolerance:e}")]
    SolvabilityViolated { index: usize, value: f64, tolerance: f64 },

    #[error("adaptive quadrature did not reach tolerance on [{from}, {to}]")]
    QuadratureFail { from: f64, to: f64 },

    #[error("time step collapsed to {dt:e} at t = {t}")]
    CflCollapse { dt: f64, t: f64 },

    #[error("non-finite value in the numeric field at step {step} (t = {t})")]
    NanDetected { step: usize, t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn parse(source_text: &str, error: ParseError) -> Self {
        Error::Parse {
            source_text: source_text.to_string(),
            error,
        }
    }
}
