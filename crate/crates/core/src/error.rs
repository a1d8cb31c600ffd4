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

    #[error("supplied mu = {supplied} disagrees with 3(C²R/2π)^(1/3) = {computed}")]
    MuMismatch { supplied: f64, computed: f64 },

    #[error("no valid switching time: t* = {t_star} is not positive")]
    NoSwitchingTime { t_star: f64 },

    #[error("optimal time-lag undefined: {0}")]
    UndefinedLag(&'static str),

    #[error("phi = π/2 is a removable singularity (tan φ is unbounded)")]
    PhiSingular,

    #[error("no real root for branch index {branch} ({available} real root(s) available)")]
    NoRealRoot { branch: usize, available: usize },

    #[error("root branch terminated at parameter {at}: {reason}")]
    BranchTerminated { at: f64, reason: &'static str },

    #[error("denominator k³ − θ − ζ vanishes at θ = {theta}")]
    DenominatorSingularity { theta: f64 },

    #[error("z = {z} outside curve support [{lo}, {hi}]")]
    OutsideSupport { z: f64, lo: f64, hi: f64 },

    #[error("logarithm domain violated at θ = {theta}")]
    LogDomain { theta: f64 },

    #[error("gamma = (1 ± σ²/2)^(-1) is singular")]
    GammaSingular,

    #[error("this family requires {0}")]
    WrongRate(&'static str),

    #[error("quadrature did not reach tolerance on [{a}, {b}] (error estimate {error})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("grid does not fit inside the surface support with a stencil margin")]
    SupportTooSmall,

    #[error("Picard iteration stalled at t = {t} after {iterations} iterations (last change {change})")]
    PicardStalled { t: f64, iterations: usize, change: f64 },

    #[error("parabolicity lost at S = {s}, t = {t} (S·u_SS = {s_gamma}, bound {bound})")]
    ParabolicityLost { s: f64, t: f64, s_gamma: f64, bound: f64 },

    #[error("refinement did not reduce the error: {0:?}")]
    NonMonotoneErrors(Vec<f64>),

    #[error("minimizer at bracket boundary (dt = {dt})")]
    MinimizerAtBoundary { dt: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Numerical failures (as opposed to validation failures of the inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::PicardStalled { .. }
                | Error::ParabolicityLost { .. }
                | Error::BranchTerminated { .. }
                | Error::DenominatorSingularity { .. }
                | Error::NonMonotoneErrors(_)
                | Error::MinimizerAtBoundary { .. }
        )
    }
}

pub(crate) fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
