use crate::oscillator::ResonanceReport;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("harmonic index {0} is zero or repeated")]
    InvalidHarmonic(u32),
    #[error("non-finite coefficient in series")]
    NonFiniteCoefficient,
    #[error("circle grid needs at least 4 samples, got {0}")]
    GridTooSmall(usize),
    #[error("{m} samples cannot carry a series of degree {degree}")]
    Aliasing { m: usize, degree: u32 },
    #[error("analysis bandwidth n_max={n_max} must satisfy n_max < m/2 with m={m}")]
    AnalysisBandwidth { n_max: u32, m: usize },
    #[error("grid size mismatch: header says {header}, got {actual} values")]
    GridLengthMismatch { header: usize, actual: usize },
    #[error("mollifier half-width {0} must lie in (0, pi)")]
    MollifierWidth(f64),
    #[error("mollifier half-width {epsilon} under-resolved by grid spacing {spacing}")]
    MollifierUnderResolved { epsilon: f64, spacing: f64 },
    #[error("frequency must be positive and finite, got {0}")]
    BadFrequency(f64),
    #[error("operation needs an integer frequency, got {0}")]
    NonIntegerFrequency(f64),
    #[error("operation needs omega = 1, got {0}")]
    RequiresOmegaOne(f64),
    #[error(
        "forcing is resonant at omega={omega}: cos integral {}, sin integral {} exceed {}",
        report.cos_coeff, report.sin_coeff, report.tolerance
    )]
    Resonant { omega: f64, report: ResonanceReport },
    #[error("radial Hessian needs r > 0, got {0}")]
    NonPositiveRadius(f64),
    #[error("restriction is not convex: grid min of u''+u is {0}")]
    NotConvex(f64),
    #[error("antipodal gap {0} is not positive; no strictly supporting form exists")]
    AntipodalGapTooSmall(f64),
    #[error("supporting-form bracketing inconsistent: S1={s1} is not below S2={s2}")]
    SupportBracketing { s1: f64, s2: f64 },
    #[error("1-d bracket failed to localize the optimum (function not coercive?)")]
    BracketGrowth,
    #[error("forcing takes negative values: grid min {0}")]
    NegativeForcing(f64),
    #[error("forcing is identically zero")]
    ZeroForcing,
    #[error("positivity certification failed: certified bound {0}")]
    CertificationFailed(f64),
    #[error("counterexample construction needs integer omega >= 3, got {0}")]
    OmegaBelowThree(u32),
    #[error("epsilon {epsilon} outside the admissible range (0, {max})")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },
    #[error("piecewise construction needs m >= 1024, got {0}")]
    CoarseGrid(usize),
    #[error("exploration degree {0} exceeds the cap of 16")]
    DegreeTooLarge(u32),
    #[error("linear program: {0}")]
    Lp(&'static str),
    #[error("bundle verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
