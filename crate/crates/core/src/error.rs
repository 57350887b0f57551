use thiserror::Error;

/// Errors shared across the library.
///
/// Degeneracies that a caller may legitimately want to branch on (zero-norm
/// input, exhausted Fock headroom, ...) are explicit variants rather than
/// silent NaNs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operands live in different domains (time vs frequency)")]
    DomainMismatch,
    #[error("sampled grids differ ({0}); resample one operand first")]
    GridMismatch(String),
    #[error("operation needs domain {expected:?} but signal is in {found:?}")]
    WrongDomain { expected: crate::signal::Domain, found: crate::signal::Domain },
    #[error("signal has zero norm within tolerance; cannot normalize")]
    ZeroNorm,
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("operation undefined for a delta distribution")]
    DeltaNotSquareIntegrable,
    #[error("no exact closed-form rule for this operand pair; render to a grid first")]
    NoClosedFormRule,
    #[error("grid too short for the result support; need at least span {required_span}")]
    GridTooShort { required_span: f64 },
    #[error("spectral leakage {leak:.3e} at grid edge exceeds tolerance {tol:.3e}; refine the grid")]
    AliasingDetected { leak: f64, tol: f64 },
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("pump parameter must satisfy 0 <= epsilon < gamma (epsilon {epsilon}, gamma {gamma})")]
    PumpOutOfRange { epsilon: f64, gamma: f64 },
    #[error("wavepacket must be normalized (|norm - 1| = {deviation:.3e} exceeds tolerance)")]
    NotNormalized { deviation: f64 },
    #[error("wavepacket must be real; imaginary part {im_max:.3e} exceeds tolerance")]
    ComplexWavepacket { im_max: f64 },
    #[error("equivalent loss is indefinite at this point (both variances at vacuum level)")]
    IndefiniteLoss,
    #[error("decay rates too close for the closed form (|gamma - big_gamma|/gamma = {rel_gap:.3e} <= 1e-6); use the numeric route")]
    DegenerateRates { rel_gap: f64 },
    #[error("quadrature failed to converge: change {change:.3e} above tolerance {tol:.3e}")]
    QuadratureNotConverged { change: f64, tol: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mode index {mode} out of range for {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },
    #[error("cutoff headroom exhausted in mode {mode}: population {population:.3e} at the top shell")]
    HeadroomExhausted { mode: usize, population: f64 },
    #[error("truncation leakage {leakage:.3e} exceeds tolerance {tol:.3e}; retry with cutoff >= {suggested_cutoff}")]
    TruncationLeakage { leakage: f64, tol: f64, suggested_cutoff: usize },
    #[error("subtraction from vacuum yields the zero vector")]
    VacuumSubtraction,
}

pub type Result<T> = std::result::Result<T, Error>;
