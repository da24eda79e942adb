use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least one mode")]
    NoModes,
    #[error("mode {mode} out of range 1..={n_modes}")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("mode {0} listed twice")]
    DuplicateMode(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("covariance is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("state is not physical (min eigenvalue of sigma + i omega = {0:e})")]
    NonPhysical(f64),
    #[error("symplectic eigenvalue {0} is below 1")]
    SubUnitSymplectic(f64),
    #[error("symplectic eigenvalues do not pair up (relative gap {0:e})")]
    Unpaired(f64),
    #[error("Bogoliubov identity residual {residual:e} exceeds bound {bound:e}")]
    ChannelRejected { residual: f64, bound: f64 },
    #[error("phase G_{index} has modulus {modulus} (must be 1)")]
    PhaseModulus { index: usize, modulus: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("negative radicand {0:e} in fidelity formula")]
    NegativeRadicand(f64),
    #[error("fidelity denominator {0:e} is not positive")]
    Denominator(f64),
    #[error("fidelity {0} exceeds 1 beyond tolerance")]
    FidelityOvershoot(f64),
    #[error("oracle did not converge (residual {residual:e} above {bound:e})")]
    OracleDiverged { residual: f64, bound: f64 },
    #[error("step ladder must be positive and strictly decreasing")]
    BadSteps,
    #[error("h = {0} outside (0, 2): left wall would sit at or behind the horizon")]
    Horizon(f64),
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("fit residual {residual:e} for entry ({m},{n}) exceeds {bound:e}")]
    FitResidual { m: usize, n: usize, residual: f64, bound: f64 },
    #[error("quadrature did not converge (change {0:e})")]
    Quadrature(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
