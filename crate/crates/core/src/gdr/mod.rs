//! Time evolution: the space–time Galerkin system and a method-of-lines integrator.

mod cutoff;
mod dispersion;
mod evolve;
mod gmres;

pub use cutoff::{cutoff_level, restrict, CutoffResult};
pub use dispersion::{
    assemble_dispersion_system, assemble_dispersion_system_weighted, march, solve_system, DispersionSystem,
    DEFAULT_IC_WEIGHT,
};
pub use evolve::{evolve, EvolveOptions, Integrator, Rk4Stepper, Trajectory, DEFAULT_COURANT};
pub use gmres::{gmres, GmresOutcome, GmresSettings};

use crate::connection::ConnectionError;
use crate::moyal::MoyalError;
use crate::scales::ScalesError;
use crate::wavelets::WaveletError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GdrError {
    #[error("unknown integrator `{0}` (expected `rk4`)")]
    UnknownIntegrator(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("field grid differs from operator grid")]
    GridMismatch,
    #[error("dt = {dt:e} exceeds the stability bound; use dt <= {suggested:e}")]
    Unstable { dt: f64, suggested: f64 },
    #[error("non-finite field after step {step}")]
    NonFinite { step: usize },
    #[error("GMRES did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("degenerate time window [{t0}, {t1}]")]
    DegenerateWindow { t0: f64, t1: f64 },
    #[error("time basis of {n_t} functions is too small or not a power of two (need at least {min})")]
    TimeBasisTooSmall { n_t: usize, min: usize },
    #[error("system has not been solved")]
    NotSolved,
    #[error("cutoff ladder needs at least two levels, got {0}")]
    LadderTooShort(usize),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Moyal(#[from] MoyalError),
    #[error(transparent)]
    Scales(#[from] ScalesError),
}
