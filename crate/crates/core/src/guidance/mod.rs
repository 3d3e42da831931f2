//! Cooperative simultaneous interception of a moving target.
//!
//! Each interceptor flies deviated pursuit; a consensus term on the
//! interceptors' time-to-go, shared over a pseudo-undirected graph, bends the
//! deviation angle so that all impact times agree.

mod kinematics;
mod salvo;
mod tgo;

pub use kinematics::{
    guidance_command, kinematics_derivatives, Derivatives, GuidanceCommand, Interceptor, Target,
};
pub use salvo::{
    simulate_salvo, simulate_salvo_with_coupling, tgo_consensus_residual, ResidualReport,
    SalvoConfig, SalvoResult, SalvoSample,
};
pub use tgo::{
    cross_validate, deviated_pursuit_time_to_go, oracle_time_to_go, time_to_go, OracleSettings,
    TgoProvider,
};

use thiserror::Error;

use crate::graph::GraphError;
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),

    #[error("pursuit does not close within {horizon} s")]
    NonConvergentPursuit { horizon: f64 },

    #[error("communication topology does not reach consensus")]
    ConsensusInfeasibleTopology,

    #[error("invalid salvo configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GuidanceError>;

/// Standard gravity, m/s².
pub const G0: f64 = 9.81;
