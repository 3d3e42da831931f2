use pugraph::dynamics::DynamicsError;
use pugraph::guidance::GuidanceError;
use pugraph::io::IoError;
use pugraph::robustness::RobustnessError;
use pugraph::spectral::SpectralError;
use pugraph::GraphError;
use serde::Serialize;

pub const BAD_INPUT: u8 = 2;
pub const INFEASIBLE: u8 = 3;
pub const NUMERICAL: u8 = 4;

/// Written to stderr as one JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn bad_input(message: impl Into<String>) -> Self {
        Self { code: BAD_INPUT, kind: "bad_input", message: message.into() }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self { code: INFEASIBLE, kind: "infeasible", message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: NUMERICAL, kind: "numerical", message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Graph(g) => g.into(),
            SpectralError::NonPositiveEpsilon(_) | SpectralError::DimensionMismatch { .. } => Self::bad_input(e.to_string()),
            SpectralError::RankDeficiencyNotOne => Self::infeasible(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<RobustnessError> for CliError {
    fn from(e: RobustnessError) -> Self {
        match e {
            RobustnessError::Graph(g) => g.into(),
            RobustnessError::LeadingIndexOutOfRange { .. } | RobustnessError::SelectorOutOfRange { .. } => {
                Self::bad_input(e.to_string())
            }
            RobustnessError::UnstableNominal(_) | RobustnessError::NominalInfeasible => Self::infeasible(e.to_string()),
            RobustnessError::DegenerateNumerator | RobustnessError::NoCrossingWithinLimit(_) => {
                Self::numerical(e.to_string())
            }
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Spectral(s) => s.into(),
            _ => Self::bad_input(e.to_string()),
        }
    }
}

impl From<GuidanceError> for CliError {
    fn from(e: GuidanceError) -> Self {
        match e {
            GuidanceError::Graph(g) => g.into(),
            GuidanceError::Spectral(s) => s.into(),
            GuidanceError::InvalidConfig(_) => Self::bad_input(e.to_string()),
            GuidanceError::ConsensusInfeasibleTopology => Self::infeasible(e.to_string()),
            GuidanceError::NonConvergentPursuit { .. } => Self::numerical(e.to_string()),
        }
    }
}
