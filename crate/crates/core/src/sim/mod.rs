//! Tour simulation: environments, scripted agents and the three-phase tour
//! loop (navigation, oracle goal, oracle start) with persistent memory.

mod agent;
mod discovery;
mod ordering;
mod runner;
mod scene;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agent::{Action, Agent, AgentSpec, NoisyAgent, OracleAgent, StepContext};
pub use discovery::{discover_viewpoint, trigger_lazy_detection, ContinuousMemory, Thresholds};
pub use ordering::{order_episodes_into_tour, order_tour, tour_cost, Ordering};
pub use runner::{run_tour, TourMemory, TourRunner};
pub use scene::{densify, ContinuousScene, DiscreteScene, Environment, Rect, SceneViewpoint};

use crate::detection::DetectionError;
use crate::fusion::{FusedKeyword, FusionError};
use crate::geometry::Position;
use crate::keywords::KeywordError;
use crate::metrics::TourTrajectory;
use crate::omnigraph::{GraphError, Omnigraph, ViewpointId};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("tour is for scene '{tour}' but the environment is '{env}'")]
    SceneMismatch { tour: String, env: String },
    #[error("agent failed in episode {episode}: {message}")]
    AgentFailure { episode: usize, message: String },
    #[error("invalid episode: {0}")]
    InvalidEpisode(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("pose not in scene: {0}")]
    PoseNotInScene(String),
    #[error("no path: {0}")]
    NoPath(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Keyword(#[from] KeywordError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::SceneMismatch { .. } => "SceneMismatch",
            SimError::AgentFailure { .. } => "AgentFailure",
            SimError::InvalidEpisode(_) => "InvalidEpisode",
            SimError::InvalidScene(_) => "InvalidScene",
            SimError::PoseNotInScene(_) => "PoseNotInScene",
            SimError::NoPath(_) => "NoPath",
            SimError::ConfigInvalid(_) => "ConfigInvalid",
            SimError::Graph(e) => e.code(),
            SimError::Detection(_) => "DetectionError",
            SimError::Keyword(e) => e.code(),
            SimError::Fusion(e) => e.code(),
        }
    }
}

/// A viewpoint id in discrete scenes, a free-space point in continuous ones.
/// Serialized as a bare string or a coordinate array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pose {
    Viewpoint(ViewpointId),
    Point(Position),
}

impl Pose {
    pub fn vp(id: &str) -> Self {
        Pose::Viewpoint(crate::omnigraph::vp_id(id))
    }

    pub fn at(x: f64, y: f64) -> Self {
        Pose::Point(Position::new(x, y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub instruction: String,
    pub start: Pose,
    pub goal: Pose,
    pub gt_path: Vec<Pose>,
    /// Initial heading for continuous scenes; discrete scenes ignore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_heading_deg: Option<f64>,
}

impl Episode {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.gt_path.first() != Some(&self.start) || self.gt_path.last() != Some(&self.goal) {
            return Err(SimError::InvalidEpisode(format!("'{}': gt_path must run from start to goal", self.id)));
        }
        Ok(())
    }

    /// Checks poses and consecutive moves against `env`.
    pub fn validate_in(&self, env: &Environment) -> Result<(), SimError> {
        self.validate()?;
        for p in &self.gt_path {
            env.position_of(p)?;
        }
        for w in self.gt_path.windows(2) {
            if !env.is_valid_move(&w[0], &w[1]) {
                return Err(SimError::InvalidEpisode(format!("'{}': gt_path has an invalid move", self.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub tour_id: String,
    pub scene_id: String,
    pub episodes: Vec<Episode>,
}

/// On-disk collection of tours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TourFile {
    pub tours: Vec<Tour>,
}

impl TourFile {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SimError> {
        let f: TourFile = serde_json::from_slice(bytes).map_err(|e| SimError::InvalidEpisode(e.to_string()))?;
        for t in &f.tours {
            for e in &t.episodes {
                e.validate()?;
            }
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tours serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    OracleStart,
    Navigation,
    OracleGoal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub pose: Pose,
    pub position: Position,
    /// Whether detection ran on arrival.
    pub detected: bool,
    /// Fusion result the agent saw at this pose (navigation phase only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused: Option<Vec<FusedKeyword>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub phase: Phase,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode_id: String,
    pub instruction: String,
    pub keywords: Vec<String>,
    pub phases: Vec<PhaseTrace>,
    pub executed_positions: Vec<Position>,
    pub gt_positions: Vec<Position>,
    pub shortest_path_length: f64,
}

impl EpisodeLog {
    pub fn phase(&self, phase: Phase) -> Option<&PhaseTrace> {
        self.phases.iter().find(|p| p.phase == phase)
    }

    /// Navigation-phase poses.
    pub fn executed(&self) -> Vec<Pose> {
        self.phase(Phase::Navigation).map(|p| p.steps.iter().map(|s| s.pose.clone()).collect()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourLog {
    pub tour_id: String,
    pub scene_id: String,
    pub episodes: Vec<EpisodeLog>,
    pub graph: Omnigraph,
}

impl TourLog {
    /// Concatenated navigation and reference paths.
    pub fn trajectory(&self) -> TourTrajectory {
        TourTrajectory::from_episodes(
            self.episodes.iter().map(|e| (e.executed_positions.as_slice(), e.gt_positions.as_slice())),
        )
    }

    /// Phase order: navigation then oracle goal, preceded by oracle start
    /// on every episode after the first.
    pub fn check_phase_order(&self) -> bool {
        self.episodes.iter().enumerate().all(|(i, e)| {
            let got: Vec<Phase> = e.phases.iter().map(|p| p.phase).collect();
            if i == 0 {
                got == [Phase::Navigation, Phase::OracleGoal]
            } else {
                got == [Phase::OracleStart, Phase::Navigation, Phase::OracleGoal]
            }
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("logs serialize");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

/// Several tour logs, as written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunLog {
    pub logs: Vec<TourLog>,
}
