//! Scripted agents.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, Episode, Pose};
use crate::fusion::FusedKeyword;
use crate::omnigraph::Omnigraph;

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    MoveTo(Pose),
    Stop,
}

/// What the agent can observe before choosing a move.
pub struct StepContext<'a> {
    pub env: &'a Environment,
    pub episode: &'a Episode,
    pub pose: &'a Pose,
    pub step: usize,
    pub graph: &'a Omnigraph,
    pub fused: &'a [FusedKeyword],
}

pub trait Agent {
    fn begin_episode(&mut self, env: &Environment, episode: &Episode);

    /// Errors are reported by the runner as an agent failure.
    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Action, String>;
}

/// Follows the ground-truth path exactly.
#[derive(Debug, Default, Clone)]
pub struct OracleAgent {
    cursor: usize,
}

impl OracleAgent {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Agent for OracleAgent {
    fn begin_episode(&mut self, _env: &Environment, _episode: &Episode) {
        self.cursor = 0;
    }

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Action, String> {
        let gt = &ctx.episode.gt_path;
        if gt.get(self.cursor) != Some(ctx.pose) {
            return Err(format!("oracle agent is off the ground-truth path at step {}", ctx.step));
        }
        self.cursor += 1;
        Ok(gt.get(self.cursor).cloned().map(Action::MoveTo).unwrap_or(Action::Stop))
    }
}

/// Follows the ground-truth path but, whenever it stands on it, takes a
/// random other move with probability `p` and then walks the shortest path
/// back to the ground-truth pose it skipped.
///
/// One uniform draw is made per decision on the path, plus one more to pick
/// the deviation, so the trajectory depends only on the seed.
#[derive(Debug, Clone)]
pub struct NoisyAgent {
    p: f64,
    rng: ChaCha8Rng,
    progress: usize,
    rejoin: VecDeque<Pose>,
}

impl NoisyAgent {
    pub fn new(p: f64, seed: u64) -> Self {
        Self { p, rng: ChaCha8Rng::seed_from_u64(seed), progress: 0, rejoin: VecDeque::new() }
    }
}

impl Agent for NoisyAgent {
    fn begin_episode(&mut self, _env: &Environment, _episode: &Episode) {
        self.progress = 0;
        self.rejoin.clear();
    }

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Action, String> {
        let gt = &ctx.episode.gt_path;
        if let Some(next) = self.rejoin.pop_front() {
            if self.rejoin.is_empty() {
                self.progress += 1;
            }
            return Ok(Action::MoveTo(next));
        }
        if self.progress + 1 >= gt.len() {
            return Ok(Action::Stop);
        }
        let target = &gt[self.progress + 1];
        if self.rng.random::<f64>() < self.p {
            let alternatives: Vec<Pose> =
                ctx.env.neighbours(ctx.pose).map_err(|e| e.to_string())?.into_iter().filter(|n| n != target).collect();
            if !alternatives.is_empty() {
                let pick = alternatives[self.rng.random_range(0..alternatives.len())].clone();
                let back = ctx.env.shortest_path(&pick, target).map_err(|e| e.to_string())?;
                self.rejoin = back.into_iter().skip(1).collect();
                return Ok(Action::MoveTo(pick));
            }
        }
        self.progress += 1;
        Ok(Action::MoveTo(target.clone()))
    }
}

/// Agent selection: `oracle` or `noisy:<p>:<seed>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AgentSpec {
    Oracle,
    Noisy { p: f64, seed: u64 },
}

impl AgentSpec {
    pub fn build(&self) -> Box<dyn Agent> {
        match *self {
            AgentSpec::Oracle => Box::new(OracleAgent::new()),
            AgentSpec::Noisy { p, seed } => Box::new(NoisyAgent::new(p, seed)),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Oracle => write!(f, "oracle"),
            AgentSpec::Noisy { p, seed } => write!(f, "noisy:{p}:{seed}"),
        }
    }
}

impl FromStr for AgentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["oracle"] => Ok(AgentSpec::Oracle),
            ["noisy", p, seed] => {
                let p: f64 = p.parse().map_err(|_| format!("bad probability '{p}'"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("probability {p} outside [0, 1]"));
                }
                let seed = seed.parse().map_err(|_| format!("bad seed '{seed}'"))?;
                Ok(AgentSpec::Noisy { p, seed })
            }
            _ => Err(format!("unknown agent '{s}', expected oracle or noisy:<p>:<seed>")),
        }
    }
}
