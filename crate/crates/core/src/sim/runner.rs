//! The tour loop.

use super::{
    Action, Agent, ContinuousMemory, Environment, Episode, EpisodeLog, Phase, PhaseTrace, Pose, SimError, StepContext,
    StepRecord, Tour, TourLog,
};
use crate::config::Config;
use crate::detection::{detect, Detector};
use crate::fusion::{bearing_view_index, fuse_continuous, fuse_discrete, FusedKeyword};
use crate::geometry::{path_length, Position};
use crate::keywords::KeywordPipeline;
use crate::omnigraph::{Omnigraph, Viewpoint};
use crate::sim::discovery::trigger_lazy_detection;

/// Memory carried across the episodes of one tour.
#[derive(Debug, Clone)]
pub enum TourMemory {
    Discrete(Omnigraph),
    Continuous(ContinuousMemory),
}

impl TourMemory {
    pub fn graph(&self) -> &Omnigraph {
        match self {
            TourMemory::Discrete(g) => g,
            TourMemory::Continuous(m) => &m.graph,
        }
    }
}

/// Runs tours against one environment. Memory persists across the episodes
/// of a tour and is replaced by a fresh one at the start of every tour.
pub struct TourRunner<'a> {
    env: &'a Environment,
    detector: &'a dyn Detector,
    keywords: &'a KeywordPipeline,
    cfg: &'a Config,
    memory: TourMemory,
    epoch: u64,
    heading: f64,
}

impl<'a> TourRunner<'a> {
    pub fn new(
        env: &'a Environment,
        detector: &'a dyn Detector,
        keywords: &'a KeywordPipeline,
        cfg: &'a Config,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        let memory = Self::fresh_memory(env, cfg)?;
        Ok(Self { env, detector, keywords, cfg, memory, epoch: 0, heading: 0.0 })
    }

    fn fresh_memory(env: &Environment, cfg: &Config) -> Result<TourMemory, SimError> {
        Ok(match env {
            Environment::Discrete(s) => TourMemory::Discrete(Omnigraph::new(s.scene_id.clone())),
            Environment::Continuous(s) => {
                TourMemory::Continuous(ContinuousMemory::new(s.scene_id.clone(), cfg.thresholds()?)?)
            }
        })
    }

    /// Drop all memory and start a new generation.
    pub fn reset(&mut self) {
        self.memory = Self::fresh_memory(self.env, self.cfg).expect("config validated at construction");
        self.epoch += 1;
        self.heading = 0.0;
    }

    /// Incremented by every [`reset`](Self::reset); identifies the memory
    /// instance a tour ran with.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn memory(&self) -> &TourMemory {
        &self.memory
    }

    /// Fusion query against the current memory. A discrete pose the memory
    /// has never seen has nothing around it.
    pub fn fuse_at(&self, pose: &Pose) -> Result<Vec<FusedKeyword>, SimError> {
        match (&self.memory, pose) {
            (TourMemory::Discrete(g), Pose::Viewpoint(id)) => {
                if !g.contains(id) {
                    return Ok(Vec::new());
                }
                Ok(fuse_discrete(g, id, self.cfg.discrete_hops, bearing_view_index(g, self.cfg.views))?)
            }
            (TourMemory::Continuous(m), Pose::Point(p)) => {
                Ok(fuse_continuous(&m.graph, p, self.cfg.continuous_radius_m)?)
            }
            _ => Err(SimError::PoseNotInScene("pose kind does not match the scene".into())),
        }
    }

    /// Run one tour on fresh memory.
    pub fn run(&mut self, agent: &mut dyn Agent, tour: &Tour) -> Result<TourLog, SimError> {
        if tour.scene_id != self.env.scene_id() {
            return Err(SimError::SceneMismatch { tour: tour.scene_id.clone(), env: self.env.scene_id().to_string() });
        }
        for ep in &tour.episodes {
            ep.validate_in(self.env)?;
        }
        self.reset();
        let mut episodes = Vec::with_capacity(tour.episodes.len());
        let mut here: Option<Pose> = None;
        let mut last_queries: Vec<String> = Vec::new();
        for (i, ep) in tour.episodes.iter().enumerate() {
            let queries = self.keywords.queries(&ep.instruction)?;
            let log = self.run_episode(i, ep, agent, here.as_ref(), &queries, &last_queries)?;
            here = Some(ep.goal.clone());
            last_queries = queries;
            episodes.push(log);
        }
        Ok(TourLog {
            tour_id: tour.tour_id.clone(),
            scene_id: tour.scene_id.clone(),
            episodes,
            graph: self.memory.graph().clone(),
        })
    }

    fn run_episode(
        &mut self,
        index: usize,
        ep: &Episode,
        agent: &mut dyn Agent,
        here: Option<&Pose>,
        queries: &[String],
        previous_queries: &[String],
    ) -> Result<EpisodeLog, SimError> {
        if let TourMemory::Continuous(m) = &mut self.memory {
            m.begin_episode();
        }
        let oracle_queries = |q: &'_ [String]| if self.cfg.detect_in_oracle_phases { q.to_vec() } else { Vec::new() };
        let os_queries = oracle_queries(previous_queries);
        let og_queries = oracle_queries(queries);

        let mut phases = Vec::with_capacity(3);
        if let Some(from) = here {
            let path = self.env.shortest_path(from, &ep.start)?;
            let steps = self.traverse(from, &path[1..], &os_queries)?;
            phases.push(PhaseTrace { phase: Phase::OracleStart, steps });
        } else if let Some(h) = ep.start_heading_deg {
            self.heading = h;
        }

        // navigation
        let mut pose = ep.start.clone();
        let mut nav = vec![self.arrive(here.map(|_| &ep.start), &pose, queries)?];
        agent.begin_episode(self.env, ep);
        let cap = if self.cfg.max_steps > 0 { self.cfg.max_steps } else { 4 * ep.gt_path.len() + 40 };
        let failure = |message: String| SimError::AgentFailure { episode: index, message };
        for step in 0..cap {
            let fused = self.fuse_at(&pose)?;
            let action = {
                let ctx = StepContext {
                    env: self.env,
                    episode: ep,
                    pose: &pose,
                    step,
                    graph: self.memory.graph(),
                    fused: &fused,
                };
                agent.act(&ctx).map_err(failure)?
            };
            if self.cfg.record_fusion {
                nav.last_mut().expect("start recorded").fused = Some(fused);
            }
            match action {
                Action::Stop => break,
                Action::MoveTo(next) => {
                    if !self.env.is_valid_move(&pose, &next) {
                        return Err(failure(format!("invalid move at step {step}")));
                    }
                    nav.push(self.arrive(Some(&pose), &next, queries)?);
                    pose = next;
                }
            }
        }
        let executed_positions: Vec<Position> = nav.iter().map(|s| s.position).collect();
        phases.push(PhaseTrace { phase: Phase::Navigation, steps: nav });

        let path = self.env.shortest_path(&pose, &ep.goal)?;
        let steps = self.traverse(&pose, &path[1..], &og_queries)?;
        phases.push(PhaseTrace { phase: Phase::OracleGoal, steps });

        let gt_positions = ep.gt_path.iter().map(|p| self.env.position_of(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(EpisodeLog {
            episode_id: ep.id.clone(),
            instruction: ep.instruction.clone(),
            keywords: queries.to_vec(),
            phases,
            executed_positions,
            shortest_path_length: self.shortest_length(&ep.start, &ep.goal)?,
            gt_positions,
        })
    }

    fn shortest_length(&self, a: &Pose, b: &Pose) -> Result<f64, SimError> {
        let pts =
            self.env.shortest_path(a, b)?.iter().map(|p| self.env.position_of(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(path_length(&pts))
    }

    fn traverse(&mut self, from: &Pose, path: &[Pose], queries: &[String]) -> Result<Vec<StepRecord>, SimError> {
        let mut prev = from.clone();
        let mut steps = Vec::with_capacity(path.len());
        for p in path {
            steps.push(self.arrive(Some(&prev), p, queries)?);
            prev = p.clone();
        }
        Ok(steps)
    }

    /// Update memory for an arrival at `pose`; detection runs only when
    /// `queries` is non-empty.
    fn arrive(&mut self, prev: Option<&Pose>, pose: &Pose, queries: &[String]) -> Result<StepRecord, SimError> {
        let position = self.env.position_of(pose)?;
        if let Some(h) = prev.and_then(|p| self.env.heading_between(p, pose)) {
            self.heading = h;
        }
        let pano = self.cfg.panorama(position, self.heading);
        let detected = match (&mut self.memory, pose) {
            (TourMemory::Discrete(g), Pose::Viewpoint(id)) => {
                let dets = if queries.is_empty() { Vec::new() } else { detect(self.detector, &pano, queries)? };
                let prev_id = match prev {
                    Some(Pose::Viewpoint(p)) => Some(p),
                    _ => None,
                };
                g.record_arrival(prev_id, Viewpoint::at(id.clone(), position), &dets)?;
                !queries.is_empty()
            }
            (TourMemory::Continuous(m), Pose::Point(p)) => {
                m.observe(p, pano)?;
                let d_det = m.thresholds().d_det;
                !queries.is_empty() && !trigger_lazy_detection(m, self.detector, p, d_det, queries)?.is_empty()
            }
            _ => return Err(SimError::PoseNotInScene("pose kind does not match the scene".into())),
        };
        Ok(StepRecord { pose: pose.clone(), position, detected, fused: None })
    }
}

/// Run a single tour on fresh memory.
pub fn run_tour(
    env: &Environment,
    detector: &dyn Detector,
    keywords: &KeywordPipeline,
    agent: &mut dyn Agent,
    tour: &Tour,
    cfg: &Config,
) -> Result<TourLog, SimError> {
    TourRunner::new(env, detector, keywords, cfg)?.run(agent, tour)
}
