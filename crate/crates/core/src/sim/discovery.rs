//! Viewpoint discovery and lazy detection for continuous scenes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::detection::{detect, Detection, Detector, Panorama};
use crate::geometry::Position;
use crate::keywords::instruction_hash;
use crate::omnigraph::{Omnigraph, Viewpoint, ViewpointId};

/// Discovery and detection radii, meters. Detection must be strictly
/// tighter than discovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub d_vp: f64,
    pub d_det: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { d_vp: 1.0, d_det: 0.25 }
    }
}

impl Thresholds {
    pub fn new(d_vp: f64, d_det: f64) -> Result<Self, SimError> {
        let t = Self { d_vp, d_det };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.d_vp.is_finite() && self.d_vp > 0.0 && self.d_det.is_finite() && self.d_det > 0.0) {
            return Err(SimError::ConfigInvalid(format!(
                "thresholds must be positive, got d_vp={} d_det={}",
                self.d_vp, self.d_det
            )));
        }
        if self.d_det >= self.d_vp {
            return Err(SimError::ConfigInvalid(format!(
                "d_det ({}) must be smaller than d_vp ({})",
                self.d_det, self.d_vp
            )));
        }
        Ok(())
    }
}

/// Omnigraph plus the per-viewpoint panoramas and detection bookkeeping
/// needed in continuous scenes.
#[derive(Debug, Clone)]
pub struct ContinuousMemory {
    pub graph: Omnigraph,
    thresholds: Thresholds,
    panoramas: BTreeMap<ViewpointId, Panorama>,
    detected: BTreeSet<(ViewpointId, String)>,
    anchor: Option<ViewpointId>,
    next_index: usize,
    detector_calls: usize,
}

impl ContinuousMemory {
    pub fn new(scene_id: impl Into<String>, thresholds: Thresholds) -> Result<Self, SimError> {
        thresholds.validate()?;
        Ok(Self {
            graph: Omnigraph::new(scene_id),
            thresholds,
            panoramas: BTreeMap::new(),
            detected: BTreeSet::new(),
            anchor: None,
            next_index: 0,
            detector_calls: 0,
        })
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    /// Forget which viewpoints were already detected this episode.
    pub fn begin_episode(&mut self) {
        self.detected.clear();
    }

    pub fn panorama(&self, id: &ViewpointId) -> Option<&Panorama> {
        self.panoramas.get(id)
    }

    pub fn positions(&self) -> Vec<Position> {
        self.graph.nodes().filter_map(|v| v.position).collect()
    }

    /// Number of detector invocations made through this memory.
    pub fn detector_calls(&self) -> usize {
        self.detector_calls
    }

    /// Registered viewpoint nearest to `pos`; ties go to the smaller id.
    pub fn nearest(&self, pos: &Position) -> Option<(ViewpointId, f64)> {
        self.graph
            .nodes()
            .filter_map(|v| v.position.map(|p| (v.id.clone(), p.distance(pos))))
            .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
    }

    /// Register the agent's arrival at `pos`: discovery, then move the anchor
    /// to the nearest viewpoint. A newly discovered viewpoint is linked to
    /// the previous anchor.
    pub fn observe(&mut self, pos: &Position, pano: Panorama) -> Result<Option<ViewpointId>, SimError> {
        let d_vp = self.thresholds.d_vp;
        let new = discover_viewpoint(self, pos, d_vp, pano)?;
        if let Some((nearest, _)) = self.nearest(pos) {
            self.anchor = Some(nearest);
        }
        Ok(new)
    }
}

/// Adds a viewpoint at `pos` iff every recorded viewpoint is more than
/// `d_vp` away, keeping `pano` for later detection. The new viewpoint is
/// connected to the memory's current anchor.
pub fn discover_viewpoint(
    memory: &mut ContinuousMemory,
    pos: &Position,
    d_vp: f64,
    pano: Panorama,
) -> Result<Option<ViewpointId>, SimError> {
    let crowded = memory.graph.nodes().any(|v| v.position.is_some_and(|p| p.distance(pos) <= d_vp));
    if crowded {
        return Ok(None);
    }
    let id = ViewpointId::new(format!("vp{:04}", memory.next_index))?;
    memory.next_index += 1;
    let prev = memory.anchor.clone();
    memory.graph.record_arrival(prev.as_ref(), Viewpoint::at(id.clone(), *pos), &[])?;
    memory.panoramas.insert(id.clone(), pano);
    memory.anchor = Some(id.clone());
    Ok(Some(id))
}

/// Detect at every stored viewpoint strictly within `d_det` of `pos` using
/// its stored panorama, merging the results into the graph. A viewpoint is
/// detected once per episode for a given keyword set.
pub fn trigger_lazy_detection(
    memory: &mut ContinuousMemory,
    detector: &dyn Detector,
    pos: &Position,
    d_det: f64,
    keywords: &[String],
) -> Result<Vec<(ViewpointId, Vec<Detection>)>, SimError> {
    if d_det >= memory.thresholds.d_vp {
        return Err(SimError::ConfigInvalid(format!(
            "d_det ({d_det}) must be smaller than d_vp ({})",
            memory.thresholds.d_vp
        )));
    }
    if keywords.is_empty() {
        return Ok(Vec::new());
    }
    let key = instruction_hash(&keywords.join("\n"));
    let near: Vec<ViewpointId> = memory
        .graph
        .nodes()
        .filter(|v| v.position.is_some_and(|p| p.distance(pos) < d_det))
        .map(|v| v.id.clone())
        .collect();
    let mut out = Vec::new();
    for id in near {
        if !memory.detected.insert((id.clone(), key.clone())) {
            continue;
        }
        let pano = memory
            .panoramas
            .get(&id)
            .cloned()
            .ok_or_else(|| SimError::InvalidScene(format!("viewpoint '{id}' has no stored panorama")))?;
        memory.detector_calls += 1;
        let dets = detect(detector, &pano, keywords)?;
        memory.graph.update_keywords(&id, &dets)?;
        out.push((id, dets));
    }
    Ok(out)
}
