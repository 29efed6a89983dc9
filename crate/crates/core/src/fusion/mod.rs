//! Omnigraph fusion: turning the local neighbourhood of the agent into a
//! short, distance-ordered list of keywords, and then into embeddings.
//!
//! All functions here are pure over an immutable graph snapshot.

mod attention;
mod continuous;
mod discrete;
mod embedding;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::omnigraph::GraphError;

pub use attention::{attention_weights, keyword_attention};
pub use continuous::fuse_continuous;
pub use discrete::{bearing_view_index, fuse_discrete, DEFAULT_DISCRETE_HOPS};
pub use embedding::{
    build_map_embedding, fuse_keyword_embedding, heading_embedding, layer_norm, Direction, EmbeddingConfig,
    EmbeddingParams, HashEmbedder, KeywordEmbedder, MapEmbedding, Space, LAYER_NORM_EPS,
};

/// Default neighbourhood radius in continuous scenes, meters.
pub const DEFAULT_CONTINUOUS_RADIUS_M: f64 = 7.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("layer norm of a constant vector")]
    DegenerateInput,
    #[error("layer norm needs at least 2 elements, got {0}")]
    TooShort(usize),
    #[error("distance index {index} outside a table of {len} rows")]
    DistanceOutOfTable { index: usize, len: usize },
    #[error("view index {index} outside 0..{count}")]
    InvalidViewIndex { index: usize, count: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid embedding config: {0}")]
    InvalidConfig(String),
}

impl FusionError {
    pub fn code(&self) -> &'static str {
        match self {
            FusionError::Graph(g) => g.code(),
            FusionError::DegenerateInput => "DegenerateInput",
            FusionError::TooShort(_) => "DegenerateInput",
            FusionError::DistanceOutOfTable { .. } => "DistanceOutOfTable",
            FusionError::InvalidViewIndex { .. } => "InvalidViewIndex",
            FusionError::ShapeMismatch(_) => "ShapeMismatch",
            FusionError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

/// A deduplicated keyword placed relative to the agent.
///
/// In discrete scenes `distance` is a hop count and `direction` a view
/// index; in continuous scenes they are meters and a compass bearing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedKeyword {
    pub label: String,
    #[serde(rename = "d_v")]
    pub distance: f64,
    #[serde(rename = "h_v")]
    pub direction: f64,
    pub confidence: f64,
}

/// Discretisation of the panorama into `headings × elevations` views.
///
/// View `i` sits in elevation row `i / headings` and heading column
/// `i % headings`. Rows are centred on the horizon, `elevation_step_deg` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewIndexing {
    pub headings: usize,
    pub elevations: usize,
    pub elevation_step_deg: f64,
}

impl Default for ViewIndexing {
    fn default() -> Self {
        Self { headings: 12, elevations: 1, elevation_step_deg: 30.0 }
    }
}

impl ViewIndexing {
    pub fn count(&self) -> usize {
        self.headings * self.elevations
    }

    pub fn heading_step_deg(&self) -> f64 {
        360.0 / self.headings as f64
    }

    /// Nearest view to a (heading, elevation) pair.
    pub fn index_for(&self, heading_deg: f64, elevation_deg: f64) -> usize {
        let col = (crate::geometry::normalize_degrees(heading_deg) / self.heading_step_deg()).round() as usize
            % self.headings;
        let centre = (self.elevations as f64 - 1.0) / 2.0;
        let row = (elevation_deg / self.elevation_step_deg + centre).round().clamp(0.0, (self.elevations - 1) as f64)
            as usize;
        row * self.headings + col
    }

    pub fn angles_of(&self, index: usize) -> Result<(f64, f64), FusionError> {
        if index >= self.count() {
            return Err(FusionError::InvalidViewIndex { index, count: self.count() });
        }
        let row = index / self.headings;
        let col = index % self.headings;
        let centre = (self.elevations as f64 - 1.0) / 2.0;
        Ok((col as f64 * self.heading_step_deg(), (row as f64 - centre) * self.elevation_step_deg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_indexing_round_trip() {
        let v = ViewIndexing { headings: 12, elevations: 3, elevation_step_deg: 30.0 };
        assert_eq!(v.count(), 36);
        for i in 0..36 {
            let (h, e) = v.angles_of(i).unwrap();
            assert_eq!(v.index_for(h, e), i);
        }
        assert_eq!(v.angles_of(13).unwrap(), (30.0, 0.0));
        assert!(v.angles_of(36).is_err());
        let d = ViewIndexing::default();
        assert_eq!(d.index_for(90.0, 0.0), 3);
        assert_eq!(d.index_for(359.0, 0.0), 0);
        assert_eq!(d.index_for(14.9, 0.0), 0);
        assert_eq!(d.index_for(15.1, 0.0), 1);
    }

    #[test]
    fn fused_keyword_json_names() {
        let k = FusedKeyword { label: "sofa".into(), distance: 1.0, direction: 3.0, confidence: 0.5 };
        let j = serde_json::to_value(&k).unwrap();
        assert_eq!(j["d_v"], 1.0);
        assert_eq!(j["h_v"], 3.0);
    }
}
