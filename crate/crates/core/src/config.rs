//! Run configuration: all thresholds in one JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detection::{DetectorSpec, Panorama};
use crate::fusion::{EmbeddingParams, ViewIndexing, DEFAULT_CONTINUOUS_RADIUS_M, DEFAULT_DISCRETE_HOPS};
use crate::keywords::AblationMode;
use crate::metrics::{Aggregation, MetricsSettings, DEFAULT_SUCCESS_RADIUS_M};
use crate::sim::{SimError, Thresholds};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "OMNINAV_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSettings {
    pub dim: usize,
    pub max_distance: usize,
    pub distance_bin_m: f64,
}

impl Default for EmbeddingSettings {
    fn default() -> Self {
        let p = EmbeddingParams::default();
        // wide enough for the default continuous radius: bins 0..=6 below 7 m
        Self { dim: p.dim, max_distance: 6, distance_bin_m: p.distance_bin_m }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Hop limit for discrete fusion.
    pub discrete_hops: usize,
    /// Radius for continuous fusion, meters.
    pub continuous_radius_m: f64,
    /// Viewpoint discovery threshold, meters.
    pub d_vp: f64,
    /// Lazy detection threshold, meters.
    pub d_det: f64,
    /// nDTW normalisation threshold, meters.
    pub d_th: f64,
    pub success_radius: f64,
    pub views: ViewIndexing,
    pub embedding: EmbeddingSettings,
    /// Seeds the embedding weights and noisy agents given without a seed.
    pub seed: u64,
    pub detector: DetectorSpec,
    pub ablation: AblationMode,
    /// Optional keyword cache (JSONL) consulted before rule-based extraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyword_cache: Option<PathBuf>,
    /// Run detection during oracle phases with the last instruction's keywords.
    pub detect_in_oracle_phases: bool,
    /// Store each navigation step's fusion result in the tour log.
    pub record_fusion: bool,
    /// Navigation step cap; 0 picks `4 · |gt_path| + 40`.
    pub max_steps: usize,
    pub t_ndtw_aggregation: Aggregation,
    pub panorama_width: u32,
    pub panorama_height: u32,
}

impl Default for Config {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            discrete_hops: DEFAULT_DISCRETE_HOPS,
            continuous_radius_m: DEFAULT_CONTINUOUS_RADIUS_M,
            d_vp: t.d_vp,
            d_det: t.d_det,
            d_th: DEFAULT_SUCCESS_RADIUS_M,
            success_radius: DEFAULT_SUCCESS_RADIUS_M,
            views: ViewIndexing::default(),
            embedding: EmbeddingSettings::default(),
            seed: 0,
            detector: DetectorSpec::default(),
            ablation: AblationMode::default(),
            keyword_cache: None,
            detect_in_oracle_phases: false,
            record_fusion: true,
            max_steps: 0,
            t_ndtw_aggregation: Aggregation::default(),
            panorama_width: Panorama::DEFAULT_WIDTH,
            panorama_height: Panorama::DEFAULT_HEIGHT,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), SimError> {
        self.thresholds()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SimError::ConfigInvalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("continuous_radius_m", self.continuous_radius_m)?;
        positive("d_th", self.d_th)?;
        positive("success_radius", self.success_radius)?;
        positive("embedding.distance_bin_m", self.embedding.distance_bin_m)?;
        if self.views.headings == 0 || self.views.elevations == 0 {
            return Err(SimError::ConfigInvalid("views need at least one heading and one elevation".into()));
        }
        if self.embedding.max_distance < self.required_max_distance() {
            return Err(SimError::ConfigInvalid(format!(
                "embedding.max_distance {} cannot cover {} hops and {} m radius",
                self.embedding.max_distance, self.discrete_hops, self.continuous_radius_m
            )));
        }
        if self.embedding.dim == 0 {
            return Err(SimError::ConfigInvalid("embedding.dim must be positive".into()));
        }
        if self.panorama_width == 0 || self.panorama_height == 0 {
            return Err(SimError::ConfigInvalid("panorama size must be positive".into()));
        }
        Ok(())
    }

    /// Smallest distance-table index covering both fusion neighbourhoods.
    pub fn required_max_distance(&self) -> usize {
        let continuous = (self.continuous_radius_m / self.embedding.distance_bin_m).ceil().max(1.0) as usize - 1;
        self.discrete_hops.max(continuous)
    }

    /// Grow the distance table after the neighbourhoods were changed.
    pub fn fit_distance_table(&mut self) {
        self.embedding.max_distance = self.embedding.max_distance.max(self.required_max_distance());
    }

    pub fn thresholds(&self) -> Result<Thresholds, SimError> {
        Thresholds::new(self.d_vp, self.d_det)
    }

    pub fn metrics(&self) -> MetricsSettings {
        MetricsSettings { success_radius: self.success_radius, d_th: self.d_th, aggregation: self.t_ndtw_aggregation }
    }

    pub fn embedding_params(&self) -> EmbeddingParams {
        EmbeddingParams {
            dim: self.embedding.dim,
            views: self.views,
            max_distance: self.embedding.max_distance,
            distance_bin_m: self.embedding.distance_bin_m,
            seed: self.seed,
        }
    }

    pub fn panorama(&self, position: crate::geometry::Position, heading_deg: f64) -> Panorama {
        let mut p = Panorama::new(position, heading_deg);
        p.width_px = self.panorama_width;
        p.height_px = self.panorama_height;
        p
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, SimError> {
        let cfg: Config = serde_json::from_slice(bytes).map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let bytes =
            std::fs::read(path).map_err(|e| SimError::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }

    /// `explicit` if given, else the file named by `OMNINAV_CONFIG`, else
    /// defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, SimError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
