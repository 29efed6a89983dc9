//! Keyword embedding fusion.
//!
//! Each fused keyword becomes
//! `LN(W_cls · e_cls) + LN(W_heading · [sin θ, cos θ, sin φ, cos φ]) + E_dist[d]`
//! and the rows are stacked nearest keyword first. Weights are seeded
//! stand-ins for learned parameters; layer norm has no affine part.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FusedKeyword, FusionError, ViewIndexing};

pub const LAYER_NORM_EPS: f64 = 1e-5;
const DEGENERATE_VARIANCE: f64 = 1e-20;

/// `(sin θ, cos θ, sin φ, cos φ)` for heading θ and elevation φ in degrees.
pub fn heading_embedding(theta_deg: f64, phi_deg: f64) -> [f64; 4] {
    let (st, ct) = theta_deg.to_radians().sin_cos();
    let (sp, cp) = phi_deg.to_radians().sin_cos();
    [st, ct, sp, cp]
}

/// `(v − mean) / sqrt(var + ε)` with population variance.
pub fn layer_norm(v: &[f64]) -> Result<Vec<f64>, FusionError> {
    if v.len() < 2 {
        return Err(FusionError::TooShort(v.len()));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var < DEGENERATE_VARIANCE {
        return Err(FusionError::DegenerateInput);
    }
    let scale = 1.0 / (var + LAYER_NORM_EPS).sqrt();
    Ok(v.iter().map(|x| (x - mean) * scale).collect())
}

/// Layer norm inside the fusion sum. A constant projection normalizes to
/// the zero vector, which is the limit of the ε-regularized formula.
fn ln_term(v: Array1<f64>) -> Result<Array1<f64>, FusionError> {
    match layer_norm(v.as_slice().expect("contiguous")) {
        Ok(out) => Ok(Array1::from(out)),
        Err(FusionError::DegenerateInput) => Ok(Array1::zeros(v.len())),
        Err(e) => Err(e),
    }
}

/// How a fused keyword's direction is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// Discrete view index, resolved through [`ViewIndexing`].
    View(usize),
    /// Compass heading in degrees, elevation 0.
    Heading(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Discrete,
    Continuous,
}

/// Everything needed to regenerate an [`EmbeddingConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub views: ViewIndexing,
    /// Largest distance-table index; the table has `max_distance + 1` rows.
    pub max_distance: usize,
    /// Bin width for continuous distances, meters.
    pub distance_bin_m: f64,
    pub seed: u64,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        Self { dim: 64, views: ViewIndexing::default(), max_distance: 3, distance_bin_m: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "EmbeddingParams", try_from = "EmbeddingParams")]
pub struct EmbeddingConfig {
    params: EmbeddingParams,
    w_cls: Array2<f64>,
    w_heading: Array2<f64>,
    distance_table: Array2<f64>,
}

impl EmbeddingConfig {
    /// Draw all weights from a ChaCha stream seeded with `params.seed`.
    pub fn from_params(params: EmbeddingParams) -> Result<Self, FusionError> {
        check_params(&params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let dim = params.dim;
        let mut draw = |rows: usize, cols: usize, scale: f64| {
            Array2::from_shape_fn((rows, cols), |_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
        };
        let w_cls = draw(dim, dim, 1.0 / (dim as f64).sqrt());
        let w_heading = draw(dim, 4, 0.5);
        let distance_table = draw(params.max_distance + 1, dim, 0.1);
        Ok(Self { params, w_cls, w_heading, distance_table })
    }

    /// Use explicit weights. Shapes: `dim×dim`, `dim×4`, `(max_distance+1)×dim`.
    pub fn with_weights(
        params: EmbeddingParams,
        w_cls: Array2<f64>,
        w_heading: Array2<f64>,
        distance_table: Array2<f64>,
    ) -> Result<Self, FusionError> {
        check_params(&params)?;
        let dim = params.dim;
        let want = [
            (w_cls.dim(), (dim, dim), "W_cls"),
            (w_heading.dim(), (dim, 4), "W_heading"),
            (distance_table.dim(), (params.max_distance + 1, dim), "distance table"),
        ];
        for (got, expect, name) in want {
            if got != expect {
                return Err(FusionError::ShapeMismatch(format!("{name} is {got:?}, expected {expect:?}")));
            }
        }
        Ok(Self { params, w_cls, w_heading, distance_table })
    }

    pub fn params(&self) -> &EmbeddingParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn distance_table_len(&self) -> usize {
        self.distance_table.nrows()
    }

    /// Row of the distance table that a fused distance maps to.
    pub fn distance_index(&self, distance: f64, space: Space) -> Result<usize, FusionError> {
        let len = self.distance_table_len();
        let raw = match space {
            Space::Discrete => distance,
            Space::Continuous => (distance / self.params.distance_bin_m).floor(),
        };
        if !(raw >= 0.0 && raw < len as f64) {
            return Err(FusionError::DistanceOutOfTable { index: raw.max(0.0) as usize, len });
        }
        Ok(raw as usize)
    }
}

fn check_params(p: &EmbeddingParams) -> Result<(), FusionError> {
    if p.dim < 2 {
        return Err(FusionError::InvalidConfig("dim must be at least 2".into()));
    }
    if p.views.headings == 0 || p.views.elevations == 0 {
        return Err(FusionError::InvalidConfig("view indexing needs at least one view".into()));
    }
    if !p.distance_bin_m.is_finite() || p.distance_bin_m <= 0.0 {
        return Err(FusionError::InvalidConfig("distance_bin_m must be positive".into()));
    }
    Ok(())
}

impl From<EmbeddingConfig> for EmbeddingParams {
    fn from(c: EmbeddingConfig) -> Self {
        c.params
    }
}

impl TryFrom<EmbeddingParams> for EmbeddingConfig {
    type Error = FusionError;

    fn try_from(p: EmbeddingParams) -> Result<Self, Self::Error> {
        EmbeddingConfig::from_params(p)
    }
}

/// Text encoder stand-in: maps a keyword to its sentence-level vector.
pub trait KeywordEmbedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, label: &str) -> Vec<f64>;
}

/// Deterministic pseudo-random vectors keyed by `(seed, label)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }
}

impl KeywordEmbedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, label: &str) -> Vec<f64> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(label.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(digest.as_slice());
        let mut rng = ChaCha8Rng::from_seed(key);
        (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect()
    }
}

/// Fused embedding of a single keyword.
pub fn fuse_keyword_embedding(
    e_cls: ArrayView1<f64>,
    direction: Direction,
    distance_index: usize,
    cfg: &EmbeddingConfig,
) -> Result<Array1<f64>, FusionError> {
    if e_cls.len() != cfg.dim() {
        return Err(FusionError::ShapeMismatch(format!(
            "keyword embedding has width {}, config expects {}",
            e_cls.len(),
            cfg.dim()
        )));
    }
    let len = cfg.distance_table_len();
    if distance_index >= len {
        return Err(FusionError::DistanceOutOfTable { index: distance_index, len });
    }
    let (theta, phi) = match direction {
        Direction::View(i) => cfg.params.views.angles_of(i)?,
        Direction::Heading(h) => (h, 0.0),
    };
    let e_heading = Array1::from(heading_embedding(theta, phi).to_vec());
    let text = ln_term(cfg.w_cls.dot(&e_cls))?;
    let heading = ln_term(cfg.w_heading.dot(&e_heading))?;
    Ok(text + heading + cfg.distance_table.row(distance_index))
}

/// Stacked keyword embeddings, nearest keyword first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEmbedding {
    pub labels: Vec<String>,
    pub matrix: Array2<f64>,
}

impl MapEmbedding {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(rows, cols, data)` with `data` laid out row-major.
    pub fn to_row_major(&self) -> (usize, usize, Vec<f64>) {
        let (r, c) = self.matrix.dim();
        (r, c, self.matrix.iter().copied().collect())
    }
}

/// Fuse and stack every keyword. Input is re-sorted (stable, by distance
/// then label), so any permutation gives the same matrix.
pub fn build_map_embedding(
    fused: &[FusedKeyword],
    space: Space,
    cfg: &EmbeddingConfig,
    embedder: &dyn KeywordEmbedder,
) -> Result<MapEmbedding, FusionError> {
    if embedder.dim() != cfg.dim() {
        return Err(FusionError::ShapeMismatch(format!(
            "embedder width {} != config width {}",
            embedder.dim(),
            cfg.dim()
        )));
    }
    let mut sorted: Vec<&FusedKeyword> = fused.iter().collect();
    sorted.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));

    let mut matrix = Array2::zeros((sorted.len(), cfg.dim()));
    for (i, k) in sorted.iter().enumerate() {
        let direction = match space {
            Space::Discrete => Direction::View(k.direction as usize),
            Space::Continuous => Direction::Heading(k.direction),
        };
        let e_cls = Array1::from(embedder.embed(&k.label));
        let row = fuse_keyword_embedding(e_cls.view(), direction, cfg.distance_index(k.distance, space)?, cfg)?;
        matrix.row_mut(i).assign(&row);
    }
    Ok(MapEmbedding { labels: sorted.iter().map(|k| k.label.clone()).collect(), matrix })
}
