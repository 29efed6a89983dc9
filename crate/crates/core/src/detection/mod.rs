//! Keyword-panoramic detection.
//!
//! A [`Detector`] turns a panorama plus a keyword list into labelled boxes.
//! Box columns map linearly onto headings around the agent: column 0 is
//! 180° to the agent's left, the centre column is straight ahead.

mod external;
mod mock;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_degrees, Position};
use crate::keywords::normalize_keyword;

pub use external::ExternalDetector;
pub use mock::{MockDetector, SceneObject};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
    #[error("box [{x_min}, {x_max}] lies outside a panorama {width_px} px wide")]
    BoxOutOfBounds { x_min: f64, x_max: f64, width_px: u32 },
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("invalid scene object: {0}")]
    InvalidSceneObject(String),
    #[error("detect called with an empty keyword list")]
    NoKeywords,
    #[error("detector unavailable: {0}")]
    DetectorUnavailable(String),
}

/// Axis-aligned box in panorama pixel coordinates, serialized as
/// `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, DetectionError> {
        let b = Self { x_min, y_min, x_max, y_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        let all = [self.x_min, self.y_min, self.x_max, self.y_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DetectionError::InvalidBox("non-finite coordinate".into()));
        }
        if self.x_min < 0.0 || self.y_min < 0.0 {
            return Err(DetectionError::InvalidBox("negative coordinate".into()));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(DetectionError::InvalidBox(format!(
                "degenerate extent [{}, {}, {}, {}]",
                self.x_min, self.y_min, self.x_max, self.y_max
            )));
        }
        Ok(())
    }

    pub fn center_x(&self) -> f64 {
        (self.x_min + self.x_max) / 2.0
    }

    pub fn center_y(&self) -> f64 {
        (self.y_min + self.y_max) / 2.0
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = DetectionError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

/// One detected keyword instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub confidence: f64,
    /// Absolute (scene-frame) heading of the box centre, `[0, 360)`.
    pub heading_deg: f64,
}

impl Detection {
    pub fn new(label: impl Into<String>, bbox: BoundingBox, confidence: f64, heading_deg: f64) -> Self {
        Self { label: label.into(), bbox, confidence, heading_deg }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        if self.label.trim().is_empty() {
            return Err(DetectionError::InvalidDetection("empty label".into()));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(DetectionError::InvalidDetection(format!(
                "confidence {} outside [0, 1] for '{}'",
                self.confidence, self.label
            )));
        }
        if !(0.0..360.0).contains(&self.heading_deg) {
            return Err(DetectionError::InvalidDetection(format!(
                "heading {} outside [0, 360) for '{}'",
                self.heading_deg, self.label
            )));
        }
        self.bbox.validate()
    }
}

/// A panoramic capture. For the mock detector the capture position, together
/// with the detector's scene-object list, stands in for image content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panorama {
    pub width_px: u32,
    pub height_px: u32,
    pub agent_heading_deg: f64,
    pub position: Position,
}

impl Panorama {
    pub const DEFAULT_WIDTH: u32 = 3600;
    pub const DEFAULT_HEIGHT: u32 = 1800;

    pub fn new(position: Position, agent_heading_deg: f64) -> Self {
        Self {
            width_px: Self::DEFAULT_WIDTH,
            height_px: Self::DEFAULT_HEIGHT,
            agent_heading_deg: normalize_degrees(agent_heading_deg),
            position,
        }
    }
}

/// Heading of the box centre relative to the agent's facing, in `[-180, 180)`.
pub fn relative_heading_from_box(bbox: &BoundingBox, width_px: u32) -> Result<f64, DetectionError> {
    let width = f64::from(width_px);
    if width_px == 0 || bbox.x_min < 0.0 || bbox.x_max > width {
        return Err(DetectionError::BoxOutOfBounds { x_min: bbox.x_min, x_max: bbox.x_max, width_px });
    }
    let rel = bbox.center_x() / width * 360.0 - 180.0;
    // a box hugging the right edge can land on +180 exactly
    Ok(if rel >= 180.0 { rel - 360.0 } else { rel })
}

/// Elevation of the box centre in `[-90, 90)`, growing with the image row.
pub fn elevation_from_box(bbox: &BoundingBox, height_px: u32) -> Result<f64, DetectionError> {
    let height = f64::from(height_px);
    if height_px == 0 || bbox.y_min < 0.0 || bbox.y_max > height {
        return Err(DetectionError::InvalidBox(format!(
            "rows [{}, {}] outside a panorama {} px tall",
            bbox.y_min, bbox.y_max, height_px
        )));
    }
    let el = bbox.center_y() / height * 180.0 - 90.0;
    Ok(el.min(90.0 - f64::EPSILON * 90.0))
}

/// Scene-frame heading of an object seen `rel_deg` off the agent's facing.
pub fn absolute_heading(rel_deg: f64, agent_heading_deg: f64) -> f64 {
    normalize_degrees(agent_heading_deg + rel_deg)
}

/// Panorama column whose relative heading is `rel_deg`.
pub fn column_for_relative_heading(rel_deg: f64, width_px: u32) -> f64 {
    let rel = crate::geometry::normalize_signed_degrees(rel_deg);
    (rel + 180.0) / 360.0 * f64::from(width_px)
}

/// Anything that can run open-vocabulary detection on a panorama.
///
/// Implementations must tolerate concurrent calls.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    /// Raw detections. Callers should go through [`detect`], which enforces
    /// the keyword filter.
    fn detect_raw(&self, pano: &Panorama, keywords: &[String]) -> Result<Vec<Detection>, DetectionError>;
}

/// Run `detector` and keep only detections whose label matches one of
/// `keywords` after normalization. Returned labels are normalized.
pub fn detect(detector: &dyn Detector, pano: &Panorama, keywords: &[String]) -> Result<Vec<Detection>, DetectionError> {
    if keywords.is_empty() {
        return Err(DetectionError::NoKeywords);
    }
    let wanted: Vec<String> = keywords.iter().map(|k| normalize_keyword(k)).collect();
    let mut out = Vec::new();
    for mut det in detector.detect_raw(pano, keywords)? {
        let label = normalize_keyword(&det.label);
        if wanted.contains(&label) {
            det.label = label;
            det.validate()?;
            out.push(det);
        }
    }
    Ok(out)
}

/// Keep one detection per label: the most confident, ties broken by smaller
/// heading then smaller `x_min`. Labels keep their first-occurrence order.
pub fn filter_boxes_per_keyword(dets: &[Detection]) -> Vec<Detection> {
    let mut order: Vec<&str> = Vec::new();
    let mut best: HashMap<&str, &Detection> = HashMap::new();
    for d in dets {
        match best.get(d.label.as_str()) {
            None => {
                order.push(&d.label);
                best.insert(&d.label, d);
            }
            Some(cur) if beats(d, cur) => {
                best.insert(&d.label, d);
            }
            Some(_) => {}
        }
    }
    order.into_iter().map(|l| best[l].clone()).collect()
}

fn beats(a: &Detection, b: &Detection) -> bool {
    use std::cmp::Ordering::*;
    match a.confidence.total_cmp(&b.confidence) {
        Greater => true,
        Less => false,
        Equal => match a.heading_deg.total_cmp(&b.heading_deg) {
            Less => true,
            Greater => false,
            Equal => a.bbox.x_min < b.bbox.x_min,
        },
    }
}

/// Detector selection as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    #[default]
    Mock,
    /// A child process speaking line-delimited JSON on stdin/stdout.
    External { command: Vec<String> },
}

impl DetectorSpec {
    pub fn build(&self, objects: &[SceneObject]) -> Result<Box<dyn Detector>, DetectionError> {
        match self {
            DetectorSpec::Mock => Ok(Box::new(MockDetector::new(objects.to_vec())?)),
            DetectorSpec::External { command } => Ok(Box::new(ExternalDetector::spawn(command)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, x1: f64) -> BoundingBox {
        BoundingBox::new(x0, 10.0, x1, 20.0).unwrap()
    }

    fn det(label: &str, conf: f64, heading: f64, x0: f64) -> Detection {
        Detection::new(label, bx(x0, x0 + 10.0), conf, heading)
    }

    #[test]
    fn relative_heading_examples() {
        assert_eq!(relative_heading_from_box(&bx(1790.0, 1810.0), 3600).unwrap(), 0.0);
        assert_eq!(relative_heading_from_box(&bx(2690.0, 2710.0), 3600).unwrap(), 90.0);
        let left = relative_heading_from_box(&bx(0.0, 1.0), 3600).unwrap();
        assert!(left > -180.0 && left < -179.9);
    }

    #[test]
    fn relative_heading_rejects_out_of_bounds() {
        let err = relative_heading_from_box(&bx(3590.0, 3700.0), 3600).unwrap_err();
        assert!(matches!(err, DetectionError::BoxOutOfBounds { .. }));
    }

    #[test]
    fn absolute_heading_examples() {
        assert_eq!(absolute_heading(0.0, 30.0), 30.0);
        assert_eq!(absolute_heading(90.0, 300.0), 30.0);
        assert_eq!(absolute_heading(-90.0, 45.0), 315.0);
    }

    #[test]
    fn box_validation() {
        assert!(BoundingBox::new(5.0, 0.0, 5.0, 1.0).is_err());
        assert!(BoundingBox::new(-1.0, 0.0, 5.0, 1.0).is_err());
        assert!(serde_json::from_str::<BoundingBox>("[0,0,0,1]").is_err());
    }

    #[test]
    fn elevation_of_middle_row_is_level() {
        let b = BoundingBox::new(0.0, 800.0, 10.0, 1000.0).unwrap();
        assert_eq!(elevation_from_box(&b, 1800).unwrap(), 0.0);
    }

    #[test]
    fn filter_examples() {
        let dets = vec![det("sofa", 0.9, 10.0, 0.0), det("sofa", 0.4, 5.0, 0.0), det("lamp", 0.7, 0.0, 0.0)];
        let out = filter_boxes_per_keyword(&dets);
        assert_eq!(out, vec![dets[0].clone(), dets[2].clone()]);
        assert!(filter_boxes_per_keyword(&[]).is_empty());
    }

    #[test]
    fn filter_tie_breaks() {
        let a = det("sofa", 0.5, 20.0, 0.0);
        let b = det("sofa", 0.5, 10.0, 50.0);
        let c = det("sofa", 0.5, 10.0, 40.0);
        assert_eq!(filter_boxes_per_keyword(&[a, b, c.clone()]), vec![c]);
    }

    #[test]
    fn filter_matches_group_by_max() {
        use rand::{Rng, SeedableRng};
        let labels = ["sofa", "lamp", "bed", "sink", "plant"];
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dets: Vec<Detection> = (0..30)
                .map(|_| {
                    let l = labels[rng.random_range(0..labels.len())];
                    let x = rng.random_range(0.0..3000.0);
                    det(l, rng.random_range(0..10) as f64 / 10.0, rng.random_range(0..4) as f64 * 90.0, x)
                })
                .collect();
            let out = filter_boxes_per_keyword(&dets);
            // brute force: lexicographic max over (conf, -heading, -x_min)
            for l in labels {
                let group: Vec<&Detection> = dets.iter().filter(|d| d.label == l).collect();
                let got: Vec<&Detection> = out.iter().filter(|d| d.label == l).collect();
                if group.is_empty() {
                    assert!(got.is_empty());
                    continue;
                }
                assert_eq!(got.len(), 1);
                let mut sorted = group.clone();
                sorted.sort_by(|a, b| {
                    b.confidence
                        .total_cmp(&a.confidence)
                        .then(a.heading_deg.total_cmp(&b.heading_deg))
                        .then(a.bbox.x_min.total_cmp(&b.bbox.x_min))
                });
                assert_eq!(got[0], sorted[0]);
            }
        }
    }

    proptest! {
        #[test]
        fn relative_heading_monotone(width in 2u32..8000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let w = f64::from(width);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let box_at = |c: f64| {
                let half = (c * w).min(w - c * w).clamp(1e-9, 1.0);
                BoundingBox { x_min: c * w - half, y_min: 0.0, x_max: c * w + half, y_max: 1.0 }
            };
            let (r1, r2) = (box_at(lo), box_at(hi));
            prop_assume!(r1.validate().is_ok() && r2.validate().is_ok());
            let h1 = relative_heading_from_box(&r1, width).unwrap();
            let h2 = relative_heading_from_box(&r2, width).unwrap();
            prop_assert!(h1 <= h2);
            prop_assert!((-180.0..180.0).contains(&h1));
        }

        #[test]
        fn heading_round_trip(target in 0.0f64..360.0, agent in 0.0f64..360.0, width in 36u32..8000) {
            let col = column_for_relative_heading(target - agent, width);
            let half = 0.25f64.min(col).min(f64::from(width) - col);
            prop_assume!(half > 1e-6);
            let b = BoundingBox { x_min: col - half, y_min: 0.0, x_max: col + half, y_max: 1.0 };
            let rel = relative_heading_from_box(&b, width).unwrap();
            let abs = absolute_heading(rel, agent);
            prop_assert!((0.0..360.0).contains(&abs));
            let err = crate::geometry::normalize_signed_degrees(abs - target).abs();
            prop_assert!(err <= 360.0 / f64::from(width), "err {}", err);
        }
    }
}
