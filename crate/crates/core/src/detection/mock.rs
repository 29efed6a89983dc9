//! Deterministic detector driven by scripted scene ground truth.

use serde::{Deserialize, Serialize};

use super::{
    absolute_heading, column_for_relative_heading, relative_heading_from_box, BoundingBox, Detection, DetectionError,
    Detector, Panorama,
};
use crate::geometry::{normalize_signed_degrees, Position};
use crate::keywords::normalize_keyword;

/// Ground-truth object for the mock detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub label: String,
    pub position: Position,
    pub base_confidence: f64,
    pub visibility_radius: f64,
}

impl SceneObject {
    pub fn new(label: impl Into<String>, position: Position, base_confidence: f64, visibility_radius: f64) -> Self {
        Self { label: label.into(), position, base_confidence, visibility_radius }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        if !(0.0..=1.0).contains(&self.base_confidence) {
            return Err(DetectionError::InvalidSceneObject(format!(
                "'{}' base_confidence {} outside [0, 1]",
                self.label, self.base_confidence
            )));
        }
        if !(self.visibility_radius > 0.0 && self.visibility_radius.is_finite()) {
            return Err(DetectionError::InvalidSceneObject(format!(
                "'{}' visibility_radius must be positive",
                self.label
            )));
        }
        if !self.position.is_finite() {
            return Err(DetectionError::InvalidSceneObject(format!("'{}' position not finite", self.label)));
        }
        Ok(())
    }

    /// Linear falloff: `base · (1 − d / radius)`, zero at and beyond the radius.
    pub fn confidence_at(&self, from: &Position) -> f64 {
        let d = from.distance(&self.position);
        if d >= self.visibility_radius {
            0.0
        } else {
            self.base_confidence * (1.0 - d / self.visibility_radius)
        }
    }
}

/// Detects every scene object whose label matches a keyword and that is
/// within its visibility radius. No occlusion.
#[derive(Debug, Clone)]
pub struct MockDetector {
    objects: Vec<SceneObject>,
}

impl MockDetector {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self, DetectionError> {
        for o in &objects {
            o.validate()?;
        }
        Ok(Self { objects })
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    fn box_for(&self, pano: &Panorama, obj: &SceneObject) -> BoundingBox {
        let width = f64::from(pano.width_px);
        let height = f64::from(pano.height_px);
        let rel = normalize_signed_degrees(pano.position.bearing_to(&obj.position) - pano.agent_heading_deg);
        let center = column_for_relative_heading(rel, pano.width_px).max(1e-6);
        let half = (width / 72.0).min(center).min(width - center).max(1e-9);
        BoundingBox {
            x_min: center - half,
            y_min: height / 2.0 - height / 12.0,
            x_max: center + half,
            y_max: height / 2.0 + height / 12.0,
        }
    }
}

impl Detector for MockDetector {
    fn name(&self) -> &str {
        "mock"
    }

    fn detect_raw(&self, pano: &Panorama, keywords: &[String]) -> Result<Vec<Detection>, DetectionError> {
        let wanted: Vec<String> = keywords.iter().map(|k| normalize_keyword(k)).collect();
        let mut out = Vec::new();
        for obj in &self.objects {
            let label = normalize_keyword(&obj.label);
            if !wanted.contains(&label) {
                continue;
            }
            let confidence = obj.confidence_at(&pano.position);
            if confidence <= 0.0 {
                continue;
            }
            let bbox = self.box_for(pano, obj);
            let rel = relative_heading_from_box(&bbox, pano.width_px)?;
            out.push(Detection { label, bbox, confidence, heading_deg: absolute_heading(rel, pano.agent_heading_deg) });
        }
        Ok(out)
    }
}
