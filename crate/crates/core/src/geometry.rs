//! Planar and spatial helpers shared by the store, detector and simulator.
//!
//! Headings follow a compass convention: 0° points along +y ("north") and
//! angles grow clockwise, so +x ("east") is 90°.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 2D or 3D position in meters.
///
/// Serialized as a JSON array of two or three numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: None }
    }

    pub const fn new_3d(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z: Some(z) }
    }

    /// Euclidean distance. A missing `z` on either side is treated as 0.
    pub fn distance(&self, other: &Position) -> f64 {
        let dz = self.z.unwrap_or(0.0) - other.z.unwrap_or(0.0);
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Compass bearing in `[0, 360)` from `self` towards `target`, ignoring `z`.
    /// Coincident points have bearing 0.
    pub fn bearing_to(&self, target: &Position) -> f64 {
        let dx = target.x - self.x;
        let dy = target.y - self.y;
        if dx == 0.0 && dy == 0.0 {
            return 0.0;
        }
        normalize_degrees(dx.atan2(dy).to_degrees())
    }

    /// Point reached by moving `length` meters along compass `heading_deg`.
    pub fn step(&self, heading_deg: f64, length: f64) -> Position {
        let rad = heading_deg.to_radians();
        Position { x: self.x + length * rad.sin(), y: self.y + length * rad.cos(), z: self.z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_none_or(f64::is_finite)
    }

    /// Component-wise comparison within `tol` meters (max norm).
    pub fn approx_eq(&self, other: &Position, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z.unwrap_or(0.0) - other.z.unwrap_or(0.0)).abs() <= tol
            && self.z.is_some() == other.z.is_some()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.z {
            Some(z) => write!(f, "({}, {}, {})", self.x, self.y, z),
            None => write!(f, "({}, {})", self.x, self.y),
        }
    }
}

impl TryFrom<Vec<f64>> for Position {
    type Error = String;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        match v.as_slice() {
            [x, y] => Ok(Position::new(*x, *y)),
            [x, y, z] => Ok(Position::new_3d(*x, *y, *z)),
            other => Err(format!("position must have 2 or 3 coordinates, got {}", other.len())),
        }
    }
}

impl From<Position> for Vec<f64> {
    fn from(p: Position) -> Self {
        match p.z {
            Some(z) => vec![p.x, p.y, z],
            None => vec![p.x, p.y],
        }
    }
}

/// Wrap an angle into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wrap an angle into `[-180, 180)`.
pub fn normalize_signed_degrees(deg: f64) -> f64 {
    normalize_degrees(deg + 180.0) - 180.0
}

/// Total length of a polyline.
pub fn path_length(points: &[Position]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}
