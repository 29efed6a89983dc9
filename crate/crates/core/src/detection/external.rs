//! Out-of-process detector bridge.
//!
//! One request per line on the child's stdin:
//! `{"width_px":..,"height_px":..,"agent_heading_deg":..,"position":[x,y],"keywords":[..]}`
//! and one response per line on its stdout:
//! `{"detections":[{"label":..,"box":[x0,y0,x1,y1],"confidence":..}]}` or `{"error":".."}`.
//! Headings are derived locally from the returned boxes.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{absolute_heading, relative_heading_from_box, BoundingBox, Detection, DetectionError, Detector, Panorama};
use crate::geometry::Position;

#[derive(Serialize)]
struct Request<'a> {
    width_px: u32,
    height_px: u32,
    agent_heading_deg: f64,
    position: Position,
    keywords: &'a [String],
}

#[derive(Deserialize)]
struct RawBox {
    label: String,
    #[serde(rename = "box")]
    bbox: BoundingBox,
    confidence: f64,
}

#[derive(Deserialize)]
struct Response {
    #[serde(default)]
    detections: Vec<RawBox>,
    #[serde(default)]
    error: Option<String>,
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalDetector {
    label: String,
    pipe: Mutex<Pipe>,
}

impl ExternalDetector {
    pub fn spawn(command: &[String]) -> Result<Self, DetectionError> {
        let (program, args) =
            command.split_first().ok_or_else(|| DetectionError::DetectorUnavailable("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| DetectionError::DetectorUnavailable(format!("spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self { label: format!("external:{program}"), pipe: Mutex::new(Pipe { child, stdin, stdout }) })
    }
}

impl Drop for ExternalDetector {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}

impl Detector for ExternalDetector {
    fn name(&self) -> &str {
        &self.label
    }

    fn detect_raw(&self, pano: &Panorama, keywords: &[String]) -> Result<Vec<Detection>, DetectionError> {
        let unavailable = |e: String| DetectionError::DetectorUnavailable(e);
        let req = Request {
            width_px: pano.width_px,
            height_px: pano.height_px,
            agent_heading_deg: pano.agent_heading_deg,
            position: pano.position,
            keywords,
        };
        let mut line = serde_json::to_string(&req).map_err(|e| unavailable(e.to_string()))?;
        line.push('\n');

        let mut pipe = self.pipe.lock().map_err(|_| unavailable("detector pipe poisoned".into()))?;
        pipe.stdin.write_all(line.as_bytes()).map_err(|e| unavailable(e.to_string()))?;
        pipe.stdin.flush().map_err(|e| unavailable(e.to_string()))?;
        let mut reply = String::new();
        let n = pipe.stdout.read_line(&mut reply).map_err(|e| unavailable(e.to_string()))?;
        drop(pipe);
        if n == 0 {
            return Err(unavailable("detector closed its output".into()));
        }
        let resp: Response = serde_json::from_str(&reply).map_err(|e| unavailable(format!("bad response: {e}")))?;
        if let Some(err) = resp.error {
            return Err(unavailable(err));
        }
        resp.detections
            .into_iter()
            .map(|r| {
                let rel = relative_heading_from_box(&r.bbox, pano.width_px)?;
                Ok(Detection {
                    label: r.label,
                    bbox: r.bbox,
                    confidence: r.confidence,
                    heading_deg: absolute_heading(rel, pano.agent_heading_deg),
                })
            })
            .collect()
    }
}
