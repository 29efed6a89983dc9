//! Episode and tour metrics: TL, NE, OS, SR, SPL, nDTW and t-nDTW.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{path_length, Position};
use crate::sim::TourLog;

/// Success radius and nDTW threshold, meters.
pub const DEFAULT_SUCCESS_RADIUS_M: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty path")]
    EmptyPath,
}

/// Dynamic time warping with Euclidean point cost over the full warping
/// window; both sequences are matched end to end.
pub fn dtw(path: &[Position], reference: &[Position]) -> Result<f64, MetricsError> {
    if path.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyPath);
    }
    let m = reference.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for p in path {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let cost = p.distance(&reference[j - 1]);
            cur[j] = cost + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// `exp(−dtw / (|reference| · d_th))`, in `(0, 1]`.
pub fn ndtw(path: &[Position], reference: &[Position], d_th: f64) -> Result<f64, MetricsError> {
    let d = dtw(path, reference)?;
    Ok((-d / (reference.len() as f64 * d_th)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    #[serde(rename = "TL")]
    pub trajectory_length: f64,
    #[serde(rename = "NE")]
    pub navigation_error: f64,
    #[serde(rename = "OS")]
    pub oracle_success: f64,
    #[serde(rename = "nDTW")]
    pub ndtw: f64,
    #[serde(rename = "SR")]
    pub success: f64,
    #[serde(rename = "SPL")]
    pub spl: f64,
}

/// Metrics of one executed navigation path against its ground truth.
/// `gt_path` must end at the goal.
pub fn episode_metrics(
    executed: &[Position],
    gt_path: &[Position],
    success_radius: f64,
    shortest_path_length: f64,
    d_th: f64,
) -> Result<EpisodeResult, MetricsError> {
    let (last, goal) = match (executed.last(), gt_path.last()) {
        (Some(l), Some(g)) => (l, g),
        _ => return Err(MetricsError::EmptyPath),
    };
    let tl = path_length(executed);
    let ne = last.distance(goal);
    let success = if ne <= success_radius { 1.0 } else { 0.0 };
    let closest = executed.iter().map(|p| p.distance(goal)).fold(f64::INFINITY, f64::min);
    let oracle_success = if closest <= success_radius { 1.0 } else { 0.0 };
    let denom = tl.max(shortest_path_length);
    let spl = if denom > 0.0 { success * shortest_path_length / denom } else { success };
    Ok(EpisodeResult {
        trajectory_length: tl,
        navigation_error: ne,
        oracle_success,
        ndtw: ndtw(executed, gt_path, d_th)?,
        success,
        spl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Mean over tours weighted by reference length.
    #[default]
    Weighted,
    Unweighted,
}

/// Concatenated executed and reference paths of one tour.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TourTrajectory {
    pub executed: Vec<Position>,
    pub reference: Vec<Position>,
}

impl TourTrajectory {
    pub fn from_episodes<'a, I>(episodes: I) -> Self
    where
        I: IntoIterator<Item = (&'a [Position], &'a [Position])>,
    {
        let mut t = TourTrajectory::default();
        for (exec, reference) in episodes {
            t.executed.extend_from_slice(exec);
            t.reference.extend_from_slice(reference);
        }
        t
    }

    pub fn ndtw(&self, d_th: f64) -> Result<f64, MetricsError> {
        ndtw(&self.executed, &self.reference, d_th)
    }
}

/// Tour-level nDTW aggregated over tours.
pub fn t_ndtw(tours: &[TourTrajectory], d_th: f64, aggregation: Aggregation) -> Result<f64, MetricsError> {
    if tours.is_empty() {
        return Err(MetricsError::EmptyPath);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for t in tours {
        let w = match aggregation {
            Aggregation::Weighted => t.reference.len() as f64,
            Aggregation::Unweighted => 1.0,
        };
        num += w * t.ndtw(d_th)?;
        den += w;
    }
    Ok(num / den)
}

/// t-nDTW straight from tour logs (navigation-phase poses only).
pub fn t_ndtw_of_logs(logs: &[TourLog], d_th: f64, aggregation: Aggregation) -> Result<f64, MetricsError> {
    let trajs: Vec<TourTrajectory> = logs.iter().map(TourLog::trajectory).collect();
    t_ndtw(&trajs, d_th, aggregation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode_id: String,
    #[serde(flatten)]
    pub result: EpisodeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourReport {
    pub tour_id: String,
    #[serde(rename = "t-nDTW")]
    pub t_ndtw: f64,
    pub episodes: Vec<EpisodeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(flatten)]
    pub mean: EpisodeResult,
    #[serde(rename = "t-nDTW")]
    pub t_ndtw: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tours: Vec<TourReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSettings {
    pub success_radius: f64,
    pub d_th: f64,
    pub aggregation: Aggregation,
}

impl Default for MetricsSettings {
    fn default() -> Self {
        Self {
            success_radius: DEFAULT_SUCCESS_RADIUS_M,
            d_th: DEFAULT_SUCCESS_RADIUS_M,
            aggregation: Aggregation::Weighted,
        }
    }
}

pub fn report_from_logs(logs: &[TourLog], settings: &MetricsSettings) -> Result<MetricsReport, MetricsError> {
    let mut tours = Vec::with_capacity(logs.len());
    let mut all: Vec<EpisodeResult> = Vec::new();
    for log in logs {
        let mut episodes = Vec::with_capacity(log.episodes.len());
        for ep in &log.episodes {
            let result = episode_metrics(
                &ep.executed_positions,
                &ep.gt_positions,
                settings.success_radius,
                ep.shortest_path_length,
                settings.d_th,
            )?;
            all.push(result);
            episodes.push(EpisodeRow { episode_id: ep.episode_id.clone(), result });
        }
        tours.push(TourReport {
            tour_id: log.tour_id.clone(),
            t_ndtw: log.trajectory().ndtw(settings.d_th)?,
            episodes,
        });
    }
    let n = all.len().max(1) as f64;
    let mean_of = |f: fn(&EpisodeResult) -> f64| all.iter().map(f).sum::<f64>() / n;
    let mean = EpisodeResult {
        trajectory_length: mean_of(|r| r.trajectory_length),
        navigation_error: mean_of(|r| r.navigation_error),
        oracle_success: mean_of(|r| r.oracle_success),
        ndtw: mean_of(|r| r.ndtw),
        success: mean_of(|r| r.success),
        spl: mean_of(|r| r.spl),
    };
    let t = if logs.is_empty() { 0.0 } else { t_ndtw_of_logs(logs, settings.d_th, settings.aggregation)? };
    Ok(MetricsReport { tours, summary: Summary { mean, t_ndtw: t, episodes: all.len() } })
}

impl MetricsReport {
    /// Aligned text table, columns TL NE OS nDTW SR SPL t-nDTW. Ratios are
    /// shown as percentages.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let header = format!(
            "{:<24} {:>8} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7}",
            "episode", "TL", "NE", "OS", "nDTW", "SR", "SPL", "t-nDTW"
        );
        let _ = writeln!(s, "{header}");
        let _ = writeln!(s, "{}", "-".repeat(header.len()));
        let row = |s: &mut String, name: &str, r: &EpisodeResult, t: Option<f64>| {
            let t = t.map(|v| format!("{:>7.2}", v * 100.0)).unwrap_or_else(|| format!("{:>7}", ""));
            let _ = writeln!(
                s,
                "{:<24} {:>8.2} {:>8.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {}",
                name,
                r.trajectory_length,
                r.navigation_error,
                r.oracle_success * 100.0,
                r.ndtw * 100.0,
                r.success * 100.0,
                r.spl * 100.0,
                t
            );
        };
        for tour in &self.tours {
            let _ = writeln!(s, "[{}] t-nDTW {:.2}", tour.tour_id, tour.t_ndtw * 100.0);
            for ep in &tour.episodes {
                row(&mut s, &ep.episode_id, &ep.result, None);
            }
        }
        let _ = writeln!(s, "{}", "-".repeat(header.len()));
        row(
            &mut s,
            &format!("mean ({} episodes)", self.summary.episodes),
            &self.summary.mean,
            Some(self.summary.t_ndtw),
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Position> {
        v.iter().map(|&(x, y)| Position::new(x, y)).collect()
    }

    /// Minimum cost over every monotone, boundary-matched alignment,
    /// enumerated recursively.
    fn dtw_exhaustive(a: &[Position], b: &[Position]) -> f64 {
        fn go(a: &[Position], b: &[Position], i: usize, j: usize) -> f64 {
            let here = a[i].distance(&b[j]);
            if i == a.len() - 1 && j == b.len() - 1 {
                return here;
            }
            let mut best = f64::INFINITY;
            if i + 1 < a.len() {
                best = best.min(go(a, b, i + 1, j));
            }
            if j + 1 < b.len() {
                best = best.min(go(a, b, i, j + 1));
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                best = best.min(go(a, b, i + 1, j + 1));
            }
            here + best
        }
        go(a, b, 0, 0)
    }

    #[test]
    fn dtw_examples() {
        let r = pts(&[(0.0, 0.0), (0.0, 3.0)]);
        assert_eq!(dtw(&r, &r).unwrap(), 0.0);
        let p = pts(&[(0.0, 0.0), (3.0, 0.0)]);
        assert!((dtw(&p, &r).unwrap() - 18f64.sqrt()).abs() < 1e-12);
        assert_eq!(dtw(&[], &r), Err(MetricsError::EmptyPath));
    }

    #[test]
    fn ndtw_examples() {
        let r = pts(&[(0.0, 0.0), (0.0, 3.0)]);
        assert_eq!(ndtw(&r, &r, 3.0).unwrap(), 1.0);
        let p = pts(&[(0.0, 0.0), (3.0, 0.0)]);
        assert!((ndtw(&p, &r, 3.0).unwrap() - 0.4931).abs() < 1e-4);
    }

    #[test]
    fn detour_lowers_ndtw() {
        let r = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let mut p = r.clone();
        let base = ndtw(&p, &r, 3.0).unwrap();
        let mut last = base;
        for k in 1..6 {
            p.push(Position::new(2.0, 5.0 * k as f64));
            let v = ndtw(&p, &r, 3.0).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn episode_metric_cases() {
        let gt = pts(&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]);
        let r = episode_metrics(&gt, &gt, 3.0, 10.0, 3.0).unwrap();
        assert_eq!((r.success, r.spl, r.navigation_error, r.ndtw), (1.0, 1.0, 0.0, 1.0));

        // same goal, twice the length
        let long = pts(&[(0.0, 0.0), (0.0, 5.0), (10.0, 5.0), (10.0, 0.0)]);
        let r = episode_metrics(&long, &gt, 3.0, 10.0, 3.0).unwrap();
        assert_eq!(r.trajectory_length, 20.0);
        assert_eq!(r.spl, 0.5);

        let overshoot = pts(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)]);
        let r = episode_metrics(&overshoot, &gt, 3.0, 10.0, 3.0).unwrap();
        assert_eq!((r.oracle_success, r.success, r.spl), (1.0, 0.0, 0.0));
        assert_eq!(r.navigation_error, 10.0);
        assert!(episode_metrics(&[], &gt, 3.0, 10.0, 3.0).is_err());
    }

    #[test]
    fn t_ndtw_weighted_mean() {
        // tour 1: identity, |R| = 4 → 1.0
        let r1 = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let t1 = TourTrajectory { executed: r1.clone(), reference: r1 };
        // tour 2: |R| = 2 and nDTW 0.5 → dtw = 2·3·ln 2; the single executed
        // point is matched to both reference points
        let offset = 3.0 * std::f64::consts::LN_2;
        let r2 = pts(&[(0.0, 0.0), (0.0, 0.0)]);
        let e2 = pts(&[(offset, 0.0)]);
        let t2 = TourTrajectory { executed: e2, reference: r2 };
        assert!((t2.ndtw(3.0).unwrap() - 0.5).abs() < 1e-12);
        let got = t_ndtw(&[t1.clone(), t2.clone()], 3.0, Aggregation::Weighted).unwrap();
        assert!((got - 5.0 / 6.0).abs() < 1e-12);
        let unweighted = t_ndtw(&[t1, t2], 3.0, Aggregation::Unweighted).unwrap();
        assert!((unweighted - 0.75).abs() < 1e-12);
    }

    fn arb_path() -> impl Strategy<Value = Vec<Position>> {
        proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..=8)
            .prop_map(|v| v.into_iter().map(|(x, y)| Position::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn dtw_matches_exhaustive(a in arb_path(), b in arb_path()) {
            let fast = dtw(&a, &b).unwrap();
            let slow = dtw_exhaustive(&a, &b);
            prop_assert!((fast - slow).abs() < 1e-9);
        }

        #[test]
        fn dtw_symmetric_and_ndtw_range(a in arb_path(), b in arb_path()) {
            prop_assert!((dtw(&a, &b).unwrap() - dtw(&b, &a).unwrap()).abs() < 1e-9);
            prop_assert_eq!(dtw(&a, &a).unwrap(), 0.0);
            let v = ndtw(&a, &b, 3.0).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
        }

        #[test]
        fn t_ndtw_splits_by_weight(paths in proptest::collection::vec((arb_path(), arb_path()), 1..5)) {
            let tours: Vec<TourTrajectory> = paths.into_iter().map(|(e, r)| TourTrajectory { executed: e, reference: r }).collect();
            let whole = t_ndtw(&tours, 3.0, Aggregation::Weighted).unwrap();
            let (mut num, mut den) = (0.0, 0.0);
            for t in &tours {
                let single = t_ndtw(std::slice::from_ref(t), 3.0, Aggregation::Weighted).unwrap();
                num += single * t.reference.len() as f64;
                den += t.reference.len() as f64;
            }
            prop_assert!((whole - num / den).abs() < 1e-12);
        }

        #[test]
        fn spl_sr_os_ordering(e in arb_path(), g in arb_path(), extra in 0.0f64..5.0) {
            let shortest = crate::geometry::path_length(&g) + extra;
            let r = episode_metrics(&e, &g, 3.0, shortest, 3.0).unwrap();
            prop_assert!(r.spl <= r.success && r.success <= r.oracle_success);
        }
    }
}
