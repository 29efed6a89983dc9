//! Acceptance gate. Runs every primary criterion and prints one PASS/FAIL
//! line each; exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omninav::config::Config;
use omninav::detection::{BoundingBox, Detection, MockDetector};
use omninav::fusion::{
    bearing_view_index, fuse_discrete, fuse_keyword_embedding, heading_embedding, layer_norm, Direction,
    EmbeddingConfig, EmbeddingParams, FusedKeyword, HashEmbedder, KeywordEmbedder, ViewIndexing,
};
use omninav::geometry::{normalize_degrees, Position};
use omninav::keywords::{AblationMode, KeywordPipeline, COMMON_CATEGORIES};
use omninav::metrics::{dtw, ndtw, report_from_logs, t_ndtw_of_logs, Aggregation, MetricsSettings};
use omninav::omnigraph::{vp_id, Omnigraph, Viewpoint, ViewpointId};
use omninav::sim::synthetic::{bundled, memory_demo_tour, open_plan};
use omninav::sim::{ContinuousMemory, Environment, NoisyAgent, OracleAgent, Phase, Thresholds, TourLog, TourRunner};

type Outcome = Result<(), String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const LABELS: [&str; 7] = ["sofa", "lamp", "sink", "bed", "plant", "dining table", "tv"];

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, with_3d: bool) -> Omnigraph {
    let n = rng.random_range(1..=max_nodes);
    let mut g = Omnigraph::new(format!("scene{}", rng.random_range(0..1000)));
    let mut ids: Vec<ViewpointId> = Vec::new();
    let mut used = BTreeSet::new();
    while ids.len() < n {
        let raw = format!("v{}", rng.random_range(0..500));
        if !used.insert(raw.clone()) {
            continue;
        }
        let pos = if with_3d && rng.random_bool(0.3) {
            Position::new_3d(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-2.0..2.0))
        } else {
            Position::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))
        };
        let mut dets = Vec::new();
        for label in LABELS {
            if rng.random_bool(0.3) {
                let x = rng.random_range(0.0..3000.0);
                let y = rng.random_range(0.0..1500.0);
                let bbox =
                    BoundingBox::new(x, y, x + rng.random_range(1.0..500.0), y + rng.random_range(1.0..300.0)).unwrap();
                // coarse confidences so ties occur
                let conf = rng.random_range(1..=8) as f64 / 8.0;
                dets.push(Detection::new(label, bbox, conf, rng.random_range(0.0..360.0)));
            }
        }
        let id = vp_id(&raw);
        g.add_viewpoint(Viewpoint::at(id.clone(), pos).with_detections(&dets).unwrap()).unwrap();
        ids.push(id);
    }
    let p = rng.random_range(0.05..0.5);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.connect(&ids[i], &ids[j]).unwrap();
            }
        }
    }
    g
}

/// Quantized compass bearing from one node to another, 12 views, view 0 north.
fn oracle_view(g: &Omnigraph, from: &ViewpointId, to: &ViewpointId) -> usize {
    let a = g.node(from).unwrap().position.unwrap();
    let b = g.node(to).unwrap().position.unwrap();
    let deg = normalize_degrees((b.x - a.x).atan2(b.y - a.y).to_degrees());
    ((deg / 30.0).round() as usize) % 12
}

/// Brute-force discrete fusion: all-pairs hop counts by Floyd-Warshall,
/// first move = smallest-id neighbour on some shortest path, then a plain
/// count of (distance, view) per label.
fn oracle_fuse(g: &Omnigraph, origin: &ViewpointId, hops: usize) -> Vec<FusedKeyword> {
    let ids: Vec<ViewpointId> = g.nodes().map(|v| v.id.clone()).collect();
    let n = ids.len();
    let index: BTreeMap<&ViewpointId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for (a, b) in g.edges() {
        d[index[a]][index[b]] = 1;
        d[index[b]][index[a]] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let o = index[origin];
    let mut occurrences: BTreeMap<String, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (t, id) in ids.iter().enumerate() {
        let dist = d[o][t];
        if dist > hops {
            continue;
        }
        let view = if t == o {
            0
        } else {
            let first = ids.iter().enumerate().find(|(m, _)| d[o][*m] == 1 && d[*m][t] == dist - 1).unwrap().1;
            oracle_view(g, origin, first)
        };
        for det in g.node(id).unwrap().detections().values() {
            occurrences.entry(det.label.clone()).or_default().push((dist, view, det.confidence));
        }
    }
    let mut out = Vec::new();
    for (label, occ) in occurrences {
        let mut best: Option<((usize, usize), usize)> = None;
        for &(dist, view, _) in &occ {
            let count = occ.iter().filter(|o| (o.0, o.1) == (dist, view)).count();
            let better = match best {
                None => true,
                Some((pair, c)) => count > c || (count == c && (dist, view) < pair),
            };
            if better {
                best = Some(((dist, view), count));
            }
        }
        let ((dist, view), _) = best.unwrap();
        let conf = occ.iter().filter(|o| (o.0, o.1) == (dist, view)).map(|o| o.2).fold(f64::MIN, f64::max);
        out.push(FusedKeyword { label, distance: dist as f64, direction: view as f64, confidence: conf });
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));
    out
}

fn fusion_oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xf05e);
    let mut compared = 0;
    for case in 0..200 {
        let g = random_graph(&mut rng, 30, false);
        let hops = rng.random_range(1..=5);
        let view = bearing_view_index(&g, ViewIndexing::default());
        for origin in g.nodes().map(|v| v.id.clone()) {
            let got = fuse_discrete(&g, &origin, hops, &view).map_err(|e| e.to_string())?;
            let want = oracle_fuse(&g, &origin, hops);
            ensure!(got == want, "case {case}, origin {origin}, d_n {hops}: {got:?} != {want:?}");
            compared += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2} s");
    println!("  {compared} fusion queries agree, {secs:.2} s");
    Ok(())
}

/// Minimum over every monotone alignment, enumerated without memoization.
fn exhaustive_dtw(a: &[Position], b: &[Position], i: usize, j: usize) -> f64 {
    let cost = a[i].distance(&b[j]);
    if i + 1 == a.len() && j + 1 == b.len() {
        return cost;
    }
    let mut best = f64::INFINITY;
    if i + 1 < a.len() {
        best = best.min(exhaustive_dtw(a, b, i + 1, j));
    }
    if j + 1 < b.len() {
        best = best.min(exhaustive_dtw(a, b, i, j + 1));
    }
    if i + 1 < a.len() && j + 1 < b.len() {
        best = best.min(exhaustive_dtw(a, b, i + 1, j + 1));
    }
    cost + best
}

fn metric_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd7a);
    let path = |rng: &mut ChaCha8Rng| -> Vec<Position> {
        let n = rng.random_range(1..=8);
        (0..n).map(|_| Position::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))).collect()
    };
    for case in 0..100 {
        let a = path(&mut rng);
        let b = path(&mut rng);
        let got = dtw(&a, &b).map_err(|e| e.to_string())?;
        let want = exhaustive_dtw(&a, &b, 0, 0);
        ensure!((got - want).abs() <= 1e-9, "case {case}: dtw {got} vs exhaustive {want}");
        let same = ndtw(&a, &a, 3.0).map_err(|e| e.to_string())?;
        ensure!(same == 1.0, "case {case}: ndtw(identity) = {same}");
    }
    let reference = [Position::new(0.0, 0.0), Position::new(0.0, 3.0)];
    let executed = [Position::new(0.0, 0.0), Position::new(3.0, 0.0)];
    let v = ndtw(&executed, &reference, 3.0).map_err(|e| e.to_string())?;
    ensure!((v - 0.4931).abs() <= 1e-4, "hand-computed case gives {v}");
    Ok(())
}

fn tour_memory_semantics() -> Outcome {
    let (env, tour) = memory_demo_tour();
    ensure!(tour.episodes.len() == 2, "demo tour has {} episodes", tour.episodes.len());
    let det = MockDetector::new(env.objects().to_vec()).map_err(|e| e.to_string())?;
    let kw = KeywordPipeline::rule_based(AblationMode::Full);
    let cfg = Config::default();
    let mut runner = TourRunner::new(&env, &det, &kw, &cfg).map_err(|e| e.to_string())?;
    let log = runner.run(&mut OracleAgent::new(), &tour).map_err(|e| e.to_string())?;

    let first: BTreeSet<String> = log.episodes[0].keywords.iter().cloned().collect();
    let second: BTreeSet<String> = log.episodes[1].keywords.iter().cloned().collect();
    ensure!(!first.is_empty() && !second.is_empty(), "empty keyword set: {first:?} / {second:?}");
    ensure!(first.is_disjoint(&second), "keyword sets overlap: {first:?} / {second:?}");

    let only_first = |fused: &[FusedKeyword]| fused.iter().filter(|k| first.contains(&k.label)).count();
    let nav = log.episodes[1].phase(Phase::Navigation).ok_or("no navigation phase")?;
    let in_episode = nav.steps[0].fused.as_deref().ok_or("fusion not recorded")?;
    ensure!(only_first(in_episode) >= 1, "episode-2 step fusion has no episode-1 keyword: {in_episode:?}");

    let query = &tour.episodes[1].start;
    let before = runner.fuse_at(query).map_err(|e| e.to_string())?;
    ensure!(only_first(&before) >= 1, "query before reset: {before:?}");
    runner.reset();
    let after = runner.fuse_at(query).map_err(|e| e.to_string())?;
    ensure!(after.is_empty(), "query after reset still returns {after:?}");
    Ok(())
}

fn has_branching(env: &Environment) -> bool {
    match env {
        Environment::Discrete(s) => s.has_branching(),
        // every free point offers several headings
        Environment::Continuous(_) => true,
    }
}

fn oracle_agent_sanity() -> Outcome {
    let settings = MetricsSettings::default();
    let cfg = Config::default();
    let kw = KeywordPipeline::rule_based(AblationMode::Full);
    let mut branching = 0;
    for b in bundled() {
        let det = MockDetector::new(b.env.objects().to_vec()).map_err(|e| e.to_string())?;
        let mut runner = TourRunner::new(&b.env, &det, &kw, &cfg).map_err(|e| e.to_string())?;
        let oracle: Vec<TourLog> = b
            .tours
            .tours
            .iter()
            .map(|t| runner.run(&mut OracleAgent::new(), t))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let report = report_from_logs(&oracle, &settings).map_err(|e| e.to_string())?;
        for row in report.tours.iter().flat_map(|t| &t.episodes) {
            let r = &row.result;
            ensure!(
                r.ndtw == 1.0 && r.success == 1.0 && r.spl == 1.0,
                "{} / {}: nDTW {} SR {} SPL {}",
                b.env.scene_id(),
                row.episode_id,
                r.ndtw,
                r.success,
                r.spl
            );
        }
        if !has_branching(&b.env) {
            continue;
        }
        branching += 1;
        let base = t_ndtw_of_logs(&oracle, settings.d_th, Aggregation::Weighted).map_err(|e| e.to_string())?;
        for seed in 0..20 {
            let mut agent = NoisyAgent::new(0.5, seed);
            let noisy: Vec<TourLog> = b
                .tours
                .tours
                .iter()
                .map(|t| runner.run(&mut agent, t))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let v = t_ndtw_of_logs(&noisy, settings.d_th, Aggregation::Weighted).map_err(|e| e.to_string())?;
            ensure!(v < base, "{} seed {seed}: noisy t-nDTW {v} not below oracle {base}", b.env.scene_id());
        }
    }
    ensure!(branching > 0, "no branching scene bundled");
    Ok(())
}

fn discovery_separation() -> Outcome {
    let env = open_plan();
    let Environment::Continuous(scene) = &env else {
        return Err("open plan scene is not continuous".into());
    };
    let cfg = Config::default();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut memory =
            ContinuousMemory::new(env.scene_id(), Thresholds::new(1.0, 0.25).unwrap()).map_err(|e| e.to_string())?;
        let mut pos = Position::new(1.0, 1.0);
        ensure!(scene.is_free(&pos), "walk start is blocked");
        for _ in 0..1000 {
            memory.observe(&pos, cfg.panorama(pos, 0.0)).map_err(|e| e.to_string())?;
            let moves = scene.moves(&pos);
            ensure!(!moves.is_empty(), "stuck at {pos:?}");
            pos = moves[rng.random_range(0..moves.len())];
        }
        memory.observe(&pos, cfg.panorama(pos, 0.0)).map_err(|e| e.to_string())?;
        let pts = memory.positions();
        ensure!(pts.len() > 5, "seed {seed}: only {} viewpoints registered", pts.len());
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = pts[i].distance(&pts[j]);
                ensure!(d > 1.0, "seed {seed}: viewpoints {i} and {j} are {d} m apart");
            }
        }
    }
    ensure!(Config::from_json(br#"{"d_det": 0.25}"#).is_ok(), "d_det = 0.25 rejected");
    match Config::from_json(br#"{"d_det": 1.5}"#) {
        Err(e) if e.code() == "ConfigInvalid" => {}
        other => return Err(format!("d_det = 1.5 not rejected: {other:?}")),
    }
    Ok(())
}

fn embedding_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e);
    for case in 0..1000 {
        let len = rng.random_range(16..=512);
        let sigma = rng.random_range(1.0..10.0);
        let mu = rng.random_range(-50.0..50.0);
        let v: Vec<f64> = (0..len).map(|_| mu + sigma * rng.random_range(-1.7320508..1.7320508)).collect();
        let out = layer_norm(&v).map_err(|e| e.to_string())?;
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let var = out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        ensure!(mean.abs() < 1e-9, "case {case}: mean {mean}");
        ensure!((var - 1.0).abs() < 1e-4, "case {case}: variance {var}");
    }
    for _ in 0..1000 {
        let theta = rng.random_range(-720.0..720.0);
        let phi = rng.random_range(-90.0..90.0);
        let [st, ct, sp, cp] = heading_embedding(theta, phi);
        ensure!((st * st + ct * ct - 1.0).abs() <= 1e-12, "heading {theta}");
        ensure!((sp * sp + cp * cp - 1.0).abs() <= 1e-12, "elevation {phi}");
    }
    let run = || -> Result<Vec<u64>, String> {
        let params = EmbeddingParams { seed: 42, ..EmbeddingParams::default() };
        let cfg = EmbeddingConfig::from_params(params).map_err(|e| e.to_string())?;
        let embedder = HashEmbedder::new(cfg.dim(), 42);
        let mut bits = Vec::new();
        for (i, label) in ["sofa", "kitchen island", "lamp"].iter().enumerate() {
            let e = Array1::from(embedder.embed(label));
            for direction in [Direction::View(i * 3), Direction::Heading(17.5 * i as f64)] {
                let row = fuse_keyword_embedding(e.view(), direction, i, &cfg).map_err(|e| e.to_string())?;
                bits.extend(row.iter().map(|x| x.to_bits()));
            }
        }
        Ok(bits)
    };
    let (a, b) = (run()?, run()?);
    ensure!(a == b, "fused embeddings differ between runs");
    Ok(())
}

fn ablate_cli(args: &[&str]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let argv: Vec<&str> = ["omninav", "ablate"].iter().chain(args).copied().collect();
    omninav::cli::run_from(argv, &mut out).map_err(|e| format!("{e:#}"))?;
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn ablation_plumbing() -> Outcome {
    let kept = ablate_cli(&["--mode", "type2", "--keyword", "marble kitchen counter", "--keyword", "kitchen island"])?;
    ensure!(kept == ["marble kitchen counter"], "type2 kept {kept:?}");
    let categories: BTreeSet<&str> = COMMON_CATEGORIES.into_iter().collect();
    ensure!(categories.len() == 12, "{} categories", categories.len());
    let type1 = ablate_cli(&["--mode", "type1", "--keyword", "marble kitchen counter", "--keyword", "kitchen island"])?;
    ensure!(type1.iter().all(|k| categories.contains(k.as_str())), "cli type1 gave {type1:?}");

    let pipeline = KeywordPipeline::rule_based(AblationMode::Type1);
    let type2 = KeywordPipeline::rule_based(AblationMode::Type2);
    let mut instructions: Vec<String> =
        bundled().into_iter().flat_map(|b| b.tours.tours).flat_map(|t| t.episodes).map(|e| e.instruction).collect();
    instructions.push("Walk past the marble kitchen counter and stop by the kitchen island.".into());
    for instr in &instructions {
        let q = pipeline.queries(instr).map_err(|e| e.to_string())?;
        ensure!(q.iter().all(|k| categories.contains(k.as_str())), "type1 queries for {instr:?}: {q:?}");
        if let Ok(q2) = type2.queries(instr) {
            ensure!(q2.iter().all(|k| categories.iter().any(|c| k.contains(c))), "type2 queries for {instr:?}: {q2:?}");
        }
    }
    Ok(())
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e71);
    for case in 0..500 {
        let g = random_graph(&mut rng, 25, true);
        let bytes = g.serialize();
        let back = Omnigraph::deserialize(&bytes).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(back == g, "case {case}: graph changed in round trip");
        ensure!(back.serialize() == bytes, "case {case}: bytes changed in round trip");
    }
    let path = common::crate_dir().join("tests/data/golden_graph.json");
    let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure!(common::golden_graph().serialize() == golden, "golden file bytes differ");
    let parsed = Omnigraph::deserialize(&golden).map_err(|e| e.to_string())?;
    ensure!(parsed == common::golden_graph(), "golden file parses to a different graph");
    Ok(())
}

fn main() -> ExitCode {
    let checks: [Check; 8] = [
        ("fusion oracle equivalence", fusion_oracle_equivalence),
        ("metric correctness", metric_correctness),
        ("tour memory semantics", tour_memory_semantics),
        ("oracle agent sanity", oracle_agent_sanity),
        ("viewpoint discovery separation", discovery_separation),
        ("embedding numerics", embedding_numerics),
        ("ablation plumbing", ablation_plumbing),
        ("graph serialization", serialization),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
