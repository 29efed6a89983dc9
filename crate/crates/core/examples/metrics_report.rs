//! Evaluate oracle and noisy agents on every bundled scene.

use omninav::config::Config;
use omninav::detection::MockDetector;
use omninav::geometry::Position;
use omninav::keywords::{AblationMode, KeywordPipeline};
use omninav::metrics::{ndtw, report_from_logs};
use omninav::sim::synthetic::bundled;
use omninav::sim::{AgentSpec, TourLog, TourRunner};

fn main() -> anyhow::Result<()> {
    let reference = [Position::new(0.0, 0.0), Position::new(0.0, 3.0)];
    let executed = [Position::new(0.0, 0.0), Position::new(3.0, 0.0)];
    println!("nDTW of a right-angle miss: {:.4}\n", ndtw(&executed, &reference, 3.0)?);

    let cfg = Config::default();
    let kw = KeywordPipeline::rule_based(AblationMode::Full);
    for spec in [AgentSpec::Oracle, AgentSpec::Noisy { p: 0.5, seed: 1 }] {
        for b in bundled() {
            let det = MockDetector::new(b.env.objects().to_vec())?;
            let mut runner = TourRunner::new(&b.env, &det, &kw, &cfg)?;
            let mut agent = spec.build();
            let logs: Vec<TourLog> =
                b.tours.tours.iter().map(|t| runner.run(agent.as_mut(), t)).collect::<Result<_, _>>()?;
            let report = report_from_logs(&logs, &cfg.metrics())?;
            println!("{spec} on {}", b.env.scene_id());
            println!("{}", report.render_table());
        }
    }
    Ok(())
}
