//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{Config, CONFIG_ENV};
use crate::detection::Detector;
use crate::fusion::{bearing_view_index, fuse_continuous, fuse_discrete, FusedKeyword};
use crate::geometry::Position;
use crate::keywords::{
    instruction_hash, parse_llm_response, render_llm_prompt, AblationMode, CachedExtractor, KeywordCache,
    KeywordPipeline, RuleBasedExtractor,
};
use crate::metrics::{report_from_logs, MetricsReport};
use crate::omnigraph::{Omnigraph, ViewpointId, DOT_KEYWORDS_PER_NODE};
use crate::sim::{AgentSpec, Environment, RunLog, TourFile, TourLog, TourRunner};

#[derive(Debug, Parser)]
#[command(
    name = "omninav",
    version,
    about = "Navigation memory: run tours, extract keywords, export graphs, score runs"
)]
pub struct Cli {
    /// Config file (JSON). Falls back to $OMNINAV_CONFIG, then built-in defaults.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run tours in a scene and write the tour log and metrics report.
    Run(RunArgs),
    /// Keyword extraction: rule-based, LLM prompt export, or LLM response ingest.
    Keywords(KeywordArgs),
    /// Export an omnigraph as JSON or DOT, or dump a fusion query.
    Graph(GraphArgs),
    /// Score a tour log.
    Metrics(MetricsArgs),
    /// Run tours under a keyword ablation mode, or filter keywords with it.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Hop limit for discrete fusion.
    #[arg(long)]
    pub hops: Option<usize>,
    /// Radius for continuous fusion, meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Viewpoint discovery distance, meters.
    #[arg(long)]
    pub d_vp: Option<f64>,
    /// Lazy detection distance, meters; must be below --d-vp.
    #[arg(long)]
    pub d_det: Option<f64>,
    /// nDTW distance threshold, meters.
    #[arg(long)]
    pub d_th: Option<f64>,
    /// Seed for embeddings and for `noisy:<p>` agents.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Detect during oracle phases with the last instruction's keywords.
    #[arg(long)]
    pub detect_in_oracle_phases: bool,
    /// Keyword cache (JSONL) consulted before rule-based extraction.
    #[arg(long)]
    pub keyword_cache: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) {
        if let Some(v) = self.hops {
            cfg.discrete_hops = v;
        }
        if let Some(v) = self.radius {
            cfg.continuous_radius_m = v;
        }
        cfg.fit_distance_table();
        if let Some(v) = self.d_vp {
            cfg.d_vp = v;
        }
        if let Some(v) = self.d_det {
            cfg.d_det = v;
        }
        if let Some(v) = self.d_th {
            cfg.d_th = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.detect_in_oracle_phases {
            cfg.detect_in_oracle_phases = true;
        }
        if let Some(p) = &self.keyword_cache {
            cfg.keyword_cache = Some(p.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct TourInputs {
    /// Scene file.
    #[arg(long)]
    pub scene: PathBuf,
    /// Tour file.
    #[arg(long)]
    pub tours: PathBuf,
    /// Only run the tour with this id.
    #[arg(long)]
    pub tour: Option<String>,
    /// `oracle`, `noisy:<p>` (seeded from the config) or `noisy:<p>:<seed>`.
    #[arg(long, default_value = "oracle")]
    pub agent: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inputs: TourInputs,
    /// Tour log output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metrics report output (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeywordMode {
    /// Rule-based extraction; stores results when a cache is given.
    Rule,
    /// Emit one JSON prompt per instruction for an external LLM batch.
    PromptEmit,
    /// Parse LLM responses and store them in the cache.
    ResponseIngest,
}

#[derive(Debug, Args)]
pub struct KeywordArgs {
    #[arg(long, value_enum, default_value = "rule")]
    pub mode: KeywordMode,
    /// Instructions, one per line.
    #[arg(long)]
    pub instructions: PathBuf,
    /// JSONL lines `{"hash": ..., "response": ...}` (response-ingest).
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// Keyword cache to update.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file, tour log, or run log.
    #[arg(long)]
    pub input: PathBuf,
    /// Tour to take the graph from when the input holds several.
    #[arg(long)]
    pub tour: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: GraphFormat,
    /// Instead of exporting, print the discrete fusion result at this viewpoint.
    #[arg(long, conflicts_with = "fuse_at")]
    pub fuse: Option<String>,
    /// Instead of exporting, print the continuous fusion result at `x,y`.
    #[arg(long)]
    pub fuse_at: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Tour log or run log.
    #[arg(long)]
    pub log: PathBuf,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub mode: AblationArg,
    /// Filter these keywords with the mode and print the survivors as JSON
    /// instead of running tours. Repeatable.
    #[arg(long = "keyword")]
    pub keywords: Vec<String>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub tours: Option<PathBuf>,
    #[arg(long)]
    pub tour: Option<String>,
    #[arg(long, default_value = "oracle")]
    pub agent: String,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    Type1,
    Type2,
    Full,
}

impl From<AblationArg> for AblationMode {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Type1 => AblationMode::Type1,
            AblationArg::Type2 => AblationMode::Type2,
            AblationArg::Full => AblationMode::Full,
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    execute(&cli, stdout)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let base = Config::resolve(cli.config.as_deref())?;
    match &cli.command {
        Command::Run(a) => cmd_run(a, base, stdout),
        Command::Keywords(a) => cmd_keywords(a, stdout),
        Command::Graph(a) => cmd_graph(a, base, stdout),
        Command::Metrics(a) => cmd_metrics(a, base, stdout),
        Command::Ablate(a) => cmd_ablate(a, base, stdout),
    }
}

fn configured(base: Config, overrides: &Overrides) -> Result<Config> {
    let mut cfg = base;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn parse_agent(spec: &str, cfg: &Config) -> Result<AgentSpec> {
    if let Some(p) = spec.strip_prefix("noisy:").filter(|rest| !rest.contains(':')) {
        return format!("noisy:{p}:{}", cfg.seed).parse::<AgentSpec>().map_err(anyhow::Error::msg);
    }
    spec.parse::<AgentSpec>().map_err(anyhow::Error::msg)
}

fn keyword_pipeline(cfg: &Config, mode: AblationMode) -> Result<KeywordPipeline> {
    Ok(match &cfg.keyword_cache {
        Some(path) => KeywordPipeline::new(
            Box::new(CachedExtractor::new(KeywordCache::open(path)?, RuleBasedExtractor::default())),
            mode,
        ),
        None => KeywordPipeline::rule_based(mode),
    })
}

/// Run the selected tours; each tour gets fresh memory.
pub fn run_tours(
    env: &Environment,
    tours: &TourFile,
    only: Option<&str>,
    agent: AgentSpec,
    cfg: &Config,
) -> Result<RunLog> {
    let detector: Box<dyn Detector> = cfg.detector.build(env.objects())?;
    let keywords = keyword_pipeline(cfg, cfg.ablation)?;
    let mut runner = TourRunner::new(env, detector.as_ref(), &keywords, cfg)?;
    let selected: Vec<_> = tours.tours.iter().filter(|t| only.is_none_or(|id| t.tour_id == id)).collect();
    if selected.is_empty() {
        bail!("no tour matches {:?}", only.unwrap_or("<all>"));
    }
    let mut logs = Vec::with_capacity(selected.len());
    for tour in selected {
        let mut a = agent.build();
        logs.push(runner.run(a.as_mut(), tour)?);
    }
    Ok(RunLog { logs })
}

fn load_inputs(inputs: &TourInputs) -> Result<(Environment, TourFile)> {
    let env = Environment::from_json(&read(&inputs.scene)?)?;
    let tours = TourFile::from_json(&read(&inputs.tours)?)?;
    Ok((env, tours))
}

fn run_and_report(inputs: &TourInputs, cfg: &Config) -> Result<(RunLog, MetricsReport)> {
    let (env, tours) = load_inputs(inputs)?;
    let agent = parse_agent(&inputs.agent, cfg)?;
    let run = run_tours(&env, &tours, inputs.tour.as_deref(), agent, cfg)?;
    let report = report_from_logs(&run.logs, &cfg.metrics())?;
    Ok((run, report))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_run(a: &RunArgs, base: Config, stdout: &mut dyn Write) -> Result<()> {
    let cfg = configured(base, &a.overrides)?;
    let (run, report) = run_and_report(&a.inputs, &cfg)?;
    if let Some(out) = &a.out {
        emit(Some(out), &pretty(&run), stdout)?;
    }
    if let Some(out) = &a.report {
        emit(Some(out), &pretty(&report), stdout)?;
    }
    emit(None, &report.render_table(), stdout)
}

#[derive(Debug, Serialize, Deserialize)]
struct PromptRecord {
    hash: String,
    system: String,
    user: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResponseRecord {
    hash: String,
    response: String,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = String::from_utf8(read(path)?).context("instructions must be UTF-8")?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn cmd_keywords(a: &KeywordArgs, stdout: &mut dyn Write) -> Result<()> {
    let instructions = read_lines(&a.instructions)?;
    let mut cache = a.cache.as_ref().map(KeywordCache::open).transpose()?;
    let mut out = String::new();
    match a.mode {
        KeywordMode::Rule => {
            let ex = RuleBasedExtractor::default();
            for instr in &instructions {
                let set = ex.extract_keywords(instr);
                let rec = crate::keywords::CacheRecord {
                    hash: instruction_hash(instr),
                    instruction: set.instruction.clone(),
                    keywords: set.keywords.clone(),
                };
                out.push_str(&serde_json::to_string(&rec)?);
                out.push('\n');
                if let Some(c) = cache.as_mut() {
                    c.store(set)?;
                }
            }
        }
        KeywordMode::PromptEmit => {
            for instr in &instructions {
                let p = render_llm_prompt(instr);
                let rec = PromptRecord { hash: instruction_hash(instr), system: p.system, user: p.user };
                out.push_str(&serde_json::to_string(&rec)?);
                out.push('\n');
            }
        }
        KeywordMode::ResponseIngest => {
            let Some(path) = &a.responses else { bail!("--responses is required for response-ingest") };
            let Some(cache) = cache.as_mut() else { bail!("--cache is required for response-ingest") };
            let by_hash: std::collections::HashMap<String, &String> =
                instructions.iter().map(|i| (instruction_hash(i), i)).collect();
            for (n, line) in read_lines(path)?.iter().enumerate() {
                let rec: ResponseRecord =
                    serde_json::from_str(line).with_context(|| format!("response line {}", n + 1))?;
                let Some(instr) = by_hash.get(&rec.hash) else {
                    bail!("response line {} names unknown instruction hash {}", n + 1, rec.hash);
                };
                let set =
                    parse_llm_response(&rec.response, instr).with_context(|| format!("response line {}", n + 1))?;
                out.push_str(&serde_json::to_string(&crate::keywords::CacheRecord {
                    hash: rec.hash.clone(),
                    instruction: set.instruction.clone(),
                    keywords: set.keywords.clone(),
                })?);
                out.push('\n');
                cache.store(set)?;
            }
        }
    }
    emit(a.out.as_deref(), &out, stdout)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LogInput {
    Run(RunLog),
    Tour(Box<TourLog>),
}

fn load_logs(bytes: &[u8]) -> Result<Vec<TourLog>> {
    let input: LogInput = serde_json::from_slice(bytes).context("expected a tour log or run log")?;
    Ok(match input {
        LogInput::Run(r) => r.logs,
        LogInput::Tour(t) => vec![*t],
    })
}

/// A graph file, or the graph snapshot of one tour in a log.
pub fn load_graph(bytes: &[u8], tour: Option<&str>) -> Result<Omnigraph> {
    if let Ok(g) = Omnigraph::deserialize(bytes) {
        return Ok(g);
    }
    let logs = load_logs(bytes).context("input is neither a graph nor a tour log")?;
    let found = match tour {
        Some(id) => logs.into_iter().find(|l| l.tour_id == id),
        None => logs.into_iter().next(),
    };
    found.map(|l| l.graph).ok_or_else(|| anyhow::anyhow!("no tour {:?} in the log", tour.unwrap_or("<first>")))
}

/// Fusion lists as printed by `graph --fuse`.
pub fn fuse_json(fused: &[FusedKeyword]) -> String {
    pretty(&fused)
}

fn parse_xy(s: &str) -> Result<Position> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("expected x,y but got '{s}'"))?;
    match parts.as_slice() {
        [x, y] => Ok(Position::new(*x, *y)),
        _ => bail!("expected x,y but got '{s}'"),
    }
}

fn cmd_graph(a: &GraphArgs, base: Config, stdout: &mut dyn Write) -> Result<()> {
    let cfg = configured(base, &a.overrides)?;
    let graph = load_graph(&read(&a.input)?, a.tour.as_deref())?;
    let text = if let Some(id) = &a.fuse {
        let id = ViewpointId::new(id.clone())?;
        fuse_json(&fuse_discrete(&graph, &id, cfg.discrete_hops, bearing_view_index(&graph, cfg.views))?)
    } else if let Some(xy) = &a.fuse_at {
        fuse_json(&fuse_continuous(&graph, &parse_xy(xy)?, cfg.continuous_radius_m)?)
    } else {
        match a.format {
            GraphFormat::Json => String::from_utf8(graph.serialize()).expect("JSON is UTF-8"),
            GraphFormat::Dot => graph.to_dot(DOT_KEYWORDS_PER_NODE),
        }
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn cmd_metrics(a: &MetricsArgs, base: Config, stdout: &mut dyn Write) -> Result<()> {
    let cfg = configured(base, &a.overrides)?;
    let logs = load_logs(&read(&a.log)?)?;
    let report = report_from_logs(&logs, &cfg.metrics())?;
    let text = if a.json { pretty(&report) } else { report.render_table() };
    emit(a.out.as_deref(), &text, stdout)
}

fn cmd_ablate(a: &AblateArgs, base: Config, stdout: &mut dyn Write) -> Result<()> {
    let mode = AblationMode::from(a.mode);
    if !a.keywords.is_empty() {
        return emit(a.out.as_deref(), &pretty(&mode.apply(&a.keywords)), stdout);
    }
    let (Some(scene), Some(tours)) = (&a.scene, &a.tours) else {
        bail!("ablate needs --scene and --tours, or one or more --keyword");
    };
    let mut cfg = configured(base, &a.overrides)?;
    cfg.ablation = mode;
    let inputs =
        TourInputs { scene: scene.clone(), tours: tours.clone(), tour: a.tour.clone(), agent: a.agent.clone() };
    let (_, report) = run_and_report(&inputs, &cfg)?;
    let text = if a.json { pretty(&report) } else { report.render_table() };
    emit(a.out.as_deref(), &text, stdout)
}

/// Entry point for the binary.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match execute(&cli, &mut stdout) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn agent_seed_defaults_to_config() {
        let cfg = Config { seed: 42, ..Config::default() };
        assert_eq!(parse_agent("noisy:0.5", &cfg).unwrap(), AgentSpec::Noisy { p: 0.5, seed: 42 });
        assert_eq!(parse_agent("noisy:0.5:3", &cfg).unwrap(), AgentSpec::Noisy { p: 0.5, seed: 3 });
        assert!(parse_agent("noisy", &cfg).is_err());
    }

    #[test]
    fn ablate_keyword_filter() {
        let mut out = Vec::new();
        run_from(
            [
                "omninav",
                "ablate",
                "--mode",
                "type2",
                "--keyword",
                "marble kitchen counter",
                "--keyword",
                "kitchen island",
            ],
            &mut out,
        )
        .unwrap();
        let kept: Vec<String> = serde_json::from_slice(&out).unwrap();
        assert_eq!(kept, vec!["marble kitchen counter"]);
    }

    #[test]
    fn xy_parsing() {
        assert_eq!(parse_xy("1.5, -2").unwrap(), Position::new(1.5, -2.0));
        assert!(parse_xy("1").is_err());
        assert!(parse_xy("a,b").is_err());
    }
}
