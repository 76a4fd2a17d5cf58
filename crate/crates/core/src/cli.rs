//! Command-line front end: config parsing, grid expansion and CSV output.
//!
//! Config files are flat `key = value` text using the [`ScenarioConfig`] field
//! names. `#` starts a comment. The grid keys `k`, `s_count` and `rho` accept
//! comma-separated lists (optionally bracketed) and expand to their cross
//! product, `k` outermost and `rho` innermost.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use log::info;
use thiserror::Error;

use crate::engine::{run_scenario_grid_with_progress, ScenarioConfig, ScenarioRecords};
use crate::stats::{aggregate_runs, AggregatePoint};

pub const RESULTS_FILE: &str = "results.csv";
pub const RAW_FILE: &str = "raw.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
pub const RESULTS_HEADER: &str = "scenario,K,S,rho,t,mean,ci_low,ci_high,reps";

pub const QUICK_REPETITIONS: usize = 200;
pub const FULL_REPETITIONS: usize = 4000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },

    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("`{0}` is required (set it in the config file or with --grid-{flag})", flag = flag_for(.0))]
    Missing(&'static str),

    #[error("key `{key}` given more than once (line {line})")]
    Duplicate { key: String, line: usize },

    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Scenario(#[from] crate::Error),
}

fn flag_for(key: &str) -> &'static str {
    match key {
        "s_count" => "s",
        _ => "k",
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Simulation(#[from] crate::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

/// Simulate open strategy-making on correlated NK landscapes.
#[derive(Debug, Parser)]
#[command(name = "openstrat", version)]
pub struct Cli {
    /// Flat key = value config file (ScenarioConfig field names).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Interaction degrees K to sweep, e.g. "4,7".
    #[arg(long, value_delimiter = ',')]
    pub grid_k: Vec<usize>,

    /// Practitioner counts S to sweep, e.g. "1,10,100".
    #[arg(long, value_delimiter = ',')]
    pub grid_s: Vec<usize>,

    /// Landscape correlations to sweep, e.g. "0.1,0.5,0.9".
    #[arg(long, value_delimiter = ',')]
    pub grid_rho: Vec<f64>,

    /// Repetitions per scenario.
    #[arg(long, conflicts_with_all = ["quick", "full"])]
    pub reps: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    /// Also write per-repetition records.
    #[arg(long)]
    pub raw: bool,

    /// 200 repetitions per scenario.
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,

    /// 4000 repetitions per scenario.
    #[arg(long)]
    pub full: bool,
}

/// Values gathered from a config file before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigValues {
    pub n: Option<usize>,
    pub k: Vec<usize>,
    pub s_count: Vec<usize>,
    pub rho: Vec<f64>,
    pub c: Option<usize>,
    pub q: Option<usize>,
    pub l: Option<usize>,
    pub e: Option<f64>,
    pub t_max: Option<usize>,
    pub repetitions: Option<usize>,
    pub jitter: Option<f64>,
    pub seed: Option<u64>,
}

fn parse_one<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.to_string(),
        value: raw.trim().to_string(),
        reason: e.to_string(),
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let inner = raw.trim().trim_start_matches('[').trim_end_matches(']');
    let items = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| parse_one(key, item))
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: raw.trim().to_string(),
            reason: "empty list".into(),
        });
    }
    Ok(items)
}

impl ConfigValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut v = ConfigValues::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: raw_line.to_string(),
                });
            };
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            seen.push(key.to_string());
            match key {
                "n" => v.n = Some(parse_one(key, value)?),
                "k" => v.k = parse_list(key, value)?,
                "s_count" => v.s_count = parse_list(key, value)?,
                "rho" => v.rho = parse_list(key, value)?,
                "c" => v.c = Some(parse_one(key, value)?),
                "q" => v.q = Some(parse_one(key, value)?),
                "l" => v.l = Some(parse_one(key, value)?),
                "e" => v.e = Some(parse_one(key, value)?),
                "t_max" => v.t_max = Some(parse_one(key, value)?),
                "repetitions" => v.repetitions = Some(parse_one(key, value)?),
                "jitter" => v.jitter = Some(parse_one(key, value)?),
                "seed" => v.seed = Some(parse_one(key, value)?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        key: key.to_string(),
                        line: line_no,
                    })
                }
            }
        }
        Ok(v)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Applies command-line overrides on top of file values.
    pub fn apply_flags(&mut self, cli: &Cli) {
        if !cli.grid_k.is_empty() {
            self.k = cli.grid_k.clone();
        }
        if !cli.grid_s.is_empty() {
            self.s_count = cli.grid_s.clone();
        }
        if !cli.grid_rho.is_empty() {
            self.rho = cli.grid_rho.clone();
        }
        if cli.quick {
            self.repetitions = Some(QUICK_REPETITIONS);
        }
        if cli.full {
            self.repetitions = Some(FULL_REPETITIONS);
        }
        if cli.reps.is_some() {
            self.repetitions = cli.reps;
        }
        if cli.seed.is_some() {
            self.seed = cli.seed;
        }
    }

    /// Fills defaults, expands the grid and validates every scenario.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>, ConfigError> {
        if self.k.is_empty() {
            return Err(ConfigError::Missing("k"));
        }
        if self.s_count.is_empty() {
            return Err(ConfigError::Missing("s_count"));
        }
        let rhos = if self.rho.is_empty() {
            vec![ScenarioConfig::DEFAULT_RHO]
        } else {
            self.rho.clone()
        };
        let mut out = Vec::new();
        for &k in &self.k {
            for &s_count in &self.s_count {
                for &rho in &rhos {
                    let base = ScenarioConfig::with_defaults(k, s_count);
                    let config = ScenarioConfig {
                        n: self.n.unwrap_or(base.n),
                        rho,
                        c: self.c.unwrap_or(base.c),
                        q: self.q.unwrap_or(base.q),
                        l: self.l.unwrap_or(base.l),
                        e: self.e.unwrap_or(base.e),
                        t_max: self.t_max.unwrap_or(base.t_max),
                        repetitions: self.repetitions.unwrap_or(base.repetitions),
                        jitter: self.jitter.unwrap_or(base.jitter),
                        seed: self.seed.unwrap_or(base.seed),
                        ..base
                    };
                    config.validate()?;
                    out.push(config);
                }
            }
        }
        Ok(out)
    }
}

/// Resolves the scenario list from an optional config file plus flags.
pub fn parse_config(cli: &Cli) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let mut values = match &cli.config {
        Some(path) => ConfigValues::read(path)?,
        None => ConfigValues::default(),
    };
    values.apply_flags(cli);
    values.expand()
}

fn unique<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Metadata written next to every result set.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub configs: Vec<ScenarioConfig>,
    pub version: String,
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    /// Renders the manifest as a config file; metadata goes in comments so the
    /// manifest itself can be passed back via `--config`.
    pub fn render(&self) -> String {
        let mut text = String::new();
        let _ = writeln!(text, "# openstrat run manifest");
        let _ = writeln!(text, "# version = {}", self.version);
        let _ = writeln!(text, "# timestamp = {}", self.timestamp);
        for p in &self.outputs {
            let _ = writeln!(text, "# output = {}", p.display());
        }
        let Some(first) = self.configs.first() else {
            return text;
        };
        let ks = unique(self.configs.iter().map(|c| c.k));
        let ss = unique(self.configs.iter().map(|c| c.s_count));
        let rhos = unique(self.configs.iter().map(|c| c.rho));
        let _ = writeln!(text, "n = {}", first.n);
        let _ = writeln!(text, "k = {}", join(&ks));
        let _ = writeln!(text, "s_count = {}", join(&ss));
        let _ = writeln!(text, "rho = {}", join(&rhos));
        let _ = writeln!(text, "c = {}", first.c);
        let _ = writeln!(text, "q = {}", first.q);
        let _ = writeln!(text, "l = {}", first.l);
        let _ = writeln!(text, "e = {}", first.e);
        let _ = writeln!(text, "t_max = {}", first.t_max);
        let _ = writeln!(text, "repetitions = {}", first.repetitions);
        let _ = writeln!(text, "jitter = {}", first.jitter);
        let _ = writeln!(text, "seed = {}", first.seed);
        text
    }
}

/// Aggregate CSV rows, sorted by `(scenario, t)`, as a string.
pub fn render_results(points: &[AggregatePoint], configs: &[ScenarioConfig]) -> String {
    let mut text = String::with_capacity(64 * (points.len() + 1));
    text.push_str(RESULTS_HEADER);
    text.push('\n');
    let mut sorted: Vec<&AggregatePoint> = points.iter().collect();
    sorted.sort_by_key(|p| (p.scenario, p.episode));
    for p in sorted {
        let c = &configs[p.scenario];
        let _ = writeln!(
            text,
            "{},{},{},{:.6},{},{:.6},{:.6},{:.6},{}",
            p.scenario, c.k, c.s_count, c.rho, p.episode, p.mean, p.ci_low, p.ci_high, p.reps
        );
    }
    text
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the aggregate CSV to `path`.
pub fn write_results(
    points: &[AggregatePoint],
    configs: &[ScenarioConfig],
    path: &Path,
) -> Result<(), CliError> {
    write_file(path, &render_results(points, configs))
}

/// Per-repetition records: `scenario,repetition,t,performance,strategy`.
pub fn write_raw(runs: &[ScenarioRecords], path: &Path) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(wrap)?;
    let mut out = BufWriter::new(file);
    let result = (|| -> io::Result<()> {
        writeln!(out, "scenario,repetition,t,performance,strategy")?;
        for run in runs {
            for r in &run.records {
                writeln!(
                    out,
                    "{},{},{},{:.6},{}",
                    run.scenario, r.repetition, r.episode, r.performance, r.strategy
                )?;
            }
        }
        out.flush()
    })();
    result.map_err(wrap)
}

/// Parsed row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: usize,
    pub k: usize,
    pub s_count: usize,
    pub rho: f64,
    pub episode: u32,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reps: usize,
}

/// Reads back a CSV produced by [`render_results`].
pub fn parse_results(text: &str) -> Result<Vec<ResultRow>, ConfigError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(RESULTS_HEADER) => {}
        other => {
            return Err(ConfigError::InvalidValue {
                key: "header".into(),
                value: other.unwrap_or("").into(),
                reason: format!("expected `{RESULTS_HEADER}`"),
            })
        }
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(ConfigError::InvalidValue {
                    key: "row".into(),
                    value: line.into(),
                    reason: "expected 9 fields".into(),
                });
            }
            Ok(ResultRow {
                scenario: parse_one("scenario", f[0])?,
                k: parse_one("K", f[1])?,
                s_count: parse_one("S", f[2])?,
                rho: parse_one("rho", f[3])?,
                episode: parse_one("t", f[4])?,
                mean: parse_one("mean", f[5])?,
                ci_low: parse_one("ci_low", f[6])?,
                ci_high: parse_one("ci_high", f[7])?,
                reps: parse_one("reps", f[8])?,
            })
        })
        .collect()
}

/// Runs the scenarios and writes every output file into `out`.
pub fn execute(
    configs: &[ScenarioConfig],
    out: &Path,
    workers: usize,
    raw: bool,
) -> Result<Vec<AggregatePoint>, CliError> {
    let marker = out.join(INCOMPLETE_MARKER);
    fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    write_file(&marker, "run did not complete\n")?;

    let started = Instant::now();
    let total = configs.len();
    let runs = run_scenario_grid_with_progress(configs, workers, |i, run| {
        let c = &run.config;
        info!(
            "scenario {}/{} (K={}, S={}, rho={}) done: {} records, {:.1}s elapsed",
            i + 1,
            total,
            c.k,
            c.s_count,
            c.rho,
            run.records.len(),
            started.elapsed().as_secs_f64()
        );
    })?;
    let points = aggregate_runs(&runs);

    let mut outputs = vec![out.join(RESULTS_FILE)];
    write_results(&points, configs, &outputs[0])?;
    if raw {
        outputs.push(out.join(RAW_FILE));
        write_raw(&runs, &outputs[1])?;
    }
    let manifest = RunManifest {
        configs: configs.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        outputs,
    };
    write_file(&out.join(MANIFEST_FILE), &manifest.render())?;

    fs::remove_file(&marker).map_err(|source| CliError::Write {
        path: marker.clone(),
        source,
    })?;
    Ok(points)
}

/// Entry point behind the binary.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let configs = parse_config(cli)?;
    info!("{} scenario(s), writing to {}", configs.len(), cli.out.display());
    let result = execute(&configs, &cli.out, cli.workers, cli.raw);
    if result.is_err() && cli.out.is_dir() {
        // best effort: the marker may already exist
        let _ = fs::write(cli.out.join(INCOMPLETE_MARKER), "run did not complete\n");
    }
    result.map(|_| ())
}
