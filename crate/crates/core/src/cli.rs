//! Command-line front end: `breakpoints`, `index` and `evaluate`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cluster::EstimationParams;
use crate::config::{validate_percent, RunConfig};
use crate::error::{Error, Result};
use crate::eval::{self, Evaluation, ExperimentSummary, OracleLabeling};
use crate::model::TraceBundle;
use crate::pipeline::{self, IndexOutcome};
use crate::proximity::{Granularity, MetricVariant};
use crate::sbfl;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const BUNDLE_EXT: &str = "trace";
pub const ORACLE_SUFFIX: &str = ".oracle.json";

#[derive(Debug, Parser)]
#[command(name = "failidx", version, about = "Group failed tests by root cause using run-time variable values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank statements by suspiciousness and mark the selected breakpoints.
    Breakpoints {
        bundle: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Cluster the failures of one bundle.
    Index {
        bundle: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        /// Write `<name>.matrix.txt` and `<name>.clusters.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Index every `*.trace` bundle of a corpus directory and score it
    /// against `<name>.oracle.json`.
    Evaluate {
        corpus: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        /// Write `report.tsv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Args)]
pub struct Knobs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Top-x% of the ranking used as breakpoints. `evaluate` accepts a
    /// comma-separated list and reports one block per value.
    #[arg(long, value_delimiter = ',')]
    pub top_percent: Vec<f64>,
    #[arg(long)]
    pub dstar_exponent: Option<f64>,
    /// full | no_variable_level | no_breakpoint_level
    #[arg(long)]
    pub variant: Option<MetricVariant>,
    /// chars | bigrams | tokens
    #[arg(long)]
    pub jaccard: Option<Granularity>,
    /// Oracle file (`index`) or directory of oracle files (`evaluate`).
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long)]
    pub r_a: Option<f64>,
    #[arg(long)]
    pub r_b: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_k: Option<usize>,
}

impl Knobs {
    /// Effective config (flag > file > default) and the requested
    /// top-percent values, at least one.
    pub fn resolve(&self) -> Result<(RunConfig, Vec<f64>)> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(&x) = self.top_percent.first() {
            cfg.top_percent = x;
        }
        if let Some(s) = self.dstar_exponent {
            cfg.dstar_exponent = s;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(j) = self.jaccard {
            cfg.jaccard = j;
        }
        if let Some(o) = &self.oracle {
            cfg.oracle = Some(o.clone());
        }
        let est: &mut EstimationParams = &mut cfg.estimation;
        if let Some(v) = self.r_a {
            est.r_a = v;
        }
        if let Some(v) = self.r_b {
            est.r_b = v;
        }
        if let Some(v) = self.epsilon {
            est.epsilon = v;
        }
        if self.max_k.is_some() {
            est.max_k = self.max_k;
        }
        cfg.validate()?;
        let sweep = if self.top_percent.is_empty() {
            vec![cfg.top_percent]
        } else {
            self.top_percent.clone()
        };
        for &x in &sweep {
            validate_percent(x)?;
        }
        Ok((cfg, sweep))
    }
}

fn fmt_score(s: f64) -> String {
    if s.is_infinite() {
        "inf".into()
    } else {
        format!("{s:.6}")
    }
}

/// Ranked statement listing with the selected breakpoints marked.
pub fn cmd_breakpoints(bundle: &TraceBundle, config: &RunConfig) -> String {
    let counts = sbfl::spectrum_counts(bundle);
    let ranking = pipeline::rank(bundle, config);
    let selected = sbfl::select_breakpoints(&ranking, config.top_percent);
    let mut out = String::new();
    let _ = writeln!(out, "# config: {config}");
    let _ = writeln!(
        out,
        "# program: {} statements: {} failed: {} passed: {} breakpoints: {}",
        bundle.program,
        bundle.statements.len(),
        counts.total_failed,
        counts.total_passed,
        selected.len()
    );
    if counts.total_passed == 0 {
        out.push_str("# warning: no passing tests; suspiciousness only reflects failing coverage\n");
    }
    out.push_str("rank\tstmt\tline\tef\tep\tnf\tnp\tscore\tbreakpoint\n");
    for (n, r) in ranking.0.iter().enumerate() {
        let c = counts.get(r.id).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            n + 1,
            r.id,
            r.line,
            c.ef,
            c.ep,
            c.nf,
            c.np,
            fmt_score(r.score),
            if n < selected.len() { "*" } else { "" }
        );
    }
    out
}

/// Artifacts of `index`.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub outcome: IndexOutcome,
    pub evaluation: Option<Evaluation>,
    pub summary: String,
    pub matrix_text: String,
    pub clusters_json: String,
}

pub fn cmd_index(bundle: &TraceBundle, config: &RunConfig) -> Result<IndexReport> {
    let outcome = pipeline::index_failures(bundle, config)?;
    let evaluation = match &config.oracle {
        Some(path) => {
            let oracle = OracleLabeling::from_path(path)?;
            let c = &outcome.clustering;
            Some(eval::evaluate(&outcome.matrix.names, &c.assignment, c.k, &oracle)?)
        }
        None => None,
    };
    let mut summary = String::new();
    let _ = writeln!(summary, "# config: {config}");
    let bps: Vec<String> = outcome.breakpoints.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(
        summary,
        "# program: {} failures: {} breakpoints: {}",
        bundle.program,
        outcome.matrix.len(),
        bps.join(" ")
    );
    let _ = writeln!(summary, "k\t{}", outcome.clustering.k);
    for (c, names) in outcome.cluster_names().iter().enumerate() {
        let medoid = &outcome.matrix.names[outcome.clustering.medoids[c]];
        let _ = writeln!(summary, "cluster {c}\tmedoid {medoid}\t{}", names.join(" "));
    }
    for (i, j, why) in &outcome.matrix.warnings {
        let names = &outcome.matrix.names;
        let _ = writeln!(summary, "# warning: {} / {}: {why}", names[*i], names[*j]);
    }
    if let Some(e) = &evaluation {
        let _ = writeln!(summary, "{}", TABLE_HEADER);
        let _ = writeln!(summary, "{}", version_row(&bundle.program, e));
    }
    let matrix_text = format!("# config: {config}\n{}", outcome.matrix.to_text());
    let clusters_json = serde_json::to_string_pretty(&outcome.clusters_json())
        .expect("cluster document serializes");
    Ok(IndexReport {
        outcome,
        evaluation,
        summary,
        matrix_text,
        clusters_json,
    })
}

pub const TABLE_HEADER: &str = "version\tp\tr\tk\tequal\tFMI\tJC\tPR\tRR";

fn version_row(name: &str, e: &Evaluation) -> String {
    let metrics = match e.metrics {
        Some(m) => m.as_array().iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        None => vec!["n/a".to_string(); 4],
    };
    format!(
        "{name}\t{}\t{}\t{}\t{}\t{}",
        e.p,
        e.r,
        e.k,
        if e.equal() { "yes" } else { "no" },
        metrics.join("\t")
    )
}

fn summary_row(s: &ExperimentSummary) -> String {
    format!(
        "summary\t\t\t\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
        s.v_equal, s.s_fmi, s.s_jc, s.s_pr, s.s_rr
    )
}

/// One evaluated corpus version.
#[derive(Debug, Clone)]
pub struct VersionResult {
    pub name: String,
    pub outcome: std::result::Result<Evaluation, String>,
}

/// One `top_percent` block of an evaluation run.
#[derive(Debug, Clone)]
pub struct SweepBlock {
    pub top_percent: f64,
    pub versions: Vec<VersionResult>,
    pub summary: ExperimentSummary,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub blocks: Vec<SweepBlock>,
}

impl EvaluationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config: {}", self.config);
        for block in &self.blocks {
            let _ = writeln!(out, "\n# top_percent={}", block.top_percent);
            out.push_str(TABLE_HEADER);
            out.push('\n');
            let mut errors = Vec::new();
            for v in &block.versions {
                match &v.outcome {
                    Ok(e) => {
                        out.push_str(&version_row(&v.name, e));
                    }
                    Err(msg) => {
                        let _ = write!(out, "{}\t-\t-\t-\terror\t-\t-\t-\t-", v.name);
                        errors.push(format!("# {}: {msg}", v.name));
                    }
                }
                out.push('\n');
            }
            out.push_str(&summary_row(&block.summary));
            out.push('\n');
            for e in errors {
                out.push_str(&e);
                out.push('\n');
            }
        }
        out
    }
}

/// Bundle paths of a corpus directory, sorted by file name.
pub fn corpus_bundles(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::Io(dir.display().to_string(), e))?;
    let mut paths = Vec::new();
    for entry in rd {
        let path = entry.map_err(|e| Error::Io(dir.display().to_string(), e))?.path();
        if path.extension().is_some_and(|e| e == BUNDLE_EXT) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn version_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Evaluates every bundle of `corpus` once per value of `sweep`. Oracles are
/// read from `config.oracle` when set, else from the corpus directory.
pub fn cmd_evaluate(corpus: &Path, config: &RunConfig, sweep: &[f64]) -> Result<EvaluationReport> {
    let oracle_dir = config.oracle.clone().unwrap_or_else(|| corpus.to_path_buf());
    let paths = corpus_bundles(corpus)?;
    if paths.is_empty() {
        return Err(Error::Invalid(format!(
            "no .{BUNDLE_EXT} bundles in {}",
            corpus.display()
        )));
    }
    struct Loaded {
        name: String,
        input: std::result::Result<(TraceBundle, sbfl::SuspiciousnessRanking), String>,
        oracle: OracleLabeling,
    }
    let mut loaded = Vec::with_capacity(paths.len());
    for path in &paths {
        let name = version_name(path);
        let oracle_path = oracle_dir.join(format!("{name}{ORACLE_SUFFIX}"));
        if !oracle_path.exists() {
            return Err(Error::Invalid(format!(
                "missing oracle {} for version {name}",
                oracle_path.display()
            )));
        }
        let oracle = OracleLabeling::from_path(&oracle_path)?;
        let input = TraceBundle::from_path(path)
            .map(|b| {
                let ranking = pipeline::rank(&b, config);
                (b, ranking)
            })
            .map_err(|e| e.to_string());
        loaded.push(Loaded { name, input, oracle });
    }

    let mut blocks = Vec::with_capacity(sweep.len());
    for &x in sweep {
        let cfg = RunConfig {
            top_percent: x,
            ..config.clone()
        };
        let versions: Vec<VersionResult> = loaded
            .iter()
            .map(|v| {
                let outcome = match &v.input {
                    Err(e) => Err(e.clone()),
                    Ok((bundle, ranking)) => evaluate_version(bundle, ranking, &cfg, &v.oracle)
                        .map_err(|e| e.to_string()),
                };
                VersionResult {
                    name: v.name.clone(),
                    outcome,
                }
            })
            .collect();
        let summary = eval::experiment_summary(versions.iter().filter_map(|v| v.outcome.as_ref().ok()));
        blocks.push(SweepBlock {
            top_percent: x,
            versions,
            summary,
        });
    }
    Ok(EvaluationReport {
        config: config.clone(),
        blocks,
    })
}

fn evaluate_version(
    bundle: &TraceBundle,
    ranking: &sbfl::SuspiciousnessRanking,
    config: &RunConfig,
    oracle: &OracleLabeling,
) -> Result<Evaluation> {
    let p = bundle.failure_count();
    if p < 2 {
        return Err(Error::TooFewFailures(p));
    }
    let outcome = pipeline::index_with_ranking(bundle, config, ranking.clone())?;
    let c = &outcome.clustering;
    eval::evaluate(&outcome.matrix.names, &c.assignment, c.k, oracle)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(path.display().to_string(), e))
}

fn execute(cli: Cli, stdout: &mut String) -> Result<()> {
    match cli.command {
        Command::Breakpoints { bundle, knobs } => {
            let (cfg, sweep) = knobs.resolve()?;
            if sweep.len() > 1 {
                return Err(Error::Config("breakpoints takes a single --top-percent".into()));
            }
            let b = TraceBundle::from_path(&bundle)?;
            stdout.push_str(&cmd_breakpoints(&b, &cfg));
        }
        Command::Index { bundle, knobs, out } => {
            let (cfg, sweep) = knobs.resolve()?;
            if sweep.len() > 1 {
                return Err(Error::Config("index takes a single --top-percent".into()));
            }
            let b = TraceBundle::from_path(&bundle)?;
            let report = cmd_index(&b, &cfg)?;
            stdout.push_str(&report.summary);
            match out {
                Some(dir) => {
                    let stem = version_name(&bundle);
                    write_file(&dir, &format!("{stem}.matrix.txt"), &report.matrix_text)?;
                    write_file(&dir, &format!("{stem}.clusters.json"), &report.clusters_json)?;
                }
                None => {
                    stdout.push('\n');
                    stdout.push_str(&report.matrix_text);
                    stdout.push('\n');
                    stdout.push_str(&report.clusters_json);
                    stdout.push('\n');
                }
            }
        }
        Command::Evaluate { corpus, knobs, out } => {
            let (cfg, sweep) = knobs.resolve()?;
            let text = cmd_evaluate(&corpus, &cfg, &sweep)?.to_text();
            if let Some(dir) = out {
                write_file(&dir, "report.tsv", &text)?;
            }
            stdout.push_str(&text);
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name). Returns the exit
/// code with everything meant for stdout and stderr.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                (code, text, String::new())
            } else {
                (code, String::new(), text)
            };
        }
    };
    let mut stdout = String::new();
    match execute(cli, &mut stdout) {
        Ok(()) => (EXIT_OK, stdout, String::new()),
        Err(e) => (exit_code(&e), stdout, format!("error: {e}\n")),
    }
}
