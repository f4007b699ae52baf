//! The `seqcontest` command line: `solve`, `simulate` and `analyze`.
//!
//! Exit codes: 0 on success, 2 for usage, parse, config and schema errors,
//! 3 for I/O failures. `SEQCONTEST_THREADS` caps the worker pool.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{load_config, ConfigError};
use crate::contest::{ContestSpec, MoveSequence, LAB_ENDOWMENT, LAB_PRIZE};
use crate::equilibrium::{calibrate_jow, solve_spne, JowCalibration};
use crate::simulate::{
    export_log, import_log, run_batch, write_atomic, LogFormat, SessionLog, SimulateError,
    LOG_SCHEMA,
};
use crate::stats::{
    jonckheere_terpstra, render_summary_table, summaries_to_csv, treatment_summary,
    trend_by_round, wald_test, JtTest, TreatmentSummary, TrendTarget,
};

pub const REPORT_SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "SEQCONTEST_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "seqcontest", version, about = "Sequential Tullock contest solver and simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subgame-perfect equilibrium of a move sequence.
    Solve(SolveArgs),
    /// Run simulated sessions from a config file or bundled config name.
    Simulate(SimulateArgs),
    /// Summary tables and tests over session logs.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    /// Players per stage, e.g. `1,2`.
    #[arg(long = "seq")]
    pub sequence: MoveSequence,
    #[arg(long, default_value_t = LAB_PRIZE)]
    pub prize: f64,
    #[arg(long, default_value_t = LAB_ENDOWMENT)]
    pub endowment: f64,
    /// Joy of winning added to the prize.
    #[arg(long = "jow", conflicts_with = "calibrate_from")]
    pub joy_of_winning: Option<f64>,
    /// Calibrate joy of winning from this observed mean investment in the
    /// simultaneous contest with the same number of players.
    #[arg(long)]
    pub calibrate_from: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Config file, or the name of a bundled config.
    #[arg(long)]
    pub config: String,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_log_format)]
    pub format: LogFormat,
}

fn parse_log_format(s: &str) -> Result<LogFormat, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Summary,
    Trend,
    Jt,
    Wald,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Session logs (CSV or JSON), in the treatment order used by the trend test.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
    /// Restrict to the last k rounds of each log.
    #[arg(long)]
    pub last_rounds: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "summary,trend,jt,wald")]
    pub tests: Vec<TestKind>,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
    /// Significance level flagged in the report.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Data(String),
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Config(ConfigError::Read { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Data(other.to_string()),
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub observed_mean: f64,
    pub players: usize,
    #[serde(flatten)]
    pub result: JowCalibration,
}

/// What `solve` prints; investments are in experimental points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub sequence: MoveSequence,
    pub prize: f64,
    pub endowment: f64,
    pub joy_of_winning: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    pub aggregate: f64,
    pub normalized_aggregate: f64,
    pub stage_investments: Vec<f64>,
    pub player_investments: Vec<f64>,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let players = args.sequence.players();
    let calibration = match args.calibrate_from {
        Some(mean) => Some(Calibration {
            observed_mean: mean,
            players,
            result: calibrate_jow(mean, players, args.prize).map_err(data)?,
        }),
        None => None,
    };
    let w = match &calibration {
        Some(c) => c.result.joy_of_winning,
        None => args.joy_of_winning.unwrap_or(0.0),
    };
    let spec = ContestSpec::new(args.sequence.clone(), args.prize, args.endowment, w).map_err(data)?;
    let solution = solve_spne(&spec).map_err(data)?;
    let player_investments = solution.player_investments();
    Ok(SolveReport {
        schema: REPORT_SCHEMA,
        sequence: spec.sequence.clone(),
        prize: spec.prize,
        endowment: spec.endowment,
        joy_of_winning: w,
        calibration,
        aggregate: solution.scaled_aggregate,
        normalized_aggregate: solution.aggregate,
        stage_investments: solution.scaled_stage_investments.clone(),
        player_investments,
    })
}

pub fn render_solve(report: &SolveReport, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        let mut s = serde_json::to_string_pretty(report).expect("report serializes");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    if let Some(c) = &report.calibration {
        let _ = writeln!(
            out,
            "calibrated joy of winning w = {:.2} from mean investment {} ({} players){}",
            c.result.joy_of_winning,
            c.observed_mean,
            c.players,
            if c.result.clamped { " [clamped at 0]" } else { "" }
        );
    }
    let _ = writeln!(
        out,
        "sequence {}  V = {}  w = {}  endowment = {}",
        report.sequence, report.prize, report.joy_of_winning, report.endowment
    );
    let _ = writeln!(out, "X = {:.4}  (normalized {:.6})", report.aggregate, report.normalized_aggregate);
    for (i, (x, n)) in report
        .stage_investments
        .iter()
        .zip(report.sequence.stages())
        .enumerate()
    {
        let _ = writeln!(out, "stage {}: {} x {:.4}", i + 1, n, x);
    }
    out
}

/// Output of `simulate` and `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub version: String,
    pub log_schema: u32,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            config: None,
            master_seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            log_schema: LOG_SCHEMA,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_clock_seconds: 0.0,
        }
    }

    fn write(mut self, dir: &Path, started: Instant) -> Result<Self, CliError> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        let mut bytes = serde_json::to_vec_pretty(&self).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&dir.join(MANIFEST_FILE), &bytes)?;
        Ok(self)
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let (config, base_dir) = load_config(&args.config)?;
    let sessions = config.sessions(base_dir.as_deref(), args.seed)?;
    let master_seed = args.seed.unwrap_or(config.seed);
    log::info!(
        "simulating {} sessions x {} replications",
        sessions.len(),
        config.replications
    );
    // Everything runs in memory first so a failure writes nothing.
    let logs = with_thread_cap(|| run_batch(&sessions, config.replications))??;

    let ext = match args.format {
        LogFormat::Csv => "csv",
        LogFormat::Json => "json",
    };
    let mut used = std::collections::HashSet::new();
    let mut manifest = RunManifest::new("simulate");
    manifest.config = Some(args.config.clone());
    manifest.master_seed = Some(master_seed);
    for (i, log) in logs.iter().enumerate() {
        let session = &sessions[i / config.replications];
        let mut stem = session.label.clone().unwrap_or_else(|| format!("session{}", i + 1));
        if config.replications > 1 {
            stem = format!("{stem}_rep{}", i % config.replications + 1);
        }
        if !used.insert(stem.clone()) {
            stem = format!("{stem}_{}", i + 1);
            used.insert(stem.clone());
        }
        let path = args.out.join(format!("{stem}.{ext}"));
        export_log(log, args.format, &path)?;
        manifest.outputs.push(path.display().to_string());
    }
    manifest.outputs.push(args.out.join(MANIFEST_FILE).display().to_string());
    manifest.write(&args.out, started)
}

/// One row of `tests.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub test: String,
    pub treatment: String,
    pub variable: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub hypothesized: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeReport {
    pub summaries: Vec<TreatmentSummary>,
    pub tests: Vec<TestRow>,
    pub jt: Option<JtTest>,
    pub text: String,
    pub manifest: RunManifest,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalyzeReport, CliError> {
    let started = Instant::now();
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    if args.last_rounds == Some(0) {
        return Err(CliError::Usage("--last-rounds must be positive".into()));
    }
    let mut logs = Vec::with_capacity(args.logs.len());
    for path in &args.logs {
        let log = import_log(path)?;
        if log.schema != LOG_SCHEMA {
            return Err(CliError::Data(format!(
                "{}: log schema {} differs from {}",
                path.display(),
                log.schema,
                LOG_SCHEMA
            )));
        }
        logs.push(match args.last_rounds {
            Some(k) => crate::stats::last_rounds(&log, k),
            None => log,
        });
    }
    let wants = |t: TestKind| args.tests.contains(&t);
    let summaries = logs
        .iter()
        .map(|log| treatment_summary(log, None))
        .collect::<Result<Vec<_>, _>>()
        .map_err(data)?;

    let mut tests = Vec::new();
    if wants(TestKind::Trend) {
        for log in &logs {
            tests.push(trend_row(log));
        }
    }
    if wants(TestKind::Wald) {
        for s in &summaries {
            for r in &s.rows {
                let (Some(se), Some(spne)) = (r.se, r.spne) else {
                    continue;
                };
                let w = wald_test(r.mean, se, spne);
                tests.push(TestRow {
                    test: "wald".into(),
                    treatment: s.treatment.to_string(),
                    variable: r.variable.clone(),
                    estimate: r.mean,
                    se: Some(se),
                    hypothesized: Some(spne),
                    statistic: Some(w.statistic),
                    p_value: Some(w.p_value),
                    note: if w.degenerate { "zero standard error".into() } else { String::new() },
                });
            }
        }
    }
    let mut jt = None;
    if wants(TestKind::Jt) {
        let groups: Vec<Vec<f64>> = logs.iter().map(group_mean_aggregates).collect();
        let order: Vec<String> = logs.iter().map(|l| l.treatment.to_string()).collect();
        let treatment = order.join(" < ");
        match jonckheere_terpstra(&groups) {
            Ok(t) => {
                jt = Some(t);
                tests.push(TestRow {
                    test: "jt".into(),
                    treatment,
                    variable: "X".into(),
                    estimate: t.statistic,
                    se: Some(t.null_variance.sqrt()),
                    hypothesized: Some(t.null_mean),
                    statistic: Some(t.z),
                    p_value: Some(t.p_value),
                    note: "matching-group means in input order".into(),
                });
            }
            Err(e) => tests.push(TestRow {
                test: "jt".into(),
                treatment,
                variable: "X".into(),
                estimate: f64::NAN,
                se: None,
                hypothesized: None,
                statistic: None,
                p_value: None,
                note: e.to_string(),
            }),
        }
    }

    let text = render_report(&summaries, &tests, jt.as_ref(), args);
    let mut manifest = RunManifest::new("analyze");
    manifest.inputs = args.logs.iter().map(|p| p.display().to_string()).collect();
    let mut outputs: Vec<(&str, Vec<u8>)> = Vec::new();
    if wants(TestKind::Summary) {
        outputs.push(("summary.csv", summaries_to_csv(&summaries)));
    }
    if !tests.is_empty() {
        outputs.push(("tests.csv", tests_to_csv(&tests)));
    }
    outputs.push(("report.txt", text.clone().into_bytes()));
    for (name, bytes) in outputs {
        let path = args.out.join(name);
        write_atomic(&path, &bytes)?;
        manifest.outputs.push(path.display().to_string());
    }
    manifest.outputs.push(args.out.join(MANIFEST_FILE).display().to_string());
    let manifest = manifest.write(&args.out, started)?;
    Ok(AnalyzeReport {
        summaries,
        tests,
        jt,
        text,
        manifest,
    })
}

fn trend_row(log: &SessionLog) -> TestRow {
    let treatment = log.treatment.to_string();
    match trend_by_round(log, TrendTarget::Aggregate) {
        Ok(fit) => {
            let w = fit.wald(1, 0.0);
            TestRow {
                test: "trend".into(),
                treatment,
                variable: "X".into(),
                estimate: fit.coefficients[1],
                se: Some(w.se),
                hypothesized: Some(0.0),
                statistic: Some(w.statistic),
                p_value: Some(w.p_value),
                note: "slope of aggregate on round".into(),
            }
        }
        Err(e) => TestRow {
            test: "trend".into(),
            treatment,
            variable: "X".into(),
            estimate: f64::NAN,
            se: None,
            hypothesized: Some(0.0),
            statistic: None,
            p_value: None,
            note: e.to_string(),
        },
    }
}

/// Mean contest aggregate of each matching group, in group order.
pub fn group_mean_aggregates(log: &SessionLog) -> Vec<f64> {
    let mut sums: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for ((group, _, _), rows) in log.contests() {
        let e = sums.entry(group).or_default();
        e.0 += rows.iter().map(|r| r.investment).sum::<f64>();
        e.1 += 1;
    }
    sums.values().map(|(s, n)| s / *n as f64).collect()
}

fn tests_to_csv(rows: &[TestRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

fn render_report(
    summaries: &[TreatmentSummary],
    tests: &[TestRow],
    jt: Option<&JtTest>,
    args: &AnalyzeArgs,
) -> String {
    let mut out = String::new();
    if let Some(s) = summaries.first() {
        let _ = writeln!(out, "rounds {}-{}", s.first_round, s.last_round);
    }
    if args.tests.contains(&TestKind::Summary) {
        out.push_str(&render_summary_table(summaries));
        out.push('\n');
    }
    if !tests.is_empty() {
        let _ = writeln!(
            out,
            "{:<6} {:<24} {:<4} {:>12} {:>10} {:>10} {:>10} {:>10}",
            "test", "treatment", "var", "estimate", "se", "H0", "stat", "p"
        );
        for r in tests {
            let _ = writeln!(
                out,
                "{:<6} {:<24} {:<4} {:>12.4} {:>10} {:>10} {:>10} {:>10}  {}",
                r.test,
                r.treatment,
                r.variable,
                r.estimate,
                fmt_opt(r.se, 4),
                fmt_opt(r.hypothesized, 2),
                fmt_opt(r.statistic, 3),
                fmt_opt(r.p_value, 4),
                r.note
            );
        }
    }
    if let Some(t) = jt {
        let verdict = if t.p_value < args.alpha {
            format!("significant at alpha = {}", args.alpha)
        } else {
            format!("not significant at alpha = {}", args.alpha)
        };
        let _ = writeln!(
            out,
            "\nJonckheere-Terpstra trend: J = {}, z = {:.3}, p = {:.4} ({verdict})",
            t.statistic, t.z, t.p_value
        );
    }
    out
}

/// Runs `f` on a pool capped by `SEQCONTEST_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(f());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(data)?;
    Ok(pool.install(f))
}

/// Executes a parsed command and returns what it prints on stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Solve(args) => Ok(render_solve(&cmd_solve(args)?, args.format)),
        Command::Simulate(args) => {
            let manifest = cmd_simulate(args)?;
            let mut out = String::new();
            for path in &manifest.outputs {
                let _ = writeln!(out, "wrote {path}");
            }
            Ok(out)
        }
        Command::Analyze(args) => Ok(cmd_analyze(args)?.text),
    }
}

fn usage_for(args: &[std::ffi::OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(str::to_owned);
    match sub {
        Some(name) => cmd.find_subcommand_mut(&name).expect("found").render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            let rendered = e.render().to_string();
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", usage_for(&args));
            }
            return 2;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("seqcontest").chain(args.iter().copied())).unwrap()
    }

    fn solve(args: &[&str]) -> SolveReport {
        match parse(args).command {
            Command::Solve(a) => cmd_solve(&a).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn solve_examples() {
        let r = solve(&["solve", "--seq", "1,2", "--prize", "240"]);
        assert!((r.aggregate - 180.0).abs() < 1e-9);
        assert!((r.stage_investments[0] - 90.0).abs() < 1e-9);
        assert!((r.stage_investments[1] - 45.0).abs() < 1e-9);
        for (got, want) in r.player_investments.iter().zip([90.0, 45.0, 45.0]) {
            assert!((got - want).abs() < 1e-9);
        }

        let r = solve(&["solve", "--seq", "3", "--jow", "0"]);
        assert!((r.stage_investments[0] - 160.0 / 3.0).abs() < 1e-9);

        let r = solve(&["solve", "--seq", "1,1,1", "--calibrate-from", "79.94"]);
        let w = r.calibration.as_ref().unwrap().result.joy_of_winning;
        assert!((w - 119.73).abs() < 0.01);
        assert!((r.aggregate - 283.72).abs() < 0.05);
        assert!(render_solve(&r, OutputFormat::Text).starts_with("calibrated joy of winning w = 119.73"));
    }

    #[test]
    fn solve_json_round_trips() {
        let r = solve(&["solve", "--seq", "(2,1)"]);
        let text = render_solve(&r, OutputFormat::Json);
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
    }

    #[test]
    fn usage_errors_exit_2() {
        for bad in [
            vec!["seqcontest", "solve", "--seq", "1,0"],
            vec!["seqcontest", "solve", "--seq", "1,x"],
            vec!["seqcontest", "solve"],
            vec!["seqcontest", "solve", "--seq", "3", "--jow", "1", "--calibrate-from", "80"],
            vec!["seqcontest", "simulate", "--config", "x", "--format", "xml"],
            vec!["seqcontest", "frobnicate"],
        ] {
            assert_eq!(main_with_args(bad.clone()), 2, "{bad:?}");
        }
        assert_eq!(main_with_args(["seqcontest", "solve", "--seq", "3", "--prize", "-1"]), 2);
    }

    #[test]
    fn missing_config_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let code = main_with_args([
            "seqcontest",
            "simulate",
            "--config",
            dir.path().join("nope.toml").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 3);
        assert!(!out.exists());
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.toml");
        std::fs::write(&cfg, "[[session]]\ntreatment = \"3\"\ngroups = 1\n").unwrap();
        let out = dir.path().join("out");
        let code = main_with_args([
            "seqcontest",
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
        assert!(!out.exists());
    }
}
