//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 infeasible parameters, 4 self-check
//! failure, 1 anything else (I/O).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{self, FluidLimit};
use crate::error::Error;
use crate::graph_model::ModelParams;
use crate::montecarlo::{self, Format, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SELF_CHECK: i32 = 4;

/// Environment variable consulted for `--seed` when the flag is absent.
pub const SEED_ENV: &str = "KSMATCH_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ksmatch",
    version,
    about = "Karp-Sipser on random bipartite allocation graphs: thresholds, fluid limits, simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// z1, alpha1 and m/n = 1/alpha1 for a degree d.
    Thresholds {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Predicted phase-one length and matching sizes at load alpha.
    Predict {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fluid-limit trajectory (t, zeta, w, y1, y) on an even zeta grid.
    Trajectory {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seeded Karp-Sipser trials against the predictions.
    Simulate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Experiments over an even grid of loads.
    Sweep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Perfect-matching frequency on configuration-model core graphs.
    CoreCheck {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Analytic property grid; exits 4 if any property fails.
    SelfCheck {
        #[command(flatten)]
        out: OutputArgs,
    },
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Thresholds { out, .. }
            | Command::Predict { out, .. }
            | Command::Trajectory { out, .. }
            | Command::Simulate { out, .. }
            | Command::Sweep { out, .. }
            | Command::CoreCheck { out, .. }
            | Command::SelfCheck { out } => out,
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::Domain { .. } | Error::UnknownFormat(_) | Error::TooLarge { .. } => {
                EXIT_USAGE
            }
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Results go to `stdout` unless `--output`
/// is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
        Err(ParseFailure::Other(e)) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            return e.code;
        }
    };
    match execute(&cli.command) {
        Ok((bytes, code)) => {
            let written = match &cli.command.output().output {
                Some(path) => fs::write(path, &bytes),
                None => stdout.write_all(&bytes),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_FAILURE;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Other(CliError),
}

/// Parses `args`, first splicing in values from a `--config` file for
/// every flag of the chosen subcommand that is absent from the command
/// line (and, for `--seed`, from the environment).
fn parse(args: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let command = Cli::command();
    let tokens: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let config = tokens.iter().enumerate().find_map(|(i, t)| match *t {
        Some("--config") => tokens.get(i + 1).copied().flatten().map(PathBuf::from),
        Some(t) => t.strip_prefix("--config=").map(PathBuf::from),
        None => None,
    });
    let subcommand = tokens.iter().enumerate().skip(1).find_map(|(i, t)| {
        let t = (*t)?;
        command.find_subcommand(t).map(|c| (i, c))
    });
    let (Some(config), Some((position, sub_cmd))) = (config, subcommand) else {
        return Cli::try_parse_from(args).map_err(ParseFailure::Clap);
    };

    let entries = read_config(&config).map_err(ParseFailure::Other)?;
    let on_command_line = |long: &str| {
        let flag = format!("--{long}");
        let prefix = format!("--{long}=");
        tokens
            .iter()
            .flatten()
            .any(|t| *t == flag || t.starts_with(&prefix))
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            continue;
        };
        if key == "config" || on_command_line(&key) {
            continue;
        }
        if arg.get_env().is_some_and(|var| std::env::var_os(var).is_some()) {
            continue;
        }
        extra.push(OsString::from(format!("--{key}")));
        extra.push(OsString::from(value));
    }
    let mut merged = args[..=position].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[position + 1..]);
    Cli::try_parse_from(merged).map_err(ParseFailure::Clap)
}

/// `key = value` per line; `#` starts a comment. Keys may use `_` or `-`.
fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "{}:{}: expected `key = value`",
                path.display(),
                i + 1
            )));
        };
        entries.push((key.trim().replace('_', "-"), value.trim().to_string()));
    }
    Ok(entries)
}

fn machine_format(format: OutputFormat) -> Option<Format> {
    match format {
        OutputFormat::Table => None,
        OutputFormat::Csv => Some(Format::Csv),
        OutputFormat::Json => Some(Format::Json),
    }
}

fn execute(command: &Command) -> Result<(Vec<u8>, i32), CliError> {
    let format = command.output().format;
    match *command {
        Command::Thresholds { d, .. } => cmd_thresholds(d, format).map(ok),
        Command::Predict { d, alpha, n, .. } => cmd_predict(d, alpha, n, format).map(ok),
        Command::Trajectory {
            d, alpha, n, points, ..
        } => cmd_trajectory(d, alpha, n, points, format).map(ok),
        Command::Simulate {
            d,
            alpha,
            n,
            trials,
            seed,
            parallelism,
            ..
        } => {
            let params = ModelParams::from_alpha(n, alpha, d, seed)?;
            let report = montecarlo::run_experiment(&params, trials, parallelism)?;
            let bytes = match machine_format(format) {
                Some(f) => montecarlo::export_report(&report, f)?,
                None => simulate_table(&report),
            };
            Ok(ok(bytes))
        }
        Command::Sweep {
            d,
            alpha_min,
            alpha_max,
            steps,
            n,
            trials,
            seed,
            parallelism,
            ..
        } => {
            let table = montecarlo::sweep_alpha(&SweepConfig {
                d,
                alpha_min,
                alpha_max,
                steps,
                n,
                trials,
                seed,
                parallelism,
            })?;
            let bytes = match machine_format(format) {
                Some(f) => montecarlo::export_sweep(&table, f)?,
                None => {
                    let mut t = Table::new(&[
                        "alpha",
                        "m",
                        "P(tau1=n)",
                        "P(mu=n)",
                        "mean tau1/n",
                        "mean mu/n",
                        "pred tau1/n",
                        "pred mu/n",
                    ]);
                    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
                    for r in &table.rows {
                        t.row(vec![
                            r.alpha.to_string(),
                            r.m.to_string(),
                            r.fraction_phase1_complete.to_string(),
                            r.fraction_perfect.to_string(),
                            r.mean_tau1_fraction.to_string(),
                            r.mean_mu_fraction.to_string(),
                            opt(r.predicted_tau1_fraction),
                            opt(r.predicted_mu_fraction),
                        ]);
                    }
                    t.render().into_bytes()
                }
            };
            Ok(ok(bytes))
        }
        Command::CoreCheck {
            d,
            n,
            m,
            trials,
            seed,
            parallelism,
            ..
        } => {
            let report = montecarlo::core_check(d, n, m, trials, seed, parallelism)?;
            let bytes = match format {
                OutputFormat::Json => json(&report)?,
                OutputFormat::Csv => csv_rows(
                    &["d", "n", "m", "seed", "trials", "perfect", "fraction_perfect"],
                    &[vec![
                        d.to_string(),
                        n.to_string(),
                        m.to_string(),
                        seed.to_string(),
                        trials.to_string(),
                        report.perfect.to_string(),
                        report.fraction_perfect.to_string(),
                    ]],
                )?,
                OutputFormat::Table => {
                    let mut t = Table::new(&["d", "n", "m", "trials", "perfect", "fraction"]);
                    t.row(vec![
                        d.to_string(),
                        n.to_string(),
                        m.to_string(),
                        trials.to_string(),
                        report.perfect.to_string(),
                        report.fraction_perfect.to_string(),
                    ]);
                    t.render().into_bytes()
                }
            };
            Ok(ok(bytes))
        }
        Command::SelfCheck { .. } => {
            let checks = analysis::property_checks();
            let code = if checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_SELF_CHECK
            };
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        if c.passed { "pass" } else { "FAIL" }.to_string(),
                        c.name.clone(),
                        c.worst.to_string(),
                        c.bound.to_string(),
                    ]
                })
                .collect();
            let bytes = match format {
                OutputFormat::Json => json(&checks)?,
                OutputFormat::Csv => csv_rows(&["status", "property", "worst", "bound"], &rows)?,
                OutputFormat::Table => {
                    let mut t = Table::new(&["status", "property", "worst", "bound"]);
                    rows.into_iter().for_each(|r| t.row(r));
                    t.render().into_bytes()
                }
            };
            Ok((bytes, code))
        }
    }
}

fn ok(bytes: Vec<u8>) -> (Vec<u8>, i32) {
    (bytes, EXIT_OK)
}

fn cmd_thresholds(d: usize, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    if d < 3 {
        return Err(CliError::usage(format!("--d must be at least 3, got {d}")));
    }
    let z1 = analysis::phase1_root(d)?;
    let alpha1 = analysis::phase1_threshold(d)?;
    #[derive(Serialize)]
    struct Thresholds {
        d: usize,
        z1: f64,
        alpha1: f64,
        m_over_n: f64,
    }
    let t = Thresholds {
        d,
        z1,
        alpha1,
        m_over_n: 1.0 / alpha1,
    };
    let header = ["d", "z1", "alpha1", "m_over_n"];
    let row = vec![
        d.to_string(),
        z1.to_string(),
        alpha1.to_string(),
        t.m_over_n.to_string(),
    ];
    Ok(match format {
        OutputFormat::Json => json(&t)?,
        OutputFormat::Csv => csv_rows(&header, &[row])?,
        OutputFormat::Table => {
            let mut table = Table::new(&header);
            table.row(row);
            table.render().into_bytes()
        }
    })
}

fn cmd_predict(d: usize, alpha: f64, n: usize, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    let params = ModelParams::from_alpha(n, alpha, d, 0)?;
    let report = analysis::predict(alpha, d, params.n, params.m)?;
    let header = [
        "d",
        "alpha",
        "z1",
        "alpha1",
        "regime",
        "z_star",
        "tau1_fraction",
        "mu_gamma1_fraction_of_m",
        "mu_fraction_of_n",
    ];
    let regime = match report.regime {
        analysis::Regime::PhaseOneComplete => "phase_one_complete",
        analysis::Regime::CoreRemains => "core_remains",
    };
    let row = vec![
        d.to_string(),
        alpha.to_string(),
        report.z1.to_string(),
        report.alpha1.to_string(),
        regime.to_string(),
        report.z_star.to_string(),
        report.tau1_fraction.to_string(),
        report.mu_gamma1_fraction_of_m.to_string(),
        report.mu_fraction_of_n.to_string(),
    ];
    Ok(match format {
        OutputFormat::Json => json(&report)?,
        OutputFormat::Csv => csv_rows(&header, &[row])?,
        OutputFormat::Table => {
            let mut t = Table::new(&["quantity", "value"]);
            for (k, v) in header.iter().zip(row) {
                t.row(vec![k.to_string(), v]);
            }
            t.render().into_bytes()
        }
    })
}

fn cmd_trajectory(
    d: usize,
    alpha: f64,
    n: usize,
    points: usize,
    format: OutputFormat,
) -> Result<Vec<u8>, CliError> {
    if points == 0 {
        return Err(CliError::usage("--points must be at least 1"));
    }
    let params = ModelParams::from_alpha(n, alpha, d, 0)?;
    let fluid = FluidLimit::from_params(&params)?;
    let grid = analysis::zeta_grid(fluid.alpha, d, points);
    let pts = analysis::trajectory(fluid.alpha, d, params.n, params.m, &grid)?;
    let header = ["t", "zeta", "w", "y1", "y"];
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|p| {
            [p.t, p.zeta, p.w, p.y1, p.y]
                .iter()
                .map(|v| v.to_string())
                .collect()
        })
        .collect();
    Ok(match format {
        OutputFormat::Json => json(&pts)?,
        OutputFormat::Csv => csv_rows(&header, &rows)?,
        OutputFormat::Table => {
            let mut t = Table::new(&header);
            rows.into_iter().for_each(|r| t.row(r));
            t.render().into_bytes()
        }
    })
}

fn simulate_table(report: &montecarlo::ExperimentReport) -> Vec<u8> {
    let mut t = Table::new(&["quantity", "simulated", "predicted"]);
    let p = report.predicted;
    let pred = |f: fn(&analysis::ThresholdReport) -> f64| p.as_ref().map_or_else(|| "-".into(), |r| f(r).to_string());
    t.row(vec!["n".into(), report.params.n.to_string(), String::new()]);
    t.row(vec!["m".into(), report.params.m.to_string(), String::new()]);
    t.row(vec!["d".into(), report.params.d.to_string(), String::new()]);
    t.row(vec!["alpha".into(), report.alpha.to_string(), String::new()]);
    t.row(vec!["trials".into(), report.trials.to_string(), String::new()]);
    t.row(vec![
        "mean tau1/n".into(),
        report.tau1_fraction.mean.to_string(),
        pred(|r| r.tau1_fraction),
    ]);
    t.row(vec!["stddev tau1/n".into(), report.tau1_fraction.stddev.to_string(), String::new()]);
    t.row(vec![
        "mean mu/n".into(),
        report.mu_fraction.mean.to_string(),
        pred(|r| r.mu_fraction_of_n),
    ]);
    t.row(vec!["stddev mu/n".into(), report.mu_fraction.stddev.to_string(), String::new()]);
    t.row(vec!["mean ks/n".into(), report.ks_fraction.mean.to_string(), String::new()]);
    t.row(vec!["P(mu = n)".into(), report.fraction_perfect.to_string(), String::new()]);
    t.row(vec!["P(tau1 = n)".into(), report.fraction_phase1_complete.to_string(), String::new()]);
    t.row(vec![
        "P(mu = tau1 + mu(core))".into(),
        report.fraction_decomposition_holds.to_string(),
        String::new(),
    ]);
    t.row(vec![
        "P(mu(core) = min side)".into(),
        report.fraction_core_min_side.to_string(),
        String::new(),
    ]);
    t.row(vec![
        "max |v1 - y1| / m".into(),
        report.max_trajectory_deviation.0.to_string(),
        String::new(),
    ]);
    t.row(vec![
        "max |v - y| / m".into(),
        report.max_trajectory_deviation.1.to_string(),
        String::new(),
    ]);
    t.render().into_bytes()
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    out.push(b'\n');
    Ok(out)
}

fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Error::from)?;
    for r in rows {
        w.write_record(r).map_err(Error::from)?;
    }
    w.into_inner().map_err(|e| CliError::from(e.into_error()))
}

/// Fixed-width, left-aligned text table.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let mut s = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        let mut out = line(&self.header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&line(&rule));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["ksmatch"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn table_alignment() {
        let mut t = Table::new(&["a", "bb"]);
        t.row(vec!["ccc".into(), "d".into()]);
        assert_eq!(t.render(), "a    bb\n---  --\nccc  d\n");
    }

    #[test]
    fn thresholds_gate_and_exit_codes() {
        let (code, _, err) = run_capture(&["thresholds", "--d", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("at least 3"));
        let (code, _, _) = run_capture(&["thresholds"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_capture(&["no-such-command"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn infeasible_core_check() {
        let (code, _, _) = run_capture(&["core-check", "--d", "3", "--n", "1", "--m", "3", "--trials", "1"]);
        assert_eq!(code, EXIT_INFEASIBLE);
    }

    #[test]
    fn unknown_format_is_usage_error() {
        let (code, _, _) = run_capture(&["thresholds", "--d", "3", "--format", "xml"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn config_supplies_defaults_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# defaults\nd = 4\nformat = csv\nunrelated_key = 1\n").unwrap();
        let cfg = cfg.to_str().unwrap();

        let (code, out, _) = run_capture(&["thresholds", "--config", cfg]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("d,z1,alpha1,m_over_n\n4,"));

        let (code, out, _) = run_capture(&["thresholds", "--config", cfg, "--d", "5"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.lines().nth(1).unwrap().starts_with("5,"));
    }

    #[test]
    fn bad_config_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        fs::write(&cfg, "d 4\n").unwrap();
        let (code, _, err) = run_capture(&["thresholds", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("key = value"));
    }

    #[test]
    fn output_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let (code, out, _) = run_capture(&[
            "thresholds",
            "--d",
            "3",
            "--format",
            "json",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.is_empty());
        let v: serde_json::Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
        assert_eq!(v["d"], 3);
    }
}
