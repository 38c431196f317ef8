//! Seeded trials of Karp-Sipser on random allocation graphs, aggregated
//! and set against the analytic predictions.
//!
//! Every trial draws its generator from a stateless mix of the master seed
//! and the trial index, so a report depends only on its parameters and
//! trial count, never on how trials were scheduled across threads.

use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, FluidLimit, ThresholdReport};
use crate::error::{Error, Result};
use crate::graph_model::{sample_core_graph, sample_graph, ModelParams};
use crate::matching::{default_checkpoint_every, karp_sipser_with_core, max_matching, Checkpoint};

/// Schema tag written into every JSON export.
pub const SCHEMA_VERSION: &str = "v1";

/// Band on `|empirical - fluid| / m` a trial trajectory must stay inside.
pub const TRAJECTORY_BAND: f64 = 0.02;

/// 64-bit finaliser from SplitMix64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    pub seed: u64,
    pub tau1: usize,
    /// Exact maximum matching of the whole graph.
    pub mu: usize,
    /// Exact maximum matching of the phase-one core.
    pub mu_core: usize,
    pub ks_size: usize,
    /// `mu == n`.
    pub perfect_l: bool,
    pub core_l1: usize,
    /// Non-isolated right vertices of the core.
    pub core_r1: usize,
    pub trace: Vec<Checkpoint>,
    /// Largest `|v1 - y1| / m` over the checkpoints.
    pub deviation_v1: f64,
    /// Largest `|v - y| / m` over the checkpoints.
    pub deviation_v: f64,
}

impl TrialResult {
    /// `mu = tau1 + mu(core)`.
    pub fn decomposition_holds(&self) -> bool {
        self.mu == self.tau1 + self.mu_core
    }

    /// The core's maximum matching saturates its smaller side.
    pub fn core_matching_is_min_side(&self) -> bool {
        self.mu_core == self.core_l1.min(self.core_r1)
    }

    pub fn within_trajectory_band(&self) -> bool {
        self.deviation_v1 <= TRAJECTORY_BAND && self.deviation_v <= TRAJECTORY_BAND
    }
}

/// Largest per-variable deviation of a phase-one trace from the fluid
/// limit, scaled by `m`. Empirical and fluid states are aligned on the
/// step count.
pub fn trajectory_deviation(params: &ModelParams, trace: &[Checkpoint]) -> (f64, f64) {
    if params.n == 0 {
        return (0.0, 0.0);
    }
    let fluid = FluidLimit::from_params(params).expect("validated params");
    let m = params.m as f64;
    trace.iter().fold((0.0f64, 0.0f64), |(dv1, dv), c| {
        let p = fluid.at_step(c.t as f64);
        (
            dv1.max((c.state.v1 as f64 - p.y1).abs() / m),
            dv.max((c.state.v as f64 - p.y).abs() / m),
        )
    })
}

/// One trial: sample, run Karp-Sipser with phase-one checkpoints, and
/// compute exact matchings of the graph and of its phase-one core.
pub fn run_trial(params: &ModelParams, trial_index: u64) -> TrialResult {
    let seed = trial_seed(params.seed, trial_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = sample_graph(params, &mut rng);
    let (ks, core) = karp_sipser_with_core(&graph, &mut rng, default_checkpoint_every(params.n));
    let mu = max_matching(&graph).size();
    let mu_core = max_matching(&core).size();
    let (deviation_v1, deviation_v) = trajectory_deviation(params, &ks.trace);
    TrialResult {
        trial_index,
        seed,
        tau1: ks.tau1,
        mu,
        mu_core,
        ks_size: ks.size(),
        perfect_l: mu == params.n,
        core_l1: ks.core_sizes.0,
        core_r1: ks.core_sizes.1,
        trace: ks.trace,
        deviation_v1,
        deviation_v,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let stddev = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stddev,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn fraction(results: &[TrialResult], pred: impl Fn(&TrialResult) -> bool) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().filter(|r| pred(r)).count() as f64 / results.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub params: ModelParams,
    pub alpha: f64,
    pub trials: usize,
    pub results: Vec<TrialResult>,
    pub tau1_fraction: Summary,
    pub mu_fraction: Summary,
    pub ks_fraction: Summary,
    /// Trials with `mu = n`.
    pub fraction_perfect: f64,
    /// Trials where phase one alone matched every left vertex.
    pub fraction_phase1_complete: f64,
    pub fraction_decomposition_holds: f64,
    pub fraction_core_min_side: f64,
    pub fraction_within_trajectory_band: f64,
    /// `None` when `d < 3` or `n = 0`, where no prediction applies.
    pub predicted: Option<ThresholdReport>,
    /// Largest deviation over all trials and checkpoints, `(v1, v)`.
    pub max_trajectory_deviation: (f64, f64),
}

impl ExperimentReport {
    pub fn from_results(params: ModelParams, results: Vec<TrialResult>) -> Self {
        let n = params.n.max(1) as f64;
        let column = |f: &dyn Fn(&TrialResult) -> f64| results.iter().map(f).collect::<Vec<_>>();
        let predicted = if params.d >= 3 && params.n > 0 {
            analysis::predict(params.alpha(), params.d, params.n, params.m).ok()
        } else {
            None
        };
        let max_trajectory_deviation = results.iter().fold((0.0f64, 0.0f64), |(a, b), r| {
            (a.max(r.deviation_v1), b.max(r.deviation_v))
        });
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            alpha: params.alpha(),
            trials: results.len(),
            tau1_fraction: Summary::of(&column(&|r| r.tau1 as f64 / n)),
            mu_fraction: Summary::of(&column(&|r| r.mu as f64 / n)),
            ks_fraction: Summary::of(&column(&|r| r.ks_size as f64 / n)),
            fraction_perfect: fraction(&results, |r| r.perfect_l),
            fraction_phase1_complete: fraction(&results, |r| r.tau1 == params.n),
            fraction_decomposition_holds: fraction(&results, TrialResult::decomposition_holds),
            fraction_core_min_side: fraction(&results, TrialResult::core_matching_is_min_side),
            fraction_within_trajectory_band: fraction(&results, TrialResult::within_trajectory_band),
            predicted,
            max_trajectory_deviation,
            params,
            results,
        }
    }
}

/// Runs `trials` trials on up to `parallelism` threads and aggregates them
/// in trial-index order.
pub fn run_experiment(params: &ModelParams, trials: usize, parallelism: usize) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let results = run_trials(params, trials, parallelism)?;
    Ok(ExperimentReport::from_results(*params, results))
}

fn run_trials(params: &ModelParams, trials: usize, parallelism: usize) -> Result<Vec<TrialResult>> {
    if parallelism <= 1 {
        return Ok((0..trials as u64).map(|i| run_trial(params, i)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| run_trial(params, i))
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub fraction_phase1_complete: f64,
    pub fraction_perfect: f64,
    pub mean_tau1_fraction: f64,
    pub mean_mu_fraction: f64,
    pub predicted_tau1_fraction: Option<f64>,
    pub predicted_mu_fraction: Option<f64>,
}

impl SweepRow {
    fn from_report(report: &ExperimentReport) -> Self {
        Self {
            alpha: report.alpha,
            n: report.params.n,
            m: report.params.m,
            trials: report.trials,
            fraction_phase1_complete: report.fraction_phase1_complete,
            fraction_perfect: report.fraction_perfect,
            mean_tau1_fraction: report.tau1_fraction.mean,
            mean_mu_fraction: report.mu_fraction.mean,
            predicted_tau1_fraction: report.predicted.map(|p| p.tau1_fraction),
            predicted_mu_fraction: report.predicted.map(|p| p.mu_fraction_of_n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema_version: String,
    pub d: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub d: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub steps: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub parallelism: usize,
}

/// Runs an experiment at each of `steps` evenly spaced loads in
/// `[alpha_min, alpha_max]`, with `m = round(n / alpha)`. A single step
/// runs at `alpha_min`.
pub fn sweep_alpha(config: &SweepConfig) -> Result<SweepTable> {
    let c = config;
    if !(c.alpha_min > 0.0) || c.steps == 0 {
        return Err(Error::InvalidParams("sweep needs alpha_min > 0 and steps >= 1".into()));
    }
    if c.steps > 1 && !(c.alpha_min < c.alpha_max) {
        return Err(Error::InvalidParams("sweep needs alpha_min < alpha_max".into()));
    }
    let rows = (0..c.steps)
        .map(|k| {
            let alpha = if c.steps == 1 {
                c.alpha_min
            } else {
                c.alpha_min + (c.alpha_max - c.alpha_min) * k as f64 / (c.steps - 1) as f64
            };
            let params = ModelParams::from_alpha(c.n, alpha, c.d, c.seed)?;
            let report = run_experiment(&params, c.trials, c.parallelism)?;
            Ok(SweepRow::from_report(&report))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        schema_version: SCHEMA_VERSION.to_string(),
        d: c.d,
        seed: c.seed,
        rows,
    })
}

/// Perfect-matching frequency on core graphs (left degree `d`, right
/// degrees at least two) drawn from the configuration model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreCheckReport {
    pub schema_version: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub trials: usize,
    /// Trials whose maximum matching has size `min(n, m)`.
    pub perfect: usize,
    pub fraction_perfect: f64,
    pub matching_sizes: Vec<usize>,
}

pub fn core_check(
    d: usize,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    parallelism: usize,
) -> Result<CoreCheckReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    ModelParams::new(n, m, d, seed)?;
    if d * n < 2 * m {
        return Err(Error::Infeasible(format!(
            "core graph needs dn >= 2m (dn = {}, 2m = {})",
            d * n,
            2 * m
        )));
    }
    let one = |i: u64| -> Result<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
        let graph = sample_core_graph(n, m, d, &mut rng)?;
        Ok(max_matching(&graph).size())
    };
    let sizes = if parallelism <= 1 {
        (0..trials as u64).map(one).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| (0..trials as u64).into_par_iter().map(one).collect::<Result<Vec<_>>>())?
    };
    let perfect = sizes.iter().filter(|&&s| s == n.min(m)).count();
    Ok(CoreCheckReport {
        schema_version: SCHEMA_VERSION.to_string(),
        d,
        n,
        m,
        seed,
        trials,
        perfect,
        fraction_perfect: perfect as f64 / trials as f64,
        matching_sizes: sizes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Column order of the per-trial CSV export.
pub const TRIAL_CSV_HEADER: [&str; 12] = [
    "trial_index",
    "seed",
    "n",
    "m",
    "d",
    "alpha",
    "tau1",
    "mu",
    "ks_size",
    "perfect_L",
    "core_L1",
    "core_R1",
];

/// Column order of the sweep CSV export.
pub const SWEEP_CSV_HEADER: [&str; 10] = [
    "alpha",
    "n",
    "m",
    "trials",
    "fraction_phase1_complete",
    "fraction_perfect",
    "mean_tau1_fraction",
    "mean_mu_fraction",
    "predicted_tau1_fraction",
    "predicted_mu_fraction",
];

/// CSV: one row per trial. JSON: the whole report.
pub fn export_report(report: &ExperimentReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json(report)?),
        Format::Csv => {
            let p = &report.params;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(TRIAL_CSV_HEADER)?;
            for r in &report.results {
                w.write_record([
                    r.trial_index.to_string(),
                    r.seed.to_string(),
                    p.n.to_string(),
                    p.m.to_string(),
                    p.d.to_string(),
                    report.alpha.to_string(),
                    r.tau1.to_string(),
                    r.mu.to_string(),
                    r.ks_size.to_string(),
                    r.perfect_l.to_string(),
                    r.core_l1.to_string(),
                    r.core_r1.to_string(),
                ])?;
            }
            into_bytes(w)
        }
    }
}

/// CSV: one row per load. JSON: the whole table.
pub fn export_sweep(table: &SweepTable, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json(table)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SWEEP_CSV_HEADER)?;
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            for r in &table.rows {
                w.write_record([
                    r.alpha.to_string(),
                    r.n.to_string(),
                    r.m.to_string(),
                    r.trials.to_string(),
                    r.fraction_phase1_complete.to_string(),
                    r.fraction_perfect.to_string(),
                    r.mean_tau1_fraction.to_string(),
                    r.mean_mu_fraction.to_string(),
                    opt(r.predicted_tau1_fraction),
                    opt(r.predicted_mu_fraction),
                ])?;
            }
            into_bytes(w)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.write_all(b"\n")?;
    Ok(out)
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Parses a JSON report export, rejecting unknown schema versions.
pub fn parse_report_json(bytes: &[u8]) -> Result<ExperimentReport> {
    let report: ExperimentReport = serde_json::from_slice(bytes)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidParams(format!(
            "unsupported schema version {}",
            report.schema_version
        )));
    }
    Ok(report)
}
