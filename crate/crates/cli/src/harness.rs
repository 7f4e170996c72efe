//! Parameter sweeps: one fresh instance per trial, the estimator, an exact
//! baseline and a success flag.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rangecount::cell_sampling::estimate_nonempty_count;
use rangecount::emd::{estimate_emd, estimate_emd_1d, exact_emd, exact_emd_1d, EmdParams};
use rangecount::mst::{estimate_mst, exact_mst, prim_mst, MstParams, EXACT_MST_CAP};
use rangecount::{Color, ColoredOracle, Domain, ExactOracle, PointSet, QueryLedger};
use serde::{Deserialize, Serialize};

use crate::instances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Emd1d,
    Emd2d,
    Mst,
    Cells,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Emd1d => "emd1d",
            Experiment::Emd2d => "emd2d",
            Experiment::Mst => "mst",
            Experiment::Cells => "cells",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `params` is the swept parameter: `s` for EMD, `ε` for MST, the cell side
/// `r` for cell counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub delta: i64,
    pub params: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Multiplies the EMD sample size.
    pub sample_factor: f64,
    /// Repetition override: class reps and shifts for EMD, component reps for MST.
    pub reps: Option<usize>,
    /// Occupied cells for the cell-counting instances.
    pub cells: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, n: usize, delta: i64, params: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self { experiment, n, delta, params, trials, seed, sample_factor: 1.0, reps: None, cells: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub family: String,
    pub n: usize,
    pub delta: i64,
    pub param: f64,
    pub trial: usize,
    pub estimate: f64,
    pub exact: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub queries: u64,
    pub success: bool,
    /// Left out of every output file so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub param: f64,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_abs_err: f64,
    pub max_queries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_abs_err: f64,
    pub max_queries: u64,
    /// Least-squares slope of `log(mean abs error)` against `log(param)`.
    pub slope: Option<f64>,
    pub per_param: Vec<ParamSummary>,
}

/// Independent stream for trial `trial` of parameter `index`.
pub fn trial_rng(seed: u64, index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64) << 32) | trial as u64);
    rng
}

/// Whether `estimate` meets the experiment's error bound against `exact`.
pub fn success(experiment: Experiment, estimate: f64, exact: f64, n: usize, delta: i64, param: f64) -> bool {
    let (n, delta) = (n as f64, delta as f64);
    match experiment {
        Experiment::Emd1d => {
            let slack = 8.0 * n * delta / (param * param);
            estimate >= exact / 4.0 - slack && estimate <= 4.0 * exact + slack
        }
        Experiment::Emd2d => {
            let slack = 8.0 * n * delta / param.powf(1.5);
            estimate >= exact / 4.0 - slack && estimate <= 4.0 * delta.log2() * exact + slack
        }
        Experiment::Mst => (estimate / exact - 1.0).abs() <= 3.0 * param,
        Experiment::Cells => estimate >= 0.9 * exact && estimate <= 1.1 * exact,
    }
}

/// Least-squares slope through `(ln x, ln y)`, skipping non-positive values.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn instance(cfg: &ExperimentConfig, param: f64, rng: &mut ChaCha8Rng) -> Result<PointSet> {
    let n = cfg.n;
    Ok(match cfg.experiment {
        Experiment::Emd1d => instances::noisy_pairs(Domain::new(1, cfg.delta)?, n, cfg.delta / 64, rng)?,
        Experiment::Emd2d => instances::noisy_pairs(Domain::new(2, cfg.delta)?, n, cfg.delta / 16, rng)?,
        Experiment::Mst => instances::uniform(Domain::new(2, cfg.delta)?, n, rng)?,
        Experiment::Cells => instances::skewed_cells(Domain::new(2, cfg.delta)?, cfg.cells, n, param as i64, rng)?,
    })
}

fn exact_value(cfg: &ExperimentConfig, set: &PointSet) -> Result<f64> {
    Ok(match cfg.experiment {
        Experiment::Emd1d => exact_emd_1d(&set.points(Color::Red), &set.points(Color::Blue))? as f64,
        Experiment::Emd2d => exact_emd(&set.points(Color::Red), &set.points(Color::Blue))?,
        Experiment::Mst => {
            let pts = set.all_points();
            if pts.len() <= EXACT_MST_CAP {
                exact_mst(&pts)?
            } else {
                prim_mst(&pts)
            }
        }
        Experiment::Cells => cfg.cells as f64,
    })
}

fn run_trial(cfg: &ExperimentConfig, index: usize, trial: usize) -> Result<TrialRecord> {
    let param = cfg.params[index];
    let mut rng = trial_rng(cfg.seed, index, trial);
    let set = instance(cfg, param, &mut rng)?;
    let exact = exact_value(cfg, &set)?;
    let mut ledger = QueryLedger::new();
    let start = Instant::now();
    let est = match cfg.experiment {
        Experiment::Emd1d | Experiment::Emd2d => {
            let co = ColoredOracle::from_set(&set)?;
            let p = EmdParams { s: param as u64, class_reps: cfg.reps, shifts: cfg.reps, sample_factor: cfg.sample_factor };
            if cfg.experiment == Experiment::Emd1d {
                estimate_emd_1d(&co, &p, &mut rng, &mut ledger)?
            } else {
                estimate_emd(&co, &p, &mut rng, &mut ledger)?
            }
        }
        Experiment::Mst => {
            let o = ExactOracle::from_set(&set, None)?;
            let p = MstParams { reps: cfg.reps, ..MstParams::new(param) };
            estimate_mst(&o, &p, &mut rng, &mut ledger)?
        }
        Experiment::Cells => {
            let o = ExactOracle::from_set(&set, None)?;
            estimate_nonempty_count(&o, param as i64, &mut rng, &mut ledger)?
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let abs = (est.value - exact).abs();
    Ok(TrialRecord {
        family: cfg.experiment.name().to_owned(),
        n: cfg.n,
        delta: cfg.delta,
        param,
        trial,
        estimate: est.value,
        exact: Some(exact),
        abs_err: Some(abs),
        rel_err: (exact != 0.0).then(|| abs / exact),
        queries: est.queries_used,
        success: success(cfg.experiment, est.value, exact, cfg.n, cfg.delta, param),
        wall_ms,
    })
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let trials = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let mut errs: Vec<f64> = records.iter().filter_map(|r| r.abs_err).collect();
    errs.sort_by(f64::total_cmp);
    let median = if errs.is_empty() { 0.0 } else { errs[errs.len() / 2] };
    let mut params: Vec<f64> = records.iter().map(|r| r.param).collect();
    params.sort_by(f64::total_cmp);
    params.dedup();
    let per_param: Vec<ParamSummary> = params
        .iter()
        .map(|&p| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.param == p).collect();
            let k = rs.len();
            ParamSummary {
                param: p,
                trials: k,
                success_rate: rs.iter().filter(|r| r.success).count() as f64 / k as f64,
                mean_abs_err: rs.iter().filter_map(|r| r.abs_err).sum::<f64>() / k as f64,
                max_queries: rs.iter().map(|r| r.queries).max().unwrap_or(0),
            }
        })
        .collect();
    let xs: Vec<f64> = per_param.iter().map(|p| p.param).collect();
    let ys: Vec<f64> = per_param.iter().map(|p| p.mean_abs_err).collect();
    Summary {
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        median_abs_err: median,
        max_queries: records.iter().map(|r| r.queries).max().unwrap_or(0),
        slope: log_log_slope(&xs, &ys),
        per_param,
    }
}

/// Runs every trial in order of (parameter, trial index).
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary)> {
    if cfg.params.is_empty() && cfg.trials > 0 {
        bail!("no parameter values to sweep");
    }
    let mut records = Vec::with_capacity(cfg.params.len() * cfg.trials);
    for index in 0..cfg.params.len() {
        for trial in 0..cfg.trials {
            records.push(run_trial(cfg, index, trial).with_context(|| format!("trial {trial} of {}", cfg.params[index]))?);
        }
    }
    let summary = summarize(&records);
    Ok((records, summary))
}

pub const CSV_HEADER: [&str; 11] =
    ["family", "n", "delta", "param", "trial", "estimate", "exact", "abs_err", "rel_err", "queries", "success"];

pub fn render(records: &[TrialRecord], summary: &Summary, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in records {
                w.serialize(r)?;
            }
            Ok(w.into_inner()?)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                records: &'a [TrialRecord],
                summary: &'a Summary,
            }
            let mut v = serde_json::to_vec_pretty(&Doc { records, summary })?;
            v.push(b'\n');
            Ok(v)
        }
    }
}

/// Writes next to `path` and renames into place, so a failed run never
/// leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
