//! Subcommand definitions and their implementations. Each run returns the
//! text meant for the output file (or stdout) plus the final query ledger.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rangecount::cell_sampling::{cell_sampling, estimate_nonempty_count};
use rangecount::emd::{estimate_emd, estimate_emd_1d, exact_emd, exact_emd_1d, EmdParams};
use rangecount::gadgets::{gen_cellsampling_lb, gen_emd_lb, gen_mst_lb, Witness};
use rangecount::mst::{estimate_mst, exact_mst, prim_mst, spanner_mst_exact, MstParams, EXACT_MST_CAP};
use rangecount::{Color, ColoredOracle, Domain, Estimate, ExactOracle, PointSet, QueryLedger};
use serde::Serialize;

use crate::harness::{render, run_sweep, Experiment, ExperimentConfig, Format};
use crate::instances;

/// Default directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "RANGECOUNT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "rangecount", version, about = "Sublinear estimators over a range-counting oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Estimate EMD of a coloured instance.
    EstimateEmd(EmdArgs),
    /// Estimate the Euclidean MST weight.
    EstimateMst(MstArgs),
    /// Draw almost-uniform non-empty cells.
    SampleCell(CellArgs),
    /// Estimate the number of non-empty cells.
    CountCells(CellArgs),
    /// Exact EMD (sorted matching in 1D, assignment otherwise).
    ExactEmd(InputArgs),
    /// Exact Euclidean MST weight.
    ExactMst(InputArgs),
    /// Exact MST weight of the WSPD spanner.
    SpannerMst(SpannerArgs),
    /// Run a parameter sweep and write per-trial records.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Emd1d,
    Emd2d,
    Emd3d,
    Cellsampling,
    Mst,
    Uniform,
    Clustered,
    Pairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: GenFamily,
    #[arg(long)]
    pub n: u64,
    /// EMD gadget parameter `s`.
    #[arg(long, default_value_t = 16)]
    pub s: u64,
    /// Cell-sampling gadget parameter `c`.
    #[arg(long, default_value_t = 1)]
    pub c: u64,
    /// Witness position, `random`, or `none`.
    #[arg(long, default_value = "none")]
    pub witness: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side of the domain; family default when absent.
    #[arg(long)]
    pub delta: Option<i64>,
    /// Dimension of the random families.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EmdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplies the sample size.
    #[arg(long, default_value_t = 1.0)]
    pub sample_factor: f64,
    /// Overrides the class repetitions and shift count.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct MstArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the number of component estimates averaged per level.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Cell side, a power of two.
    #[arg(long)]
    pub r: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent draws (`sample-cell` only).
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    pub format: OutFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SpannerArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: Experiment,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 1 << 16)]
    pub delta: i64,
    /// Swept values: `s`, `ε` or the cell side; family default when absent.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub sample_factor: f64,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Occupied cells in the cell-counting instances.
    #[arg(long, default_value_t = 200)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutArgs,
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Output {
    pub body: Vec<u8>,
    pub ledger: Option<QueryLedger>,
    pub out: Option<PathBuf>,
    /// One-line summary for stderr.
    pub note: Option<String>,
}

impl Output {
    fn text(s: String, out: &OutArgs) -> Self {
        Self { body: format!("{s}\n").into_bytes(), ledger: None, out: out.out.clone(), note: None }
    }
}

fn read_set(path: &Path) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PointSet::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn estimate_output(est: Estimate, format: OutFormat, ledger: QueryLedger, out: &OutArgs) -> Result<Output> {
    let body = match format {
        OutFormat::Text => format!("{}", est.value),
        OutFormat::Json => json(&est)?,
    };
    Ok(Output { ledger: Some(ledger), ..Output::text(body, out) })
}

fn parse_witness(s: &str) -> Result<Witness> {
    Ok(match s {
        "none" => Witness::None,
        "random" => Witness::Random,
        x => Witness::At(x.parse().with_context(|| format!("witness must be an index, `random` or `none`, got {x}"))?),
    })
}

fn gen(a: &GenArgs) -> Result<Output> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let witness = parse_witness(&a.witness)?;
    let random_domain = |default: i64| Domain::new(a.dim, a.delta.unwrap_or(default));
    let (set, note) = match a.family {
        GenFamily::Emd1d | GenFamily::Emd2d | GenFamily::Emd3d => {
            let d = match a.family {
                GenFamily::Emd1d => 1,
                GenFamily::Emd2d => 2,
                _ => 3,
            };
            let g = gen_emd_lb(d, a.n, a.s, a.delta, witness, &mut rng)?;
            (g.points.clone(), gadget_note(&g))
        }
        GenFamily::Cellsampling => {
            let g = gen_cellsampling_lb(a.n, a.c, witness, &mut rng)?;
            (g.points.clone(), gadget_note(&g))
        }
        GenFamily::Mst => {
            let g = gen_mst_lb(a.n, witness, &mut rng)?;
            (g.points.clone(), gadget_note(&g))
        }
        GenFamily::Uniform => (instances::uniform(random_domain(1 << 12)?, a.n as usize, &mut rng)?, None),
        GenFamily::Clustered => {
            let dom = random_domain(1 << 12)?;
            let spread = (dom.delta() / 64).max(1);
            (instances::clustered(dom, a.n as usize, 8, spread, &mut rng)?, None)
        }
        GenFamily::Pairs => {
            let dom = random_domain(1 << 12)?;
            let noise = (dom.delta() / 64).max(1);
            (instances::noisy_pairs(dom, a.n as usize, noise, &mut rng)?, None)
        }
    };
    Ok(Output { body: set.to_text().into_bytes(), ledger: None, out: a.out.out.clone(), note })
}

fn gadget_note(g: &rangecount::gadgets::GadgetInstance) -> Option<String> {
    let p = &g.params;
    let mut s = format!(
        "{} n={} (requested {}) param={} delta={} witness={:?} points={}",
        g.family.name(),
        p.n,
        p.requested_n,
        p.param,
        p.delta,
        p.witness,
        g.points.len()
    );
    if let Some(c) = g.declared_cost {
        s.push_str(&format!(" declared={:?}:{} ({})", c.kind, c.value, c.note));
    }
    Some(s)
}

fn estimate_emd_cmd(a: &EmdArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let co = ColoredOracle::from_set(&set)?;
    let p = EmdParams { s: a.s, class_reps: a.reps, shifts: a.reps, sample_factor: a.sample_factor };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut ledger = QueryLedger::new();
    let est = if set.domain().dim() == 1 {
        estimate_emd_1d(&co, &p, &mut rng, &mut ledger)?
    } else {
        estimate_emd(&co, &p, &mut rng, &mut ledger)?
    };
    estimate_output(est, a.format, ledger, &a.out)
}

fn estimate_mst_cmd(a: &MstArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let o = ExactOracle::from_set(&set, None)?;
    let p = MstParams { reps: a.reps, ..MstParams::new(a.eps) };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut ledger = QueryLedger::new();
    let est = estimate_mst(&o, &p, &mut rng, &mut ledger)?;
    estimate_output(est, a.format, ledger, &a.out)
}

#[derive(Serialize)]
struct DrawnCell {
    level: u32,
    index: Vec<i64>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    weight_sum: f64,
}

fn sample_cell_cmd(a: &CellArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let o = ExactOracle::from_set(&set, None)?;
    let dom = set.domain();
    let d = dom.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut ledger = QueryLedger::new();
    let mut cells = Vec::with_capacity(a.draws);
    for _ in 0..a.draws {
        let s = cell_sampling(&o, a.r, &mut rng, &mut ledger)?;
        let rect = s.cell.rect(&dom);
        cells.push(DrawnCell {
            level: s.cell.level(),
            index: s.cell.index()[..d].to_vec(),
            lo: rect.lo()[..d].to_vec(),
            hi: rect.hi()[..d].to_vec(),
            weight_sum: s.weight_sum,
        });
    }
    let body = match a.format {
        OutFormat::Json => json(&cells)?,
        OutFormat::Text => cells
            .iter()
            .map(|c| c.lo.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n"),
    };
    Ok(Output { ledger: Some(ledger), ..Output::text(body, &a.out) })
}

fn count_cells_cmd(a: &CellArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let o = ExactOracle::from_set(&set, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut ledger = QueryLedger::new();
    let est = estimate_nonempty_count(&o, a.r, &mut rng, &mut ledger)?;
    estimate_output(est, a.format, ledger, &a.out)
}

fn exact_emd_cmd(a: &InputArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let (r, b) = (set.points(Color::Red), set.points(Color::Blue));
    let v = if set.domain().dim() == 1 { exact_emd_1d(&r, &b)? as f64 } else { exact_emd(&r, &b)? };
    Ok(Output::text(format!("{v}"), &a.out))
}

fn exact_mst_cmd(a: &InputArgs) -> Result<Output> {
    let pts = read_set(&a.input)?.all_points();
    let v = if pts.len() <= EXACT_MST_CAP { exact_mst(&pts)? } else { prim_mst(&pts) };
    Ok(Output::text(format!("{v}"), &a.out))
}

fn spanner_mst_cmd(a: &SpannerArgs) -> Result<Output> {
    let set = read_set(&a.input)?;
    let v = spanner_mst_exact(set.domain(), &set.all_points(), a.eps)?;
    Ok(Output::text(format!("{v}"), &a.out))
}

fn default_params(f: Experiment) -> Vec<f64> {
    match f {
        Experiment::Emd1d => vec![8.0, 16.0, 32.0, 64.0],
        Experiment::Emd2d => vec![16.0, 64.0],
        Experiment::Mst => vec![0.25],
        Experiment::Cells => vec![16.0],
    }
}

fn bench(a: &BenchArgs) -> Result<Output> {
    let params = if a.params.is_empty() { default_params(a.family) } else { a.params.clone() };
    if a.trials == 0 && params.is_empty() {
        bail!("nothing to run");
    }
    let cfg = ExperimentConfig {
        sample_factor: a.sample_factor,
        reps: a.reps,
        cells: a.cells,
        ..ExperimentConfig::new(a.family, a.n, a.delta, params, a.trials, a.seed)
    };
    let (records, summary) = run_sweep(&cfg)?;
    let note = format!(
        "trials={} success_rate={:.3} median_abs_err={} max_queries={} slope={}",
        summary.trials,
        summary.success_rate,
        summary.median_abs_err,
        summary.max_queries,
        summary.slope.map_or("n/a".to_owned(), |s| format!("{s:.3}"))
    );
    let wall: f64 = records.iter().map(|r| r.wall_ms).sum();
    Ok(Output {
        body: render(&records, &summary, a.format)?,
        ledger: None,
        out: a.out.out.clone(),
        note: Some(format!("{note} estimator_wall_ms={wall:.0}")),
    })
}

pub fn run(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::EstimateEmd(a) => estimate_emd_cmd(a),
        Command::EstimateMst(a) => estimate_mst_cmd(a),
        Command::SampleCell(a) => sample_cell_cmd(a),
        Command::CountCells(a) => count_cells_cmd(a),
        Command::ExactEmd(a) => exact_emd_cmd(a),
        Command::ExactMst(a) => exact_mst_cmd(a),
        Command::SpannerMst(a) => spanner_mst_cmd(a),
        Command::Bench(a) => bench(a),
    }
}

/// Relative paths land under `$RANGECOUNT_OUT_DIR` when it is set.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
