//! `evobench`: run the experiment engines, fit polynomials to result CSVs and
//! draw SVG charts.
//!
//! Settings are resolved in this order, later entries winning: built-in
//! defaults, the `--config` file, `EVOBENCH_WORKERS` (worker count only),
//! command-line flags.

mod plot;
mod ranges;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use evobench_core::assignment::{paper_rand_max_ladder, TieBreak, ValueRange};
use evobench_core::bent::{BentParams, MutationOperator};
use evobench_core::byzantine::{ByzantineParams, CorruptionKind, Problem};
use evobench_core::harness::{execute, resolve_workers};
use evobench_core::ttp::TtpParams;
use evobench_core::{load_config, stats, ExperimentConfig, ExperimentId, ExperimentParams};

use plot::{PlotKind, PlotSpec};

#[derive(Debug, Parser)]
#[command(
    name = "evobench",
    version,
    about = "Seeded batch experiments in evolutionary computation"
)]
struct Cli {
    /// Master seed (default 2023).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML experiment config; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Subtour structure of optimal assignments on random cost matrices.
    ApAtsp(ApArgs),
    /// Constraint violations of random tournament schedules.
    Ttp(TtpArgs),
    /// Tree GP search for bent Boolean functions.
    Bent(BentArgs),
    /// Generational GA under corrupted fitness evaluations.
    Byzantine(ByzArgs),
    /// Least-squares polynomial fit of two CSV columns.
    Fit(FitArgs),
    /// Render a CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct ApArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Matrices per rand_max value.
    #[arg(long)]
    matrices: Option<u64>,
    /// Comma list, start:stop:step, or `paper` for the 72-value ladder.
    #[arg(long)]
    randmax: Option<String>,
    #[arg(long, value_enum)]
    range: Option<RangeArg>,
    #[arg(long, value_enum)]
    tie_break: Option<TieBreakArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RangeArg {
    Exclusive,
    Inclusive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieBreakArg {
    RandomRelabel,
    ScanOrder,
}

#[derive(Debug, Args)]
struct TtpArgs {
    /// Team counts: start:stop:step or a comma list.
    #[arg(long)]
    teams: Option<String>,
    /// Schedules per team count.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    max_streak: Option<usize>,
}

#[derive(Debug, Args)]
struct BentArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    /// semantic, uniform, point, single, a comma list, or `all`.
    #[arg(long)]
    op: Option<String>,
    #[arg(long)]
    mr: Option<f64>,
    #[arg(long)]
    mc: Option<usize>,
    /// Runs per operator.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct ByzArgs {
    /// onemax, leadingones or both.
    #[arg(long)]
    problem: Option<String>,
    /// inverter, randomizer, none, or both (inverter and randomizer).
    #[arg(long)]
    model: Option<String>,
    /// Corruption probabilities: start:stop:step or a comma list.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    px: Option<f64>,
    /// Runs per (problem, model, p) cell.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value_t = 1)]
    degree: usize,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = PlotKind::Line)]
    kind: PlotKind,
    #[arg(long)]
    x: String,
    /// One or more y columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<String>,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    x_label: Option<String>,
    #[arg(long)]
    y_label: Option<String>,
    /// SVG path; defaults to `<out>/<input stem>.svg`.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("evobench: error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let id = match &cli.command {
        Command::ApAtsp(_) => ExperimentId::ApAtsp,
        Command::Ttp(_) => ExperimentId::Ttp,
        Command::Bent(_) => ExperimentId::Bent,
        Command::Byzantine(_) => ExperimentId::Byzantine,
        Command::Fit(a) => return fit(a),
        Command::Plot(a) => return plot_cmd(a, cli.out.as_deref()),
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.experiment_id() != id {
                bail!(
                    "{} describes a `{}` experiment, not `{}`",
                    path.display(),
                    cfg.experiment_id(),
                    id
                );
            }
            cfg
        }
        None => ExperimentConfig::new(id),
    };
    cfg.worker_count = resolve_workers(cfg.worker_count)?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.worker_count = w;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    apply_overrides(&cli.command, &mut cfg)?;
    cfg.validate()?;

    let output = execute(&cfg)?;
    let written = output.write_all(&cfg.output_dir)?;
    let cfg_path = cfg.output_dir.join(format!("{id}.config.toml"));
    cfg.save(&cfg_path)?;
    for line in &output.notes {
        println!("{line}");
    }
    for p in written.iter().chain([&cfg_path]) {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn apply_overrides(command: &Command, cfg: &mut ExperimentConfig) -> Result<()> {
    match (command, &mut cfg.params) {
        (Command::ApAtsp(a), ExperimentParams::ApAtsp(p)) => {
            set(&mut p.n, a.n);
            set(&mut cfg.runs, a.matrices);
            if let Some(r) = &a.randmax {
                p.rand_max = if r.trim() == "paper" {
                    paper_rand_max_ladder()
                } else {
                    ranges::parse_uints(r).context("--randmax")?
                };
            }
            if let Some(r) = a.range {
                p.range = match r {
                    RangeArg::Exclusive => ValueRange::Exclusive,
                    RangeArg::Inclusive => ValueRange::Inclusive,
                };
            }
            if let Some(t) = a.tie_break {
                p.tie_break = match t {
                    TieBreakArg::RandomRelabel => TieBreak::RandomRelabel,
                    TieBreakArg::ScanOrder => TieBreak::ScanOrder,
                };
            }
        }
        (Command::Ttp(a), ExperimentParams::Ttp(p)) => {
            apply_ttp(a, p)?;
            set(&mut cfg.runs, a.samples);
        }
        (Command::Bent(a), ExperimentParams::Bent(p)) => {
            apply_bent(a, p)?;
            set(&mut cfg.runs, a.runs);
        }
        (Command::Byzantine(a), ExperimentParams::Byzantine(p)) => {
            apply_byz(a, p)?;
            set(&mut cfg.runs, a.runs);
        }
        _ => unreachable!("config experiment checked against the subcommand"),
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_ttp(a: &TtpArgs, p: &mut TtpParams) -> Result<()> {
    if let Some(t) = &a.teams {
        p.teams = ranges::parse_uints(t)
            .context("--teams")?
            .into_iter()
            .map(|v| v as usize)
            .collect();
    }
    set(&mut p.max_streak, a.max_streak);
    Ok(())
}

fn apply_bent(a: &BentArgs, p: &mut BentParams) -> Result<()> {
    set(&mut p.n, a.n);
    set(&mut p.depth, a.depth);
    set(&mut p.lambda, a.lambda);
    set(&mut p.mr, a.mr);
    set(&mut p.mc, a.mc);
    set(&mut p.budget, a.budget);
    if let Some(op) = &a.op {
        p.operators = if op.trim() == "all" {
            MutationOperator::ALL.to_vec()
        } else {
            op.split(',')
                .map(|s| s.trim().parse::<MutationOperator>())
                .collect::<Result<_, _>>()
                .map_err(anyhow::Error::msg)
                .context("--op")?
        };
    }
    Ok(())
}

fn apply_byz(a: &ByzArgs, p: &mut ByzantineParams) -> Result<()> {
    if let Some(pr) = &a.problem {
        p.problems = match pr.trim() {
            "both" => Problem::ALL.to_vec(),
            one => vec![one
                .parse()
                .map_err(anyhow::Error::msg)
                .context("--problem")?],
        };
    }
    if let Some(m) = &a.model {
        p.models = match m.trim() {
            "both" => vec![CorruptionKind::Inverter, CorruptionKind::Randomizer],
            one => vec![one.parse().map_err(anyhow::Error::msg).context("--model")?],
        };
    }
    if let Some(grid) = &a.p {
        p.p = ranges::parse_reals(grid).context("--p")?;
    }
    set(&mut p.mu, a.mu);
    set(&mut p.len, a.len);
    set(&mut p.px, a.px);
    set(&mut p.budget, a.budget);
    Ok(())
}

fn read_xy(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers().context("unparsable CSV header")?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column `{name}` not found in {}", path.display()))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let mut points = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("unparsable CSV at row {}", r + 1))?;
        let (xs, ys) = (rec.get(xi).unwrap_or(""), rec.get(yi).unwrap_or(""));
        if xs == "NA" || ys == "NA" {
            continue;
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("row {}: `{s}` is not a number", r + 1))
        };
        points.push((parse(xs)?, parse(ys)?));
    }
    Ok(points)
}

fn fit(a: &FitArgs) -> Result<()> {
    let points = read_xy(&a.input, &a.x, &a.y)?;
    let f = stats::polyfit(&points, a.degree)?;
    println!("term,value");
    for power in (0..=f.degree).rev() {
        println!("c{power},{:.6}", f.coefficient(power));
    }
    println!("rmse,{:.6}", f.rmse);
    Ok(())
}

fn plot_cmd(a: &PlotArgs, out_dir: Option<&Path>) -> Result<()> {
    let spec = PlotSpec {
        kind: a.kind,
        x_column: a.x.clone(),
        y_columns: a.y.clone(),
        log_x: a.log_x,
        log_y: a.log_y,
        title: a.title.clone().unwrap_or_default(),
        x_label: a.x_label.clone().unwrap_or_else(|| a.x.clone()),
        y_label: a.y_label.clone().unwrap_or_else(|| a.y.join(", ")),
    };
    let output = match &a.output {
        Some(p) => p.clone(),
        None => {
            let stem = a.input.file_stem().context("input has no file name")?;
            let dir = out_dir.map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            dir.join(stem).with_extension("svg")
        }
    };
    plot::emit_plot(&a.input, &spec, &output)?;
    println!("wrote {}", output.display());
    Ok(())
}
