//! `owa`: command-line front end.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation error (including bad
//! arguments), 3 time limit reached without any feasible incumbent.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use owa_core::aggregation::BlockOrder;
use owa_core::generators::{CostMethod, InstanceConfig, WeightMethod};
use owa_core::harness::{
    bounds_table, desk_scale_config, export_mip, read_instance, render_instance, run_sweep, summarize,
    write_means_csv, write_records_csv, SweepConfig,
};
use owa_core::solvers::{solve_aggregated, solve_bnb, solve_hurwicz, Criterion, Method, SolveReport, Status};
use owa_core::{Error, KnapsackInstance};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "owa", version, about = "OWA multiobjective min-knapsack toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance or a weight vector.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Print the table of block-aggregation ratios ρℓ.
    BoundsTable(BoundsArgs),
    /// Run an aggregation sweep and write CSV.
    Sweep(SweepArgs),
    /// Write the linearised OWA model in LP format.
    ExportMip {
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    Instance {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// `uniform` or `nominal:K'`.
        #[arg(long, default_value = "uniform")]
        costs: CostMethod,
        /// `alpha:A`, `pcentra:P`, `pcentra:0.3K` or `uniform`.
        #[arg(long, default_value = "alpha:1e-1")]
        weights: WeightMethod,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "generated")]
        name: String,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Weights {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        weights: WeightMethod,
    },
}

#[derive(Clone, Copy, Debug)]
enum MethodArg {
    Exact,
    Blocks(usize),
    Kmeans(usize),
    Baseline,
}

impl FromStr for MethodArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let count = |v: &str| v.parse::<usize>().map_err(|_| format!("invalid count in `{s}`"));
        match s.split_once(':') {
            None if s == "exact" => Ok(MethodArg::Exact),
            None if s == "baseline" => Ok(MethodArg::Baseline),
            Some(("blocks", l)) => Ok(MethodArg::Blocks(count(l)?)),
            Some(("kmeans", k)) => Ok(MethodArg::Kmeans(count(k)?)),
            _ => Err(format!("unknown method `{s}` (exact, blocks:L, kmeans:KBAR, baseline)")),
        }
    }
}

impl std::fmt::Display for MethodArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MethodArg::Exact => write!(f, "exact"),
            MethodArg::Blocks(l) => write!(f, "blocks:{l}"),
            MethodArg::Kmeans(k) => write!(f, "kmeans:{k}"),
            MethodArg::Baseline => write!(f, "baseline"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum CriterionArg {
    Owa,
    MinMax,
    Hurwicz(f64),
}

impl FromStr for CriterionArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "owa" => Ok(CriterionArg::Owa),
            None if s == "minmax" => Ok(CriterionArg::MinMax),
            Some(("hurwicz", l)) => l
                .parse()
                .map(CriterionArg::Hurwicz)
                .map_err(|_| format!("invalid λ in `{s}`")),
            _ => Err(format!("unknown criterion `{s}` (owa, minmax, hurwicz:LAMBDA)")),
        }
    }
}

impl std::fmt::Display for CriterionArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionArg::Owa => write!(f, "owa"),
            CriterionArg::MinMax => write!(f, "minmax"),
            CriterionArg::Hurwicz(l) => write!(f, "hurwicz:{l}"),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "exact")]
    method: MethodArg,
    #[arg(long, default_value = "owa")]
    criterion: CriterionArg,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Seed for K̄-means.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Order columns by K̄-means before forming blocks.
    #[arg(long)]
    clustered_blocks: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 200)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10, 20, 50, 100, 200])]
    l: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-6])]
    alpha: Vec<f64>,
    /// Long-format CSV with raw values instead of the rounded table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep configuration.
    #[arg(long, required_unless_present = "desk_scale", conflicts_with = "desk_scale")]
    config: Option<PathBuf>,
    /// Use the built-in n=20, K=50 configuration.
    #[arg(long)]
    desk_scale: bool,
    /// Seed for --desk-scale.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Per-run CSV; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-(instance, method, K̄) means CSV.
    #[arg(long)]
    means: Option<PathBuf>,
    /// Fill the elapsed_s column (makes output run-dependent).
    #[arg(long)]
    timings: bool,
    /// Print the configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

enum Failure {
    Core(Error),
    Timeout,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::InvalidParameter(msg.into()))
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn format_numbers(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn gen(cmd: GenCommand) -> Result<(), Failure> {
    match cmd {
        GenCommand::Instance {
            n,
            k,
            costs,
            weights,
            seed,
            name,
            output: path,
        } => {
            let cfg = InstanceConfig {
                name,
                n,
                k,
                costs,
                weights,
                seed,
            };
            let inst = cfg.generate()?;
            let mut out = output(path.as_ref())?;
            out.write_all(render_instance(&inst)?.as_bytes())?;
            out.flush()?;
        }
        GenCommand::Weights { k, weights } => {
            println!("{}", format_numbers(weights.build(k)?.as_slice()));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    instance: String,
    method: String,
    criterion: String,
    status: Status,
    value: Option<f64>,
    /// 0-based indices of selected items.
    selected: Option<Vec<usize>>,
    objective_values: Option<Vec<f64>>,
    reduced_value: Option<f64>,
    reduced_objectives: usize,
    certificate: Option<f64>,
    certificate_exact: Option<String>,
    nodes: u64,
    elapsed_s: f64,
}

fn solve_report(inst: &KnapsackInstance, args: &SolveArgs, limit: Duration) -> Result<SolveReport, Failure> {
    let method = match args.method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Blocks(l) => Method::Blocks {
            l,
            order: if args.clustered_blocks {
                BlockOrder::Clustered {
                    seed: args.seed,
                    restarts: args.restarts,
                }
            } else {
                BlockOrder::Given
            },
        },
        MethodArg::Kmeans(kbar) => Method::KMeans {
            kbar,
            seed: args.seed,
            restarts: args.restarts,
        },
        MethodArg::Baseline => Method::Baseline,
    };
    Ok(match (args.criterion, method) {
        (CriterionArg::Owa, m) => solve_aggregated(inst, m, limit)?,
        (CriterionArg::MinMax, Method::Exact) => solve_bnb(inst, Criterion::MinMax, limit)?,
        (CriterionArg::Hurwicz(lambda), Method::Exact) => solve_hurwicz(inst, lambda, limit)?,
        _ => return Err(invalid("aggregation methods apply to the owa criterion only")),
    })
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    if !(args.time_limit >= 0.0 && args.time_limit.is_finite()) {
        return Err(invalid("time limit must be a finite nonnegative number of seconds"));
    }
    let inst = read_instance(&args.instance)?;
    let report = solve_report(&inst, &args, Duration::from_secs_f64(args.time_limit))?;
    let out = SolveOutput {
        instance: inst.name().to_string(),
        method: args.method.to_string(),
        criterion: args.criterion.to_string(),
        status: report.status,
        value: report.solution.as_ref().map(|_| report.value),
        selected: report.solution.as_ref().map(|s| s.selected()),
        objective_values: report.solution.as_ref().map(|s| s.objective_values.clone()),
        reduced_value: report.reduced_value,
        reduced_objectives: report.reduced_objectives,
        certificate: report.bound_certificate.as_ref().map(|c| c.value),
        certificate_exact: report.bound_certificate.as_ref().and_then(|c| c.exact_string()),
        nodes: report.nodes_explored,
        elapsed_s: report.elapsed.as_secs_f64(),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out).expect("serialisable"));
    } else {
        println!("status: {}", out.status);
        if let (Some(v), Some(sel)) = (out.value, &out.selected) {
            println!("value: {v}");
            println!("selected: {}", sel.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
        }
        if let Some(r) = out.reduced_value {
            println!("reduced value: {r} ({} objectives)", out.reduced_objectives);
        }
        if let Some(c) = out.certificate {
            match &out.certificate_exact {
                Some(e) => println!("certificate: {c} ({e})"),
                None => println!("certificate: {c}"),
            }
        }
        println!("nodes: {}", out.nodes);
        println!("elapsed: {:.3}s", out.elapsed_s);
    }
    if report.status == Status::TimeLimit && report.solution.is_none() {
        return Err(Failure::Timeout);
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<(), Failure> {
    let table = bounds_table(args.k, &args.l, &args.alpha)?;
    if args.csv {
        table.write_csv(io::stdout().lock())?;
    } else {
        print!("{}", table.render());
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::load(path)?,
        None => desk_scale_config(args.seed),
    };
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    cfg.record_timings |= args.timings;
    let records = run_sweep(&cfg)?;
    let mut out = output(args.output.as_ref())?;
    write_records_csv(&records, cfg.seed, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.means {
        write_means_csv(&summarize(&records), cfg.seed, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(cmd) => gen(cmd),
        Command::Solve(args) => solve(args),
        Command::BoundsTable(args) => bounds(args),
        Command::Sweep(args) => sweep(args),
        Command::ExportMip { instance, output } => Ok(export_mip(&read_instance(instance)?, output)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Timeout) => {
            eprintln!("error: time limit reached without a feasible solution");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
