//! Command-line front end: solve, tune, oracle, gen, validate.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage or validation error,
//! 3 budget exhausted without beating the do-nothing plan.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bbha::bees::BeeParams;
use bbha::io::{brute_force, generate_instance, parse_instance, serialize_instance, DemandProfile, GeneratorConfig};
use bbha::lp::write_dump;
use bbha::model::{validate_instance, Instance, PlanVector};
use bbha::orchestrator::{
    read_grid_csv, read_trace_csv, run, scaled_trapz, tune, write_trace_csv, write_tune_csv, Execution, Mode, RunConfig,
};
use bbha::subproblem::build_subproblem;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bbha",
    version,
    about = "Transmission expansion with storage: Benders, Bees and their hybrid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance.
    Solve(SolveArgs),
    /// Rank bee parameter sets by time-integrated incumbent quality.
    Tune(TuneArgs),
    /// Exhaustive search over circuit counts (at most 12 candidate slots).
    Oracle(OracleArgs),
    /// Write a seeded synthetic instance.
    Gen(GenArgs),
    /// Check an instance file (reads stdin when FILE is absent or `-`).
    Validate { file: Option<PathBuf> },
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file, or `tri3` for the bundled example.
    #[arg(long)]
    instance: PathBuf,
    /// Replace every bus's demand by its own peak times this daily shape.
    #[arg(long)]
    profile: Option<DemandProfile>,
    /// Rescale demand so the bus peaks sum to this many MW.
    #[arg(long = "peak-mw")]
    peak_mw: Option<f64>,
}

#[derive(Args)]
struct BeeArgs {
    #[arg(long, default_value_t = 1)]
    ne: usize,
    #[arg(long, default_value_t = 2)]
    nb: usize,
    #[arg(long, default_value_t = 10)]
    nre: usize,
    #[arg(long, default_value_t = 5)]
    nrb: usize,
    #[arg(long, default_value_t = 8)]
    ngh: usize,
    /// Stagnation limit of the plain bees mode.
    #[arg(long, default_value_t = 10)]
    stlim: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "bbha")]
    mode: Mode,
    #[command(flatten)]
    bees: BeeArgs,
    /// Seconds.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    /// Colony iterations (scout node quotas in benders mode).
    #[arg(long = "iter-limit")]
    iter_limit: Option<usize>,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-8)]
    gap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scout nodes per colony iteration.
    #[arg(long = "scout-quota", default_value_t = 8)]
    scout_quota: usize,
    /// Run the scout and the workers on their own threads.
    #[arg(long)]
    threads: bool,
    /// Incumbent trace as CSV.
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
    /// Run report as JSON.
    #[arg(long = "report-out")]
    report_out: Option<PathBuf>,
    /// Fixed-format dump of the operational LP at the returned plan.
    #[arg(long = "dump-lp")]
    dump_lp: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    /// Instance to tune on (with --grid).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// CSV with columns ne,nb,nre,nrb and optionally ngh.
    #[arg(long, requires = "instance")]
    grid: Option<PathBuf>,
    /// Score existing trace CSV files instead of running a grid.
    #[arg(long, num_args = 1.., conflicts_with = "grid")]
    traces: Vec<PathBuf>,
    /// Seconds per run, and the end of the scoring window.
    #[arg(long)]
    horizon: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    /// Ranked table as CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Every plan's fitness as CSV.
    #[arg(long = "table-out")]
    table_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    buses: usize,
    /// Candidate-only corridors beyond the spanning tree.
    #[arg(long, default_value_t = 2)]
    spare: usize,
    #[arg(long, default_value_t = 4)]
    intervals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total candidate slots.
    #[arg(long, default_value_t = 12)]
    slots: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with a chosen exit code.
struct Exit(u8, String);

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<bbha::Error>() {
            Some(bbha::Error::Validation(_) | bbha::Error::Parse { .. } | bbha::Error::InvalidParams(_)) => 2,
            _ => 1,
        };
        Exit(code, format!("{e:#}"))
    }
}

fn usage(flag: &str, message: impl std::fmt::Display) -> Exit {
    Exit(2, format!("invalid value for {flag}: {message}"))
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_instance(path: &Path) -> Result<Instance, Exit> {
    let text = if path.as_os_str() == "tri3" && !path.exists() {
        bbha::io::TRI3_TEXT.to_string()
    } else {
        read_text(path)?
    };
    let inst: Instance = parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = validate_instance(&inst);
    if !report.is_empty() {
        return Err(Exit(
            2,
            format!("{} is not a valid instance:\n{report}", path.display()),
        ));
    }
    Ok(inst)
}

fn prepared_instance(args: &InstanceArgs) -> Result<Instance, Exit> {
    let inst = load_instance(&args.instance)?;
    let peaks: Vec<f64> = inst
        .buses()
        .iter()
        .map(|b| b.demand.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut demand: Vec<Vec<f64>> = match args.profile {
        Some(p) => peaks.iter().map(|&pk| p.demand(pk, inst.num_intervals())).collect(),
        None => inst.buses().iter().map(|b| b.demand.clone()).collect(),
    };
    if let Some(target) = args.peak_mw {
        if !(target >= 0.0 && target.is_finite()) {
            return Err(usage("--peak-mw", "must be a non-negative number"));
        }
        let total: f64 = peaks.iter().sum();
        if total <= 0.0 {
            return Err(usage("--peak-mw", "the instance has no demand to scale"));
        }
        let factor = target / total;
        demand.iter_mut().flatten().for_each(|d| *d *= factor);
    }
    if args.profile.is_none() && args.peak_mw.is_none() {
        return Ok(inst);
    }
    let inst = inst.with_demand(demand);
    validate_instance(&inst)
        .into_result()
        .map_err(|e| Exit(2, format!("demand scaling made the instance invalid: {e}")))?;
    Ok(inst)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        _ => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn plan_text(plan: &PlanVector) -> String {
    plan.counts()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn bee_params(a: &BeeArgs) -> Result<BeeParams, Exit> {
    let p = BeeParams {
        ne: a.ne,
        nb: a.nb,
        nre: a.nre,
        nrb: a.nrb,
        ngh: a.ngh,
        stlim: a.stlim,
    };
    if p.ne > p.nb {
        return Err(usage("--ne", format!("ne ({}) must not exceed --nb ({})", p.ne, p.nb)));
    }
    if p.nre < p.nrb {
        return Err(usage(
            "--nrb",
            format!("nrb ({}) must not exceed --nre ({})", p.nrb, p.nre),
        ));
    }
    if p.ngh == 0 {
        return Err(usage("--ngh", "must be at least 1"));
    }
    if p.stlim == 0 {
        return Err(usage("--stlim", "must be at least 1"));
    }
    Ok(p)
}

fn solve(args: SolveArgs) -> Result<(), Exit> {
    let params = bee_params(&args.bees)?;
    if args.time_limit.is_some_and(|t| !(t >= 0.0)) {
        return Err(usage("--time-limit", "must be non-negative"));
    }
    if !(args.gap >= 0.0) {
        return Err(usage("--gap", "must be non-negative"));
    }
    if args.scout_quota == 0 {
        return Err(usage("--scout-quota", "must be at least 1"));
    }
    if args.mode == Mode::Bees && args.time_limit.is_none() && args.iter_limit.is_none() {
        return Err(usage("--mode", "bees needs --time-limit or --iter-limit"));
    }
    let inst = prepared_instance(&args.instance)?;
    let config = RunConfig {
        mode: args.mode,
        params,
        time_limit: args.time_limit,
        iteration_limit: args.iter_limit,
        gap: args.gap,
        seed: args.seed,
        execution: if args.threads {
            Execution::Threaded
        } else {
            Execution::Serial
        },
        scout_quota: args.scout_quota,
    };
    let report = run(&inst, &config).map_err(anyhow::Error::from)?;
    if let Some(path) = &args.trace_out {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(file, &report.trace).map_err(anyhow::Error::from)?;
    }
    if let Some(path) = &args.report_out {
        let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
        write_out(Some(path), &(json + "\n"))?;
    }
    if let (Some(path), Some(plan)) = (&args.dump_lp, &report.plan) {
        let lp = build_subproblem(&inst, plan).map_err(anyhow::Error::from)?;
        write_out(Some(path), &write_dump(&lp))?;
    }
    let z = report.objective.map_or("none".to_string(), |z| format!("{z:.6}"));
    println!("instance      {}", report.instance);
    println!("mode          {}", report.mode);
    println!("objective     {z}");
    println!(
        "plan          {}",
        report.plan.as_ref().map_or("none".to_string(), plan_text)
    );
    println!("lower_bound   {:.6}", report.lower_bound);
    println!("proven        {}", report.proven_optimal);
    println!("iterations    {}", report.iterations);
    println!("cuts          {}", report.cuts);
    println!("lp_solves     {}", report.lp_solves);
    println!("elapsed_s     {:.3}", report.elapsed_s);
    if !report.proven_optimal && !report.improves_on_do_nothing() {
        return Err(Exit(
            3,
            "budget exhausted without improving on the do-nothing plan".into(),
        ));
    }
    Ok(())
}

fn tune_cmd(args: TuneArgs) -> Result<(), Exit> {
    if !(args.horizon > 0.0) {
        return Err(usage("--horizon", "must be positive"));
    }
    if !args.traces.is_empty() {
        let traces = args
            .traces
            .iter()
            .map(|p| {
                let text = read_text(p)?;
                read_trace_csv(text.as_bytes())
                    .map_err(anyhow::Error::from)
                    .with_context(|| format!("reading trace {}", p.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[_]> = traces.iter().map(|t| t.as_slice()).collect();
        let scores = scaled_trapz(&refs, args.horizon).map_err(anyhow::Error::from)?;
        let mut out = String::from("trace,scaled_trapz\n");
        for (p, s) in args.traces.iter().zip(scores) {
            out.push_str(&format!("{},{s}\n", p.display()));
        }
        return write_out(args.out.as_deref(), &out).map_err(Exit::from);
    }
    let (Some(grid), Some(instance)) = (&args.grid, &args.instance) else {
        return Err(usage("--grid", "tune needs --instance and --grid, or --traces"));
    };
    if args.seeds.is_empty() {
        return Err(usage("--seeds", "at least one seed"));
    }
    let inst = load_instance(instance)?;
    let rows = read_grid_csv(read_text(grid)?.as_bytes()).map_err(anyhow::Error::from)?;
    for r in &rows {
        if let Err(e) = r.params().validate() {
            return Err(usage("--grid", e));
        }
    }
    let table =
        tune(&inst, &rows, args.horizon, &args.seeds, &RunConfig::new(Mode::Bbha)).map_err(anyhow::Error::from)?;
    let mut buf = Vec::new();
    write_tune_csv(&mut buf, &table).map_err(anyhow::Error::from)?;
    write_out(args.out.as_deref(), &String::from_utf8_lossy(&buf)).map_err(Exit::from)
}

fn oracle_cmd(args: OracleArgs) -> Result<(), Exit> {
    let inst = prepared_instance(&args.instance)?;
    let result = brute_force(&inst).map_err(|e| Exit(2, e.to_string()))?;
    println!("objective {:.6}", result.objective);
    println!("plan      {}", plan_text(&result.plan));
    println!("plans     {}", result.table.len());
    if let Some(path) = &args.table_out {
        let mut out = String::from("plan,fitness\n");
        for (p, f) in &result.table {
            out.push_str(&format!("\"{}\",{f}\n", plan_text(p)));
        }
        write_out(Some(path), &out)?;
    }
    Ok(())
}

fn gen_cmd(args: GenArgs) -> Result<(), Exit> {
    if args.buses < 2 {
        return Err(usage("--buses", "at least 2"));
    }
    if args.intervals == 0 {
        return Err(usage("--intervals", "at least 1"));
    }
    let mut cfg = GeneratorConfig::new(args.buses, args.spare, args.intervals, args.seed);
    cfg.slots = args.slots;
    let inst = generate_instance(&cfg);
    write_out(args.out.as_deref(), &serialize_instance(&inst)).map_err(Exit::from)
}

fn validate_cmd(file: Option<PathBuf>) -> Result<(), Exit> {
    let path = file.unwrap_or_else(|| PathBuf::from("-"));
    let inst = load_instance(&path)?;
    println!(
        "ok: {} ({} buses, {} rights of way, {} candidate slots, {} intervals)",
        inst.name(),
        inst.buses().len(),
        inst.rights_of_way().len(),
        inst.num_slots(),
        inst.num_intervals()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Tune(a) => tune_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::Validate { file } => validate_cmd(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
