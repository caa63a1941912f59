//! Runs the scout, the worker colony, or both, and records what happened.
//!
//! In the hybrid, cut sharing and the site re-seed happen between colony
//! iterations. Workers of one iteration all see the cut pool and incumbent
//! value as they were when the iteration began, and their results are merged
//! in site order, so the serial schedule is reproducible from the seed.

use std::collections::VecDeque;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bees::{random_plan, rank_sites, run_bees_baseline, worker_step, BeeParams, BeesBudget, Site, StepOutcome};
use crate::cuts::{CutPool, CutSource};
use crate::error::{Error, Result};
use crate::incumbent::{SharedIncumbent, TracePoint};
use crate::model::{validate_instance, Instance, PlanVector};
use crate::scalar::Scalar;
use crate::scout::{Scout, ScoutConfig};
use crate::subproblem::PlanEvaluator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Benders,
    Bees,
    Bbha,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Benders => "benders",
            Mode::Bees => "bees",
            Mode::Bbha => "bbha",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benders" => Ok(Mode::Benders),
            "bees" => Ok(Mode::Bees),
            "bbha" => Ok(Mode::Bbha),
            other => Err(Error::InvalidParams(format!(
                "unknown mode `{other}` (expected benders, bees or bbha)"
            ))),
        }
    }
}

/// `Serial` interleaves a node quota of the scout with each colony
/// iteration on the calling thread. `Threaded` gives the scout its own
/// thread and runs the workers of an iteration on scoped threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Serial,
    Threaded,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: BeeParams,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Colony iterations (scout quota steps in `benders` mode).
    pub iteration_limit: Option<usize>,
    pub gap: f64,
    pub seed: u64,
    pub execution: Execution,
    /// Scout nodes per colony iteration in serial execution.
    pub scout_quota: usize,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            params: BeeParams::default(),
            time_limit: None,
            iteration_limit: None,
            gap: ScoutConfig::default().gap,
            seed: 0,
            execution: Execution::Serial,
            scout_quota: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.gap >= 0.0 && self.gap.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gap must be a non-negative number, got {}",
                self.gap
            )));
        }
        if self.time_limit.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::InvalidParams("time limit must be non-negative".into()));
        }
        if self.mode == Mode::Bees && self.time_limit.is_none() && self.iteration_limit.is_none() {
            return Err(Error::InvalidParams(
                "mode bees cannot prove optimality and needs a time or iteration limit".into(),
            ));
        }
        if self.scout_quota == 0 {
            return Err(Error::InvalidParams("scout quota must be at least 1".into()));
        }
        Ok(())
    }

    fn out_of_budget(&self, start: Instant, iterations: usize) -> bool {
        self.iteration_limit.is_some_and(|n| iterations >= n) || self.out_of_time(start)
    }

    fn out_of_time(&self, start: Instant) -> bool {
        self.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
    }
}

/// Everything a run reports. Written as JSON by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub mode: Mode,
    pub seed: u64,
    /// Best objective found; absent only if no plan was evaluated.
    pub objective: Option<f64>,
    pub plan: Option<PlanVector>,
    pub lower_bound: f64,
    pub proven_optimal: bool,
    pub iterations: usize,
    pub scout_nodes: usize,
    pub cuts: usize,
    /// Subproblem LP solves by every component.
    pub lp_solves: usize,
    pub elapsed_s: f64,
    /// Objective of the plan that installs nothing.
    pub do_nothing: f64,
    pub trace: Vec<TracePoint>,
}

impl RunReport {
    pub fn gap(&self) -> Option<f64> {
        self.objective.map(|z| (z - self.lower_bound) / z.abs().max(1.0))
    }

    /// Whether the run found something strictly better than installing
    /// nothing.
    pub fn improves_on_do_nothing(&self) -> bool {
        self.objective
            .is_some_and(|z| z < self.do_nothing - crate::scalar::EPS_OBJ * self.do_nothing.abs().max(1.0))
    }
}

/// Runs with an empty cut pool.
pub fn run<S: Scalar>(inst: &Instance<S>, config: &RunConfig) -> Result<RunReport> {
    run_with_pool(inst, config, &CutPool::new())
}

/// Runs with `pool` as the shared cut pool; cuts already in it are used from
/// the start and every new cut is appended to it.
pub fn run_with_pool<S: Scalar>(inst: &Instance<S>, config: &RunConfig, pool: &CutPool<S>) -> Result<RunReport> {
    config.validate()?;
    validate_instance(inst).into_result()?;
    let start = Instant::now();
    let incumbent = SharedIncumbent::new(start);
    let stats = match config.mode {
        Mode::Benders => run_benders(inst, config, pool, &incumbent, start)?,
        Mode::Bees => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let budget = BeesBudget {
                time_limit: config.time_limit,
                iteration_limit: config.iteration_limit,
            };
            let out = run_bees_baseline(inst, &config.params, budget, &mut rng, &incumbent)?;
            Stats {
                iterations: out.iterations,
                lp_solves: out.lp_solves,
                ..Stats::default()
            }
        }
        Mode::Bbha => match config.execution {
            Execution::Serial => run_hybrid_serial(inst, config, pool, &incumbent, start)?,
            Execution::Threaded => run_hybrid_threaded(inst, config, pool, &incumbent, start)?,
        },
    };
    let do_nothing = PlanEvaluator::new(inst)
        .evaluate(&PlanVector::zeros(inst.layout()), CutSource::Initializer)?
        .fitness
        .as_f64();
    let snap = incumbent.snapshot();
    let objective = snap.plan.as_ref().map(|_| snap.objective.as_f64());
    let lower_bound = snap.lower_bound.as_f64();
    Ok(RunReport {
        instance: inst.name().to_string(),
        mode: config.mode,
        seed: config.seed,
        objective,
        plan: snap.plan,
        lower_bound,
        proven_optimal: stats.proven_optimal,
        iterations: stats.iterations,
        scout_nodes: stats.scout_nodes,
        cuts: pool.len(),
        lp_solves: stats.lp_solves,
        elapsed_s: start.elapsed().as_secs_f64(),
        do_nothing,
        trace: snap.trace,
    })
}

#[derive(Default)]
struct Stats {
    iterations: usize,
    lp_solves: usize,
    scout_nodes: usize,
    proven_optimal: bool,
}

fn scout_config(config: &RunConfig) -> ScoutConfig {
    ScoutConfig {
        gap: config.gap,
        ..ScoutConfig::default()
    }
}

fn run_benders<S: Scalar>(
    inst: &Instance<S>,
    config: &RunConfig,
    pool: &CutPool<S>,
    incumbent: &SharedIncumbent<S>,
    start: Instant,
) -> Result<Stats> {
    let mut scout = Scout::new(inst, pool, incumbent, scout_config(config));
    let mut iterations = 0;
    // The root node always runs, so even a zero budget yields a plan.
    loop {
        iterations += 1;
        if scout.step(config.scout_quota)? || config.out_of_budget(start, iterations) {
            break;
        }
    }
    let status = scout.status();
    Ok(Stats {
        iterations,
        lp_solves: status.evaluations,
        scout_nodes: status.nodes,
        proven_optimal: status.proven_optimal,
    })
}

struct Worker<'a, S: Scalar> {
    id: usize,
    rng: ChaCha8Rng,
    evaluator: PlanEvaluator<'a, S>,
}

/// Worker `id` draws from its own stream, seeded from the run seed.
fn worker_rng(seed: u64, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 + id as u64))
}

struct Colony<'a, S: Scalar> {
    params: BeeParams,
    sites: Vec<Site<S>>,
    workers: Vec<Worker<'a, S>>,
    pending: VecDeque<PlanVector>,
    init_evaluator: PlanEvaluator<'a, S>,
}

impl<'a, S: Scalar> Colony<'a, S> {
    /// Draws `nre + nrb` random plans (duplicates once) to evaluate before
    /// the main loop.
    fn new(inst: &'a Instance<S>, params: BeeParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pending: VecDeque<PlanVector> = VecDeque::new();
        for _ in 0..params.population() {
            let plan = random_plan(inst.layout(), &mut rng);
            if !pending.contains(&plan) {
                pending.push_back(plan);
            }
        }
        let workers = (0..params.nb)
            .map(|id| Worker {
                id,
                rng: worker_rng(seed, id),
                evaluator: PlanEvaluator::new(inst),
            })
            .collect();
        Self {
            params,
            sites: Vec::new(),
            workers,
            pending,
            init_evaluator: PlanEvaluator::new(inst),
        }
    }

    fn initializing(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Evaluates the next initial plan and shares its cut.
    fn init_step(&mut self, pool: &CutPool<S>, incumbent: &SharedIncumbent<S>) -> Result<()> {
        if let Some(plan) = self.pending.pop_front() {
            let eval = self.init_evaluator.evaluate(&plan, CutSource::Initializer)?;
            incumbent.offer(&plan, eval.fitness, "init");
            pool.push(eval.cut);
            self.sites.push(Site::new(plan, eval.fitness, self.params.ngh));
        }
        Ok(())
    }

    fn lp_solves(&self) -> usize {
        self.init_evaluator.solves() + self.workers.iter().map(|w| w.evaluator.solves()).sum::<usize>()
    }

    /// One main-loop pass: recruit around the `nb` best sites, share the
    /// results, then re-seed with the incumbent.
    fn iterate(&mut self, pool: &CutPool<S>, incumbent: &SharedIncumbent<S>, threaded: bool) -> Result<()> {
        rank_sites(&mut self.sites);
        self.sites.truncate(self.params.nb);
        let cuts = pool.snapshot();
        let inc_value = incumbent.objective();
        let centers: Vec<PlanVector> = self.sites.iter().map(|s| s.center.clone()).collect();
        let params = self.params;
        let jobs = self.sites.iter().zip(self.workers.iter_mut()).enumerate();
        let run_one = |rank: usize, site: &Site<S>, w: &mut Worker<'a, S>| -> Result<StepOutcome<S>> {
            worker_step(
                site,
                params.recruits(rank),
                &cuts,
                inc_value,
                &centers,
                &mut w.evaluator,
                CutSource::Worker(w.id),
                &mut w.rng,
            )
        };
        let outcomes: Vec<Result<StepOutcome<S>>> = if threaded && self.sites.len() > 1 {
            std::thread::scope(|scope| {
                let handles: Vec<_> = jobs
                    .map(|(rank, (site, w))| scope.spawn(move || run_one(rank, site, w)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker thread panicked"))
                    .collect()
            })
        } else {
            jobs.map(|(rank, (site, w))| run_one(rank, site, w)).collect()
        };
        for (rank, outcome) in outcomes.into_iter().enumerate() {
            let outcome = outcome?;
            if let Some((plan, fitness)) = &outcome.evaluated {
                incumbent.offer(plan, *fitness, &CutSource::Worker(self.workers[rank].id).to_string());
            }
            if let Some(cut) = outcome.cut {
                pool.push(cut);
            }
            if let Some(site) = outcome.improved {
                self.sites[rank] = site;
            }
        }
        if let Some(plan) = incumbent.plan() {
            if !self.sites.iter().any(|s| s.center == plan) {
                self.sites.push(Site::new(plan, incumbent.objective(), self.params.ngh));
            }
        }
        Ok(())
    }
}

fn run_hybrid_serial<S: Scalar>(
    inst: &Instance<S>,
    config: &RunConfig,
    pool: &CutPool<S>,
    incumbent: &SharedIncumbent<S>,
    start: Instant,
) -> Result<Stats> {
    let mut colony = Colony::new(inst, config.params, config.seed);
    let mut scout = Scout::new(inst, pool, incumbent, scout_config(config));
    let mut iterations = 0;
    let mut done = false;
    // Initial plans alternate with scout quotas while time remains.
    while colony.initializing() && !done {
        if !config.out_of_time(start) {
            done = scout.step(config.scout_quota)?;
        }
        colony.init_step(pool, incumbent)?;
    }
    while !done && !config.out_of_budget(start, iterations) {
        iterations += 1;
        colony.iterate(pool, incumbent, false)?;
        done = scout.step(config.scout_quota)?;
    }
    let status = scout.status();
    Ok(Stats {
        iterations,
        lp_solves: colony.lp_solves() + status.evaluations,
        scout_nodes: status.nodes,
        proven_optimal: status.proven_optimal,
    })
}

fn run_hybrid_threaded<S: Scalar>(
    inst: &Instance<S>,
    config: &RunConfig,
    pool: &CutPool<S>,
    incumbent: &SharedIncumbent<S>,
    start: Instant,
) -> Result<Stats> {
    let stop = AtomicBool::new(false);
    let scout_done = AtomicBool::new(false);
    std::thread::scope(|scope| {
        let scout = scope.spawn(|| -> Result<_> {
            let mut scout = Scout::new(inst, pool, incumbent, scout_config(config));
            while !stop.load(Ordering::Relaxed) {
                if scout.step(1)? {
                    scout_done.store(true, Ordering::Relaxed);
                    break;
                }
            }
            Ok(scout.status())
        });
        let colony_result = (|| -> Result<(usize, usize)> {
            let mut colony = Colony::new(inst, config.params, config.seed);
            while colony.initializing() && !scout_done.load(Ordering::Relaxed) {
                colony.init_step(pool, incumbent)?;
            }
            let mut iterations = 0;
            while !scout_done.load(Ordering::Relaxed) && !config.out_of_budget(start, iterations) {
                iterations += 1;
                colony.iterate(pool, incumbent, true)?;
                if colony.sites.is_empty() || config.params.nb == 0 {
                    std::thread::yield_now();
                }
            }
            Ok((iterations, colony.lp_solves()))
        })();
        stop.store(true, Ordering::Relaxed);
        let status = scout.join().expect("scout thread panicked")?;
        let (iterations, colony_solves) = colony_result?;
        Ok(Stats {
            iterations,
            lp_solves: colony_solves + status.evaluations,
            scout_nodes: status.nodes,
            proven_optimal: status.proven_optimal,
        })
    })
}

/// Integral of each trace's incumbent, as a step function, from its first
/// point to `horizon`, divided by the largest such integral. Lower is better.
pub fn scaled_trapz(traces: &[&[TracePoint]], horizon: f64) -> Result<Vec<f64>> {
    let mut areas = Vec::with_capacity(traces.len());
    for (i, trace) in traces.iter().enumerate() {
        if trace.is_empty() {
            return Err(Error::EmptyTrace(i));
        }
        let mut area = 0.0;
        for (k, p) in trace.iter().enumerate() {
            let t0 = p.time_s.min(horizon);
            let t1 = trace.get(k + 1).map_or(horizon, |q| q.time_s.min(horizon));
            area += p.incumbent * (t1 - t0).max(0.0);
        }
        areas.push(area);
    }
    let max = areas.iter().copied().fold(0.0, f64::max);
    Ok(areas
        .into_iter()
        .map(|a| if max > 0.0 { a / max } else { 1.0 })
        .collect())
}

pub fn write_trace_csv(out: impl Write, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in trace {
        w.serialize(p).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(input: impl Read) -> Result<Vec<TracePoint>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParams(format!("csv: {e}"))
}

/// One parameter set of a tuning grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRow {
    pub ne: usize,
    pub nb: usize,
    pub nre: usize,
    pub nrb: usize,
    #[serde(default)]
    pub ngh: Option<usize>,
}

impl GridRow {
    pub fn params(&self) -> BeeParams {
        BeeParams {
            ne: self.ne,
            nb: self.nb,
            nre: self.nre,
            nrb: self.nrb,
            ngh: self.ngh.unwrap_or(BeeParams::default().ngh),
            ..BeeParams::default()
        }
    }
}

/// Reads a grid CSV with header `ne,nb,nre,nrb` and an optional `ngh` column.
pub fn read_grid_csv(input: impl Read) -> Result<Vec<GridRow>> {
    let rows: Vec<GridRow> = csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)?;
    if rows.is_empty() {
        return Err(Error::InvalidParams("the tuning grid is empty".into()));
    }
    Ok(rows)
}

/// One ranked line of the tuning table, averaged over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    pub scenario: String,
    pub ne: usize,
    pub nb: usize,
    pub nre: usize,
    pub nrb: usize,
    pub objective: f64,
    pub iterations: f64,
    pub scaled_trapz: f64,
    /// `defaults` for the reference parameter set, empty otherwise.
    pub note: String,
}

/// Runs the hybrid for every grid row and seed with `horizon` as the time
/// limit. Scores are normalized per seed across the grid, then averaged;
/// rows come back sorted by score.
pub fn tune<S: Scalar>(
    inst: &Instance<S>,
    grid: &[GridRow],
    horizon: f64,
    seeds: &[u64],
    base: &RunConfig,
) -> Result<Vec<TuneRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("the tuning grid is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParams("tuning needs at least one seed".into()));
    }
    let mut reports: Vec<Vec<RunReport>> = Vec::with_capacity(grid.len());
    for row in grid {
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let config = RunConfig {
                mode: Mode::Bbha,
                params: row.params(),
                time_limit: Some(horizon),
                seed,
                ..base.clone()
            };
            per_seed.push(run(inst, &config)?);
        }
        reports.push(per_seed);
    }
    let mut scores = vec![0.0; grid.len()];
    for k in 0..seeds.len() {
        let traces: Vec<&[TracePoint]> = reports.iter().map(|r| r[k].trace.as_slice()).collect();
        for (score, s) in scores.iter_mut().zip(scaled_trapz(&traces, horizon)?) {
            *score += s / seeds.len() as f64;
        }
    }
    let n = seeds.len() as f64;
    let mut rows: Vec<TuneRow> = grid
        .iter()
        .zip(&reports)
        .zip(scores)
        .map(|((g, r), score)| TuneRow {
            scenario: inst.name().to_string(),
            ne: g.ne,
            nb: g.nb,
            nre: g.nre,
            nrb: g.nrb,
            objective: r.iter().map(|x| x.objective.unwrap_or(f64::INFINITY)).sum::<f64>() / n,
            iterations: r.iter().map(|x| x.iterations as f64).sum::<f64>() / n,
            scaled_trapz: score,
            note: if g.params().is_reference_default() {
                "defaults".into()
            } else {
                String::new()
            },
        })
        .collect();
    rows.sort_by(|a, b| a.scaled_trapz.total_cmp(&b.scaled_trapz));
    Ok(rows)
}

pub fn write_tune_csv(out: impl Write, rows: &[TuneRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
