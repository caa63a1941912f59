//! Single-tree branch and bound over the master problem with lazily
//! separated optimality cuts.
//!
//! The master relaxation minimizes `c^T y + v` over `y in [0, 1]` (or fixed),
//! `v >= 0`, the symmetry rows `y_p >= y_(p+1)` and one row
//! `v + sum coeff * y >= rhs` per pool cut. Cuts that other components add
//! to the pool are folded in before every node.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::time::Instant;

use crate::cuts::{BendersCut, CutPool, CutSource};
use crate::error::{Error, Result};
use crate::incumbent::SharedIncumbent;
use crate::lp::{solve_lp, Basis, LinearProgram, LpStatus, RowSense};
use crate::model::{normalize_plan, Instance, PlanVector};
use crate::scalar::{objective_tol, Scalar};
use crate::subproblem::PlanEvaluator;

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ScoutConfig {
    /// Relative gap at which the incumbent counts as proven optimal and
    /// nodes are pruned.
    pub gap: f64,
    /// Children processed depth-first before returning to best-bound order.
    pub plunge_depth: usize,
}

impl Default for ScoutConfig {
    fn default() -> Self {
        Self {
            gap: 1e-8,
            plunge_depth: 5,
        }
    }
}

/// `Some(v)` fixes a slot, `None` leaves it in `[0, 1]`.
pub type Fixings = Vec<Option<bool>>;

#[derive(Clone, Debug)]
pub struct SearchNode<S: Scalar = f64> {
    pub fixings: Fixings,
    /// Bound inherited from the parent (the parent's relaxation value).
    pub bound: S,
    pub depth: usize,
    basis: Option<Basis>,
    seq: u64,
}

struct Queued<S: Scalar>(SearchNode<S>);

impl<S: Scalar> PartialEq for Queued<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Queued<S> {}
impl<S: Scalar> PartialOrd for Queued<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Queued<S> {
    // Max-heap: smaller bound first, then older node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .as_f64()
            .total_cmp(&self.0.bound.as_f64())
            .then(other.0.seq.cmp(&self.0.seq))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoutStatus<S: Scalar = f64> {
    pub lower_bound: S,
    pub incumbent: S,
    pub nodes: usize,
    /// Subproblem LP solves done by the scout.
    pub evaluations: usize,
    pub proven_optimal: bool,
}

/// The master relaxation: `y` columns in slot order, then `v`; symmetry rows
/// first, then one row per cut.
#[derive(Clone, Debug)]
pub struct MasterRelaxation<S: Scalar = f64> {
    lp: LinearProgram<S>,
    slots: usize,
    cuts: usize,
}

impl<S: Scalar> MasterRelaxation<S> {
    pub fn new(inst: &Instance<S>) -> Self {
        let mut lp = LinearProgram::new();
        for c in inst.slot_costs() {
            lp.add_var(c, S::zero(), S::one());
        }
        let slots = lp.num_vars();
        lp.add_var(S::one(), S::zero(), S::infinity());
        let layout = inst.layout();
        for g in 0..layout.num_groups() {
            let range = layout.group_range(g);
            for s in range.start..range.end.saturating_sub(1) {
                lp.add_row([(s, S::one()), (s + 1, -S::one())], RowSense::Ge, S::zero());
            }
        }
        Self { lp, slots, cuts: 0 }
    }

    pub fn num_cuts(&self) -> usize {
        self.cuts
    }

    pub fn add_cut(&mut self, cut: &BendersCut<S>) {
        let mut coeffs: Vec<(usize, S)> = cut
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != S::zero())
            .map(|(s, &c)| (s, c))
            .collect();
        coeffs.push((self.slots, S::one()));
        self.lp.add_row(coeffs, RowSense::Ge, cut.rhs);
        self.cuts += 1;
    }

    fn apply_fixings(&mut self, fixings: &[Option<bool>]) {
        for (s, f) in fixings.iter().enumerate() {
            let (lo, up) = match f {
                Some(true) => (S::one(), S::one()),
                Some(false) => (S::zero(), S::zero()),
                None => (S::zero(), S::one()),
            };
            self.lp.set_bounds(s, lo, up);
        }
    }

    /// Solves the relaxation under `fixings`; returns objective, `y` and basis.
    pub fn solve(&mut self, fixings: &[Option<bool>], warm: Option<&Basis>) -> Result<Option<(S, Vec<S>, Basis)>> {
        self.apply_fixings(fixings);
        let sol = match solve_lp(&self.lp, warm) {
            Ok(sol) => sol,
            Err(Error::Numerical(msg)) if warm.is_some() => {
                log::debug!("master relaxation warm start failed ({msg}); retrying cold");
                solve_lp(&self.lp, None)?
            }
            Err(e) => return Err(e),
        };
        match sol.status {
            LpStatus::Optimal => Ok(Some((sol.objective, sol.primal[..self.slots].to_vec(), sol.basis))),
            LpStatus::Infeasible => Ok(None),
            status => Err(Error::NotOptimal(status)),
        }
    }
}

/// Value of the master relaxation with the given cuts and fixings: a lower
/// bound on every completion of the partial assignment.
pub fn relaxation_bound<S: Scalar>(
    inst: &Instance<S>,
    cuts: &[std::sync::Arc<BendersCut<S>>],
    fixings: &[Option<bool>],
) -> Result<S> {
    let mut master = MasterRelaxation::new(inst);
    for c in cuts {
        master.add_cut(c);
    }
    Ok(master
        .solve(&symmetric_closure(inst, fixings), None)?
        .map_or(S::infinity(), |r| r.0))
}

/// Extends fixings along the symmetry order: a one forces every lower
/// position of its right of way to one, a zero every higher position to zero.
pub fn symmetric_closure<S: Scalar>(inst: &Instance<S>, fixings: &[Option<bool>]) -> Fixings {
    let layout = inst.layout();
    let mut out = fixings.to_vec();
    for g in 0..layout.num_groups() {
        let range = layout.group_range(g);
        for s in range.clone() {
            match fixings[s] {
                Some(true) => out[range.start..s].iter_mut().for_each(|f| *f = Some(true)),
                Some(false) => out[s + 1..range.end].iter_mut().for_each(|f| *f = Some(false)),
                None => {}
            }
        }
    }
    out
}

/// Branch-and-bound state. Drive it with [`Scout::step`] (a node quota per
/// call) or [`run_scout`].
pub struct Scout<'a, S: Scalar = f64> {
    inst: &'a Instance<S>,
    pool: &'a CutPool<S>,
    incumbent: &'a SharedIncumbent<S>,
    config: ScoutConfig,
    evaluator: PlanEvaluator<'a, S>,
    master: MasterRelaxation<S>,
    costs: Vec<S>,
    /// True fitness of every plan that generated a cut now in the master.
    known: HashMap<PlanVector, S>,
    open: BinaryHeap<Queued<S>>,
    /// Next node of the current plunge, processed before the heap.
    dive: Option<SearchNode<S>>,
    plunge: usize,
    seq: u64,
    nodes: usize,
    lower_bound: S,
    done: bool,
}

impl<'a, S: Scalar> Scout<'a, S> {
    pub fn new(
        inst: &'a Instance<S>,
        pool: &'a CutPool<S>,
        incumbent: &'a SharedIncumbent<S>,
        config: ScoutConfig,
    ) -> Self {
        let root = SearchNode {
            fixings: vec![None; inst.num_slots()],
            bound: S::neg_infinity(),
            depth: 0,
            basis: None,
            seq: 0,
        };
        let mut open = BinaryHeap::new();
        open.push(Queued(root));
        Self {
            inst,
            pool,
            incumbent,
            config,
            evaluator: PlanEvaluator::new(inst),
            master: MasterRelaxation::new(inst),
            costs: inst.slot_costs(),
            known: HashMap::new(),
            open,
            dive: None,
            plunge: 0,
            seq: 1,
            nodes: 0,
            lower_bound: S::zero(),
            done: false,
        }
    }

    pub fn status(&self) -> ScoutStatus<S> {
        ScoutStatus {
            lower_bound: self.lower_bound,
            incumbent: self.incumbent.objective(),
            nodes: self.nodes,
            evaluations: self.evaluator.solves(),
            proven_optimal: self.done,
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn evaluations(&self) -> usize {
        self.evaluator.solves()
    }

    fn gap_tol(&self, incumbent: S) -> S {
        S::of(self.config.gap) * S::one().max(incumbent.abs())
    }

    /// Folds pool cuts that are not yet rows of the master.
    fn refresh_cuts(&mut self) {
        let snapshot = self.pool.snapshot();
        for cut in &snapshot[self.master.num_cuts()..] {
            self.master.add_cut(cut);
            let plan = &cut.generation_plan;
            // Cuts are tight at their own plan, so the plan is a known solution.
            let fitness = cut.value_at(plan).max(S::zero()) + plan_cost(&self.costs, plan);
            self.known.entry(plan.clone()).or_insert(fitness);
            self.incumbent.offer(plan, fitness, &cut.source.to_string());
        }
    }

    fn next_node(&mut self) -> Option<SearchNode<S>> {
        if let Some(node) = self.dive.take() {
            return Some(node);
        }
        self.plunge = 0;
        self.open.pop().map(|q| q.0)
    }

    fn update_lower_bound(&mut self) {
        let inc = self.incumbent.objective();
        let frontier = self
            .open
            .peek()
            .map(|q| q.0.bound)
            .into_iter()
            .chain(self.dive.as_ref().map(|n| n.bound))
            .fold(S::infinity(), S::min);
        if frontier == S::infinity() {
            self.done = true;
            self.lower_bound = self.lower_bound.max(inc.min(S::infinity()));
        } else {
            self.lower_bound = self.lower_bound.max(frontier.min(inc));
        }
        if inc.is_finite() && inc - self.lower_bound <= self.gap_tol(inc) {
            self.done = true;
        }
        if self.lower_bound.is_finite() {
            self.incumbent.raise_lower_bound(self.lower_bound, "scout");
        }
    }

    /// Processes up to `max_nodes` nodes; returns `true` once the tree is
    /// exhausted or the incumbent is within the gap of the lower bound.
    pub fn step(&mut self, max_nodes: usize) -> Result<bool> {
        for _ in 0..max_nodes {
            if self.done {
                break;
            }
            let Some(node) = self.next_node() else {
                self.update_lower_bound();
                break;
            };
            self.process(node)?;
            self.update_lower_bound();
        }
        Ok(self.done)
    }

    fn process(&mut self, node: SearchNode<S>) -> Result<()> {
        self.nodes += 1;
        let inc = self.incumbent.objective();
        if inc.is_finite() && node.bound >= inc - self.gap_tol(inc) {
            return Ok(());
        }
        let mut basis = node.basis.clone();
        loop {
            self.refresh_cuts();
            let Some((value, y, new_basis)) = self.master.solve(&node.fixings, basis.as_ref())? else {
                return Ok(());
            };
            basis = Some(new_basis);
            let inc = self.incumbent.objective();
            if inc.is_finite() && value >= inc - self.gap_tol(inc) {
                return Ok(());
            }
            let frac = |v: S| (v.as_f64() - v.as_f64().round()).abs();
            if y.iter().all(|&v| frac(v) <= INTEGRALITY_TOL) {
                let raw: Vec<bool> = y.iter().map(|&v| v.as_f64() > 0.5).collect();
                let plan = normalize_plan(self.inst.layout(), &raw);
                if let Some(&truth) = self.known.get(&plan) {
                    if value < truth - objective_tol(truth) {
                        log::warn!("master estimate {value} below the cut value {truth} of plan {plan}");
                    }
                    self.incumbent.offer(&plan, truth, "scout");
                    return Ok(());
                }
                let eval = self.evaluator.evaluate(&plan, CutSource::Scout)?;
                self.incumbent.offer(&plan, eval.fitness, "scout");
                if value >= eval.fitness - objective_tol(eval.fitness) {
                    self.pool.push(eval.cut);
                    return Ok(());
                }
                // Estimate too low: add the cut and bound the node again.
                self.pool.push(eval.cut);
                continue;
            }
            self.branch(&node, value, &y, basis);
            return Ok(());
        }
    }

    fn branch(&mut self, node: &SearchNode<S>, value: S, y: &[S], basis: Option<Basis>) {
        let mut pick: Option<usize> = None;
        let mut best = -1.0;
        for (s, &v) in y.iter().enumerate() {
            let v = v.as_f64();
            let frac = (v - v.round()).abs();
            if frac <= INTEGRALITY_TOL {
                continue;
            }
            let better = match pick {
                None => true,
                Some(p) => frac > best + 1e-12 || (frac >= best - 1e-12 && self.costs[s] > self.costs[p]),
            };
            if better {
                pick = Some(s);
                best = frac;
            }
        }
        let s = pick.expect("a fractional slot exists");
        let mut up = node.fixings.clone();
        up[s] = Some(true);
        let mut down = node.fixings.clone();
        down[s] = Some(false);
        let make = |fixings: Fixings, seq: u64| SearchNode {
            fixings: symmetric_closure(self.inst, &fixings),
            bound: value.max(node.bound),
            depth: node.depth + 1,
            basis: basis.clone(),
            seq,
        };
        let up = make(up, self.seq);
        let down = make(down, self.seq + 1);
        self.seq += 2;
        let (first, second) = if y[s].as_f64() >= 0.5 { (up, down) } else { (down, up) };
        self.open.push(Queued(second));
        if self.plunge < self.config.plunge_depth {
            self.plunge += 1;
            self.dive = Some(first);
        } else {
            self.open.push(Queued(first));
        }
    }
}

fn plan_cost<S: Scalar>(costs: &[S], plan: &PlanVector) -> S {
    plan.values()
        .iter()
        .zip(costs)
        .filter(|(y, _)| **y)
        .map(|(_, &c)| c)
        .sum()
}

/// Budget for [`run_scout`]; `None` means unlimited.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScoutBudget {
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
}

/// Runs the scout until optimality is proven, the budget is exhausted or
/// `stop` is raised.
pub fn run_scout<S: Scalar>(
    inst: &Instance<S>,
    pool: &CutPool<S>,
    incumbent: &SharedIncumbent<S>,
    config: ScoutConfig,
    budget: ScoutBudget,
    stop: Option<&AtomicBool>,
) -> Result<ScoutStatus<S>> {
    let start = Instant::now();
    let mut scout = Scout::new(inst, pool, incumbent, config);
    loop {
        if scout.step(1)? {
            break;
        }
        if budget.node_limit.is_some_and(|n| scout.nodes >= n)
            || budget.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
            || stop.is_some_and(|s| s.load(AtomicOrdering::Relaxed))
        {
            break;
        }
    }
    Ok(scout.status())
}
