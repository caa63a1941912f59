//! Worker bees: grouped neighbourhood moves, the cut-based fitness estimate,
//! one recruitment step per site, and the plain Bees Algorithm baseline.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cuts::{BendersCut, CutSource};
use crate::error::{Error, Result};
use crate::incumbent::SharedIncumbent;
use crate::model::{Instance, PlanLayout, PlanVector};
use crate::scalar::Scalar;
use crate::subproblem::PlanEvaluator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeeParams {
    /// Elite sites.
    pub ne: usize,
    /// Elite plus best sites.
    pub nb: usize,
    /// Recruits per elite site.
    pub nre: usize,
    /// Recruits per best site.
    pub nrb: usize,
    /// Largest grouped Hamming radius of a move.
    pub ngh: usize,
    /// Iterations without improvement before the baseline drops a site.
    pub stlim: usize,
}

impl Default for BeeParams {
    fn default() -> Self {
        Self {
            ne: 1,
            nb: 2,
            nre: 10,
            nrb: 5,
            ngh: 8,
            stlim: 10,
        }
    }
}

impl BeeParams {
    pub fn validate(&self) -> Result<()> {
        if self.ne > self.nb {
            return Err(Error::InvalidParams(format!(
                "ne ({}) must not exceed nb ({})",
                self.ne, self.nb
            )));
        }
        if self.nre < self.nrb {
            return Err(Error::InvalidParams(format!(
                "nre ({}) must be at least nrb ({})",
                self.nre, self.nrb
            )));
        }
        if self.ngh == 0 {
            return Err(Error::InvalidParams("ngh must be at least 1".into()));
        }
        if self.stlim == 0 {
            return Err(Error::InvalidParams("stlim must be at least 1".into()));
        }
        Ok(())
    }

    /// The defaults of the reference parameter table.
    pub fn is_reference_default(&self) -> bool {
        let d = Self::default();
        (self.ne, self.nb, self.nre, self.nrb) == (d.ne, d.nb, d.nre, d.nrb)
    }

    /// Scouts of the baseline and random plans of the hybrid's initialization.
    pub fn population(&self) -> usize {
        self.nre + self.nrb
    }

    /// Recruits sent to the site of rank `rank` (0-based, best first).
    pub fn recruits(&self, rank: usize) -> usize {
        if rank < self.ne {
            self.nre
        } else {
            self.nrb
        }
    }
}

/// A flower patch. `fitness` is always a true fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Site<S: Scalar = f64> {
    pub center: PlanVector,
    pub fitness: S,
    pub stagnation: usize,
    /// Neighbourhood radius before rounding up; shrinks in the baseline only.
    pub ngh: f64,
}

impl<S: Scalar> Site<S> {
    pub fn new(center: PlanVector, fitness: S, ngh: usize) -> Self {
        Self {
            center,
            fitness,
            stagnation: 0,
            ngh: ngh as f64,
        }
    }

    /// Radius used for moves: the stored radius rounded up, at least 1.
    pub fn radius(&self) -> usize {
        (self.ngh.ceil() as usize).max(1)
    }

    /// Multiplies the radius by 0.8.
    pub fn shrink(&mut self) {
        self.ngh *= 0.8;
    }
}

/// Sorts by fitness; the sort is stable so earlier sites win ties.
pub fn rank_sites<S: Scalar>(sites: &mut [Site<S>]) {
    sites.sort_by(|a, b| a.fitness.as_f64().total_cmp(&b.fitness.as_f64()));
}

/// Uniform circuit count per right of way.
pub fn random_plan(layout: &PlanLayout, rng: &mut impl Rng) -> PlanVector {
    let counts: Vec<usize> = layout.sizes().iter().map(|&n| rng.gen_range(0..=n)).collect();
    PlanVector::from_counts(layout, &counts).expect("counts drawn within limits")
}

/// Applies between 1 and `ngh` unit circuit changes. Each right of way moves
/// in one direction only, so the normalized result is exactly that many
/// slots away from `y`. Returns `y` unchanged only when nothing can move.
pub fn neighbour(y: &PlanVector, ngh: usize, rng: &mut impl Rng) -> PlanVector {
    let layout = y.layout();
    let sizes = layout.sizes();
    let mut counts = y.counts();
    let mut dir = vec![0i8; sizes.len()];
    let radius = rng.gen_range(1..=ngh.max(1));
    let mut movable = Vec::with_capacity(sizes.len());
    for _ in 0..radius {
        movable.clear();
        movable.extend((0..sizes.len()).filter(|&g| match dir[g] {
            1 => counts[g] < sizes[g],
            -1 => counts[g] > 0,
            _ => sizes[g] > 0,
        }));
        if movable.is_empty() {
            break;
        }
        let g = movable[rng.gen_range(0..movable.len())];
        if dir[g] == 0 {
            let (up, down) = (counts[g] < sizes[g], counts[g] > 0);
            dir[g] = match (up, down) {
                (true, true) => {
                    if rng.gen_bool(0.5) {
                        1
                    } else {
                        -1
                    }
                }
                (true, false) => 1,
                _ => -1,
            };
        }
        if dir[g] > 0 {
            counts[g] += 1;
        } else {
            counts[g] -= 1;
        }
    }
    PlanVector::from_counts(layout, &counts).expect("moves stay within limits")
}

/// `c^T y`, plus `max(0, max_i (rhs_i - coeff_i . y))` unless `c^T y` alone
/// already exceeds `incumbent`.
pub fn heuristic_fitness<S: Scalar>(
    costs: &[S],
    y: &PlanVector,
    cuts: &[std::sync::Arc<BendersCut<S>>],
    incumbent: S,
) -> S {
    let master: S = y.values().iter().zip(costs).filter(|(v, _)| **v).map(|(_, &c)| c).sum();
    if master > incumbent {
        return master;
    }
    master + crate::cuts::cut_estimate(cuts, y)
}

/// What one recruitment step produced.
#[derive(Clone, Debug)]
pub struct StepOutcome<S: Scalar = f64> {
    /// Replacement site when the evaluated neighbour beats the site.
    pub improved: Option<Site<S>>,
    /// The neighbour that was LP-evaluated, with its true fitness.
    pub evaluated: Option<(PlanVector, S)>,
    pub cut: Option<BendersCut<S>>,
}

/// Draws `recruits` neighbours of `site`, screens them with
/// [`heuristic_fitness`] and LP-evaluates only the best one, and only if its
/// estimate beats the site. Neighbours equal to a center in `skip` are not
/// scored.
#[allow(clippy::too_many_arguments)]
pub fn worker_step<S: Scalar>(
    site: &Site<S>,
    recruits: usize,
    cuts: &[std::sync::Arc<BendersCut<S>>],
    incumbent: S,
    skip: &[PlanVector],
    evaluator: &mut PlanEvaluator<'_, S>,
    source: CutSource,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutcome<S>> {
    let costs = evaluator.instance().slot_costs();
    let mut best: Option<(PlanVector, S)> = None;
    for _ in 0..recruits {
        let cand = neighbour(&site.center, site.radius(), rng);
        if skip.contains(&cand) {
            continue;
        }
        let score = heuristic_fitness(&costs, &cand, cuts, incumbent);
        if best.as_ref().is_none_or(|b| score < b.1) {
            best = Some((cand, score));
        }
    }
    let mut out = StepOutcome {
        improved: None,
        evaluated: None,
        cut: None,
    };
    let Some((cand, score)) = best else {
        return Ok(out);
    };
    if score >= site.fitness {
        return Ok(out);
    }
    let eval = evaluator.evaluate(&cand, source)?;
    if eval.fitness < site.fitness {
        out.improved = Some(Site {
            center: cand.clone(),
            fitness: eval.fitness,
            stagnation: 0,
            ngh: site.ngh,
        });
    }
    out.evaluated = Some((cand, eval.fitness));
    out.cut = Some(eval.cut);
    Ok(out)
}

/// Stopping rule for [`run_bees_baseline`]; `None` means unlimited, but at
/// least one bound must be set.
#[derive(Clone, Copy, Debug, Default)]
pub struct BeesBudget {
    pub time_limit: Option<f64>,
    pub iteration_limit: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct BaselineOutcome<S: Scalar = f64> {
    pub best: Site<S>,
    pub iterations: usize,
    pub lp_solves: usize,
}

/// The plain Bees Algorithm with true fitness everywhere. Fitness values are
/// memoized, so revisiting a plan costs no LP solve.
pub fn run_bees_baseline<S: Scalar>(
    inst: &Instance<S>,
    params: &BeeParams,
    budget: BeesBudget,
    rng: &mut ChaCha8Rng,
    incumbent: &SharedIncumbent<S>,
) -> Result<BaselineOutcome<S>> {
    params.validate()?;
    if budget.time_limit.is_none() && budget.iteration_limit.is_none() {
        return Err(Error::InvalidParams(
            "the bees baseline needs a time or iteration limit".into(),
        ));
    }
    let start = Instant::now();
    let layout = inst.layout();
    let ns = params.population().max(params.nb).max(1);
    let mut evaluator = PlanEvaluator::new(inst);
    let mut memo: HashMap<PlanVector, S> = HashMap::new();
    let mut fitness = |plan: &PlanVector, evaluator: &mut PlanEvaluator<'_, S>| -> Result<S> {
        if let Some(&f) = memo.get(plan) {
            return Ok(f);
        }
        let f = evaluator.evaluate(plan, CutSource::Worker(0))?.fitness;
        memo.insert(plan.clone(), f);
        incumbent.offer(plan, f, "bees");
        Ok(f)
    };
    let mut sites = Vec::with_capacity(ns);
    for _ in 0..ns {
        let plan = random_plan(layout, rng);
        let f = fitness(&plan, &mut evaluator)?;
        sites.push(Site::new(plan, f, params.ngh));
    }
    let mut iterations = 0;
    loop {
        if budget.iteration_limit.is_some_and(|n| iterations >= n)
            || budget.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            break;
        }
        iterations += 1;
        rank_sites(&mut sites);
        sites.truncate(params.nb);
        let mut kept = Vec::with_capacity(sites.len());
        for (rank, site) in sites.drain(..).enumerate() {
            let mut best: Option<(PlanVector, S)> = None;
            for _ in 0..params.recruits(rank) {
                let cand = neighbour(&site.center, site.radius(), rng);
                let f = fitness(&cand, &mut evaluator)?;
                if best.as_ref().is_none_or(|b| f < b.1) {
                    best = Some((cand, f));
                }
            }
            match best {
                Some((plan, f)) if f < site.fitness => kept.push(Site {
                    center: plan,
                    fitness: f,
                    stagnation: 0,
                    ngh: site.ngh,
                }),
                _ => {
                    let mut site = site;
                    site.shrink();
                    site.stagnation += 1;
                    if site.stagnation < params.stlim {
                        kept.push(site);
                    }
                }
            }
        }
        sites = kept;
        while sites.len() < ns {
            let plan = random_plan(layout, rng);
            let f = fitness(&plan, &mut evaluator)?;
            sites.push(Site::new(plan, f, params.ngh));
        }
    }
    rank_sites(&mut sites);
    let best_plan = incumbent.plan().unwrap_or_else(|| sites[0].center.clone());
    let best = Site::new(best_plan, incumbent.objective().min(sites[0].fitness), params.ngh);
    Ok(BaselineOutcome {
        best,
        iterations,
        lp_solves: evaluator.solves(),
    })
}
