//! Exhaustive search over circuit counts: the ground truth for small
//! instances.

use rayon::prelude::*;

use crate::cuts::CutSource;
use crate::error::{Error, Result};
use crate::model::{Instance, PlanLayout, PlanVector};
use crate::scalar::Scalar;
use crate::subproblem::PlanEvaluator;

/// Largest number of candidate slots [`brute_force`] accepts.
pub const ORACLE_SLOT_LIMIT: usize = 12;

#[derive(Clone, Debug)]
pub struct OracleResult<S: Scalar = f64> {
    pub objective: S,
    pub plan: PlanVector,
    /// Every normalized plan with its true fitness, in enumeration order
    /// (counts in mixed radix, last right of way fastest).
    pub table: Vec<(PlanVector, S)>,
}

impl<S: Scalar> OracleResult<S> {
    pub fn fitness_of(&self, plan: &PlanVector) -> Option<S> {
        self.table.iter().find(|(p, _)| p == plan).map(|e| e.1)
    }

    /// Best fitness over plans other than the optimum.
    pub fn runner_up(&self) -> Option<S> {
        self.table
            .iter()
            .filter(|(p, _)| *p != self.plan)
            .map(|e| e.1)
            .fold(None, |acc: Option<S>, v| Some(acc.map_or(v, |a| a.min(v))))
    }
}

/// Every normalized plan of `layout`, in the order used by [`brute_force`].
pub fn enumerate_plans(layout: &PlanLayout) -> Vec<PlanVector> {
    let sizes = layout.sizes();
    let total = layout.num_normalized_plans() as usize;
    let mut out = Vec::with_capacity(total);
    let mut counts = vec![0usize; sizes.len()];
    loop {
        out.push(PlanVector::from_counts(layout, &counts).expect("counts within limits"));
        let mut g = sizes.len();
        loop {
            if g == 0 {
                return out;
            }
            g -= 1;
            if counts[g] < sizes[g] {
                counts[g] += 1;
                break;
            }
            counts[g] = 0;
        }
    }
}

/// Evaluates the true fitness of every normalized plan.
pub fn brute_force<S: Scalar>(inst: &Instance<S>) -> Result<OracleResult<S>> {
    if inst.num_slots() > ORACLE_SLOT_LIMIT {
        return Err(Error::OracleTooLarge {
            slots: inst.num_slots(),
            limit: ORACLE_SLOT_LIMIT,
        });
    }
    let plans = enumerate_plans(inst.layout());
    // Chunks keep one warm-started evaluator each.
    let chunk = plans.len().div_ceil(rayon::current_num_threads() * 4).max(1);
    let values: Vec<S> = plans
        .par_chunks(chunk)
        .map(|part| {
            let mut eval = PlanEvaluator::new(inst);
            part.iter()
                .map(|p| eval.evaluate(p, CutSource::Initializer).map(|e| e.fitness))
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<Vec<Vec<S>>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    Ok(OracleResult {
        objective: values[best],
        plan: plans[best].clone(),
        table: plans.into_iter().zip(values).collect(),
    })
}
