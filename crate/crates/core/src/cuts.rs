//! Benders optimality cuts and the shared append-only pool.

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PlanVector;
use crate::scalar::Scalar;

/// Who separated a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutSource {
    Scout,
    Worker(usize),
    Initializer,
    Imported,
}

impl fmt::Display for CutSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutSource::Scout => f.write_str("scout"),
            CutSource::Worker(id) => write!(f, "worker{id}"),
            CutSource::Initializer => f.write_str("init"),
            CutSource::Imported => f.write_str("imported"),
        }
    }
}

/// `v >= rhs - sum_s coefficients[s] * y[s]`, one coefficient per plan slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: DeserializeOwned"))]
pub struct BendersCut<S: Scalar = f64> {
    pub coefficients: Vec<S>,
    pub rhs: S,
    pub source: CutSource,
    pub generation_plan: PlanVector,
}

impl<S: Scalar> BendersCut<S> {
    /// Lower estimate of the subproblem cost at `y`.
    pub fn value_at(&self, y: &PlanVector) -> S {
        self.value_at_scalars(&y.as_scalars())
    }

    /// Same as [`BendersCut::value_at`] for a fractional `y`.
    pub fn value_at_scalars(&self, y: &[S]) -> S {
        debug_assert_eq!(y.len(), self.coefficients.len());
        self.rhs - self.coefficients.iter().zip(y).map(|(&c, &v)| c * v).sum::<S>()
    }
}

/// Append-only cut collection shared between the scout and the workers.
///
/// Readers take [`CutSnapshot`]s: an `Arc` of the list as it was, so a
/// snapshot of length `n` holds exactly the first `n` cuts forever. Appends
/// copy the list only when an older snapshot is still alive.
#[derive(Debug)]
pub struct CutPool<S: Scalar = f64> {
    cuts: Mutex<Arc<Vec<Arc<BendersCut<S>>>>>,
}

pub type CutSnapshot<S = f64> = Arc<Vec<Arc<BendersCut<S>>>>;

impl<S: Scalar> Default for CutPool<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> CutPool<S> {
    pub fn new() -> Self {
        Self {
            cuts: Mutex::new(Arc::new(Vec::new())),
        }
    }

    pub fn from_cuts(cuts: impl IntoIterator<Item = BendersCut<S>>) -> Self {
        let pool = Self::new();
        for cut in cuts {
            pool.push(cut);
        }
        pool
    }

    /// Appends a cut and returns the new length.
    pub fn push(&self, cut: BendersCut<S>) -> usize {
        let mut guard = self.cuts.lock().expect("cut pool lock poisoned");
        let list = Arc::make_mut(&mut guard);
        list.push(Arc::new(cut));
        list.len()
    }

    pub fn len(&self) -> usize {
        self.cuts.lock().expect("cut pool lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> CutSnapshot<S> {
        Arc::clone(&self.cuts.lock().expect("cut pool lock poisoned"))
    }
}

impl<S: Scalar + Serialize + DeserializeOwned> CutPool<S> {
    pub fn to_json(&self) -> Result<String> {
        let snapshot = self.snapshot();
        let plain: Vec<&BendersCut<S>> = snapshot.iter().map(|c| c.as_ref()).collect();
        Ok(serde_json::to_string_pretty(&plain)?)
    }

    /// Reads cuts written by [`CutPool::to_json`]. Every cut must have
    /// `num_slots` coefficients.
    pub fn from_json(text: &str, num_slots: usize) -> Result<Self> {
        let cuts: Vec<BendersCut<S>> = serde_json::from_str(text)?;
        for cut in &cuts {
            if cut.coefficients.len() != num_slots {
                return Err(Error::DimensionMismatch {
                    what: "cut coefficients",
                    expected: num_slots,
                    found: cut.coefficients.len(),
                });
            }
        }
        Ok(Self::from_cuts(cuts))
    }
}

/// `c^T y + max(0, max_i cut_i(y))` without the early exit: the value of
/// the master relaxation with `y` fixed.
pub fn cut_estimate<S: Scalar>(cuts: &[Arc<BendersCut<S>>], y: &PlanVector) -> S {
    let ys = y.as_scalars::<S>();
    cuts.iter().map(|c| c.value_at_scalars(&ys)).fold(S::zero(), S::max)
}
