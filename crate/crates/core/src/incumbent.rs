//! Best-known plan shared by every search component, with its trace.

use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::PlanVector;
use crate::scalar::Scalar;

/// One trace row: seconds since the run started, the incumbent objective
/// and the best proven lower bound at that moment, and who caused the row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time_s: f64,
    pub incumbent: f64,
    pub lower_bound: f64,
    pub source: String,
}

/// Snapshot of the incumbent.
#[derive(Clone, Debug)]
pub struct Incumbent<S: Scalar = f64> {
    pub plan: Option<PlanVector>,
    pub objective: S,
    pub lower_bound: S,
    pub trace: Vec<TracePoint>,
}

impl<S: Scalar> Incumbent<S> {
    pub fn empty() -> Self {
        Self {
            plan: None,
            objective: S::infinity(),
            // Costs are non-negative in every valid instance.
            lower_bound: S::zero(),
            trace: Vec::new(),
        }
    }
}

/// Thread-safe incumbent. Improvements are accepted only when strictly
/// better, so the trace is non-increasing in the objective.
#[derive(Debug)]
pub struct SharedIncumbent<S: Scalar = f64> {
    start: Instant,
    state: Mutex<Incumbent<S>>,
}

impl<S: Scalar> SharedIncumbent<S> {
    pub fn new(start: Instant) -> Self {
        Self {
            start,
            state: Mutex::new(Incumbent::empty()),
        }
    }

    pub fn start(&self) -> Instant {
        self.start
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Offers a plan with its true fitness; returns `true` if it became the
    /// incumbent.
    pub fn offer(&self, plan: &PlanVector, objective: S, source: &str) -> bool {
        let mut st = self.state.lock().expect("incumbent lock poisoned");
        if objective < st.objective {
            st.objective = objective;
            st.plan = Some(plan.clone());
            let time_s = self.start.elapsed().as_secs_f64();
            let lower_bound = st.lower_bound.as_f64();
            st.trace.push(TracePoint {
                time_s,
                incumbent: objective.as_f64(),
                lower_bound,
                source: source.to_string(),
            });
            true
        } else {
            false
        }
    }

    /// Raises the recorded lower bound; never lowers it.
    pub fn raise_lower_bound(&self, bound: S, source: &str) {
        let mut st = self.state.lock().expect("incumbent lock poisoned");
        let bound = bound.min(st.objective);
        if bound > st.lower_bound {
            st.lower_bound = bound;
            if st.plan.is_some() {
                let time_s = self.start.elapsed().as_secs_f64();
                let incumbent = st.objective.as_f64();
                st.trace.push(TracePoint {
                    time_s,
                    incumbent,
                    lower_bound: bound.as_f64(),
                    source: source.to_string(),
                });
            }
        }
    }

    pub fn objective(&self) -> S {
        self.state.lock().expect("incumbent lock poisoned").objective
    }

    pub fn lower_bound(&self) -> S {
        self.state.lock().expect("incumbent lock poisoned").lower_bound
    }

    pub fn plan(&self) -> Option<PlanVector> {
        self.state.lock().expect("incumbent lock poisoned").plan.clone()
    }

    pub fn snapshot(&self) -> Incumbent<S> {
        self.state.lock().expect("incumbent lock poisoned").clone()
    }
}
