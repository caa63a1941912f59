//! The operational LP for a fixed plan and the optimality cut built from its
//! duals.
//!
//! # Layout
//!
//! Columns come in one block per interval `t` followed by the storage
//! capacities. Inside block `t`, with `B` buses, `E` rights of way that have
//! existing circuits and `P` candidate slots:
//!
//! | offset        | variable | bounds                    |
//! |---------------|----------|---------------------------|
//! | `k`           | `g_tk`   | `[0, g_max_k]`            |
//! | `B + k`       | `r_tk`   | `[0, d_tk]`               |
//! | `2B + k`      | `beta_tk`| free                      |
//! | `3B + k`      | `l_tk`   | `[0, inf)`                |
//! | `4B + k`      | `theta_tk` | free, `[0, 0]` for bus 0 |
//! | `5B + e`      | `f0_te`  | `+- n0_e * fmax_e`        |
//! | `5B + E + s`  | `fp_ts`  | `+- y_s * fmax_s`         |
//!
//! then `x_k` in `[0, x_max_k]` at `T * (5B + E + P) + k`.
//!
//! Rows, again one block per interval:
//!
//! | offset         | row                                              |
//! |----------------|--------------------------------------------------|
//! | `k`            | `inflow - outflow + g + r - beta = d_tk`         |
//! | `B + e`        | `f0 - gamma n0 (theta_i - theta_j) = 0`          |
//! | `B + E + s`    | `fp - gamma (theta_i - theta_j) <= M (1 - y_s)`  |
//! | `B + E + P + s`| `fp - gamma (theta_i - theta_j) >= -M (1 - y_s)` |
//! | `B + E + 2P + k` | `l_tk - l_(t-1)k - beta_tk = 0` (cyclic)       |
//! | `2B + E + 2P + k` | `l_tk - x_k <= 0`                             |
//!
//! The thermal limits and the generation, curtailment and capacity limits
//! are column bounds; their duals are the reduced costs.

use crate::cuts::{BendersCut, CutSource};
use crate::error::{Error, Result};
use crate::lp::{active_bound, solve_lp_with, Basis, LinearProgram, LpStatus, RowSense, SolverOptions};
use crate::model::{master_cost, Instance, PlanVector};
use crate::scalar::{objective_tol, Scalar};

/// Row and bound families of the operational LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DualFamily {
    NodalBalance,
    VoltageLawExisting,
    VoltageLawCandidateUpper,
    VoltageLawCandidateLower,
    StorageBalance,
    LevelCap,
    GenerationBound,
    CurtailmentBound,
    ExistingFlowBound,
    CandidateFlowBound,
    CapacityBound,
    /// `l >= 0`, free `beta`, free `theta` and the fixed reference angle:
    /// bound value zero or no bound, so never part of a cut.
    Inert,
}

/// How a family enters the cut `v >= rhs - sum coeff * y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutRole {
    /// Dual times a plan-independent right-hand side or bound; goes to `rhs`.
    Constant,
    /// Right-hand side or bound is affine in one plan slot; the constant part
    /// goes to `rhs`, the slope to that slot's coefficient.
    PlanDependent,
    /// Right-hand side or bound is zero.
    Zero,
}

/// Dual symbol and cut role of every family.
pub const DUAL_TABLE: &[(DualFamily, &str, CutRole)] = &[
    (DualFamily::NodalBalance, "pi_d", CutRole::Constant),
    (DualFamily::VoltageLawExisting, "pi_gamma", CutRole::Zero),
    (
        DualFamily::VoltageLawCandidateUpper,
        "pi_gamma+p",
        CutRole::PlanDependent,
    ),
    (
        DualFamily::VoltageLawCandidateLower,
        "pi_gamma-p",
        CutRole::PlanDependent,
    ),
    (DualFamily::StorageBalance, "pi_s", CutRole::Zero),
    (DualFamily::LevelCap, "pi_lbar", CutRole::Zero),
    (DualFamily::GenerationBound, "pi_g", CutRole::Constant),
    (DualFamily::CurtailmentBound, "pi_r", CutRole::Constant),
    (DualFamily::ExistingFlowBound, "pi_f+0 / pi_f-0", CutRole::Constant),
    (
        DualFamily::CandidateFlowBound,
        "pi_f+p / pi_f-p",
        CutRole::PlanDependent,
    ),
    (DualFamily::CapacityBound, "pi_x", CutRole::Constant),
    (DualFamily::Inert, "-", CutRole::Zero),
];

pub fn cut_role(family: DualFamily) -> CutRole {
    DUAL_TABLE
        .iter()
        .find(|e| e.0 == family)
        .map(|e| e.2)
        .expect("every family is in the dual table")
}

/// Position of one row or column: family, interval and entity (bus, right
/// of way or slot, depending on the family).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualSymbol {
    pub family: DualFamily,
    pub interval: Option<usize>,
    pub entity: usize,
}

/// Index arithmetic for the layout documented at module level.
#[derive(Clone, Debug)]
pub struct SubproblemIndex {
    intervals: usize,
    buses: usize,
    /// Rights of way with existing circuits, in instance order.
    existing: Vec<usize>,
    /// `(right of way, position)` of every plan slot.
    slots: Vec<(usize, usize)>,
}

impl SubproblemIndex {
    pub fn new<S: Scalar>(inst: &Instance<S>) -> Self {
        let existing = inst
            .rights_of_way()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_existing())
            .map(|(i, _)| i)
            .collect();
        let layout = inst.layout();
        let slots = (0..layout.num_slots()).map(|s| layout.group_of(s)).collect();
        Self {
            intervals: inst.num_intervals(),
            buses: inst.buses().len(),
            existing,
            slots,
        }
    }

    fn vars_per_t(&self) -> usize {
        5 * self.buses + self.existing.len() + self.slots.len()
    }

    fn rows_per_t(&self) -> usize {
        3 * self.buses + self.existing.len() + 2 * self.slots.len()
    }

    pub fn num_vars(&self) -> usize {
        self.intervals * self.vars_per_t() + self.buses
    }

    pub fn num_rows(&self) -> usize {
        self.intervals * self.rows_per_t()
    }

    pub fn existing(&self) -> &[usize] {
        &self.existing
    }

    pub fn g(&self, t: usize, k: usize) -> usize {
        t * self.vars_per_t() + k
    }
    pub fn r(&self, t: usize, k: usize) -> usize {
        t * self.vars_per_t() + self.buses + k
    }
    pub fn beta(&self, t: usize, k: usize) -> usize {
        t * self.vars_per_t() + 2 * self.buses + k
    }
    pub fn l(&self, t: usize, k: usize) -> usize {
        t * self.vars_per_t() + 3 * self.buses + k
    }
    pub fn theta(&self, t: usize, k: usize) -> usize {
        t * self.vars_per_t() + 4 * self.buses + k
    }
    /// Flow on the `e`-th right of way with existing circuits.
    pub fn f0(&self, t: usize, e: usize) -> usize {
        t * self.vars_per_t() + 5 * self.buses + e
    }
    pub fn fp(&self, t: usize, slot: usize) -> usize {
        t * self.vars_per_t() + 5 * self.buses + self.existing.len() + slot
    }
    pub fn x(&self, k: usize) -> usize {
        self.intervals * self.vars_per_t() + k
    }

    pub fn kcl_row(&self, t: usize, k: usize) -> usize {
        t * self.rows_per_t() + k
    }
    pub fn kvl0_row(&self, t: usize, e: usize) -> usize {
        t * self.rows_per_t() + self.buses + e
    }
    pub fn kvl_upper_row(&self, t: usize, slot: usize) -> usize {
        t * self.rows_per_t() + self.buses + self.existing.len() + slot
    }
    pub fn kvl_lower_row(&self, t: usize, slot: usize) -> usize {
        t * self.rows_per_t() + self.buses + self.existing.len() + self.slots.len() + slot
    }
    pub fn storage_row(&self, t: usize, k: usize) -> usize {
        t * self.rows_per_t() + self.buses + self.existing.len() + 2 * self.slots.len() + k
    }
    pub fn cap_row(&self, t: usize, k: usize) -> usize {
        t * self.rows_per_t() + 2 * self.buses + self.existing.len() + 2 * self.slots.len() + k
    }

    /// Family of row `i`.
    pub fn row_symbol(&self, i: usize) -> DualSymbol {
        let t = i / self.rows_per_t();
        let mut o = i % self.rows_per_t();
        let (b, e, p) = (self.buses, self.existing.len(), self.slots.len());
        let blocks = [
            (DualFamily::NodalBalance, b),
            (DualFamily::VoltageLawExisting, e),
            (DualFamily::VoltageLawCandidateUpper, p),
            (DualFamily::VoltageLawCandidateLower, p),
            (DualFamily::StorageBalance, b),
            (DualFamily::LevelCap, b),
        ];
        for (family, len) in blocks {
            if o < len {
                return DualSymbol {
                    family,
                    interval: Some(t),
                    entity: o,
                };
            }
            o -= len;
        }
        unreachable!("row index within its block")
    }

    /// Family of the bounds of column `j`.
    pub fn bound_symbol(&self, j: usize) -> DualSymbol {
        if j >= self.intervals * self.vars_per_t() {
            return DualSymbol {
                family: DualFamily::CapacityBound,
                interval: None,
                entity: j - self.intervals * self.vars_per_t(),
            };
        }
        let t = j / self.vars_per_t();
        let o = j % self.vars_per_t();
        let b = self.buses;
        let (family, entity) = match o {
            o if o < b => (DualFamily::GenerationBound, o),
            o if o < 2 * b => (DualFamily::CurtailmentBound, o - b),
            o if o < 5 * b => (DualFamily::Inert, o % b),
            o if o < 5 * b + self.existing.len() => (DualFamily::ExistingFlowBound, o - 5 * b),
            o => (DualFamily::CandidateFlowBound, o - 5 * b - self.existing.len()),
        };
        DualSymbol {
            family,
            interval: Some(t),
            entity,
        }
    }
}

/// Builds the operational LP for plan `y`.
pub fn build_subproblem<S: Scalar>(inst: &Instance<S>, y: &PlanVector) -> Result<LinearProgram<S>> {
    check_plan(inst, y)?;
    let index = SubproblemIndex::new(inst);
    let mut lp = build_skeleton(inst, &index);
    apply_plan(inst, &index, &mut lp, y);
    Ok(lp)
}

fn check_plan<S: Scalar>(inst: &Instance<S>, y: &PlanVector) -> Result<()> {
    if y.len() != inst.num_slots() || y.layout() != inst.layout() {
        return Err(Error::DimensionMismatch {
            what: "plan",
            expected: inst.num_slots(),
            found: y.len(),
        });
    }
    Ok(())
}

/// LP for the all-zero plan; [`apply_plan`] moves it to any other plan by
/// touching only candidate-flow bounds and candidate voltage-law rhs.
fn build_skeleton<S: Scalar>(inst: &Instance<S>, ix: &SubproblemIndex) -> LinearProgram<S> {
    let zero = S::zero();
    let inf = S::infinity();
    let buses = inst.buses();
    let rows = inst.rights_of_way();
    let tt = inst.num_intervals();
    let mut lp = LinearProgram::new();
    for t in 0..tt {
        for b in buses {
            lp.add_var(zero, zero, b.max_generation);
        }
        for b in buses {
            lp.add_var(b.curtailment_cost[t], zero, b.demand[t]);
        }
        for _ in buses {
            lp.add_var(zero, -inf, inf);
        }
        for _ in buses {
            lp.add_var(zero, zero, inf);
        }
        for k in 0..buses.len() {
            if k == 0 {
                lp.add_var(zero, zero, zero);
            } else {
                lp.add_var(zero, -inf, inf);
            }
        }
        for &e in ix.existing() {
            let cap = S::of_usize(rows[e].existing_circuits) * rows[e].flow_limit;
            lp.add_var(zero, -cap, cap);
        }
        for _ in 0..inst.num_slots() {
            lp.add_var(zero, zero, zero);
        }
    }
    for b in buses {
        lp.add_var(b.storage_unit_cost, zero, b.max_storage);
    }
    debug_assert_eq!(lp.num_vars(), ix.num_vars());

    let one = S::one();
    for t in 0..tt {
        // Nodal balance: flows leave `from_bus` and enter `to_bus`.
        for (k, bus) in buses.iter().enumerate() {
            let mut coeffs = vec![(ix.g(t, k), one), (ix.r(t, k), one), (ix.beta(t, k), -one)];
            for (e, &ri) in ix.existing().iter().enumerate() {
                let row = &rows[ri];
                if row.to_bus == k {
                    coeffs.push((ix.f0(t, e), one));
                }
                if row.from_bus == k {
                    coeffs.push((ix.f0(t, e), -one));
                }
            }
            for s in 0..inst.num_slots() {
                let row = &rows[ix.slots[s].0];
                if row.to_bus == k {
                    coeffs.push((ix.fp(t, s), one));
                }
                if row.from_bus == k {
                    coeffs.push((ix.fp(t, s), -one));
                }
            }
            lp.add_row(coeffs, RowSense::Eq, bus.demand[t]);
        }
        for (e, &ri) in ix.existing().iter().enumerate() {
            let row = &rows[ri];
            let gain = row.susceptance * S::of_usize(row.existing_circuits);
            lp.add_row(
                [
                    (ix.f0(t, e), one),
                    (ix.theta(t, row.from_bus), -gain),
                    (ix.theta(t, row.to_bus), gain),
                ],
                RowSense::Eq,
                zero,
            );
        }
        for (sense, sign) in [(RowSense::Le, one), (RowSense::Ge, -one)] {
            for s in 0..inst.num_slots() {
                let row = &rows[ix.slots[s].0];
                lp.add_row(
                    [
                        (ix.fp(t, s), one),
                        (ix.theta(t, row.from_bus), -row.susceptance),
                        (ix.theta(t, row.to_bus), row.susceptance),
                    ],
                    sense,
                    sign * row.big_m,
                );
            }
        }
        // Cyclic storage balance; for T = 1 the two level terms cancel.
        let prev = (t + tt - 1) % tt;
        for k in 0..buses.len() {
            lp.add_row(
                [(ix.l(t, k), one), (ix.l(prev, k), -one), (ix.beta(t, k), -one)],
                RowSense::Eq,
                zero,
            );
        }
        for k in 0..buses.len() {
            lp.add_row([(ix.l(t, k), one), (ix.x(k), -one)], RowSense::Le, zero);
        }
    }
    debug_assert_eq!(lp.num_rows(), ix.num_rows());
    lp
}

fn apply_plan<S: Scalar>(inst: &Instance<S>, ix: &SubproblemIndex, lp: &mut LinearProgram<S>, y: &PlanVector) {
    let rows = inst.rights_of_way();
    for s in 0..inst.num_slots() {
        let row = &rows[ix.slots[s].0];
        let on = if y.get(s) { S::one() } else { S::zero() };
        let cap = on * row.flow_limit;
        let slack = (S::one() - on) * row.big_m;
        for t in 0..inst.num_intervals() {
            lp.set_bounds(ix.fp(t, s), -cap, cap);
            lp.set_rhs(ix.kvl_upper_row(t, s), slack);
            lp.set_rhs(ix.kvl_lower_row(t, s), -slack);
        }
    }
}

/// Optimal dispatch of one plan. Per-interval vectors are indexed `[t][k]`,
/// flows `[t][e]` over rights of way with existing circuits and `[t][s]`
/// over plan slots.
#[derive(Clone, Debug, PartialEq)]
pub struct OperationalSolution<S: Scalar = f64> {
    pub generation: Vec<Vec<S>>,
    pub curtailment: Vec<Vec<S>>,
    pub existing_flows: Vec<Vec<S>>,
    pub candidate_flows: Vec<Vec<S>>,
    pub phase_angles: Vec<Vec<S>>,
    pub storage_flow: Vec<Vec<S>>,
    pub storage_level: Vec<Vec<S>>,
    pub storage_capacity: Vec<S>,
    pub cost: S,
}

impl<S: Scalar> OperationalSolution<S> {
    fn from_primal(inst: &Instance<S>, ix: &SubproblemIndex, x: &[S], cost: S) -> Self {
        let tt = inst.num_intervals();
        let nb = inst.buses().len();
        let per_bus = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<S>> {
            (0..tt).map(|t| (0..nb).map(|k| x[f(t, k)]).collect()).collect()
        };
        Self {
            generation: per_bus(&|t, k| ix.g(t, k)),
            curtailment: per_bus(&|t, k| ix.r(t, k)),
            storage_flow: per_bus(&|t, k| ix.beta(t, k)),
            storage_level: per_bus(&|t, k| ix.l(t, k)),
            phase_angles: per_bus(&|t, k| ix.theta(t, k)),
            existing_flows: (0..tt)
                .map(|t| (0..ix.existing().len()).map(|e| x[ix.f0(t, e)]).collect())
                .collect(),
            candidate_flows: (0..tt)
                .map(|t| (0..inst.num_slots()).map(|s| x[ix.fp(t, s)]).collect())
                .collect(),
            storage_capacity: (0..nb).map(|k| x[ix.x(k)]).collect(),
            cost,
        }
    }

    /// Objective recomputed from the fields.
    pub fn recomputed_cost(&self, inst: &Instance<S>) -> S {
        let mut v = S::zero();
        for (k, bus) in inst.buses().iter().enumerate() {
            v += bus.storage_unit_cost * self.storage_capacity[k];
            for t in 0..inst.num_intervals() {
                v += bus.curtailment_cost[t] * self.curtailment[t][k];
            }
        }
        v
    }

    /// Largest violation of the operating constraints under plan `y`,
    /// evaluated from the fields alone (not from the LP rows).
    pub fn max_violation(&self, inst: &Instance<S>, y: &PlanVector) -> S {
        let zero = S::zero();
        let rows = inst.rights_of_way();
        let existing: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_existing()).collect();
        let layout = inst.layout();
        let tt = inst.num_intervals();
        let mut worst = zero;
        let mut note = |v: S| worst = worst.max(v);
        let above = |v: S, hi: S| (v - hi).max(zero);
        for t in 0..tt {
            let mut inflow = vec![zero; inst.buses().len()];
            for (e, &ri) in existing.iter().enumerate() {
                let row = &rows[ri];
                let f = self.existing_flows[t][e];
                inflow[row.to_bus] += f;
                inflow[row.from_bus] -= f;
                let dtheta = self.phase_angles[t][row.from_bus] - self.phase_angles[t][row.to_bus];
                note((f - row.susceptance * S::of_usize(row.existing_circuits) * dtheta).abs());
                note(above(f.abs(), S::of_usize(row.existing_circuits) * row.flow_limit));
            }
            for s in 0..layout.num_slots() {
                let row = &rows[layout.group_of(s).0];
                let f = self.candidate_flows[t][s];
                inflow[row.to_bus] += f;
                inflow[row.from_bus] -= f;
                let on = if y.get(s) { S::one() } else { zero };
                let dtheta = self.phase_angles[t][row.from_bus] - self.phase_angles[t][row.to_bus];
                note(above((f - row.susceptance * dtheta).abs(), row.big_m * (S::one() - on)));
                note(above(f.abs(), on * row.flow_limit));
            }
            let prev = (t + tt - 1) % tt;
            for (k, bus) in inst.buses().iter().enumerate() {
                let (g, r, beta) = (self.generation[t][k], self.curtailment[t][k], self.storage_flow[t][k]);
                note((inflow[k] + g + r - beta - bus.demand[t]).abs());
                let level = self.storage_level[t][k];
                note((level - self.storage_level[prev][k] - beta).abs());
                note(above(-level, zero));
                note(above(level, self.storage_capacity[k]));
                note(above(-g, zero));
                note(above(g, bus.max_generation));
                note(above(-r, zero));
                note(above(r, bus.demand[t]));
            }
        }
        for (k, bus) in inst.buses().iter().enumerate() {
            note(above(-self.storage_capacity[k], zero));
            note(above(self.storage_capacity[k], bus.max_storage));
        }
        worst
    }

    /// `sum_t beta_tk` per bus; zero for every cyclic schedule.
    pub fn net_storage_flow(&self) -> Vec<S> {
        let nb = self.storage_capacity.len();
        (0..nb)
            .map(|k| self.storage_flow.iter().map(|row| row[k]).sum())
            .collect()
    }
}

/// Result of one plan evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation<S: Scalar = f64> {
    pub operation: OperationalSolution<S>,
    pub cut: BendersCut<S>,
    /// `master_cost + v`.
    pub fitness: S,
    pub lp_iterations: usize,
}

/// Reusable evaluator: keeps one LP and the last optimal basis, so
/// consecutive plans warm-start from each other.
#[derive(Clone, Debug)]
pub struct PlanEvaluator<'a, S: Scalar = f64> {
    inst: &'a Instance<S>,
    index: SubproblemIndex,
    lp: LinearProgram<S>,
    basis: Option<Basis>,
    options: SolverOptions,
    solves: usize,
}

impl<'a, S: Scalar> PlanEvaluator<'a, S> {
    pub fn new(inst: &'a Instance<S>) -> Self {
        let index = SubproblemIndex::new(inst);
        let lp = build_skeleton(inst, &index);
        Self {
            inst,
            index,
            lp,
            basis: None,
            options: SolverOptions::default(),
            solves: 0,
        }
    }

    pub fn instance(&self) -> &'a Instance<S> {
        self.inst
    }

    /// Number of LP solves performed so far.
    pub fn solves(&self) -> usize {
        self.solves
    }

    pub fn index(&self) -> &SubproblemIndex {
        &self.index
    }

    /// Solves the subproblem at `y` and assembles its optimality cut.
    ///
    /// # Panics
    ///
    /// If the LP is reported infeasible or unbounded: curtailment keeps it
    /// feasible and the objective is bounded below by zero for every plan,
    /// so either status means the LP was built or solved wrongly.
    pub fn evaluate(&mut self, y: &PlanVector, source: CutSource) -> Result<Evaluation<S>> {
        check_plan(self.inst, y)?;
        apply_plan(self.inst, &self.index, &mut self.lp, y);
        let sol = match solve_lp_with(&self.lp, self.basis.as_ref(), &self.options) {
            Ok(sol) => sol,
            Err(err) => {
                // A stale warm start can be badly conditioned; retry cold once.
                self.basis = None;
                log::debug!("warm-started subproblem failed ({err}); retrying cold");
                solve_lp_with(&self.lp, None, &self.options)?
            }
        };
        self.solves += 1;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return Err(Error::NotOptimal(sol.status)),
            status => panic!(
                "operational LP of '{}' reported {status:?} for plan {y}; it is feasible and bounded by construction",
                self.inst.name()
            ),
        }
        self.basis = Some(sol.basis.clone());

        let cut = self.assemble_cut(&sol.row_duals, &sol.reduced_costs, &sol.primal, y, source);
        let v = sol.objective;
        let at_plan = cut.value_at(y);
        let tol = objective_tol(v).max(S::primal_tol() * S::of(1e3) * S::one().max(v.abs()));
        assert!(
            (at_plan - v).abs() <= tol,
            "cut not tight at its plan {y}: cut {at_plan}, subproblem {v}"
        );
        let operation = OperationalSolution::from_primal(self.inst, &self.index, &sol.primal, v);
        let fitness = master_cost(self.inst, y)? + v;
        Ok(Evaluation {
            operation,
            cut,
            fitness,
            lp_iterations: sol.iterations,
        })
    }

    /// Cut assembly driven by [`DUAL_TABLE`]: each dual multiplies the
    /// right-hand side (or active bound) of its row (or column); the parts
    /// that depend on `y` become coefficients.
    fn assemble_cut(&self, pi: &[S], d: &[S], x: &[S], y: &PlanVector, source: CutSource) -> BendersCut<S> {
        let rows = self.inst.rights_of_way();
        let mut rhs = S::zero();
        // `slope[s]`: derivative of the dual objective along y_s.
        let mut slope = vec![S::zero(); self.inst.num_slots()];
        for (i, row) in self.lp.rows.iter().enumerate() {
            let sym = self.index.row_symbol(i);
            match cut_role(sym.family) {
                CutRole::Zero => {}
                CutRole::Constant => rhs += pi[i] * row.rhs,
                CutRole::PlanDependent => {
                    // rhs = +-M (1 - y_s)
                    let m = rows[self.index.slots[sym.entity].0].big_m;
                    let sign = if sym.family == DualFamily::VoltageLawCandidateUpper {
                        S::one()
                    } else {
                        -S::one()
                    };
                    rhs += pi[i] * sign * m;
                    slope[sym.entity] -= pi[i] * sign * m;
                }
            }
        }
        for (j, &dj) in d.iter().enumerate() {
            if dj == S::zero() {
                continue;
            }
            let sym = self.index.bound_symbol(j);
            match cut_role(sym.family) {
                CutRole::Zero => {}
                CutRole::Constant => rhs += dj * active_bound(self.lp.lower[j], self.lp.upper[j], dj, x[j]),
                CutRole::PlanDependent => {
                    // Bounds are -+ y_s * fmax: a positive reduced cost sits on
                    // the lower one.
                    let fmax = rows[self.index.slots[sym.entity].0].flow_limit;
                    slope[sym.entity] -= dj.abs() * fmax;
                }
            }
        }
        BendersCut {
            coefficients: slope.into_iter().map(|k| -k).collect(),
            rhs,
            source,
            generation_plan: y.clone(),
        }
    }
}

/// One-shot evaluation.
pub fn evaluate_plan<S: Scalar>(
    inst: &Instance<S>,
    y: &PlanVector,
    source: CutSource,
) -> Result<(OperationalSolution<S>, BendersCut<S>)> {
    let eval = PlanEvaluator::new(inst).evaluate(y, source)?;
    Ok((eval.operation, eval.cut))
}

/// `master_cost(y) + v(y)`.
pub fn true_fitness<S: Scalar>(inst: &Instance<S>, y: &PlanVector) -> Result<S> {
    Ok(PlanEvaluator::new(inst).evaluate(y, CutSource::Initializer)?.fitness)
}
