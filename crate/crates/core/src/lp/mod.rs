//! Bounded-variable linear programming.
//!
//! A [`LinearProgram`] minimizes `c^T x` subject to sparse rows
//! `a_i x (<=|>=|=) b_i` and bounds `l <= x <= u` (either bound may be
//! infinite). [`solve_lp`] runs a revised primal simplex and reports, besides
//! the primal point, one dual per row and one reduced cost per variable.
//!
//! Dual sign convention (minimization): `pi_i >= 0` on `>=` rows,
//! `pi_i <= 0` on `<=` rows, free on `=` rows. A positive reduced cost
//! belongs to an active lower bound, a negative one to an active upper bound.

mod dump;
mod lu;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use dump::write_dump;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow<S: Scalar = f64> {
    pub coeffs: Vec<(usize, S)>,
    pub sense: RowSense,
    pub rhs: S,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram<S: Scalar = f64> {
    pub objective: Vec<S>,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub rows: Vec<LpRow<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new() -> Self {
        Self {
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: S, lower: S, upper: S) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Adds a row. Duplicate variable entries are summed and exact zeros
    /// dropped, so the stored row is always structurally clean.
    pub fn add_row(&mut self, coeffs: impl IntoIterator<Item = (usize, S)>, sense: RowSense, rhs: S) -> usize {
        let mut merged: Vec<(usize, S)> = Vec::new();
        for (j, v) in coeffs {
            match merged.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += v,
                None => merged.push((j, v)),
            }
        }
        merged.retain(|e| e.1 != S::zero());
        self.rows.push(LpRow {
            coeffs: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: S, upper: S) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn set_rhs(&mut self, row: usize, rhs: S) {
        self.rows[row].rhs = rhs;
    }

    /// Structural invariants: in-range variables, no duplicate entries,
    /// consistent dimensions, no NaN.
    pub fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidLp(format!(
                "{n} objective entries but {} lower / {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for j in 0..n {
            if self.objective[j].is_nan() || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(Error::InvalidLp(format!("variable {j} has a NaN entry")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(Error::InvalidLp(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    self.lower[j], self.upper[j]
                )));
            }
            if self.lower[j] == S::infinity() || self.upper[j] == S::neg_infinity() {
                return Err(Error::InvalidLp(format!("variable {j} has an unattainable bound")));
            }
        }
        let mut seen = vec![usize::MAX; n];
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidLp(format!("row {i} has a non-finite right-hand side")));
            }
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(Error::InvalidLp(format!("row {i} references variable {j} of {n}")));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidLp(format!("row {i} has a non-finite coefficient")));
                }
                if seen[j] == i {
                    return Err(Error::InvalidLp(format!("row {i} lists variable {j} twice")));
                }
                seen[j] = i;
            }
        }
        Ok(())
    }

    /// `c^T x`.
    pub fn objective_value(&self, x: &[S]) -> S {
        self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let act: S = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.sense {
                RowSense::Le => act - row.rhs,
                RowSense::Ge => row.rhs - act,
                RowSense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Position of a variable relative to the basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// A simplex basis usable as a warm start. `logical[i]` is the status of the
/// slack of row `i`. A basis recorded before rows were appended stays usable:
/// the new rows start with their slack basic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub structural: Vec<VarStatus>,
    pub logical: Vec<VarStatus>,
}

#[derive(Clone, Debug)]
pub struct LpSolution<S: Scalar = f64> {
    pub status: LpStatus,
    pub primal: Vec<S>,
    pub objective: S,
    /// One dual per row.
    pub row_duals: Vec<S>,
    /// Reduced cost per variable; the dual of whichever bound is active.
    pub reduced_costs: Vec<S>,
    pub basis: Basis,
    pub iterations: usize,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Pivot limit; `None` means `50 * (rows + cols)`.
    pub max_iterations: Option<usize>,
    /// Eta updates between refactorizations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            refactor_interval: 64,
            stall_window: 100,
        }
    }
}

/// Solves `lp` with default options, optionally starting from `warm_start`.
pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>, warm_start: Option<&Basis>) -> Result<LpSolution<S>> {
    solve_lp_with(lp, warm_start, &SolverOptions::default())
}

pub fn solve_lp_with<S: Scalar>(
    lp: &LinearProgram<S>,
    warm_start: Option<&Basis>,
    options: &SolverOptions,
) -> Result<LpSolution<S>> {
    lp.check()?;
    simplex::Simplex::new(lp, options).solve(warm_start)
}

/// Dual objective `b^T pi + sum_j d_j * (active bound of j)` of an optimal
/// solution. Equals the primal objective by strong duality.
pub fn dual_objective<S: Scalar>(lp: &LinearProgram<S>, sol: &LpSolution<S>) -> Result<S> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::NotOptimal(sol.status));
    }
    let rows: S = lp.rows.iter().zip(&sol.row_duals).map(|(r, &pi)| r.rhs * pi).sum();
    let bounds: S = sol
        .reduced_costs
        .iter()
        .enumerate()
        .map(|(j, &d)| d * active_bound(lp.lower[j], lp.upper[j], d, sol.primal[j]))
        .sum();
    Ok(rows + bounds)
}

/// Bound value a reduced cost of sign `d` is attached to; falls back to the
/// primal value when that bound is infinite (only possible for `d ~ 0`).
pub(crate) fn active_bound<S: Scalar>(lower: S, upper: S, d: S, x: S) -> S {
    let b = if d > S::zero() {
        lower
    } else if d < S::zero() {
        upper
    } else {
        x
    };
    if b.is_finite() {
        b
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_variable_ge_row() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        lp.add_row([(x, 1.0)], RowSense::Ge, 3.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 3.0).abs() < 1e-12);
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!((sol.row_duals[0] - 1.0).abs() < 1e-12);
        assert!((dual_objective(&lp, &sol).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_active_maximization() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, INF);
        lp.add_row([(x, 1.0)], RowSense::Le, 5.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 5.0).abs() < 1e-12);
        assert!((sol.objective + 5.0).abs() < 1e-12);
        assert!(sol.row_duals[0] <= 0.0);
    }

    #[test]
    fn zero_objective_has_zero_dual_objective() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, -1.0, 4.0);
        let y = lp.add_var(0.0, 0.0, INF);
        lp.add_row([(x, 1.0), (y, 2.0)], RowSense::Eq, 3.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert!(sol.is_optimal());
        assert_eq!(dual_objective(&lp, &sol).unwrap(), 0.0);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row([(x, 1.0)], RowSense::Ge, 2.0);
        assert_eq!(solve_lp(&lp, None).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, INF);
        let y = lp.add_var(0.0, 0.0, INF);
        lp.add_row([(x, 1.0), (y, -1.0)], RowSense::Le, 1.0);
        assert_eq!(solve_lp(&lp, None).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn dual_objective_rejects_non_optimal() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row([(x, 1.0)], RowSense::Ge, 2.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert!(matches!(
            dual_objective(&lp, &sol),
            Err(Error::NotOptimal(LpStatus::Infeasible))
        ));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..4).map(|_| lp.add_var(-1.0, 0.0, INF)).collect();
        for i in 0..4 {
            lp.add_row(vars.iter().map(|&j| (j, 1.0 + (i * j) as f64)), RowSense::Le, 10.0);
        }
        let opts = SolverOptions {
            max_iterations: Some(0),
            ..SolverOptions::default()
        };
        let sol = solve_lp_with(&lp, None, &opts).unwrap();
        assert_eq!(sol.status, LpStatus::IterationLimit);
    }

    #[test]
    fn structural_errors() {
        let mut lp = LinearProgram::<f64>::new();
        lp.add_var(1.0, 0.0, 1.0);
        lp.rows.push(LpRow {
            coeffs: vec![(0, 1.0), (0, 2.0)],
            sense: RowSense::Le,
            rhs: 1.0,
        });
        assert!(matches!(solve_lp(&lp, None), Err(Error::InvalidLp(_))));
        lp.rows[0].coeffs = vec![(3, 1.0)];
        assert!(matches!(lp.check(), Err(Error::InvalidLp(_))));
    }

    #[test]
    fn add_row_merges_duplicates() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_var(0.0, 0.0, 1.0);
        lp.add_row([(x, 1.0), (x, -1.0)], RowSense::Eq, 0.0);
        assert!(lp.rows[0].coeffs.is_empty());
        lp.check().unwrap();
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |x - 2| style: min t s.t. t >= x - 2, t >= 2 - x, x + y = 5, y in [0, 1], x free.
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, -INF, INF);
        let y = lp.add_var(0.0, 0.0, 1.0);
        let t = lp.add_var(1.0, -INF, INF);
        lp.add_row([(t, 1.0), (x, -1.0)], RowSense::Ge, -2.0);
        lp.add_row([(t, 1.0), (x, 1.0)], RowSense::Ge, 2.0);
        lp.add_row([(x, 1.0), (y, 1.0)], RowSense::Eq, 5.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 2.0).abs() < 1e-9, "{}", sol.objective);
        assert!((dual_objective(&lp, &sol).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn runs_in_single_precision() {
        let mut lp = LinearProgram::<f32>::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        let y = lp.add_var(2.0, 0.0, 10.0);
        lp.add_row([(x, 1.0), (y, 1.0)], RowSense::Ge, 4.0);
        lp.add_row([(x, 1.0)], RowSense::Le, 3.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 5.0).abs() < 1e-4);
    }
}
