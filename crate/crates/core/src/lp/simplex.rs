//! Revised primal simplex over the computational form `A x - r = 0`, where
//! `r` holds one logical variable per row carrying the row's bounds.
//!
//! Phase 1 minimizes the sum of bound violations of the basic variables,
//! which is the artificial-variable phase 1 with the artificials folded into
//! the logicals. Pricing is Dantzig's rule with a Harris two-pass ratio test;
//! after `stall_window` consecutive degenerate pivots the solver switches to
//! Bland's rule until a pivot makes progress.

use super::lu::LuFactor;
use super::{Basis, LinearProgram, LpSolution, LpStatus, RowSense, SolverOptions, VarStatus};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NONE: usize = usize::MAX;

pub(crate) struct Simplex<'a, S: Scalar> {
    lp: &'a LinearProgram<S>,
    options: &'a SolverOptions,
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, S)>>,
    lower: Vec<S>,
    upper: Vec<S>,
    cost: Vec<S>,
    x: Vec<S>,
    status: Vec<VarStatus>,
    head: Vec<usize>,
    position: Vec<usize>,
    lu: Option<LuFactor<S>>,
    iterations: usize,
}

enum Step {
    Continue,
    Optimal,
    Infeasible,
    Unbounded,
}

impl<'a, S: Scalar> Simplex<'a, S> {
    pub fn new(lp: &'a LinearProgram<S>, options: &'a SolverOptions) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                cols[j].push((i, v));
            }
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for row in &lp.rows {
            let (lo, up) = match row.sense {
                RowSense::Le => (S::neg_infinity(), row.rhs),
                RowSense::Ge => (row.rhs, S::infinity()),
                RowSense::Eq => (row.rhs, row.rhs),
            };
            lower.push(lo);
            upper.push(up);
        }
        let mut cost = lp.objective.clone();
        cost.resize(n + m, S::zero());
        Self {
            lp,
            options,
            n,
            m,
            cols,
            lower,
            upper,
            cost,
            x: vec![S::zero(); n + m],
            status: vec![VarStatus::AtLower; n + m],
            head: Vec::new(),
            position: vec![NONE; n + m],
            lu: None,
            iterations: 0,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, S)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -S::one())]
        }
    }

    /// `y^T a_j` for the column of variable `j`.
    fn dot_column(&self, y: &[S], j: usize) -> S {
        if j < self.n {
            self.cols[j].iter().map(|&(i, v)| v * y[i]).sum()
        } else {
            -y[j - self.n]
        }
    }

    fn nonbasic_status(&self, j: usize, preferred: Option<VarStatus>) -> VarStatus {
        let (lo, up) = (self.lower[j], self.upper[j]);
        match preferred {
            Some(VarStatus::AtUpper) if up.is_finite() => VarStatus::AtUpper,
            Some(VarStatus::AtLower) if lo.is_finite() => VarStatus::AtLower,
            _ if lo.is_finite() => VarStatus::AtLower,
            _ if up.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        }
    }

    fn nonbasic_value(&self, j: usize) -> S {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::Free | VarStatus::Basic => S::zero(),
        }
    }

    fn install_basis(&mut self, warm_start: Option<&Basis>) {
        let (n, m) = (self.n, self.m);
        let usable = warm_start.filter(|b| {
            b.structural.len() == n && b.logical.len() <= m && {
                let basics = b
                    .structural
                    .iter()
                    .chain(&b.logical)
                    .filter(|&&s| s == VarStatus::Basic)
                    .count();
                basics + (m - b.logical.len()) == m
            }
        });
        let mut status = vec![VarStatus::Basic; n + m];
        match usable {
            Some(basis) => {
                for (j, &s) in basis.structural.iter().chain(&basis.logical).enumerate() {
                    status[j] = s;
                }
            }
            None => {
                for s in status.iter_mut().take(n) {
                    *s = VarStatus::AtLower;
                }
            }
        }
        for (j, s) in status.iter_mut().enumerate() {
            if *s != VarStatus::Basic {
                *s = self.nonbasic_status(j, Some(*s));
            }
        }
        self.status = status;
        self.head = (0..n + m).filter(|&j| self.status[j] == VarStatus::Basic).collect();
        self.position = vec![NONE; n + m];
        for (q, &j) in self.head.iter().enumerate() {
            self.position[j] = q;
        }
        for j in 0..n + m {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.nonbasic_value(j);
            }
        }
    }

    /// Factorizes the current basis, swapping in slacks for any columns that
    /// leave the basis singular.
    fn refactor(&mut self) -> Result<()> {
        for _attempt in 0..3 {
            let columns: Vec<Vec<(usize, S)>> = self.head.iter().map(|&j| self.column(j)).collect();
            match LuFactor::factor(self.m, &columns) {
                Ok(lu) => {
                    if lu.condition_estimate() > S::max_condition() {
                        return Err(Error::Numerical(format!(
                            "basis condition estimate {} exceeds {}",
                            lu.condition_estimate(),
                            S::max_condition()
                        )));
                    }
                    self.lu = Some(lu);
                    self.compute_primal();
                    return Ok(());
                }
                Err(singular) => {
                    for (&q, &row) in singular.positions.iter().zip(&singular.rows) {
                        let leaving = self.head[q];
                        let logical = self.n + row;
                        debug_assert_ne!(self.status[logical], VarStatus::Basic);
                        self.status[leaving] = self.nonbasic_status(leaving, None);
                        self.x[leaving] = self.nonbasic_value(leaving);
                        self.position[leaving] = NONE;
                        self.head[q] = logical;
                        self.position[logical] = q;
                        self.status[logical] = VarStatus::Basic;
                    }
                }
            }
        }
        Err(Error::Numerical("basis stays singular after slack repair".into()))
    }

    fn lu(&self) -> &LuFactor<S> {
        self.lu.as_ref().expect("basis factorized")
    }

    fn compute_primal(&mut self) {
        let mut rhs = vec![S::zero(); self.m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.x[j];
            if v == S::zero() {
                continue;
            }
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - self.n] += v;
            }
        }
        self.lu().ftran(&mut rhs);
        for (q, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[q];
        }
    }

    fn infeasibility(&self, j: usize) -> i8 {
        let tol = S::primal_tol();
        if self.x[j] < self.lower[j] - tol {
            -1
        } else if self.x[j] > self.upper[j] + tol {
            1
        } else {
            0
        }
    }

    pub fn solve(mut self, warm_start: Option<&Basis>) -> Result<LpSolution<S>> {
        self.install_basis(warm_start);
        if self.refactor().is_err() {
            // A stale warm start may be unusable; fall back to the slack basis.
            self.install_basis(None);
            self.refactor()?;
        }
        let max_iterations = self.options.max_iterations.unwrap_or(50 * (self.n + self.m).max(1));
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= max_iterations {
                return Ok(self.finish(LpStatus::IterationLimit));
            }
            match self.iterate(bland, &mut stall)? {
                Step::Continue => {
                    if stall >= self.options.stall_window {
                        bland = true;
                    } else if stall == 0 {
                        bland = false;
                    }
                }
                Step::Optimal | Step::Infeasible if self.lu().num_updates() > 0 => {
                    // Confirm on a fresh factorization before reporting.
                    self.refactor()?;
                }
                Step::Optimal => return Ok(self.finish(LpStatus::Optimal)),
                Step::Infeasible => return Ok(self.finish(LpStatus::Infeasible)),
                Step::Unbounded => return Ok(self.finish(LpStatus::Unbounded)),
            }
        }
    }

    fn iterate(&mut self, bland: bool, stall: &mut usize) -> Result<Step> {
        let (n, m) = (self.n, self.m);
        let infeas: Vec<i8> = self.head.iter().map(|&j| self.infeasibility(j)).collect();
        let phase_one = infeas.iter().any(|&s| s != 0);

        let mut y: Vec<S> = if phase_one {
            infeas.iter().map(|&s| S::of(s as f64)).collect()
        } else {
            self.head.iter().map(|&j| self.cost[j]).collect()
        };
        self.lu().btran(&mut y);

        // Pricing.
        let dtol = S::dual_tol();
        let mut entering = NONE;
        let mut best = S::zero();
        let mut entering_d = S::zero();
        for j in 0..n + m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { S::zero() } else { self.cost[j] };
            let d = c - self.dot_column(&y, j);
            let eligible = match st {
                VarStatus::AtLower => d < -dtol,
                VarStatus::AtUpper => d > dtol,
                VarStatus::Free => d.abs() > dtol,
                VarStatus::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                entering = j;
                entering_d = d;
                break;
            }
            if d.abs() > best {
                best = d.abs();
                entering = j;
                entering_d = d;
            }
        }
        if entering == NONE {
            return Ok(if phase_one { Step::Infeasible } else { Step::Optimal });
        }

        let mut alpha = vec![S::zero(); m];
        for (i, v) in self.column(entering) {
            alpha[i] = v;
        }
        self.lu().ftran(&mut alpha);
        let dir = if entering_d < S::zero() { S::one() } else { -S::one() };

        // Ratio test. Basic variable at position q moves at rate -dir*alpha_q.
        let ptol = S::pivot_tol();
        let ftol = S::primal_tol();
        // Target bound of the basic variable at position q and whether it is
        // the upper one. In phase one an infeasible variable may only block at
        // the bound it currently violates.
        let target = |q: usize, rate: S| -> Option<(S, bool)> {
            let j = self.head[q];
            if rate < S::zero() {
                match infeas[q] {
                    1 => Some((self.upper[j], true)),
                    -1 => None,
                    _ => self.lower[j].is_finite().then(|| (self.lower[j], false)),
                }
            } else {
                match infeas[q] {
                    -1 => Some((self.lower[j], false)),
                    1 => None,
                    _ => self.upper[j].is_finite().then(|| (self.upper[j], true)),
                }
            }
        };

        let mut leaving = NONE;
        let mut leaving_upper = false;
        let mut theta = S::infinity();
        let mut relaxed = S::infinity();
        for q in 0..m {
            let rate = -dir * alpha[q];
            if rate.abs() <= ptol {
                continue;
            }
            if let Some((b, _)) = target(q, rate) {
                let slack = if rate > S::zero() { b + ftol } else { b - ftol };
                let ratio = (slack - self.x[self.head[q]]) / rate;
                relaxed = relaxed.min(ratio.max(S::zero()));
            }
        }
        if relaxed.is_finite() {
            let mut best_pivot = S::zero();
            let mut best_var = NONE;
            for q in 0..m {
                let rate = -dir * alpha[q];
                if rate.abs() <= ptol {
                    continue;
                }
                if let Some((b, is_upper)) = target(q, rate) {
                    let ratio = ((b - self.x[self.head[q]]) / rate).max(S::zero());
                    if ratio > relaxed {
                        continue;
                    }
                    // Bland: smallest variable index among the near-ties;
                    // otherwise the largest pivot.
                    let better = if bland {
                        self.head[q] < best_var
                    } else {
                        alpha[q].abs() > best_pivot
                    };
                    if better {
                        best_pivot = alpha[q].abs();
                        best_var = self.head[q];
                        leaving = q;
                        leaving_upper = is_upper;
                        theta = ratio;
                    }
                }
            }
        }

        let range = self.upper[entering] - self.lower[entering];
        let flip = range.is_finite() && range <= theta;
        if flip {
            theta = range;
        }
        if !flip && leaving == NONE {
            if phase_one {
                return Err(Error::Numerical(
                    "phase one found an unblocked improving direction".into(),
                ));
            }
            return Ok(Step::Unbounded);
        }

        self.iterations += 1;
        if theta <= ftol {
            *stall += 1;
        } else {
            *stall = 0;
        }

        let step = dir * theta;
        if step != S::zero() {
            for q in 0..m {
                if alpha[q] != S::zero() {
                    let j = self.head[q];
                    self.x[j] -= step * alpha[q];
                }
            }
        }
        if flip {
            self.status[entering] = match self.status[entering] {
                VarStatus::AtLower => VarStatus::AtUpper,
                _ => VarStatus::AtLower,
            };
            self.x[entering] = self.nonbasic_value(entering);
            return Ok(Step::Continue);
        }

        self.x[entering] += step;
        let out = self.head[leaving];
        self.status[out] = if self.lower[out] == self.upper[out] || !leaving_upper {
            VarStatus::AtLower
        } else {
            VarStatus::AtUpper
        };
        self.x[out] = self.nonbasic_value(out);
        self.position[out] = NONE;
        self.head[leaving] = entering;
        self.position[entering] = leaving;
        self.status[entering] = VarStatus::Basic;

        let lu = self.lu.as_mut().expect("basis factorized");
        lu.update(leaving, &alpha);
        if lu.num_updates() >= self.options.refactor_interval {
            self.refactor()?;
        }
        Ok(Step::Continue)
    }

    fn finish(self, status: LpStatus) -> LpSolution<S> {
        let (n, m) = (self.n, self.m);
        let mut y: Vec<S> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.lu().btran(&mut y);
        let primal: Vec<S> = self.x[..n].to_vec();
        let reduced_costs: Vec<S> = (0..n)
            .map(|j| {
                if self.status[j] == VarStatus::Basic {
                    S::zero()
                } else {
                    self.cost[j] - self.dot_column(&y, j)
                }
            })
            .collect();
        let row_duals: Vec<S> = (0..m)
            .map(|i| {
                if self.status[n + i] == VarStatus::Basic {
                    S::zero()
                } else {
                    y[i]
                }
            })
            .collect();
        let objective = self.lp.objective_value(&primal);
        LpSolution {
            status,
            primal,
            objective,
            row_duals,
            reduced_costs,
            basis: Basis {
                structural: self.status[..n].to_vec(),
                logical: self.status[n..].to_vec(),
            },
            iterations: self.iterations,
        }
    }
}
