//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The factorization eliminates column singletons and row singletons first
//! and runs threshold Markowitz pivoting on whatever nucleus remains. Basis
//! changes between refactorizations are appended as eta columns.

use crate::scalar::Scalar;

/// Markowitz threshold: a pivot must be at least this fraction of the
/// largest entry in its column.
const THRESHOLD: f64 = 0.1;

struct URow<S> {
    row: usize,
    col: usize,
    diag: S,
    entries: Vec<(usize, S)>,
}

struct Eta<S> {
    position: usize,
    pivot: S,
    entries: Vec<(usize, S)>,
}

/// Positions and rows left unpivoted by a singular factorization.
#[derive(Debug)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

pub(crate) struct LuFactor<S> {
    m: usize,
    lower: Vec<(usize, Vec<(usize, S)>)>,
    upper: Vec<URow<S>>,
    etas: Vec<Eta<S>>,
    min_diag: S,
    max_diag: S,
}

impl<S: Scalar> LuFactor<S> {
    /// Factorizes the `m x m` matrix whose column `q` is `columns[q]`, given
    /// as `(row, value)` pairs.
    pub fn factor(m: usize, columns: &[Vec<(usize, S)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        let tiny = S::of(1e-13);
        let mut rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v != S::zero() {
                    rows[r].push((c, v));
                    col_rows[c].push(r);
                }
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut lower = Vec::new();
        let mut upper: Vec<URow<S>> = Vec::with_capacity(m);
        let mut mark = vec![usize::MAX; m];

        let mut col_queue: Vec<usize> = (0..m).filter(|&c| col_rows[c].len() == 1).collect();
        let mut row_queue: Vec<usize> = (0..m).filter(|&r| rows[r].len() == 1).collect();

        let value_at = |rows: &[Vec<(usize, S)>], r: usize, c: usize| -> S {
            rows[r].iter().find(|e| e.0 == c).map(|e| e.1).unwrap_or_else(S::zero)
        };

        while upper.len() < m {
            // Column singletons: no elimination needed.
            let mut pivot: Option<(usize, usize)> = None;
            while let Some(c) = col_queue.pop() {
                if col_done[c] || col_rows[c].len() != 1 {
                    continue;
                }
                let r = col_rows[c][0];
                if value_at(&rows, r, c).abs() > tiny {
                    pivot = Some((r, c));
                    break;
                }
            }
            // Row singletons, subject to the threshold test.
            if pivot.is_none() {
                while let Some(r) = row_queue.pop() {
                    if row_done[r] || rows[r].len() != 1 {
                        continue;
                    }
                    let (c, v) = rows[r][0];
                    let col_max = col_rows[c]
                        .iter()
                        .map(|&i| value_at(&rows, i, c).abs())
                        .fold(S::zero(), S::max);
                    if v.abs() > tiny && v.abs() >= S::of(THRESHOLD) * col_max {
                        pivot = Some((r, c));
                        break;
                    }
                }
            }
            // Markowitz search over the nucleus.
            if pivot.is_none() {
                let mut best: Option<(usize, usize, usize, S)> = None;
                for c in (0..m).filter(|&c| !col_done[c]) {
                    let count = col_rows[c].len();
                    if count == 0 {
                        continue;
                    }
                    let col_max = col_rows[c]
                        .iter()
                        .map(|&i| value_at(&rows, i, c).abs())
                        .fold(S::zero(), S::max);
                    if col_max <= tiny {
                        continue;
                    }
                    for &r in &col_rows[c] {
                        let v = value_at(&rows, r, c).abs();
                        if v < S::of(THRESHOLD) * col_max {
                            continue;
                        }
                        let cost = (rows[r].len() - 1) * (count - 1);
                        let better = match best {
                            None => true,
                            Some((_, _, bc, bv)) => cost < bc || (cost == bc && v > bv),
                        };
                        if better {
                            best = Some((r, c, cost, v));
                        }
                    }
                }
                pivot = best.map(|(r, c, _, _)| (r, c));
            }

            let Some((pr, pc)) = pivot else {
                return Err(Singular {
                    positions: (0..m).filter(|&c| !col_done[c]).collect(),
                    rows: (0..m).filter(|&r| !row_done[r]).collect(),
                });
            };

            let pivot_row = std::mem::take(&mut rows[pr]);
            let diag = pivot_row
                .iter()
                .find(|e| e.0 == pc)
                .map(|e| e.1)
                .expect("pivot entry present");
            let entries: Vec<(usize, S)> = pivot_row.iter().copied().filter(|e| e.0 != pc).collect();

            // Eliminate the pivot column from the other active rows.
            let others: Vec<usize> = col_rows[pc].iter().copied().filter(|&r| r != pr).collect();
            let mut multipliers = Vec::with_capacity(others.len());
            for &i in &others {
                let row = &mut rows[i];
                let at = row.iter().position(|e| e.0 == pc).expect("column pattern in sync");
                let l = row.swap_remove(at).1 / diag;
                multipliers.push((i, l));
                for (k, e) in row.iter().enumerate() {
                    mark[e.0] = k;
                }
                for &(c, v) in &entries {
                    let k = mark[c];
                    if k != usize::MAX {
                        row[k].1 -= l * v;
                    } else {
                        mark[c] = row.len();
                        row.push((c, -l * v));
                        col_rows[c].push(i);
                    }
                }
                for e in row.iter() {
                    mark[e.0] = usize::MAX;
                }
                // Drop cancellations so the patterns stay exact.
                let mut k = 0;
                while k < row.len() {
                    if row[k].1.abs() <= tiny * S::of(1e-3) {
                        let c = row[k].0;
                        col_rows[c].retain(|&x| x != i);
                        row.swap_remove(k);
                        if !col_done[c] && col_rows[c].len() == 1 {
                            col_queue.push(c);
                        }
                    } else {
                        k += 1;
                    }
                }
                if row.len() == 1 {
                    row_queue.push(i);
                }
            }
            if !multipliers.is_empty() {
                lower.push((pr, multipliers));
            }

            for &(c, _) in &entries {
                col_rows[c].retain(|&x| x != pr);
                if col_rows[c].len() == 1 {
                    col_queue.push(c);
                }
            }
            col_rows[pc].clear();
            row_done[pr] = true;
            col_done[pc] = true;
            upper.push(URow {
                row: pr,
                col: pc,
                diag,
                entries,
            });
        }

        let (min_diag, max_diag) = upper.iter().fold((S::infinity(), S::zero()), |(lo, hi), u| {
            (lo.min(u.diag.abs()), hi.max(u.diag.abs()))
        });
        Ok(Self {
            m,
            lower,
            upper,
            etas: Vec::new(),
            min_diag,
            max_diag,
        })
    }

    /// Ratio of the extreme pivot magnitudes of the last factorization.
    pub fn condition_estimate(&self) -> S {
        if self.m == 0 {
            S::one()
        } else {
            self.max_diag / self.min_diag
        }
    }

    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = rhs` in place: `rhs` is indexed by row on entry and by
    /// basis position on exit.
    pub fn ftran(&self, rhs: &mut Vec<S>) {
        for (pr, mults) in &self.lower {
            let p = rhs[*pr];
            if p != S::zero() {
                for &(i, l) in mults {
                    rhs[i] -= l * p;
                }
            }
        }
        let mut out = vec![S::zero(); self.m];
        for u in self.upper.iter().rev() {
            let mut acc = rhs[u.row];
            for &(c, v) in &u.entries {
                acc -= v * out[c];
            }
            out[u.col] = acc / u.diag;
        }
        for eta in &self.etas {
            let wq = out[eta.position] / eta.pivot;
            if wq != S::zero() {
                for &(i, a) in &eta.entries {
                    out[i] -= a * wq;
                }
            }
            out[eta.position] = wq;
        }
        *rhs = out;
    }

    /// Solves `B^T y = rhs` in place: `rhs` is indexed by basis position on
    /// entry and by row on exit.
    pub fn btran(&self, rhs: &mut Vec<S>) {
        for eta in self.etas.iter().rev() {
            let mut acc = rhs[eta.position];
            for &(i, a) in &eta.entries {
                acc -= a * rhs[i];
            }
            rhs[eta.position] = acc / eta.pivot;
        }
        let mut z = vec![S::zero(); self.m];
        for u in &self.upper {
            let zr = rhs[u.col] / u.diag;
            z[u.row] = zr;
            if zr != S::zero() {
                for &(c, v) in &u.entries {
                    rhs[c] -= v * zr;
                }
            }
        }
        for (pr, mults) in self.lower.iter().rev() {
            let mut acc = z[*pr];
            for &(i, l) in mults {
                acc -= l * z[i];
            }
            z[*pr] = acc;
        }
        *rhs = z;
    }

    /// Records that the column at `position` was replaced by a column whose
    /// representation in the current basis is `alpha`.
    pub fn update(&mut self, position: usize, alpha: &[S]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != position && a != S::zero())
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            position,
            pivot: alpha[position],
            entries,
        });
    }
}
