//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use bbha::lp::{LinearProgram, LpSolution, RowSense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Enumerates every basic point: each variable sits at its lower bound, its
/// upper bound, or strictly between them; the in-between ones are pinned by
/// an equal number of rows held at equality. Returns the best feasible
/// objective, or `None` when no basic point is feasible.
pub fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut best: Option<f64> = None;
    let mut states = vec![0u8; n];
    loop {
        let interior: Vec<usize> = (0..n).filter(|&j| states[j] == 2).collect();
        let k = interior.len();
        if k <= m {
            let mut x = vec![0.0; n];
            for j in 0..n {
                x[j] = match states[j] {
                    0 => lp.lower[j],
                    1 => lp.upper[j],
                    _ => 0.0,
                };
            }
            for rows in combinations(m, k) {
                let mut a = vec![vec![0.0; k + 1]; k];
                for (r, &i) in rows.iter().enumerate() {
                    let row = &lp.rows[i];
                    let mut rhs = row.rhs;
                    for &(j, v) in &row.coeffs {
                        match interior.iter().position(|&p| p == j) {
                            Some(c) => a[r][c] = v,
                            None => rhs -= v * x[j],
                        }
                    }
                    a[r][k] = rhs;
                }
                let Some(sol) = gauss(a) else { continue };
                let mut point = x.clone();
                for (c, &j) in interior.iter().enumerate() {
                    point[j] = sol[c];
                }
                if lp.max_violation(&point) <= 1e-9 {
                    let obj = lp.objective_value(&point);
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
        }
        // Next state vector in base 3.
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            states[j] += 1;
            if states[j] < 3 {
                break;
            }
            states[j] = 0;
            j += 1;
        }
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..k).map(|r| a[r][k] / a[r][r]).collect())
}

pub fn random_lp(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> LinearProgram {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let mut lp = LinearProgram::new();
    for _ in 0..n {
        let lo = -rng.gen_range(0.0..5.0f64).round();
        let up = lo + rng.gen_range(0.0..8.0f64).round();
        lp.add_var(rng.gen_range(-3.0..3.0), lo, up);
    }
    let x0: Vec<f64> = (0..n).map(|j| rng.gen_range(lp.lower[j]..=lp.upper[j])).collect();
    let arbitrary_rhs = rng.gen_bool(0.15);
    for _ in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.8) {
                coeffs.push((j, rng.gen_range(-3.0..3.0)));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, v)| v * x0[j]).sum();
        let sense = match rng.gen_range(0..5) {
            0 => RowSense::Eq,
            1 | 2 => RowSense::Le,
            _ => RowSense::Ge,
        };
        let rhs = if arbitrary_rhs {
            rng.gen_range(-10.0..10.0)
        } else {
            match sense {
                RowSense::Le => act + rng.gen_range(0.0..2.0),
                RowSense::Ge => act - rng.gen_range(0.0..2.0),
                RowSense::Eq => act,
            }
        };
        lp.add_row(coeffs, sense, rhs);
    }
    lp
}

/// Primal feasibility, dual sign feasibility and complementary slackness.
pub fn assert_kkt(lp: &LinearProgram, sol: &LpSolution, tol: f64) {
    assert!(lp.max_violation(&sol.primal) <= tol, "primal violation");
    for (i, row) in lp.rows.iter().enumerate() {
        let pi = sol.row_duals[i];
        let act: f64 = row.coeffs.iter().map(|&(j, v)| v * sol.primal[j]).sum();
        match row.sense {
            RowSense::Ge => assert!(pi >= -tol, "row {i}: dual {pi} on >= row"),
            RowSense::Le => assert!(pi <= tol, "row {i}: dual {pi} on <= row"),
            RowSense::Eq => {}
        }
        assert!(
            (pi * (act - row.rhs)).abs() <= tol * (1.0 + pi.abs()),
            "row {i}: slackness"
        );
    }
    for j in 0..lp.num_vars() {
        // Reduced costs must equal c - A^T pi.
        let atpi: f64 = lp
            .rows
            .iter()
            .zip(&sol.row_duals)
            .map(|(r, &pi)| r.coeffs.iter().filter(|e| e.0 == j).map(|e| e.1 * pi).sum::<f64>())
            .sum();
        let d = sol.reduced_costs[j];
        assert!(
            (lp.objective[j] - atpi - d).abs() <= tol,
            "var {j}: reduced cost identity"
        );
        let x = sol.primal[j];
        if d > tol {
            assert!((x - lp.lower[j]).abs() <= tol, "var {j}: positive d off lower bound");
        }
        if d < -tol {
            assert!((x - lp.upper[j]).abs() <= tol, "var {j}: negative d off upper bound");
        }
    }
}
