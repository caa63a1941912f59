//! Fixed-format text dump of a [`LinearProgram`] for debugging.
//!
//! ```text
//! LP <vars> <rows>
//! VAR <index> <cost> <lower> <upper>
//! ROW <index> <L|G|E> <rhs> <nnz>
//! COEF <row> <var> <value>
//! END
//! ```
//!
//! Indices are right-aligned in 8 columns, reals use `{:+.16e}` (infinite
//! bounds print as `-inf` / `+inf`), fields are separated by one space and
//! every line ends with `\n`. The layout is stable: identical programs dump
//! to identical bytes.

use std::fmt::Write;

use super::{LinearProgram, RowSense};
use crate::scalar::Scalar;

fn real<S: Scalar>(v: S) -> String {
    let v = v.as_f64();
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:+.16e}")
    }
}

pub fn write_dump<S: Scalar>(lp: &LinearProgram<S>) -> String {
    let mut out = String::new();
    writeln!(out, "LP {:>8} {:>8}", lp.num_vars(), lp.num_rows()).unwrap();
    for j in 0..lp.num_vars() {
        writeln!(
            out,
            "VAR {j:>8} {} {} {}",
            real(lp.objective[j]),
            real(lp.lower[j]),
            real(lp.upper[j])
        )
        .unwrap();
    }
    for (i, row) in lp.rows.iter().enumerate() {
        let sense = match row.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        writeln!(out, "ROW {i:>8} {sense} {} {:>8}", real(row.rhs), row.coeffs.len()).unwrap();
        for &(j, v) in &row.coeffs {
            writeln!(out, "COEF {i:>8} {j:>8} {}", real(v)).unwrap();
        }
    }
    out.push_str("END\n");
    out
}
