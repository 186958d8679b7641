use std::fmt::Write as _;
use std::io::{self, Write};

use crate::problem::{Problem, RowId, Sense, Var};

const TERMS_PER_LINE: usize = 8;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (String, f64)>) {
    let mut any = false;
    for (k, (name, c)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(c.abs()));
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// Writes `problem` in CPLEX LP format.
///
/// Ranged rows become a pair of one-sided rows named `<row>_lo` and
/// `<row>_hi`; rows without finite bounds are omitted.
pub fn write_lp<W: Write>(problem: &Problem, mut w: W) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(match problem.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(
        &mut out,
        (0..problem.num_vars())
            .map(Var)
            .filter(|&v| problem.cost(v) != 0.0)
            .map(|v| (problem.var_name(v).to_string(), problem.cost(v))),
    );
    out.push_str("\nSubject To\n");
    for r in (0..problem.num_rows()).map(RowId) {
        let (lo, hi) = problem.row_bounds(r);
        let name = problem.row_name(r);
        let mut emit = |label: &str, op: &str, rhs: f64| {
            let _ = write!(out, " {label}:");
            write_terms(&mut out, problem.row(r).map(|(v, c)| (problem.var_name(v).to_string(), c)));
            let _ = writeln!(out, " {op} {}", num(rhs));
        };
        if lo == hi {
            emit(name, "=", lo);
        } else if lo.is_finite() && hi.is_finite() {
            emit(&format!("{name}_lo"), ">=", lo);
            emit(&format!("{name}_hi"), "<=", hi);
        } else if lo.is_finite() {
            emit(name, ">=", lo);
        } else if hi.is_finite() {
            emit(name, "<=", hi);
        }
    }
    out.push_str("Bounds\n");
    for v in (0..problem.num_vars()).map(Var) {
        let (lo, hi) = problem.var_bounds(v);
        let name = problem.var_name(v);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if lo == hi {
            let _ = writeln!(out, " {name} = {}", num(lo));
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", num(lo), num(hi));
        }
    }
    out.push_str("End\n");
    w.write_all(out.as_bytes())
}
