//! Random small LPs checked against brute-force vertex enumeration.

use dctopo_lp::{solve, Basis, Problem, RowId, Sense, SolveOptions, Status, Var};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Spec {
    maximize: bool,
    cost: Vec<i32>,
    bounds: Vec<(i32, i32)>,
    rows: Vec<(Vec<i32>, Option<i32>, Option<i32>)>,
}

fn build(s: &Spec) -> Problem {
    let mut p = Problem::new(if s.maximize { Sense::Maximize } else { Sense::Minimize });
    let vars: Vec<Var> = s
        .cost
        .iter()
        .zip(&s.bounds)
        .enumerate()
        .map(|(j, (&c, &(l, u)))| p.add_var(format!("x{j}"), c as f64, l as f64, u as f64))
        .collect();
    for (i, (coef, lo, hi)) in s.rows.iter().enumerate() {
        p.add_row(
            format!("r{i}"),
            lo.map_or(f64::NEG_INFINITY, f64::from),
            hi.map_or(f64::INFINITY, f64::from),
            vars.iter().zip(coef).map(|(&v, &a)| (v, a as f64)),
        );
    }
    p
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for c in k..n {
                    a[i][c] -= f * a[k][c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(p: &Problem, x: &[f64], tol: f64) -> bool {
    (0..p.num_vars()).all(|j| {
        let (l, u) = p.var_bounds(Var(j));
        x[j] >= l - tol && x[j] <= u + tol
    }) && p.row_activity(x).iter().enumerate().all(|(i, &a)| {
        let (l, u) = p.row_bounds(RowId(i));
        a >= l - tol && a <= u + tol
    })
}

/// Best objective over all vertices, or `None` if the polytope is empty.
fn vertex_optimum(s: &Spec, p: &Problem) -> Option<f64> {
    let n = s.cost.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), s.bounds[j].0 as f64));
        planes.push((e, s.bounds[j].1 as f64));
    }
    for (coef, lo, hi) in &s.rows {
        let a: Vec<f64> = coef.iter().map(|&c| c as f64).collect();
        for b in [lo, hi].into_iter().flatten() {
            planes.push((a.clone(), *b as f64));
        }
    }
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = gauss(a, b) {
            if feasible(p, &x, 1e-7) {
                let obj = p.objective_value(&x);
                best = Some(match best {
                    None => obj,
                    Some(v) if s.maximize => v.max(obj),
                    Some(v) => v.min(obj),
                });
            }
        }
        // next n-combination of planes
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn spec_strategy() -> impl Strategy<Value = Spec> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(n, m)| {
        let bound = (-3i32..=1, 0i32..=4).prop_map(|(l, w)| (l, l + w));
        let range = (0u8..5, -4i32..=4, 0i32..=4).prop_map(|(kind, lo, w)| match kind {
            0 => (None, None),
            1 => (Some(lo), None),
            2 => (None, Some(lo)),
            3 => (Some(lo), Some(lo)),
            _ => (Some(lo), Some(lo + w)),
        });
        let row = (prop::collection::vec(-3i32..=3, n), range).prop_map(|(c, (lo, hi))| (c, lo, hi));
        (
            any::<bool>(),
            prop::collection::vec(-4i32..=4, n),
            prop::collection::vec(bound, n),
            prop::collection::vec(row, m),
        )
            .prop_map(|(maximize, cost, bounds, rows)| Spec { maximize, cost, bounds, rows })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_vertex_enumeration(s in spec_strategy()) {
        let p = build(&s);
        let sol = solve(&p, &SolveOptions::default(), None).unwrap();
        match vertex_optimum(&s, &p) {
            Some(best) => {
                prop_assert_eq!(sol.status, Status::Optimal);
                prop_assert!((sol.objective - best).abs() < 1e-6, "{} vs {}", sol.objective, best);
                prop_assert!(feasible(&p, &sol.x, 1e-8));
            }
            None => prop_assert_eq!(sol.status, Status::Infeasible),
        }
    }

    #[test]
    fn duals_certify_optimality(s in spec_strategy()) {
        let p = build(&s);
        let sol = solve(&p, &SolveOptions::default(), None).unwrap();
        if sol.status != Status::Optimal {
            return Ok(());
        }
        let tol = 1e-7;
        // maximization flips every sign condition
        let sg = if s.maximize { -1.0 } else { 1.0 };
        let mut rc: Vec<f64> = (0..p.num_vars()).map(|j| p.cost(Var(j))).collect();
        for i in 0..p.num_rows() {
            for (v, a) in p.row(RowId(i)) {
                rc[v.0] -= a * sol.duals[i];
            }
        }
        for j in 0..p.num_vars() {
            let (l, u) = p.var_bounds(Var(j));
            let x = sol.x[j];
            let r = sg * rc[j];
            if (x - l).abs() > tol && (x - u).abs() > tol {
                prop_assert!(r.abs() < tol, "interior variable {} has reduced cost {}", j, r);
            } else if (x - l).abs() <= tol && (x - u).abs() > tol {
                prop_assert!(r > -tol, "variable {} at lower bound has reduced cost {}", j, r);
            } else if (x - u).abs() <= tol && (x - l).abs() > tol {
                prop_assert!(r < tol, "variable {} at upper bound has reduced cost {}", j, r);
            }
        }
        for i in 0..p.num_rows() {
            let (l, u) = p.row_bounds(RowId(i));
            let a = sol.row_activity[i];
            let y = sg * sol.duals[i];
            if (a - l).abs() > tol && (a - u).abs() > tol {
                prop_assert!(y.abs() < tol, "inactive row {} has price {}", i, y);
            } else if (a - l).abs() <= tol && (a - u).abs() > tol {
                prop_assert!(y > -tol, "row {} at lower bound has price {}", i, y);
            } else if (a - u).abs() <= tol && (a - l).abs() > tol {
                prop_assert!(y < tol, "row {} at upper bound has price {}", i, y);
            }
        }
    }

    #[test]
    fn warm_start_from_optimal_basis_needs_no_pivots(s in spec_strategy()) {
        let p = build(&s);
        let sol = solve(&p, &SolveOptions::default(), None).unwrap();
        if sol.status != Status::Optimal {
            return Ok(());
        }
        let again = solve(&p, &SolveOptions::default(), Some(&sol.basis)).unwrap();
        prop_assert_eq!(again.status, Status::Optimal);
        prop_assert!((again.objective - sol.objective).abs() < 1e-9);
        prop_assert_eq!(again.iterations, 0);
    }
}

#[test]
fn detects_unbounded() {
    let mut p = Problem::new(Sense::Maximize);
    let x = p.add_var("x", 1.0, 0.0, f64::INFINITY);
    let y = p.add_var("y", 0.0, 0.0, f64::INFINITY);
    p.add_row("r", f64::NEG_INFINITY, 1.0, [(x, 1.0), (y, -1.0)]);
    let sol = solve(&p, &SolveOptions::default(), None).unwrap();
    assert_eq!(sol.status, Status::Unbounded);
}

#[test]
fn free_variables_are_handled() {
    // min |x - 3| written with a free x and an epigraph variable
    let mut p = Problem::new(Sense::Minimize);
    let x = p.add_var("x", 0.0, f64::NEG_INFINITY, f64::INFINITY);
    let t = p.add_var("t", 1.0, f64::NEG_INFINITY, f64::INFINITY);
    p.add_row("a", 3.0, f64::INFINITY, [(t, 1.0), (x, 1.0)]);
    p.add_row("b", -3.0, f64::INFINITY, [(t, 1.0), (x, -1.0)]);
    p.add_row("c", 5.0, 5.0, [(x, 1.0), (t, 1.0)]);
    let sol = solve(&p, &SolveOptions::default(), None).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective - 1.0).abs() < 1e-9);
    assert!((sol.x[0] - 4.0).abs() < 1e-9);
}

#[test]
fn degenerate_assignment_problem() {
    // 6x6 assignment, optimum found by permutation search
    let n = 6;
    let cost = |i: usize, j: usize| ((i * j + i + 2 * j) % 7) as f64;
    let mut p = Problem::new(Sense::Minimize);
    let mut v = vec![vec![Var(0); n]; n];
    for i in 0..n {
        for j in 0..n {
            v[i][j] = p.add_var(format!("x{i}_{j}"), cost(i, j), 0.0, f64::INFINITY);
        }
    }
    for i in 0..n {
        p.add_row(format!("r{i}"), 1.0, 1.0, (0..n).map(|j| (v[i][j], 1.0)));
        p.add_row(format!("c{i}"), 1.0, 1.0, (0..n).map(|j| (v[j][i], 1.0)));
    }
    let sol = solve(&p, &SolveOptions::default(), Some(&Basis::slack(n * n, 2 * n))).unwrap();
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |pm| {
        let c: f64 = pm.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
        best = best.min(c);
    });
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective - best).abs() < 1e-9);
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

#[test]
fn rejects_basis_of_wrong_length() {
    let mut p = Problem::new(Sense::Minimize);
    let x = p.add_var("x", 1.0, 0.0, 1.0);
    p.add_row("r", 0.0, 1.0, [(x, 1.0)]);
    let err = solve(&p, &SolveOptions::default(), Some(&Basis::new(vec![]))).unwrap_err();
    assert!(matches!(err, dctopo_lp::LpError::BasisShape { got: 0, expected: 1 }));
}
