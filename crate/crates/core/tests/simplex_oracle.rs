//! Simplex correctness against an independent vertex-enumeration oracle,
//! plus warm-start/cold agreement and duality checks.

use dedvpe_core::simplex::{
    reoptimize_after_bound_change, solve_lp, LpStatus,
};
use dedvpe_core::sparselp::{ColName, LpBuilder, RowName, SparseLp};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Brute-force optimum of a fully bounded LP by enumerating every basic
/// solution: all basis subsets of the augmented system `[A -I]`, all bound
/// assignments of the nonbasic columns. Independent of the simplex path.
fn enumerate_optimum(lp: &SparseLp) -> Option<f64> {
    let m = lp.n_rows();
    let n = lp.n_cols();
    let total = n + m;
    let mut cols = vec![vec![0.0; m]; total];
    for j in 0..n {
        for (r, v) in lp.col(j) {
            cols[j][r] = v;
        }
    }
    for i in 0..m {
        cols[n + i][i] = -1.0;
    }
    let mut lower = lp.col_lower.clone();
    let mut upper = lp.col_upper.clone();
    lower.extend_from_slice(&lp.row_lower);
    upper.extend_from_slice(&lp.row_upper);
    let mut obj = lp.obj.clone();
    obj.extend(std::iter::repeat(0.0).take(m));

    assert!(lower.iter().chain(upper.iter()).all(|b| b.is_finite()));

    let mut best: Option<f64> = None;
    let mut basis: Vec<usize> = (0..m).collect();
    loop {
        try_basis(&basis, &cols, &lower, &upper, &obj, m, total, &mut best);
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return best.map(|b| b + lp.obj_const);
            }
            i -= 1;
            if basis[i] < total - (m - i) {
                basis[i] += 1;
                for k in i + 1..m {
                    basis[k] = basis[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn try_basis(
    basis: &[usize],
    cols: &[Vec<f64>],
    lower: &[f64],
    upper: &[f64],
    obj: &[f64],
    m: usize,
    total: usize,
    best: &mut Option<f64>,
) {
    // dense LU with partial pivoting of the basis matrix
    let mut a = vec![vec![0.0; m]; m];
    for (k, &j) in basis.iter().enumerate() {
        for r in 0..m {
            a[r][k] = cols[j][r];
        }
    }
    let mut piv = (0..m).collect::<Vec<_>>();
    for k in 0..m {
        let (mut pi, mut pv) = (k, a[k][k].abs());
        for r in k + 1..m {
            if a[r][k].abs() > pv {
                pi = r;
                pv = a[r][k].abs();
            }
        }
        if pv < 1e-10 {
            return; // singular basis
        }
        a.swap(k, pi);
        piv.swap(k, pi);
        for r in k + 1..m {
            let f = a[r][k] / a[k][k];
            a[r][k] = f;
            for c in k + 1..m {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut b: Vec<f64> = piv.iter().map(|&r| rhs[r]).collect();
        for k in 0..m {
            for r in k + 1..m {
                b[r] -= a[r][k] * b[k];
            }
        }
        for k in (0..m).rev() {
            for c in k + 1..m {
                b[k] -= a[k][c] * b[c];
            }
            b[k] /= a[k][k];
        }
        b
    };

    let nonbasic: Vec<usize> = (0..total).filter(|j| !basis.contains(j)).collect();
    let nn = nonbasic.len();
    for mask in 0u32..(1 << nn) {
        let mut rhs = vec![0.0; m];
        let mut base_obj = 0.0;
        for (k, &j) in nonbasic.iter().enumerate() {
            let v = if mask & (1 << k) != 0 { upper[j] } else { lower[j] };
            base_obj += obj[j] * v;
            if v != 0.0 {
                for r in 0..m {
                    rhs[r] -= cols[j][r] * v;
                }
            }
        }
        let xb = solve(&rhs);
        let mut feasible = true;
        let mut val = base_obj;
        for (k, &j) in basis.iter().enumerate() {
            if xb[k] < lower[j] - 1e-9 || xb[k] > upper[j] + 1e-9 {
                feasible = false;
                break;
            }
            val += obj[j] * xb[k];
        }
        if feasible && best.map_or(true, |b| val < b) {
            *best = Some(val);
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SparseLp {
    let mut b = LpBuilder::new();
    let mut cols = Vec::new();
    for j in 0..n {
        let l: f64 = rng.gen_range(-2.0..0.5);
        let u = l + rng.gen_range(0.0..3.0);
        let c = rng.gen_range(-1.0..1.0);
        cols.push(b.add_col(ColName::Other(format!("x{j}")), l, u, c, false));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for &c in &cols {
            if rng.gen_bool(0.45) {
                terms.push((c, rng.gen_range(-2.0..2.0)));
            }
        }
        if terms.is_empty() {
            terms.push((cols[i % n], 1.0));
        }
        let rl: f64 = rng.gen_range(-3.0..0.0);
        let ru = rl + rng.gen_range(0.0..4.0);
        b.add_row(RowName::Other(format!("r{i}")), rl, ru, &terms);
    }
    b.build().unwrap()
}

#[test]
fn bound_only_lp() {
    let mut b = LpBuilder::new();
    b.add_col(ColName::Other("x".into()), 1.0, 2.0, 1.0, false);
    let lp = b.build().unwrap();
    let sol = solve_lp(&lp, None).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 1.0).abs() < 1e-9);
    assert!((sol.primal[0] - 1.0).abs() < 1e-9);
}

#[test]
fn triangle_lp() {
    let mut b = LpBuilder::new();
    let x = b.add_col(ColName::Other("x".into()), 0.0, 1.0, -1.0, false);
    let y = b.add_col(ColName::Other("y".into()), 0.0, 1.0, -1.0, false);
    b.add_row(RowName::Other("cap".into()), f64::NEG_INFINITY, 1.0, &[(x, 1.0), (y, 1.0)]);
    let lp = b.build().unwrap();
    let sol = solve_lp(&lp, None).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-9);
}

#[test]
fn unbounded_lp_detected() {
    let mut b = LpBuilder::new();
    let x = b.add_col(ColName::Other("x".into()), 0.0, f64::INFINITY, -1.0, false);
    b.add_row(RowName::Other("r".into()), f64::NEG_INFINITY, 10.0, &[(x, -1.0)]);
    let lp = b.build().unwrap();
    let sol = solve_lp(&lp, None).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
}

#[test]
fn objective_matches_vertex_enumeration_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut solved = 0;
    let mut infeasible = 0;
    for trial in 0..8 {
        let lp = random_lp(&mut rng, 6, 10);
        let oracle = enumerate_optimum(&lp);
        let sol = solve_lp(&lp, None).unwrap();
        match oracle {
            Some(opt) => {
                assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
                assert!(
                    (sol.objective - opt).abs() <= 1e-7 * (1.0 + opt.abs()),
                    "trial {trial}: simplex {} vs oracle {}",
                    sol.objective,
                    opt
                );
                solved += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "trial {trial}");
                infeasible += 1;
            }
        }
    }
    assert!(solved >= 3, "want a healthy mix, got {solved} solved / {infeasible} infeasible");
}

#[test]
fn duality_gap_closes_at_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let lp = random_lp(&mut rng, 5, 9);
        let sol = solve_lp(&lp, None).unwrap();
        if sol.status == LpStatus::Optimal {
            let gap = sol.objective - sol.dual_objective(&lp);
            assert!(
                gap.abs() <= 1e-7 * (1.0 + sol.objective.abs()),
                "gap {gap} at objective {}",
                sol.objective
            );
        }
    }
}

#[test]
fn warm_and_cold_agree_over_500_bound_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    'outer: while done < 500 {
        let lp = random_lp(&mut rng, 6, 10);
        let base = solve_lp(&lp, None).unwrap();
        if base.status != LpStatus::Optimal {
            continue;
        }
        for _ in 0..10 {
            if done >= 500 {
                break 'outer;
            }
            let col = rng.gen_range(0..lp.n_cols());
            let (l, u) = (lp.col_lower[col], lp.col_upper[col]);
            let (nl, nu) = match rng.gen_range(0..4) {
                0 => (l, l + (u - l) * rng.gen_range(0.0..1.0)), // tighten upper
                1 => (l + (u - l) * rng.gen_range(0.0..1.0), u), // tighten lower
                2 => {
                    let v = l + (u - l) * rng.gen_range(0.0..=1.0);
                    (v, v) // fix
                }
                _ => (l - rng.gen_range(0.0..1.0), u + rng.gen_range(0.0..1.0)), // relax
            };
            let mut cold_lp = lp.clone();
            cold_lp.col_lower[col] = nl;
            cold_lp.col_upper[col] = nu;
            let cold = solve_lp(&cold_lp, None).unwrap();
            let warm = reoptimize_after_bound_change(&lp, &base.basis, col, (nl, nu)).unwrap();
            assert_eq!(warm.status, cold.status, "col {col} bounds [{nl},{nu}]");
            if warm.status == LpStatus::Optimal {
                assert!(
                    (warm.objective - cold.objective).abs()
                        <= 1e-7 * (1.0 + cold.objective.abs()),
                    "warm {} cold {}",
                    warm.objective,
                    cold.objective
                );
            }
            done += 1;
        }
    }
    assert_eq!(done, 500);
}

#[test]
fn tightening_nonbinding_bound_keeps_solution() {
    let mut b = LpBuilder::new();
    let x = b.add_col(ColName::Other("x".into()), 0.0, 10.0, 1.0, false);
    let y = b.add_col(ColName::Other("y".into()), 0.0, 10.0, 2.0, false);
    b.add_row(RowName::Other("r".into()), 3.0, f64::INFINITY, &[(x, 1.0), (y, 1.0)]);
    let lp = b.build().unwrap();
    let base = solve_lp(&lp, None).unwrap();
    assert!((base.objective - 3.0).abs() < 1e-9); // x = 3, y = 0
    // upper bound of y is nowhere near binding
    let warm = reoptimize_after_bound_change(&lp, &base.basis, y, (0.0, 5.0)).unwrap();
    assert_eq!(warm.status, LpStatus::Optimal);
    assert!((warm.objective - 3.0).abs() < 1e-9);
    assert_eq!(warm.iterations, 0, "no pivots expected");
}

#[test]
fn fixing_outside_feasible_region_is_infeasible() {
    let mut b = LpBuilder::new();
    let x = b.add_col(ColName::Other("x".into()), 0.0, 4.0, 1.0, false);
    let y = b.add_col(ColName::Other("y".into()), 0.0, 4.0, 1.0, false);
    b.add_row(RowName::Other("sum".into()), 6.0, 6.0, &[(x, 1.0), (y, 1.0)]);
    let lp = b.build().unwrap();
    let base = solve_lp(&lp, None).unwrap();
    assert_eq!(base.status, LpStatus::Optimal);
    // x fixed to 1 forces y = 5 > 4
    let warm = reoptimize_after_bound_change(&lp, &base.basis, x, (1.0, 1.0)).unwrap();
    assert_eq!(warm.status, LpStatus::Infeasible);
}

#[test]
fn degenerate_fuzz_terminates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..60 {
        let mut b = LpBuilder::new();
        let n = rng.gen_range(4..9);
        let mut cols = Vec::new();
        for j in 0..n {
            // many identical bounds and zero-width ranges to provoke degeneracy
            let l = [0.0, 0.0, 1.0][rng.gen_range(0..3)];
            let u = l + [0.0, 0.0, 1.0, 2.0][rng.gen_range(0..4)];
            cols.push(b.add_col(
                ColName::Other(format!("x{j}")),
                l,
                u,
                [0.0, 1.0, -1.0][rng.gen_range(0..3)],
                false,
            ));
        }
        for i in 0..rng.gen_range(2..6) {
            let mut terms = Vec::new();
            for &c in &cols {
                if rng.gen_bool(0.5) {
                    terms.push((c, [1.0, -1.0, 2.0][rng.gen_range(0..3)]));
                }
            }
            if terms.is_empty() {
                terms.push((cols[0], 1.0));
            }
            let rl = [0.0, 0.0, 1.0, f64::NEG_INFINITY][rng.gen_range(0..4)];
            let ru = if rl.is_finite() {
                rl + [0.0, 1.0][rng.gen_range(0..2)]
            } else {
                [0.0, 2.0][rng.gen_range(0..2)]
            };
            b.add_row(RowName::Other(format!("r{i}")), rl, ru, &terms);
        }
        let lp = b.build().unwrap();
        let sol = solve_lp(&lp, None).unwrap();
        assert!(
            matches!(sol.status, LpStatus::Optimal | LpStatus::Infeasible),
            "status {:?}",
            sol.status
        );
        if sol.status == LpStatus::Optimal {
            assert!(lp.max_infeasibility(&sol.primal) <= 1e-6);
        }
    }
}
