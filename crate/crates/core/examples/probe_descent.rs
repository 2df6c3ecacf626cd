use dedvpe_core::milp::{build_milp, decode_outputs};
use dedvpe_core::model::{Instance, UnitParams};
use dedvpe_core::simplex::{LpStatus, Simplex, SimplexOptions};
use std::time::Instant;

fn u(alpha: f64, beta: f64, gamma: f64, e: f64, f: f64, p_min: f64, p_max: f64, r: f64) -> UnitParams {
    UnitParams { alpha, beta, gamma, e, f, p_min, p_max, ramp_up: r, ramp_down: r, initial_output: None }
}

fn main() {
    let units = vec![
        u(25.0, 2.0, 0.008, 100.0, 0.042, 10.0, 75.0, 30.0),
        u(60.0, 1.8, 0.003, 140.0, 0.040, 20.0, 125.0, 30.0),
        u(100.0, 2.1, 0.0012, 160.0, 0.038, 30.0, 175.0, 40.0),
        u(120.0, 2.0, 0.001, 180.0, 0.037, 40.0, 250.0, 50.0),
        u(40.0, 1.8, 0.0015, 200.0, 0.035, 50.0, 300.0, 50.0),
    ];
    let demand = vec![410.,435.,475.,530.,558.,608.,626.,654.,690.,704.,720.,740.,704.,690.,654.,580.,558.,608.,654.,704.,680.,605.,527.,463.];
    let inst = Instance::new(units, demand);
    let model = build_milp(&inst, 4, false).unwrap();
    let mut lp = Simplex::new(&model.lp, SimplexOptions::default()).unwrap();
    let t0 = Instant::now();
    let sol = lp.solve_from(None).unwrap();
    println!("root obj {:.2}", sol.objective + model.lp.obj_const);

    // initial picks: segment containing the relaxation output
    let n = model.n_units; let nt = model.n_periods;
    let mut picks = vec![vec![0usize; nt]; n];
    for i in 0..n { for t in 0..nt {
        picks[i][t] = model.tables[i].segment_of(sol.primal[model.p_col[i][t]]);
    }}
    let apply = |lp: &mut Simplex, picks: &Vec<Vec<usize>>| {
        for i in 0..n { let l_count = model.tables[i].segments; for t in 0..nt {
            for l in 0..l_count {
                let v = if l == picks[i][t] { 1.0 } else { 0.0 };
                lp.set_col_bounds(model.z_col[i][t] + l, v, v);
            }
        }}
    };
    apply(&mut lp, &picks);
    let mut best = lp.resolve().unwrap();
    assert_eq!(best.status, LpStatus::Optimal);
    let mut best_obj = best.objective + model.lp.obj_const;
    println!("fix-LP obj {:.2} ({:?})", best_obj, t0.elapsed());

    // coordinate descent over segment picks
    let mut resolves = 0usize;
    for sweep in 0..6 {
        let mut improved = false;
        for i in 0..n {
            let l_count = model.tables[i].segments;
            for t in 0..nt {
                let cur = picks[i][t];
                for cand in [cur.wrapping_sub(1), cur + 1] {
                    if cand >= l_count { continue; }
                    picks[i][t] = cand;
                    apply(&mut lp, &picks);
                    let trial = lp.resolve().unwrap();
                    resolves += 1;
                    let obj = trial.objective + model.lp.obj_const;
                    if trial.status == LpStatus::Optimal && obj < best_obj - 1e-7 {
                        best_obj = obj; best = trial; improved = true;
                        break;
                    } else {
                        picks[i][t] = cur;
                    }
                }
            }
        }
        println!("sweep {sweep}: obj {:.2}  resolves {resolves}  t={:?}", best_obj, t0.elapsed());
        if !improved { break; }
    }
    let sched = decode_outputs(&model, &best.primal).unwrap();
    println!("final PWL {:.2}; exact cost {:.4}", best_obj, dedvpe_core::cost::total_cost(&inst, &sched).unwrap());
    println!("gap vs root: {:.4}", (best_obj - (sol.objective + model.lp.obj_const)) / best_obj);
}
