use dedvpe_core::milp::{build_milp, decode_outputs};
use dedvpe_core::model::{Instance, UnitParams};
use dedvpe_core::simplex::{LpStatus, Simplex, SimplexOptions};

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
    let sol = lp.solve_from(None).unwrap();
    eprintln!("root: {:?} obj={:.2} iters={}", sol.status, sol.objective + model.lp.obj_const, sol.iterations);

    // fix all selectors to argmax-z and resolve
    for i in 0..model.n_units {
        let tab = &model.tables[i];
        for t in 0..model.n_periods {
            let mut pick = 0usize;
            let mut best_z = f64::NEG_INFINITY;
            for l in 0..tab.segments {
                let z = sol.primal[model.z_col[i][t] + l];
                if z > best_z { best_z = z; pick = l; }
            }
            for l in 0..tab.segments {
                let v = if l == pick { 1.0 } else { 0.0 };
                lp.set_col_bounds(model.z_col[i][t] + l, v, v);
            }
        }
    }
    let t = std::time::Instant::now();
    let fixed = lp.resolve().unwrap();
    eprintln!("fixed resolve: {:?} obj={:.2} iters={} time={:?}", fixed.status, fixed.objective + model.lp.obj_const, fixed.iterations, t.elapsed());
    if fixed.status == LpStatus::Optimal {
        match decode_outputs(&model, &fixed.primal) {
            Ok(s) => eprintln!("decoded ok; exact cost {:.2}", dedvpe_core::cost::total_cost(&inst, &s).unwrap()),
            Err(e) => eprintln!("decode failed: {e}"),
        }
    }
}
