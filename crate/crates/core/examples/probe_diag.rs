use dedvpe_core::milp::build_milp;
use dedvpe_core::model::{Instance, UnitParams};
use dedvpe_core::simplex::{solve_lp_with, SimplexOptions};
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
    let demand_full = vec![410.,435.,475.,530.,558.,608.,626.,654.,690.,704.,720.,740.,704.,690.,654.,580.,558.,608.,654.,704.,680.,605.,527.,463.];
    for t_len in [1usize, 2, 4, 8, 16, 24] {
        let inst = Instance::new(units.clone(), demand_full[..t_len].to_vec());
        let model = build_milp(&inst, 4, false).unwrap();
        let t1 = Instant::now();
        let opts = SimplexOptions { max_iterations: 200_000, ..Default::default() };
        let root = solve_lp_with(&model.lp, None, opts).unwrap();
        println!("T={t_len}: rows={} cols={} root {:?} status={:?} obj={:.2} iters={}",
            model.lp.n_rows(), model.lp.n_cols(), t1.elapsed(), root.status,
            root.objective + model.lp.obj_const, root.iterations);
    }
}
