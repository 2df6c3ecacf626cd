use dedvpe_core::bnb::{solve_milp_with_progress, BnbConfig};
use dedvpe_core::milp::build_milp;
use dedvpe_core::model::{Instance, UnitParams};
use std::io::Write;
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
    eprintln!("built cols={} rows={}", model.lp.n_cols(), model.lp.n_rows());

    let t2 = Instant::now();
    let cfg = BnbConfig { rel_gap: 0.032, ..Default::default() };
    let mut last = Instant::now();
    let res = solve_milp_with_progress(&model, &cfg, &mut |p| {
        if last.elapsed().as_millis() > 500 {
            eprintln!("nodes={} bound={:.2} inc={:?} t={:?}", p.nodes, p.bound, p.incumbent, p.elapsed);
            std::io::stderr().flush().ok();
            last = Instant::now();
        }
    }).unwrap();
    eprintln!("bnb: {:?} status={:?} obj={:.4} bound={:.4} gap={:.5} nodes={}",
        t2.elapsed(), res.status, res.objective, res.best_bound, res.gap, res.nodes);
    let exact = dedvpe_core::cost::total_cost(&inst, res.schedule.as_ref().unwrap()).unwrap();
    eprintln!("exact cost of incumbent: {exact:.4}");
}
