use dedvpe_core::cost::build_segments;
use dedvpe_core::milp::pwl_total_cost;
use dedvpe_core::model::{Schedule, UnitParams};

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
    // published hybrid outputs for the 5-unit no-loss case (column-major below)
    let rows: Vec<[f64; 5]> = vec![
        [16.7925, 98.5398, 30.0000, 124.9079, 139.7598],
        [10.0000, 98.5398, 61.7925, 124.9079, 139.7598],
        [10.0000, 98.5398, 101.7925, 124.9079, 139.7598],
        [10.0000, 98.5398, 112.6735, 124.9079, 183.8788],
        [10.0000, 80.8990, 112.6735, 124.9079, 229.5196],
        [40.0000, 100.5398, 112.6735, 125.2671, 229.5196],
        [10.0000, 98.5398, 112.6735, 175.2671, 229.5196],
        [10.0000, 91.9911, 112.6735, 209.8158, 229.5196],
        [39.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [53.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [69.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [75.0000, 112.9911, 112.6735, 209.8158, 229.5196],
        [53.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [39.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [34.0000, 98.5398, 112.6735, 179.2671, 229.5196],
        [10.0000, 98.5398, 112.6735, 129.2671, 229.5196],
        [10.0000, 80.8990, 112.6735, 124.9079, 229.5196],
        [10.0000, 98.5398, 112.6735, 157.2671, 229.5196],
        [10.0000, 94.5398, 112.6735, 207.2671, 229.5196],
        [40.0000, 111.9911, 112.6735, 209.8158, 229.5196],
        [29.4513, 98.5398, 112.6735, 209.8158, 229.5196],
        [10.0000, 96.7800, 108.8846, 209.8158, 179.5196],
        [10.0000, 98.5398, 68.8846, 209.8158, 139.7598],
        [10.0000, 73.4244, 30.0000, 209.8158, 139.7598],
    ];
    let outputs: Vec<Vec<f64>> = (0..5).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    let sched = Schedule::new(outputs);
    let tables: Vec<_> = units.iter().map(|u| build_segments(u, 4).unwrap()).collect();
    for (i, t) in tables.iter().enumerate() {
        println!("unit {}: L = {}", i + 1, t.segments);
    }
    println!("PWL cost of published schedule (M=4): {:.4}", pwl_total_cost(&tables, &sched));
    let inst = dedvpe_core::model::Instance::new(units, rows.iter().map(|r| r.iter().sum()).collect());
    println!("exact cost of published schedule: {:.4}", dedvpe_core::cost::total_cost(&inst, &sched).unwrap());
}
