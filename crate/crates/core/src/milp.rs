//! Piecewise-linear MILP of the loss-free dispatch problem.
//!
//! Per unit and period the output is split across segment variables with
//! one-hot selector binaries:
//!
//! ```text
//!   minimize   sum k_l S(l,i,t) + b_l Z(l,i,t)
//!   s.t.       P(i,t) = sum_l S(l,i,t)                    link
//!              a_{l-1} Z <= S(l,i,t) <= a_l Z             segment bounds
//!              sum_l Z(l,i,t) = 1,  Z binary              convexity
//!              sum_i P(i,t) = D_t                         balance (loss-free)
//!              -DR <= P(i,t) - P(i,t-1) <= UR             ramps
//!              [ SR(i,t) + P(i,t) <= p_max, SR <= tau UR,
//!                sum_i SR(i,t) >= R_t ]                   reserve, optional
//! ```
//!
//! Generation limits are carried as column bounds on `P(i,t)`. The builder
//! never includes transmission loss; loss enters only through the NLP
//! refinement stage.
//!
//! Column/row counts follow closed forms (tested against construction):
//! columns `sum_{i,t} (1 + 2 L_i)` plus `N T` reserve columns when enabled;
//! rows `T + sum_{i,t} (2 + 2 L_i)` over units with `L_i >= 1`, plus one ramp
//! row per unit and period transition (including `t = 1` when an initial
//! output is given), plus `N T + T` reserve rows when enabled.

use crate::cost::{build_segments, SegmentTable};
use crate::error::DedError;
use crate::model::{Instance, Schedule};
use crate::simplex::LpSolution;
use crate::sparselp::{ColName, LpBuilder, RowName, SparseLp};

/// Decode tolerances.
const LINK_TOL: f64 = 1e-7;
const INTEGRALITY_TOL: f64 = 1e-6;

/// A built MILP plus the maps from columns back to schedule positions.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: SparseLp,
    /// The instance the model was built from.
    pub instance: Instance,
    pub n_units: usize,
    pub n_periods: usize,
    /// Whether reserve rows were included.
    pub reserve: bool,
    /// Segment tables the objective was built from, one per unit.
    pub tables: Vec<SegmentTable>,
    /// Column of `P(i,t)`: `p_col[i][t]`.
    pub p_col: Vec<Vec<usize>>,
    /// First segment column of `(i,t)`; segments are contiguous, selectors follow.
    pub seg_col: Vec<Vec<usize>>,
    pub z_col: Vec<Vec<usize>>,
}

impl MilpModel {
    /// All selector (binary) columns.
    pub fn binary_cols(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, per_t) in self.z_col.iter().enumerate() {
            let l = self.tables[i].segments;
            for &z0 in per_t {
                out.extend(z0..z0 + l);
            }
        }
        out.sort_unstable();
        out
    }

    /// Maps a selector column back to `(unit, period, segment)`, zero-based.
    pub fn selector_of(&self, col: usize) -> Option<(usize, usize, usize)> {
        match self.lp.col_names.get(col) {
            Some(ColName::Selector { seg, unit, period }) => Some((unit - 1, period - 1, seg - 1)),
            _ => None,
        }
    }
}

/// Builds the loss-free piecewise-linear MILP.
pub fn build_milp(inst: &Instance, m: usize, reserve: bool) -> Result<MilpModel, DedError> {
    crate::model::validated(inst)?;
    if reserve && !inst.reserve_enabled {
        return Err(DedError::Config(
            "reserve requested but the instance has no reserve data enabled".into(),
        ));
    }
    let n = inst.n_units();
    let nt = inst.n_periods();
    let tables: Vec<SegmentTable> = inst
        .units
        .iter()
        .map(|u| build_segments(u, m))
        .collect::<Result<_, _>>()?;

    let mut b = LpBuilder::new();
    let mut obj_const = 0.0;
    let mut p_col = vec![vec![0usize; nt]; n];
    let mut seg_col = vec![vec![0usize; nt]; n];
    let mut z_col = vec![vec![0usize; nt]; n];

    for t in 0..nt {
        for i in 0..n {
            let u = &inst.units[i];
            let tab = &tables[i];
            let l_count = tab.segments;
            let p = b.add_col(
                ColName::Output { unit: i + 1, period: t + 1 },
                u.p_min,
                u.p_max,
                0.0,
                false,
            );
            p_col[i][t] = p;
            if l_count == 0 {
                // fixed-output unit: constant cost, no segments
                obj_const += tab.intercepts[0];
                continue;
            }
            for l in 0..l_count {
                let c = b.add_col(
                    ColName::Segment { seg: l + 1, unit: i + 1, period: t + 1 },
                    (0.0f64).min(tab.breaks[l]),
                    (0.0f64).max(tab.breaks[l + 1]),
                    tab.slopes[l],
                    false,
                );
                if l == 0 {
                    seg_col[i][t] = c;
                }
            }
            for l in 0..l_count {
                let c = b.add_col(
                    ColName::Selector { seg: l + 1, unit: i + 1, period: t + 1 },
                    0.0,
                    1.0,
                    tab.intercepts[l],
                    true,
                );
                if l == 0 {
                    z_col[i][t] = c;
                }
            }
        }
    }

    // rows, same period-major sweep
    for t in 0..nt {
        let balance: Vec<(usize, f64)> = (0..n).map(|i| (p_col[i][t], 1.0)).collect();
        b.add_row(
            RowName::Balance { period: t + 1 },
            inst.demand[t],
            inst.demand[t],
            &balance,
        );
        for i in 0..n {
            let tab = &tables[i];
            let l_count = tab.segments;
            if l_count == 0 {
                continue;
            }
            let mut link = vec![(p_col[i][t], 1.0)];
            for l in 0..l_count {
                link.push((seg_col[i][t] + l, -1.0));
            }
            b.add_row(RowName::Link { unit: i + 1, period: t + 1 }, 0.0, 0.0, &link);
            let conv: Vec<(usize, f64)> = (0..l_count).map(|l| (z_col[i][t] + l, 1.0)).collect();
            b.add_row(RowName::Convexity { unit: i + 1, period: t + 1 }, 1.0, 1.0, &conv);
            for l in 0..l_count {
                let s = seg_col[i][t] + l;
                let z = z_col[i][t] + l;
                b.add_row(
                    RowName::SegLower { seg: l + 1, unit: i + 1, period: t + 1 },
                    0.0,
                    f64::INFINITY,
                    &[(s, 1.0), (z, -tab.breaks[l])],
                );
                b.add_row(
                    RowName::SegUpper { seg: l + 1, unit: i + 1, period: t + 1 },
                    f64::NEG_INFINITY,
                    0.0,
                    &[(s, 1.0), (z, -tab.breaks[l + 1])],
                );
            }
        }
    }
    for i in 0..n {
        let u = &inst.units[i];
        for t in 0..nt {
            if t == 0 {
                if let Some(p0) = u.initial_output {
                    b.add_row(
                        RowName::Ramp { unit: i + 1, period: 1 },
                        p0 - u.ramp_down,
                        p0 + u.ramp_up,
                        &[(p_col[i][0], 1.0)],
                    );
                }
            } else {
                b.add_row(
                    RowName::Ramp { unit: i + 1, period: t + 1 },
                    -u.ramp_down,
                    u.ramp_up,
                    &[(p_col[i][t], 1.0), (p_col[i][t - 1], -1.0)],
                );
            }
        }
    }
    if reserve {
        let req = inst.reserve_req.as_ref().unwrap();
        let tau = inst.tau.unwrap();
        for t in 0..nt {
            let mut sr_cols = Vec::with_capacity(n);
            for i in 0..n {
                let u = &inst.units[i];
                let sr = b.add_col(
                    ColName::Reserve { unit: i + 1, period: t + 1 },
                    0.0,
                    tau * u.ramp_up,
                    0.0,
                    false,
                );
                sr_cols.push(sr);
                b.add_row(
                    RowName::Headroom { unit: i + 1, period: t + 1 },
                    f64::NEG_INFINITY,
                    u.p_max,
                    &[(sr, 1.0), (p_col[i][t], 1.0)],
                );
            }
            let terms: Vec<(usize, f64)> = sr_cols.iter().map(|&c| (c, 1.0)).collect();
            b.add_row(RowName::ReserveReq { period: t + 1 }, req[t], f64::INFINITY, &terms);
        }
    }

    b.set_obj_const(obj_const);

    // static feasibility of the balance rows against fleet capacity
    let min: f64 = inst.units.iter().map(|u| u.p_min).sum();
    let max: f64 = inst.units.iter().map(|u| u.p_max).sum();
    for (t, &d) in inst.demand.iter().enumerate() {
        if d < min || d > max {
            return Err(DedError::Build(format!(
                "demand {d} MW in period {} is outside the fleet range [{min}, {max}]",
                t + 1
            )));
        }
    }

    let lp = b.build()?;
    Ok(MilpModel {
        lp,
        instance: inst.clone(),
        n_units: n,
        n_periods: nt,
        reserve,
        tables,
        p_col,
        seg_col,
        z_col,
    })
}

/// Reads the schedule out of an LP solution over a [`MilpModel`].
///
/// Fails when selector binaries are fractional, a convexity row is violated,
/// or the linking identity `P = sum_l S_l` drifts.
pub fn decode(model: &MilpModel, sol: &LpSolution) -> Result<Schedule, DedError> {
    decode_outputs(model, &sol.primal)
}

/// [`decode`] over a raw primal vector.
pub fn decode_outputs(model: &MilpModel, primal: &[f64]) -> Result<Schedule, DedError> {
    if primal.len() != model.lp.n_cols() {
        return Err(DedError::Decode(format!(
            "solution has {} columns, model has {}",
            primal.len(),
            model.lp.n_cols()
        )));
    }
    let mut outputs = vec![vec![0.0; model.n_periods]; model.n_units];
    for i in 0..model.n_units {
        let l_count = model.tables[i].segments;
        for t in 0..model.n_periods {
            let p = primal[model.p_col[i][t]];
            outputs[i][t] = p;
            if l_count == 0 {
                continue;
            }
            let mut seg_sum = 0.0;
            let mut z_sum = 0.0;
            for l in 0..l_count {
                seg_sum += primal[model.seg_col[i][t] + l];
                let z = primal[model.z_col[i][t] + l];
                if z > INTEGRALITY_TOL && z < 1.0 - INTEGRALITY_TOL {
                    return Err(DedError::Decode(format!(
                        "fractional selector Z({},{},{}) = {z}",
                        l + 1,
                        i + 1,
                        t + 1
                    )));
                }
                z_sum += z;
            }
            if (z_sum - 1.0).abs() > INTEGRALITY_TOL * l_count as f64 {
                return Err(DedError::Decode(format!(
                    "convexity violated for unit {} period {}: sum z = {z_sum}",
                    i + 1,
                    t + 1
                )));
            }
            if (p - seg_sum).abs() > LINK_TOL * (1.0 + p.abs()) {
                return Err(DedError::Decode(format!(
                    "link violated for unit {} period {}: P = {p}, sum S = {seg_sum}",
                    i + 1,
                    t + 1
                )));
            }
        }
    }
    Ok(Schedule::new(outputs))
}

/// Piecewise-linear total cost of a schedule under the model's chord tables.
pub fn pwl_total_cost(tables: &[SegmentTable], sched: &Schedule) -> f64 {
    let mut total = 0.0;
    for (i, tab) in tables.iter().enumerate() {
        for t in 0..sched.n_periods() {
            total += tab.eval(sched.outputs[i][t]);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitParams;
    use crate::simplex::{solve_lp, LpBasis, LpStatus};

    fn unit(p_min: f64, p_max: f64, f: f64) -> UnitParams {
        UnitParams {
            alpha: 10.0,
            beta: 2.0,
            gamma: 0.01,
            e: 8.0,
            f,
            p_min,
            p_max,
            ramp_up: 1e6,
            ramp_down: 1e6,
            initial_output: None,
        }
    }

    #[test]
    fn single_segment_collapse() {
        // choose f so that M f range / pi <= 1: one chord, one binary
        let u = unit(1.0, 2.0, 0.5);
        let inst = Instance::new(vec![u], vec![1.5]);
        let model = build_milp(&inst, 1, false).unwrap();
        assert_eq!(model.tables[0].segments, 1);
        // columns: P, S(1), Z(1)
        assert_eq!(model.lp.n_cols(), 3);
        let sol = solve_lp(&model.lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // convexity forces z = 1 even in the relaxation
        let z = sol.primal[model.z_col[0][0]];
        assert!((z - 1.0).abs() < 1e-9);
        let sched = decode(&model, &sol).unwrap();
        assert!((sched.outputs[0][0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn column_and_row_counts_match_closed_form() {
        let units = vec![
            unit(10.0, 75.0, 0.042),
            unit(20.0, 125.0, 0.04),
            unit(30.0, 175.0, 0.038),
        ];
        let demand = vec![150.0; 24];
        let inst = Instance::new(units, demand);
        let model = build_milp(&inst, 4, false).unwrap();
        let l: Vec<usize> = model.tables.iter().map(|t| t.segments).collect();
        let (n, nt) = (3, 24);
        let sum_l: usize = l.iter().sum();
        let expect_cols = nt * (n + 2 * sum_l);
        let expect_rows = nt + nt * (2 * n + 2 * sum_l) + n * (nt - 1);
        assert_eq!(model.lp.n_cols(), expect_cols);
        assert_eq!(model.lp.n_rows(), expect_rows);
    }

    #[test]
    fn objective_at_breakpoint_schedule_matches_pwl_cost() {
        let u = unit(5.0, 9.0, 0.9);
        let inst = Instance::new(vec![u.clone(), u], vec![12.0, 14.0]);
        let model = build_milp(&inst, 2, false).unwrap();
        // snap a schedule to a breakpoint of unit 1, balance with unit 2
        let tab = &model.tables[0];
        let a = tab.breaks[1];
        let sched = Schedule::new(vec![vec![a, a], vec![12.0 - a, 14.0 - a]]);
        let mut x = vec![0.0; model.lp.n_cols()];
        for i in 0..2 {
            for t in 0..2 {
                let p = sched.outputs[i][t];
                x[model.p_col[i][t]] = p;
                let l = model.tables[i].segment_of(p);
                x[model.seg_col[i][t] + l] = p;
                x[model.z_col[i][t] + l] = 1.0;
            }
        }
        let lp_obj = model.lp.objective_value(&x);
        let pwl = pwl_total_cost(&model.tables, &sched);
        assert!(
            (lp_obj - pwl).abs() <= 1e-6 * (1.0 + pwl.abs()),
            "lp {lp_obj} vs pwl {pwl}"
        );
        assert!(model.lp.max_infeasibility(&x) <= 1e-9);
    }

    #[test]
    fn decode_rejects_fractional_selectors() {
        let u = unit(1.0, 3.0, 2.0);
        let inst = Instance::new(vec![u], vec![2.0]);
        let model = build_milp(&inst, 2, false).unwrap();
        assert!(model.tables[0].segments >= 2);
        let mut x = vec![0.0; model.lp.n_cols()];
        x[model.p_col[0][0]] = 2.0;
        x[model.seg_col[0][0]] = 1.0;
        x[model.seg_col[0][0] + 1] = 1.0;
        x[model.z_col[0][0]] = 0.5;
        x[model.z_col[0][0] + 1] = 0.5;
        let sol = fake_solution(&model, x);
        let err = decode(&model, &sol).unwrap_err();
        assert!(matches!(err, DedError::Decode(_)));
    }

    fn fake_solution(model: &MilpModel, x: Vec<f64>) -> LpSolution {
        LpSolution {
            status: LpStatus::Optimal,
            primal: x,
            dual: vec![0.0; model.lp.n_rows()],
            reduced_cost: vec![0.0; model.lp.n_cols()],
            objective: 0.0,
            iterations: 0,
            basis: LpBasis { basic: vec![], status: vec![] },
        }
    }

    #[test]
    fn hand_built_solution_decodes() {
        let u = unit(1.0, 5.0, 1.6);
        let inst = Instance::new(vec![u], vec![3.0]);
        let model = build_milp(&inst, 2, false).unwrap();
        let tab = &model.tables[0];
        let p = 3.0;
        let l = tab.segment_of(p);
        let mut x = vec![0.0; model.lp.n_cols()];
        x[model.p_col[0][0]] = p;
        x[model.seg_col[0][0] + l] = p;
        x[model.z_col[0][0] + l] = 1.0;
        let sol = fake_solution(&model, x);
        let sched = decode(&model, &sol).unwrap();
        assert_eq!(sched.outputs[0][0], p);
    }

    #[test]
    fn infeasible_static_bounds_rejected() {
        let u = unit(1.0, 2.0, 0.5);
        let inst = Instance::new(vec![u], vec![5.0]);
        assert!(matches!(build_milp(&inst, 1, false), Err(DedError::Build(_))));
    }
}
