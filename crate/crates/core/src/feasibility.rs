//! Schedule auditing: power balance, bounds, ramps, reserve, and the
//! per-period balance violation metric.

use crate::error::DedError;
use crate::model::{Instance, Schedule};

/// Tolerances used by [`audit`] when deciding pass/fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed per-period balance residual (MW).
    pub balance: f64,
    /// Allowed bound violation (MW).
    pub bounds: f64,
    /// Allowed ramp violation (MW).
    pub ramps: f64,
    /// Allowed reserve shortfall (MW).
    pub reserve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        // Looser than what the interior-point refinement achieves in practice,
        // tight enough to catch genuine constraint violations.
        Tolerances {
            balance: 1e-5,
            bounds: 1e-6,
            ramps: 1e-6,
            reserve: 1e-6,
        }
    }
}

/// One bound or ramp violation, localized to a unit and period.
#[derive(Debug, Clone, PartialEq)]
pub struct CellViolation {
    /// 1-based unit index.
    pub unit: usize,
    /// 1-based period index.
    pub period: usize,
    /// Signed excess in MW (positive above an upper limit, negative below a lower one).
    pub amount: f64,
}

/// Full audit result for a schedule against an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Transmission loss per period (MW); zeros when the instance has no B matrix.
    pub loss: Vec<f64>,
    /// Absolute balance residual per period (MW).
    pub balance_violation: Vec<f64>,
    pub bound_violations: Vec<CellViolation>,
    pub ramp_violations: Vec<CellViolation>,
    /// Reserve shortfall per period (MW), empty when reserve is not enforced.
    pub reserve_shortfall: Vec<f64>,
    pub max_balance_violation: f64,
    pub tolerances: Tolerances,
    /// True iff every violation is within its tolerance.
    pub pass: bool,
}

/// Quadratic transmission loss `P' B P` for one period's outputs.
pub fn transmission_loss(inst: &Instance, outputs: &[f64]) -> Result<f64, DedError> {
    let b = inst
        .b_matrix
        .as_ref()
        .ok_or_else(|| DedError::Config("transmission loss requires a B matrix".into()))?;
    Ok(quad_form(b, outputs))
}

pub(crate) fn quad_form(b: &[Vec<f64>], p: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, row) in b.iter().enumerate() {
        let mut acc = 0.0;
        for (j, &bij) in row.iter().enumerate() {
            acc += bij * p[j];
        }
        total += p[i] * acc;
    }
    total
}

/// Per-period absolute power balance residual `|sum P - D - P'BP|`.
///
/// The loss term is zero when the instance carries no B matrix.
pub fn balance_violation(inst: &Instance, sched: &Schedule) -> Vec<f64> {
    (0..inst.n_periods())
        .map(|t| {
            let p = sched.period(t);
            let gen: f64 = p.iter().sum();
            let loss = inst.b_matrix.as_ref().map_or(0.0, |b| quad_form(b, &p));
            (gen - inst.demand[t] - loss).abs()
        })
        .collect()
}

/// Reserve a unit can deliver at output `p`: headroom capped by ramp capability.
fn reserve_capability(p_max: f64, ramp_up: f64, tau: f64, p: f64) -> f64 {
    (p_max - p).min(tau * ramp_up).max(0.0)
}

/// Audits a schedule against every modeled constraint.
pub fn audit(inst: &Instance, sched: &Schedule, tol: Tolerances) -> Result<AuditReport, DedError> {
    if !sched.dims_match(inst) {
        return Err(DedError::InvalidInstance(format!(
            "schedule is {}x{}, instance is {}x{}",
            sched.n_units(),
            sched.n_periods(),
            inst.n_units(),
            inst.n_periods()
        )));
    }
    let n_t = inst.n_periods();

    let mut loss = vec![0.0; n_t];
    if let Some(b) = &inst.b_matrix {
        for (t, l) in loss.iter_mut().enumerate() {
            *l = quad_form(b, &sched.period(t));
        }
    }
    let balance: Vec<f64> = (0..n_t)
        .map(|t| {
            let gen: f64 = sched.outputs.iter().map(|row| row[t]).sum();
            (gen - inst.demand[t] - loss[t]).abs()
        })
        .collect();

    let mut bound_violations = Vec::new();
    let mut ramp_violations = Vec::new();
    for (i, u) in inst.units.iter().enumerate() {
        for t in 0..n_t {
            let p = sched.outputs[i][t];
            if p > u.p_max {
                bound_violations.push(CellViolation { unit: i + 1, period: t + 1, amount: p - u.p_max });
            } else if p < u.p_min {
                bound_violations.push(CellViolation { unit: i + 1, period: t + 1, amount: p - u.p_min });
            }
            // ramp between t-1 and t; at t = 0 only when an initial output exists
            let prev = if t == 0 { u.initial_output } else { Some(sched.outputs[i][t - 1]) };
            if let Some(prev) = prev {
                let delta = p - prev;
                if delta > u.ramp_up {
                    ramp_violations.push(CellViolation { unit: i + 1, period: t + 1, amount: delta - u.ramp_up });
                } else if -delta > u.ramp_down {
                    // negative amount: excess downward movement
                    ramp_violations.push(CellViolation { unit: i + 1, period: t + 1, amount: delta + u.ramp_down });
                }
            }
        }
    }

    let mut reserve_shortfall = Vec::new();
    if inst.reserve_enabled {
        let req = inst
            .reserve_req
            .as_ref()
            .ok_or_else(|| DedError::Config("reserve enabled without requirements".into()))?;
        let tau = inst
            .tau
            .ok_or_else(|| DedError::Config("reserve enabled without tau".into()))?;
        for t in 0..n_t {
            let avail: f64 = inst
                .units
                .iter()
                .enumerate()
                .map(|(i, u)| reserve_capability(u.p_max, u.ramp_up, tau, sched.outputs[i][t]))
                .sum();
            reserve_shortfall.push((req[t] - avail).max(0.0));
        }
    }

    let max_balance = balance.iter().cloned().fold(0.0, f64::max);
    let pass = max_balance <= tol.balance
        && bound_violations.iter().all(|v| v.amount.abs() <= tol.bounds)
        && ramp_violations.iter().all(|v| v.amount.abs() <= tol.ramps)
        && reserve_shortfall.iter().all(|&s| s <= tol.reserve);

    Ok(AuditReport {
        loss,
        balance_violation: balance,
        bound_violations,
        ramp_violations,
        reserve_shortfall,
        max_balance_violation: max_balance,
        tolerances: tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitParams;

    fn unit(p_min: f64, p_max: f64, ramp: f64) -> UnitParams {
        UnitParams {
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            e: 0.0,
            f: 0.1,
            p_min,
            p_max,
            ramp_up: ramp,
            ramp_down: ramp,
            initial_output: None,
        }
    }

    #[test]
    fn loss_quadratic_form_basics() {
        let mut inst = Instance::new(vec![unit(0.0, 10.0, 100.0)], vec![5.0]);
        inst.b_matrix = Some(vec![vec![2e-4]]);
        assert_eq!(transmission_loss(&inst, &[0.0]).unwrap(), 0.0);
        let p = 7.0;
        assert!((transmission_loss(&inst, &[p]).unwrap() - 2e-4 * p * p).abs() < 1e-15);
    }

    #[test]
    fn missing_b_matrix_is_a_config_error() {
        let inst = Instance::new(vec![unit(0.0, 10.0, 100.0)], vec![5.0]);
        assert!(transmission_loss(&inst, &[1.0]).is_err());
    }

    #[test]
    fn exact_balance_has_zero_violation() {
        let inst = Instance::new(vec![unit(0.0, 10.0, 100.0), unit(0.0, 10.0, 100.0)], vec![8.0, 6.0]);
        let sched = Schedule::new(vec![vec![5.0, 3.0], vec![3.0, 3.0]]);
        let v = balance_violation(&inst, &sched);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn transpose_form_matches_for_symmetric_b() {
        let b = vec![vec![3e-4, 1e-4], vec![1e-4, 5e-4]];
        let bt = vec![vec![3e-4, 1e-4], vec![1e-4, 5e-4]];
        let p = [3.7, 9.2];
        assert_eq!(quad_form(&b, &p), quad_form(&bt, &p));
    }

    #[test]
    fn constructed_bound_violation_is_reported() {
        let inst = Instance::new(vec![unit(0.0, 10.0, 100.0); 3], vec![15.0; 8]);
        let mut sched = Schedule::new(vec![vec![5.0; 8]; 3]);
        sched.outputs[1][6] = 15.0; // unit 2, period 7, 5 MW over
        let rep = audit(&inst, &sched, Tolerances::default()).unwrap();
        assert_eq!(rep.bound_violations.len(), 1);
        let v = &rep.bound_violations[0];
        assert_eq!((v.unit, v.period), (2, 7));
        assert!((v.amount - 5.0).abs() < 1e-12);
        assert!(!rep.pass);
    }

    #[test]
    fn constructed_ramp_violation_is_reported() {
        let inst = Instance::new(vec![unit(0.0, 100.0, 10.0)], vec![40.0, 51.0]);
        let sched = Schedule::new(vec![vec![40.0, 51.0]]); // +11 against UR = 10
        let rep = audit(&inst, &sched, Tolerances::default()).unwrap();
        assert_eq!(rep.ramp_violations.len(), 1);
        assert!((rep.ramp_violations[0].amount - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ramp_at_first_period_only_with_initial_output() {
        let mut u = unit(0.0, 100.0, 10.0);
        let inst_free = Instance::new(vec![u.clone()], vec![90.0]);
        let sched = Schedule::new(vec![vec![90.0]]);
        assert!(audit(&inst_free, &sched, Tolerances::default()).unwrap().pass);

        u.initial_output = Some(50.0);
        let inst_coupled = Instance::new(vec![u], vec![90.0]);
        let rep = audit(&inst_coupled, &sched, Tolerances::default()).unwrap();
        assert_eq!(rep.ramp_violations.len(), 1);
        assert!((rep.ramp_violations[0].amount - 30.0).abs() < 1e-12);
    }

    #[test]
    fn reserve_monotone_in_output() {
        let tau = 0.25;
        let cap_hi = reserve_capability(100.0, 40.0, tau, 95.0);
        let cap_lo = reserve_capability(100.0, 40.0, tau, 60.0);
        assert!(cap_lo >= cap_hi);
        assert!((cap_hi - 5.0).abs() < 1e-12);
        assert!((cap_lo - 10.0).abs() < 1e-12); // capped by tau * UR
    }

    #[test]
    fn reserve_shortfall_detected() {
        let mut inst = Instance::new(vec![unit(0.0, 10.0, 4.0); 2], vec![18.0]);
        inst.reserve_enabled = true;
        inst.reserve_req = Some(vec![3.0]);
        inst.tau = Some(0.5);
        let sched = Schedule::new(vec![vec![9.0], vec![9.0]]);
        let rep = audit(&inst, &sched, Tolerances::default()).unwrap();
        // each unit offers min(1, 2) = 1 MW; requirement 3 MW -> shortfall 1 MW
        assert!((rep.reserve_shortfall[0] - 1.0).abs() < 1e-12);
        assert!(!rep.pass);
    }
}
