//! Problem data: generating units, dispatch instances and schedules.
//!
//! An [`Instance`] holds everything a solver needs: the unit fleet, the
//! per-period load, an optional quadratic loss matrix and optional spinning
//! reserve data. Instances are immutable after construction and safe to share
//! across solver workers.

use crate::error::DedError;

/// Cost and operating data for a single thermal unit.
///
/// The generation cost of a unit at output `p` (MW) is
/// `alpha + beta*p + gamma*p^2 + e*|sin(f*(p - p_min))|`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitParams {
    /// Constant cost term ($).
    pub alpha: f64,
    /// Linear cost coefficient ($/MW).
    pub beta: f64,
    /// Quadratic cost coefficient ($/MW^2).
    pub gamma: f64,
    /// Valve ripple amplitude ($).
    pub e: f64,
    /// Valve ripple frequency (rad/MW).
    pub f: f64,
    /// Minimum output (MW).
    pub p_min: f64,
    /// Maximum output (MW).
    pub p_max: f64,
    /// Maximum per-period output increase (MW).
    pub ramp_up: f64,
    /// Maximum per-period output decrease (MW), stored as a nonnegative magnitude.
    pub ramp_down: f64,
    /// Output before the first period, if the first-period ramp is to be enforced.
    pub initial_output: Option<f64>,
}

impl UnitParams {
    /// Output range `p_max - p_min`.
    pub fn range(&self) -> f64 {
        self.p_max - self.p_min
    }
}

/// A dispatch problem: units, loads, optional losses and reserve.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub units: Vec<UnitParams>,
    /// Load demand per period (MW).
    pub demand: Vec<f64>,
    /// Optional symmetric N x N loss coefficient matrix (1/MW), row-major.
    pub b_matrix: Option<Vec<Vec<f64>>>,
    /// Spinning reserve requirement per period (MW), when reserve is modeled.
    pub reserve_req: Option<Vec<f64>>,
    /// Fraction of a period available to deliver reserve.
    pub tau: Option<f64>,
    /// Whether the reserve constraints are active.
    pub reserve_enabled: bool,
}

impl Instance {
    /// Instance without loss or reserve.
    pub fn new(units: Vec<UnitParams>, demand: Vec<f64>) -> Self {
        Instance {
            units,
            demand,
            b_matrix: None,
            reserve_req: None,
            tau: None,
            reserve_enabled: false,
        }
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_periods(&self) -> usize {
        self.demand.len()
    }
}

/// One violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Field or section the violation refers to, e.g. `units[3].p_min`.
    pub field: String,
    /// Human-readable description of the violated rule.
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

const B_SYMMETRY_TOL: f64 = 1e-12;

/// Checks every structural invariant of an instance and reports all failures.
///
/// The empty list means the instance is well formed. Validation is pure and
/// idempotent; it never mutates the instance.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field: &str, rule: String| {
        out.push(Violation {
            field: field.to_string(),
            rule,
        })
    };

    if inst.units.is_empty() {
        push("units", "at least one unit is required".into());
    }
    if inst.demand.is_empty() {
        push("demand", "at least one period is required".into());
    }
    for (i, u) in inst.units.iter().enumerate() {
        let field = |name: &str| format!("units[{}].{}", i + 1, name);
        if !(u.p_min <= u.p_max) {
            push(&field("p_min"), format!("p_min {} > p_max {}", u.p_min, u.p_max));
        }
        for (name, v) in [
            ("alpha", u.alpha),
            ("beta", u.beta),
            ("gamma", u.gamma),
            ("e", u.e),
            ("f", u.f),
            ("ramp_up", u.ramp_up),
            ("ramp_down", u.ramp_down),
        ] {
            if !(v >= 0.0) {
                push(&field(name), format!("must be nonnegative, got {v}"));
            }
        }
        if let Some(p0) = u.initial_output {
            if !p0.is_finite() {
                push(&field("initial_output"), format!("must be finite, got {p0}"));
            }
        }
    }
    for (t, d) in inst.demand.iter().enumerate() {
        if !(*d > 0.0) {
            push(&format!("demand[{}]", t + 1), format!("must be positive, got {d}"));
        }
    }
    if let Some(b) = &inst.b_matrix {
        let n = inst.units.len();
        if b.len() != n || b.iter().any(|row| row.len() != n) {
            push("b_matrix", format!("must be {n} x {n}"));
        } else {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (b[i][j] - b[j][i]).abs() > B_SYMMETRY_TOL {
                        push(
                            "b_matrix",
                            format!(
                                "not symmetric: ({},{})={} vs ({},{})={}",
                                i + 1,
                                j + 1,
                                b[i][j],
                                j + 1,
                                i + 1,
                                b[j][i]
                            ),
                        );
                    }
                }
            }
        }
    }
    if inst.reserve_enabled {
        match &inst.reserve_req {
            None => push("reserve_req", "required when reserve is enabled".into()),
            Some(r) if r.len() != inst.demand.len() => {
                push("reserve_req", format!("{} entries for {} periods", r.len(), inst.demand.len()))
            }
            _ => {}
        }
        match inst.tau {
            None => push("tau", "required when reserve is enabled".into()),
            Some(tau) if !(tau > 0.0) => push("tau", format!("must be positive, got {tau}")),
            _ => {}
        }
    }
    out
}

/// Validates and converts the violation list into an error.
pub fn validated(inst: &Instance) -> Result<(), DedError> {
    let v = validate(inst);
    if v.is_empty() {
        Ok(())
    } else {
        Err(DedError::InvalidInstance(
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
        ))
    }
}

/// Cheap necessary feasibility check: total capacity brackets every load.
///
/// Ignores losses, ramps and reserve, so `true` does not guarantee a feasible
/// dispatch, but `false` proves there is none.
pub fn feasible_region_nonempty(inst: &Instance) -> bool {
    let min: f64 = inst.units.iter().map(|u| u.p_min).sum();
    let max: f64 = inst.units.iter().map(|u| u.p_max).sum();
    inst.demand.iter().all(|&d| min <= d && d <= max)
}

/// A dispatch: the N x T output matrix plus quantities derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `outputs[i][t]` is the output of unit `i` in period `t` (MW).
    pub outputs: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn new(outputs: Vec<Vec<f64>>) -> Self {
        Schedule { outputs }
    }

    /// All-zero schedule with the dimensions of `inst`.
    pub fn zeros(inst: &Instance) -> Self {
        Schedule {
            outputs: vec![vec![0.0; inst.n_periods()]; inst.n_units()],
        }
    }

    pub fn n_units(&self) -> usize {
        self.outputs.len()
    }

    pub fn n_periods(&self) -> usize {
        self.outputs.first().map_or(0, |r| r.len())
    }

    /// Output column for one period.
    pub fn period(&self, t: usize) -> Vec<f64> {
        self.outputs.iter().map(|row| row[t]).collect()
    }

    pub fn dims_match(&self, inst: &Instance) -> bool {
        self.n_units() == inst.n_units()
            && self.outputs.iter().all(|r| r.len() == inst.n_periods())
    }
}
