//! Valve-point generation cost: exact evaluation, derivatives of the smooth
//! parts, and the piecewise-linear chord tables used by the MILP.

use crate::error::DedError;
use crate::model::{Instance, Schedule, UnitParams};

/// Slack allowed when checking an output against its bounds, relative to the
/// unit's range. Rounded published schedules sit exactly on bounds.
const DOMAIN_SLACK: f64 = 1e-7;

fn check_range(u: &UnitParams, p: f64, unit: usize, period: usize) -> Result<(), DedError> {
    let slack = DOMAIN_SLACK * (1.0 + u.range().abs());
    if p < u.p_min - slack || p > u.p_max + slack {
        return Err(DedError::OutputOutOfRange {
            unit: unit + 1,
            period: period + 1,
            value: p,
            lo: u.p_min,
            hi: u.p_max,
        });
    }
    Ok(())
}

fn cost_unchecked(u: &UnitParams, p: f64) -> f64 {
    u.alpha + u.beta * p + u.gamma * p * p + u.e * (u.f * (p - u.p_min)).sin().abs()
}

/// Generation cost of one unit at output `p` (MW), including the valve ripple.
pub fn unit_cost(u: &UnitParams, p: f64) -> Result<f64, DedError> {
    check_range(u, p, 0, 0)?;
    Ok(cost_unchecked(u, p))
}

/// Value and first two derivatives of the smooth cost pieces at `p`:
/// the quadratic polynomial and the (signed) sine factor, separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothParts {
    /// `alpha + beta p + gamma p^2` and its derivatives.
    pub quad: f64,
    pub quad_d1: f64,
    pub quad_d2: f64,
    /// `sin(f (p - p_min))` and its derivatives (without the amplitude `e`).
    pub sine: f64,
    pub sine_d1: f64,
    pub sine_d2: f64,
}

/// Evaluates the two differentiable ingredients of the cost with their
/// analytic first and second derivatives.
pub fn unit_cost_smooth_parts(u: &UnitParams, p: f64) -> Result<SmoothParts, DedError> {
    check_range(u, p, 0, 0)?;
    let arg = u.f * (p - u.p_min);
    let (s, c) = arg.sin_cos();
    Ok(SmoothParts {
        quad: u.alpha + u.beta * p + u.gamma * p * p,
        quad_d1: u.beta + 2.0 * u.gamma * p,
        quad_d2: 2.0 * u.gamma,
        sine: s,
        sine_d1: u.f * c,
        sine_d2: -u.f * u.f * s,
    })
}

/// Total cost of a schedule: the cost sum over all units and periods.
pub fn total_cost(inst: &Instance, sched: &Schedule) -> Result<f64, DedError> {
    if !sched.dims_match(inst) {
        return Err(DedError::InvalidInstance(format!(
            "schedule is {}x{}, instance is {}x{}",
            sched.n_units(),
            sched.n_periods(),
            inst.n_units(),
            inst.n_periods()
        )));
    }
    let mut total = 0.0;
    for (i, u) in inst.units.iter().enumerate() {
        for t in 0..inst.n_periods() {
            let p = sched.outputs[i][t];
            check_range(u, p, i, t)?;
            total += cost_unchecked(u, p);
        }
    }
    Ok(total)
}

/// Chord table of the piecewise-linear cost of one unit.
///
/// Breakpoints subdivide each ripple half-period into `M` equal pieces, so
/// every sine zero (valve point) lands exactly on a breakpoint and no chord
/// spans a kink of `|sin|`. The count is `L = ceil(M f (p_max - p_min) / pi)`:
/// `M` chords per full half-period plus a truncated final chord up to
/// `p_max` when the range ends mid-ripple.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTable {
    /// Number of chords; 0 only for a fixed-output unit (`p_min == p_max`).
    pub segments: usize,
    /// `segments + 1` breakpoints, `breaks[0] = p_min`, `breaks[L] = p_max`.
    pub breaks: Vec<f64>,
    /// Chord slope per segment ($/MW).
    pub slopes: Vec<f64>,
    /// Chord intercept per segment ($).
    pub intercepts: Vec<f64>,
    /// Chords per sine half-period requested at build time.
    pub per_half_period: usize,
}

impl SegmentTable {
    /// Piecewise-linear cost at `p` (clamped into `[p_min, p_max]`).
    pub fn eval(&self, p: f64) -> f64 {
        if self.segments == 0 {
            return self.intercepts[0];
        }
        let p = p.clamp(self.breaks[0], self.breaks[self.segments]);
        let l = self.segment_of(p);
        self.slopes[l] * p + self.intercepts[l]
    }

    /// Index of the segment containing `p` (ties resolve to the left chord).
    pub fn segment_of(&self, p: f64) -> usize {
        debug_assert!(self.segments > 0);
        let idx = self.breaks.partition_point(|&a| a <= p);
        idx.saturating_sub(1).min(self.segments - 1)
    }
}

/// Builds the chord table for `u` with `m` chords per sine half-period.
///
/// A unit with `p_min == p_max` yields the degenerate table: no chords and a
/// constant cost. A unit without ripple (`f = 0`) gets a single chord.
pub fn build_segments(u: &UnitParams, m: usize) -> Result<SegmentTable, DedError> {
    if m == 0 {
        return Err(DedError::Config("segment parameter M must be >= 1".into()));
    }
    let range = u.range();
    if range < 0.0 {
        return Err(DedError::InvalidInstance("p_min > p_max".into()));
    }
    if range == 0.0 {
        return Ok(SegmentTable {
            segments: 0,
            breaks: vec![u.p_min],
            slopes: vec![],
            intercepts: vec![cost_unchecked(u, u.p_min)],
            per_half_period: m,
        });
    }
    // ceil with a tiny guard so that exactly-integer products do not round up
    let raw = m as f64 * u.f * range / std::f64::consts::PI;
    let segments = ((raw - 1e-9).ceil() as usize).max(1);

    // chord endpoints advance by (half-period / M) so that every sine zero
    // is a breakpoint; the final chord is truncated at p_max
    let step = if u.f > 0.0 {
        std::f64::consts::PI / (u.f * m as f64)
    } else {
        range
    };
    let mut breaks = Vec::with_capacity(segments + 1);
    for l in 0..=segments {
        breaks.push((u.p_min + step * l as f64).min(u.p_max));
    }
    breaks[segments] = u.p_max;

    let mut slopes = Vec::with_capacity(segments);
    let mut intercepts = Vec::with_capacity(segments);
    for l in 0..segments {
        let (a0, a1) = (breaks[l], breaks[l + 1]);
        let (c0, c1) = (cost_unchecked(u, a0), cost_unchecked(u, a1));
        let k = (c1 - c0) / (a1 - a0);
        slopes.push(k);
        intercepts.push(c0 - k * a0);
    }
    Ok(SegmentTable {
        segments,
        breaks,
        slopes,
        intercepts,
        per_half_period: m,
    })
}

/// Largest gap between the chord table and the exact cost on a grid of
/// `10 * L` points. Exposed so callers can judge whether `M` is fine enough.
pub fn pwl_max_error(u: &UnitParams, table: &SegmentTable) -> f64 {
    if table.segments == 0 {
        return 0.0;
    }
    let grid = 10 * table.segments;
    let mut worst = 0.0f64;
    for g in 0..=grid {
        let p = u.p_min + u.range() * g as f64 / grid as f64;
        worst = worst.max((table.eval(p) - cost_unchecked(u, p)).abs());
    }
    worst
}
