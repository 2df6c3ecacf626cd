//! Branch and bound over the segment selector binaries of a [`MilpModel`].
//!
//! Integrality lives entirely in the selector columns, so branching fixes a
//! selector to 0 or 1 and reoptimizes the LP relaxation with the dual
//! simplex from the previous basis. Node selection is best-bound with
//! depth-first plunging until the first incumbent; branching picks the most
//! fractional selector (ties: larger chord-slope spread of the unit, then
//! lower column index). A rounding heuristic accelerates incumbents.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::error::DedError;
use crate::milp::{decode_outputs, pwl_total_cost, MilpModel};
use crate::model::Schedule;
use crate::simplex::{LpSolution, LpStatus, Simplex, SimplexOptions};

/// Branching rule tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Most fractional selector, ties by chord-slope spread then column index.
    #[default]
    MostFractional,
}

/// Node selection tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeSelection {
    /// Best bound with depth-first plunging until the first incumbent.
    #[default]
    BestBoundPlunge,
}

#[derive(Debug, Clone)]
pub struct BnbConfig {
    /// Relative optimality gap at which the search stops.
    pub rel_gap: f64,
    /// Absolute gap ($) at which the search stops.
    pub abs_gap: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    pub branching: BranchRule,
    pub node_selection: NodeSelection,
    pub integrality_tol: f64,
    /// Worker threads; 1 is deterministic and the default.
    pub threads: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            rel_gap: 0.003,
            abs_gap: 1e-6,
            node_limit: 2_000_000,
            time_limit: None,
            branching: BranchRule::default(),
            node_selection: NodeSelection::default(),
            integrality_tol: 1e-6,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    GapReached,
    ProvenOptimal,
    Limit,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    /// Best integral schedule found.
    pub schedule: Option<Schedule>,
    /// Piecewise-linear cost of the incumbent ($).
    pub objective: f64,
    /// Global lower bound ($).
    pub best_bound: f64,
    /// `(objective - best_bound) / max(|objective|, 1)`.
    pub gap: f64,
    pub nodes: usize,
    pub status: BnbStatus,
    pub wall_time: Duration,
}

/// Progress snapshot passed to the node callback.
#[derive(Debug, Clone, Copy)]
pub struct BnbProgress {
    pub nodes: usize,
    pub bound: f64,
    pub incumbent: Option<f64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
struct Node {
    /// Selector fixes along the path from the root.
    fixes: Vec<(usize, u8)>,
    bound: f64,
    depth: usize,
    seq: usize,
}

// BinaryHeap is a max-heap: order so the smallest bound pops first,
// FIFO among ties for determinism.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Shared {
    state: Mutex<SearchState>,
    work_ready: Condvar,
    stop: AtomicBool,
    node_count: AtomicUsize,
}

struct SearchState {
    open: BinaryHeap<Node>,
    incumbent: Option<(f64, Schedule)>,
    /// Lowest bound a worker may still produce work from (processing node
    /// and its local plunge stack).
    in_flight: Vec<Option<f64>>,
    next_seq: usize,
    plunging: bool,
}

impl SearchState {
    fn global_bound(&self) -> f64 {
        let mut b = self.open.peek().map(|n| n.bound).unwrap_or(f64::INFINITY);
        for fl in self.in_flight.iter().flatten() {
            b = b.min(*fl);
        }
        b
    }

    fn incumbent_obj(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(o, _)| *o)
    }

    fn gap_closed(&self, cfg: &BnbConfig) -> bool {
        match self.incumbent_obj() {
            None => false,
            Some(inc) => {
                let bound = self.global_bound().min(inc);
                gap_of(inc, bound) <= cfg.rel_gap || inc - bound <= cfg.abs_gap
            }
        }
    }
}

fn gap_of(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1.0)
}

/// Solves the MILP to the configured gap.
pub fn solve_milp(model: &MilpModel, cfg: &BnbConfig) -> Result<BnbResult, DedError> {
    solve_milp_with_progress(model, cfg, &mut |_p: &BnbProgress| {})
}

pub fn solve_milp_with_progress(
    model: &MilpModel,
    cfg: &BnbConfig,
    progress: &mut dyn FnMut(&BnbProgress),
) -> Result<BnbResult, DedError> {
    let started = Instant::now();
    let threads = cfg.threads.max(1);
    let shared = Shared {
        state: Mutex::new(SearchState {
            open: BinaryHeap::new(),
            incumbent: None,
            in_flight: vec![None; threads],
            next_seq: 1,
            plunging: true,
        }),
        work_ready: Condvar::new(),
        stop: AtomicBool::new(false),
        node_count: AtomicUsize::new(0),
    };
    shared.state.lock().unwrap().open.push(Node {
        fixes: Vec::new(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq: 0,
    });

    if threads == 1 {
        worker(model, cfg, &shared, 0, started, Some(progress))?;
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..threads {
                let shared_ref = &shared;
                handles.push(scope.spawn(move || worker(model, cfg, shared_ref, w, started, None)));
            }
            let mut out = Ok(());
            for h in handles {
                if let Err(e) = h.join().expect("worker panicked") {
                    out = Err(e);
                }
            }
            out
        })?;
    }

    let st = shared.state.lock().unwrap();
    let nodes = shared.node_count.load(AtomicOrdering::SeqCst);
    let wall = started.elapsed();
    let limit_hit = nodes >= cfg.node_limit || cfg.time_limit.is_some_and(|tl| wall >= tl);
    let (status, objective, bound, schedule) = match &st.incumbent {
        None => {
            let status = if st.open.is_empty() && !limit_hit {
                BnbStatus::Infeasible
            } else {
                BnbStatus::Limit
            };
            (status, f64::INFINITY, st.global_bound(), None)
        }
        Some((obj, sched)) => {
            let bound = st.global_bound().min(*obj);
            let drained = st.open.is_empty() && st.in_flight.iter().all(|f| f.is_none());
            let status = if drained || *obj - bound <= cfg.abs_gap {
                BnbStatus::ProvenOptimal
            } else if gap_of(*obj, bound) <= cfg.rel_gap {
                BnbStatus::GapReached
            } else {
                BnbStatus::Limit
            };
            (status, *obj, bound, Some(sched.clone()))
        }
    };
    let best_bound = if bound.is_finite() { bound } else { objective };
    Ok(BnbResult {
        gap: if schedule.is_some() {
            gap_of(objective, best_bound)
        } else {
            f64::INFINITY
        },
        schedule,
        objective,
        best_bound,
        nodes,
        status,
        wall_time: wall,
    })
}

fn worker(
    model: &MilpModel,
    cfg: &BnbConfig,
    shared: &Shared,
    slot: usize,
    started: Instant,
    mut progress: Option<&mut dyn FnMut(&BnbProgress)>,
) -> Result<(), DedError> {
    let mut lp = Simplex::new(&model.lp, SimplexOptions::default())?;
    let binaries = model.binary_cols();
    // local depth-first child retained while plunging (holds at most one node)
    let mut plunge: Vec<Node> = Vec::new();
    // selector fixes currently applied to `lp`; diffed against each node so
    // plunging costs one bound change instead of a full reset
    let mut applied: Vec<(usize, u8)> = Vec::new();
    let mut applied_valid = true;

    let clear_slot = |plunge: &mut Vec<Node>| {
        let mut st = shared.state.lock().unwrap();
        st.in_flight[slot] = None;
        plunge.clear();
        shared.work_ready.notify_all();
    };

    loop {
        if shared.stop.load(AtomicOrdering::SeqCst) {
            clear_slot(&mut plunge);
            return Ok(());
        }
        let node = if let Some(n) = plunge.pop() {
            n
        } else {
            let mut st = shared.state.lock().unwrap();
            let node = loop {
                let inc = st.incumbent_obj();
                while let Some(top) = st.open.peek() {
                    let dominated = inc.is_some_and(|i| {
                        top.bound >= i - cfg.abs_gap || gap_of(i, top.bound) <= cfg.rel_gap
                    });
                    if dominated {
                        st.open.pop();
                    } else {
                        break;
                    }
                }
                if let Some(n) = st.open.pop() {
                    st.in_flight[slot] = Some(n.bound);
                    break Some(n);
                }
                if st.in_flight.iter().all(|f| f.is_none()) {
                    shared.stop.store(true, AtomicOrdering::SeqCst);
                    shared.work_ready.notify_all();
                    break None;
                }
                if shared.stop.load(AtomicOrdering::SeqCst) {
                    break None;
                }
                let (guard, _timeout) = shared
                    .work_ready
                    .wait_timeout(st, Duration::from_millis(5))
                    .unwrap();
                st = guard;
            };
            match node {
                Some(n) => n,
                None => return Ok(()),
            }
        };

        let nodes_done = shared.node_count.fetch_add(1, AtomicOrdering::SeqCst) + 1;
        let elapsed = started.elapsed();
        let over_limit =
            nodes_done >= cfg.node_limit || cfg.time_limit.is_some_and(|tl| elapsed >= tl);

        // apply node bounds as a diff against the currently applied fixes
        if applied_valid {
            for &(c, v) in &applied {
                if !node.fixes.iter().any(|&(nc, nv)| nc == c && nv == v) {
                    lp.set_col_bounds(c, 0.0, 1.0);
                }
            }
            for &(c, v) in &node.fixes {
                if !applied.iter().any(|&(ac, av)| ac == c && av == v) {
                    lp.set_col_bounds(c, v as f64, v as f64);
                }
            }
        } else {
            for &c in &binaries {
                lp.set_col_bounds(c, 0.0, 1.0);
            }
            for &(c, v) in &node.fixes {
                lp.set_col_bounds(c, v as f64, v as f64);
            }
            applied_valid = true;
        }
        applied = node.fixes.clone();
        let sol = lp.resolve()?;
        let outcome = evaluate_node(model, cfg, &sol);

        let mut st = shared.state.lock().unwrap();
        st.in_flight[slot] = None;
        match outcome {
            NodeOutcome::Pruned => {}
            NodeOutcome::Integral(obj, sched) => {
                maybe_update_incumbent(&mut st, obj, sched);
            }
            NodeOutcome::Branch { obj, unit, period, split, frac_seg } => {
                // LP-based fix heuristic: expensive but strong; run sparsely
                // once an incumbent exists (with an improvement sweep the
                // first time)
                let first_incumbent = st.incumbent.is_none();
                let want_fix_lp = first_incumbent || nodes_done % 25 == 0;
                if want_fix_lp {
                    drop(st);
                    let fixed = heuristic_fix_lp(model, &mut lp, &sol, first_incumbent);
                    applied_valid = false;
                    st = shared.state.lock().unwrap();
                    if let Some((hobj, hsched)) = fixed {
                        maybe_update_incumbent(&mut st, hobj, hsched);
                    }
                } else if let Some((hobj, hsched)) = try_heuristic(model, &sol) {
                    maybe_update_incumbent(&mut st, hobj, hsched);
                }
                let inc = st.incumbent_obj();
                let dominated = inc
                    .is_some_and(|i| obj >= i - cfg.abs_gap || gap_of(i, obj) <= cfg.rel_gap);
                if !dominated && !over_limit {
                    // dichotomy on the block's selector set: left keeps
                    // segments ..= split, right keeps split + 1 ..
                    let l_count = model.tables[unit].segments;
                    let z0 = model.z_col[unit][period];
                    let mut fixes_left = node.fixes.clone();
                    for l in split + 1..l_count {
                        if !fixes_left.contains(&(z0 + l, 0)) {
                            fixes_left.push((z0 + l, 0));
                        }
                    }
                    let mut fixes_right = node.fixes;
                    for l in 0..=split {
                        if !fixes_right.contains(&(z0 + l, 0)) {
                            fixes_right.push((z0 + l, 0));
                        }
                    }
                    let left =
                        Node { fixes: fixes_left, bound: obj, depth: node.depth + 1, seq: st.next_seq };
                    let right =
                        Node { fixes: fixes_right, bound: obj, depth: node.depth + 1, seq: st.next_seq + 1 };
                    st.next_seq += 2;
                    // always plunge: keep the child containing the relaxation
                    // output local (cheap warm resolve); its bound stays
                    // visible via in_flight
                    let (dive, other) = if frac_seg <= split { (left, right) } else { (right, left) };
                    st.open.push(other);
                    st.in_flight[slot] = Some(obj);
                    plunge.push(dive);
                    shared.work_ready.notify_all();
                }
            }
        }

        if st.gap_closed(cfg) || over_limit {
            shared.stop.store(true, AtomicOrdering::SeqCst);
            shared.work_ready.notify_all();
        }
        if let Some(cb) = progress.as_deref_mut() {
            let snap = BnbProgress {
                nodes: nodes_done,
                bound: st.global_bound(),
                incumbent: st.incumbent_obj(),
                elapsed,
            };
            drop(st);
            cb(&snap);
        }
    }
}

enum NodeOutcome {
    Pruned,
    Integral(f64, Schedule),
    Branch {
        obj: f64,
        unit: usize,
        period: usize,
        /// Left child keeps segments `..= split`, right child `split + 1 ..`.
        split: usize,
        /// Segment holding the relaxation output, for dive direction.
        frac_seg: usize,
    },
}

fn evaluate_node(model: &MilpModel, cfg: &BnbConfig, sol: &LpSolution) -> NodeOutcome {
    match sol.status {
        LpStatus::Infeasible => return NodeOutcome::Pruned,
        LpStatus::Optimal => {}
        // relaxations of a finitely bounded MILP cannot be unbounded; any
        // other status leaves nothing sound to branch on
        _ => return NodeOutcome::Pruned,
    }
    let obj = sol.objective + model.lp.obj_const;

    // most fractional selector, ties by slope spread then column index;
    // its block is then split at the fractional center of mass (dichotomy
    // over the convexity row)
    let mut best: Option<(usize, usize, usize, f64, f64)> = None; // (i, t, col, dist, spread)
    for i in 0..model.n_units {
        let tab = &model.tables[i];
        if tab.segments == 0 {
            continue;
        }
        let spread = tab.slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - tab.slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        for t in 0..model.n_periods {
            for l in 0..tab.segments {
                let c = model.z_col[i][t] + l;
                let z = sol.primal[c];
                if z > cfg.integrality_tol && z < 1.0 - cfg.integrality_tol {
                    let dist = (z - 0.5).abs();
                    let better = match best {
                        None => true,
                        Some((_, _, bc, bd, bs)) => {
                            dist < bd - 1e-12
                                || (dist <= bd + 1e-12 && spread > bs + 1e-12)
                                || (dist <= bd + 1e-12 && (spread - bs).abs() <= 1e-12 && c < bc)
                        }
                    };
                    if better {
                        best = Some((i, t, c, dist, spread));
                    }
                }
            }
        }
    }

    match best {
        None => match decode_outputs(model, &sol.primal) {
            Ok(sched) => NodeOutcome::Integral(obj, sched),
            Err(_) => NodeOutcome::Pruned,
        },
        Some((unit, period, _, _, _)) => {
            let tab = &model.tables[unit];
            let l_count = tab.segments;
            // active segment range and fractional center of mass
            let mut first = usize::MAX;
            let mut last = 0usize;
            let mut center = 0.0;
            for l in 0..l_count {
                let z = sol.primal[model.z_col[unit][period] + l];
                if z > cfg.integrality_tol {
                    first = first.min(l);
                    last = last.max(l);
                    center += (l as f64 + 0.5) * z;
                }
            }
            let split = (center.floor() as usize).clamp(first, last.saturating_sub(1));
            let frac_seg = tab.segment_of(sol.primal[model.p_col[unit][period]]);
            NodeOutcome::Branch { obj, unit, period, split, frac_seg }
        }
    }
}

fn maybe_update_incumbent(st: &mut SearchState, obj: f64, sched: Schedule) {
    let better = st.incumbent.as_ref().map_or(true, |(o, _)| obj < *o - 1e-12);
    if better {
        st.incumbent = Some((obj, sched));
    }
    st.plunging = false;
}

fn try_heuristic(model: &MilpModel, sol: &LpSolution) -> Option<(f64, Schedule)> {
    let sched = primal_heuristic_round(model, sol)?;
    let obj = pwl_total_cost(&model.tables, &sched);
    Some((obj, sched))
}

/// Fixes every selector to the segment containing the relaxation output and
/// reoptimizes the LP once. The relaxation point itself is feasible for the
/// fixed problem, so this almost always lands an incumbent, and the LP then
/// places the outputs optimally within the chosen segments. With `improve`
/// set, a coordinate-descent sweep over neighboring segment picks polishes
/// the assignment. The caller re-applies node bounds afterwards, so the
/// bound scribbling is harmless.
fn heuristic_fix_lp(
    model: &MilpModel,
    lp: &mut Simplex,
    sol: &LpSolution,
    improve: bool,
) -> Option<(f64, Schedule)> {
    let n = model.n_units;
    let nt = model.n_periods;
    let mut picks = vec![vec![0usize; nt]; n];
    for i in 0..n {
        let tab = &model.tables[i];
        if tab.segments == 0 {
            continue;
        }
        for t in 0..nt {
            picks[i][t] = tab.segment_of(sol.primal[model.p_col[i][t]]);
        }
    }
    let apply = |lp: &mut Simplex, picks: &Vec<Vec<usize>>| {
        for i in 0..n {
            let l_count = model.tables[i].segments;
            for t in 0..nt {
                for l in 0..l_count {
                    let v = if l == picks[i][t] { 1.0 } else { 0.0 };
                    lp.set_col_bounds(model.z_col[i][t] + l, v, v);
                }
            }
        }
    };
    apply(lp, &picks);
    let mut best = lp.resolve().ok()?;
    if best.status != LpStatus::Optimal {
        return None;
    }
    let mut best_obj = best.objective + model.lp.obj_const;

    if improve {
        // coordinate descent over neighboring segment picks
        for _sweep in 0..3 {
            let mut improved = false;
            for i in 0..n {
                let l_count = model.tables[i].segments;
                if l_count == 0 {
                    continue;
                }
                for t in 0..nt {
                    let cur = picks[i][t];
                    for cand in [cur.wrapping_sub(1), cur + 1] {
                        if cand >= l_count {
                            continue;
                        }
                        picks[i][t] = cand;
                        apply(lp, &picks);
                        match lp.resolve() {
                            Ok(trial) if trial.status == LpStatus::Optimal => {
                                let obj = trial.objective + model.lp.obj_const;
                                if obj < best_obj - 1e-7 {
                                    best_obj = obj;
                                    best = trial;
                                    improved = true;
                                    break;
                                }
                                picks[i][t] = cur;
                            }
                            _ => {
                                picks[i][t] = cur;
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        // leave the LP on the best picks so the decode below matches
        apply(lp, &picks);
        best = lp.resolve().ok()?;
        if best.status != LpStatus::Optimal {
            return None;
        }
        best_obj = best.objective + model.lp.obj_const;
    }

    let sched = decode_outputs(model, &best.primal).ok()?;
    Some((best_obj, sched))
}

/// Rounds a relaxation solution into a MILP-feasible schedule, if it can.
///
/// For each unit and period the selector with the largest fractional value
/// picks the segment; the output snaps into that segment's interval; a
/// greedy per-period redistribution then repairs the power balance within
/// segment intervals and ramp windows. Returns `None` when the repair gets
/// stuck (it is only an accelerator).
pub fn primal_heuristic_round(model: &MilpModel, sol: &LpSolution) -> Option<Schedule> {
    let inst = &model.instance;
    let n = model.n_units;
    let nt = model.n_periods;
    let mut lo = vec![vec![0.0; nt]; n];
    let mut hi = vec![vec![0.0; nt]; n];
    let mut out = vec![vec![0.0; nt]; n];
    let mut slope = vec![vec![0.0; nt]; n];

    for i in 0..n {
        let tab = &model.tables[i];
        for t in 0..nt {
            if tab.segments == 0 {
                lo[i][t] = tab.breaks[0];
                hi[i][t] = tab.breaks[0];
                out[i][t] = tab.breaks[0];
                continue;
            }
            let p = sol.primal[model.p_col[i][t]];
            let mut pick = 0usize;
            let mut best_z = f64::NEG_INFINITY;
            for l in 0..tab.segments {
                let z = sol.primal[model.z_col[i][t] + l];
                if z > best_z {
                    best_z = z;
                    pick = l;
                }
            }
            lo[i][t] = tab.breaks[pick];
            hi[i][t] = tab.breaks[pick + 1];
            out[i][t] = p.clamp(lo[i][t], hi[i][t]);
            slope[i][t] = tab.slopes[pick];
        }
    }

    for t in 0..nt {
        let mut windows: Vec<(f64, f64)> = Vec::with_capacity(n);
        for i in 0..n {
            let u = &inst.units[i];
            let (mut wl, mut wh) = (lo[i][t], hi[i][t]);
            let prev = if t == 0 { u.initial_output } else { Some(out[i][t - 1]) };
            if let Some(prev) = prev {
                wl = wl.max(prev - u.ramp_down);
                wh = wh.min(prev + u.ramp_up);
            }
            if wl > wh {
                return None; // segment choice incompatible with ramps
            }
            out[i][t] = out[i][t].clamp(wl, wh);
            windows.push((wl, wh));
        }
        let mut surplus: f64 = (0..n).map(|i| out[i][t]).sum::<f64>() - inst.demand[t];
        if surplus.abs() > 1e-9 {
            // shed expensive output first / add cheap output first
            let mut order: Vec<usize> = (0..n).collect();
            if surplus > 0.0 {
                order.sort_by(|&a, &b| slope[b][t].total_cmp(&slope[a][t]));
            } else {
                order.sort_by(|&a, &b| slope[a][t].total_cmp(&slope[b][t]));
            }
            for &i in &order {
                if surplus.abs() <= 1e-9 {
                    break;
                }
                let (wl, wh) = windows[i];
                let room = if surplus > 0.0 { out[i][t] - wl } else { wh - out[i][t] };
                let take = room.min(surplus.abs());
                if take > 0.0 {
                    out[i][t] -= take * surplus.signum();
                    surplus -= take * surplus.signum();
                }
            }
            if surplus.abs() > 1e-9 {
                return None;
            }
        }
    }

    if model.reserve {
        let req = inst.reserve_req.as_ref()?;
        let tau = inst.tau?;
        for t in 0..nt {
            let avail: f64 = (0..n)
                .map(|i| {
                    let u = &inst.units[i];
                    (u.p_max - out[i][t]).min(tau * u.ramp_up).max(0.0)
                })
                .sum();
            if avail + 1e-9 < req[t] {
                return None;
            }
        }
    }
    Some(Schedule::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{audit, Tolerances};
    use crate::milp::build_milp;
    use crate::model::{Instance, UnitParams};
    use crate::simplex::solve_lp;

    fn unit(p_min: f64, p_max: f64, f: f64, ramp: f64) -> UnitParams {
        UnitParams {
            alpha: 12.0,
            beta: 3.0,
            gamma: 0.02,
            e: 6.0,
            f,
            p_min,
            p_max,
            ramp_up: ramp,
            ramp_down: ramp,
            initial_output: None,
        }
    }

    #[test]
    fn all_binaries_forced_solves_at_root() {
        // L = 1 everywhere: convexity pins every selector
        let u = unit(1.0, 2.0, 0.5, 10.0);
        let inst = Instance::new(vec![u.clone(), u], vec![3.0, 3.5]);
        let model = build_milp(&inst, 1, false).unwrap();
        assert!(model.tables.iter().all(|t| t.segments == 1));
        let res = solve_milp(&model, &BnbConfig::default()).unwrap();
        assert_eq!(res.status, BnbStatus::ProvenOptimal);
        assert_eq!(res.nodes, 1);
        assert!(res.gap.abs() < 1e-9);
    }

    #[test]
    fn bound_monotone_and_incumbent_feasible() {
        let units = vec![unit(2.0, 10.0, 1.1, 4.0), unit(3.0, 12.0, 0.8, 5.0)];
        let inst = Instance::new(units, vec![14.0, 16.0, 13.0]);
        let model = build_milp(&inst, 3, false).unwrap();
        let mut bounds = Vec::new();
        let cfg = BnbConfig { rel_gap: 0.0, abs_gap: 1e-9, ..Default::default() };
        let res =
            solve_milp_with_progress(&model, &cfg, &mut |p| bounds.push(p.bound)).unwrap();
        assert_eq!(res.status, BnbStatus::ProvenOptimal);
        let sched = res.schedule.as_ref().expect("incumbent");
        let rep = audit(&inst, sched, Tolerances::default()).unwrap();
        assert!(rep.pass, "violations: {rep:?}");
        for w in bounds.windows(2) {
            assert!(w[1] >= w[0] - 1e-7, "bound regressed: {} -> {}", w[0], w[1]);
        }
        assert!(res.best_bound <= res.objective + 1e-9);
        // incumbent objective equals the PWL cost of its schedule
        let pwl = pwl_total_cost(&model.tables, sched);
        assert!((pwl - res.objective).abs() <= 1e-6 * (1.0 + pwl.abs()));
    }

    #[test]
    fn determinism_single_worker() {
        let units = vec![unit(2.0, 9.0, 1.3, 3.0), unit(1.0, 8.0, 0.9, 4.0)];
        let inst = Instance::new(units, vec![10.0, 12.0]);
        let model = build_milp(&inst, 2, false).unwrap();
        let cfg = BnbConfig { rel_gap: 0.0, abs_gap: 1e-9, ..Default::default() };
        let a = solve_milp(&model, &cfg).unwrap();
        let b = solve_milp(&model, &cfg).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn infeasible_root_reported() {
        // ramp-infeasible demand swing
        let u = unit(0.0, 10.0, 1.0, 1.0);
        let inst = Instance::new(vec![u.clone(), u], vec![2.0, 20.0]);
        let model = build_milp(&inst, 2, false).unwrap();
        let res = solve_milp(&model, &BnbConfig::default()).unwrap();
        assert_eq!(res.status, BnbStatus::Infeasible);
        assert!(res.schedule.is_none());
    }

    #[test]
    fn heuristic_round_trip_on_integral_relaxation() {
        let u = unit(1.0, 2.0, 0.5, 10.0);
        let inst = Instance::new(vec![u.clone(), u], vec![3.0]);
        let model = build_milp(&inst, 1, false).unwrap();
        let sol = solve_lp(&model.lp, None).unwrap();
        let sched = primal_heuristic_round(&model, &sol).expect("feasible rounding");
        for i in 0..2 {
            assert!((sched.outputs[i][0] - sol.primal[model.p_col[i][0]]).abs() < 1e-9);
        }
        let hcost = pwl_total_cost(&model.tables, &sched);
        assert!(hcost >= sol.objective + model.lp.obj_const - 1e-6, "bound sandwich");
    }

    #[test]
    fn heuristic_never_returns_infeasible_schedules() {
        let u = unit(0.0, 4.0, 1.8, 0.05);
        let inst = Instance::new(vec![u.clone(), u], vec![1.0, 7.9]);
        let model = build_milp(&inst, 2, false).unwrap();
        let sol = solve_lp(&model.lp, None).unwrap();
        if let Some(sched) = primal_heuristic_round(&model, &sol) {
            let rep = audit(&inst, &sched, Tolerances::default()).unwrap();
            assert!(rep.pass);
        }
    }
}
