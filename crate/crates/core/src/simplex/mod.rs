//! Revised simplex for bounded-variable LPs.
//!
//! Solves `min c'x` subject to `rl <= Ax <= ru`, `l <= x <= u`. Rows get
//! logical columns (`Ax - s = 0`, `s` bounded by the row sides), so the
//! working problem is an equality system over `n + m` bounded columns.
//!
//! The solver runs dual simplex whenever the starting basis is dual
//! feasible (always true for the cost-sign slack start on finite-bound
//! models, and after bound changes on a previously optimal basis), and a
//! primal phase-1/phase-2 pair otherwise. The basis is factorized sparsely
//! and maintained with product-form updates.

mod lu;

use crate::error::DedError;
use crate::sparselp::SparseLp;
use lu::{factorize, Eta, LuError, LuFactors};

/// Where a column currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column pinned at zero.
    FreeNonbasic,
}

/// A simplex basis: enough to warm start a related solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBasis {
    /// Basic column per row position (column ids include logicals `n..n+m`).
    pub basic: Vec<usize>,
    /// Status per column, logicals included.
    pub status: Vec<ColStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of an LP solve.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural primal values.
    pub primal: Vec<f64>,
    /// Row duals.
    pub dual: Vec<f64>,
    /// Structural reduced costs.
    pub reduced_cost: Vec<f64>,
    /// Objective value including the constant term.
    pub objective: f64,
    pub iterations: usize,
    pub basis: LpBasis,
}

impl LpSolution {
    /// Lagrangian dual objective at the returned multipliers; for an optimal
    /// basic solution it matches the primal objective up to tolerances.
    pub fn dual_objective(&self, lp: &SparseLp) -> f64 {
        let mut v = lp.obj_const;
        for (j, &d) in self.reduced_cost.iter().enumerate() {
            let term = if d > 0.0 {
                d * lp.col_lower[j]
            } else if d < 0.0 {
                d * lp.col_upper[j]
            } else {
                0.0
            };
            if term.is_finite() {
                v += term;
            }
        }
        for (i, &y) in self.dual.iter().enumerate() {
            let term = if y > 0.0 {
                y * lp.row_lower[i]
            } else if y < 0.0 {
                y * lp.row_upper[i]
            } else {
                0.0
            };
            if term.is_finite() {
                v += term;
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub zero_pivot: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
    /// Refactorize after this many eta updates.
    pub refactor_every: usize,
    pub scale: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            zero_pivot: 1e-9,
            max_iterations: 2_000_000,
            stall_threshold: 50,
            refactor_every: 64,
            scale: true,
        }
    }
}

const INF: f64 = f64::INFINITY;

/// Reusable solver state for one LP; bounds may be mutated between solves,
/// which is how branch-and-bound reoptimizes nodes.
pub struct Simplex {
    m: usize,
    n: usize,
    // scaled problem data; columns j < n structural, j >= n logical for row j - n
    cols: Vec<Vec<(usize, f64)>>,
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    opts: SimplexOptions,

    status: Vec<ColStatus>,
    basic: Vec<usize>,
    pos_of: Vec<usize>, // column -> basis position (usize::MAX when nonbasic)
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    x: Vec<f64>,   // current value per column (all n + m)
    xb_stale: bool,
    iterations: usize,
    // row-major copy of the scaled structural matrix, for pivot rows
    csr_ptr: Vec<usize>,
    csr_cols: Vec<usize>,
    csr_vals: Vec<f64>,
}

enum PricedPrimal {
    Optimal,
    Enter { col: usize, dir: f64 },
}

impl Simplex {
    pub fn new(lp: &SparseLp, opts: SimplexOptions) -> Result<Self, DedError> {
        let n = lp.n_cols();
        let m = lp.n_rows();
        for j in 0..n {
            if lp.col_lower[j] > lp.col_upper[j] {
                return Err(DedError::Build(format!("column {j} has crossed bounds")));
            }
        }

        // geometric row/column equilibration, factors rounded to powers of two
        let mut row_scale = vec![1.0f64; m];
        let mut col_scale = vec![1.0f64; n];
        if opts.scale {
            for _pass in 0..2 {
                let mut row_lo = vec![INF; m];
                let mut row_hi = vec![0.0f64; m];
                for j in 0..n {
                    for (r, v) in lp.col(j) {
                        let a = (v * row_scale[r] * col_scale[j]).abs();
                        if a > 0.0 {
                            row_lo[r] = row_lo[r].min(a);
                            row_hi[r] = row_hi[r].max(a);
                        }
                    }
                }
                for i in 0..m {
                    if row_hi[i] > 0.0 {
                        row_scale[i] *= round_pow2(1.0 / (row_lo[i] * row_hi[i]).sqrt());
                    }
                }
                for j in 0..n {
                    let (mut lo, mut hi) = (INF, 0.0f64);
                    for (r, v) in lp.col(j) {
                        let a = (v * row_scale[r] * col_scale[j]).abs();
                        if a > 0.0 {
                            lo = lo.min(a);
                            hi = hi.max(a);
                        }
                    }
                    if hi > 0.0 {
                        col_scale[j] *= round_pow2(1.0 / (lo * hi).sqrt());
                    }
                }
            }
        }

        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n + m);
        for j in 0..n {
            cols.push(
                lp.col(j)
                    .map(|(r, v)| (r, v * row_scale[r] * col_scale[j]))
                    .collect(),
            );
        }
        for i in 0..m {
            cols.push(vec![(i, -1.0)]);
        }

        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut obj = Vec::with_capacity(n + m);
        for j in 0..n {
            // x' = x / col_scale
            lower.push(lp.col_lower[j] / col_scale[j]);
            upper.push(lp.col_upper[j] / col_scale[j]);
            obj.push(lp.obj[j] * col_scale[j]);
        }
        for i in 0..m {
            // s' = s * row_scale
            lower.push(lp.row_lower[i] * row_scale[i]);
            upper.push(lp.row_upper[i] * row_scale[i]);
            obj.push(0.0);
        }

        // row-major copy of the scaled structural columns
        let mut csr_ptr = vec![0usize; m + 1];
        for col in cols.iter().take(n) {
            for &(r, _) in col {
                csr_ptr[r + 1] += 1;
            }
        }
        for i in 0..m {
            csr_ptr[i + 1] += csr_ptr[i];
        }
        let nnz = csr_ptr[m];
        let mut fill = csr_ptr.clone();
        let mut csr_cols = vec![0usize; nnz];
        let mut csr_vals = vec![0.0; nnz];
        for (j, col) in cols.iter().enumerate().take(n) {
            for &(r, v) in col {
                csr_cols[fill[r]] = j;
                csr_vals[fill[r]] = v;
                fill[r] += 1;
            }
        }

        let mut s = Simplex {
            m,
            n,
            cols,
            obj,
            lower,
            upper,
            row_scale,
            col_scale,
            opts,
            status: vec![ColStatus::AtLower; n + m],
            basic: Vec::new(),
            pos_of: vec![usize::MAX; n + m],
            lu: None,
            etas: Vec::new(),
            x: vec![0.0; n + m],
            xb_stale: true,
            iterations: 0,
            csr_ptr,
            csr_cols,
            csr_vals,
        };
        s.set_slack_basis();
        Ok(s)
    }

    fn csr_rows(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.csr_ptr, &self.csr_cols, &self.csr_vals)
    }

    /// Replaces a column's bounds (scaled domain handled internally).
    pub fn set_col_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        assert!(col < self.n);
        self.lower[col] = lower / self.col_scale[col];
        self.upper[col] = upper / self.col_scale[col];
        if self.status[col] != ColStatus::Basic {
            self.place_nonbasic(col);
        }
        self.xb_stale = true;
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn place_nonbasic(&mut self, j: usize) {
        let (l, u) = (self.lower[j], self.upper[j]);
        self.status[j] = match self.status[j] {
            ColStatus::AtLower if l.is_finite() => ColStatus::AtLower,
            ColStatus::AtUpper if u.is_finite() => ColStatus::AtUpper,
            _ => {
                if l.is_finite() {
                    ColStatus::AtLower
                } else if u.is_finite() {
                    ColStatus::AtUpper
                } else {
                    ColStatus::FreeNonbasic
                }
            }
        };
        self.x[j] = self.nonbasic_value(j);
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            ColStatus::AtLower => self.lower[j],
            ColStatus::AtUpper => self.upper[j],
            ColStatus::FreeNonbasic => 0.0,
            ColStatus::Basic => self.x[j],
        }
    }

    fn set_slack_basis(&mut self) {
        self.basic = (self.n..self.n + self.m).collect();
        for j in 0..self.n + self.m {
            self.pos_of[j] = usize::MAX;
            self.status[j] = ColStatus::AtLower;
        }
        for (pos, &j) in self.basic.iter().enumerate() {
            self.status[j] = ColStatus::Basic;
            self.pos_of[j] = pos;
        }
        // choose nonbasic bounds by objective sign for dual feasibility
        for j in 0..self.n {
            let c = self.obj[j];
            self.status[j] = if c >= 0.0 && self.lower[j].is_finite() {
                ColStatus::AtLower
            } else if c <= 0.0 && self.upper[j].is_finite() {
                ColStatus::AtUpper
            } else if self.lower[j].is_finite() {
                ColStatus::AtLower
            } else if self.upper[j].is_finite() {
                ColStatus::AtUpper
            } else {
                ColStatus::FreeNonbasic
            };
        }
        self.lu = None;
        self.etas.clear();
        self.xb_stale = true;
    }

    /// Installs a warm basis, repairing it if singular.
    pub fn install_basis(&mut self, warm: &LpBasis) -> Result<(), DedError> {
        if warm.basic.len() != self.m || warm.status.len() != self.n + self.m {
            return Err(DedError::Build("warm basis has wrong dimensions".into()));
        }
        self.basic = warm.basic.clone();
        self.status = warm.status.clone();
        for j in 0..self.n + self.m {
            self.pos_of[j] = usize::MAX;
        }
        for (pos, &j) in self.basic.iter().enumerate() {
            self.status[j] = ColStatus::Basic;
            self.pos_of[j] = pos;
        }
        for j in 0..self.n + self.m {
            if self.status[j] != ColStatus::Basic {
                self.place_nonbasic(j);
            }
        }
        self.lu = None;
        self.etas.clear();
        self.xb_stale = true;
        Ok(())
    }

    pub fn basis(&self) -> LpBasis {
        LpBasis {
            basic: self.basic.clone(),
            status: self.status.clone(),
        }
    }

    fn refactorize(&mut self) -> Result<(), DedError> {
        loop {
            let basis_cols: Vec<Vec<(usize, f64)>> = self
                .basic
                .iter()
                .map(|&j| self.cols[j].clone())
                .collect();
            match factorize(self.m, &basis_cols) {
                Ok(f) => {
                    self.lu = Some(f);
                    self.etas.clear();
                    return Ok(());
                }
                Err(LuError::Singular { unpivoted_cols }) => {
                    // replace dependent basis columns with their row logicals
                    let mut changed = false;
                    for pos in unpivoted_cols {
                        let out = self.basic[pos];
                        // find a row whose logical is nonbasic to patch in
                        let mut patched = false;
                        for i in 0..self.m {
                            let slack = self.n + i;
                            if self.status[slack] != ColStatus::Basic && !self.basic.contains(&slack)
                            {
                                self.pos_of[out] = usize::MAX;
                                self.status[out] = ColStatus::AtLower;
                                self.place_nonbasic(out);
                                self.basic[pos] = slack;
                                self.pos_of[slack] = pos;
                                self.status[slack] = ColStatus::Basic;
                                patched = true;
                                changed = true;
                                break;
                            }
                        }
                        if !patched {
                            return Err(DedError::Solver("cannot repair singular basis".into()));
                        }
                    }
                    if !changed {
                        return Err(DedError::Solver("singular basis with no repair".into()));
                    }
                    self.xb_stale = true;
                }
            }
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        self.lu.as_ref().expect("factorized").ftran(v);
        for e in &self.etas {
            e.apply_ftran(v);
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for e in self.etas.iter().rev() {
            e.apply_btran(v);
        }
        self.lu.as_ref().expect("factorized").btran(v);
    }

    /// Recomputes basic values from nonbasic bounds: `x_B = B^{-1}(0 - N x_N)`.
    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] != ColStatus::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    for &(r, a) in &self.cols[j] {
                        rhs[r] -= a * v;
                    }
                }
            }
        }
        self.ftran(&mut rhs);
        for (pos, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs[pos];
        }
        self.xb_stale = false;
    }

    fn duals(&self) -> Vec<f64> {
        let mut cb = vec![0.0; self.m];
        for (pos, &j) in self.basic.iter().enumerate() {
            cb[pos] = self.obj[j];
        }
        self.btran(&mut cb);
        cb
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.obj[j];
        for &(r, v) in &self.cols[j] {
            d -= y[r] * v;
        }
        d
    }

    fn scaled_objective(&self) -> f64 {
        (0..self.n + self.m).map(|j| self.obj[j] * self.x[j]).sum()
    }

    // ---------------- primal simplex ----------------

    fn price_primal(&self, y: &[f64], phase1: bool, bland: bool) -> PricedPrimal {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..self.n + self.m {
            if self.status[j] == ColStatus::Basic {
                continue;
            }
            if self.lower[j] == self.upper[j] {
                continue; // fixed columns cannot move
            }
            let d = if phase1 {
                -self.phase1_dual_activity(j, y)
            } else {
                self.reduced_cost(j, y)
            };
            let dir = match self.status[j] {
                ColStatus::AtLower if d < -tol => 1.0,
                ColStatus::AtUpper if d > tol => -1.0,
                ColStatus::FreeNonbasic if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return PricedPrimal::Enter { col: j, dir };
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        match best {
            Some((col, dir, _)) => PricedPrimal::Enter { col, dir },
            None => PricedPrimal::Optimal,
        }
    }

    /// `A_j' y` with phase-1 costs baked into `y` (see `phase1_duals`).
    fn phase1_dual_activity(&self, j: usize, y: &[f64]) -> f64 {
        let mut a = 0.0;
        for &(r, v) in &self.cols[j] {
            a += y[r] * v;
        }
        a
    }

    fn phase1_duals(&self) -> (Vec<f64>, f64) {
        // phase-1 cost: +1 for basics above upper, -1 below lower
        let mut cb = vec![0.0; self.m];
        let mut infeas = 0.0;
        let tol = self.opts.feas_tol;
        for (pos, &j) in self.basic.iter().enumerate() {
            let v = self.x[j];
            if v > self.upper[j] + tol {
                cb[pos] = 1.0;
                infeas += v - self.upper[j];
            } else if v < self.lower[j] - tol {
                cb[pos] = -1.0;
                infeas += self.lower[j] - v;
            }
        }
        let mut y = cb;
        self.btran(&mut y);
        (y, infeas)
    }

    /// Blocking bound of basic `j` when it moves by `delta` per unit step.
    /// Returns `(bound, leaves_at_upper)`, or `None` when nothing ahead
    /// blocks (phase 1: an infeasible basic moving away from its violated
    /// bound has no breakpoint, its worsening is priced by the phase-1
    /// costs).
    fn blocking_bound(&self, j: usize, delta: f64, phase1: bool) -> Option<(f64, bool)> {
        let feas = self.opts.feas_tol;
        let (l, u) = (self.lower[j], self.upper[j]);
        let xv = self.x[j];
        let (bound, at_upper) = if delta < 0.0 {
            if phase1 && xv < l - feas {
                return None; // below lower, moving further down
            } else if phase1 && xv > u + feas {
                (u, true) // above upper, moving down: feasible at upper
            } else {
                (l, false)
            }
        } else if phase1 && xv > u + feas {
            return None; // above upper, moving further up
        } else if phase1 && xv < l - feas {
            (l, false) // below lower, moving up: feasible at lower
        } else {
            (u, true)
        };
        bound.is_finite().then_some((bound, at_upper))
    }

    /// Bounded-variable ratio test (two-pass, largest-pivot tie break).
    /// Returns (step, leaving position or None for a bound flip, leave_at_upper).
    fn ratio_test(
        &self,
        w: &[f64],
        dir: f64,
        enter: usize,
        phase1: bool,
    ) -> Option<(f64, Option<usize>, bool)> {
        let feas = self.opts.feas_tol;
        let zero = self.opts.zero_pivot;
        let own = self.upper[enter] - self.lower[enter];

        // Pass 1: relaxed maximum step with a feasibility cushion.
        let mut relaxed = own;
        for (pos, &j) in self.basic.iter().enumerate() {
            let wk = w[pos];
            if wk.abs() <= zero {
                continue;
            }
            let delta = -dir * wk; // d x_Bj / d step
            if let Some((bound, _)) = self.blocking_bound(j, delta, phase1) {
                let r = ((bound - self.x[j]) / delta + feas / delta.abs()).max(0.0);
                relaxed = relaxed.min(r);
            }
        }
        if !relaxed.is_finite() {
            return None; // unbounded direction
        }

        // Pass 2: among blockers within the relaxed step, largest pivot wins.
        let mut leave: Option<(usize, bool, f64)> = None; // (pos, at_upper, |pivot|)
        let mut limit = f64::INFINITY;
        for (pos, &j) in self.basic.iter().enumerate() {
            let wk = w[pos];
            if wk.abs() <= zero {
                continue;
            }
            let delta = -dir * wk;
            if let Some((bound, at_upper)) = self.blocking_bound(j, delta, phase1) {
                let r = ((bound - self.x[j]) / delta).max(0.0);
                if r <= relaxed {
                    let better = match leave {
                        None => true,
                        Some((_, _, bp)) => wk.abs() > bp,
                    };
                    if better {
                        leave = Some((pos, at_upper, wk.abs()));
                        limit = r;
                    }
                }
            }
        }

        // A finite own range tighter than any blocker means a bound flip.
        if own.is_finite() && own < limit {
            return Some((own, None, false));
        }
        leave.map(|(pos, at_upper, _)| (limit.max(0.0), Some(pos), at_upper))
    }

    fn apply_step(&mut self, enter: usize, dir: f64, step: f64, w: &[f64]) {
        if step != 0.0 {
            for (pos, &j) in self.basic.iter().enumerate() {
                if w[pos] != 0.0 {
                    self.x[j] -= dir * step * w[pos];
                }
            }
            self.x[enter] += dir * step;
        }
    }

    fn pivot(&mut self, enter: usize, leave_pos: usize, leave_at_upper: bool, w: &[f64]) {
        let out = self.basic[leave_pos];
        self.status[out] = if leave_at_upper {
            ColStatus::AtUpper
        } else {
            ColStatus::AtLower
        };
        self.x[out] = self.nonbasic_value(out);
        self.pos_of[out] = usize::MAX;
        self.basic[leave_pos] = enter;
        self.pos_of[enter] = leave_pos;
        self.status[enter] = ColStatus::Basic;
        let rest: Vec<(u32, f64)> = w
            .iter()
            .enumerate()
            .filter(|&(k, &v)| k != leave_pos && v.abs() > 1e-300)
            .map(|(k, &v)| (k as u32, v))
            .collect();
        self.etas.push(Eta { pos: leave_pos, diag: w[leave_pos], rest });
    }

    fn primal_loop(&mut self, phase1: bool) -> Result<LpStatus, DedError> {
        let mut stall = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            if self.etas.len() >= self.opts.refactor_every {
                self.refactorize()?;
                self.recompute_basics();
            }
            let (y, infeas) = if phase1 {
                let (y, infeas) = self.phase1_duals();
                if infeas <= self.opts.feas_tol {
                    return Ok(LpStatus::Optimal); // primal feasible
                }
                (y, infeas)
            } else {
                (self.duals(), 0.0)
            };
            let bland = stall >= self.opts.stall_threshold;
            let enter = match self.price_primal(&y, phase1, bland) {
                PricedPrimal::Optimal => {
                    return if phase1 {
                        if infeas <= self.opts.feas_tol {
                            Ok(LpStatus::Optimal)
                        } else {
                            Ok(LpStatus::Infeasible)
                        }
                    } else {
                        Ok(LpStatus::Optimal)
                    };
                }
                PricedPrimal::Enter { col, dir } => (col, dir),
            };
            let (col, dir) = enter;
            let mut w = vec![0.0; self.m];
            for &(r, v) in &self.cols[col] {
                w[r] = v;
            }
            self.ftran(&mut w);

            match self.ratio_test(&w, dir, col, phase1) {
                None => {
                    return if phase1 {
                        Err(DedError::Solver("phase-1 direction unbounded".into()))
                    } else {
                        Ok(LpStatus::Unbounded)
                    };
                }
                Some((step, leaving, at_upper)) => {
                    self.iterations += 1;
                    if step <= 1e-12 {
                        stall += 1;
                    } else {
                        stall = 0;
                    }
                    self.apply_step(col, dir, step, &w);
                    match leaving {
                        None => {
                            // bound flip
                            self.status[col] = match self.status[col] {
                                ColStatus::AtLower => ColStatus::AtUpper,
                                ColStatus::AtUpper => ColStatus::AtLower,
                                s => s,
                            };
                            self.x[col] = self.nonbasic_value(col);
                        }
                        Some(pos) => {
                            let pivot = w[pos];
                            if pivot.abs() <= self.opts.zero_pivot {
                                // numerical breakdown: refactorize and retry
                                self.refactorize()?;
                                self.recompute_basics();
                                continue;
                            }
                            self.pivot(col, pos, at_upper, &w);
                        }
                    }
                }
            }
        }
    }

    // ---------------- dual simplex ----------------

    fn dual_feasible(&self, y: &[f64]) -> bool {
        let tol = 10.0 * self.opts.opt_tol;
        for j in 0..self.n + self.m {
            if self.status[j] == ColStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, y);
            match self.status[j] {
                ColStatus::AtLower if d < -tol => return false,
                ColStatus::AtUpper if d > tol => return false,
                ColStatus::FreeNonbasic if d.abs() > tol => return false,
                _ => {}
            }
        }
        true
    }

    /// One dual simplex run; requires a dual-feasible basis.
    ///
    /// Reduced costs are maintained incrementally from the pivot row and
    /// recomputed from scratch after each refactorization.
    fn dual_loop(&mut self) -> Result<LpStatus, DedError> {
        let feas = self.opts.feas_tol;
        let mut stall = 0usize;
        let total = self.n + self.m;
        // full reduced-cost vector
        let mut d = {
            let y = self.duals();
            let mut d = vec![0.0; total];
            for (j, dj) in d.iter_mut().enumerate() {
                if self.status[j] != ColStatus::Basic {
                    *dj = self.reduced_cost(j, &y);
                }
            }
            d
        };
        let mut alpha = vec![0.0; total];
        let mut touched: Vec<usize> = Vec::new();

        loop {
            if self.iterations >= self.opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            if self.etas.len() >= self.opts.refactor_every {
                self.refactorize()?;
                self.recompute_basics();
                let y = self.duals();
                for j in 0..total {
                    d[j] = if self.status[j] != ColStatus::Basic {
                        self.reduced_cost(j, &y)
                    } else {
                        0.0
                    };
                }
            }
            // leaving: most infeasible basic
            let bland = stall >= self.opts.stall_threshold;
            let mut leave: Option<(usize, f64, bool)> = None; // (pos, violation, at_upper_side)
            for (pos, &j) in self.basic.iter().enumerate() {
                let v = self.x[j];
                let below = self.lower[j] - v;
                let above = v - self.upper[j];
                let (viol, upper_side) = if below > above { (below, false) } else { (above, true) };
                if viol > feas {
                    let better = match leave {
                        None => true,
                        Some((bp, bv, _)) => {
                            if bland {
                                self.basic[pos] < self.basic[bp]
                            } else {
                                viol > bv
                            }
                        }
                    };
                    if better {
                        leave = Some((pos, viol, upper_side));
                    }
                }
            }
            let Some((leave_pos, _, upper_side)) = leave else {
                return Ok(LpStatus::Optimal); // primal feasible + dual feasible
            };

            // pivot row: rho = B^{-T} e_r, alpha_j = rho' A_j
            let mut rho = vec![0.0; self.m];
            rho[leave_pos] = 1.0;
            self.btran(&mut rho);

            for &j in &touched {
                alpha[j] = 0.0;
            }
            touched.clear();
            // structural columns via the rows of A, logicals directly
            for (i, &ri) in rho.iter().enumerate() {
                if ri.abs() > 1e-300 {
                    let slack = self.n + i;
                    if alpha[slack] == 0.0 {
                        touched.push(slack);
                    }
                    alpha[slack] -= ri;
                }
            }
            {
                let csr = self.csr_rows();
                for (i, &ri) in rho.iter().enumerate() {
                    if ri.abs() <= 1e-300 {
                        continue;
                    }
                    let (ptr, cols, vals) = csr;
                    for k in ptr[i]..ptr[i + 1] {
                        let j = cols[k];
                        if alpha[j] == 0.0 && vals[k] != 0.0 {
                            touched.push(j);
                        }
                        alpha[j] += ri * vals[k];
                    }
                }
            }

            // entering: min |d_j| / |alpha_j| over eligible nonbasics, with
            // the largest |alpha| among near-ties (Bland: smallest index)
            let want = if upper_side { 1.0 } else { -1.0 };
            let mut min_ratio = f64::INFINITY;
            let mut have_candidate = false;
            for &j in &touched {
                if self.status[j] == ColStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = alpha[j];
                if a.abs() <= self.opts.zero_pivot {
                    continue;
                }
                let eligible = match self.status[j] {
                    ColStatus::AtLower => want * a > 0.0,
                    ColStatus::AtUpper => want * a < 0.0,
                    ColStatus::FreeNonbasic => true,
                    ColStatus::Basic => false,
                };
                if !eligible {
                    continue;
                }
                have_candidate = true;
                min_ratio = min_ratio.min(d[j].abs() / a.abs());
            }
            if !have_candidate {
                return Ok(LpStatus::Infeasible); // dual unbounded
            }
            let cutoff = min_ratio + 1e-9 * (1.0 + min_ratio);
            let mut enter: Option<(usize, f64)> = None; // (col, |alpha|)
            for &j in &touched {
                if self.status[j] == ColStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = alpha[j];
                if a.abs() <= self.opts.zero_pivot {
                    continue;
                }
                let eligible = match self.status[j] {
                    ColStatus::AtLower => want * a > 0.0,
                    ColStatus::AtUpper => want * a < 0.0,
                    ColStatus::FreeNonbasic => true,
                    ColStatus::Basic => false,
                };
                if !eligible || d[j].abs() / a.abs() > cutoff {
                    continue;
                }
                let better = match enter {
                    None => true,
                    Some((bc, ba)) => {
                        if bland {
                            j < bc
                        } else {
                            a.abs() > ba
                        }
                    }
                };
                if better {
                    enter = Some((j, a.abs()));
                }
            }
            let Some((enter, _)) = enter else {
                return Ok(LpStatus::Infeasible);
            };

            // primal step: bring the leaving basic exactly to its bound
            let mut w = vec![0.0; self.m];
            for &(r, v) in &self.cols[enter] {
                w[r] = v;
            }
            self.ftran(&mut w);
            let pivot = w[leave_pos];
            if pivot.abs() <= self.opts.zero_pivot {
                self.refactorize()?;
                self.recompute_basics();
                let y = self.duals();
                for j in 0..total {
                    d[j] = if self.status[j] != ColStatus::Basic {
                        self.reduced_cost(j, &y)
                    } else {
                        0.0
                    };
                }
                stall += 1;
                if stall > 2 * self.opts.stall_threshold {
                    return Ok(LpStatus::IterationLimit);
                }
                continue;
            }
            let out = self.basic[leave_pos];
            let target = if upper_side { self.upper[out] } else { self.lower[out] };
            let theta = (self.x[out] - target) / pivot;
            self.iterations += 1;
            if theta.abs() <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            // dual update: d_j -= theta_d * alpha_j, leaving col picks up -theta_d
            let theta_d = d[enter] / alpha[enter];
            for &j in &touched {
                if alpha[j] != 0.0 && self.status[j] != ColStatus::Basic {
                    d[j] -= theta_d * alpha[j];
                }
            }
            d[enter] = 0.0;
            d[out] = -theta_d;
            // x_enter moves by theta, basics by -theta * w
            for (pos, &j) in self.basic.iter().enumerate() {
                if w[pos] != 0.0 {
                    self.x[j] -= theta * w[pos];
                }
            }
            self.x[enter] += theta;
            self.pivot(enter, leave_pos, upper_side, &w);
        }
    }

    // ---------------- drivers ----------------

    fn ensure_factorized(&mut self) -> Result<(), DedError> {
        if self.lu.is_none() {
            self.refactorize()?;
            self.xb_stale = true;
        }
        if self.xb_stale {
            self.recompute_basics();
        }
        Ok(())
    }

    /// Continues from the installed basis to optimality.
    pub fn resolve(&mut self) -> Result<LpSolution, DedError> {
        self.ensure_factorized()?;
        let y = self.duals();
        let mut status = if self.dual_feasible(&y) {
            self.dual_loop()?
        } else {
            let s = self.primal_loop(true)?;
            if s == LpStatus::Optimal {
                self.primal_loop(false)?
            } else {
                s
            }
        };

        // verification round: refresh the factorization if updates have
        // accumulated, recompute, and re-run if anything drifted
        for _round in 0..3 {
            if status != LpStatus::Optimal {
                break;
            }
            if !self.etas.is_empty() {
                self.refactorize()?;
                self.recompute_basics();
            }
            let y = self.duals();
            let pinf = self.primal_infeasibility();
            if pinf > self.opts.feas_tol {
                status = self.dual_loop()?;
                continue;
            }
            if !self.dual_feasible(&y) {
                status = self.primal_loop(false)?;
                continue;
            }
            break;
        }
        Ok(self.extract(status))
    }

    fn primal_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for &j in &self.basic {
            worst = worst
                .max(self.lower[j] - self.x[j])
                .max(self.x[j] - self.upper[j]);
        }
        worst.max(0.0)
    }

    fn extract(&mut self, status: LpStatus) -> LpSolution {
        if self.xb_stale {
            self.recompute_basics();
        }
        let y_scaled = self.duals();
        let mut primal = vec![0.0; self.n];
        for j in 0..self.n {
            primal[j] = self.x[j] * self.col_scale[j];
        }
        let mut dual = vec![0.0; self.m];
        for i in 0..self.m {
            dual[i] = y_scaled[i] * self.row_scale[i];
        }
        let mut reduced = vec![0.0; self.n];
        for j in 0..self.n {
            reduced[j] = self.reduced_cost(j, &y_scaled) / self.col_scale[j];
        }
        let objective: f64 = self.scaled_objective();
        LpSolution {
            status,
            primal,
            dual,
            reduced_cost: reduced,
            objective,
            iterations: self.iterations,
            basis: self.basis(),
        }
    }

    /// Full solve with optional warm basis (cold start = slack basis).
    pub fn solve_from(&mut self, warm: Option<&LpBasis>) -> Result<LpSolution, DedError> {
        self.iterations = 0;
        match warm {
            Some(b) => self.install_basis(b)?,
            None => self.set_slack_basis(),
        }
        self.resolve()
    }
}

fn round_pow2(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    let e = x.log2().round();
    (2.0f64).powi(e.clamp(-60.0, 60.0) as i32)
}

/// Solves an LP, optionally warm started.
pub fn solve_lp(lp: &SparseLp, warm: Option<&LpBasis>) -> Result<LpSolution, DedError> {
    solve_lp_with(lp, warm, SimplexOptions::default())
}

pub fn solve_lp_with(
    lp: &SparseLp,
    warm: Option<&LpBasis>,
    opts: SimplexOptions,
) -> Result<LpSolution, DedError> {
    let mut s = Simplex::new(lp, opts)?;
    let mut sol = s.solve_from(warm)?;
    sol.objective += lp.obj_const;
    Ok(sol)
}

/// Reoptimizes after changing one column's bounds, warm starting from an
/// optimal basis of the parent problem.
pub fn reoptimize_after_bound_change(
    lp: &SparseLp,
    basis: &LpBasis,
    col: usize,
    new_bounds: (f64, f64),
) -> Result<LpSolution, DedError> {
    let mut s = Simplex::new(lp, SimplexOptions::default())?;
    s.set_col_bounds(col, new_bounds.0, new_bounds.1);
    s.iterations = 0;
    s.install_basis(basis)?;
    let mut sol = s.resolve()?;
    sol.objective += lp.obj_const;
    Ok(sol)
}
