//! Solver-neutral sparse linear program with integrality marks.
//!
//! Rows are two-sided (`row_lower <= a'x <= row_upper`); equalities have
//! equal sides and one-sided rows use infinities. Columns carry bounds,
//! objective coefficients and an integrality flag. Names map every column
//! and row back to its model symbol for decoding and MPS export.

use crate::error::DedError;

/// Column identity in the dispatch MILP (or a free-form label).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ColName {
    /// Total output of `unit` in `period`: `P(i,t)`.
    Output { unit: usize, period: usize },
    /// Segment contribution `S(l,i,t)`.
    Segment { seg: usize, unit: usize, period: usize },
    /// Segment selector binary `Z(l,i,t)`.
    Selector { seg: usize, unit: usize, period: usize },
    /// Spinning reserve `SR(i,t)`.
    Reserve { unit: usize, period: usize },
    Other(String),
}

impl std::fmt::Display for ColName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColName::Output { unit, period } => write!(f, "P({unit},{period})"),
            ColName::Segment { seg, unit, period } => write!(f, "S({seg},{unit},{period})"),
            ColName::Selector { seg, unit, period } => write!(f, "Z({seg},{unit},{period})"),
            ColName::Reserve { unit, period } => write!(f, "SR({unit},{period})"),
            ColName::Other(s) => f.write_str(s),
        }
    }
}

/// Row identity in the dispatch MILP (or a free-form label).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RowName {
    /// Power balance at `period`: `B(t)`.
    Balance { period: usize },
    /// Output-to-segments linking `N(i,t)`.
    Link { unit: usize, period: usize },
    /// Selector convexity `C(i,t)`.
    Convexity { unit: usize, period: usize },
    /// Segment lower bound `L(l,i,t)`.
    SegLower { seg: usize, unit: usize, period: usize },
    /// Segment upper bound `U(l,i,t)`.
    SegUpper { seg: usize, unit: usize, period: usize },
    /// Ramp coupling `R(i,t)` between `period-1` and `period`.
    Ramp { unit: usize, period: usize },
    /// System reserve requirement `Q(t)`.
    ReserveReq { period: usize },
    /// Reserve headroom `H(i,t)`.
    Headroom { unit: usize, period: usize },
    Other(String),
}

impl std::fmt::Display for RowName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowName::Balance { period } => write!(f, "B({period})"),
            RowName::Link { unit, period } => write!(f, "N({unit},{period})"),
            RowName::Convexity { unit, period } => write!(f, "C({unit},{period})"),
            RowName::SegLower { seg, unit, period } => write!(f, "L({seg},{unit},{period})"),
            RowName::SegUpper { seg, unit, period } => write!(f, "U({seg},{unit},{period})"),
            RowName::Ramp { unit, period } => write!(f, "R({unit},{period})"),
            RowName::ReserveReq { period } => write!(f, "Q({period})"),
            RowName::Headroom { unit, period } => write!(f, "H({unit},{period})"),
            RowName::Other(s) => f.write_str(s),
        }
    }
}

/// Sparse LP/MILP in column-compressed form.
#[derive(Debug, Clone)]
pub struct SparseLp {
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub obj: Vec<f64>,
    pub obj_const: f64,
    pub integer: Vec<bool>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub col_names: Vec<ColName>,
    pub row_names: Vec<RowName>,
    // CSC storage
    pub(crate) col_ptr: Vec<usize>,
    pub(crate) row_idx: Vec<usize>,
    pub(crate) values: Vec<f64>,
}

impl SparseLp {
    pub fn n_cols(&self) -> usize {
        self.col_lower.len()
    }

    pub fn n_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of one column as `(row, value)` pairs.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Row-major copy of the coefficient matrix.
    pub fn to_csr(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let m = self.n_rows();
        let mut counts = vec![0usize; m + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..m {
            counts[i + 1] += counts[i];
        }
        let mut ptr = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for j in 0..self.n_cols() {
            for (r, v) in self.col(j) {
                cols[ptr[r]] = j;
                vals[ptr[r]] = v;
                ptr[r] += 1;
            }
        }
        (counts, cols, vals)
    }

    /// Objective value of a full primal vector (including the constant term).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_const + self.obj.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Row activities `Ax`.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.n_rows()];
        for j in 0..self.n_cols() {
            let xj = x[j];
            if xj != 0.0 {
                for (r, v) in self.col(j) {
                    act[r] += v * xj;
                }
            }
        }
        act
    }

    /// Largest violation of row and column bounds by `x`.
    pub fn max_infeasibility(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n_cols() {
            worst = worst.max(self.col_lower[j] - x[j]).max(x[j] - self.col_upper[j]);
        }
        for (i, a) in self.row_activity(x).iter().enumerate() {
            worst = worst.max(self.row_lower[i] - a).max(a - self.row_upper[i]);
        }
        worst.max(0.0)
    }
}

/// Incremental builder for [`SparseLp`].
#[derive(Debug, Default)]
pub struct LpBuilder {
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    obj: Vec<f64>,
    obj_const: f64,
    integer: Vec<bool>,
    col_names: Vec<ColName>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    row_names: Vec<RowName>,
    triplets: Vec<(usize, usize, f64)>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_obj_const(&mut self, c: f64) {
        self.obj_const = c;
    }

    pub fn add_col(&mut self, name: ColName, lower: f64, upper: f64, obj: f64, integer: bool) -> usize {
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.obj.push(obj);
        self.integer.push(integer);
        self.col_names.push(name);
        self.col_lower.len() - 1
    }

    pub fn add_row(&mut self, name: RowName, lower: f64, upper: f64, terms: &[(usize, f64)]) -> usize {
        let r = self.row_lower.len();
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.row_names.push(name);
        for &(c, v) in terms {
            if v != 0.0 {
                self.triplets.push((r, c, v));
            }
        }
        r
    }

    pub fn build(mut self) -> Result<SparseLp, DedError> {
        let n = self.col_lower.len();
        let m = self.row_lower.len();
        for j in 0..n {
            if self.col_lower[j] > self.col_upper[j] {
                return Err(DedError::Build(format!(
                    "column {} has empty bound interval [{}, {}]",
                    self.col_names[j], self.col_lower[j], self.col_upper[j]
                )));
            }
            if self.integer[j] && !(self.col_lower[j].is_finite() && self.col_upper[j].is_finite()) {
                return Err(DedError::Build(format!(
                    "integral column {} must have finite bounds",
                    self.col_names[j]
                )));
            }
        }
        for i in 0..m {
            if self.row_lower[i] > self.row_upper[i] {
                return Err(DedError::Build(format!(
                    "row {} has empty bound interval [{}, {}]",
                    self.row_names[i], self.row_lower[i], self.row_upper[i]
                )));
            }
        }
        // sort column-major and reject duplicate coordinates
        self.triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        for w in self.triplets.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(DedError::Build(format!(
                    "duplicate coefficient for row {} column {}",
                    self.row_names[w[0].0], self.col_names[w[0].1]
                )));
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for &(_, c, _) in &self.triplets {
            col_ptr[c + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let row_idx = self.triplets.iter().map(|&(r, _, _)| r).collect();
        let values = self.triplets.iter().map(|&(_, _, v)| v).collect();
        Ok(SparseLp {
            col_lower: self.col_lower,
            col_upper: self.col_upper,
            obj: self.obj,
            obj_const: self.obj_const,
            integer: self.integer,
            row_lower: self.row_lower,
            row_upper: self.row_upper,
            col_names: self.col_names,
            row_names: self.row_names,
            col_ptr,
            row_idx,
            values,
        })
    }
}
