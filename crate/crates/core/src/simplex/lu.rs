//! Sparse LU factorization of simplex basis matrices with Markowitz
//! pivoting, plus product-form updates for basis exchanges.
//!
//! The factorization consumes the basis columns as sparse `(row, value)`
//! lists. Solves work on dense scratch vectors indexed by basis position;
//! the op-list representation keeps forward/backward sweeps linear in the
//! factor nonzeros.

/// Elimination operation `row[target] -= mult * row[source]`.
#[derive(Debug, Clone, Copy)]
struct ElimOp {
    target: u32,
    source: u32,
    mult: f64,
}

/// One stored row of U: the pivot row's surviving off-pivot entries.
#[derive(Debug, Clone, Copy)]
struct URange {
    start: u32,
    end: u32,
}

#[derive(Debug)]
pub struct LuFactors {
    m: usize,
    ops: Vec<ElimOp>,
    pivots: Vec<f64>,
    /// Pivot row / column ids in elimination order.
    prow: Vec<u32>,
    pcol: Vec<u32>,
    urows: Vec<URange>,
    uentries: Vec<(u32, f64)>,
}

#[derive(Debug)]
pub enum LuError {
    /// Structurally or numerically singular; the listed basis positions
    /// (columns of the input) could not be pivoted.
    Singular { unpivoted_cols: Vec<usize> },
}

const ABS_PIVOT_FLOOR: f64 = 1e-11;
/// Row-relative stability threshold for Markowitz candidates.
const REL_PIVOT: f64 = 0.05;
/// How many minimum-count rows to inspect per pivot choice.
const CANDIDATE_ROWS: usize = 8;

pub fn factorize(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<LuFactors, LuError> {
    assert_eq!(cols.len(), m);
    // Row-major working matrix.
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    // Pattern lists per column (may contain stale rows, validated on use).
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut col_count = vec![0u32; m];
    for (j, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            if v != 0.0 {
                rows[r].push((j as u32, v));
                col_rows[j].push(r as u32);
                col_count[j] += 1;
            }
        }
    }
    let mut row_alive = vec![true; m];
    let mut col_alive = vec![true; m];
    let mut row_count: Vec<u32> = rows.iter().map(|r| r.len() as u32).collect();

    let mut ops = Vec::new();
    let mut pivots = Vec::with_capacity(m);
    let mut prow = Vec::with_capacity(m);
    let mut pcol = Vec::with_capacity(m);
    let mut urows = Vec::with_capacity(m);
    let mut uentries = Vec::new();
    let mut scratch: Vec<f64> = vec![0.0; m];
    let mut touched: Vec<u32> = Vec::new();
    // generation-stamped markers: in_prow marks pivot-row columns, merged
    // marks columns already combined into the current target row
    let mut in_prow = vec![0u32; m];
    let mut merged = vec![0u32; m];
    let mut gen = 0u32;

    // lazy row buckets by count: entries are revalidated on pop, so stale
    // duplicates are harmless
    const BUCKETS: usize = 9;
    let bucket_of = |count: u32| (count as usize).min(BUCKETS - 1);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); BUCKETS];
    for r in 0..m {
        buckets[bucket_of(row_count[r])].push(r as u32);
    }

    for _step in 0..m {
        // Pop candidate rows of minimal count, minimize the Markowitz score
        // among entries passing the stability threshold.
        let mut best: Option<(u32, u32, f64, u64)> = None; // (row, col, val, score)
        let mut inspected: Vec<u32> = Vec::new();
        'select: for b in 1..BUCKETS {
            let mut pops = 0usize;
            while let Some(r) = buckets[b].pop() {
                pops += 1;
                if pops > m + BUCKETS {
                    break;
                }
                let r_us = r as usize;
                if !row_alive[r_us] || row_count[r_us] == 0 {
                    continue;
                }
                let true_bucket = bucket_of(row_count[r_us]);
                if true_bucket != b {
                    buckets[true_bucket].push(r);
                    continue;
                }
                inspected.push(r);
                let row_max = rows[r_us]
                    .iter()
                    .filter(|(c, _)| col_alive[*c as usize])
                    .map(|(_, v)| v.abs())
                    .fold(0.0f64, f64::max);
                if row_max > ABS_PIVOT_FLOOR {
                    for &(c, v) in &rows[r_us] {
                        if !col_alive[c as usize] {
                            continue;
                        }
                        if v.abs() < REL_PIVOT * row_max || v.abs() <= ABS_PIVOT_FLOOR {
                            continue;
                        }
                        let score =
                            (row_count[r_us] as u64 - 1) * (col_count[c as usize] as u64 - 1);
                        let better = match best {
                            None => true,
                            Some((_, _, bv, bs)) => score < bs || (score == bs && v.abs() > bv.abs()),
                        };
                        if better {
                            best = Some((r, c, v, score));
                        }
                    }
                }
                if inspected.len() >= CANDIDATE_ROWS && best.is_some() {
                    break 'select;
                }
            }
            if best.is_some() {
                break;
            }
        }
        // return unchosen candidates for later steps
        for &r in &inspected {
            if row_alive[r as usize] && Some(r) != best.map(|(br, _, _, _)| br) {
                buckets[bucket_of(row_count[r as usize])].push(r);
            }
        }

        let (pr, pc, pv) = match best {
            Some((r, c, v, _)) => (r, c, v),
            None => {
                let unpivoted = (0..m).filter(|&j| col_alive[j]).collect();
                return Err(LuError::Singular { unpivoted_cols: unpivoted });
            }
        };

        // Scatter the pivot row for fast elimination.
        touched.clear();
        gen += 1;
        let prow_gen = gen;
        for &(c, v) in &rows[pr as usize] {
            if col_alive[c as usize] {
                scratch[c as usize] = v;
                in_prow[c as usize] = prow_gen;
                touched.push(c);
            }
        }

        // Eliminate the pivot column from every other alive row.
        let candidates = std::mem::take(&mut col_rows[pc as usize]);
        for &r in &candidates {
            let r = r as usize;
            if r as u32 == pr || !row_alive[r] {
                continue;
            }
            let Some(pos) = rows[r].iter().position(|&(c, _)| c == pc) else {
                continue; // stale pattern entry
            };
            let mult = rows[r][pos].1 / pv;
            ops.push(ElimOp { target: r as u32, source: pr, mult });
            // row_r -= mult * pivot_row  (marker-based sparse merge)
            gen += 1;
            let row = std::mem::take(&mut rows[r]);
            let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len() + touched.len());
            for &(c, v) in row.iter() {
                if c == pc || !col_alive[c as usize] {
                    continue;
                }
                if in_prow[c as usize] == prow_gen {
                    merged[c as usize] = gen;
                    let nv = v - mult * scratch[c as usize];
                    if nv.abs() > 1e-300 {
                        out.push((c, nv));
                    } else {
                        col_count[c as usize] = col_count[c as usize].saturating_sub(1);
                    }
                } else {
                    out.push((c, v));
                }
            }
            for &c in &touched {
                if c != pc && merged[c as usize] != gen {
                    let nv = -mult * scratch[c as usize];
                    if nv != 0.0 {
                        out.push((c, nv));
                        col_rows[c as usize].push(r as u32);
                        col_count[c as usize] += 1;
                    }
                }
            }
            rows[r] = out;
            row_count[r] = rows[r].len() as u32;
        }

        // Record the U row (off-pivot alive entries of the pivot row).
        let start = uentries.len() as u32;
        for &c in &touched {
            if c != pc {
                uentries.push((c, scratch[c as usize]));
                col_count[c as usize] = col_count[c as usize].saturating_sub(1);
            }
            scratch[c as usize] = 0.0;
        }
        urows.push(URange { start, end: uentries.len() as u32 });
        pivots.push(pv);
        prow.push(pr);
        pcol.push(pc);
        row_alive[pr as usize] = false;
        col_alive[pc as usize] = false;
        rows[pr as usize].clear();
        row_count[pr as usize] = 0;
    }

    Ok(LuFactors { m, ops, pivots, prow, pcol, urows, uentries })
}

impl LuFactors {
    /// In-place solve of `B x = b`. On entry `work` holds `b` indexed by row;
    /// on exit it holds `x` indexed by basis position (input column id).
    pub fn ftran(&self, work: &mut [f64]) {
        debug_assert_eq!(work.len(), self.m);
        for op in &self.ops {
            let delta = op.mult * work[op.source as usize];
            if delta != 0.0 {
                work[op.target as usize] -= delta;
            }
        }
        // Backward substitution through U, gathering into column ids.
        let mut x = vec![0.0; self.m];
        for k in (0..self.m).rev() {
            let mut acc = work[self.prow[k] as usize];
            let ur = self.urows[k];
            for &(c, v) in &self.uentries[ur.start as usize..ur.end as usize] {
                acc -= v * x[c as usize];
            }
            x[self.pcol[k] as usize] = acc / self.pivots[k];
        }
        work.copy_from_slice(&x);
    }

    /// In-place solve of `B' y = c`. On entry `work` holds `c` indexed by
    /// basis position; on exit it holds `y` indexed by row.
    pub fn btran(&self, work: &mut [f64]) {
        debug_assert_eq!(work.len(), self.m);
        let mut y = vec![0.0; self.m];
        for k in 0..self.m {
            let w = work[self.pcol[k] as usize] / self.pivots[k];
            y[self.prow[k] as usize] = w;
            if w != 0.0 {
                let ur = self.urows[k];
                for &(c, v) in &self.uentries[ur.start as usize..ur.end as usize] {
                    work[c as usize] -= v * w;
                }
            }
        }
        for op in self.ops.iter().rev() {
            let delta = op.mult * y[op.target as usize];
            if delta != 0.0 {
                y[op.source as usize] -= delta;
            }
        }
        work.copy_from_slice(&y);
    }
}

/// Product-form eta: basis position `pos` was replaced by a column whose
/// basis representation was `w` (sparse, by basis position).
#[derive(Debug, Clone)]
pub struct Eta {
    pub pos: usize,
    pub diag: f64,
    /// Off-diagonal entries of `w` (position, value).
    pub rest: Vec<(u32, f64)>,
}

impl Eta {
    pub fn apply_ftran(&self, x: &mut [f64]) {
        let xr = x[self.pos] / self.diag;
        x[self.pos] = xr;
        if xr != 0.0 {
            for &(k, v) in &self.rest {
                x[k as usize] -= v * xr;
            }
        }
    }

    pub fn apply_btran(&self, y: &mut [f64]) {
        let mut dot = 0.0;
        for &(k, v) in &self.rest {
            dot += v * y[k as usize];
        }
        y[self.pos] = (y[self.pos] - dot) / self.diag;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m)
            .map(|j| {
                (0..m)
                    .filter_map(|i| {
                        let v = a[i][j];
                        (v != 0.0).then_some((i, v))
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn ftran_btran_roundtrip() {
        let a = vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0, 3.0],
            vec![4.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.5, 0.0, 1.0],
        ];
        let lu = factorize(4, &dense_to_cols(&a)).unwrap();

        let b = [1.0, 2.0, -1.0, 0.5];
        let mut x = b;
        lu.ftran(&mut x);
        for i in 0..4 {
            let ax: f64 = (0..4).map(|j| a[i][j] * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12, "row {i}: {ax} vs {}", b[i]);
        }

        let c = [0.3, -1.0, 2.0, 0.0];
        let mut y = c;
        lu.btran(&mut y);
        for j in 0..4 {
            let aty: f64 = (0..4).map(|i| a[i][j] * y[i]).sum();
            assert!((aty - c[j]).abs() < 1e-12, "col {j}");
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let a = vec![
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        match factorize(3, &dense_to_cols(&a)) {
            Err(LuError::Singular { unpivoted_cols }) => assert!(!unpivoted_cols.is_empty()),
            Ok(_) => panic!("expected singularity"),
        }
    }

    #[test]
    fn random_sparse_roundtrips() {
        // deterministic xorshift
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..50 {
            let m = 3 + (trial % 20);
            let mut a = vec![vec![0.0; m]; m];
            for i in 0..m {
                a[i][i] = 1.0 + next();
                for _ in 0..2 {
                    let j = (next() * m as f64) as usize % m;
                    a[i][j] += next() - 0.5;
                }
            }
            let lu = factorize(m, &dense_to_cols(&a)).unwrap();
            let b: Vec<f64> = (0..m).map(|_| next() - 0.5).collect();
            let mut x = b.clone();
            lu.ftran(&mut x);
            for i in 0..m {
                let ax: f64 = (0..m).map(|j| a[i][j] * x[j]).sum();
                assert!((ax - b[i]).abs() < 1e-9, "m={m} row {i}");
            }
            let mut y = b.clone();
            lu.btran(&mut y);
            for j in 0..m {
                let aty: f64 = (0..m).map(|i| a[i][j] * y[i]).sum();
                assert!((aty - b[j]).abs() < 1e-9, "m={m} col {j}");
            }
        }
    }
}
