//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Columns are eliminated left-looking in order of increasing count. Pivot
//! rows are chosen by threshold partial pivoting, preferring sparse rows.
//! After factorization each basis change appends an eta column.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NONE: usize = usize::MAX;
const SINGULAR_TOL: f64 = 1e-11;
const THRESHOLD: f64 = 0.1;
const DROP_TOL: f64 = 1e-14;

struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

pub(crate) struct Factor {
    m: usize,
    pivot_row: Vec<usize>,
    pivot_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    /// Scratch of length `m`; every entry is written before it is read.
    scratch: RefCell<Vec<f64>>,
}

/// Basis positions whose column was dependent, each paired with the row
/// whose unit column replaced it.
pub(crate) type Replacements = Vec<(usize, usize)>;

impl Factor {
    /// Factorizes the basis whose column at position `p` is given by
    /// `column(p)`. Dependent columns are replaced by `-e_row` columns.
    pub fn new<F>(m: usize, mut column: F) -> (Factor, Replacements)
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * m);
        let mut start = Vec::with_capacity(m + 1);
        start.push(0);
        for p in 0..m {
            column(p, &mut entries);
            start.push(entries.len());
        }
        let mut row_count = vec![0usize; m];
        for &(i, _) in &entries {
            row_count[i] += 1;
        }
        let len = |p: usize| start[p + 1] - start[p];
        // Stable counting sort by column length.
        let longest = (0..m).map(len).max().unwrap_or(0);
        let mut bucket = vec![0usize; longest + 2];
        for p in 0..m {
            bucket[len(p) + 1] += 1;
        }
        for l in 0..=longest {
            bucket[l + 1] += bucket[l];
        }
        let mut order = vec![0usize; m];
        for p in 0..m {
            let l = len(p);
            order[bucket[l]] = p;
            bucket[l] += 1;
        }

        let mut f = Factor {
            m,
            pivot_row: Vec::with_capacity(m),
            pivot_pos: Vec::with_capacity(m),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            eta_nnz: 0,
            scratch: RefCell::new(vec![0.0; m]),
        };
        let mut row_k = vec![NONE; m];
        let mut work = vec![0.0; m];
        let mut touched = vec![false; m];
        let mut nz: Vec<usize> = Vec::new();
        let mut queued: Vec<bool> = Vec::with_capacity(m);
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut dependent = Vec::new();

        for &p in &order {
            // Singleton on a free row: nothing to eliminate.
            if let [(i, v)] = entries[start[p]..start[p + 1]] {
                if row_k[i] == NONE && v.abs() >= SINGULAR_TOL {
                    row_k[i] = f.pivot_row.len();
                    f.l_start.push(f.l_idx.len());
                    f.u_start.push(f.u_idx.len());
                    f.u_diag.push(v);
                    f.pivot_row.push(i);
                    f.pivot_pos.push(p);
                    queued.push(false);
                    continue;
                }
            }
            for &(i, v) in &entries[start[p]..start[p + 1]] {
                if !touched[i] {
                    touched[i] = true;
                    nz.push(i);
                }
                work[i] += v;
                if row_k[i] != NONE && !queued[row_k[i]] {
                    queued[row_k[i]] = true;
                    heap.push(Reverse(row_k[i]));
                }
            }
            while let Some(Reverse(k)) = heap.pop() {
                queued[k] = false;
                let v = work[f.pivot_row[k]];
                if v == 0.0 {
                    continue;
                }
                for t in f.l_start[k]..f.l_start[k + 1] {
                    let i = f.l_idx[t];
                    if !touched[i] {
                        touched[i] = true;
                        nz.push(i);
                    }
                    work[i] -= f.l_val[t] * v;
                    if row_k[i] != NONE && !queued[row_k[i]] {
                        queued[row_k[i]] = true;
                        heap.push(Reverse(row_k[i]));
                    }
                }
            }
            let mut max_abs = 0.0f64;
            for &i in &nz {
                if row_k[i] == NONE {
                    max_abs = max_abs.max(work[i].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                dependent.push(p);
            } else {
                let mut best = NONE;
                for &i in &nz {
                    if row_k[i] == NONE && work[i].abs() >= THRESHOLD * max_abs {
                        let better = best == NONE
                            || row_count[i] < row_count[best]
                            || (row_count[i] == row_count[best] && i < best);
                        if better {
                            best = i;
                        }
                    }
                }
                let k = f.pivot_row.len();
                let piv = work[best];
                for &i in &nz {
                    let v = work[i];
                    if i == best || v.abs() <= DROP_TOL {
                        continue;
                    }
                    if row_k[i] == NONE {
                        f.l_idx.push(i);
                        f.l_val.push(v / piv);
                    } else {
                        f.u_idx.push(row_k[i]);
                        f.u_val.push(v);
                    }
                }
                f.l_start.push(f.l_idx.len());
                f.u_start.push(f.u_idx.len());
                f.u_diag.push(piv);
                f.pivot_row.push(best);
                f.pivot_pos.push(p);
                row_k[best] = k;
                queued.push(false);
            }
            for &i in &nz {
                work[i] = 0.0;
                touched[i] = false;
            }
            nz.clear();
        }

        let mut replacements = Vec::new();
        if !dependent.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&i| row_k[i] == NONE).collect();
            for (&p, &r) in dependent.iter().zip(&free_rows) {
                let k = f.pivot_row.len();
                f.l_start.push(f.l_idx.len());
                f.u_start.push(f.u_idx.len());
                f.u_diag.push(-1.0);
                f.pivot_row.push(r);
                f.pivot_pos.push(p);
                row_k[r] = k;
                replacements.push((p, r));
            }
        }
        (f, replacements)
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Solves `B x = rhs` in place; `rhs` is indexed by row on entry and by
    /// basis position on exit.
    pub fn ftran(&self, rhs: &mut Vec<f64>) {
        let m = self.m;
        let work = rhs;
        for k in 0..m {
            let v = work[self.pivot_row[k]];
            if v != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    work[self.l_idx[t]] -= self.l_val[t] * v;
                }
            }
        }
        for k in (0..m).rev() {
            let r = self.pivot_row[k];
            let xk = work[r] / self.u_diag[k];
            work[r] = xk;
            if xk != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    work[self.pivot_row[self.u_idx[t]]] -= self.u_val[t] * xk;
                }
            }
        }
        let mut scratch = self.scratch.borrow_mut();
        let out = &mut *scratch;
        for k in 0..m {
            out[self.pivot_pos[k]] = work[self.pivot_row[k]];
        }
        for eta in &self.etas {
            let xr = out[eta.pos] / eta.pivot;
            out[eta.pos] = xr;
            if xr != 0.0 {
                for (&p, &a) in eta.idx.iter().zip(&eta.val) {
                    out[p] -= a * xr;
                }
            }
        }
        std::mem::swap(work, out);
    }

    /// Solves `B^T y = c` in place; `c` is indexed by basis position on
    /// entry and by row on exit.
    pub fn btran(&self, c: &mut Vec<f64>) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for (&p, &a) in eta.idx.iter().zip(&eta.val) {
                s -= a * c[p];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut scratch = self.scratch.borrow_mut();
        let w = &mut *scratch;
        for k in 0..m {
            let mut s = c[self.pivot_pos[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[t] * w[self.u_idx[t]];
            }
            w[k] = s / self.u_diag[k];
        }
        let y = c;
        for k in (0..m).rev() {
            let mut v = w[k];
            for t in self.l_start[k]..self.l_start[k + 1] {
                v -= self.l_val[t] * y[self.l_idx[t]];
            }
            y[self.pivot_row[k]] = v;
        }
    }

    /// Records that position `pos` now holds a column whose FTRAN image is
    /// `alpha` (indexed by position).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if p != pos && a.abs() > DROP_TOL {
                idx.push(p);
                val.push(a);
            }
        }
        self.eta_nnz += idx.len() + 1;
        self.etas.push(Eta { pos, pivot: alpha[pos], idx, val });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[Vec<f64>]) -> impl FnMut(usize, &mut Vec<(usize, f64)>) + '_ {
        move |p, out| {
            for (i, row) in a.iter().enumerate() {
                if row[p] != 0.0 {
                    out.push((i, row[p]));
                }
            }
        }
    }

    fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
    }

    #[test]
    fn solves_both_directions() {
        let a = vec![
            vec![2.0, 0.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.0, 0.0],
            vec![0.0, 1.0, 4.0, 1.0],
            vec![0.0, 0.0, 1.0, 5.0],
        ];
        let (f, rep) = Factor::new(4, dense_cols(&a));
        assert!(rep.is_empty());
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let mut x = b.clone();
        f.ftran(&mut x);
        let back = mat_vec(&a, &x);
        for i in 0..4 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let mut y = b.clone();
        f.btran(&mut y);
        let at: Vec<Vec<f64>> = (0..4).map(|j| (0..4).map(|i| a[i][j]).collect()).collect();
        let back = mat_vec(&at, &y);
        for i in 0..4 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_refactor() {
        let mut a = vec![
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![3.0, 0.0, 1.0],
        ];
        let (mut f, _) = Factor::new(3, dense_cols(&a));
        let newcol = [1.0, 1.0, 1.0];
        let mut alpha: Vec<f64> = newcol.to_vec();
        f.ftran(&mut alpha);
        f.push_eta(1, &alpha);
        for i in 0..3 {
            a[i][1] = newcol[i];
        }
        let b = vec![0.3, -1.0, 2.0];
        let mut x = b.clone();
        f.ftran(&mut x);
        let back = mat_vec(&a, &x);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let mut y = b.clone();
        f.btran(&mut y);
        for j in 0..3 {
            let s: f64 = (0..3).map(|i| a[i][j] * y[i]).sum();
            assert!((s - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_is_replaced() {
        let a = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let (_, rep) = Factor::new(2, dense_cols(&a));
        assert_eq!(rep.len(), 1);
    }
}
