//! Dense linear algebra over a prime field.
//!
//! Rows are stored as `u32` residues. Elimination is incremental: rows are
//! fed in chunks, reduced against every pivot row found so far, then
//! against each other. Pivot rows are kept in creation order, and each one
//! is zero at every earlier pivot column, so a single forward pass in
//! creation order clears all pivot columns of an incoming row.

use crate::arith::modp::PrimeField;

mod kernels;

const CHUNK: usize = 32;

/// Row-echelon state built incrementally from rows of a fixed width.
#[derive(Clone, Debug)]
pub struct Echelon {
    fp: PrimeField,
    cols: usize,
    pivots: Vec<usize>,
    rows: Vec<Vec<u32>>,
    is_pivot: Vec<bool>,
    pending: Vec<Vec<u32>>,
    rows_seen: usize,
}

impl Echelon {
    pub fn new(fp: PrimeField, cols: usize) -> Self {
        Self {
            fp,
            cols,
            pivots: Vec::new(),
            rows: Vec::new(),
            is_pivot: vec![false; cols],
            pending: Vec::new(),
            rows_seen: 0,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Rank of the rows pushed so far (pending rows are flushed first).
    pub fn rank(&mut self) -> usize {
        self.flush();
        self.pivots.len()
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn is_full_rank(&mut self) -> bool {
        self.rank() == self.cols
    }

    pub fn push_row(&mut self, row: Vec<u32>) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.rows_seen += 1;
        self.pending.push(row);
        if self.pending.len() >= CHUNK {
            self.flush();
        }
    }

    pub fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let mut chunk = std::mem::take(&mut self.pending);
        // reduce against existing pivots, in creation order, three at a time
        let fp = &self.fp;
        let n = self.rows.len();
        let mut k = 0;
        while k + 3 <= n {
            let (p0, p1, p2) = (self.pivots[k], self.pivots[k + 1], self.pivots[k + 2]);
            let (r0, r1, r2) = (&self.rows[k], &self.rows[k + 1], &self.rows[k + 2]);
            let start = p0.min(p1).min(p2);
            for row in chunk.iter_mut() {
                let c0 = row[p0] as u64;
                let c1 = fp.sub(row[p1] as u64, fp.mul(c0, r0[p1] as u64));
                let c2 = fp.sub(fp.sub(row[p2] as u64, fp.mul(c0, r0[p2] as u64)), fp.mul(c1, r1[p2] as u64));
                if c0 == 0 && c1 == 0 && c2 == 0 {
                    continue;
                }
                let c = [fp.neg(c0) as u32, fp.neg(c1) as u32, fp.neg(c2) as u32];
                kernels::axpy3(fp, &mut row[start..], [&r0[start..], &r1[start..], &r2[start..]], c);
            }
            k += 3;
        }
        for k in k..n {
            let pc = self.pivots[k];
            let prow = &self.rows[k];
            for row in chunk.iter_mut() {
                let c = row[pc];
                if c != 0 {
                    kernels::axpy(fp, &mut row[pc..], &prow[pc..], fp.neg(c as u64) as u32);
                }
            }
        }
        // then against each other
        for i in 0..chunk.len() {
            let pc = match chunk[i].iter().position(|&x| x != 0) {
                Some(pc) => pc,
                None => continue,
            };
            let inv = self.fp.inv(chunk[i][pc] as u64).unwrap();
            if inv != 1 {
                kernels::scale(&self.fp, &mut chunk[i][pc..], inv as u32);
            }
            let (head, tail) = chunk.split_at_mut(i + 1);
            let prow = &head[i];
            for row in tail.iter_mut() {
                let c = row[pc];
                if c != 0 {
                    kernels::axpy(&self.fp, &mut row[pc..], &prow[pc..], self.fp.neg(c as u64) as u32);
                }
            }
            self.is_pivot[pc] = true;
            self.pivots.push(pc);
            self.rows.push(std::mem::take(&mut chunk[i]));
        }
    }

    /// Basis of `{x : A x = 0}`, one vector per free column (that entry set
    /// to 1), ordered by free column.
    pub fn kernel(&mut self) -> Vec<Vec<u64>> {
        self.flush();
        let free: Vec<usize> = (0..self.cols).filter(|&c| !self.is_pivot[c]).collect();
        if free.is_empty() {
            return Vec::new();
        }
        let fp = self.fp.clone();
        // back substitution to reduced form, restricted to the free columns
        let n = self.rows.len();
        let mut red: Vec<Vec<u32>> = self.rows.iter().map(|r| free.iter().map(|&c| r[c]).collect()).collect();
        for k in (0..n).rev() {
            let pc = self.pivots[k];
            let (head, tail) = red.split_at_mut(k);
            let src = &tail[0];
            for (j, row) in head.iter_mut().enumerate() {
                let c = self.rows[j][pc];
                if c != 0 {
                    kernels::axpy(&fp, row, src, fp.neg(c as u64) as u32);
                }
            }
        }
        // the pivot entries of earlier rows in later pivot columns are now
        // logically cleared; solve for each free column
        free.iter()
            .enumerate()
            .map(|(fi, &fc)| {
                let mut x = vec![0u64; self.cols];
                x[fc] = 1;
                for (k, &pc) in self.pivots.iter().enumerate() {
                    x[pc] = fp.neg(red[k][fi] as u64);
                }
                x
            })
            .collect()
    }
}

/// Nullspace of a dense matrix given row by row.
pub fn kernel(fp: &PrimeField, cols: usize, rows: impl IntoIterator<Item = Vec<u32>>) -> Vec<Vec<u64>> {
    let mut e = Echelon::new(fp.clone(), cols);
    for r in rows {
        e.push_row(r);
    }
    e.kernel()
}

pub fn rank(fp: &PrimeField, cols: usize, rows: impl IntoIterator<Item = Vec<u32>>) -> usize {
    let mut e = Echelon::new(fp.clone(), cols);
    for r in rows {
        e.push_row(r);
    }
    e.rank()
}

/// Small dense kernel for matrices held as `u64` rows (used for the
/// quotient-module relations, where sizes are tiny).
pub fn small_kernel(fp: &PrimeField, rows: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    kernel(fp, cols, rows.iter().map(|r| r.iter().map(|&x| x as u32).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn mat_vec(fp: &PrimeField, rows: &[Vec<u32>], x: &[u64]) -> Vec<u64> {
        rows.iter()
            .map(|r| r.iter().zip(x).fold(0, |acc, (&a, &b)| fp.mul_add(acc, a as u64, b)))
            .collect()
    }

    #[test]
    fn kernel_of_simple_matrices() {
        let fp = PrimeField::default_field();
        let k = kernel(&fp, 2, vec![vec![1, 1]]);
        assert_eq!(k, vec![vec![fp.p() - 1, 1]]);
        let id: Vec<Vec<u32>> = (0..5).map(|i| (0..5).map(|j| (i == j) as u32).collect()).collect();
        assert!(kernel(&fp, 5, id).is_empty());
    }

    #[test]
    fn random_low_rank_kernels() {
        for &p in &[2147483647u64, 2147483629, 1000003] {
            let fp = PrimeField::new(p).unwrap();
            let mut rng = rand::rngs::StdRng::seed_from_u64(p);
            for &(m, n, r) in &[(50usize, 40usize, 31usize), (100, 120, 77), (7, 7, 7), (200, 90, 90)] {
                let left: Vec<Vec<u64>> = (0..m).map(|_| (0..r).map(|_| rng.gen_range(0..p)).collect()).collect();
                let right: Vec<Vec<u64>> = (0..r).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
                let rows: Vec<Vec<u32>> = left
                    .iter()
                    .map(|l| {
                        (0..n).map(|j| (0..r).fold(0, |acc, k| fp.mul_add(acc, l[k], right[k][j])) as u32).collect()
                    })
                    .collect();
                let ker = kernel(&fp, n, rows.clone());
                assert_eq!(ker.len(), n - r.min(m).min(n));
                for v in &ker {
                    assert!(mat_vec(&fp, &rows, v).iter().all(|&x| x == 0));
                }
            }
        }
    }
}
