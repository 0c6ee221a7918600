//! Sparse Smith-form elimination over Z/p^N (N = 1 gives linear algebra over F_p).
//!
//! Pivots are chosen by minimal p-adic valuation, ties broken by (column, row),
//! so every result is deterministic. Row and column operations are recorded and
//! replayed for solving and for kernel generators.

use crate::arith::Modulus;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

/// Column-major sparse matrix with entries in Z/p^N.
#[derive(Clone, Debug)]
pub struct SparseMat {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, u64)>>,
}

impl SparseMat {
    pub fn new(nrows: usize) -> Self {
        SparseMat {
            nrows,
            cols: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn push_col(&mut self, col: Vec<(usize, u64)>) {
        self.cols
            .push(col.into_iter().filter(|(_, v)| *v != 0).collect());
    }

    pub fn push_dense(&mut self, col: &[u64]) {
        let sparse = col
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, v)| (i, *v))
            .collect();
        self.cols.push(sparse);
    }

    pub fn apply(&self, modulus: &Modulus, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            if x[j] == 0 {
                continue;
            }
            for &(i, a) in col {
                out[i] = modulus.add(out[i], modulus.mul(a, x[j]));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Pivot {
    row: usize,
    col: usize,
    val: u32,
    unit_inv: u64,
}

#[derive(Clone, Debug)]
pub struct Smith {
    modulus: Modulus,
    nrows: usize,
    ncols: usize,
    row_ops: Vec<(usize, usize, u64)>,
    col_ops: Vec<(usize, usize, u64)>,
    pivots: Vec<Pivot>,
    pivot_rows: Vec<bool>,
    pivot_cols: Vec<bool>,
}

impl Smith {
    pub fn compute(mat: &SparseMat, modulus: Modulus) -> Smith {
        let nrows = mat.nrows;
        let ncols = mat.ncols();
        let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); nrows];
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncols];
        let mut heap = BinaryHeap::new();
        for (j, col) in mat.cols.iter().enumerate() {
            for &(i, a) in col {
                let a = a % modulus.value;
                if a == 0 {
                    continue;
                }
                let slot = rows[i].entry(j).or_insert(0);
                *slot = modulus.add(*slot, a);
                if *slot == 0 {
                    rows[i].remove(&j);
                    cols[j].remove(&i);
                } else {
                    cols[j].insert(i);
                }
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (&j, &a) in row {
                heap.push(Reverse((modulus.val(a), j, i)));
            }
        }
        let mut pivot_rows = vec![false; nrows];
        let mut pivot_cols = vec![false; ncols];
        let mut row_ops = Vec::new();
        let mut col_ops = Vec::new();
        let mut pivots = Vec::new();
        while let Some(Reverse((v, j, i))) = heap.pop() {
            if pivot_rows[i] || pivot_cols[j] {
                continue;
            }
            let a = match rows[i].get(&j) {
                Some(&a) if modulus.val(a) == v => a,
                _ => continue,
            };
            let pv = modulus.p.pow(v);
            let unit_inv = modulus.inv(a / pv).expect("unit part");
            // clear the pivot column with row operations
            let others: Vec<usize> = cols[j].iter().copied().filter(|&r| r != i).collect();
            let pivot_row: Vec<(usize, u64)> = rows[i].iter().map(|(&k, &x)| (k, x)).collect();
            for r in others {
                let b = rows[r][&j];
                let lambda = modulus.mul(b / pv, unit_inv);
                for &(k, aik) in &pivot_row {
                    let cur = rows[r].get(&k).copied().unwrap_or(0);
                    let new = modulus.sub(cur, modulus.mul(lambda, aik));
                    if new == 0 {
                        rows[r].remove(&k);
                        cols[k].remove(&r);
                    } else {
                        rows[r].insert(k, new);
                        cols[k].insert(r);
                        if new != cur {
                            heap.push(Reverse((modulus.val(new), k, r)));
                        }
                    }
                }
                row_ops.push((r, i, lambda));
            }
            // clear the pivot row with column operations
            for &(k, c) in &pivot_row {
                if k == j {
                    continue;
                }
                let mu = modulus.mul(c / pv, unit_inv);
                col_ops.push((k, j, mu));
                rows[i].remove(&k);
                cols[k].remove(&i);
            }
            pivot_rows[i] = true;
            pivot_cols[j] = true;
            pivots.push(Pivot {
                row: i,
                col: j,
                val: v,
                unit_inv,
            });
        }
        Smith {
            modulus,
            nrows,
            ncols,
            row_ops,
            col_ops,
            pivots,
            pivot_rows,
            pivot_cols,
        }
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Number of unit invariant factors (the rank mod p).
    pub fn unit_rank(&self) -> usize {
        self.pivots.iter().filter(|p| p.val == 0).count()
    }

    /// Valuations of the nonzero invariant factors, sorted.
    pub fn invariants(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.pivots.iter().map(|p| p.val).collect();
        v.sort_unstable();
        v
    }

    fn undo_cols(&self, mut y: Vec<u64>) -> Vec<u64> {
        let m = &self.modulus;
        for &(k, j, mu) in self.col_ops.iter().rev() {
            if y[k] != 0 {
                y[j] = m.sub(y[j], m.mul(mu, y[k]));
            }
        }
        y
    }

    /// Some x with A x = b, if one exists.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let m = &self.modulus;
        let mut b: Vec<u64> = b.iter().map(|x| x % m.value).collect();
        debug_assert_eq!(b.len(), self.nrows);
        for &(r, i, lambda) in &self.row_ops {
            if b[i] != 0 {
                b[r] = m.sub(b[r], m.mul(lambda, b[i]));
            }
        }
        for (r, &x) in b.iter().enumerate() {
            if x != 0 && !self.pivot_rows[r] {
                return None;
            }
        }
        let mut y = vec![0u64; self.ncols];
        for pv in &self.pivots {
            let bi = b[pv.row];
            if m.val(bi) < pv.val {
                return None;
            }
            y[pv.col] = m.mul(bi / m.p.pow(pv.val), pv.unit_inv);
        }
        Some(self.undo_cols(y))
    }

    pub fn contains(&self, b: &[u64]) -> bool {
        self.solve(b).is_some()
    }

    fn undo_cols_sparse(&self, mut y: BTreeMap<usize, u64>) -> Vec<(usize, u64)> {
        let m = &self.modulus;
        for &(k, j, mu) in self.col_ops.iter().rev() {
            if let Some(&yk) = y.get(&k) {
                let cur = y.get(&j).copied().unwrap_or(0);
                let new = m.sub(cur, m.mul(mu, yk));
                if new == 0 {
                    y.remove(&j);
                } else {
                    y.insert(j, new);
                }
            }
        }
        y.into_iter().collect()
    }

    /// Generators of the kernel as a Z/p^N-module, as sparse vectors.
    pub fn kernel_sparse(&self) -> Vec<Vec<(usize, u64)>> {
        let m = &self.modulus;
        let mut gens = Vec::new();
        for j in 0..self.ncols {
            if !self.pivot_cols[j] {
                gens.push(self.undo_cols_sparse(BTreeMap::from([(j, 1)])));
            }
        }
        for pv in &self.pivots {
            if pv.val > 0 {
                gens.push(
                    self.undo_cols_sparse(BTreeMap::from([(pv.col, m.p.pow(m.digits - pv.val))])),
                );
            }
        }
        gens
    }

    /// Generators of the kernel as a Z/p^N-module.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        self.kernel_sparse()
            .into_iter()
            .map(|g| {
                let mut y = vec![0u64; self.ncols];
                for (j, v) in g {
                    y[j] = v;
                }
                y
            })
            .collect()
    }
}

/// Rank over F_p of a set of dense vectors.
pub fn rank_fp(modulus: Modulus, nrows: usize, vecs: &[Vec<u64>]) -> usize {
    let mut mat = SparseMat::new(nrows);
    for v in vecs {
        mat.push_dense(v);
    }
    Smith::compute(&mat, modulus).rank()
}

/// Do two families of vectors over F_p span the same subspace?
pub fn same_span_fp(modulus: Modulus, nrows: usize, a: &[Vec<u64>], b: &[Vec<u64>]) -> bool {
    let ra = rank_fp(modulus, nrows, a);
    let rb = rank_fp(modulus, nrows, b);
    if ra != rb {
        return false;
    }
    let both: Vec<Vec<u64>> = a.iter().chain(b.iter()).cloned().collect();
    rank_fp(modulus, nrows, &both) == ra
}

/// Do two families of sparse vectors span the same submodule? Compared by
/// ranks of each family and of their union, so intended for F_p.
pub fn same_span_sparse(
    modulus: Modulus,
    nrows: usize,
    a: &[Vec<(usize, u64)>],
    b: &[Vec<(usize, u64)>],
) -> bool {
    let rank = |vs: &mut dyn Iterator<Item = &Vec<(usize, u64)>>| {
        let mut mat = SparseMat::new(nrows);
        for v in vs {
            mat.push_col(v.clone());
        }
        Smith::compute(&mat, modulus).rank()
    };
    let ra = rank(&mut a.iter());
    ra == rank(&mut b.iter()) && ra == rank(&mut a.iter().chain(b.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Prime;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn modulus(p: u64, n: u32) -> Modulus {
        Modulus::new(Prime::new(p).unwrap(), n).unwrap()
    }

    // brute-force kernel size over Z/p^N for tiny matrices
    fn brute_kernel_size(m: &Modulus, mat: &SparseMat) -> usize {
        let n = mat.ncols();
        let total = (m.value as usize).pow(n as u32);
        let mut count = 0;
        for code in 0..total {
            let mut x = vec![0u64; n];
            let mut c = code;
            for xi in x.iter_mut() {
                *xi = (c % m.value as usize) as u64;
                c /= m.value as usize;
            }
            if mat.apply(m, &x).iter().all(|v| *v == 0) {
                count += 1;
            }
        }
        count
    }

    fn random_mat(rng: &mut ChaCha8Rng, m: &Modulus, r: usize, c: usize) -> SparseMat {
        let mut mat = SparseMat::new(r);
        for _ in 0..c {
            let col: Vec<u64> = (0..r)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        rng.gen_range(0..m.value)
                    } else {
                        0
                    }
                })
                .collect();
            mat.push_dense(&col);
        }
        mat
    }

    #[test]
    fn kernel_size_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = modulus(2, 2);
        for _ in 0..40 {
            let mat = random_mat(&mut rng, &m, 3, 3);
            let smith = Smith::compute(&mat, m);
            // |ker| = prod over columns of p^(N - v_j) with v_j = N for free columns
            let mut size = 1usize;
            let mut pivot_vals = smith.invariants();
            while pivot_vals.len() < 3 {
                pivot_vals.push(m.digits);
            }
            for v in pivot_vals {
                size *= (m.p as usize).pow(v);
            }
            assert_eq!(size, brute_kernel_size(&m, &mat));
            for g in smith.kernel() {
                assert!(mat.apply(&m, &g).iter().all(|v| *v == 0));
            }
        }
    }

    #[test]
    fn solve_finds_preimages() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = modulus(5, 3);
        for _ in 0..50 {
            let mat = random_mat(&mut rng, &m, 5, 4);
            let smith = Smith::compute(&mat, m);
            let x: Vec<u64> = (0..4).map(|_| rng.gen_range(0..m.value)).collect();
            let b = mat.apply(&m, &x);
            let y = smith.solve(&b).expect("b is in the image");
            assert_eq!(mat.apply(&m, &y), b);
        }
    }

    #[test]
    fn detects_non_image() {
        let m = modulus(5, 2);
        let mut mat = SparseMat::new(2);
        mat.push_col(vec![(0, 5)]);
        let smith = Smith::compute(&mat, m);
        assert!(smith.contains(&[10, 0]));
        assert!(!smith.contains(&[1, 0]));
        assert!(!smith.contains(&[0, 5]));
        assert_eq!(smith.kernel(), vec![vec![5]]);
    }

    #[test]
    fn span_comparison() {
        let m = modulus(3, 1);
        let a = vec![vec![1, 0, 0], vec![0, 1, 0]];
        let b = vec![vec![1, 1, 0], vec![1, 2, 0]];
        let c = vec![vec![1, 1, 1]];
        assert!(same_span_fp(m, 3, &a, &b));
        assert!(!same_span_fp(m, 3, &a, &c));
    }
}
