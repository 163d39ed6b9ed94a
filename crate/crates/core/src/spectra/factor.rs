use std::collections::VecDeque;

use nalgebra::DMatrixViewMut;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::CscMatrix;

use crate::assembly::SparseSymmetric;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering, `perm[new] = old`. Each connected
/// component starts from a pseudo-peripheral vertex.
pub(crate) fn rcm_order(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.order();
    let degree = |i: usize| a.row(i).0.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree(i), i));
    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        let root = pseudo_peripheral(a, seed);
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&u| !placed[u]).collect();
            next.sort_by_key(|&u| (degree(u), u));
            for u in next {
                placed[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Last level of repeated BFS sweeps, picking the minimum-degree vertex of
/// the deepest level until the eccentricity stops growing.
fn pseudo_peripheral(a: &SparseSymmetric, start: usize) -> usize {
    let mut root = start;
    let mut depth = 0;
    loop {
        let (ecc, last) = bfs_levels(a, root);
        if ecc <= depth && depth > 0 {
            return root;
        }
        depth = ecc;
        let cand = last
            .into_iter()
            .min_by_key(|&u| (a.row(u).0.len(), u))
            .unwrap_or(root);
        if cand == root {
            return root;
        }
        root = cand;
    }
}

fn bfs_levels(a: &SparseSymmetric, root: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; a.order()];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in a.row(v).0 {
                if level[u] == usize::MAX {
                    level[u] = depth + 1;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Sparse Cholesky factor of an RCM-permuted SPD matrix.
pub(crate) struct Factor {
    perm: Vec<usize>,
    chol: CscCholesky<f64>,
}

impl Factor {
    pub(crate) fn new(a: &SparseSymmetric) -> Result<Self> {
        let perm = rcm_order(a);
        let p = a.permuted(&perm);
        let (ptr, idx, vals) = p.raw_parts();
        // Full symmetric storage: CSR rows are CSC columns.
        let csc = CscMatrix::try_from_csc_data(
            p.order(),
            p.order(),
            ptr.to_vec(),
            idx.to_vec(),
            vals.to_vec(),
        )
        .map_err(|e| Error::Numerical(format!("sparse layout: {e}")))?;
        let chol = CscCholesky::factor(&csc)
            .map_err(|e| Error::Numerical(format!("Cholesky factorization failed: {e}")))?;
        Ok(Factor { perm, chol })
    }

    /// `x = A⁻¹ b`.
    pub(crate) fn solve(&self, b: &[f64], x: &mut [f64]) {
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        let n = y.len();
        self.chol
            .solve_mut(DMatrixViewMut::from_slice(&mut y, n, 1));
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    #[cfg(test)]
    pub(crate) fn factor_nnz(&self) -> usize {
        self.chol.l().nnz()
    }
}
