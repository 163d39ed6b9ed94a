use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric matrix in compressed sparse row form. Both triangles are
/// stored, columns within a row are sorted, and the diagonal is cached.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseSymmetric {
    /// Zero matrix with the given structurally symmetric pattern. Each row
    /// must contain its diagonal; rows are sorted and deduplicated here.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for (i, r) in rows.iter_mut().enumerate() {
            r.push(i);
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        SparseSymmetric {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
            diag: vec![0.0; n],
        }
    }

    /// Builds from `(i, j, v)` triplets of the lower or upper triangle (or
    /// both); entries are mirrored and duplicates summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::Mismatch(format!(
                    "entry ({i}, {j}) outside order {n}"
                )));
            }
            rows[i].push(j);
            rows[j].push(i);
        }
        let mut m = Self::from_pattern(rows);
        for &(i, j, v) in triplets {
            m.add_sym(i, j, v);
        }
        Ok(m)
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Mismatch("matrix is not square".into()));
        }
        let n = a.nrows();
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::Mismatch(format!(
                        "entry ({i}, {j}) is not symmetric"
                    )));
                }
                if a[(i, j)] != 0.0 || i == j {
                    trip.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &trip)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern(vec![Vec::new(); n]);
        for i in 0..n {
            m.add_sym(i, i, 1.0);
        }
        m
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].binary_search(&j).ok().map(|p| lo + p)
    }

    /// Adds `v` at `(i, j)` and `(j, i)` (once on the diagonal). The entry
    /// must be in the pattern.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) not in sparsity pattern"));
        self.values[p] += v;
        if i == j {
            self.diag[i] = self.values[p];
        } else {
            let q = self.position(j, i).expect("pattern is symmetric");
            self.values[q] += v;
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn max_diagonal(&self) -> f64 {
        self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= c);
        m.diag.iter_mut().for_each(|v| *v *= c);
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// True when every stored `(i, j)` equals `(j, i)` bit for bit.
    pub fn is_exactly_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| self.position(j, i).map(|q| self.values[q]) == Some(v))
        })
    }

    /// Symmetric permutation `P A Pᵀ` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let rows: Vec<Vec<usize>> = perm
            .iter()
            .map(|&old| self.row(old).0.iter().map(|&j| inv[j]).collect())
            .collect();
        let mut m = Self::from_pattern(rows);
        for (new_i, &old_i) in perm.iter().enumerate() {
            let (cols, vals) = self.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let p = m.position(new_i, inv[old_j]).expect("pattern");
                m.values[p] = v;
            }
            m.diag[new_i] = self.diag[old_i];
        }
        m
    }

    /// `A - σI`.
    pub(crate) fn shifted(&self, sigma: f64) -> Self {
        let mut m = self.clone();
        m.map_values(|i, j, v| if i == j { v - sigma } else { v });
        m
    }

    /// `σI - A`.
    pub(crate) fn shift_negated(&self, sigma: f64) -> Self {
        let mut m = self.clone();
        m.map_values(|i, j, v| if i == j { sigma - v } else { -v });
        m
    }

    /// `max_i Σ_j |a_ij|`, an upper bound on the spectral radius.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `(row_ptr, col_idx, values)`.
    pub(crate) fn raw_parts(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }

    pub(crate) fn map_values(&mut self, f: impl Fn(usize, usize, f64) -> f64) {
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                self.values[p] = f(i, j, self.values[p]);
            }
        }
        for i in 0..self.n {
            self.diag[i] = self.get(i, i);
        }
    }

    /// MatrixMarket `coordinate real symmetric` text (lower triangle,
    /// 1-based, 17 significant digits).
    pub fn to_matrix_market(&self) -> String {
        let lower: usize = (0..self.n)
            .map(|i| self.row(i).0.iter().filter(|&&j| j <= i).count())
            .sum();
        let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, lower);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
                }
            }
        }
        s
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_matrix_market()).map_err(|e| Error::io(path, e))
    }

    pub fn read_matrix_market(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_matrix_market(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    /// Parses `coordinate real symmetric|general` text; a general matrix
    /// must be numerically symmetric.
    pub fn parse_matrix_market(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or((1, "empty file".to_string()))?;
        let h: Vec<String> = header
            .split_whitespace()
            .map(|t| t.to_lowercase())
            .collect();
        if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
            return Err((1, "expected `%%MatrixMarket matrix coordinate ...`".into()));
        }
        if h[3] != "real" && h[3] != "integer" {
            return Err((1, format!("unsupported field `{}`", h[3])));
        }
        let symmetric = match h[4].as_str() {
            "symmetric" => true,
            "general" => false,
            other => return Err((1, format!("unsupported symmetry `{other}`"))),
        };
        let mut body = lines.filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%')
        });
        let (sl, size) = body.next().ok_or((1, "missing size line".to_string()))?;
        let dims: Vec<usize> = size
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| (sl + 1, format!("bad size `{t}`"))))
            .collect::<std::result::Result<_, _>>()?;
        if dims.len() != 3 || dims[0] != dims[1] {
            return Err((sl + 1, "expected `<n> <n> <nnz>`".into()));
        }
        let (n, nnz) = (dims[0], dims[2]);
        let mut trip = Vec::with_capacity(nnz);
        let mut general = Vec::new();
        for (ln, line) in body {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err((ln + 1, "expected `<i> <j> <value>`".into()));
            }
            let i: usize = t[0]
                .parse()
                .map_err(|_| (ln + 1, "bad row index".to_string()))?;
            let j: usize = t[1]
                .parse()
                .map_err(|_| (ln + 1, "bad column index".to_string()))?;
            let v: f64 = t[2]
                .parse()
                .map_err(|_| (ln + 1, "bad value".to_string()))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err((ln + 1, format!("index ({i}, {j}) out of range")));
            }
            if symmetric || i >= j {
                trip.push((i - 1, j - 1, v));
            }
            if !symmetric {
                general.push((i - 1, j - 1, v));
            }
        }
        let m = Self::from_triplets(n, &trip).map_err(|e| (0, e.to_string()))?;
        for (i, j, v) in general {
            if m.get(i, j) != v {
                return Err((0, format!("general matrix is not symmetric at ({i}, {j})")));
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, d: f64, off: f64) -> SparseSymmetric {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i + 1, i, off));
            }
        }
        SparseSymmetric::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn triplets_mirror_and_sum() {
        let m = SparseSymmetric::from_triplets(
            3,
            &[(0, 0, 1.0), (1, 0, 2.0), (0, 1, 0.5), (2, 2, 3.0)],
        )
        .unwrap();
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.get(1, 0), 2.5);
        assert_eq!(m.diagonal(), &[1.0, 0.0, 3.0]);
        assert!(m.is_exactly_symmetric());
    }

    #[test]
    fn matvec_matches_dense() {
        let m = tridiag(5, 2.0, -1.0);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let mut y = [0.0; 5];
        m.mul_vec(&x, &mut y);
        let yd = m.to_dense() * nalgebra::DVector::from_row_slice(&x);
        for i in 0..5 {
            assert_eq!(y[i], yd[i]);
        }
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = tridiag(6, 4.0 / 3.0, -1.0 / 7.0);
        let text = m.to_matrix_market();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n6 6 11\n"));
        assert_eq!(SparseSymmetric::parse_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn matrix_market_general_must_be_symmetric() {
        let txt = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 1 1\n1 2 2\n";
        assert!(SparseSymmetric::parse_matrix_market(txt).is_err());
        let txt = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 1 2\n1 2 2\n";
        assert_eq!(
            SparseSymmetric::parse_matrix_market(txt).unwrap().get(0, 1),
            2.0
        );
    }

    #[test]
    fn permutation_preserves_entries() {
        let m = tridiag(4, 2.0, -1.0);
        let p = m.permuted(&[3, 1, 0, 2]);
        assert_eq!(p.get(0, 0), 2.0);
        assert_eq!(p.get(0, 3), -1.0); // old (3, 2)
        assert_eq!(p.get(1, 2), -1.0); // old (1, 0)
        assert!(p.is_exactly_symmetric());
    }
}
