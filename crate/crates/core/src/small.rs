//! Fixed-capacity d×d matrices for d ≤ 3.
//!
//! Element-level geometry (Jacobians, gradients, averaged diffusion) never
//! exceeds 3×3, so these live on the stack. Entries outside the leading
//! `dim × dim` block are always zero.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallMat {
    dim: usize,
    a: [[f64; 3]; 3],
}

impl SmallMat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "SmallMat supports dim 1..=3");
        SmallMat {
            dim,
            a: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = s;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.a[i][i] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries; `values.len()` must be a
    /// perfect square in {1, 4, 9}.
    pub fn from_row_major(values: &[f64]) -> Option<Self> {
        let dim = match values.len() {
            1 => 1,
            4 => 2,
            9 => 3,
            _ => return None,
        };
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = values[i * dim + j];
            }
        }
        Some(m)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[&[f64]]) -> Self {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m.a[i][j] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            out.extend_from_slice(&self.a[i][..self.dim]);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.a[i][k] * other.a[k][j];
                }
                m.a[i][j] = s;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                y[i] += self.a[i][j] * x[j];
            }
        }
        y
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for row in m.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.a[i][j] += other.a[i][j];
            }
        }
        m
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Inverse via the adjugate; `None` when the determinant is zero or
    /// not finite.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let a = &self.a;
        let mut m = Self::zeros(self.dim);
        match self.dim {
            1 => m.a[0][0] = 1.0 / a[0][0],
            2 => {
                m.a[0][0] = a[1][1] / det;
                m.a[0][1] = -a[0][1] / det;
                m.a[1][0] = -a[1][0] / det;
                m.a[1][1] = a[0][0] / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        m.a[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
                    }
                }
            }
        }
        Some(m)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    /// Largest absolute deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by its symmetric part.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.transpose()).scale(0.5)
    }

    /// Eigenvalues of the symmetric part in ascending order, computed in
    /// closed form.
    pub fn sym_eigenvalues(&self) -> [f64; 3] {
        let s = self.symmetrized();
        let a = &s.a;
        match self.dim {
            1 => [a[0][0], f64::NAN, f64::NAN],
            2 => {
                let mean = 0.5 * (a[0][0] + a[1][1]);
                let half = 0.5 * (a[0][0] - a[1][1]);
                let r = half.hypot(a[0][1]);
                [mean - r, mean + r, f64::NAN]
            }
            _ => sym3_eigenvalues(a),
        }
    }

    pub fn sym_min_max(&self) -> (f64, f64) {
        let ev = self.sym_eigenvalues();
        (ev[0], ev[self.dim - 1])
    }

    /// Spectral norm of a symmetric matrix.
    pub fn sym_norm2(&self) -> f64 {
        let (lo, hi) = self.sym_min_max();
        lo.abs().max(hi.abs())
    }
}

/// Trigonometric closed form for the eigenvalues of a symmetric 3×3 matrix.
fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| x.total_cmp(y));
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    let mut ev = [lo, mid, hi];
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}
