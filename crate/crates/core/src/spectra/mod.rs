//! Extreme eigenvalues and condition numbers of sparse SPD matrices, and the
//! smallest eigenvalue of the pencil `A u = λ B u`.
//!
//! Matrices of order at most [`DENSE_MAX_ORDER`] are solved densely. Larger
//! ones use Lanczos with full reorthogonalization: on `A` for `λ_max`, and
//! on `A⁻¹` (sparse Cholesky, shift 0) for `λ_min`.

mod factor;
mod lanczos;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_stiffness, jacobi_scale, DiffusionField, SparseSymmetric};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;

pub const DENSE_MAX_ORDER: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    LanczosShiftInvert,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::LanczosShiftInvert => "lanczos_shift_invert",
        }
    }
}

/// Which execution path to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Solver {
    /// Dense up to [`DENSE_MAX_ORDER`], iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

impl Solver {
    fn use_dense(self, order: usize) -> bool {
        match self {
            Solver::Auto => order <= DENSE_MAX_ORDER,
            Solver::Dense => true,
            Solver::Iterative => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub method: Method,
    /// Largest backward error `‖Av − λv‖ / (λ_max ‖v‖)` of the two
    /// returned eigenpairs.
    pub residual: f64,
    /// False when an iteration hit its cap; the values are then the best
    /// estimates available.
    pub converged: bool,
    /// Lanczos steps for `(λ_min, λ_max)`; zero on the dense path.
    pub iterations: (usize, usize),
    #[serde(skip)]
    pub vector_min: Vec<f64>,
    #[serde(skip)]
    pub vector_max: Vec<f64>,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eigensolver tolerance {tol} outside (0, 1e-3]"
        )))
    }
}

/// Iteration cap `⌈10 √n⌉`.
pub fn iteration_cap(order: usize) -> usize {
    (10.0 * (order as f64).sqrt()).ceil() as usize
}

fn rayleigh(a: &SparseSymmetric, v: &[f64]) -> (f64, Vec<f64>) {
    let mut av = vec![0.0; v.len()];
    a.mul_vec(v, &mut av);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let rq = av.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / vv;
    (rq, av)
}

fn residual_norm(av: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let r: f64 = av
        .iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    (r / vv).sqrt()
}

/// Largest eigenpair. A short plain Lanczos run either converges or
/// supplies a lower estimate `θ`; in the latter case the iteration continues
/// on `(σI - A)⁻¹` with `σ` just above the spectrum, which spreads out the
/// clustered top eigenvalues.
fn largest_iterative(a: &SparseSymmetric, tol: f64, cap: usize) -> Result<lanczos::Ritz> {
    let n = a.order();
    let warm = lanczos::largest(
        |x, y| a.mul_vec(x, y),
        None,
        &lanczos::start_vector(n, 1),
        tol,
        cap.min(60),
    );
    if warm.converged {
        return Ok(warm);
    }
    let theta = warm.theta;
    let ceiling = a.gershgorin_radius() * (1.0 + 1e-12);
    let mut gap = warm.estimate.max(1e-4 * theta);
    loop {
        let sigma = (theta + gap).min(ceiling);
        // Fails when σ is still inside the spectrum.
        if let Ok(fac) = factor::Factor::new(&a.shift_negated(sigma)) {
            let mut r = lanczos::largest(|x, y| fac.solve(x, y), None, &warm.vector, tol, cap);
            r.theta = sigma - 1.0 / r.theta;
            r.steps += warm.steps;
            return Ok(r);
        }
        if sigma >= ceiling {
            return Err(Error::Numerical(
                "no shift above the spectrum admits a Cholesky factorization".into(),
            ));
        }
        gap *= 4.0;
    }
}

/// Eigenvector for the eigenvalue `lambda` by inverse iteration, shifted
/// just outside the spectrum so the shifted matrix stays definite.
fn inverse_iteration(
    a: &SparseSymmetric,
    lambda: f64,
    below: bool,
    scale: f64,
) -> Option<Vec<f64>> {
    let n = a.order();
    // The dense eigenvalue is accurate to about ε‖A‖; the shift must clear
    // that but stay close enough to separate λ from its neighbours.
    let mut delta = (1e-6 * lambda.abs()).max(1e-13 * scale);
    for _ in 0..12 {
        let m = if below {
            a.shifted(lambda - delta)
        } else {
            a.shift_negated(lambda + delta)
        };
        if let Ok(fac) = factor::Factor::new(&m) {
            let mut x = lanczos::start_vector(n, 3);
            let mut y = vec![0.0; n];
            for _ in 0..20 {
                fac.solve(&x, &mut y);
                let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter_mut().for_each(|v| *v /= nrm);
                let cos = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>().abs()
                    / x.iter().map(|v| v * v).sum::<f64>().sqrt();
                std::mem::swap(&mut x, &mut y);
                if 1.0 - cos < 1e-15 {
                    break;
                }
            }
            return Some(x);
        }
        delta *= 10.0;
    }
    None
}

/// Extreme eigenvalues of the dense matrix and their eigenvectors by inverse
/// iteration, with a full dense eigendecomposition as the fallback.
fn dense_extremes(a: &SparseSymmetric) -> ((f64, f64), Vec<f64>, Vec<f64>) {
    let dense = a.to_dense();
    let ev = dense.clone().symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    let scale = lo.abs().max(hi.abs());
    if let (Some(vmin), Some(vmax)) = (
        inverse_iteration(a, lo, true, scale),
        inverse_iteration(a, hi, false, scale),
    ) {
        return ((lo, hi), vmin, vmax);
    }
    let eig = SymmetricEigen::new(dense);
    let (mut imin, mut imax) = (0, 0);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l < eig.eigenvalues[imin] {
            imin = i;
        }
        if l > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let col = |i: usize| {
        eig.eigenvectors
            .column(i)
            .iter()
            .copied()
            .collect::<Vec<_>>()
    };
    ((lo, hi), col(imin), col(imax))
}

pub fn extreme_eigenvalues(a: &SparseSymmetric, tol: f64) -> Result<SpectralResult> {
    extreme_eigenvalues_with(a, tol, Solver::Auto)
}

pub fn extreme_eigenvalues_with(
    a: &SparseSymmetric,
    tol: f64,
    solver: Solver,
) -> Result<SpectralResult> {
    check_tol(tol)?;
    let n = a.order();
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    let (method, values, v_min, v_max, converged, iterations) = if solver.use_dense(n) {
        let (values, v_min, v_max) = dense_extremes(a);
        (Method::Dense, Some(values), v_min, v_max, true, (0, 0))
    } else {
        let cap = iteration_cap(n);
        let fac = factor::Factor::new(a)?;
        let (top, bottom) = rayon::join(
            || largest_iterative(a, tol, cap),
            || {
                lanczos::largest(
                    |x, y| fac.solve(x, y),
                    None,
                    &lanczos::start_vector(n, 2),
                    tol,
                    cap,
                )
            },
        );
        let top = top?;
        (
            Method::LanczosShiftInvert,
            None,
            bottom.vector,
            top.vector,
            top.converged && bottom.converged,
            (bottom.steps, top.steps),
        )
    };
    let (mut lambda_min, av_min) = rayleigh(a, &v_min);
    let (mut lambda_max, av_max) = rayleigh(a, &v_max);
    if let Some((lo, hi)) = values {
        (lambda_min, lambda_max) = (lo, hi);
    }
    if !(lambda_min > 0.0) {
        return Err(Error::Numerical(format!(
            "smallest eigenvalue {lambda_min:e} is not positive"
        )));
    }
    let residual = residual_norm(&av_min, lambda_min, &v_min)
        .max(residual_norm(&av_max, lambda_max, &v_max))
        / lambda_max;
    Ok(SpectralResult {
        lambda_min,
        lambda_max,
        kappa: lambda_max / lambda_min,
        method,
        residual,
        converged,
        iterations,
        vector_min: v_min,
        vector_max: v_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedEigen {
    pub lambda: f64,
    /// `‖Au − λBu‖ / ‖λBu‖`.
    pub residual: f64,
    pub converged: bool,
    pub method: Method,
}

/// Smallest `λ` with `A u = λ B u`.
pub fn generalized_min_eigenvalue(
    a: &SparseSymmetric,
    b: &SparseSymmetric,
    tol: f64,
) -> Result<GeneralizedEigen> {
    generalized_min_eigenvalue_with(a, b, tol, Solver::Auto)
}

pub fn generalized_min_eigenvalue_with(
    a: &SparseSymmetric,
    b: &SparseSymmetric,
    tol: f64,
    solver: Solver,
) -> Result<GeneralizedEigen> {
    check_tol(tol)?;
    let n = a.order();
    if n != b.order() {
        return Err(Error::Mismatch(format!("orders {n} and {}", b.order())));
    }
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    let (u, converged, method) = if solver.use_dense(n) {
        let chol = Cholesky::new(b.to_dense())
            .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular mass factor".into()))?;
        let c: DMatrix<f64> = &linv * a.to_dense() * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let imin = eig.eigenvalues.imin();
        let z: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
        let u = linv.transpose() * z;
        (u.iter().copied().collect::<Vec<_>>(), true, Method::Dense)
    } else {
        let fac = factor::Factor::new(a)?;
        let mut tmp = vec![0.0; n];
        let r = lanczos::largest(
            |x, y| {
                b.mul_vec(x, &mut tmp);
                fac.solve(&tmp, y);
            },
            Some(b),
            &lanczos::start_vector(n, 3),
            tol,
            iteration_cap(n),
        );
        (r.vector, r.converged, Method::LanczosShiftInvert)
    };
    let mut au = vec![0.0; n];
    let mut bu = vec![0.0; n];
    a.mul_vec(&u, &mut au);
    b.mul_vec(&u, &mut bu);
    let uau: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
    let ubu: f64 = u.iter().zip(&bu).map(|(x, y)| x * y).sum();
    let lambda = uau / ubu;
    let num: f64 = au
        .iter()
        .zip(&bu)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = bu.iter().map(|y| (lambda * y).powi(2)).sum::<f64>().sqrt();
    Ok(GeneralizedEigen {
        lambda,
        residual: num / den,
        converged,
        method,
    })
}

/// Spectra of the stiffness matrix and of its Jacobi-scaled form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub a: SpectralResult,
    pub sas: SpectralResult,
}

impl ConditionReport {
    pub fn converged(&self) -> bool {
        self.a.converged && self.sas.converged
    }
}

pub fn condition_report(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    tol: f64,
) -> Result<ConditionReport> {
    let a = assemble_stiffness(mesh, field)?;
    condition_report_for(&a, mesh.dim(), tol, Solver::Auto)
}

/// As [`condition_report`] for an already assembled stiffness matrix of a
/// `dim`-dimensional mesh.
pub fn condition_report_for(
    a: &SparseSymmetric,
    dim: usize,
    tol: f64,
    solver: Solver,
) -> Result<ConditionReport> {
    let sas = jacobi_scale(a)?;
    let (ra, rs) = rayon::join(
        || extreme_eigenvalues_with(a, tol, solver),
        || extreme_eigenvalues_with(&sas, tol, solver),
    );
    let (ra, rs) = (ra?, rs?);
    let top = (dim + 1) as f64;
    if rs.lambda_max > top * (1.0 + 1e-10) || rs.kappa > top / rs.lambda_min * (1.0 + 1e-10) {
        return Err(Error::Numerical(format!(
            "scaled spectrum inconsistent: λ_max = {} exceeds {top}",
            rs.lambda_max
        )));
    }
    Ok(ConditionReport { a: ra, sas: rs })
}
