//! The bound expressions themselves, evaluated without the generic
//! constant `C`.

use serde::{Deserialize, Serialize};

use super::beta::{check_p, metrics_from, AnisotropyMetrics};
use crate::assembly::{element_averages, DensityFunction, DiffusionField, SparseSymmetric};
use crate::error::{Error, Result};
use crate::mesh::{compute_metrics, ElementGeometry, MeshMetrics, SimplicialMesh};

/// Exponent used for three-dimensional bounds when none is given.
pub const DEFAULT_P_3D: f64 = 2.9;

/// Everything the bounds need from a mesh and a diffusion field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub dim: usize,
    pub metrics: MeshMetrics,
    pub volumes: Vec<f64>,
    pub d_k: Vec<f64>,
    pub anisotropy: AnisotropyMetrics,
    /// `Σ_{K ∈ ω_j} |K| β_K` per interior vertex.
    pub patch_beta_sums: Vec<f64>,
    pub d_min: f64,
    /// `p` for `d = 3`, `None` otherwise.
    pub p: Option<f64>,
}

fn mean(it: impl Iterator<Item = f64>, n: usize) -> f64 {
    it.sum::<f64>() / n as f64
}

impl BoundContext {
    /// `p` is only used in three dimensions, where it defaults to
    /// [`DEFAULT_P_3D`].
    pub fn new(mesh: &SimplicialMesh, field: &DiffusionField, p: Option<f64>) -> Result<Self> {
        let dim = mesh.dim();
        let p = if dim >= 3 {
            let p = p.unwrap_or(DEFAULT_P_3D);
            check_p(dim, p)?;
            Some(p)
        } else {
            None
        };
        let (metrics, geom) = compute_metrics(mesh, Some(field))?;
        let dks = element_averages(mesh, field)?;
        let anisotropy = metrics_from(&geom, &dks, field.d_min(), p)?;
        Ok(Self::assemble(
            dim,
            metrics,
            &geom,
            anisotropy,
            field.d_min(),
            p,
        ))
    }

    fn assemble(
        dim: usize,
        metrics: MeshMetrics,
        geom: &[ElementGeometry],
        anisotropy: AnisotropyMetrics,
        d_min: f64,
        p: Option<f64>,
    ) -> Self {
        let mut patch_beta_sums = vec![0.0; metrics.num_interior];
        for (g, b) in geom.iter().zip(&anisotropy.beta_k) {
            for &j in &g.patch_ids {
                patch_beta_sums[j] += g.volume * b;
            }
        }
        BoundContext {
            dim,
            volumes: geom.iter().map(|g| g.volume).collect(),
            d_k: geom.iter().map(|g| g.d_k).collect(),
            metrics,
            anisotropy,
            patch_beta_sums,
            d_min,
            p,
        }
    }

    /// Copy with every `d_K` replaced by `value` (e.g. the domain diameter).
    pub fn with_uniform_d_k(&self, value: f64) -> Self {
        let mut c = self.clone();
        c.d_k.iter_mut().for_each(|d| *d = value);
        c
    }

    pub fn num_elements(&self) -> usize {
        self.volumes.len()
    }

    fn nf(&self) -> f64 {
        self.num_elements() as f64
    }

    fn beta(&self) -> &[f64] {
        &self.anisotropy.beta_k
    }

    /// `|K̄| / |K_min|`.
    fn volume_ratio(&self) -> f64 {
        self.metrics.k_avg_volume / self.metrics.k_min_volume
    }

    fn p3(&self) -> f64 {
        self.p.unwrap_or(DEFAULT_P_3D)
    }

    /// `(p/(p-1)) (d - (d-2)p) / (d + 2p)`.
    fn d_k_exponent(&self) -> f64 {
        let (d, p) = (self.dim as f64, self.p3());
        p / (p - 1.0) * (d - (d - 2.0) * p) / (d + 2.0 * p)
    }

    /// `(d/(d-2) - p)^{d/(d+2p)}`.
    fn prefactor_3d(&self) -> f64 {
        let (d, p) = (self.dim as f64, self.p3());
        (d / (d - 2.0) - p).powf(d / (d + 2.0 * p))
    }

    /// Dimension factor of the smallest-eigenvalue bound for `A`, without
    /// the `d_min / N` in front.
    fn lambda_min_a_factor(&self) -> f64 {
        let n = self.num_elements();
        match self.dim {
            1 => 1.0 / mean(self.d_k.iter().copied(), n),
            2 => {
                let r = self.volume_ratio();
                let s = mean(self.d_k.iter().map(|d| (1.0 + r * d).ln().powi(2)), n);
                (1.0 + s).powf(-0.5)
            }
            _ => {
                let p = self.p3();
                let e = self.d_k_exponent();
                let kbar = self.metrics.k_avg_volume;
                let s = mean(
                    self.volumes
                        .iter()
                        .zip(&self.d_k)
                        .map(|(v, d)| (kbar / v).powf(1.0 / (p - 1.0)) * d.powf(e)),
                    n,
                );
                self.prefactor_3d() * s.powf(-(p - 1.0) / p)
            }
        }
    }

    /// Dimension factor of the smallest-eigenvalue bound for `S⁻¹AS⁻¹`,
    /// without the `N^{-2/d}` in front.
    fn lambda_min_sas_factor(&self) -> f64 {
        let nf = self.nf();
        let n = self.num_elements();
        let vb = || self.volumes.iter().zip(self.beta()).map(|(v, b)| v * b);
        match self.dim {
            1 => {
                let s: f64 = vb().zip(&self.d_k).map(|(x, d)| x * d).sum();
                1.0 / (s / (nf * nf))
            }
            2 => {
                let g = self.anisotropy.gamma_h;
                let s1 = mean(vb(), n);
                let s2 = mean(
                    vb().zip(&self.d_k)
                        .map(|(x, d)| x * (1.0 + (1.0 + d * g).ln().powi(2))),
                    n,
                );
                s1.powf(-0.5) * s2.powf(-0.5)
            }
            _ => {
                let (d, p) = (self.dim as f64, self.p3());
                let e = self.d_k_exponent();
                let q = p / (p - 1.0);
                let s: f64 = self
                    .volumes
                    .iter()
                    .zip(self.beta())
                    .zip(&self.d_k)
                    .map(|((v, b), dk)| v * b.powf(q) * dk.powf(e))
                    .sum();
                let s = s * nf.powf(-2.0 * p / (d * (p - 1.0)));
                self.prefactor_3d() * s.powf(-(p - 1.0) / p)
            }
        }
    }

    /// `N^{(d-2)/d} max_j Σ_{K∈ω_j} |K| β_K`.
    fn patch_factor(&self) -> f64 {
        let d = self.dim as f64;
        let max = self.patch_beta_sums.iter().copied().fold(0.0, f64::max);
        self.nf().powf((d - 2.0) / d) * max
    }

    fn n_2d(&self) -> f64 {
        self.nf().powf(2.0 / self.dim as f64)
    }

    /// New lower bound on `λ_min(A)`.
    pub fn lambda_min_a(&self) -> f64 {
        self.d_min / self.nf() * self.lambda_min_a_factor()
    }

    /// New lower bound on `λ_min(S⁻¹AS⁻¹)`.
    pub fn lambda_min_sas(&self) -> f64 {
        self.lambda_min_sas_factor() / self.n_2d()
    }

    /// Fried's lower bound on `λ_min(A)`.
    pub fn lambda_min_fried(&self) -> f64 {
        let f = match self.dim {
            1 => 1.0,
            2 => 1.0 / (1.0 + self.volume_ratio().ln()),
            d => self.volume_ratio().powf(2.0 / d as f64 - 1.0),
        };
        self.d_min / self.nf() * f
    }

    /// New upper bound on `κ(A)`.
    pub fn kappa_a(&self) -> f64 {
        self.n_2d() * self.patch_factor() / self.lambda_min_a_factor()
    }

    /// New upper bound on `κ(S⁻¹AS⁻¹)`.
    pub fn kappa_sas(&self) -> f64 {
        self.n_2d() / self.lambda_min_sas_factor()
    }

    /// Earlier upper bound on `κ(A)` based on Sobolev's inequality.
    pub fn kappa_a_prior(&self) -> f64 {
        let n = self.num_elements();
        let f = match self.dim {
            1 => 1.0,
            2 => 1.0 + self.volume_ratio().ln(),
            dim => {
                let d = dim as f64;
                let kbar = self.metrics.k_avg_volume;
                mean(
                    self.volumes
                        .iter()
                        .map(|v| (kbar / v).powf((d - 2.0) / 2.0)),
                    n,
                )
                .powf(2.0 / d)
            }
        };
        self.n_2d() * self.patch_factor() * f
    }

    /// Earlier upper bound on `κ(S⁻¹AS⁻¹)`.
    pub fn kappa_sas_prior(&self) -> f64 {
        let nf = self.nf();
        let n = self.num_elements();
        let f = match self.dim {
            1 => self.anisotropy.weighted_sum / (nf * nf),
            2 => self.anisotropy.weighted_sum / nf * (1.0 + self.anisotropy.gamma_h.ln().abs()),
            dim => {
                let d = dim as f64;
                mean(
                    self.volumes
                        .iter()
                        .zip(self.beta())
                        .map(|(v, b)| v * b.powf(d / 2.0)),
                    n,
                )
                .powf(2.0 / d)
            }
        };
        self.n_2d() * f
    }

    /// `Σ_K |K| β_K ln(1 + d_K/|K|)`, defined for `d = 2` only.
    pub fn kappa_sas_conjectured(&self) -> Option<f64> {
        (self.dim == 2).then(|| {
            self.volumes
                .iter()
                .zip(self.beta())
                .zip(&self.d_k)
                .map(|((v, b), d)| v * b * (1.0 + d / v).ln())
                .sum()
        })
    }
}

/// `|ω_min|_ρ / ((d+1)(d+2))`, a lower bound on `λ_min(B_ρ)`.
pub fn bound_lambda_min_b(mesh: &SimplicialMesh, rho: &DensityFunction) -> Result<f64> {
    let d = mesh.dim();
    let masses = check_density(mesh, rho)?;
    let mut patch = vec![0.0; mesh.num_interior()];
    for (k, el) in mesh.elements().enumerate() {
        for &v in el {
            if let Some(j) = mesh.interior_index(v) {
                patch[j] += masses[k];
            }
        }
    }
    let min = patch.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::EmptySystem);
    }
    Ok(min / ((d + 1) * (d + 2)) as f64)
}

fn check_density(mesh: &SimplicialMesh, rho: &DensityFunction) -> Result<Vec<f64>> {
    if rho.rho_k().len() != mesh.num_elements() {
        return Err(Error::Mismatch(format!(
            "density has {} values for {} elements",
            rho.rho_k().len(),
            mesh.num_elements()
        )));
    }
    Ok(rho.element_masses(mesh))
}

/// Lower bound on the smallest eigenvalue of `-Δu = λρu`, without `C`.
pub fn bound_lambda_rho(
    mesh: &SimplicialMesh,
    rho: &DensityFunction,
    p: Option<f64>,
) -> Result<f64> {
    let dim = mesh.dim();
    let masses = check_density(mesh, rho)?;
    let (_, geom) = compute_metrics(mesh, None)?;
    let d_k = geom.iter().map(|g| g.d_k);
    Ok(match dim {
        1 => 1.0 / masses.iter().zip(d_k).map(|(m, d)| m * d).sum::<f64>(),
        2 => {
            let r = rho.rho_max();
            let s: f64 = masses
                .iter()
                .zip(d_k)
                .map(|(m, d)| m * (1.0 + d * r).ln().powi(2))
                .sum();
            (1.0 + s).powf(-0.5)
        }
        _ => {
            let p = p.unwrap_or(DEFAULT_P_3D);
            check_p(dim, p)?;
            let d = dim as f64;
            let q = p / (p - 1.0);
            let e = q * (d - (d - 2.0) * p) / (d + 2.0 * p);
            let s: f64 = masses
                .iter()
                .zip(&geom)
                .map(|(m, g)| m.powf(q) * g.volume.powf(-1.0 / (p - 1.0)) * g.d_k.powf(e))
                .sum();
            (d / (d - 2.0) - p).powf(d / (d + 2.0 * p)) * s.powf(-(p - 1.0) / p)
        }
    })
}

/// `(max_j A_jj, (d+1) max_j A_jj)`, bracketing `λ_max(A)`.
pub fn bound_lambda_max(a: &SparseSymmetric, dim: usize) -> (f64, f64) {
    let m = a.max_diagonal();
    (m, (dim + 1) as f64 * m)
}

pub fn bound_lambda_min_a(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
) -> Result<f64> {
    Ok(BoundContext::new(mesh, field, p)?.lambda_min_a())
}

pub fn bound_lambda_min_sas(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
) -> Result<f64> {
    Ok(BoundContext::new(mesh, field, p)?.lambda_min_sas())
}

pub fn bound_lambda_min_fried(mesh: &SimplicialMesh, field: &DiffusionField) -> Result<f64> {
    Ok(BoundContext::new(mesh, field, None)?.lambda_min_fried())
}

/// Upper bounds `(κ(A), κ(S⁻¹AS⁻¹))`, without `C`.
pub fn bound_kappa(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
) -> Result<(f64, f64)> {
    let c = BoundContext::new(mesh, field, p)?;
    Ok((c.kappa_a(), c.kappa_sas()))
}

/// Earlier upper bounds `(κ(A), κ(S⁻¹AS⁻¹))`, without `C`.
pub fn bound_kappa_prior(mesh: &SimplicialMesh, field: &DiffusionField) -> Result<(f64, f64)> {
    let c = BoundContext::new(mesh, field, None)?;
    Ok((c.kappa_a_prior(), c.kappa_sas_prior()))
}

pub fn bound_kappa_sas_conjectured(mesh: &SimplicialMesh, field: &DiffusionField) -> Result<f64> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "the conjectured bound is defined for d = 2, got d = {}",
            mesh.dim()
        )));
    }
    Ok(BoundContext::new(mesh, field, None)?
        .kappa_sas_conjectured()
        .expect("d = 2"))
}
