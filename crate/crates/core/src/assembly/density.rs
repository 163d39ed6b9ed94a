use serde::{Deserialize, Serialize};

use super::DiffusionField;
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;

/// Piecewise-constant positive weight, one value per element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFunction {
    rho_k: Vec<f64>,
    rho_max: f64,
}

impl DensityFunction {
    /// Raw per-element values; no normalization is applied.
    pub fn new(rho_k: Vec<f64>) -> Result<Self> {
        if rho_k.is_empty() {
            return Err(Error::EmptySystem);
        }
        if let Some(k) = rho_k.iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density on element {k} is {}, must be positive",
                rho_k[k]
            )));
        }
        let rho_max = rho_k.iter().copied().fold(0.0, f64::max);
        Ok(DensityFunction { rho_k, rho_max })
    }

    /// `ρ_K = w_K / Σ |K̃| w_K̃`, so that `∫ρ = 1`.
    pub fn from_weights(mesh: &SimplicialMesh, weights: &[f64]) -> Result<Self> {
        if weights.len() != mesh.num_elements() {
            return Err(Error::Mismatch(format!(
                "{} weights for {} elements",
                weights.len(),
                mesh.num_elements()
            )));
        }
        let total: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * mesh.element_volume(k))
            .sum();
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// `ρ ≡ 1/|Ω|`.
    pub fn uniform(mesh: &SimplicialMesh) -> Self {
        let v = 1.0 / mesh.domain_volume();
        Self::new(vec![v; mesh.num_elements()]).expect("positive volume")
    }

    pub fn rho_k(&self) -> &[f64] {
        &self.rho_k
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rho_k.iter().map(|r| r * c).collect())
    }

    /// `Σ_K ρ_K |K|`.
    pub fn total_mass(&self, mesh: &SimplicialMesh) -> f64 {
        self.rho_k
            .iter()
            .enumerate()
            .map(|(k, r)| r * mesh.element_volume(k))
            .sum()
    }

    /// `|K|_ρ = ρ_K |K|` for every element.
    pub fn element_masses(&self, mesh: &SimplicialMesh) -> Vec<f64> {
        self.rho_k
            .iter()
            .enumerate()
            .map(|(k, r)| r * mesh.element_volume(k))
            .collect()
    }
}

/// `ρ_K = 1/(N|K|)`, which gives every element the same weight `1/N`.
pub fn density_equidistributed(mesh: &SimplicialMesh) -> DensityFunction {
    let n = mesh.num_elements() as f64;
    DensityFunction::new(
        (0..mesh.num_elements())
            .map(|k| 1.0 / (n * mesh.element_volume(k)))
            .collect(),
    )
    .expect("positive volumes")
}

/// `ρ_K = β_K / Σ |K̃| β_K̃`.
pub fn density_beta_weighted(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
) -> Result<DensityFunction> {
    let beta = crate::bounds::compute_beta(mesh, field, None)?;
    DensityFunction::from_weights(mesh, &beta.beta_k)
}
