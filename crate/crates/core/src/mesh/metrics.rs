use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{element_d_k_with, BoundaryDistance};
use super::{factorial, SimplicialMesh};
use crate::assembly::{average_diffusion, DiffusionField};
use crate::error::{Error, Result};
use crate::small::SmallMat;

/// Per-element geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementGeometry {
    /// `F'_K` for the unit-volume reference simplex, so `|det F'_K| = |K|`.
    pub jacobian: SmallMat,
    pub volume: f64,
    pub d_k: f64,
    /// Interior-vertex rows whose patch contains this element.
    pub patch_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshMetrics {
    pub dim: usize,
    pub num_elements: usize,
    pub num_interior: usize,
    /// `|ω_j|` for every interior vertex row `j`.
    pub patch_volumes: Vec<f64>,
    /// Minimum number of elements in a patch.
    pub p_min: usize,
    pub k_min_volume: f64,
    /// `|Ω| / N`.
    pub k_avg_volume: f64,
    pub domain_volume: f64,
    pub h_domain: f64,
    pub max_aspect_ratio: f64,
    /// `Σ_K |K| det(D_K)^{-1/2}`, present when a diffusion field is given.
    pub sigma_h: Option<f64>,
}

/// Edge length of the standard simplex scaled to unit volume.
pub(crate) fn reference_scale(dim: usize) -> f64 {
    factorial(dim).powf(1.0 / dim as f64)
}

pub fn compute_geometry(mesh: &SimplicialMesh) -> Result<Vec<ElementGeometry>> {
    let dim = mesh.dim();
    let scale = reference_scale(dim);
    let bd = BoundaryDistance::new(mesh);
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let jacobian = mesh.edge_matrix(k).scale(1.0 / scale);
            let volume = jacobian.det().abs();
            if !(volume > 0.0) || !volume.is_finite() {
                return Err(Error::DegenerateElement { element: k });
            }
            let patch_ids = mesh
                .element(k)
                .iter()
                .filter_map(|&v| mesh.interior_index(v))
                .collect();
            Ok(ElementGeometry {
                jacobian,
                volume,
                d_k: element_d_k_with(mesh, &bd, k),
                patch_ids,
            })
        })
        .collect()
}

/// Aggregate metrics plus per-element geometry. `sigma_h` is filled only
/// when `field` is supplied.
pub fn compute_metrics(
    mesh: &SimplicialMesh,
    field: Option<&DiffusionField>,
) -> Result<(MeshMetrics, Vec<ElementGeometry>)> {
    let geom = compute_geometry(mesh)?;
    let n_vi = mesh.num_interior();
    let mut patch_volumes = vec![0.0; n_vi];
    let mut patch_counts = vec![0usize; n_vi];
    for g in &geom {
        for &j in &g.patch_ids {
            patch_volumes[j] += g.volume;
            patch_counts[j] += 1;
        }
    }
    let domain_volume: f64 = geom.iter().map(|g| g.volume).sum();
    let n = geom.len();
    let sigma_h = match field {
        Some(f) => {
            let mut s = 0.0;
            for (k, g) in geom.iter().enumerate() {
                let dk = average_diffusion(mesh, f, k)?;
                s += g.volume / dk.det().sqrt();
            }
            Some(s)
        }
        None => None,
    };
    let metrics = MeshMetrics {
        dim: mesh.dim(),
        num_elements: n,
        num_interior: n_vi,
        patch_volumes,
        p_min: patch_counts.iter().copied().min().unwrap_or(0),
        k_min_volume: geom.iter().map(|g| g.volume).fold(f64::INFINITY, f64::min),
        k_avg_volume: domain_volume / n as f64,
        domain_volume,
        h_domain: mesh.domain_diameter(),
        max_aspect_ratio: (0..n).map(|k| mesh.aspect_ratio(k)).fold(0.0, f64::max),
        sigma_h,
    };
    Ok((metrics, geom))
}
