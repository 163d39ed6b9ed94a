//! Element-averaged diffusion, stiffness and weighted mass matrices over the
//! interior vertices, and symmetric Jacobi scaling.

mod density;
mod diffusion;
mod sparse;

pub use density::{density_beta_weighted, density_equidistributed, DensityFunction};
pub use diffusion::{average_diffusion, element_averages, DiffusionField, DiffusionSpec};
pub use sparse::SparseSymmetric;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::small::SmallMat;

/// Gradients of the `d + 1` barycentric basis functions of element `k`.
pub(crate) fn basis_gradients(mesh: &SimplicialMesh, k: usize) -> Result<[[f64; 3]; 4]> {
    let d = mesh.dim();
    let inv = mesh
        .edge_matrix(k)
        .inverse()
        .ok_or(Error::DegenerateElement { element: k })?;
    let mut g = [[0.0; 3]; 4];
    for j in 0..d {
        for c in 0..d {
            g[j + 1][c] = inv.get(j, c);
            g[0][c] -= inv.get(j, c);
        }
    }
    Ok(g)
}

/// Local stiffness `|K| ∇φ_a · D_K ∇φ_b`, row-major `(d+1)²`.
fn local_stiffness(mesh: &SimplicialMesh, dk: &SmallMat, k: usize) -> Result<[f64; 16]> {
    let d = mesh.dim();
    let g = basis_gradients(mesh, k)?;
    let vol = mesh.element_volume(k);
    let mut out = [0.0; 16];
    for a in 0..=d {
        let dg = dk.mul_vec(&g[a][..d]);
        for b in 0..=a {
            let v = vol * (0..d).map(|c| dg[c] * g[b][c]).sum::<f64>();
            out[a * 4 + b] = v;
            out[b * 4 + a] = v;
        }
    }
    Ok(out)
}

/// Assembles local `(d+1)²` blocks into rows given by `index` (vertex to
/// row; `None` drops the vertex). Local blocks may be computed in parallel;
/// accumulation runs in element order.
fn assemble_with<F>(
    mesh: &SimplicialMesh,
    order: usize,
    index: impl Fn(usize) -> Option<usize>,
    local: F,
) -> Result<SparseSymmetric>
where
    F: Fn(usize) -> Result<[f64; 16]> + Sync,
{
    if order == 0 {
        return Err(Error::EmptySystem);
    }
    let d = mesh.dim();
    let mut rows = vec![Vec::new(); order];
    for el in mesh.elements() {
        for &a in el {
            if let Some(i) = index(a) {
                rows[i].extend(el.iter().filter_map(|&b| index(b)));
            }
        }
    }
    let mut m = SparseSymmetric::from_pattern(rows);
    let blocks: Vec<[f64; 16]> = (0..mesh.num_elements())
        .into_par_iter()
        .map(&local)
        .collect::<Result<_>>()?;
    for (k, blk) in blocks.iter().enumerate() {
        let el = mesh.element(k);
        for a in 0..=d {
            let Some(i) = index(el[a]) else { continue };
            for b in 0..=a {
                if let Some(j) = index(el[b]) {
                    m.add_sym(i, j, blk[a * 4 + b]);
                }
            }
        }
    }
    Ok(m)
}

/// Stiffness matrix over the interior vertices (homogeneous Dirichlet rows
/// are never assembled).
pub fn assemble_stiffness(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
) -> Result<SparseSymmetric> {
    let dks = element_averages(mesh, field)?;
    assemble_with(
        mesh,
        mesh.num_interior(),
        |v| mesh.interior_index(v),
        |k| local_stiffness(mesh, &dks[k], k),
    )
}

/// Stiffness matrix over all vertices, before any boundary elimination.
pub fn assemble_stiffness_all_vertices(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
) -> Result<SparseSymmetric> {
    let dks = element_averages(mesh, field)?;
    assemble_with(mesh, mesh.num_vertices(), Some, |k| {
        local_stiffness(mesh, &dks[k], k)
    })
}

/// Mass matrix of `(ρu, v)` for a piecewise-constant density.
pub fn assemble_mass_weighted(
    mesh: &SimplicialMesh,
    rho: &DensityFunction,
) -> Result<SparseSymmetric> {
    let d = mesh.dim();
    if rho.rho_k().len() != mesh.num_elements() {
        return Err(Error::Mismatch(format!(
            "density has {} values for {} elements",
            rho.rho_k().len(),
            mesh.num_elements()
        )));
    }
    let denom = ((d + 1) * (d + 2)) as f64;
    assemble_with(
        mesh,
        mesh.num_interior(),
        |v| mesh.interior_index(v),
        |k| {
            let vol = mesh.element_volume(k);
            let off = rho.rho_k()[k] * vol / denom;
            let mut out = [0.0; 16];
            for a in 0..=d {
                for b in 0..=d {
                    out[a * 4 + b] = if a == b { 2.0 * off } else { off };
                }
            }
            Ok(out)
        },
    )
}

/// `S⁻¹ A S⁻¹` with `S = diag(√A_jj)`; the diagonal of the result is set to
/// exactly one.
pub fn jacobi_scale(a: &SparseSymmetric) -> Result<SparseSymmetric> {
    if let Some((j, &v)) = a.diagonal().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite { pivot: j, value: v });
    }
    let s: Vec<f64> = a.diagonal().iter().map(|v| v.sqrt()).collect();
    let mut out = a.clone();
    out.map_values(|i, j, v| if i == j { 1.0 } else { v / (s[i] * s[j]) });
    Ok(out)
}
