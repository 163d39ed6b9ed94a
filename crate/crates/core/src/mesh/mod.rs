//! Simplicial meshes in one, two and three dimensions.
//!
//! A [`SimplicialMesh`] is immutable once built. Construction normalizes
//! element orientation, checks conformity and watertightness, and derives
//! boundary flags and the interior-vertex numbering from facet incidence.

mod distance;
mod generate;
mod io;
mod metrics;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::small::SmallMat;

pub use distance::{point_simplex_distance, BoundaryDistance};
pub use generate::{
    generate_boundary_layer, generate_chebyshev_1d, generate_power2_1d, generate_uniform, Domain,
};
pub use io::{
    export_native_json, export_triangle, import_mesh, mesh_from_json, mesh_to_json, MeshFormat,
};
pub use metrics::{compute_geometry, compute_metrics, ElementGeometry, MeshMetrics};

/// Sorted vertex ids of a facet, padded with `usize::MAX`.
type FacetKey = [usize; 3];

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    boundary: Vec<bool>,
    interior_index: Vec<usize>,
    interior_vertices: Vec<usize>,
    boundary_facets: Vec<usize>,
}

impl PartialEq for SimplicialMesh {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords && self.cells == other.cells
    }
}

const NOT_INTERIOR: usize = usize::MAX;

impl SimplicialMesh {
    /// Builds a mesh from flat coordinate (`n_vertices * dim`) and
    /// connectivity (`n_elements * (dim + 1)`) arrays.
    pub fn new(dim: usize, coords: Vec<f64>, mut cells: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Mismatch(format!(
                "{} coordinates is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        let nv = coords.len() / dim;
        let nn = dim + 1;
        if cells.is_empty() || !cells.len().is_multiple_of(nn) {
            return Err(Error::Mismatch(format!(
                "connectivity length {} is not a positive multiple of {nn}",
                cells.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate in vertex {}",
                i / dim
            )));
        }
        for (k, el) in cells.chunks(nn).enumerate() {
            if let Some(&index) = el.iter().find(|&&v| v >= nv) {
                return Err(Error::VertexIndex { element: k, index });
            }
        }

        // Orientation: positive signed volume, swapping the last two
        // vertices of negatively oriented elements.
        let ne = cells.len() / nn;
        for k in 0..ne {
            let el = &cells[k * nn..(k + 1) * nn];
            let e = edge_matrix_of(dim, &coords, el);
            let det = e.det();
            let scale = max_edge_len(dim, &coords, el).powi(dim as i32);
            if !det.is_finite() || det.abs() <= 1e-13 * scale {
                return Err(Error::DegenerateElement { element: k });
            }
            if det < 0.0 {
                if dim == 1 {
                    cells.swap(k * nn, k * nn + 1);
                } else {
                    cells.swap(k * nn + dim - 1, k * nn + dim);
                }
            }
        }

        let mut used = vec![false; nv];
        for &v in &cells {
            used[v] = true;
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::UnusedVertex(v));
        }

        let boundary_facets = classify_facets(dim, &cells)?;
        check_watertight(dim, &boundary_facets)?;

        let mut boundary = vec![false; nv];
        for &v in &boundary_facets {
            boundary[v] = true;
        }
        let mut interior_index = vec![NOT_INTERIOR; nv];
        let mut interior_vertices = Vec::new();
        for v in 0..nv {
            if !boundary[v] {
                interior_index[v] = interior_vertices.len();
                interior_vertices.push(v);
            }
        }

        Ok(SimplicialMesh {
            dim,
            coords,
            cells,
            boundary,
            interior_index,
            interior_vertices,
            boundary_facets,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Number of elements, `N`.
    #[inline]
    pub fn num_elements(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    /// Number of interior vertices, `N_vi`.
    #[inline]
    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    #[inline]
    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn element(&self, k: usize) -> &[usize] {
        let nn = self.dim + 1;
        &self.cells[k * nn..(k + 1) * nn]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.cells.chunks(self.dim + 1)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn connectivity(&self) -> &[usize] {
        &self.cells
    }

    #[inline]
    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Row of vertex `v` in the Dirichlet system, if it is interior.
    #[inline]
    pub fn interior_index(&self, v: usize) -> Option<usize> {
        let i = self.interior_index[v];
        (i != NOT_INTERIOR).then_some(i)
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.boundary_facets.len() / self.dim
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.boundary_facets.chunks(self.dim)
    }

    /// Edge matrix `[v1 - v0, …, vd - v0]` (columns) of element `k`.
    pub fn edge_matrix(&self, k: usize) -> SmallMat {
        edge_matrix_of(self.dim, &self.coords, self.element(k))
    }

    pub fn element_volume(&self, k: usize) -> f64 {
        self.edge_matrix(k).det().abs() / factorial(self.dim)
    }

    pub fn domain_volume(&self) -> f64 {
        (0..self.num_elements())
            .map(|k| self.element_volume(k))
            .sum()
    }

    pub fn centroid(&self, k: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        let el = self.element(k);
        for &v in el {
            for (ci, x) in c.iter_mut().zip(self.vertex(v)) {
                *ci += x;
            }
        }
        for ci in c.iter_mut().take(self.dim) {
            *ci /= el.len() as f64;
        }
        c
    }

    /// Longest edge length of element `k`.
    pub fn element_diameter(&self, k: usize) -> f64 {
        max_edge_len(self.dim, &self.coords, self.element(k))
    }

    /// Longest edge divided by the smallest height; 2 for a right
    /// isosceles triangle and 1 for any 1D element.
    pub fn aspect_ratio(&self, k: usize) -> f64 {
        let d = self.dim;
        let el = self.element(k);
        let vol = self.element_volume(k);
        let max_facet = (0..=d)
            .map(|skip| {
                let facet: Vec<&[f64]> = el
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| self.vertex(v))
                    .collect();
                facet_measure(d, &facet)
            })
            .fold(0.0, f64::max);
        let min_height = d as f64 * vol / max_facet;
        self.element_diameter(k) / min_height
    }

    /// Diameter of the domain, the largest distance between two boundary
    /// vertices.
    pub fn domain_diameter(&self) -> f64 {
        let bv: Vec<usize> = (0..self.num_vertices())
            .filter(|&v| self.boundary[v])
            .collect();
        let mut best: f64 = 0.0;
        for (a, &i) in bv.iter().enumerate() {
            for &j in &bv[a + 1..] {
                best = best.max(dist(self.vertex(i), self.vertex(j)));
            }
        }
        best
    }

    /// Copy of the mesh with every coordinate mapped through `f`.
    pub fn map_coords(&self, f: impl Fn(&mut [f64])) -> Result<Self> {
        let mut coords = self.coords.clone();
        for p in coords.chunks_mut(self.dim) {
            f(p);
        }
        SimplicialMesh::new(self.dim, coords, self.cells.clone())
    }
}

pub(crate) fn factorial(d: usize) -> f64 {
    (1..=d).product::<usize>() as f64
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn edge_matrix_of(dim: usize, coords: &[f64], el: &[usize]) -> SmallMat {
    let p0 = &coords[el[0] * dim..(el[0] + 1) * dim];
    let mut e = SmallMat::zeros(dim);
    for j in 0..dim {
        let pj = &coords[el[j + 1] * dim..(el[j + 1] + 1) * dim];
        for i in 0..dim {
            e.set(i, j, pj[i] - p0[i]);
        }
    }
    e
}

fn max_edge_len(dim: usize, coords: &[f64], el: &[usize]) -> f64 {
    let p = |v: usize| &coords[v * dim..(v + 1) * dim];
    let mut best: f64 = 0.0;
    for a in 0..el.len() {
        for b in a + 1..el.len() {
            best = best.max(dist(p(el[a]), p(el[b])));
        }
    }
    best
}

/// Measure of a (d-1)-simplex given by `d` points in R^d.
fn facet_measure(dim: usize, pts: &[&[f64]]) -> f64 {
    match dim {
        1 => 1.0,
        2 => dist(pts[0], pts[1]),
        _ => {
            let u: Vec<f64> = (0..3).map(|i| pts[1][i] - pts[0][i]).collect();
            let w: Vec<f64> = (0..3).map(|i| pts[2][i] - pts[0][i]).collect();
            let c = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
    }
}

fn facet_key(vs: &[usize]) -> FacetKey {
    let mut key = [usize::MAX; 3];
    key[..vs.len()].copy_from_slice(vs);
    key[..vs.len()].sort_unstable();
    key
}

/// Returns the boundary facets (flat, `dim` vertices each, in the
/// orientation inherited from their element) after checking that no facet
/// is shared by more than two elements and no element is duplicated.
fn classify_facets(dim: usize, cells: &[usize]) -> Result<Vec<usize>> {
    let nn = dim + 1;
    let mut seen: HashMap<[usize; 4], usize> = HashMap::new();
    for (k, el) in cells.chunks(nn).enumerate() {
        let mut key = [usize::MAX; 4];
        key[..nn].copy_from_slice(el);
        key[..nn].sort_unstable();
        if seen.insert(key, k).is_some() {
            let facet = key[..dim].to_vec();
            return Err(Error::NonConforming { facet, count: 2 });
        }
    }

    let mut count: HashMap<FacetKey, (usize, usize, usize)> = HashMap::new();
    for (k, el) in cells.chunks(nn).enumerate() {
        for skip in 0..nn {
            let facet: Vec<usize> = (0..nn).filter(|&i| i != skip).map(|i| el[i]).collect();
            let e = count.entry(facet_key(&facet)).or_insert((0, k, skip));
            e.0 += 1;
            if e.0 > 2 {
                return Err(Error::NonConforming {
                    facet: facet_key(&facet)[..dim].to_vec(),
                    count: e.0,
                });
            }
        }
    }

    let mut owners: Vec<(usize, usize)> = count
        .values()
        .filter(|(c, _, _)| *c == 1)
        .map(|&(_, k, skip)| (k, skip))
        .collect();
    owners.sort_unstable();
    let mut out = Vec::with_capacity(owners.len() * dim);
    for (k, skip) in owners {
        let el = &cells[k * nn..(k + 1) * nn];
        out.extend((0..nn).filter(|&i| i != skip).map(|i| el[i]));
    }
    Ok(out)
}

/// The boundary must be a single closed surface: in 1D exactly two points,
/// otherwise every ridge of the boundary is shared by exactly two boundary
/// facets and the facets form one connected component.
fn check_watertight(dim: usize, facets: &[usize]) -> Result<()> {
    let nf = facets.len() / dim;
    if dim == 1 {
        if nf != 2 {
            return Err(Error::OpenBoundary(format!(
                "expected 2 boundary points, found {nf}"
            )));
        }
        return Ok(());
    }
    if nf == 0 {
        return Err(Error::OpenBoundary("no boundary facets".into()));
    }
    let mut ridges: HashMap<FacetKey, Vec<usize>> = HashMap::new();
    for (f, fv) in facets.chunks(dim).enumerate() {
        for skip in 0..dim {
            let r: Vec<usize> = (0..dim).filter(|&i| i != skip).map(|i| fv[i]).collect();
            ridges.entry(facet_key(&r)).or_default().push(f);
        }
    }
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (key, fs) in &ridges {
        if fs.len() != 2 {
            let ridge: Vec<usize> = key.iter().copied().filter(|&v| v != usize::MAX).collect();
            return Err(Error::OpenBoundary(format!(
                "boundary ridge {ridge:?} is shared by {} boundary facets",
                fs.len()
            )));
        }
        let (a, b) = (find(&mut parent, fs[0]), find(&mut parent, fs[1]));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    if (1..nf).any(|f| find(&mut parent, f) != root) {
        return Err(Error::OpenBoundary(
            "boundary has more than one connected component".into(),
        ));
    }
    Ok(())
}
