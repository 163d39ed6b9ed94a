//! Mesh families used in the conditioning experiments.
//!
//! All multi-dimensional generators are tensor-product grids split into
//! simplices: two right triangles per rectangle (shared diagonal direction)
//! and the six-tetrahedron Kuhn split per box.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SimplicialMesh;
use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]` in the first `dim` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Domain {
    pub fn unit(dim: usize) -> Self {
        Domain {
            dim,
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }
}

pub fn generate_uniform(dim: usize, n_per_axis: usize, domain: &Domain) -> Result<SimplicialMesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Dimension(dim));
    }
    if domain.dim != dim {
        return Err(Error::Mismatch(format!(
            "domain has dim {}, requested {dim}",
            domain.dim
        )));
    }
    if n_per_axis < 1 {
        return Err(Error::InvalidParameter(
            "n_per_axis must be at least 1".into(),
        ));
    }
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            let (lo, hi) = (domain.lo[a], domain.hi[a]);
            if !(hi > lo) {
                return Err(Error::InvalidParameter(format!(
                    "empty domain extent on axis {a}"
                )));
            }
            Ok((0..=n_per_axis)
                .map(|i| {
                    if i == n_per_axis {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / n_per_axis as f64
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    tensor_mesh(&axes)
}

/// Unit interval with Chebyshev interior nodes
/// `x_j = (1 - cos ξ_j) / 2`, `ξ_j = π (2j - 1) / (2 (n - 1))`.
pub fn generate_chebyshev_1d(n: usize) -> Result<SimplicialMesh> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "chebyshev mesh needs at least 2 elements".into(),
        ));
    }
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    for j in 1..n {
        let xi = PI * (2 * j - 1) as f64 / (2 * (n - 1)) as f64;
        x.push(0.5 * (1.0 - xi.cos()));
    }
    x.push(1.0);
    tensor_mesh(&[x])
}

/// Unit interval with nodes `x_j = 2^j / 2^n` refining towards `x = 0`.
pub fn generate_power2_1d(n: usize) -> Result<SimplicialMesh> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "power-of-two mesh needs at least 2 elements".into(),
        ));
    }
    if n > 52 {
        return Err(Error::InvalidParameter(format!(
            "power-of-two mesh with n = {n} underflows the element widths (max 52)"
        )));
    }
    let denom = (n as f64).exp2();
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    for j in 1..n {
        x.push((j as f64).exp2() / denom);
    }
    x.push(1.0);
    tensor_mesh(&[x])
}

/// Unit square (`dim = 2`) or cube (`dim = 3`) with a uniform core of
/// `n_core_per_axis` grid lines per axis and one layer of thin elements
/// along every boundary face.
///
/// The layer thickness is `h / aspect` where `h` is the core spacing, so
/// `aspect = 1` reproduces `generate_uniform(dim, n_core_per_axis + 1)`.
pub fn generate_boundary_layer(
    dim: usize,
    n_core_per_axis: usize,
    aspect: f64,
) -> Result<SimplicialMesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::Dimension(dim));
    }
    if !aspect.is_finite() || aspect < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "aspect must be a finite value >= 1, got {aspect}"
        )));
    }
    if n_core_per_axis < 2 {
        return Err(Error::InvalidParameter(
            "n_core_per_axis must be at least 2".into(),
        ));
    }
    let cells = (n_core_per_axis - 1) as f64;
    let h = 1.0 / (cells + 2.0 / aspect);
    let t = h / aspect;
    if !(t > 0.0) || 2.0 * t >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "layer thickness {t:e} produces degenerate elements"
        )));
    }
    let m = n_core_per_axis - 1;
    let mut axis = Vec::with_capacity(m + 3);
    axis.push(0.0);
    for i in 0..=m {
        axis.push(t + (1.0 - 2.0 * t) * i as f64 / m as f64);
    }
    axis.push(1.0);
    for w in axis.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "boundary layer produces zero-width cells".into(),
            ));
        }
    }
    let axes = vec![axis; dim];
    tensor_mesh(&axes)
}

/// Simplicial split of the tensor-product grid with the given axis nodes.
/// Vertices are numbered with the first axis running fastest.
pub(crate) fn tensor_mesh(axes: &[Vec<f64>]) -> Result<SimplicialMesh> {
    let dim = axes.len();
    let n: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let nv: usize = n.iter().product();
    let mut coords = Vec::with_capacity(nv * dim);
    let idx = |i: usize, j: usize, k: usize| i + n[0] * (j + if dim > 1 { n[1] * k } else { 0 });

    let mut cells = Vec::new();
    match dim {
        1 => {
            coords.extend_from_slice(&axes[0]);
            for i in 0..n[0] - 1 {
                cells.extend_from_slice(&[i, i + 1]);
            }
        }
        2 => {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    coords.extend_from_slice(&[axes[0][i], axes[1][j]]);
                }
            }
            for j in 0..n[1] - 1 {
                for i in 0..n[0] - 1 {
                    let (v00, v10) = (idx(i, j, 0), idx(i + 1, j, 0));
                    let (v01, v11) = (idx(i, j + 1, 0), idx(i + 1, j + 1, 0));
                    cells.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
                }
            }
        }
        3 => {
            for k in 0..n[2] {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        coords.extend_from_slice(&[axes[0][i], axes[1][j], axes[2][k]]);
                    }
                }
            }
            const PERMS: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for k in 0..n[2] - 1 {
                for j in 0..n[1] - 1 {
                    for i in 0..n[0] - 1 {
                        for perm in PERMS {
                            let mut c = [i, j, k];
                            cells.push(idx(c[0], c[1], c[2]));
                            for axis in perm {
                                c[axis] += 1;
                                cells.push(idx(c[0], c[1], c[2]));
                            }
                        }
                    }
                }
            }
        }
        d => return Err(Error::Dimension(d)),
    }
    SimplicialMesh::new(dim, coords, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let m1 = generate_uniform(1, 2, &Domain::unit(1)).unwrap();
        assert_eq!(m1.coords(), &[0.0, 0.5, 1.0]);
        assert_eq!(m1.num_interior(), 1);

        let m2 = generate_uniform(2, 2, &Domain::unit(2)).unwrap();
        assert_eq!(
            (m2.num_vertices(), m2.num_elements(), m2.num_interior()),
            (9, 8, 1)
        );

        let m3 = generate_uniform(3, 2, &Domain::unit(3)).unwrap();
        assert_eq!(
            (m3.num_vertices(), m3.num_elements(), m3.num_interior()),
            (27, 48, 1)
        );
    }

    #[test]
    fn kuhn_split_matches_brute_force_enumeration() {
        // Every tetrahedron of a Kuhn cube is a monotone lattice path from
        // (0,0,0) to (1,1,1); enumerate those paths independently and check
        // that the generator produces exactly them with volume 1/6 each.
        let m = generate_uniform(3, 1, &Domain::unit(3)).unwrap();
        assert_eq!(m.num_elements(), 6);
        let mut got: Vec<Vec<usize>> = m
            .elements()
            .map(|e| {
                let mut v = e.to_vec();
                v.sort_unstable();
                v
            })
            .collect();
        got.sort();
        let mut want = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                if b == a {
                    continue;
                }
                let mut p = [0usize; 3];
                let mut verts = vec![0usize];
                for axis in [a, b, 3 - a - b] {
                    p[axis] = 1;
                    verts.push(p[0] + 2 * p[1] + 4 * p[2]);
                }
                verts.sort_unstable();
                want.push(verts);
            }
        }
        want.sort();
        assert_eq!(got, want);
        for k in 0..6 {
            assert!((m.element_volume(k) - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn chebyshev_nodes() {
        let m = generate_chebyshev_1d(4).unwrap();
        let x = m.coords();
        let expect = [
            0.0,
            0.066_987_298_107_780_65,
            0.5,
            0.933_012_701_892_219_3,
            1.0,
        ];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let m2 = generate_chebyshev_1d(2).unwrap();
        assert!((m2.coords()[1] - 0.5).abs() < 1e-16);
        let m8 = generate_chebyshev_1d(8).unwrap();
        assert!(m8.coords().windows(2).all(|w| w[1] > w[0]));
        assert!(generate_chebyshev_1d(1).is_err());
    }

    #[test]
    fn power2_nodes() {
        let m = generate_power2_1d(4).unwrap();
        assert_eq!(m.coords(), &[0.0, 0.125, 0.25, 0.5, 1.0]);
        assert_eq!(generate_power2_1d(2).unwrap().coords(), &[0.0, 0.5, 1.0]);
        let m10 = generate_power2_1d(10).unwrap();
        let min_w = (0..m10.num_elements())
            .map(|k| m10.element_volume(k))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min_w, 2f64.powi(-9));
        assert!(generate_power2_1d(53).is_err());
        assert!(generate_power2_1d(1).is_err());
    }

    #[test]
    fn boundary_layer_aspect_one_is_uniform() {
        let bl = generate_boundary_layer(2, 5, 1.0).unwrap();
        let un = generate_uniform(2, 6, &Domain::unit(2)).unwrap();
        assert_eq!(bl.connectivity(), un.connectivity());
        for (a, b) in bl.coords().iter().zip(un.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_layer_2d_aspect_and_thin_count() {
        let n = 20;
        let m = generate_boundary_layer(2, n, 125.0).unwrap();
        let ar: Vec<f64> = (0..m.num_elements()).map(|k| m.aspect_ratio(k)).collect();
        let max = ar.iter().cloned().fold(0.0, f64::max);
        assert!((125.0..=250.0).contains(&max), "max aspect {max}");
        let thin = ar.iter().filter(|&&a| a > 2.0 + 1e-9).count();
        assert!(thin >= 4 * (n - 1) && thin <= 8 * (n - 1), "thin {thin}");
    }

    #[test]
    fn boundary_layer_3d_aspect() {
        let m = generate_boundary_layer(3, 8, 25.0).unwrap();
        let max = (0..m.num_elements())
            .map(|k| m.aspect_ratio(k))
            .fold(0.0, f64::max);
        assert!((25.0..=50.0).contains(&max), "max aspect {max}");
    }

    #[test]
    fn boundary_layer_rejects_bad_parameters() {
        assert!(generate_boundary_layer(2, 10, 0.5).is_err());
        assert!(generate_boundary_layer(2, 10, f64::NAN).is_err());
        assert!(generate_boundary_layer(2, 1, 5.0).is_err());
        assert!(generate_boundary_layer(1, 10, 5.0).is_err());
    }

    #[test]
    fn paper_scale_element_counts() {
        assert_eq!(
            generate_boundary_layer(2, 99, 125.0)
                .unwrap()
                .num_elements(),
            20_000
        );
        assert_eq!(
            generate_boundary_layer(3, 16, 25.0).unwrap().num_elements(),
            29_478
        );
    }
}
