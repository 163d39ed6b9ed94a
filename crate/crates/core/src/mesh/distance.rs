//! Euclidean distance to the domain boundary.

use super::{dist, SimplicialMesh};
use crate::error::{Error, Result};

/// Precomputed boundary facets for repeated distance queries.
pub struct BoundaryDistance {
    dim: usize,
    /// Facet vertex coordinates, `dim * dim` values per facet.
    facets: Vec<f64>,
    /// Per-facet axis-aligned bounding boxes, `2 * dim` values each.
    boxes: Vec<f64>,
}

impl BoundaryDistance {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let dim = mesh.dim();
        let mut facets = Vec::with_capacity(mesh.num_boundary_facets() * dim * dim);
        let mut boxes = Vec::with_capacity(mesh.num_boundary_facets() * 2 * dim);
        for f in mesh.boundary_facets() {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &v in f {
                let p = mesh.vertex(v);
                facets.extend_from_slice(p);
                for a in 0..dim {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            boxes.extend_from_slice(&lo[..dim]);
            boxes.extend_from_slice(&hi[..dim]);
        }
        BoundaryDistance { dim, facets, boxes }
    }

    /// Distance from `p` to the nearest boundary facet. No containment
    /// check is made.
    pub fn distance(&self, p: &[f64]) -> f64 {
        let d = self.dim;
        let stride = d * d;
        let mut best_sq = f64::INFINITY;
        for (f, bx) in self.boxes.chunks(2 * d).enumerate() {
            let mut box_sq = 0.0;
            for a in 0..d {
                let gap = (bx[a] - p[a]).max(p[a] - bx[d + a]).max(0.0);
                box_sq += gap * gap;
            }
            if box_sq >= best_sq {
                continue;
            }
            let fv = &self.facets[f * stride..(f + 1) * stride];
            let pts: Vec<&[f64]> = fv.chunks(d).collect();
            let dsq = point_simplex_distance_sq(p, &pts);
            if dsq < best_sq {
                best_sq = dsq;
            }
        }
        best_sq.sqrt()
    }
}

/// Exact distance from `p` to the simplex spanned by `pts` (a point,
/// segment, or triangle in R^1, R^2, R^3 respectively).
pub fn point_simplex_distance(p: &[f64], pts: &[&[f64]]) -> f64 {
    point_simplex_distance_sq(p, pts).sqrt()
}

fn point_simplex_distance_sq(p: &[f64], pts: &[&[f64]]) -> f64 {
    match pts.len() {
        1 => sq(dist(p, pts[0])),
        2 => segment_sq(p, pts[0], pts[1]),
        3 => triangle_sq(p, pts[0], pts[1], pts[2]),
        n => panic!("unsupported facet with {n} vertices"),
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..a.len() {
        out[i] = a[i] - b[i];
    }
    out
}

fn segment_sq(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = p.len();
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len_sq = dot(&ab[..n], &ab[..n]);
    let t = if len_sq > 0.0 {
        (dot(&ap[..n], &ab[..n]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (0..n).map(|i| sq(ap[i] - t * ab[i])).sum()
}

/// Closest point on a triangle by Voronoi-region classification.
fn triangle_sq(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return dot(&ap, &ap);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return dot(&bp, &bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return segment_sq(p, a, b);
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return dot(&cp, &cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return segment_sq(p, a, c);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return segment_sq(p, b, c);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (0..3).map(|i| sq(ap[i] - ab[i] * v - ac[i] * w)).sum()
}

impl SimplicialMesh {
    /// Index of an element containing `p`, if any.
    pub fn locate(&self, p: &[f64]) -> Option<usize> {
        let tol = 1e-12;
        (0..self.num_elements()).find(|&k| {
            let Some(inv) = self.edge_matrix(k).inverse() else {
                return false;
            };
            let v0 = self.vertex(self.element(k)[0]);
            let rel = sub(p, v0);
            let lam = inv.mul_vec(&rel[..self.dim()]);
            let l0 = 1.0 - lam[..self.dim()].iter().sum::<f64>();
            l0 >= -tol && lam[..self.dim()].iter().all(|&l| l >= -tol)
        })
    }

    /// Distance from a point of the closed domain to its boundary.
    pub fn distance_to_boundary(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim() {
            return Err(Error::Mismatch(format!(
                "point has {} coordinates, mesh dim is {}",
                p.len(),
                self.dim()
            )));
        }
        if self.locate(p).is_none() {
            return Err(Error::PointOutside(p.to_vec()));
        }
        Ok(BoundaryDistance::new(self).distance(p))
    }

    /// `d_K`: the largest boundary distance over the element's vertices and
    /// centroid (exact in 1D).
    pub fn element_d_k(&self, k: usize) -> Result<f64> {
        if k >= self.num_elements() {
            return Err(Error::ElementId(k));
        }
        Ok(element_d_k_with(self, &BoundaryDistance::new(self), k))
    }
}

pub(crate) fn element_d_k_with(mesh: &SimplicialMesh, bd: &BoundaryDistance, k: usize) -> f64 {
    let c = mesh.centroid(k);
    let sampled = mesh
        .element(k)
        .iter()
        .map(|&v| bd.distance(mesh.vertex(v)))
        .fold(bd.distance(&c[..mesh.dim()]), f64::max);
    if mesh.dim() != 1 {
        return sampled;
    }
    // In 1D the distance is piecewise linear with kinks halfway between
    // consecutive boundary points, so checking those makes the maximum exact.
    let (a, b) = {
        let e = mesh.element(k);
        let (x0, x1) = (mesh.vertex(e[0])[0], mesh.vertex(e[1])[0]);
        (x0.min(x1), x0.max(x1))
    };
    let mut pts = bd.facets.clone();
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .filter(|m| (a..=b).contains(m))
        .map(|m| bd.distance(&[m]))
        .fold(sampled, f64::max)
}
