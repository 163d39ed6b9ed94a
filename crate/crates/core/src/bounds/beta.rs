use serde::{Deserialize, Serialize};

use crate::assembly::{element_averages, DiffusionField};
use crate::error::{Error, Result};
use crate::mesh::{compute_geometry, ElementGeometry, SimplicialMesh};
use crate::small::SmallMat;

/// Per-element anisotropy `β_K` and the non-uniformity ratio `γ_h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyMetrics {
    /// `β_K = ‖F'_K⁻¹ D_K F'_K⁻ᵀ‖₂ / d_min`.
    pub beta_k: Vec<f64>,
    /// `Σ_K |K| β_K`.
    pub weighted_sum: f64,
    /// `max_K β_K / Σ_K |K| β_K`.
    pub gamma_h: f64,
    /// Exponent used by the three-dimensional bounds, when set.
    pub p: Option<f64>,
}

/// Admissible exponent interval `(1, d/(d-2))` for `d ≥ 3`.
pub fn p_range(dim: usize) -> (f64, f64) {
    (1.0, dim as f64 / (dim as f64 - 2.0))
}

pub(crate) fn check_p(dim: usize, p: f64) -> Result<()> {
    let (lo, hi) = p_range(dim);
    if dim >= 3 && !(p > lo && p < hi) {
        return Err(Error::ExponentRange { p, lo, hi });
    }
    Ok(())
}

pub(crate) fn beta_of(jacobian: &SmallMat, dk: &SmallMat, d_min: f64, k: usize) -> Result<f64> {
    let inv = jacobian
        .inverse()
        .ok_or(Error::DegenerateElement { element: k })?;
    Ok(inv.mul(dk).mul(&inv.transpose()).sym_norm2() / d_min)
}

pub(crate) fn metrics_from(
    geom: &[ElementGeometry],
    dks: &[SmallMat],
    d_min: f64,
    p: Option<f64>,
) -> Result<AnisotropyMetrics> {
    let beta_k = geom
        .iter()
        .zip(dks)
        .enumerate()
        .map(|(k, (g, dk))| beta_of(&g.jacobian, dk, d_min, k))
        .collect::<Result<Vec<_>>>()?;
    let weighted_sum: f64 = geom.iter().zip(&beta_k).map(|(g, b)| g.volume * b).sum();
    let max = beta_k.iter().copied().fold(0.0, f64::max);
    Ok(AnisotropyMetrics {
        gamma_h: max / weighted_sum,
        beta_k,
        weighted_sum,
        p,
    })
}

pub fn compute_beta(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
) -> Result<AnisotropyMetrics> {
    if let Some(p) = p {
        check_p(mesh.dim(), p)?;
    }
    let geom = compute_geometry(mesh)?;
    let dks = element_averages(mesh, field)?;
    metrics_from(&geom, &dks, field.d_min(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_power2_1d, generate_uniform, Domain};

    #[test]
    fn one_d_beta_is_inverse_square_width() {
        let m = generate_power2_1d(6).unwrap();
        let b = compute_beta(&m, &DiffusionField::identity(1), None).unwrap();
        for k in 0..m.num_elements() {
            let h = m.element_volume(k);
            assert!((b.beta_k[k] * h * h - 1.0).abs() < 1e-13);
        }
        let u = generate_uniform(1, 8, &Domain::unit(1)).unwrap();
        let b = compute_beta(&u, &DiffusionField::identity(1), None).unwrap();
        assert!((b.gamma_h - 1.0).abs() < 1e-13);
        assert!((b.gamma_h * b.weighted_sum - 64.0).abs() < 1e-10);
    }

    #[test]
    fn right_triangle_closed_form() {
        // legs h and h/a; F' = diag(h, h/a) / √2, so F'⁻¹F'⁻ᵀ = 2 diag(1/h², a²/h²).
        let (h, a) = (0.1, 7.0);
        let m = SimplicialMesh::new(2, vec![0.0, 0.0, h, 0.0, 0.0, h / a], vec![0, 1, 2]).unwrap();
        let b = compute_beta(&m, &DiffusionField::identity(2), None).unwrap();
        let want = 2.0 * a * a / (h * h);
        assert!((b.beta_k[0] / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn scaled_diffusion_leaves_beta_unchanged() {
        let m = generate_uniform(3, 2, &Domain::unit(3)).unwrap();
        let d = SmallMat::from_row_major(&[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]).unwrap();
        let f = DiffusionField::constant(d).unwrap();
        let b1 = compute_beta(&m, &f, None).unwrap();
        let b2 = compute_beta(&m, &f.scaled(5.0).unwrap(), None).unwrap();
        for (x, y) in b1.beta_k.iter().zip(&b2.beta_k) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn exponent_range() {
        let m = generate_uniform(3, 2, &Domain::unit(3)).unwrap();
        let f = DiffusionField::identity(3);
        assert!(compute_beta(&m, &f, Some(2.9)).is_ok());
        assert!(matches!(
            compute_beta(&m, &f, Some(3.0)),
            Err(Error::ExponentRange { .. })
        ));
        assert!(compute_beta(&m, &f, Some(1.0)).is_err());
    }
}
