mod common;

use common::*;
use fecond::assembly::{
    assemble_mass_weighted, assemble_stiffness, assemble_stiffness_all_vertices, DensityFunction,
    DiffusionField,
};
use fecond::bounds::{compute_beta, BoundContext};
use fecond::mesh::{generate_boundary_layer, generate_uniform, Domain, SimplicialMesh};
use fecond::spectra::{extreme_eigenvalues_with, Solver};
use fecond::SmallMat;
use proptest::prelude::*;
use rand::Rng;

/// Barycentric points and weights (summing to one) exact for polynomials of
/// degree four or more.
fn high_order_rule(dim: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        1 => {
            let g = 0.5 * (0.6f64).sqrt();
            vec![
                (vec![0.5 - g, 0.5 + g], 5.0 / 18.0),
                (vec![0.5, 0.5], 8.0 / 18.0),
                (vec![0.5 + g, 0.5 - g], 5.0 / 18.0),
            ]
        }
        2 => {
            let mut out = Vec::new();
            for (a, b, w) in [
                (
                    0.108_103_018_168_070,
                    0.445_948_490_915_965,
                    0.223_381_589_678_011,
                ),
                (
                    0.816_847_572_980_459,
                    0.091_576_213_509_771,
                    0.109_951_743_655_322,
                ),
            ] {
                for i in 0..3 {
                    let mut l = vec![b; 3];
                    l[i] = a;
                    out.push((l, w));
                }
            }
            out
        }
        // Only used with fields that are linear in x, for which the
        // centroid is exact.
        _ => vec![(vec![0.25; 4], 1.0)],
    }
}

/// Coefficients of the linear basis functions: row `i` holds
/// `(c_i, ∇φ_i)` with `φ_i(x) = c_i + ∇φ_i · x`, from inverting the
/// `(d+1)×(d+1)` matrix `[1 xᵀ]` by Gauss-Jordan elimination.
fn basis_by_inversion(pts: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = pts.len();
    let mut m: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            let mut row = vec![1.0];
            row.extend_from_slice(p);
            row.extend((0..n).map(|_| 0.0));
            row
        })
        .collect();
    for (i, row) in m.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let src = m[c].clone();
                m[r].iter_mut().zip(&src).for_each(|(v, s)| *v -= f * s);
            }
        }
    }
    // Inverse columns give the coefficients of each basis function.
    (0..n)
        .map(|i| (0..n).map(|r| m[r][n + i]).collect())
        .collect()
}

/// Dense stiffness over interior vertices, element by element.
fn oracle_stiffness(mesh: &SimplicialMesh, d_of: &dyn Fn(&[f64]) -> SmallMat) -> Vec<Vec<f64>> {
    let dim = mesh.dim();
    let n = mesh.num_interior();
    let mut a = vec![vec![0.0; n]; n];
    let rule = high_order_rule(dim);
    for (k, el) in mesh.elements().enumerate() {
        let pts: Vec<&[f64]> = el.iter().map(|&v| mesh.vertex(v)).collect();
        let coef = basis_by_inversion(&pts);
        let vol = mesh.element_volume(k);
        let mut dk = SmallMat::zeros(dim);
        for (lam, w) in &rule {
            let x: Vec<f64> = (0..dim)
                .map(|c| lam.iter().zip(&pts).map(|(l, p)| l * p[c]).sum())
                .collect();
            dk = dk.add(&d_of(&x).scale(*w));
        }
        for (i, &vi) in el.iter().enumerate() {
            let Some(r) = mesh.interior_index(vi) else {
                continue;
            };
            for (j, &vj) in el.iter().enumerate() {
                let Some(c) = mesh.interior_index(vj) else {
                    continue;
                };
                let gi = &coef[i][1..];
                let gj = &coef[j][1..];
                let dg = dk.mul_vec(gj);
                a[r][c] += vol * (0..dim).map(|q| gi[q] * dg[q]).sum::<f64>();
            }
        }
    }
    a
}

type FieldFn = std::sync::Arc<dyn Fn(&[f64]) -> SmallMat + Send + Sync>;

fn varying_field(dim: usize, rng: &mut impl Rng) -> (DiffusionField, FieldFn) {
    let base = random_spd(dim, rng, 10.0);
    let (lo, _) = base.sym_min_max();
    let c: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
    let quadratic = dim < 3;
    let f = std::sync::Arc::new(move |x: &[f64]| {
        // base + s(x)·I with 0 ≤ s ≤ lo·(c0 + c1 + c2)
        let mut s = c[0] * x[0];
        if x.len() > 1 {
            s += c[1] * x[1];
        }
        if quadratic {
            s += c[2] * x[0] * x[0];
        }
        base.add(&SmallMat::scaled_identity(base.dim(), lo * s))
    });
    let g = f.clone();
    let field = DiffusionField::from_fn(dim, move |x| g(x), lo * 0.5, 1e6).unwrap();
    (field, f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn assembly_matches_quadrature_oracle(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let mesh = random_family_mesh(dim, &mut r);
        let (field, f) = varying_field(dim, &mut r);
        let a = assemble_stiffness(&mesh, &field).unwrap().to_dense();
        let o = oracle_stiffness(&mesh, &*f);
        let scale = o.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..o.len() {
            for j in 0..o.len() {
                prop_assert!((a[(i, j)] - o[i][j]).abs() <= 1e-11 * scale,
                    "({i},{j}) {} vs {}", a[(i, j)], o[i][j]);
            }
        }
    }

    #[test]
    fn full_stiffness_annihilates_constants(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let mesh = random_family_mesh(dim, &mut r);
        let field = random_constant_field(dim, &mut r);
        let a = assemble_stiffness_all_vertices(&mesh, &field).unwrap();
        let ones = vec![1.0; a.order()];
        let mut y = vec![0.0; a.order()];
        a.mul_vec(&ones, &mut y);
        let scale = a.max_diagonal();
        prop_assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale));
        prop_assert!(a.is_exactly_symmetric());
    }

    #[test]
    fn mass_trace_matches_patch_volumes(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let mesh = random_family_mesh(dim, &mut r);
        let w: Vec<f64> = (0..mesh.num_elements()).map(|_| 0.1 + 10.0 * r.random::<f64>()).collect();
        let rho = DensityFunction::from_weights(&mesh, &w).unwrap();
        let b = assemble_mass_weighted(&mesh, &rho).unwrap();
        let denom = ((dim + 1) * (dim + 2)) as f64;
        let mut want = 0.0;
        for (k, el) in mesh.elements().enumerate() {
            let interior = el.iter().filter(|&&v| !mesh.is_boundary(v)).count();
            want += interior as f64 * 2.0 * rho.rho_k()[k] * mesh.element_volume(k) / denom;
        }
        let trace: f64 = b.diagonal().iter().sum();
        prop_assert!((trace - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn beta_scaling_laws(seed in any::<u64>(), dim in 1usize..=3, s in 0.01f64..100.0, c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let mesh = random_family_mesh(dim, &mut r);
        let m = random_spd(dim, &mut r, 100.0);
        let field = DiffusionField::constant(m).unwrap();
        let b0 = compute_beta(&mesh, &field, None).unwrap();
        // Stretching the mesh by s scales β by s⁻².
        let big = mesh.map_coords(|x| x.iter_mut().for_each(|v| *v *= s)).unwrap();
        let b1 = compute_beta(&big, &field, None).unwrap();
        // Scaling D leaves β unchanged.
        let scaled = DiffusionField::constant(m.scale(c)).unwrap();
        let b2 = compute_beta(&mesh, &scaled, None).unwrap();
        for k in 0..mesh.num_elements() {
            let want = b0.beta_k[k] / (s * s);
            prop_assert!((b1.beta_k[k] - want).abs() <= 1e-10 * want);
            prop_assert!((b2.beta_k[k] - b0.beta_k[k]).abs() <= 1e-10 * b0.beta_k[k]);
        }
        prop_assert!((b2.gamma_h - b0.gamma_h).abs() <= 1e-10 * b0.gamma_h);
    }

    #[test]
    fn one_dimensional_specializations(seed in any::<u64>(), n in 3usize..120, grading in 0.0f64..4.0) {
        let mut r = rng(seed);
        let mesh = random_graded_1d(&mut r, n, grading);
        let ctx = BoundContext::new(&mesh, &DiffusionField::identity(1), None).unwrap();
        let x: Vec<f64> = (0..=n).map(|i| mesh.vertex(i)[0]).collect();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let dk: Vec<f64> = x.windows(2).map(|w| d_k_unit_interval(w[0], w[1])).collect();
        let patch_max = h.windows(2).map(|w| 1.0 / w[0] + 1.0 / w[1]).fold(0.0, f64::max);
        let sum_dk: f64 = dk.iter().sum();
        let nf = n as f64;

        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        prop_assert!(close(ctx.kappa_a(), sum_dk * patch_max), "{} {}", ctx.kappa_a(), sum_dk * patch_max);
        prop_assert!(close(ctx.kappa_sas(), dk.iter().zip(&h).map(|(d, h)| d / h).sum()));
        prop_assert!(close(ctx.kappa_a_prior(), nf * patch_max));
        prop_assert!(close(ctx.kappa_sas_prior(), h.iter().map(|h| 1.0 / h).sum()));
        prop_assert!(close(ctx.lambda_min_a(), 1.0 / sum_dk));
        prop_assert!(close(ctx.lambda_min_fried(), 1.0 / nf));
        prop_assert!(ctx.lambda_min_a() >= ctx.lambda_min_fried());
    }

    #[test]
    fn d_k_sandwich(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let mesh = random_family_mesh(dim, &mut r);
        for k in 0..mesh.num_elements() {
            let el = mesh.element(k);
            let dv: Vec<f64> = el
                .iter()
                .map(|&v| mesh.distance_to_boundary(mesh.vertex(v)).unwrap())
                .collect();
            let dk = mesh.element_d_k(k).unwrap();
            let lo = dv.iter().copied().fold(0.0, f64::max);
            let hi = dv.iter().copied().fold(f64::INFINITY, f64::min) + mesh.element_diameter(k);
            prop_assert!(lo <= dk && dk <= hi * (1.0 + 1e-14));
            prop_assert!(dk <= mesh.domain_diameter());
        }
    }
}

#[test]
fn dense_and_iterative_agree() {
    let meshes = [
        generate_uniform(1, 1500, &Domain::unit(1)).unwrap(),
        generate_uniform(2, 30, &Domain::unit(2)).unwrap(),
        generate_boundary_layer(2, 30, 60.0).unwrap(),
        generate_boundary_layer(3, 8, 20.0).unwrap(),
    ];
    for mesh in &meshes {
        let a = assemble_stiffness(mesh, &DiffusionField::identity(mesh.dim())).unwrap();
        assert!((500..=2000).contains(&a.order()), "order {}", a.order());
        let d = extreme_eigenvalues_with(&a, 1e-10, Solver::Dense).unwrap();
        let it = extreme_eigenvalues_with(&a, 1e-10, Solver::Iterative).unwrap();
        assert!(it.converged);
        for (x, y) in [(d.lambda_min, it.lambda_min), (d.lambda_max, it.lambda_max)] {
            assert!((x - y).abs() <= 1e-8 * x, "{x} vs {y}");
        }
        assert!(it.residual <= 1e-9, "{}", it.residual);
    }
}
