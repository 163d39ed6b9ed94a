#![allow(dead_code)]

use fecond::assembly::DiffusionField;
use fecond::mesh::{
    generate_boundary_layer, generate_chebyshev_1d, generate_power2_1d, generate_uniform, Domain,
    SimplicialMesh,
};
use fecond::SmallMat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Moves every interior vertex by up to `frac` times its shortest incident
/// edge, in a random direction.
pub fn perturb(mesh: &SimplicialMesh, rng: &mut impl Rng, frac: f64) -> SimplicialMesh {
    let d = mesh.dim();
    let mut shortest = vec![f64::INFINITY; mesh.num_vertices()];
    for el in mesh.elements() {
        for (i, &a) in el.iter().enumerate() {
            for &b in &el[i + 1..] {
                let l = dist(mesh.vertex(a), mesh.vertex(b));
                shortest[a] = shortest[a].min(l);
                shortest[b] = shortest[b].min(l);
            }
        }
    }
    let mut coords = mesh.coords().to_vec();
    for v in 0..mesh.num_vertices() {
        if mesh.is_boundary(v) {
            continue;
        }
        let r = frac * shortest[v] * rng.random::<f64>();
        let dir: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        for a in 0..d {
            coords[v * d + a] += r * dir[a] / n;
        }
    }
    let m =
        SimplicialMesh::new(d, coords, mesh.connectivity().to_vec()).expect("valid perturbation");
    let total: f64 = (0..m.num_elements()).map(|k| m.element_volume(k)).sum();
    assert!(
        (total - mesh.domain_volume()).abs() < 1e-9,
        "perturbation folded the mesh"
    );
    m
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Unit interval with `n` random element widths spanning up to `grading`
/// orders of magnitude.
pub fn random_graded_1d(rng: &mut impl Rng, n: usize, grading: f64) -> SimplicialMesh {
    let w: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(grading * rng.random::<f64>()))
        .collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0];
    let mut acc = 0.0;
    for wi in &w[..n - 1] {
        acc += wi / total;
        x.push(acc);
    }
    x.push(1.0);
    let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
    SimplicialMesh::new(1, x, cells).unwrap()
}

/// Random rotation times a diagonal with entries in `[s, cond·s]`.
pub fn random_spd(dim: usize, rng: &mut impl Rng, cond: f64) -> SmallMat {
    let s = 10f64.powf(rng.random::<f64>() * 2.0 - 1.0);
    let mut ev: Vec<f64> = (0..dim)
        .map(|_| s * cond.powf(rng.random::<f64>()))
        .collect();
    ev[0] = s;
    let q = random_rotation(dim, rng);
    let mut m = SmallMat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v: f64 = (0..dim).map(|k| q[i][k] * ev[k] * q[j][k]).sum();
            m.set(i, j, v);
        }
    }
    m.symmetrized()
}

fn random_rotation(dim: usize, rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let mut q = [[0.0; 3]; 3];
    match dim {
        1 => q[0][0] = 1.0,
        2 => {
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            q[0] = [t.cos(), -t.sin(), 0.0];
            q[1] = [t.sin(), t.cos(), 0.0];
        }
        _ => {
            // Rodrigues: rotation by angle t about the unit axis u.
            let u = loop {
                let v: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.1 && n <= 1.0 {
                    break [v[0] / n, v[1] / n, v[2] / n];
                }
            };
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            let (c, s) = (t.cos(), t.sin());
            let k = [[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]];
            for i in 0..3 {
                for j in 0..3 {
                    let kk: f64 = (0..3).map(|l| k[i][l] * k[l][j]).sum();
                    q[i][j] = f64::from(u8::from(i == j)) + s * k[i][j] + (1.0 - c) * kk;
                }
            }
        }
    }
    q
}

/// A mesh from one of the generated families, chosen at random, with
/// interior vertices perturbed half of the time.
pub fn random_family_mesh(dim: usize, rng: &mut impl Rng) -> SimplicialMesh {
    let base = match (dim, rng.random_range(0..3)) {
        (1, 0) => generate_uniform(1, rng.random_range(2..60), &Domain::unit(1)),
        (1, 1) => generate_chebyshev_1d(rng.random_range(3..60)),
        (1, _) => generate_power2_1d(rng.random_range(3..20)),
        (2, 0) => generate_uniform(2, rng.random_range(2..12), &Domain::unit(2)),
        (2, _) => generate_boundary_layer(
            2,
            rng.random_range(3..10),
            1.0 + 200.0 * rng.random::<f64>(),
        ),
        (_, 0) => generate_uniform(3, rng.random_range(2..5), &Domain::unit(3)),
        _ => generate_boundary_layer(3, rng.random_range(3..5), 1.0 + 50.0 * rng.random::<f64>()),
    }
    .unwrap();
    if rng.random_bool(0.5) {
        perturb(&base, rng, 0.1)
    } else {
        base
    }
}

pub fn random_constant_field(dim: usize, rng: &mut impl Rng) -> DiffusionField {
    DiffusionField::constant(random_spd(dim, rng, 100.0)).unwrap()
}

/// Exact `max_{x∈[a,b]} min(x, 1 - x)`.
pub fn d_k_unit_interval(a: f64, b: f64) -> f64 {
    if a <= 0.5 && b >= 0.5 {
        0.5
    } else {
        a.min(1.0 - a).max(b.min(1.0 - b))
    }
}
