use std::path::Path;
use std::process::{Command, Output};

use fecond::assembly::SparseSymmetric;
use fecond::spectra::{extreme_eigenvalues_with, Solver};

fn fecond(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fecond"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn fecond")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn analyze_uniform_1d() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(&["analyze", "--n", "4", "--csv", "r.csv"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    // (1 - cos(3π/4)) / (1 - cos(π/4)) = 3 + 2√2
    assert!((field(&out, "kappa(A)") - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-10);

    let (h, rows) = csv_rows(&std::fs::read_to_string(dir.path().join("r.csv")).unwrap());
    let r = &rows[0];
    let lmax = r[column(&h, "lambda_max_A")];
    assert!(r[column(&h, "max_diag_A")] <= lmax);
    assert!(lmax <= r[column(&h, "lambda_max_A_upper")]);
}

#[test]
fn sandwich_on_graded_2d_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(
        &[
            "analyze",
            "--family",
            "boundary_layer_2d",
            "--n-core",
            "6",
            "--aspect",
            "40",
            "--csv",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv_rows(&std::fs::read_to_string(dir.path().join("r.csv")).unwrap());
    let r = &rows[0];
    let lmax = r[column(&h, "lambda_max_A")];
    assert!(r[column(&h, "max_diag_A")] <= lmax && lmax <= r[column(&h, "lambda_max_A_upper")]);
    let s = r[column(&h, "lambda_max_SAS")];
    assert!((1.0..=3.0 + 1e-12).contains(&s));
}

#[test]
fn matrix_out_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(
        &[
            "analyze",
            "--family",
            "chebyshev",
            "--n",
            "40",
            "--matrix-out",
            "a.mtx",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let a = SparseSymmetric::read_matrix_market(&dir.path().join("a.mtx")).unwrap();
    let r = extreme_eigenvalues_with(&a, 1e-10, Solver::Dense).unwrap();
    let rel = (r.kappa - field(&stdout(&o), "kappa(A)")).abs() / r.kappa;
    assert!(rel < 1e-12, "{rel}");
}

#[test]
fn generate_chebyshev_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(
        &[
            "generate",
            "--family",
            "chebyshev",
            "--n",
            "64",
            "-o",
            "mesh.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "N "), 64.0);
    let m = fecond::mesh::import_mesh(
        &dir.path().join("mesh.json"),
        fecond::mesh::MeshFormat::NativeJson,
    )
    .unwrap();
    assert_eq!(m.num_elements(), 64);

    let o = fecond(&["analyze", "--mesh", "mesh.json"], dir.path());
    assert!(o.status.success());
}

#[test]
fn generate_triangle_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(
        &[
            "generate", "--dim", "2", "--n", "3", "--format", "triangle", "-o", "sq",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let o = fecond(&["generate", "--mesh", "sq.node"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "N "), 18.0);
}

#[test]
fn boundary_layer_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(
        &[
            "generate",
            "--family",
            "boundary_layer_2d",
            "--n-core",
            "20",
            "--aspect",
            "125",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let a = field(&stdout(&o), "max_aspect");
    assert!((125.0..=250.0).contains(&a), "{a}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &[
            "generate",
            "--family",
            "boundary_layer_2d",
            "--aspect",
            "0.5",
        ],
        &["generate", "--family", "nope"],
        &["sweep", "--family", "chebyshev", "--values", "16,8"],
        &[
            "sweep",
            "--family",
            "chebyshev",
            "--variable",
            "aspect",
            "--values",
            "2,4",
        ],
        &[
            "analyze",
            "--diffusion",
            "const:1,2,2,1",
            "--dim",
            "2",
            "--n",
            "3",
        ],
        &[
            "analyze",
            "--family",
            "boundary_layer_3d",
            "--n-core",
            "3",
            "--p",
            "3.5",
        ],
        &["analyze", "--tol", "0.5"],
        &["calibrate", "--family", "chebyshev"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = fecond(args, dir.path());
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = fecond(&["analyze", "--mesh", "absent.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic_and_writes_plots() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--family",
        "power2",
        "--values",
        "8,10,12,14",
        "--plot-dir",
        "plots",
        "--gnuplot",
    ];
    let a = fecond(&args, dir.path());
    let b = fecond(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let (h, rows) = csv_rows(&stdout(&a));
    assert_eq!(h[0], "parameter");
    assert_eq!(rows.len(), 4);
    let k = column(&h, "kappa_A");
    for w in rows.windows(2) {
        let r = w[1][k] / w[0][k];
        assert!((3.0..=5.0).contains(&r), "{r}");
    }
    let plots = dir.path().join("plots");
    for f in [
        "exact.kappa.A.dat",
        "exact.kappa.SAS.dat",
        "slopes.csv",
        "plot.gp",
    ] {
        assert!(plots.join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_records_failed_instances() {
    let dir = tempfile::tempdir().unwrap();
    // power2 with N = 2000 underflows the smallest element.
    let o = fecond(
        &["sweep", "--family", "power2", "--values", "8,2000"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows[0][1].is_finite());
    assert!(rows[1][1].is_nan());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    let o = fecond(
        &["sweep", "--family", "power2", "--values", "2000,3000"],
        dir.path(),
    );
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn calibration_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["c1.json", "c2.json"] {
        let o = fecond(
            &[
                "calibrate",
                "--dim",
                "1",
                "--values",
                "8,16,32,64",
                "-o",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let c1 = std::fs::read(dir.path().join("c1.json")).unwrap();
    assert_eq!(c1, std::fs::read(dir.path().join("c2.json")).unwrap());

    let cal = fecond::bounds::Calibration::load(&dir.path().join("c1.json")).unwrap();
    let consts = cal.for_dim(1).unwrap();
    assert!(consts.values().all(|&c| c > 0.0));

    let o = fecond(
        &[
            "sweep",
            "--values",
            "8,16,32,64",
            "--calibration",
            "c1.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let (h, rows) = csv_rows(&stdout(&o));
    let pairs = [
        ("cal:new.lambda_min.A", "lambda_min_A", true),
        ("cal:new.lambda_min.SAS", "lambda_min_SAS", true),
        ("cal:fried.lambda_min", "lambda_min_A", true),
        ("cal:new.kappa.A", "kappa_A", false),
        ("cal:new.kappa.SAS", "kappa_SAS", false),
    ];
    for r in &rows {
        for (b, e, lower) in pairs {
            let (b, e) = (r[column(&h, b)], r[column(&h, e)]);
            let ok = if lower {
                b <= e * (1.0 + 1e-12)
            } else {
                b >= e * (1.0 - 1e-12)
            };
            assert!(ok, "{b} vs {e}");
        }
    }
}
