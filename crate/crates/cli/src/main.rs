//! `fecond`: mesh generation, condition-number analysis, parameter sweeps
//! and bound calibration from the command line.
//!
//! Exit codes: 0 success, 1 I/O or file format error, 2 usage error,
//! 3 numerical failure (including an eigensolver that did not converge).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fecond::assembly::{assemble_stiffness, DiffusionField, DiffusionSpec};
use fecond::bounds::{analyze_with, Calibration, CALIBRATION_VERSION};
use fecond::experiment::{
    calibrate_uniform, run_sweep_with, MeshFamily, MeshSpec, SweepSpec, SweepVariable,
};
use fecond::mesh::{
    compute_metrics, export_native_json, export_triangle, import_mesh, MeshFormat, SimplicialMesh,
};
use fecond::spectra::{Solver, DEFAULT_TOL};
use fecond::Error;

#[derive(Parser)]
#[command(
    name = "fecond",
    version,
    about = "Condition numbers of linear finite element stiffness matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and print its metric summary.
    Generate(GenerateArgs),
    /// Exact extreme eigenvalues and every bound for one mesh.
    Analyze(AnalyzeArgs),
    /// Run a mesh family over a range of N or aspect ratios.
    Sweep(SweepArgs),
    /// Fit bound constants on uniform meshes.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// uniform | chebyshev | power2 | boundary_layer_2d | boundary_layer_3d | imported
    #[arg(long, default_value = "uniform")]
    family: MeshFamily,
    /// Spatial dimension of the uniform family.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Elements (chebyshev, power2) or cells per axis (uniform).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Core grid lines per axis of the boundary-layer families.
    #[arg(long, default_value_t = 20)]
    n_core: usize,
    /// Core spacing over boundary-layer thickness.
    #[arg(long, default_value_t = 25.0)]
    aspect: f64,
    /// Mesh file to read; implies `--family imported`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Format of `--mesh`: native_json | triangle. Guessed from the extension by default.
    #[arg(long)]
    mesh_format: Option<MeshFormat>,
}

impl MeshArgs {
    fn spec(&self) -> MeshSpec {
        MeshSpec {
            family: if self.mesh.is_some() {
                MeshFamily::Imported
            } else {
                self.family.clone()
            },
            dim: self.dim,
            n: self.n,
            n_core: self.n_core,
            aspect: self.aspect,
            path: self.mesh.clone(),
        }
    }

    fn build(&self) -> fecond::Result<SimplicialMesh> {
        match (&self.mesh, self.mesh_format) {
            (Some(path), Some(fmt)) => import_mesh(path, fmt),
            _ => self.spec().build(),
        }
    }
}

#[derive(Args, Clone)]
struct NumericArgs {
    /// `identity` or `const:a11,a12,...` (row-major; a single value scales the identity).
    #[arg(long, default_value = "identity")]
    diffusion: DiffusionSpec,
    /// Exponent of the three-dimensional bounds, in (1, 3).
    #[arg(long)]
    p: Option<f64>,
    /// Relative eigensolver tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Dense,
    Iterative,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Auto => Solver::Auto,
            SolverArg::Dense => Solver::Dense,
            SolverArg::Iterative => Solver::Iterative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    NativeJson,
    Triangle,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Output file (`.json`, or the `.node` / `.ele` stem for triangle).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::NativeJson)]
    format: OutFormat,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    #[command(flatten)]
    num: NumericArgs,
    /// Calibration file from `fecond calibrate`.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Write a one-row CSV table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the stiffness matrix in MatrixMarket format.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    #[command(flatten)]
    num: NumericArgs,
    /// n | aspect
    #[arg(long, default_value = "n")]
    variable: SweepVariable,
    /// Strictly increasing, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for per-curve `.dat` files and fitted slopes.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Also write a gnuplot script into the plot directory.
    #[arg(long)]
    gnuplot: bool,
    /// Recorded in the spec; all computations are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Only `uniform` is accepted.
    #[arg(long, default_value = "uniform")]
    family: MeshFamily,
    /// Dimensions to calibrate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    dim: Vec<usize>,
    /// Cells per axis; defaults depend on the dimension.
    #[arg(long, value_delimiter = ',')]
    values: Vec<usize>,
    #[command(flatten)]
    num: NumericArgs,
    #[arg(short, long, default_value = "calibration.json")]
    output: PathBuf,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(Error::Io { .. } | Error::Parse { .. } | Error::Json(_)) => 1,
            Some(Error::NotPositiveDefinite { .. } | Error::Numerical(_)) => 3,
            Some(_) => 2,
            None => 1,
        };
        Failure { code, err }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        err: anyhow::anyhow!(msg.into()),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Calibrate(a) => calibrate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_calibration(path: Option<&Path>) -> Result<Option<Calibration>, Failure> {
    path.map(Calibration::load)
        .transpose()
        .map_err(Failure::from)
}

fn diffusion(num: &NumericArgs, dim: usize) -> Result<DiffusionField, Failure> {
    Ok(num.diffusion.build(dim)?)
}

fn generate(a: GenerateArgs) -> CmdResult {
    let mesh = a.mesh.build()?;
    let (m, _) = compute_metrics(&mesh, None)?;
    println!("N          {}", m.num_elements);
    println!("N_vi       {}", m.num_interior);
    println!("|K_min|    {:.16e}", m.k_min_volume);
    println!("max_aspect {:.16e}", m.max_aspect_ratio);
    if let Some(out) = a.output {
        match a.format {
            OutFormat::NativeJson => export_native_json(&mesh, &out)?,
            OutFormat::Triangle => {
                let (node, ele) = export_triangle(&mesh, &out)?;
                eprintln!("wrote {} and {}", node.display(), ele.display());
            }
        }
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let mesh = a.mesh.build()?;
    let field = diffusion(&a.num, mesh.dim())?;
    let cal = load_calibration(a.calibration.as_deref())?;
    if let Some(path) = &a.matrix_out {
        assemble_stiffness(&mesh, &field)?.write_matrix_market(path)?;
    }
    let report = analyze_with(
        &mesh,
        &field,
        a.num.p,
        a.num.tol,
        cal.as_ref(),
        a.num.solver.into(),
    )?;
    print!("{}", report.table());
    if let Some(path) = &a.csv {
        let header = fecond::bounds::BoundReport::csv_header().join(",");
        let row: Vec<String> = report
            .csv_values()
            .into_iter()
            .map(fecond::bounds::fmt_num)
            .collect();
        write_file(path, &format!("{header}\n{}\n", row.join(",")))?;
    }
    if let Some(path) = &a.json {
        write_file(path, &report.to_json()?)?;
    }
    if !report.exact.converged() {
        return Err(Failure {
            code: 3,
            err: anyhow::anyhow!("eigensolver did not converge; the report above is partial"),
        });
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> CmdResult {
    let spec = SweepSpec {
        mesh: a.mesh.spec(),
        variable: a.variable,
        values: a.values.clone(),
        p: a.num.p,
        tol: a.num.tol,
        seed: a.seed,
    };
    spec.validate()?;
    let dim = match spec.mesh.spatial_dim() {
        0 => bail_usage("the imported family cannot be swept")?,
        d => d,
    };
    let field = diffusion(&a.num, dim)?;
    let cal = load_calibration(a.calibration.as_deref())?;
    let result = run_sweep_with(&spec, &field, cal.as_ref(), a.num.solver.into())?;
    for (x, msg) in result.failures() {
        eprintln!("warning: instance {x} failed: {msg}");
    }
    let csv = result.to_csv();
    match &a.csv {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(dir) = &a.plot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        result.write_plot_dir(dir, a.gnuplot)?;
    }
    for (name, slope) in result.slopes() {
        match slope {
            Some(s) => eprintln!("slope {name:<28} {s:.4}"),
            None => eprintln!("slope {name:<28} -"),
        }
    }
    Ok(())
}

fn bail_usage<T>(msg: &str) -> Result<T, Failure> {
    Err(usage(msg))
}

fn default_sizes(dim: usize) -> Vec<usize> {
    match dim {
        1 => vec![8, 16, 32, 64],
        2 => vec![4, 8, 16, 32],
        _ => vec![3, 4, 6, 8],
    }
}

fn calibrate(a: CalibrateArgs) -> CmdResult {
    if a.family != MeshFamily::Uniform {
        return Err(usage("calibration is defined on the uniform family only"));
    }
    let mut cal = Calibration {
        version: CALIBRATION_VERSION,
        constants: Default::default(),
    };
    for &dim in &a.dim {
        if !(1..=3).contains(&dim) {
            return Err(usage(format!("unsupported dimension {dim}")));
        }
        let sizes = if a.values.is_empty() {
            default_sizes(dim)
        } else {
            a.values.clone()
        };
        let field = diffusion(&a.num, dim)?;
        let c = calibrate_uniform(dim, &sizes, &field, a.num.p, a.num.tol)?;
        for (id, k) in c.for_dim(dim).into_iter().flatten() {
            eprintln!("d={dim} {:<24} {k:.6e}", id.as_str());
        }
        cal.merge(c);
    }
    cal.save(&a.output)?;
    Ok(())
}
