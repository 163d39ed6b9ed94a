//! Mesh families, parameter sweeps, log-log slope fits and plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::DiffusionField;
use crate::bounds::{
    analyze_with, calibrate, fmt_num, BoundId, BoundReport, Calibration, CalibrationSample,
};
use crate::error::{Error, Result};
use crate::mesh::{
    generate_boundary_layer, generate_chebyshev_1d, generate_power2_1d, generate_uniform,
    import_mesh, Domain, MeshFormat, SimplicialMesh,
};
use crate::spectra::Solver;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    Uniform,
    Chebyshev,
    Power2,
    BoundaryLayer2d,
    BoundaryLayer3d,
    Imported,
}

impl FromStr for MeshFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => MeshFamily::Uniform,
            "chebyshev" => MeshFamily::Chebyshev,
            "power2" => MeshFamily::Power2,
            "boundary_layer_2d" => MeshFamily::BoundaryLayer2d,
            "boundary_layer_3d" => MeshFamily::BoundaryLayer3d,
            "imported" => MeshFamily::Imported,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown mesh family `{s}`"
                )))
            }
        })
    }
}

impl MeshFamily {
    pub fn is_boundary_layer(&self) -> bool {
        matches!(
            self,
            MeshFamily::BoundaryLayer2d | MeshFamily::BoundaryLayer3d
        )
    }
}

/// Parameters of one mesh of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub family: MeshFamily,
    /// Spatial dimension of the uniform family.
    pub dim: usize,
    /// Elements (1D families) or cells per axis (uniform family).
    pub n: usize,
    /// Core grid lines per axis (boundary-layer families).
    pub n_core: usize,
    pub aspect: f64,
    pub path: Option<PathBuf>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            family: MeshFamily::Uniform,
            dim: 1,
            n: 8,
            n_core: 20,
            aspect: 25.0,
            path: None,
        }
    }
}

impl MeshSpec {
    pub fn build(&self) -> Result<SimplicialMesh> {
        match self.family {
            MeshFamily::Uniform => generate_uniform(self.dim, self.n, &Domain::unit(self.dim)),
            MeshFamily::Chebyshev => generate_chebyshev_1d(self.n),
            MeshFamily::Power2 => generate_power2_1d(self.n),
            MeshFamily::BoundaryLayer2d => generate_boundary_layer(2, self.n_core, self.aspect),
            MeshFamily::BoundaryLayer3d => generate_boundary_layer(3, self.n_core, self.aspect),
            MeshFamily::Imported => {
                let path = self.path.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("the imported family needs a mesh path".into())
                })?;
                import_mesh(path, MeshFormat::from_path(path))
            }
        }
    }

    pub fn spatial_dim(&self) -> usize {
        match self.family {
            MeshFamily::Uniform => self.dim,
            MeshFamily::Chebyshev | MeshFamily::Power2 => 1,
            MeshFamily::BoundaryLayer2d => 2,
            MeshFamily::BoundaryLayer3d => 3,
            MeshFamily::Imported => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    N,
    Aspect,
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "N" => Ok(SweepVariable::N),
            "aspect" => Ok(SweepVariable::Aspect),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep variable `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Base parameters; the swept one is overwritten per instance.
    pub mesh: MeshSpec,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub p: Option<f64>,
    pub tol: f64,
    /// Recorded with the output; every step of a sweep is deterministic.
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep values are empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sweep values must be strictly increasing".into(),
            ));
        }
        match self.variable {
            SweepVariable::Aspect if !self.mesh.family.is_boundary_layer() => Err(
                Error::InvalidParameter("aspect sweeps need a boundary_layer family".into()),
            ),
            SweepVariable::N if self.mesh.family == MeshFamily::Imported => Err(
                Error::InvalidParameter("the imported family cannot be swept".into()),
            ),
            SweepVariable::N
                if self
                    .values
                    .iter()
                    .any(|v| v.fract() != 0.0 || *v < 1.0 || *v > 1e9) =>
            {
                Err(Error::InvalidParameter(
                    "n values must be positive integers".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Mesh parameters of instance `i`.
    pub fn instance(&self, i: usize) -> MeshSpec {
        let mut m = self.mesh.clone();
        let v = self.values[i];
        match self.variable {
            SweepVariable::Aspect => m.aspect = v,
            SweepVariable::N if m.family.is_boundary_layer() => m.n_core = v as usize,
            SweepVariable::N => m.n = v as usize,
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub parameter: f64,
    pub report: std::result::Result<BoundReport, String>,
}

impl SweepRow {
    /// Abscissa of plots: the element count for `n` sweeps, the parameter
    /// otherwise.
    pub fn x(&self, variable: SweepVariable) -> f64 {
        match (variable, &self.report) {
            (SweepVariable::N, Ok(r)) => r.num_elements as f64,
            (SweepVariable::N, Err(_)) => f64::NAN,
            (SweepVariable::Aspect, _) => self.parameter,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

/// A named `(x, y)` series.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn slope(&self) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self.points.iter().copied().unzip();
        fit_slope(&x, &y)
    }
}

/// Least-squares slope of `ln y` against `ln x` over the upper half of the
/// points (at least two). Non-positive or non-finite points are skipped.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let start = (pts.len() / 2).min(pts.len() - 2);
    let tail = &pts[start..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_sweep(
    spec: &SweepSpec,
    field: &DiffusionField,
    calibration: Option<&Calibration>,
) -> Result<SweepResult> {
    run_sweep_with(spec, field, calibration, Solver::Auto)
}

pub fn run_sweep_with(
    spec: &SweepSpec,
    field: &DiffusionField,
    calibration: Option<&Calibration>,
    solver: Solver,
) -> Result<SweepResult> {
    spec.validate()?;
    let rows: Vec<SweepRow> = (0..spec.values.len())
        .into_par_iter()
        .map(|i| {
            let report = spec
                .instance(i)
                .build()
                .and_then(|m| analyze_with(&m, field, spec.p, spec.tol, calibration, solver))
                .map_err(|e| e.to_string());
            SweepRow {
                parameter: spec.values[i],
                report,
            }
        })
        .collect();
    if rows.iter().all(|r| r.report.is_err()) {
        let msg = rows
            .iter()
            .filter_map(|r| r.report.as_ref().err())
            .next()
            .cloned()
            .unwrap_or_default();
        return Err(Error::Numerical(format!(
            "every sweep instance failed: {msg}"
        )));
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = (f64, &str)> {
        self.rows
            .iter()
            .filter_map(|r| r.report.as_ref().err().map(|e| (r.parameter, e.as_str())))
    }

    pub fn reports(&self) -> impl Iterator<Item = &BoundReport> {
        self.rows.iter().filter_map(|r| r.report.as_ref().ok())
    }

    fn curve(&self, name: String, f: impl Fn(&BoundReport) -> Option<f64>) -> Curve {
        let points = self
            .rows
            .iter()
            .filter_map(|r| {
                let rep = r.report.as_ref().ok()?;
                Some((r.x(self.spec.variable), f(rep)?))
            })
            .collect();
        Curve { name, points }
    }

    /// Exact condition numbers, then every raw and calibrated bound present.
    pub fn curves(&self) -> Vec<Curve> {
        let mut out = vec![
            self.curve("exact.kappa.A".into(), |r| Some(r.exact.a.kappa)),
            self.curve("exact.kappa.SAS".into(), |r| Some(r.exact.sas.kappa)),
            self.curve("exact.lambda_min.A".into(), |r| Some(r.exact.a.lambda_min)),
            self.curve("exact.lambda_min.SAS".into(), |r| {
                Some(r.exact.sas.lambda_min)
            }),
        ];
        for id in BoundId::ALL {
            let raw = self.curve(format!("{id}.raw"), |r| r.raw.get(id));
            if !raw.points.is_empty() {
                out.push(raw);
            }
            let cal = self.curve(format!("{id}.cal"), |r| {
                r.calibrated.as_ref().and_then(|c| c.get(id))
            });
            if !cal.points.is_empty() {
                out.push(cal);
            }
        }
        out
    }

    pub fn curve_named(&self, name: &str) -> Option<Curve> {
        self.curves().into_iter().find(|c| c.name == name)
    }

    pub fn slopes(&self) -> Vec<(String, Option<f64>)> {
        self.curves()
            .into_iter()
            .map(|c| {
                let s = c.slope();
                (c.name, s)
            })
            .collect()
    }

    /// One row per sweep value: the parameter, then the columns of
    /// [`BoundReport::csv_header`]. Failed instances are rows of NaN.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("parameter,");
        s.push_str(&BoundReport::csv_header().join(","));
        s.push('\n');
        for r in &self.rows {
            let vals = match &r.report {
                Ok(rep) => rep.csv_values(),
                Err(_) => vec![f64::NAN; BoundReport::csv_width()],
            };
            s.push_str(&fmt_num(r.parameter));
            for v in vals {
                s.push(',');
                s.push_str(&fmt_num(v));
            }
            s.push('\n');
        }
        s
    }

    pub fn slopes_csv(&self) -> String {
        let mut s = String::from("curve,slope\n");
        for (name, slope) in self.slopes() {
            let _ = writeln!(s, "{name},{}", fmt_num(slope.unwrap_or(f64::NAN)));
        }
        s
    }

    /// Writes `<curve>.dat` per curve, `slopes.csv`, and optionally
    /// `plot.gp`. Returns the files written.
    pub fn write_plot_dir(&self, dir: &Path, gnuplot: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let xlabel = match self.spec.variable {
            SweepVariable::N => "N",
            SweepVariable::Aspect => "aspect",
        };
        let mut written = Vec::new();
        let curves = self.curves();
        for c in &curves {
            let mut s = format!("# {xlabel} {}\n", c.name);
            for (x, y) in &c.points {
                let _ = writeln!(s, "{} {}", fmt_num(*x), fmt_num(*y));
            }
            let path = dir.join(format!("{}.dat", c.name));
            fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        let path = dir.join("slopes.csv");
        fs::write(&path, self.slopes_csv()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        if gnuplot {
            let mut s = format!(
                "set logscale xy\nset xlabel \"{xlabel}\"\nset key left top\nset terminal pngcairo size 900,650\nset output \"sweep.png\"\nplot \\\n"
            );
            let lines: Vec<String> = curves
                .iter()
                .filter(|c| c.name.contains("kappa"))
                .map(|c| {
                    format!(
                        "  \"{0}.dat\" using 1:2 with linespoints title \"{0}\"",
                        c.name
                    )
                })
                .collect();
            s.push_str(&lines.join(", \\\n"));
            s.push('\n');
            let path = dir.join("plot.gp");
            fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Calibrates every bound on the uniform meshes of `dim` with the given
/// cells per axis.
pub fn calibrate_uniform(
    dim: usize,
    ns: &[usize],
    field: &DiffusionField,
    p: Option<f64>,
    tol: f64,
) -> Result<Calibration> {
    let series = ns
        .par_iter()
        .map(|&n| {
            let m = generate_uniform(dim, n, &Domain::unit(dim))?;
            CalibrationSample::compute(&m, field, p, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    calibrate(&series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..=8).map(|i| (1 << i) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v * v).collect();
        assert!((fit_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
        // the lower half is ignored
        let mut y2 = y.clone();
        y2[0] = 1e9;
        assert!((fit_slope(&x, &y2).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(fit_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec {
            mesh: MeshSpec {
                family: MeshFamily::Chebyshev,
                ..MeshSpec::default()
            },
            variable: SweepVariable::N,
            values: vec![8.0, 16.0],
            p: None,
            tol: 1e-8,
            seed: 0,
        };
        assert!(s.validate().is_ok());
        s.values = vec![16.0, 8.0];
        assert!(s.validate().is_err());
        s.values = vec![8.0, 16.5];
        assert!(s.validate().is_err());
        s.values = vec![5.0, 25.0];
        s.variable = SweepVariable::Aspect;
        assert!(s.validate().is_err());
        s.mesh.family = MeshFamily::BoundaryLayer2d;
        assert!(s.validate().is_ok());
        assert_eq!(s.instance(1).aspect, 25.0);
    }

    #[test]
    fn small_sweep_outputs() {
        let spec = SweepSpec {
            mesh: MeshSpec {
                family: MeshFamily::Power2,
                ..MeshSpec::default()
            },
            variable: SweepVariable::N,
            values: vec![4.0, 5.0, 6.0],
            p: None,
            tol: 1e-8,
            seed: 0,
        };
        let r = run_sweep(&spec, &DiffusionField::identity(1), None).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("parameter,N,N_vi,kappa_A"));
        let width = csv.lines().next().unwrap().split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == width));
        assert_eq!(
            csv,
            run_sweep(&spec, &DiffusionField::identity(1), None)
                .unwrap()
                .to_csv()
        );
        let dir = tempfile::tempdir().unwrap();
        let files = r.write_plot_dir(dir.path(), true).unwrap();
        assert!(files.iter().any(|f| f.ends_with("exact.kappa.A.dat")));
        assert!(files.iter().any(|f| f.ends_with("plot.gp")));
    }
}
