use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::small::SmallMat;

type Evaluator = Arc<dyn Fn(&[f64]) -> SmallMat + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(SmallMat),
    Function(Evaluator),
}

/// Symmetric positive definite diffusion coefficient `D(x)` with spectral
/// bounds `d_min I ≤ D(x) ≤ d_max I`.
#[derive(Clone)]
pub struct DiffusionField {
    dim: usize,
    kind: Kind,
    d_min: f64,
    d_max: f64,
}

impl fmt::Debug for DiffusionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("DiffusionField");
        s.field("dim", &self.dim);
        match &self.kind {
            Kind::Constant(m) => s.field("constant", &m.row_major()),
            Kind::Function(_) => s.field("constant", &"<function>"),
        };
        s.field("d_min", &self.d_min)
            .field("d_max", &self.d_max)
            .finish()
    }
}

const SYMMETRY_TOL: f64 = 1e-12;
const BOUND_SLACK: f64 = 1e-9;

impl DiffusionField {
    pub fn identity(dim: usize) -> Self {
        DiffusionField {
            dim,
            kind: Kind::Constant(SmallMat::identity(dim)),
            d_min: 1.0,
            d_max: 1.0,
        }
    }

    /// Constant field; `d_min` and `d_max` are the extreme eigenvalues.
    pub fn constant(m: SmallMat) -> Result<Self> {
        check_symmetric(&m)?;
        let (lo, hi) = m.sym_min_max();
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::InvalidDiffusion(format!(
                "is not positive definite (eigenvalues {lo:e} .. {hi:e})"
            )));
        }
        Ok(DiffusionField {
            dim: m.dim(),
            kind: Kind::Constant(m),
            d_min: lo,
            d_max: hi,
        })
    }

    /// Spatially varying field with caller-supplied spectral bounds, which
    /// are checked at every evaluation.
    pub fn from_fn<F>(dim: usize, f: F, d_min: f64, d_max: f64) -> Result<Self>
    where
        F: Fn(&[f64]) -> SmallMat + Send + Sync + 'static,
    {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        if !(d_min > 0.0) || !(d_max >= d_min) || !d_max.is_finite() {
            return Err(Error::InvalidDiffusion(format!(
                "bounds must satisfy 0 < d_min <= d_max, got {d_min} and {d_max}"
            )));
        }
        Ok(DiffusionField {
            dim,
            kind: Kind::Function(Arc::new(f)),
            d_min,
            d_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn constant_value(&self) -> Option<&SmallMat> {
        match &self.kind {
            Kind::Constant(m) => Some(m),
            Kind::Function(_) => None,
        }
    }

    /// `c · D` with bounds scaled accordingly.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidDiffusion(format!(
                "scale {c} must be positive"
            )));
        }
        let kind = match &self.kind {
            Kind::Constant(m) => Kind::Constant(m.scale(c)),
            Kind::Function(f) => {
                let f = f.clone();
                Kind::Function(Arc::new(move |x: &[f64]| f(x).scale(c)))
            }
        };
        Ok(DiffusionField {
            dim: self.dim,
            kind,
            d_min: self.d_min * c,
            d_max: self.d_max * c,
        })
    }

    /// Evaluates `D(x)` and checks symmetry and the spectral bounds.
    pub fn evaluate(&self, x: &[f64]) -> Result<SmallMat> {
        let m = match &self.kind {
            Kind::Constant(m) => return Ok(*m),
            Kind::Function(f) => f(x),
        };
        if m.dim() != self.dim {
            return Err(Error::InvalidDiffusion(format!(
                "evaluator returned a {}x{} matrix, expected {}x{}",
                m.dim(),
                m.dim(),
                self.dim,
                self.dim
            )));
        }
        check_symmetric(&m)?;
        let (lo, hi) = m.sym_min_max();
        if lo < self.d_min * (1.0 - BOUND_SLACK) || hi > self.d_max * (1.0 + BOUND_SLACK) {
            return Err(Error::InvalidDiffusion(format!(
                "at {x:?} has eigenvalues [{lo:e}, {hi:e}] outside [{:e}, {:e}]",
                self.d_min, self.d_max
            )));
        }
        Ok(m)
    }
}

fn check_symmetric(m: &SmallMat) -> Result<()> {
    let scale = m.row_major().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if m.asymmetry() > SYMMETRY_TOL * scale {
        return Err(Error::InvalidDiffusion(format!(
            "is not symmetric: {:?}",
            m.row_major()
        )));
    }
    Ok(())
}

/// Command-line form: `identity` or `const:a11,a12,…` (row-major).
#[derive(Clone, Debug, PartialEq)]
pub enum DiffusionSpec {
    Identity,
    Constant(Vec<f64>),
}

impl FromStr for DiffusionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(DiffusionSpec::Identity);
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let vals = rest
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad diffusion entry `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(DiffusionSpec::Constant(vals));
        }
        Err(Error::InvalidParameter(format!(
            "diffusion must be `identity` or `const:a11,a12,...`, got `{s}`"
        )))
    }
}

impl DiffusionSpec {
    pub fn build(&self, dim: usize) -> Result<DiffusionField> {
        match self {
            DiffusionSpec::Identity => Ok(DiffusionField::identity(dim)),
            DiffusionSpec::Constant(v) => {
                let m = if v.len() == 1 && dim > 1 {
                    SmallMat::scaled_identity(dim, v[0])
                } else {
                    SmallMat::from_row_major(v).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "{} diffusion entries do not form a square matrix",
                            v.len()
                        ))
                    })?
                };
                if m.dim() != dim {
                    return Err(Error::Mismatch(format!(
                        "diffusion matrix is {}x{}, mesh dim is {dim}",
                        m.dim(),
                        m.dim()
                    )));
                }
                DiffusionField::constant(m)
            }
        }
    }
}

/// Barycentric quadrature points, exact for quadratic integrands.
fn quadrature(dim: usize) -> Vec<[f64; 4]> {
    match dim {
        1 => {
            let a = 0.5 * (1.0 + 1.0 / 3f64.sqrt());
            vec![[a, 1.0 - a, 0.0, 0.0], [1.0 - a, a, 0.0, 0.0]]
        }
        2 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            vec![[a, b, b, 0.0], [b, a, b, 0.0], [b, b, a, 0.0]]
        }
        _ => {
            let a = 0.585_410_196_624_968_5;
            let b = 0.138_196_601_125_010_5;
            vec![[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]]
        }
    }
}

/// `D_K`, the average of `D` over element `k`, by an order-2 rule (exact
/// for constant and affine `D`).
pub fn average_diffusion(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    k: usize,
) -> Result<SmallMat> {
    let dim = mesh.dim();
    if field.dim != dim {
        return Err(Error::Mismatch(format!(
            "diffusion field dim {} vs mesh dim {dim}",
            field.dim
        )));
    }
    if k >= mesh.num_elements() {
        return Err(Error::ElementId(k));
    }
    let avg = match &field.kind {
        Kind::Constant(m) => *m,
        Kind::Function(_) => {
            let el = mesh.element(k);
            let pts = quadrature(dim);
            let mut sum = SmallMat::zeros(dim);
            for bary in &pts {
                let mut x = [0.0; 3];
                for (a, &v) in el.iter().enumerate() {
                    for (xi, c) in x.iter_mut().zip(mesh.vertex(v)) {
                        *xi += bary[a] * c;
                    }
                }
                sum = sum.add(&field.evaluate(&x[..dim])?);
            }
            sum.scale(1.0 / pts.len() as f64).symmetrized()
        }
    };
    let (lo, _) = avg.sym_min_max();
    if !(lo > 0.0) {
        return Err(Error::InvalidDiffusion(format!(
            "average over element {k} is not positive definite"
        )));
    }
    Ok(avg)
}

/// `D_K` for every element, in element order.
pub fn element_averages(mesh: &SimplicialMesh, field: &DiffusionField) -> Result<Vec<SmallMat>> {
    (0..mesh.num_elements())
        .map(|k| average_diffusion(mesh, field, k))
        .collect()
}
