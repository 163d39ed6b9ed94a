use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::formulas::BoundContext;
use super::report::{BoundId, BoundValues};
use crate::assembly::{assemble_stiffness, DiffusionField};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::spectra::{condition_report_for, ConditionReport, Solver};

pub const CALIBRATION_VERSION: u32 = 1;

/// Generic constants per dimension and bound id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    /// Keyed by dimension as a string (`"1"`, `"2"`, `"3"`).
    pub constants: BTreeMap<String, BTreeMap<BoundId, f64>>,
}

/// One member of a calibration family.
#[derive(Clone, Debug)]
pub struct CalibrationSample {
    pub dim: usize,
    pub raw: BoundValues,
    pub exact: ConditionReport,
}

impl CalibrationSample {
    pub fn compute(
        mesh: &SimplicialMesh,
        field: &DiffusionField,
        p: Option<f64>,
        tol: f64,
    ) -> Result<Self> {
        let ctx = BoundContext::new(mesh, field, p)?;
        let a = assemble_stiffness(mesh, field)?;
        let exact = condition_report_for(&a, mesh.dim(), tol, Solver::Auto)?;
        Ok(CalibrationSample {
            dim: mesh.dim(),
            raw: BoundValues::from_context(&ctx),
            exact,
        })
    }
}

/// Lower bounds take `C = min exact/raw` and upper bounds `C = max
/// exact/raw` over the series, so the calibrated bounds hold on every
/// member.
pub fn calibrate(series: &[CalibrationSample]) -> Result<Calibration> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    if let Some(s) = series.iter().find(|s| s.dim != first.dim) {
        return Err(Error::Mismatch(format!(
            "calibration series mixes dimensions {} and {}",
            first.dim, s.dim
        )));
    }
    let mut out = BTreeMap::new();
    for id in BoundId::ALL {
        let ratios: Vec<f64> = series
            .iter()
            .filter_map(|s| s.raw.get(id).map(|raw| id.exact(&s.exact) / raw))
            .collect();
        if ratios.is_empty() {
            continue;
        }
        let c = if id.is_lower() {
            ratios.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        out.insert(id, c);
    }
    let mut cal = Calibration {
        version: CALIBRATION_VERSION,
        constants: BTreeMap::new(),
    };
    cal.constants.insert(first.dim.to_string(), out);
    Ok(cal)
}

impl Calibration {
    pub fn for_dim(&self, dim: usize) -> Option<&BTreeMap<BoundId, f64>> {
        self.constants.get(&dim.to_string())
    }

    pub fn constant(&self, dim: usize, id: BoundId) -> Option<f64> {
        self.for_dim(dim).and_then(|m| m.get(&id)).copied()
    }

    /// Adds the constants of `other`, replacing dimensions present in both.
    pub fn merge(&mut self, other: Calibration) {
        self.version = CALIBRATION_VERSION;
        self.constants.extend(other.constants);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(text)?;
        if c.version != CALIBRATION_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported calibration version {}",
                c.version
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::parse(path, j.line(), j.to_string()),
            other => other,
        })
    }
}
