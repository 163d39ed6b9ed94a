use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::calibrate::Calibration;
use super::formulas::{bound_lambda_max, BoundContext};
use crate::assembly::{assemble_stiffness, DiffusionField};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::spectra::{condition_report_for, ConditionReport, Solver};

/// Stable identifiers of the calibrated bound families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundId {
    #[serde(rename = "new.lambda_min.A")]
    NewLambdaMinA,
    #[serde(rename = "new.lambda_min.SAS")]
    NewLambdaMinSas,
    #[serde(rename = "fried.lambda_min")]
    FriedLambdaMin,
    #[serde(rename = "new.kappa.A")]
    NewKappaA,
    #[serde(rename = "new.kappa.SAS")]
    NewKappaSas,
    #[serde(rename = "prior.kappa.A")]
    PriorKappaA,
    #[serde(rename = "prior.kappa.SAS")]
    PriorKappaSas,
    #[serde(rename = "conjectured.kappa.SAS")]
    ConjecturedKappaSas,
}

impl BoundId {
    pub const ALL: [BoundId; 8] = [
        BoundId::NewLambdaMinA,
        BoundId::NewLambdaMinSas,
        BoundId::FriedLambdaMin,
        BoundId::NewKappaA,
        BoundId::NewKappaSas,
        BoundId::PriorKappaA,
        BoundId::PriorKappaSas,
        BoundId::ConjecturedKappaSas,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::NewLambdaMinA => "new.lambda_min.A",
            BoundId::NewLambdaMinSas => "new.lambda_min.SAS",
            BoundId::FriedLambdaMin => "fried.lambda_min",
            BoundId::NewKappaA => "new.kappa.A",
            BoundId::NewKappaSas => "new.kappa.SAS",
            BoundId::PriorKappaA => "prior.kappa.A",
            BoundId::PriorKappaSas => "prior.kappa.SAS",
            BoundId::ConjecturedKappaSas => "conjectured.kappa.SAS",
        }
    }

    /// True for lower bounds on an eigenvalue, false for upper bounds on a
    /// condition number.
    pub fn is_lower(self) -> bool {
        matches!(
            self,
            BoundId::NewLambdaMinA | BoundId::NewLambdaMinSas | BoundId::FriedLambdaMin
        )
    }

    /// The exact quantity this bound estimates.
    pub fn exact(self, exact: &ConditionReport) -> f64 {
        match self {
            BoundId::NewLambdaMinA | BoundId::FriedLambdaMin => exact.a.lambda_min,
            BoundId::NewLambdaMinSas => exact.sas.lambda_min,
            BoundId::NewKappaA | BoundId::PriorKappaA => exact.a.kappa,
            BoundId::NewKappaSas | BoundId::PriorKappaSas | BoundId::ConjecturedKappaSas => {
                exact.sas.kappa
            }
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound id `{s}`")))
    }
}

/// Bound values keyed by id; bounds undefined for the dimension are absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundValues(pub BTreeMap<BoundId, f64>);

impl BoundValues {
    pub fn from_context(c: &BoundContext) -> Self {
        let mut m = BTreeMap::new();
        m.insert(BoundId::NewLambdaMinA, c.lambda_min_a());
        m.insert(BoundId::NewLambdaMinSas, c.lambda_min_sas());
        m.insert(BoundId::FriedLambdaMin, c.lambda_min_fried());
        m.insert(BoundId::NewKappaA, c.kappa_a());
        m.insert(BoundId::NewKappaSas, c.kappa_sas());
        m.insert(BoundId::PriorKappaA, c.kappa_a_prior());
        m.insert(BoundId::PriorKappaSas, c.kappa_sas_prior());
        if let Some(v) = c.kappa_sas_conjectured() {
            m.insert(BoundId::ConjecturedKappaSas, v);
        }
        BoundValues(m)
    }

    pub fn get(&self, id: BoundId) -> Option<f64> {
        self.0.get(&id).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dim: usize,
    pub num_elements: usize,
    pub num_interior: usize,
    pub p_used: Option<f64>,
    pub exact: ConditionReport,
    /// `(max_j A_jj, (d+1) max_j A_jj)`.
    pub lambda_max_a_bounds: (f64, f64),
    /// Values with `C = 1`.
    pub raw: BoundValues,
    /// Constants applied, when a calibration covers this dimension.
    pub calibration_constants: Option<BoundValues>,
    /// `C · raw` for every id that has a constant.
    pub calibrated: Option<BoundValues>,
    pub warnings: Vec<String>,
}

/// Full analysis of one mesh: exact spectra and every bound.
pub fn analyze(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
    tol: f64,
    calibration: Option<&Calibration>,
) -> Result<BoundReport> {
    analyze_with(mesh, field, p, tol, calibration, Solver::Auto)
}

pub fn analyze_with(
    mesh: &SimplicialMesh,
    field: &DiffusionField,
    p: Option<f64>,
    tol: f64,
    calibration: Option<&Calibration>,
    solver: Solver,
) -> Result<BoundReport> {
    let ctx = BoundContext::new(mesh, field, p)?;
    let a = assemble_stiffness(mesh, field)?;
    let exact = condition_report_for(&a, mesh.dim(), tol, solver)?;
    Ok(build_report(
        &ctx,
        exact,
        bound_lambda_max(&a, mesh.dim()),
        calibration,
    ))
}

pub(crate) fn build_report(
    ctx: &BoundContext,
    exact: ConditionReport,
    lambda_max_a_bounds: (f64, f64),
    calibration: Option<&Calibration>,
) -> BoundReport {
    let raw = BoundValues::from_context(ctx);
    let constants = calibration.and_then(|c| c.for_dim(ctx.dim)).map(|m| {
        BoundValues(
            m.iter()
                .filter(|(id, _)| raw.0.contains_key(id))
                .map(|(&id, &c)| (id, c))
                .collect(),
        )
    });
    let calibrated = constants.as_ref().map(|c| {
        BoundValues(
            c.0.iter()
                .map(|(&id, &k)| (id, k * raw.get(id).expect("filtered")))
                .collect(),
        )
    });
    let mut warnings = Vec::new();
    if ctx.dim == 2 && (ctx.metrics.domain_volume - 1.0).abs() > 1e-12 {
        warnings.push(format!(
            "domain volume {} differs from 1; the two-dimensional log terms are not scale invariant",
            ctx.metrics.domain_volume
        ));
    }
    if !exact.converged() {
        warnings.push("eigensolver did not reach the requested tolerance".into());
    }
    BoundReport {
        dim: ctx.dim,
        num_elements: ctx.num_elements(),
        num_interior: ctx.metrics.num_interior,
        p_used: ctx.p,
        exact,
        lambda_max_a_bounds,
        raw,
        calibration_constants: constants,
        calibrated,
        warnings,
    }
}

/// Formats with 17 significant digits; NaN and infinities spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

const EXACT_COLUMNS: [&str; 11] = [
    "N",
    "N_vi",
    "kappa_A",
    "kappa_SAS",
    "lambda_min_A",
    "lambda_max_A",
    "lambda_min_SAS",
    "lambda_max_SAS",
    "max_diag_A",
    "lambda_max_A_upper",
    "residual",
];

impl BoundReport {
    /// Column names matching [`BoundReport::csv_values`]: exact quantities,
    /// then `raw:<id>` and `cal:<id>` for every bound id.
    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = EXACT_COLUMNS.iter().map(|s| s.to_string()).collect();
        for id in BoundId::ALL {
            h.push(format!("raw:{id}"));
        }
        for id in BoundId::ALL {
            h.push(format!("cal:{id}"));
        }
        h
    }

    pub fn csv_values(&self) -> Vec<f64> {
        let e = &self.exact;
        let mut v = vec![
            self.num_elements as f64,
            self.num_interior as f64,
            e.a.kappa,
            e.sas.kappa,
            e.a.lambda_min,
            e.a.lambda_max,
            e.sas.lambda_min,
            e.sas.lambda_max,
            self.lambda_max_a_bounds.0,
            self.lambda_max_a_bounds.1,
            e.a.residual.max(e.sas.residual),
        ];
        for id in BoundId::ALL {
            v.push(self.raw.get(id).unwrap_or(f64::NAN));
        }
        for id in BoundId::ALL {
            v.push(
                self.calibrated
                    .as_ref()
                    .and_then(|c| c.get(id))
                    .unwrap_or(f64::NAN),
            );
        }
        v
    }

    /// Number of values in a CSV row.
    pub fn csv_width() -> usize {
        EXACT_COLUMNS.len() + 2 * BoundId::ALL.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let e = &self.exact;
        let line = |s: &mut String, k: &str, v: String| s.push_str(&format!("{k:<28} {v}\n"));
        line(&mut s, "dimension", self.dim.to_string());
        line(&mut s, "elements N", self.num_elements.to_string());
        line(&mut s, "interior vertices", self.num_interior.to_string());
        if let Some(p) = self.p_used {
            line(&mut s, "p", p.to_string());
        }
        line(&mut s, "method", e.a.method.as_str().to_string());
        line(&mut s, "kappa(A)", fmt_num(e.a.kappa));
        line(&mut s, "kappa(SAS)", fmt_num(e.sas.kappa));
        line(&mut s, "lambda_min(A)", fmt_num(e.a.lambda_min));
        line(&mut s, "lambda_max(A)", fmt_num(e.a.lambda_max));
        line(&mut s, "lambda_min(SAS)", fmt_num(e.sas.lambda_min));
        line(&mut s, "lambda_max(SAS)", fmt_num(e.sas.lambda_max));
        line(
            &mut s,
            "max A_jj <= lambda_max(A) <=",
            format!(
                "{} .. {}",
                fmt_num(self.lambda_max_a_bounds.0),
                fmt_num(self.lambda_max_a_bounds.1)
            ),
        );
        s.push_str(&format!(
            "\n{:<24} {:>24} {:>24}\n",
            "bound", "raw (C = 1)", "calibrated"
        ));
        for (id, raw) in &self.raw.0 {
            let cal = self
                .calibrated
                .as_ref()
                .and_then(|c| c.get(*id))
                .map_or_else(|| "-".to_string(), fmt_num);
            s.push_str(&format!(
                "{:<24} {:>24} {:>24}\n",
                id.as_str(),
                fmt_num(*raw),
                cal
            ));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_uniform, Domain};

    #[test]
    fn ids_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.as_str()));
        }
        assert!("new.kappa".parse::<BoundId>().is_err());
    }

    #[test]
    fn uniform_1d_report() {
        let m = generate_uniform(1, 4, &Domain::unit(1)).unwrap();
        let r = analyze(&m, &DiffusionField::identity(1), None, 1e-8, None).unwrap();
        assert!((r.exact.a.kappa - 5.828_427_124_746_19).abs() < 1e-10);
        assert_eq!(r.lambda_max_a_bounds, (8.0, 16.0));
        assert!(r.raw.get(BoundId::ConjecturedKappaSas).is_none());
        assert_eq!(r.csv_values().len(), BoundReport::csv_width());
        assert_eq!(BoundReport::csv_header().len(), BoundReport::csv_width());
        assert!(r.table().contains("kappa(A)"));
        assert!(r.to_json().unwrap().contains("\"new.kappa.SAS\""));
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }
}
