//! Eigenvalue and condition-number bounds, anisotropy metrics and the
//! calibration of the generic constants.
//!
//! Every bound is evaluated with `C = 1` ("raw"). A [`Calibration`] holds
//! one constant per dimension and bound id.

mod beta;
mod calibrate;
mod formulas;
mod report;

pub use beta::{compute_beta, p_range, AnisotropyMetrics};
pub use calibrate::{calibrate, Calibration, CalibrationSample, CALIBRATION_VERSION};
pub use formulas::{
    bound_kappa, bound_kappa_prior, bound_kappa_sas_conjectured, bound_lambda_max,
    bound_lambda_min_a, bound_lambda_min_b, bound_lambda_min_fried, bound_lambda_min_sas,
    bound_lambda_rho, BoundContext, DEFAULT_P_3D,
};
pub use report::{analyze, analyze_with, fmt_num, BoundId, BoundReport, BoundValues};
