//! Conditioning of linear finite element stiffness matrices for anisotropic
//! diffusion on simplicial meshes in one, two and three dimensions.
//!
//! The crate assembles the stiffness matrix `A` over interior vertices,
//! computes the extreme eigenvalues of `A` and of its Jacobi-scaled form
//! `S⁻¹AS⁻¹`, and evaluates a set of a-priori bounds on them.
//!
//! ```
//! use fecond::prelude::*;
//!
//! let mesh = generate_uniform(1, 4, &Domain::unit(1)).unwrap();
//! let report = condition_report(&mesh, &DiffusionField::identity(1), DEFAULT_TOL).unwrap();
//! assert!((report.a.kappa - 5.828427124746190).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod bounds;
mod error;
pub mod experiment;
pub mod mesh;
mod small;
pub mod spectra;

pub use error::{Error, Result};
pub use small::SmallMat;

pub mod prelude {
    pub use crate::assembly::{
        assemble_mass_weighted, assemble_stiffness, density_beta_weighted, density_equidistributed,
        jacobi_scale, DensityFunction, DiffusionField, DiffusionSpec, SparseSymmetric,
    };
    pub use crate::bounds::{analyze, BoundContext, BoundId, BoundReport, Calibration};
    pub use crate::mesh::{
        compute_metrics, generate_boundary_layer, generate_chebyshev_1d, generate_power2_1d,
        generate_uniform, Domain, SimplicialMesh,
    };
    pub use crate::spectra::{
        condition_report, extreme_eigenvalues, generalized_min_eigenvalue, SpectralResult,
        DEFAULT_TOL,
    };
    pub use crate::{Error, Result};
}
