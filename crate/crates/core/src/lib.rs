//! Numerical verification of plurisubharmonic interpolants near clean
//! Lagrangian intersections and of reverse isoperimetric inequalities for
//! holomorphic curves with Lagrangian boundary, in the flat model `ℂⁿ`.

pub mod analysis;
pub mod config;
pub mod construction;
pub mod curves;
pub mod error;
pub mod jet;
pub mod levi;
pub mod model;
pub mod report;
pub mod suites;

pub use error::{FieldError, LabError};
pub use jet::{fd_hessian, Formula, Jet2, PlaneJet, Point, Scalar, ScalarField};
pub use levi::{apply_j, grad_form_matrix, is_psd, levi_matrix, min_eigenvalue, LeviMatrix};
pub use model::ModelParams;
