//! Numerical norm estimators and operator probes.

pub mod adjoint;
pub mod boundary;
pub mod dilation;
pub mod mesh;
pub mod norms;
pub mod probe;
pub mod spectral;
pub mod testfam;
pub mod witness;

pub use mesh::{adaptive_simpson, combine, integrate_panels, lp_weighted, GradedMesh};
pub use norms::*;
pub use spectral::*;
pub use testfam::{test_family, TestFunction, FAMILY_DERIVATIVES};
pub use witness::{neg_sobolev_upper, DecompositionWitness, WitnessCheck, WitnessDomain, WitnessPart};
pub use probe::*;
pub use dilation::{default_radii, dilation_growth_probe, fit_slope, DilationReport, DilationRow};
pub use boundary::{boundary_smoothness_report, fd_weights_real, BoundaryReport, OrderMismatch, MIN_FITTED_ORDER};
pub use adjoint::{adjoint_flatness, duality_check, DualityCheck, FlatnessReport, FlatnessRow, FLATNESS_PROFILE};
