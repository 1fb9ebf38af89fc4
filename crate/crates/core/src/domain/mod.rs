//! Extension from bounded smooth planar domains through a boundary tube.

pub mod chart;
pub mod curve;
pub mod cutoff;
pub mod extend;
pub mod suite;

pub use chart::{Location, TubularChart};
pub use curve::{estimate_reach, FourierCurve, Orientation, PlanarDomain, Point};
pub use cutoff::CutoffProfile;
pub use extend::{Bump, DependenceReport, DomainExtension, DomainFn, FieldSample, Mask};
pub use suite::{domain_suite, shape_suite, shipped_shapes, DomainSuiteReport, PlaneFunction, SecondDerivativeRow, ShapeReport, SuiteConfig};
