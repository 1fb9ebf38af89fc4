//! Reflection-coefficient families and their moment validation.

pub mod family;
pub mod finite;
pub mod fixed_point;
pub mod interpolant;
pub mod moments;
pub mod seeley;
pub mod taylor;
pub mod weierstrass;

pub use family::{CoefficientFamily, Entry, FamilyKind, Term, ValidatedRange};
pub use finite::{dyadic_finite_coefficients, vandermonde_coefficients};
pub use fixed_point::{fixed_point_coefficients, synthesize_two_sided, FixedPointRun};
pub use interpolant::{interpolant_eval, BoundarySequence, Interpolant};
pub use moments::{moment_report, MomentReport, MomentRow};
pub use seeley::seeley_one_sided_coefficients;
pub use taylor::taylor_coefficients;
pub use weierstrass::{weierstrass_derivative_at_node, weierstrass_eval, Certified, WeierstrassProduct};
