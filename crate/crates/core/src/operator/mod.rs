//! The extension operator and its companions on callables and grids.

pub mod function;
pub mod grid;
pub mod plan;

pub use function::{Builtin, CallableFunction, EvalFn, Growth, Support};
pub use grid::{dilate_grid, extend_grid, interpolate, zero_extend_grid, Axis, GridExtension, GridFunction};
pub use plan::{
    adjoint_apply, adjoint_normal_derivative, commuted_family, commuted_family_inverted, dilate, extend_callable,
    extend_normal_derivative,
    extend_extended, extend_points, finite_extend, finite_extend_with, richardson_derivative, triangle_constant,
    zero_extend, Evaluation, ExtensionPlan, OutOfRangePolicy,
};
