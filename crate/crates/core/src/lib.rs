//! Summation-integral operators `L_{n,m}^c`, their Bézier variants
//! `F_{n,m}^{c,α}`, closed-form moments, smoothness moduli and
//! convergence-rate estimates.

// `!(a < b)` rejects NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bezier;
pub mod bounds;
pub mod catalogue;
pub mod error;
pub mod function;
pub mod moments;
pub mod operator;
pub mod quadrature;
pub mod smoothness;
pub mod special;

pub use basis::{basis_tail, basis_weight, log_basis_weight, truncation_index, Regime};
pub use bezier::{bezier_row, bezier_weight, Alpha, BezierRow, TruncationPolicy};
pub use bounds::{BoundReport, BoundSettings, BvForm, LipschitzForm, OrderFit, Theorem};
pub use catalogue::Catalogue;
pub use error::{Error, Result};
pub use function::{FnIntegrand, Formula, Growth, Integrand, Side, SmoothnessClass, TestFunction};
pub use moments::{central_moment, delta_n, raw_moment, MomentRequest, Mu4Form};
pub use operator::{apply_base, apply_bezier, kernel_density, partial_mass, Evaluation, Kernel, OperatorParams, QuadratureSpec};
pub use smoothness::{BvProfile, GridEstimate, Window};
