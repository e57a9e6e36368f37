//! Chart-based scalar and tensor fields with exact forward-mode derivatives.

pub mod chart;
pub mod expr;
pub mod linalg;
pub mod scalar;
pub mod tensor;

pub use chart::{
    jet_eval, parse_field, CoordBox, Jet, MetricChart, MetricField, MetricJet, ScalarField,
    ScalarSource, Unbounded,
};
pub use expr::{Expr, Func};
pub use scalar::{Scalar, Taylor2, Taylor3};
pub use tensor::{
    christoffel, connection, curvature, hessian_grad, max_generalized_eig_matrix,
    min_generalized_eig, min_generalized_eig_matrix, Connection, Curvature, HessGrad, TensorKind,
    TensorValue,
};
