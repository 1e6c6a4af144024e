//! Expressions, jets, polynomials and contour quadrature.

pub mod contour;
pub mod expr;
pub mod jet;
pub mod parse;
pub mod poly;

pub use contour::{contour_integral, contour_integral_try, contour_integral_vec, ContourSpec};
pub use expr::{poisson_bracket, poisson_bracket_in, Algebra, ComplexAlgebra, Expr, JetAlgebra};
pub use jet::{invert_jet_matrix, Jet, JetShape};
pub use parse::parse_expr;
pub use poly::Poly;
