//! Constant-coefficient operator algebra near the unit circle: collar
//! operators, boundary operators in `D_nu`, `D_Gamma` form, the special Green
//! formula tableau and the formally adjoint problem.

mod boundary;
mod green;
mod interior;
mod tableau;

pub use boundary::{join_terms, BoundaryOperator, RenderedTerm};
pub use green::{green_identity_sides, AdjointData, DirectData, RadialField};
pub use interior::InteriorCollarOperator;
pub use tableau::{build_green_tableau, adjoint_problem, AdjointProblem, AdjointRow, GreenTableau};
