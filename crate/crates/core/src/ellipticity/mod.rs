//! Pointwise Lawruk ellipticity: interior ellipticity, proper ellipticity
//! through the root split of the frozen interior symbol, and the covering
//! condition through the Lopatinskii-type matrix on decaying solutions.

mod covering;
mod interior;
mod lawruk;
mod roots;

pub use covering::{
    build_lopatinskii_matrix, check_covering, freeze_symbols, CoveringReport, PointSymbolProblem, COVERING_TOL,
    ROOT_TOL,
};
pub use interior::{check_interior_ellipticity, default_direction_grid, HomogeneousPoly};
pub use lawruk::{check_lawruk_ellipticity, DirectionEntry, EllipticityTol, LawrukReport, Witness};
pub use roots::{
    check_proper_ellipticity, poly_derivative, poly_eval, raw_roots, roots_with_multiplicity, Root, RootSplit,
};
