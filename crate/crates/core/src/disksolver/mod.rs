//! Mode-by-mode solver for the model problem on the unit disk: Laplace
//! interior operator, boundary conditions coupling `u` with `kappa` extra
//! unknowns `v_k` on the circle. Each Fourier mode gives a square system of
//! size `1 + kappa`; kernel, cokernel, solvability, a priori and regularity
//! checks are all read off these systems.

mod fredholm;
mod modes;
mod norms;
mod problem;
mod regularity;

pub use fredholm::{
    cokernel_pairings, fredholm_report, fredholm_report_from, is_orthogonal_to_cokernel, isomorphism_constants,
    isomorphism_probe, kernel_element, kernel_residual, random_range_rhs, verify_solvability_criterion,
    FredholmReport, IsomorphismRecord, ModeVector, K_INSUFFICIENT, TAIL_FLOOR,
};
pub use modes::{
    apply_boundary, mode_matrix, particular_coefficient, solve, FTerm, ModeEntry, ModeSystem, ModeTable,
    ParticularProfile, RHSData, Solution, SolveOutcome, Violation, RANK_TOL, SOLVE_TOL,
};
pub use norms::{apriori_probe, apriori_ratio, dnorm, enorm, AprioriRecord};
pub use problem::DiskProblem;
pub use regularity::{
    classify_smoothness, envelope_rhs, regularity_check, ComponentVerdict, EnvelopeFit, RegularityVerdict,
    RhsEnvelope, SeriesEvidence, SmoothnessVerdict, EXPONENT_TOL, PHI_FACTOR_BOUND,
};
