use serde::Serialize;

use crate::error::Result;

use super::covering::{check_covering, PointSymbolProblem};
use super::interior::{check_interior_ellipticity, HomogeneousPoly};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionEntry {
    pub tau: f64,
    pub properly_elliptic: bool,
    pub covering: bool,
    pub normalized_det: Option<f64>,
    pub det: Option<(f64, f64)>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub condition: String,
    pub tau: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawrukReport {
    pub interior_elliptic: Option<bool>,
    pub entries: Vec<DirectionEntry>,
    pub elliptic: bool,
    pub witness: Option<Witness>,
}

/// Tolerances for the full check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityTol {
    pub root: f64,
    pub det: f64,
    pub interior: f64,
}

impl Default for EllipticityTol {
    fn default() -> Self {
        Self { root: super::ROOT_TOL, det: super::COVERING_TOL, interior: 1e-10 }
    }
}

/// Conditions (i)-(iii) over sampled tangential covectors. `interior` is
/// checked on `grid` when given; `point` produces the frozen symbols at each
/// `tau`. The first failure is kept as the witness.
pub fn check_lawruk_ellipticity(
    interior: Option<(&HomogeneousPoly, &[Vec<f64>])>,
    taus: &[f64],
    point: impl Fn(f64) -> Result<PointSymbolProblem>,
    tol: EllipticityTol,
) -> LawrukReport {
    let mut witness = None;
    let interior_elliptic = interior.map(|(sym, grid)| check_interior_ellipticity(sym, grid, tol.interior));
    if interior_elliptic == Some(false) {
        witness = Some(Witness {
            condition: "(i)".into(),
            tau: None,
            reason: "the interior principal symbol vanishes on a sampled direction".into(),
        });
    }
    let mut entries = Vec::with_capacity(taus.len());
    for &tau in taus {
        let outcome = point(tau).and_then(|p| check_covering(&p, tol.root, tol.det));
        let entry = match outcome {
            Ok(r) => DirectionEntry {
                tau,
                properly_elliptic: true,
                covering: r.is_covering,
                normalized_det: Some(r.normalized_det),
                det: Some((r.det.re, r.det.im)),
                message: None,
            },
            Err(e) => DirectionEntry {
                tau,
                properly_elliptic: false,
                covering: false,
                normalized_det: None,
                det: None,
                message: Some(e.to_string()),
            },
        };
        if witness.is_none() {
            if !entry.properly_elliptic {
                witness = Some(Witness {
                    condition: "(ii)".into(),
                    tau: Some(tau),
                    reason: entry.message.clone().unwrap_or_default(),
                });
            } else if !entry.covering {
                witness = Some(Witness {
                    condition: "(iii)".into(),
                    tau: Some(tau),
                    reason: format!(
                        "normalized covering determinant {:.3e} is below {:.1e}",
                        entry.normalized_det.unwrap_or(0.0),
                        tol.det
                    ),
                });
            }
        }
        entries.push(entry);
    }
    LawrukReport { interior_elliptic, elliptic: witness.is_none(), entries, witness }
}
