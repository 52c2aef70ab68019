use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::collarops::BoundaryOperator;
use crate::error::{Error, Result};
use crate::numeric::{hadamard_ratio, i_pow, C64};

use super::roots::{check_proper_ellipticity, poly_derivative, poly_eval, roots_with_multiplicity, trim, RootSplit};

/// Principal symbols frozen at a boundary point and a tangential covector:
/// `A(tau + zeta nu)`, `B_j(tau + zeta nu)` as ascending polynomials in
/// `zeta`, and the scalars `C_jk(tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSymbolProblem {
    pub a_poly: Vec<C64>,
    pub b_polys: Vec<Vec<C64>>,
    /// `(q + kappa) x kappa`.
    pub c_values: Vec<Vec<C64>>,
    pub q: usize,
    pub kappa: usize,
}

impl PointSymbolProblem {
    pub fn new(a_poly: Vec<C64>, b_polys: Vec<Vec<C64>>, c_values: Vec<Vec<C64>>, q: usize, kappa: usize) -> Result<Self> {
        let p = Self { a_poly, b_polys, c_values, q, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidProblem("q must be positive".into()));
        }
        let deg = trim(&self.a_poly).len().saturating_sub(1);
        if deg != 2 * self.q {
            return Err(Error::InvalidProblem(format!(
                "the interior symbol must have degree 2q = {} in zeta with nonzero leading coefficient, got degree {deg}",
                2 * self.q
            )));
        }
        let rows = self.q + self.kappa;
        if self.b_polys.len() != rows {
            return Err(Error::InvalidProblem(format!("expected {rows} boundary symbols, got {}", self.b_polys.len())));
        }
        if self.c_values.len() != rows || self.c_values.iter().any(|r| r.len() != self.kappa) {
            return Err(Error::InvalidProblem(format!("C must be a {rows} x {} table", self.kappa)));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.q + self.kappa
    }

    /// Multiplies `a_poly` by a nonzero scalar.
    pub fn with_scaled_interior(mut self, factor: C64) -> Self {
        self.a_poly.iter_mut().for_each(|c| *c *= factor);
        self
    }

    /// Multiplies row `j` (`B_j` and `C_j.`) by a nonzero scalar.
    pub fn with_scaled_row(mut self, j: usize, factor: C64) -> Self {
        self.b_polys[j].iter_mut().for_each(|c| *c *= factor);
        self.c_values[j].iter_mut().for_each(|c| *c *= factor);
        self
    }
}

/// Freezes principal symbols of constant-coefficient operators in collar
/// form at signed tangential covector `tau`: `D_nu -> zeta`, `D_Gamma -> tau`.
/// `B_j` keeps its terms of order `m_j`, `C_jk` its terms of order `m_j + r_k`.
pub fn freeze_symbols(
    interior: &BoundaryOperator,
    q: usize,
    b: &[BoundaryOperator],
    c: &[Vec<BoundaryOperator>],
    m_orders: &[i64],
    r_orders: &[i64],
    tau: f64,
) -> Result<PointSymbolProblem> {
    let kappa = r_orders.len();
    if b.len() != m_orders.len() || c.len() != b.len() {
        return Err(Error::InvalidProblem("B, C and m_j must have the same number of rows".into()));
    }
    let a_poly = interior.principal_symbol(2 * q as u32, tau);
    let b_polys = b
        .iter()
        .zip(m_orders)
        .map(|(op, &mj)| if mj < 0 { vec![C64::new(0.0, 0.0)] } else { op.principal_symbol(mj as u32, tau) })
        .collect();
    let c_values = c
        .iter()
        .zip(m_orders)
        .map(|(row, &mj)| {
            row.iter()
                .zip(r_orders)
                .map(|(op, &rk)| {
                    let deg = mj + rk;
                    if deg < 0 {
                        C64::new(0.0, 0.0)
                    } else {
                        op.principal_symbol(deg as u32, tau)[0]
                    }
                })
                .collect()
        })
        .collect();
    PointSymbolProblem::new(a_poly, b_polys, c_values, q, kappa)
}

/// Rows `j`, columns: decaying solutions `t^l e^{-i zeta_r t}` over the
/// minus roots (entry `i^l B_j^{(l)}(zeta_r)`), then the `lambda_k` (entry
/// `C_jk`).
pub fn build_lopatinskii_matrix(problem: &PointSymbolProblem, split: &RootSplit) -> Result<DMatrix<C64>> {
    if split.plus_multiplicity() + split.minus_multiplicity() != 2 * problem.q || split.minus_multiplicity() != problem.q {
        return Err(Error::Consistency(format!(
            "root split ({} plus, {} minus) does not match q = {}",
            split.plus_multiplicity(),
            split.minus_multiplicity(),
            problem.q
        )));
    }
    let n = problem.rows();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for (j, b) in problem.b_polys.iter().enumerate() {
        let mut col = 0;
        for root in &split.minus_roots {
            for l in 0..root.multiplicity {
                m[(j, col)] = i_pow(l as i64) * poly_eval(&poly_derivative(b, l), root.value);
                col += 1;
            }
        }
        for (k, &cv) in problem.c_values[j].iter().enumerate() {
            m[(j, problem.q + k)] = cv;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<C64>,
    pub det: C64,
    /// `|det| / prod ||row_j||_2`.
    pub normalized_det: f64,
    pub is_covering: bool,
    pub condition_number: f64,
    pub split: RootSplit,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<(f64, f64)>> = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| (z.re, z.im)).collect())
        .collect();
    rows.serialize(s)
}

/// Default determinant tolerance for [`check_covering`].
pub const COVERING_TOL: f64 = 1e-10;
/// Default root clustering and real-root tolerance.
pub const ROOT_TOL: f64 = 1e-8;

/// Condition (iii) at one point. Fails with the real-root error of the root
/// finder; a proper-ellipticity failure is reported as a consistency error.
pub fn check_covering(problem: &PointSymbolProblem, root_tol: f64, det_tol: f64) -> Result<CoveringReport> {
    problem.validate()?;
    let split = roots_with_multiplicity(&problem.a_poly, root_tol)?;
    if !check_proper_ellipticity(&split, problem.q) {
        return Err(Error::Consistency(format!(
            "not properly elliptic: {} roots with Im > 0 and {} with Im < 0 (q = {})",
            split.plus_multiplicity(),
            split.minus_multiplicity(),
            problem.q
        )));
    }
    let matrix = build_lopatinskii_matrix(problem, &split)?;
    let det = matrix.determinant();
    let normalized_det = hadamard_ratio(&matrix);
    let sv = matrix.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(CoveringReport { matrix, det, normalized_det, is_covering: normalized_det > det_tol, condition_number, split })
}
