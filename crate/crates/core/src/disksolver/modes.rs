use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::collarops::RadialField;
use crate::error::{Error, Result};
use crate::hormander::ModeSequence;
use crate::numeric::{RankAnalysis, C64};

use super::DiskProblem;

/// Relative rank tolerance on the equilibrated mode matrices.
pub const RANK_TOL: f64 = 1e-9;
/// Relative residual above which a mode system counts as inconsistent.
pub const SOLVE_TOL: f64 = 1e-8;

/// `1 / ((2j+2)(2|k|+2j+2))`: `Laplace` of this multiple of
/// `rho^{|k|+2j+2} e^{ik theta}` is `rho^{|k|+2j} e^{ik theta}`.
pub fn particular_coefficient(k: i64, j: u32) -> f64 {
    let k = k.unsigned_abs() as f64;
    let j = j as f64;
    1.0 / ((2.0 * j + 2.0) * (2.0 * k + 2.0 * j + 2.0))
}

fn check_mode(problem: &DiskProblem, k: i64) -> Result<()> {
    if k.unsigned_abs() as usize > problem.band() {
        return Err(Error::Domain(format!("mode {k} outside band limit {}", problem.band())));
    }
    Ok(())
}

/// Column 1: `B_j` on `rho^{|k|} e^{ik theta}` at `rho = 1`; column `1 + k'`:
/// multiplier of `C_{j,k'}` on `e^{ik theta}`.
pub fn mode_matrix(problem: &DiskProblem, k: i64) -> Result<DMatrix<C64>> {
    check_mode(problem, k)?;
    Ok(raw_mode_matrix(problem, k))
}

fn raw_mode_matrix(problem: &DiskProblem, k: i64) -> DMatrix<C64> {
    let n = problem.rows();
    DMatrix::from_fn(n, n, |j, col| {
        if col == 0 {
            problem.b()[j].radial_mode_action(k.abs(), k)
        } else {
            problem.c()[j][col - 1].tangential_symbol(k)
        }
    })
}

/// One term `coeff * rho^{|k|+2j} e^{ik theta}` of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FTerm {
    pub k: i64,
    pub j: u32,
    pub coeff: C64,
}

/// Right-hand side `(f, g_1, ..., g_{1+kappa})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RHSData {
    #[serde(default)]
    pub f_terms: Vec<FTerm>,
    pub g: Vec<ModeSequence>,
}

impl RHSData {
    pub fn new(problem: &DiskProblem, f_terms: Vec<FTerm>, g: Vec<ModeSequence>) -> Result<Self> {
        let rhs = Self { f_terms, g };
        rhs.validate(problem)?;
        Ok(rhs)
    }

    pub fn zero(problem: &DiskProblem) -> Self {
        Self { f_terms: Vec::new(), g: vec![ModeSequence::zeros(problem.band()); problem.rows()] }
    }

    pub fn validate(&self, problem: &DiskProblem) -> Result<()> {
        if self.g.len() != problem.rows() {
            return Err(Error::Domain(format!("expected {} boundary data g_j, got {}", problem.rows(), self.g.len())));
        }
        for (j, g) in self.g.iter().enumerate() {
            if let Some((k, _)) = g.support().find(|(k, _)| k.unsigned_abs() as usize > problem.band()) {
                return Err(Error::Domain(format!("g_{} has mode {k} beyond the band limit {}", j + 1, problem.band())));
            }
        }
        for t in &self.f_terms {
            check_mode(problem, t.k)?;
        }
        Ok(())
    }

    /// Modes carrying data.
    pub fn support(&self) -> Vec<i64> {
        let mut modes: Vec<i64> = self.g.iter().flat_map(|g| g.support().map(|(k, _)| k)).collect();
        modes.extend(self.f_terms.iter().filter(|t| t.coeff != C64::new(0.0, 0.0)).map(|t| t.k));
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    /// `f` as a field on the disk.
    pub fn f_field(&self) -> RadialField {
        RadialField::new(self.f_terms.iter().map(|t| (t.k, t.k.abs() + 2 * t.j as i64, t.coeff)))
            .expect("f terms are smooth")
    }

    /// Particular solution of `Laplace u = f`.
    pub fn particular_field(&self) -> RadialField {
        RadialField::new(self.f_terms.iter().map(|t| {
            (t.k, t.k.abs() + 2 * t.j as i64 + 2, t.coeff * particular_coefficient(t.k, t.j))
        }))
        .expect("particular profiles are smooth")
    }

    /// Right side of mode system `k`: `g_{j,k}` minus the boundary action of
    /// the particular solution.
    pub fn mode_vector(&self, problem: &DiskProblem, k: i64) -> DVector<C64> {
        let mut b = DVector::from_iterator(problem.rows(), self.g.iter().map(|g| g.get(k)));
        for t in self.f_terms.iter().filter(|t| t.k == k) {
            let n = k.abs() + 2 * t.j as i64 + 2;
            let c = t.coeff * particular_coefficient(k, t.j);
            for (j, op) in problem.b().iter().enumerate() {
                b[j] -= c * op.radial_mode_action(n, k);
            }
        }
        b
    }

    pub fn scale_of(&self) -> f64 {
        let g = self.g.iter().map(|g| g.max_abs()).fold(0.0, f64::max);
        self.f_terms.iter().map(|t| t.coeff.norm()).fold(g, f64::max)
    }
}

/// Per-mode system `M_k x = b_k` with `x = (c_k, v_{1,k}, ..., v_{kappa,k})`.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub k: i64,
    pub matrix: DMatrix<C64>,
    pub rhs: DVector<C64>,
    pub nullity: usize,
    pub corank: usize,
}

impl ModeSystem {
    pub fn new(problem: &DiskProblem, rhs: &RHSData, k: i64, rank_tol: f64) -> Result<Self> {
        let matrix = mode_matrix(problem, k)?;
        let analysis = RankAnalysis::new(&matrix, rank_tol);
        Ok(Self { k, rhs: rhs.mode_vector(problem, k), nullity: analysis.nullity(), corank: analysis.corank(), matrix })
    }
}

/// Boundary rows `B_j u + sum_k C_{j,k} v_k` of a field and boundary data.
pub fn apply_boundary(problem: &DiskProblem, u: &RadialField, v: &[ModeSequence]) -> Vec<ModeSequence> {
    let band = v
        .iter()
        .map(|s| s.band())
        .chain(u.terms().map(|(k, _, _)| k.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    problem
        .b()
        .iter()
        .zip(problem.c())
        .map(|(b, row)| {
            let mut acc: BTreeMap<i64, C64> = u.trace(b);
            for (c, vk) in row.iter().zip(v) {
                for (k, val) in c.apply_tangential(vk).support() {
                    *acc.entry(k).or_default() += val;
                }
            }
            ModeSequence::from_modes(band, acc).expect("modes within band")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticularProfile {
    pub k: i64,
    /// Radial power `n` of `coeff * rho^n e^{ik theta}`.
    pub n: i64,
    pub coeff: C64,
}

/// `u = sum_k c_k rho^{|k|} e^{ik theta} + particular profiles`, and `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub harmonic: ModeSequence,
    pub particular: Vec<ParticularProfile>,
    pub v: Vec<ModeSequence>,
    /// Max over modes and rows of the reconstructed boundary residual,
    /// relative to `max(1, max |data|)`.
    pub max_residual: f64,
}

impl Solution {
    pub fn u_field(&self) -> RadialField {
        let harmonic = RadialField::harmonic(&self.harmonic);
        let particular =
            RadialField::new(self.particular.iter().map(|p| (p.k, p.n, p.coeff))).expect("profiles are smooth");
        RadialField::new(harmonic.terms().chain(particular.terms())).expect("smooth terms")
    }

    /// Max coefficient error of `Laplace u - f`.
    pub fn laplacian_error(&self, rhs: &RHSData) -> f64 {
        let lap = self.u_field().laplacian();
        let f = rhs.f_field();
        let mut diff: BTreeMap<(i64, i64), C64> = lap.terms().map(|(k, n, c)| ((k, n), c)).collect();
        for (k, n, c) in f.terms() {
            *diff.entry((k, n)).or_default() -= c;
        }
        diff.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// A mode whose system is inconsistent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub k: i64,
    /// 1-based boundary row carrying the dominant compatibility weight.
    pub row: usize,
    pub relative_residual: f64,
    /// `z^H b_k` for the cokernel vectors `z` of the mode.
    pub pairings: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SolveOutcome {
    Solved(Solution),
    Unsolvable { violations: Vec<Violation> },
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            Self::Solved(s) => Some(s),
            Self::Unsolvable { .. } => None,
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, Self::Solved(_))
    }
}

#[derive(Debug, Clone)]
pub struct ModeEntry {
    pub k: i64,
    pub matrix: DMatrix<C64>,
    pub analysis: RankAnalysis,
}

/// Mode matrices and their rank analyses for every `|k| <= K`.
#[derive(Debug, Clone)]
pub struct ModeTable {
    problem: DiskProblem,
    rank_tol: f64,
    entries: Vec<ModeEntry>,
}

impl ModeTable {
    pub fn new(problem: &DiskProblem, rank_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(Error::Domain(format!("rank tolerance must lie in (0, 1), got {rank_tol}")));
        }
        let band = problem.band() as i64;
        let entries = (-band..=band)
            .map(|k| {
                let matrix = raw_mode_matrix(problem, k);
                let analysis = RankAnalysis::new(&matrix, rank_tol);
                ModeEntry { k, matrix, analysis }
            })
            .collect();
        Ok(Self { problem: problem.clone(), rank_tol, entries })
    }

    pub fn problem(&self) -> &DiskProblem {
        &self.problem
    }

    pub fn band(&self) -> usize {
        self.problem.band()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn entries(&self) -> &[ModeEntry] {
        &self.entries
    }

    pub fn entry(&self, k: i64) -> Result<&ModeEntry> {
        check_mode(&self.problem, k)?;
        Ok(&self.entries[(k + self.band() as i64) as usize])
    }

    /// Solves mode by mode; the kernel component of each mode is removed.
    pub fn solve(&self, rhs: &RHSData) -> Result<SolveOutcome> {
        rhs.validate(&self.problem)?;
        let band = self.band();
        let kappa = self.problem.kappa();
        let mut harmonic = ModeSequence::zeros(band);
        let mut v = vec![ModeSequence::zeros(band); kappa];
        let mut violations = Vec::new();
        for e in &self.entries {
            let b = rhs.mode_vector(&self.problem, e.k);
            if b.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let sol = e.analysis.solve(&b);
            if sol.relative_residual > SOLVE_TOL {
                let pairings: Vec<C64> = e.analysis.left_null.iter().map(|z| z.dotc(&b)).collect();
                let row = e
                    .analysis
                    .left_null
                    .first()
                    .map(|z| z.icamax() + 1)
                    .unwrap_or(1);
                violations.push(Violation { k: e.k, row, relative_residual: sol.relative_residual, pairings });
                continue;
            }
            let mut x = sol.x;
            for n in &e.analysis.right_null {
                let c = n.dotc(&x);
                x -= n * c;
            }
            harmonic.set(e.k, x[0])?;
            for (i, vk) in v.iter_mut().enumerate() {
                vk.set(e.k, x[1 + i])?;
            }
        }
        if !violations.is_empty() {
            return Ok(SolveOutcome::Unsolvable { violations });
        }
        let particular = rhs
            .particular_field()
            .terms()
            .map(|(k, n, coeff)| ParticularProfile { k, n, coeff })
            .collect();
        let mut solution = Solution { harmonic, particular, v, max_residual: 0.0 };
        solution.max_residual = self.boundary_residual(&solution, rhs);
        Ok(SolveOutcome::Solved(solution))
    }

    fn boundary_residual(&self, solution: &Solution, rhs: &RHSData) -> f64 {
        let rows = apply_boundary(&self.problem, &solution.u_field(), &solution.v);
        let scale = rhs.scale_of().max(1.0);
        rows.iter()
            .zip(&rhs.g)
            .map(|(got, g)| got.add(&g.scale(C64::new(-1.0, 0.0))).max_abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Boundary rows of a harmonic `u` and `v`, mode by mode.
    pub fn apply_harmonic(&self, harmonic: &ModeSequence, v: &[ModeSequence]) -> Result<Vec<ModeSequence>> {
        if v.len() != self.problem.kappa() {
            return Err(Error::Domain(format!("expected {} sequences v_k, got {}", self.problem.kappa(), v.len())));
        }
        let band = self.band();
        let mut out = vec![ModeSequence::zeros(band); self.problem.rows()];
        for e in &self.entries {
            let x = DVector::from_iterator(1 + v.len(), std::iter::once(harmonic.get(e.k)).chain(v.iter().map(|s| s.get(e.k))));
            if x.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let y = &e.matrix * x;
            for (j, row) in out.iter_mut().enumerate() {
                row.set(e.k, y[j])?;
            }
        }
        Ok(out)
    }

    /// Removes the cokernel components of `g`, so that the result is solvable.
    pub fn project_onto_range(&self, rhs: &RHSData) -> Result<RHSData> {
        rhs.validate(&self.problem)?;
        let mut out = rhs.clone();
        out.g = out.g.iter().map(|g| g.widened(self.band())).collect();
        for e in self.entries.iter().filter(|e| !e.analysis.left_null.is_empty()) {
            let b = rhs.mode_vector(&self.problem, e.k);
            let mut shift = DVector::<C64>::zeros(b.len());
            for z in &e.analysis.left_null {
                shift += z * z.dotc(&b);
            }
            for (j, g) in out.g.iter_mut().enumerate() {
                let cur = g.get(e.k);
                g.set(e.k, cur - shift[j])?;
            }
        }
        Ok(out)
    }
}

/// Solves with the default rank tolerance.
pub fn solve(problem: &DiskProblem, rhs: &RHSData) -> Result<SolveOutcome> {
    ModeTable::new(problem, RANK_TOL)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collarops::BoundaryOperator;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn paper(band: usize) -> DiskProblem {
        DiskProblem::normal_derivative_pair(1, band).unwrap()
    }

    #[test]
    fn mode_matrices_of_the_example() {
        let p = paper(8);
        let m1 = mode_matrix(&p, 1).unwrap();
        assert_eq!(m1, DMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]));
        let det = m1[(0, 0)] * m1[(1, 1)] - m1[(0, 1)] * m1[(1, 0)];
        assert!((det - c(0.0, -1.0)).norm() < 1e-15);
        let m0 = mode_matrix(&p, 0).unwrap();
        assert_eq!(m0, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let sys = ModeSystem::new(&p, &RHSData::zero(&p), 0, RANK_TOL).unwrap();
        assert_eq!((sys.nullity, sys.corank), (1, 1));
        assert!(mode_matrix(&p, 9).is_err());
    }

    #[test]
    fn determinant_closed_form() {
        let p = paper(60);
        for k in -50i64..=50 {
            let m = mode_matrix(&p, k).unwrap();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let a = k.abs() as f64;
            let expected = -a * c(a - 1.0, k as f64);
            assert!((det - expected).norm() <= 1e-10 * expected.norm().max(1.0), "k = {k}");
        }
    }

    #[test]
    fn identity_boundary_operator_column() {
        let p = DiskProblem::new(
            vec![BoundaryOperator::identity(), BoundaryOperator::constant(c(3.0, 0.0))],
            vec![vec![BoundaryOperator::zero()], vec![BoundaryOperator::zero()]],
            vec![0, 0],
            vec![0],
            5,
        )
        .unwrap();
        for k in -5..=5 {
            let m = mode_matrix(&p, k).unwrap();
            assert_eq!(m[(0, 0)], c(1.0, 0.0));
            assert_eq!(m[(1, 0)], c(3.0, 0.0));
        }
    }

    #[test]
    fn particular_coefficients() {
        assert_eq!(particular_coefficient(0, 0), 0.25);
        // Laplace(rho^3 e^{i theta}) = 8 rho e^{i theta}
        assert_eq!(particular_coefficient(1, 0), 1.0 / 8.0);
        assert_eq!(particular_coefficient(-1, 0), 1.0 / 8.0);
        for k in -4i64..=4 {
            for j in 0..4u32 {
                let n = k.abs() + 2 * j as i64 + 2;
                let field = RadialField::new([(k, n, C64::new(particular_coefficient(k, j), 0.0))]).unwrap();
                let lap: Vec<_> = field.laplacian().terms().collect();
                assert_eq!(lap.len(), 1);
                assert_eq!((lap[0].0, lap[0].1), (k, n - 2));
                assert!((lap[0].2 - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        for k in 0..6 {
            for j in 0..6 {
                assert!(particular_coefficient(k, j + 1) < particular_coefficient(k, j));
                assert!(particular_coefficient(k + 1, j) < particular_coefficient(k, j));
            }
        }
    }

    #[test]
    fn mode_one_solve() {
        let p = paper(4);
        let rhs = RHSData::new(&p, vec![], vec![ModeSequence::single(1, c(1.0, 0.0)), ModeSequence::zeros(4)]).unwrap();
        let sol = solve(&p, &rhs).unwrap();
        let sol = sol.solution().unwrap();
        assert!((sol.harmonic.get(1) - c(-1.0, 0.0)).norm() < 1e-14);
        assert_eq!(sol.harmonic.support().count(), 1);
        assert!(sol.v[0].max_abs() < 1e-14);
        assert!(sol.max_residual <= 1e-10);
    }

    #[test]
    fn mean_of_second_datum_is_incompatible() {
        let p = paper(4);
        let rhs = RHSData::new(&p, vec![], vec![ModeSequence::zeros(4), ModeSequence::single(0, c(1.0, 0.0))]).unwrap();
        match solve(&p, &rhs).unwrap() {
            SolveOutcome::Unsolvable { violations } => {
                assert_eq!(violations.len(), 1);
                assert_eq!(violations[0].k, 0);
                assert_eq!(violations[0].row, 2);
                assert!((violations[0].pairings[0].norm() - 1.0).abs() < 1e-14);
            }
            other => panic!("expected unsolvable, got {other:?}"),
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = paper(4);
        let sol = solve(&p, &RHSData::zero(&p)).unwrap();
        let sol = sol.solution().unwrap();
        assert_eq!(sol.harmonic.max_abs(), 0.0);
        assert_eq!(sol.v[0].max_abs(), 0.0);
    }

    #[test]
    fn interior_data_is_solved_exactly() {
        let p = paper(6);
        let f = vec![FTerm { k: 0, j: 0, coeff: c(1.0, 0.0) }, FTerm { k: 2, j: 1, coeff: c(0.5, -1.0) }];
        let g = vec![ModeSequence::from_modes(6, [(3, c(1.0, 2.0)), (-1, c(0.3, 0.0))]).unwrap(), ModeSequence::zeros(6)];
        let rhs = RHSData::new(&p, f, g).unwrap();
        let table = ModeTable::new(&p, RANK_TOL).unwrap();
        let projected = table.project_onto_range(&rhs).unwrap();
        let sol = table.solve(&projected).unwrap();
        let sol = sol.solution().unwrap();
        assert!(sol.laplacian_error(&projected) <= 1e-12);
        assert!(sol.max_residual <= 1e-10);
        assert!(!table.solve(&rhs).unwrap().is_solved());
    }

    #[test]
    fn rhs_validation() {
        let p = paper(3);
        assert!(RHSData::new(&p, vec![], vec![ModeSequence::zeros(3)]).is_err());
        assert!(RHSData::new(&p, vec![], vec![ModeSequence::single(4, c(1.0, 0.0)), ModeSequence::zeros(3)]).is_err());
        assert!(RHSData::new(&p, vec![FTerm { k: 5, j: 0, coeff: c(1.0, 0.0) }], vec![ModeSequence::zeros(3); 2]).is_err());
    }
}
