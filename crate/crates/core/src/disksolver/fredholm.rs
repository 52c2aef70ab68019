use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collarops::RadialField;
use crate::error::{Error, Result};
use crate::hormander::{HormanderSpec, ModeSequence};
use crate::numeric::{fit_slope, C64};

use super::modes::{apply_boundary, ModeTable, RHSData, SOLVE_TOL};
use super::norms::{dnorm, enorm};
use super::DiskProblem;

/// Default floor for the normalized determinant on the top of the band.
pub const TAIL_FLOOR: f64 = 1e-6;
pub const K_INSUFFICIENT: &str = "K-insufficient";

/// A vector of mode `k`, ordered as `(c_k, v_{1,k}, ..)` for kernel
/// elements and by boundary rows for cokernel elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVector {
    pub k: i64,
    pub vector: Vec<C64>,
}

impl ModeVector {
    fn of(k: i64, v: &DVector<C64>) -> Self {
        Self { k, vector: v.iter().copied().collect() }
    }

    pub fn as_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.vector)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmReport {
    pub band: usize,
    #[serde(rename = "rankTol")]
    pub rank_tol: f64,
    #[serde(rename = "dimN")]
    pub dim_n: usize,
    #[serde(rename = "dimNstar")]
    pub dim_nstar: usize,
    pub index: i64,
    #[serde(rename = "kernelModes")]
    pub kernel_basis: Vec<ModeVector>,
    #[serde(rename = "cokernelModes")]
    pub cokernel_basis: Vec<ModeVector>,
    /// Normalized `|det|` of every mode matrix, ascending `k`.
    #[serde(rename = "detTrace")]
    pub det_trace: Vec<(i64, f64)>,
    /// Smallest normalized `|det|` on the top tenth of the band.
    #[serde(rename = "tailMin")]
    pub tail_min: f64,
    pub flags: Vec<String>,
}

impl FredholmReport {
    pub fn k_insufficient(&self) -> bool {
        self.flags.iter().any(|f| f == K_INSUFFICIENT)
    }
}

/// Kernel, cokernel and index from the per-mode ranks, with the tail check.
pub fn fredholm_report_from(table: &ModeTable) -> FredholmReport {
    let mut kernel_basis = Vec::new();
    let mut cokernel_basis = Vec::new();
    let mut det_trace = Vec::new();
    for e in table.entries() {
        kernel_basis.extend(e.analysis.right_null.iter().map(|x| ModeVector::of(e.k, x)));
        cokernel_basis.extend(e.analysis.left_null.iter().map(|z| ModeVector::of(e.k, z)));
        det_trace.push((e.k, e.analysis.normalized_det()));
    }
    let dim_n = kernel_basis.len();
    let dim_nstar = cokernel_basis.len();
    let (tail_min, tail_ok) = tail_check(table.band(), &det_trace);
    let flags = if tail_ok { Vec::new() } else { vec![K_INSUFFICIENT.to_string()] };
    FredholmReport {
        band: table.band(),
        rank_tol: table.rank_tol(),
        dim_n,
        dim_nstar,
        index: dim_n as i64 - dim_nstar as i64,
        kernel_basis,
        cokernel_basis,
        det_trace,
        tail_min,
        flags,
    }
}

pub fn fredholm_report(problem: &DiskProblem, band: usize, rank_tol: f64) -> Result<FredholmReport> {
    let table = ModeTable::new(&problem.clone().with_band(band), rank_tol)?;
    Ok(fredholm_report_from(&table))
}

/// Floor on the top tenth of `|k|` and a trend that does not fall by more
/// than 5% across that window.
fn tail_check(band: usize, trace: &[(i64, f64)]) -> (f64, bool) {
    let lo = (band as f64 * 0.9).floor() as i64;
    let tail: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(k, _)| k.abs() > lo || k.unsigned_abs() as usize == band)
        .map(|&(k, d)| (k.abs() as f64, d))
        .collect();
    let min = tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    if !(min > TAIL_FLOOR) {
        return (min, false);
    }
    let xs: Vec<f64> = tail.iter().map(|t| t.0).collect();
    let ys: Vec<f64> = tail.iter().map(|t| t.1).collect();
    let distinct = xs.iter().any(|&x| x != xs[0]);
    if !distinct {
        return (min, true);
    }
    let slope = fit_slope(&xs, &ys);
    let width = xs.iter().copied().fold(f64::MIN, f64::max) - xs.iter().copied().fold(f64::MAX, f64::min);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    (min, slope * width >= -0.05 * mean)
}

/// Per-mode rows `z^H b_k` for every cokernel vector, relative to `|b_k|`.
pub fn cokernel_pairings(table: &ModeTable, rhs: &RHSData, report: &FredholmReport) -> Result<Vec<(i64, f64)>> {
    if report.band != table.band() {
        return Err(Error::Precondition(format!(
            "report band {} differs from the problem band {}",
            report.band,
            table.band()
        )));
    }
    let mut out: Vec<(i64, f64)> = Vec::new();
    for z in &report.cokernel_basis {
        let b = rhs.mode_vector(table.problem(), z.k);
        let bn = b.norm();
        let p = if bn == 0.0 { 0.0 } else { z.as_dvector().dotc(&b).norm() / bn };
        match out.last_mut() {
            Some(last) if last.0 == z.k => last.1 = last.1.hypot(p),
            _ => out.push((z.k, p)),
        }
    }
    Ok(out)
}

/// Orthogonality of the data to every cokernel vector.
pub fn is_orthogonal_to_cokernel(table: &ModeTable, rhs: &RHSData, report: &FredholmReport) -> Result<bool> {
    Ok(cokernel_pairings(table, rhs, report)?.iter().all(|&(_, p)| p <= SOLVE_TOL))
}

/// `true` iff solvability and cokernel orthogonality agree.
pub fn verify_solvability_criterion(table: &ModeTable, rhs: &RHSData, report: &FredholmReport) -> Result<bool> {
    let orthogonal = is_orthogonal_to_cokernel(table, rhs, report)?;
    let solved = table.solve(rhs)?.is_solved();
    Ok(solved == orthogonal)
}

/// `(u, v)` of a kernel vector.
pub fn kernel_element(problem: &DiskProblem, mv: &ModeVector) -> (RadialField, Vec<ModeSequence>) {
    let band = mv.k.unsigned_abs() as usize;
    let u = RadialField::harmonic(&ModeSequence::from_modes(band, [(mv.k, mv.vector[0])]).expect("in band"));
    let v = (0..problem.kappa())
        .map(|i| ModeSequence::from_modes(band, [(mv.k, mv.vector[1 + i])]).expect("in band"))
        .collect();
    (u, v)
}

/// Largest boundary residual over the reported kernel elements.
pub fn kernel_residual(problem: &DiskProblem, report: &FredholmReport) -> f64 {
    report
        .kernel_basis
        .iter()
        .map(|mv| {
            let (u, v) = kernel_element(problem, mv);
            let lap = u.laplacian().terms().map(|(_, _, c)| c.norm()).fold(0.0, f64::max);
            apply_boundary(problem, &u, &v).iter().map(|s| s.max_abs()).fold(lap, f64::max)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsomorphismRecord {
    pub dnorm: f64,
    pub enorm: f64,
    pub ratio: f64,
    /// Largest `|n^H x_k|` over kernel vectors `n`; zero up to rounding.
    pub kernel_component: f64,
}

/// Solves in the complement of the kernel and records `|solution|_D / |rhs|_E`.
pub fn isomorphism_probe(
    table: &ModeTable,
    rhs: &RHSData,
    report: &FredholmReport,
    spec: &HormanderSpec,
) -> Result<IsomorphismRecord> {
    if !is_orthogonal_to_cokernel(table, rhs, report)? {
        return Err(Error::Precondition("right-hand side is not orthogonal to the cokernel".into()));
    }
    let problem = table.problem();
    let solution = match table.solve(rhs)? {
        super::modes::SolveOutcome::Solved(s) => s,
        super::modes::SolveOutcome::Unsolvable { .. } => {
            return Err(Error::Consistency("orthogonal data did not solve".into()));
        }
    };
    let mut kernel_component: f64 = 0.0;
    for n in &report.kernel_basis {
        let x = std::iter::once(solution.harmonic.get(n.k)).chain(solution.v.iter().map(|s| s.get(n.k)));
        let dot: C64 = n.vector.iter().zip(x).map(|(a, b)| a.conj() * b).sum();
        kernel_component = kernel_component.max(dot.norm());
    }
    let d = dnorm(problem, &solution, spec)?;
    let e = enorm(problem, rhs, spec);
    let ratio = if e == 0.0 { if d == 0.0 { 0.0 } else { f64::INFINITY } } else { d / e };
    Ok(IsomorphismRecord { dnorm: d, enorm: e, ratio, kernel_component })
}

/// Random data on `|k| <= data_band`, uniform complex coefficients, with
/// the cokernel components removed.
pub fn random_range_rhs(table: &ModeTable, data_band: usize, rng: &mut impl Rng) -> Result<RHSData> {
    let data_band = data_band.min(table.band());
    let g = (0..table.problem().rows())
        .map(|_| {
            ModeSequence::from_modes(
                table.band(),
                (-(data_band as i64)..=data_band as i64)
                    .map(|k| (k, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    table.project_onto_range(&RHSData { f_terms: Vec::new(), g })
}

/// Smallest and largest isomorphism ratio over random data.
pub fn isomorphism_constants(
    table: &ModeTable,
    report: &FredholmReport,
    spec: &HormanderSpec,
    data_band: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..trials {
        let rhs = random_range_rhs(table, data_band, &mut rng)?;
        let r = isomorphism_probe(table, &rhs, report, spec)?.ratio;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
