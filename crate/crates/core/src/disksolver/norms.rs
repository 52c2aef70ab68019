//! Surrogate norms of `D^{s,phi}` and `E^{s-2,phi}` on mode expansions.
//!
//! Interior parts are weighted through their boundary traces: a term of mode
//! `k` carries `<k>^{2s-1} phi(<k>)^2`, exact up to equivalence for harmonic
//! functions on the disk. Interior data `f` uses the same rule at order `s - 2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hormander::{hnorm_sq, HormanderSpec, ModeSequence};
use crate::numeric::{KahanSum, C64};

use super::modes::{mode_matrix, RHSData, Solution};
use super::DiskProblem;

fn shifted(spec: &HormanderSpec, shift: f64) -> HormanderSpec {
    HormanderSpec::new(spec.s + shift, spec.phi.clone())
}

fn check_order(problem: &DiskProblem, s: f64) -> Result<()> {
    let bound = problem.m() as f64 + 0.5;
    if !(s > bound) {
        return Err(Error::Domain(format!("s = {s} must exceed m + 1/2 = {bound}")));
    }
    Ok(())
}

/// Squared norm of `(u, v)` without the order check.
pub(crate) fn dnorm_sq_parts(
    problem: &DiskProblem,
    harmonic: &ModeSequence,
    profiles: impl Iterator<Item = (i64, C64)>,
    v: &[ModeSequence],
    spec: &HormanderSpec,
) -> f64 {
    let trace = shifted(spec, -0.5);
    let mut acc = KahanSum::default();
    acc.add(hnorm_sq(harmonic, &trace));
    for (k, c) in profiles {
        acc.add(trace.weight_sq(k) * c.norm_sqr());
    }
    for (vk, &r) in v.iter().zip(problem.r_orders()) {
        acc.add(hnorm_sq(vk, &shifted(spec, r as f64 - 0.5)));
    }
    acc.value()
}

/// `|(u, v)|` in `D^{s,phi}`; needs `s > m + 1/2`.
pub fn dnorm(problem: &DiskProblem, solution: &Solution, spec: &HormanderSpec) -> Result<f64> {
    check_order(problem, spec.s)?;
    let profiles = solution.particular.iter().map(|p| (p.k, p.coeff));
    Ok(dnorm_sq_parts(problem, &solution.harmonic, profiles, &solution.v, spec).sqrt())
}

/// `|(f, g)|` in `E^{s-2,phi}`.
pub fn enorm(problem: &DiskProblem, rhs: &RHSData, spec: &HormanderSpec) -> f64 {
    let interior = shifted(spec, -2.5);
    let mut acc = KahanSum::default();
    for t in &rhs.f_terms {
        acc.add(interior.weight_sq(t.k) * t.coeff.norm_sqr());
    }
    for (g, &m) in rhs.g.iter().zip(problem.m_orders()) {
        acc.add(hnorm_sq(g, &shifted(spec, -(m as f64) - 0.5)));
    }
    acc.value().sqrt()
}

/// `|(u,v)|_s / (|Lambda(u,v)|_E + |(u,v)|_{s-lambda})` for harmonic `u`.
pub fn apriori_ratio(
    problem: &DiskProblem,
    harmonic: &ModeSequence,
    v: &[ModeSequence],
    spec: &HormanderSpec,
    lambda: f64,
) -> Result<f64> {
    check_order(problem, spec.s)?;
    if v.len() != problem.kappa() {
        return Err(Error::Domain(format!("expected {} sequences v_k, got {}", problem.kappa(), v.len())));
    }
    let band = v.iter().map(|s| s.band()).fold(harmonic.band(), usize::max);
    let mut g = vec![ModeSequence::zeros(band); problem.rows()];
    for k in -(band as i64)..=band as i64 {
        let x: Vec<C64> = std::iter::once(harmonic.get(k)).chain(v.iter().map(|s| s.get(k))).collect();
        if x.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        let m = mode_matrix(&problem.clone().with_band(band), k)?;
        for (j, gj) in g.iter_mut().enumerate() {
            let val: C64 = (0..x.len()).map(|i| m[(j, i)] * x[i]).sum();
            gj.set(k, val)?;
        }
    }
    let top = dnorm_sq_parts(problem, harmonic, std::iter::empty(), v, spec).sqrt();
    let low = dnorm_sq_parts(problem, harmonic, std::iter::empty(), v, &shifted(spec, -lambda)).sqrt();
    let e = enorm(problem, &RHSData { f_terms: Vec::new(), g }, spec);
    Ok(if top == 0.0 { 0.0 } else { top / (e + low) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriRecord {
    pub band: usize,
    pub trials: usize,
    pub lambda: f64,
    pub sup_ratio: f64,
    pub mean_ratio: f64,
}

/// Per-mode weights and matrices for a band.
struct Weights {
    top: Vec<Vec<f64>>,
    low: Vec<Vec<f64>>,
    data: Vec<Vec<f64>>,
    matrices: Vec<nalgebra::DMatrix<C64>>,
}

impl Weights {
    fn new(problem: &DiskProblem, spec: &HormanderSpec, lambda: f64, band: usize) -> Result<Self> {
        let p = problem.clone().with_band(band);
        let unknown_orders: Vec<f64> =
            std::iter::once(-0.5).chain(problem.r_orders().iter().map(|&r| r as f64 - 0.5)).collect();
        let data_orders: Vec<f64> = problem.m_orders().iter().map(|&m| -(m as f64) - 0.5).collect();
        let per_mode = |orders: &[f64], base: &HormanderSpec| -> Vec<Vec<f64>> {
            (-(band as i64)..=band as i64)
                .map(|k| orders.iter().map(|&o| shifted(base, o).weight_sq(k)).collect())
                .collect()
        };
        Ok(Self {
            top: per_mode(&unknown_orders, spec),
            low: per_mode(&unknown_orders, &shifted(spec, -lambda)),
            data: per_mode(&data_orders, spec),
            matrices: (-(band as i64)..=band as i64).map(|k| mode_matrix(&p, k)).collect::<Result<_>>()?,
        })
    }
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Sample supremum of [`apriori_ratio`] over random band-limited `(u, v)`:
/// single modes, a few scattered modes, and full-band data with random decay.
/// Each unknown is scaled to unit weight in `D^{s,phi}` before mixing.
pub fn apriori_probe(
    problem: &DiskProblem,
    spec: &HormanderSpec,
    lambda: f64,
    trials: usize,
    band: usize,
    seed: u64,
) -> Result<AprioriRecord> {
    check_order(problem, spec.s)?;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if trials == 0 {
        return Err(Error::Domain("at least one trial is needed".into()));
    }
    let w = Weights::new(problem, spec, lambda, band)?;
    let n = problem.rows();
    let b = band as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    for t in 0..trials {
        let modes: Vec<i64> = match t % 3 {
            0 => vec![rng.random_range(-b..=b)],
            1 => (0..rng.random_range(2..=4)).map(|_| rng.random_range(-b..=b)).collect(),
            _ => (-b..=b).collect(),
        };
        let decay: f64 = if t % 3 == 2 { rng.random_range(-0.5..1.5) } else { 0.0 };
        let (mut top, mut low, mut data) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
        for &k in &modes {
            let idx = (k + b) as usize;
            let amp = crate::hormander::bracket(k).powf(-decay);
            let x: Vec<C64> = (0..n).map(|i| random_complex(&mut rng) * (amp / w.top[idx][i].sqrt())).collect();
            for i in 0..n {
                top.add(w.top[idx][i] * x[i].norm_sqr());
                low.add(w.low[idx][i] * x[i].norm_sqr());
            }
            let m = &w.matrices[idx];
            for j in 0..n {
                let g: C64 = (0..n).map(|i| m[(j, i)] * x[i]).sum();
                data.add(w.data[idx][j] * g.norm_sqr());
            }
        }
        let ratio = top.value().sqrt() / (data.value().sqrt() + low.value().sqrt());
        sup = sup.max(ratio);
        sum += ratio;
    }
    Ok(AprioriRecord { band, trials, lambda, sup_ratio: sup, mean_ratio: sum / trials as f64 })
}
