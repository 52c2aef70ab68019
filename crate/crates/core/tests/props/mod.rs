//! Randomized invariant checks shared by the property suites and the
//! acceptance harness.
#![allow(dead_code)]

use lawruk_core::collarops::{
    adjoint_problem, build_green_tableau, green_identity_sides, AdjointData, BoundaryOperator, DirectData, RadialField,
};
use lawruk_core::disksolver::{
    envelope_rhs, fredholm_report_from, kernel_residual, random_range_rhs, verify_solvability_criterion, DiskProblem,
    ModeTable, RHSData, SolveOutcome, RANK_TOL,
};
use lawruk_core::ellipticity::{check_covering, roots_with_multiplicity, PointSymbolProblem, COVERING_TOL, ROOT_TOL};
use lawruk_core::hormander::{hnorm, interpolation_norm, make_psi, HormanderSpec, InterpolationParameter, ModeSequence};
use lawruk_core::numeric::C64;
use lawruk_core::slowvar::LogPowerPhi;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), TestCaseError>;

pub const CASES: u32 = 128;

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

pub fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

pub fn nonzero_complex() -> impl Strategy<Value = C64> {
    (0.1f64..10.0, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| C64::from_polar(r, a))
}

pub fn phi_choice() -> impl Strategy<Value = LogPowerPhi> {
    prop_oneof![
        Just(vec![]),
        Just(vec![1.0]),
        Just(vec![0.5, 0.7]),
        Just(vec![2.0, -1.0]),
        prop::collection::vec(-3.0f64..3.0, 1..3),
    ]
    .prop_map(|e| LogPowerPhi::new(e).unwrap())
}

pub fn sequence(band: usize) -> impl Strategy<Value = ModeSequence> {
    let b = band as i64;
    prop::collection::vec((-b..=b, complex(1.0)), 1..24)
        .prop_map(move |modes| ModeSequence::from_modes(band, modes).unwrap())
}

/// Random constant-coefficient operator with `ord <= max_ord`; `full` forces
/// a term of order exactly `max_ord`.
pub fn operator(max_ord: u32, tangential: bool, full: bool) -> impl Strategy<Value = BoundaryOperator> {
    prop::collection::vec((0..=max_ord, 0..=max_ord, nonzero_complex()), 1..5).prop_flat_map(move |terms| {
        (Just(terms), 0..=max_ord, nonzero_complex()).prop_map(move |(terms, split, lead)| {
            let mut ts: Vec<(u32, u32, C64)> = terms
                .into_iter()
                .map(|(a, b, c)| if tangential { (0, b, c) } else { (a, b, c) })
                .filter(|(a, b, _)| a + b <= max_ord)
                .collect();
            if full {
                let a = if tangential { 0 } else { split };
                ts.push((a, max_ord - a, lead));
            }
            BoundaryOperator::from_d_terms(ts)
        })
    })
}

fn tangential_or_zero(bound: i64) -> BoxedStrategy<BoundaryOperator> {
    if bound < 0 {
        Just(BoundaryOperator::zero()).boxed()
    } else {
        prop_oneof![Just(BoundaryOperator::zero()), operator(bound as u32, true, false)].boxed()
    }
}

/// Problem with `q = 1`, `kappa <= 3`, `m <= 6` satisfying the standing
/// assumptions.
pub fn disk_problem() -> impl Strategy<Value = DiskProblem> {
    (1usize..=3, 2i64..=6).prop_flat_map(|(kappa, m)| {
        let rows = 1 + kappa;
        (
            Just(m),
            prop::collection::vec(0..=m, rows),
            0..rows,
            prop::collection::vec(-m..=2, kappa),
        )
            .prop_flat_map(move |(m, mut orders, top, r)| {
                orders[top] = m;
                let b: Vec<_> = orders
                    .iter()
                    .map(|&mj| operator(mj as u32, false, mj == m).boxed())
                    .collect();
                let c: Vec<Vec<_>> = orders
                    .iter()
                    .map(|&mj| r.iter().map(|&rk| tangential_or_zero(mj + rk)).collect())
                    .collect();
                (Just(orders), Just(r), b, c)
            })
            .prop_map(|(orders, r, b, c)| {
                let p = DiskProblem::new(b, c, orders, r, 8).unwrap();
                p.check_standing_assumptions().unwrap();
                p
            })
    })
}

pub fn run<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

// Roots

/// Distinct roots at least 0.5 apart, `|Im| >= 0.3`, multiplicities 1..=3.
pub fn root_set() -> impl Strategy<Value = Vec<(C64, usize)>> {
    prop::collection::vec(((-3.0f64..3.0), (0.3f64..3.0), any::<bool>(), 1usize..=3), 1..5)
        .prop_map(|rs| {
            let mut out: Vec<(C64, usize)> = Vec::new();
            for (re, im, up, mult) in rs {
                let z = C64::new(re, if up { im } else { -im });
                if out.iter().all(|(w, _)| (z - w).norm() >= 0.5) {
                    out.push((z, mult));
                }
            }
            out
        })
}

pub fn poly_from_roots(roots: &[(C64, usize)], scale: C64) -> Vec<C64> {
    let mut p = vec![scale];
    for &(z, mult) in roots {
        for _ in 0..mult {
            let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= z * c;
            }
            p = next;
        }
    }
    p
}

pub fn check_root_split(roots: Vec<(C64, usize)>, scale: C64) -> Check {
    let poly = poly_from_roots(&roots, scale);
    let degree = poly.len() - 1;
    let split = roots_with_multiplicity(&poly, ROOT_TOL).map_err(|e| fail(e.to_string()))?;
    let total = split.plus_multiplicity() + split.minus_multiplicity();
    prop_assert_eq!(total, degree);
    let plus: usize = roots.iter().filter(|(z, _)| z.im > 0.0).map(|(_, m)| m).sum();
    prop_assert_eq!(split.plus_multiplicity(), plus);
    Ok(())
}

// Covering

/// A point problem with `q = 1`: `a = s (zeta - z+)(zeta - z-)`, random
/// boundary polynomials and `C` entries. A quarter of the cases have a zero
/// first row, so the verdict is negative.
pub fn point_problem() -> impl Strategy<Value = PointSymbolProblem> {
    (1usize..=2).prop_flat_map(|kappa| {
        let rows = 1 + kappa;
        (
            complex(2.0),
            0.2f64..3.0,
            complex(2.0),
            0.2f64..3.0,
            nonzero_complex(),
            prop::collection::vec(prop::collection::vec(complex(2.0), 1..4), rows),
            prop::collection::vec(prop::collection::vec(complex(2.0), kappa), rows),
            0u8..4,
        )
            .prop_map(move |(zp, ip, zm, im, s, mut b, mut c, degenerate)| {
                if degenerate == 0 {
                    b[0].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    c[0].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                }
                let a = poly_from_roots(&[(C64::new(zp.re, ip), 1), (C64::new(zm.re, -im), 1)], s);
                PointSymbolProblem::new(a, b, c, 1, kappa).unwrap()
            })
    })
}

pub fn check_covering_scaling(problem: PointSymbolProblem, factor: C64, row: usize) -> Check {
    let base = check_covering(&problem, ROOT_TOL, COVERING_TOL).map_err(|e| fail(e.to_string()))?;
    // Verdicts within rounding of the threshold are not meaningful.
    prop_assume!((base.normalized_det / COVERING_TOL).ln().abs() > 1.0);
    let row = row % problem.rows();
    let scaled_a = check_covering(&problem.clone().with_scaled_interior(factor), ROOT_TOL, COVERING_TOL)
        .map_err(|e| fail(e.to_string()))?;
    let scaled_row = check_covering(&problem.with_scaled_row(row, factor), ROOT_TOL, COVERING_TOL)
        .map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(base.is_covering, scaled_a.is_covering);
    prop_assert_eq!(base.is_covering, scaled_row.is_covering);
    let rel = (scaled_row.normalized_det - base.normalized_det).abs() / base.normalized_det.max(1e-300);
    prop_assert!(rel < 1e-9, "row scaling changed the normalized determinant by {rel}");
    Ok(())
}

// Operators

pub fn check_adjoint_involution(op: BoundaryOperator) -> Check {
    let twice = op
        .formal_adjoint_tangential()
        .and_then(|a| a.formal_adjoint_tangential())
        .map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(twice, op);
    Ok(())
}

pub fn check_reassembly(op: BoundaryOperator, extra: u32) -> Check {
    let m = op.order().unwrap_or(0) + extra;
    let parts = op.nu_decompose(m).map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(parts.len(), m as usize + 1);
    prop_assert!(parts.iter().all(|q| q.is_tangential()));
    prop_assert_eq!(BoundaryOperator::reassemble(&parts), op);
    Ok(())
}

pub fn check_tableau_bounds(problem: DiskProblem) -> Check {
    let tableau = build_green_tableau(&problem).map_err(|e| fail(e.to_string()))?;
    tableau.validate().map_err(|e| fail(e.to_string()))?;
    let adjoint = adjoint_problem(&tableau).map_err(|e| fail(e.to_string()))?;
    prop_assert!(!adjoint.lines().is_empty());
    Ok(())
}

fn polynomial_field(terms: &[(i64, i64, C64)]) -> RadialField {
    RadialField::new(terms.iter().map(|&(k, i, c)| (k, k.abs() + 2 * i, c))).unwrap()
}

pub fn field_terms() -> impl Strategy<Value = Vec<(i64, i64, C64)>> {
    prop::collection::vec((-5i64..=5, 0i64..=2, complex(1.0)), 1..6)
}

/// Harmonic `u` and `omega` plus random boundary data.
pub fn check_green_identity(problem: DiskProblem, u: Vec<(i64, i64, C64)>, omega: Vec<(i64, i64, C64)>, seed: u64) -> Check {
    check_green_with(problem, u, omega, seed, true)
}

pub fn check_green_with(
    problem: DiskProblem,
    u: Vec<(i64, i64, C64)>,
    omega: Vec<(i64, i64, C64)>,
    seed: u64,
    harmonic: bool,
) -> Check {
    let tableau = build_green_tableau(&problem).map_err(|e| fail(e.to_string()))?;
    let flatten = |t: &[(i64, i64, C64)]| -> Vec<(i64, i64, C64)> {
        if harmonic { t.iter().map(|&(k, _, c)| (k, 0, c)).collect() } else { t.to_vec() }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq = || {
        ModeSequence::from_modes(
            5,
            (-5..=5).map(|k| (k, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))),
        )
        .unwrap()
    };
    let direct = DirectData { u: polynomial_field(&flatten(&u)), v: (0..problem.kappa()).map(|_| seq()).collect() };
    let adjoint = AdjointData {
        omega: polynomial_field(&flatten(&omega)),
        w: (0..tableau.r.len()).map(|_| seq()).collect(),
        h: (0..problem.rows()).map(|_| seq()).collect(),
    };
    if harmonic {
        let lap = direct.u.laplacian().inner(&adjoint.omega);
        prop_assert!(lap.norm() == 0.0);
    }
    let (lhs, rhs) = green_identity_sides(&problem, &tableau, &direct, &adjoint).map_err(|e| fail(e.to_string()))?;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    prop_assert!((lhs - rhs).norm() <= 1e-10 * scale, "lhs {lhs} rhs {rhs}");
    Ok(())
}

// Norms

pub fn check_norm_monotone(seq: ModeSequence, s: f64, ds: f64, phi: LogPowerPhi) -> Check {
    let lo = hnorm(&seq, &HormanderSpec::new(s, phi.clone()));
    let hi = hnorm(&seq, &HormanderSpec::new(s + ds, phi));
    prop_assert!(lo <= hi * (1.0 + 1e-14), "{lo} > {hi}");
    Ok(())
}

pub fn check_norm_axioms(a: ModeSequence, b: ModeSequence, c: C64, s: f64, phi: LogPowerPhi) -> Check {
    let spec = HormanderSpec::new(s, phi);
    let na = hnorm(&a, &spec);
    let nb = hnorm(&b, &spec);
    let scaled = hnorm(&a.scale(c), &spec);
    prop_assert!((scaled - c.norm() * na).abs() <= 1e-13 * scaled.max(1e-300));
    prop_assert!(hnorm(&a.add(&b), &spec) <= (na + nb) * (1.0 + 1e-14));
    let reflected = hnorm(&a.reflected(), &spec);
    prop_assert!((reflected - na).abs() <= 1e-14 * na);
    Ok(())
}

pub fn check_interpolation_identity(seq: ModeSequence, s: f64, eps: f64, phi: LogPowerPhi) -> Check {
    let psi = make_psi(&InterpolationParameter::new(eps, phi.clone()).unwrap());
    let got = interpolation_norm(&seq, s - eps, s + eps, &psi).map_err(|e| fail(e.to_string()))?;
    let want = hnorm(&seq, &HormanderSpec::new(s, phi));
    let rel = (got - want).abs() / want;
    prop_assert!(rel <= 1e-13, "relative error {rel}");
    Ok(())
}

pub fn interpolation_case() -> impl Strategy<Value = (ModeSequence, f64, f64, LogPowerPhi)> {
    (
        sequence(256),
        prop::sample::select(vec![-2.0, 0.0, 3.5, 7.0]),
        prop::sample::select(vec![0.25, 1.0, 2.0]),
        prop::sample::select(vec![vec![], vec![1.0], vec![0.5, 0.7], vec![2.0, -1.0]])
            .prop_map(|e| LogPowerPhi::new(e).unwrap()),
    )
}

// Disk solver

fn table(p: u32, band: usize) -> ModeTable {
    ModeTable::new(&DiskProblem::normal_derivative_pair(p, band).unwrap(), RANK_TOL).unwrap()
}

pub fn check_exactness(p: u32, band: usize, data_band: usize, seed: u64) -> Check {
    let table = table(p, band);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rhs = random_range_rhs(&table, data_band, &mut rng).map_err(|e| fail(e.to_string()))?;
    match table.solve(&rhs).map_err(|e| fail(e.to_string()))? {
        SolveOutcome::Solved(sol) => {
            prop_assert!(sol.max_residual <= 1e-10, "residual {}", sol.max_residual);
            prop_assert!(sol.laplacian_error(&rhs) <= 1e-10);
            Ok(())
        }
        SolveOutcome::Unsolvable { violations } => Err(fail(format!("projected data unsolvable: {violations:?}"))),
    }
}

pub fn check_kernel(p: u32, band: usize) -> Check {
    let problem = DiskProblem::normal_derivative_pair(p, band).unwrap();
    let report = fredholm_report_from(&ModeTable::new(&problem, RANK_TOL).unwrap());
    let residual = kernel_residual(&problem, &report);
    prop_assert!(residual <= 1e-10, "kernel residual {residual}");
    prop_assert_eq!(report.index, 0);
    prop_assert_eq!(report.dim_n, report.kernel_basis.len());
    if p == 1 {
        prop_assert_eq!((report.dim_n, report.dim_nstar), (1, 1));
    }
    Ok(())
}

/// Half the cases are projected onto the range, half get a cokernel
/// component of size at least 0.1.
pub fn check_solvability(band: usize, seed: u64, perturb: bool) -> Check {
    let table = table(1, band);
    let report = fredholm_report_from(&table);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rhs: RHSData = random_range_rhs(&table, band.min(16), &mut rng).map_err(|e| fail(e.to_string()))?;
    if perturb {
        let z = &report.cokernel_basis[0];
        let amount = C64::from_polar(rng.random_range(0.1..2.0), rng.random_range(0.0..std::f64::consts::TAU));
        for (j, g) in rhs.g.iter_mut().enumerate() {
            let cur = g.get(z.k);
            g.set(z.k, cur + z.vector[j] * amount).unwrap();
        }
    }
    let solved = table.solve(&rhs).map_err(|e| fail(e.to_string()))?.is_solved();
    prop_assert_eq!(solved, !perturb);
    prop_assert!(verify_solvability_criterion(&table, &rhs, &report).map_err(|e| fail(e.to_string()))?);
    Ok(())
}

pub fn check_regularity_shift(s: f64, phi: LogPowerPhi, band: usize) -> Check {
    let table = table(1, band);
    let spec = HormanderSpec::new(s, phi);
    let rhs = envelope_rhs(&table, &spec).map_err(|e| fail(e.to_string()))?;
    let verdict =
        lawruk_core::disksolver::regularity_check(&table, &rhs, &spec).map_err(|e| fail(e.to_string()))?;
    let shift = verdict.shift.ok_or_else(|| fail("no shift".into()))?;
    prop_assert!((shift + 1.0).abs() <= 0.1, "shift {shift}");
    prop_assert!(verdict.all_match());
    Ok(())
}
