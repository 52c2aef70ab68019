use std::fmt::Write as _;

use lawruk_core::collarops::{adjoint_problem, build_green_tableau, BoundaryOperator};
use lawruk_core::disksolver::{
    apriori_probe, classify_smoothness, envelope_rhs, fredholm_report_from, regularity_check, DiskProblem,
    ModeTable, RhsEnvelope, SolveOutcome, RANK_TOL,
};
use lawruk_core::ellipticity::{check_lawruk_ellipticity, default_direction_grid, freeze_symbols, EllipticityTol};
use lawruk_core::hormander::HormanderSpec;
use lawruk_core::slowvar::LogPowerPhi;
use serde_json::{json, Value};

use crate::config::{interior_symbol, ConfigError, DiskConfig, ProblemConfig, RunConfig, DEFAULT_MODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
}

impl Verdict {
    fn of(ok: bool) -> Self {
        if ok {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
        }
    }
}

/// Human summary, JSON report and verdict of one command.
pub struct Outcome {
    pub summary: String,
    pub report: Value,
    pub verdict: Verdict,
}

type CmdResult = Result<Outcome, ConfigError>;

fn err(e: impl ToString) -> ConfigError {
    ConfigError(e.to_string())
}

fn to_json(v: &impl serde::Serialize) -> Result<Value, ConfigError> {
    serde_json::to_value(v).map_err(err)
}

fn disk(cfg: &ProblemConfig, command: &str) -> Result<DiskConfig, ConfigError> {
    match cfg {
        ProblemConfig::DiskProblem(d) => Ok(d.clone()),
        ProblemConfig::PointSymbol(_) => Err(ConfigError(format!("`{command}` needs kind = \"disk-problem\""))),
    }
}

fn phi_of(run: &RunConfig) -> Result<LogPowerPhi, ConfigError> {
    Ok(LogPowerPhi::new(run.phi.clone().unwrap_or_default())?)
}

fn modes_of(run: &RunConfig) -> usize {
    run.modes.unwrap_or(DEFAULT_MODES)
}

/// `s` defaults to `m + 2`.
fn spec_of(run: &RunConfig, problem: &DiskProblem) -> Result<HormanderSpec, ConfigError> {
    Ok(HormanderSpec::new(run.s.unwrap_or(problem.m() as f64 + 2.0), phi_of(run)?))
}

fn fmt_c(c: lawruk_core::numeric::C64) -> String {
    // Adding zero turns -0.0 into 0.0.
    format!("{:.6e}{:+.6e}i", c.re + 0.0, c.im + 0.0)
}

pub fn check_ellipticity(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let tol = EllipticityTol { det: run.tol.unwrap_or(lawruk_core::ellipticity::COVERING_TOL), ..Default::default() };
    let grid = default_direction_grid(2);
    let (interior, points) = match cfg {
        ProblemConfig::PointSymbol(p) => {
            let built = p.build()?;
            (built.interior, built.points)
        }
        ProblemConfig::DiskProblem(d) => {
            let problem = d.problem(0)?;
            let lap = BoundaryOperator::partial_nu(2).add(&BoundaryOperator::partial_gamma(2));
            let points = [1.0, -1.0]
                .iter()
                .map(|&tau| {
                    let p = freeze_symbols(&lap, 1, problem.b(), problem.c(), problem.m_orders(), problem.r_orders(), tau)?;
                    Ok((tau, p))
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            (Some(interior_symbol(&lap)?), points)
        }
    };
    let taus: Vec<f64> = points.iter().map(|p| p.0).collect();
    let lookup = |tau: f64| {
        let p = points.iter().find(|p| p.0 == tau).expect("tau from the list");
        Ok(p.1.clone())
    };
    let report = check_lawruk_ellipticity(interior.as_ref().map(|s| (s, grid.as_slice())), &taus, lookup, tol);
    let mut summary = String::new();
    if let Some(i) = report.interior_elliptic {
        let _ = writeln!(summary, "interior symbol: {}", if i { "elliptic" } else { "not elliptic" });
    }
    for e in &report.entries {
        match (&e.det, &e.message) {
            (Some((re, im)), _) => {
                let _ = writeln!(
                    summary,
                    "tau = {}: properly elliptic, covering det = {} (normalized {:.3e}){}",
                    e.tau,
                    fmt_c(lawruk_core::numeric::C64::new(*re, *im)),
                    e.normalized_det.unwrap_or(0.0),
                    if e.covering { "" } else { ", covering fails" }
                );
            }
            (None, Some(msg)) => {
                let _ = writeln!(summary, "tau = {}: {msg}", e.tau);
            }
            (None, None) => {}
        }
    }
    match &report.witness {
        None => summary.push_str("elliptic (Lawruk)\n"),
        Some(w) => {
            let at = w.tau.map(|t| format!(" at tau = {t}")).unwrap_or_default();
            let _ = writeln!(summary, "not elliptic: condition {} fails{at}: {}", w.condition, w.reason);
        }
    }
    Ok(Outcome { summary, report: to_json(&report)?, verdict: Verdict::of(report.elliptic) })
}

pub fn adjoint(cfg: &ProblemConfig) -> CmdResult {
    let d = disk(cfg, "adjoint")?;
    let problem = d.problem(0)?;
    let tableau = build_green_tableau(&problem)?;
    let adj = adjoint_problem(&tableau)?;
    let mut summary = String::new();
    for line in adj.lines() {
        let _ = writeln!(summary, "{line}");
    }
    Ok(Outcome { summary, report: to_json(&adj)?, verdict: Verdict::Positive })
}

pub fn solve(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let d = disk(cfg, "solve")?;
    let problem = d.problem(modes_of(run))?;
    let rhs = d.rhs(&problem)?.ok_or_else(|| ConfigError("`solve` needs an [rhs] table".into()))?;
    let table = ModeTable::new(&problem, run.tol.unwrap_or(RANK_TOL))?;
    let outcome = table.solve(&rhs)?;
    let mut summary = String::new();
    match &outcome {
        SolveOutcome::Solved(s) => {
            let _ = writeln!(summary, "solved: max boundary residual {:.3e}", s.max_residual);
            for (k, c) in s.harmonic.support() {
                let _ = writeln!(summary, "  c_{k} = {}", fmt_c(c));
            }
            for (i, v) in s.v.iter().enumerate() {
                for (k, c) in v.support() {
                    let _ = writeln!(summary, "  v_{},{k} = {}", i + 1, fmt_c(c));
                }
            }
            for p in &s.particular {
                let _ = writeln!(summary, "  particular: {} rho^{} e^(i{}theta)", fmt_c(p.coeff), p.n, p.k);
            }
        }
        SolveOutcome::Unsolvable { violations } => {
            summary.push_str("unsolvable: compatibility conditions violated\n");
            for v in violations {
                let _ = writeln!(
                    summary,
                    "  mode {}: row {} (relative residual {:.3e})",
                    v.k, v.row, v.relative_residual
                );
            }
        }
    }
    Ok(Outcome { summary, report: to_json(&outcome)?, verdict: Verdict::of(outcome.is_solved()) })
}

pub fn fredholm(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let d = disk(cfg, "fredholm")?;
    let problem = d.problem(modes_of(run))?;
    let table = ModeTable::new(&problem, run.tol.unwrap_or(RANK_TOL))?;
    let report = fredholm_report_from(&table);
    let mut summary = format!("dimN={} dimNstar={} index={}\n", report.dim_n, report.dim_nstar, report.index);
    for mv in &report.kernel_basis {
        let _ = writeln!(summary, "  kernel: mode {} [{}]", mv.k, mv.vector.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(", "));
    }
    for mv in &report.cokernel_basis {
        let _ = writeln!(summary, "  cokernel: mode {} [{}]", mv.k, mv.vector.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(", "));
    }
    let _ = writeln!(summary, "K = {}, tail min normalized |det| = {:.3e}", report.band, report.tail_min);
    for f in &report.flags {
        let _ = writeln!(summary, "flag: {f}");
    }
    Ok(Outcome { summary, verdict: Verdict::of(!report.k_insufficient()), report: to_json(&report)? })
}

pub fn apriori(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let d = disk(cfg, "apriori")?;
    let problem = d.problem(0)?;
    let spec = spec_of(run, &problem)?;
    let lambda = run.lambda.unwrap_or(1.0);
    let rec = apriori_probe(&problem, &spec, lambda, run.trials.unwrap_or(1000), modes_of(run), run.seed.unwrap_or(1))?;
    let summary = format!(
        "a priori constant (s = {}, lambda = {}, K = {}, {} trials): sup {:.6e}, mean {:.6e}\n",
        spec.s, lambda, rec.band, rec.trials, rec.sup_ratio, rec.mean_ratio
    );
    Ok(Outcome { summary, verdict: Verdict::of(rec.sup_ratio.is_finite()), report: to_json(&rec)? })
}

pub fn regularity(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let d = disk(cfg, "regularity")?;
    let problem = d.problem(modes_of(run))?;
    let spec = spec_of(run, &problem)?;
    let table = ModeTable::new(&problem, run.tol.unwrap_or(RANK_TOL))?;
    let rhs = match d.rhs(&problem)? {
        Some(r) => r,
        None => envelope_rhs(&table, &spec)?,
    };
    let v = regularity_check(&table, &rhs, &spec)?;
    let mut summary = String::new();
    if v.trivial {
        let _ = writeln!(summary, "trivial envelope: solution supported on the data modes: {}", v.passed);
    } else {
        let _ = writeln!(summary, "fit window k in [{}, {}]", v.window.0, v.window.1);
        for f in v.data_fits.iter().chain(&v.solution_fits) {
            let _ = writeln!(
                summary,
                "  {}: fitted exponent {:.4}, predicted {:.4}, phi factor spread {:.3}",
                f.component, f.fitted, f.predicted, f.phi_factor_spread
            );
        }
        if let Some(s) = v.shift {
            let _ = writeln!(summary, "  u minus g_1 exponent: {s:.4}");
        }
        let _ = writeln!(summary, "{}", if v.passed { "regularity envelope holds" } else { "regularity envelope fails" });
    }
    Ok(Outcome { summary, verdict: Verdict::of(v.passed), report: to_json(&v)? })
}

pub fn smoothness(cfg: &ProblemConfig, run: &RunConfig) -> CmdResult {
    let d = disk(cfg, "smoothness")?;
    let problem = d.problem(modes_of(run))?;
    let envelope = match (&d.envelope, &d.rhs) {
        (Some(e), _) => e.clone(),
        (None, Some(_)) => RhsEnvelope::BandLimited,
        (None, None) => return Err(ConfigError("`smoothness` needs an [envelope] or [rhs] table".into())),
    };
    let level = run.level.unwrap_or(problem.m());
    let table = ModeTable::new(&problem, run.tol.unwrap_or(RANK_TOL))?;
    let v = classify_smoothness(&table, &envelope, level, &phi_of(run)?)?;
    let mut summary = String::new();
    let mut line = |c: &lawruk_core::disksolver::ComponentVerdict| {
        let _ = writeln!(
            summary,
            "  {} in C^{}: {} ({})",
            c.component,
            c.level,
            if c.continuous { "yes" } else { "not established" },
            c.reason
        );
    };
    v.components.iter().for_each(&mut line);
    v.classical.iter().for_each(&mut line);
    let _ = writeln!(summary, "classical solution: {}", if v.is_classical { "yes" } else { "not established" });
    let ok = v.components.iter().all(|c| c.continuous);
    Ok(Outcome { summary, verdict: Verdict::of(ok), report: to_json(&v)? })
}

pub fn embedding(run: &RunConfig) -> CmdResult {
    let phi = phi_of(run)?;
    let finite = phi.embedding_integral_is_finite();
    let i30 = phi.embedding_integral_partial(1e30)?;
    let i60 = phi.embedding_integral_partial(1e60)?;
    let growth = (i60 - i30) / i30;
    let summary = format!(
        "phi exponents {:?}: int dt/(t phi^2) is {}\n  partial integral to 1e30: {:.6e}\n  partial integral to 1e60: {:.6e} (relative growth {:.3e})\n",
        phi.exponents(),
        if finite { "finite" } else { "infinite" },
        i30,
        i60,
        growth
    );
    let report = json!({
        "phi": phi.exponents(),
        "finite": finite,
        "partial1e30": i30,
        "partial1e60": i60,
        "relativeGrowth": growth,
    });
    Ok(Outcome { summary, report, verdict: Verdict::of(finite) })
}
