use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hormander::{bracket, HormanderSpec, ModeSequence};
use crate::numeric::{fit_slope, KahanSum, C64};
use crate::slowvar::LogPowerPhi;

use super::modes::{ModeTable, RHSData, SolveOutcome};

/// Allowed gap between fitted and predicted decay exponents.
pub const EXPONENT_TOL: f64 = 0.1;
/// Allowed spread of the recovered `phi` factor over the fit window.
pub const PHI_FACTOR_BOUND: f64 = 2.0;

/// Borderline data of `E^{s-2,phi}`:
/// `g_{j,k} = <k>^{-(s - m_j - 1/2) - 1/2} / phi(<k>)` on the whole band,
/// with the cokernel components removed.
pub fn envelope_rhs(table: &ModeTable, spec: &HormanderSpec) -> Result<RHSData> {
    let band = table.band();
    let g = table
        .problem()
        .m_orders()
        .iter()
        .map(|&m| {
            let order = spec.s - m as f64 - 0.5;
            ModeSequence::from_modes(
                band,
                (-(band as i64)..=band as i64).map(|k| {
                    let b = bracket(k);
                    (k, C64::new(b.powf(-order - 0.5) / spec.phi.at(b), 0.0))
                }),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    table.project_onto_range(&RHSData { f_terms: Vec::new(), g })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub component: String,
    pub fitted: f64,
    pub predicted: f64,
    /// `max / min` of `|coeff| <k>^{-predicted} phi(<k>)` over the window.
    pub phi_factor_spread: f64,
    pub matches: bool,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    /// Too few data modes in the window for a fit.
    pub trivial: bool,
    pub window: (usize, usize),
    pub data_fits: Vec<EnvelopeFit>,
    pub solution_fits: Vec<EnvelopeFit>,
    /// Fitted `u` exponent minus fitted `g_1` exponent (expected `-m_1`).
    pub shift: Option<f64>,
    pub rhs_in_envelope: bool,
    pub passed: bool,
}

impl RegularityVerdict {
    pub fn all_match(&self) -> bool {
        !self.trivial && self.solution_fits.iter().all(|f| f.matches && f.phi_factor_spread <= PHI_FACTOR_BOUND)
    }
}

fn fit(component: String, seq: &ModeSequence, window: (usize, usize), predicted: f64, phi: &LogPowerPhi) -> Option<EnvelopeFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut factors = Vec::new();
    for k in window.0..=window.1 {
        let c = seq.get(k as i64).norm();
        if c == 0.0 {
            continue;
        }
        let b = bracket(k as i64);
        let p = phi.at(b);
        xs.push(b.ln());
        ys.push((c * p).ln());
        factors.push(c * p * b.powf(-predicted));
    }
    if xs.len() < 4 {
        return None;
    }
    let fitted = fit_slope(&xs, &ys);
    let hi = factors.iter().copied().fold(0.0, f64::max);
    let lo = factors.iter().copied().fold(f64::INFINITY, f64::min);
    Some(EnvelopeFit {
        component,
        fitted,
        predicted,
        phi_factor_spread: hi / lo,
        matches: (fitted - predicted).abs() <= EXPONENT_TOL,
        within: fitted <= predicted + EXPONENT_TOL,
    })
}

/// Fits log-log decay over `k in [K/4, K]` of the data and of the solution
/// against `<k>^{-(s-m_j-1/2)-1/2}` (data) and `<k>^{-s}`, `<k>^{-s-r_k}`
/// (solution), all divided by `phi`.
pub fn regularity_check(table: &ModeTable, rhs: &RHSData, spec: &HormanderSpec) -> Result<RegularityVerdict> {
    let solution = match table.solve(rhs)? {
        SolveOutcome::Solved(s) => s,
        SolveOutcome::Unsolvable { violations } => {
            return Err(Error::Precondition(format!(
                "right-hand side is not solvable ({} incompatible modes)",
                violations.len()
            )));
        }
    };
    let problem = table.problem();
    let band = table.band();
    let window = ((band / 4).max(1), band);
    let data_modes = rhs
        .support()
        .into_iter()
        .filter(|k| (window.0..=window.1).contains(&(k.unsigned_abs() as usize)))
        .count();
    if data_modes < 4 {
        let support = rhs.support();
        let mut sol_modes: Vec<i64> = solution.harmonic.support().map(|(k, _)| k).collect();
        sol_modes.extend(solution.v.iter().flat_map(|v| v.support().map(|(k, _)| k)));
        let passed = sol_modes.iter().all(|k| support.contains(k));
        return Ok(RegularityVerdict {
            trivial: true,
            window,
            data_fits: Vec::new(),
            solution_fits: Vec::new(),
            shift: None,
            rhs_in_envelope: true,
            passed,
        });
    }
    let s = spec.s;
    let phi = &spec.phi;
    let data_fits: Vec<EnvelopeFit> = rhs
        .g
        .iter()
        .zip(problem.m_orders())
        .enumerate()
        .filter_map(|(j, (g, &m))| fit(format!("g_{}", j + 1), g, window, -s + m as f64, phi))
        .collect();
    let mut solution_fits = Vec::new();
    let u_fit = fit("u".into(), &solution.harmonic, window, -s, phi);
    solution_fits.extend(u_fit.clone());
    for (i, (v, &r)) in solution.v.iter().zip(problem.r_orders()).enumerate() {
        solution_fits.extend(fit(format!("v_{}", i + 1), v, window, -s - r as f64, phi));
    }
    let shift = match (&u_fit, data_fits.iter().find(|f| f.component == "g_1")) {
        (Some(u), Some(g)) => Some(u.fitted - g.fitted),
        _ => None,
    };
    let rhs_in_envelope = data_fits.iter().all(|f| f.within);
    let passed = rhs_in_envelope && solution_fits.iter().all(|f| f.within);
    Ok(RegularityVerdict { trivial: false, window, data_fits, solution_fits, shift, rhs_in_envelope, passed })
}

/// Decay class of the right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsEnvelope {
    /// Finitely many modes.
    BandLimited,
    /// The borderline family of [`envelope_rhs`] with order `sigma` and
    /// weight `chi`: it lies in `E^{s-2,phi}` iff `s < sigma`, or `s = sigma`
    /// and `int dt / (t (chi/phi)^2)` is finite.
    Family { sigma: f64, chi: LogPowerPhi },
}

impl RhsEnvelope {
    pub fn member_of(&self, s: f64, phi: &LogPowerPhi) -> bool {
        match self {
            Self::BandLimited => true,
            Self::Family { sigma, chi } => {
                if s < sigma - 1e-12 {
                    true
                } else if (s - sigma).abs() <= 1e-12 {
                    chi.ratio(phi).embedding_integral_is_finite()
                } else {
                    false
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEvidence {
    /// `sum <k>^{2l+1} phi^2 |c_k|^2` over `|k| <= K/2` and `|k| <= K`.
    pub partial_sums: (f64, f64),
    /// `sum_{K/2 < |k| <= K} |k|^l |c_k|`, a uniform bound on the tail of the
    /// `l`-th derivative series.
    pub cauchy_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentVerdict {
    pub component: String,
    pub level: i64,
    /// Order `sigma'` the data must reach, `E^{sigma'-2,phi}`.
    pub required_order: f64,
    pub continuous: bool,
    pub reason: String,
    pub evidence: Option<SeriesEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessVerdict {
    pub level: i64,
    pub components: Vec<ComponentVerdict>,
    /// `u` in `C^2` inside, `C^m` up to the boundary, `v_k` in `C^{m+r_k}`.
    pub classical: Vec<ComponentVerdict>,
    pub is_classical: bool,
}

fn decide(envelope: &RhsEnvelope, required: f64, phi: &LogPowerPhi, automatic: f64) -> (bool, String) {
    if let RhsEnvelope::BandLimited = envelope {
        return (true, "band-limited data: trigonometric polynomial".into());
    }
    if required <= automatic + 1e-12 {
        return (true, format!("order {required} <= m + 1/2: the generalized solution class suffices"));
    }
    let finite = phi.embedding_integral_is_finite();
    if finite && envelope.member_of(required, phi) {
        return (true, format!("data in E^{{{}-2,phi}} and int dt/(t phi^2) < inf", required));
    }
    if let RhsEnvelope::Family { sigma, .. } = envelope {
        if *sigma > required + 1e-12 {
            return (true, format!("strict Sobolev excess: sigma = {sigma} > {required}"));
        }
        if !finite && (sigma - required).abs() <= 1e-12 {
            return (false, "borderline order refused: int dt/(t phi^2) diverges; strict Sobolev excess required".into());
        }
    }
    (false, format!("data not in E^{{{}-2,phi}}", required))
}

fn evidence(seq: &ModeSequence, level: i64, phi: &LogPowerPhi, band: usize) -> SeriesEvidence {
    let half = (band / 2) as i64;
    let mut lower = KahanSum::default();
    let mut upper = KahanSum::default();
    let mut tail = KahanSum::default();
    for (k, c) in seq.support() {
        let b = bracket(k);
        let p = phi.at(b);
        let term = b.powf(2.0 * level as f64 + 1.0) * p * p * c.norm_sqr();
        upper.add(term);
        if k.abs() <= half {
            lower.add(term);
        } else {
            tail.add((k.abs() as f64).powi(level as i32) * c.norm());
        }
    }
    SeriesEvidence { partial_sums: (lower.value(), upper.value()), cauchy_tail: tail.value() }
}

/// Continuity of `u` and `v_k` derivatives up to order `l`, and the
/// classical-solution verdict, for data of the given decay class. Numeric
/// evidence comes from solving the synthetic family on the table's band.
pub fn classify_smoothness(
    table: &ModeTable,
    envelope: &RhsEnvelope,
    level: i64,
    phi: &LogPowerPhi,
) -> Result<SmoothnessVerdict> {
    if level < 0 {
        return Err(Error::Domain(format!("smoothness level must be nonnegative, got {level}")));
    }
    let problem = table.problem();
    let m = problem.m();
    let automatic = m as f64 + 0.5;
    let solution = match envelope {
        RhsEnvelope::BandLimited => None,
        RhsEnvelope::Family { sigma, chi } => {
            let rhs = envelope_rhs(table, &HormanderSpec::new(*sigma, chi.clone()))?;
            table.solve(&rhs)?.solution().cloned()
        }
    };
    let band = table.band();
    let verdict = |name: String, lvl: i64, shift: i64, seq: Option<&ModeSequence>| {
        // u needs H^{l+1,phi}(disk); v_k needs H^{l+1/2,phi}(circle), i.e. order l - r_k + 1.
        let required = (lvl - shift) as f64 + 1.0;
        let (continuous, reason) = decide(envelope, required, phi, automatic);
        ComponentVerdict {
            component: name,
            level: lvl,
            required_order: required,
            continuous,
            reason,
            evidence: seq.map(|s| evidence(s, lvl, phi, band)),
        }
    };
    let u = solution.as_ref().map(|s| &s.harmonic);
    let v = |i: usize| solution.as_ref().map(|s| &s.v[i]);
    let mut components = vec![verdict("u".into(), level, 0, u)];
    for (i, &r) in problem.r_orders().iter().enumerate() {
        components.push(verdict(format!("v_{}", i + 1), level, r, v(i)));
    }
    let mut classical = vec![
        verdict("u (interior)".into(), 2 * problem.q() as i64, 0, u),
        verdict("u (near the boundary)".into(), m, 0, u),
    ];
    for (i, &r) in problem.r_orders().iter().enumerate() {
        classical.push(verdict(format!("v_{}", i + 1), m + r, r, v(i)));
    }
    let is_classical = classical.iter().all(|c| c.continuous);
    Ok(SmoothnessVerdict { level, components, classical, is_classical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disksolver::modes::RANK_TOL;
    use crate::disksolver::DiskProblem;

    fn table(band: usize) -> ModeTable {
        ModeTable::new(&DiskProblem::normal_derivative_pair(1, band).unwrap(), RANK_TOL).unwrap()
    }

    fn phi(r: &[f64]) -> LogPowerPhi {
        LogPowerPhi::new(r.to_vec()).unwrap()
    }

    #[test]
    fn envelope_exponents() {
        let t = table(1024);
        for (s, p) in [(4.0, phi(&[])), (5.5, phi(&[])), (4.0, phi(&[1.0])), (5.5, phi(&[1.0]))] {
            let spec = HormanderSpec::new(s, p);
            let rhs = envelope_rhs(&t, &spec).unwrap();
            let v = regularity_check(&t, &rhs, &spec).unwrap();
            assert!(v.passed && v.rhs_in_envelope && v.all_match(), "{v:?}");
            let u = &v.solution_fits[0];
            assert!((u.fitted + s).abs() <= EXPONENT_TOL);
            assert!((v.shift.unwrap() + 1.0).abs() <= EXPONENT_TOL);
        }
    }

    #[test]
    fn single_mode_is_trivial() {
        let t = table(64);
        let rhs = RHSData::new(t.problem(), vec![], vec![ModeSequence::single(5, C64::new(1.0, 0.0)), ModeSequence::zeros(0)])
            .unwrap();
        let v = regularity_check(&t, &rhs, &HormanderSpec::sobolev(4.0)).unwrap();
        assert!(v.trivial && v.passed);
    }

    #[test]
    fn unsolvable_data_is_rejected() {
        let t = table(8);
        let rhs = RHSData::new(t.problem(), vec![], vec![ModeSequence::zeros(0), ModeSequence::single(0, C64::new(1.0, 0.0))])
            .unwrap();
        assert!(matches!(regularity_check(&t, &rhs, &HormanderSpec::sobolev(4.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn membership_rule() {
        let fam = RhsEnvelope::Family { sigma: 4.0, chi: phi(&[2.0]) };
        assert!(fam.member_of(3.5, &phi(&[])));
        assert!(fam.member_of(4.0, &phi(&[1.0])));
        assert!(!fam.member_of(4.0, &phi(&[1.5])));
        assert!(!fam.member_of(4.5, &phi(&[])));
    }

    #[test]
    fn borderline_needs_finite_embedding_integral() {
        let t = table(256);
        let l = 3;
        // u at level 3 needs order l + 1 = 4; chi = [2] over phi = [1] leaves [1].
        let fam = RhsEnvelope::Family { sigma: 4.0, chi: phi(&[2.0]) };
        let ok = classify_smoothness(&t, &fam, l, &phi(&[1.0])).unwrap();
        assert!(ok.components[0].continuous, "{:?}", ok.components[0]);
        let refused = classify_smoothness(&t, &fam, l, &phi(&[])).unwrap();
        assert!(!refused.components[0].continuous);
        assert!(refused.components[0].reason.contains("borderline"));
        let excess = RhsEnvelope::Family { sigma: 4.2, chi: phi(&[]) };
        let e = classify_smoothness(&t, &excess, l, &phi(&[])).unwrap();
        assert!(e.components[0].continuous && e.components[0].reason.contains("excess"));
        let ev = ok.components[0].evidence.as_ref().unwrap();
        assert!(ev.partial_sums.1 >= ev.partial_sums.0 && ev.cauchy_tail >= 0.0);
    }

    #[test]
    fn band_limited_is_classical() {
        let t = table(16);
        for l in 0..6 {
            let v = classify_smoothness(&t, &RhsEnvelope::BandLimited, l, &phi(&[])).unwrap();
            assert!(v.is_classical && v.components.iter().all(|c| c.continuous));
        }
    }

    #[test]
    fn classical_orders() {
        let t = table(64);
        // u near the boundary needs m + 1 = 3, v_1 needs (m + r) - r + 1 = 3.
        let v = classify_smoothness(&t, &RhsEnvelope::Family { sigma: 3.0, chi: phi(&[1.0]) }, 0, &phi(&[])).unwrap();
        let orders: Vec<f64> = v.classical.iter().map(|c| c.required_order).collect();
        assert_eq!(orders, vec![3.0, 3.0, 3.0]);
        assert!(!v.is_classical);
        let w = classify_smoothness(&t, &RhsEnvelope::Family { sigma: 3.5, chi: phi(&[]) }, 0, &phi(&[])).unwrap();
        assert!(w.is_classical);
    }
}
