//! Problem definitions in TOML.
//!
//! Operators are lists of terms `coeff * d_nu^nu d_Gamma^gamma`; a missing
//! `nu`/`gamma` is 0 and a missing `coeff` is `[1, 0]`. Complex numbers are
//! `[re, im]` pairs.

use std::fmt;

use lawruk_core::collarops::BoundaryOperator;
use lawruk_core::disksolver::{DiskProblem, FTerm, RHSData, RhsEnvelope};
use lawruk_core::ellipticity::{freeze_symbols, HomogeneousPoly, PointSymbolProblem};
use lawruk_core::hormander::ModeSequence;
use lawruk_core::numeric::C64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MODES: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<lawruk_core::Error> for ConfigError {
    fn from(e: lawruk_core::Error) -> Self {
        Self(e.to_string())
    }
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

fn is_one(c: &[f64; 2]) -> bool {
    *c == [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub nu: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub gamma: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub coeff: [f64; 2],
}

pub fn operator(terms: &[Term]) -> BoundaryOperator {
    BoundaryOperator::from_partial(terms.iter().map(|t| (t.nu, t.gamma, C64::new(t.coeff[0], t.coeff[1]))))
}

fn complex(c: [f64; 2]) -> C64 {
    C64::new(c[0], c[1])
}

/// Overridable run parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Fields set in `other` win.
    pub fn overridden_by(&self, other: &RunConfig) -> RunConfig {
        RunConfig {
            modes: other.modes.or(self.modes),
            tol: other.tol.or(self.tol),
            trials: other.trials.or(self.trials),
            s: other.s.or(self.s),
            phi: other.phi.clone().or_else(|| self.phi.clone()),
            lambda: other.lambda.or(self.lambda),
            level: other.level.or(self.level),
            seed: other.seed.or(self.seed),
        }
    }
}

/// Frozen symbols given directly: `a`, `b_j` as coefficient lists in
/// `zeta` (ascending), `c_jk` as values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub tau: f64,
    pub a: Vec<[f64; 2]>,
    pub b: Vec<Vec<[f64; 2]>>,
    pub c: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSymbolConfig {
    #[serde(default = "default_q")]
    pub q: usize,
    /// Extra unknowns; needed only with `[[point]]` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<i64>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    /// Interior operator in collar form.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interior: Vec<Term>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<Vec<Vec<Term>>>,
    #[serde(default, rename = "point", skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointConfig>,
    #[serde(default, skip_serializing_if = "RunConfig::is_empty")]
    pub run: RunConfig,
}

fn default_q() -> usize {
    1
}

fn default_taus() -> Vec<f64> {
    vec![1.0, -1.0]
}

impl RunConfig {
    fn is_empty(&self) -> bool {
        *self == RunConfig::default()
    }
}

/// Frozen problems per `tau`, and the interior symbol when it is known.
pub struct PointSymbols {
    pub interior: Option<HomogeneousPoly>,
    pub points: Vec<(f64, PointSymbolProblem)>,
}

impl PointSymbolConfig {
    pub fn build(&self) -> Result<PointSymbols, ConfigError> {
        match (self.interior.is_empty(), self.points.is_empty()) {
            (false, false) => Err(ConfigError("give either operator tables or [[point]] entries, not both".into())),
            (true, true) => Err(ConfigError("no operators: give `interior`, `b`, `c`, `m`, `r` or [[point]] entries".into())),
            (false, true) => {
                let interior = operator(&self.interior);
                let b: Vec<_> = self.b.iter().map(|t| operator(t)).collect();
                let c: Vec<Vec<_>> = self.c.iter().map(|row| row.iter().map(|t| operator(t)).collect()).collect();
                if c.iter().any(|row| row.len() != self.r.len()) {
                    return Err(ConfigError(format!("every row of `c` needs {} entries (one per r_k)", self.r.len())));
                }
                let points = self
                    .taus
                    .iter()
                    .map(|&tau| Ok((tau, freeze_symbols(&interior, self.q, &b, &c, &self.m, &self.r, tau)?)))
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                Ok(PointSymbols { interior: Some(interior_symbol(&interior)?), points })
            }
            (true, false) => {
                let kappa = self
                    .kappa
                    .ok_or_else(|| ConfigError("[[point]] entries need `kappa`".into()))?;
                let points = self
                    .points
                    .iter()
                    .map(|p| {
                        let prob = PointSymbolProblem::new(
                            p.a.iter().copied().map(complex).collect(),
                            p.b.iter().map(|row| row.iter().copied().map(complex).collect()).collect(),
                            p.c.iter().map(|row| row.iter().copied().map(complex).collect()).collect(),
                            self.q,
                            kappa,
                        )?;
                        Ok((p.tau, prob))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                Ok(PointSymbols { interior: None, points })
            }
        }
    }
}

/// Principal symbol in `(xi_nu, xi_Gamma)` of a collar-form operator.
pub fn interior_symbol(op: &BoundaryOperator) -> Result<HomogeneousPoly, ConfigError> {
    let deg = op.order().ok_or_else(|| ConfigError("interior operator is zero".into()))?;
    let terms = op
        .partial_terms()
        .filter(|(a, b, _)| a + b == deg)
        .map(|(a, b, c)| (vec![a, b], c * lawruk_core::numeric::i_pow((a + b) as i64)))
        .collect();
    Ok(HomogeneousPoly::new(2, terms)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FTermConfig {
    pub k: i64,
    #[serde(default)]
    pub j: u32,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: i64,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<FTermConfig>,
    /// One list of modes per boundary row.
    pub g: Vec<Vec<ModeConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    pub m: Vec<i64>,
    pub r: Vec<i64>,
    pub b: Vec<Vec<Term>>,
    pub c: Vec<Vec<Vec<Term>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RhsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<RhsEnvelope>,
    #[serde(default, skip_serializing_if = "RunConfig::is_empty")]
    pub run: RunConfig,
}

impl DiskConfig {
    /// The problem with band `modes`; the standing assumptions are enforced.
    pub fn problem(&self, modes: usize) -> Result<DiskProblem, ConfigError> {
        let b = self.b.iter().map(|t| operator(t)).collect();
        let c = self.c.iter().map(|row| row.iter().map(|t| operator(t)).collect()).collect();
        let p = DiskProblem::new(b, c, self.m.clone(), self.r.clone(), modes)?;
        p.check_standing_assumptions()?;
        Ok(p)
    }

    pub fn rhs(&self, problem: &DiskProblem) -> Result<Option<RHSData>, ConfigError> {
        let Some(rhs) = &self.rhs else { return Ok(None) };
        let f = rhs.f.iter().map(|t| FTerm { k: t.k, j: t.j, coeff: complex(t.coeff) }).collect();
        let g = rhs
            .g
            .iter()
            .map(|row| ModeSequence::from_modes(problem.band(), row.iter().map(|m| (m.k, complex(m.coeff)))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(RHSData::new(problem, f, g)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemConfig {
    PointSymbol(PointSymbolConfig),
    DiskProblem(DiskConfig),
}

impl ProblemConfig {
    pub fn run(&self) -> &RunConfig {
        match self {
            Self::PointSymbol(p) => &p.run,
            Self::DiskProblem(d) => &d.run,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Self::PointSymbol(p) => p.build().map(|_| ()),
            Self::DiskProblem(d) => {
                let modes = d.run.modes.unwrap_or(DEFAULT_MODES);
                let problem = d.problem(modes)?;
                d.rhs(&problem).map(|_| ())
            }
        }
    }
}

/// Parses and validates; syntax errors carry line and column.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let cfg: ProblemConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &ProblemConfig) -> Result<String, ConfigError> {
    toml::to_string(cfg).map_err(|e| ConfigError(e.to_string()))
}
