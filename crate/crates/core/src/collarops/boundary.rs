use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hormander::ModeSequence;
use crate::numeric::{falling_factorial, i_pow, C64};

/// Constant-coefficient boundary operator `sum c_{a,b} D_nu^a D_Gamma^b`
/// with `D_nu = i d/dnu` (interior normal) and `D_Gamma = i d/dtheta`.
///
/// Coefficients are stored in this D-form; [`BoundaryOperator::from_partial`]
/// and [`BoundaryOperator::partial_terms`] are the only conversions to the
/// `d_nu^a d_Gamma^b` form (`d = -i D`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(u32, u32, f64, f64)>", from = "Vec<(u32, u32, f64, f64)>")]
pub struct BoundaryOperator {
    coeffs: BTreeMap<(u32, u32), C64>,
}

impl BoundaryOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::from_d_terms([(0, 0, c)])
    }

    pub fn identity() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// Terms `(nu_order, gamma_order, c)` meaning `c D_nu^a D_Gamma^b`.
    pub fn from_d_terms(terms: impl IntoIterator<Item = (u32, u32, C64)>) -> Self {
        let mut op = Self::zero();
        for (a, b, c) in terms {
            *op.coeffs.entry((a, b)).or_default() += c;
        }
        op.prune();
        op
    }

    /// Terms `(nu_order, gamma_order, c)` meaning `c d_nu^a d_Gamma^b`.
    pub fn from_partial(terms: impl IntoIterator<Item = (u32, u32, C64)>) -> Self {
        Self::from_d_terms(terms.into_iter().map(|(a, b, c)| (a, b, c * i_pow(-((a + b) as i64)))))
    }

    /// `d_nu^a`.
    pub fn partial_nu(a: u32) -> Self {
        Self::from_partial([(a, 0, C64::new(1.0, 0.0))])
    }

    /// `d_Gamma^b`.
    pub fn partial_gamma(b: u32) -> Self {
        Self::from_partial([(0, b, C64::new(1.0, 0.0))])
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates `(nu_order, gamma_order, D-form coefficient)`.
    pub fn d_terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.coeffs.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    /// Iterates `(nu_order, gamma_order, coefficient of d_nu^a d_Gamma^b)`.
    pub fn partial_terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.d_terms().map(|(a, b, c)| (a, b, c * i_pow((a + b) as i64)))
    }

    pub fn coeff(&self, nu_order: u32, gamma_order: u32) -> C64 {
        self.coeffs.get(&(nu_order, gamma_order)).copied().unwrap_or_default()
    }

    /// `max(a + b)` over the support; `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().map(|(a, b)| a + b).max()
    }

    pub fn nu_order(&self) -> Option<u32> {
        self.coeffs.keys().map(|(a, _)| *a).max()
    }

    pub fn is_tangential(&self) -> bool {
        self.coeffs.keys().all(|(a, _)| *a == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_d_terms(self.d_terms().chain(other.d_terms()))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_d_terms(self.d_terms().map(|(a, b, c)| (a, b, c * factor)))
    }

    /// Product of constant-coefficient operators (polynomial product).
    pub fn compose(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (a, b, c) in self.d_terms() {
            for (a2, b2, c2) in other.d_terms() {
                terms.push((a + a2, b + b2, c * c2));
            }
        }
        Self::from_d_terms(terms)
    }

    /// `Q_k`, `k = 1..=m+1`: the tangential coefficient of `D_nu^{k-1}`.
    pub fn nu_decompose(&self, m: u32) -> Result<Vec<BoundaryOperator>> {
        if let Some(ord) = self.order() {
            if ord > m {
                return Err(Error::OrderViolation { found: ord as i64, bound: m as i64 });
            }
        }
        let mut parts = vec![BoundaryOperator::zero(); m as usize + 1];
        for (a, b, c) in self.d_terms() {
            parts[a as usize] = parts[a as usize].add(&Self::from_d_terms([(0, b, c)]));
        }
        Ok(parts)
    }

    /// Inverse of [`nu_decompose`](Self::nu_decompose): `sum_k Q_k D_nu^{k-1}`.
    pub fn reassemble(parts: &[BoundaryOperator]) -> Self {
        let terms = parts.iter().enumerate().flat_map(|(k, q)| {
            q.d_terms().map(move |(a, b, c)| (a + k as u32, b, c))
        });
        Self::from_d_terms(terms.collect::<Vec<_>>())
    }

    /// Formal adjoint with respect to `L_2` on the circle. `D_Gamma` is
    /// symmetric, so `(c D_Gamma^b)^+ = conj(c) D_Gamma^b`.
    pub fn formal_adjoint_tangential(&self) -> Result<Self> {
        if !self.is_tangential() {
            return Err(Error::Domain("formal tangential adjoint of an operator with D_nu terms".into()));
        }
        Ok(Self::from_d_terms(self.d_terms().map(|(a, b, c)| (a, b, c.conj()))))
    }

    /// Principal part of order `degree` frozen at a boundary point with signed
    /// tangential covector `tau`: ascending coefficients of the polynomial in
    /// `zeta` obtained from `D_nu -> zeta`, `D_Gamma -> tau`.
    pub fn principal_symbol(&self, degree: u32, tau: f64) -> Vec<C64> {
        let mut poly = vec![C64::new(0.0, 0.0); degree as usize + 1];
        for (a, b, c) in self.d_terms() {
            if a + b == degree {
                poly[a as usize] += c * tau.powi(b as i32);
            }
        }
        poly
    }

    /// Value at the boundary of the operator applied to `rho^n e^{ik theta}`:
    /// `d_rho^a rho^n |_{rho=1}` is a falling factorial, `D_nu = -i d_rho`
    /// and `D_Gamma e^{ik theta} = -k e^{ik theta}`.
    pub fn radial_mode_action(&self, n: i64, k: i64) -> C64 {
        self.d_terms()
            .map(|(a, b, c)| c * i_pow(-(a as i64)) * falling_factorial(n, a) * (-k as f64).powi(b as i32))
            .sum()
    }

    /// Multiplier of a tangential operator on `e^{ik theta}`.
    pub fn tangential_symbol(&self, k: i64) -> C64 {
        debug_assert!(self.is_tangential());
        self.d_terms().map(|(_, b, c)| c * (-k as f64).powi(b as i32)).sum()
    }

    pub fn apply_tangential(&self, seq: &ModeSequence) -> ModeSequence {
        let modes: Vec<_> = seq.iter().map(|(k, c)| (k, self.tangential_symbol(k) * c)).collect();
        ModeSequence::from_modes(seq.band(), modes).expect("same band")
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<_> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .all(|&(a, b)| (self.coeff(a, b) - other.coeff(a, b)).norm() <= tol)
    }

    /// Renders the operator applied to `label` in the `d_nu`, `d_Gamma` form,
    /// e.g. `d_nu w - i h_1`, using the Unicode symbols of the usual notation.
    pub fn render_applied(&self, label: &str) -> Vec<RenderedTerm> {
        let mut out = Vec::new();
        let mut terms: Vec<_> = self.partial_terms().collect();
        // Highest order first, then by nu order.
        terms.sort_by(|x, y| (y.0 + y.1, y.0).cmp(&(x.0 + x.1, x.0)));
        for (a, b, c) in terms {
            let mut op = String::new();
            if a > 0 {
                let _ = write!(op, "∂_ν{}", superscript(a));
            }
            if b > 0 {
                let _ = write!(op, "∂_Γ{}", superscript(b));
            }
            let body = if op.is_empty() { label.to_string() } else { format!("{op} {label}") };
            out.push(RenderedTerm::new(c, body));
        }
        out
    }

    pub fn render(&self) -> String {
        let terms = self.render_applied("");
        if terms.is_empty() {
            return "0".into();
        }
        join_terms(&terms).trim().replace("  ", " ")
    }
}

impl From<BoundaryOperator> for Vec<(u32, u32, f64, f64)> {
    fn from(op: BoundaryOperator) -> Self {
        op.d_terms().map(|(a, b, c)| (a, b, c.re, c.im)).collect()
    }
}

impl From<Vec<(u32, u32, f64, f64)>> for BoundaryOperator {
    fn from(v: Vec<(u32, u32, f64, f64)>) -> Self {
        Self::from_d_terms(v.into_iter().map(|(a, b, re, im)| (a, b, C64::new(re, im))))
    }
}

/// One rendered summand: coefficient and the operator-applied-to-label text.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTerm {
    pub coeff: C64,
    pub body: String,
}

impl RenderedTerm {
    fn new(coeff: C64, body: String) -> Self {
        Self { coeff, body }
    }
}

fn superscript(n: u32) -> String {
    if n == 1 {
        return String::new();
    }
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|d| DIGITS[d.to_digit(10).unwrap() as usize]).collect()
}

fn fmt_real(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// `(sign, magnitude text)` of a coefficient; `None` sign for general complex.
fn coeff_parts(c: C64) -> (bool, String) {
    if c.im == 0.0 {
        let mag = c.re.abs();
        (c.re < 0.0, if mag == 1.0 { String::new() } else { fmt_real(mag) })
    } else if c.re == 0.0 {
        let mag = c.im.abs();
        (c.im < 0.0, if mag == 1.0 { "i".into() } else { format!("{}i", fmt_real(mag)) })
    } else {
        (false, format!("({}{:+}i)", fmt_real(c.re), c.im))
    }
}

/// Joins summands as `a + b - c`, the leading sign attached.
pub fn join_terms(terms: &[RenderedTerm]) -> String {
    let mut out = String::new();
    for (idx, t) in terms.iter().enumerate() {
        let (negative, mag) = coeff_parts(t.coeff);
        let text = if t.body.is_empty() {
            if mag.is_empty() { "1".to_string() } else { mag }
        } else if mag.is_empty() {
            t.body.clone()
        } else if mag.starts_with('(') || t.body.starts_with('∂') {
            format!("{mag} {}", t.body).trim().to_string()
        } else {
            format!("{mag}{}", t.body)
        };
        match (idx, negative) {
            (0, false) => out.push_str(&text),
            (0, true) => {
                out.push('-');
                out.push_str(&text);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&text);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&text);
            }
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}
