use std::collections::BTreeMap;

use crate::numeric::{binomial, falling_factorial, i_pow, C64};

use super::boundary::BoundaryOperator;

/// Differential operator near the unit circle in polar coordinates,
/// `sum c_{p,a,b} rho^p d_rho^a d_theta^b`, kept in the normal form with all
/// powers of `rho` to the left of the derivatives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteriorCollarOperator {
    terms: BTreeMap<(i32, u32, u32), C64>,
}

impl InteriorCollarOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::from_terms([(0, 0, 0, C64::new(1.0, 0.0))])
    }

    /// Terms `(p, a, b, c)` meaning `c rho^p d_rho^a d_theta^b`.
    pub fn from_terms(terms: impl IntoIterator<Item = (i32, u32, u32, C64)>) -> Self {
        let mut op = Self::zero();
        for (p, a, b, c) in terms {
            *op.terms.entry((p, a, b)).or_default() += c;
        }
        op.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        op
    }

    pub fn rho_pow(p: i32) -> Self {
        Self::from_terms([(p, 0, 0, C64::new(1.0, 0.0))])
    }

    pub fn d_rho() -> Self {
        Self::from_terms([(0, 1, 0, C64::new(1.0, 0.0))])
    }

    pub fn d_theta() -> Self {
        Self::from_terms([(0, 0, 1, C64::new(1.0, 0.0))])
    }

    /// `D_nu = i d_nu = -i d_rho` as a collar operator.
    pub fn d_nu() -> Self {
        Self::from_terms([(0, 1, 0, C64::new(0.0, -1.0))])
    }

    /// `d_rho^2 + rho^{-1} d_rho + rho^{-2} d_theta^2`.
    pub fn disk_laplacian() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::from_terms([(0, 2, 0, one), (-1, 1, 0, one), (-2, 0, 2, one)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u32, u32, C64)> + '_ {
        self.terms.iter().map(|(&(p, a, b), &c)| (p, a, b, c))
    }

    pub fn coeff(&self, p: i32, a: u32, b: u32) -> C64 {
        self.terms.get(&(p, a, b)).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_terms(self.terms().map(|(p, a, b, c)| (p, a, b, c * factor)))
    }

    /// `self o other`, commuting `d_rho^a` past `rho^q` with Leibniz:
    /// `d_rho^a rho^q = sum_i C(a,i) q(q-1)..(q-i+1) rho^{q-i} d_rho^{a-i}`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (p, a, b, c) in self.terms() {
            for (q, a2, b2, c2) in other.terms() {
                for i in 0..=a {
                    let factor = binomial(a, i) * falling_factorial(q as i64, i);
                    if factor == 0.0 {
                        continue;
                    }
                    out.push((p + q - i as i32, a - i + a2, b + b2, c * c2 * factor));
                }
            }
        }
        Self::from_terms(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.compose(self))
    }

    /// Value at `rho = 1` of the operator applied to `rho^n e^{ik theta}`
    /// (the factor `e^{ik theta}` dropped).
    pub fn monomial_at_boundary(&self, n: i64, k: i64) -> C64 {
        self.terms()
            .map(|(_, a, b, c)| c * falling_factorial(n, a) * i_pow(b as i64) * (k as f64).powi(b as i32))
            .sum()
    }

    /// Coefficient of `rho^{n + p - a}` after applying to `rho^n e^{ik theta}`,
    /// collected per resulting power: `(power, coefficient)`.
    pub fn apply_monomial(&self, n: i64, k: i64) -> Vec<(i64, C64)> {
        let mut out: std::collections::BTreeMap<i64, C64> = Default::default();
        for (p, a, b, c) in self.terms() {
            let v = c * falling_factorial(n, a) * i_pow(b as i64) * (k as f64).powi(b as i32);
            if v != C64::new(0.0, 0.0) {
                *out.entry(n + p as i64 - a as i64).or_default() += v;
            }
        }
        out.into_iter().filter(|(_, c)| *c != C64::new(0.0, 0.0)).collect()
    }

    /// Boundary form at `rho = 1`: `d_rho = -d_nu = i D_nu`,
    /// `d_theta = d_Gamma = -i D_Gamma`.
    pub fn restrict_to_boundary(&self) -> BoundaryOperator {
        BoundaryOperator::from_d_terms(
            self.terms()
                .map(|(_, a, b, c)| (a, b, c * i_pow(a as i64) * i_pow(-(b as i64))))
                .collect::<Vec<_>>(),
        )
    }
}
