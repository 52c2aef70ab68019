//! Slowly varying weights of iterated-log-power type.
//!
//! A [`LogPowerPhi`] with exponents `(r_1, ..., r_k)` evaluates to
//! `L_1(t)^{r_1} ... L_k(t)^{r_k}` where `L_1(t) = 1 + ln t` and
//! `L_{j+1}(t) = 1 + ln L_j(t)`. Every `L_j` is `>= 1` on `[1, inf)`, so the
//! weight is positive, equals 1 at `t = 1` and is asymptotically equivalent to
//! `(ln t)^{r_1} (ln ln t)^{r_2} ...` for large `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents closer than this to 1/2 (after doubling) count as exactly 1/2.
const HALF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogPowerPhi {
    exponents: Vec<f64>,
}

impl LogPowerPhi {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("phi exponents must be finite".into()));
        }
        Ok(Self { exponents })
    }

    /// The Sobolev case `phi == 1`.
    pub fn one() -> Self {
        Self::default()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|&r| r == 0.0)
    }

    /// Pointwise product `self * other` (exponents add).
    pub fn product(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    /// Pointwise quotient `self / other` (exponents subtract).
    pub fn ratio(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let n = self.exponents.len().max(other.exponents.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let mut exponents: Vec<f64> = (0..n)
            .map(|i| get(&self.exponents, i) + sign * get(&other.exponents, i))
            .collect();
        while exponents.last() == Some(&0.0) {
            exponents.pop();
        }
        Self { exponents }
    }

    /// Evaluates the weight at `t >= 1`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::Domain(format!("phi is defined on [1, inf), got t = {t}")));
        }
        Ok(self.eval_log(t.ln()))
    }

    /// Evaluation at `t = e^u`, `u >= 0`, without forming `t`.
    pub(crate) fn eval_log(&self, u: f64) -> f64 {
        let mut level = 1.0 + u;
        let mut log_value = 0.0;
        for (j, &r) in self.exponents.iter().enumerate() {
            if j > 0 {
                level = 1.0 + level.ln();
            }
            log_value += r * level.ln();
        }
        log_value.exp()
    }

    /// Infallible evaluation for arguments already known to be `>= 1`
    /// (mode brackets, interpolation arguments).
    pub(crate) fn at(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        self.eval_log(t.max(1.0).ln())
    }

    /// Decides whether `int_1^inf dt / (t phi(t)^2)` is finite.
    ///
    /// After `u = ln t` the integrand behaves like
    /// `1 / ((1+u) L_2^{2 r_2} ...)` with the leading factor `(1+u)^{-2 r_1}`.
    /// The first exponent with `2 r_j != 1` decides: convergence iff it is
    /// larger than 1. If all of them equal 1/2 the integral diverges.
    pub fn embedding_integral_is_finite(&self) -> bool {
        for &r in &self.exponents {
            let twice = 2.0 * r;
            if (twice - 1.0).abs() > HALF_TOL {
                return twice > 1.0;
            }
        }
        false
    }

    /// `int_1^cutoff dt / (t phi(t)^2)` by adaptive Gauss-Kronrod quadrature
    /// in the variable `u = ln t`.
    pub fn embedding_integral_partial(&self, cutoff: f64) -> Result<f64> {
        if !(cutoff > 1.0) || !cutoff.is_finite() {
            return Err(Error::Domain(format!("cutoff must be finite and > 1, got {cutoff}")));
        }
        let upper = cutoff.ln();
        let f = |u: f64| {
            let p = self.eval_log(u);
            1.0 / (p * p)
        };
        Ok(adaptive_gauss_kronrod(&f, 0.0, upper, 1e-10))
    }
}

/// Slow-variation ratio `phi(lambda t) / phi(t)`.
pub fn variation_ratio(phi: &LogPowerPhi, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("lambda must be positive".into()));
    }
    Ok(phi.eval(lambda * t)? / phi.eval(t)?)
}

/// Same ratio at `t = e^u`, for arguments beyond the `f64` range of `t`.
pub fn variation_ratio_log(phi: &LogPowerPhi, lambda: f64, u: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(u >= 0.0) {
        return Err(Error::Domain("need lambda > 0 and u >= 0".into()));
    }
    let shifted = (u + lambda.ln()).max(0.0);
    Ok(phi.eval_log(shifted) / phi.eval_log(u))
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        // Odd Kronrod nodes coincide with the Gauss nodes.
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

pub(crate) fn adaptive_gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut intervals = vec![(a, b, gk15(f, a, b))];
    for _ in 0..10_000 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if err <= rel_tol * total.abs() {
            break;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(f, lo, mid)));
        intervals.push((mid, hi, gk15(f, mid, hi)));
    }
    let mut sum = crate::numeric::KahanSum::default();
    for iv in &intervals {
        sum.add(iv.2 .0);
    }
    sum.value()
}
