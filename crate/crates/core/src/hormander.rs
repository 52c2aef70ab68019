//! Refined Sobolev (Hormander) norms on band-limited Fourier mode sequences
//! of the unit circle, and interpolation with a function parameter on
//! diagonal Hilbert couples.
//!
//! A sequence `(c_k)_{|k| <= K}` has the norm
//! `( sum_k <k>^{2s} phi(<k>)^2 |c_k|^2 )^{1/2}` with `<k> = (1 + k^2)^{1/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{KahanSum, C64};
use crate::slowvar::LogPowerPhi;

/// Smoothed modulus `<k> = (1 + k^2)^{1/2}`.
pub fn bracket(k: i64) -> f64 {
    let k = k as f64;
    (1.0 + k * k).sqrt()
}

/// Fourier coefficients `c_k`, `|k| <= band`, stored densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(i64, f64, f64)>", try_from = "Vec<(i64, f64, f64)>")]
pub struct ModeSequence {
    band: usize,
    coeffs: Vec<C64>,
}

impl ModeSequence {
    pub fn zeros(band: usize) -> Self {
        Self { band, coeffs: vec![C64::new(0.0, 0.0); 2 * band + 1] }
    }

    /// Builds a sequence from `(k, c_k)` pairs; repeated modes accumulate.
    pub fn from_modes(band: usize, modes: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        let mut seq = Self::zeros(band);
        for (k, c) in modes {
            if k.unsigned_abs() as usize > band {
                return Err(Error::Domain(format!("mode {k} outside band limit {band}")));
            }
            seq.coeffs[(k + band as i64) as usize] += c;
        }
        Ok(seq)
    }

    pub fn single(k: i64, c: C64) -> Self {
        let band = k.unsigned_abs() as usize;
        Self::from_modes(band, [(k, c)]).expect("mode within its own band")
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn get(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.band {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.band as i64) as usize]
        }
    }

    pub fn set(&mut self, k: i64, c: C64) -> Result<()> {
        if k.unsigned_abs() as usize > self.band {
            return Err(Error::Domain(format!("mode {k} outside band limit {}", self.band)));
        }
        self.coeffs[(k + self.band as i64) as usize] = c;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let b = self.band as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - b, c))
    }

    /// Nonzero modes only.
    pub fn support(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.iter().filter(|(_, c)| *c != C64::new(0.0, 0.0))
    }

    /// Same coefficients in a sequence with a larger band limit.
    pub fn widened(&self, band: usize) -> Self {
        let band = band.max(self.band);
        Self::from_modes(band, self.iter()).expect("widening keeps all modes")
    }

    pub fn add(&self, other: &Self) -> Self {
        let band = self.band.max(other.band);
        Self::from_modes(band, self.iter().chain(other.iter())).expect("fits the larger band")
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { band: self.band, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// `c_k -> c_{-k}`.
    pub fn reflected(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { band: self.band, coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl From<ModeSequence> for Vec<(i64, f64, f64)> {
    fn from(seq: ModeSequence) -> Self {
        seq.support().map(|(k, c)| (k, c.re, c.im)).collect()
    }
}

impl TryFrom<Vec<(i64, f64, f64)>> for ModeSequence {
    type Error = Error;

    fn try_from(triples: Vec<(i64, f64, f64)>) -> Result<Self> {
        let band = triples.iter().map(|t| t.0.unsigned_abs() as usize).max().unwrap_or(0);
        Self::from_modes(band, triples.into_iter().map(|(k, re, im)| (k, C64::new(re, im))))
    }
}

/// Order `s` and auxiliary weight `phi` of a space `H^{s,phi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderSpec {
    pub s: f64,
    pub phi: LogPowerPhi,
}

impl HormanderSpec {
    pub fn new(s: f64, phi: LogPowerPhi) -> Self {
        Self { s, phi }
    }

    pub fn sobolev(s: f64) -> Self {
        Self { s, phi: LogPowerPhi::one() }
    }

    /// Squared mode weight `<k>^{2s} phi(<k>)^2`.
    pub fn weight_sq(&self, k: i64) -> f64 {
        let b = bracket(k);
        let p = self.phi.at(b);
        b.powf(2.0 * self.s) * p * p
    }
}

/// Squared norm, compensated summation over modes.
pub fn hnorm_sq(seq: &ModeSequence, spec: &HormanderSpec) -> f64 {
    seq.support()
        .map(|(k, c)| spec.weight_sq(k) * c.norm_sqr())
        .collect::<KahanSum>()
        .value()
}

pub fn hnorm(seq: &ModeSequence, spec: &HormanderSpec) -> f64 {
    hnorm_sq(seq, spec).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationParameter {
    eps: f64,
    phi: LogPowerPhi,
}

impl InterpolationParameter {
    pub fn new(eps: f64, phi: LogPowerPhi) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { eps, phi })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// An interpolation parameter `psi` on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    /// `psi(t) = t^{1/2} phi(t^{1/(2 eps)})` for `t >= 1`, `phi(1)` below.
    LogPower { eps: f64, phi: LogPowerPhi },
    /// Plain power `t^theta`.
    Power(f64),
}

impl Psi {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Psi::LogPower { eps, phi } => {
                if t >= 1.0 {
                    t.sqrt() * phi.at(t.powf(1.0 / (2.0 * eps)).max(1.0))
                } else {
                    phi.at(1.0)
                }
            }
            Psi::Power(theta) => t.powf(*theta),
        }
    }
}

pub fn make_psi(param: &InterpolationParameter) -> Psi {
    Psi::LogPower { eps: param.eps, phi: param.phi.clone() }
}

/// Norm of `[H_0, H_1]_psi` for the diagonal couple with mode weights
/// `w0_k = <k>^{2 s0}`, `w1_k = <k>^{2 s1}`. The generating operator has
/// eigenvalue `(w1_k / w0_k)^{1/2} = <k>^{s1 - s0}` on mode `k`.
pub fn interpolation_norm(seq: &ModeSequence, s0: f64, s1: f64, psi: &Psi) -> Result<f64> {
    if !(s0 < s1) {
        return Err(Error::Domain(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    let sum: KahanSum = seq
        .support()
        .map(|(k, c)| {
            let b = bracket(k);
            let w0 = b.powf(2.0 * s0);
            let p = psi.eval(b.powf(s1 - s0));
            w0 * p * p * c.norm_sqr()
        })
        .collect();
    Ok(sum.value().sqrt())
}

/// `(||seq||_{s+eps}, ||seq||_{s,phi}, ||seq||_{s-eps})`.
pub fn check_embedding_chain(seq: &ModeSequence, s: f64, eps: f64, phi: &LogPowerPhi) -> Result<(f64, f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok((
        hnorm(seq, &HormanderSpec::sobolev(s + eps)),
        hnorm(seq, &HormanderSpec::new(s, phi.clone())),
        hnorm(seq, &HormanderSpec::sobolev(s - eps)),
    ))
}

/// Largest mode-weight ratios `<k>^{-eps} phi(<k>)` and `<k>^{-eps} / phi(<k>)`
/// over the support; these bound the two embedding constants.
pub fn embedding_constants(seq: &ModeSequence, eps: f64, phi: &LogPowerPhi) -> (f64, f64) {
    seq.support().fold((0.0f64, 0.0f64), |(upper, lower), (k, _)| {
        let b = bracket(k);
        let p = phi.at(b);
        (upper.max(b.powf(-eps) * p), lower.max(b.powf(-eps) / p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket(0), 1.0);
        assert!((bracket(1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(bracket(-3), 10f64.sqrt());
    }

    #[test]
    fn hnorm_examples() {
        let seq = ModeSequence::single(5, c(1.0));
        assert!((hnorm(&seq, &HormanderSpec::sobolev(2.0)) - 26.0).abs() < 1e-12);
        let seq = ModeSequence::from_modes(2, [(0, c(3.0)), (2, c(4.0))]).unwrap();
        assert!((hnorm(&seq, &HormanderSpec::sobolev(0.0)) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let phi1 = LogPowerPhi::new(vec![1.0]).unwrap();
        let one = make_psi(&InterpolationParameter::new(0.7, LogPowerPhi::one()).unwrap());
        assert!((one.eval(9.0) - 3.0).abs() < 1e-15);
        let psi = make_psi(&InterpolationParameter::new(0.5, phi1.clone()).unwrap());
        assert_eq!(psi.eval(1.0), 1.0);
        let e2 = std::f64::consts::E.powi(2);
        assert!((psi.eval(e2) - std::f64::consts::E * 3.0).abs() < 1e-13);
        assert_eq!(psi.eval(0.25), 1.0);
        assert!(InterpolationParameter::new(0.0, phi1).is_err());
    }

    #[test]
    fn interpolation_of_sobolev_couple() {
        let seq = ModeSequence::from_modes(3, [(-3, c(0.5)), (1, C64::new(0.0, 2.0)), (2, c(-1.0))]).unwrap();
        let got = interpolation_norm(&seq, 1.5, 2.5, &Psi::Power(0.5)).unwrap();
        let want = hnorm(&seq, &HormanderSpec::sobolev(2.0));
        assert!((got - want).abs() <= 1e-14 * want);
        assert!(interpolation_norm(&seq, 2.0, 2.0, &Psi::Power(0.5)).is_err());
        assert_eq!(interpolation_norm(&ModeSequence::zeros(4), 0.0, 1.0, &Psi::Power(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn embedding_chain_single_mode() {
        let phi = LogPowerPhi::new(vec![1.0]).unwrap();
        let k = 7;
        let (a, b, d) = check_embedding_chain(&ModeSequence::single(k, c(1.0)), 1.0, 0.3, &phi).unwrap();
        let br = bracket(k);
        assert!((a - br.powf(1.3)).abs() < 1e-12);
        assert!((b - br * phi.at(br)).abs() < 1e-12);
        assert!((d - br.powf(0.7)).abs() < 1e-12);
    }

    #[test]
    fn embedding_ratio_decays_past_its_peak() {
        // <k>^{-0.1} (1 + ln <k>) peaks near ln <k> = 9 and then decays to 0.
        let phi = LogPowerPhi::new(vec![1.0]).unwrap();
        let ratio = |k: i64| {
            let (top, mid, _) = check_embedding_chain(&ModeSequence::single(k, c(1.0)), 0.0, 0.1, &phi).unwrap();
            mid / top
        };
        assert!(ratio(1_000_000) < ratio(10_000));
        assert!(ratio(1_000_000) < ratio(100_000));
        let far = 600.0f64; // ln <k>
        assert!((-0.1 * far).exp() * phi.eval_log(far) < 1e-15);
    }

    #[test]
    fn serde_triples() {
        let seq = ModeSequence::from_modes(2, [(-2, C64::new(1.0, -1.0)), (1, c(3.0))]).unwrap();
        let v: Vec<(i64, f64, f64)> = seq.clone().into();
        assert_eq!(v, vec![(-2, 1.0, -1.0), (1, 3.0, 0.0)]);
        assert_eq!(ModeSequence::try_from(v).unwrap(), seq);
    }
}
