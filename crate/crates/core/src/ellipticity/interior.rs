use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::C64;

/// Homogeneous polynomial `sum c_mu xi^mu` in `n` real variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousPoly {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, C64)>,
}

impl HomogeneousPoly {
    pub fn new(n: usize, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("interior symbols need n >= 2 variables".into()));
        }
        if terms.is_empty() {
            return Err(Error::Domain("empty symbol".into()));
        }
        let deg: u32 = terms[0].0.iter().sum();
        for (mu, _) in &terms {
            if mu.len() != n {
                return Err(Error::Domain(format!("multi-index {mu:?} does not have {n} entries")));
            }
            if mu.iter().sum::<u32>() != deg {
                return Err(Error::Domain("symbol is not homogeneous".into()));
            }
        }
        Ok(Self { n, terms })
    }

    /// `-(xi_1^2 + ... + xi_n^2)`, the symbol of the Laplacian.
    pub fn laplacian(n: usize) -> Self {
        let terms = (0..n)
            .map(|i| {
                let mut mu = vec![0; n];
                mu[i] = 2;
                (mu, C64::new(-1.0, 0.0))
            })
            .collect();
        Self { n, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.first().map_or(0, |(mu, _)| mu.iter().sum())
    }

    pub fn eval(&self, xi: &[f64]) -> C64 {
        self.terms
            .iter()
            .map(|(mu, c)| c * mu.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Uniform angles for `n = 2` (4096 of them); for `n >= 3`, 1024 points of
/// a Halton sequence pushed to the sphere through Box-Muller.
pub fn default_direction_grid(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        let count = 4096;
        return (0..count)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let dims = n + n % 2;
    (1..=1024u64)
        .map(|i| {
            let u: Vec<f64> = (0..dims).map(|d| radical_inverse(i, PRIMES[d % PRIMES.len()])).collect();
            let mut x: Vec<f64> = u
                .chunks(2)
                .flat_map(|p| {
                    let r = (-2.0 * p[0].max(1e-300).ln()).sqrt();
                    let a = 2.0 * std::f64::consts::PI * p[1];
                    [r * a.cos(), r * a.sin()]
                })
                .take(n)
                .collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            x
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    out
}

/// Condition (i), sampled: `|A(xi)| > tol * ||coefficients||` on every grid
/// direction. Not a certificate.
pub fn check_interior_ellipticity(symbol: &HomogeneousPoly, grid: &[Vec<f64>], tol: f64) -> bool {
    let bound = tol * symbol.coeff_norm();
    !grid.is_empty() && grid.iter().all(|xi| symbol.eval(xi).norm() > bound)
}
