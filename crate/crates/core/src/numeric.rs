//! Small numerical helpers shared by the solver modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Kahan-Babuska compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `n (n-1) ... (n-a+1)`; valid for negative `n` too.
pub fn falling_factorial(n: i64, a: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..a as i64 {
        acc *= (n - i) as f64;
    }
    acc
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `i^n` for any integer `n`.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

pub fn vec_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|det M| / prod ||row_i||_2`, in `[0, 1]` by Hadamard's inequality.
/// Invariant under scaling any row by a nonzero factor.
pub fn hadamard_ratio(m: &DMatrix<C64>) -> f64 {
    let mut denom = 1.0;
    for i in 0..m.nrows() {
        let row_norm = m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if row_norm == 0.0 {
            return 0.0;
        }
        denom *= row_norm;
    }
    m.determinant().norm() / denom
}

/// A square matrix with its columns and then its rows scaled to unit max-norm:
/// `scaled = diag(row_scale) * M * diag(col_scale)`.
#[derive(Debug, Clone)]
pub struct Equilibrated {
    pub scaled: DMatrix<C64>,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl Equilibrated {
    pub fn new(m: &DMatrix<C64>) -> Self {
        let (nr, nc) = m.shape();
        let col_scale: Vec<f64> = (0..nc)
            .map(|j| {
                let mx = m.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if mx > 0.0 {
                    1.0 / mx
                } else {
                    1.0
                }
            })
            .collect();
        let mut scaled = m.clone();
        for j in 0..nc {
            scaled.column_mut(j).scale_mut(col_scale[j]);
        }
        let row_scale: Vec<f64> = (0..nr)
            .map(|i| {
                let mx = scaled.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if mx > 0.0 {
                    1.0 / mx
                } else {
                    1.0
                }
            })
            .collect();
        for i in 0..nr {
            scaled.row_mut(i).scale_mut(row_scale[i]);
        }
        Self { scaled, row_scale, col_scale }
    }

    pub fn hadamard_ratio(&self) -> f64 {
        hadamard_ratio(&self.scaled)
    }
}

/// Rank, null spaces and a least-norm solver for a small complex matrix,
/// computed on its equilibrated form.
#[derive(Debug, Clone)]
pub struct RankAnalysis {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Unit vectors `x` with `M x = 0` (original coordinates).
    pub right_null: Vec<DVector<C64>>,
    /// Unit vectors `z` with `z^H M = 0` (original coordinates).
    pub left_null: Vec<DVector<C64>>,
    eq: Equilibrated,
    u: DMatrix<C64>,
    v: DMatrix<C64>,
    threshold: f64,
}

pub struct LeastNormSolve {
    pub x: DVector<C64>,
    /// `||R (M x - b)|| / ||R b||` in the row-equilibrated norm (0 when `b = 0`).
    pub relative_residual: f64,
}

impl RankAnalysis {
    pub fn new(m: &DMatrix<C64>, rel_tol: f64) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "rank analysis expects a square matrix");
        let eq = Equilibrated::new(m);
        let svd = eq.scaled.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V^T").adjoint();
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        let threshold = rel_tol * smax.max(f64::MIN_POSITIVE);
        let rank = sigma.iter().filter(|&&s| s > threshold && smax > 0.0).count();

        let mut right_null = Vec::new();
        let mut left_null = Vec::new();
        for (idx, &s) in sigma.iter().enumerate() {
            if s > threshold && smax > 0.0 {
                continue;
            }
            let y = v.column(idx).into_owned();
            let x = DVector::from_iterator(n, y.iter().zip(&eq.col_scale).map(|(z, d)| z * *d));
            right_null.push(normalize(x));
            let w = u.column(idx).into_owned();
            let z = DVector::from_iterator(n, w.iter().zip(&eq.row_scale).map(|(z, r)| z * *r));
            left_null.push(normalize(z));
        }
        let right_null = orthonormalize(right_null);
        let left_null = orthonormalize(left_null);
        Self { rank, singular_values: sigma, right_null, left_null, eq, u, v, threshold }
    }

    pub fn nullity(&self) -> usize {
        self.eq.scaled.ncols() - self.rank
    }

    pub fn corank(&self) -> usize {
        self.eq.scaled.nrows() - self.rank
    }

    pub fn normalized_det(&self) -> f64 {
        self.eq.hadamard_ratio()
    }

    /// Least-norm solution of the equilibrated system, mapped back.
    pub fn solve(&self, b: &DVector<C64>) -> LeastNormSolve {
        let n = b.len();
        let rb = DVector::from_iterator(n, b.iter().zip(&self.eq.row_scale).map(|(z, r)| z * *r));
        let mut y = DVector::<C64>::zeros(n);
        for (idx, &s) in self.singular_values.iter().enumerate() {
            if s <= self.threshold {
                continue;
            }
            let coeff = self.u.column(idx).dotc(&rb) / s;
            y += self.v.column(idx) * coeff;
        }
        let residual = &self.eq.scaled * &y - &rb;
        let rb_norm = vec_norm(&rb);
        let relative_residual = if rb_norm == 0.0 { 0.0 } else { vec_norm(&residual) / rb_norm };
        let x = DVector::from_iterator(n, y.iter().zip(&self.eq.col_scale).map(|(z, d)| z * *d));
        LeastNormSolve { x, relative_residual }
    }
}

fn normalize(v: DVector<C64>) -> DVector<C64> {
    let n = vec_norm(&v);
    if n > 0.0 {
        v.unscale(n)
    } else {
        v
    }
}

/// Modified Gram-Schmidt; drops numerically dependent vectors.
pub fn orthonormalize(vs: Vec<DVector<C64>>) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for q in &out {
            let c = q.dotc(&v);
            v -= q * c;
        }
        let n = vec_norm(&v);
        if n > 1e-12 {
            out.push(v.unscale(n));
        }
    }
    out
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
