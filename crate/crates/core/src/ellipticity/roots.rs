use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::C64;

/// A root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

/// Roots of a polynomial split by the sign of the imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSplit {
    pub plus_roots: Vec<Root>,
    pub minus_roots: Vec<Root>,
    pub tol: f64,
}

impl RootSplit {
    pub fn plus_multiplicity(&self) -> usize {
        self.plus_roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn minus_multiplicity(&self) -> usize {
        self.minus_roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Horner evaluation of an ascending coefficient list.
pub fn poly_eval(poly: &[C64], z: C64) -> C64 {
    poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `l`-th derivative as an ascending coefficient list.
pub fn poly_derivative(poly: &[C64], l: usize) -> Vec<C64> {
    if l >= poly.len() {
        return vec![];
    }
    (l..poly.len())
        .map(|i| poly[i] * crate::numeric::falling_factorial(i as i64, l as u32))
        .collect()
}

/// Drops exactly-zero leading (highest-degree) coefficients.
pub fn trim(poly: &[C64]) -> &[C64] {
    let mut n = poly.len();
    while n > 0 && poly[n - 1] == C64::new(0.0, 0.0) {
        n -= 1;
    }
    &poly[..n]
}

fn l1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity balancing with powers of two.
fn balance(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(a[(j, i)]);
                    r += l1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                a.row_mut(i).unscale_mut(f);
                a.column_mut(i).scale_mut(f);
            }
        }
    }
}

/// Eigenvalues of the balanced companion matrix (no clustering).
pub fn raw_roots(poly: &[C64]) -> Result<Vec<C64>> {
    let poly = trim(poly);
    if poly.len() < 2 {
        return Err(Error::Domain("root finding needs a polynomial of degree >= 1".into()));
    }
    if poly.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Domain("non-finite polynomial coefficient".into()));
    }
    let n = poly.len() - 1;
    let lead = poly[n];
    let mut comp = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -poly[n - 1 - j] / lead;
    }
    for i in 1..n {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    balance(&mut comp);
    if let Some(eig) = schur_eigenvalues(comp.clone(), 30 * n.max(2)) {
        return Ok(eig);
    }
    // Shifted QR can stall on cyclic structure (e.g. z^n + 1); a fixed
    // unitary similarity breaks it.
    let q = scrambler(n);
    schur_eigenvalues(&q * comp * q.adjoint(), 2_000)
        .ok_or_else(|| Error::Consistency("Schur iteration did not converge".into()))
}

fn schur_eigenvalues(m: DMatrix<C64>, max_iter: usize) -> Option<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, max_iter)?;
    schur.eigenvalues().map(|e| e.iter().copied().collect())
}

fn scrambler(n: usize) -> DMatrix<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    g.qr().q()
}

fn newton_polish(poly: &[C64], z: C64) -> C64 {
    let dp = poly_derivative(poly, 1);
    let mut z = z;
    let mut fz = poly_eval(poly, z).norm();
    for _ in 0..3 {
        let d = poly_eval(&dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - poly_eval(poly, z) / d;
        let fc = poly_eval(poly, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// All roots with multiplicities, split by half-plane.
///
/// Eigenvalues within `sqrt(tol) * R` of each other (single linkage, `R` the
/// largest root modulus) form one multiple root represented by the cluster
/// mean; a `mu`-fold root perturbs eigenvalues by about `eps^{1/mu}`, which
/// a radius of `tol` would not absorb. A cluster with `|Im| <= tol * R` is a
/// real root and yields [`Error::RealRoot`].
pub fn roots_with_multiplicity(poly: &[C64], tol: f64) -> Result<RootSplit> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("root tolerance must lie in (0, 1), got {tol}")));
    }
    let poly = trim(poly);
    let eig = raw_roots(poly)?;
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let radius = tol.sqrt() * scale;

    let n = eig.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut label, i);
        match clusters.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(eig[i]),
            None => clusters.push((root, vec![eig[i]])),
        }
    }
    let mut split = RootSplit { plus_roots: vec![], minus_roots: vec![], tol };
    for (_, members) in clusters {
        let mu = members.len();
        let mean = members.iter().sum::<C64>() / mu as f64;
        let value = if mu == 1 { newton_polish(poly, mean) } else { mean };
        if value.im.abs() <= tol * scale {
            return Err(Error::RealRoot { re: value.re, im: value.im });
        }
        let root = Root { value, multiplicity: mu };
        if value.im > 0.0 {
            split.plus_roots.push(root);
        } else {
            split.minus_roots.push(root);
        }
    }
    let key = |r: &Root| (r.value.re, r.value.im);
    split.plus_roots.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    split.minus_roots.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    Ok(split)
}

/// Condition (ii): `q` roots in each open half-plane, with multiplicity.
pub fn check_proper_ellipticity(split: &RootSplit, q: usize) -> bool {
    split.plus_multiplicity() == q && split.minus_multiplicity() == q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn quadratic() {
        let s = roots_with_multiplicity(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-8).unwrap();
        assert_eq!(s.plus_roots.len(), 1);
        assert!(close(s.plus_roots[0].value, c(0.0, 1.0), 1e-15));
        assert!(close(s.minus_roots[0].value, c(0.0, -1.0), 1e-15));
        assert!(check_proper_ellipticity(&s, 1));
    }

    #[test]
    fn fourth_roots_of_minus_one() {
        let s = roots_with_multiplicity(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-8)
            .unwrap();
        let e = |a: f64| C64::from_polar(1.0, a * PI / 4.0);
        assert!(close(s.minus_roots[0].value, e(5.0), 1e-14));
        assert!(close(s.minus_roots[1].value, e(7.0), 1e-14));
        assert!(close(s.plus_roots[0].value, e(3.0), 1e-14));
        assert!(close(s.plus_roots[1].value, e(1.0), 1e-14));
        assert!(check_proper_ellipticity(&s, 2));
    }

    #[test]
    fn double_root_is_merged() {
        // (z - 2i)^2 = z^2 - 4i z - 4
        let s = roots_with_multiplicity(&[c(-4.0, 0.0), c(0.0, -4.0), c(1.0, 0.0)], 1e-8).unwrap();
        assert_eq!(s.plus_roots, vec![Root { value: s.plus_roots[0].value, multiplicity: 2 }]);
        assert!(close(s.plus_roots[0].value, c(0.0, 2.0), 1e-12));
        assert!(s.minus_roots.is_empty());
        assert!(!check_proper_ellipticity(&s, 1));
    }

    #[test]
    fn wrong_split_and_real_root() {
        // (z - i)(z - 2i) = z^2 - 3i z - 2
        let s = roots_with_multiplicity(&[c(-2.0, 0.0), c(0.0, -3.0), c(1.0, 0.0)], 1e-8).unwrap();
        assert_eq!(s.plus_multiplicity(), 2);
        assert!(!check_proper_ellipticity(&s, 1));
        let err = roots_with_multiplicity(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-8).unwrap_err();
        assert!(matches!(err, Error::RealRoot { .. }));
    }

    #[test]
    fn degenerate_input() {
        assert!(roots_with_multiplicity(&[c(1.0, 0.0)], 1e-8).is_err());
        assert!(roots_with_multiplicity(&[c(1.0, 0.0), c(0.0, 0.0)], 1e-8).is_err());
    }

    #[test]
    fn derivatives() {
        let p = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert_eq!(poly_derivative(&p, 1), vec![c(2.0, 0.0), c(6.0, 0.0)]);
        assert_eq!(poly_derivative(&p, 2), vec![c(6.0, 0.0)]);
        assert!(poly_derivative(&p, 3).is_empty());
        assert_eq!(poly_eval(&p, c(2.0, 0.0)), c(17.0, 0.0));
    }
}
