use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::disksolver::DiskProblem;
use crate::error::{Error, Result};
use crate::hormander::ModeSequence;
use crate::numeric::{KahanSum, C64};

use super::boundary::BoundaryOperator;
use super::interior::InteriorCollarOperator;
use super::tableau::GreenTableau;

/// Finite sum `sum c rho^n e^{ik theta}` with `n >= |k|` and `n - |k|` even,
/// so every term is a polynomial in `x_1, x_2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialField {
    terms: BTreeMap<(i64, i64), C64>,
}

impl RadialField {
    /// Terms `(k, n, c)`.
    pub fn new(terms: impl IntoIterator<Item = (i64, i64, C64)>) -> Result<Self> {
        let mut out = Self::default();
        for (k, n, c) in terms {
            if n < k.abs() || (n - k.abs()) % 2 != 0 {
                return Err(Error::Domain(format!("rho^{n} e^(i{k}theta) is not smooth on the disk")));
            }
            *out.terms.entry((k, n)).or_default() += c;
        }
        Ok(out)
    }

    /// Harmonic field `sum c_k rho^{|k|} e^{ik theta}`.
    pub fn harmonic(seq: &ModeSequence) -> Self {
        Self::new(seq.support().map(|(k, c)| (k, k.abs(), c))).expect("harmonic modes are smooth")
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        self.terms.iter().map(|(&(k, n), &c)| (k, n, c))
    }

    /// `Laplace` of the field, exact: `(n^2 - k^2) rho^{n-2}`.
    pub fn laplacian(&self) -> Self {
        let lap = InteriorCollarOperator::disk_laplacian();
        let mut out = Self::default();
        for (k, n, c) in self.terms() {
            for (power, v) in lap.apply_monomial(n, k) {
                *out.terms.entry((k, power)).or_default() += c * v;
            }
        }
        out.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        out
    }

    /// Boundary values of a collar operator applied to the field, per mode.
    pub fn trace_interior(&self, op: &InteriorCollarOperator) -> BTreeMap<i64, C64> {
        let mut out = BTreeMap::new();
        for (k, n, c) in self.terms() {
            *out.entry(k).or_default() += c * op.monomial_at_boundary(n, k);
        }
        out
    }

    /// Boundary values of a boundary operator applied to the field, per mode.
    pub fn trace(&self, op: &BoundaryOperator) -> BTreeMap<i64, C64> {
        let mut out = BTreeMap::new();
        for (k, n, c) in self.terms() {
            *out.entry(k).or_default() += c * op.radial_mode_action(n, k);
        }
        out
    }

    /// `(self, other)` in `L_2` of the disk.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut re = KahanSum::default();
        let mut im = KahanSum::default();
        for (k, n, c) in self.terms() {
            for (k2, n2, c2) in other.terms() {
                if k == k2 {
                    let v = c * c2.conj() * (2.0 * PI / (n + n2 + 2) as f64);
                    re.add(v.re);
                    im.add(v.im);
                }
            }
        }
        C64::new(re.value(), im.value())
    }
}

fn to_map(seq: &ModeSequence) -> BTreeMap<i64, C64> {
    seq.support().collect()
}

fn add_into(acc: &mut BTreeMap<i64, C64>, other: &BTreeMap<i64, C64>) {
    for (&k, &c) in other {
        *acc.entry(k).or_default() += c;
    }
}

/// `(f, g)` in `L_2` of the circle.
fn pair(f: &BTreeMap<i64, C64>, g: &BTreeMap<i64, C64>) -> C64 {
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for (k, a) in f {
        if let Some(b) = g.get(k) {
            let v = a * b.conj() * (2.0 * PI);
            re.add(v.re);
            im.add(v.im);
        }
    }
    C64::new(re.value(), im.value())
}

/// `(u, v_1..v_kappa)`.
#[derive(Debug, Clone)]
pub struct DirectData {
    pub u: RadialField,
    pub v: Vec<ModeSequence>,
}

/// `(omega, w_1..w_{m-2q+1}, h_1..h_{q+kappa})`.
#[derive(Debug, Clone)]
pub struct AdjointData {
    pub omega: RadialField,
    pub w: Vec<ModeSequence>,
    pub h: Vec<ModeSequence>,
}

/// Both sides of the special Green formula, the left side computed from the
/// problem and the right side from the tableau.
pub fn green_identity_sides(
    problem: &DiskProblem,
    tableau: &GreenTableau,
    direct: &DirectData,
    adjoint: &AdjointData,
) -> Result<(C64, C64)> {
    if direct.v.len() != problem.kappa() || adjoint.w.len() != tableau.r.len() || adjoint.h.len() != problem.rows() {
        return Err(Error::Domain("data does not match the problem dimensions".into()));
    }
    let u = &direct.u;
    let omega = &adjoint.omega;
    let lap = InteriorCollarOperator::disk_laplacian();
    let d_nu = InteriorCollarOperator::d_nu();

    let mut lhs = u.laplacian().inner(omega);
    for (j0, w) in adjoint.w.iter().enumerate() {
        let op = d_nu.pow(j0 as u32).compose(&lap);
        lhs += pair(&u.trace_interior(&op), &to_map(w));
    }
    for (j0, h) in adjoint.h.iter().enumerate() {
        let mut row = u.trace(&problem.b()[j0]);
        for (c, v) in problem.c()[j0].iter().zip(&direct.v) {
            add_into(&mut row, &to_map(&c.apply_tangential(v)));
        }
        lhs += pair(&row, &to_map(h));
    }

    let mut rhs = u.inner(&omega.laplacian());
    for (k0, k_op) in tableau.k_ops.iter().enumerate() {
        let mut right = omega.trace(k_op);
        for (j0, w) in adjoint.w.iter().enumerate() {
            add_into(&mut right, &to_map(&tableau.r[j0][k0].formal_adjoint_tangential()?.apply_tangential(w)));
        }
        for (j0, h) in adjoint.h.iter().enumerate() {
            add_into(&mut right, &to_map(&tableau.q[j0][k0].formal_adjoint_tangential()?.apply_tangential(h)));
        }
        let d = BoundaryOperator::from_d_terms([(k0 as u32, 0, C64::new(1.0, 0.0))]);
        rhs += pair(&u.trace(&d), &right);
    }
    for (k0, v) in direct.v.iter().enumerate() {
        let mut right = BTreeMap::new();
        for (j0, h) in adjoint.h.iter().enumerate() {
            add_into(&mut right, &to_map(&tableau.c_plus[j0][k0].apply_tangential(h)));
        }
        rhs += pair(&to_map(v), &right);
    }
    Ok((lhs, rhs))
}
