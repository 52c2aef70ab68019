use serde::Serialize;

use crate::disksolver::DiskProblem;
use crate::error::{Error, Result};

use super::boundary::{join_terms, BoundaryOperator};
use super::interior::InteriorCollarOperator;

/// Operators of the special Green formula for `Laplace u` on the disk:
///
/// ```text
/// (Au, w)_O + sum_j (D_nu^{j-1} Au, w_j) + sum_j (B_j u + sum_k C_jk v_k, h_j)
///   = (u, A+ w)_O + sum_k (D_nu^{k-1} u, K_k w + sum_j R+_jk w_j + sum_j Q+_jk h_j)
///     + sum_k (v_k, sum_j C+_jk h_j)
/// ```
///
/// Indices are zero-based in storage: `k_ops[k - 1] = K_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTableau {
    pub k_ops: Vec<BoundaryOperator>,
    /// `(m - 2q + 1) x (m + 1)`.
    pub r: Vec<Vec<BoundaryOperator>>,
    /// `(q + kappa) x (m + 1)`.
    pub q: Vec<Vec<BoundaryOperator>>,
    /// `(q + kappa) x kappa`.
    pub c_plus: Vec<Vec<BoundaryOperator>>,
    pub q_half_order: usize,
    pub kappa: usize,
    pub m: i64,
    pub m_orders: Vec<i64>,
    pub r_orders: Vec<i64>,
}

fn exceeds(op: &BoundaryOperator, bound: i64) -> bool {
    match op.order() {
        None => false,
        Some(o) => bound < 0 || o as i64 > bound,
    }
}

impl GreenTableau {
    /// Checks the order bounds `ord K_k <= 2q - k`, `ord R_jk <= 2q + j - k`,
    /// `ord Q_jk <= m_j - k + 1` (a negative bound means the entry vanishes)
    /// and that all of `R`, `Q`, `C+` are tangential.
    pub fn validate(&self) -> Result<()> {
        let q2 = 2 * self.q_half_order as i64;
        let cols = (self.m + 1) as usize;
        if self.k_ops.len() != cols
            || self.r.len() != (self.m - q2 + 1) as usize
            || self.q.len() != self.q_half_order + self.kappa
            || self.c_plus.len() != self.q.len()
        {
            return Err(Error::Consistency("green tableau has the wrong shape".into()));
        }
        for (idx, op) in self.k_ops.iter().enumerate() {
            let k = idx as i64 + 1;
            if exceeds(op, q2 - k) {
                return Err(Error::Consistency(format!("ord K_{k} exceeds {}", q2 - k)));
            }
        }
        for (j0, row) in self.r.iter().enumerate() {
            for (k0, op) in row.iter().enumerate() {
                let bound = q2 + j0 as i64 - k0 as i64;
                if !op.is_tangential() || exceeds(op, bound) {
                    return Err(Error::Consistency(format!("R_{},{} violates ord <= {bound}", j0 + 1, k0 + 1)));
                }
            }
        }
        for (j0, row) in self.q.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Consistency("Q row has the wrong length".into()));
            }
            for (k0, op) in row.iter().enumerate() {
                let bound = self.m_orders[j0] - k0 as i64;
                if !op.is_tangential() || exceeds(op, bound) {
                    return Err(Error::Consistency(format!("Q_{},{} violates ord <= {bound}", j0 + 1, k0 + 1)));
                }
            }
        }
        for row in &self.c_plus {
            if row.len() != self.kappa || row.iter().any(|op| !op.is_tangential()) {
                return Err(Error::Consistency("C+ must be a tangential (q + kappa) x kappa table".into()));
            }
        }
        Ok(())
    }
}

/// Builds the tableau for a problem whose interior operator is the disk
/// Laplacian. `K_1 = d_nu`, `K_2 = -i` come from the second Green identity
/// `(Lu, w) - (u, Lw) = (u, d_nu w)_G - (d_nu u, w)_G` (interior normal).
pub fn build_green_tableau(problem: &DiskProblem) -> Result<GreenTableau> {
    if !problem.has_laplacian_interior() {
        return Err(Error::Unsupported(
            "the special Green formula is implemented for the disk Laplacian only".into(),
        ));
    }
    let q = problem.q();
    let m = problem.m();
    if m < 2 * q as i64 {
        return Err(Error::Precondition(format!(
            "m = {m} violates the standing assumption m >= 2q (here 2q = {})",
            2 * q
        )));
    }
    let mu = m as u32;
    let mut k_ops = vec![BoundaryOperator::zero(); (m + 1) as usize];
    k_ops[0] = BoundaryOperator::partial_nu(1);
    k_ops[1] = BoundaryOperator::constant(crate::numeric::C64::new(0.0, -1.0));

    let lap = InteriorCollarOperator::disk_laplacian();
    let d_nu = InteriorCollarOperator::d_nu();
    let r = (0..(m - 2 * q as i64 + 1) as u32)
        .map(|j0| d_nu.pow(j0).compose(&lap).restrict_to_boundary().nu_decompose(mu))
        .collect::<Result<Vec<_>>>()?;
    let qm = problem.b().iter().map(|b| b.nu_decompose(mu)).collect::<Result<Vec<_>>>()?;
    let c_plus = problem
        .c()
        .iter()
        .map(|row| row.iter().map(BoundaryOperator::formal_adjoint_tangential).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let tableau = GreenTableau {
        k_ops,
        r,
        q: qm,
        c_plus,
        q_half_order: q,
        kappa: problem.kappa(),
        m,
        m_orders: problem.m_orders().to_vec(),
        r_orders: problem.r_orders().to_vec(),
    };
    tableau.validate()?;
    Ok(tableau)
}

/// One boundary equation `sum op_i label_i = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointRow {
    #[serde(skip)]
    pub terms: Vec<(String, BoundaryOperator)>,
    pub rhs: String,
    pub text: String,
}

impl AdjointRow {
    fn new(terms: Vec<(String, BoundaryOperator)>, rhs: String) -> Self {
        let rendered: Vec<_> = terms.iter().flat_map(|(label, op)| op.render_applied(label)).collect();
        let text = format!("{} = {rhs}", join_terms(&rendered));
        Self { terms, rhs, text }
    }

    /// Operator acting on `label` in this row (zero if absent).
    pub fn operator_on(&self, label: &str) -> BoundaryOperator {
        self.terms
            .iter()
            .filter(|(l, _)| l == label)
            .fold(BoundaryOperator::zero(), |acc, (_, op)| acc.add(op))
    }
}

/// The formally adjoint problem `A+ w = eta`, rows (boundary) `k = 1..m+1`
/// and the tangential rows `k = 1..kappa`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointProblem {
    pub interior: String,
    pub boundary_rows: Vec<AdjointRow>,
    pub tangential_rows: Vec<AdjointRow>,
    pub unknowns: Vec<String>,
    #[serde(skip)]
    pub c_plus: Vec<Vec<BoundaryOperator>>,
}

impl AdjointProblem {
    pub fn lines(&self) -> Vec<String> {
        std::iter::once(self.interior.clone())
            .chain(self.boundary_rows.iter().chain(&self.tangential_rows).map(|r| r.text.clone()))
            .collect()
    }
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 && prefix == "w" {
        return vec![prefix.to_string()];
    }
    (1..=n).map(|j| format!("{prefix}_{j}")).collect()
}

pub fn adjoint_problem(tableau: &GreenTableau) -> Result<AdjointProblem> {
    tableau.validate()?;
    let w = labels("w", tableau.r.len());
    let h = labels("h", tableau.q.len());
    let cols = tableau.k_ops.len();
    let mut boundary_rows = Vec::with_capacity(cols);
    for k0 in 0..cols {
        let mut terms = vec![("ω".to_string(), tableau.k_ops[k0].clone())];
        for (j0, row) in tableau.r.iter().enumerate() {
            terms.push((w[j0].clone(), row[k0].formal_adjoint_tangential()?));
        }
        for (j0, row) in tableau.q.iter().enumerate() {
            terms.push((h[j0].clone(), row[k0].formal_adjoint_tangential()?));
        }
        terms.retain(|(_, op)| !op.is_zero());
        boundary_rows.push(AdjointRow::new(terms, format!("ψ_{}", k0 + 1)));
    }
    let mut tangential_rows = Vec::with_capacity(tableau.kappa);
    for k0 in 0..tableau.kappa {
        let mut terms: Vec<_> = tableau
            .c_plus
            .iter()
            .enumerate()
            .map(|(j0, row)| (h[j0].clone(), row[k0].clone()))
            .collect();
        terms.retain(|(_, op)| !op.is_zero());
        tangential_rows.push(AdjointRow::new(terms, format!("ψ_{}", cols + k0 + 1)));
    }
    let unknowns = std::iter::once("ω".to_string()).chain(w).chain(h).collect();
    Ok(AdjointProblem {
        interior: "Δω = η".into(),
        boundary_rows,
        tangential_rows,
        unknowns,
        c_plus: tableau.c_plus.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::C64;

    fn paper_problem() -> DiskProblem {
        DiskProblem::normal_derivative_pair(1, 8).unwrap()
    }

    #[test]
    fn laplacian_entries() {
        let t = build_green_tableau(&paper_problem()).unwrap();
        assert_eq!(t.k_ops[0], BoundaryOperator::partial_nu(1));
        assert_eq!(t.k_ops[1], BoundaryOperator::constant(C64::new(0.0, -1.0)));
        assert!(t.k_ops[2].is_zero());
        assert_eq!(t.r.len(), 1);
        let lap = BoundaryOperator::reassemble(&t.r[0]);
        assert_eq!(lap.render(), "∂_ν² + ∂_Γ² - ∂_ν");
        let adj: Vec<_> = t.c_plus.iter().map(|row| row[0].render()).collect();
        assert_eq!(adj, vec!["1", "-∂_Γ"]);
    }

    #[test]
    fn adjoint_rows_of_the_example() {
        let adj = adjoint_problem(&build_green_tableau(&paper_problem()).unwrap()).unwrap();
        assert_eq!(
            adj.lines(),
            vec![
                "Δω = η",
                "∂_ν ω + ∂_Γ² w = ψ_1",
                "-iω - iw + ih_1 = ψ_2",
                "-w - h_2 = ψ_3",
                "h_1 - ∂_Γ h_2 = ψ_4",
            ]
        );
        let row2 = &adj.boundary_rows[1];
        assert_eq!(row2.operator_on("w"), BoundaryOperator::constant(C64::new(0.0, -1.0)));
        assert_eq!(row2.operator_on("h_1"), BoundaryOperator::constant(C64::new(0.0, 1.0)));
        assert_eq!(adj.tangential_rows[0].operator_on("h_2"), BoundaryOperator::partial_gamma(1).scale(C64::new(-1.0, 0.0)));
    }

    #[test]
    fn zero_boundary_operators() {
        let zero = BoundaryOperator::zero();
        let p = DiskProblem::new(vec![zero.clone(), zero.clone()], vec![vec![zero.clone()], vec![zero]], vec![2, 2], vec![0], 4)
            .unwrap();
        let t = build_green_tableau(&p).unwrap();
        assert!(t.q.iter().flatten().all(BoundaryOperator::is_zero));
        let adj = adjoint_problem(&t).unwrap();
        assert_eq!(adj.boundary_rows[0].text, "∂_ν ω + ∂_Γ² w = ψ_1");
        assert_eq!(adj.boundary_rows[2].text, "-w = ψ_3");
        assert_eq!(adj.tangential_rows[0].text, "0 = ψ_4");
    }

    #[test]
    fn tangential_block_is_an_involution() {
        let p = paper_problem();
        let adj = adjoint_problem(&build_green_tableau(&p).unwrap()).unwrap();
        for (row, orig) in adj.c_plus.iter().zip(p.c()) {
            for (cp, c) in row.iter().zip(orig) {
                assert_eq!(&cp.formal_adjoint_tangential().unwrap(), c);
            }
        }
    }

    #[test]
    fn errors() {
        let low = DiskProblem::normal_derivative_pair(0, 4).unwrap();
        assert!(matches!(build_green_tableau(&low), Err(Error::Precondition(_))));
        let other = paper_problem().with_interior(InteriorCollarOperator::d_rho());
        assert!(matches!(build_green_tableau(&other), Err(Error::Unsupported(_))));
    }
}
