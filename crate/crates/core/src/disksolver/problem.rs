use crate::collarops::{BoundaryOperator, InteriorCollarOperator};
use crate::error::{Error, Result};

/// The model problem on the unit disk:
///
/// ```text
/// Laplace u = f                                  in the disk,
/// B_j u + sum_k C_{j,k} v_k = g_j                on the circle, j = 1..1+kappa,
/// ```
///
/// with constant-coefficient boundary operators, declared orders `m_j`
/// (`ord B_j <= m_j`) and `r_k` (`ord C_{j,k} <= m_j + r_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiskProblem {
    interior: InteriorCollarOperator,
    b: Vec<BoundaryOperator>,
    c: Vec<Vec<BoundaryOperator>>,
    m_orders: Vec<i64>,
    r_orders: Vec<i64>,
    band: usize,
}

impl DiskProblem {
    pub fn new(
        b: Vec<BoundaryOperator>,
        c: Vec<Vec<BoundaryOperator>>,
        m_orders: Vec<i64>,
        r_orders: Vec<i64>,
        band: usize,
    ) -> Result<Self> {
        let kappa = r_orders.len();
        if kappa == 0 {
            return Err(Error::InvalidProblem("kappa must be at least 1 (one r_k per extra unknown)".into()));
        }
        let rows = 1 + kappa;
        if b.len() != rows || m_orders.len() != rows {
            return Err(Error::InvalidProblem(format!(
                "expected {rows} boundary operators and orders m_j (q + kappa with q = 1), got {} and {}",
                b.len(),
                m_orders.len()
            )));
        }
        if c.len() != rows || c.iter().any(|row| row.len() != kappa) {
            return Err(Error::InvalidProblem(format!("C must be a {rows} x {kappa} table")));
        }
        for (j, (op, &mj)) in b.iter().zip(&m_orders).enumerate() {
            if let Some(ord) = op.order() {
                if (ord as i64) > mj {
                    return Err(Error::InvalidProblem(format!(
                        "ord B_{} = {ord} exceeds m_{} = {mj}",
                        j + 1,
                        j + 1
                    )));
                }
            }
        }
        for (j, row) in c.iter().enumerate() {
            for (k, op) in row.iter().enumerate() {
                if !op.is_tangential() {
                    return Err(Error::InvalidProblem(format!("C_{},{} must be tangential", j + 1, k + 1)));
                }
                let bound = m_orders[j] + r_orders[k];
                if let Some(ord) = op.order() {
                    if (ord as i64) > bound {
                        return Err(Error::InvalidProblem(format!(
                            "ord C_{},{} = {ord} exceeds m_{} + r_{} = {bound}",
                            j + 1,
                            k + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { interior: InteriorCollarOperator::disk_laplacian(), b, c, m_orders, r_orders, band })
    }

    /// Checks the standing assumptions `max m_j = max ord B_j`, `m >= 2q` and
    /// `m >= -r_k`. Per-mode algebra works without them; the Green tableau,
    /// the function spaces and the config loader require them.
    pub fn check_standing_assumptions(&self) -> Result<()> {
        let m = self.m();
        let max_ord = self.b.iter().filter_map(|op| op.order()).max().map(|o| o as i64);
        if max_ord != Some(m) {
            return Err(Error::Precondition(format!(
                "max m_j = {m} must equal max ord B_j = {}",
                max_ord.map_or("none".to_string(), |o| o.to_string())
            )));
        }
        if m < 2 * self.q() as i64 {
            return Err(Error::Precondition(format!(
                "m = {m} violates the standing assumption m >= 2q (here 2q = 2)"
            )));
        }
        if let Some((k, r)) = self.r_orders.iter().enumerate().find(|(_, &r)| m < -r) {
            return Err(Error::Precondition(format!(
                "m = {m} violates m >= -r_k for k = {} (r_k = {r})",
                k + 1
            )));
        }
        Ok(())
    }

    /// `d_nu^p u + v = g_1`, `d_nu^{p+1} u + d_Gamma v = g_2`, with
    /// `m_1 = p`, `m_2 = p + 1`, `r_1 = -p`. Needs `p >= 1` for `m >= 2`.
    pub fn normal_derivative_pair(p: u32, band: usize) -> Result<Self> {
        Self::new(
            vec![BoundaryOperator::partial_nu(p), BoundaryOperator::partial_nu(p + 1)],
            vec![vec![BoundaryOperator::identity()], vec![BoundaryOperator::partial_gamma(1)]],
            vec![p as i64, p as i64 + 1],
            vec![-(p as i64)],
            band,
        )
    }

    /// Replaces the interior operator (only the disk Laplacian is supported
    /// by the Green tableau and the solver).
    pub fn with_interior(mut self, interior: InteriorCollarOperator) -> Self {
        self.interior = interior;
        self
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = band;
        self
    }

    pub fn interior(&self) -> &InteriorCollarOperator {
        &self.interior
    }

    pub fn has_laplacian_interior(&self) -> bool {
        self.interior == InteriorCollarOperator::disk_laplacian()
    }

    pub fn kappa(&self) -> usize {
        self.r_orders.len()
    }

    /// Half the order of the interior operator.
    pub fn q(&self) -> usize {
        1
    }

    pub fn rows(&self) -> usize {
        1 + self.kappa()
    }

    pub fn m(&self) -> i64 {
        *self.m_orders.iter().max().expect("validated")
    }

    pub fn b(&self) -> &[BoundaryOperator] {
        &self.b
    }

    pub fn c(&self) -> &[Vec<BoundaryOperator>] {
        &self.c
    }

    pub fn m_orders(&self) -> &[i64] {
        &self.m_orders
    }

    pub fn r_orders(&self) -> &[i64] {
        &self.r_orders
    }

    pub fn band(&self) -> usize {
        self.band
    }
}
