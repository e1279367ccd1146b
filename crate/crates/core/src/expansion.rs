//! Formal solutions `Φ(t) = T (Σ_k t^{−k} P̃_k) t^R exp(E(t))` of
//! `w′ = t^r A(t) w` by order-by-order dominant balance.
//!
//! In the eigenbasis of `A_0` (with `P̃_0 = I`, `Q_0 = Λ`) each order `k`
//! gives `P̃_k Λ − Λ P̃_k = S_k − Q_k` where
//! `S_k = A_k + Σ_{l=1}^{k−1} (A_l P̃_{k−l} − P̃_{k−l} Q_l)`. The diagonal
//! fixes `Q_k = Diag(S_k)`, the off-diagonal part fixes `P̃_k`, and order
//! `r + 1` yields `R` instead of another `Q`.

use crate::companion::MatrixSeries;
use crate::error::{Error, Result};
use crate::numerics::{check_distinct, eigen_decompose, re, CMatrix, Cx};
use crate::par::{self, Exec};
use crate::symbolic::{value_from_log, ExpFactor, LaurentPoly};

/// Diagonal matrix carrying the main diagonal of `a`.
pub fn diag_of(a: &CMatrix) -> CMatrix {
    CMatrix::from_diag(&a.diagonal())
}

/// `a` with its main diagonal set to exactly zero.
pub fn offdiag(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for i in 0..a.rows().min(a.cols()) {
        out[(i, i)] = re(0.0);
    }
    out
}

/// Solves `P Λ − Λ P = C` off the diagonal: `P[j][m] = C[j][m] / (λ_m − λ_j)`,
/// with a zero diagonal.
pub fn solve_offdiag(lambdas: &[Cx], c: &CMatrix) -> Result<CMatrix> {
    let n = lambdas.len();
    if c.rows() != n || c.cols() != n {
        return Err(Error::Dimension(format!("{}x{} right-hand side for {n} eigenvalues", c.rows(), c.cols())));
    }
    check_distinct(lambdas)?;
    let mut p = CMatrix::zeros(n, n);
    for j in 0..n {
        for m in 0..n {
            if j != m {
                p[(j, m)] = c[(j, m)] / (lambdas[m] - lambdas[j]);
            }
        }
    }
    Ok(p)
}

/// All data of the formal solution, computed in the eigenbasis of `A_0`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub r: u32,
    pub n: usize,
    pub lambdas: Vec<Cx>,
    /// `Q_0..Q_r`, each exactly diagonal.
    pub q: Vec<CMatrix>,
    /// `P̃_1..P̃_r`, each with an exactly zero diagonal.
    pub ptilde: Vec<CMatrix>,
    pub rmat: CMatrix,
    pub t: CMatrix,
    pub t_inv: CMatrix,
    /// `T⁻¹ A_j T` for `j = 0..=r+1`.
    pub basis_series: MatrixSeries,
}

impl Expansion {
    /// `P̃_k` with `P̃_0 = I`.
    pub fn ptilde_at(&self, k: usize) -> CMatrix {
        if k == 0 {
            CMatrix::identity(self.n)
        } else {
            self.ptilde[k - 1].clone()
        }
    }

    /// `‖offdiag(P̃_k Q_0 − Q_0 P̃_k − Σ_{l=1}^{k} (A_l P̃_{k−l} − P̃_{k−l} Q_l))‖_∞`
    /// for `k = 1..=r`.
    pub fn recursion_residual(&self, k: usize) -> f64 {
        let a = &self.basis_series.a;
        let pk = self.ptilde_at(k);
        let mut lhs = &(&pk * &self.q[0]) - &(&self.q[0] * &pk);
        for l in 1..=k {
            let p = self.ptilde_at(k - l);
            lhs = &lhs - &(&(&a[l] * &p) - &(&p * &self.q[l]));
        }
        offdiag(&lhs).norm_inf()
    }
}

fn balance(a: &[CMatrix], ptilde: &[CMatrix], q: &[CMatrix], k: usize) -> CMatrix {
    let mut s = a[k].clone();
    for l in 1..k {
        let p = &ptilde[k - l - 1];
        s = &s + &(&(&a[l] * p) - &(p * &q[l]));
    }
    s
}

/// Runs the recursion on `A_0..A_{r+1}`. Missing orders are an error; pad the
/// series with [`MatrixSeries::pad_zero`] if they are genuinely zero.
pub fn compute_expansion(series: &MatrixSeries) -> Result<Expansion> {
    let r = series.r as usize;
    let n = series.n;
    if series.a.len() < r + 2 {
        return Err(Error::Truncated { needed: r + 1, supplied: series.a.len() });
    }

    let a0 = &series.a[0];
    let (lambdas, t, t_inv) = if a0.is_diagonal() {
        let lambdas = a0.diagonal();
        check_distinct(&lambdas)?;
        (lambdas, CMatrix::identity(n), CMatrix::identity(n))
    } else {
        let eig = eigen_decompose(a0)?;
        (eig.lambdas, eig.t, eig.t_inv)
    };

    let mut basis = MatrixSeries { n, r: series.r, a: series.a[..r + 2].to_vec() };
    if !a0.is_diagonal() {
        basis = basis.conjugate(&t, &t_inv);
    }
    basis.a[0] = CMatrix::from_diag(&lambdas);

    let mut q = vec![basis.a[0].clone()];
    let mut ptilde: Vec<CMatrix> = Vec::with_capacity(r);
    for k in 1..=r {
        let s = balance(&basis.a, &ptilde, &q, k);
        q.push(diag_of(&s));
        ptilde.push(solve_offdiag(&lambdas, &offdiag(&s))?);
    }
    let rmat = diag_of(&balance(&basis.a, &ptilde, &q, r + 1));

    Ok(Expansion { r: series.r, n, lambdas, q, ptilde, rmat, t, t_inv, basis_series: basis })
}

/// One column of `Φ`: prefactor series times `t^{R_jj} exp(p_j(t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticColumn {
    pub index: usize,
    pub lambda: Cx,
    /// Orders `t⁰..t^{−r}` in the eigenbasis; order 0 is `e_j`.
    pub prefactor: Vec<Vec<Cx>>,
    /// The same orders mapped through `T`.
    pub physical: Vec<Vec<Cx>>,
    pub factor: ExpFactor,
}

impl AsymptoticColumn {
    /// `T (Σ_k t^{−k} P̃_k[:, j])` at `t`.
    pub fn prefactor_at(&self, t: f64) -> Vec<Cx> {
        let mut out = vec![re(0.0); self.physical[0].len()];
        let inv = 1.0 / t;
        let mut w = 1.0;
        for order in &self.physical {
            for (o, c) in out.iter_mut().zip(order) {
                *o += c * w;
            }
            w *= inv;
        }
        out
    }

    /// Derivative of [`Self::prefactor_at`] with respect to `t`.
    pub fn prefactor_derivative_at(&self, t: f64) -> Vec<Cx> {
        let mut out = vec![re(0.0); self.physical[0].len()];
        for (k, order) in self.physical.iter().enumerate().skip(1) {
            let w = -(k as f64) * t.powi(-(k as i32) - 1);
            for (o, c) in out.iter_mut().zip(order) {
                *o += c * w;
            }
        }
        out
    }
}

/// Columns of `Φ` in the order of `e.lambdas`.
pub fn assemble_columns(e: &Expansion) -> Vec<AsymptoticColumn> {
    let r = e.r as usize;
    (0..e.n)
        .map(|j| {
            let mut prefactor = vec![vec![re(0.0); e.n]];
            prefactor[0][j] = re(1.0);
            prefactor.extend(e.ptilde.iter().map(|p| p.column(j)));
            let physical = prefactor.iter().map(|v| e.t.matvec(v)).collect();
            let p = LaurentPoly::from_terms(
                e.q.iter().enumerate().map(|(k, qk)| ((r + 1 - k) as i32, qk[(j, j)] / (r + 1 - k) as f64)),
            );
            let factor = ExpFactor { rho: e.rmat[(j, j)], p, scale: re(1.0) };
            AsymptoticColumn { index: j, lambda: e.lambdas[j], prefactor, physical, factor }
        })
        .collect()
}

/// A numerically evaluated `Φ(t)` with per-entry overflow flags (row-major).
#[derive(Clone, Debug)]
pub struct MatrixValue {
    pub value: CMatrix,
    pub overflow: Vec<bool>,
}

impl MatrixValue {
    pub fn any_overflow(&self) -> bool {
        self.overflow.iter().any(|&o| o)
    }
}

/// `S · T (I + Σ t^{−k} P̃_k) t^R exp(E(t))` at `t > 0`, with `S` the
/// optional diagonal row scaling. Entries are assembled in log space so a
/// huge exponential times a small prefactor still comes out finite.
pub fn evaluate_matrix(cols: &[AsymptoticColumn], t: f64, scale_rows: Option<&[ExpFactor]>) -> Result<MatrixValue> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("asymptotic matrix evaluated at t = {t}")));
    }
    let n = cols.len();
    let row_logs: Vec<Cx> = match scale_rows {
        Some(s) => s.iter().map(|f| f.log_at(t, t)).collect(),
        None => vec![re(0.0); n],
    };
    let mut value = CMatrix::zeros(n, n);
    let mut overflow = vec![false; n * n];
    for (j, col) in cols.iter().enumerate() {
        let log = col.factor.log_at(t, t);
        for (i, v) in col.prefactor_at(t).into_iter().enumerate() {
            if v == re(0.0) {
                continue;
            }
            let fv = value_from_log(v.ln() + log + row_logs[i]);
            value[(i, j)] = fv.value;
            overflow[i * n + j] = fv.overflow;
        }
    }
    Ok(MatrixValue { value, overflow })
}

pub fn evaluate_many(
    exec: Exec,
    cols: &[AsymptoticColumn],
    ts: &[f64],
    scale_rows: Option<&[ExpFactor]>,
) -> Vec<Result<MatrixValue>> {
    par::map(exec, ts, |&t| evaluate_matrix(cols, t, scale_rows))
}

/// Relative defect `max_j ‖w_j′ − t^r A(t) w_j‖ / (t^r ‖w_j‖)` of the formal
/// columns against the truncated system, with `w_j′` from 5-point central
/// differences. Each column is divided by its exponential factor at `t`
/// first, which leaves the ratio unchanged and keeps everything finite.
pub fn formal_solution_defect(series: &MatrixSeries, cols: &[AsymptoticColumn], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("defect evaluated at t = {t}")));
    }
    let a = series.eval(t)?;
    let tr = t.powi(series.r as i32);
    let mut worst = 0.0f64;
    for col in cols {
        let g = col.factor.log_derivative().eval(t)?.norm();
        let h = 1e-3 * t.min(1.0 / g.max(1e-300)).min(t / 4.0);
        let log0 = col.factor.log_at(t, t);
        let at = |s: f64| -> Vec<Cx> {
            let scale = (col.factor.log_at(s, s) - log0).exp();
            col.prefactor_at(s).into_iter().map(|v| v * scale).collect()
        };
        let (m2, m1, p1, p2) = (at(t - 2.0 * h), at(t - h), at(t + h), at(t + 2.0 * h));
        let w = col.prefactor_at(t);
        let aw = a.matvec(&w);
        let mut num = 0.0f64;
        for i in 0..w.len() {
            let d = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
            num = num.max((d - aw[i]).norm());
        }
        let den = tr * w.iter().map(|v| v.norm()).fold(0.0, f64::max);
        worst = worst.max(num / den);
    }
    Ok(worst)
}
