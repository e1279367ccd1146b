//! Scalar operators `Σ_j (t^r)^j a_j(t) D^{n−j}` and their first-order
//! companion systems `w′ = t^r A(t) w` with `w_k = t^{−r(k−1)} y^{(k−1)}`.

use crate::error::{Error, Result};
use crate::integrate::{LinearSystem, Sample, Trajectory};
use crate::numerics::{re, CMatrix, Cx};
use crate::symbolic::{DenseLaurent, ExpFactor, LaurentPoly};

/// `Σ_{j=0}^{n} (t^r)^j a_j(t) y^{(n−j)} = 0` with `a_0 ≡ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarOperator {
    pub n: usize,
    pub r: u32,
    /// `a_1..a_n`; only non-positive powers of `t`.
    pub a: Vec<LaurentPoly>,
}

impl ScalarOperator {
    pub fn new(r: u32, a: Vec<LaurentPoly>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::MalformedOperator("order must be at least 1".into()));
        }
        for (j, aj) in a.iter().enumerate() {
            if let Some(k) = aj.max_power().filter(|&k| k > 0) {
                return Err(Error::MalformedOperator(format!("a_{} has a positive power t^{k}", j + 1)));
            }
        }
        Ok(Self { n: a.len(), r, a })
    }

    /// Coefficients `b_0..b_n` of `L = Σ_d b_d(t) D^d`; `b_n = 1`,
    /// `b_{n−j} = t^{rj} a_j`.
    pub fn derivative_coefficients(&self) -> Vec<LaurentPoly> {
        let mut b = vec![LaurentPoly::zero(); self.n + 1];
        b[self.n] = LaurentPoly::one();
        for (idx, aj) in self.a.iter().enumerate() {
            let j = idx + 1;
            b[self.n - j] = aj * &LaurentPoly::monomial(self.r as i32 * j as i32, re(1.0));
        }
        b
    }

    /// `L y` given `y, y′, ..., y^{(n)}` at `t`.
    pub fn apply(&self, t: f64, derivs: &[Cx]) -> Cx {
        self.derivative_coefficients().iter().zip(derivs).map(|(b, y)| b.eval_unchecked(t) * y).sum()
    }
}

/// `A(t) = Σ_{j=0}^{J} t^{−j} A_j`, multiplied by `t^r` in the system.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries {
    pub n: usize,
    pub r: u32,
    pub a: Vec<CMatrix>,
}

impl MatrixSeries {
    pub fn new(r: u32, a: Vec<CMatrix>) -> Result<Self> {
        let first = a.first().ok_or_else(|| Error::Dimension("series needs at least A_0".into()))?;
        let n = first.rows();
        for (j, m) in a.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("A_{j} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
        }
        if first.is_zero() {
            return Err(Error::Dimension("A_0 must be non-trivial".into()));
        }
        Ok(Self { n, r, a })
    }

    /// Highest index `J` present.
    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    /// Extends with zero matrices through `A_upto`.
    pub fn pad_zero(&mut self, upto: usize) {
        while self.a.len() <= upto {
            self.a.push(CMatrix::zeros(self.n, self.n));
        }
    }

    /// `P⁻¹ A_j P` for every term.
    pub fn conjugate(&self, p: &CMatrix, p_inv: &CMatrix) -> Self {
        Self { n: self.n, r: self.r, a: self.a.iter().map(|m| &(p_inv * m) * p).collect() }
    }

    /// Whether `t^r A(t)` is finite at `t = 0`.
    pub fn regular_at_zero(&self) -> bool {
        self.a.iter().enumerate().all(|(j, m)| j <= self.r as usize || m.is_zero())
    }

    /// `t^r A(t)` written into `out`.
    pub fn eval_into(&self, t: f64, out: &mut CMatrix) {
        let r = self.r as i32;
        out.fill_zero();
        for (j, m) in self.a.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let w = t.powi(r - j as i32);
            for i in 0..self.n {
                for k in 0..self.n {
                    out[(i, k)] += m[(i, k)] * w;
                }
            }
        }
    }

    /// `t^r A(t)` at `t`; fails where negative powers blow up.
    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        if t == 0.0 && !self.regular_at_zero() {
            return Err(Error::Domain("t^r A(t) is singular at t = 0".into()));
        }
        let mut m = CMatrix::zeros(self.n, self.n);
        self.eval_into(t, &mut m);
        Ok(m)
    }
}

impl LinearSystem for MatrixSeries {
    fn dim(&self) -> usize {
        self.n
    }
    fn matrix_into(&self, t: f64, out: &mut CMatrix) {
        self.eval_into(t, out)
    }
}

/// Companion system with components `w_k = t^{−r(k−1)} y^{(k−1)}`.
pub fn scalar_to_system(op: &ScalarOperator) -> Result<MatrixSeries> {
    let op = ScalarOperator::new(op.r, op.a.clone())?;
    let n = op.n;
    let r = op.r as usize;
    let deepest = op.a.iter().filter_map(|aj| aj.min_power()).map(|k| (-k) as usize).max().unwrap_or(0);
    let depth = deepest.max(r + 1);
    let mut a = vec![CMatrix::zeros(n, n); depth + 1];
    for k in 0..n.saturating_sub(1) {
        a[0][(k, k + 1)] = re(1.0);
    }
    for (idx, aj) in op.a.iter().enumerate() {
        let col = n - 1 - idx;
        for (power, c) in aj.terms() {
            a[(-power) as usize][(n - 1, col)] -= c;
        }
    }
    for k in 1..n {
        a[r + 1][(k, k)] -= re((r * k) as f64);
    }
    MatrixSeries::new(op.r, a)
}

/// `diag(1, t^r, t^{2r}, ..., t^{r(n−1)})`, mapping `w` to `(y, y′, ...)`.
pub fn row_scaling(n: usize, r: u32) -> Vec<ExpFactor> {
    (0..n).map(|k| ExpFactor::power((r as usize * k) as f64)).collect()
}

/// Maps a companion trajectory to `(y, y′, ..., y^{(n−1)})`.
pub fn reconstruct_scalar(traj: &Trajectory, r: u32) -> Result<Trajectory> {
    let scale = |s: &Sample| -> Result<Sample> {
        if !(s.t > 0.0) && r > 0 {
            return Err(Error::Domain(format!("sample at t = {} (need t > 0)", s.t)));
        }
        let w = s.w.iter().enumerate().map(|(k, &v)| v * s.t.powi((r as usize * k) as i32)).collect();
        Ok(Sample { t: s.t, w })
    };
    let samples = traj.samples.iter().map(scale).collect::<Result<Vec<_>>>()?;
    let status = match &traj.status {
        crate::integrate::Status::Aborted { reason, t_abort, last } => {
            crate::integrate::Status::Aborted { reason: *reason, t_abort: *t_abort, last: scale(last)? }
        }
        s => s.clone(),
    };
    Ok(Trajectory { samples, status, stats: traj.stats })
}

/// Plain companion form of a scalar operator in `(y, y′, ..., y^{(n−1)})`,
/// given derivative coefficients `b_0..b_n` (`b_n` must be nonzero).
#[derive(Clone, Debug)]
pub struct DerivativeCompanion {
    coeffs: Vec<DenseLaurent>,
    regular_at_zero: bool,
}

impl DerivativeCompanion {
    pub fn new(b: &[LaurentPoly]) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::MalformedOperator("operator order must be at least 1".into()));
        }
        if b[b.len() - 1] != LaurentPoly::one() {
            return Err(Error::MalformedOperator("leading coefficient must be 1".into()));
        }
        Ok(Self {
            regular_at_zero: b.iter().all(LaurentPoly::is_polynomial),
            coeffs: b.iter().map(LaurentPoly::to_dense).collect(),
        })
    }

    pub fn from_operator(op: &ScalarOperator) -> Result<Self> {
        Self::new(&op.derivative_coefficients())
    }

    pub fn regular_at_zero(&self) -> bool {
        self.regular_at_zero
    }
}

impl LinearSystem for DerivativeCompanion {
    fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn matrix_into(&self, t: f64, out: &mut CMatrix) {
        let n = self.dim();
        out.fill_zero();
        for k in 0..n - 1 {
            out[(k, k + 1)] = re(1.0);
        }
        for d in 0..n {
            out[(n - 1, d)] = -self.coeffs[d].eval(t);
        }
    }

    fn apply(&self, t: f64, w: &[Cx], dw: &mut [Cx], _scratch: &mut CMatrix) {
        let n = self.dim();
        dw[..n - 1].copy_from_slice(&w[1..n]);
        dw[n - 1] = -(0..n).map(|d| self.coeffs[d].eval(t) * w[d]).sum::<Cx>();
    }
}
