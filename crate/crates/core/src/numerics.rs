//! Dense complex matrices and the small-matrix eigendecomposition used to
//! diagonalize the leading coefficient of a system.
//!
//! Eigenvalues come from the characteristic polynomial (Faddeev–LeVerrier)
//! solved by Aberth–Ehrlich iteration; eigenvectors from a null-space solve
//! followed by Newton refinement of each eigenpair. This is only sensible
//! for small `n`, and [`MAX_EIGEN_DIM`] enforces that.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Cx = Complex64;

/// Largest dimension accepted by [`char_poly`] and [`eigen_decompose`].
pub const MAX_EIGEN_DIM: usize = 8;

const ABERTH_MAX_ITER: usize = 500;

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Cx {
    Cx::new(x, 0.0)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Cx::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_diag(d: &[Cx]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from complex rows. Fails if rows are ragged or empty.
    pub fn from_rows(rows: Vec<Vec<Cx>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Dimension("matrix must have at least one entry".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::Dimension(format!("row {bad} has {} entries, expected {n_cols}", rows[bad].len())));
        }
        Ok(Self { rows: n_rows, cols: n_cols, data: rows.into_iter().flatten().collect() })
    }

    /// Real-valued convenience constructor. Panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Cx>> = rows.iter().map(|r| r.iter().map(|&x| re(x)).collect()).collect();
        Self::from_rows(rows).expect("ragged real matrix literal")
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(Cx::new(0.0, 0.0));
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cx] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Cx] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Cx> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Cx> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: Cx) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == Cx::new(0.0, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn matvec(&self, x: &[Cx]) -> Vec<Cx> {
        let mut out = vec![Cx::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[Cx], out: &mut [Cx]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_checked(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &CMatrix, f: impl Fn(Cx, Cx) -> Cx) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Cx;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.mul_checked(rhs).expect("matrix shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "{:>12.6}{:+.6}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn mat_inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("inverse of non-square {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let threshold = 1e-13 * a.norm_inf();
    let mut work = a.clone();
    let mut inv = CMatrix::identity(n);
    for col in 0..n {
        let (piv_row, piv_mag) =
            (col..n)
                .map(|i| (i, work[(i, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_mag > threshold) {
            return Err(Error::SingularMatrix { column: col, pivot: piv_mag });
        }
        if piv_row != col {
            for j in 0..n {
                work.data.swap(piv_row * n + j, col * n + j);
                inv.data.swap(piv_row * n + j, col * n + j);
            }
        }
        let p = work[(col, col)].inv();
        for j in 0..n {
            work[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = work[(i, col)];
            if f == Cx::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let wv = work[(col, j)];
                let iv = inv[(col, j)];
                work[(i, j)] -= f * wv;
                inv[(i, j)] -= f * iv;
            }
        }
    }
    Ok(inv)
}

/// Monic characteristic polynomial `det(λI − A)`, coefficients in
/// descending degree (`[1, c_{n-1}, ..., c_0]`).
pub fn char_poly(a: &CMatrix) -> Result<Vec<Cx>> {
    if !a.is_square() {
        return Err(Error::Dimension("characteristic polynomial of non-square matrix".into()));
    }
    let n = a.rows;
    if n > MAX_EIGEN_DIM {
        return Err(Error::Dimension(format!("n = {n} exceeds the cap of {MAX_EIGEN_DIM}")));
    }
    // Faddeev–LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k.
    let mut coeffs = vec![re(1.0)];
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        let c_prev = *coeffs.last().unwrap();
        for i in 0..n {
            next[(i, i)] += c_prev;
        }
        let am = a * &next;
        let trace: Cx = am.diagonal().into_iter().sum();
        coeffs.push(-trace / k as f64);
        m = next;
    }
    coeffs[0] = re(1.0);
    Ok(coeffs)
}

fn horner(coeffs: &[Cx], z: Cx) -> (Cx, Cx) {
    // value and derivative
    let mut p = coeffs[0];
    let mut dp = Cx::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn abs_horner(coeffs: &[Cx], r: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * r + c.norm())
}

/// All roots of a monic polynomial given in descending degree, by
/// Aberth–Ehrlich simultaneous iteration followed by a Newton polish.
pub fn poly_roots(coeffs: &[Cx]) -> Result<Vec<Cx>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Err(Error::Dimension("polynomial must have degree >= 1".into()));
    }
    if (coeffs[0] - re(1.0)).norm() > 1e-14 {
        return Err(Error::Dimension("polynomial must be monic".into()));
    }
    if degree == 1 {
        return Ok(vec![-coeffs[1]]);
    }

    // Cauchy-type radius bound for the initial circle.
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let start = {
        let mean = -coeffs[1] / degree as f64;
        let spread = coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm().powf(1.0 / (i + 1) as f64))
            .fold(0.0, f64::max)
            .min(radius);
        (mean, spread.max(1e-3))
    };
    let mut z: Vec<Cx> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            start.0 + Cx::from_polar(start.1, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..degree {
            let (p, dp) = horner(coeffs, z[k]);
            if p == Cx::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Cx = (0..degree).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (re(1.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }

    for root in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = horner(coeffs, *root);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.is_finite() {
                    *root -= step;
                }
            }
        }
    }

    let coeff_scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let accurate = z.iter().all(|&root| {
        let p = horner(coeffs, root).0.norm();
        p <= 1e-10 * coeff_scale || p <= 64.0 * f64::EPSILON * abs_horner(coeffs, root.norm())
    });
    if !(converged || accurate) || !z.iter().all(|v| v.is_finite()) {
        return Err(Error::NoConvergence { iterations: ABERTH_MAX_ITER });
    }
    Ok(z)
}

/// Eigenvalues, right eigenvectors (columns of `t`) and `t⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambdas: Vec<Cx>,
    pub t: CMatrix,
    pub t_inv: CMatrix,
}

/// Separation threshold below which two eigenvalues count as repeated.
pub fn distinctness_threshold(lambdas: &[Cx]) -> f64 {
    1e-8 * lambdas.iter().map(|l| l.norm()).fold(1.0, f64::max)
}

/// Fails with [`Error::DegenerateSpectrum`] naming the closest pair if any
/// two entries are within [`distinctness_threshold`].
pub fn check_distinct(lambdas: &[Cx]) -> Result<()> {
    let eps = distinctness_threshold(lambdas);
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            let gap = (lambdas[i] - lambdas[j]).norm();
            if gap <= eps && worst.is_none_or(|w| gap < w.2) {
                worst = Some((i, j, gap));
            }
        }
    }
    match worst {
        Some((i, j, gap)) => Err(Error::DegenerateSpectrum { a: lambdas[i], b: lambdas[j], gap }),
        None => Ok(()),
    }
}

/// Descending real part, ties (relative 1e-12) broken by descending imaginary part.
pub fn eigen_order(a: &Cx, b: &Cx) -> std::cmp::Ordering {
    let tol = 1e-12 * a.norm().max(b.norm()).max(1.0);
    if (a.re - b.re).abs() > tol {
        b.re.total_cmp(&a.re)
    } else {
        b.im.total_cmp(&a.im)
    }
}

/// Null vector of a square matrix that is singular up to rounding, by
/// Gaussian elimination with complete pivoting.
fn null_vector(b: &CMatrix) -> Vec<Cx> {
    let n = b.rows;
    let mut w = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n.saturating_sub(1) {
        let mut best = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let m = w[(i, j)].norm();
                if m > best.2 {
                    best = (i, j, m);
                }
            }
        }
        let (pi, pj, pm) = best;
        if pm == 0.0 {
            break;
        }
        if pi != k {
            for j in 0..n {
                w.data.swap(pi * n + j, k * n + j);
            }
        }
        if pj != k {
            for i in 0..n {
                w.data.swap(i * n + pj, i * n + k);
            }
            perm.swap(pj, k);
        }
        let piv = w[(k, k)];
        for i in k + 1..n {
            let f = w[(i, k)] / piv;
            if f == Cx::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = w[(k, j)];
                w[(i, j)] -= f * v;
            }
        }
    }
    // Back-substitute with the last permuted unknown fixed to 1.
    let mut y = vec![Cx::new(0.0, 0.0); n];
    y[n - 1] = re(1.0);
    for k in (0..n - 1).rev() {
        let s: Cx = (k + 1..n).map(|j| w[(k, j)] * y[j]).sum();
        let piv = w[(k, k)];
        y[k] = if piv.norm() > 0.0 { -s / piv } else { Cx::new(0.0, 0.0) };
    }
    let mut x = vec![Cx::new(0.0, 0.0); n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    x
}

/// Solves a small dense linear system by partial-pivot elimination.
fn solve_dense(mut a: CMatrix, mut rhs: Vec<Cx>) -> Option<Vec<Cx>> {
    let n = a.rows;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))?;
        if a[(p, k)].norm() == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.data.swap(p * n + j, k * n + j);
            }
            rhs.swap(p, k);
        }
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
            let v = rhs[k];
            rhs[i] -= f * v;
        }
    }
    let mut x = vec![Cx::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: Cx = (k + 1..n).map(|j| a[(k, j)] * x[j]).sum();
        x[k] = (rhs[k] - s) / a[(k, k)];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn max_entry_index(v: &[Cx]) -> usize {
    let m = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    v.iter().position(|x| x.norm() >= m * (1.0 - 1e-12)).unwrap_or(0)
}

/// Newton refinement of a simple eigenpair with the normalization
/// `v[anchor] = const`.
fn refine_eigenpair(m: &CMatrix, lambda: &mut Cx, v: &mut [Cx]) {
    let n = m.rows;
    let anchor = max_entry_index(v);
    for _ in 0..3 {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= *lambda;
        }
        let resid = shifted.matvec(v);
        let mut big = CMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                big[(i, j)] = shifted[(i, j)];
            }
            big[(i, n)] = -v[i];
        }
        big[(n, anchor)] = re(1.0);
        let mut rhs: Vec<Cx> = resid.iter().map(|r| -r).collect();
        rhs.push(Cx::new(0.0, 0.0));
        let Some(delta) = solve_dense(big, rhs) else { return };
        for i in 0..n {
            v[i] += delta[i];
        }
        *lambda += delta[n];
        if delta.iter().map(|d| d.norm()).fold(0.0, f64::max) < 1e-16 {
            break;
        }
    }
}

fn normalize_eigenvector(v: &mut [Cx]) {
    let k = max_entry_index(v);
    let pivot = v[k];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / (mag * mag);
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[k] = re(1.0);
}

/// Diagonalizes a small square matrix with pairwise distinct eigenvalues.
///
/// Eigenvalues are sorted by [`eigen_order`]; eigenvectors are scaled to unit
/// ∞-norm with the first largest entry real and positive.
pub fn eigen_decompose(m: &CMatrix) -> Result<EigenResult> {
    let coeffs = char_poly(m)?;
    let n = m.rows;
    let mut lambdas = poly_roots(&coeffs)?;
    lambdas.sort_by(eigen_order);
    check_distinct(&lambdas)?;

    let mut t = CMatrix::zeros(n, n);
    for (j, lambda) in lambdas.iter_mut().enumerate() {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= *lambda;
        }
        let mut v = null_vector(&shifted);
        normalize_eigenvector(&mut v);
        refine_eigenpair(m, lambda, &mut v);
        normalize_eigenvector(&mut v);
        for i in 0..n {
            t[(i, j)] = v[i];
        }
    }
    check_distinct(&lambdas)?;
    let t_inv = mat_inverse(&t)?;
    Ok(EigenResult { lambdas, t, t_inv })
}

/// Derivatives `f(z0), f′(z0), ..., f^{(order)}(z0)` of a function analytic
/// on the disc `|z − z0| ≤ radius`, by the trapezoidal rule on the Cauchy
/// integral (`nodes` equispaced points on the circle). Unlike real-axis
/// differences the rounding error does not grow as the radius shrinks
/// below the scale of `f`, so high derivatives of fast exponentials come out
/// to near machine precision.
pub fn contour_derivatives(f: impl Fn(Cx) -> Cx, z0: Cx, radius: f64, order: usize, nodes: usize) -> Vec<Cx> {
    let values: Vec<Cx> =
        (0..nodes).map(|m| f(z0 + Cx::from_polar(radius, std::f64::consts::TAU * m as f64 / nodes as f64))).collect();
    let mut factorial = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                factorial *= k as f64;
            }
            let sum: Cx = values
                .iter()
                .enumerate()
                .map(|(m, v)| v * Cx::from_polar(1.0, -std::f64::consts::TAU * (m * k) as f64 / nodes as f64))
                .sum();
            sum * factorial / (nodes as f64 * radius.powi(k as i32))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: Cx, b: Cx, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    fn m0_eq9() -> CMatrix {
        CMatrix::from_real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 2.0, -1.0]])
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let i2 = CMatrix::identity(2);
        assert_eq!(mat_inverse(&i2).unwrap(), i2);
        let d = CMatrix::from_diag(&[re(2.0), re(4.0)]);
        let inv = mat_inverse(&d).unwrap();
        assert_close(inv[(0, 0)], re(0.5), 1e-15);
        assert_close(inv[(1, 1)], re(0.25), 1e-15);
        assert_eq!(inv[(0, 1)], re(0.0));
    }

    #[test]
    fn inverse_rejects_singular() {
        let s = CMatrix::from_real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(mat_inverse(&s), Err(Error::SingularMatrix { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(mat_inverse(&rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn char_poly_examples() {
        let cp = char_poly(&m0_eq9()).unwrap();
        let want = [1.0, 1.0, -2.0, 0.0];
        for (c, w) in cp.iter().zip(want) {
            assert_close(*c, re(w), 1e-14);
        }
        let cp = char_poly(&CMatrix::identity(2)).unwrap();
        for (c, w) in cp.iter().zip([1.0, -2.0, 1.0]) {
            assert_close(*c, re(w), 1e-14);
        }
        let (a, b) = (cx(1.5, 0.5), cx(-2.0, 1.0));
        let cp = char_poly(&CMatrix::from_diag(&[a, b])).unwrap();
        assert_eq!(cp[0], re(1.0));
        assert_close(cp[1], -(a + b), 1e-14);
        assert_close(cp[2], a * b, 1e-14);
    }

    #[test]
    fn char_poly_dimension_cap() {
        assert!(matches!(char_poly(&CMatrix::identity(9)), Err(Error::Dimension(_))));
        assert!(matches!(char_poly(&CMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    fn sorted(mut v: Vec<Cx>) -> Vec<Cx> {
        v.sort_by(eigen_order);
        v
    }

    #[test]
    fn roots_examples() {
        let r = sorted(poly_roots(&[re(1.0), re(1.0), re(-2.0), re(0.0)]).unwrap());
        for (got, want) in r.iter().zip([1.0, 0.0, -2.0]) {
            assert_close(*got, re(want), 1e-12);
        }
        let r = sorted(poly_roots(&[re(1.0), re(0.0), re(-1.0)]).unwrap());
        assert_close(r[0], re(1.0), 1e-12);
        assert_close(r[1], re(-1.0), 1e-12);
        // (λ-1)(λ-2)(λ-3) = λ³ - 6λ² + 11λ - 6
        let r = sorted(poly_roots(&[re(1.0), re(-6.0), re(11.0), re(-6.0)]).unwrap());
        for (got, want) in r.iter().zip([3.0, 2.0, 1.0]) {
            assert_close(*got, re(want), 1e-10);
        }
    }

    #[test]
    fn roots_complex_pair() {
        // λ² + 1
        let r = sorted(poly_roots(&[re(1.0), re(0.0), re(1.0)]).unwrap());
        assert_close(r[0], cx(0.0, 1.0), 1e-12);
        assert_close(r[1], cx(0.0, -1.0), 1e-12);
    }

    #[test]
    fn roots_reject_bad_input() {
        assert!(poly_roots(&[re(1.0)]).is_err());
        assert!(poly_roots(&[re(2.0), re(1.0)]).is_err());
    }

    #[test]
    fn eigen_m0_eq9() {
        let m = m0_eq9();
        let e = eigen_decompose(&m).unwrap();
        for (got, want) in e.lambdas.iter().zip([1.0, 0.0, -2.0]) {
            assert_close(*got, re(want), 1e-10);
        }
        let conj = &(&e.t_inv * &m) * &e.t;
        let resid = &conj - &CMatrix::from_diag(&e.lambdas);
        assert!(resid.norm_inf() <= 1e-10 * m.norm_inf());
        // eigenvectors (1, λ, λ²) normalized to unit ∞-norm
        assert_close(e.t[(0, 0)], re(1.0), 1e-12);
        assert_close(e.t[(2, 0)], re(1.0), 1e-12);
        assert_close(e.t[(0, 1)], re(1.0), 1e-12);
        assert_close(e.t[(1, 1)], re(0.0), 1e-12);
        assert_close(e.t[(0, 2)], re(0.25), 1e-12);
        assert_close(e.t[(1, 2)], re(-0.5), 1e-12);
        assert_close(e.t[(2, 2)], re(1.0), 1e-12);
    }

    #[test]
    fn eigen_of_diagonal_is_permutation() {
        let m = CMatrix::from_diag(&[re(-1.0), re(3.0), re(0.5)]);
        let e = eigen_decompose(&m).unwrap();
        assert_eq!(e.lambdas.len(), 3);
        for j in 0..3 {
            let col = e.t.column(j);
            let ones = col.iter().filter(|v| (**v - re(1.0)).norm() < 1e-12).count();
            let zeros = col.iter().filter(|v| v.norm() < 1e-12).count();
            assert_eq!((ones, zeros), (1, 2));
        }
        assert_close(e.lambdas[0], re(3.0), 1e-12);
        assert_close(e.lambdas[2], re(-1.0), 1e-12);
    }

    #[test]
    fn eigen_defective_is_degenerate() {
        let m = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(eigen_decompose(&m), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn contour_derivatives_of_exponential() {
        let g = 120.0;
        let d = contour_derivatives(|z| (z * g).exp(), re(0.0), 1.0 / g, 4, 48);
        for (k, dk) in d.iter().enumerate() {
            let exact = g.powi(k as i32);
            assert!((dk - re(exact)).norm() <= 1e-13 * exact, "k = {k}");
        }
    }
}
