//! Rescaling `w_i = m_i(t) u_i` by predicted asymptotic factors so that the
//! new unknowns stay bounded, for systems and for scalar operators, and the
//! reparameterization `t = τ + q`.

use std::cmp::Ordering;

use crate::companion::{DerivativeCompanion, MatrixSeries, ScalarOperator};
use crate::error::{Error, Result};
use crate::expansion::AsymptoticColumn;
use crate::integrate::LinearSystem;
use crate::numerics::{re, CMatrix, Cx};
use crate::symbolic::{value_from_log, DenseLaurent, ExpFactor, LaurentPoly};

/// Growth comparison of two columns: real parts of the exponent coefficients
/// from the highest power down, then the real part of `rho`.
fn growth_cmp(a: &AsymptoticColumn, b: &AsymptoticColumn, top: i32) -> Ordering {
    let keys = |c: &AsymptoticColumn| -> Vec<f64> {
        (1..=top).rev().map(|k| c.factor.p.coeff(k).re).chain(std::iter::once(c.factor.rho.re)).collect()
    };
    for (x, y) in keys(a).into_iter().zip(keys(b)) {
        let tol = 1e-10 * x.abs().max(y.abs()).max(1.0);
        if (x - y).abs() > tol {
            return x.total_cmp(&y);
        }
    }
    Ordering::Equal
}

/// Index of the fastest-growing column. Columns that cannot be told apart
/// are reported as a [`Error::Tie`].
pub fn dominant_column(cols: &[AsymptoticColumn]) -> Result<usize> {
    if cols.is_empty() {
        return Err(Error::Dimension("no columns to compare".into()));
    }
    let top = cols.iter().filter_map(|c| c.factor.p.max_power()).max().unwrap_or(0);
    let mut best = 0;
    let mut tie: Option<usize> = None;
    for j in 1..cols.len() {
        match growth_cmp(&cols[j], &cols[best], top) {
            Ordering::Greater => {
                best = j;
                tie = None;
            }
            Ordering::Equal => tie = Some(j),
            Ordering::Less => {}
        }
    }
    match tie {
        Some(j) => Err(Error::Tie { a: best, b: j }),
        None => Ok(best),
    }
}

/// Which variable the power part `t^rho` is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerBase {
    T,
    /// `(1 + t)^rho`, finite at `t = 0`.
    OnePlusT,
}

impl PowerBase {
    pub fn at(self, t: f64) -> f64 {
        match self {
            PowerBase::T => t,
            PowerBase::OnePlusT => 1.0 + t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierMode {
    /// Component `i` gets the leading power of entry `i` of the dominant column.
    PerComponent,
    /// Every component gets the dominant column's factor.
    Dominant,
}

/// Componentwise factors `m_i = base^{rho_i} exp(p_i(t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollifier {
    pub factors: Vec<ExpFactor>,
    pub base: PowerBase,
}

impl Mollifier {
    pub fn identity(n: usize, base: PowerBase) -> Self {
        Self { factors: vec![ExpFactor::unit(); n], base }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// `ln m_i(t)`.
    pub fn log_at(&self, i: usize, t: f64) -> Cx {
        self.factors[i].log_at(t, self.base.at(t))
    }

    /// `m_i′/m_i` at `t`.
    pub fn log_derivative_at(&self, i: usize, t: f64) -> Cx {
        let f = &self.factors[i];
        let mut g = f.p.derivative().eval_unchecked(t);
        if f.rho != re(0.0) {
            g += f.rho / self.base.at(t);
        }
        g
    }

    /// Fails unless every factor is finite and nonzero on `[t0, t1]`.
    pub fn check_window(&self, t0: f64, t1: f64) -> Result<()> {
        let needs_positive = self.factors.iter().any(|f| f.rho != re(0.0));
        if needs_positive && !(self.base.at(t0.min(t1)) > 0.0) {
            return Err(Error::Domain(format!(
                "mollifier power base is not positive at t = {} (use base 1+t or start later)",
                t0.min(t1)
            )));
        }
        Ok(())
    }
}

fn leading_order(col: &AsymptoticColumn, i: usize) -> Option<usize> {
    let scale = col.physical.iter().flat_map(|v| v.iter()).map(|c| c.norm()).fold(0.0, f64::max);
    col.physical.iter().position(|v| v[i].norm() > 1e-12 * scale)
}

/// Mollifier built from the dominant column. Coefficients are dropped: only
/// powers and exponentials are kept, so `m_i(0) = 1` with base `1 + t`.
pub fn build_mollifier(cols: &[AsymptoticColumn], mode: MollifierMode, base: PowerBase) -> Result<Mollifier> {
    let dom = &cols[dominant_column(cols)?];
    let n = dom.physical[0].len();
    let factors = (0..n)
        .map(|i| {
            let rho = match mode {
                MollifierMode::Dominant => dom.factor.rho,
                MollifierMode::PerComponent => match leading_order(dom, i) {
                    Some(k) => dom.factor.rho - k as f64,
                    None => dom.factor.rho,
                },
            };
            ExpFactor { rho, p: dom.factor.p.clone(), scale: re(1.0) }
        })
        .collect();
    Ok(Mollifier { factors, base })
}

/// Factor of the dominant column, `t^rho exp(p(t))`; the scalar mollifier.
pub fn dominant_factor(cols: &[AsymptoticColumn]) -> Result<ExpFactor> {
    let dom = &cols[dominant_column(cols)?];
    Ok(ExpFactor { rho: dom.factor.rho, p: dom.factor.p.clone(), scale: re(1.0) })
}

/// `h_0..h_n` with `h_0 = 1`, `h_{k+1} = h_k′ + g h_k`, so that
/// `φ^{(k)} = h_k φ` whenever `φ′ = g φ`.
pub fn log_derivative_ratios(g: &LaurentPoly, n: usize) -> Vec<LaurentPoly> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(LaurentPoly::one());
    for k in 0..n {
        let next = &h[k].derivative() + &(g * &h[k]);
        h.push(next);
    }
    h
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `c_0..c_n` of `L̃ y = L(φ y)/φ` for `L = Σ_d b_d D^d`:
/// `c_i = Σ_d b_d · C(d, i) · h_{d−i}`.
pub fn conjugate_operator(b: &[LaurentPoly], phi: &ExpFactor) -> Vec<LaurentPoly> {
    let n = b.len() - 1;
    let h = log_derivative_ratios(&phi.log_derivative(), n);
    (0..=n)
        .map(|i| {
            (i..=n).fold(LaurentPoly::zero(), |acc, d| {
                if b[d].is_zero() {
                    return acc;
                }
                &acc + &(&b[d] * &h[d - i]).scale(re(binomial(d, i)))
            })
        })
        .collect()
}

/// A scalar operator conjugated by `φ`, integrated in `(u, u′, ..., u^{(n−1)})`
/// with `y = φ u`, optionally in the shifted variable `τ = t − q`.
#[derive(Clone, Debug)]
pub struct MollifiedScalar {
    pub coefficients: Vec<LaurentPoly>,
    pub phi: ExpFactor,
    pub q: f64,
    h: Vec<DenseLaurent>,
    companion: DerivativeCompanion,
}

pub fn mollify_scalar(op: &ScalarOperator, phi: &ExpFactor) -> Result<MollifiedScalar> {
    let b = op.derivative_coefficients();
    let coefficients = conjugate_operator(&b, phi);
    let companion = DerivativeCompanion::new(&coefficients)?;
    let h = log_derivative_ratios(&phi.log_derivative(), op.n).iter().map(LaurentPoly::to_dense).collect();
    Ok(MollifiedScalar { coefficients, phi: phi.clone(), q: 0.0, h, companion })
}

impl MollifiedScalar {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Fails unless the coefficients and `φ` are finite on `τ ∈ [τ0, τ1]`.
    pub fn check_window(&self, tau0: f64, tau1: f64) -> Result<()> {
        let t = tau0.min(tau1) + self.q;
        let singular = !self.companion.regular_at_zero() || self.phi.rho != re(0.0);
        if singular && !(t > 0.0) {
            return Err(Error::Domain(format!("mollified operator is singular at t = {t}")));
        }
        Ok(())
    }

    /// `(y, y′, ..., y^{(n−1)})` at `τ` as `(mantissa, log offset)` pairs,
    /// `y^{(k)} = φ Σ_i C(k, i) h_{k−i} u^{(i)}` with `φ` kept as a logarithm.
    pub fn reconstruct_parts(&self, tau: f64, u: &[Cx]) -> Vec<(Cx, Cx)> {
        let t = tau + self.q;
        let log_phi = self.phi.log_at(t, t);
        (0..u.len()).map(|k| ((0..=k).map(|i| self.h[k - i].eval(t) * u[i] * binomial(k, i)).sum(), log_phi)).collect()
    }

    /// [`Self::reconstruct_parts`] multiplied out; overflow comes back as
    /// signed infinities.
    pub fn reconstruct(&self, tau: f64, u: &[Cx]) -> Vec<Cx> {
        self.reconstruct_parts(tau, u).into_iter().map(|(m, l)| combine(m, l)).collect()
    }
}

fn combine(mantissa: Cx, log: Cx) -> Cx {
    if mantissa == re(0.0) {
        mantissa
    } else {
        value_from_log(mantissa.ln() + log).value
    }
}

impl LinearSystem for MollifiedScalar {
    fn dim(&self) -> usize {
        self.companion.dim()
    }
    fn matrix_into(&self, tau: f64, out: &mut CMatrix) {
        self.companion.matrix_into(tau + self.q, out)
    }
    fn apply(&self, tau: f64, w: &[Cx], dw: &mut [Cx], scratch: &mut CMatrix) {
        self.companion.apply(tau + self.q, w, dw, scratch)
    }
}

/// `u′ = B(t) u` with `B_ij = (t^r A(t))_ij m_j/m_i − δ_ij m_i′/m_i`.
#[derive(Clone, Debug)]
pub struct MollifiedSystem {
    pub series: MatrixSeries,
    pub mollifier: Mollifier,
    pub q: f64,
    /// `m_j/m_i` as factors, row-major, so the ratio never goes through two
    /// separately overflowing exponentials.
    ratios: Vec<ExpFactor>,
    exponent_slopes: Vec<DenseLaurent>,
}

pub fn mollify_system(series: &MatrixSeries, m: &Mollifier) -> Result<MollifiedSystem> {
    let n = series.n;
    if m.dim() != n {
        return Err(Error::Dimension(format!("{}-component mollifier for a {n}x{n} system", m.dim())));
    }
    let mut ratios = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (fi, fj) = (&m.factors[i], &m.factors[j]);
            ratios.push(ExpFactor { rho: fj.rho - fi.rho, p: &fj.p - &fi.p, scale: fj.scale / fi.scale });
        }
    }
    let exponent_slopes = m.factors.iter().map(|f| f.p.derivative().to_dense()).collect();
    Ok(MollifiedSystem { series: series.clone(), mollifier: m.clone(), q: 0.0, ratios, exponent_slopes })
}

impl MollifiedSystem {
    /// Fails unless `B` is finite on `τ ∈ [τ0, τ1]`.
    pub fn check_window(&self, tau0: f64, tau1: f64) -> Result<()> {
        let t = tau0.min(tau1) + self.q;
        if !self.series.regular_at_zero() && !(t > 0.0) {
            return Err(Error::Domain(format!("t^r A(t) is singular at t = {t}")));
        }
        self.mollifier.check_window(t, tau1.max(tau0) + self.q)
    }

    /// `w_i = m_i u_i` at `τ` as `(u_i, ln m_i)` pairs.
    pub fn reconstruct_parts(&self, tau: f64, u: &[Cx]) -> Vec<(Cx, Cx)> {
        let t = tau + self.q;
        u.iter().enumerate().map(|(i, &ui)| (ui, self.mollifier.log_at(i, t))).collect()
    }

    /// `w_i = m_i u_i` at `τ`, infinities on overflow.
    pub fn reconstruct(&self, tau: f64, u: &[Cx]) -> Vec<Cx> {
        self.reconstruct_parts(tau, u).into_iter().map(|(m, l)| combine(m, l)).collect()
    }

    /// `u(τ0) = w(τ0)/m(τ0)` for a raw initial state.
    pub fn initial_state(&self, tau: f64, w: &[Cx]) -> Vec<Cx> {
        let t = tau + self.q;
        w.iter().enumerate().map(|(i, &wi)| wi * (-self.mollifier.log_at(i, t)).exp()).collect()
    }
}

impl LinearSystem for MollifiedSystem {
    fn dim(&self) -> usize {
        self.series.n
    }

    fn matrix_into(&self, tau: f64, out: &mut CMatrix) {
        let t = tau + self.q;
        let n = self.series.n;
        let b = self.mollifier.base.at(t);
        self.series.eval_into(t, out);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    let f = &self.mollifier.factors[i];
                    let mut g = self.exponent_slopes[i].eval(t);
                    if f.rho != re(0.0) {
                        g += f.rho / b;
                    }
                    out[(i, i)] -= g;
                } else if out[(i, j)] != re(0.0) {
                    let ratio = &self.ratios[i * n + j];
                    if !(ratio.p.is_zero() && ratio.rho == re(0.0) && ratio.scale == re(1.0)) {
                        out[(i, j)] *= ratio.log_at(t, b).exp();
                    }
                }
            }
        }
    }
}

/// Reparameterization `t = τ + q` for mollified problems; shifts compose.
pub trait Shift: Sized {
    fn shift_variable(&self, q: f64) -> Result<Self>;
}

fn check_shift(q: f64) -> Result<()> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("shift q = {q} must be finite and non-negative")));
    }
    Ok(())
}

impl Shift for MollifiedSystem {
    fn shift_variable(&self, q: f64) -> Result<Self> {
        check_shift(q)?;
        Ok(Self { q: self.q + q, ..self.clone() })
    }
}

impl Shift for MollifiedScalar {
    fn shift_variable(&self, q: f64) -> Result<Self> {
        check_shift(q)?;
        Ok(Self { q: self.q + q, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::companion::{scalar_to_system, tests::cubic_operator};
    use crate::expansion::{assemble_columns, compute_expansion};
    use crate::integrate::{integrate_adaptive, IntegratorConfig};
    use crate::numerics::contour_derivatives;

    fn two_by_two() -> MatrixSeries {
        MatrixSeries::new(
            1,
            vec![
                CMatrix::from_real(&[&[-1.0, 0.0], &[0.0, -0.5]]),
                CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 0.0]]),
                CMatrix::zeros(2, 2),
            ],
        )
        .unwrap()
    }

    fn columns(s: &MatrixSeries) -> Vec<AsymptoticColumn> {
        assemble_columns(&compute_expansion(s).unwrap())
    }

    fn cubic_phi() -> ExpFactor {
        dominant_factor(&columns(&scalar_to_system(&cubic_operator()).unwrap())).unwrap()
    }

    #[test]
    fn dominant_column_examples() {
        let c8 = columns(&two_by_two());
        assert!((c8[dominant_column(&c8).unwrap()].lambda - re(-0.5)).norm() < 1e-12);
        let c9 = columns(&scalar_to_system(&cubic_operator()).unwrap());
        assert!((c9[dominant_column(&c9).unwrap()].lambda - re(1.0)).norm() < 1e-9);
        assert_eq!(dominant_column(&c9[..1]).unwrap(), 0);
        let twins = vec![c8[0].clone(), c8[0].clone()];
        assert!(matches!(dominant_column(&twins), Err(Error::Tie { .. })));
    }

    #[test]
    fn two_by_two_mollifier_matches_component_powers() {
        let m = build_mollifier(&columns(&two_by_two()), MollifierMode::PerComponent, PowerBase::OnePlusT).unwrap();
        assert_eq!(m.factors[0].rho, re(1.0));
        assert_eq!(m.factors[1].rho, re(2.0));
        for f in &m.factors {
            assert_eq!(f.p, LaurentPoly::from_real(&[(2, -0.25)]));
        }
        assert_eq!(m.log_at(0, 0.0), re(0.0));
        let t: f64 = 3.0;
        let expected = (1.0 + t).powi(2) * (-t * t / 4.0).exp();
        assert!((m.log_at(1, t).exp() - re(expected)).norm() < 1e-14);
    }

    #[test]
    fn scalar_factor_matches_dominant_balance() {
        let phi = cubic_phi();
        assert!((phi.rho - re(-22.0 / 9.0)).norm() < 1e-9);
        let g = phi.log_derivative();
        for (k, c) in [(-1, -22.0 / 9.0), (0, 2.0 / 3.0), (1, 1.0), (2, 1.0)] {
            assert!((g.coeff(k) - re(c)).norm() < 1e-9, "t^{k}");
        }
    }

    #[test]
    fn trivial_column_gives_unit_mollifier() {
        let unit = vec![vec![re(1.0)]];
        let col = AsymptoticColumn {
            index: 0,
            lambda: re(0.0),
            prefactor: unit.clone(),
            physical: unit,
            factor: ExpFactor::unit(),
        };
        for mode in [MollifierMode::Dominant, MollifierMode::PerComponent] {
            let m = build_mollifier(std::slice::from_ref(&col), mode, PowerBase::T).unwrap();
            assert_eq!(m.factors, vec![ExpFactor::unit()]);
        }
    }

    #[test]
    fn ratio_recurrence_examples() {
        let h = log_derivative_ratios(&LaurentPoly::zero(), 3);
        assert_eq!(h, vec![LaurentPoly::one(), LaurentPoly::zero(), LaurentPoly::zero(), LaurentPoly::zero()]);
        let h = log_derivative_ratios(&LaurentPoly::from_real(&[(1, 1.0)]), 3);
        assert_eq!(h[1], LaurentPoly::from_real(&[(1, 1.0)]));
        assert_eq!(h[2], LaurentPoly::from_real(&[(2, 1.0), (0, 1.0)]));
        assert_eq!(h[3], LaurentPoly::from_real(&[(3, 1.0), (1, 3.0)]));
        let g = cubic_phi().log_derivative();
        assert_eq!(log_derivative_ratios(&g, 1)[1], g);
    }

    #[test]
    fn unit_factor_leaves_operator_unchanged() {
        let op = cubic_operator();
        let b = op.derivative_coefficients();
        assert_eq!(conjugate_operator(&b, &ExpFactor::unit()), b);
        let m = mollify_scalar(&op, &ExpFactor::unit()).unwrap();
        assert_eq!(m.coefficients, b);
    }

    /// `φ(t + d)/φ(t)` with the exponent difference formed by a Taylor shift,
    /// so no digits are lost to the size of `p(t)`.
    pub(crate) fn phi_ratio(phi: &ExpFactor, t: f64, d: Cx) -> Cx {
        let mut dp = re(0.0);
        for (k, c) in phi.p.terms() {
            // (t + d)^k − t^k = Σ_{i≥1} C(k, i) t^{k−i} d^i
            let k = k as usize;
            dp += c * (1..=k).map(|i| d.powi(i as i32) * binomial(k, i) * t.powi((k - i) as i32)).sum::<Cx>();
        }
        (dp + phi.rho * (d / t + 1.0).ln()).exp()
    }

    #[test]
    fn zeroth_coefficient_is_operator_applied_to_factor() {
        let op = cubic_operator();
        let phi = cubic_phi();
        let m = mollify_scalar(&op, &phi).unwrap();
        for t in [5.0, 10.0] {
            let g = phi.log_derivative().eval(t).unwrap().norm();
            let d = contour_derivatives(|z| phi_ratio(&phi, t, z), re(0.0), 1.0 / g, 3, 48);
            let lphi = op.apply(t, &d);
            let c0 = m.coefficients[0].eval(t).unwrap();
            assert!((lphi - c0).norm() <= 1e-6 * c0.norm(), "t = {t}: {lphi} vs {c0}");
        }
    }

    #[test]
    fn unit_mollifier_gives_raw_system() {
        let s = two_by_two();
        let ms = mollify_system(&s, &Mollifier::identity(2, PowerBase::OnePlusT)).unwrap();
        for t in [0.5, 3.0, 40.0] {
            assert_eq!(ms.matrix(t), s.eval(t).unwrap());
        }
    }

    #[test]
    fn exact_factors_leave_lower_order_system() {
        // w′ = t A0 w with A0 = diag(−1, −0.5): m_i = exp(λ_i t²/2) is exact.
        let a0 = CMatrix::from_diag(&[re(-1.0), re(-0.5)]);
        let s = MatrixSeries::new(1, vec![a0, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)]).unwrap();
        let m = build_mollifier(&columns(&s), MollifierMode::PerComponent, PowerBase::T).unwrap();
        let m = Mollifier { factors: columns(&s).iter().map(|c| c.factor.clone()).collect(), base: m.base };
        let ms = mollify_system(&s, &m).unwrap();
        for t in [10.0, 100.0] {
            assert!(ms.matrix(t).norm_inf() <= 1e-12 * t, "t = {t}");
        }
    }

    #[test]
    fn ratios_stay_finite_where_factors_underflow() {
        let s = two_by_two();
        let m = build_mollifier(&columns(&s), MollifierMode::PerComponent, PowerBase::OnePlusT).unwrap();
        let ms = mollify_system(&s, &m).unwrap();
        let t = 60.0;
        assert_eq!(m.log_at(0, t).exp(), re(0.0));
        let b = ms.matrix(t);
        assert!(b.is_finite());
        assert!((b[(0, 1)] - re(1.0 + t)).norm() < 1e-12 * t);
        assert!((b[(1, 0)] - re(1.0 / (1.0 + t))).norm() < 1e-15);
    }

    #[test]
    fn gauge_equivalence_on_short_window() {
        let s = two_by_two();
        let m = build_mollifier(&columns(&s), MollifierMode::PerComponent, PowerBase::OnePlusT).unwrap();
        let ms = mollify_system(&s, &m).unwrap();
        let cfg = IntegratorConfig { sample_count: 61, ..IntegratorConfig::with_tolerances(1e-11, 1e-14) };
        let w0 = vec![re(5.0), re(5.0)];
        let raw = integrate_adaptive(&s, &w0, 2.0, 8.0, &cfg).unwrap();
        let u = integrate_adaptive(&ms, &ms.initial_state(2.0, &w0), 2.0, 8.0, &cfg).unwrap();
        for (a, b) in raw.samples.iter().zip(&u.samples) {
            let w = ms.reconstruct(b.t, &b.w);
            for i in 0..2 {
                assert!((w[i] - a.w[i]).norm() <= 1e-7 * a.w[i].norm(), "t = {}", a.t);
            }
        }
    }

    #[test]
    fn zero_shift_is_bitwise_identity() {
        let s = two_by_two();
        let m = build_mollifier(&columns(&s), MollifierMode::PerComponent, PowerBase::OnePlusT).unwrap();
        let ms = mollify_system(&s, &m).unwrap();
        let shifted = ms.shift_variable(0.0).unwrap();
        for t in [0.0, 1.5, 30.0] {
            assert_eq!(ms.matrix(t), shifted.matrix(t));
        }
        let sc = mollify_scalar(&cubic_operator(), &cubic_phi()).unwrap();
        assert_eq!(sc.matrix(3.0), sc.shift_variable(0.0).unwrap().matrix(3.0));
        assert!(ms.shift_variable(-1.0).is_err());
        let twice = ms.shift_variable(2.0).unwrap().shift_variable(3.0).unwrap();
        assert_eq!(twice.matrix(1.0), ms.matrix(6.0));
    }

    #[test]
    fn windows_are_checked() {
        let sc = mollify_scalar(&cubic_operator(), &cubic_phi()).unwrap();
        assert!(sc.check_window(0.0, 10.0).is_err());
        assert!(sc.shift_variable(5.0).unwrap().check_window(0.0, 10.0).is_ok());
        let s = two_by_two();
        let m = build_mollifier(&columns(&s), MollifierMode::PerComponent, PowerBase::T).unwrap();
        assert!(mollify_system(&s, &m).unwrap().check_window(0.0, 1.0).is_err());
        let m = Mollifier { base: PowerBase::OnePlusT, ..m };
        assert!(mollify_system(&s, &m).unwrap().check_window(0.0, 1.0).is_ok());
    }

    #[test]
    fn scalar_reconstruction_inverts_conjugation() {
        let sc = mollify_scalar(&cubic_operator(), &cubic_phi()).unwrap().shift_variable(1.0).unwrap();
        let t = 2.0;
        // u = 1 ⇒ y = φ, y′ = φ g, y″ = φ (g′ + g²).
        let y = sc.reconstruct(t - 1.0, &[re(1.0), re(0.0), re(0.0)]);
        let phi = sc.phi.eval(t).unwrap().value;
        let g = sc.phi.log_derivative();
        assert!((y[0] - phi).norm() < 1e-12 * phi.norm());
        assert!((y[1] - phi * g.eval(t).unwrap()).norm() < 1e-12 * y[1].norm());
        let h2 = g.derivative().eval(t).unwrap() + g.eval(t).unwrap().powi(2);
        assert!((y[2] - phi * h2).norm() < 1e-12 * y[2].norm());
    }
}
