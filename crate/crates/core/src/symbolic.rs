//! Laurent polynomials in `t` and the power-times-exponential factors
//! `scale · t^rho · exp(p(t))` that make up asymptotic solution columns.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::numerics::{re, Cx};

/// Relative size below which a sum is treated as exact cancellation.
const CANCEL_EPS: f64 = 16.0 * f64::EPSILON;

/// Finite sum `Σ c_k t^k` over integer powers, zero coefficients never stored.
#[derive(Clone, Default, PartialEq)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, Cx>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(re(1.0))
    }

    pub fn constant(c: Cx) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(power: i32, c: Cx) -> Self {
        let mut p = Self::zero();
        if c != Cx::new(0.0, 0.0) {
            p.terms.insert(power, c);
        }
        p
    }

    /// Builds from `(power, coefficient)` pairs; repeated powers are summed.
    pub fn from_terms<I: IntoIterator<Item = (i32, Cx)>>(terms: I) -> Self {
        let mut acc: BTreeMap<i32, (Cx, f64)> = BTreeMap::new();
        for (k, c) in terms {
            let e = acc.entry(k).or_insert((Cx::new(0.0, 0.0), 0.0));
            e.0 += c;
            e.1 += c.norm();
        }
        Self::from_accumulated(acc)
    }

    /// Real-coefficient shorthand.
    pub fn from_real(terms: &[(i32, f64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(k, c)| (k, re(c))))
    }

    fn from_accumulated(acc: BTreeMap<i32, (Cx, f64)>) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, (sum, mag))| sum.norm() > CANCEL_EPS * mag)
            .map(|(k, (sum, _))| (k, sum))
            .collect();
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, power: i32) -> Cx {
        self.terms.get(&power).copied().unwrap_or_default()
    }

    /// `(power, coefficient)` in ascending power order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, Cx)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn max_power(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn scale(&self, s: Cx) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    /// `c·t^k → c·k·t^{k−1}`; constants vanish.
    pub fn derivative(&self) -> Self {
        Self { terms: self.terms().filter(|&(k, _)| k != 0).map(|(k, c)| (k - 1, c * k as f64)).collect() }
    }

    /// Evaluation at `t > 0`.
    pub fn eval(&self, t: f64) -> Result<Cx> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("Laurent polynomial evaluated at t = {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluation without the `t > 0` check; callers guarantee `t ≠ 0` when
    /// negative powers are present.
    #[inline]
    pub fn eval_unchecked(&self, t: f64) -> Cx {
        self.terms().map(|(k, c)| c * t.powi(k)).sum()
    }

    /// True when `eval_unchecked(0.0)` is finite.
    pub fn is_polynomial(&self) -> bool {
        self.min_power().is_none_or(|k| k >= 0)
    }

    /// Dense ascending coefficients for powers `lo..=hi`, for fast Horner evaluation.
    pub fn to_dense(&self) -> DenseLaurent {
        let lo = self.min_power().unwrap_or(0);
        let hi = self.max_power().unwrap_or(0);
        let mut coeffs = vec![Cx::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (k, c) in self.terms() {
            coeffs[(k - lo) as usize] = c;
        }
        DenseLaurent { lo, coeffs }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(k, c)| (k, c * sign))))
    }
}

/// Horner-ready dense form of a [`LaurentPoly`].
#[derive(Clone, Debug)]
pub struct DenseLaurent {
    lo: i32,
    coeffs: Vec<Cx>,
}

impl DenseLaurent {
    #[inline]
    pub fn eval(&self, t: f64) -> Cx {
        let mut acc = Cx::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        if self.lo == 0 {
            acc
        } else {
            acc * t.powi(self.lo)
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(re(-1.0))
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms().flat_map(|(a, ca)| rhs.terms().map(move |(b, cb)| (a + b, ca * cb))))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::laurent_string(self))
    }
}

/// `scale · t^rho · exp(p(t))` for `t > 0`; `p` carries only positive powers.
///
/// `rho` is complex because `R` is complex for complex spectra; every
/// real-coefficient example has a real `rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFactor {
    pub rho: Cx,
    pub p: LaurentPoly,
    pub scale: Cx,
}

/// Value of an [`ExpFactor`], with its complex logarithm kept alongside so
/// callers can work past the `f64` range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorValue {
    pub value: Cx,
    pub log: Cx,
    pub overflow: bool,
}

impl ExpFactor {
    pub fn new(rho: impl Into<Cx>, p: LaurentPoly, scale: Cx) -> Result<Self> {
        let rho = rho.into();
        if let Some(k) = p.min_power().filter(|&k| k <= 0) {
            return Err(Error::Domain(format!("exponent polynomial has a t^{k} term")));
        }
        Ok(Self { rho, p, scale })
    }

    pub fn unit() -> Self {
        Self { rho: re(0.0), p: LaurentPoly::zero(), scale: re(1.0) }
    }

    pub fn power(rho: impl Into<Cx>) -> Self {
        Self { rho: rho.into(), p: LaurentPoly::zero(), scale: re(1.0) }
    }

    /// `ln(scale) + rho·ln(base) + p(t)` with the power part taken at `base`
    /// (usually `base = t`).
    pub fn log_at(&self, t: f64, base: f64) -> Cx {
        let mut l = self.p.eval_unchecked(t);
        if self.rho != re(0.0) {
            l += self.rho * base.ln();
        }
        if self.scale != re(1.0) {
            l += self.scale.ln();
        }
        l
    }

    pub fn log_eval(&self, t: f64) -> Result<Cx> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("factor evaluated at t = {t}")));
        }
        Ok(self.log_at(t, t))
    }

    /// Evaluates at `t > 0`. Results beyond the `f64` range come back as
    /// infinities with `overflow` set.
    pub fn eval(&self, t: f64) -> Result<FactorValue> {
        let log = self.log_eval(t)?;
        Ok(value_from_log(log))
    }

    /// `φ′/φ = rho·t⁻¹ + p′(t)`.
    pub fn log_derivative(&self) -> LaurentPoly {
        &LaurentPoly::monomial(-1, self.rho) + &self.p.derivative()
    }

    /// `1/φ` in factor form.
    pub fn reciprocal(&self) -> Self {
        Self { rho: -self.rho, p: -&self.p, scale: self.scale.inv() }
    }
}

pub fn value_from_log(log: Cx) -> FactorValue {
    let value = log.exp();
    let overflow = !value.is_finite();
    let value = if overflow {
        let phase = Cx::from_polar(1.0, log.im);
        Cx::new(
            if phase.re == 0.0 { 0.0 } else { f64::INFINITY.copysign(phase.re) },
            if phase.im == 0.0 { 0.0 } else { f64::INFINITY.copysign(phase.im) },
        )
    } else {
        value
    };
    FactorValue { value, log, overflow }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Cx, b: Cx, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn arithmetic_examples() {
        let a1 = LaurentPoly::from_real(&[(0, 1.0), (-1, -3.0)]);
        let t2 = LaurentPoly::from_real(&[(2, 1.0)]);
        assert_eq!(&a1 * &t2, LaurentPoly::from_real(&[(2, 1.0), (1, -3.0)]));
        let inv_sq = LaurentPoly::from_real(&[(-2, 1.0)]);
        assert_eq!(inv_sq.derivative(), LaurentPoly::from_real(&[(-3, -2.0)]));
        assert_eq!(a1.eval(3.0).unwrap(), re(0.0));
        assert!(matches!(a1.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(a1.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cancellation_drops_terms() {
        let a = LaurentPoly::from_real(&[(1, 2.0 / 3.0), (2, 1.0)]);
        let b = LaurentPoly::from_real(&[(1, 2.0 / 3.0)]);
        let d = &a - &b;
        assert_eq!(d, LaurentPoly::from_real(&[(2, 1.0)]));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn dense_matches_sparse() {
        let p = LaurentPoly::from_real(&[(-2, 0.5), (0, -1.0), (3, 2.0)]);
        let d = p.to_dense();
        for t in [0.3, 1.0, 7.5] {
            assert!(close(d.eval(t), p.eval(t).unwrap(), 1e-12 * p.eval(t).unwrap().norm().max(1.0)));
        }
    }

    #[test]
    fn exp_factor_examples() {
        assert_eq!(ExpFactor::unit().eval(3.7).unwrap().value, re(1.0));

        let p = LaurentPoly::from_real(&[(1, 2.0 / 3.0), (2, 0.5), (3, 1.0 / 3.0)]);
        let f = ExpFactor::new(-22.0 / 9.0, p.clone(), re(1.0)).unwrap();
        assert!(close(f.eval(1.0).unwrap().value, re(1.5f64.exp()), 1e-12));
        assert!(close(f.eval(1.0).unwrap().value, re(4.481689), 1e-6));

        let g = ExpFactor::new(1.0, LaurentPoly::from_real(&[(2, -0.25)]), re(1.0)).unwrap();
        assert!(close(g.eval(2.0).unwrap().value, re(2.0 * (-1.0f64).exp()), 1e-12));

        assert!(ExpFactor::new(0.0, LaurentPoly::from_real(&[(0, 1.0)]), re(1.0)).is_err());
        assert!(matches!(f.eval(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn overflow_is_flagged() {
        let f = ExpFactor::new(0.0, LaurentPoly::from_real(&[(3, 1.0 / 3.0)]), re(1.0)).unwrap();
        let v = f.eval(20.0).unwrap();
        assert!(v.overflow);
        assert_eq!(v.value.re, f64::INFINITY);
        assert!((v.log.re - 8000.0 / 3.0).abs() < 1e-9);
        assert!(!f.eval(5.0).unwrap().overflow);
    }

    #[test]
    fn log_derivative_examples() {
        assert!(ExpFactor::unit().log_derivative().is_zero());
        let p = LaurentPoly::from_real(&[(1, 2.0 / 3.0), (2, 0.5), (3, 1.0 / 3.0)]);
        let f = ExpFactor::new(-22.0 / 9.0, p, re(1.0)).unwrap();
        let g = f.log_derivative();
        let want = LaurentPoly::from_real(&[(-1, -22.0 / 9.0), (0, 2.0 / 3.0), (1, 1.0), (2, 1.0)]);
        for k in -1..=2 {
            assert!(close(g.coeff(k), want.coeff(k), 1e-15));
        }
        assert_eq!(g.terms().count(), 4);
        let m = ExpFactor::new(0.0, LaurentPoly::from_real(&[(2, -0.25)]), re(1.0)).unwrap();
        assert_eq!(m.log_derivative(), LaurentPoly::from_real(&[(1, -0.5)]));
    }
}
