//! Human-readable strings for coefficients, Laurent polynomials and
//! exponential factors, plus `%.17g`-style number formatting.

use crate::numerics::Cx;
use crate::symbolic::{ExpFactor, LaurentPoly};

const MAX_DENOMINATOR: i64 = 64;

/// Small-denominator fraction `p/q` within `1e-9` (relative to `max(1, |x|)`).
pub fn as_fraction(x: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-9 * x.abs().max(1.0);
    (1..=MAX_DENOMINATOR).find_map(|q| {
        let p = (x * q as f64).round();
        (p.abs() < 1e9 && (x - p / q as f64).abs() <= tol).then_some((p as i64, q))
    })
}

fn magnitude_string(x: f64) -> String {
    match as_fraction(x) {
        Some((p, 1)) => p.to_string(),
        Some((p, q)) => format!("({p}/{q})"),
        None => format!("{x}"),
    }
}

/// Real number as an integer, `(p/q)` fraction, or shortest decimal.
pub fn real_string(x: f64) -> String {
    if x < 0.0 {
        format!("-{}", magnitude_string(-x))
    } else {
        magnitude_string(x)
    }
}

fn is_real(c: Cx) -> bool {
    c.im.abs() <= 1e-12 * c.re.abs().max(1.0)
}

pub fn complex_string(c: Cx) -> String {
    if is_real(c) {
        return real_string(c.re);
    }
    let im =
        if c.im < 0.0 { format!("-{}i", magnitude_string(-c.im)) } else { format!("+{}i", magnitude_string(c.im)) };
    if c.re.abs() <= 1e-12 * c.im.abs() {
        format!("({}i)", real_string(c.im))
    } else {
        format!("({}{im})", real_string(c.re))
    }
}

fn power_string(k: i32) -> String {
    match k {
        1 => "t".to_string(),
        k if k < 0 => format!("t^({k})"),
        k => format!("t^{k}"),
    }
}

fn term_string(k: i32, c: Cx) -> String {
    if k == 0 {
        return complex_string(c);
    }
    if is_real(c) {
        if (c.re - 1.0).abs() <= 1e-12 {
            return power_string(k);
        }
        if (c.re + 1.0).abs() <= 1e-12 {
            return format!("-{}", power_string(k));
        }
    }
    format!("{}{}", complex_string(c), power_string(k))
}

/// Terms in ascending power, e.g. `(2/3)t + (1/2)t^2 - (1/3)t^3`.
pub fn laurent_string(p: &LaurentPoly) -> String {
    let mut out = String::new();
    for (i, (k, c)) in p.terms().enumerate() {
        let term = term_string(k, c);
        if i == 0 {
            out.push_str(&term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// e.g. `t^(-22/9) * exp((2/3)t + (1/2)t^2 + (1/3)t^3)`.
pub fn factor_string(f: &ExpFactor) -> String {
    let mut parts = Vec::new();
    if (f.scale - Cx::new(1.0, 0.0)).norm() > 1e-12 {
        parts.push(complex_string(f.scale));
    }
    if f.rho.norm() > 1e-12 {
        let rho = match (is_real(f.rho)).then(|| as_fraction(f.rho.re)).flatten() {
            Some((p, 1)) if p > 0 => p.to_string(),
            Some((p, 1)) => format!("({p})"),
            Some((p, q)) => format!("({p}/{q})"),
            None if is_real(f.rho) => format!("({})", f.rho.re),
            None => complex_string(f.rho),
        };
        parts.push(format!("t^{rho}"));
    }
    if !f.p.is_zero() {
        parts.push(format!("exp({})", laurent_string(&f.p)));
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" * ")
    }
}

/// C `printf("%.17g")` formatting; enough digits to round-trip any `f64`.
pub fn fmt_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::re;

    #[test]
    fn fractions() {
        assert_eq!(as_fraction(-22.0 / 9.0), Some((-22, 9)));
        assert_eq!(as_fraction(0.5), Some((1, 2)));
        assert_eq!(as_fraction(std::f64::consts::PI), None);
        assert_eq!(real_string(-2.0 / 3.0), "-(2/3)");
        assert_eq!(real_string(3.0), "3");
    }

    #[test]
    fn dominant_factor_string() {
        let p = LaurentPoly::from_real(&[(1, 2.0 / 3.0), (2, 0.5), (3, 1.0 / 3.0)]);
        let f = ExpFactor::new(-22.0 / 9.0, p, re(1.0)).unwrap();
        assert_eq!(factor_string(&f), "t^(-22/9) * exp((2/3)t + (1/2)t^2 + (1/3)t^3)");
        let p = LaurentPoly::from_real(&[(1, -2.0 / 3.0), (2, 1.0), (3, -2.0 / 3.0)]);
        let f = ExpFactor::new(2.0, p, re(1.0)).unwrap();
        assert_eq!(factor_string(&f), "t^2 * exp(-(2/3)t + t^2 - (2/3)t^3)");
        assert_eq!(factor_string(&ExpFactor::unit()), "1");
        assert_eq!(factor_string(&ExpFactor::power(-2.0)), "t^(-2)");
        assert_eq!(factor_string(&ExpFactor::power(0.25)), "t^(1/4)");
    }

    #[test]
    fn complex_coefficients() {
        assert_eq!(complex_string(Cx::new(0.5, -1.0)), "((1/2)-1i)");
        assert_eq!(complex_string(Cx::new(0.0, 2.0)), "(2i)");
    }

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e300), "1.0000000000000001e+300");
        assert_eq!(fmt_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(f64::NAN), "nan");
    }

    #[test]
    fn g17_round_trips() {
        for x in [std::f64::consts::E, -1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX, 12.09] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
