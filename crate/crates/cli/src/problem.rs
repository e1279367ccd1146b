//! Problem files: a matrix series `A_0..A_J` (`kind = "system"`) or the
//! coefficients `a_1..a_n` of a scalar operator (`kind = "scalar"`).
//!
//! ```json
//! {"kind": "system", "r": 1, "n": 2,
//!  "series": [{"j": 0, "matrix": [[[-1, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}]}
//! {"kind": "scalar", "r": 2, "n": 3,
//!  "coefficients": [{"j": 1, "terms": [[0, [1, 0]], [-1, [-3, 0]]]}]}
//! ```
//!
//! Complex numbers are `[re, im]`; omitted orders or coefficients are zero.

use std::path::Path;

use asym_core::companion::{scalar_to_system, MatrixSeries, ScalarOperator};
use asym_core::numerics::{CMatrix, Cx};
use asym_core::symbolic::LaurentPoly;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    System,
    Scalar,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: RawKind,
    r: u32,
    n: usize,
    series: Option<Vec<RawMatrixTerm>>,
    coefficients: Option<Vec<RawCoefficient>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixTerm {
    j: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficient {
    j: usize,
    terms: Vec<(i32, [f64; 2])>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    System(MatrixSeries),
    Scalar(ScalarOperator),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub r: u32,
    pub n: usize,
    pub problem: Problem,
}

impl ProblemFile {
    pub fn is_scalar(&self) -> bool {
        matches!(self.problem, Problem::Scalar(_))
    }

    /// The first-order system, converting scalar operators to companion form.
    pub fn series(&self) -> Result<MatrixSeries> {
        match &self.problem {
            Problem::System(s) => Ok(s.clone()),
            Problem::Scalar(op) => Ok(scalar_to_system(op)?),
        }
    }
}

fn cx(pair: [f64; 2], at: impl Fn() -> String) -> Result<Cx> {
    if pair.iter().all(|v| v.is_finite()) {
        Ok(Cx::new(pair[0], pair[1]))
    } else {
        Err(CliError::Schema(format!("{}: non-finite value", at())))
    }
}

fn build_series(r: u32, n: usize, terms: Vec<RawMatrixTerm>) -> Result<MatrixSeries> {
    let depth = terms.iter().map(|t| t.j).max().ok_or_else(|| CliError::Schema("series is empty".into()))?;
    let mut slots: Vec<Option<CMatrix>> = vec![None; depth + 1];
    for term in terms {
        let j = term.j;
        if slots[j].is_some() {
            return Err(CliError::Schema(format!("series: order j={j} given twice")));
        }
        if term.matrix.len() != n {
            return Err(CliError::Schema(format!("series[j={j}]: {} rows, expected {n}", term.matrix.len())));
        }
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in term.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::Schema(format!(
                    "series[j={j}]: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (k, &v) in row.iter().enumerate() {
                m[(i, k)] = cx(v, || format!("series[j={j}][{i}][{k}]"))?;
            }
        }
        slots[j] = Some(m);
    }
    if slots[0].is_none() {
        return Err(CliError::Schema("series: A_0 (j=0) is required".into()));
    }
    let a = slots.into_iter().map(|m| m.unwrap_or_else(|| CMatrix::zeros(n, n))).collect();
    MatrixSeries::new(r, a).map_err(|e| CliError::Schema(e.to_string()))
}

fn build_operator(r: u32, n: usize, coefficients: Vec<RawCoefficient>) -> Result<ScalarOperator> {
    let mut a = vec![None; n];
    for c in coefficients {
        let j = c.j;
        if j == 0 || j > n {
            return Err(CliError::Schema(format!("coefficients: j={j} outside 1..={n}")));
        }
        if a[j - 1].is_some() {
            return Err(CliError::Schema(format!("coefficients: a_{j} given twice")));
        }
        let mut terms = Vec::with_capacity(c.terms.len());
        for (power, v) in c.terms {
            if power > 0 {
                return Err(CliError::Schema(format!("coefficients[j={j}]: power {power} > 0")));
            }
            terms.push((power, cx(v, || format!("coefficients[j={j}] t^{power}"))?));
        }
        a[j - 1] = Some(LaurentPoly::from_terms(terms));
    }
    let a = a.into_iter().map(|c| c.unwrap_or_else(LaurentPoly::zero)).collect();
    Ok(ScalarOperator::new(r, a)?)
}

/// Parses and validates a problem document.
pub fn parse_problem_str(text: &str, path: &Path) -> Result<ProblemFile> {
    let raw: RawProblem = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        match e.classify() {
            serde_json::error::Category::Data => {
                CliError::Schema(format!("{}:{}:{}: {message}", path.display(), e.line(), e.column()))
            }
            _ => CliError::Parse { path: path.to_path_buf(), line: e.line(), column: e.column(), message },
        }
    })?;
    if raw.n == 0 {
        return Err(CliError::Schema("n must be at least 1".into()));
    }
    let problem = match (raw.kind, raw.series, raw.coefficients) {
        (RawKind::System, Some(series), None) => Problem::System(build_series(raw.r, raw.n, series)?),
        (RawKind::Scalar, None, Some(coefficients)) => Problem::Scalar(build_operator(raw.r, raw.n, coefficients)?),
        (RawKind::System, _, _) => {
            return Err(CliError::Schema("kind \"system\" needs \"series\" and no \"coefficients\"".into()))
        }
        (RawKind::Scalar, _, _) => {
            return Err(CliError::Schema("kind \"scalar\" needs \"coefficients\" and no \"series\"".into()))
        }
    };
    Ok(ProblemFile { r: raw.r, n: raw.n, problem })
}

pub fn parse_problem(path: &Path) -> Result<ProblemFile> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    parse_problem_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use asym_core::numerics::re;

    fn parse(text: &str) -> Result<ProblemFile> {
        parse_problem_str(text, Path::new("test.json"))
    }

    #[test]
    fn system_with_gap_is_zero_filled() {
        let p =
            parse(r#"{"kind":"system","r":1,"n":1,"series":[{"j":0,"matrix":[[[2,0]]]},{"j":2,"matrix":[[[0,1]]]}]}"#)
                .unwrap();
        let Problem::System(s) = &p.problem else { panic!("wrong kind") };
        assert_eq!(s.a.len(), 3);
        assert!(s.a[1].is_zero());
        assert_eq!(s.a[2][(0, 0)], Cx::new(0.0, 1.0));
    }

    #[test]
    fn scalar_defaults_missing_coefficients_to_zero() {
        let p = parse(r#"{"kind":"scalar","r":0,"n":2,"coefficients":[{"j":2,"terms":[[0,[-1,0]]]}]}"#).unwrap();
        let Problem::Scalar(op) = &p.problem else { panic!("wrong kind") };
        assert!(op.a[0].is_zero());
        assert_eq!(op.a[1].coeff(0), re(-1.0));
    }

    #[test]
    fn schema_violations() {
        let cases = [
            r#"{"kind":"system","r":0,"n":2,"series":[{"j":0,"matrix":[[[1,0],[0,0],[0,0]],[[0,0],[1,0]]]}]}"#,
            r#"{"kind":"system","r":0,"n":1,"series":[{"j":1,"matrix":[[[1,0]]]}]}"#,
            r#"{"kind":"system","r":0,"n":1,"series":[{"j":0,"matrix":[[[0,0]]]}]}"#,
            r#"{"kind":"scalar","r":0,"n":1,"coefficients":[{"j":1,"terms":[[1,[1,0]]]}]}"#,
            r#"{"kind":"scalar","r":0,"n":1,"coefficients":[{"j":2,"terms":[]}]}"#,
            r#"{"kind":"scalar","r":0,"n":1,"series":[]}"#,
            r#"{"kind":"system","r":0,"n":1,"series":[{"j":0,"matrix":[[[1,0]]]}],"extra":1}"#,
            r#"{"kind":"matrix","r":0,"n":1}"#,
        ];
        for text in cases {
            assert!(matches!(parse(text), Err(CliError::Schema(_))), "{text}");
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("{\n  \"kind\": \"system\",\n  oops\n}") {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }
}
