use std::fmt::Write as _;

use asym_core::expansion::{AsymptoticColumn, Expansion};
use asym_core::format::{complex_string, factor_string, fmt_g17};
use asym_core::mollify::dominant_column;
use asym_core::numerics::{CMatrix, Cx};
use serde::{Deserialize, Serialize};

pub type Complex = [f64; 2];

fn pair(c: Cx) -> Complex {
    [c.re, c.im]
}

fn matrix(m: &CMatrix) -> Vec<Vec<Complex>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&c| pair(c)).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnReport {
    pub index: usize,
    pub lambda: Complex,
    pub rho: Complex,
    /// `[power, coefficient]` pairs of the exponent polynomial, ascending.
    pub exponent: Vec<(i32, Complex)>,
    /// Prefactor orders `t⁰..t^{−r}` in the original coordinates.
    pub prefactor: Vec<Vec<Complex>>,
    pub factor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionReport {
    pub r: u32,
    pub n: usize,
    pub lambdas: Vec<Complex>,
    #[serde(rename = "R")]
    pub r_diagonal: Vec<Complex>,
    /// Diagonals of `Q_0..Q_r`.
    #[serde(rename = "Q")]
    pub q_diagonals: Vec<Vec<Complex>>,
    #[serde(rename = "Ptilde")]
    pub ptilde: Vec<Vec<Vec<Complex>>>,
    #[serde(rename = "T")]
    pub basis: Vec<Vec<Complex>>,
    /// `None` when the two fastest columns cannot be ranked.
    pub dominant: Option<usize>,
    pub columns: Vec<ColumnReport>,
}

impl ExpansionReport {
    pub fn new(e: &Expansion, cols: &[AsymptoticColumn]) -> Self {
        let columns = cols
            .iter()
            .map(|c| ColumnReport {
                index: c.index,
                lambda: pair(c.lambda),
                rho: pair(c.factor.rho),
                exponent: c.factor.p.terms().map(|(k, v)| (k, pair(v))).collect(),
                prefactor: c.physical.iter().map(|v| v.iter().map(|&x| pair(x)).collect()).collect(),
                factor: factor_string(&c.factor),
            })
            .collect();
        Self {
            r: e.r,
            n: e.n,
            lambdas: e.lambdas.iter().map(|&l| pair(l)).collect(),
            r_diagonal: e.rmat.diagonal().into_iter().map(pair).collect(),
            q_diagonals: e.q.iter().map(|q| q.diagonal().into_iter().map(pair).collect()).collect(),
            ptilde: e.ptilde.iter().map(matrix).collect(),
            basis: matrix(&e.t),
            dominant: dominant_column(cols).ok(),
            columns,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let num = |c: &Complex| {
            if c[1] == 0.0 {
                fmt_g17(c[0])
            } else {
                format!("{}{}{}i", fmt_g17(c[0]), if c[1] < 0.0 { "" } else { "+" }, fmt_g17(c[1]))
            }
        };
        let row = |v: &[Complex]| v.iter().map(num).collect::<Vec<_>>().join("  ");
        let mut out = String::new();
        let _ = writeln!(out, "rank r = {}, dimension n = {}", self.r, self.n);
        let _ = writeln!(out, "eigenvalues: {}", row(&self.lambdas));
        for (k, q) in self.q_diagonals.iter().enumerate() {
            let _ = writeln!(out, "Q{k} diagonal: {}", row(q));
        }
        for (k, p) in self.ptilde.iter().enumerate() {
            let _ = writeln!(out, "P{}:", k + 1);
            for r in p {
                let _ = writeln!(out, "  {}", row(r));
            }
        }
        let _ = writeln!(out, "R diagonal: {}", row(&self.r_diagonal));
        let _ = writeln!(out, "T:");
        for r in &self.basis {
            let _ = writeln!(out, "  {}", row(r));
        }
        for c in &self.columns {
            let mark = if self.dominant == Some(c.index) { " (dominant)" } else { "" };
            let lambda = complex_string(Cx::new(c.lambda[0], c.lambda[1]));
            let _ = writeln!(out, "column {} [lambda = {lambda}]{mark}: {}", c.index, c.factor);
        }
        out
    }
}
