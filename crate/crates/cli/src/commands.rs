use std::f64::consts::LN_2;
use std::path::PathBuf;
use std::str::FromStr;

use asym_core::companion::{DerivativeCompanion, MatrixSeries};
use asym_core::expansion::{assemble_columns, compute_expansion, AsymptoticColumn, Expansion};
use asym_core::format::fmt_g17;
use asym_core::integrate::{
    detect_instability, integrate_adaptive, IntegratorConfig, LinearSystem, Sample, Shifted, Status, Trajectory,
};
use asym_core::mollify::{
    build_mollifier, dominant_column, dominant_factor, mollify_scalar, mollify_system, MollifierMode, PowerBase, Shift,
};
use asym_core::numerics::{re, Cx};
use asym_core::symbolic::value_from_log;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, Result};
use crate::output::{complex_header, flatten, write_output, Csv};
use crate::problem::{parse_problem, Problem, ProblemFile};
use crate::report::ExpansionReport;

#[derive(Parser, Debug)]
#[command(name = "asym", version, about = "Asymptotic solutions and stabilized integration of w' = t^r A(t) w")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the formal asymptotic solution and write a report.
    Expand(ExpandArgs),
    /// Integrate the raw or mollified problem and write the trajectory as CSV.
    Solve(SolveArgs),
    /// Integrate and compare componentwise against one asymptotic column.
    Compare(CompareArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Raw,
    Mollified,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    #[value(name = "t")]
    T,
    #[value(name = "1+t")]
    OnePlusT,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierKind {
    PerComponent,
    Dominant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnChoice {
    Dominant,
    Index(usize),
}

impl FromStr for ColumnChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "dominant" {
            return Ok(ColumnChoice::Dominant);
        }
        s.parse().map(ColumnChoice::Index).map_err(|_| format!("expected a column index or \"dominant\", got {s:?}"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct ExpandArgs {
    pub input: PathBuf,
    /// Treat missing orders up to A_{r+1} as zero.
    #[arg(long)]
    pub pad_zero: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Raw)]
    pub mode: Mode,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: f64,
    /// Initial state, comma separated: w for raw systems, (y, y', ...) for
    /// raw scalar problems, the mollified unknowns in mollified mode.
    #[arg(long, allow_hyphen_values = true)]
    pub ic: String,
    /// Integrate in tau = t - q.
    #[arg(long, default_value_t = 0.0)]
    pub shift_q: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub pad_zero: bool,
    /// Power base of system mollifiers (default 1+t; scalar problems always use t).
    #[arg(long, value_enum)]
    pub base: Option<Base>,
    #[arg(long, value_enum, default_value_t = MollifierKind::PerComponent)]
    pub mollifier: MollifierKind,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Asymptotic column index (as listed by `expand`) or "dominant".
    #[arg(long, default_value = "dominant")]
    pub column: ColumnChoice,
    /// Log-ratio drift that counts as instability.
    #[arg(long, default_value_t = LN_2)]
    pub delta: f64,
}

/// Successful command summary for the status line.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub command: &'static str,
    pub detail: String,
}

fn load(input: &std::path::Path, pad_zero: bool) -> Result<(ProblemFile, MatrixSeries)> {
    let problem = parse_problem(input)?;
    let mut series = problem.series()?;
    if pad_zero {
        series.pad_zero(series.r as usize + 1);
    }
    Ok((problem, series))
}

fn expand(series: &MatrixSeries) -> Result<(Expansion, Vec<AsymptoticColumn>)> {
    let e = compute_expansion(series)?;
    let cols = assemble_columns(&e);
    Ok((e, cols))
}

pub fn cmd_expand(args: &ExpandArgs) -> Result<Summary> {
    let (_, series) = load(&args.input, args.pad_zero)?;
    let (e, cols) = expand(&series)?;
    let report = ExpansionReport::new(&e, &cols);
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(Summary { command: "expand", detail: format!("columns={}", cols.len()) })
}

/// One output row: `w_i = mantissa_i · exp(log_i)` in original coordinates,
/// plus the mollified state when there is one.
#[derive(Clone, Debug)]
pub struct Row {
    pub t: f64,
    pub w: Vec<(Cx, Cx)>,
    pub u: Option<Vec<Cx>>,
}

impl Row {
    pub fn w_values(&self) -> Vec<Cx> {
        self.w
            .iter()
            .map(|&(m, l)| if m == re(0.0) || l == re(0.0) { m } else { value_from_log(m.ln() + l).value })
            .collect()
    }
}

#[derive(Debug)]
pub struct Run {
    pub n: usize,
    pub mollified: bool,
    pub rows: Vec<Row>,
    pub abort: Option<CliError>,
    pub columns: Option<Vec<AsymptoticColumn>>,
    pub scalar_rank: Option<u32>,
}

fn parse_ic(text: &str, n: usize) -> Result<Vec<Cx>> {
    let values: Vec<Cx> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map(re).map_err(|_| CliError::Usage(format!("--ic: {s:?} is not a number"))))
        .collect::<Result<_>>()?;
    if values.len() != n {
        return Err(CliError::Usage(format!("--ic has {} values, the problem has dimension {n}", values.len())));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(CliError::Usage("--ic values must be finite".into()));
    }
    Ok(values)
}

fn rows_of<F>(traj: &Trajectory, q: f64, convert: F) -> (Vec<Row>, Option<CliError>)
where
    F: Fn(&Sample) -> Row,
{
    let mut rows: Vec<Row> = traj.samples.iter().map(&convert).collect();
    let abort = match &traj.status {
        Status::Completed => None,
        Status::Aborted { reason, t_abort, last } => {
            rows.push(convert(last));
            Some(CliError::Aborted { reason: *reason, t_abort: t_abort + q })
        }
    };
    (rows, abort)
}

/// Runs the integration described by `args`.
pub fn integrate_problem(args: &SolveArgs) -> Result<Run> {
    let (problem, series) = load(&args.input, args.pad_zero)?;
    let n = problem.n;
    let w0 = parse_ic(&args.ic, n)?;
    let q = args.shift_q;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(CliError::Usage(format!("--shift-q {q} must be finite and non-negative")));
    }
    if !(args.t1 > args.t0) {
        return Err(CliError::Usage(format!("need t1 > t0, got [{}, {}]", args.t0, args.t1)));
    }
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let cfg = IntegratorConfig {
        rtol: args.rtol,
        atol: args.atol,
        max_steps: args.max_steps,
        sample_count: args.samples,
        ..IntegratorConfig::default()
    };
    cfg.validate()?;
    let scalar_rank = problem.is_scalar().then_some(problem.r);
    let integrate = |sys: &dyn LinearSystem, w0: &[Cx]| integrate_adaptive(sys, w0, args.t0, args.t1, &cfg);

    match args.mode {
        Mode::Raw => {
            let needs_positive = problem.r > 0 || !series.regular_at_zero();
            if needs_positive && !(args.t0 + q > 0.0) {
                return Err(CliError::Usage(format!("raw integration with r = {} needs t0 > 0", problem.r)));
            }
            let traj = match &problem.problem {
                Problem::System(s) => integrate(&Shifted { inner: s.clone(), q }, &w0)?,
                Problem::Scalar(op) => integrate(&Shifted { inner: DerivativeCompanion::from_operator(op)?, q }, &w0)?,
            };
            let (rows, abort) =
                rows_of(&traj, q, |s| Row { t: s.t + q, w: s.w.iter().map(|&v| (v, re(0.0))).collect(), u: None });
            let columns = expand(&series).ok().map(|(_, c)| c);
            Ok(Run { n, mollified: false, rows, abort, columns, scalar_rank })
        }
        Mode::Mollified => {
            let (_, cols) = expand(&series)?;
            let (rows, abort) = match &problem.problem {
                Problem::System(s) => {
                    let mode = match args.mollifier {
                        MollifierKind::PerComponent => MollifierMode::PerComponent,
                        MollifierKind::Dominant => MollifierMode::Dominant,
                    };
                    let base = match args.base.unwrap_or(Base::OnePlusT) {
                        Base::T => PowerBase::T,
                        Base::OnePlusT => PowerBase::OnePlusT,
                    };
                    let m = build_mollifier(&cols, mode, base)?;
                    let sys = mollify_system(s, &m)?.shift_variable(q)?;
                    sys.check_window(args.t0, args.t1)?;
                    let traj = integrate(&sys, &w0)?;
                    rows_of(&traj, q, |s| Row { t: s.t + q, w: sys.reconstruct_parts(s.t, &s.w), u: Some(s.w.clone()) })
                }
                Problem::Scalar(op) => {
                    if args.base == Some(Base::OnePlusT) {
                        return Err(CliError::Usage("scalar mollification uses base t".into()));
                    }
                    let phi = dominant_factor(&cols)?;
                    let sys = mollify_scalar(op, &phi)?.shift_variable(q)?;
                    sys.check_window(args.t0, args.t1)?;
                    let traj = integrate(&sys, &w0)?;
                    rows_of(&traj, q, |s| Row { t: s.t + q, w: sys.reconstruct_parts(s.t, &s.w), u: Some(s.w.clone()) })
                }
            };
            Ok(Run { n, mollified: true, rows, abort, columns: Some(cols), scalar_rank })
        }
    }
}

pub fn solve_csv(run: &Run) -> String {
    let mut header = vec!["t".to_string()];
    header.extend(complex_header("w", run.n));
    if run.mollified {
        header.extend(complex_header("u", run.n));
    }
    let mut csv = Csv::new(&header);
    for row in &run.rows {
        let w = row.w_values();
        let u = row.u.as_deref().unwrap_or(&[]);
        csv.row(row.t, flatten(&w).chain(flatten(u)));
    }
    csv.finish()
}

fn finish(run: Run, command: &'static str, detail: String) -> Result<Summary> {
    match run.abort {
        Some(e) => Err(e),
        None => Ok(Summary { command, detail }),
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Summary> {
    let run = integrate_problem(args)?;
    write_output(args.output.as_deref(), &solve_csv(&run))?;
    let detail = format!("rows={}", run.rows.len());
    finish(run, "solve", detail)
}

/// Ratios `|Re(w_i / Φ_ij)|` against column `j`, each normalized by its value
/// at the first sample. Components where `Φ_ij` vanishes come back as `None`.
pub fn column_ratios(run: &Run, col: &AsymptoticColumn) -> Vec<Option<Vec<(f64, f64)>>> {
    let first = &run.rows[0];
    let pref0 = col.prefactor_at(first.t);
    let scale = pref0.iter().map(|c| c.norm()).fold(0.0, f64::max);
    (0..run.n)
        .map(|i| {
            if !(pref0[i].norm() > 1e-12 * scale) {
                return None;
            }
            let raw: Vec<(f64, f64)> = run
                .rows
                .iter()
                .map(|row| {
                    let t = row.t;
                    let (m, l) = row.w[i];
                    let mut log_phi = col.factor.log_at(t, t);
                    if let Some(r) = run.scalar_rank {
                        log_phi += re((r as usize * i) as f64 * t.ln());
                    }
                    let z = m / col.prefactor_at(t)[i] * (l - log_phi).exp();
                    (t, z.re.abs())
                })
                .collect();
            let norm = raw[0].1;
            let norm = if norm.is_finite() && norm > 0.0 { norm } else { 1.0 };
            Some(raw.into_iter().map(|(t, v)| (t, v / norm)).collect())
        })
        .collect()
}

/// `STABLE` or `UNSTABLE t_onset=<t>` from the earliest onset over all
/// components that have a ratio.
pub fn verdict(ratios: &[Option<Vec<(f64, f64)>>], delta: f64) -> Result<Option<f64>> {
    let mut onset: Option<f64> = None;
    for series in ratios.iter().flatten() {
        if let Some(t) = detect_instability(series, delta)? {
            onset = Some(onset.map_or(t, |o: f64| o.min(t)));
        }
    }
    Ok(onset)
}

pub fn verdict_line(onset: Option<f64>) -> String {
    match onset {
        None => "STABLE".to_string(),
        Some(t) => format!("UNSTABLE t_onset={}", fmt_g17(t)),
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Summary> {
    let run = integrate_problem(&args.solve)?;
    let cols = match &run.columns {
        Some(c) => c.clone(),
        None => {
            let (_, series) = load(&args.solve.input, args.solve.pad_zero)?;
            expand(&series)?.1
        }
    };
    let j = match args.column {
        ColumnChoice::Dominant => dominant_column(&cols)?,
        ColumnChoice::Index(j) if j < cols.len() => j,
        ColumnChoice::Index(j) => {
            return Err(CliError::Usage(format!("--column {j}: only {} columns", cols.len())));
        }
    };
    let ratios = column_ratios(&run, &cols[j]);
    let onset = verdict(&ratios, args.delta)?;

    let header: Vec<String> =
        std::iter::once("t".to_string()).chain((1..=run.n).map(|i| format!("ratio_{i}"))).collect();
    let mut csv = Csv::new(&header);
    for (k, row) in run.rows.iter().enumerate() {
        csv.row(row.t, ratios.iter().map(|r| r.as_ref().map_or(f64::NAN, |s| s[k].1)));
    }
    let line = verdict_line(onset);
    csv.line(&line);
    write_output(args.solve.output.as_deref(), &csv.finish())?;
    let detail = format!("column={j} verdict={}", line.replace(' ', "_"));
    finish(run, "compare", detail)
}

pub fn run(cli: &Cli) -> Result<Summary> {
    match &cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
    }
}
