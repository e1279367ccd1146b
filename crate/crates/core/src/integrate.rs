//! Adaptive Dormand–Prince 5(4) integration of linear systems `w′ = B(t) w`
//! with dense output, plus a ratio-drift instability detector.

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Cx};
use crate::par::{self, Exec};

/// A linear time-dependent system `w′ = B(t) w`.
///
/// Implementors provide `B(t)`; [`LinearSystem::apply`] may be overridden
/// when the product can be formed without the full matrix.
pub trait LinearSystem: Sync {
    fn dim(&self) -> usize;

    /// Writes `B(t)` into `out` (shape `dim × dim`).
    fn matrix_into(&self, t: f64, out: &mut CMatrix);

    /// `dw = B(t) w`; `scratch` is a `dim × dim` work matrix.
    fn apply(&self, t: f64, w: &[Cx], dw: &mut [Cx], scratch: &mut CMatrix) {
        self.matrix_into(t, scratch);
        scratch.matvec_into(w, dw);
    }

    fn matrix(&self, t: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        self.matrix_into(t, &mut m);
        m
    }
}

impl<S: LinearSystem + ?Sized> LinearSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn matrix_into(&self, t: f64, out: &mut CMatrix) {
        (**self).matrix_into(t, out)
    }
    fn apply(&self, t: f64, w: &[Cx], dw: &mut [Cx], scratch: &mut CMatrix) {
        (**self).apply(t, w, dw, scratch)
    }
}

/// Constant-coefficient system, mostly for tests.
#[derive(Clone, Debug)]
pub struct ConstantSystem(pub CMatrix);

impl LinearSystem for ConstantSystem {
    fn dim(&self) -> usize {
        self.0.rows()
    }
    fn matrix_into(&self, _t: f64, out: &mut CMatrix) {
        out.clone_from(&self.0);
    }
}

/// Closure-backed system.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &mut CMatrix) + Sync> FnSystem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64, &mut CMatrix) + Sync> LinearSystem for FnSystem<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn matrix_into(&self, t: f64, out: &mut CMatrix) {
        (self.f)(t, out)
    }
}

/// Evaluates an inner system at `τ + q`, so that an initial value problem
/// posed near `τ = 0` probes the original near `t = q`.
#[derive(Clone, Debug)]
pub struct Shifted<S> {
    pub inner: S,
    pub q: f64,
}

impl<S: LinearSystem> LinearSystem for Shifted<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn matrix_into(&self, tau: f64, out: &mut CMatrix) {
        self.inner.matrix_into(tau + self.q, out)
    }
    fn apply(&self, tau: f64, w: &[Cx], dw: &mut [Cx], scratch: &mut CMatrix) {
        self.inner.apply(tau + self.q, w, dw, scratch)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Number of equispaced output samples, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, h_max: None, max_steps: 1_000_000, sample_count: 201 }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::InvalidConfig(format!("rtol must be positive, got {}", self.rtol)));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::InvalidConfig(format!("atol must be positive, got {}", self.atol)));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidConfig("sample_count must be at least 2".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if let Some(h) = self.h_init.filter(|h| !(*h > 0.0)) {
            return Err(Error::InvalidConfig(format!("h_init must be positive, got {h}")));
        }
        if let Some(h) = self.h_max.filter(|h| !(*h > 0.0)) {
            return Err(Error::InvalidConfig(format!("h_max must be positive, got {h}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub w: Vec<Cx>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbortReason {
    /// Some component exceeded [`OVERFLOW_LIMIT`] in magnitude.
    Overflow,
    /// A non-finite value appeared in the state.
    NonFinite,
    MaxSteps,
    StepSizeUnderflow,
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbortReason::Overflow => "overflow",
            AbortReason::NonFinite => "non-finite",
            AbortReason::MaxSteps => "max-steps",
            AbortReason::StepSizeUnderflow => "step-size-underflow",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Completed,
    /// `last` is the final accepted state before the abort.
    Aborted {
        reason: AbortReason,
        t_abort: f64,
        last: Sample,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: Status,
    pub stats: Stats,
}

impl Trajectory {
    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.w.len())
    }

    /// Sample with time closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

pub const OVERFLOW_LIMIT: f64 = 1e300;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// b5 − b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output (Hairer & Wanner's continuous extension).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI step control.
const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct Stages {
    k: [Vec<Cx>; 7],
    tmp: Vec<Cx>,
    y_new: Vec<Cx>,
    scratch: CMatrix,
}

impl Stages {
    fn new(n: usize) -> Self {
        let z = vec![Cx::new(0.0, 0.0); n];
        Self { k: std::array::from_fn(|_| z.clone()), tmp: z.clone(), y_new: z, scratch: CMatrix::zeros(n, n) }
    }
}

fn rms_scaled(v: &[Cx], y: &[Cx], atol: f64, rtol: f64) -> f64 {
    let s: f64 = v.iter().zip(y).map(|(a, b)| (a.norm() / (atol + rtol * b.norm())).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn initial_step<S: LinearSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[Cx],
    f0: &[Cx],
    dir: f64,
    cfg: &IntegratorConfig,
    st: &mut Stages,
) -> f64 {
    let d0 = rms_scaled(y0, y0, cfg.atol, cfg.rtol);
    let d1 = rms_scaled(f0, y0, cfg.atol, cfg.rtol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y0.len() {
        st.tmp[i] = y0[i] + f0[i] * (dir * h0);
    }
    let mut f1 = vec![Cx::new(0.0, 0.0); y0.len()];
    sys.apply(t0 + dir * h0, &st.tmp, &mut f1, &mut st.scratch);
    let diff: Vec<Cx> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y0, cfg.atol, cfg.rtol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
    (100.0 * h0).min(h1)
}

/// Integrates `w′ = B(t) w` from `t0` to `t1` (either direction).
///
/// Returns `Err` only for invalid input; numerical failure is reported in
/// [`Trajectory::status`] with every sample up to the failure retained.
pub fn integrate_adaptive<S: LinearSystem + ?Sized>(
    sys: &S,
    w0: &[Cx],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = sys.dim();
    if w0.len() != n {
        return Err(Error::Dimension(format!("initial state has {} components, system has {n}", w0.len())));
    }
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidConfig(format!("invalid interval [{t0}, {t1}]")));
    }
    if !w0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidConfig("initial state is not finite".into()));
    }

    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let h_max = cfg.h_max.unwrap_or(span).min(span);
    let ns = cfg.sample_count;
    let sample_t = |i: usize| if i == ns - 1 { t1 } else { t0 + (t1 - t0) * (i as f64) / ((ns - 1) as f64) };

    let mut st = Stages::new(n);
    let mut stats = Stats::default();
    let mut samples = Vec::with_capacity(ns);
    samples.push(Sample { t: t0, w: w0.to_vec() });
    let mut next_sample = 1;

    let mut t = t0;
    let mut y = w0.to_vec();
    sys.apply(t, &y, &mut st.k[0], &mut st.scratch);
    stats.evaluations += 1;

    let mut h = match cfg.h_init {
        Some(h) => h,
        None => {
            let f0 = st.k[0].clone();
            stats.evaluations += 1;
            initial_step(sys, t, &y, &f0, dir, cfg, &mut st)
        }
    }
    .min(h_max);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    let mut cont = [
        vec![Cx::new(0.0, 0.0); n],
        vec![Cx::new(0.0, 0.0); n],
        vec![Cx::new(0.0, 0.0); n],
        vec![Cx::new(0.0, 0.0); n],
        vec![Cx::new(0.0, 0.0); n],
    ];

    let abort = |reason, t_abort, t_last: f64, y_last: &[Cx], samples, stats| Trajectory {
        samples,
        status: Status::Aborted { reason, t_abort, last: Sample { t: t_last, w: y_last.to_vec() } },
        stats,
    };

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Ok(abort(AbortReason::MaxSteps, t, t, &y, samples, stats));
        }
        let remaining = (t1 - t).abs();
        let mut last_step = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last_step = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Ok(abort(AbortReason::StepSizeUnderflow, t, t, &y, samples, stats));
        }
        let hs = dir * h;

        macro_rules! stage {
            ($dst:expr, $c:expr, [$(($a:expr, $src:expr)),*]) => {{
                for i in 0..n {
                    st.tmp[i] = y[i] $(+ st.k[$src][i] * (hs * $a))*;
                }
                sys.apply(t + $c * hs, &st.tmp, &mut st.k[$dst], &mut st.scratch);
            }};
        }
        stage!(1, C2, [(A21, 0)]);
        stage!(2, C3, [(A31, 0), (A32, 1)]);
        stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
        stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
        stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
        for i in 0..n {
            st.y_new[i] = y[i]
                + (st.k[0][i] * A71 + st.k[2][i] * A73 + st.k[3][i] * A74 + st.k[4][i] * A75 + st.k[5][i] * A76) * hs;
        }
        let t_new = if last_step { t1 } else { t + hs };
        sys.apply(t_new, &st.y_new, &mut st.k[6], &mut st.scratch);
        stats.evaluations += 6;

        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..n {
            let e = (st.k[0][i] * E1
                + st.k[2][i] * E3
                + st.k[3][i] * E4
                + st.k[4][i] * E5
                + st.k[5][i] * E6
                + st.k[6][i] * E7)
                * hs;
            let sc = cfg.atol + cfg.rtol * y[i].norm().max(st.y_new[i].norm());
            let r = e.norm() / sc;
            if !r.is_finite() {
                finite = false;
            }
            err = err.max(r);
        }
        if !finite {
            // Shrink hard; a genuinely non-finite state is caught below.
            if h <= 1e-14 * t.abs().max(1.0) * 10.0 {
                return Ok(abort(AbortReason::NonFinite, t_new, t, &y, samples, stats));
            }
            h *= FAC_MIN;
            stats.rejected += 1;
            rejected_last = true;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            // Dense-output coefficients for (t, t_new].
            for i in 0..n {
                let ydiff = st.y_new[i] - y[i];
                let bspl = st.k[0][i] * hs - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - st.k[6][i] * hs - bspl;
                cont[4][i] = (st.k[0][i] * D1
                    + st.k[2][i] * D3
                    + st.k[3][i] * D4
                    + st.k[4][i] * D5
                    + st.k[5][i] * D6
                    + st.k[6][i] * D7)
                    * hs;
            }
            while next_sample < ns {
                let ts = sample_t(next_sample);
                if (ts - t_new) * dir > 0.0 {
                    break;
                }
                let w = if ts == t_new {
                    st.y_new.clone()
                } else {
                    let theta = (ts - t) / hs;
                    let theta1 = 1.0 - theta;
                    (0..n)
                        .map(|i| {
                            cont[0][i]
                                + (cont[1][i] + (cont[2][i] + (cont[3][i] + cont[4][i] * theta1) * theta) * theta1)
                                    * theta
                        })
                        .collect()
                };
                samples.push(Sample { t: ts, w });
                next_sample += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut st.y_new);
            st.k.swap(0, 6);

            if y.iter().any(|v| !v.is_finite()) {
                samples.retain(|s| s.w.iter().all(|v| v.is_finite()));
                let (tl, yl) = samples.last().map(|s| (s.t, s.w.clone())).unwrap_or((t0, w0.to_vec()));
                return Ok(abort(AbortReason::NonFinite, t, tl, &yl, samples, stats));
            }
            if y.iter().any(|v| v.norm() > OVERFLOW_LIMIT) {
                return Ok(abort(AbortReason::Overflow, t, t, &y, samples, stats));
            }
            if last_step {
                break;
            }

            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(h_max);
            err_prev = err_c;
            rejected_last = false;
        } else {
            stats.rejected += 1;
            let fac = (SAFETY * err.powf(-ALPHA)).max(FAC_MIN);
            h *= fac.min(1.0);
            rejected_last = true;
        }
    }

    Ok(Trajectory { samples, status: Status::Completed, stats })
}

/// Integrates several initial value problems against the same system.
pub fn integrate_many<S: LinearSystem + ?Sized>(
    exec: Exec,
    sys: &S,
    initial: &[Vec<Cx>],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Vec<Result<Trajectory>> {
    par::map(exec, initial, |w0| integrate_adaptive(sys, w0, t0, t1, cfg))
}

/// Smallest `t` at which `ln|ratio|` departs from its first-quartile median
/// by more than `delta`. Needs at least 16 samples.
pub fn detect_instability(series: &[(f64, f64)], delta: f64) -> Result<Option<f64>> {
    const MIN_SAMPLES: usize = 16;
    if series.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { got: series.len(), need: MIN_SAMPLES });
    }
    let t_first = series[0].0;
    let t_last = series[series.len() - 1].0;
    let cutoff = t_first + 0.25 * (t_last - t_first);
    let mut head: Vec<f64> =
        series.iter().filter(|(t, _)| *t <= cutoff).map(|(_, r)| r.abs().ln()).filter(|v| v.is_finite()).collect();
    if head.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    head.sort_by(f64::total_cmp);
    let mid = head.len() / 2;
    let median = if head.len() % 2 == 1 { head[mid] } else { 0.5 * (head[mid - 1] + head[mid]) };
    Ok(series.iter().find(|(_, r)| !((r.abs().ln() - median).abs() <= delta)).map(|(t, _)| *t))
}
