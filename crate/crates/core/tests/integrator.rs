use approx::assert_relative_eq;
use asym_core::companion::MatrixSeries;
use asym_core::integrate::{integrate_adaptive, ConstantSystem, IntegratorConfig, LinearSystem};
use asym_core::numerics::{re, CMatrix, Cx};

/// Relative error of `w′ = w` integrated over `[0, 10]`, long enough that
/// the step count is in the asymptotic regime.
fn exp_error(rtol: f64) -> f64 {
    let sys = ConstantSystem(CMatrix::from_real(&[&[1.0]]));
    let cfg = IntegratorConfig { sample_count: 2, ..IntegratorConfig::with_tolerances(rtol, 1e-300) };
    let traj = integrate_adaptive(&sys, &[re(1.0)], 0.0, 10.0, &cfg).unwrap();
    let exact = 10f64.exp();
    (traj.last().unwrap().w[0] - exact).norm() / exact
}

/// The raw 2x2 system with the `t F(t)` coupling, `F = 1/t − 1/t²`.
fn coupled_system() -> MatrixSeries {
    let a0 = CMatrix::from_real(&[&[-1.0, 0.0], &[0.0, -0.5]]);
    let a1 = CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 0.0]]);
    let a2 = CMatrix::from_real(&[&[0.0, -1.0], &[-1.0, 0.0]]);
    MatrixSeries::new(1, vec![a0, a1, a2]).unwrap()
}

fn rk4(sys: &impl LinearSystem, w0: &[Cx], t0: f64, t1: f64, h: f64) -> Vec<Cx> {
    let steps = ((t1 - t0) / h).round() as usize;
    let h = (t1 - t0) / steps as f64;
    let f = |t: f64, w: &[Cx]| sys.matrix(t).matvec(w);
    let axpy = |w: &[Cx], k: &[Cx], s: f64| w.iter().zip(k).map(|(a, b)| a + b * s).collect::<Vec<_>>();
    let mut w = w0.to_vec();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &w);
        let k2 = f(t + h / 2.0, &axpy(&w, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&w, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&w, &k3, h));
        for j in 0..w.len() {
            w[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
    }
    w
}

#[test]
fn error_scales_with_tolerance() {
    let rtols = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
    let errs: Vec<f64> = rtols.iter().map(|&r| exp_error(r)).collect();
    let xs: Vec<f64> = rtols.iter().map(|r| r.log10()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log10()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let per_decade = 10f64.powf(slope);
    assert!((8.0..=64.0).contains(&per_decade), "error ratio per decade {per_decade}, errors {errs:?}");
}

#[test]
fn tighter_tolerance_never_hurts() {
    let errs: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10].iter().map(|&r| exp_error(r)).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

#[test]
fn dense_output_matches_restarted_integration() {
    let sys = coupled_system();
    let cfg = IntegratorConfig { sample_count: 13, ..IntegratorConfig::default() };
    let w0 = [re(5.0), re(5.0)];
    let traj = integrate_adaptive(&sys, &w0, 2.0, 8.0, &cfg).unwrap();
    let end_only = IntegratorConfig { sample_count: 2, ..cfg.clone() };
    for s in traj.samples.iter().skip(1) {
        let direct = integrate_adaptive(&sys, &w0, 2.0, s.t, &end_only).unwrap();
        for (a, b) in s.w.iter().zip(&direct.last().unwrap().w) {
            let tol = 10.0 * (cfg.atol + cfg.rtol * b.norm());
            assert!((a - b).norm() <= tol, "t = {}: {a} vs {b}", s.t);
        }
    }
}

#[test]
fn raw_coupled_system_agrees_with_rk4() {
    let sys = coupled_system();
    let w0 = [re(5.0), re(5.0)];
    let traj = integrate_adaptive(&sys, &w0, 2.0, 8.0, &IntegratorConfig::default()).unwrap();
    assert!(traj.is_completed());
    let ours = &traj.last().unwrap().w;
    let oracle = rk4(&sys, &w0, 2.0, 8.0, 1e-4);
    for (a, b) in ours.iter().zip(&oracle) {
        assert!(a.is_finite());
        assert!((a - b).norm() <= 1e-9 + 1e-6 * b.norm(), "{a} vs {b}");
    }
}

#[test]
fn exponential_to_e() {
    let sys = ConstantSystem(CMatrix::from_real(&[&[1.0]]));
    let traj = integrate_adaptive(&sys, &[re(1.0)], 0.0, 1.0, &IntegratorConfig::default()).unwrap();
    assert_relative_eq!(traj.last().unwrap().w[0].re, std::f64::consts::E, max_relative = 1e-8);
}
