mod support;

use retard_heat::delay_ode::{
    solve_forced, solve_homogeneous, superpose, DelayOdeParams, HistoryFunction, NoForcing,
};
use retard_heat::funcspec::{FunctionSpec, Interp, SampledFn};
use retard_heat::quadrature::QuadratureConfig;
use support::mos::MethodOfSteps;

fn hist(src: &str) -> HistoryFunction {
    HistoryFunction::new(FunctionSpec::parse(src).unwrap()).unwrap()
}

#[test]
fn homogeneous_matches_stepping() {
    let p = DelayOdeParams::new(-0.5, 0.8, 1.0).unwrap();
    let x = solve_homogeneous(&p, &hist("1 + t"), 2.0, &QuadratureConfig::default()).unwrap();
    let r = MethodOfSteps::new(-0.5, 0.8, 1.0).run(|s| 1.0 + s, |_| 0.0, 2.0);
    assert!((x - r.at(2.0)).abs() < 1e-8, "{x} vs {}", r.at(2.0));
}

#[test]
fn forced_matches_stepping() {
    let p = DelayOdeParams::new(-1.0, 0.5, 1.0).unwrap();
    let rho = FunctionSpec::parse("sin(t)").unwrap();
    let x = solve_forced(&p, &rho, 3.0, &QuadratureConfig::default()).unwrap();
    let r = MethodOfSteps::new(-1.0, 0.5, 1.0).run(|_| 0.0, f64::sin, 3.0);
    assert!((x - r.at(3.0)).abs() < 1e-8);
}

#[test]
fn superposition_matches_stepping() {
    let p = DelayOdeParams::new(-1.0, 0.3, 0.5).unwrap();
    let q = QuadratureConfig::default();
    let h = hist("cos(t)");
    let x = superpose(&p, &h, &|_s: f64| 1.0, 1.2, &q).unwrap();
    let r = MethodOfSteps::new(-1.0, 0.3, 0.5).run(f64::cos, |_| 1.0, 1.2);
    assert!((x - r.at(1.2)).abs() < 1e-8);
    assert_eq!(superpose(&p, &h, &NoForcing, 1.2, &q).unwrap(), solve_homogeneous(&p, &h, 1.2, &q).unwrap());
    let rho = |s: f64| s * s;
    assert_eq!(
        superpose(&p, &HistoryFunction::zero(), &rho, 1.2, &q).unwrap(),
        solve_forced(&p, &rho, 1.2, &q).unwrap()
    );
}

#[test]
fn residual_vanishes_away_from_knots() {
    let (a, b, tau) = (0.4, -1.1, 0.6);
    let p = DelayOdeParams::new(a, b, tau).unwrap();
    let q = QuadratureConfig { abs_tol: 1e-13, ..Default::default() };
    let h = hist("exp(t)*cos(2*t)");
    let rho = |s: f64| 1.0 + s.sin();
    let x = |t: f64| superpose(&p, &h, &rho, t, &q).unwrap();
    let eps = 1e-4;
    for i in 0..30 {
        let t = 0.05 + i as f64 * 0.097;
        if ((t / tau).round() * tau - t).abs() < 2.0 * eps {
            continue;
        }
        let deriv = (x(t + eps) - x(t - eps)) / (2.0 * eps);
        let res = deriv - a * x(t) - b * x(t - tau) - rho(t);
        assert!(res.abs() < 1e-6, "t={t} residual={res}");
    }
}

#[test]
fn continuity_at_origin_and_linearity() {
    let p = DelayOdeParams::new(0.7, -0.9, 1.0).unwrap();
    let q = QuadratureConfig::default();
    let h1 = hist("1 + t^2");
    let h2 = hist("sin(3*t)");
    let both = hist("1 + t^2 + sin(3*t)");
    let x0 = solve_homogeneous(&p, &h1, 1e-12, &q).unwrap();
    assert!((x0 - 1.0).abs() < 1e-10);
    for &t in &[0.4, 1.7, 3.3] {
        let sum = solve_homogeneous(&p, &h1, t, &q).unwrap() + solve_homogeneous(&p, &h2, t, &q).unwrap();
        assert!((solve_homogeneous(&p, &both, t, &q).unwrap() - sum).abs() < 1e-9);
    }
}

#[test]
fn no_coupling_reduces_to_exponential() {
    let q = QuadratureConfig::default();
    for &a in &[-2.0, 0.0, 1.5] {
        let p = DelayOdeParams::new(a, 0.0, 0.8).unwrap();
        let h = hist("2 + sin(t)");
        for &t in &[0.1, 1.0, 2.5] {
            let x = solve_homogeneous(&p, &h, t, &q).unwrap();
            assert!((x - 2.0 * (a * t).exp()).abs() < 1e-9 * (a * t).exp().max(1.0));
        }
    }
}

#[test]
fn sampled_history_uses_spline_derivative() {
    let ts: Vec<f64> = (0..=64).map(|i| -1.0 + i as f64 / 64.0).collect();
    let ys = ts.iter().map(|t| t.cos()).collect();
    let beta = FunctionSpec::sampled(SampledFn::along_t(ts, ys, Interp::Cubic).unwrap());
    let h = HistoryFunction::new(beta).unwrap();
    assert!(h.consistency_residual(1.0, &QuadratureConfig::default()).unwrap() < 1e-10);
    let p = DelayOdeParams::new(-0.3, 0.6, 1.0).unwrap();
    let x = solve_homogeneous(&p, &h, 1.7, &QuadratureConfig::default()).unwrap();
    let r = MethodOfSteps::new(-0.3, 0.6, 1.0).run(f64::cos, |_| 0.0, 1.7);
    assert!((x - r.at(1.7)).abs() < 1e-6);
}
