//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are fixed below.

#[path = "../../core/tests/support/mos.rs"]
mod mos;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use mos::MethodOfSteps;
use retard_heat::compat::{check_decay_conditions, CheckStatus, DEFAULT_DELTA};
use retard_heat::delay_ode::{solve_homogeneous, superpose, DelayOdeParams, HistoryFunction};
use retard_heat::delayed_exp::{delayed_exp_eval, DelayedExpParams};
use retard_heat::energy::{delay_params_for, energy_trace, gronwall_check, nodelay_params_for};
use retard_heat::field::{compare_fields, DelayGridSpec, GridSpec, SolutionField};
use retard_heat::funcspec::FunctionSpec;
use retard_heat::heat_delay::{reduce_delay, solve_delay, DelayCoefficients, DelayHeatProblem, ModeSystem, DEFAULT_PROP_TOL};
use retard_heat::heat_nodelay::{solve, Conventions, HeatProblem, DEFAULT_COMP_TOL};
use retard_heat::oracle_fd::{fd_solve_delay, fd_solve_nodelay, observed_order, richardson_estimate, richardson_extrapolate, FdConfig, Scheme};
use retard_heat::quadrature::QuadratureConfig;
use retard_heat::spectral::{decay_fit, sine_coefficients, EigenBasis, DEFAULT_FIT_SLACK};
use retard_heat_cli::{sweep, RunConfig};

// Criterion 1.
const DEXP_REL_TOL: f64 = 1e-6;
const DEXP_STEP: f64 = 1e-5;
const DEXP_POINTS: usize = 200;
const DEXP_SECONDS: f64 = 1.0;
// Criterion 2.
const DDE_TOL: f64 = 1e-7;
const DDE_SECONDS: f64 = 10.0;
// Criterion 3.
const ANALYTIC_TOL: f64 = 1e-10;
const ANALYTIC_SECONDS: f64 = 1.0;
// Criterion 4.
const MMS_TOL: f64 = 1e-6;
const MMS_MODES: usize = 64;
const FD_ESTIMATE_FACTOR: f64 = 5.0;
const MMS_SECONDS: f64 = 60.0;
// Criterion 5.
const MODE_TOL: f64 = 1e-8;
const MIN_FD_ORDER: f64 = 1.8;
const MODE_SECONDS: f64 = 120.0;
// Criterion 6.
const UNIQUENESS_TOL: f64 = 1e-12;
const NOISE_ENERGY: f64 = 1e-20;
// Criteria 6 and 7.
const SOLVER_TOL: f64 = 1e-9;
// Criterion 8.
const COEFF_TOL: f64 = 1e-10;
const SLOPE_TOL: f64 = 0.1;
// Criterion 10.
const NOISE_BAND: f64 = 0.10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spec(s: &str) -> FunctionSpec {
    FunctionSpec::parse(s).unwrap()
}

fn within(start: Instant, limit: f64) -> (bool, f64) {
    let s = start.elapsed().as_secs_f64();
    (s < limit, s)
}

fn sup_error(f: &SolutionField, exact: impl Fn(f64, f64) -> f64, from: f64) -> f64 {
    let mut e = 0.0f64;
    for (it, &t) in f.ts.iter().enumerate().filter(|(_, t)| **t >= from) {
        for (ix, &x) in f.xs.iter().enumerate() {
            e = e.max((f.at(it, ix) - exact(x, t)).abs());
        }
    }
    e
}

fn delayed_exponential() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for b in [1.0, -1.0, 3.0, -3.0] {
        for tau in [0.5, 1.0] {
            let p = DelayedExpParams::new(b, tau).unwrap();
            let f = |t: f64| delayed_exp_eval(&p, t).unwrap();
            let mut used = 0;
            let mut k = 0;
            while used < DEXP_POINTS {
                let t = 5.0 * tau * (k as f64 + 0.5) / (2 * DEXP_POINTS) as f64;
                k += 1;
                let knot_gap = (t / tau - (t / tau).round()).abs() * tau;
                if knot_gap < 10.0 * DEXP_STEP {
                    continue;
                }
                used += 1;
                let d = (f(t + DEXP_STEP) - f(t - DEXP_STEP)) / (2.0 * DEXP_STEP);
                let target = b * f(t - tau);
                worst = worst.max((d - target).abs() / target.abs().max(1.0));
            }
        }
    }
    let (fast, s) = within(start, DEXP_SECONDS);
    outcome(worst <= DEXP_REL_TOL && fast, format!("max rel err {worst:.2e} <= {DEXP_REL_TOL:e}, {s:.2} s"))
}

fn delay_ode_matrix() -> Outcome {
    let start = Instant::now();
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for a in [-1.0, 0.0, 0.5] {
        for b in [-0.8, 0.8] {
            for tau in [0.5, 1.0] {
                for (beta_src, beta) in [("1 + t", (|s: f64| 1.0 + s) as fn(f64) -> f64), ("cos(t)", f64::cos)] {
                    for (rho_src, rho) in [("0", (|_: f64| 0.0) as fn(f64) -> f64), ("sin(t)", f64::sin)] {
                        cases += 1;
                        let p = DelayOdeParams::new(a, b, tau).unwrap();
                        let h = HistoryFunction::new(spec(beta_src)).unwrap();
                        let r = spec(rho_src);
                        let traj = MethodOfSteps::new(a, b, tau).run(beta, rho, 4.0 * tau);
                        for i in 0..=40 {
                            let t = 4.0 * tau * i as f64 / 40.0;
                            let x = superpose(&p, &h, &r, t, &quad).unwrap();
                            worst = worst.max((x - traj.at(t)).abs());
                        }
                    }
                }
            }
        }
    }
    let (fast, s) = within(start, DDE_SECONDS);
    outcome(worst <= DDE_TOL && fast, format!("{cases} cases, max err {worst:.2e} <= {DDE_TOL:e}, {s:.2} s"))
}

fn analytic_fixture() -> Outcome {
    let start = Instant::now();
    let p = HeatProblem::new(1.0, 0.0, 0.0, PI, 2.0, spec("0"), spec("sin(x)"), spec("0"), spec("0")).unwrap();
    let f = solve(&p, EigenBasis::new(PI, 1).unwrap(), GridSpec { nx: 64, nt: 64 }, &QuadratureConfig::default(), Conventions::default(), DEFAULT_COMP_TOL).unwrap();
    let e = sup_error(&f, |x, t| (-t).exp() * x.sin(), 0.0);
    let (fast, s) = within(start, ANALYTIC_SECONDS);
    outcome(e <= ANALYTIC_TOL && fast, format!("sup err {e:.2e} <= {ANALYTIC_TOL:e} at N = 1, {s:.2} s"))
}

/// `v* = e^{-x/2 + t/4} [e^{-t} sin x + (1 + x/pi) cos t + q(x) sin t / 100]`,
/// `q = x^4 - 2 pi x^3 + pi^3 x`, for `a = 1, b = 1, c = 1/2`.
fn manufactured_heat() -> (HeatProblem, impl Fn(f64, f64) -> f64) {
    let g = "exp(-x/2 + t/4)*(x^4*cos(t)/100 - pi*x^3*cos(t)/50 - 3*x^2*sin(t)/25 - x*sin(t)/pi \
             + 3*pi*x*sin(t)/25 + pi^3*x*cos(t)/100 - sin(t))";
    let p = HeatProblem::new(
        1.0,
        1.0,
        0.5,
        PI,
        1.0,
        spec(g),
        spec("exp(-x/2)*(sin(x) + 1 + x/pi)"),
        spec("exp(t/4)*cos(t)"),
        spec("exp(-pi/2 + t/4)*2*cos(t)"),
    )
    .unwrap();
    let exact = |x: f64, t: f64| {
        let q = x.powi(4) - 2.0 * PI * x.powi(3) + PI.powi(3) * x;
        (-x / 2.0 + t / 4.0).exp() * ((-t).exp() * x.sin() + (1.0 + x / PI) * t.cos() + q * t.sin() / 100.0)
    };
    (p, exact)
}

fn manufactured_nodelay() -> Outcome {
    let start = Instant::now();
    let (p, exact) = manufactured_heat();
    let quad = QuadratureConfig::default();
    let basis = EigenBasis::new(PI, MMS_MODES).unwrap();
    let sp = solve(&p, basis, GridSpec { nx: 200, nt: 400 }, &quad, Conventions::default(), DEFAULT_COMP_TOL).unwrap();
    let e = sup_error(&sp, &exact, 0.0);
    let coarse = fd_solve_nodelay(&p, &FdConfig::new(100, 200, Scheme::CrankNicolson)).unwrap();
    let fd = fd_solve_nodelay(&p, &FdConfig::new(200, 400, Scheme::CrankNicolson)).unwrap();
    let est = richardson_estimate(&coarse, &fd, 2.0).unwrap();
    let diff = compare_fields(&sp, &fd).unwrap().sup;
    let (fast, s) = within(start, MMS_SECONDS);
    outcome(
        e <= MMS_TOL && diff <= FD_ESTIMATE_FACTOR * est && fast,
        format!(
            "sup err {e:.2e} <= {MMS_TOL:e} at N = {MMS_MODES}; fd diff {diff:.2e} <= {FD_ESTIMATE_FACTOR} x {est:.2e} on 201x401; {s:.2} s"
        ),
    )
}

fn single_mode_delay() -> Outcome {
    let start = Instant::now();
    let k = DelayCoefficients { a1: 1.0, a2: 1.0, b1: 0.0, b2: 0.0, d1: 0.0, d2: 0.0 };
    let p = DelayHeatProblem::new(k, 1.0, PI, 3.0, spec("0"), spec("sin(x)"), spec("0"), spec("0")).unwrap();
    let quad = QuadratureConfig::default();
    let field = solve_delay(&p, EigenBasis::new(PI, 4).unwrap(), DelayGridSpec { nx: 8, nt_per_tau: 40 }, &quad, DEFAULT_PROP_TOL, DEFAULT_COMP_TOL).unwrap();
    // Mode 1 obeys x' = -x(t) - x(t - 1) with unit history.
    let ode = DelayOdeParams::new(-1.0, -1.0, 1.0).unwrap();
    let hist = HistoryFunction::new(spec("1")).unwrap();
    let mut worst = 0.0f64;
    for (it, &t) in field.ts.iter().enumerate().filter(|(_, t)| **t >= 0.0) {
        let x1 = solve_homogeneous(&ode, &hist, t, &quad).unwrap();
        for (ix, &x) in field.xs.iter().enumerate() {
            worst = worst.max((field.at(it, ix) - x1 * x.sin()).abs());
        }
    }
    let mos = MethodOfSteps::new(-1.0, -1.0, 1.0).run(|_| 1.0, |_| 0.0, 3.0);
    let fd_err = |n: usize| {
        let f = fd_solve_delay(&p, &FdConfig::per_tau(n, n, Scheme::CrankNicolson)).unwrap();
        sup_error(&f, |x, t| mos.at(t) * x.sin(), 0.0)
    };
    let (e1, e2) = (fd_err(32), fd_err(64));
    let order = observed_order(e1, e2);
    let (fast, s) = within(start, MODE_SECONDS);
    outcome(
        worst <= MODE_TOL && order >= MIN_FD_ORDER && fast,
        format!("spectral vs delay_ode {worst:.2e} <= {MODE_TOL:e}; fd order {order:.3} >= {MIN_FD_ORDER}; {s:.2} s"),
    )
}

fn delay_problem(psi: &str, g: &str) -> DelayHeatProblem {
    let k = DelayCoefficients { a1: 1.0, a2: 0.7, b1: 0.4, b2: 0.196, d1: 0.3, d2: -0.5 };
    DelayHeatProblem::new(k, 0.5, PI, 1.5, spec(g), spec(psi), spec("0"), spec("0")).unwrap()
}

fn delay_field(p: &DelayHeatProblem) -> SolutionField {
    solve_delay(p, EigenBasis::new(PI, 32).unwrap(), DelayGridSpec { nx: 64, nt_per_tau: 16 }, &QuadratureConfig::default(), DEFAULT_PROP_TOL, DEFAULT_COMP_TOL).unwrap()
}

fn uniqueness() -> Outcome {
    let p = delay_problem("sin(x)*(1 + t) + 0.3*sin(2*x)", "x*(pi - x)*cos(t)");
    let w = delay_field(&p).difference(&delay_field(&p)).unwrap();
    let sup = w.sup_norm();
    let params = delay_params_for(&p).unwrap();
    let report = energy_trace(&w, Some(p.tau), params.omega).unwrap();
    let e_max = report.energy.iter().fold(0.0f64, |m, e| m.max(*e));
    let check = gronwall_check(&report, params.c_theory, SOLVER_TOL).unwrap();
    outcome(
        sup <= UNIQUENESS_TOL && e_max <= NOISE_ENERGY && check.pass,
        format!("sup diff {sup:.2e} <= {UNIQUENESS_TOL:e}; max E {e_max:.2e} <= {NOISE_ENERGY:e}; gronwall {}", check.pass),
    )
}

fn gronwall() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let heat = |c: f64, g: &str, psi: &str| {
        HeatProblem::new(0.8, 1.2, c, PI, 1.5, spec(g), spec(psi), spec("0"), spec("0")).unwrap()
    };
    let heat_field = |p: &HeatProblem| {
        solve(p, EigenBasis::new(PI, 32).unwrap(), GridSpec { nx: 64, nt: 48 }, &QuadratureConfig::default(), Conventions::default(), DEFAULT_COMP_TOL).unwrap()
    };
    for (label, g, c) in [("heat homogeneous", "0", 0.4), ("heat perturbed", "x*sin(t)", 1.5)] {
        let p = heat(c, g, "sin(x)");
        let q = heat(c, g, "sin(x) + 0.5*x*(pi - x)");
        let w = heat_field(&q).difference(&heat_field(&p)).unwrap();
        let params = nodelay_params_for(&p).unwrap();
        let chk = gronwall_check(&energy_trace(&w, None, 0.0).unwrap(), params.c_theory, SOLVER_TOL).unwrap();
        pass &= chk.pass;
        lines.push(format!("{label} margin {:.2e}", chk.worst_margin));
    }
    for (label, g) in [("delay homogeneous", "0"), ("delay perturbed", "x*(pi - x)*cos(t)")] {
        let p = delay_problem("sin(x)*(1 + t)", g);
        let q = delay_problem("sin(x)*(1 + t) + 0.2*sin(3*x)*cos(t)", g);
        let w = delay_field(&q).difference(&delay_field(&p)).unwrap();
        let params = delay_params_for(&p).unwrap();
        let chk = gronwall_check(&energy_trace(&w, Some(p.tau), params.omega).unwrap(), params.c_theory, SOLVER_TOL).unwrap();
        pass &= chk.pass;
        lines.push(format!("{label} margin {:.2e}", chk.worst_margin));
    }
    outcome(pass, lines.join("; "))
}

fn decay_rate() -> Outcome {
    let quad = QuadratureConfig::default();
    let c = sine_coefficients(&spec("x*(1 - x)"), &EigenBasis::new(1.0, 63).unwrap(), &quad).unwrap();
    let coeff_err = (1..=63)
        .map(|n| {
            let exact = if n % 2 == 1 { 8.0 / (PI.powi(3) * (n as f64).powi(3)) } else { 0.0 };
            (c.get(n) - exact).abs()
        })
        .fold(0.0, f64::max);
    let slope = decay_fit(&c).unwrap().slope;
    let modes = |psi: &str, l: f64| {
        let k = DelayCoefficients { a1: 1.0, a2: 0.5, b1: 0.0, b2: 0.0, d1: 0.0, d2: 0.0 };
        let p = DelayHeatProblem::new(k, 1.0, l, 1.0, spec("0"), spec(psi), spec("0"), spec("0")).unwrap();
        let rp = reduce_delay(&p, DEFAULT_PROP_TOL, DEFAULT_COMP_TOL).unwrap();
        ModeSystem::build(&rp, EigenBasis::new(l, 64).unwrap(), &quad).unwrap()
    };
    let parabola = check_decay_conditions(&modes("x*(1 - x)*(2 + t)", 1.0), 1, DEFAULT_DELTA, DEFAULT_FIT_SLACK).unwrap();
    let trig = check_decay_conditions(&modes("sin(x)*cos(t)", PI), 1, DEFAULT_DELTA, DEFAULT_FIT_SLACK).unwrap();
    let parabola_fails = parabola.decay_results[0].status == CheckStatus::Fail;
    let trig_passes = trig.decay_results.iter().all(|d| d.status == CheckStatus::Pass);
    outcome(
        coeff_err <= COEFF_TOL && (slope - 3.0).abs() <= SLOPE_TOL && parabola_fails && trig_passes,
        format!(
            "coeff err {coeff_err:.2e} <= {COEFF_TOL:e}; slope {slope:.3} = 3 +- {SLOPE_TOL}; parabola fails m = 1: {parabola_fails}; trig passes: {trig_passes}"
        ),
    )
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let (csv, json) = (dir.path().join(format!("{tag}.csv")), dir.path().join(format!("{tag}.json")));
        let status = Command::new(env!("CARGO_BIN_EXE_retard-heat"))
            .arg("compare")
            .arg("--config")
            .arg(fixture("manufactured_delay.toml"))
            .arg("--out-field")
            .arg(&csv)
            .arg("--out-report")
            .arg(&json)
            .stderr(Stdio::null())
            .status()
            .unwrap();
        (status.success(), std::fs::read(csv).unwrap_or_default(), std::fs::read(json).unwrap_or_default())
    };
    let (ok1, csv1, json1) = run("first");
    let (ok2, csv2, json2) = run("second");
    let same = ok1 && ok2 && !csv1.is_empty() && csv1 == csv2 && json1 == json2;
    outcome(same, format!("csv {} bytes, json {} bytes, identical: {same}", csv1.len(), json1.len()))
}

fn convergence_sweep() -> Outcome {
    let mut cfg = RunConfig::load(&fixture("smooth_delay.toml")).unwrap();
    cfg.outputs = Default::default();
    let out = sweep(&cfg).unwrap();
    let sups: Vec<f64> = out.rows.iter().filter(|r| r.kind == "spectral").map(|r| r.sup).collect();
    let monotone = sups.windows(2).all(|w| w[1] <= (1.0 + NOISE_BAND) * w[0]);
    // Accuracy of the reference: two successive extrapolations compared on
    // the coarsest oracle grid.
    let cfg_problem = match cfg.problem.build().unwrap() {
        retard_heat_cli::config::Problem::Delay(p) => p,
        _ => unreachable!("fixture is a delay problem"),
    };
    let levels: Vec<SolutionField> = (0..3)
        .scan(cfg.fd, |c, _| {
            let f = fd_solve_delay(&cfg_problem, c).unwrap();
            *c = c.refined();
            Some(f)
        })
        .collect();
    let ex1 = richardson_extrapolate(&levels[0], &levels[1], 2.0).unwrap();
    let ex2 = richardson_extrapolate(&levels[1], &levels[2], 2.0).unwrap();
    let ref_err = compare_fields(&ex1, &ex2).unwrap().sup;
    let finer = ref_err < sups[0];
    let table = sups.iter().map(|s| format!("{s:.2e}")).collect::<Vec<_>>().join(" ");
    outcome(
        monotone && finer,
        format!("sup diffs N=8..64: {table}; non-increasing within {NOISE_BAND}: {monotone}; reference err {ref_err:.2e} < N=8 diff: {finer}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("delayed exponential derivative", delayed_exponential),
        ("delay ODE vs method of steps", delay_ode_matrix),
        ("analytic one-mode heat fixture", analytic_fixture),
        ("manufactured heat solution with drift and reaction", manufactured_nodelay),
        ("single-mode delay cross-check", single_mode_delay),
        ("uniqueness as a property", uniqueness),
        ("gronwall bound", gronwall),
        ("decay rate fixture", decay_rate),
        ("compare determinism", determinism),
        ("convergence sweep", convergence_sweep),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
