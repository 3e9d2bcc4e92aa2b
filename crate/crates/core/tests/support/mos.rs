//! Method-of-steps reference integrator for `x' = a x + b x(t - tau) + rho(t)`.
//!
//! Classical RK4 on a grid that divides `tau`, with cubic Hermite dense
//! output for the delayed argument inside each step.

pub struct MethodOfSteps {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub steps_per_tau: usize,
}

pub struct Trajectory {
    h: f64,
    xs: Vec<f64>,
    ds: Vec<f64>,
}

impl Trajectory {
    /// Value at `t >= 0` by Hermite interpolation between steps.
    pub fn at(&self, t: f64) -> f64 {
        hermite(&self.xs, &self.ds, self.h, t)
    }
}

fn hermite(xs: &[f64], ds: &[f64], h: f64, t: f64) -> f64 {
    let pos = t / h;
    let i = (pos.floor() as usize).min(xs.len() - 2);
    let u = pos - i as f64;
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
        u * (1.0 - u) * (1.0 - u),
        u * u * (3.0 - 2.0 * u),
        u * u * (u - 1.0),
    );
    h00 * xs[i] + h10 * h * ds[i] + h01 * xs[i + 1] + h11 * h * ds[i + 1]
}

impl MethodOfSteps {
    pub fn new(a: f64, b: f64, tau: f64) -> Self {
        Self { a, b, tau, steps_per_tau: 1000 }
    }

    pub fn run(
        &self,
        beta: impl Fn(f64) -> f64,
        rho: impl Fn(f64) -> f64,
        t_end: f64,
    ) -> Trajectory {
        let h = self.tau / self.steps_per_tau as f64;
        let n = (t_end / h).ceil() as usize + 1;
        let mut xs = vec![beta(0.0)];
        let mut ds: Vec<f64> = Vec::with_capacity(n + 1);
        let delayed = |xs: &[f64], ds: &[f64], s: f64| {
            if s <= 0.0 {
                beta(s)
            } else {
                hermite(xs, ds, h, s)
            }
        };
        let f = |t: f64, x: f64, xd: f64| self.a * x + self.b * xd + rho(t);
        ds.push(f(0.0, xs[0], beta(-self.tau)));
        for i in 0..n {
            let t = i as f64 * h;
            let x = xs[i];
            let d_mid = delayed(&xs, &ds, t + 0.5 * h - self.tau);
            let d_end = delayed(&xs, &ds, t + h - self.tau);
            let k1 = ds[i];
            let k2 = f(t + 0.5 * h, x + 0.5 * h * k1, d_mid);
            let k3 = f(t + 0.5 * h, x + 0.5 * h * k2, d_mid);
            let k4 = f(t + h, x + h * k3, d_end);
            let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            xs.push(next);
            ds.push(f(t + h, next, d_end));
        }
        Trajectory { h, xs, ds }
    }
}
