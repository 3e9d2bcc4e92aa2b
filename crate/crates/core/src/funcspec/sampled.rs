//! Gridded data with linear or not-a-knot cubic interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    Linear,
    Cubic,
}

impl Interp {
    /// Highest derivative order available along one axis.
    pub fn max_order(self) -> u8 {
        match self {
            Interp::Linear => 1,
            Interp::Cubic => 2,
        }
    }
}

/// One-dimensional interpolant through `(knots[i], values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interp1d {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots; empty for linear interpolation.
    curvature: Vec<f64>,
}

impl Interp1d {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        check_axis("knots", &knots)?;
        if values.len() != knots.len() {
            return Err(Error::Input(format!(
                "{} values for {} knots",
                values.len(),
                knots.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite sample {v}")));
        }
        let curvature = match interp {
            Interp::Linear => Vec::new(),
            Interp::Cubic => not_a_knot_curvature(&knots, &values)?,
        };
        Ok(Self {
            knots,
            values,
            curvature,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, x: f64, order: u8) -> Result<f64> {
        let n = self.knots.len();
        let (lo, hi) = (self.knots[0], self.knots[n - 1]);
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::Domain(format!(
                "sample point {x} outside data range [{lo}, {hi}]"
            )));
        }
        let x = x.clamp(lo, hi);
        let i = self.knots.partition_point(|k| *k <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        if self.curvature.is_empty() {
            return match order {
                0 => Ok(y0 + (y1 - y0) * (x - x0) / h),
                1 => Ok((y1 - y0) / h),
                _ => Err(unsupported(order)),
            };
        }
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        match order {
            0 => Ok(a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0),
            1 => Ok((y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                + (3.0 * b * b - 1.0) / 6.0 * h * m1),
            2 => Ok(a * m0 + b * m1),
            _ => Err(unsupported(order)),
        }
    }
}

fn unsupported(order: u8) -> Error {
    Error::Unsupported(format!("derivative of order {order} of interpolated samples"))
}

fn check_axis(name: &str, knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::Input(format!("{name}: need at least two samples")));
    }
    if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!("{name}: must be finite and strictly increasing")));
    }
    Ok(())
}

/// Knot second derivatives of the not-a-knot cubic spline.
fn not_a_knot_curvature(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    match n {
        2 => return Ok(vec![0.0; 2]),
        3 => {
            // A single parabola through three points.
            let m = 2.0 * (d[1] - d[0]) / (x[2] - x[0]);
            return Ok(vec![m; 3]);
        }
        _ => {}
    }
    // Unknowns M_1 .. M_{n-2}; M_0 and M_{n-1} eliminated by continuity of
    // the third derivative at x_1 and x_{n-2}.
    let k = n - 2;
    let mut lower = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        lower[j] = h[i - 1];
        diag[j] = 2.0 * (h[i - 1] + h[i]);
        upper[j] = h[i];
        rhs[j] = 6.0 * (d[i] - d[i - 1]);
    }
    let (h0, h1) = (h[0], h[1]);
    diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
    upper[0] = (h1 * h1 - h0 * h0) / h1;
    let (a, b) = (h[n - 3], h[n - 2]);
    lower[k - 1] = (a * a - b * b) / a;
    diag[k - 1] = (a + b) * (2.0 * a + b) / a;
    let mut scratch = vec![0.0; k];
    tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch)?;
    let mut m = Vec::with_capacity(n);
    m.push(((h0 + h1) * rhs[0] - h0 * rhs[1]) / h1);
    m.extend_from_slice(&rhs);
    m.push(((a + b) * rhs[k - 1] - b * rhs[k - 2]) / a);
    Ok(m)
}

/// Samples on a rectangular grid over `x`, `t`, or both.
///
/// With both axes, `values` is stored time-major: `values[it * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    xs: Option<Vec<f64>>,
    ts: Option<Vec<f64>>,
    interp: Interp,
    /// One interpolant along `x` per time row, or a single interpolant along
    /// whichever axis is present.
    rows: Vec<Interp1d>,
}

impl SampledFn {
    pub fn along_x(xs: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        let row = Interp1d::new(xs.clone(), values, interp)?;
        Ok(Self {
            xs: Some(xs),
            ts: None,
            interp,
            rows: vec![row],
        })
    }

    pub fn along_t(ts: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        let row = Interp1d::new(ts.clone(), values, interp)?;
        Ok(Self {
            xs: None,
            ts: Some(ts),
            interp,
            rows: vec![row],
        })
    }

    pub fn grid(xs: Vec<f64>, ts: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        check_axis("t", &ts)?;
        let nx = xs.len();
        if values.len() != nx * ts.len() {
            return Err(Error::Input(format!(
                "grid of {}x{} needs {} values, got {}",
                nx,
                ts.len(),
                nx * ts.len(),
                values.len()
            )));
        }
        let rows = values
            .chunks(nx.max(1))
            .map(|row| Interp1d::new(xs.clone(), row.to_vec(), interp))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            xs: Some(xs),
            ts: Some(ts),
            interp,
            rows,
        })
    }

    pub fn has_x(&self) -> bool {
        self.xs.is_some()
    }

    pub fn has_t(&self) -> bool {
        self.ts.is_some()
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        self.xs.as_ref().map(|k| (k[0], k[k.len() - 1]))
    }

    pub fn t_range(&self) -> Option<(f64, f64)> {
        self.ts.as_ref().map(|k| (k[0], k[k.len() - 1]))
    }

    pub fn check_order(&self, dx: u8, dt: u8) -> Result<()> {
        let max = self.interp.max_order();
        if dx > max || dt > max {
            return Err(Error::Unsupported(format!(
                "{:?} samples support derivatives up to order {max} per axis",
                self.interp
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, t: f64, dx: u8, dt: u8) -> Result<f64> {
        self.check_order(dx, dt)?;
        match (&self.xs, &self.ts) {
            (Some(_), None) => {
                if dt > 0 {
                    return Ok(0.0);
                }
                self.rows[0].eval(x, dx)
            }
            (None, Some(_)) => {
                if dx > 0 {
                    return Ok(0.0);
                }
                self.rows[0].eval(t, dt)
            }
            (Some(_), Some(ts)) => {
                let column = self
                    .rows
                    .iter()
                    .map(|row| row.eval(x, dx))
                    .collect::<Result<Vec<_>>>()?;
                Interp1d::new(ts.clone(), column, self.interp)?.eval(t, dt)
            }
            (None, None) => unreachable!("sampled data always has an axis"),
        }
    }
}
