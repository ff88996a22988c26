//! One-dimensional interpolants used to build section profiles and the
//! spanwise loft.

use crate::error::{Error, Result};

fn locate(knots: &[f64], x: f64) -> usize {
    let n = knots.len();
    if x <= knots[0] {
        return 0;
    }
    if x >= knots[n - 1] {
        return n - 2;
    }
    // partition_point returns the first knot strictly greater than x.
    knots
        .partition_point(|&k| k <= x)
        .saturating_sub(1)
        .min(n - 2)
}

fn check_knots(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::InvalidInput(format!(
            "interpolant needs at least {min} knots, got {}",
            x.len()
        )));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "interpolation knots must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes.
///
/// Monotone data stays monotone and non-negative data stays non-negative,
/// which keeps camber lines free of spurious wiggles and thickness
/// distributions from going negative between stations.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        check_knots(x, y, 2)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Value, first and second derivative at `x`. Outside the knot range
    /// the end cubic is extended.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let i = locate(&self.x, x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.d[i] * h, self.d[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let ddv = ((12.0 * t - 6.0) * y0
            + (6.0 * t - 4.0) * m0
            + (-12.0 * t + 6.0) * y1
            + (6.0 * t - 2.0) * m1)
            / (h * h);
        (v, dv, ddv)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_all(x).0
    }
}

// Three-point end slope with the shape-preserving corrections.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || d == 0.0 {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Natural cubic spline basis over a fixed knot vector.
///
/// Because the natural spline is linear in its data, any spline through
/// values `y_k` at the knots is `Σ_k y_k·w_k(x)`; this type evaluates the
/// cardinal functions `w_k` and their derivatives so vector-valued data can
/// be combined without refitting.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalSpline {
    x: Vec<f64>,
    /// `second[k]` holds the knot second derivatives of the k-th cardinal spline.
    second: Vec<Vec<f64>>,
}

impl CardinalSpline {
    pub fn new(x: &[f64]) -> Result<Self> {
        check_knots(x, x, 2)?;
        let n = x.len();
        let second = (0..n)
            .map(|k| {
                let mut y = vec![0.0; n];
                y[k] = 1.0;
                natural_second_derivatives(x, &y)
            })
            .collect();
        Ok(Self {
            x: x.to_vec(),
            second,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    /// Cardinal weights and their first derivatives at `x`.
    pub fn weights(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.x.len();
        let i = locate(&self.x, x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        let mut w = vec![0.0; n];
        let mut dw = vec![0.0; n];
        for k in 0..n {
            let m0 = self.second[k][i];
            let m1 = self.second[k][i + 1];
            let y0 = if k == i { 1.0 } else { 0.0 };
            let y1 = if k == i + 1 { 1.0 } else { 0.0 };
            w[k] = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
            dw[k] = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        }
        (w, dw)
    }

    /// Evaluates the natural spline through `values` at `x`.
    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        let (w, _) = self.weights(x);
        w.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

fn natural_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut lower = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        lower[j] = h0;
        diag[j] = 2.0 * (h0 + h1);
        upper[j] = h1;
        rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for j in 1..k {
        let f = lower[j] / diag[j - 1];
        diag[j] -= f * upper[j - 1];
        rhs[j] -= f * rhs[j - 1];
    }
    let mut sol = vec![0.0; k];
    sol[k - 1] = rhs[k - 1] / diag[k - 1];
    for j in (0..k - 1).rev() {
        sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
    }
    m[1..n - 1].copy_from_slice(&sol);
    m
}
