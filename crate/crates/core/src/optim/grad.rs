//! Gradient baselines: projected L-BFGS and Polak–Ribière CG with box
//! clipping. Both maximize the fitness by minimizing its negative in
//! normalized `[0, 1]^4` coordinates, with finite-difference gradients.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{GenerationStats, Individual, OptResult};
use crate::error::{Error, Result};
use crate::geometry::{DeformationParams, ParameterBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradMethod {
    /// Nonlinear conjugate gradient, clipped to the box after each step.
    Cg,
    /// Bound-constrained limited-memory quasi-Newton.
    Lbfgsb,
}

impl GradMethod {
    pub fn name(self) -> &'static str {
        match self {
            GradMethod::Cg => "cg",
            GradMethod::Lbfgsb => "lbfgsb",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "cg" => Ok(GradMethod::Cg),
            "lbfgsb" | "l-bfgs-b" => Ok(GradMethod::Lbfgsb),
            other => Err(Error::InvalidParameter(format!(
                "unknown gradient method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradConfig {
    pub method: GradMethod,
    /// Finite-difference step in normalized coordinates.
    pub fd_step: f64,
    /// Stop when the projected gradient's max norm falls below this.
    pub gtol: f64,
    /// Stop when the relative decrease of the objective falls below this.
    pub ftol: f64,
    pub max_iters: usize,
    /// Stored correction pairs for the quasi-Newton method.
    pub memory: usize,
}

impl Default for GradConfig {
    fn default() -> Self {
        Self {
            method: GradMethod::Lbfgsb,
            fd_step: 1e-3,
            gtol: 1e-6,
            ftol: 1e-12,
            max_iters: 100,
            memory: 10,
        }
    }
}

impl GradConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0 && self.fd_step < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "fd_step must lie in (0, 0.5), got {}",
                self.fd_step
            )));
        }
        if !(self.gtol >= 0.0 && self.ftol >= 0.0) || self.memory == 0 {
            return Err(Error::InvalidParameter(
                "need gtol, ftol ≥ 0 and memory ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

type Vec4 = [f64; 4];

fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(z: &Vec4) -> Vec4 {
    z.map(|v| v.clamp(0.0, 1.0))
}

fn max_abs(a: &Vec4) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Objective `−fitness` in normalized coordinates with call counting.
struct Objective<'a, F> {
    fitness: &'a F,
    bounds: &'a ParameterBox,
    calls: AtomicUsize,
    grads: usize,
}

impl<F> Objective<'_, F>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    fn point(&self, z: &Vec4) -> DeformationParams {
        self.bounds.clip(&self.bounds.denormalize(z))
    }

    fn value(&self, z: &Vec4) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(-(self.fitness)(&self.point(z))?)
    }

    /// Non-finite values become +∞ so line searches reject them.
    fn trial(&self, z: &Vec4) -> Result<f64> {
        let v = self.value(z)?;
        Ok(if v.is_finite() { v } else { f64::INFINITY })
    }

    fn gradient(&mut self, z: &Vec4, f0: f64, h: f64) -> Result<Vec4> {
        self.grads += 1;
        let probes: Vec<(usize, f64)> = (0..4).flat_map(|k| [(k, h), (k, -h)]).collect();
        let shifted = |k: usize, d: f64| {
            let mut p = *z;
            p[k] += d;
            p
        };
        // Central where both probes stay in the box, else one-sided.
        let needed: Vec<(usize, f64)> = probes
            .into_iter()
            .filter(|&(k, d)| (0.0..=1.0).contains(&(z[k] + d)))
            .collect();
        let values: Vec<f64> = needed
            .par_iter()
            .map(|&(k, d)| self.value(&shifted(k, d)))
            .collect::<Result<_>>()?;
        let mut g = [0.0; 4];
        for (k, gk) in g.iter_mut().enumerate() {
            let find = |d: f64| needed.iter().position(|&p| p == (k, d)).map(|i| values[i]);
            *gk = match (find(h), find(-h)) {
                (Some(p), Some(m)) => (p - m) / (2.0 * h),
                (Some(p), None) => (p - f0) / h,
                (None, Some(m)) => (f0 - m) / h,
                (None, None) => 0.0,
            };
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite finite-difference gradient at {}",
                self.point(z)
            )));
        }
        Ok(g)
    }
}

/// Central finite-difference gradient of `fitness` with respect to the
/// normalized coordinates, one-sided where a probe would leave the box.
pub fn fd_gradient<F>(
    fitness: &F,
    bounds: &ParameterBox,
    mu: &DeformationParams,
    step: f64,
) -> Result<[f64; 4]>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    let mut obj = Objective {
        fitness,
        bounds,
        calls: AtomicUsize::new(0),
        grads: 0,
    };
    let z = project(&bounds.normalize(mu));
    let f0 = obj.value(&z)?;
    Ok(obj.gradient(&z, f0, step)?.map(|g| -g))
}

/// Zero where a bound is active and the descent direction points outward.
fn projected_gradient(z: &Vec4, g: &Vec4) -> Vec4 {
    std::array::from_fn(|i| project(&std::array::from_fn(|j| z[j] - g[j]))[i] - z[i])
}

fn free_mask(z: &Vec4, g: &Vec4) -> [bool; 4] {
    std::array::from_fn(|i| !((z[i] <= 0.0 && g[i] > 0.0) || (z[i] >= 1.0 && g[i] < 0.0)))
}

struct LineResult {
    z: Vec4,
    f: f64,
}

/// Backtracking along the projected path with an Armijo condition.
fn projected_armijo<F>(
    obj: &Objective<F>,
    z: &Vec4,
    f: f64,
    g: &Vec4,
    d: &Vec4,
    alpha0: f64,
) -> Result<Option<LineResult>>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    let mut alpha = alpha0;
    for _ in 0..40 {
        let zt = project(&std::array::from_fn(|i| z[i] + alpha * d[i]));
        let step: Vec4 = std::array::from_fn(|i| zt[i] - z[i]);
        if max_abs(&step) == 0.0 {
            return Ok(None);
        }
        let ft = obj.trial(&zt)?;
        if ft <= f + 1e-4 * dot(g, &step) {
            return Ok(Some(LineResult { z: zt, f: ft }));
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Expands then brackets the minimum along the clipped ray and refines it
/// with one parabolic step.
fn bracketing_search<F>(
    obj: &Objective<F>,
    z: &Vec4,
    f: f64,
    d: &Vec4,
    alpha0: f64,
) -> Result<Option<LineResult>>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    let at = |a: f64| project(&std::array::from_fn(|i| z[i] + a * d[i]));
    let mut a = (0.0, f);
    let mut b = (alpha0, obj.trial(&at(alpha0))?);
    // Shrink until the first trial improves.
    let mut shrinks = 0;
    while b.1 >= f {
        shrinks += 1;
        if shrinks > 40 {
            return Ok(None);
        }
        let c = b;
        b = (0.5 * b.0, obj.trial(&at(0.5 * b.0))?);
        if b.1 < f {
            return parabolic(obj, &at, a, b, c);
        }
    }
    // Expand while still descending; stop once the clipped path saturates.
    loop {
        let ca = 2.0 * b.0;
        if at(ca) == at(b.0) {
            return Ok(Some(LineResult { z: at(b.0), f: b.1 }));
        }
        let c = (ca, obj.trial(&at(ca))?);
        if c.1 >= b.1 {
            return parabolic(obj, &at, a, b, c);
        }
        a = b;
        b = c;
        if b.0 > 1e6 {
            return Ok(Some(LineResult { z: at(b.0), f: b.1 }));
        }
    }
}

fn parabolic<F>(
    obj: &Objective<F>,
    at: &dyn Fn(f64) -> Vec4,
    a: (f64, f64),
    b: (f64, f64),
    c: (f64, f64),
) -> Result<Option<LineResult>>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    let best = LineResult { z: at(b.0), f: b.1 };
    if !c.1.is_finite() {
        return Ok(Some(best));
    }
    let num = (b.0 - a.0).powi(2) * (b.1 - c.1) - (b.0 - c.0).powi(2) * (b.1 - a.1);
    let den = (b.0 - a.0) * (b.1 - c.1) - (b.0 - c.0) * (b.1 - a.1);
    if den.abs() < f64::MIN_POSITIVE {
        return Ok(Some(best));
    }
    let x = b.0 - 0.5 * num / den;
    if !(x > a.0 && x < c.0) || x == b.0 {
        return Ok(Some(best));
    }
    let fx = obj.trial(&at(x))?;
    Ok(Some(if fx < b.1 {
        LineResult { z: at(x), f: fx }
    } else {
        best
    }))
}

/// Two-loop recursion over the free variables only.
fn lbfgs_direction(g: &Vec4, free: &[bool; 4], pairs: &VecDeque<(Vec4, Vec4)>) -> Vec4 {
    let mask = |v: &Vec4| -> Vec4 { std::array::from_fn(|i| if free[i] { v[i] } else { 0.0 }) };
    let mut q = mask(g);
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y) in pairs.iter().rev() {
        let (s, y) = (mask(s), mask(y));
        let sy = dot(&s, &y);
        if sy <= 1e-300 {
            alphas.push(None);
            continue;
        }
        let a = dot(&s, &q) / sy;
        for i in 0..4 {
            q[i] -= a * y[i];
        }
        alphas.push(Some((a, sy)));
    }
    let gamma = pairs
        .back()
        .map(|(s, y)| {
            let (s, y) = (mask(s), mask(y));
            let yy = dot(&y, &y);
            if yy > 0.0 && dot(&s, &y) > 0.0 {
                dot(&s, &y) / yy
            } else {
                1.0
            }
        })
        .unwrap_or(1.0);
    let mut r = q.map(|v| gamma * v);
    for ((s, y), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        if let Some((a, sy)) = a {
            let (s, y) = (mask(s), mask(y));
            let b = dot(&y, &r) / sy;
            for i in 0..4 {
                r[i] += s[i] * (a - b);
            }
        }
    }
    mask(&r.map(|v| -v))
}

/// Maximizes `fitness` from `x0`. A start whose projected gradient is
/// already below `gtol` is returned unchanged.
pub fn grad_optimize<F>(
    config: &GradConfig,
    bounds: &ParameterBox,
    fitness: &F,
    x0: &DeformationParams,
) -> Result<OptResult>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    config.validate()?;
    bounds.check(x0)?;
    let mut obj = Objective {
        fitness,
        bounds,
        calls: AtomicUsize::new(0),
        grads: 0,
    };
    let mut z = project(&bounds.normalize(x0));
    obj.calls.fetch_add(1, Ordering::Relaxed);
    let f0 = -fitness(x0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidStart(format!(
            "fitness is not finite at {x0}"
        )));
    }
    let initial = Individual {
        genes: *x0,
        fitness: -f0,
    };
    let record = |it: usize, f: f64| GenerationStats {
        generation: it,
        best_fitness: -f,
        mean_fitness: -f,
    };
    let mut f = f0;
    let mut g = obj.gradient(&z, f, config.fd_step)?;
    let mut history = vec![record(0, f)];
    let mut pairs: VecDeque<(Vec4, Vec4)> = VecDeque::new();
    let mut d_prev: Option<(Vec4, Vec4)> = None;
    let mut moved = false;
    let mut iterations = 0;
    let message = loop {
        if max_abs(&projected_gradient(&z, &g)) < config.gtol {
            break "projected gradient below tolerance";
        }
        if iterations == config.max_iters {
            break "iteration limit reached";
        }
        let free = free_mask(&z, &g);
        let masked_g: Vec4 = std::array::from_fn(|i| if free[i] { g[i] } else { 0.0 });
        let step = match config.method {
            GradMethod::Lbfgsb => {
                let mut d = lbfgs_direction(&g, &free, &pairs);
                if dot(&d, &masked_g) >= 0.0 {
                    d = masked_g.map(|v| -v);
                    pairs.clear();
                }
                let alpha0 = if pairs.is_empty() {
                    (0.1 / max_abs(&d)).min(1.0)
                } else {
                    1.0
                };
                projected_armijo(&obj, &z, f, &g, &d, alpha0)?
            }
            GradMethod::Cg => {
                let mut d = masked_g.map(|v| -v);
                if let Some((g_old, d_old)) = &d_prev {
                    let beta =
                        (dot(&masked_g, &masked_g) - dot(&masked_g, g_old)) / dot(g_old, g_old);
                    let beta = if beta.is_finite() { beta.max(0.0) } else { 0.0 };
                    let cand: Vec4 =
                        std::array::from_fn(|i| if free[i] { d[i] + beta * d_old[i] } else { 0.0 });
                    if dot(&cand, &masked_g) < 0.0 {
                        d = cand;
                    }
                }
                d_prev = Some((masked_g, d));
                bracketing_search(&obj, &z, f, &d, 0.1 / max_abs(&d))?
            }
        };
        let Some(LineResult { z: z_new, f: f_new }) = step else {
            break "line search found no decrease";
        };
        iterations += 1;
        moved = true;
        let g_new = obj.gradient(&z_new, f_new, config.fd_step)?;
        let s: Vec4 = std::array::from_fn(|i| z_new[i] - z[i]);
        let y: Vec4 = std::array::from_fn(|i| g_new[i] - g[i]);
        if dot(&s, &y) > 1e-12 * dot(&y, &y).max(1e-300) {
            pairs.push_back((s, y));
            if pairs.len() > config.memory {
                pairs.pop_front();
            }
        }
        let decrease = f - f_new;
        z = z_new;
        f = f_new;
        g = g_new;
        history.push(record(iterations, f));
        if decrease <= config.ftol * f.abs().max(1.0) {
            break "relative decrease below tolerance";
        }
    };
    let best = if moved {
        Individual {
            genes: obj.point(&z),
            fitness: -f,
        }
    } else {
        initial
    };
    Ok(OptResult {
        best,
        initial,
        history,
        func_evals: obj.calls.load(Ordering::Relaxed),
        grad_evals: obj.grads,
        iterations,
        message: format!("{}: {message}", config.method.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(c: [f64; 4]) -> impl Fn(&DeformationParams) -> Result<f64> + Sync {
        move |mu| {
            Ok(-mu
                .to_array()
                .iter()
                .zip(c)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>())
        }
    }

    #[test]
    fn fd_gradient_of_linear_and_quadratic() {
        let b = ParameterBox::default();
        let lin = |mu: &DeformationParams| Ok(2.0 * mu.pitch - mu.thickness);
        // Exact for linear functions, one-sided at the bounds included.
        for mu in [DeformationParams::IDENTITY, b.corners()[5], b.corners()[10]] {
            let g = fd_gradient(&lin, &b, &mu, 1e-3).unwrap();
            let w = [0.2, 0.4, 0.6, 0.6];
            let want = [2.0 * w[0], 0.0, 0.0, -w[3]];
            for k in 0..4 {
                assert!((g[k] - want[k]).abs() < 1e-9, "{g:?}");
            }
        }
        let c = [1.05, 0.9, 1.1, 1.0];
        let g = fd_gradient(&quadratic(c), &b, &DeformationParams::IDENTITY, 1e-3).unwrap();
        assert!((g[0] - (-2.0 * (1.0 - 1.05) * 0.2)).abs() < 1e-10);
    }

    #[test]
    fn both_methods_converge_on_quadratic() {
        let b = ParameterBox::default();
        let c = [1.03, 0.93, 1.12, 0.86];
        for method in [GradMethod::Lbfgsb, GradMethod::Cg] {
            let cfg = GradConfig {
                method,
                ..GradConfig::default()
            };
            let r = grad_optimize(&cfg, &b, &quadratic(c), &DeformationParams::IDENTITY).unwrap();
            let err = r
                .best
                .genes
                .to_array()
                .iter()
                .zip(c)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(
                err < 1e-6,
                "{method:?}: {err:e} after {} iterations ({})",
                r.iterations,
                r.message
            );
            assert!(r.best.fitness >= r.initial.fitness);
        }
    }

    #[test]
    fn bound_optimum_is_found() {
        let b = ParameterBox::default();
        let c = [0.5, 1.0, 2.0, 1.0];
        let r = grad_optimize(
            &GradConfig::default(),
            &b,
            &quadratic(c),
            &DeformationParams::IDENTITY,
        )
        .unwrap();
        let mu = r.best.genes;
        assert!((mu.pitch - 0.9).abs() < 1e-9 && (mu.chord - 1.3).abs() < 1e-9);
        assert!((mu.camber - 1.0).abs() < 1e-6 && (mu.thickness - 1.0).abs() < 1e-6);
        assert!(b.contains(&mu));
    }

    #[test]
    fn stationary_start_is_returned_unchanged() {
        let b = ParameterBox::default();
        let x0 = DeformationParams::new(1.01, 0.97, 1.1, 0.95);
        let f = quadratic(x0.to_array());
        for method in [GradMethod::Lbfgsb, GradMethod::Cg] {
            let cfg = GradConfig {
                method,
                ..GradConfig::default()
            };
            let r = grad_optimize(&cfg, &b, &f, &x0).unwrap();
            assert_eq!(r.best, r.initial);
            assert_eq!(r.best.genes, x0);
            assert_eq!((r.iterations, r.grad_evals, r.func_evals), (0, 1, 9));
        }
        // A corner where every gradient component points out of the box.
        let corner = b.corners()[6];
        let r = grad_optimize(
            &GradConfig::default(),
            &b,
            &quadratic([0.0, 2.0, 2.0, 0.0]),
            &corner,
        )
        .unwrap();
        assert_eq!(r.best.genes, corner);
    }

    #[test]
    fn counts_match_calls_and_stay_in_box() {
        let b = ParameterBox::default();
        let calls = AtomicUsize::new(0);
        let outside = AtomicUsize::new(0);
        let f = |mu: &DeformationParams| {
            calls.fetch_add(1, Ordering::Relaxed);
            if !b.contains(mu) {
                outside.fetch_add(1, Ordering::Relaxed);
            }
            Ok(-(mu.pitch - 0.95).powi(2)
                - (mu.camber - 1.3).powi(2)
                - 0.1 * (mu.chord * mu.thickness - 1.0).powi(2))
        };
        for method in [GradMethod::Lbfgsb, GradMethod::Cg] {
            calls.store(0, Ordering::Relaxed);
            let cfg = GradConfig {
                method,
                ..GradConfig::default()
            };
            let r = grad_optimize(&cfg, &b, &f, &DeformationParams::IDENTITY).unwrap();
            assert_eq!(r.func_evals, calls.load(Ordering::Relaxed));
            assert!(r.grad_evals >= 1);
            assert!(r.best.fitness >= r.initial.fitness);
            assert_eq!(r.history.len(), r.iterations + 1);
        }
        assert_eq!(outside.load(Ordering::Relaxed), 0);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let b = ParameterBox::default();
        let f = |_: &DeformationParams| Ok(f64::NAN);
        let err = grad_optimize(&GradConfig::default(), &b, &f, &DeformationParams::IDENTITY)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidStart(_)));
        let outside = DeformationParams::new(2.0, 1.0, 1.0, 1.0);
        assert!(grad_optimize(&GradConfig::default(), &b, &quadratic([1.0; 4]), &outside).is_err());
    }
}
