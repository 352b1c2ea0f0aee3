//! Classical minimizers driving the parameter update.
//!
//! All three methods record the best loss seen after every iteration, so the
//! returned trace is non-increasing, and return the best point seen rather
//! than the last iterate.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

use super::objective::fd_gradient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NelderMead,
    Spsa,
    FdGradientDescent,
}

impl Method {
    /// Nelder-Mead up to this many parameters, SPSA above.
    pub const NELDER_MEAD_MAX_PARAMS: usize = 60;

    pub fn auto(num_params: usize, noisy: bool) -> Self {
        if noisy || num_params > Self::NELDER_MEAD_MAX_PARAMS {
            Method::Spsa
        } else {
            Method::NelderMead
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// `None` picks [`Method::auto`].
    pub method: Option<Method>,
    pub max_iters: usize,
    /// Stop when the loss spread (Nelder-Mead) or per-step improvement
    /// (gradient descent) falls below this.
    pub tol_loss: f64,
    pub fd_step: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: None,
            max_iters: 2000,
            tol_loss: 1e-12,
            fd_step: 1e-5,
            restarts: 5,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Argument(format!("fd_step {} must be positive", self.fd_step)));
        }
        if self.restarts == 0 {
            return Err(Error::Argument("restarts must be at least 1".into()));
        }
        if !(self.tol_loss >= 0.0) {
            return Err(Error::Argument(format!("tol_loss {} must be non-negative", self.tol_loss)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TargetReached,
    Converged,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct Minimum<R: Real = f64> {
    pub theta: Vec<R>,
    pub loss: R,
    pub trace: Vec<TracePoint>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// Counts evaluations and rejects non-finite values.
struct Counted<'f, R, F: ?Sized> {
    f: &'f F,
    evaluations: Cell<usize>,
    _r: std::marker::PhantomData<R>,
}

impl<'f, R: Real, F: Fn(&[R]) -> Result<R> + ?Sized> Counted<'f, R, F> {
    fn call(&self, theta: &[R]) -> Result<R> {
        self.evaluations.set(self.evaluations.get() + 1);
        let v = (self.f)(theta)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: to_f64(v),
                theta: theta.iter().map(|&x| to_f64(x)).collect(),
            });
        }
        Ok(v)
    }
}

/// Minimizes `f` from `theta0`. Stops early once the best loss is at or below
/// `target`.
pub fn minimize<R, F>(
    f: &F,
    theta0: &[R],
    method: Method,
    config: &OptimizerConfig,
    target: Option<R>,
) -> Result<Minimum<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + ?Sized,
{
    config.validate()?;
    let counted = Counted {
        f,
        evaluations: Cell::new(0),
        _r: std::marker::PhantomData,
    };
    let mut out = match method {
        Method::NelderMead => nelder_mead(&counted, theta0, config, target)?,
        Method::Spsa => spsa(&counted, theta0, config, target)?,
        Method::FdGradientDescent => gradient_descent(&counted, theta0, config, target)?,
    };
    out.evaluations = counted.evaluations.get();
    Ok(out)
}

fn reached<R: Real>(loss: R, target: Option<R>) -> bool {
    target.is_some_and(|t| loss <= t)
}

/// Initial simplex edge length, in radians.
const SIMPLEX_STEP: f64 = 0.5;

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han).
fn nelder_mead<R, F>(
    f: &Counted<'_, R, F>,
    theta0: &[R],
    config: &OptimizerConfig,
    target: Option<R>,
) -> Result<Minimum<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + ?Sized,
{
    let d = theta0.len();
    let df = d.max(1) as f64;
    let alpha = R::one();
    let beta: R = real(1.0 + 2.0 / df);
    let gamma: R = real((0.75 - 1.0 / (2.0 * df)).max(0.25));
    let delta: R = real((1.0 - 1.0 / df).max(0.5));

    let mut points: Vec<Vec<R>> = vec![theta0.to_vec()];
    for j in 0..d {
        let mut p = theta0.to_vec();
        p[j] += real(SIMPLEX_STEP);
        points.push(p);
    }
    let mut values = points.iter().map(|p| f.call(p)).collect::<Result<Vec<R>>>()?;

    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    let tol: R = real(config.tol_loss);
    let mut order: Vec<usize> = (0..=d).collect();

    for iter in 0..config.max_iters {
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let (best, worst, second) = (order[0], order[d], order[d.saturating_sub(1)]);
        if reached(values[best], target) {
            stop = StopReason::TargetReached;
            break;
        }
        if d == 0 || values[worst] - values[best] <= tol {
            stop = StopReason::Converged;
            break;
        }
        iterations = iter + 1;

        let mut centroid = vec![R::zero(); d];
        for &i in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&points[i]) {
                *c += *x;
            }
        }
        let inv = R::one() / real(df);
        centroid.iter_mut().for_each(|c| *c *= inv);

        let along = |scale: R, from: &[R]| -> Vec<R> {
            centroid
                .iter()
                .zip(from)
                .map(|(&c, &x)| c + scale * (c - x))
                .collect()
        };

        let reflected = along(alpha, &points[worst]);
        let fr = f.call(&reflected)?;
        if fr < values[best] {
            let expanded = along(alpha * beta, &points[worst]);
            let fe = f.call(&expanded)?;
            if fe < fr {
                points[worst] = expanded;
                values[worst] = fe;
            } else {
                points[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second] {
            points[worst] = reflected;
            values[worst] = fr;
        } else {
            let (contracted, fc_bound) = if fr < values[worst] {
                (along(alpha * gamma, &points[worst]), fr)
            } else {
                (along(-gamma, &points[worst]), values[worst])
            };
            let fc = f.call(&contracted)?;
            if fc < fc_bound {
                points[worst] = contracted;
                values[worst] = fc;
            } else {
                let anchor = points[best].clone();
                for &i in &order[1..] {
                    for (x, a) in points[i].iter_mut().zip(&anchor) {
                        *x = *a + delta * (*x - *a);
                    }
                    values[i] = f.call(&points[i])?;
                }
            }
        }
        let best_now = values.iter().copied().fold(values[0], |a, b| a.min(b));
        trace.push(TracePoint {
            iter: iter + 1,
            loss: to_f64(best_now),
        });
    }

    let best = (0..=d)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    Ok(Minimum {
        theta: points[best].clone(),
        loss: values[best],
        trace,
        iterations,
        evaluations: 0,
        stop,
    })
}

/// Simultaneous-perturbation stochastic approximation with the standard
/// gain schedules `a / (k + 1 + A)^0.602` and `c / (k + 1)^0.101`. The step
/// gain `a` is calibrated from a few gradient estimates at the start point
/// so the first update moves each coordinate by about 0.2 rad.
fn spsa<R, F>(
    f: &Counted<'_, R, F>,
    theta0: &[R],
    config: &OptimizerConfig,
    target: Option<R>,
) -> Result<Minimum<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + ?Sized,
{
    const ALPHA: f64 = 0.602;
    const GAMMA: f64 = 0.101;
    const C0: f64 = 0.1;
    const FIRST_STEP: f64 = 0.2;
    const CALIBRATION_SAMPLES: usize = 25;

    let d = theta0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let stability = 0.1 * config.max_iters as f64;

    let mut theta = theta0.to_vec();
    let perturb = |theta: &[R], ck: f64, rng: &mut ChaCha8Rng| -> Result<Vec<f64>> {
        let delta: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<R> = theta.iter().zip(&delta).map(|(&x, &s)| x + real::<R>(ck * s)).collect();
        let minus: Vec<R> = theta.iter().zip(&delta).map(|(&x, &s)| x - real::<R>(ck * s)).collect();
        let diff = to_f64(f.call(&plus)? - f.call(&minus)?);
        Ok(delta.iter().map(|&s| diff / (2.0 * ck * s)).collect())
    };

    let mut mean_abs = 0.0;
    for _ in 0..CALIBRATION_SAMPLES {
        let g = perturb(&theta, C0, &mut rng)?;
        mean_abs += g.iter().map(|x| x.abs()).sum::<f64>() / (d.max(1) * CALIBRATION_SAMPLES) as f64;
    }
    let a = if mean_abs > 0.0 {
        FIRST_STEP * (stability + 1.0).powf(ALPHA) / mean_abs
    } else {
        FIRST_STEP
    };

    let mut best_theta = theta.clone();
    let mut best = f.call(&theta)?;
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    for k in 0..config.max_iters {
        if reached(best, target) {
            stop = StopReason::TargetReached;
            break;
        }
        iterations = k + 1;
        let ak = a / (k as f64 + 1.0 + stability).powf(ALPHA);
        let ck = C0 / (k as f64 + 1.0).powf(GAMMA);
        let g = perturb(&theta, ck, &mut rng)?;
        for (x, gi) in theta.iter_mut().zip(&g) {
            *x -= real::<R>(ak * gi);
        }
        let value = f.call(&theta)?;
        if value < best {
            best = value;
            best_theta.clone_from(&theta);
        }
        trace.push(TracePoint {
            iter: k + 1,
            loss: to_f64(best),
        });
    }
    Ok(Minimum {
        theta: best_theta,
        loss: best,
        trace,
        iterations,
        evaluations: 0,
        stop,
    })
}

/// Descent on central finite-difference gradients with an Armijo
/// backtracking line search. Directions are preconditioned by a BFGS
/// inverse-Hessian estimate built from successive gradients, which falls
/// back to steepest descent whenever the estimate stops giving a descent
/// direction.
fn gradient_descent<R, F>(
    f: &Counted<'_, R, F>,
    theta0: &[R],
    config: &OptimizerConfig,
    target: Option<R>,
) -> Result<Minimum<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + ?Sized,
{
    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 40;

    let d = theta0.len();
    let h: R = real(config.fd_step);
    let gradient = |t: &[R]| -> Result<DVector<f64>> {
        let g = fd_gradient(&|t: &[R]| f.call(t), t, h)?;
        Ok(DVector::from_iterator(d, g.into_iter().map(to_f64)))
    };

    let mut theta = theta0.to_vec();
    let mut value = f.call(&theta)?;
    let mut grad = gradient(&theta)?;
    let mut inv_hessian = DMatrix::<f64>::identity(d, d);
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;

    for iter in 0..config.max_iters {
        if reached(value, target) {
            stop = StopReason::TargetReached;
            break;
        }
        if grad.norm_squared() == 0.0 {
            stop = StopReason::Converged;
            break;
        }
        iterations = iter + 1;
        let mut dir = -(&inv_hessian * &grad);
        let mut slope = grad.dot(&dir);
        if !(slope < 0.0) {
            inv_hessian.fill_with_identity();
            dir = -grad.clone();
            slope = -grad.norm_squared();
        }
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<R> = theta
                .iter()
                .zip(dir.iter())
                .map(|(&x, &p)| x + real::<R>(step * p))
                .collect();
            let fv = f.call(&trial)?;
            if to_f64(fv) <= to_f64(value) + ARMIJO * step * slope {
                accepted = Some((trial, fv));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, fv)) = accepted else {
            stop = StopReason::Converged;
            break;
        };
        let improvement = to_f64(value - fv);
        let next_grad = gradient(&trial)?;
        let s = &dir * step;
        let y = &next_grad - &grad;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
            if iter == 0 {
                inv_hessian *= sy / y.norm_squared();
            }
            let hy = &inv_hessian * &y;
            let yhy = y.dot(&hy);
            inv_hessian += (&s * s.transpose()) * ((sy + yhy) / (sy * sy))
                - (&hy * s.transpose() + &s * hy.transpose()) / sy;
        }
        theta = trial;
        value = fv;
        grad = next_grad;
        trace.push(TracePoint {
            iter: iter + 1,
            loss: to_f64(value),
        });
        if improvement <= config.tol_loss {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(Minimum {
        theta,
        loss: value,
        trace,
        iterations,
        evaluations: 0,
        stop,
    })
}
