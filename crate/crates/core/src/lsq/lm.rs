//! Levenberg–Marquardt with Marquardt diagonal scaling and forward
//! finite-difference Jacobians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Damping beyond which a rejected step counts as a stall.
const MAX_DAMPING: f64 = 1e20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    pub initial_damping: T,
    pub damping_up: T,
    pub damping_down: T,
    pub cost_rel_tol: T,
    pub gradient_inf_tol: T,
    pub fd_rel_step: T,
}

impl<T: Scalar> Default for LmOptions<T> {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            initial_damping: T::lit(1e-3),
            damping_up: T::lit(10.0),
            damping_down: T::lit(10.0),
            cost_rel_tol: T::lit(1e-10),
            gradient_inf_tol: T::lit(1e-12),
            fd_rel_step: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> LmOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        let fields = [
            ("initial_damping", self.initial_damping),
            ("damping_up", self.damping_up),
            ("damping_down", self.damping_down),
            ("cost_rel_tol", self.cost_rel_tol),
            ("gradient_inf_tol", self.gradient_inf_tol),
            ("fd_rel_step", self.fd_rel_step),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(name, v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Accepted step changed the cost by less than `cost_rel_tol` (relative).
    CostTolerance,
    /// Gradient infinity norm fell below `gradient_inf_tol`.
    GradientTolerance,
    MaxIterations,
    /// No step decreased the cost even at maximal damping.
    Stalled,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::CostTolerance | Termination::GradientTolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport<T> {
    pub x: Vec<T>,
    /// `1/2 sum r_i^2` at `x`.
    pub cost: T,
    pub iterations: usize,
    pub termination: Termination,
    /// Cost at the start point followed by the cost after every accepted step.
    pub cost_history: Vec<T>,
    pub residual_count: usize,
}

impl<T: Scalar> LmReport<T> {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }
}

fn half_sq_norm<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v) * T::lit(0.5)
}

/// Evaluates and screens out non-finite residual vectors.
fn eval<T: Scalar, F>(f: &mut F, x: &[T]) -> Option<Vec<T>>
where
    F: FnMut(&[T]) -> Option<Vec<T>>,
{
    f(x).filter(|r| r.iter().all(|v| v.is_finite()))
}

/// Minimizes `1/2 |r(x)|^2`.
///
/// `residuals` may return `None` where the model is undefined; such points
/// are treated as infinitely costly, so the damping rises and the step
/// retreats towards the current point.
pub fn levenberg_marquardt<T, F>(mut residuals: F, x0: &[T], opts: &LmOptions<T>) -> Result<LmReport<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<Vec<T>>,
{
    opts.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut res = eval(&mut residuals, &x).ok_or(Error::NonFiniteResiduals)?;
    let m = res.len();
    let mut cost = half_sq_norm(&res);
    let mut history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;

    let finish = |x: Vec<T>, cost, iterations, termination, history| LmReport {
        x,
        cost,
        iterations,
        termination,
        cost_history: history,
        residual_count: m,
    };

    if cost == T::zero() || n == 0 {
        return Ok(finish(x, cost, 0, Termination::CostTolerance, history));
    }

    while iterations < opts.max_iterations {
        iterations += 1;
        let jac = forward_jacobian(&mut residuals, &x, &res, opts.fd_rel_step);

        // normal equations: J^T J and J^T r
        let mut jtj = vec![T::zero(); n * n];
        let mut grad = vec![T::zero(); n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for a in 0..n {
                grad[a] = grad[a] + row[a] * res[i];
                for b in a..n {
                    jtj[a * n + b] = jtj[a * n + b] + row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }
        let grad_inf = grad.iter().fold(T::zero(), |acc, g| acc.max(g.abs()));
        if grad_inf < opts.gradient_inf_tol {
            return Ok(finish(x, cost, iterations, Termination::GradientTolerance, history));
        }

        let max_diag = (0..n).fold(T::zero(), |acc, a| acc.max(jtj[a * n + a]));
        let floor = (max_diag * T::epsilon()).max(T::min_positive_value());

        loop {
            let mut lhs = jtj.clone();
            for a in 0..n {
                lhs[a * n + a] = lhs[a * n + a] + lambda * jtj[a * n + a].max(floor);
            }
            let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
            let trial = solve_dense(lhs, rhs, n).and_then(|delta| {
                let xt: Vec<T> = x.iter().zip(&delta).map(|(&a, &d)| a + d).collect();
                let rt = eval(&mut residuals, &xt)?;
                Some((xt, rt))
            });
            if let Some((xt, rt)) = trial {
                let ct = half_sq_norm(&rt);
                if ct < cost {
                    let drop = cost - ct;
                    x = xt;
                    res = rt;
                    cost = ct;
                    history.push(cost);
                    lambda = (lambda / opts.damping_down).max(T::min_positive_value());
                    if cost == T::zero() || drop <= opts.cost_rel_tol * (cost + drop) {
                        return Ok(finish(x, cost, iterations, Termination::CostTolerance, history));
                    }
                    break;
                }
            }
            lambda = lambda * opts.damping_up;
            if lambda > T::lit(MAX_DAMPING) {
                return Ok(finish(x, cost, iterations, Termination::Stalled, history));
            }
        }
    }
    Ok(finish(x, cost, iterations, Termination::MaxIterations, history))
}

/// Row-major `m x n` Jacobian by forward differences with step
/// `rel_step * max(|x_j|, 1)`; falls back to a backward difference where the
/// forward point is not evaluable, and to a zero column if neither is.
pub fn forward_jacobian<T, F>(residuals: &mut F, x: &[T], r0: &[T], rel_step: T) -> Vec<T>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<Vec<T>>,
{
    let n = x.len();
    let m = r0.len();
    let mut jac = vec![T::zero(); m * n];
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = rel_step * x[j].abs().max(T::one());
        let mut column = None;
        for step in [h, -h] {
            probe[j] = x[j] + step;
            let actual = probe[j] - x[j];
            if let Some(rp) = eval(residuals, &probe).filter(|rp| rp.len() == m) {
                column = Some((rp, actual));
                break;
            }
        }
        probe[j] = x[j];
        if let Some((rp, actual)) = column {
            for i in 0..m {
                jac[i * n + j] = (rp[i] - r0[i]) / actual;
            }
        }
    }
    jac
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| {
            a[p * n + col]
                .abs()
                .partial_cmp(&a[q * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let pv = a[pivot * n + col];
        if !(pv.abs() > T::min_positive_value()) || !pv.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
