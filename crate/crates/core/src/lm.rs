//! Damped least squares (Levenberg-Marquardt) with box constraints.
//!
//! Small dense solver sized for the handful-of-parameter fits in this crate
//! (inversion-recovery traces, decay-rate extraction). The caller supplies
//! residuals and an analytic Jacobian.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged when the cost improves by less than `cost_tol` relatively.
    pub cost_tol: f64,
    /// Converged when the scaled step falls below `step_tol`.
    pub step_tol: f64,
    /// Converged after this many consecutive accepted steps that each
    /// improve the cost by less than `stall_tol` relatively (slow crawl
    /// along a bound or a degenerate valley).
    pub stall_iterations: usize,
    pub stall_tol: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            cost_tol: 1e-10,
            step_tol: 1e-10,
            stall_iterations: 8,
            stall_tol: 1e-6,
            lambda_init: 1e-3,
            lambda_up: 8.0,
            lambda_down: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Half the summed squared residuals at the solution.
    pub cost: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    /// Row-major J^T J at the solution, for covariance estimates.
    pub normal_matrix: Vec<f64>,
    /// Column norms of the Jacobian at the solution, for identifiability checks.
    pub jacobian_column_norms: Vec<f64>,
}

impl LmFit {
    /// Parameter covariance sigma^2 (J^T J)^{-1} with
    /// sigma^2 = sum r^2 / (m - n). `None` if the normal matrix is singular.
    pub fn covariance(&self, n_residuals: usize) -> Option<Vec<f64>> {
        let n = self.params.len();
        if n_residuals <= n {
            return None;
        }
        let sigma2 = 2.0 * self.cost / (n_residuals - n) as f64;
        let mut inv = invert(&self.normal_matrix, n)?;
        for v in &mut inv {
            *v *= sigma2;
        }
        Some(inv)
    }
}

/// Minimize `0.5 * ||r(x)||^2` subject to `lower <= x <= upper`.
///
/// `residuals(x, r)` fills the m-vector of residuals; `jacobian(x, j)` fills
/// the row-major m×n matrix dr_i/dx_j.
pub fn fit<R, J>(
    residuals: R,
    jacobian: J,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    n_residuals: usize,
    opts: &LmOptions,
) -> Result<LmFit>
where
    R: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    let m = n_residuals;
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    if m < n {
        return Err(Error::InvalidParam(format!(
            "need at least {n} residuals for {n} parameters, got {m}"
        )));
    }

    let clamp = |x: &mut [f64]| {
        for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
            *xi = xi.clamp(lo, hi);
        }
    };

    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    residuals(&x, &mut r);
    let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    if !cost.is_finite() {
        return Err(Error::InvalidParam(
            "residuals are not finite at the initial guess".into(),
        ));
    }

    let mut lambda = opts.lambda_init;
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    let mut iterations = 0;
    let mut stalled = 0usize;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        jacobian(&x, &mut jac);
        // normal equations
        for a in 0..n {
            jtr[a] = 0.0;
            for b in 0..n {
                jtj[a * n + b] = 0.0;
            }
        }
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for a in 0..n {
                jtr[a] += row[a] * r[i];
                for b in a..n {
                    jtj[a * n + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }

        // inner loop: adjust damping until the step improves the cost
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for a in 0..n {
                let d = jtj[a * n + a];
                damped[a * n + a] = d + lambda * d.max(1e-30);
            }
            let mut step = jtr.clone();
            for s in &mut step {
                *s = -*s;
            }
            if !solve_in_place(&mut damped, &mut step, n) {
                lambda *= opts.lambda_up;
                continue;
            }
            let mut x_new: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + si).collect();
            clamp(&mut x_new);
            let mut r_new = vec![0.0; m];
            residuals(&x_new, &mut r_new);
            let cost_new = 0.5 * r_new.iter().map(|v| v * v).sum::<f64>();
            if cost_new.is_finite() && cost_new < cost {
                let rel_drop = (cost - cost_new) / cost.max(1e-300);
                let max_step = x_new
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs() / (b.abs() + opts.step_tol))
                    .fold(0.0f64, f64::max);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda * opts.lambda_down).max(1e-12);
                improved = true;
                stalled = if rel_drop < opts.stall_tol { stalled + 1 } else { 0 };
                if rel_drop < opts.cost_tol
                    || max_step < opts.step_tol
                    || stalled >= opts.stall_iterations
                {
                    return Ok(finish(x, cost, jac, iterations, m, n, jacobian));
                }
                break;
            }
            lambda *= opts.lambda_up;
        }
        if !improved {
            // damping saturated: local minimum to working precision
            return Ok(finish(x, cost, jac, iterations, m, n, jacobian));
        }
    }
    Err(Error::FitDiverged {
        iterations,
        residual_rms: (2.0 * cost / m as f64).sqrt(),
        best_params: x,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish<J: Fn(&[f64], &mut [f64])>(
    x: Vec<f64>,
    cost: f64,
    mut jac: Vec<f64>,
    iterations: usize,
    m: usize,
    n: usize,
    jacobian: J,
) -> LmFit {
    jacobian(&x, &mut jac);
    let mut jtj = vec![0.0; n * n];
    let mut col_norms = vec![0.0; n];
    for i in 0..m {
        let row = &jac[i * n..(i + 1) * n];
        for a in 0..n {
            col_norms[a] += row[a] * row[a];
            for b in 0..n {
                jtj[a * n + b] += row[a] * row[b];
            }
        }
    }
    for c in &mut col_norms {
        *c = c.sqrt();
    }
    LmFit {
        params: x,
        cost,
        residual_rms: (2.0 * cost / m as f64).sqrt(),
        iterations,
        normal_matrix: jtj,
        jacobian_column_norms: col_norms,
    }
}

/// Gaussian elimination with partial pivoting; solves in place, returns
/// false on a (numerically) singular matrix.
fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    for col in 0..n {
        let mut rhs = vec![0.0; n];
        rhs[col] = 1.0;
        let mut m = a.to_vec();
        if !solve_in_place(&mut m, &mut rhs, n) {
            return None;
        }
        for row in 0..n {
            out[row * n + col] = rhs[row];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_recovery() {
        // y = a e^{-k t}, fit from noise-free samples
        let (a_true, k_true) = (0.8, 1.7);
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = ts.iter().map(|t| a_true * (-k_true * t).exp()).collect();
        let res = |x: &[f64], r: &mut [f64]| {
            for (i, (&t, &y)) in ts.iter().zip(&ys).enumerate() {
                r[i] = x[0] * (-x[1] * t).exp() - y;
            }
        };
        let jac = |x: &[f64], j: &mut [f64]| {
            for (i, &t) in ts.iter().enumerate() {
                let e = (-x[1] * t).exp();
                j[i * 2] = e;
                j[i * 2 + 1] = -x[0] * t * e;
            }
        };
        let fitres = fit(
            res,
            jac,
            &[0.5, 1.0],
            &[0.0, 0.0],
            &[10.0, 10.0],
            ts.len(),
            &LmOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(fitres.params[0], a_true, max_relative = 1e-9);
        assert_relative_eq!(fitres.params[1], k_true, max_relative = 1e-9);
        let cov = fitres.covariance(ts.len()).unwrap();
        assert!(cov[0] >= 0.0 && cov[3] >= 0.0);
    }

    #[test]
    fn bounds_are_respected() {
        // best unconstrained x is 2, but the box caps it at 1
        let res = |x: &[f64], r: &mut [f64]| {
            r[0] = x[0] - 2.0;
            r[1] = 0.0;
        };
        let jac = |_: &[f64], j: &mut [f64]| {
            j[0] = 1.0;
            j[1] = 0.0;
        };
        let fitres = fit(res, jac, &[0.2], &[0.0], &[1.0], 2, &LmOptions::default()).unwrap();
        assert!(fitres.params[0] <= 1.0 + 1e-12);
        assert_relative_eq!(fitres.params[0], 1.0, max_relative = 1e-6);
    }

    #[test]
    fn too_few_residuals_rejected() {
        let res = |_: &[f64], _: &mut [f64]| {};
        let jac = |_: &[f64], _: &mut [f64]| {};
        assert!(fit(res, jac, &[1.0, 1.0], &[0.0; 2], &[9.0; 2], 1, &LmOptions::default()).is_err());
    }
}
