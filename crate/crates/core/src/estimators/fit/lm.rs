//! Levenberg–Marquardt for small dense problems.

use nalgebra::{DMatrix, DVector};

/// Model value at `x` for parameters `p`; the gradient w.r.t. `p` is
/// written into the last argument.
pub(crate) trait Model {
    fn eval(&self, p: &[f64], x: f64, grad: &mut [f64]) -> f64;
}

impl<F: Fn(&[f64], f64, &mut [f64]) -> f64> Model for F {
    fn eval(&self, p: &[f64], x: f64, grad: &mut [f64]) -> f64 {
        self(p, x, grad)
    }
}

pub(crate) struct Outcome {
    pub params: Vec<f64>,
    /// (JᵀWJ)⁻¹ at the optimum, unscaled.
    pub normal_inverse: Option<DMatrix<f64>>,
    /// Σ w·r².
    pub chi2: f64,
    pub converged: bool,
}

const MAX_ITER: usize = 500;

fn residuals<M: Model>(m: &M, p: &[f64], x: &[f64], y: &[f64], sw: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let k = p.len();
    let mut r = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, k);
    let mut g = vec![0.0; k];
    for i in 0..n {
        let f = m.eval(p, x[i], &mut g);
        r[i] = sw[i] * (y[i] - f);
        for c in 0..k {
            j[(i, c)] = sw[i] * g[c];
        }
    }
    (r, j)
}

/// Minimises Σ w_i (y_i − f(x_i; p))² from `p0`.
pub(crate) fn minimize<M: Model>(m: &M, x: &[f64], y: &[f64], w: &[f64], p0: Vec<f64>) -> Outcome {
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let k = p0.len();
    let mut p = p0;
    let (mut r, mut j) = residuals(m, &p, x, y, &sw);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let scale0 = y.iter().zip(&sw).map(|(v, s)| (v * s).powi(2)).sum::<f64>().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_ITER {
        if cost <= 1e-28 * scale0 {
            converged = true;
            break;
        }
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        if g.amax() <= 1e-14 * cost.sqrt() * a.diagonal().amax().sqrt() {
            converged = true;
            break;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for d in 0..k {
                damped[(d, d)] += lambda * a[(d, d)].max(1e-30);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (rt, jt_) = residuals(m, &trial, x, y, &sw);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let rel_step = step
                    .iter()
                    .zip(&p)
                    .map(|(s, v)| s.abs() / (v.abs() + 1e-12))
                    .fold(0.0, f64::max);
                let rel_drop = (cost - ct) / cost;
                p = trial;
                r = rt;
                j = jt_;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel_step < 1e-12 || rel_drop < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: stationary to working precision
            converged = g.amax() <= 1e-8 * (cost.sqrt() + 1e-300) * a.diagonal().amax().sqrt().max(1e-300);
            break;
        }
        if converged {
            break;
        }
    }
    let jt = j.transpose();
    let normal_inverse = (&jt * &j).try_inverse();
    Outcome {
        params: p,
        normal_inverse,
        chi2: cost,
        converged,
    }
}

/// 1σ errors: with `absolute` the weights are taken as 1/σ², otherwise the
/// covariance is scaled by the reduced χ².
pub(crate) fn sigmas(out: &Outcome, n: usize, absolute: bool) -> Vec<f64> {
    let k = out.params.len();
    let Some(inv) = &out.normal_inverse else {
        return vec![f64::NAN; k];
    };
    let scale = if absolute {
        1.0
    } else if n > k {
        out.chi2 / (n - k) as f64
    } else {
        f64::NAN
    };
    (0..k).map(|i| (inv[(i, i)] * scale).max(0.0).sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let model = |p: &[f64], x: f64, g: &mut [f64]| {
            let e = (-p[1] * x).exp();
            g[0] = e;
            g[1] = -p[0] * x * e;
            p[0] * e
        };
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|&x| 3.0 * (-0.7 * x).exp()).collect();
        let out = minimize(&model, &x, &y, &vec![1.0; x.len()], vec![1.0, 0.1]);
        assert!(out.converged);
        assert!((out.params[0] - 3.0).abs() < 1e-10);
        assert!((out.params[1] - 0.7).abs() < 1e-10);
    }
}
