//! Gauss–Hermite rules for expectations over standard normal variables.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights such that Σ wᵢ f(xᵢ) ≈ E[f(Z)], Z ~ N(0, 1).
///
/// Exact for polynomials of degree ≤ 2·len − 1. Nodes start from the
/// Golub–Welsch eigenvalues of the probabilists' Hermite recurrence.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        if order == 1 {
            return GaussHermite {
                nodes: vec![0.0],
                weights: vec![1.0],
            };
        }
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let off = (k as f64).sqrt();
            jacobi[(k - 1, k)] = off;
            jacobi[(k, k - 1)] = off;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        // Eigenvector weights lose relative accuracy in the tails, which
        // high moments depend on; polish each node by Newton's method and
        // take the weight from the Christoffel function instead.
        let weights: Vec<f64> = nodes
            .iter_mut()
            .map(|x| {
                for _ in 0..3 {
                    let (phi, dphi, _) = orthonormal(order, *x);
                    let step = phi / dphi;
                    if !step.is_finite() {
                        break;
                    }
                    *x -= step;
                }
                let sum = orthonormal(order, *x).2;
                if sum.is_finite() {
                    1.0 / sum
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        GaussHermite {
            nodes,
            weights: weights.iter().map(|w| w / total).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Orthonormal probabilists' Hermite polynomials at `x`: returns
/// (φ_n, φ_n', Σ_{j<n} φ_j²).
fn orthonormal(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum = 0.0;
    for j in 0..n {
        sum += cur * cur;
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, (n as f64).sqrt() * prev, sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_normal_moments() {
        let gh = GaussHermite::new(12);
        let moment = |p: i32| -> f64 { gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * x.powi(p)).sum() };
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!(moment(1).abs() < 1e-13);
        assert!((moment(2) - 1.0).abs() < 1e-12);
        assert!((moment(4) - 3.0).abs() < 1e-11);
        assert!((moment(10) - 945.0).abs() < 1e-8);
        // 22 ≤ 2·12 − 1: still exact (21!! = 13 749 310 575)
        assert!((moment(22) / 13_749_310_575.0 - 1.0).abs() < 1e-9);
    }
}
