//! Gauss-Hermite rules for expectations over Gaussian noise.

use std::f64::consts::{PI, SQRT_2};

/// Gauss-Hermite rule for integrands of the form `e^{-t^2} f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `order`-point rule. Starting values are the eigenvalues of
    /// the Jacobi matrix; Newton iteration on the orthonormal Hermite
    /// recurrence then polishes each node and yields its weight.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        let n = order;
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let mut guesses = jacobi_eigenvalues(n);
        guesses.sort_by(|a, b| b.total_cmp(a));
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = guesses[i];
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[m - 1] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ e^{-t^2} f(t) dt`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// Abscissae and probability weights for `E[f(Z)]`, `Z ~ N(0, 1)`.
    pub fn standard_normal(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let norm = 1.0 / PI.sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (SQRT_2 * t, w * norm))
    }
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix of the Hermite
/// weight (zero diagonal, off-diagonal `sqrt(k/2)`) by implicit QL.
fn jacobi_eigenvalues(n: usize) -> Vec<f64> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).chain([0.0]).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "tridiagonal QL did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 16, 32, 64, 96] {
            let gh = GaussHermite::new(n);
            let s: f64 = gh.weights().iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn normal_moments_are_exact() {
        let gh = GaussHermite::new(32);
        let m2: f64 = gh.standard_normal().map(|(z, w)| w * z * z).sum();
        let m4: f64 = gh.standard_normal().map(|(z, w)| w * z.powi(4)).sum();
        let m6: f64 = gh.standard_normal().map(|(z, w)| w * z.powi(6)).sum();
        assert!((m2 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
        assert!((m6 - 15.0).abs() < 1e-11);
    }

    #[test]
    fn integrates_cosine() {
        let gh = GaussHermite::new(20);
        let v = gh.integrate(f64::cos);
        assert!((v - PI.sqrt() * (-0.25f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_sorted_descending_and_symmetric() {
        for n in [64, 201] {
            let gh = GaussHermite::new(n);
            for w in gh.nodes().windows(2) {
                assert!(w[0] > w[1], "n={n}");
            }
            for i in 0..n / 2 {
                assert_eq!(gh.nodes()[i], -gh.nodes()[n - 1 - i]);
            }
        }
    }
}
