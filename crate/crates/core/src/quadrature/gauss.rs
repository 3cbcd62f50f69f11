//! One-dimensional Gauss rules.
//!
//! Gauss–Jacobi nodes come from the eigenvalues of the Jacobi matrix
//! (Golub–Welsch), are polished with two Newton steps on the orthonormal
//! recurrence, and the weights are the Christoffel numbers
//! `1 / Σ_k p̂_k(x)²`, which stay accurate even when the eigenvector
//! components are tiny.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::special::ln_gamma;

/// Nodes and weights on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

type CacheKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Legendre rule with `count` nodes.
pub fn gauss_legendre(count: usize) -> Arc<GaussRule> {
    gauss_jacobi(count, 0.0, 0.0)
}

/// Gauss–Jacobi rule with `count` nodes; `alpha, beta > -1`.
///
/// Rules are memoized, so repeated construction inside loops is cheap.
pub fn gauss_jacobi(count: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
    assert!(
        alpha > -1.0 && beta > -1.0,
        "Jacobi exponents must exceed -1"
    );
    assert!(count > 0, "a Gauss rule needs at least one node");
    let key = (count, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build_jacobi(count, alpha, beta));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

struct Recurrence {
    diag: Vec<f64>,
    // off[k] couples p̂_k and p̂_{k+1}; one longer than the matrix needs
    off: Vec<f64>,
    mu0: f64,
}

fn recurrence(count: usize, alpha: f64, beta: f64) -> Recurrence {
    let ab = alpha + beta;
    let diag = (0..count)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
            }
        })
        .collect();
    let off = (1..=count)
        .map(|k| {
            let k = k as f64;
            if k == 1.0 {
                (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let s = 2.0 * k + ab;
                (4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0)))
                    .sqrt()
            }
        })
        .collect();
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    Recurrence { diag, off, mu0 }
}

/// Orthonormal values `p̂_0..p̂_count` and the derivative of `p̂_count` at `x`.
fn orthonormal(rec: &Recurrence, count: usize, x: f64, values: &mut [f64]) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0 / rec.mu0.sqrt();
    let mut dprev = 0.0;
    let mut dcur = 0.0;
    values[0] = cur;
    for k in 0..count {
        let b_prev = if k == 0 { 0.0 } else { rec.off[k - 1] };
        let next = ((x - rec.diag[k]) * cur - b_prev * prev) / rec.off[k];
        let dnext = ((x - rec.diag[k]) * dcur + cur - b_prev * dprev) / rec.off[k];
        prev = cur;
        cur = next;
        dprev = dcur;
        dcur = dnext;
        values[k + 1] = cur;
    }
    dcur
}

fn build_jacobi(count: usize, alpha: f64, beta: f64) -> GaussRule {
    let rec = recurrence(count, alpha, beta);
    let jacobi = DMatrix::from_fn(count, count, |i, j| {
        if i == j {
            rec.diag[i]
        } else if i + 1 == j {
            rec.off[i]
        } else if j + 1 == i {
            rec.off[j]
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut values = vec![0.0; count + 1];
    let mut weights = Vec::with_capacity(count);
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let d = orthonormal(&rec, count, *x, &mut values);
            if d != 0.0 {
                let step = values[count] / d;
                if step.is_finite() && step.abs() < 1e-6 {
                    *x -= step;
                }
            }
        }
        orthonormal(&rec, count, *x, &mut values);
        let norm: f64 = values[..count].iter().map(|v| v * v).sum();
        weights.push(1.0 / norm);
    }
    GaussRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_beta;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for count in [1usize, 2, 5, 17, 64] {
            let rule = gauss_legendre(count);
            for deg in 0..(2 * count) {
                let got = rule.integrate(|x| x.powi(deg as i32));
                let want = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (got - want).abs() < 1e-13,
                    "count {count}, deg {deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn legendre_weights_sum_to_two_and_are_positive() {
        let rule = gauss_legendre(128);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        // ∫ (1-x)^a (1+x)^b x^0 dx = 2^{a+b+1} B(a+1, b+1); also check (1+x)^k moments.
        for &(a, b) in &[
            (0.5, 0.0),
            (-0.5, -0.5),
            (0.0, 1.5),
            (-0.5, 0.25),
            (2.0, 3.0),
        ] {
            let rule = gauss_jacobi(12, a, b);
            for k in 0..10 {
                let got = rule.integrate(|x| (1.0 + x).powi(k));
                let want = ((a + b + k as f64 + 1.0) * 2f64.ln()
                    + ln_beta(a + 1.0, b + k as f64 + 1.0))
                .exp();
                assert!(
                    ((got - want) / want).abs() < 1e-12,
                    "a {a} b {b} k {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_nodes_are_recovered() {
        // alpha = beta = -1/2 is Gauss–Chebyshev: nodes cos((2i-1)π/2n), weights π/n
        let n = 9;
        let rule = gauss_jacobi(n, -0.5, -0.5);
        for (i, (&x, &w)) in rule.nodes.iter().rev().zip(&rule.weights).enumerate() {
            let want = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            assert!((x - want).abs() < 1e-14);
            assert!((w - std::f64::consts::PI / n as f64).abs() < 1e-13);
        }
    }
}
