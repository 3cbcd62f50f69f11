//! Even, convex, `q`-homogeneous functions and their Legendre transforms.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::body::{dot, Regularity, StarBody};
use super::search::{direction_grid, maximize_on_sphere, DirectionGrid};
use crate::constants::conjugate;
use crate::error::{domain, Error, Result};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// `C : R^m → [0, ∞)` with `C(λy) = λ^q C(y)`, even, convex, positive off 0.
#[derive(Clone)]
pub struct HomogeneousConvex {
    dim: usize,
    degree: f64,
    value: ScalarFn,
    gradient: Option<GradientFn>,
    label: String,
}

impl fmt::Debug for HomogeneousConvex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousConvex")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("label", &self.label)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl HomogeneousConvex {
    pub fn new(
        dim: usize,
        degree: f64,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: Option<GradientFn>,
    ) -> Result<Self> {
        if dim < 1 {
            return Err(domain("dimension must be positive"));
        }
        if !(degree > 1.0) {
            return Err(domain(format!(
                "homogeneity degree must exceed 1, got {degree}"
            )));
        }
        Ok(HomogeneousConvex {
            dim,
            degree,
            value: Arc::new(value),
            gradient,
            label: "custom".into(),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// `coeff · |y|^q`.
    pub fn euclidean_power(dim: usize, q: f64, coeff: f64) -> Result<Self> {
        if !(coeff > 0.0) {
            return Err(domain("coefficient must be positive"));
        }
        let grad: GradientFn = Arc::new(move |y: &[f64], out: &mut [f64]| {
            let r = norm(y);
            let s = if r > 0.0 {
                coeff * q * r.powf(q - 2.0)
            } else {
                0.0
            };
            for (o, c) in out.iter_mut().zip(y) {
                *o = s * c;
            }
        });
        Ok(
            Self::new(dim, q, move |y| coeff * norm(y).powf(q), Some(grad))?
                .with_label("euclidean"),
        )
    }

    /// `⟨M y, y⟩^{q/2}` for a symmetric positive definite `M`.
    pub fn quadratic_power(matrix: DMatrix<f64>, q: f64) -> Result<Self> {
        let m = super::body::Ellipsoid::new(matrix)?.matrix().clone();
        let dim = m.nrows();
        let m2 = m.clone();
        let quad = move |y: &[f64]| {
            let v = DVector::from_column_slice(y);
            v.dot(&(&m * &v))
        };
        let grad: GradientFn = Arc::new(move |y: &[f64], out: &mut [f64]| {
            let v = DVector::from_column_slice(y);
            let mv = &m2 * &v;
            let s = v.dot(&mv);
            let f = if s > 0.0 {
                q * s.powf(q / 2.0 - 1.0)
            } else {
                0.0
            };
            for (o, c) in out.iter_mut().zip(mv.iter()) {
                *o = f * c;
            }
        });
        Ok(Self::new(dim, q, move |y| quad(y).powf(q / 2.0), Some(grad))?.with_label("quadratic"))
    }

    /// `⟨M y, y⟩`.
    pub fn quadratic(matrix: DMatrix<f64>) -> Result<Self> {
        Self::quadratic_power(matrix, 2.0)
    }

    /// `‖y‖_K^q` for a convex body `K` (finite-difference gradient).
    pub fn gauge_power(body: &StarBody, q: f64) -> Result<Self> {
        let k = body.clone();
        Ok(Self::new(body.dim(), q, move |y| k.gauge(y).powf(q), None)?.with_label("gauge"))
    }

    /// `a |t|^q + D(x)` on `R × R^{m-1}`, with `D` a `q`-homogeneous function.
    pub fn split(a: f64, d: &HomogeneousConvex) -> Result<Self> {
        if !(a > 0.0) {
            return Err(domain("time coefficient must be positive"));
        }
        let q = d.degree;
        let dv = d.clone();
        let dg = d.clone();
        let grad: GradientFn = Arc::new(move |y: &[f64], out: &mut [f64]| {
            let t = y[0];
            out[0] = a * q * t.abs().powf(q - 1.0) * t.signum();
            dg.gradient_into(&y[1..], &mut out[1..]);
        });
        Ok(Self::new(
            d.dim + 1,
            q,
            move |y| a * y[0].abs().powf(q) + dv.eval(&y[1..]),
            Some(grad),
        )?
        .with_label("split"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Homogeneity degree `q`.
    pub fn degree(&self) -> f64 {
        self.degree
    }

    /// Degree of the conjugate, `p = q / (q - 1)`.
    pub fn dual_degree(&self) -> f64 {
        conjugate(self.degree)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.value)(y)
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(y, &mut out);
        out
    }

    pub fn gradient_into(&self, y: &[f64], out: &mut [f64]) {
        match &self.gradient {
            Some(g) => g(y, out),
            None => self.fd_gradient(y, out),
        }
    }

    /// Central differences with a step relative to `|y|`.
    pub fn fd_gradient(&self, y: &[f64], out: &mut [f64]) {
        let h = 1e-5 * norm(y).max(1e-3);
        let mut z = y.to_vec();
        for i in 0..self.dim {
            z[i] = y[i] + h;
            let up = self.eval(&z);
            z[i] = y[i] - h;
            let down = self.eval(&z);
            z[i] = y[i];
            out[i] = (up - down) / (2.0 * h);
        }
    }

    /// Sampled invariants on the direction grid: the largest relative
    /// homogeneity and evenness defects, the smallest value on the sphere,
    /// and the largest midpoint-convexity violation.
    pub fn invariant_residuals(&self) -> Residuals {
        let grid = direction_grid(self.dim.max(2));
        let mut out = Residuals {
            homogeneity: 0.0,
            evenness: 0.0,
            min_on_sphere: f64::INFINITY,
            convexity: 0.0,
        };
        if self.dim < 2 {
            return out;
        }
        let pts: Vec<&[f64]> = grid.iter().collect();
        for (i, u) in pts.iter().enumerate() {
            let c = self.eval(u);
            out.min_on_sphere = out.min_on_sphere.min(c);
            for lambda in [0.3, 2.0, 5.5] {
                let y: Vec<f64> = u.iter().map(|x| lambda * x).collect();
                let rel = (self.eval(&y) / (lambda.powf(self.degree) * c) - 1.0).abs();
                out.homogeneity = out.homogeneity.max(rel);
            }
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            out.evenness = out.evenness.max((self.eval(&neg) / c - 1.0).abs());
            let v = pts[(i * 7 + 3) % pts.len()];
            let mid: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
            let excess = self.eval(&mid) - 0.5 * (c + self.eval(v));
            out.convexity = out.convexity.max(excess / c.max(1e-300));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub homogeneity: f64,
    pub evenness: f64,
    pub min_on_sphere: f64,
    pub convexity: f64,
}

impl Residuals {
    pub fn acceptable(&self, tol: f64) -> bool {
        self.homogeneity <= tol
            && self.evenness <= tol
            && self.min_on_sphere > 0.0
            && self.convexity <= tol
    }
}

/// `sup_{u ∈ S^{m-1}} ⟨x, u⟩_+ / C(u)^{1/q}` over a cached grid, i.e. the
/// support function of the level body `{C ≤ 1}`.
struct LevelSupport {
    c: HomogeneousConvex,
    grid: Arc<DirectionGrid>,
    gauge: Vec<f64>,
}

impl LevelSupport {
    fn new(c: &HomogeneousConvex) -> Result<Self> {
        let grid = direction_grid(c.dim);
        let inv_q = 1.0 / c.degree;
        let values: Vec<f64> = grid.iter().map(|u| c.eval(u)).collect();
        let top = values.iter().cloned().fold(0.0, f64::max);
        let mut gauge = Vec::with_capacity(grid.len());
        for v in values {
            if !(v > 1e-12 * top) || !v.is_finite() {
                return Err(Error::Degenerate(format!(
                    "{} vanishes or blows up on the sphere grid",
                    c.label
                )));
            }
            gauge.push(v.powf(inv_q));
        }
        Ok(LevelSupport {
            c: c.clone(),
            grid,
            gauge,
        })
    }

    /// Supremum for a unit vector `x` and the maximizing direction.
    fn sup(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let inv_q = 1.0 / self.c.degree;
        let best = maximize_on_sphere(
            &self.grid,
            |i, u| dot(x, u) / self.gauge[i],
            |u| dot(x, u) / self.c.eval(u).powf(inv_q),
        );
        (best.value.max(0.0), best.arg)
    }
}

/// `C*(x) = sup_z ⟨x, z⟩ − C(z)`, computed through the homogeneity reduction
/// `C*(x) = (1/p) q^{-p/q} (sup_{|u|=1} ⟨x, u⟩_+ / C(u)^{1/q})^p`.
///
/// The gradient is the maximizer `z* = s u*` with
/// `s = (⟨x, u*⟩ / (q C(u*)))^{1/(q-1)}`.
pub fn legendre(c: &HomogeneousConvex) -> Result<HomogeneousConvex> {
    if c.dim < 2 {
        return Err(domain("Legendre transform implemented for dimension >= 2"));
    }
    let q = c.degree;
    let p = conjugate(q);
    let factor = q.powf(-p / q) / p;
    let level = Arc::new(LevelSupport::new(c)?);
    let lv = level.clone();
    let value = move |x: &[f64]| {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let xu: Vec<f64> = x.iter().map(|c| c / r).collect();
        let (s, _) = lv.sup(&xu);
        factor * (r * s).powf(p)
    };
    let grad: GradientFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
        let r = norm(x);
        if r == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let xu: Vec<f64> = x.iter().map(|c| c / r).collect();
        let (_, u) = level.sup(&xu);
        let cu = level.c.eval(&u);
        let s = (dot(x, &u).max(0.0) / (q * cu)).powf(1.0 / (q - 1.0));
        for (o, ui) in out.iter_mut().zip(&u) {
            *o = s * ui;
        }
    });
    Ok(HomogeneousConvex::new(c.dim, p, value, Some(grad))?
        .with_label(&format!("legendre({})", c.label)))
}

/// `K_C = {C ≤ 1}` with `r_{K_C}(θ) = C(θ)^{-1/q}`.
pub fn level_body(c: &HomogeneousConvex) -> StarBody {
    let cc = c.clone();
    let inv_q = -1.0 / c.degree;
    StarBody::from_radial(
        c.dim,
        move |u| cc.eval(u).powf(inv_q),
        true,
        Regularity::Smooth,
    )
    .with_label(&format!("level({})", c.label))
}

/// `max_u |r_{K_{C*}}(u) − q^{1/q} p^{1/p} r_{K_C°}(u)| / r_{K_C°}(u)` over the
/// direction grid; both bodies are computed numerically from `C`.
pub fn polar_legendre_check(c: &HomogeneousConvex) -> Result<f64> {
    let q = c.degree;
    let p = conjugate(q);
    let factor = q.powf(1.0 / q) * p.powf(1.0 / p);
    let star = level_body(&legendre(c)?);
    let polar = level_body(c);
    let mut worst: f64 = 0.0;
    for u in direction_grid(c.dim).iter() {
        let r_polar = 1.0 / polar.support_by_search(u);
        let r_star = star.radial(u);
        worst = worst.max((r_star - factor * r_polar).abs() / r_polar);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::search::brent_min;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent brute force: scan directions, maximize ⟨x, s u⟩ − C(s u) over s.
    fn brute_force_conjugate(c: &HomogeneousConvex, x: &[f64]) -> f64 {
        let grid = direction_grid(c.dim());
        let mut best = f64::NEG_INFINITY;
        let mut best_u = grid.point(0).to_vec();
        for u in grid.iter() {
            let f = |s: f64| {
                let z: Vec<f64> = u.iter().map(|c| s * c).collect();
                -(dot(x, &z) - c.eval(&z))
            };
            let (_, v) = brent_min(&f, 0.0, 1.0, 50.0, 1e-12, 200);
            if -v > best {
                best = -v;
                best_u = u.to_vec();
            }
        }
        // polish the direction with a local sweep of small rotations
        let mut step = grid.spacing();
        for _ in 0..40 {
            let mut improved = false;
            for axis in 0..c.dim() {
                for sgn in [-1.0, 1.0] {
                    let mut u = best_u.clone();
                    u[axis] += sgn * step;
                    let n = norm(&u);
                    u.iter_mut().for_each(|c| *c /= n);
                    let f = |s: f64| {
                        let z: Vec<f64> = u.iter().map(|c| s * c).collect();
                        -(dot(x, &z) - c.eval(&z))
                    };
                    let (_, v) = brent_min(&f, 0.0, 1.0, 50.0, 1e-12, 200);
                    if -v > best {
                        best = -v;
                        best_u = u;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best
    }

    fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(m, m) * 0.3
    }

    #[test]
    fn reduction_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = vec![
            HomogeneousConvex::euclidean_power(2, 2.0, 1.0).unwrap(),
            HomogeneousConvex::euclidean_power(3, 3.0, 1.0 / 3.0).unwrap(),
            HomogeneousConvex::quadratic(random_spd(&mut rng, 2)).unwrap(),
            HomogeneousConvex::quadratic_power(random_spd(&mut rng, 3), 1.6).unwrap(),
        ];
        for c in cases {
            let cs = legendre(&c).unwrap();
            for _ in 0..4 {
                let x: Vec<f64> = (0..c.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let got = cs.eval(&x);
                let want = brute_force_conjugate(&c, &x);
                assert!(
                    (got - want).abs() < 1e-7 * want,
                    "{}: {got} vs {want}",
                    c.label()
                );
            }
        }
    }

    #[test]
    fn classical_conjugate_pairs() {
        let c = HomogeneousConvex::euclidean_power(3, 2.0, 1.0).unwrap();
        let cs = legendre(&c).unwrap();
        assert!((cs.eval(&[1.0, 2.0, -0.5]) - 5.25 / 4.0).abs() < 1e-12);

        let q = 3.0;
        let p = conjugate(q);
        let c = HomogeneousConvex::euclidean_power(2, q, 1.0 / q).unwrap();
        let cs = legendre(&c).unwrap();
        let x = [0.7, -1.9];
        assert!((cs.eval(&x) - norm(&x).powf(p) / p).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_spd(&mut rng, 3);
        let inv = m.clone().try_inverse().unwrap();
        let cs = legendre(&HomogeneousConvex::quadratic(m).unwrap()).unwrap();
        for _ in 0..20 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
            let want = x.dot(&(&inv * &x)) / 4.0;
            let got = cs.eval(x.as_slice());
            assert!((got - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn conjugate_gradient_is_the_maximizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_spd(&mut rng, 2);
        let inv = m.clone().try_inverse().unwrap();
        let cs = legendre(&HomogeneousConvex::quadratic(m).unwrap()).unwrap();
        let x = DVector::from_column_slice(&[0.4, -1.3]);
        let g = cs.gradient(x.as_slice());
        let want = &inv * &x / 2.0;
        for i in 0..2 {
            assert!((g[i] - want[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn biconjugation_recovers_smooth_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = HomogeneousConvex::quadratic_power(random_spd(&mut rng, 2), 2.5).unwrap();
        let cc = legendre(&legendre(&c).unwrap()).unwrap();
        for u in direction_grid(2).iter().step_by(8) {
            let (a, b) = (c.eval(u), cc.eval(u));
            assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn level_bodies() {
        let ball = level_body(&HomogeneousConvex::euclidean_power(3, 2.0, 1.0).unwrap());
        assert!((ball.radial(&[0.0, 1.0, 0.0]) - 1.0).abs() < 1e-15);
        let ball3 = level_body(&HomogeneousConvex::euclidean_power(3, 3.0, 1.0).unwrap());
        assert!((ball3.radial(&[0.6, 0.0, 0.8]) - 1.0).abs() < 1e-15);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let e = super::super::body::Ellipsoid::new(m.clone()).unwrap();
        let k = level_body(&HomogeneousConvex::quadratic(m).unwrap());
        for u in direction_grid(2).iter().step_by(9) {
            assert!((k.radial(u) - e.radial(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn polar_legendre_identity() {
        let c = HomogeneousConvex::euclidean_power(2, 2.0, 1.0).unwrap();
        assert!(polar_legendre_check(&c).unwrap() < 1e-8);
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.7, 0.7, 1.0]);
        let c = HomogeneousConvex::quadratic_power(m, 3.0).unwrap();
        assert!(polar_legendre_check(&c).unwrap() < 1e-6);
    }

    #[test]
    fn degenerate_c_is_rejected() {
        let c = HomogeneousConvex::new(2, 2.0, |y: &[f64]| y[0] * y[0], None).unwrap();
        assert!(matches!(legendre(&c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sampled_invariants_hold() {
        let c = HomogeneousConvex::quadratic_power(
            DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 0.5]),
            1.7,
        )
        .unwrap();
        assert!(c.invariant_residuals().acceptable(1e-12));
        let sq = StarBody::cuboid(&[1.0, 2.0]).unwrap();
        assert!(HomogeneousConvex::gauge_power(&sq, 2.0)
            .unwrap()
            .invariant_residuals()
            .acceptable(1e-12));
        let bad = HomogeneousConvex::new(
            2,
            2.0,
            |y: &[f64]| {
                (y[0] * y[0] + y[1] * y[1]).sqrt().powi(2) + y[0].powi(3).abs() * 0.0 + y[0] * 0.1
            },
            None,
        )
        .unwrap();
        assert!(!bad.invariant_residuals().acceptable(1e-6));
    }
}
