//! The integral quantities of a test function: `‖∂_t f‖_p`, the trace
//! norm, `‖∇̃f‖_p`, the directional norms `‖∇_ξ f‖_p` and the affine energy.
//!
//! Everything below a single [`Analysis`] shares one cached set of gradient
//! samples, so a function is differentiated once per exponent.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::function::TestFunction;
use crate::constants::{norm_c, Dimensions};
use crate::convex::{Ellipsoid, Regularity, StarBody};
use crate::error::{Error, Result};
use crate::quadrature::{sphere_rule, Integral, Orders, PolarGrid, QuadratureRule};

/// Number of equispaced angles on `[0, π)` at which planar directional
/// profiles are tabulated.
pub(crate) const CIRCLE_TABLE: usize = 256;

/// Gradients of `f` on a polar grid adapted to `|∇f|^p`.
#[derive(Debug, Clone)]
pub struct GradientSamples {
    n: usize,
    grid: PolarGrid,
    grads: Vec<f64>,
    jacobian: f64,
}

impl GradientSamples {
    pub fn new(f: &TestFunction, p: f64, orders: Orders) -> Result<Self> {
        let n = f.n();
        let decay = f.decay().differentiated().raised(p);
        let grid = PolarGrid::halfspace(n, decay, orders)?;
        let chart = f.chart();
        let mut grads = Vec::with_capacity(grid.len() * n);
        let mut y = vec![0.0; n];
        let mut g = vec![0.0; n];
        for (yp, _) in grid.points() {
            chart.map(yp, &mut y);
            f.gradient(&y, &mut g);
            grads.extend_from_slice(&g);
        }
        Ok(GradientSamples {
            n,
            grid,
            grads,
            jacobian: chart.jacobian(),
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Full gradient `(∂_t f, ∇̃f)` at node `i`.
    pub fn gradient(&self, i: usize) -> &[f64] {
        &self.grads[i * self.n..(i + 1) * self.n]
    }

    /// Physical quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.grid.weights()[i] * self.jacobian
    }

    /// `∫_{R^n_+} h(∇f)` for a function `h` of the gradient.
    pub fn integrate(&self, h: impl Fn(&[f64]) -> f64) -> Integral {
        let values: Vec<f64> = self.grads.chunks_exact(self.n).map(h).collect();
        let mut out = self.grid.integrate_values(&values);
        out.value *= self.jacobian;
        out.tail_estimate *= self.jacobian;
        out
    }

    /// `∫ |⟨∇̃f, ξ⟩|^p`.
    pub fn directional_power(&self, xi: &[f64], p: f64) -> f64 {
        let w = self.grid.weights();
        let n = self.n;
        let s: f64 = self
            .grads
            .chunks_exact(n)
            .zip(w)
            .map(|(g, w)| {
                let d: f64 = g[1..].iter().zip(xi).map(|(a, b)| a * b).sum();
                w * d.abs().powf(p)
            })
            .sum();
        s * self.jacobian
    }

    /// `∫ ∇̃f ∇̃fᵀ`, an `(n−1) × (n−1)` matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.n - 1;
        let mut out = DMatrix::zeros(m, m);
        for (g, w) in self.grads.chunks_exact(self.n).zip(self.grid.weights()) {
            for i in 0..m {
                for j in i..m {
                    out[(i, j)] += w * g[1 + i] * g[1 + j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out * self.jacobian
    }
}

/// Real trigonometric interpolant of a `π`-periodic function from its
/// values at `φ_j = π j / K`.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TrigSeries {
    pub fn from_samples(values: &[f64]) -> Self {
        let k = values.len();
        let half = k / 2;
        let mut a = vec![0.0; half + 1];
        let mut b = vec![0.0; half + 1];
        for (h, (ah, bh)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let ang = 2.0 * PI * (h * j % k) as f64 / k as f64;
                sa += v * ang.cos();
                sb += v * ang.sin();
            }
            let scale = if h == 0 || 2 * h == k { 1.0 } else { 2.0 };
            *ah = scale * sa / k as f64;
            *bh = scale * sb / k as f64;
        }
        if 2 * half == k {
            b[half] = 0.0;
        }
        TrigSeries { a, b }
    }

    /// Value and derivative at `φ`.
    pub fn eval(&self, phi: f64) -> (f64, f64) {
        let (s1, c1) = (2.0 * phi).sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut v = self.a[0];
        let mut d = 0.0;
        for h in 1..self.a.len() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            let w = 2.0 * h as f64;
            v += self.a[h] * c + self.b[h] * s;
            d += w * (self.b[h] * c - self.a[h] * s);
        }
        (v, d)
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.eval(phi).0
    }
}

/// `ξ ↦ ‖∇_ξ f‖_p^p` on `S^{n−2}`.
///
/// At `p = 2` this is the quadratic form of the gradient Gram matrix. In the
/// plane (`n = 3`) it is tabulated and interpolated; otherwise every query
/// sums over the gradient samples.
#[derive(Debug, Clone)]
pub enum Directional {
    Gram(DMatrix<f64>),
    Circle(Arc<TrigSeries>, f64),
    Direct(Arc<GradientSamples>, f64),
}

impl Directional {
    pub fn new(samples: &Arc<GradientSamples>, p: f64) -> Result<Self> {
        let n = samples.n;
        let out = if p == 2.0 {
            Directional::Gram(samples.gram())
        } else if n == 3 {
            let values: Vec<f64> = (0..CIRCLE_TABLE)
                .map(|j| {
                    let phi = PI * j as f64 / CIRCLE_TABLE as f64;
                    samples.directional_power(&[phi.cos(), phi.sin()], p)
                })
                .collect();
            check_nondegenerate(&values)?;
            Directional::Circle(Arc::new(TrigSeries::from_samples(&values)), p)
        } else {
            Directional::Direct(samples.clone(), p)
        };
        if let Directional::Gram(g) = &out {
            let eig = g.clone().symmetric_eigenvalues();
            let hi = eig.iter().cloned().fold(0.0, f64::max);
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(lo > 1e-10 * hi) {
                return Err(Error::Degenerate(
                    "a directional derivative vanishes identically".into(),
                ));
            }
        }
        Ok(out)
    }

    pub fn boundary_dim(&self) -> usize {
        match self {
            Directional::Gram(g) => g.nrows(),
            Directional::Circle(..) => 2,
            Directional::Direct(s, _) => s.n - 1,
        }
    }

    /// `‖∇_ξ f‖_p^p` for a unit vector `ξ`.
    pub fn power(&self, xi: &[f64]) -> f64 {
        match self {
            Directional::Gram(g) => {
                let m = g.nrows();
                (0..m)
                    .map(|i| xi[i] * (0..m).map(|j| g[(i, j)] * xi[j]).sum::<f64>())
                    .sum()
            }
            Directional::Circle(series, _) => series.value(xi[1].atan2(xi[0])),
            Directional::Direct(samples, p) => samples.directional_power(xi, *p),
        }
    }

    /// Quadrature on `S^{n−2}` matched to the cost and smoothness of [`Self::power`].
    pub fn direction_rule(&self) -> QuadratureRule {
        let m = self.boundary_dim();
        let order = match (self, m) {
            (_, 2) => 2 * CIRCLE_TABLE - 1,
            (Directional::Direct(..), 3) => 15,
            (Directional::Direct(..), _) => 7,
            (_, 3) => 47,
            _ => 23,
        };
        sphere_rule(m, order).expect("orders below the maximum")
    }

    /// The body `L_f` with gauge `ξ ↦ ‖∇_ξ f‖_p`.
    pub fn body(&self) -> Result<StarBody> {
        let p = match self {
            Directional::Gram(g) => {
                return Ok(Ellipsoid::new(0.5 * (g + g.transpose()))?
                    .to_body()
                    .with_label("L_f"));
            }
            Directional::Circle(_, p) | Directional::Direct(_, p) => *p,
        };
        let this = self.clone();
        Ok(StarBody::from_radial(
            self.boundary_dim(),
            move |u| this.power(u).powf(-1.0 / p),
            true,
            Regularity::Smooth,
        )
        .with_label("L_f"))
    }
}

fn check_nondegenerate(values: &[f64]) -> Result<()> {
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(hi > 0.0) || !(lo > 1e-10 * hi) || !lo.is_finite() {
        return Err(Error::Degenerate(
            "a directional derivative vanishes identically".into(),
        ));
    }
    Ok(())
}

/// All integral quantities of `f` at one exponent `p`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub dims: Dimensions,
    pub function: TestFunction,
    pub samples: Arc<GradientSamples>,
    pub directional: Directional,
    /// `(∫|f(0,x)|^{p(n−1)/(n−p)})^{(n−p)/(n−1)}`
    pub trace: f64,
    /// `‖∂_t f‖_p`
    pub dt: f64,
    /// `‖∇̃f‖_p`
    pub tilde: f64,
    /// `Z_p(f) = (∫_{S^{n−2}} ‖∇_ξ f‖_p^{1−n})^{1/(1−n)}`
    pub zp: f64,
    /// `E_p(f) = c_{n−1,p} Z_p(f)`
    pub energy: f64,
    /// Largest relative tail estimate among the half-space integrals.
    pub tail: f64,
    pub decay_ok: bool,
}

impl Analysis {
    pub fn new(f: &TestFunction, p: f64) -> Result<Self> {
        Self::with_orders(f, p, Orders::default_for(f.n()))
    }

    pub fn with_orders(f: &TestFunction, p: f64, orders: Orders) -> Result<Self> {
        let n = f.n();
        let dims = Dimensions::new(n, p)?;
        let samples = Arc::new(GradientSamples::new(f, p, orders)?);
        let dt_int = samples.integrate(|g| g[0].abs().powf(p));
        let tilde_int =
            samples.integrate(|g| g[1..].iter().map(|c| c * c).sum::<f64>().powf(0.5 * p));
        let trace_int = boundary_integral(f, dims, orders)?;
        let directional = Directional::new(&samples, p)?;
        let zp = z_power(&directional, p, n)?.powf(1.0 / (1.0 - n as f64));
        let energy = norm_c(n - 1, p)? * zp;
        let rel = |i: &Integral| i.tail_estimate / i.value.abs().max(f64::MIN_POSITIVE);
        let tail = rel(&dt_int).max(rel(&tilde_int)).max(rel(&trace_int));
        Ok(Analysis {
            dims,
            function: f.clone(),
            samples,
            directional,
            trace: trace_int.value.powf((n as f64 - p) / (n as f64 - 1.0)),
            dt: dt_int.value.powf(1.0 / p),
            tilde: tilde_int.value.powf(1.0 / p),
            zp,
            energy,
            tail,
            decay_ok: dt_int.decay_ok && tilde_int.decay_ok && trace_int.decay_ok,
        })
    }

    pub fn p(&self) -> f64 {
        self.dims.p()
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }

    /// `‖∇_ξ f‖_p` for a unit vector `ξ`.
    pub fn directional_norm(&self, xi: &[f64]) -> f64 {
        self.directional.power(xi).powf(1.0 / self.p())
    }

    /// `∫_{S^{n−2}} ‖∇_ξ f‖_p^e dξ`.
    pub fn sphere_integral(&self, e: f64) -> f64 {
        let p = self.p();
        self.directional
            .direction_rule()
            .integrate(|u| self.directional.power(u).powf(e / p))
    }

    /// `L_f`, the body whose radial function is `‖∇_ξ f‖_p^{−1}`.
    pub fn lf(&self) -> Result<StarBody> {
        self.directional.body()
    }

    /// `vol(L_f) = Z_p^{1−n} / (n−1)`.
    pub fn lf_volume(&self) -> f64 {
        let n = self.n() as f64;
        self.zp.powf(1.0 - n) / (n - 1.0)
    }
}

fn z_power(d: &Directional, p: f64, n: usize) -> Result<f64> {
    let e = (1.0 - n as f64) / p;
    let rule = d.direction_rule();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut total = 0.0;
    for (u, w) in rule.iter() {
        let v = d.power(u);
        lo = lo.min(v);
        hi = hi.max(v);
        total += w * v.powf(e);
    }
    if !(lo > 1e-10 * hi) {
        return Err(Error::Degenerate(
            "a directional derivative vanishes identically".into(),
        ));
    }
    Ok(total)
}

/// `∫_{R^{n−1}} |f(0, x)|^{p(n−1)/(n−p)} dx`.
fn boundary_integral(f: &TestFunction, dims: Dimensions, orders: Orders) -> Result<Integral> {
    let n = dims.n();
    let s = dims.trace_exponent();
    let grid = PolarGrid::whole_space(n - 1, f.decay().raised(s), orders)?;
    let chart = f.chart();
    let mut y = vec![0.0; n];
    let values: Vec<f64> = grid
        .points()
        .map(|(xp, _)| {
            chart.map_boundary(xp, &mut y[1..]);
            y[0] = 0.0;
            f.value(&y).abs().powf(s)
        })
        .collect();
    let mut out = grid.integrate_values(&values);
    let jac = chart.boundary_jacobian();
    out.value *= jac;
    out.tail_estimate *= jac;
    Ok(out)
}

/// `‖∂_t f‖_p`.
pub fn dt_norm(f: &TestFunction, p: f64) -> Result<f64> {
    let samples = GradientSamples::new(f, p, Orders::default_for(f.n()))?;
    Ok(samples
        .integrate(|g| g[0].abs().powf(p))
        .value
        .powf(1.0 / p))
}

/// `(∫_{∂R^n_+} |f(0,x)|^{p(n−1)/(n−p)} dx)^{(n−p)/(n−1)}`.
pub fn trace_norm(f: &TestFunction, p: f64) -> Result<f64> {
    let dims = Dimensions::new(f.n(), p)?;
    let n = dims.n() as f64;
    let int = boundary_integral(f, dims, Orders::default_for(f.n()))?;
    Ok(int.value.powf((n - p) / (n - 1.0)))
}

/// `‖∇̃f‖_p`.
pub fn tilde_grad_norm(f: &TestFunction, p: f64) -> Result<f64> {
    let samples = GradientSamples::new(f, p, Orders::default_for(f.n()))?;
    Ok(samples
        .integrate(|g| g[1..].iter().map(|c| c * c).sum::<f64>().powf(0.5 * p))
        .value
        .powf(1.0 / p))
}

/// `‖∇_ξ f‖_p` for a unit vector `ξ ∈ S^{n−2}`.
pub fn directional_norm(f: &TestFunction, xi: &[f64], p: f64) -> Result<f64> {
    if xi.len() != f.n() - 1 {
        return Err(Error::DimensionMismatch {
            expected: f.n() - 1,
            got: xi.len(),
        });
    }
    let samples = GradientSamples::new(f, p, Orders::default_for(f.n()))?;
    Ok(samples.directional_power(xi, p).powf(1.0 / p))
}

/// `E_p(f)`.
pub fn affine_energy(f: &TestFunction, p: f64) -> Result<f64> {
    Ok(Analysis::new(f, p)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::function::{extremal, gaussian_sum, separable, ExtremalParams, GaussianBump};

    fn dims(n: usize, p: f64) -> Dimensions {
        Dimensions::new(n, p).unwrap()
    }

    fn iso_gaussian(n: usize) -> TestFunction {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        gaussian_sum(
            n,
            &[GaussianBump {
                weight: 1.0,
                center: vec![0.0; n],
                matrix: m,
            }],
        )
        .unwrap()
    }

    #[test]
    fn trig_series_interpolates_smooth_functions() {
        let f = |phi: f64| (2.0 + (2.0 * phi).cos()).powf(-1.5) + 0.3 * (4.0 * phi).sin();
        let vals: Vec<f64> = (0..64).map(|j| f(PI * j as f64 / 64.0)).collect();
        let s = TrigSeries::from_samples(&vals);
        for phi in [0.1, 1.0, 2.5, -0.7] {
            assert!((s.value(phi) - f(phi)).abs() < 1e-10);
            let h = 1e-5;
            let fd = (f(phi + h) - f(phi - h)) / (2.0 * h);
            assert!((s.eval(phi).1 - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn gaussian_norms_in_closed_form() {
        // f = exp(−|y|²) on R^3_+
        let f = iso_gaussian(3);
        let a = Analysis::new(&f, 2.0).unwrap();
        // ∫_{t>0} 4t² e^{−2|y|²} = 4 · (√(2π)/16) · (π/2)
        let dt2 = 4.0 * (2.0 * PI).sqrt() / 16.0 * PI / 2.0;
        assert!(
            (a.dt * a.dt / dt2 - 1.0).abs() < 1e-9,
            "{}",
            a.dt * a.dt / dt2
        );
        // ∫_{t>0} 4|x|² e^{−2|y|²} = 2 · dt2
        assert!((a.tilde * a.tilde / (2.0 * dt2) - 1.0).abs() < 1e-9);
        // trace: (∫_{R²} e^{−4|x|²})^{1/2} = (π/4)^{1/2}
        assert!((a.trace - (PI / 4.0).sqrt()).abs() < 1e-9);
        // radial in x: E = ‖∇̃f‖
        assert!((a.energy / a.tilde - 1.0).abs() < 1e-9);
        assert!(a.decay_ok);
    }

    #[test]
    fn radial_functions_have_isotropic_directional_norms() {
        for p in [1.5, 2.0, 2.5] {
            let f = extremal(&ExtremalParams::standard(dims(3, p))).unwrap();
            let a = Analysis::new(&f, p).unwrap();
            let vals: Vec<f64> = (0..16)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / 16.0 + 0.1;
                    a.directional_norm(&[phi.cos(), phi.sin()])
                })
                .collect();
            let hi = vals.iter().cloned().fold(0.0, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(hi / lo - 1.0 < 1e-6, "p = {p}: {}", hi / lo - 1.0);
            assert!(
                (a.energy / a.tilde - 1.0).abs() < 1e-4,
                "p = {p}: {}",
                a.energy / a.tilde - 1.0
            );
        }
    }

    #[test]
    fn separable_norms_factor() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 0.8]);
        let (tau, b, p) = (0.7, 2.0, 1.5);
        let f = separable(3, tau, b, m.clone()).unwrap();
        // ‖∂_t f‖_p^p = ∫ |g'|^p · ∫ h^p with ∫_0^∞ τ^{−p} e^{−pt/τ} = τ^{1−p}/p
        let time = tau.powf(1.0 - p) / p;
        // ∫ (1 + |Mx|²)^{−bp} dx = π / ((bp − 1) |det M|)
        let space = PI / ((b * p - 1.0) * m.determinant().abs());
        let got = dt_norm(&f, p).unwrap().powf(p);
        assert!(
            (got / (time * space) - 1.0).abs() < 1e-7,
            "{}",
            got / (time * space)
        );
    }

    #[test]
    fn directional_norm_vanishes_across_a_ridge() {
        // x-dependence only through x_1
        let f = TestFunction::from_values(
            3,
            |y: &[f64]| (-(y[0] * y[0] + y[1] * y[1])).exp(),
            crate::quadrature::DecayProfile::rapid(1.0),
            crate::trace::function::Chart::identity(3),
            "ridge",
        )
        .unwrap();
        let along = directional_norm(&f, &[1.0, 0.0], 2.0).unwrap();
        let across = directional_norm(&f, &[0.0, 1.0], 2.0).unwrap();
        assert!(along > 0.1);
        assert_eq!(across, 0.0);
    }

    #[test]
    fn extremal_directional_norm_matches_a_radial_oracle() {
        // f = ((1+t)² + |x|²)^{−1/2}: ∫ (∂_1 f)² = (1/2) ∫_0^∞ ∫_0^∞ 2π r³ ((1+t)²+r²)^{−3} dr dt = π/4
        let f = extremal(&ExtremalParams::standard(dims(3, 2.0))).unwrap();
        let v = directional_norm(&f, &[1.0, 0.0], 2.0).unwrap();
        assert!((v * v - PI / 4.0).abs() < 1e-9, "{}", v * v);
    }

    #[test]
    fn degenerate_functions_are_rejected() {
        let f = TestFunction::from_values(
            3,
            |y: &[f64]| (-(y[0] * y[0] + y[1] * y[1])).exp() * (1.0 + y[2] * 0.0),
            crate::quadrature::DecayProfile::rapid(1.0),
            crate::trace::function::Chart::identity(3),
            "ridge",
        )
        .unwrap();
        assert!(matches!(Analysis::new(&f, 2.0), Err(Error::Degenerate(_))));
    }
}
