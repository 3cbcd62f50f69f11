//! Test functions on the half-space `R^n_+ = {(t, x) : t > 0}`.
//!
//! A [`TestFunction`] couples a [`Field`] (value and gradient) with the
//! metadata the integrators need: a decay profile and an integration chart
//! that says where the function lives, so that polar grids can be centred
//! and shaped around it.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::Dimensions;
use crate::convex::HomogeneousConvex;
use crate::error::{domain, Error, Result};
use crate::quadrature::DecayProfile;

/// Pointwise evaluation of a function on `R^n_+` and its full gradient
/// `(∂_t f, ∇̃f)`.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, y: &[f64]) -> f64;

    /// Writes `(∂_t f, ∂_{x_1} f, …)` into `grad` and returns the value.
    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64;
}

/// Affine placement `y = (s t', c + T x')` of the integration grid: the
/// function looks roughly isotropic, of size `decay.scale`, in the primed
/// coordinates. Half-space integrals are invariant under this change of
/// variables, so the chart only affects accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub t_scale: f64,
    pub center: Vec<f64>,
    pub linear: DMatrix<f64>,
}

impl Chart {
    pub fn identity(n: usize) -> Self {
        Chart {
            t_scale: 1.0,
            center: vec![0.0; n - 1],
            linear: DMatrix::identity(n - 1, n - 1),
        }
    }

    pub fn centered(center: &[f64]) -> Self {
        let m = center.len();
        Chart {
            t_scale: 1.0,
            center: center.to_vec(),
            linear: DMatrix::identity(m, m),
        }
    }

    /// `y = (s t', c + T x')` for a primed point `yp`.
    pub fn map(&self, yp: &[f64], y: &mut [f64]) {
        y[0] = self.t_scale * yp[0];
        let m = self.center.len();
        for i in 0..m {
            let mut s = self.center[i];
            for j in 0..m {
                s += self.linear[(i, j)] * yp[1 + j];
            }
            y[1 + i] = s;
        }
    }

    /// Boundary version of [`Chart::map`]: `x = c + T x'`.
    pub fn map_boundary(&self, xp: &[f64], x: &mut [f64]) {
        let m = self.center.len();
        for i in 0..m {
            let mut s = self.center[i];
            for j in 0..m {
                s += self.linear[(i, j)] * xp[j];
            }
            x[i] = s;
        }
    }

    pub fn boundary_jacobian(&self) -> f64 {
        self.linear.determinant().abs()
    }

    pub fn jacobian(&self) -> f64 {
        self.t_scale * self.boundary_jacobian()
    }

    /// Chart of `y ↦ f(M y)` when `self` is the chart of `f`.
    fn pulled_back(&self, frame: &AffineFrame) -> Chart {
        let binv = &frame.inverse;
        Chart {
            t_scale: self.t_scale / frame.lambda,
            center: (binv * DVector::from_column_slice(&self.center))
                .as_slice()
                .to_vec(),
            linear: binv * &self.linear,
        }
    }
}

/// Element `diag(λ, B)` of `GL_{n,+}`: `λ > 0`, `B` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFrame {
    pub lambda: f64,
    pub b: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl AffineFrame {
    pub fn new(lambda: f64, b: DMatrix<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(format!("frame needs λ > 0, got {lambda}")));
        }
        if b.nrows() != b.ncols() {
            return Err(domain("frame matrix must be square"));
        }
        let inverse = b
            .clone()
            .try_inverse()
            .filter(|_| b.determinant().abs() > 1e-14)
            .ok_or_else(|| Error::Degenerate("singular frame matrix".into()))?;
        Ok(AffineFrame { lambda, b, inverse })
    }

    pub fn identity(n: usize) -> Self {
        AffineFrame::new(1.0, DMatrix::identity(n - 1, n - 1)).expect("identity is invertible")
    }

    /// Random frame with `λ ∈ [0.5, 2]` and `B = R_1 diag(s) R_2`, singular
    /// values in `[1, cond]` up to an overall scale in `[0.5, 2]`.
    pub fn random(n: usize, cond: f64, rng: &mut impl Rng) -> Self {
        let m = n - 1;
        let lambda = rng.gen_range(0.5..2.0);
        let scale = rng.gen_range(0.5..2.0);
        let r1 = random_orthogonal(m, rng);
        let r2 = random_orthogonal(m, rng);
        let mut s: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..cond.max(1.0))).collect();
        s[0] = 1.0;
        if m > 1 {
            s[m - 1] = cond.max(1.0);
        }
        let d = DMatrix::from_diagonal(&DVector::from_vec(s)) * scale;
        AffineFrame::new(lambda, r1 * d * r2).expect("random frames are invertible")
    }

    pub fn dim(&self) -> usize {
        self.b.nrows() + 1
    }

    /// The full block matrix `diag(λ, B)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.lambda;
        m.view_mut((1, 1), (n - 1, n - 1)).copy_from(&self.b);
        m
    }

    pub fn determinant(&self) -> f64 {
        self.lambda * self.b.determinant()
    }
}

/// Haar-ish random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| standard_normal(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&DVector::from_fn(m, |i, _| r[(i, i)].signum()));
    q * signs
}

pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A function on `R^n_+` with the metadata needed to integrate it.
#[derive(Clone)]
pub struct TestFunction {
    n: usize,
    field: Arc<dyn Field>,
    decay: DecayProfile,
    chart: Chart,
    analytic: bool,
    label: String,
    descriptor: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl TestFunction {
    /// Wraps a field. `decay` describes `|f|` in the chart's primed coordinates.
    pub fn new(
        field: Arc<dyn Field>,
        decay: DecayProfile,
        chart: Chart,
        analytic: bool,
        label: &str,
    ) -> Result<Self> {
        let n = field.dim();
        if n < 3 {
            return Err(domain(format!(
                "half-space dimension must be at least 3, got {n}"
            )));
        }
        if chart.center.len() != n - 1 || chart.linear.nrows() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: chart.center.len(),
            });
        }
        if !(chart.t_scale > 0.0) || chart.boundary_jacobian() == 0.0 {
            return Err(Error::Degenerate("integration chart is singular".into()));
        }
        Ok(TestFunction {
            n,
            field,
            decay,
            chart,
            analytic,
            label: label.to_string(),
            descriptor: label.to_string(),
        })
    }

    /// Function known only through its values; derivatives by central differences.
    pub fn from_values(
        n: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        decay: DecayProfile,
        chart: Chart,
        label: &str,
    ) -> Result<Self> {
        let field = Arc::new(FiniteDifference {
            n,
            value: Box::new(value),
        });
        Self::new(field, decay, chart, false, label)
    }

    /// Replaces the free-form descriptor used for input digests.
    pub fn with_descriptor(mut self, descriptor: String) -> Self {
        self.descriptor = descriptor;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn decay(&self) -> DecayProfile {
        self.decay
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Stable text describing the function and all its parameters.
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.field.value(y)
    }

    pub fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        self.field.gradient(y, grad)
    }

    pub fn dt(&self, y: &[f64]) -> f64 {
        let mut g = vec![0.0; self.n];
        self.field.gradient(y, &mut g);
        g[0]
    }

    /// `∇̃f`, the gradient in the boundary variables.
    pub fn grad_x(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.field.gradient(y, &mut g);
        g[1..].to_vec()
    }

    /// Central-difference gradient of the value.
    pub fn fd_gradient(&self, y: &[f64], grad: &mut [f64]) {
        central_gradient(|z| self.field.value(z), y, grad);
    }

    /// Largest discrepancy between the stored gradient and central
    /// differences of the value at `count` random points of the chart,
    /// relative to the gradient size at each point.
    pub fn derivative_consistency(&self, count: usize, rng: &mut impl Rng) -> f64 {
        let n = self.n;
        let scale = self.decay.scale;
        let mut yp = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut fd = vec![0.0; n];
        let mut worst: f64 = 0.0;
        for _ in 0..count {
            yp[0] = rng.gen_range(0.05..1.5) * scale;
            for c in yp[1..].iter_mut() {
                *c = rng.gen_range(-1.5..1.5) * scale;
            }
            self.chart.map(&yp, &mut y);
            self.field.gradient(&y, &mut g);
            self.fd_gradient(&y, &mut fd);
            let size = g.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
            let err = g
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err / size);
        }
        worst
    }

    /// `γ f`.
    pub fn scaled(&self, gamma: f64) -> TestFunction {
        let inner = self.field.clone();
        TestFunction {
            field: Arc::new(Scaled { inner, gamma }),
            label: format!("{gamma}*{}", self.label),
            descriptor: format!("scaled(gamma={gamma:?}, {})", self.descriptor),
            ..self.clone()
        }
    }
}

fn central_gradient(f: impl Fn(&[f64]) -> f64, y: &[f64], grad: &mut [f64]) {
    let mut z = y.to_vec();
    for i in 0..y.len() {
        let h = 1e-5 * (1.0 + y[i].abs());
        z[i] = y[i] + h;
        let fp = f(&z);
        z[i] = y[i] - h;
        let fm = f(&z);
        z[i] = y[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
}

struct FiniteDifference {
    n: usize,
    value: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Field for FiniteDifference {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        (self.value)(y)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        central_gradient(|z| (self.value)(z), y, grad);
        (self.value)(y)
    }
}

struct Scaled {
    inner: Arc<dyn Field>,
    gamma: f64,
}

impl Field for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.gamma * self.inner.value(y)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let v = self.inner.gradient(y, grad);
        grad.iter_mut().for_each(|g| *g *= self.gamma);
        self.gamma * v
    }
}

struct Pullback {
    inner: Arc<dyn Field>,
    frame: AffineFrame,
}

impl Pullback {
    fn push(&self, y: &[f64]) -> Vec<f64> {
        let m = self.frame.b.nrows();
        let mut z = vec![0.0; m + 1];
        z[0] = self.frame.lambda * y[0];
        for i in 0..m {
            z[1 + i] = (0..m).map(|j| self.frame.b[(i, j)] * y[1 + j]).sum();
        }
        z
    }
}

impl Field for Pullback {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.inner.value(&self.push(y))
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let z = self.push(y);
        let mut g = vec![0.0; z.len()];
        let v = self.inner.gradient(&z, &mut g);
        let m = self.frame.b.nrows();
        grad[0] = self.frame.lambda * g[0];
        for j in 0..m {
            grad[1 + j] = (0..m).map(|i| self.frame.b[(i, j)] * g[1 + i]).sum();
        }
        v
    }
}

/// `y ↦ f(M y)` with `M = diag(λ, B)` and chain-rule derivatives.
pub fn gl_pullback(f: &TestFunction, frame: &AffineFrame) -> Result<TestFunction> {
    if frame.dim() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: frame.dim(),
        });
    }
    Ok(TestFunction {
        n: f.n,
        field: Arc::new(Pullback {
            inner: f.field.clone(),
            frame: frame.clone(),
        }),
        decay: f.decay,
        chart: f.chart.pulled_back(frame),
        analytic: f.analytic,
        label: format!("pullback({})", f.label),
        descriptor: format!(
            "pullback(lambda={:?}, B={:?}, {})",
            frame.lambda,
            frame.b.as_slice(),
            f.descriptor
        ),
    })
}

/// Parameters of `γ ((λt + δ)^q + |B(x − x0)|^q)^{-(n-p)/p}`.
///
/// At `p = 2` this is `γ ((λt + δ)^2 + |B(x − x0)|^2)^{-(n-2)/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalParams {
    pub dims: Dimensions,
    pub lambda: f64,
    pub delta: f64,
    pub b: DMatrix<f64>,
    pub x0: Vec<f64>,
    /// Amplitude, sign included.
    pub gamma: f64,
}

impl ExtremalParams {
    pub fn new(
        dims: Dimensions,
        lambda: f64,
        delta: f64,
        b: DMatrix<f64>,
        x0: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let params = ExtremalParams {
            dims,
            lambda,
            delta,
            b,
            x0,
            gamma,
        };
        params.validate()?;
        Ok(params)
    }

    /// `λ = δ = γ = 1`, `B = I`, `x0 = 0`.
    pub fn standard(dims: Dimensions) -> Self {
        let m = dims.n() - 1;
        ExtremalParams {
            dims,
            lambda: 1.0,
            delta: 1.0,
            b: DMatrix::identity(m, m),
            x0: vec![0.0; m],
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dims.n() - 1;
        if !(self.lambda > 0.0) || !(self.delta > 0.0) {
            return Err(domain(format!(
                "need λ > 0 and δ > 0, got {} and {}",
                self.lambda, self.delta
            )));
        }
        if self.b.nrows() != m || self.b.ncols() != m || self.x0.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.x0.len(),
            });
        }
        if self.b.determinant().abs() < 1e-14 {
            return Err(Error::Degenerate("extremal matrix B is singular".into()));
        }
        if self.gamma == 0.0 || !self.gamma.is_finite() {
            return Err(domain("amplitude must be finite and nonzero"));
        }
        Ok(())
    }

    /// Parameters of `y ↦ f(M y)` for `M = diag(λ', B')`.
    pub fn pulled_back(&self, frame: &AffineFrame) -> ExtremalParams {
        let x0 = (&frame.inverse * DVector::from_column_slice(&self.x0))
            .as_slice()
            .to_vec();
        ExtremalParams {
            dims: self.dims,
            lambda: self.lambda * frame.lambda,
            delta: self.delta,
            b: &self.b * &frame.b,
            x0,
            gamma: self.gamma,
        }
    }

    /// Decay power `(n − p)/(p − 1)` of the function in `|y|`.
    pub fn decay_power(&self) -> f64 {
        (self.dims.n() as f64 - self.dims.p()) / (self.dims.p() - 1.0)
    }
}

struct Extremal {
    n: usize,
    q: f64,
    k: f64,
    lambda: f64,
    delta: f64,
    b: DMatrix<f64>,
    x0: Vec<f64>,
    gamma: f64,
}

impl Extremal {
    fn parts(&self, y: &[f64]) -> (f64, Vec<f64>, f64) {
        let m = self.n - 1;
        let a = self.lambda * y[0] + self.delta;
        let u: Vec<f64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| self.b[(i, j)] * (y[1 + j] - self.x0[j]))
                    .sum()
            })
            .collect();
        let r = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        (a, u, r)
    }
}

impl Field for Extremal {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        let (a, _, r) = self.parts(y);
        self.gamma * (a.powf(self.q) + r.powf(self.q)).powf(-self.k)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let (a, u, r) = self.parts(y);
        let q = self.q;
        let s = a.powf(q) + r.powf(q);
        let v = self.gamma * s.powf(-self.k);
        // d/ds of γ s^{-k} is -k v / s
        let ds = -self.k * v / s;
        grad[0] = ds * q * a.powf(q - 1.0) * self.lambda;
        let gr = if r > 0.0 {
            ds * q * r.powf(q - 2.0)
        } else {
            0.0
        };
        let m = self.n - 1;
        for j in 0..m {
            grad[1 + j] = gr * (0..m).map(|i| self.b[(i, j)] * u[i]).sum::<f64>();
        }
        v
    }
}

/// The extremal family of the sharp affine trace inequality.
pub fn extremal(params: &ExtremalParams) -> Result<TestFunction> {
    params.validate()?;
    let dims = params.dims;
    let n = dims.n();
    let field = Extremal {
        n,
        q: dims.q(),
        k: (n as f64 - dims.p()) / dims.p(),
        lambda: params.lambda,
        delta: params.delta,
        b: params.b.clone(),
        x0: params.x0.clone(),
        gamma: params.gamma,
    };
    let binv = params.b.clone().try_inverse().expect("validated");
    let chart = Chart {
        t_scale: 1.0 / params.lambda,
        center: params.x0.clone(),
        linear: binv,
    };
    let decay = DecayProfile::algebraic(params.decay_power(), params.delta);
    let f = TestFunction::new(Arc::new(field), decay, chart, true, "extremal")?;
    Ok(f.with_descriptor(format!(
        "extremal(n={n}, p={:?}, lambda={:?}, delta={:?}, B={:?}, x0={:?}, gamma={:?})",
        dims.p(),
        params.lambda,
        params.delta,
        params.b.as_slice(),
        params.x0,
        params.gamma
    )))
}

struct CExtremal {
    c: HomogeneousConvex,
    k: f64,
    delta: f64,
    x0: Vec<f64>,
    gamma: f64,
}

impl CExtremal {
    fn shift(&self, y: &[f64]) -> Vec<f64> {
        let mut z = y.to_vec();
        z[0] += self.delta;
        for (zi, x) in z[1..].iter_mut().zip(&self.x0) {
            *zi -= x;
        }
        z
    }
}

impl Field for CExtremal {
    fn dim(&self) -> usize {
        self.c.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        self.gamma * self.c.eval(&self.shift(y)).powf(-self.k)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let z = self.shift(y);
        let cv = self.c.eval(&z);
        let v = self.gamma * cv.powf(-self.k);
        self.c.gradient_into(&z, grad);
        let s = -self.k * v / cv;
        grad.iter_mut().for_each(|g| *g *= s);
        v
    }
}

/// `γ C(t + δ, x − x0)^{-(n-p)/p}`, the equality case of the trace
/// inequality with the convex function `C` (of degree `q = p/(p−1)`).
pub fn c_extremal(
    c: &HomogeneousConvex,
    p: f64,
    delta: f64,
    x0: &[f64],
    gamma: f64,
) -> Result<TestFunction> {
    let n = c.dim();
    let dims = Dimensions::new(n, p)?;
    if (c.degree() - dims.q()).abs() > 1e-12 {
        return Err(domain(format!(
            "C must have degree q = {}, got {}",
            dims.q(),
            c.degree()
        )));
    }
    if !(delta > 0.0) || x0.len() != n - 1 {
        return Err(domain("need δ > 0 and x0 in R^{n-1}"));
    }
    let k = (n as f64 - p) / p;
    let field = CExtremal {
        c: c.clone(),
        k,
        delta,
        x0: x0.to_vec(),
        gamma,
    };
    let decay = DecayProfile::algebraic(dims.q() * k, delta);
    let f = TestFunction::new(
        Arc::new(field),
        decay,
        Chart::centered(x0),
        c.has_analytic_gradient(),
        "c-extremal",
    )?;
    Ok(f.with_descriptor(format!(
        "c_extremal(C={}, p={p:?}, delta={delta:?}, x0={x0:?}, gamma={gamma:?})",
        c.label()
    )))
}

/// `Σ_k w_k exp(−(y − c_k)ᵀ A_k (y − c_k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub weight: f64,
    pub center: Vec<f64>,
    /// Row-major `n × n` symmetric positive definite matrix.
    pub matrix: Vec<f64>,
}

struct GaussianSum {
    n: usize,
    parts: Vec<(f64, Vec<f64>, DMatrix<f64>)>,
}

impl Field for GaussianSum {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        let mut g = vec![0.0; self.n];
        self.gradient(y, &mut g)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.n;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        let mut d = vec![0.0; n];
        for (w, c, a) in &self.parts {
            for i in 0..n {
                d[i] = y[i] - c[i];
            }
            let mut ad = vec![0.0; n];
            let mut quad = 0.0;
            for i in 0..n {
                let s: f64 = (0..n).map(|j| a[(i, j)] * d[j]).sum();
                ad[i] = s;
                quad += s * d[i];
            }
            let v = w * (-quad).exp();
            total += v;
            for i in 0..n {
                grad[i] -= 2.0 * v * ad[i];
            }
        }
        total
    }
}

/// Sum of anisotropic Gaussian bumps; a single isotropic-in-x bump is radial in `x`.
pub fn gaussian_sum(n: usize, bumps: &[GaussianBump]) -> Result<TestFunction> {
    if bumps.is_empty() {
        return Err(domain("need at least one bump"));
    }
    let mut parts = Vec::new();
    let mut scale: f64 = 0.0;
    let mut center = vec![0.0; n - 1];
    let mut total_weight = 0.0;
    for bump in bumps {
        if bump.center.len() != n || bump.matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bump.center.len(),
            });
        }
        let a = DMatrix::from_row_slice(n, n, &bump.matrix);
        let a = 0.5 * (&a + a.transpose());
        let eig = a.clone().symmetric_eigenvalues();
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lo > 0.0) {
            return Err(domain("Gaussian matrix must be positive definite"));
        }
        scale = scale.max(1.0 / lo.sqrt() + bump.center[0].abs());
        for i in 0..n - 1 {
            center[i] += bump.weight.abs() * bump.center[i + 1];
        }
        total_weight += bump.weight.abs();
        parts.push((bump.weight, bump.center.clone(), a));
    }
    center.iter_mut().for_each(|c| *c /= total_weight);
    for bump in bumps {
        let off: f64 = bump.center[1..]
            .iter()
            .zip(&center)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        scale = scale.max(off);
    }
    let f = TestFunction::new(
        Arc::new(GaussianSum { n, parts }),
        DecayProfile::rapid(scale),
        Chart::centered(&center),
        true,
        if bumps.len() == 1 {
            "gaussian"
        } else {
            "gaussian-mixture"
        },
    )?;
    Ok(f.with_descriptor(format!("gaussian_sum(n={n}, {:?})", bumps)))
}

struct Separable {
    n: usize,
    tau: f64,
    power: f64,
    m: DMatrix<f64>,
}

impl Field for Separable {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        let mut g = vec![0.0; self.n];
        self.gradient(y, &mut g)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let k = self.n - 1;
        let g = (-y[0] / self.tau).exp();
        let mx: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| self.m[(i, j)] * y[1 + j]).sum())
            .collect();
        let s = 1.0 + mx.iter().map(|c| c * c).sum::<f64>();
        let h = s.powf(-self.power);
        grad[0] = -g * h / self.tau;
        let dh = -2.0 * self.power * h / s;
        for j in 0..k {
            grad[1 + j] = g * dh * (0..k).map(|i| self.m[(i, j)] * mx[i]).sum::<f64>();
        }
        g * h
    }
}

/// `exp(−t/τ) (1 + |M x|^2)^{-b}`.
pub fn separable(n: usize, tau: f64, power: f64, m: DMatrix<f64>) -> Result<TestFunction> {
    if !(tau > 0.0) || !(power > 0.0) || m.nrows() != n - 1 || m.ncols() != n - 1 {
        return Err(domain(
            "separable profile needs τ > 0, b > 0 and an (n−1)×(n−1) matrix",
        ));
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular profile matrix".into()))?;
    let chart = Chart {
        t_scale: tau,
        center: vec![0.0; n - 1],
        linear: inv,
    };
    let desc = format!(
        "separable(n={n}, tau={tau:?}, b={power:?}, M={:?})",
        m.as_slice()
    );
    let f = TestFunction::new(
        Arc::new(Separable { n, tau, power, m }),
        DecayProfile::algebraic(2.0 * power, 1.0),
        chart,
        true,
        "separable",
    )?;
    Ok(f.with_descriptor(desc))
}

struct CompactBump {
    n: usize,
    center: Vec<f64>,
    a: DMatrix<f64>,
}

impl Field for CompactBump {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, y: &[f64]) -> f64 {
        let mut g = vec![0.0; self.n];
        self.gradient(y, &mut g)
    }

    fn gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.n;
        let d: Vec<f64> = (0..n).map(|i| y[i] - self.center[i]).collect();
        let ad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.a[(i, j)] * d[j]).sum())
            .collect();
        let s: f64 = ad.iter().zip(&d).map(|(a, b)| a * b).sum();
        if s >= 1.0 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 0.0;
        }
        let v = (1.0 - 1.0 / (1.0 - s)).exp();
        let ds = -v / ((1.0 - s) * (1.0 - s));
        for i in 0..n {
            grad[i] = 2.0 * ds * ad[i];
        }
        v
    }
}

/// `exp(1 − 1/(1 − ⟨A(y−c), y−c⟩))` inside the ellipsoid, zero outside:
/// smooth with compact support.
pub fn compact_bump(center: &[f64], a: DMatrix<f64>) -> Result<TestFunction> {
    let n = center.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.nrows(),
        });
    }
    let a = 0.5 * (&a + a.transpose());
    let lo = a
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) {
        return Err(domain("bump matrix must be positive definite"));
    }
    let reach = 1.0 / lo.sqrt();
    if center[0] <= -reach {
        return Err(Error::Degenerate("bump misses the half-space".into()));
    }
    let desc = format!("compact_bump(c={center:?}, A={:?})", a.as_slice());
    let decay = DecayProfile::rapid(reach + center[0].abs());
    let f = TestFunction::new(
        Arc::new(CompactBump {
            n,
            center: center.to_vec(),
            a,
        }),
        decay,
        Chart::centered(&center[1..]),
        true,
        "compact-bump",
    )?;
    Ok(f.with_descriptor(desc))
}
