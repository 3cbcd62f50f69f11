//! Star bodies stored by their radial function.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use super::polytope::{facets, polytope_vertices};
use super::search::{direction_grid, maximize_on_sphere, SphereMax};
use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_legendre, sphere_rule, Domain, QuadratureRule};

/// Function on the unit sphere (or a homogeneous function evaluated there).
pub type SphereFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How smooth the radial function is; decides how densely it is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Smooth,
    Piecewise,
}

struct Inner {
    dim: usize,
    radial: SphereFn,
    symmetric: bool,
    regularity: Regularity,
    /// exact support function when one is known in closed form
    support: Option<SphereFn>,
    /// facet normals when the body is a symmetric polytope
    normals: Option<Vec<Vec<f64>>>,
    label: String,
    grid_radii: OnceLock<Vec<f64>>,
    samples: OnceLock<(QuadratureRule, Vec<f64>)>,
}

/// A body `K ⊂ R^m` star-shaped about the origin, given by `r_K` on `S^{m-1}`.
///
/// Cloning is cheap; cached grid samples are shared between clones.
#[derive(Clone)]
pub struct StarBody {
    inner: Arc<Inner>,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody")
            .field("dim", &self.inner.dim)
            .field("label", &self.inner.label)
            .field("symmetric", &self.inner.symmetric)
            .field("regularity", &self.inner.regularity)
            .finish()
    }
}

fn unit(y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    (n, y.iter().map(|c| c / n).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl StarBody {
    /// Body with an arbitrary radial function; `radial` receives unit vectors.
    pub fn from_radial(
        dim: usize,
        radial: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        symmetric: bool,
        regularity: Regularity,
    ) -> Self {
        Self::build(
            dim,
            Arc::new(radial),
            symmetric,
            regularity,
            None,
            None,
            "custom",
        )
    }

    fn build(
        dim: usize,
        radial: SphereFn,
        symmetric: bool,
        regularity: Regularity,
        support: Option<SphereFn>,
        normals: Option<Vec<Vec<f64>>>,
        label: &str,
    ) -> Self {
        assert!(dim >= 2, "bodies live in R^m with m >= 2");
        StarBody {
            inner: Arc::new(Inner {
                dim,
                radial,
                symmetric,
                regularity,
                support,
                normals,
                label: label.to_string(),
                grid_radii: OnceLock::new(),
                samples: OnceLock::new(),
            }),
        }
    }

    /// Convex body known through its support function `h` (on unit vectors).
    /// The radial function is `1 / max_u ⟨θ, u⟩ / h(u)`.
    pub fn from_support(
        dim: usize,
        support: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        symmetric: bool,
    ) -> Self {
        let h: SphereFn = Arc::new(support);
        let hh = h.clone();
        let dual = StarBody::build(
            dim,
            Arc::new(move |u| 1.0 / hh(u)),
            symmetric,
            Regularity::Smooth,
            None,
            None,
            "dual",
        );
        let radial = move |u: &[f64]| 1.0 / dual.support_by_search(u);
        Self::build(
            dim,
            Arc::new(radial),
            symmetric,
            Regularity::Smooth,
            Some(h),
            None,
            "support",
        )
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        Self::build(
            dim,
            Arc::new(move |_| radius),
            true,
            Regularity::Smooth,
            Some(Arc::new(move |_| radius)),
            None,
            "ball",
        )
    }

    /// `{y : |⟨a_i, y⟩| ≤ 1 for all i}`; the normals must span `R^m`.
    pub fn polytope(normals: &[Vec<f64>]) -> Result<Self> {
        let dim = normals
            .first()
            .map(|a| a.len())
            .ok_or_else(|| domain("no facet normals"))?;
        if dim < 2 || normals.iter().any(|a| a.len() != dim) {
            return Err(domain("facet normals must share a dimension >= 2"));
        }
        let rank = DMatrix::from_fn(normals.len(), dim, |i, j| normals[i][j]).rank(1e-10);
        if rank < dim {
            return Err(Error::Degenerate(
                "facet normals do not span; body is unbounded".into(),
            ));
        }
        let vertices = polytope_vertices(normals);
        let a: Vec<Vec<f64>> = normals.to_vec();
        let radial = move |u: &[f64]| 1.0 / a.iter().map(|ai| dot(ai, u).abs()).fold(0.0, f64::max);
        let support = move |u: &[f64]| vertices.iter().map(|v| dot(v, u)).fold(f64::MIN, f64::max);
        Ok(Self::build(
            dim,
            Arc::new(radial),
            true,
            Regularity::Piecewise,
            Some(Arc::new(support)),
            Some(normals.to_vec()),
            "polytope",
        ))
    }

    /// Axis-parallel box `Π [-a_i, a_i]`.
    pub fn cuboid(half_widths: &[f64]) -> Result<Self> {
        if half_widths.iter().any(|&a| !(a > 0.0)) {
            return Err(domain("box half-widths must be positive"));
        }
        let m = half_widths.len();
        let normals: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { 1.0 / half_widths[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self::polytope(&normals)?.relabel("box"))
    }

    fn relabel(self, label: &str) -> Self {
        let i = &self.inner;
        Self::build(
            i.dim,
            i.radial.clone(),
            i.symmetric,
            i.regularity,
            i.support.clone(),
            i.normals.clone(),
            label,
        )
    }

    /// Copy of the body with a descriptive label.
    pub fn with_label(self, label: &str) -> Self {
        self.relabel(label)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.inner.symmetric
    }

    pub fn regularity(&self) -> Regularity {
        self.inner.regularity
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// Facet normals `a_i` when the body is `{|⟨a_i, y⟩| ≤ 1}`.
    pub(crate) fn normals(&self) -> Option<&[Vec<f64>]> {
        self.inner.normals.as_deref()
    }

    pub fn has_exact_support(&self) -> bool {
        self.inner.support.is_some()
    }

    /// `r_K(u)` for a unit vector `u`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        (self.inner.radial)(u)
    }

    /// `r_K` at `y / |y|` for any nonzero `y`.
    pub fn radial_at(&self, y: &[f64]) -> f64 {
        let (_, u) = unit(y);
        self.radial(&u)
    }

    /// Minkowski gauge `‖y‖_K = |y| / r_K(y/|y|)`.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        let (n, u) = unit(y);
        if n == 0.0 {
            return 0.0;
        }
        n / self.radial(&u)
    }

    /// Radial values on the shared direction grid, computed once.
    pub fn grid_radii(&self) -> &[f64] {
        self.inner.grid_radii.get_or_init(|| {
            direction_grid(self.dim())
                .iter()
                .map(|u| self.radial(u))
                .collect()
        })
    }

    /// `h_K(u) = max_{z ∈ K} ⟨u, z⟩`; exact when known, otherwise by search.
    pub fn support(&self, u: &[f64]) -> f64 {
        match &self.inner.support {
            Some(h) => {
                let (n, v) = unit(u);
                n * h(&v)
            }
            None => self.support_by_search(u),
        }
    }

    /// Support function by maximizing `⟨u, θ⟩ r_K(θ)` over the sphere,
    /// ignoring any closed form.
    pub fn support_by_search(&self, u: &[f64]) -> f64 {
        self.support_point(u).value
    }

    /// Maximizer of `⟨u, θ⟩ r_K(θ)` together with the maximum.
    pub fn support_point(&self, u: &[f64]) -> SphereMax {
        let grid = direction_grid(self.dim());
        let radii = self.grid_radii();
        maximize_on_sphere(
            &grid,
            |i, th| dot(u, th) * radii[i],
            |th| dot(u, th) * self.radial(th),
        )
    }

    /// Polar body: `r_{K°} = 1 / h_K`, and `h_{K°} = 1 / r_K` for convex `K`.
    pub fn polar(&self) -> StarBody {
        let k = self.clone();
        let k2 = self.clone();
        Self::build(
            self.dim(),
            Arc::new(move |u| 1.0 / k.support(u)),
            self.is_symmetric(),
            self.regularity(),
            Some(Arc::new(move |u| 1.0 / k2.radial(u))),
            None,
            &format!("polar({})", self.label()),
        )
    }

    /// `λ K` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> StarBody {
        let k = self.clone();
        let support = self
            .inner
            .support
            .clone()
            .map(|h| -> SphereFn { Arc::new(move |u: &[f64]| lambda * h(u)) });
        Self::build(
            self.dim(),
            Arc::new(move |u| lambda * k.radial(u)),
            self.is_symmetric(),
            self.regularity(),
            support,
            self.inner.normals.as_ref().map(|ns| {
                ns.iter()
                    .map(|a| a.iter().map(|c| c / lambda).collect())
                    .collect()
            }),
            &format!("{}*{}", lambda, self.label()),
        )
    }

    /// `T K` for an invertible matrix `T`.
    pub fn linear_image(&self, t: &DMatrix<f64>) -> Result<StarBody> {
        let m = self.dim();
        if t.nrows() != m || t.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: t.nrows(),
            });
        }
        let inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular map".into()))?;
        let k = self.clone();
        let radial = move |u: &[f64]| {
            let y = &inv * DVector::from_column_slice(u);
            1.0 / k.gauge(y.as_slice())
        };
        let support = self.inner.support.clone().map(|h| -> SphereFn {
            let tt = t.transpose();
            Arc::new(move |u: &[f64]| {
                let v = &tt * DVector::from_column_slice(u);
                let (n, w) = unit(v.as_slice());
                n * h(&w)
            })
        });
        if let Some(ns) = &self.inner.normals {
            // ⟨a, T^{-1} y⟩ = ⟨T^{-T} a, y⟩
            let inv_t = t.clone().try_inverse().expect("checked above").transpose();
            let moved: Vec<Vec<f64>> = ns
                .iter()
                .map(|a| (&inv_t * DVector::from_column_slice(a)).as_slice().to_vec())
                .collect();
            return Ok(Self::polytope(&moved)?.relabel(&format!("T({})", self.label())));
        }
        Ok(Self::build(
            m,
            Arc::new(radial),
            self.is_symmetric(),
            self.regularity(),
            support,
            None,
            &format!("T({})", self.label()),
        ))
    }

    /// Quadrature rule on the sphere suited to this body, with `r_K` at its nodes.
    ///
    /// Polytopes in the plane get Gauss–Legendre panels between the corners,
    /// polytopes in space get Gauss rules on radially projected facet
    /// triangles; otherwise the rule density follows the regularity hint.
    pub fn integration_samples(&self) -> (&QuadratureRule, &[f64]) {
        let (rule, radii) = self.inner.samples.get_or_init(|| {
            let rule = self.integration_rule();
            let radii = rule.iter().map(|(u, _)| self.radial(u)).collect();
            (rule, radii)
        });
        (rule, radii)
    }

    fn integration_rule(&self) -> QuadratureRule {
        let m = self.dim();
        if let Some(normals) = &self.inner.normals {
            let vertices = polytope_vertices(normals);
            if m == 2 {
                let kinks: Vec<f64> = vertices.iter().map(|v| v[1].atan2(v[0])).collect();
                return panel_circle_rule(&kinks, 24, PI / 16.0);
            }
            if m == 3 {
                return facet_rule(normals, &vertices, 12);
            }
        }
        let order = match (m, self.regularity()) {
            (2, Regularity::Smooth) => 511,
            (2, Regularity::Piecewise) => 16383,
            (3, Regularity::Smooth) => 47,
            (3, Regularity::Piecewise) => 127,
            (_, Regularity::Smooth) => 23,
            (_, Regularity::Piecewise) => 39,
        };
        sphere_rule(m, order).expect("orders below the maximum")
    }

    /// `vol(K) = (1/m) ∫ r_K^m`.
    pub fn volume(&self) -> f64 {
        let m = self.dim() as i32;
        let (rule, radii) = self.integration_samples();
        rule.weights
            .iter()
            .zip(radii)
            .map(|(w, r)| w * r.powi(m))
            .sum::<f64>()
            / m as f64
    }

    /// `∫_{K ∩ {y_1 > 0}} y_1^exponent dy` on the hemisphere rule of the given order.
    pub fn moment_plus(&self, exponent: f64, order: usize) -> Result<f64> {
        crate::quadrature::moment_over_body_plus(self.dim(), |u| self.radial(u), exponent, order)
    }

    /// Largest relative violation of `‖θ‖_K · r_K(θ) = 1` on the direction grid.
    pub fn gauge_radial_residual(&self) -> f64 {
        direction_grid(self.dim())
            .iter()
            .map(|u| (self.gauge(u) * self.radial(u) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Composite Gauss–Legendre on the circle with panel breaks at `breaks`.
fn panel_circle_rule(breaks: &[f64], per_panel: usize, max_len: f64) -> QuadratureRule {
    let mut cuts: Vec<f64> = breaks.iter().map(|b| b.rem_euclid(2.0 * PI)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    let first = cuts[0];
    cuts.push(first + 2.0 * PI);
    let gl = gauss_legendre(per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = ((b - a) / max_len).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for k in 0..pieces {
            let lo = a + k as f64 * h;
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let phi = lo + 0.5 * h * (x + 1.0);
                nodes.push(phi.cos());
                nodes.push(phi.sin());
                weights.push(0.5 * h * w);
            }
        }
    }
    QuadratureRule {
        domain: Domain::Sphere,
        dimension: 2,
        nodes,
        weights,
    }
}

/// Sphere rule adapted to a polytope in `R^3`: each facet is fanned into
/// triangles, each triangle carries a collapsed Gauss product rule, and the
/// nodes are projected to the sphere with the solid-angle density
/// `d / |x|^3` (`d` the facet's distance from the origin). Against `r_K^{3+p}`
/// this density leaves `d |⟨u, x⟩|^p` on the facet, so volumes and even
/// moments come out exact.
fn facet_rule(normals: &[Vec<f64>], vertices: &[Vec<f64>], k: usize) -> QuadratureRule {
    let gl = gauss_legendre(k);
    let pts: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for face in facets(normals, vertices) {
        let p0 = &face.verts[0];
        for j in 1..face.verts.len() - 1 {
            let (p1, p2) = (&face.verts[j], &face.verts[j + 1]);
            let b: Vec<f64> = p1.iter().zip(p0).map(|(x, y)| x - y).collect();
            let cc: Vec<f64> = p2.iter().zip(p0).map(|(x, y)| x - y).collect();
            let cross = [
                b[1] * cc[2] - b[2] * cc[1],
                b[2] * cc[0] - b[0] * cc[2],
                b[0] * cc[1] - b[1] * cc[0],
            ];
            let jac = dot(&cross, &cross).sqrt();
            for &(xi, wx) in &pts {
                for &(eta, we) in &pts {
                    let v = (1.0 - xi) * eta;
                    let x: Vec<f64> = (0..3).map(|i| p0[i] + xi * b[i] + v * cc[i]).collect();
                    let r = dot(&x, &x).sqrt();
                    nodes.extend(x.iter().map(|c| c / r));
                    weights.push(wx * we * (1.0 - xi) * jac * face.dist / (r * r * r));
                }
            }
        }
    }
    QuadratureRule {
        domain: Domain::Sphere,
        dimension: 3,
        nodes,
        weights,
    }
}

/// `{x : ⟨M x, x⟩ ≤ 1}` for a symmetric positive definite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let m = matrix.nrows();
        if m < 2 || matrix.ncols() != m {
            return Err(domain("ellipsoid matrix must be square of size >= 2"));
        }
        let sym = (&matrix - matrix.transpose()).amax();
        if sym > 1e-12 * matrix.amax() {
            return Err(domain("ellipsoid matrix must be symmetric"));
        }
        let eig = matrix.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(domain("ellipsoid matrix must be positive definite"));
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| domain("singular matrix"))?;
        Ok(Ellipsoid { matrix, inverse })
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn with_axes(axes: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_iterator(
            axes.len(),
            axes.iter().map(|a| 1.0 / (a * a)),
        )))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn quad(m: &DMatrix<f64>, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        v.dot(&(m * &v))
    }

    pub fn radial(&self, u: &[f64]) -> f64 {
        1.0 / Self::quad(&self.matrix, u).sqrt()
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        Self::quad(&self.inverse, u).sqrt()
    }

    pub fn volume(&self) -> f64 {
        crate::constants::omega(self.dim() as f64).expect("dimension is positive")
            / self.matrix.determinant().sqrt()
    }

    /// The polar ellipsoid `{⟨M^{-1} x, x⟩ ≤ 1}`.
    pub fn polar(&self) -> Ellipsoid {
        Ellipsoid {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    /// Star body with closed-form radial and support functions.
    pub fn to_body(&self) -> StarBody {
        let a = self.matrix.clone();
        let b = self.inverse.clone();
        StarBody::build(
            self.dim(),
            Arc::new(move |u| 1.0 / Self::quad(&a, u).sqrt()),
            true,
            Regularity::Smooth,
            Some(Arc::new(move |u| Self::quad(&b, u).sqrt())),
            None,
            "ellipsoid",
        )
    }

    /// Same body but without the closed-form support, so that support and
    /// polar go through the numerical search.
    pub fn to_radial_body(&self) -> StarBody {
        let a = self.matrix.clone();
        StarBody::from_radial(
            self.dim(),
            move |u| 1.0 / Self::quad(&a, u).sqrt(),
            true,
            Regularity::Smooth,
        )
        .with_label("ellipsoid")
    }
}
