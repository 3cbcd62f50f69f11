//! L_p centroid bodies and the Busemann–Petty centroid gap.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::body::{dot, Ellipsoid, Regularity, StarBody};
use super::polytope::{abs_linear_moment, facets, polytope_vertices, Facet};
use crate::constants::norm_a;
use crate::error::{domain, Result};
use crate::quadrature::{sphere_rule, weighted_hemisphere_rule, QuadratureRule};

/// `|x|^p` with fast paths for the exponents that show up most.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 1.5 {
        a * a.sqrt()
    } else if p == 2.5 {
        a * a * a.sqrt()
    } else {
        a.powf(p)
    }
}

/// Support function `h_{Γ_p K}`.
///
/// Three evaluation strategies share one normalization:
///
/// * fixed: `h(u)^p = Σ_j c_j |⟨u, ξ_j⟩|^p` over a sphere rule. Exact at
///   `p = 2`; otherwise the kink of `|⟨u, ξ⟩|^p` across `u^⊥` limits it to
///   algebraic accuracy.
/// * polytope: the body integral in closed form, facet by facet.
/// * rotated (smooth bodies): a hemisphere rule carrying the weight
///   `θ_1^{p-2}` is reflected onto the pole `u`, which integrates the kink
///   exactly and the rest spectrally. The same samples give the gradient and
///   Hessian of `h`, hence the volume of `Γ_p K` through its curvature.
#[derive(Clone)]
pub struct CentroidSupport {
    dim: usize,
    p: f64,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Fixed {
        nodes: Vec<f64>,
        coeffs: Vec<f64>,
    },
    Polytope {
        facets: Arc<Vec<Facet>>,
        norm: f64,
    },
    Rotated {
        body: StarBody,
        rule: Arc<QuadratureRule>,
        norm: f64,
    },
}

impl std::fmt::Debug for CentroidSupport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Fixed { .. } => "fixed",
            Kind::Polytope { .. } => "polytope",
            Kind::Rotated { .. } => "rotated",
        };
        f.debug_struct("CentroidSupport")
            .field("dim", &self.dim)
            .field("p", &self.p)
            .field("kind", &kind)
            .finish()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("centroid bodies need p > 1, got {p}")));
    }
    Ok(())
}

/// Samples of `h^p` and its first two derivatives at one direction, from the rotated rule.
struct Jet {
    /// `h(u)^p`
    value: f64,
    /// tangential gradient of `h^p` in the frame `H e_2, …, H e_m`
    grad: Vec<f64>,
    /// tangential Hessian of `h^p` in the same frame
    hess: DMatrix<f64>,
}

impl CentroidSupport {
    /// Coefficients `c_j = w_j ρ_j^{m+p} / ((m + p) a_{m,p} vol)` from a
    /// quadrature of directions with weights `w` and radii `ρ`.
    pub fn new(
        dim: usize,
        p: f64,
        nodes: Vec<f64>,
        weights: &[f64],
        radii: &[f64],
        volume: f64,
    ) -> Result<Self> {
        check_p(p)?;
        let norm = (dim as f64 + p) * norm_a(dim, p)? * volume;
        let coeffs = weights
            .iter()
            .zip(radii)
            .map(|(w, r)| w * r.powf(dim as f64 + p) / norm)
            .collect();
        Ok(CentroidSupport {
            dim,
            p,
            kind: Kind::Fixed { nodes, coeffs },
        })
    }

    /// Rotated-rule support for `Γ_p K` with a hemisphere rule of the given order.
    pub fn rotated(k: &StarBody, p: f64, order: usize) -> Result<Self> {
        check_p(p)?;
        let dim = k.dim();
        let rule = Arc::new(weighted_hemisphere_rule(dim, order, p - 2.0)?);
        let norm = norm_a(dim, p)? * k.volume();
        Ok(CentroidSupport {
            dim,
            p,
            kind: Kind::Rotated {
                body: k.clone(),
                rule,
                norm,
            },
        })
    }

    /// Closed-form support for a polytope in `R^2` or `R^3`.
    fn polytope(k: &StarBody, normals: &[Vec<f64>], p: f64) -> Result<Self> {
        check_p(p)?;
        let dim = k.dim();
        let facets = Arc::new(facets(normals, &polytope_vertices(normals)));
        let norm = norm_a(dim, p)? * k.volume();
        Ok(CentroidSupport {
            dim,
            p,
            kind: Kind::Polytope { facets, norm },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let s = match &self.kind {
            Kind::Fixed { nodes, coeffs } => nodes
                .chunks_exact(self.dim)
                .zip(coeffs)
                .map(|(xi, c)| c * abs_pow(dot(u, xi), self.p))
                .sum::<f64>(),
            Kind::Polytope { facets, norm } => abs_linear_moment(facets, u, self.p) / norm,
            Kind::Rotated { .. } => self.jet(u, false).value,
        };
        s.powf(1.0 / self.p)
    }

    /// `∫_{S^{m-1}} |⟨u, ζ⟩|^p r_K(ζ)^{m+p} dζ / ((m+p) a vol)` and, when asked,
    /// its tangential derivatives. With `H` the reflection taking `e_1` to `u`
    /// and `ζ = ±Hξ`, one has `⟨u, ζ⟩ = ±ξ_1` and the tangential coordinates of
    /// `Hξ` are `ξ_2, …, ξ_m`.
    fn jet(&self, u: &[f64], derivatives: bool) -> Jet {
        let Kind::Rotated { body, rule, norm } = &self.kind else {
            unreachable!("jet is only used by the rotated strategy")
        };
        let m = self.dim;
        let p = self.p;
        let e = m as f64 + p;
        // v = e_1 - u; H x = x - 2 v ⟨v, x⟩ / |v|^2
        let mut v: Vec<f64> = u.iter().map(|x| -x).collect();
        v[0] += 1.0;
        let vv = dot(&v, &v);
        let mut y = vec![0.0; m];
        let mut neg = vec![0.0; m];
        let mut value = 0.0;
        let mut grad = vec![0.0; m - 1];
        let mut hess = DMatrix::zeros(m - 1, m - 1);
        for (xi, w) in rule.iter() {
            let s = if vv > 1e-28 {
                2.0 * dot(&v, xi) / vv
            } else {
                0.0
            };
            for i in 0..m {
                y[i] = xi[i] - s * v[i];
                neg[i] = -y[i];
            }
            let a = body.radial(&y).powf(e);
            let b = if body.is_symmetric() {
                a
            } else {
                body.radial(&neg).powf(e)
            };
            let g = w * (a + b);
            let z = xi[0];
            value += g * z * z;
            if derivatives {
                for k in 1..m {
                    grad[k - 1] += g * z * xi[k];
                    for l in 1..m {
                        hess[(k - 1, l - 1)] += g * xi[k] * xi[l];
                    }
                }
            }
        }
        let scale = 1.0 / ((m as f64 + p) * norm);
        Jet {
            value: value * scale,
            grad: grad.iter().map(|x| x * p * scale).collect(),
            hess: hess * (p * (p - 1.0) * scale),
        }
    }

    /// Second-moment matrix `(1/((m+2) a vol)) ∫_S ξ ξᵀ r^{m+2}` from the
    /// fixed rule; at `p = 2` the support is `√(uᵀ M u)`.
    pub fn moment_matrix(&self) -> Option<DMatrix<f64>> {
        let Kind::Fixed { nodes, coeffs } = &self.kind else {
            return None;
        };
        let m = self.dim;
        let mut mat = DMatrix::zeros(m, m);
        for (xi, c) in nodes.chunks_exact(m).zip(coeffs) {
            for i in 0..m {
                for j in 0..m {
                    mat[(i, j)] += c * xi[i] * xi[j];
                }
            }
        }
        Some(mat)
    }

    /// The body with this support function. At `p = 2` it is the ellipsoid
    /// `{⟨M^{-1} x, x⟩ ≤ 1}` with closed-form radial function.
    pub fn into_body(self) -> Result<StarBody> {
        if self.p == 2.0 {
            if let Some(m) = self.moment_matrix() {
                let inv = m
                    .try_inverse()
                    .ok_or_else(|| domain("degenerate moment matrix"))?;
                let sym = 0.5 * (&inv + inv.transpose());
                return Ok(Ellipsoid::new(sym)?.to_body().with_label("centroid"));
            }
        }
        let dim = self.dim;
        let h = Arc::new(self);
        Ok(StarBody::from_support(dim, move |u| h.eval(u), true).with_label("centroid"))
    }

    /// `vol(Γ_p K)`.
    ///
    /// The rotated strategy integrates `(1/m) h det(D²h|_{u^⊥})` over the
    /// sphere, which avoids inverting the support function; the others build
    /// the body and integrate its radial function.
    pub fn volume(&self) -> Result<f64> {
        if !matches!(self.kind, Kind::Rotated { .. }) {
            return Ok(self.clone().into_body()?.volume());
        }
        let m = self.dim;
        let p = self.p;
        let order = match m {
            2 => 255,
            3 => 47,
            _ => 23,
        };
        let outer = sphere_rule(m, order)?;
        let mut total = 0.0;
        for (u, w) in outer.iter() {
            let jet = self.jet(u, true);
            let hp = jet.value;
            let h = hp.powf(1.0 / p);
            // D²(H^{1/p}) = (1/p) H^{1/p-1} (D²H + (1/p - 1) ∇H ∇Hᵀ / H)
            let mut t = jet.hess.clone();
            for k in 0..m - 1 {
                for l in 0..m - 1 {
                    t[(k, l)] += (1.0 / p - 1.0) * jet.grad[k] * jet.grad[l] / hp;
                }
            }
            t *= h / (p * hp);
            total += w * h * t.determinant();
        }
        Ok(total / m as f64)
    }
}

/// Hemisphere order of the rotated rule, by dimension.
fn rotated_order(m: usize) -> usize {
    match m {
        2 => 96,
        3 => 47,
        _ => 15,
    }
}

/// `Γ_p K`, normalized so that `Γ_p B = B`:
/// `h^p(u) = (1 / (a_{m,p} vol K)) ∫_K |⟨u, z⟩|^p dz`, the body integral being
/// `(1/(m+p)) ∫_{S^{m-1}} |⟨u, ξ⟩|^p r_K(ξ)^{m+p} dξ`.
///
/// Polytopes in the plane and in space use the closed form, `p = 2` and
/// piecewise-smooth bodies the fixed rule, other smooth bodies the rotated one.
pub fn centroid_support(k: &StarBody, p: f64) -> Result<CentroidSupport> {
    if let Some(normals) = k.normals() {
        if p != 2.0 && k.dim() <= 3 {
            return CentroidSupport::polytope(k, normals, p);
        }
    } else if p != 2.0 && k.regularity() == Regularity::Smooth {
        return CentroidSupport::rotated(k, p, rotated_order(k.dim()));
    }
    let (rule, radii) = k.integration_samples();
    CentroidSupport::new(
        k.dim(),
        p,
        rule.nodes.clone(),
        &rule.weights,
        radii,
        k.volume(),
    )
}

pub fn centroid_body(k: &StarBody, p: f64) -> Result<StarBody> {
    centroid_support(k, p)?.into_body()
}

/// `vol(Γ_p K) / vol(K) − 1`; nonnegative, zero exactly for centred ellipsoids.
pub fn bp_gap(k: &StarBody, p: f64) -> Result<f64> {
    Ok(centroid_support(k, p)?.volume()? / k.volume() - 1.0)
}
