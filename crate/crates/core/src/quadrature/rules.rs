//! Product rules on spheres, hemispheres and the half-line.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gauss::{gauss_jacobi, gauss_legendre};
use crate::error::{domain, Error, Result};

/// Largest polynomial degree accepted by the sphere constructors.
pub const MAX_ORDER: usize = 16383;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Sphere,
    Hemisphere,
    Halfline,
    Product,
}

/// Nodes (flat, `dimension` coordinates each) and positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub domain: Domain,
    pub dimension: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes
            .chunks_exact(self.dimension)
            .zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Rule on `S^{m-1} ⊂ R^m` exact for polynomials of degree `≤ order`.
///
/// The circle uses the trapezoid rule; higher spheres split off the first
/// coordinate `z` with Gauss–Gegenbauer nodes for `(1 - z²)^{(m-3)/2}` and
/// recurse on `S^{m-2}` scaled by `√(1 - z²)`.
pub fn sphere_rule(m: usize, order: usize) -> Result<QuadratureRule> {
    if m < 2 {
        return Err(domain(format!("sphere rule needs m >= 2, got {m}")));
    }
    check_order(order)?;
    if m == 2 {
        let count = (order + 1).max(2);
        let mut nodes = Vec::with_capacity(2 * count);
        for k in 0..count {
            let phi = 2.0 * PI * k as f64 / count as f64;
            nodes.push(phi.cos());
            nodes.push(phi.sin());
        }
        let weights = vec![2.0 * PI / count as f64; count];
        return Ok(QuadratureRule {
            domain: Domain::Sphere,
            dimension: 2,
            nodes,
            weights,
        });
    }
    let a = (m as f64 - 3.0) / 2.0;
    let zr = gauss_jacobi(order / 2 + 1, a, a);
    let inner = sphere_rule(m - 1, order)?;
    let (nodes, weights) = lift(&zr.nodes, &zr.weights, &inner, m);
    Ok(QuadratureRule {
        domain: Domain::Sphere,
        dimension: m,
        nodes,
        weights,
    })
}

/// Rule on the open hemisphere `{θ ∈ S^{m-1} : θ_1 > 0}`.
pub fn hemisphere_rule(m: usize, order: usize) -> Result<QuadratureRule> {
    weighted_hemisphere_rule(m, order, 0.0)
}

/// Hemisphere rule whose weights already contain the factor `θ_1^exponent`.
///
/// The first coordinate is sampled with Gauss–Jacobi nodes for
/// `(1 - z)^{(m-3)/2} z^exponent`, so an exponent in `(-1, 0)` (an integrable
/// singularity at the equator) costs no accuracy. For odd `m` the rule is
/// exact on polynomials of degree `≤ order`; for even `m` the leftover factor
/// `(1 + z)^{(m-3)/2}` is analytic on `[0, 1]` and the error decays like `34^{-order/2}`.
pub fn weighted_hemisphere_rule(m: usize, order: usize, exponent: f64) -> Result<QuadratureRule> {
    if m < 2 {
        return Err(domain(format!("hemisphere rule needs m >= 2, got {m}")));
    }
    if !(exponent > -1.0) || !exponent.is_finite() {
        return Err(domain(format!(
            "θ_1^{exponent} is not integrable on the hemisphere"
        )));
    }
    check_order(order)?;
    let a = (m as f64 - 3.0) / 2.0;
    let rule = gauss_jacobi(order / 2 + 1, a, exponent);
    // x ∈ [-1, 1] ↦ z = (1 + x) / 2; the leftover (1 + z)^a is smooth on [0, 1]
    let scale = 2f64.powf(-a - exponent - 1.0);
    let z: Vec<f64> = rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
    let wz: Vec<f64> = rule
        .weights
        .iter()
        .zip(&z)
        .map(|(w, z)| w * scale * (1.0 + z).powf(a))
        .collect();
    let inner = if m == 2 {
        QuadratureRule {
            domain: Domain::Sphere,
            dimension: 1,
            nodes: vec![1.0, -1.0],
            weights: vec![1.0, 1.0],
        }
    } else {
        sphere_rule(m - 1, order)?
    };
    let (nodes, weights) = lift(&z, &wz, &inner, m);
    Ok(QuadratureRule {
        domain: Domain::Hemisphere,
        dimension: m,
        nodes,
        weights,
    })
}

fn lift(z: &[f64], wz: &[f64], inner: &QuadratureRule, m: usize) -> (Vec<f64>, Vec<f64>) {
    let count = z.len() * inner.len();
    let mut nodes = Vec::with_capacity(count * m);
    let mut weights = Vec::with_capacity(count);
    for (&zi, &wi) in z.iter().zip(wz) {
        let s = (1.0 - zi * zi).max(0.0).sqrt();
        for (u, wu) in inner.iter() {
            nodes.push(zi);
            nodes.extend(u.iter().map(|c| s * c));
            weights.push(wi * wu);
        }
    }
    (nodes, weights)
}

/// Change of variables `ρ = scale · ((1 - s)^{-exponent} - 1)` from `(0, 1)`
/// onto `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMap {
    pub scale: f64,
    pub exponent: f64,
}

impl RadialMap {
    /// Map adapted to an integrand decaying like `ρ^{-power}` over `R^dim`.
    ///
    /// With `e = power - dim`, the exponent `⌈e⌉ / e` turns the pulled-back
    /// tail `(1 - s)^{k e - 1}` into an integer power of `1 - s`.
    pub fn for_decay(decay: DecayProfile, dim: usize) -> Result<Self> {
        let excess = decay.power - dim as f64;
        if !(excess > 0.0) {
            return Err(Error::InsufficientDecay {
                power: decay.power,
                dim,
            });
        }
        if !(decay.scale > 0.0) || !decay.scale.is_finite() {
            return Err(domain(format!(
                "decay scale must be positive, got {}",
                decay.scale
            )));
        }
        let exponent = if excess.is_finite() {
            (excess.ceil() / excess).max(1.0)
        } else {
            1.0
        };
        Ok(RadialMap {
            scale: decay.scale,
            exponent,
        })
    }

    pub fn radius(&self, s: f64) -> f64 {
        self.scale * ((1.0 - s).powf(-self.exponent) - 1.0)
    }

    pub fn jacobian(&self, s: f64) -> f64 {
        self.scale * self.exponent * (1.0 - s).powf(-self.exponent - 1.0)
    }
}

/// Mapped Gauss–Legendre rule on `(0, ∞)`; weights include `dρ/ds`.
///
/// It is exact for integrands whose pull-back to `s ∈ (0, 1)` is a polynomial
/// of degree `≤ 2 count - 1`.
pub fn halfline_rule(count: usize, map: RadialMap) -> QuadratureRule {
    let gl = gauss_legendre(count.max(1));
    let mut nodes = Vec::with_capacity(gl.len());
    let mut weights = Vec::with_capacity(gl.len());
    for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
        let s = 0.5 * (1.0 + x);
        nodes.push(map.radius(s));
        weights.push(0.5 * w * map.jacobian(s));
    }
    QuadratureRule {
        domain: Domain::Halfline,
        dimension: 1,
        nodes,
        weights,
    }
}

/// Algebraic decay `|y|^{-power}` beyond the radius `scale`. An infinite
/// power stands for faster-than-algebraic decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub power: f64,
    pub scale: f64,
}

impl DecayProfile {
    pub fn algebraic(power: f64, scale: f64) -> Self {
        DecayProfile { power, scale }
    }

    pub fn rapid(scale: f64) -> Self {
        DecayProfile {
            power: f64::INFINITY,
            scale,
        }
    }

    /// Decay of `|g|^exponent` when `g` decays like this profile.
    pub fn raised(self, exponent: f64) -> Self {
        DecayProfile {
            power: self.power * exponent,
            scale: self.scale,
        }
    }

    /// Decay of a first derivative.
    pub fn differentiated(self) -> Self {
        DecayProfile {
            power: self.power + 1.0,
            scale: self.scale,
        }
    }

    pub fn is_rapid(&self) -> bool {
        self.power.is_infinite()
    }
}
