//! Deterministic integration over spheres, hemispheres, the half-line and
//! the half-space.
//!
//! Integrals over `R^n_+` and `R^d` are taken in polar coordinates about the
//! origin: a (hemi)sphere rule for the direction and a mapped Gauss–Legendre
//! rule for the radius, with the radial map adapted to the declared decay of
//! the integrand.

mod gauss;
mod rules;

pub use gauss::{gauss_jacobi, gauss_legendre, GaussRule};
pub use rules::{
    halfline_rule, hemisphere_rule, sphere_rule, weighted_hemisphere_rule, DecayProfile, Domain,
    QuadratureRule, RadialMap, MAX_ORDER,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Relative size of the estimated tail beyond the last radial node that is
/// still accepted without raising the decay flag.
pub const TAIL_BUDGET: f64 = 1e-7;

/// Radial node count and angular polynomial degree of a polar product rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orders {
    pub radial: usize,
    pub angular: usize,
}

impl Orders {
    pub const fn new(radial: usize, angular: usize) -> Self {
        Orders { radial, angular }
    }

    /// Defaults tuned so that smooth integrands on `R^n_+` self-converge to
    /// about 1e-8; higher dimensions trade accuracy for node count.
    pub fn default_for(n: usize) -> Self {
        match n {
            0..=3 => Orders::new(96, 63),
            4 => Orders::new(64, 23),
            _ => Orders::new(48, 11),
        }
    }

    pub fn doubled(self) -> Self {
        Orders::new(2 * self.radial, 2 * self.angular + 1)
    }
}

/// Value of a polar-grid integral together with a tail indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    /// Estimate of the mass beyond the outermost radial node.
    pub tail_estimate: f64,
    /// False when the tail estimate exceeds [`TAIL_BUDGET`] relative to the value.
    pub decay_ok: bool,
}

/// Polar product grid over `R^n_+` (hemisphere directions) or `R^d`
/// (full sphere directions). Weights include `ρ^{d-1} dρ`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    shell: usize,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    decay: DecayProfile,
}

impl PolarGrid {
    /// Grid on the half-space `{y_1 > 0} ⊂ R^n` for an integrand with the given decay.
    pub fn halfspace(n: usize, decay: DecayProfile, orders: Orders) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("half-space needs n >= 2, got {n}")));
        }
        Self::build(hemisphere_rule(n, orders.angular)?, n, decay, orders.radial)
    }

    /// Grid on all of `R^d`.
    pub fn whole_space(d: usize, decay: DecayProfile, orders: Orders) -> Result<Self> {
        if d < 2 {
            return Err(domain(format!("polar grid needs d >= 2, got {d}")));
        }
        Self::build(sphere_rule(d, orders.angular)?, d, decay, orders.radial)
    }

    fn build(dirs: QuadratureRule, dim: usize, decay: DecayProfile, radial: usize) -> Result<Self> {
        let map = RadialMap::for_decay(decay, dim)?;
        let rad = halfline_rule(radial, map);
        let shell = dirs.len();
        let mut points = Vec::with_capacity(rad.len() * shell * dim);
        let mut weights = Vec::with_capacity(rad.len() * shell);
        let mut radial_weights = Vec::with_capacity(rad.len());
        for (r, wr) in rad.iter() {
            let rho = r[0];
            let wr = wr * rho.powi(dim as i32 - 1);
            radial_weights.push(wr);
            for (u, wu) in dirs.iter() {
                points.extend(u.iter().map(|c| rho * c));
                weights.push(wr * wu);
            }
        }
        Ok(PolarGrid {
            dim,
            points,
            weights,
            shell,
            radii: rad.nodes,
            radial_weights,
            decay,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum `Σ w_i v_i` over precomputed node values, with the tail indicator.
    pub fn integrate_values(&self, values: &[f64]) -> Integral {
        assert_eq!(values.len(), self.len(), "one value per node");
        let value: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        let last = self.radii.len() - 1;
        let start = last * self.shell;
        let shell_mass: f64 = values[start..]
            .iter()
            .zip(&self.weights[start..])
            .map(|(v, w)| v * w)
            .sum();
        // shell density ρ^{d-1}∫ f dθ at the last node, extrapolated as ρ^{-(power - d)}
        let density =
            shell_mass / self.radial_weights[last] * self.radii[last].powi(self.dim as i32 - 1);
        let rho = self.radii[last];
        let tail = if self.decay.is_rapid() {
            (density * self.decay.scale).abs()
        } else {
            (density * rho / (self.decay.power - self.dim as f64)).abs()
        };
        let decay_ok = tail.is_finite() && tail <= TAIL_BUDGET * value.abs().max(f64::MIN_POSITIVE);
        Integral {
            value,
            tail_estimate: tail,
            decay_ok: decay_ok || value == 0.0 && tail == 0.0,
        }
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> Integral {
        let values: Vec<f64> = self.points().map(|(y, _)| f(y)).collect();
        self.integrate_values(&values)
    }
}

/// `∫_{R^n_+} f(t, x) dt dx` with `y = (t, x)` passed as one slice.
pub fn integrate_halfspace(
    f: impl Fn(&[f64]) -> f64,
    n: usize,
    decay: DecayProfile,
    orders: Orders,
) -> Result<Integral> {
    Ok(PolarGrid::halfspace(n, decay, orders)?.integrate(f))
}

/// `∫_{R^d} g(x) dx`.
pub fn integrate_whole_space(
    g: impl Fn(&[f64]) -> f64,
    d: usize,
    decay: DecayProfile,
    orders: Orders,
) -> Result<Integral> {
    Ok(PolarGrid::whole_space(d, decay, orders)?.integrate(g))
}

/// `∫_{K ∩ {y_1 > 0}} y_1^exponent dy` for a star body with radial function
/// `radial`, via `(1/(a+n)) ∫_{S^{n-1}_+} θ_1^a r_K(θ)^{a+n} dθ`.
pub fn moment_over_body_plus(
    n: usize,
    radial: impl Fn(&[f64]) -> f64,
    exponent: f64,
    order: usize,
) -> Result<f64> {
    if !(exponent > -1.0) {
        return Err(domain(format!(
            "y_1^{exponent} is not integrable near the boundary hyperplane"
        )));
    }
    let rule = weighted_hemisphere_rule(n, order, exponent)?;
    let k = exponent + n as f64;
    Ok(rule.integrate(|u| radial(u).powf(k)) / k)
}
