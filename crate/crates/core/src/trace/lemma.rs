//! The optimal constant `K_{n,C}` of the trace inequality with a general
//! convex function, and the ratio that inequality bounds by one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::function::TestFunction;
use super::norms::{Analysis, GradientSamples};
use crate::constants::Dimensions;
use crate::convex::{legendre, HomogeneousConvex};
use crate::error::{domain, Result};
use crate::quadrature::{hemisphere_rule, weighted_hemisphere_rule, Orders};

/// `K_{n,C}` by two routes, which must agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1 {
    /// From the half-body moment `M = ∫_{(K_C)_+} y_1^{q(n−1)−n} dy`.
    pub route_a: f64,
    /// From the spherical integral `I = ∫_{S^{n−1}_+} θ_1^{q(n−1)−n} C(θ)^{1−n} dθ`.
    pub route_b: f64,
    pub moment: f64,
    pub spherical: f64,
}

impl Lemma1 {
    pub fn value(&self) -> f64 {
        self.route_b
    }

    pub fn agreement(&self) -> f64 {
        (self.route_a / self.route_b - 1.0).abs()
    }
}

fn hemisphere_order(n: usize) -> usize {
    match n {
        3 => 63,
        4 => 31,
        _ => 15,
    }
}

/// `K_{n,C}` for a `q`-homogeneous convex `C` on `R^n`, `q = p/(p−1)`.
///
/// Route B integrates `C^{1−n}` against the exact weight `θ_1^a` with a
/// Gauss–Jacobi hemisphere rule. Route A integrates `y_1^a` over the half
/// body `{C ≤ 1, y_1 > 0}` with an unweighted hemisphere rule and the
/// radial integral in closed form, so the two share no nodes.
pub fn lemma1_constant(c: &HomogeneousConvex, p: f64) -> Result<Lemma1> {
    let n = c.dim();
    let dims = Dimensions::new(n, p)?;
    let q = dims.q();
    if (c.degree() - q).abs() > 1e-12 {
        return Err(domain(format!(
            "C must be {q}-homogeneous for p = {p}, got degree {}",
            c.degree()
        )));
    }
    let nf = n as f64;
    let a = q * (nf - 1.0) - nf;
    // a > −1 always: q(n−1) − n + 1 = (q−1)(n−1) > 0
    let order = hemisphere_order(n);
    let spherical = weighted_hemisphere_rule(n, order, a)?.integrate(|u| c.eval(u).powf(1.0 - nf));
    let k = a + nf;
    let unweighted = hemisphere_rule(n, order + 32)?;
    let moment = unweighted.integrate(|u| u[0].powf(a) * c.eval(u).powf(-k / q)) / k;
    let lead = p.powf(p) * (nf - p).powf(-p / q);
    let e = -p / (q * (nf - 1.0));
    Ok(Lemma1 {
        route_a: lead * (q * (nf - 1.0)).powf(e) * moment.powf(e),
        route_b: lead * spherical.powf(e),
        moment,
        spherical,
    })
}

/// A convex function together with its Legendre transform.
#[derive(Debug, Clone)]
pub struct ConjugatePair {
    pub c: HomogeneousConvex,
    pub cstar: HomogeneousConvex,
}

impl ConjugatePair {
    pub fn new(c: HomogeneousConvex, cstar: HomogeneousConvex) -> Result<Self> {
        if c.dim() != cstar.dim() || (c.dual_degree() - cstar.degree()).abs() > 1e-12 {
            return Err(domain(
                "C and C* must live on the same space with conjugate degrees",
            ));
        }
        Ok(ConjugatePair { c, cstar })
    }

    /// `C = coeff |y|^q`, `C*(x) = (coeff q)^{1−p} |x|^p / p`.
    pub fn euclidean(n: usize, q: f64, coeff: f64) -> Result<Self> {
        let p = q / (q - 1.0);
        let c = HomogeneousConvex::euclidean_power(n, q, coeff)?;
        let cstar = HomogeneousConvex::euclidean_power(n, p, (coeff * q).powf(1.0 - p) / p)?;
        Self::new(c, cstar)
    }

    /// `C = ⟨My, y⟩`, `C*(x) = ⟨M^{−1}x, x⟩ / 4`.
    pub fn quadratic(m: DMatrix<f64>) -> Result<Self> {
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| domain("singular matrix"))?
            / 4.0;
        let inv = 0.5 * (&inv + inv.transpose());
        Self::new(
            HomogeneousConvex::quadratic(m)?,
            HomogeneousConvex::quadratic(inv)?,
        )
    }

    /// `C*` by numerical Legendre transform.
    pub fn numeric(c: HomogeneousConvex) -> Result<Self> {
        let cstar = legendre(&c)?;
        Self::new(c, cstar)
    }
}

/// Outcome of the trace inequality with a general convex function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NazaretRatio {
    pub trace: f64,
    pub constant: f64,
    /// `∫_{R^n_+} C*(∇f)`
    pub energy: f64,
    /// `trace / (constant · energy)`
    pub ratio: f64,
}

/// `trace_norm(f) / (K_{n,C} ∫ C*(∇f))` with `C*` by numerical Legendre transform.
pub fn nazaret_ratio(f: &TestFunction, c: &HomogeneousConvex, p: f64) -> Result<NazaretRatio> {
    let pair = ConjugatePair::numeric(c.clone())?;
    nazaret_ratio_with(&Analysis::new(f, p)?, &pair)
}

/// Same ratio for an already analysed function and a known conjugate pair.
pub fn nazaret_ratio_with(a: &Analysis, pair: &ConjugatePair) -> Result<NazaretRatio> {
    let constant = lemma1_constant(&pair.c, a.p())?.value();
    let energy = a.samples.integrate(|g| pair.cstar.eval(g)).value;
    Ok(NazaretRatio {
        trace: a.trace,
        constant,
        energy,
        ratio: a.trace / (constant * energy),
    })
}

/// `∫_{R^n_+} C*(∇f)` on fresh samples.
pub fn convex_energy(f: &TestFunction, cstar: &HomogeneousConvex, p: f64) -> Result<f64> {
    let samples = GradientSamples::new(f, p, Orders::default_for(f.n()))?;
    Ok(samples.integrate(|g| cstar.eval(g)).value)
}
