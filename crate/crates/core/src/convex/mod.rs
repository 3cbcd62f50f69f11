//! Convex-body algebra: radial, support and gauge functions, polar bodies,
//! volumes, L_p centroid bodies, the Busemann–Petty gap, and Legendre
//! transforms of homogeneous convex functions.
//!
//! Bodies are stored by radial function. Support functions are exact when a
//! closed form is known (balls, ellipsoids, polytopes, polars) and otherwise
//! come from maximizing `⟨u, θ⟩ r_K(θ)` over a direction grid with local
//! refinement. Convexity is a caller precondition wherever it matters.

mod body;
mod centroid;
mod homogeneous;
mod polytope;
mod record;
mod search;

pub use body::{Ellipsoid, Regularity, SphereFn, StarBody};
pub use centroid::{abs_pow, bp_gap, centroid_body, centroid_support, CentroidSupport};
pub use homogeneous::{
    legendre, level_body, polar_legendre_check, GradientFn, HomogeneousConvex, Residuals, ScalarFn,
};
pub use record::BodyRecord;
pub use search::{
    brent_min, circle_points, direction_grid, fibonacci_points, maximize_on_sphere, DirectionGrid,
    SphereMax,
};

/// Free-function forms of the body operations.
pub fn support(k: &StarBody, u: &[f64]) -> f64 {
    k.support(u)
}

pub fn polar(k: &StarBody) -> StarBody {
    k.polar()
}

pub fn volume(k: &StarBody) -> f64 {
    k.volume()
}

/// Least-squares fit of `r_K(u)^{−2} ≈ uᵀMu` on sphere-rule nodes and the
/// largest relative radial misfit of the fitted ellipsoid. Zero exactly for
/// centred ellipsoids.
pub fn ellipsoid_fit_residual(k: &StarBody) -> crate::Result<f64> {
    use nalgebra::{DMatrix, DVector};
    let m = k.dim();
    let rule = crate::quadrature::sphere_rule(m, if m == 2 { 63 } else { 11 })?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let rows = rule.len();
    let radii: Vec<f64> = rule.iter().map(|(u, _)| k.radial(u)).collect();
    let a = DMatrix::from_fn(rows, pairs.len(), |r, c| {
        let u = rule.node(r);
        let (i, j) = pairs[c];
        if i == j {
            u[i] * u[i]
        } else {
            2.0 * u[i] * u[j]
        }
    });
    let b = DVector::from_iterator(rows, radii.iter().map(|r| r.powi(-2)));
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| crate::Error::Degenerate(e.to_string()))?;
    let mut worst: f64 = 0.0;
    for (r, rad) in radii.iter().enumerate() {
        let u = rule.node(r);
        let quad: f64 = pairs
            .iter()
            .zip(coef.iter())
            .map(|(&(i, j), c)| {
                if i == j {
                    c * u[i] * u[i]
                } else {
                    2.0 * c * u[i] * u[j]
                }
            })
            .sum();
        worst = worst.max((quad.powf(-0.5) / rad - 1.0).abs());
    }
    Ok(worst)
}
