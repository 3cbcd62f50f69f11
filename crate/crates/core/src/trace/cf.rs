//! The convex function adapted to a test function.
//!
//! `C_f*(t, x) = (α_f/p)|t|^p + D_f*(x)` with
//! `D_f*(x) = ∫_{S^{n−2}} ‖∇_ξ f‖_p^{1−n−p} |⟨x, ξ⟩|^p dξ` and
//! `α_f = q ‖∂_t f‖_p^{−p} Z_p(f)^{1−n}`; `C_f` is its Legendre transform,
//! `K_f = {C_f ≤ 1}` and `K_{f,0}` the slice `t = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::function::TestFunction;
use super::norms::{Analysis, Directional, TrigSeries, CIRCLE_TABLE};
use crate::constants::Dimensions;
use crate::convex::{legendre, GradientFn, HomogeneousConvex, Regularity, StarBody};
use crate::error::Result;
use crate::quadrature::{gauss_legendre, sphere_rule, Integral};

#[derive(Debug, Clone)]
pub struct CfData {
    pub dims: Dimensions,
    pub analysis: Analysis,
    /// `α_f`
    pub alpha: f64,
    /// `Z_p(f)`
    pub zp: f64,
    /// `D_f*` on `R^{n−1}`
    pub dstar: HomogeneousConvex,
    /// `D_f`, the Legendre transform of `D_f*`
    pub d: HomogeneousConvex,
    /// `C_f*` on `R^n`
    pub cstar: HomogeneousConvex,
    /// `C_f`, computed as the numerical Legendre transform of `C_f*`
    pub c: HomogeneousConvex,
    /// `K_{f,0}`, from the slice `t = 0` of `{C_f ≤ 1}`
    pub k0: StarBody,
    /// `L_f`
    pub lf: StarBody,
}

/// Assembles [`CfData`] for `f` at exponent `p`.
pub fn build_cf(f: &TestFunction, p: f64) -> Result<CfData> {
    CfData::new(Analysis::new(f, p)?)
}

impl CfData {
    pub fn new(analysis: Analysis) -> Result<Self> {
        let dims = analysis.dims;
        let (n, p, q) = (dims.n(), dims.p(), dims.q());
        let zp = analysis.zp;
        let alpha = q * analysis.dt.powf(-p) * zp.powf(1.0 - n as f64);
        let (dstar, d) = match &analysis.directional {
            Directional::Gram(g) => {
                let qm = gram_moment(g);
                let inv = qm
                    .clone()
                    .try_inverse()
                    .expect("moment matrix of a nondegenerate f")
                    / 4.0;
                (
                    HomogeneousConvex::quadratic(qm)?.with_label("D_f*"),
                    HomogeneousConvex::quadratic(symmetrize(inv))?.with_label("D_f"),
                )
            }
            Directional::Circle(series, _) => {
                let ds = planar_dstar(series, p, n);
                let d = legendre(&ds)?.with_label("D_f");
                (ds, d)
            }
            other => {
                let ds = direct_dstar(other, p, n)?;
                let d = legendre(&ds)?.with_label("D_f");
                (ds, d)
            }
        };
        let cstar = HomogeneousConvex::split(alpha / p, &dstar)?.with_label("C_f*");
        let c = legendre(&cstar)?.with_label("C_f");
        let cc = c.clone();
        let k0 = StarBody::from_radial(
            n - 1,
            move |u| {
                let mut y = vec![0.0; u.len() + 1];
                y[1..].copy_from_slice(u);
                cc.eval(&y).powf(-1.0 / q)
            },
            true,
            Regularity::Smooth,
        )
        .with_label("K_f0");
        let lf = analysis.lf()?;
        Ok(CfData {
            dims,
            analysis,
            alpha,
            zp,
            dstar,
            d,
            cstar,
            c,
            k0,
            lf,
        })
    }

    pub fn function(&self) -> &TestFunction {
        &self.analysis.function
    }

    /// `β = α^{1−q}/q`, the coefficient of `|t|^q` in `C_f`.
    pub fn time_coefficient(&self) -> f64 {
        self.alpha.powf(1.0 - self.dims.q()) / self.dims.q()
    }

    /// `(α^{1−q}/q)|t|^q + D_f(x)`, the split form of `C_f`.
    pub fn c_split(&self) -> Result<HomogeneousConvex> {
        HomogeneousConvex::split(self.time_coefficient(), &self.d)
    }

    /// `∫_{R^n_+} C_f*(∇f)`.
    pub fn energy_integral(&self) -> Integral {
        self.analysis.samples.integrate(|g| self.cstar.eval(g))
    }

    /// Largest relative difference between `C_f` and its split form at the
    /// nodes of a sphere rule in `R^n`.
    pub fn decomposition_residual(&self) -> Result<f64> {
        let split = self.c_split()?;
        let rule = sphere_rule(self.dims.n(), 7)?;
        Ok(rule
            .iter()
            .map(|(u, _)| (self.c.eval(u) / split.eval(u) - 1.0).abs())
            .fold(0.0, f64::max))
    }

    /// Largest relative deviation of the slices `K_{f,t}` from
    /// `(1 − β|t|^q)^{1/q} K_{f,0}` over `t` in a ten-point grid. Slice radii
    /// are found by bisection on `s ↦ C_f(t, s ξ) = 1`.
    pub fn slice_law_residual(&self) -> Result<f64> {
        let n = self.dims.n();
        let q = self.dims.q();
        let beta = self.time_coefficient();
        let height = beta.powf(-1.0 / q);
        let dirs = sphere_rule(n - 1, if n == 3 { 7 } else { 3 })?;
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let t = height * 0.09 * (k as f64 + 0.5);
            let scale = (1.0 - beta * t.powf(q)).powf(1.0 / q);
            for (xi, _) in dirs.iter() {
                let want = scale * self.k0.radial(xi);
                let mut y = vec![0.0; n];
                y[0] = t;
                let mut at = |s: f64| {
                    for (yi, x) in y[1..].iter_mut().zip(xi) {
                        *yi = s * x;
                    }
                    self.c.eval(&y) - 1.0
                };
                let (mut lo, mut hi) = (0.0, 2.0 * want.max(1e-300));
                while at(hi) < 0.0 {
                    hi *= 2.0;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if at(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-12 * hi {
                        break;
                    }
                }
                worst = worst.max((0.5 * (lo + hi) / want - 1.0).abs());
            }
        }
        Ok(worst)
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (&m + m.transpose())
}

/// `∫_{S^{m−1}} (ξᵀGξ)^{−(m+3)/2} ξξᵀ dξ`, the matrix of `D_f*` at `p = 2`.
fn gram_moment(g: &DMatrix<f64>) -> DMatrix<f64> {
    let m = g.nrows();
    let n = m + 1;
    let order = match m {
        2 => 2 * CIRCLE_TABLE - 1,
        3 => 63,
        _ => 23,
    };
    let rule = sphere_rule(m, order).expect("orders below the maximum");
    let mut out = DMatrix::zeros(m, m);
    for (xi, w) in rule.iter() {
        let quad: f64 = (0..m)
            .map(|i| xi[i] * (0..m).map(|j| g[(i, j)] * xi[j]).sum::<f64>())
            .sum();
        let wt = w * quad.powf(-(n as f64 + 1.0) / 2.0);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += wt * xi[i] * xi[j];
            }
        }
    }
    symmetrize(out)
}

/// Planar `D_f*(x) = |x|^p Φ(arg x)` with `Φ(φ) = 2 ∫_{−π/2}^{π/2} W(φ + s) cos(s)^p ds`
/// tabulated by Gauss–Legendre (the kink of `|cos|^p` sits at the panel ends).
fn planar_dstar(series: &Arc<TrigSeries>, p: f64, n: usize) -> HomogeneousConvex {
    let e = (1.0 - n as f64 - p) / p;
    let gl = gauss_legendre(96);
    let half = PI / 2.0;
    let kernel: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(x, w)| (half * x, half * w * (half * x).cos().powf(p)))
        .collect();
    let values: Vec<f64> = (0..CIRCLE_TABLE)
        .map(|j| {
            let phi = PI * j as f64 / CIRCLE_TABLE as f64;
            2.0 * kernel
                .iter()
                .map(|(s, w)| w * series.value(phi + s).powf(e))
                .sum::<f64>()
        })
        .collect();
    let phi_series = Arc::new(TrigSeries::from_samples(&values));
    let ps = phi_series.clone();
    let grad: GradientFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            out[0] = 0.0;
            out[1] = 0.0;
            return;
        }
        let (v, dv) = ps.eval(x[1].atan2(x[0]));
        let (c, s) = (x[0] / r, x[1] / r);
        let rp = r.powf(p - 1.0);
        out[0] = rp * (p * v * c - dv * s);
        out[1] = rp * (p * v * s + dv * c);
    });
    HomogeneousConvex::new(
        2,
        p,
        move |x: &[f64]| {
            let r = x[0].hypot(x[1]);
            if r == 0.0 {
                0.0
            } else {
                r.powf(p) * phi_series.value(x[1].atan2(x[0]))
            }
        },
        Some(grad),
    )
    .expect("degree p > 1")
    .with_label("D_f*")
}

/// `D_f*(x) = Σ_k w_k W(ξ_k) |⟨x, ξ_k⟩|^p` over a fixed sphere rule.
fn direct_dstar(d: &Directional, p: f64, n: usize) -> Result<HomogeneousConvex> {
    let e = (1.0 - n as f64 - p) / p;
    let rule = d.direction_rule();
    let m = n - 1;
    let nodes: Vec<(Vec<f64>, f64)> = rule
        .iter()
        .map(|(u, w)| (u.to_vec(), w * d.power(u).powf(e)))
        .collect();
    let nodes = Arc::new(nodes);
    let ng = nodes.clone();
    let grad: GradientFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (u, w) in ng.iter() {
            let s: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
            let g = w * p * s.abs().powf(p - 1.0) * s.signum();
            for (o, ui) in out.iter_mut().zip(u) {
                *o += g * ui;
            }
        }
    });
    Ok(HomogeneousConvex::new(
        m,
        p,
        move |x: &[f64]| {
            nodes
                .iter()
                .map(|(u, w)| {
                    w * x
                        .iter()
                        .zip(u)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        .abs()
                        .powf(p)
                })
                .sum()
        },
        Some(grad),
    )?
    .with_label("D_f*"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::norm_a;
    use crate::convex::{centroid_support, ellipsoid_fit_residual};
    use crate::trace::function::{extremal, gaussian_sum, ExtremalParams, GaussianBump};

    fn dims(n: usize, p: f64) -> Dimensions {
        Dimensions::new(n, p).unwrap()
    }

    fn mixture() -> TestFunction {
        gaussian_sum(
            3,
            &[
                GaussianBump {
                    weight: 1.0,
                    center: vec![0.2, 0.0, 0.0],
                    matrix: vec![1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.5],
                },
                GaussianBump {
                    weight: 0.8,
                    center: vec![0.4, 0.3, -0.2],
                    matrix: vec![1.5, 0.0, 0.0, 0.0, 0.6, 0.5, 0.0, 0.5, 3.0],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn radial_dstar_is_isotropic() {
        let f = extremal(&ExtremalParams::standard(dims(3, 2.0))).unwrap();
        let cf = build_cf(&f, 2.0).unwrap();
        let vals: Vec<f64> = (0..16)
            .map(|k| {
                let phi = PI * k as f64 / 8.0 + 0.2;
                cf.dstar.eval(&[phi.cos(), phi.sin()])
            })
            .collect();
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo - 1.0 < 1e-6);
    }

    #[test]
    fn energy_identity_holds() {
        // ∫ C_f*(∇f) = q Z_p^{1−n}
        for (f, p) in [
            (mixture(), 2.0),
            (mixture(), 1.5),
            (
                extremal(&ExtremalParams::standard(dims(3, 1.5))).unwrap(),
                1.5,
            ),
        ] {
            let cf = build_cf(&f, p).unwrap();
            let lhs = cf.energy_integral().value;
            let rhs = cf.dims.q() * cf.zp.powf(-2.0);
            assert!(
                (lhs / rhs - 1.0).abs() < 1e-5,
                "p = {p}: {}",
                lhs / rhs - 1.0
            );
        }
    }

    #[test]
    fn planar_dstar_matches_the_centroid_support() {
        // D_f*(x) = (n − 1 + p) a_{n−1,p} vol(L_f) h_{Γ_p L_f}(x)^p
        let p = 1.5;
        let cf = build_cf(&mixture(), p).unwrap();
        let h = centroid_support(&cf.lf, p).unwrap();
        let scale = (2.0 + p) * norm_a(2, p).unwrap() * cf.lf.volume();
        for k in 0..8 {
            let phi = PI * k as f64 / 8.0 + 0.1;
            let u = [phi.cos(), phi.sin()];
            let want = scale * h.eval(&u).powf(p);
            assert!(
                (cf.dstar.eval(&u) / want - 1.0).abs() < 1e-6,
                "{}",
                cf.dstar.eval(&u) / want - 1.0
            );
        }
        // L_f volume from the body agrees with Z_p
        assert!((cf.lf.volume() / cf.analysis.lf_volume() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn split_decomposition_and_slice_law() {
        for p in [2.0, 1.5] {
            let cf = build_cf(&mixture(), p).unwrap();
            let dec = cf.decomposition_residual().unwrap();
            assert!(dec < 1e-6, "p = {p}: {dec}");
            let slice = cf.slice_law_residual().unwrap();
            assert!(slice < 1e-4, "p = {p}: {slice}");
        }
    }

    #[test]
    fn anisotropic_extremal_has_an_elliptic_slice() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 2.5]);
        let params = ExtremalParams::new(dims(3, 2.0), 1.0, 1.0, b, vec![0.0, 0.0], 1.0).unwrap();
        let cf = build_cf(&extremal(&params).unwrap(), 2.0).unwrap();
        assert!(ellipsoid_fit_residual(&cf.k0).unwrap() < 1e-4);
    }
}
