//! Closed-form constants of the affine and Euclidean trace inequalities.
//!
//! Every constant is assembled in log-space and exponentiated once at the end,
//! so `Γ(n)` never overflows in the range used here (n up to ~50).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::ln_gamma;

/// Ambient dimension `n` and integrability exponent `p`, with the dual
/// exponent `q = p / (p - 1)` derived on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDimensions", into = "RawDimensions")]
pub struct Dimensions {
    n: usize,
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDimensions {
    n: usize,
    p: f64,
}

impl TryFrom<RawDimensions> for Dimensions {
    type Error = Error;
    fn try_from(raw: RawDimensions) -> Result<Self> {
        Dimensions::new(raw.n, raw.p)
    }
}

impl From<Dimensions> for RawDimensions {
    fn from(d: Dimensions) -> Self {
        RawDimensions { n: d.n, p: d.p }
    }
}

impl Dimensions {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 3 || !(p > 1.0) || !(p < n as f64) || !p.is_finite() {
            return Err(Error::Dimensions { n, p });
        }
        let q = p / (p - 1.0);
        debug_assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-14);
        Ok(Dimensions { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Boundary exponent `p (n - 1) / (n - p)`.
    pub fn trace_exponent(&self) -> f64 {
        let n = self.n as f64;
        self.p * (n - 1.0) / (n - self.p)
    }
}

/// Dual exponent of `p > 1`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn ln_omega(s: f64) -> f64 {
    0.5 * s * PI.ln() - ln_gamma(0.5 * s + 1.0)
}

/// Volume `π^{s/2} / Γ(s/2 + 1)` of the unit ball of (real) dimension `s > 0`.
pub fn omega(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(format!("omega needs s > 0, got {s}")));
    }
    Ok(ln_omega(s).exp())
}

/// Surface measure `m ω_m` of the unit sphere `S^{m-1}`.
pub fn sphere_area(m: usize) -> f64 {
    let m = m as f64;
    m * ln_omega(m).exp()
}

/// Best constant of the Euclidean L² trace inequality (Escobar, Beckner).
pub fn sharp_k(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(domain(format!("sharp_k needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let ln = -0.5 * PI.ln() - (nf - 2.0).ln()
        + (ln_gamma(nf) - (nf - 1.0).ln() - ln_gamma(0.5 * (nf - 1.0))) / (nf - 1.0);
    Ok(ln.exp())
}

/// Sharp constant `A_{n,p}` of the affine L^p trace inequality.
pub fn sharp_a(dims: Dimensions) -> f64 {
    let n = dims.n as f64;
    let p = dims.p;
    let bracket = ln_gamma(n) + ln_gamma(0.5 * (n + 1.0))
        - (n - 1.0).ln()
        - ln_gamma((n - 1.0) / p)
        - ln_gamma((n * (p - 1.0) + 1.0) / p);
    let ln = -0.5 * (p - 1.0) * PI.ln()
        + (p - 1.0) * ((p - 1.0) / p * (p - 1.0).ln() - (n - p).ln())
        + (p - 1.0) / (n - 1.0) * bracket;
    ln.exp()
}

/// Normalization `c_{m,p}` of the affine energy on `R^m`.
pub fn norm_c(m: usize, p: f64) -> Result<f64> {
    if m < 2 || !(p > 1.0) {
        return Err(domain(format!(
            "norm_c needs m >= 2 and p > 1, got m = {m}, p = {p}"
        )));
    }
    let mf = m as f64;
    let ln_area = mf.ln() + ln_omega(mf);
    let ln = ln_area / mf + (ln_area + ln_omega(p - 1.0) - 2f64.ln() - ln_omega(mf + p - 2.0)) / p;
    Ok(ln.exp())
}

/// Normalization `a_{m,p}` of the L_p centroid body in `R^m`.
pub fn norm_a(m: usize, p: f64) -> Result<f64> {
    if m < 2 || !(p > 1.0) {
        return Err(domain(format!(
            "norm_a needs m >= 2 and p > 1, got m = {m}, p = {p}"
        )));
    }
    let mf = m as f64;
    Ok((ln_omega(mf + p) - ln_omega(2.0) - ln_omega(mf) - ln_omega(p - 1.0)).exp())
}

/// `max_{t ≥ 0} (t^{1/q} − t) = q^{-p/q} / p`.
pub fn ell(q: f64) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(domain(format!("ell needs q > 1, got {q}")));
    }
    let p = conjugate(q);
    Ok((-(p / q) * q.ln() - p.ln()).exp())
}

/// `∫_0^1 t^{qn−q−n} (1 − t^q)^{(n−1)/q} dt` in closed form.
pub fn beta_moment(dims: Dimensions) -> f64 {
    let n = dims.n as f64;
    let (p, q) = (dims.p, dims.q);
    (ln_gamma((n - 1.0) / p) + ln_gamma((n - 1.0) / q + 1.0) - ln_gamma(n) - q.ln()).exp()
}

/// Every constant attached to one `(n, p)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub dims: Dimensions,
    /// `K_n`; only meaningful as the p = 2 constant but tabulated for every row.
    pub k_n: f64,
    pub a_np: f64,
    /// `c_{n-1,p}`, the normalization entering `E_p`.
    pub c_np: f64,
    /// `a_{n-1,p}`, the centroid normalization on the boundary hyperplane.
    pub a_norm: f64,
    pub d1: f64,
    pub d2: f64,
    /// Best constant of the Young-split form, `(p−1)^{1/q} A_{n,p}`.
    pub d2_sharp: f64,
    pub ell_q: f64,
}

impl ConstantSet {
    pub fn new(dims: Dimensions) -> Self {
        let (p, q) = (dims.p, dims.q);
        let a_np = sharp_a(dims);
        let d1 = p * a_np;
        let young = (p.powf(1.0 / p) * q.powf(1.0 / q)).powf(-1.0 / p);
        ConstantSet {
            dims,
            k_n: sharp_k(dims.n).expect("n >= 3 by construction"),
            a_np,
            c_np: norm_c(dims.n - 1, p).expect("n - 1 >= 2"),
            a_norm: norm_a(dims.n - 1, p).expect("n - 1 >= 2"),
            d1,
            d2: young * d1,
            d2_sharp: (p - 1.0).powf(1.0 / q) * a_np,
            ell_q: ell(q).expect("q > 1"),
        }
    }

    /// Sampled view of `ω_s` so the set mirrors the full constant family.
    pub fn omega(&self, s: f64) -> Result<f64> {
        omega(s)
    }

    pub fn all_positive(&self) -> bool {
        [
            self.k_n,
            self.a_np,
            self.c_np,
            self.a_norm,
            self.d1,
            self.d2,
            self.d2_sharp,
            self.ell_q,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dims(n: usize, p: f64) -> Dimensions {
        Dimensions::new(n, p).unwrap()
    }

    #[test]
    fn dimensions_reject_out_of_range() {
        assert!(Dimensions::new(2, 1.5).is_err());
        assert!(Dimensions::new(3, 3.0).is_err());
        assert!(Dimensions::new(3, 1.0).is_err());
        assert!(Dimensions::new(3, f64::NAN).is_err());
        let d = dims(4, 1.5);
        assert_relative_eq!(1.0 / d.p() + 1.0 / d.q(), 1.0, max_relative = 1e-14);
        assert_eq!(d.q(), 3.0);
    }

    #[test]
    fn omega_low_dimensions() {
        assert_relative_eq!(omega(1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(omega(2.0).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(omega(3.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-14);
        assert!(omega(0.0).is_err());
        assert!(omega(-1.0).is_err());
    }

    #[test]
    fn omega_is_continuous_in_s() {
        let mut s = 0.05;
        while s < 30.0 {
            let a = omega(s).unwrap();
            let b = omega(s + 1e-7).unwrap();
            assert!((a - b).abs() < 1e-5 * a, "jump at s = {s}");
            s += 0.37;
        }
    }

    #[test]
    fn sharp_k_reference_values() {
        assert_relative_eq!(sharp_k(3).unwrap(), 1.0 / PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            sharp_k(3).unwrap(),
            0.564_189_583_547_756_29,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_k(4).unwrap(),
            0.370_018_484_153_678_11,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_k(5).unwrap(),
            0.294_334_805_816_187_67,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_k(10).unwrap(),
            0.174_443_448_025_391_85,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_k(12).unwrap(),
            0.155_420_195_710_102_60,
            max_relative = 1e-13
        );
        assert!(sharp_k(2).is_err());
    }

    #[test]
    fn sharp_a_reduces_to_sharp_k_at_two() {
        for n in 3..=12 {
            let a = sharp_a(dims(n, 2.0));
            let k = sharp_k(n).unwrap();
            assert_relative_eq!(a, k, max_relative = 1e-12);
        }
    }

    #[test]
    fn sharp_a_reference_values() {
        assert_relative_eq!(
            sharp_a(dims(4, 1.5)),
            0.498_136_724_564_411_14,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_a(dims(3, 1.5)),
            0.576_625_115_422_831_29,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_a(dims(8, 2.5)),
            0.139_132_708_543_403_84,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            sharp_a(dims(5, 3.0)),
            0.366_979_649_885_931_43,
            max_relative = 1e-13
        );
    }

    #[test]
    fn norm_c_at_two_matches_euclidean_form() {
        for m in 2..=10 {
            let mf = m as f64;
            let want = mf.powf((mf + 2.0) / (2.0 * mf)) * omega(mf).unwrap().powf(1.0 / mf);
            assert_relative_eq!(norm_c(m, 2.0).unwrap(), want, max_relative = 1e-13);
        }
        assert_relative_eq!(
            norm_c(2, 2.0).unwrap(),
            2.0 * PI.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            norm_c(4, 3.0).unwrap(),
            3.806_707_287_552_578_8,
            max_relative = 1e-13
        );
        assert!(norm_c(1, 2.0).is_err());
    }

    #[test]
    fn norm_a_values() {
        assert_relative_eq!(norm_a(2, 2.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(norm_a(3, 2.0).unwrap(), 0.2, max_relative = 1e-14);
        assert_relative_eq!(norm_a(2, 4.0).unwrap(), 0.125, max_relative = 1e-14);
        assert!(norm_a(2, 1.0).is_err());
    }

    fn grid_max(q: f64) -> f64 {
        // coarse scan followed by golden-section on the bracketing cell
        let f = |t: f64| t.powf(1.0 / q) - t;
        let (mut best, mut arg) = (f64::MIN, 0.0);
        for k in 0..=20_000 {
            let t = k as f64 * 1e-4;
            if f(t) > best {
                best = f(t);
                arg = t;
            }
        }
        let (mut a, mut b) = ((arg - 1e-4).max(0.0), arg + 1e-4);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    }

    #[test]
    fn ell_matches_grid_maximum() {
        assert_relative_eq!(ell(2.0).unwrap(), 0.25, max_relative = 1e-14);
        for q in [1.2, 1.5, 2.0, 3.0, 4.5] {
            let oracle = grid_max(q);
            assert!((ell(q).unwrap() - oracle).abs() < 1e-9, "q = {q}");
        }
        assert_relative_eq!(ell(1.5).unwrap(), 4.0 / 27.0, max_relative = 1e-14);
        assert_relative_eq!(
            ell(3.0).unwrap(),
            0.384_900_179_459_750_51,
            max_relative = 1e-13
        );
        assert!(ell(1.0).is_err());
    }

    #[test]
    fn beta_moment_values() {
        assert_relative_eq!(beta_moment(dims(3, 2.0)), 0.25, max_relative = 1e-14);
        assert_relative_eq!(
            beta_moment(dims(4, 2.0)),
            0.098_174_770_424_681_04,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            beta_moment(dims(3, 1.5)),
            0.134_355_508_461_793_91,
            max_relative = 1e-13
        );
    }

    #[test]
    fn constant_set_invariants() {
        for (n, p) in [(3, 2.0), (4, 1.5), (5, 3.0), (8, 2.5)] {
            let c = ConstantSet::new(dims(n, p));
            assert!(c.all_positive());
            assert_relative_eq!(c.d1, p * c.a_np, max_relative = 1e-15);
            let q = c.dims.q();
            let factor = (p.powf(1.0 / p) * q.powf(1.0 / q)).powf(-1.0 / p);
            assert_relative_eq!(c.d2, factor * c.d1, max_relative = 1e-15);
            // the printed Young constant dominates the sharp one
            assert!(c.d2 >= c.d2_sharp);
        }
    }
}
