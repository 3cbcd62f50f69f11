//! Facet structure of symmetric polytopes `{|⟨a_i, y⟩| ≤ 1}` and exact
//! moments `∫_K |⟨u, z⟩|^p dz` over them.

use nalgebra::{DMatrix, DVector};

use super::body::dot;
use crate::quadrature::gauss_legendre;

/// One facet: outward unit normal, distance from the origin, and its
/// vertices in cyclic order (two endpoints in the plane).
#[derive(Debug, Clone)]
pub(crate) struct Facet {
    pub normal: Vec<f64>,
    pub dist: f64,
    pub verts: Vec<Vec<f64>>,
}

/// Vertices of `{|⟨a_i, y⟩| ≤ 1}` by enumerating `m`-subsets of facets.
pub(crate) fn polytope_vertices(normals: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = normals[0].len();
    let k = normals.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let a = DMatrix::from_fn(m, m, |i, j| normals[idx[i]][j]);
        if let Some(lu) = a.clone().lu().try_inverse() {
            for signs in 0..(1u32 << m) {
                let rhs = DVector::from_fn(m, |i, _| if signs >> i & 1 == 1 { -1.0 } else { 1.0 });
                let v = &lu * rhs;
                let feasible = normals
                    .iter()
                    .all(|ai| dot(ai, v.as_slice()).abs() <= 1.0 + 1e-10);
                if feasible {
                    let v = v.as_slice().to_vec();
                    if !out
                        .iter()
                        .any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() < 1e-9))
                    {
                        out.push(v);
                    }
                }
            }
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < k - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Facets of a polytope in `R^2` or `R^3`; redundant inequalities give no facet.
pub(crate) fn facets(normals: &[Vec<f64>], vertices: &[Vec<f64>]) -> Vec<Facet> {
    let m = normals[0].len();
    let mut out = Vec::new();
    for a in normals {
        let an = dot(a, a).sqrt();
        for sign in [1.0, -1.0] {
            let mut face: Vec<Vec<f64>> = vertices
                .iter()
                .filter(|v| (dot(a, v) - sign).abs() < 1e-9)
                .cloned()
                .collect();
            if face.len() < m {
                continue;
            }
            let normal: Vec<f64> = a.iter().map(|x| sign * x / an).collect();
            if m == 3 {
                let k = face.len() as f64;
                let c: Vec<f64> = (0..3)
                    .map(|i| face.iter().map(|v| v[i]).sum::<f64>() / k)
                    .collect();
                let e1 = sub(&face[0], &c);
                let e2 = cross(&normal, &e1);
                let angle = |v: &Vec<f64>| {
                    let d = sub(v, &c);
                    dot(&d, &e2).atan2(dot(&d, &e1))
                };
                face.sort_by(|p, q| angle(p).partial_cmp(&angle(q)).unwrap());
            }
            out.push(Facet {
                normal,
                dist: 1.0 / an,
                verts: face,
            });
        }
    }
    out
}

/// `∫_0^1 |α + β s|^p ds`.
fn segment_abs_pow(alpha: f64, beta: f64, p: f64) -> f64 {
    let end = alpha + beta;
    if beta.abs() <= 1e-3 * alpha.abs() {
        // no sign change and nearly constant: Gauss is exact to rounding here
        let gl = gauss_legendre(8);
        return gl.integrate(|x| (alpha + beta * 0.5 * (1.0 + x)).abs().powf(p)) * 0.5;
    }
    let f = |t: f64| t.abs().powf(p + 1.0);
    if alpha * end < 0.0 {
        (f(alpha) + f(end)) / ((p + 1.0) * beta.abs())
    } else {
        ((f(end) - f(alpha)) / ((p + 1.0) * beta)).abs()
    }
}

/// `∫_F |⟨u, x⟩|^p dA` over a facet of a polytope in `R^3`.
///
/// `|⟨u, ·⟩|^p` restricted to the facet plane is `p`-homogeneous about any
/// point `x0` of the plane where it vanishes, so the facet integral reduces
/// to `(1/(2+p)) Σ_edges ⟨x_e − x0, ν_e⟩ ∫_e |⟨u, x⟩|^p ds`.
fn facet_abs_pow(f: &Facet, u: &[f64], p: f64) -> f64 {
    let n = &f.normal;
    let c = f.dist * dot(u, n);
    let g: Vec<f64> = u
        .iter()
        .zip(n)
        .map(|(ui, ni)| ui - dot(u, n) * ni)
        .collect();
    let gn = dot(&g, &g).sqrt();
    let k = f.verts.len();
    let diam = f
        .verts
        .iter()
        .flat_map(|a| {
            f.verts
                .iter()
                .map(move |b| dot(&sub(a, b), &sub(a, b)).sqrt())
        })
        .fold(0.0, f64::max);
    if gn * diam <= 1e-3 * c.abs() {
        // the linear form barely varies over the facet: fan of collapsed Gauss rules
        let gl = gauss_legendre(8);
        let mut total = 0.0;
        let p0 = &f.verts[0];
        for j in 1..k - 1 {
            let b = sub(&f.verts[j], p0);
            let cc = sub(&f.verts[j + 1], p0);
            let cr = cross(&b, &cc);
            let jac = dot(&cr, &cr).sqrt();
            for (x, wx) in gl.nodes.iter().zip(&gl.weights) {
                let xi = 0.5 * (1.0 + x);
                for (y, wy) in gl.nodes.iter().zip(&gl.weights) {
                    let v = (1.0 - xi) * 0.5 * (1.0 + y);
                    let l: f64 = (0..3).map(|i| u[i] * (p0[i] + xi * b[i] + v * cc[i])).sum();
                    total += 0.25 * wx * wy * (1.0 - xi) * jac * l.abs().powf(p);
                }
            }
        }
        return total;
    }
    let foot: Vec<f64> = n.iter().map(|x| f.dist * x).collect();
    let x0: Vec<f64> = foot
        .iter()
        .zip(&g)
        .map(|(fi, gi)| fi - c * gi / (gn * gn))
        .collect();
    let kf = k as f64;
    let centroid: Vec<f64> = (0..3)
        .map(|i| f.verts.iter().map(|v| v[i]).sum::<f64>() / kf)
        .collect();
    let mut total = 0.0;
    for j in 0..k {
        let (a, b) = (&f.verts[j], &f.verts[(j + 1) % k]);
        let e = sub(b, a);
        let len = dot(&e, &e).sqrt();
        let t: Vec<f64> = e.iter().map(|x| x / len).collect();
        let mut nu = cross(&t, n).to_vec();
        if dot(&sub(&centroid, a), &nu) > 0.0 {
            nu.iter_mut().for_each(|x| *x = -*x);
        }
        let h = dot(&sub(a, &x0), &nu);
        let (la, lb) = (dot(u, a), dot(u, b));
        total += h * len * segment_abs_pow(la, lb - la, p);
    }
    total / (2.0 + p)
}

/// `∫_K |⟨u, z⟩|^p dz` for a polytope in `R^2` or `R^3`, by the same
/// homogeneity reduction applied once per dimension.
pub(crate) fn abs_linear_moment(facets: &[Facet], u: &[f64], p: f64) -> f64 {
    let m = u.len() as f64;
    let s: f64 = facets
        .iter()
        .map(|f| {
            let inner = if f.verts.len() == 2 && u.len() == 2 {
                let (a, b) = (&f.verts[0], &f.verts[1]);
                let e = sub(b, a);
                let la = dot(u, a);
                dot(&e, &e).sqrt() * segment_abs_pow(la, dot(u, b) - la, p)
            } else {
                facet_abs_pow(f, u, p)
            };
            f.dist * inner
        })
        .sum();
    s / (m + p)
}
