//! Direction grids and maximization over the unit sphere.
//!
//! A maximization scans a fixed grid, then refines around the best grid
//! point: Brent's method in the angle on the circle, Nelder–Mead in tangent
//! coordinates on higher spheres.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::constants::sphere_area;
use crate::quadrature::sphere_rule;

/// Fixed set of unit vectors used for sampled checks and grid scans.
#[derive(Debug)]
pub struct DirectionGrid {
    dim: usize,
    points: Vec<f64>,
    spacing: f64,
}

impl DirectionGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    /// Typical angular distance between neighbouring points.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// The shared grid on `S^{m-1}`: 512 equispaced points on the circle, 2048
/// Fibonacci points on `S²`, sphere-rule nodes (about a thousand) beyond.
pub fn direction_grid(m: usize) -> Arc<DirectionGrid> {
    static GRIDS: OnceLock<Mutex<HashMap<usize, Arc<DirectionGrid>>>> = OnceLock::new();
    let grids = GRIDS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = grids.lock().unwrap().get(&m) {
        return g.clone();
    }
    let g = Arc::new(build_grid(m));
    grids.lock().unwrap().insert(m, g.clone());
    g
}

/// Equispaced circle grid with `count` points.
pub fn circle_points(count: usize) -> Vec<f64> {
    (0..count)
        .flat_map(|k| {
            let phi = 2.0 * PI * k as f64 / count as f64;
            [phi.cos(), phi.sin()]
        })
        .collect()
}

/// Fibonacci lattice with `count` points on `S²`.
pub fn fibonacci_points(count: usize) -> Vec<f64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .flat_map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [z, r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

fn build_grid(m: usize) -> DirectionGrid {
    assert!(m >= 2, "direction grids need m >= 2");
    match m {
        2 => DirectionGrid {
            dim: 2,
            points: circle_points(512),
            spacing: 2.0 * PI / 512.0,
        },
        3 => DirectionGrid {
            dim: 3,
            points: fibonacci_points(2048),
            spacing: (4.0 * PI / 2048.0).sqrt(),
        },
        _ => {
            let mut order = 3;
            let rule = loop {
                let r = sphere_rule(m, order).expect("small orders are supported");
                if r.len() >= 1000 || order >= 31 {
                    break r;
                }
                order += 2;
            };
            let count = rule.len();
            let spacing = (sphere_area(m) / count as f64).powf(1.0 / (m as f64 - 1.0));
            DirectionGrid {
                dim: m,
                points: rule.nodes,
                spacing,
            }
        }
    }
}

/// Maximum of `f` over the sphere and a maximizing unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMax {
    pub value: f64,
    pub arg: Vec<f64>,
}

/// Maximize `f` over `S^{m-1}`. `scan(i, u)` gives the value at grid point
/// `i` (it may use cached data); `f` is the exact objective used to refine.
pub fn maximize_on_sphere(
    grid: &DirectionGrid,
    scan: impl Fn(usize, &[f64]) -> f64,
    f: impl Fn(&[f64]) -> f64,
) -> SphereMax {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, u) in grid.iter().enumerate() {
        let v = scan(i, u);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let start = grid.point(best).to_vec();
    if grid.dim() == 2 {
        refine_circle(&start, grid.spacing(), &f)
    } else {
        refine_nelder_mead(&start, grid.spacing(), &f)
    }
}

fn refine_circle(start: &[f64], spacing: f64, f: &impl Fn(&[f64]) -> f64) -> SphereMax {
    let phi0 = start[1].atan2(start[0]);
    let g = |phi: f64| -f(&[phi.cos(), phi.sin()]);
    let (phi, neg) = brent_min(&g, phi0 - spacing, phi0, phi0 + spacing, 1e-11, 200);
    let at_start = f(start);
    if at_start > -neg {
        return SphereMax {
            value: at_start,
            arg: start.to_vec(),
        };
    }
    SphereMax {
        value: -neg,
        arg: vec![phi.cos(), phi.sin()],
    }
}

/// Brent's minimization on `[a, b]` with an interior starting guess `x0`.
/// Returns the minimizer and the minimum.
pub fn brent_min(
    f: &impl Fn(f64) -> f64,
    a: f64,
    x0: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    // Gram–Schmidt on the coordinate axes, skipping the one most aligned with u
    let m = u.len();
    let skip = (0..m)
        .max_by(|&i, &j| u[i].abs().partial_cmp(&u[j].abs()).unwrap())
        .unwrap();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for axis in (0..m).filter(|&i| i != skip) {
        let mut e = vec![0.0; m];
        e[axis] = 1.0;
        let proj: f64 = u[axis];
        for (c, uc) in e.iter_mut().zip(u) {
            *c -= proj * uc;
        }
        for b in &basis {
            let d: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (c, bc) in e.iter_mut().zip(b) {
                *c -= d * bc;
            }
        }
        let norm = e.iter().map(|c| c * c).sum::<f64>().sqrt();
        e.iter_mut().for_each(|c| *c /= norm);
        basis.push(e);
    }
    basis
}

fn chart(u: &[f64], basis: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    out.copy_from_slice(u);
    for (b, &vi) in basis.iter().zip(v) {
        for (o, bc) in out.iter_mut().zip(b) {
            *o += vi * bc;
        }
    }
    let norm = out.iter().map(|c| c * c).sum::<f64>().sqrt();
    out.iter_mut().for_each(|c| *c /= norm);
}

fn refine_nelder_mead(start: &[f64], spacing: f64, f: &impl Fn(&[f64]) -> f64) -> SphereMax {
    let mut u = start.to_vec();
    let mut value = f(&u);
    let mut size = spacing;
    // a restart from the converged point guards against premature collapse
    for _ in 0..2 {
        let basis = tangent_basis(&u);
        let mut buf = vec![0.0; u.len()];
        let obj = |v: &[f64], buf: &mut [f64]| {
            chart(&u, &basis, v, buf);
            -f(buf)
        };
        let (v, neg) = nelder_mead(obj, u.len() - 1, size, &mut buf);
        if -neg > value {
            chart(&u, &basis, &v, &mut buf);
            u = buf;
            value = -neg;
        }
        size = spacing * 0.1;
    }
    SphereMax { value, arg: u }
}

fn nelder_mead(
    f: impl Fn(&[f64], &mut [f64]) -> f64,
    dim: usize,
    size: f64,
    buf: &mut [f64],
) -> (Vec<f64>, f64) {
    let mut simplex: Vec<Vec<f64>> = (0..=dim)
        .map(|i| {
            let mut v = vec![0.0; dim];
            if i > 0 {
                v[i - 1] = size;
            }
            v
        })
        .collect();
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v, buf)).collect();
    let max_evals = 200 * dim + 200;
    let mut evals = dim + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let spread = values[dim] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < 1e-11 || spread <= 1e-15 * values[0].abs() && diameter < 1e-7 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr, buf);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe, buf);
            evals += 1;
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
        } else {
            let (xc, fc) = if fr < values[dim] {
                let x = along(-0.5);
                let v = f(&x, buf);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x, buf);
                (x, v)
            };
            evals += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = xc;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| b + 0.5 * (a - b))
                        .collect();
                    values[i] = f(&shrunk, buf);
                    simplex[i] = shrunk;
                }
                evals += dim;
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
        .unwrap();
    (simplex[best].clone(), values[best])
}
