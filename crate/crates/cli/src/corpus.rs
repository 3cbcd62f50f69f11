//! Deterministic corpus of test functions and convex bodies.

use afftrace::constants::Dimensions;
use afftrace::convex::{Ellipsoid, StarBody};
use afftrace::trace::{
    compact_bump, extremal, gaussian_sum, random_orthogonal, separable, AffineFrame,
    ExtremalParams, GaussianBump, TestFunction,
};
use afftrace::Result;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Member of the equality family; verify_affine must give ratio 1.
    Extremal,
    /// Radial in `x`; the Hölder step is an equality.
    Radial,
    /// Product of a profile in `t` and one in `x`.
    Separable,
    /// Sum of anisotropic Gaussians.
    Anisotropic,
    /// Smooth with compact support.
    Bump,
}

impl Kind {
    /// Kinds for which the affine inequality is expected to be strict.
    pub fn is_generic(self) -> bool {
        matches!(self, Kind::Anisotropic | Kind::Bump)
    }
}

pub struct CorpusFunction {
    pub kind: Kind,
    /// Radial in `x`.
    pub radial: bool,
    pub function: TestFunction,
}

impl CorpusFunction {
    pub fn descriptor(&self) -> &str {
        self.function.descriptor()
    }
}

pub struct Corpus {
    pub dims: Dimensions,
    pub seed: u64,
    pub functions: Vec<CorpusFunction>,
    pub bodies: Vec<StarBody>,
}

/// Seed of the stream for one `(n, p)`: the corpus for a pair does not
/// depend on which other pairs are configured.
fn stream_seed(seed: u64, dims: Dimensions) -> u64 {
    seed ^ (dims.n() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ dims.p().to_bits().rotate_left(17)
}

fn spd(m: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let r = random_orthogonal(m, rng);
    let d = DMatrix::from_diagonal(&DVector::from_fn(m, |_, _| rng.gen_range(lo..hi)));
    let a = &r * d * r.transpose();
    0.5 * (&a + a.transpose())
}

/// Parameters of a randomized extremal: `λ ∈ [0.5, 3]`, `δ ∈ [0.5, 2]`,
/// `B` with condition number at most 5, `x_0` in `[−½, ½]^{n−1}`, `γ = ±1`.
pub fn random_extremal_params(dims: Dimensions, rng: &mut ChaCha8Rng) -> Result<ExtremalParams> {
    let m = dims.n() - 1;
    let lambda = rng.gen_range(0.5..3.0);
    let delta = rng.gen_range(0.5..2.0);
    let cond = rng.gen_range(1.0..5.0);
    let b = AffineFrame::random(dims.n(), cond, rng).b;
    let x0 = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let gamma = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    ExtremalParams::new(dims, lambda, delta, b, x0, gamma)
}

/// Compact bump centred near the boundary with a random positive definite shape.
pub fn random_bump(n: usize, rng: &mut ChaCha8Rng) -> Result<TestFunction> {
    let mut center = vec![rng.gen_range(-0.2..0.4)];
    center.extend((1..n).map(|_| rng.gen_range(-0.5..0.5)));
    compact_bump(&center, spd(n, 0.4, 3.0, rng))
}

fn random_mixture(n: usize, rng: &mut ChaCha8Rng) -> Result<TestFunction> {
    let bumps: Vec<GaussianBump> = (0..2)
        .map(|_| {
            let mut center = vec![rng.gen_range(0.0..0.5)];
            center.extend((1..n).map(|_| rng.gen_range(-1.0..1.0)));
            GaussianBump {
                weight: rng.gen_range(0.5..1.5),
                center,
                matrix: spd(n, 0.3, 4.0, rng).as_slice().to_vec(),
            }
        })
        .collect();
    gaussian_sum(n, &bumps)
}

impl Corpus {
    /// The corpus for one `(n, p)`: `extremals` randomized extremals, the
    /// standard radial extremal, a radial and an anisotropic separable
    /// profile, two Gaussian mixtures and three compact bumps, plus the body
    /// corpus in dimension `n − 1`.
    pub fn generate(dims: Dimensions, seed: u64, extremals: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, dims));
        let n = dims.n();
        let m = n - 1;
        let mut functions = Vec::new();
        for _ in 0..extremals {
            let params = random_extremal_params(dims, &mut rng)?;
            functions.push(CorpusFunction {
                kind: Kind::Extremal,
                radial: false,
                function: extremal(&params)?,
            });
        }
        functions.push(CorpusFunction {
            kind: Kind::Extremal,
            radial: true,
            function: extremal(&ExtremalParams::standard(dims))?,
        });
        // (1 + |x|²)^{-b} has an integrable trace once b > (n − p)/(2p)
        let b = (dims.n() as f64 - dims.p()) / (2.0 * dims.p()) + rng.gen_range(0.5..1.0);
        let tau = rng.gen_range(0.5..2.0);
        functions.push(CorpusFunction {
            kind: Kind::Radial,
            radial: true,
            function: separable(n, tau, b, DMatrix::identity(m, m))?,
        });
        functions.push(CorpusFunction {
            kind: Kind::Separable,
            radial: false,
            function: separable(n, tau, b, spd(m, 0.3, 3.0, &mut rng))?,
        });
        for _ in 0..2 {
            functions.push(CorpusFunction {
                kind: Kind::Anisotropic,
                radial: false,
                function: random_mixture(n, &mut rng)?,
            });
        }
        for _ in 0..3 {
            functions.push(CorpusFunction {
                kind: Kind::Bump,
                radial: false,
                function: random_bump(n, &mut rng)?,
            });
        }
        let bodies = body_corpus(m, &mut rng)?;
        Ok(Corpus {
            dims,
            seed,
            functions,
            bodies,
        })
    }

    /// Parameter record of every member, for reproducibility comparisons.
    pub fn descriptors(&self) -> Vec<String> {
        self.functions
            .iter()
            .map(|f| f.descriptor().to_string())
            .chain(self.bodies.iter().map(|b| b.label().to_string()))
            .collect()
    }
}

/// Balls, ellipsoids, boxes and random symmetric polytopes in `R^m`.
pub fn body_corpus(m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<StarBody>> {
    let mut out = vec![
        StarBody::ball(m, 1.0),
        StarBody::ball(m, 0.6).with_label("ball(0.6)"),
    ];
    for _ in 0..2 {
        let e = Ellipsoid::new(spd(m, 0.3, 3.0, rng))?;
        let label = format!("ellipsoid(M={:?})", e.matrix().as_slice());
        out.push(e.to_body().with_label(&label));
    }
    let widths: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
    out.push(StarBody::cuboid(&widths)?.with_label(&format!("box({widths:?})")));
    out.push(StarBody::cuboid(&vec![1.0; m])?.with_label("cube"));
    for _ in 0..2 {
        let count = m + 2 + rng.gen_range(0..4);
        let normals: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let r = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-3);
                let s = rng.gen_range(0.7..1.5) / r;
                v.iter().map(|c| c * s).collect()
            })
            .collect();
        let label = format!("polytope({normals:?})");
        out.push(StarBody::polytope(&normals)?.with_label(&label));
    }
    Ok(out)
}
