//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Lines are written straight to stderr so they show without `--nocapture`.
//! Criteria listed in `KNOWN_UNATTAINABLE` are evaluated and printed like the
//! others but do not fail the run; each has an ignored test below that
//! asserts the unattainable part and fails when run.

use std::io::Write;
use std::time::Instant;

use afftrace::constants::{beta_moment, sharp_a, sharp_k, ConstantSet, Dimensions};
use afftrace::convex::{
    bp_gap, centroid_support, polar_legendre_check, HomogeneousConvex, Regularity, StarBody,
};
use afftrace::report::Expectation;
use afftrace::trace::{
    affine_ratio, appendix_chain, balanced_radial_extremal, c_extremal, extremal, gaussian_sum,
    gl_pullback, lemma1_constant, lemma2_check, nazaret_ratio_with, proof_chain, young_form,
    AffineFrame, Analysis, CfData, ConjugatePair, ExtremalParams, GaussianBump, TestFunction,
    Tolerances,
};
use afftrace_cli::corpus::{body_corpus, random_bump, random_extremal_params};
use afftrace_cli::suite::beta_moment_by_quadrature;
use afftrace_cli::{run_suite, Corpus, SuiteConfig};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criterion 7 asks the Young-form chain with the printed `d_2` to be an
/// equality on radial extremals. The printed constant exceeds the least one,
/// `(p−1)^{1/q} A_{n,p}`, by the factor `p (p^{1/p} q^{1/q})^{−1/p} / (p−1)^{1/q}`
/// (`√2` at `p = 2`), so the best attainable ratio is its inverse.
const KNOWN_UNATTAINABLE: &[u32] = &[7];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(o: &Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let known = if !o.pass && KNOWN_UNATTAINABLE.contains(&o.id) {
        " (known unattainable)"
    } else {
        ""
    };
    writeln!(
        std::io::stderr(),
        "criterion {:>2}: {status}{known} {}",
        o.id,
        o.detail
    )
    .unwrap();
}

fn dims(n: usize, p: f64) -> Dimensions {
    Dimensions::new(n, p).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst_k: f64 = 0.0;
    for n in 3..=12 {
        worst_k = worst_k.max(rel(sharp_a(dims(n, 2.0)), sharp_k(n).unwrap()));
    }
    let mut worst_chain: f64 = 0.0;
    let mut worst_beta: f64 = 0.0;
    for n in [3usize, 4, 5, 8] {
        for p in [1.5, 2.0, 2.5, 3.0] {
            let Ok(d) = Dimensions::new(n, p) else {
                continue;
            };
            worst_chain = worst_chain.max(appendix_chain(d));
            worst_beta = worst_beta.max(rel(beta_moment_by_quadrature(d), beta_moment(d)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        pass: worst_k <= 1e-12 && worst_chain <= 1e-11 && worst_beta <= 1e-10 && secs < 1.0,
        detail: format!("A(n,2)/K_n {worst_k:.1e}, appendix chain {worst_chain:.1e}, beta moment {worst_beta:.1e}, {secs:.2} s"),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cs = vec![(
        HomogeneousConvex::euclidean_power(3, 2.0, 1.0).unwrap(),
        2.0,
    )];
    for _ in 0..3 {
        let b = AffineFrame::random(4, 4.0, &mut rng).b;
        let m = &b * b.transpose();
        cs.push((
            HomogeneousConvex::quadratic(0.5 * (&m + m.transpose())).unwrap(),
            2.0,
        ));
    }
    cs.push((
        HomogeneousConvex::euclidean_power(3, 3.0, 1.0).unwrap(),
        1.5,
    ));
    let worst = cs
        .iter()
        .map(|(c, p)| lemma1_constant(c, *p).unwrap().agreement())
        .fold(0.0, f64::max);
    let k = lemma1_constant(&cs[0].0, 2.0).unwrap().value();
    let (e1, e2) = (
        (k - 4.0 / std::f64::consts::PI.sqrt()).abs(),
        (k / 4.0 - sharp_k(3).unwrap()).abs(),
    );
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 2,
        pass: worst <= 1e-6 && e1 <= 1e-6 && e2 <= 1e-6 && secs < 10.0,
        detail: format!("route agreement {worst:.1e}, |K - 4/sqrt(pi)| {e1:.1e}, |K/4 - K_3| {e2:.1e}, {secs:.2} s"),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_gap = f64::INFINITY;
    let mut ellipsoid_gap: f64 = 0.0;
    // the body corpus of the default suite lives in R^{n−1} = R^2
    for body in body_corpus(2, &mut rng).unwrap() {
        for p in [1.5, 2.0, 3.0] {
            let gap = bp_gap(&body, p).unwrap();
            min_gap = min_gap.min(gap);
            if body.label().starts_with("ellipsoid") || body.label().starts_with("ball") {
                ellipsoid_gap = ellipsoid_gap.max(gap.abs());
            }
        }
    }
    let square = centroid_support(&StarBody::cuboid(&[1.0, 1.0]).unwrap(), 2.0)
        .unwrap()
        .volume()
        .unwrap();
    let square_err = (square - 4.0 * std::f64::consts::PI / 3.0).abs();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 3,
        pass: min_gap >= -1e-6 && ellipsoid_gap <= 1e-5 && square_err <= 1e-5 && secs < 30.0,
        detail: format!("min gap {min_gap:.2e}, ellipsoid |gap| {ellipsoid_gap:.1e}, square {square_err:.1e}, {secs:.2} s"),
    }
}

fn criterion_4() -> Outcome {
    let mut exact: f64 = 0.0;
    let mut sampled: f64 = 0.0;
    for (m, q) in [(2usize, 2.0), (2, 3.0), (3, 1.5)] {
        let ball = HomogeneousConvex::euclidean_power(m, q, 1.3).unwrap();
        let mut a = DMatrix::identity(m, m);
        a[(0, 0)] = 3.0;
        a[(0, 1)] = 0.5;
        a[(1, 0)] = 0.5;
        let ellipsoid = HomogeneousConvex::quadratic_power(a, q).unwrap();
        exact = exact
            .max(polar_legendre_check(&ball).unwrap())
            .max(polar_legendre_check(&ellipsoid).unwrap());
        let body = StarBody::from_radial(
            m,
            |u: &[f64]| (u.iter().map(|c| c.powi(4)).sum::<f64>() + 0.3 * u[0] * u[0]).powf(-0.25),
            true,
            Regularity::Smooth,
        );
        sampled = sampled
            .max(polar_legendre_check(&HomogeneousConvex::gauge_power(&body, q).unwrap()).unwrap());
    }
    Outcome {
        id: 4,
        pass: exact <= 1e-6 && sampled <= 1e-4,
        detail: format!("ball/ellipsoid {exact:.1e}, sampled anisotropic {sampled:.1e}"),
    }
}

fn randomized_extremals(count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| extremal(&random_extremal_params(dims(3, 2.0), &mut rng).unwrap()).unwrap())
        .collect()
}

fn criterion_5(extremals: &[TestFunction]) -> Outcome {
    let start = Instant::now();
    let worst_eq = extremals
        .iter()
        .map(|f| (affine_ratio(&Analysis::new(f, 2.0).unwrap()) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let worst_bump = (0..10)
        .map(|_| affine_ratio(&Analysis::new(&random_bump(3, &mut rng).unwrap(), 2.0).unwrap()))
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 5,
        pass: worst_eq <= 5e-3 && worst_bump < 1.0 - 1e-3 && secs < 60.0,
        detail: format!(
            "extremals |ratio-1| {worst_eq:.1e}, bumps max ratio {worst_bump:.4}, {secs:.1} s"
        ),
    }
}

fn criterion_6(extremals: &[TestFunction]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut spread: f64 = 0.0;
    for f in extremals {
        let base = affine_ratio(&Analysis::new(f, 2.0).unwrap());
        for _ in 0..20 {
            let frame = AffineFrame::random(3, 5.0, &mut rng);
            let r = affine_ratio(&Analysis::new(&gl_pullback(f, &frame).unwrap(), 2.0).unwrap());
            spread = spread.max(rel(r, base));
        }
    }
    Outcome {
        id: 6,
        pass: spread <= 1e-4,
        detail: format!("max ratio variation over 20 frames each {spread:.1e}"),
    }
}

/// Printed and least Young constants against the balanced radial extremal.
fn young_ratios(d: Dimensions) -> (f64, f64) {
    let f = balanced_radial_extremal(d, 1.0).unwrap();
    let links = young_form(&Analysis::new(&f, d.p()).unwrap(), 5e-3).unwrap();
    let get = |c: &str| links.iter().find(|l| l.check == c).unwrap().ratio;
    (get("young_printed"), get("young_sharp"))
}

const YOUNG_DIMS: [(usize, f64); 3] = [(3, 2.0), (3, 1.5), (4, 2.0)];

fn criterion_7() -> Outcome {
    let mut holder_excess = f64::NEG_INFINITY;
    let mut radial_gap: f64 = 0.0;
    for (n, p) in [(3usize, 2.0), (3, 1.5), (3, 2.5), (4, 2.0)] {
        let corpus = Corpus::generate(dims(n, p), 7, 4).unwrap();
        for cf in &corpus.functions {
            let a = Analysis::new(&cf.function, p).unwrap();
            holder_excess = holder_excess.max(a.energy - a.tilde);
            if cf.radial {
                radial_gap = radial_gap.max(rel(a.energy, a.tilde));
            }
        }
    }
    let mut printed_gap: f64 = 0.0;
    let mut sharp_gap: f64 = 0.0;
    for (n, p) in YOUNG_DIMS {
        let (printed, sharp) = young_ratios(dims(n, p));
        printed_gap = printed_gap.max((printed - 1.0).abs());
        sharp_gap = sharp_gap.max((sharp - 1.0).abs());
    }
    let printed_ok = printed_gap <= 5e-3;
    Outcome {
        id: 7,
        pass: holder_excess <= 1e-6 && radial_gap <= 1e-4 && printed_ok && sharp_gap <= 5e-3,
        detail: format!(
            "E - |grad x f| max {holder_excess:.1e}, radial |E/|grad x f| - 1| {radial_gap:.1e}, \
             Young with printed d2 off equality by {printed_gap:.4} (least constant: {sharp_gap:.1e})"
        ),
    }
}

fn two_orientation_mixture() -> TestFunction {
    gaussian_sum(
        3,
        &[
            GaussianBump {
                weight: 1.0,
                center: vec![0.2, 2.0, 0.0],
                matrix: vec![1.0, 0.0, 0.0, 0.0, 20.0, 0.0, 0.0, 0.0, 0.2],
            },
            GaussianBump {
                weight: 1.0,
                center: vec![0.2, -2.0, 0.0],
                matrix: vec![1.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 20.0],
            },
        ],
    )
    .unwrap()
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut lemma2: f64 = 0.0;
    let mut links_hold = true;
    let mut radial_gap: f64 = 0.0;
    for p in [2.0, 1.5] {
        let d = dims(3, p);
        let anisotropic = ExtremalParams::new(
            d,
            1.4,
            0.8,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]),
            vec![0.2, 0.0],
            1.0,
        )
        .unwrap();
        for (f, radial) in [
            (extremal(&ExtremalParams::standard(d)).unwrap(), true),
            (extremal(&anisotropic).unwrap(), false),
        ] {
            let cf = CfData::new(Analysis::new(&f, p).unwrap()).unwrap();
            lemma2 = lemma2.max(lemma2_check(&cf).unwrap().worst());
            let chain = proof_chain(&cf, tol).unwrap();
            links_hold &= chain.pass();
            if radial {
                radial_gap = chain
                    .links
                    .iter()
                    .map(|l| (l.ratio - 1.0).abs())
                    .fold(radial_gap, f64::max);
            }
        }
    }
    let cf = CfData::new(Analysis::new(&two_orientation_mixture(), 1.5).unwrap()).unwrap();
    lemma2 = lemma2.max(lemma2_check(&cf).unwrap().worst());
    let chain = proof_chain(&cf, tol).unwrap();
    links_hold &= chain.pass();
    let bp = chain.link("chain_busemann_petty").unwrap().ratio;
    Outcome {
        id: 8,
        pass: lemma2 <= 1e-3 && links_hold && radial_gap <= 5e-3 && Expectation::StrictlyBelow.holds(bp, 1e-4),
        detail: format!(
            "lemma2 {lemma2:.1e}, all links hold: {links_hold}, radial links |ratio-1| {radial_gap:.1e}, \
             non-ellipsoidal BP link {bp:.6}"
        ),
    }
}

fn criterion_9() -> Outcome {
    let pair = ConjugatePair::euclidean(3, 2.0, 1.0).unwrap();
    let f = c_extremal(&pair.c, 2.0, 1.0, &[0.0, 0.0], 1.0).unwrap();
    let eq = nazaret_ratio_with(&Analysis::new(&f, 2.0).unwrap(), &pair)
        .unwrap()
        .ratio;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let bumps = (0..5)
        .map(|_| {
            nazaret_ratio_with(
                &Analysis::new(&random_bump(3, &mut rng).unwrap(), 2.0).unwrap(),
                &pair,
            )
            .unwrap()
            .ratio
        })
        .fold(0.0, f64::max);
    Outcome {
        id: 9,
        pass: (eq - 1.0).abs() <= 5e-3 && bumps < 1.0,
        detail: format!("Escobar extremal {eq:.6}, bumps max {bumps:.4}"),
    }
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let a = run_suite(&SuiteConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let b = run_suite(&SuiteConfig {
        workers: Some(1),
        ..SuiteConfig::default()
    })
    .unwrap();
    let strip = |o: &afftrace_cli::Outcome| {
        o.reports
            .iter()
            .map(|r| r.untimed().to_json())
            .collect::<Vec<_>>()
    };
    let deterministic = strip(&a) == strip(&b) && a.summary.untimed() == b.summary.untimed();
    Outcome {
        id: 10,
        pass: a.summary.all_passed() && secs < 300.0 && deterministic,
        detail: format!(
            "{} checks, {} failed, {secs:.1} s, deterministic: {deterministic}",
            a.summary.total, a.summary.failed
        ),
    }
}

#[test]
fn acceptance() {
    let extremals = randomized_extremals(10, 5);
    let criteria: Vec<Box<dyn Fn() -> Outcome>> = vec![
        Box::new(criterion_1),
        Box::new(criterion_2),
        Box::new(criterion_3),
        Box::new(criterion_4),
        Box::new(|| criterion_5(&extremals)),
        Box::new(|| criterion_6(&extremals)),
        Box::new(criterion_7),
        Box::new(criterion_8),
        Box::new(criterion_9),
        Box::new(criterion_10),
    ];
    let mut unexpected = Vec::new();
    for c in &criteria {
        let o = c();
        line(&o);
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:?}");
}

/// The printed-d2 half of criterion 7. Fails: the ratio is about 0.707 at p = 2.
#[test]
#[ignore = "known unattainable: the printed d2 is not the least Young constant"]
fn printed_young_constant_is_attained_on_radial_extremals() {
    for (n, p) in YOUNG_DIMS {
        let (printed, _) = young_ratios(dims(n, p));
        assert!(
            (printed - 1.0).abs() <= 5e-3,
            "n = {n}, p = {p}: printed-d2 ratio {printed:.6}"
        );
    }
}

/// What the printed d2 does satisfy: it exceeds the least constant by the
/// predicted factor, so the Young form holds with the predicted slack.
#[test]
fn printed_young_constant_exceeds_the_least_by_the_predicted_factor() {
    for (n, p) in YOUNG_DIMS {
        let d = dims(n, p);
        let c = ConstantSet::new(d);
        let q = d.q();
        let factor =
            p * (p.powf(1.0 / p) * q.powf(1.0 / q)).powf(-1.0 / p) / (p - 1.0).powf(1.0 / q);
        assert!(rel(c.d2 / c.d2_sharp, factor) < 1e-12);
        let (printed, sharp) = young_ratios(d);
        assert!(rel(printed * factor, sharp) < 1e-9, "n = {n}, p = {p}");
    }
}
