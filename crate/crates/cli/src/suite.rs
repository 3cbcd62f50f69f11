//! The verification suite: check jobs, their concurrent execution and
//! in-order streaming of the reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use afftrace::constants::{beta_moment, sharp_a, sharp_k, sphere_area, ConstantSet, Dimensions};
use afftrace::convex::{
    centroid_support, ellipsoid_fit_residual, polar_legendre_check, HomogeneousConvex, Regularity,
    StarBody,
};
use afftrace::quadrature::{
    gauss_jacobi, integrate_halfspace, sphere_rule, weighted_hemisphere_rule, DecayProfile, Orders,
};
use afftrace::report::{Expectation, VerificationReport};
use afftrace::special::ln_gamma;
use afftrace::trace::{
    affine_ratio, appendix_chain, balanced_radial_extremal, c_extremal, classical_ordering,
    gl_pullback, holder_check, lemma1_constant, lemma2_check, nazaret_ratio_with, proof_chain,
    verify_affine_with, young_form, AffineFrame, Analysis, CfData, ConjugatePair, TestFunction,
    Tolerances,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CheckGroup, Format, SuiteConfig};
use crate::corpus::{Corpus, CorpusFunction, Kind};
use crate::UsageError;

type Reports = Vec<VerificationReport>;

/// One unit of scheduled work.
pub struct Job {
    pub group: CheckGroup,
    pub name: String,
    run: Box<dyn FnOnce() -> Reports + Send>,
}

impl Job {
    fn new(
        group: CheckGroup,
        name: impl Into<String>,
        run: impl FnOnce() -> Reports + Send + 'static,
    ) -> Self {
        Job {
            group,
            name: name.into(),
            run: Box::new(run),
        }
    }

    fn fallible(
        group: CheckGroup,
        name: impl Into<String>,
        anchor: &'static str,
        run: impl FnOnce() -> afftrace::Result<Reports> + Send + 'static,
    ) -> Self {
        let name = name.into();
        let label = name.clone();
        Job::new(group, name, move || match run() {
            Ok(r) => r,
            Err(e) => vec![VerificationReport::error(
                &label,
                anchor,
                &label,
                e.to_string(),
            )],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub seed: u64,
    pub dims: Vec<(usize, f64)>,
    /// Pass counts per check name.
    pub by_check: BTreeMap<String, (usize, usize)>,
    /// `check@digest` of every failure.
    pub failures: Vec<String>,
    pub wall_time_ms: f64,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Same summary without timing, for reproducibility comparisons.
    pub fn untimed(&self) -> Self {
        Summary {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

pub struct Outcome {
    pub reports: Reports,
    pub summary: Summary,
}

struct Context {
    dims: Dimensions,
    tol: Tolerances,
    orders: Option<Orders>,
}

impl Context {
    fn analyse(&self, f: &TestFunction) -> afftrace::Result<Analysis> {
        match self.orders {
            Some(o) => Analysis::with_orders(f, self.dims.p(), o),
            None => Analysis::new(f, self.dims.p()),
        }
    }
}

/// The jobs of a configuration, in emission order.
pub fn plan(config: &SuiteConfig) -> Result<Vec<Job>, UsageError> {
    config.validate()?;
    let mut jobs = Vec::new();
    let mut groups = config.checks.clone();
    groups.sort();
    groups.dedup();
    for group in &groups {
        match group {
            CheckGroup::Constants => constants_jobs(&mut jobs),
            CheckGroup::Appendix => appendix_jobs(config, &mut jobs)?,
            _ => {}
        }
    }
    for dims in config.dimensions()? {
        let corpus = Arc::new(
            Corpus::generate(dims, config.seed, config.extremals)
                .map_err(|e| UsageError(format!("corpus generation failed: {e}")))?,
        );
        let ctx = Arc::new(Context {
            dims,
            tol: config.tolerances,
            orders: config.orders,
        });
        for group in &groups {
            match group {
                CheckGroup::Constants => dims_constant_jobs(dims, &mut jobs),
                CheckGroup::Quadrature => quadrature_jobs(&ctx, &corpus, &mut jobs),
                CheckGroup::Convex => convex_jobs(&ctx, &corpus, &mut jobs),
                CheckGroup::Lemmas => lemma_jobs(&ctx, &corpus, &mut jobs),
                CheckGroup::Theorems => theorem_jobs(&ctx, &corpus, config, &mut jobs),
                CheckGroup::Chain => chain_jobs(&ctx, &corpus, &mut jobs),
                CheckGroup::Appendix => {}
            }
        }
    }
    Ok(jobs)
}

/// Runs the suite, handing each report to `sink` in plan order as soon as
/// it and everything before it are done.
pub fn run_suite_with(
    config: &SuiteConfig,
    mut sink: impl FnMut(&VerificationReport),
) -> Result<Outcome, UsageError> {
    let start = Instant::now();
    let jobs = plan(config)?;
    let count = jobs.len();
    let workers = config.worker_count().min(count.max(1));
    let queue: Vec<std::sync::Mutex<Option<Job>>> = jobs
        .into_iter()
        .map(|j| std::sync::Mutex::new(Some(j)))
        .collect();
    let queue = Arc::new(queue);
    let next = Arc::new(AtomicUsize::new(0));
    let (tx, rx) = mpsc::channel::<(usize, Reports)>();
    let mut reports = Vec::new();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let queue = queue.clone();
            let next = next.clone();
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= queue.len() {
                    break;
                }
                let job = queue[i].lock().unwrap().take().expect("each job runs once");
                if tx.send((i, (job.run)())).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending: BTreeMap<usize, Reports> = BTreeMap::new();
        let mut emitted = 0;
        for (i, batch) in rx {
            pending.insert(i, batch);
            while let Some(batch) = pending.remove(&emitted) {
                for r in &batch {
                    sink(r);
                }
                reports.extend(batch);
                emitted += 1;
            }
        }
    });
    let summary = summarize(config, &reports, start);
    Ok(Outcome { reports, summary })
}

pub fn run_suite(config: &SuiteConfig) -> Result<Outcome, UsageError> {
    run_suite_with(config, |_| {})
}

fn summarize(config: &SuiteConfig, reports: &[VerificationReport], start: Instant) -> Summary {
    let mut by_check: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut failures = Vec::new();
    for r in reports {
        let e = by_check.entry(r.check.clone()).or_default();
        e.1 += 1;
        if r.pass {
            e.0 += 1;
        } else {
            failures.push(format!("{}@{}", r.check, &r.inputs_digest[..12]));
        }
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    Summary {
        total: reports.len(),
        passed,
        failed: reports.len() - passed,
        seed: config.seed,
        dims: config.dims.clone(),
        by_check,
        failures,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Streams reports as line-delimited JSON or CSV rows.
pub struct ReportWriter<W: Write> {
    format: Format,
    json: Option<W>,
    csv: Option<csv::Writer<W>>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    anchor: &'a str,
    inputs_digest: &'a str,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    tolerance: f64,
    expectation: Expectation,
    pass: bool,
    equality: bool,
    wall_time_ms: f64,
    note: &'a str,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W, format: Format) -> Self {
        match format {
            Format::Json => ReportWriter {
                format,
                json: Some(out),
                csv: None,
            },
            Format::Csv => ReportWriter {
                format,
                json: None,
                csv: Some(csv::Writer::from_writer(out)),
            },
        }
    }

    pub fn report(&mut self, r: &VerificationReport) -> std::io::Result<()> {
        if let Some(w) = &mut self.json {
            writeln!(w, "{}", r.to_json())?;
            w.flush()?;
        }
        if let Some(w) = &mut self.csv {
            w.serialize(CsvRow {
                check: &r.check,
                anchor: &r.anchor,
                inputs_digest: &r.inputs_digest,
                lhs: r.lhs,
                rhs: r.rhs,
                ratio: r.ratio,
                tolerance: r.tolerance,
                expectation: r.expectation,
                pass: r.pass,
                equality: r.equality,
                wall_time_ms: r.wall_time_ms,
                note: r.note.as_deref().unwrap_or(""),
            })
            .map_err(std::io::Error::other)?;
            w.flush()?;
        }
        Ok(())
    }

    /// The summary is the last JSON line; CSV output has no place for it.
    pub fn summary(&mut self, s: &Summary) -> std::io::Result<()> {
        if let (Format::Json, Some(w)) = (self.format, &mut self.json) {
            writeln!(w, "{}", serde_json::json!({ "summary": s }))?;
            w.flush()?;
        }
        Ok(())
    }
}

fn timed(start: Instant, r: VerificationReport) -> VerificationReport {
    r.timed(start)
}

fn constants_jobs(jobs: &mut Vec<Job>) {
    jobs.push(Job::fallible(
        CheckGroup::Constants,
        "affine_constant_at_two",
        "classical-constant",
        || {
            let mut out = Vec::new();
            for n in 3..=12 {
                let start = Instant::now();
                let a = sharp_a(Dimensions::new(n, 2.0)?);
                let r = VerificationReport::compare(
                    "affine_constant_at_two",
                    "classical-constant",
                    &format!("n={n}"),
                    a,
                    sharp_k(n)?,
                    Expectation::Equal,
                    1e-12,
                );
                out.push(timed(start, r));
            }
            Ok(out)
        },
    ));
}

/// `∫_0^1 t^a (1 − t^q)^b dt` by Gauss–Jacobi quadrature in `t`.
pub fn beta_moment_by_quadrature(dims: Dimensions) -> f64 {
    let (n, q) = (dims.n() as f64, dims.q());
    let a = q * n - q - n;
    let b = (n - 1.0) / q;
    let rule = gauss_jacobi(200, b, a);
    0.5f64.powf(a + b + 1.0)
        * rule.integrate(|x| {
            let t = 0.5 * (1.0 + x);
            ((1.0 - t.powf(q)) / (1.0 - t)).powf(b)
        })
}

fn dims_constant_jobs(dims: Dimensions, jobs: &mut Vec<Job>) {
    jobs.push(Job::new(CheckGroup::Constants, "constants", move || {
        let desc = format!("n={} p={:?}", dims.n(), dims.p());
        let start = Instant::now();
        let beta = VerificationReport::compare(
            "beta_moment",
            "beta-integral",
            &desc,
            beta_moment_by_quadrature(dims),
            beta_moment(dims),
            Expectation::Equal,
            1e-10,
        );
        let set = ConstantSet::new(dims);
        let d1 = VerificationReport::compare(
            "d1_definition",
            "d1-constant",
            &desc,
            set.d1,
            dims.p() * sharp_a(dims),
            Expectation::Equal,
            1e-12,
        );
        let young = VerificationReport::compare(
            "d2_sharp_definition",
            "young-form-least-constant",
            &desc,
            set.d2_sharp,
            (dims.p() - 1.0).powf(1.0 / dims.q()) * sharp_a(dims),
            Expectation::Equal,
            1e-12,
        );
        vec![timed(start, beta), d1, young]
    }));
}

fn appendix_jobs(config: &SuiteConfig, jobs: &mut Vec<Job>) -> Result<(), UsageError> {
    let mut grid: Vec<Dimensions> = [3usize, 4, 5, 8]
        .into_iter()
        .flat_map(|n| {
            [1.5, 2.0, 2.5, 3.0]
                .into_iter()
                .filter_map(move |p| Dimensions::new(n, p).ok())
        })
        .collect();
    for d in config.dimensions()? {
        if !grid.contains(&d) {
            grid.push(d);
        }
    }
    jobs.push(Job::new(
        CheckGroup::Appendix,
        "appendix_chain",
        move || {
            grid.into_iter()
                .map(|d| {
                    let start = Instant::now();
                    let desc = format!("n={} p={:?}", d.n(), d.p());
                    timed(
                        start,
                        VerificationReport::residual(
                            "appendix_chain",
                            "d1-appendix-chain",
                            &desc,
                            appendix_chain(d),
                            1e-11,
                        ),
                    )
                })
                .collect()
        },
    ));
    Ok(())
}

/// `∫_{S^{m−1}_+} θ_1^a dθ = π^{(m−1)/2} Γ((a+1)/2) / Γ((a+m)/2)`.
fn hemisphere_moment(m: usize, a: f64) -> f64 {
    let mf = m as f64;
    (0.5 * (mf - 1.0) * PI.ln() + ln_gamma(0.5 * (a + 1.0)) - ln_gamma(0.5 * (a + mf))).exp()
}

fn quadrature_jobs(ctx: &Arc<Context>, corpus: &Arc<Corpus>, jobs: &mut Vec<Job>) {
    let n = ctx.dims.n();
    jobs.push(Job::fallible(
        CheckGroup::Quadrature,
        "quadrature_rules",
        "sphere-quadrature",
        move || {
            let mut out = Vec::new();
            for m in 2..=n.max(3) {
                let rule = sphere_rule(m, 15)?;
                out.push(VerificationReport::compare(
                    "sphere_rule_mass",
                    "sphere-quadrature",
                    &format!("m={m}"),
                    rule.total_weight(),
                    sphere_area(m),
                    Expectation::Equal,
                    1e-12,
                ));
                for a in [-0.5, 0.0, 1.7] {
                    let rule = weighted_hemisphere_rule(m, 15, a)?;
                    out.push(VerificationReport::compare(
                        "hemisphere_moment",
                        "hemisphere-quadrature",
                        &format!("m={m} a={a:?}"),
                        rule.total_weight(),
                        hemisphere_moment(m, a),
                        Expectation::Equal,
                        1e-12,
                    ));
                }
            }
            // ∫_{R^n_+} e^{−|y|²} = π^{n/2}/2
            let g = integrate_halfspace(
                |y| (-y.iter().map(|c| c * c).sum::<f64>()).exp(),
                n,
                DecayProfile::rapid(1.0),
                Orders::default_for(n),
            )?;
            out.push(VerificationReport::compare(
                "halfspace_gaussian",
                "halfspace-quadrature",
                &format!("n={n}"),
                g.value,
                0.5 * PI.powf(0.5 * n as f64),
                Expectation::Equal,
                1e-10,
            ));
            Ok(out)
        },
    ));
    // self-convergence on one member of each kind
    let mut seen = Vec::new();
    for (i, f) in corpus.functions.iter().enumerate() {
        if seen.contains(&f.kind) {
            continue;
        }
        seen.push(f.kind);
        let (ctx, corpus) = (ctx.clone(), corpus.clone());
        jobs.push(Job::fallible(
            CheckGroup::Quadrature,
            "self_convergence",
            "halfspace-quadrature",
            move || {
                let start = Instant::now();
                let f = &corpus.functions[i].function;
                let p = ctx.dims.p();
                let base = ctx.orders.unwrap_or(Orders::default_for(f.n()));
                let a = Analysis::with_orders(f, p, base)?;
                let b = Analysis::with_orders(f, p, base.doubled())?;
                let rel = |x: f64, y: f64| (x / y - 1.0).abs();
                let worst = rel(a.trace, b.trace)
                    .max(rel(a.dt, b.dt))
                    .max(rel(a.energy, b.energy))
                    .max(rel(a.tilde, b.tilde));
                let desc = format!("{} | p={p:?}", f.descriptor());
                Ok(vec![timed(
                    start,
                    VerificationReport::residual(
                        "self_convergence",
                        "halfspace-quadrature",
                        &desc,
                        worst,
                        ctx.tol.invariance,
                    )
                    .with_detail("trace", rel(a.trace, b.trace))
                    .with_detail("dt_norm", rel(a.dt, b.dt))
                    .with_detail("energy", rel(a.energy, b.energy)),
                )])
            },
        ));
    }
}

fn is_ellipsoid(k: &StarBody) -> bool {
    k.label().starts_with("ellipsoid") || k.label().starts_with("ball")
}

fn convex_jobs(ctx: &Arc<Context>, corpus: &Arc<Corpus>, jobs: &mut Vec<Job>) {
    for (i, body) in corpus.bodies.iter().enumerate() {
        let corpus = corpus.clone();
        let label = body.label().to_string();
        jobs.push(Job::fallible(
            CheckGroup::Convex,
            format!("busemann_petty {label}"),
            "busemann-petty-centroid",
            move || {
                let k = &corpus.bodies[i];
                let mut out = Vec::new();
                for p in [1.5, 2.0, 3.0] {
                    let start = Instant::now();
                    let vol_k = k.volume();
                    let vol_g = centroid_support(k, p)?.volume()?;
                    let desc = format!("{} | p={p:?}", k.label());
                    // vol(K) ≤ vol(Γ_p K), equality for centred ellipsoids
                    let (expect, tol) = if is_ellipsoid(k) {
                        (Expectation::Equal, 1e-5)
                    } else {
                        (Expectation::AtMost, 1e-6)
                    };
                    out.push(timed(
                        start,
                        VerificationReport::compare(
                            "busemann_petty",
                            "busemann-petty-centroid",
                            &desc,
                            vol_k,
                            vol_g,
                            expect,
                            tol,
                        )
                        .with_detail("gap", vol_g / vol_k - 1.0),
                    ));
                }
                Ok(out)
            },
        ));
    }
    let m = ctx.dims.n() - 1;
    if m == 2 {
        jobs.push(Job::fallible(
            CheckGroup::Convex,
            "square_centroid",
            "centroid-body-square",
            || {
                let sq = StarBody::cuboid(&[1.0, 1.0])?;
                let vol = centroid_support(&sq, 2.0)?.volume()?;
                Ok(vec![VerificationReport::compare(
                    "square_centroid",
                    "centroid-body-square",
                    "square p=2",
                    vol,
                    4.0 * PI / 3.0,
                    Expectation::Equal,
                    1e-5,
                )])
            },
        ));
    }
    let q = ctx.dims.q();
    jobs.push(Job::fallible(
        CheckGroup::Convex,
        "polar_legendre",
        "polar-legendre",
        move || {
            let mut out = Vec::new();
            let ball = HomogeneousConvex::euclidean_power(m, q, 1.0)?;
            let mut diag = DMatrix::identity(m, m);
            for k in 0..m {
                diag[(k, k)] = 1.0 + k as f64;
            }
            diag[(0, m - 1)] = 0.3;
            diag[(m - 1, 0)] = 0.3;
            let ellipsoid = HomogeneousConvex::quadratic_power(diag, q)?;
            // the ℓ^4 ball: smooth, strictly convex, not an ellipsoid
            let l4 = StarBody::from_radial(
                m,
                |u: &[f64]| u.iter().map(|c| c.powi(4)).sum::<f64>().powf(-0.25),
                true,
                Regularity::Smooth,
            );
            let sampled = HomogeneousConvex::gauge_power(&l4, q)?;
            for (c, tol) in [(ball, 1e-6), (ellipsoid, 1e-6), (sampled, 1e-4)] {
                let start = Instant::now();
                let desc = format!("{} | m={m} q={q:?}", c.label());
                out.push(timed(
                    start,
                    VerificationReport::residual(
                        "polar_legendre",
                        "polar-legendre",
                        &desc,
                        polar_legendre_check(&c)?,
                        tol,
                    ),
                ));
            }
            Ok(out)
        },
    ));
}

fn first_of(corpus: &Corpus, kind: Kind) -> Option<usize> {
    corpus.functions.iter().position(|f| f.kind == kind)
}

/// The extremal radial in `x`.
fn standard_extremal(corpus: &Corpus) -> Option<usize> {
    corpus
        .functions
        .iter()
        .position(|f| f.kind == Kind::Extremal && f.radial)
}

fn lemma_jobs(ctx: &Arc<Context>, corpus: &Arc<Corpus>, jobs: &mut Vec<Job>) {
    let dims = ctx.dims;
    let (n, p, q) = (dims.n(), dims.p(), dims.q());
    let seed = corpus.seed;
    jobs.push(Job::fallible(
        CheckGroup::Lemmas,
        "lemma1_routes",
        "optimal-constant-two-routes",
        move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e33a1);
            let mut cs = vec![HomogeneousConvex::euclidean_power(n, q, 1.0)?];
            for _ in 0..3 {
                let frame = AffineFrame::random(n + 1, 4.0, &mut rng);
                let m = &frame.b * frame.b.transpose();
                cs.push(HomogeneousConvex::quadratic_power(
                    0.5 * (&m + m.transpose()),
                    q,
                )?);
            }
            if n == 3 && p == 2.0 {
                // the cubic pairs with p = 3/2
                cs.push(HomogeneousConvex::euclidean_power(3, 3.0, 1.0)?);
            }
            let mut out = Vec::new();
            for c in cs {
                let start = Instant::now();
                let pc = c.dual_degree();
                let l = lemma1_constant(&c, pc)?;
                let desc = format!("{} | n={n} p={pc:?}", c.label());
                out.push(timed(
                    start,
                    VerificationReport::compare(
                        "lemma1_routes",
                        "optimal-constant-two-routes",
                        &desc,
                        l.route_a,
                        l.route_b,
                        Expectation::Equal,
                        1e-6,
                    ),
                ));
            }
            if n == 3 {
                let start = Instant::now();
                let k = lemma1_constant(&HomogeneousConvex::euclidean_power(3, 2.0, 1.0)?, 2.0)?
                    .value();
                out.push(timed(
                    start,
                    VerificationReport::compare(
                        "lemma1_euclidean",
                        "optimal-constant-euclidean",
                        "|y|^2 n=3",
                        k,
                        4.0 / PI.sqrt(),
                        Expectation::Equal,
                        1e-6,
                    ),
                ));
                out.push(VerificationReport::compare(
                    "lemma1_classical",
                    "optimal-constant-euclidean",
                    "|y|^2/4 n=3",
                    k / 4.0,
                    sharp_k(3)?,
                    Expectation::Equal,
                    1e-6,
                ));
            }
            Ok(out)
        },
    ));
    let tol = ctx.tol;
    let ctx2 = ctx.clone();
    jobs.push(Job::fallible(
        CheckGroup::Lemmas,
        "nazaret_extremal",
        "trace-inequality-convex",
        move || {
            let start = Instant::now();
            let pair = ConjugatePair::euclidean(n, q, 1.0)?;
            let f = c_extremal(&pair.c, p, 1.0, &vec![0.0; n - 1], 1.0)?;
            let r = nazaret_ratio_with(&ctx2.analyse(&f)?, &pair)?;
            Ok(vec![timed(
                start,
                VerificationReport::compare(
                    "nazaret_extremal",
                    "trace-inequality-convex",
                    f.descriptor(),
                    r.trace,
                    r.constant * r.energy,
                    Expectation::Equal,
                    tol.equality,
                ),
            )])
        },
    ));
    for (i, f) in corpus
        .functions
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == Kind::Bump)
    {
        let (ctx, corpus) = (ctx.clone(), corpus.clone());
        jobs.push(Job::fallible(
            CheckGroup::Lemmas,
            format!("nazaret_bump {}", f.descriptor()),
            "trace-inequality-convex",
            move || {
                let start = Instant::now();
                let f = &corpus.functions[i].function;
                let pair = ConjugatePair::euclidean(n, q, 1.0)?;
                let r = nazaret_ratio_with(&ctx.analyse(f)?, &pair)?;
                Ok(vec![timed(
                    start,
                    VerificationReport::compare(
                        "nazaret_bump",
                        "trace-inequality-convex",
                        f.descriptor(),
                        r.trace,
                        r.constant * r.energy,
                        Expectation::StrictlyBelow,
                        tol.equality,
                    ),
                )])
            },
        ));
    }
    let picks = [
        standard_extremal(corpus),
        first_of(corpus, Kind::Extremal),
        first_of(corpus, Kind::Anisotropic),
    ];
    for i in picks.into_iter().flatten() {
        let (ctx, corpus) = (ctx.clone(), corpus.clone());
        jobs.push(Job::fallible(
            CheckGroup::Lemmas,
            "cf_structure",
            "cf-structure",
            move || {
                let start = Instant::now();
                let f = &corpus.functions[i].function;
                let cf = CfData::new(ctx.analyse(f)?)?;
                let desc = format!("{} | p={:?}", f.descriptor(), ctx.dims.p());
                let l2 = lemma2_check(&cf)?;
                let mut out = vec![
                    VerificationReport::residual(
                        "cf_decomposition",
                        "cf-decomposition",
                        &desc,
                        cf.decomposition_residual()?,
                        tol.identity,
                    ),
                    VerificationReport::residual(
                        "cf_slices",
                        "cf-slice-law",
                        &desc,
                        cf.slice_law_residual()?,
                        tol.invariance,
                    ),
                    VerificationReport::residual(
                        "lemma2_radial",
                        "centroid-body-identity",
                        &desc,
                        l2.radial,
                        1e-3,
                    ),
                    VerificationReport::residual(
                        "lemma2_volume",
                        "centroid-body-volume",
                        &desc,
                        l2.volume,
                        1e-3,
                    ),
                ];
                if corpus.functions[i].kind == Kind::Extremal {
                    out.push(VerificationReport::residual(
                        "k0_ellipsoid",
                        "cf-extremal-ellipsoid",
                        &desc,
                        ellipsoid_fit_residual(&cf.k0)?,
                        tol.invariance,
                    ));
                }
                Ok(out.into_iter().map(|r| timed(start, r)).collect())
            },
        ));
    }
}

fn theorem_jobs(
    ctx: &Arc<Context>,
    corpus: &Arc<Corpus>,
    config: &SuiteConfig,
    jobs: &mut Vec<Job>,
) {
    let frames = config.frames;
    for (i, f) in corpus.functions.iter().enumerate() {
        let (ctx, corpus) = (ctx.clone(), corpus.clone());
        let seed = corpus.seed.wrapping_add(i as u64);
        jobs.push(Job::fallible(
            CheckGroup::Theorems,
            format!("theorems {}", f.descriptor()),
            "affine-trace-inequality",
            move || theorem_reports(&ctx, &corpus.functions[i], frames, seed),
        ));
    }
    let (dims, tol) = (ctx.dims, ctx.tol);
    let ctx2 = ctx.clone();
    jobs.push(Job::fallible(
        CheckGroup::Theorems,
        "young_form_balanced",
        "young-form",
        move || {
            let f = balanced_radial_extremal(dims, 1.0)?;
            let start = Instant::now();
            let a = ctx2.analyse(&f)?;
            Ok(young_form(&a, tol.equality)?
                .into_iter()
                .map(|r| {
                    if r.check == "young_sharp" {
                        r.with_expectation(Expectation::Equal)
                    } else {
                        r
                    }
                })
                .map(|r| timed(start, r))
                .collect())
        },
    ));
}

/// verify_affine with the expectation of the function's kind, Hölder,
/// amplitude and affine invariance, the ordering against the classical
/// form at `p = 2`, and the Young-form links on generic functions.
fn theorem_reports(
    ctx: &Context,
    cf: &CorpusFunction,
    frames: usize,
    seed: u64,
) -> afftrace::Result<Reports> {
    let tol = ctx.tol;
    let f = &cf.function;
    let start = Instant::now();
    let a = ctx.analyse(f)?;
    let mut out = Vec::new();
    let main = verify_affine_with(&a, tol.equality);
    out.push(timed(
        start,
        match cf.kind {
            Kind::Extremal => main.with_expectation(Expectation::Equal),
            k if k.is_generic() => main.with_expectation(Expectation::StrictlyBelow),
            _ => main,
        },
    ));
    let holder = holder_check(&a, tol.identity);
    out.push(if cf.radial {
        VerificationReport {
            tolerance: tol.invariance,
            ..holder
        }
        .with_expectation(Expectation::Equal)
    } else {
        holder
    });
    if ctx.dims.p() == 2.0 {
        out.push(classical_ordering(&a, tol.identity)?);
    }
    let base = affine_ratio(&a);
    let start = Instant::now();
    let scaled = affine_ratio(&ctx.analyse(&f.scaled(-2.5))?);
    out.push(timed(
        start,
        VerificationReport::compare(
            "amplitude_invariance",
            "amplitude-invariance",
            f.descriptor(),
            scaled,
            base,
            Expectation::Equal,
            1e-12,
        ),
    ));
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xaff1e);
    let mut worst: f64 = 0.0;
    for _ in 0..frames {
        let frame = AffineFrame::random(f.n(), 5.0, &mut rng);
        let r = affine_ratio(&ctx.analyse(&gl_pullback(f, &frame)?)?);
        worst = worst.max((r / base - 1.0).abs());
    }
    if frames > 0 {
        out.push(timed(
            start,
            VerificationReport::residual(
                "affine_invariance",
                "affine-invariance",
                f.descriptor(),
                worst,
                tol.invariance,
            )
            .with_detail("frames", frames as f64),
        ));
    }
    if cf.kind.is_generic() {
        for r in young_form(&a, tol.equality)? {
            out.push(if r.check == "young_interpolation" {
                r
            } else {
                r.with_expectation(Expectation::StrictlyBelow)
            });
        }
    }
    Ok(out)
}

fn chain_jobs(ctx: &Arc<Context>, corpus: &Arc<Corpus>, jobs: &mut Vec<Job>) {
    let picks = [
        (standard_extremal(corpus), true),
        (first_of(corpus, Kind::Extremal), ctx.dims.p() == 2.0),
        (first_of(corpus, Kind::Anisotropic), false),
        (first_of(corpus, Kind::Bump), false),
    ];
    for (i, tight) in picks.into_iter().filter_map(|(i, t)| Some((i?, t))) {
        let (ctx, corpus) = (ctx.clone(), corpus.clone());
        jobs.push(Job::fallible(
            CheckGroup::Chain,
            "proof_chain",
            "proof-chain",
            move || {
                let f = &corpus.functions[i].function;
                let cf = CfData::new(ctx.analyse(f)?)?;
                let chain = proof_chain(&cf, ctx.tol)?;
                // every link is an equality on extremals at p = 2 and on the radial one
                Ok(chain
                    .links
                    .into_iter()
                    .map(|l| {
                        if tight {
                            l.with_expectation(Expectation::Equal)
                        } else {
                            l
                        }
                    })
                    .collect())
            },
        ));
    }
}
