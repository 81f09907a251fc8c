//! Seeded property suites. Each suite samples its own inputs, counts cases
//! beyond tolerance, and keeps the worst case for reproduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ball::estimate_distance;
use crate::boundary::{
    base_candidates, nm_scan, o_to_x_distance, prop_nlf_check, Domain, ScanConfig,
};
use crate::chain::{
    chain_cost, is_antipodal_form, normalize_to_antipodal, Chain, ScaledSphere, SphereFamily,
};
use crate::error::{Error, Result};
use crate::function::BoundaryFunction;
use crate::geometry::{
    antipode, euclid, mix_seed, orthonormal_basis, Isometry, Point3, SpherePose, ORIGIN,
};
use crate::graph::DiscretizationConfig;
use crate::shortcut::{alpha, locally_euclidean_radius, shortcut_distance, Branch, ShortcutParam};

pub const SUITES: [&str; 10] = [
    "sphere-axioms",
    "eq1-bounds",
    "isometry",
    "locally-euclidean",
    "normalize-cost",
    "sandwich",
    "lemma-haf",
    "reduction-oracle",
    "prop-nlf",
    "nm-examples",
];

const RADII: [f64; 3] = [0.25, 0.5, 1.0];
const SCALES: [f64; 4] = [0.1, 0.5, 0.9, 1.0];
/// Symmetry is checked at this tolerance regardless of the suite tolerance.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: usize,
    pub violations: usize,
    /// Largest deviation observed (violating or not).
    pub worst: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_case: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub samples: Option<usize>,
    pub seed: u64,
    pub tolerance: Option<f64>,
    /// Nodes per sphere for suites that run the estimator.
    pub nodes: Option<usize>,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            samples: None,
            seed,
            tolerance: None,
            nodes: None,
        }
    }
}

/// `(default samples, default tolerance)` per suite.
pub fn suite_defaults(name: &str) -> Option<(usize, f64)> {
    Some(match name {
        "sphere-axioms" => (100_000, 1e-9),
        "eq1-bounds" => (100_000, 1e-12),
        "isometry" => (10_000, 1e-9),
        "locally-euclidean" => (1_000, 0.0),
        "normalize-cost" => (1_000, 1e-12),
        "sandwich" => (1_000, 1e-9),
        "lemma-haf" => (100, 5e-3),
        "reduction-oracle" => (100, 2e-2),
        "prop-nlf" => (1_000, 0.0),
        "nm-examples" => (10_000, 0.0),
        _ => return None,
    })
}

/// Boundary functions with values in [0, 1] used by the suites.
pub fn test_catalog(seed: u64) -> Vec<BoundaryFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x7AB1E));
    let points: Vec<Point3> = (0..24).map(|_| random_unit(&mut rng)).collect();
    let values: Vec<f64> = (0..24).map(|_| rng.gen::<f64>()).collect();
    vec![
        BoundaryFunction::constant(0.3).expect("valid"),
        BoundaryFunction::spike(Point3::new(0.0, 0.0, 1.0), 1.0, 0.05).expect("valid"),
        BoundaryFunction::distance_to(Point3::new(1.0, 0.0, 0.0))
            .and_then(|f| f.with_scale(0.5))
            .expect("valid"),
        BoundaryFunction::dense_indicator(1000),
        BoundaryFunction::table(points, values).expect("valid"),
    ]
}

struct Tally {
    cases: usize,
    violations: usize,
    worst: f64,
    worst_case: Option<Value>,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            violations: 0,
            worst: 0.0,
            worst_case: None,
        }
    }

    /// Records one case with deviation `dev`; `violated` decides the count.
    fn record(&mut self, dev: f64, violated: bool, case: impl FnOnce() -> Value) {
        self.cases += 1;
        if violated {
            self.violations += 1;
        }
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > self.worst || (violated && self.worst_case.is_none()) {
            self.worst = self.worst.max(dev);
            self.worst_case = Some(case());
        }
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.violations += other.violations;
        if other.worst > self.worst || (self.worst_case.is_none() && other.worst_case.is_some()) {
            self.worst = self.worst.max(other.worst);
            self.worst_case = other.worst_case;
        }
    }

    fn report(self, suite: &str, seed: u64, tolerance: f64) -> VerificationReport {
        VerificationReport {
            suite: suite.to_string(),
            cases: self.cases,
            violations: self.violations,
            worst: self.worst,
            seed,
            tolerance,
            pass: self.violations == 0,
            worst_case: self.worst_case,
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, salt))
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Point3 {
    let z = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Point3::new(rho * phi.cos(), rho * phi.sin(), z)
}

pub fn random_in_ball<R: Rng>(rng: &mut R) -> Point3 {
    random_unit(rng) * rng.gen::<f64>().cbrt()
}

/// A unit vector within angle `spread` of `axis`.
fn perturb<R: Rng>(rng: &mut R, axis: Point3, spread: f64) -> Point3 {
    let (e1, e2) = orthonormal_basis(axis);
    let theta = spread * rng.gen::<f64>();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    (axis * theta.cos() + (e1 * phi.cos() + e2 * phi.sin()) * theta.sin()).normalized()
}

fn random_admissible<R: Rng>(rng: &mut R, r: f64) -> SpherePose {
    let c = random_unit(rng) * ((1.0 - r) * rng.gen::<f64>());
    SpherePose::admissible(c, r).expect("admissible by construction")
}

/// A point on `sp`, near the antipode of `p` half of the time so that both
/// branches are exercised.
fn partner<R: Rng>(rng: &mut R, sp: &SpherePose, p: Point3, s: ShortcutParam) -> Point3 {
    if rng.gen::<bool>() {
        sp.point_at(random_unit(rng))
    } else {
        let anti = ((p - sp.center) * -1.0).normalized();
        let spread = 3.0 * alpha(s).radians() + 1e-3;
        sp.point_at(perturb(rng, anti, spread))
    }
}

fn pt(p: Point3) -> Value {
    json!(p.to_array())
}

fn sphere_json(sp: &SpherePose) -> Value {
    json!({"center": pt(sp.center), "radius": sp.radius})
}

/// Runs suite `name`; unknown names are a configuration error.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<VerificationReport> {
    let (default_samples, default_tol) = suite_defaults(name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown suite {name:?}")))?;
    let samples = opts.samples.unwrap_or(default_samples);
    let tol = opts.tolerance.unwrap_or(default_tol);
    let seed = opts.seed;
    let nodes = opts.nodes.unwrap_or(1600);
    let tally = match name {
        "sphere-axioms" => sphere_axioms(samples, seed, tol),
        "eq1-bounds" => eq1_bounds(samples, seed, tol),
        "isometry" => isometry(samples, seed, tol),
        "locally-euclidean" => locally_euclidean(samples, seed),
        "normalize-cost" => normalize_cost(samples, seed, tol)?,
        "sandwich" => sandwich(samples, seed, tol)?,
        "lemma-haf" => lemma_haf(samples, seed, tol, nodes)?,
        "reduction-oracle" => reduction_oracle(samples, seed, tol, nodes)?,
        "prop-nlf" => prop_nlf(samples, seed)?,
        "nm-examples" => nm_examples(samples, seed)?,
        _ => unreachable!("checked by suite_defaults"),
    };
    Ok(tally.report(name, seed, tol))
}

fn grid() -> Vec<(usize, f64, ShortcutParam)> {
    let mut cells = Vec::new();
    for &r in &RADII {
        for &s in &SCALES {
            cells.push((cells.len(), r, ShortcutParam::new(s).expect("valid scale")));
        }
    }
    cells
}

fn sphere_axioms(samples: usize, seed: u64, tol: f64) -> Tally {
    let tallies: Vec<Tally> = grid()
        .into_par_iter()
        .map(|(cell, r, s)| {
            let mut rng = rng_for(seed, cell as u64);
            let mut t = Tally::new();
            for _ in 0..samples {
                let sp = random_admissible(&mut rng, r);
                let p = sp.point_at(random_unit(&mut rng));
                let q = partner(&mut rng, &sp, p, s);
                let x = if rng.gen::<bool>() {
                    partner(&mut rng, &sp, q, s)
                } else {
                    partner(&mut rng, &sp, p, s)
                };
                let d = |a, b| shortcut_distance(&sp, s, a, b).map(|v| v.value).unwrap_or(f64::NAN);
                let (pq, qp, qx, px, pp) = (d(p, q), d(q, p), d(q, x), d(p, x), d(p, p));
                let sym = (pq - qp).abs();
                let tri = px - pq - qx;
                let dev = sym.max(tri).max(pp.abs()).max(-pq);
                let bad = !(sym <= SYMMETRY_TOL && tri <= tol && pp == 0.0 && pq >= 0.0);
                t.record(dev, bad, || {
                    json!({"sphere": sphere_json(&sp), "s": s.get(), "p": pt(p), "q": pt(q), "x": pt(x)})
                });
            }
            t
        })
        .collect();
    merge_all(tallies)
}

fn merge_all(tallies: Vec<Tally>) -> Tally {
    let mut total = Tally::new();
    for t in tallies {
        total.merge(t);
    }
    total
}

fn eq1_bounds(samples: usize, seed: u64, tol: f64) -> Tally {
    let tallies: Vec<Tally> =
        grid()
            .into_par_iter()
            .map(|(cell, r, s)| {
                let mut rng = rng_for(seed, 100 + cell as u64);
                let mut t = Tally::new();
                for _ in 0..samples {
                    let sp = random_admissible(&mut rng, r);
                    let p = sp.point_at(random_unit(&mut rng));
                    let q = partner(&mut rng, &sp, p, s);
                    let d = shortcut_distance(&sp, s, p, q).expect("on sphere");
                    let de = euclid(p, q);
                    let mut dev = (s.get() * de - d.value).max(d.value - de);
                    if d.branch == Branch::Shortcut {
                        let anti = antipode(&sp, p).expect("on sphere");
                        let e = shortcut_distance(&sp, s, anti, q).expect("on sphere");
                        let gap = if e.branch == Branch::Euclid {
                            (e.value - euclid(anti, q)).abs()
                        } else {
                            f64::INFINITY
                        };
                        dev = dev.max(gap);
                    }
                    t.record(dev, !(dev <= tol), || {
                    json!({"sphere": sphere_json(&sp), "s": s.get(), "p": pt(p), "q": pt(q)})
                });
                }
                t
            })
            .collect();
    merge_all(tallies)
}

fn isometry(samples: usize, seed: u64, tol: f64) -> Tally {
    let mut rng = rng_for(seed, 200);
    let mut t = Tally::new();
    for _ in 0..samples {
        let r = 0.05 + 0.95 * rng.gen::<f64>();
        let s = ShortcutParam::new(1.0 - 0.99 * rng.gen::<f64>()).expect("valid");
        let sp = random_admissible(&mut rng, r);
        let p = sp.point_at(random_unit(&mut rng));
        let q = partner(&mut rng, &sp, p, s);
        let iso = Isometry::random(&mut rng, 2.0);
        let moved = iso.apply_sphere(&sp);
        let before = shortcut_distance(&sp, s, p, q).map(|d| d.value);
        let after = shortcut_distance(&moved, s, iso.apply(p), iso.apply(q)).map(|d| d.value);
        let dev = match (before, after) {
            (Ok(a), Ok(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        t.record(
            dev,
            !(dev <= tol),
            || json!({"sphere": sphere_json(&sp), "s": s.get(), "p": pt(p), "q": pt(q)}),
        );
    }
    t
}

/// For each center, pairs inside the `d^s`-ball of radius `t` must all be on
/// the Euclidean branch. Half the proposals are drawn near the antipode so
/// that the ball's exclusion of that region is exercised too.
fn locally_euclidean(samples: usize, seed: u64) -> Tally {
    const PAIRS: usize = 100;
    let mut rng = rng_for(seed, 300);
    let mut t = Tally::new();
    for _ in 0..samples {
        let r = 0.05 + 0.95 * rng.gen::<f64>();
        let s = ShortcutParam::new(1.0 - 0.99 * rng.gen::<f64>()).expect("valid");
        let sp = random_admissible(&mut rng, r);
        let dir = random_unit(&mut rng);
        let p = sp.point_at(dir);
        let radius = locally_euclidean_radius(&sp, s);
        let max_angle = 2.0 * (radius / (2.0 * r)).min(1.0).asin();
        let mut ball = Vec::with_capacity(2 * PAIRS);
        while ball.len() < 2 * PAIRS {
            let q = if rng.gen::<bool>() {
                sp.point_at(perturb(&mut rng, dir, max_angle))
            } else {
                sp.point_at(perturb(&mut rng, -dir, 3.0 * alpha(s).radians() + 1e-3))
            };
            let d = shortcut_distance(&sp, s, p, q).expect("on sphere");
            if d.value < radius {
                ball.push(q);
            }
        }
        for pair in ball.chunks(2) {
            let d = shortcut_distance(&sp, s, pair[0], pair[1]).expect("on sphere");
            let bad = d.branch != Branch::Euclid;
            t.record(if bad { 1.0 } else { 0.0 }, bad, || {
                json!({"sphere": sphere_json(&sp), "s": s.get(), "center": pt(p), "a": pt(pair[0]), "b": pt(pair[1])})
            });
        }
    }
    t
}

/// A random chain of 1–6 hops; hops land near the antipode half the time.
pub fn random_chain<R: Rng>(rng: &mut R) -> (SphereFamily, Chain) {
    let hops = rng.gen_range(1..=6);
    let mut x = random_in_ball(rng) * 0.9;
    let mut points = vec![x];
    let mut spheres = Vec::with_capacity(hops);
    while spheres.len() < hops {
        let r = 0.05 + 0.45 * rng.gen::<f64>();
        let u = random_unit(rng);
        let Ok(pose) = SpherePose::admissible(x - u * r, r) else {
            continue;
        };
        let s = ShortcutParam::new(0.1 + 0.9 * rng.gen::<f64>()).expect("valid");
        let next = partner(rng, &pose, x, s);
        spheres.push(ScaledSphere { pose, scale: s });
        points.push(next);
        x = next;
    }
    let family = SphereFamily::explicit(spheres.clone()).expect("admissible");
    let chain = Chain::new(points, spheres).expect("points on spheres");
    (family, chain)
}

fn normalize_cost(samples: usize, seed: u64, tol: f64) -> Result<Tally> {
    let mut rng = rng_for(seed, 400);
    let mut t = Tally::new();
    for _ in 0..samples {
        let (family, chain) = random_chain(&mut rng);
        let before = chain_cost(&family, &chain)?;
        let normal = normalize_to_antipodal(&family, &chain)?;
        let after = chain_cost(&family, &normal)?;
        let form = is_antipodal_form(&family, &normal)?;
        let ends = normal.start() == chain.start() && normal.end() == chain.end();
        let dev = (before - after).abs();
        let bad = !(dev <= tol) || !form || !ends;
        t.record(
            if form && ends { dev } else { f64::INFINITY },
            bad,
            || json!({"points": chain.points().iter().map(|p| pt(*p)).collect::<Vec<_>>()}),
        );
    }
    Ok(t)
}

/// Query pairs: uniform in the ball, on S², or one of each.
fn random_pair<R: Rng>(rng: &mut R) -> (Point3, Point3) {
    let pick = |rng: &mut R| {
        if rng.gen::<f64>() < 0.3 {
            random_unit(rng)
        } else {
            random_in_ball(rng)
        }
    };
    (pick(rng), pick(rng))
}

fn sandwich(samples: usize, seed: u64, tol: f64) -> Result<Tally> {
    let cfg = DiscretizationConfig::new(16, seed)?;
    let mut tallies = Vec::new();
    for (k, s0) in [0.5, 1.0].into_iter().enumerate() {
        let family = SphereFamily::segment_cover(0.25, s0)?;
        let mut rng = rng_for(seed, 500 + k as u64);
        let pairs: Vec<(Point3, Point3)> = (0..samples).map(|_| random_pair(&mut rng)).collect();
        let results: Vec<Result<Tally>> = pairs
            .par_iter()
            .map(|&(p, q)| {
                let mut t = Tally::new();
                let est = estimate_distance(&family, p, q, &cfg)?;
                let de = euclid(p, q);
                let witness = (chain_cost(&family, &est.witness)? - est.upper).abs();
                let mut dev = (s0 * de - est.upper).max(est.upper - de).max(witness);
                if s0 == 1.0 {
                    dev = dev.max((est.upper - de).abs());
                }
                t.record(
                    dev,
                    !(dev <= tol),
                    || json!({"s0": s0, "p": pt(p), "q": pt(q)}),
                );
                Ok(t)
            })
            .collect();
        for r in results {
            tallies.push(r?);
        }
    }
    Ok(merge_all(tallies))
}

fn lemma_haf(samples: usize, seed: u64, tol: f64, nodes: usize) -> Result<Tally> {
    let cfg = DiscretizationConfig::new(nodes, seed)?;
    let catalog = test_catalog(seed);
    let mut rng = rng_for(seed, 600);
    let mut cases = Vec::with_capacity(samples);
    while cases.len() < samples {
        let p = if rng.gen::<bool>() {
            random_unit(&mut rng)
        } else {
            random_in_ball(&mut rng)
        };
        let step = random_unit(&mut rng) * (0.5 * rng.gen::<f64>());
        let mut q = p + step;
        if q.norm() > 1.0 {
            q = q.normalized();
        }
        if euclid(p, q) < 0.5 && p != q {
            cases.push((cases.len() % catalog.len(), p, q));
        }
    }
    let families: Vec<SphereFamily> = catalog
        .iter()
        .map(|f| SphereFamily::boundary_shortcut(f.clone()))
        .collect::<Result<_>>()?;
    let results: Vec<Result<Tally>> = cases
        .par_iter()
        .map(|&(k, p, q)| {
            let mut t = Tally::new();
            let est = estimate_distance(&families[k], p, q, &cfg)?;
            let dev = (est.upper - euclid(p, q)).abs();
            t.record(dev, !(dev <= tol), || {
                json!({"function": catalog[k].to_string(), "p": pt(p), "q": pt(q), "upper": est.upper})
            });
            Ok(t)
        })
        .collect();
    results
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map(merge_all)
}

/// Reduction candidates used by the suites.
const REDUCTION_CANDIDATES: usize = 20_000;

fn query_points(
    f: &BoundaryFunction,
    samples: usize,
    rng: &mut ChaCha8Rng,
    specials: usize,
) -> Vec<Point3> {
    let mut xs: Vec<Point3> = f.special_points().into_iter().take(specials).collect();
    while xs.len() < samples + specials.min(f.special_points().len()) {
        xs.push(random_unit(rng));
    }
    xs
}

fn reduction_oracle(samples: usize, seed: u64, tol: f64, nodes: usize) -> Result<Tally> {
    let cfg = DiscretizationConfig::new(nodes, seed)?;
    let base = base_candidates(REDUCTION_CANDIDATES, seed);
    let mut tallies = Vec::new();
    for (k, f) in test_catalog(seed).into_iter().enumerate() {
        let family = SphereFamily::boundary_shortcut(f.clone())?;
        let mut rng = rng_for(seed, 700 + k as u64);
        let xs = query_points(&f, samples, &mut rng, 3);
        let results: Vec<Result<Tally>> = xs
            .par_iter()
            .map(|&x| {
                let mut t = Tally::new();
                let red = o_to_x_distance(&f, x, &base)?;
                let single = (1.0 + f.evaluate(x)) / 2.0;
                let est = estimate_distance(&family, ORIGIN, x, &cfg)?;
                let bound = red.value - single;
                let range = (0.5 - red.value).max(red.value - 1.0);
                let gap = (red.value - est.upper).abs();
                let bad = bound > 1e-12 || range > 1e-12 || !(gap <= tol);
                t.record(gap.max(bound).max(range), bad, || {
                    json!({"function": f.to_string(), "x": pt(x), "reduction": red.value,
                           "upper": est.upper, "single_hop": single})
                });
                Ok(t)
            })
            .collect();
        for r in results {
            tallies.push(r?);
        }
    }
    Ok(merge_all(tallies))
}

fn prop_nlf(samples: usize, seed: u64) -> Result<Tally> {
    let base = base_candidates(REDUCTION_CANDIDATES, seed);
    let mut tallies = Vec::new();
    for (k, f) in test_catalog(seed).into_iter().enumerate() {
        let mut rng = rng_for(seed, 800 + k as u64);
        let xs = query_points(&f, samples, &mut rng, 50);
        let results: Vec<Tally> = xs
            .par_iter()
            .map(|&x| {
                let mut t = Tally::new();
                let outcome = prop_nlf_check(&f, x, &base);
                let (dev, bad) = match &outcome {
                    Ok(Some(w)) => (0.0, !(w.margin > 0.0)),
                    Ok(None) => (0.0, false),
                    Err(_) => (f64::INFINITY, true),
                };
                t.record(dev, bad, || {
                    json!({"function": f.to_string(), "x": pt(x), "outcome": format!("{outcome:?}")})
                });
                t
            })
            .collect();
        tallies.extend(results);
    }
    Ok(merge_all(tallies))
}

fn nm_examples(samples: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let x0 = Point3::new(0.0, 0.0, 1.0);
    let h = BoundaryFunction::distance_to(x0)?;
    let mut cfg = ScanConfig::new(1, samples, seed);
    let r = nm_scan(&h, &cfg)?;
    t.record(
        r.summary.hits as f64,
        r.summary.hits > 0,
        || json!({"case": "distance-to on S2, n=1", "hits": r.summary.hits}),
    );
    cfg.domain = Domain::great_circle(Point3::new(0.0, 1.0, 0.0))?;
    let r = nm_scan(&h, &cfg)?;
    t.record(
        r.summary.hits as f64,
        r.summary.hits > 0,
        || json!({"case": "distance-to on a great circle, n=1", "hits": r.summary.hits}),
    );
    let dense = BoundaryFunction::dense_indicator(1000);
    let prefix = dense.special_points();
    for n in 1..=3 {
        let r = nm_scan(&dense, &ScanConfig::new(n, samples, seed))?;
        let on_prefix = r
            .witnesses
            .iter()
            .filter(|w| dense.evaluate(w.x) == 1.0)
            .count();
        let off = r.witnesses.len() - on_prefix;
        let missing = prefix.len().saturating_sub(on_prefix);
        let dev = (off + missing) as f64;
        t.record(dev, off > 0 || missing > 0 || on_prefix != prefix.len(), || {
            json!({"case": format!("dense-indicator k=1000, n={n}"), "off_prefix": off, "missing": missing})
        });
    }
    Ok(t)
}
