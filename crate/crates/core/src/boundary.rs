//! The boundary construction: distances from the origin to boundary points
//! in closed form, and scans for points where `f` drops faster than `n·d_E`.
//!
//! In the boundary family the cheapest way from `O` to a boundary point `x`
//! jumps across one half-radius sphere tangent at some `y` (cost
//! `(1 + f(y))/2`) and walks straight to `x`, so
//! `d(O, x) = inf_y (1 + f(y))/2 + d_E(y, x)`. The infimum is approximated
//! over a candidate set refined around the incumbent.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::BoundaryFunction;
use crate::geometry::{
    euclid, mix_seed, orthonormal_basis, sample_sphere, Point3, SpherePose, ORIGIN,
};

/// Strict-gap threshold used when deciding whether the reduction beats the
/// single-hop value `(1 + f(x))/2`.
pub const GAP_TOL: f64 = 1e-9;
/// Margins at or below this are treated as rounding noise.
pub const MARGIN_TOL: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-9;
const RING_POINTS: usize = 16;
const REFINE_ROUNDS: usize = 2;

/// Where the points `x` (and candidates `y`) live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Sphere,
    /// The great circle orthogonal to the given unit normal.
    GreatCircle(Point3),
}

impl Domain {
    pub fn great_circle(normal: Point3) -> Result<Self> {
        if !(normal.norm() > 0.0) || !normal.is_finite() {
            return Err(Error::DegenerateInput(
                "great circle normal must be nonzero".into(),
            ));
        }
        Ok(Self::GreatCircle(normal.normalized()))
    }

    pub fn contains(&self, x: Point3) -> bool {
        let on_sphere = (x.norm() - 1.0).abs() <= UNIT_TOL;
        match self {
            Domain::Sphere => on_sphere,
            Domain::GreatCircle(n) => on_sphere && x.dot(*n).abs() <= UNIT_TOL,
        }
    }

    /// `count` deterministic quasi-uniform points of the domain.
    pub fn samples(&self, count: usize, seed: u64) -> Vec<Point3> {
        match self {
            Domain::Sphere => sample_sphere(&unit_sphere(), count, seed),
            Domain::GreatCircle(n) => {
                let (e1, e2) = orthonormal_basis(*n);
                let phase = (mix_seed(seed, 3) >> 11) as f64 / (1u64 << 53) as f64;
                (0..count)
                    .map(|i| {
                        let t = 2.0 * PI * (phase + i as f64) / count as f64;
                        e1 * t.cos() + e2 * t.sin()
                    })
                    .collect()
            }
        }
    }

    /// Points of the domain at chord distance about `rho` around `x`.
    fn ring(&self, x: Point3, rho: f64) -> Vec<Point3> {
        // angle with chord rho
        let theta = 2.0 * (rho / 2.0).min(1.0).asin();
        let (s, c) = theta.sin_cos();
        match self {
            Domain::Sphere => {
                let (e1, e2) = orthonormal_basis(x);
                (0..RING_POINTS)
                    .map(|k| {
                        let phi = 2.0 * PI * k as f64 / RING_POINTS as f64;
                        (x * c + (e1 * phi.cos() + e2 * phi.sin()) * s).normalized()
                    })
                    .collect()
            }
            Domain::GreatCircle(n) => {
                let tangent = n.cross(x).normalized();
                vec![
                    (x * c + tangent * s).normalized(),
                    (x * c - tangent * s).normalized(),
                ]
            }
        }
    }

    fn spacing(&self, count: usize) -> f64 {
        let count = count.max(1) as f64;
        match self {
            Domain::Sphere => (4.0 * PI / count).sqrt(),
            Domain::GreatCircle(_) => 2.0 * PI / count,
        }
    }
}

fn unit_sphere() -> SpherePose {
    SpherePose {
        center: ORIGIN,
        radius: 1.0,
    }
}

fn check_unit(x: Point3) -> Result<()> {
    let deviation = (x.norm() - 1.0).abs();
    if deviation <= UNIT_TOL {
        Ok(())
    } else {
        Err(Error::OffSphere {
            deviation,
            tolerance: UNIT_TOL,
        })
    }
}

/// Seeded base candidates on S² for the reduction.
pub fn base_candidates(count: usize, seed: u64) -> Vec<Point3> {
    Domain::Sphere.samples(count, mix_seed(seed, 0xCA4D))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduction {
    pub value: f64,
    pub best_y: Point3,
    /// The minimizer came from the last refinement ring, so the sampled
    /// minimum may still move under further refinement.
    pub at_refinement_edge: bool,
}

fn objective(f: &BoundaryFunction, x: Point3, y: Point3) -> f64 {
    (1.0 + f.evaluate(y)) / 2.0 + euclid(y, x)
}

/// `min_y (1 + f(y))/2 + d_E(y, x)` over `base`, `x` itself, and rings
/// around the incumbent (two rounds, radius halved each round).
pub fn o_to_x_distance(f: &BoundaryFunction, x: Point3, base: &[Point3]) -> Result<Reduction> {
    if f.sup() > 1.0 + MARGIN_TOL {
        return Err(Error::InvalidFunction(format!(
            "reduction needs f <= 1, sup is {}; rescale first",
            f.sup()
        )));
    }
    check_unit(x)?;
    let mut best = (objective(f, x, x), x);
    for &y in base {
        let v = objective(f, x, y);
        if v < best.0 {
            best = (v, y);
        }
    }
    let mut rho = Domain::Sphere.spacing(base.len());
    let mut edge = false;
    for round in 0..REFINE_ROUNDS {
        let center = best.1;
        for y in Domain::Sphere.ring(center, rho) {
            let v = objective(f, x, y);
            if v < best.0 {
                best = (v, y);
                edge = round + 1 == REFINE_ROUNDS;
            }
        }
        rho /= 2.0;
    }
    Ok(Reduction {
        value: best.0,
        best_y: best.1,
        at_refinement_edge: edge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub x: Point3,
    pub y: Point3,
    pub f_x: f64,
    pub f_y: f64,
    pub d_e: f64,
    /// `f(x) − f(y) − n·d_E(x, y)`.
    pub margin: f64,
}

impl WitnessRecord {
    fn new(f: &BoundaryFunction, n: f64, x: Point3, y: Point3) -> Self {
        let (f_x, f_y, d_e) = (f.evaluate(x), f.evaluate(y), euclid(x, y));
        Self {
            x,
            y,
            f_x,
            f_y,
            d_e,
            margin: f_x - f_y - n * d_e,
        }
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "x1", "x2", "x3", "y1", "y2", "y3", "f_x", "f_y", "dE", "margin",
    ];

    pub fn csv_row(&self) -> [f64; 10] {
        [
            self.x.x,
            self.x.y,
            self.x.z,
            self.y.x,
            self.y.y,
            self.y.z,
            self.f_x,
            self.f_y,
            self.d_e,
            self.margin,
        ]
    }
}

/// When the reduction falls strictly below `(1 + f(x))/2`, returns the
/// minimizer `y` as a witness of `f(x) − f(y) > 2·d_E(x, y)`.
///
/// A strict gap with a minimizer that fails the inequality would contradict
/// the reduction itself and is reported as [`Error::UnverifiedGap`].
pub fn prop_nlf_check(
    f: &BoundaryFunction,
    x: Point3,
    base: &[Point3],
) -> Result<Option<WitnessRecord>> {
    let red = o_to_x_distance(f, x, base)?;
    if red.value >= (1.0 + f.evaluate(x)) / 2.0 - GAP_TOL {
        return Ok(None);
    }
    let w = WitnessRecord::new(f, 2.0, x, red.best_y);
    if w.margin > 0.0 {
        Ok(Some(w))
    } else {
        Err(Error::UnverifiedGap { x: x.to_array() })
    }
}

/// The candidate maximizing `f(x) − f(y) − n·d_E(x, y)`, if its margin is
/// positive. Sound but incomplete: `None` only means no candidate works.
pub fn nm_membership(
    f: &BoundaryFunction,
    n: u32,
    x: Point3,
    candidates: &[Point3],
) -> Option<WitnessRecord> {
    let nf = n as f64;
    let f_x = f.evaluate(x);
    let mut best: Option<(f64, Point3)> = None;
    for &y in candidates {
        let m = f_x - f.evaluate(y) - nf * euclid(x, y);
        if best.map_or(true, |(b, _)| m > b) {
            best = Some((m, y));
        }
    }
    let (m, y) = best?;
    (m > MARGIN_TOL).then(|| WitnessRecord::new(f, nf, x, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub n: u32,
    pub sample_count: usize,
    pub candidate_count: usize,
    pub seed: u64,
    pub domain: Domain,
}

impl ScanConfig {
    pub fn new(n: u32, sample_count: usize, seed: u64) -> Self {
        Self {
            n,
            sample_count,
            candidate_count: 2000,
            seed,
            domain: Domain::Sphere,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub function: String,
    pub n: u32,
    pub samples: usize,
    pub hits: usize,
    pub max_margin: Option<f64>,
    /// Hits found through the distance reduction on `f / max(a, n/2)`;
    /// not computed on great-circle domains.
    pub reduction_hits: Option<usize>,
    pub note: &'static str,
}

pub const SCAN_NOTE: &str =
    "witnesses are sampled evidence only; uncountability of the set is not machine-checked";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub witnesses: Vec<WitnessRecord>,
    pub summary: ScanSummary,
}

/// Scans `f`'s special points plus seeded samples for `n`-steep witnesses.
pub fn nm_scan(f: &BoundaryFunction, cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.n == 0 || cfg.sample_count == 0 {
        return Err(Error::InvalidConfig(
            "n and sample_count must be positive".into(),
        ));
    }
    let domain = cfg.domain;
    let mut samples: Vec<Point3> = f
        .special_points()
        .into_iter()
        .filter(|p| domain.contains(*p))
        .collect();
    samples.extend(domain.samples(cfg.sample_count, cfg.seed));
    let base = domain.samples(cfg.candidate_count, mix_seed(cfg.seed, 0xBA5E));
    let rho = domain.spacing(cfg.candidate_count);

    let witnesses: Vec<Option<WitnessRecord>> = samples
        .par_iter()
        .map(|&x| {
            let mut cands = base.clone();
            let mut r = rho;
            for _ in 0..3 {
                cands.extend(domain.ring(x, r));
                r /= 2.0;
            }
            nm_membership(f, cfg.n, x, &cands)
        })
        .collect();

    let reduction_hits = match domain {
        Domain::Sphere => {
            let m = f.sup().max(cfg.n as f64 / 2.0);
            let h = f.rescaled(m)?;
            let red_base = base_candidates(cfg.candidate_count, cfg.seed);
            let hits: Vec<Result<bool>> = samples
                .par_iter()
                .map(|&x| prop_nlf_check(&h, x, &red_base).map(|w| w.is_some()))
                .collect();
            let mut count = 0;
            for hit in hits {
                count += hit? as usize;
            }
            Some(count)
        }
        Domain::GreatCircle(_) => None,
    };

    let witnesses: Vec<WitnessRecord> = witnesses.into_iter().flatten().collect();
    let max_margin = witnesses.iter().map(|w| w.margin).reduce(f64::max);
    Ok(ScanResult {
        summary: ScanSummary {
            function: f.to_string(),
            n: cfg.n,
            samples: samples.len(),
            hits: witnesses.len(),
            max_margin,
            reduction_hits,
            note: SCAN_NOTE,
        },
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Point3 {
        Point3::new(0.0, 0.0, 1.0)
    }

    #[test]
    fn zero_function_reduction() {
        let f = BoundaryFunction::constant(0.0).unwrap();
        let base = base_candidates(500, 1);
        for x in sample_sphere(&unit_sphere(), 20, 4) {
            let r = o_to_x_distance(&f, x, &base).unwrap();
            assert_eq!(r.value, 0.5);
            assert_eq!(r.best_y, x);
            assert!(prop_nlf_check(&f, x, &base).unwrap().is_none());
        }
    }

    #[test]
    fn spike_reduction_drops_below_single_hop() {
        let f = BoundaryFunction::spike(z(), 1.0, 0.05).unwrap();
        let base = base_candidates(10_000, 0);
        let r = o_to_x_distance(&f, z(), &base).unwrap();
        // exact infimum 0.5 + 0.05, attained on the rim of the spike
        assert!(r.value < 1.0 && r.value >= 0.55 && r.value < 0.56, "{r:?}");
        let w = prop_nlf_check(&f, z(), &base).unwrap().unwrap();
        assert!(w.margin > 0.0);
    }

    #[test]
    fn reduction_rejects_large_functions() {
        let f = BoundaryFunction::constant(2.0).unwrap();
        assert!(matches!(
            o_to_x_distance(&f, z(), &[]),
            Err(Error::InvalidFunction(_))
        ));
        let f = BoundaryFunction::constant(0.0).unwrap();
        assert!(o_to_x_distance(&f, Point3::new(0.0, 0.0, 0.5), &[]).is_err());
    }

    #[test]
    fn lipschitz_function_has_no_gap() {
        let f = BoundaryFunction::distance_to(z())
            .unwrap()
            .with_scale(0.5)
            .unwrap();
        let base = base_candidates(2000, 0);
        for x in sample_sphere(&unit_sphere(), 50, 9) {
            assert!(prop_nlf_check(&f, x, &base).unwrap().is_none());
        }
    }

    #[test]
    fn membership_examples() {
        let c = BoundaryFunction::constant(0.4).unwrap();
        let cands = base_candidates(300, 0);
        assert!(nm_membership(&c, 1, z(), &cands).is_none());
        let d = BoundaryFunction::dense_indicator(50);
        let x = d.special_points()[7];
        for n in 1..=3 {
            let w = nm_membership(&d, n, x, &cands).unwrap();
            assert!((w.margin - (1.0 - n as f64 * w.d_e)).abs() < 1e-15);
        }
    }

    #[test]
    fn witness_monotone_in_n() {
        let f = BoundaryFunction::spike(z(), 1.0, 0.1).unwrap();
        let cands = base_candidates(2000, 0);
        let x = Point3::new(0.02, 0.0, 1.0).normalized();
        let w = nm_membership(&f, 5, x, &cands).unwrap();
        for n in 1..5 {
            assert!(nm_membership(&f, n, x, &cands).is_some());
            assert!(f.evaluate(x) - f.evaluate(w.y) - n as f64 * w.d_e > 0.0);
        }
    }

    #[test]
    fn great_circle_samples_stay_on_circle() {
        let d = Domain::great_circle(Point3::new(1.0, 1.0, 0.0)).unwrap();
        for p in d.samples(100, 3) {
            assert!(d.contains(p));
        }
        for p in d.ring(d.samples(1, 0)[0], 0.1) {
            assert!(d.contains(p));
        }
    }

    #[test]
    fn scan_summaries() {
        let c = BoundaryFunction::constant(0.3).unwrap();
        let r = nm_scan(&c, &ScanConfig::new(2, 200, 0)).unwrap();
        assert_eq!(r.summary.hits, 0);
        let s = BoundaryFunction::spike(z(), 1.0, 0.05).unwrap();
        let r = nm_scan(&s, &ScanConfig::new(2, 1000, 0)).unwrap();
        assert!(r.summary.hits >= 1);
        assert!(r.witnesses.iter().all(|w| w.margin > 0.0));
        assert_eq!(r, nm_scan(&s, &ScanConfig::new(2, 1000, 0)).unwrap());
    }
}
