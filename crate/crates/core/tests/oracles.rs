//! Checks against independent computations: exhaustive path enumeration,
//! closed-form values, and the reduction formula versus graph search.

use ballmetric::ball::convergence_study;
use ballmetric::boundary::{
    base_candidates, nm_scan, o_to_x_distance, prop_nlf_check, Domain, ScanConfig,
};
use ballmetric::chain::chain_cost;
use ballmetric::geometry::{euclid, Point3, SpherePose, ORIGIN};
use ballmetric::graph::{build_transfer_graph, Edge};
use ballmetric::{
    estimate_distance, BoundaryFunction, DiscretizationConfig, ScaledSphere, ShortcutParam,
    SphereFamily,
};

fn sphere(c: [f64; 3], r: f64, s: f64) -> ScaledSphere {
    ScaledSphere {
        pose: SpherePose::admissible(c.into(), r).unwrap(),
        scale: ShortcutParam::new(s).unwrap(),
    }
}

/// Four overlapping spheres strung along the x-axis from -1/2 to 1/2.
fn four_chain() -> SphereFamily {
    SphereFamily::explicit(
        [-0.36, -0.12, 0.12, 0.36]
            .iter()
            .map(|&c| sphere([c, 0.0, 0.0], 0.14, 0.6))
            .collect(),
    )
    .unwrap()
}

fn enumerate(
    adj: &[Vec<(usize, f64)>],
    at: usize,
    target: usize,
    hops_left: usize,
    cost: f64,
    best: &mut f64,
) {
    if at == target {
        *best = best.min(cost);
        return;
    }
    if hops_left == 0 {
        return;
    }
    for &(v, w) in &adj[at] {
        enumerate(adj, v, target, hops_left - 1, cost + w, best);
    }
}

#[test]
fn four_sphere_chain_matches_exhaustive_search() {
    let family = four_chain();
    let (p, q) = (Point3::new(-0.5, 0.0, 0.0), Point3::new(0.5, 0.0, 0.0));
    let cfg = DiscretizationConfig::new(24, 5)
        .unwrap()
        .with_intersection_nodes(8);
    let graph = build_transfer_graph(&family, &cfg, &[p, q]).unwrap();
    let total = graph.node_count() + graph.sample_nodes().count();
    let mut adj = vec![Vec::new(); total];
    for Edge { a, b, weight, .. } in graph.edges() {
        adj[a].push((b, weight));
        adj[b].push((a, weight));
    }
    let mut oracle = f64::INFINITY;
    enumerate(&adj, 0, 1, 4, 0.0, &mut oracle);

    let est = estimate_distance(&family, p, q, &cfg).unwrap();
    assert!(
        (est.upper - oracle).abs() <= 1e-12,
        "{} vs {oracle}",
        est.upper
    );
    assert!(est.upper >= 0.6 - 1e-12 && est.upper <= 1.0 + 1e-9);
    assert!((est.lower - 0.6).abs() < 1e-12);
    assert!((chain_cost(&family, &est.witness).unwrap() - est.upper).abs() <= 1e-12);
}

#[test]
fn nested_configs_never_increase_upper() {
    let family = SphereFamily::explicit(vec![
        sphere([-0.2, 0.0, 0.0], 0.35, 0.5),
        sphere([0.25, 0.05, 0.0], 0.3, 0.8),
    ])
    .unwrap();
    let p = Point3::new(-0.55, 0.0, 0.0);
    let q = Point3::new(0.55, 0.05, 0.0);
    let cfgs: Vec<DiscretizationConfig> = [100, 400, 1600]
        .iter()
        .map(|&n| DiscretizationConfig::new(n, 11).unwrap())
        .collect();
    let rows = convergence_study(&family, p, q, &cfgs).unwrap();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1].upper <= w[0].upper, "{rows:?}");
    }
    assert!(rows[2].upper < rows[0].upper + 1e-15);
}

#[test]
fn single_sphere_convergence_is_flat() {
    let s = sphere([0.0, 0.0, 0.1], 0.6, 0.4);
    let family = SphereFamily::explicit(vec![s]).unwrap();
    let p = s.pose.point_at(Point3::new(0.0, 0.0, 1.0));
    let q = s.pose.point_at(Point3::new(0.1, 0.0, -1.0).normalized());
    let cfgs: Vec<DiscretizationConfig> = [16, 64]
        .iter()
        .map(|&n| DiscretizationConfig::new(n, 0).unwrap())
        .collect();
    let rows = convergence_study(&family, p, q, &cfgs).unwrap();
    assert_eq!(rows[0].upper, rows[1].upper);
}

#[test]
fn spike_reduction_agrees_with_search() {
    let x0 = Point3::new(0.0, 0.0, 1.0);
    let f = BoundaryFunction::spike(x0, 1.0, 0.05).unwrap();
    let red = o_to_x_distance(&f, x0, &base_candidates(10_000, 0)).unwrap();
    // Analytic infimum: 1/2 plus the spike radius, reached on its rim.
    assert!(red.value >= 0.55 && red.value < 0.555, "{red:?}");
    let family = SphereFamily::boundary_shortcut(f.clone()).unwrap();
    let est = estimate_distance(
        &family,
        ORIGIN,
        x0,
        &DiscretizationConfig::new(1600, 0).unwrap(),
    )
    .unwrap();
    assert!(est.upper >= 0.55 - 1e-12);
    assert!(
        (est.upper - red.value).abs() <= 2e-2,
        "{} vs {}",
        est.upper,
        red.value
    );
    assert!(est.upper < (1.0 + f.evaluate(x0)) / 2.0);
    let w = prop_nlf_check(&f, x0, &base_candidates(10_000, 0))
        .unwrap()
        .unwrap();
    assert!(w.f_x - w.f_y > 2.0 * w.d_e);
}

#[test]
fn zero_function_distance_is_one_half() {
    let f = BoundaryFunction::constant(0.0).unwrap();
    let family = SphereFamily::boundary_shortcut(f.clone()).unwrap();
    let cfg = DiscretizationConfig::new(64, 0).unwrap();
    for x in ballmetric::geometry::sample_sphere(&SpherePose::new(ORIGIN, 1.0).unwrap(), 8, 1) {
        let red = o_to_x_distance(&f, x, &base_candidates(100, 0)).unwrap();
        assert_eq!((red.value, red.best_y), (0.5, x));
        let est = estimate_distance(&family, ORIGIN, x, &cfg).unwrap();
        assert!((est.upper - 0.5).abs() < 1e-12);
    }
}

#[test]
fn short_boundary_pairs_cost_their_chord() {
    let f = BoundaryFunction::spike(Point3::new(0.0, 0.0, 1.0), 1.0, 0.2).unwrap();
    let family = SphereFamily::boundary_shortcut(f).unwrap();
    let cfg = DiscretizationConfig::new(400, 0).unwrap();
    let pairs = [
        (
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.3, 0.0, 0.9).normalized(),
        ),
        (Point3::new(0.1, 0.0, 0.95), Point3::new(0.0, 0.2, 0.7)),
        (ORIGIN, Point3::new(0.2, 0.2, 0.2)),
    ];
    for (p, q) in pairs {
        let est = estimate_distance(&family, p, q, &cfg).unwrap();
        assert!(
            (est.upper - euclid(p, q)).abs() <= 5e-3,
            "{p:?} {q:?} {}",
            est.upper
        );
    }
}

#[test]
fn dense_indicator_witnesses_are_the_prefix() {
    let f = BoundaryFunction::dense_indicator(200);
    for n in 1..=3 {
        let mut cfg = ScanConfig::new(n, 500, 4);
        cfg.candidate_count = 500;
        let r = nm_scan(&f, &cfg).unwrap();
        assert_eq!(r.summary.hits, 200);
        assert!(r
            .witnesses
            .iter()
            .all(|w| f.evaluate(w.x) == 1.0 && w.margin > 0.0));
        assert_eq!(r.summary.reduction_hits, Some(200));
    }
}

#[test]
fn lipschitz_functions_have_no_witnesses() {
    let h = BoundaryFunction::distance_to(Point3::new(0.0, 0.6, 0.8)).unwrap();
    let r = nm_scan(&h, &ScanConfig::new(1, 2000, 0)).unwrap();
    assert_eq!(r.summary.hits, 0);
    let g = BoundaryFunction::distance_to(Point3::new(1.0, 0.0, 0.0)).unwrap();
    let mut cfg = ScanConfig::new(1, 2000, 0);
    cfg.domain = Domain::great_circle(Point3::new(0.0, 0.0, 1.0)).unwrap();
    let r = nm_scan(&g, &cfg).unwrap();
    assert_eq!(r.summary.hits, 0);
    assert_eq!(r.summary.reduction_hits, None);
}
