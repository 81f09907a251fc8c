//! Brackets on the chain pseudo-metric: search upper bounds with witness
//! chains, and the analytic lower bound `s0 · d_E`.
//!
//! Parametric families are uncountable, so each query searches a finite
//! sub-family chosen for the pair:
//!
//! * segment covers use the spheres of the segment chain plus the sphere
//!   with each hop as diameter (where admissible and small enough);
//! * the boundary family uses, for each query point `E ≠ O`, the half-radius
//!   spheres tangent at `Ê = E/|E|` and at anchors `y` on a cap around `Ê`,
//!   joined through the chord midpoints `(y + Ê)/2`, which lie on both.
//!   Interior points are tied to `Ê` by a radial segment chain. The cap has
//!   chord radius `s(Ê) − 1/2 ≤ 1/2`: a detour through a farther anchor
//!   costs more than the direct hop across the sphere at `Ê`.
//!
//! Both are clamped by the segment chain from `p` to `q`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{
    chain_cost, is_boundary_point, segment_chain, trivial_chain, Chain, FamilyVariant,
    ScaledSphere, SphereFamily,
};
use crate::error::{Error, Result};
use crate::geometry::{euclid, mix_seed, nested_cap_points, Point3, SpherePose, ORIGIN};
use crate::graph::{pose_salt, DiscretizationConfig, TransferGraph};

/// Largest chord radius of the anchor cap around a boundary direction.
pub const ANCHOR_CHORD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub upper: f64,
    pub lower: f64,
    pub witness: Chain,
}

/// A finite set of spheres and terminals searched for one query.
#[derive(Debug, Clone)]
pub struct SubFamily {
    pub spheres: Vec<ScaledSphere>,
    pub terminals: Vec<Point3>,
}

fn canonical(p: Point3, q: Point3) -> bool {
    let (a, b) = (p.to_array(), q.to_array());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .map_or(true, |o| o.is_lt())
}

/// Brackets `d(p, q)` for `family`.
///
/// The result depends only on the unordered pair: queries are answered in a
/// canonical orientation and the witness is reversed when needed.
pub fn estimate_distance(
    family: &SphereFamily,
    p: Point3,
    q: Point3,
    cfg: &DiscretizationConfig,
) -> Result<MetricEstimate> {
    cfg.validate()?;
    for x in [p, q] {
        if !family.admits_point(x) {
            return Err(Error::NotInFamily(format!(
                "{x:?} is not an admissible query point"
            )));
        }
    }
    if !canonical(p, q) {
        let mut est = estimate_distance(family, q, p, cfg)?;
        est.witness = est.witness.reversed();
        return Ok(est);
    }
    if p == q {
        return Ok(MetricEstimate {
            upper: 0.0,
            lower: 0.0,
            witness: trivial_chain(family, p)?,
        });
    }
    let lower = family.lower_scale() * euclid(p, q);
    let (upper, witness) = match family.variant() {
        FamilyVariant::ExplicitFinite(spheres) => {
            let graph = TransferGraph::build(spheres.clone(), cfg, &[p, q], false)?;
            search(&graph)?.ok_or(Error::NoChain)?
        }
        FamilyVariant::SegmentCover { .. } | FamilyVariant::BoundaryShortcut(_) => {
            let sub = match family.variant() {
                FamilyVariant::BoundaryShortcut(_) => boundary_subfamily(family, p, q, cfg)?,
                _ => segment_cover_subfamily(family, p, q)?,
            };
            let mut graph_cfg = *cfg;
            if matches!(family.variant(), FamilyVariant::BoundaryShortcut(_)) {
                // Transfers happen at the chord midpoints; circle samples would
                // add quadratically many nodes without new routes.
                graph_cfg.intersection_nodes = 0;
            }
            let graph = TransferGraph::build(sub.spheres, &graph_cfg, &sub.terminals, false)?;
            let found = search(&graph)?;
            let seg = segment_chain(family, p, q)?;
            let seg_cost = chain_cost(family, &seg)?;
            match found {
                Some((c, w)) if c <= seg_cost => (c, w),
                _ => (seg_cost, seg),
            }
        }
    };
    Ok(MetricEstimate {
        upper,
        lower,
        witness,
    })
}

fn search(graph: &TransferGraph) -> Result<Option<(f64, Chain)>> {
    match graph.shortest_path(0, 1) {
        Some(path) => Ok(Some((path.cost, graph.path_chain(&path)?))),
        None => Ok(None),
    }
}

/// Segment chain spheres plus the diameter sphere of every hop.
pub fn segment_cover_subfamily(family: &SphereFamily, p: Point3, q: Point3) -> Result<SubFamily> {
    let FamilyVariant::SegmentCover { t, .. } = family.variant() else {
        return Err(Error::InvalidConfig("not a segment-cover family".into()));
    };
    let seg = segment_chain(family, p, q)?;
    let mut spheres = seg.spheres().to_vec();
    for w in seg.points().windows(2) {
        let pose = SpherePose {
            center: (w[0] + w[1]) * 0.5,
            radius: euclid(w[0], w[1]) / 2.0,
        };
        if pose.radius <= *t && pose.is_admissible() && pose.contains(w[0]) && pose.contains(w[1]) {
            spheres.push(family.scaled(pose)?);
        }
    }
    let mut terminals = vec![p, q];
    let pts = seg.points();
    terminals.extend_from_slice(&pts[1..pts.len() - 1]);
    Ok(SubFamily { spheres, terminals })
}

/// Half-radius spheres around each query direction plus connecting chains.
pub fn boundary_subfamily(
    family: &SphereFamily,
    p: Point3,
    q: Point3,
    cfg: &DiscretizationConfig,
) -> Result<SubFamily> {
    let mut spheres: Vec<ScaledSphere> = Vec::new();
    let mut terminals = vec![p, q, ORIGIN];
    let mut chains: Vec<Chain> = vec![segment_chain(family, p, q)?];
    for e in [p, q] {
        let norm = e.norm();
        if norm == 0.0 {
            continue;
        }
        let dir = e / norm;
        let dir_pose = SpherePose::boundary_half(dir);
        let dir_sphere = family.scaled(dir_pose)?;
        spheres.push(dir_sphere);
        terminals.push(dir);
        // A detour through y costs at least 1/2 + |y − Ê|, so only anchors
        // closer than s(Ê) − 1/2 can beat the direct hop.
        let chord = ANCHOR_CHORD.min(dir_sphere.scale.get() - 0.5);
        let count = if chord > 0.0 { cfg.nodes_per_sphere } else { 0 };
        let seed = mix_seed(cfg.seed, pose_salt(&dir_pose));
        for y in nested_cap_points(dir, chord, count, seed) {
            spheres.push(family.scaled(SpherePose::boundary_half(y))?);
            terminals.push(y);
            terminals.push((y + dir) * 0.5);
        }
        if euclid(e, dir) > 0.0 && !is_boundary_point(e) {
            chains.push(segment_chain(family, e, dir)?);
        }
    }
    for c in chains {
        spheres.extend_from_slice(c.spheres());
        let pts = c.points();
        terminals.extend_from_slice(&pts[1..pts.len() - 1]);
    }
    debug_assert!(spheres.iter().all(|s| s.pose.radius <= 0.5 + 1e-12));
    Ok(SubFamily { spheres, terminals })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nodes_per_sphere: usize,
    pub intersection_nodes: usize,
    pub upper: f64,
    pub lower: f64,
}

/// Upper bounds for a sequence of nested configurations, in input order.
pub fn convergence_study(
    family: &SphereFamily,
    p: Point3,
    q: Point3,
    cfgs: &[DiscretizationConfig],
) -> Result<Vec<ConvergenceRow>> {
    for w in cfgs.windows(2) {
        if !w[1].refines(&w[0]) {
            return Err(Error::InvalidConfig(
                "convergence configs must share a seed and be nested refinements".into(),
            ));
        }
    }
    let rows: Vec<Result<ConvergenceRow>> = cfgs
        .par_iter()
        .map(|cfg| {
            let est = estimate_distance(family, p, q, cfg)?;
            Ok(ConvergenceRow {
                nodes_per_sphere: cfg.nodes_per_sphere,
                intersection_nodes: cfg.intersection_nodes,
                upper: est.upper,
                lower: est.lower,
            })
        })
        .collect();
    rows.into_iter().collect()
}
