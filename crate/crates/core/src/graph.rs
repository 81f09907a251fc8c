//! Transfer graphs: shortest paths over discretized spheres.
//!
//! Nodes are the query terminals, sampled points on pairwise intersection
//! circles, and tangency points; two nodes are adjacent when they share a
//! sphere, with weight the least `d^s` over the shared spheres. Every path is
//! a valid chain, so path costs are upper bounds on the chain infimum.
//!
//! Per-sphere samples that lie on no other sphere are kept out of the search:
//! a hop into such a sample can only continue on the same sphere, and by the
//! triangle inequality for `d^s` skipping the sample is never worse. They are
//! still materialized for [`TransferGraph::edges`] so small graphs can be
//! checked exhaustively.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, ScaledSphere, SphereFamily};
use crate::error::{Error, Result};
use crate::geometry::{
    mix_seed, nested_sphere_points, sphere_intersection_circle, Point3, SpherePose,
};
use crate::shortcut::shortcut_distance_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub nodes_per_sphere: usize,
    /// Samples per transversal intersection circle.
    pub intersection_nodes: usize,
    pub seed: u64,
}

impl DiscretizationConfig {
    /// `nodes_per_sphere` samples per sphere and a quarter as many per
    /// intersection circle.
    pub fn new(nodes_per_sphere: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            nodes_per_sphere,
            intersection_nodes: nodes_per_sphere / 4,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_intersection_nodes(mut self, m: usize) -> Self {
        self.intersection_nodes = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_sphere < 4 {
            return Err(Error::InvalidConfig(format!(
                "nodes_per_sphere must be at least 4, got {}",
                self.nodes_per_sphere
            )));
        }
        Ok(())
    }

    /// Whether `self` refines `coarser`: same seed, no fewer nodes anywhere.
    pub fn refines(&self, coarser: &Self) -> bool {
        self.seed == coarser.seed
            && self.nodes_per_sphere >= coarser.nodes_per_sphere
            && self.intersection_nodes >= coarser.intersection_nodes
    }
}

/// Seed salt derived from a sphere's pose bits, so that a sphere gets the
/// same samples in every family that contains it.
pub fn pose_salt(pose: &SpherePose) -> u64 {
    [pose.center.x, pose.center.y, pose.center.z, pose.radius]
        .iter()
        .fold(0x5EED, |acc, v| mix_seed(acc, v.to_bits()))
}

#[derive(Debug, Clone)]
pub struct TransferGraph {
    spheres: Vec<ScaledSphere>,
    nodes: Vec<Point3>,
    node_spheres: Vec<Vec<u32>>,
    sphere_nodes: Vec<Vec<u32>>,
    terminals: usize,
    samples: Vec<Vec<Point3>>,
}

/// An edge of the full graph; indices past [`TransferGraph::node_count`]
/// refer to per-sphere samples in [`TransferGraph::sample_nodes`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub sphere: usize,
}

/// A shortest path as `(node, sphere used to reach it)` steps after the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cost: f64,
    pub source: usize,
    pub steps: Vec<(usize, usize)>,
}

#[derive(PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Builds the transfer graph of an explicit finite family, with terminals
/// occupying node indices `0..terminals.len()`.
pub fn build_transfer_graph(
    family: &SphereFamily,
    cfg: &DiscretizationConfig,
    terminals: &[Point3],
) -> Result<TransferGraph> {
    let spheres = family.spheres().ok_or_else(|| {
        Error::InvalidConfig("transfer graphs need an explicit finite family".into())
    })?;
    TransferGraph::build(spheres.to_vec(), cfg, terminals, true)
}

impl TransferGraph {
    /// Builds a graph over `spheres`; `with_samples` controls whether the
    /// per-sphere samples (never used by the search) are materialized.
    pub fn build(
        spheres: Vec<ScaledSphere>,
        cfg: &DiscretizationConfig,
        terminals: &[Point3],
        with_samples: bool,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut nodes: Vec<Point3> = terminals.to_vec();
        for i in 0..spheres.len() {
            let a = &spheres[i].pose;
            for other in &spheres[i + 1..] {
                let b = &other.pose;
                let gap = (a.center - b.center).norm();
                if gap > a.radius + b.radius + 1e-6 || gap < (a.radius - b.radius).abs() - 1e-6 {
                    continue;
                }
                if let Some(circle) = sphere_intersection_circle(a, b) {
                    if circle.is_point() {
                        nodes.push(circle.center);
                    } else if cfg.intersection_nodes > 0 {
                        let salt = mix_seed(pose_salt(a), pose_salt(b));
                        nodes.extend(
                            circle.nested_points(cfg.intersection_nodes, mix_seed(cfg.seed, salt)),
                        );
                    }
                }
            }
        }

        let mut node_spheres = vec![Vec::new(); nodes.len()];
        let mut sphere_nodes = vec![Vec::new(); spheres.len()];
        for (n, p) in nodes.iter().enumerate() {
            for (k, s) in spheres.iter().enumerate() {
                if s.pose.contains(*p) {
                    node_spheres[n].push(k as u32);
                    sphere_nodes[k].push(n as u32);
                }
            }
            if n < terminals.len() && node_spheres[n].is_empty() {
                return Err(Error::NotInFamily(format!(
                    "terminal {p:?} is on no member sphere"
                )));
            }
        }

        let samples = if with_samples {
            spheres
                .iter()
                .map(|s| {
                    nested_sphere_points(
                        &s.pose,
                        cfg.nodes_per_sphere,
                        mix_seed(cfg.seed, pose_salt(&s.pose)),
                    )
                })
                .collect()
        } else {
            vec![Vec::new(); spheres.len()]
        };

        Ok(Self {
            spheres,
            nodes,
            node_spheres,
            sphere_nodes,
            terminals: terminals.len(),
            samples,
        })
    }

    pub fn spheres(&self) -> &[ScaledSphere] {
        &self.spheres
    }

    /// Transfer nodes (terminals first).
    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals
    }

    /// Spheres through transfer node `n`.
    pub fn spheres_of(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.node_spheres[n].iter().map(|&k| k as usize)
    }

    pub fn sample_nodes(&self) -> impl Iterator<Item = (usize, Point3)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .flat_map(|(k, pts)| pts.iter().map(move |p| (k, *p)))
    }

    fn weight(&self, k: usize, a: Point3, b: Point3) -> f64 {
        let s = &self.spheres[k];
        shortcut_distance_unchecked(&s.pose, s.scale, a, b).value
    }

    /// Every edge of the full graph, samples included, each pair once with
    /// its cheapest sphere. Quadratic; meant for small graphs.
    pub fn edges(&self) -> Vec<Edge> {
        let mut best: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
        let mut offset = self.nodes.len();
        for k in 0..self.spheres.len() {
            let mut members: Vec<(usize, Point3)> = self.sphere_nodes[k]
                .iter()
                .map(|&n| (n as usize, self.nodes[n as usize]))
                .collect();
            members.extend(
                self.samples[k]
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (offset + i, *p)),
            );
            offset += self.samples[k].len();
            for (i, &(a, pa)) in members.iter().enumerate() {
                for &(b, pb) in &members[i + 1..] {
                    let w = self.weight(k, pa, pb);
                    let key = (a.min(b), a.max(b));
                    let entry = best.entry(key).or_insert((w, k));
                    if w < entry.0 {
                        *entry = (w, k);
                    }
                }
            }
        }
        let mut edges: Vec<Edge> = best
            .into_iter()
            .map(|((a, b), (weight, sphere))| Edge {
                a,
                b,
                weight,
                sphere,
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        edges
    }

    fn dijkstra(&self, source: usize, target: Option<usize>) -> (Vec<f64>, Vec<(u32, u32)>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![(u32::MAX, u32::MAX); n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source as u32));
        while let Some(Entry(d, u)) = heap.pop() {
            let u = u as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            if Some(u) == target {
                break;
            }
            // Nodes on a single sphere are dead ends: their predecessor shares
            // that sphere and reaches every neighbour at least as cheaply.
            if u != source && self.node_spheres[u].len() == 1 {
                continue;
            }
            let pu = self.nodes[u];
            for &k in &self.node_spheres[u] {
                for &v in &self.sphere_nodes[k as usize] {
                    let v = v as usize;
                    if done[v] {
                        continue;
                    }
                    let nd = d + self.weight(k as usize, pu, self.nodes[v]);
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = (u as u32, k);
                        heap.push(Entry(nd, v as u32));
                    }
                }
            }
        }
        (dist, pred)
    }

    /// Shortest-path costs from `source` to every transfer node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.dijkstra(source, None).0
    }

    pub fn shortest_path(&self, source: usize, target: usize) -> Option<Path> {
        if source == target {
            let k = self.node_spheres[source][0] as usize;
            return Some(Path {
                cost: 0.0,
                source,
                steps: vec![(target, k)],
            });
        }
        let (dist, pred) = self.dijkstra(source, Some(target));
        if !dist[target].is_finite() {
            return None;
        }
        let mut steps = Vec::new();
        let mut v = target;
        while v != source {
            let (u, k) = pred[v];
            steps.push((v, k as usize));
            v = u as usize;
        }
        steps.reverse();
        Some(Path {
            cost: dist[target],
            source,
            steps,
        })
    }

    pub fn path_chain(&self, path: &Path) -> Result<Chain> {
        let mut points = vec![self.nodes[path.source]];
        let mut spheres = Vec::with_capacity(path.steps.len());
        for &(v, k) in &path.steps {
            points.push(self.nodes[v]);
            spheres.push(self.spheres[k]);
        }
        Chain::new(points, spheres)
    }
}
