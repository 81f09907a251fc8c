//! Sphere families with scale assignments, chains of spheres joining two
//! points, chain costs, and the two chain constructions the ball metric
//! relies on: splitting shortcut hops at the antipode, and walking a
//! straight segment through small spheres.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::BoundaryFunction;
use crate::geometry::{antipode, euclid, orthonormal_basis, Point3, SpherePose, ON_SPHERE_TOL};
use crate::shortcut::{alpha, shortcut_distance, Branch, ShortcutParam};

/// Points with `|p| >= 1 - BOUNDARY_TOL` are treated as lying on S².
pub const BOUNDARY_TOL: f64 = 5e-10;
/// Tolerance for matching a pose against the members of a finite family.
pub const POSE_TOL: f64 = 1e-12;
/// Largest sphere radius used when walking segments in the boundary family.
/// Staying below 1/2 keeps every hop off the reduced-scale spheres.
pub const BOUNDARY_SEGMENT_RADIUS: f64 = 0.25;

const BALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledSphere {
    #[serde(flatten)]
    pub pose: SpherePose,
    pub scale: ShortcutParam,
}

#[derive(Debug, Clone)]
pub enum FamilyVariant {
    ExplicitFinite(Vec<ScaledSphere>),
    /// All admissible spheres of radius at most `t`, every one with scale `s0`.
    SegmentCover {
        t: f64,
        s0: ShortcutParam,
    },
    /// All admissible spheres of radius at most 1/2. The sphere of radius 1/2
    /// tangent to S² at `x` has scale `(1 + f(x))/2`; all others have scale 1.
    BoundaryShortcut(BoundaryFunction),
}

#[derive(Debug, Clone)]
pub struct SphereFamily {
    variant: FamilyVariant,
    s0: f64,
}

#[derive(Deserialize)]
struct FamilyFile {
    spheres: Vec<SphereEntry>,
}

#[derive(Deserialize)]
struct SphereEntry {
    center: [f64; 3],
    radius: f64,
    scale: f64,
}

impl SphereFamily {
    pub fn explicit(spheres: Vec<ScaledSphere>) -> Result<Self> {
        if spheres.is_empty() {
            return Err(Error::InvalidConfig("explicit family is empty".into()));
        }
        for s in &spheres {
            if !s.pose.is_admissible() {
                return Err(Error::NotAdmissible {
                    center_norm: s.pose.center.norm(),
                    radius: s.pose.radius,
                });
            }
        }
        let s0 = spheres.iter().map(|s| s.scale.get()).fold(1.0, f64::min);
        Ok(Self {
            variant: FamilyVariant::ExplicitFinite(spheres),
            s0,
        })
    }

    /// Reads `{"spheres": [{"center": [x,y,z], "radius": r, "scale": s}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let spheres = file
            .spheres
            .into_iter()
            .map(|e| {
                Ok(ScaledSphere {
                    pose: SpherePose::admissible(e.center.into(), e.radius)?,
                    scale: ShortcutParam::new(e.scale)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(spheres)
    }

    pub fn segment_cover(t: f64, s0: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "segment cover needs 0 < t <= 1, got {t}"
            )));
        }
        let s0 = ShortcutParam::new(s0)?;
        Ok(Self {
            variant: FamilyVariant::SegmentCover { t, s0 },
            s0: s0.get(),
        })
    }

    pub fn boundary_shortcut(f: BoundaryFunction) -> Result<Self> {
        if f.sup() > 1.0 + 1e-12 {
            return Err(Error::InvalidFunction(format!(
                "boundary construction needs f <= 1, sup is {}",
                f.sup()
            )));
        }
        Ok(Self {
            variant: FamilyVariant::BoundaryShortcut(f),
            s0: 0.5,
        })
    }

    pub fn variant(&self) -> &FamilyVariant {
        &self.variant
    }

    /// Declared lower bound `s0` on all scales.
    pub fn lower_scale(&self) -> f64 {
        self.s0
    }

    pub fn is_parametric(&self) -> bool {
        !matches!(self.variant, FamilyVariant::ExplicitFinite(_))
    }

    pub fn spheres(&self) -> Option<&[ScaledSphere]> {
        match &self.variant {
            FamilyVariant::ExplicitFinite(s) => Some(s),
            _ => None,
        }
    }

    /// Scale assigned to `pose`, or `NotInFamily`.
    pub fn scale_of(&self, pose: &SpherePose) -> Result<ShortcutParam> {
        let not_in = || Error::NotInFamily(format!("sphere {pose:?}"));
        match &self.variant {
            FamilyVariant::ExplicitFinite(spheres) => spheres
                .iter()
                .find(|s| same_pose(&s.pose, pose))
                .map(|s| s.scale)
                .ok_or_else(not_in),
            FamilyVariant::SegmentCover { t, s0 } => {
                if pose.is_admissible() && pose.radius <= t + POSE_TOL {
                    Ok(*s0)
                } else {
                    Err(not_in())
                }
            }
            FamilyVariant::BoundaryShortcut(f) => {
                if !pose.is_admissible() || pose.radius > 0.5 + POSE_TOL {
                    return Err(not_in());
                }
                let x = pose.center * 2.0;
                if (pose.radius - 0.5).abs() <= ON_SPHERE_TOL
                    && (x.norm() - 1.0).abs() <= ON_SPHERE_TOL
                {
                    ShortcutParam::new((1.0 + f.evaluate(x)) / 2.0)
                } else {
                    Ok(ShortcutParam::ONE)
                }
            }
        }
    }

    pub fn scaled(&self, pose: SpherePose) -> Result<ScaledSphere> {
        Ok(ScaledSphere {
            pose,
            scale: self.scale_of(&pose)?,
        })
    }

    /// Whether `p` may be queried: inside the ball for parametric families,
    /// on some member sphere for finite ones.
    pub fn admits_point(&self, p: Point3) -> bool {
        match &self.variant {
            FamilyVariant::ExplicitFinite(spheres) => spheres.iter().any(|s| s.pose.contains(p)),
            _ => p.is_finite() && p.norm() <= 1.0 + BALL_TOL,
        }
    }

    /// `(max hop radius, generic scale)` used when walking segments.
    fn segment_params(&self) -> Result<(f64, ShortcutParam)> {
        match &self.variant {
            FamilyVariant::SegmentCover { t, s0 } => Ok((*t, *s0)),
            FamilyVariant::BoundaryShortcut(_) => Ok((BOUNDARY_SEGMENT_RADIUS, ShortcutParam::ONE)),
            FamilyVariant::ExplicitFinite(_) => Err(Error::InvalidConfig(
                "segment chains need a segment-cover or boundary family".into(),
            )),
        }
    }
}

impl fmt::Display for SphereFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            FamilyVariant::ExplicitFinite(s) => write!(f, "explicit({} spheres)", s.len()),
            FamilyVariant::SegmentCover { t, s0 } => {
                write!(f, "segment-cover:t={t},s0={}", s0.get())
            }
            FamilyVariant::BoundaryShortcut(func) => write!(f, "boundary:f={func}"),
        }
    }
}

fn same_pose(a: &SpherePose, b: &SpherePose) -> bool {
    (a.radius - b.radius).abs() <= POSE_TOL && euclid(a.center, b.center) <= POSE_TOL
}

/// A chain `X_0, ..., X_n` with hop `i` hosted by sphere `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chain {
    points: Vec<Point3>,
    spheres: Vec<ScaledSphere>,
}

/// One hop of a chain with its cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hop {
    pub from: Point3,
    pub to: Point3,
    pub sphere: ScaledSphere,
    pub cost: f64,
    pub branch: Branch,
}

impl Chain {
    pub fn new(points: Vec<Point3>, spheres: Vec<ScaledSphere>) -> Result<Self> {
        if spheres.is_empty() || points.len() != spheres.len() + 1 {
            return Err(Error::InvalidChain(format!(
                "{} points for {} spheres",
                points.len(),
                spheres.len()
            )));
        }
        for (i, s) in spheres.iter().enumerate() {
            for p in [points[i], points[i + 1]] {
                if !s.pose.contains(p) {
                    return Err(Error::InvalidChain(format!(
                        "hop {i}: point {p:?} is {:e} off its sphere",
                        s.pose.deviation(p).abs()
                    )));
                }
            }
        }
        Ok(Self { points, spheres })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn spheres(&self) -> &[ScaledSphere] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn start(&self) -> Point3 {
        self.points[0]
    }

    pub fn end(&self) -> Point3 {
        self.points[self.points.len() - 1]
    }

    /// Hops with their `d^s` costs, after checking each sphere's scale
    /// against `family`.
    pub fn hops(&self, family: &SphereFamily) -> Result<Vec<Hop>> {
        self.spheres
            .iter()
            .enumerate()
            .map(|(i, sphere)| {
                let expected = family
                    .scale_of(&sphere.pose)
                    .map_err(|e| Error::InvalidChain(format!("hop {i}: {e}")))?;
                if (expected.get() - sphere.scale.get()).abs() > POSE_TOL {
                    return Err(Error::InvalidChain(format!(
                        "hop {i}: scale {} but family assigns {}",
                        sphere.scale.get(),
                        expected.get()
                    )));
                }
                let (from, to) = (self.points[i], self.points[i + 1]);
                let d = shortcut_distance(&sphere.pose, sphere.scale, from, to)
                    .map_err(|e| Error::InvalidChain(format!("hop {i}: {e}")))?;
                Ok(Hop {
                    from,
                    to,
                    sphere: *sphere,
                    cost: d.value,
                    branch: d.branch,
                })
            })
            .collect()
    }

    /// Concatenates `other` onto `self`; `other` must start where `self` ends.
    pub fn join(mut self, other: Chain) -> Result<Chain> {
        if euclid(self.end(), other.start()) > ON_SPHERE_TOL {
            return Err(Error::InvalidChain("chains do not meet".into()));
        }
        self.points.extend_from_slice(&other.points[1..]);
        self.spheres.extend_from_slice(&other.spheres);
        Ok(self)
    }

    pub fn reversed(&self) -> Chain {
        let mut points = self.points.clone();
        let mut spheres = self.spheres.clone();
        points.reverse();
        spheres.reverse();
        Chain { points, spheres }
    }
}

/// Sum of hop costs of `c` under `family`.
pub fn chain_cost(family: &SphereFamily, c: &Chain) -> Result<f64> {
    Ok(c.hops(family)?.iter().map(|h| h.cost).sum())
}

/// Rewrites every shortcut hop `(X, Y)` as `(X, −X)` then `(−X, Y)` on the
/// same sphere. The result has the same endpoints and cost, and every hop is
/// either antipodal or on the Euclidean branch.
pub fn normalize_to_antipodal(family: &SphereFamily, c: &Chain) -> Result<Chain> {
    let hops = c.hops(family)?;
    let mut points = vec![c.start()];
    let mut spheres = Vec::with_capacity(c.len());
    for hop in hops {
        if hop.branch == Branch::Shortcut {
            let anti = antipode(&hop.sphere.pose, hop.from)?;
            points.push(anti);
            spheres.push(hop.sphere);
        }
        points.push(hop.to);
        spheres.push(hop.sphere);
    }
    Chain::new(points, spheres)
}

/// Whether every hop is antipodal (to 1e−9) or evaluates on the Euclidean
/// branch.
pub fn is_antipodal_form(family: &SphereFamily, c: &Chain) -> Result<bool> {
    for hop in c.hops(family)? {
        let anti = antipode(&hop.sphere.pose, hop.from)?;
        if hop.branch != Branch::Euclid && euclid(anti, hop.to) > ON_SPHERE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_boundary_point(p: Point3) -> bool {
    p.norm() >= 1.0 - BOUNDARY_TOL
}

/// Smallest admissible sphere through `a` and `b` of radius at most
/// `max_radius` on which the pair subtends at most `π − 2α`, if any.
///
/// Candidate centers lie on the bisector plane of `a, b`, displaced from the
/// midpoint by `β` toward the axis through the origin. `|c| + R` is convex
/// in `β` and reaches `max(|a|, |b|)` at its minimum, so an admissible
/// sphere always exists for points of the ball; the search finds the
/// smallest feasible `β` and hence the smallest radius.
pub fn host_sphere(a: Point3, b: Point3, max_radius: f64, alpha_rad: f64) -> Option<SpherePose> {
    let h = euclid(a, b);
    if h == 0.0 {
        return None;
    }
    let e = h / 2.0;
    let u = (b - a) / h;
    let m = (a + b) * 0.5;
    let mu = m.dot(u);
    let mperp = m - u * mu;
    let d = mperp.norm();
    let n = if d > 1e-15 {
        mperp / d
    } else {
        orthonormal_basis(u).0
    };
    let excess = |beta: f64| (m - n * beta).norm() + (e * e + beta * beta).sqrt();
    let beta_star = if d > 1e-15 {
        d * e / (mu.abs() + e)
    } else {
        0.0
    };
    let beta_lo = if excess(0.0) <= 1.0 {
        0.0
    } else if excess(beta_star) > 1.0 {
        return None;
    } else {
        let (mut lo, mut hi) = (0.0, beta_star);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    // Small margin so the pair lands strictly inside the Euclidean branch.
    let beta_euclid = if alpha_rad > 0.0 {
        e * alpha_rad.tan() * (1.0 + 1e-9)
    } else {
        0.0
    };
    let beta = beta_lo.max(beta_euclid);
    if excess(beta) > 1.0 {
        return None;
    }
    let radius = (e * e + beta * beta).sqrt();
    if radius > max_radius {
        return None;
    }
    let pose = SpherePose {
        center: m - n * beta,
        radius,
    };
    pose.is_admissible().then_some(pose)
}

/// A chain along the straight segment from `p` to `q` with strictly
/// increasing progress.
///
/// Boundary endpoints are entered through the sphere internally tangent to
/// S² at that point; the remaining hops use [`host_sphere`] with hop lengths
/// adapted to the available room. Every sphere has radius at most the
/// family's segment radius. Hops on the host spheres are on the Euclidean
/// branch, so the cost equals `d_E(p, q)` except for a tangent entry hop that
/// runs within `α` of the radial direction, where it is strictly cheaper.
pub fn segment_chain(family: &SphereFamily, p: Point3, q: Point3) -> Result<Chain> {
    let (t, s) = family.segment_params()?;
    for x in [p, q] {
        if !family.admits_point(x) {
            return Err(Error::NotInFamily(format!(
                "{x:?} is outside the unit ball"
            )));
        }
    }
    let len = euclid(p, q);
    if len == 0.0 {
        return Err(Error::DegenerateInput("p = q needs no chain".into()));
    }
    let a_rad = alpha(s).radians();
    let u = (q - p) / len;

    let mut points = vec![p];
    let mut spheres = Vec::new();
    let push = |pose: SpherePose, spheres: &mut Vec<ScaledSphere>| -> Result<()> {
        spheres.push(family.scaled(pose)?);
        Ok(())
    };

    // Tangent entry at p.
    if is_boundary_point(p) {
        let x = p.normalized();
        let c = -u.dot(x);
        let r = t.min(len / (6.0 * c));
        let tau = 2.0 * r * c;
        points.push(p + u * tau);
        push(SpherePose::tangent_at(x, r), &mut spheres)?;
    }
    // Tangent exit at q, constructed now and appended last.
    let exit = if is_boundary_point(q) {
        let x = q.normalized();
        let c = u.dot(x);
        let r = t.min(len / (6.0 * c));
        let tau = 2.0 * r * c;
        Some((q - u * tau, SpherePose::tangent_at(x, r)))
    } else {
        None
    };
    let target = exit.map_or(q, |(pt, _)| pt);

    let mut cur = *points.last().expect("nonempty");
    let mut step = 2.0 * t;
    loop {
        let remaining = euclid(cur, target);
        if remaining == 0.0 {
            break;
        }
        let mut h = remaining.min(step);
        let (next, pose) = loop {
            let next = if h >= remaining { target } else { cur + u * h };
            if let Some(pose) = host_sphere(cur, next, t, a_rad) {
                break (next, pose);
            }
            h /= 2.0;
            if h < 1e-13 {
                return Err(Error::DegenerateInput(format!(
                    "no admissible hop from {cur:?} toward {q:?}"
                )));
            }
        };
        points.push(next);
        push(pose, &mut spheres)?;
        cur = next;
        step = (2.0 * h).min(2.0 * t);
        if next == target {
            break;
        }
    }
    if let Some((_, pose)) = exit {
        points.push(q);
        push(pose, &mut spheres)?;
    }
    Chain::new(points, spheres)
}

/// A one-hop chain from `p` to itself on some member sphere through `p`.
pub fn trivial_chain(family: &SphereFamily, p: Point3) -> Result<Chain> {
    let pose = match family.variant() {
        FamilyVariant::ExplicitFinite(spheres) => spheres
            .iter()
            .find(|s| s.pose.contains(p))
            .map(|s| s.pose)
            .ok_or_else(|| Error::NotInFamily(format!("{p:?} is on no member sphere")))?,
        _ => {
            if !family.admits_point(p) {
                return Err(Error::NotInFamily(format!(
                    "{p:?} is outside the unit ball"
                )));
            }
            let (t, _) = family.segment_params()?;
            let rho = t.min(0.25);
            let dir = if p.norm() > 0.0 {
                p.normalized()
            } else {
                Point3::new(0.0, 0.0, 1.0)
            };
            SpherePose {
                center: p - dir * rho,
                radius: rho,
            }
        }
    };
    Chain::new(vec![p, p], vec![family.scaled(pose)?])
}
