//! Vector and sphere geometry in R³ at unit-ball scale.
//!
//! Everything here is a pure function of immutable values. Sphere membership
//! is checked against [`ON_SPHERE_TOL`] on `| |p - center| - radius |`.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for "point lies on sphere".
pub const ON_SPHERE_TOL: f64 = 1e-9;
/// Slack allowed on the admissibility constraint `radius <= 1 - |center|`.
pub const ADMISSIBLE_TOL: f64 = 1e-12;
/// Tolerance on `|d - (r_a ± r_b)|` for recognising tangent spheres.
pub const TANGENCY_TOL: f64 = 1e-9;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
// Plastic number; its powers give the two-dimensional Kronecker (R2) sequence.
const PLASTIC: f64 = 1.324_717_957_244_746;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The origin `O`.
pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Point3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, k: f64) -> Point3 {
        Point3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Euclidean distance `d_E`.
pub fn euclid(p: Point3, q: Point3) -> f64 {
    (p - q).norm()
}

/// A sphere given by center and radius.
///
/// Intrinsic quantities (angles, antipodes, the shortcut metric) are defined
/// for any sphere. Membership in the admissible set (spheres inside the
/// closed unit ball) is checked separately by [`SpherePose::is_admissible`]
/// and enforced wherever a sphere joins a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePose {
    pub center: Point3,
    pub radius: f64,
}

impl SpherePose {
    pub fn new(center: Point3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::NotAdmissible {
                center_norm: center.norm(),
                radius,
            });
        }
        Ok(Self { center, radius })
    }

    /// Constructs a sphere that fits inside the closed unit ball.
    pub fn admissible(center: Point3, radius: f64) -> Result<Self> {
        let s = Self::new(center, radius)?;
        if !s.is_admissible() {
            return Err(Error::NotAdmissible {
                center_norm: center.norm(),
                radius,
            });
        }
        Ok(s)
    }

    /// The sphere of radius 1/2 internally tangent to the unit sphere at `x`;
    /// it passes through both `x` and the origin.
    pub fn boundary_half(x: Point3) -> Self {
        Self {
            center: x * 0.5,
            radius: 0.5,
        }
    }

    /// The sphere of radius `r` internally tangent to the unit sphere at the
    /// unit vector `x`.
    pub fn tangent_at(x: Point3, r: f64) -> Self {
        Self {
            center: x * (1.0 - r),
            radius: r,
        }
    }

    pub fn is_admissible(&self) -> bool {
        let n = self.center.norm();
        n < 1.0 && self.radius > 0.0 && self.radius <= 1.0 - n + ADMISSIBLE_TOL
    }

    /// Signed deviation `|p - center| - radius`.
    pub fn deviation(&self, p: Point3) -> f64 {
        euclid(p, self.center) - self.radius
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.deviation(p).abs() <= ON_SPHERE_TOL
    }

    pub fn check_on(&self, p: Point3) -> Result<()> {
        let deviation = self.deviation(p).abs();
        if deviation <= ON_SPHERE_TOL && deviation.is_finite() {
            Ok(())
        } else {
            Err(Error::OffSphere {
                deviation,
                tolerance: ON_SPHERE_TOL,
            })
        }
    }

    /// Point at unit direction `dir` from the center.
    pub fn point_at(&self, dir: Point3) -> Point3 {
        self.center + dir * self.radius
    }
}

/// Angle at the sphere's center between `p` and `q`, in `[0, π]`.
pub fn central_angle(s: &SpherePose, p: Point3, q: Point3) -> Result<f64> {
    s.check_on(p)?;
    s.check_on(q)?;
    Ok(angle_between(p - s.center, q - s.center))
}

/// Angle between two vectors; `atan2` keeps full precision near 0 and π.
pub fn angle_between(u: Point3, v: Point3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Antipodal point `2·center − p`.
pub fn antipode(s: &SpherePose, p: Point3) -> Result<Point3> {
    s.check_on(p)?;
    Ok(s.center * 2.0 - p)
}

/// Right-handed orthonormal pair spanning the plane orthogonal to unit `n`.
pub fn orthonormal_basis(n: Point3) -> (Point3, Point3) {
    // Duff et al., "Building an Orthonormal Basis, Revisited".
    let sign = 1.0_f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Point3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Point3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

/// A rigid motion `p ↦ rotation·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub rotation: [[f64; 3]; 3],
    pub translation: Point3,
}

impl Isometry {
    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: ORIGIN,
        }
    }

    pub fn rotation_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rotation: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            translation: ORIGIN,
        }
    }

    /// Uniformly random rotation (Shoemake's unit quaternion method) followed
    /// by a translation with coordinates in `[-max_shift, max_shift]`.
    pub fn random<R: Rng>(rng: &mut R, max_shift: f64) -> Self {
        let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let (w, x) = (a * (2.0 * PI * u2).sin(), a * (2.0 * PI * u2).cos());
        let (y, z) = (b * (2.0 * PI * u3).sin(), b * (2.0 * PI * u3).cos());
        let rotation = [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - z * w),
                2.0 * (x * z + y * w),
            ],
            [
                2.0 * (x * y + z * w),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - x * w),
            ],
            [
                2.0 * (x * z - y * w),
                2.0 * (y * z + x * w),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ];
        let mut shift = || (2.0 * rng.gen::<f64>() - 1.0) * max_shift;
        let translation = Point3::new(shift(), shift(), shift());
        Self {
            rotation,
            translation,
        }
    }

    /// Largest entry of `Rᵀ·R − I` in absolute value.
    pub fn orthogonality_defect(&self) -> f64 {
        let r = &self.rotation;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn rotate(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        Point3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
        )
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        self.rotate(p) + self.translation
    }

    /// Image of a sphere; the radius is unchanged.
    pub fn apply_sphere(&self, s: &SpherePose) -> SpherePose {
        SpherePose {
            center: self.apply(s.center),
            radius: s.radius,
        }
    }
}

pub fn apply_isometry(t: &Isometry, p: Point3) -> Point3 {
    t.apply(p)
}

/// SplitMix64 finaliser, used to derive independent sub-seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seeded_rotation(seed: u64) -> Isometry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Isometry::random(&mut rng, 0.0)
}

/// Deterministic quasi-uniform points on `s` from a Fibonacci lattice.
///
/// The lattice is rotated by a rotation drawn from `seed`, so different seeds
/// give differently oriented lattices. Same `(count, seed)` is bit-identical.
pub fn sample_sphere(s: &SpherePose, count: usize, seed: u64) -> Vec<Point3> {
    let rot = seeded_rotation(seed);
    let n = count as f64;
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let (sin_p, cos_p) = (i as f64 * GOLDEN_ANGLE).sin_cos();
            let dir = rot.rotate(Point3::new(rho * cos_p, rho * sin_p, z));
            s.point_at(dir)
        })
        .collect()
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

fn r2_offsets(seed: u64) -> (f64, f64) {
    let a = mix_seed(seed, 1) >> 11;
    let b = mix_seed(seed, 2) >> 11;
    let scale = 1.0 / (1u64 << 53) as f64;
    (a as f64 * scale, b as f64 * scale)
}

/// The `i`-th point of the seeded R2 sequence in the unit square.
fn r2_point(offsets: (f64, f64), i: usize) -> (f64, f64) {
    let k = (i + 1) as f64;
    (
        frac(offsets.0 + k / PLASTIC),
        frac(offsets.1 + k / (PLASTIC * PLASTIC)),
    )
}

/// Prefix-stable quasi-uniform points on `s`: the first `count` points of an
/// infinite low-discrepancy sequence, so a larger `count` with the same seed
/// returns a superset of a smaller one.
pub fn nested_sphere_points(s: &SpherePose, count: usize, seed: u64) -> Vec<Point3> {
    let offsets = r2_offsets(seed);
    (0..count)
        .map(|i| {
            let (u, v) = r2_point(offsets, i);
            let z = 1.0 - 2.0 * u;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let (sin_p, cos_p) = (2.0 * PI * v).sin_cos();
            s.point_at(Point3::new(rho * cos_p, rho * sin_p, z))
        })
        .collect()
}

/// Prefix-stable points on the unit-sphere cap of chord radius `chord`
/// around the unit vector `axis`, area-uniform.
pub fn nested_cap_points(axis: Point3, chord: f64, count: usize, seed: u64) -> Vec<Point3> {
    let (e1, e2) = orthonormal_basis(axis);
    let drop = (chord * chord / 2.0).min(2.0);
    let offsets = r2_offsets(seed);
    (0..count)
        .map(|i| {
            let (u, v) = r2_point(offsets, i);
            let cos_t = 1.0 - u * drop;
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            let (sp, cp) = (2.0 * PI * v).sin_cos();
            (axis * cos_t + e1 * (sin_t * cp) + e2 * (sin_t * sp)).normalized()
        })
        .collect()
}

/// Circle in 3-space; `radius == 0` denotes a single (tangency) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point3,
    pub radius: f64,
    pub normal: Point3,
}

impl Circle {
    pub fn is_point(&self) -> bool {
        self.radius == 0.0
    }

    pub fn point_at_angle(&self, theta: f64) -> Point3 {
        let (e1, e2) = orthonormal_basis(self.normal);
        let (s, c) = theta.sin_cos();
        self.center + (e1 * c + e2 * s) * self.radius
    }

    /// Prefix-stable golden-angle samples on the circle.
    pub fn nested_points(&self, count: usize, seed: u64) -> Vec<Point3> {
        if self.is_point() {
            return vec![self.center];
        }
        let phase = r2_offsets(seed).0;
        (0..count)
            .map(|k| {
                let theta = 2.0 * PI * frac(phase + k as f64 * GOLDEN_ANGLE / (2.0 * PI));
                self.point_at_angle(theta)
            })
            .collect()
    }
}

/// Intersection of two sphere surfaces.
///
/// Returns the circle for a transversal intersection, a zero-radius circle
/// at the contact point for (internal or external) tangency, and `None` for
/// disjoint, strictly nested, or concentric spheres.
pub fn sphere_intersection_circle(a: &SpherePose, b: &SpherePose) -> Option<Circle> {
    let axis = b.center - a.center;
    let d = axis.norm();
    if d <= TANGENCY_TOL {
        return None;
    }
    let n = axis / d;
    let (ra, rb) = (a.radius, b.radius);
    if (d - (ra + rb)).abs() <= TANGENCY_TOL {
        return Some(Circle {
            center: a.center + n * ra,
            radius: 0.0,
            normal: n,
        });
    }
    if (d - (ra - rb).abs()).abs() <= TANGENCY_TOL {
        // Contact point lies on the ray from the larger sphere's center
        // through the smaller one's.
        let (big, dir) = if ra >= rb { (a, n) } else { (b, -n) };
        return Some(Circle {
            center: big.center + dir * big.radius,
            radius: 0.0,
            normal: n,
        });
    }
    if d > ra + rb || d < (ra - rb).abs() {
        return None;
    }
    let h = (d * d + ra * ra - rb * rb) / (2.0 * d);
    let rho = (ra * ra - h * h).max(0.0).sqrt();
    Some(Circle {
        center: a.center + n * h,
        radius: rho,
        normal: n,
    })
}
