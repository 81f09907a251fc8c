//! The shortcut metric `d^s` on a sphere.
//!
//! Near-antipodal pairs are charged `2·r·s` for the jump to the antipode plus
//! the chord from there; every other pair is charged its chord. The switch
//! happens at central angle `π − 2α` where
//! `α = arcsin((√(2 − s²) − s) / 2)`, which is exactly where the two
//! formulas agree.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_between, euclid, Point3, SpherePose};

/// Shortcut scale `s ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ShortcutParam(f64);

impl ShortcutParam {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s <= 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidScale(s))
        }
    }

    pub const ONE: ShortcutParam = ShortcutParam(1.0);

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ShortcutParam {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<ShortcutParam> for f64 {
    fn from(s: ShortcutParam) -> f64 {
        s.0
    }
}

/// Branch angle `α ∈ [0, π/4)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaValue(f64);

impl AlphaValue {
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Central angle above which the shortcut branch applies.
    pub fn threshold(self) -> f64 {
        PI - 2.0 * self.0
    }
}

pub fn alpha(s: ShortcutParam) -> AlphaValue {
    let s = s.get();
    let sin_a = ((2.0 - s * s).sqrt() - s) / 2.0;
    AlphaValue(sin_a.clamp(0.0, 1.0).asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Euclid,
    Shortcut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortcutDistance {
    pub value: f64,
    pub branch: Branch,
}

/// Evaluates `d^s(p, q)` on the sphere `sp`.
///
/// Ties at the threshold angle take the Euclidean branch. The shortcut value
/// is computed as `|(c − p) + (c − q)|` so that it is exactly symmetric.
pub fn shortcut_distance(
    sp: &SpherePose,
    s: ShortcutParam,
    p: Point3,
    q: Point3,
) -> Result<ShortcutDistance> {
    sp.check_on(p)?;
    sp.check_on(q)?;
    Ok(shortcut_distance_unchecked(sp, s, p, q))
}

/// As [`shortcut_distance`] for points already known to be on `sp`.
pub fn shortcut_distance_unchecked(
    sp: &SpherePose,
    s: ShortcutParam,
    p: Point3,
    q: Point3,
) -> ShortcutDistance {
    let (u, v) = (p - sp.center, q - sp.center);
    let angle = angle_between(u, v);
    if angle <= alpha(s).threshold() {
        ShortcutDistance {
            value: euclid(p, q),
            branch: Branch::Euclid,
        }
    } else {
        ShortcutDistance {
            value: 2.0 * sp.radius * s.get() + (-(u + v)).norm(),
            branch: Branch::Shortcut,
        }
    }
}

/// Radius `t` of a `d^s`-ball around any point inside which `d^s = d_E`.
///
/// Points at `d^s`-distance below `t` from `P` are on the Euclidean branch
/// (shortcut values are at least `2rs`) with chord below
/// `r·sin(π/4 − α/2)`, so any two of them subtend less than `π − 2α`.
pub fn locally_euclidean_radius(sp: &SpherePose, s: ShortcutParam) -> f64 {
    let a = alpha(s).radians();
    sp.radius * (FRAC_PI_4 - a / 2.0).sin().min(2.0 * s.get())
}
