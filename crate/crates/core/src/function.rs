//! Catalog of boundary functions `f: S² → [0, a]`.
//!
//! Every function is a pure map; evaluation never mutates state, so a
//! function can be shared freely between worker threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{euclid, Point3};

/// Exact-membership tolerance for the enumerated dense set and table points.
pub const MATCH_TOL: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum FunctionKind {
    Constant {
        c: f64,
    },
    /// `height·max(0, 1 − d_E(x, x0)/radius)`.
    Spike {
        x0: Point3,
        height: f64,
        radius: f64,
    },
    /// `d_E(x, x0)`; 1-Lipschitz with range `[0, 2]`.
    DistanceTo {
        x0: Point3,
    },
    /// Indicator of the first `k` points of an enumerated countable dense set.
    DenseIndicatorPrefix {
        k: usize,
        set: Arc<PointIndex>,
    },
    /// Value of the nearest table point.
    TableLookup {
        points: Vec<Point3>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct BoundaryFunction {
    kind: FunctionKind,
    scale: f64,
}

impl BoundaryFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "constant must be >= 0, got {c}"
            )));
        }
        Ok(Self::from_kind(FunctionKind::Constant { c }))
    }

    pub fn spike(x0: Point3, height: f64, radius: f64) -> Result<Self> {
        let x0 = unit_point(x0)?;
        if !(height >= 0.0 && height.is_finite() && radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "spike needs height >= 0 and radius > 0, got {height}, {radius}"
            )));
        }
        Ok(Self::from_kind(FunctionKind::Spike { x0, height, radius }))
    }

    pub fn distance_to(x0: Point3) -> Result<Self> {
        Ok(Self::from_kind(FunctionKind::DistanceTo {
            x0: unit_point(x0)?,
        }))
    }

    pub fn dense_indicator(k: usize) -> Self {
        let set = Arc::new(PointIndex::new(dense_prefix(k)));
        Self::from_kind(FunctionKind::DenseIndicatorPrefix { k, set })
    }

    pub fn table(points: Vec<Point3>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(Error::InvalidFunction(
                "table needs equally many points and values (at least one)".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidFunction(
                "table values must be finite and >= 0".into(),
            ));
        }
        let points = points
            .into_iter()
            .map(unit_point)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_kind(FunctionKind::TableLookup {
            points,
            values,
        }))
    }

    /// Parses `{"points": [[x,y,z], ...], "values": [...]}`.
    pub fn table_from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Table {
            points: Vec<Point3>,
            values: Vec<f64>,
        }
        let t: Table = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::table(t.points, t.values)
    }

    fn from_kind(kind: FunctionKind) -> Self {
        Self { kind, scale: 1.0 }
    }

    /// `f / divisor`.
    pub fn rescaled(&self, divisor: f64) -> Result<Self> {
        self.with_scale(self.scale / divisor)
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "scale must be > 0, got {scale}"
            )));
        }
        Ok(Self {
            kind: self.kind.clone(),
            scale,
        })
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn evaluate(&self, x: Point3) -> f64 {
        let raw = match &self.kind {
            FunctionKind::Constant { c } => *c,
            FunctionKind::Spike { x0, height, radius } => {
                height * (1.0 - euclid(x, *x0) / radius).max(0.0)
            }
            FunctionKind::DistanceTo { x0 } => euclid(x, *x0),
            FunctionKind::DenseIndicatorPrefix { set, .. } => {
                if set.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionKind::TableLookup { points, values } => {
                let mut best = (f64::INFINITY, 0.0);
                for (p, v) in points.iter().zip(values) {
                    let d = euclid(x, *p);
                    if d < best.0 {
                        best = (d, *v);
                    }
                }
                best.1
            }
        };
        self.scale * raw
    }

    /// Least upper bound `a` of the function's values.
    pub fn sup(&self) -> f64 {
        let raw = match &self.kind {
            FunctionKind::Constant { c } => *c,
            FunctionKind::Spike { height, .. } => *height,
            FunctionKind::DistanceTo { .. } => 2.0,
            FunctionKind::DenseIndicatorPrefix { k, .. } => {
                if *k > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionKind::TableLookup { values, .. } => values.iter().copied().fold(0.0, f64::max),
        };
        self.scale * raw
    }

    /// Points where the function has distinguished behaviour: spike and
    /// distance centres, the dense-set prefix, table points.
    pub fn special_points(&self) -> Vec<Point3> {
        match &self.kind {
            FunctionKind::Constant { .. } => Vec::new(),
            FunctionKind::Spike { x0, .. } | FunctionKind::DistanceTo { x0 } => vec![*x0],
            FunctionKind::DenseIndicatorPrefix { set, .. } => set.points().to_vec(),
            FunctionKind::TableLookup { points, .. } => points.clone(),
        }
    }

    /// Parses a catalog string such as `spike:x0=0,0,1:h=1:r=0.05`.
    ///
    /// Recognised forms: `constant:c=V`, `spike:x0=X,Y,Z:h=H:r=R`,
    /// `distance-to:x0=X,Y,Z`, `dense-indicator:k=K`, `table:file=PATH`.
    /// Any form accepts a trailing `:scale=V`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let mut args: HashMap<&str, &str> = HashMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            args.insert(k.trim(), v.trim());
        }
        let f = match name {
            "constant" => Self::constant(num(&args, "c")?)?,
            "spike" => Self::spike(vec3(&args, "x0")?, num(&args, "h")?, num(&args, "r")?)?,
            "distance-to" => Self::distance_to(vec3(&args, "x0")?)?,
            "dense-indicator" => {
                let k = get(&args, "k")?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("k: {e}")))?;
                Self::dense_indicator(k)
            }
            "table" => {
                let path = get(&args, "file")?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("reading {path}: {e}")))?;
                Self::table_from_json(&text)?
            }
            other => return Err(Error::Parse(format!("unknown function `{other}`"))),
        };
        match args.get("scale") {
            Some(_) => f.with_scale(num(&args, "scale")?),
            None => Ok(f),
        }
    }
}

impl fmt::Display for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |x: &Point3| format!("{},{},{}", x.x, x.y, x.z);
        match &self.kind {
            FunctionKind::Constant { c } => write!(f, "constant:c={c}")?,
            FunctionKind::Spike { x0, height, radius } => {
                write!(f, "spike:x0={}:h={height}:r={radius}", p(x0))?
            }
            FunctionKind::DistanceTo { x0 } => write!(f, "distance-to:x0={}", p(x0))?,
            FunctionKind::DenseIndicatorPrefix { k, .. } => write!(f, "dense-indicator:k={k}")?,
            FunctionKind::TableLookup { points, .. } => write!(f, "table:n={}", points.len())?,
        }
        if self.scale != 1.0 {
            write!(f, ":scale={}", self.scale)?;
        }
        Ok(())
    }
}

fn get<'a>(args: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    args.get(key)
        .copied()
        .ok_or_else(|| Error::Parse(format!("missing `{key}=`")))
}

fn num(args: &HashMap<&str, &str>, key: &str) -> Result<f64> {
    get(args, key)?
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{key}: {e}")))
}

fn vec3(args: &HashMap<&str, &str>, key: &str) -> Result<Point3> {
    parse_point(get(args, key)?)
}

/// Parses `x,y,z`.
pub fn parse_point(text: &str) -> Result<Point3> {
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse(format!("point `{text}`: {e}")))?;
    match coords.as_slice() {
        [x, y, z] => Ok(Point3::new(*x, *y, *z)),
        _ => Err(Error::Parse(format!(
            "point `{text}` needs three coordinates"
        ))),
    }
}

fn unit_point(x: Point3) -> Result<Point3> {
    let n = x.norm();
    if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
        return Err(Error::InvalidFunction(format!(
            "{x:?} is not on the unit sphere"
        )));
    }
    Ok(x / n)
}

/// Rationals in (0, 1) in lowest terms, ordered by denominator then
/// numerator: 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...
fn rationals() -> impl Iterator<Item = f64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (2u64..).flat_map(|den| {
        (1..den)
            .filter(move |num| gcd(*num, den) == 1)
            .map(move |num| num as f64 / den as f64)
    })
}

/// The first `k` points of a countable dense subset of S².
///
/// Pairs `(u, v)` of rationals are visited along Cantor diagonals and mapped
/// area-uniformly by `z = 1 − 2u`, `φ = 2πv`.
pub fn dense_prefix(k: usize) -> Vec<Point3> {
    let mut out = Vec::with_capacity(k);
    let mut cache: Vec<f64> = Vec::new();
    let mut source = rationals();
    let mut q = |i: usize, cache: &mut Vec<f64>| {
        while cache.len() <= i {
            cache.push(source.next().expect("infinite"));
        }
        cache[i]
    };
    let mut diag = 0usize;
    while out.len() < k {
        for i in 0..=diag {
            if out.len() == k {
                break;
            }
            let (u, v) = (q(i, &mut cache), q(diag - i, &mut cache));
            let z = 1.0 - 2.0 * u;
            let rho = (1.0 - z * z).sqrt();
            let (s, c) = (2.0 * PI * v).sin_cos();
            out.push(Point3::new(rho * c, rho * s, z));
        }
        diag += 1;
    }
    out
}

/// Hash-grid over a fixed point set for exact (within [`MATCH_TOL`])
/// membership queries.
#[derive(Debug)]
pub struct PointIndex {
    points: Vec<Point3>,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

const CELL: f64 = 1e-6;

impl PointIndex {
    pub fn new(points: Vec<Point3>) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(*p)).or_default().push(i as u32);
        }
        Self { points, cells }
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn contains(&self, x: Point3) -> bool {
        // Cells are far wider than the match tolerance, so usually only the
        // cell of x itself needs probing.
        let lo = cell_of(x - Point3::new(MATCH_TOL, MATCH_TOL, MATCH_TOL));
        let hi = cell_of(x + Point3::new(MATCH_TOL, MATCH_TOL, MATCH_TOL));
        for cx in lo[0]..=hi[0] {
            for cy in lo[1]..=hi[1] {
                for cz in lo[2]..=hi[2] {
                    if let Some(ids) = self.cells.get(&[cx, cy, cz]) {
                        if ids
                            .iter()
                            .any(|&i| euclid(self.points[i as usize], x) <= MATCH_TOL)
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn cell_of(p: Point3) -> [i64; 3] {
    [
        (p.x / CELL).floor() as i64,
        (p.y / CELL).floor() as i64,
        (p.z / CELL).floor() as i64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_catalog_strings() {
        let f = BoundaryFunction::parse("spike:x0=0,0,1:h=1:r=0.05").unwrap();
        assert_eq!(f.evaluate(Point3::new(0.0, 0.0, 1.0)), 1.0);
        assert_eq!(f.evaluate(Point3::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(f.sup(), 1.0);
        let c = BoundaryFunction::parse("constant:c=0.3").unwrap();
        assert_eq!(c.evaluate(Point3::new(0.0, 1.0, 0.0)), 0.3);
        let d = BoundaryFunction::parse("distance-to:x0=1,0,0:scale=0.5").unwrap();
        assert_eq!(d.sup(), 1.0);
        assert!((d.evaluate(Point3::new(-1.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!(BoundaryFunction::parse("dense-indicator:k=10").is_ok());
        assert!(BoundaryFunction::parse("nope:c=1").is_err());
        assert!(BoundaryFunction::parse("spike:x0=0,0,2:h=1:r=0.1").is_err());
        assert!(BoundaryFunction::parse("constant").is_err());
        assert!(BoundaryFunction::parse("constant:c=-1").is_err());
    }

    #[test]
    fn dense_prefix_is_on_sphere_and_distinct() {
        let pts = dense_prefix(1000);
        assert_eq!(pts.len(), 1000);
        for p in &pts {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        let idx = PointIndex::new(pts.clone());
        for (i, p) in pts.iter().enumerate().step_by(37) {
            for (j, q) in pts.iter().enumerate() {
                if i != j {
                    assert!(euclid(*p, *q) > 1e-9);
                }
            }
            assert!(idx.contains(*p));
        }
        assert_eq!(&dense_prefix(10)[..], &pts[..10]);
    }

    #[test]
    fn dense_indicator_membership_is_exact() {
        let f = BoundaryFunction::dense_indicator(200);
        for c in f.special_points() {
            assert_eq!(f.evaluate(c), 1.0);
            let nudged = (c + crate::geometry::orthonormal_basis(c).0 * 1e-9).normalized();
            assert_eq!(f.evaluate(nudged), 0.0);
        }
    }

    #[test]
    fn table_lookup_nearest() {
        let f = BoundaryFunction::table_from_json(
            r#"{"points": [[0,0,1],[0,0,-1]], "values": [0.25, 0.75]}"#,
        )
        .unwrap();
        assert_eq!(f.evaluate(Point3::new(0.6, 0.0, 0.8)), 0.25);
        assert_eq!(f.evaluate(Point3::new(0.6, 0.0, -0.8)), 0.75);
        assert_eq!(f.sup(), 0.75);
        assert_eq!(f.rescaled(0.75).unwrap().sup(), 1.0);
    }
}
