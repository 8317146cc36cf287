//! Hulls with respect to function families, extreme points, support
//! functions and the Minkowski gauge.

mod shape;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use shape::{Polytope, RoundedSquare, Shape};

use crate::convexity::{geometric_convexity_oracle, interior_points, OracleVerdict};
use crate::domain::{DomainSpec, Region};
use crate::error::{Error, Result};
use crate::field::{fd_jet, Jet, Kernel, ScalarField};
use crate::seq::unit_directions;

#[derive(Clone, Debug)]
pub enum FunctionFamily {
    /// a.x + c over `directions` quasi-uniform unit vectors a (at least 256).
    RealLinear { directions: usize },
    /// x -> 1/(1 + |x - s|) over the candidate points s.
    Continuous,
    Custom(Vec<ScalarField>),
}

impl FunctionFamily {
    pub fn real_linear() -> Self {
        FunctionFamily::RealLinear { directions: 256 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompactSet {
    pub points: Vec<Vec<f64>>,
    pub label: String,
}

impl CompactSet {
    pub fn new(points: Vec<Vec<f64>>, label: &str) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("compact set is empty".into()));
        }
        Ok(CompactSet { points, label: label.to_string() })
    }
}

/// Centers of a grid^N lattice of cells over the box, in lexicographic order.
pub fn grid_points(lo: &[f64], hi: &[f64], grid: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    let total = grid.pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|i| {
                    let j = k % grid;
                    k /= grid;
                    lo[i] + (hi[i] - lo[i]) * (j as f64 + 0.5) / grid as f64
                })
                .collect()
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Grid points of the region (plus K itself) where every f in F stays at or
/// below its maximum over K. Linear functionals get a slack of half a cell
/// diagonal, so that hulls of degenerate sets (a segment) still pick up the
/// grid cells they pass through.
pub fn f_hull<R: Region + ?Sized>(
    region: &R,
    k: &CompactSet,
    family: &FunctionFamily,
    grid: usize,
) -> Result<CompactSet> {
    let n = region.dim();
    for t in &k.points {
        if t.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.len() });
        }
        if !region.contains(t) {
            return Err(Error::OutsideDomain(t.clone()));
        }
    }
    let (lo, hi) = region.bounds();
    let inside: Vec<Vec<f64>> = grid_points(&lo, &hi, grid)
        .into_par_iter()
        .filter(|x| region.contains(x))
        .collect();
    if inside.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut candidates = k.points.clone();
    candidates.extend(inside.iter().cloned());
    let keep: Vec<bool> = match family {
        FunctionFamily::RealLinear { directions } => {
            let dirs = unit_directions(n, (*directions).max(256), 0);
            let cell = lo.iter().zip(&hi).map(|(a, b)| (b - a) / grid as f64).fold(0.0, f64::max);
            let slack = 0.5 * cell * (n as f64).sqrt();
            let maxima: Vec<f64> = dirs
                .iter()
                .map(|a| k.points.iter().map(|t| dot(a, t)).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            candidates
                .par_iter()
                .map(|x| dirs.iter().zip(&maxima).all(|(a, m)| dot(a, x) <= m + slack))
                .collect()
        }
        FunctionFamily::Continuous => {
            let f = |s: &[f64], x: &[f64]| 1.0 / (1.0 + dist(x, s));
            let sup = |s: &[f64]| k.points.iter().map(|t| f(s, t)).fold(f64::NEG_INFINITY, f64::max);
            candidates
                .par_iter()
                .map(|x| {
                    // s = x is the decisive member; test it first.
                    std::iter::once(x)
                        .chain(candidates.iter())
                        .all(|s| f(s, x) <= sup(s))
                })
                .collect()
        }
        FunctionFamily::Custom(fs) => {
            let maxima: Vec<f64> = fs
                .iter()
                .map(|f| k.points.iter().map(|t| f.value(t)).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            candidates
                .par_iter()
                .map(|x| fs.iter().zip(&maxima).all(|(f, m)| f.value(x) <= m + 1e-12))
                .collect()
        }
    };
    let mut points = Vec::new();
    for (x, kp) in candidates.into_iter().zip(keep) {
        if kp && !points.iter().any(|q: &Vec<f64>| dist(q, &x) == 0.0) {
            points.push(x);
        }
    }
    CompactSet::new(points, "hull")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentReport {
    pub endpoint_distances: Vec<f64>,
    pub segment_distances: Vec<f64>,
    /// Smallest endpoint distance.
    pub endpoint_bound: f64,
    pub min_segment_distance: f64,
    /// Segment distances fall below endpoint_bound / 10.
    pub escapes: bool,
}

/// dist(endpoints, boundary) against dist(segment, boundary), 256 samples per segment.
pub fn segment_compactness_check(d: &DomainSpec, segments: &[(Vec<f64>, Vec<f64>)]) -> Result<SegmentReport> {
    for (a, b) in segments {
        for x in [a, b] {
            if !d.contains(x) {
                return Err(Error::OutsideDomain(x.clone()));
            }
        }
    }
    let dist = crate::exhaust::BoundaryDistance::new(d);
    let delta = |x: &[f64]| dist.distance(x).ok_or_else(|| Error::OutsideDomain(x.to_vec()));
    let rows: Vec<(f64, f64)> = segments
        .par_iter()
        .map(|(a, b)| {
            let ea = delta(a)?;
            let eb = delta(b)?;
            let mut m = ea.min(eb);
            for i in 0..256 {
                let t = i as f64 / 255.0;
                let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
                let dx = if d.contains(&x) { delta(&x)? } else { 0.0 };
                m = m.min(dx);
            }
            Ok((ea.min(eb), m))
        })
        .collect::<Result<_>>()?;
    let endpoint_distances: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let segment_distances: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let endpoint_bound = endpoint_distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_segment_distance = segment_distances.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SegmentReport {
        escapes: min_segment_distance < endpoint_bound / 10.0,
        endpoint_distances,
        segment_distances,
        endpoint_bound,
        min_segment_distance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtremeVerdict {
    Extreme,
    NotExtreme { a: Vec<f64>, b: Vec<f64> },
}

impl ExtremeVerdict {
    pub fn is_extreme(&self) -> bool {
        matches!(self, ExtremeVerdict::Extreme)
    }
}

/// Searches chords P ± r·u of the closed shape over `probe` directions.
///
/// Chords shorter than 1% of the box diagonal are ignored: below that the
/// defining function of a high-order flat point rounds to zero. Witnesses use
/// half the maximal chord, capped at a quarter of the diagonal.
pub fn is_extreme(shape: &Shape, p: &[f64], probe: usize) -> Result<ExtremeVerdict> {
    if p.len() != shape.dim() {
        return Err(Error::DimensionMismatch { expected: shape.dim(), got: p.len() });
    }
    let res = shape.boundary_residual(p);
    if res > 1e-8 {
        return Err(Error::NotOnBoundary { point: p.to_vec(), residual: res });
    }
    let diam = shape.diameter();
    let r_max = 0.25 * diam;
    let r_min = 0.01 * diam;
    let dirs = unit_directions(shape.dim(), probe.max(1), 0);
    let found = dirs.par_iter().find_map_first(|u| {
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let step = |s: f64| -> Vec<f64> { p.iter().zip(u).map(|(a, b)| a + s * b).collect() };
        if !shape.contains_closed(&step(r_min)) || !shape.contains_closed(&step(-r_min)) {
            return None;
        }
        let r_star = shape.reach(p, u, 2.0 * r_max).min(shape.reach(p, &neg, 2.0 * r_max));
        if r_star < r_min {
            return None;
        }
        let r = (0.5 * r_star).min(r_max);
        Some((step(-r), step(r)))
    });
    Ok(match found {
        Some((a, b)) => ExtremeVerdict::NotExtreme { a, b },
        None => ExtremeVerdict::Extreme,
    })
}

#[derive(Clone, Debug)]
pub struct SupportFunction {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Largest L over the interior samples (negative when supporting).
    pub interior_max: f64,
    /// Boundary samples with |L| <= 1e-8.
    pub zero_set: Vec<Vec<f64>>,
    pub boundary_samples: usize,
}

impl SupportFunction {
    /// L(x) = nu.(x - P)
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x.iter().zip(&self.point)).map(|(n, (a, b))| n * (a - b)).sum()
    }
}

pub fn support_function(shape: &Shape, p: &[f64]) -> Result<SupportFunction> {
    let res = shape.boundary_residual(p);
    if res > 1e-8 {
        return Err(Error::NotOnBoundary { point: p.to_vec(), residual: res });
    }
    let nu = shape.normal_at(p)?;
    let mut sf = SupportFunction {
        point: p.to_vec(),
        normal: nu.as_slice().to_vec(),
        interior_max: f64::NEG_INFINITY,
        zero_set: vec![],
        boundary_samples: 256,
    };
    let interior = interior_points(shape, 10_000, 0);
    let vals: Vec<f64> = interior.par_iter().map(|x| sf.eval(x)).collect();
    for (x, v) in interior.iter().zip(&vals) {
        if *v >= 0.0 {
            return Err(Error::NoSupportingHyperplane { point: p.to_vec(), violator: x.clone(), value: *v });
        }
        sf.interior_max = sf.interior_max.max(*v);
    }
    sf.zero_set = shape
        .boundary_samples(sf.boundary_samples, 0)?
        .into_iter()
        .filter(|x| sf.eval(x).abs() <= 1e-8)
        .collect();
    Ok(sf)
}

/// p(x) = inf { r > 0 : x in rK }, as a field p - 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinkowskiGauge {
    pub shape: Box<Shape>,
}

impl MinkowskiGauge {
    /// Checks that the origin is interior and the shape passes the oracle.
    pub fn new(shape: Shape) -> Result<Self> {
        let n = shape.dim();
        if !shape.contains(&vec![0.0; n]) {
            return Err(Error::OriginNotInterior);
        }
        if let OracleVerdict::NotConvex { a, b, exit } = geometric_convexity_oracle(&shape, 1000, 0)? {
            return Err(Error::NotConvex { a, b, exit });
        }
        Ok(MinkowskiGauge { shape: Box::new(shape) })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if x.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        let inside = |r: f64| {
            let y: Vec<f64> = x.iter().map(|v| v / r).collect();
            self.shape.contains_closed(&y)
        };
        let mut hi = 1.0;
        while !inside(hi) {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.5 * hi;
        while inside(lo) && lo > 1e-300 {
            hi = lo;
            lo *= 0.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn into_field(self) -> ScalarField {
        crate::field::Composite::MinkowskiGaugeMinusOne(self).into()
    }
}

impl Kernel for MinkowskiGauge {
    fn kernel_dim(&self) -> usize {
        self.shape.dim()
    }
    fn kernel_class(&self) -> u32 {
        match self.shape.as_ref() {
            Shape::Domain(d) => d.smoothness(),
            Shape::Polytope(_) => 0,
            Shape::RoundedSquare(_) => 1,
        }
    }
    fn kernel_jet(&self, x: &[f64], order: u8) -> Jet {
        fd_jet(|y| self.value(y) - 1.0, x, order)
    }
}

pub fn minkowski_gauge(shape: &Shape, x: &[f64]) -> Result<f64> {
    if x.len() != shape.dim() {
        return Err(Error::DimensionMismatch { expected: shape.dim(), got: x.len() });
    }
    Ok(MinkowskiGauge::new(shape.clone())?.value(x))
}

/// Monotone-chain convex hull of 2D points, counter-clockwise.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance by which x lies outside a counter-clockwise convex polygon (0 if inside).
pub fn polygon_excess(poly: &[[f64; 2]], x: [f64; 2]) -> f64 {
    let n = poly.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let l = (dx * dx + dy * dy).sqrt();
        let s = ((x[0] - a[0]) * dy - (x[1] - a[1]) * dx) / l;
        worst = worst.max(s);
    }
    worst
}

/// Boundary samples paired with their extreme-point verdicts.
pub fn extreme_samples(shape: &Shape, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, ExtremeVerdict)>> {
    shape
        .boundary_samples(count, seed)?
        .into_iter()
        .map(|x| {
            let v = is_extreme(shape, &x, 512)?;
            Ok((x, v))
        })
        .collect()
}
