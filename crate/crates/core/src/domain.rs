//! Domains {rho < 0} with boundary location, frames and sampling.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Point, Polynomial, ScalarField, Vector};
use crate::seq::unit_directions;

/// Anything with a membership test and a bounding box.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
    /// Open-set membership.
    fn contains(&self, x: &[f64]) -> bool;
    /// Closure membership up to a tiny tolerance.
    fn contains_closed(&self, x: &[f64]) -> bool;
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    name: String,
    dim: usize,
    smoothness: u32,
    bbox: [Vec<f64>; 2],
    rho: ScalarField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<Vec<f64>>,
}

/// Bounded domain {rho < 0} inside an axis-aligned box.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct DomainSpec {
    name: String,
    dim: usize,
    smoothness: u32,
    bbox: [Vec<f64>; 2],
    rho: ScalarField,
    anchor: Option<Vec<f64>>,
    scale: OnceLock<f64>,
    found_anchor: OnceLock<Option<Vec<f64>>>,
}

impl TryFrom<DomainRepr> for DomainSpec {
    type Error = String;
    fn try_from(r: DomainRepr) -> std::result::Result<Self, String> {
        let [lo, hi] = r.bbox;
        let d = DomainSpec::new(&r.name, r.rho, lo, hi, r.smoothness).map_err(|e| e.to_string())?;
        if d.dim != r.dim {
            return Err(format!("dim {} does not match rho dimension {}", r.dim, d.dim));
        }
        Ok(match r.anchor {
            Some(a) => d.with_anchor(a),
            None => d,
        })
    }
}

impl From<DomainSpec> for DomainRepr {
    fn from(d: DomainSpec) -> Self {
        DomainRepr {
            name: d.name,
            dim: d.dim,
            smoothness: d.smoothness,
            bbox: d.bbox,
            rho: d.rho,
            anchor: d.anchor,
        }
    }
}

/// A point of the boundary with its unit outward normal and tangent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub location: Point,
    pub normal: Vector,
    pub tangent_basis: Vec<Vector>,
    pub gradient: Vector,
}

impl DomainSpec {
    pub fn new(
        name: &str,
        rho: ScalarField,
        lo: Vec<f64>,
        hi: Vec<f64>,
        smoothness: u32,
    ) -> Result<Self> {
        let dim = rho.dim();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: lo.len().min(hi.len()) });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("empty bounding box".into()));
        }
        if smoothness < 1 {
            return Err(Error::InvalidInput("smoothness must be >= 1".into()));
        }
        Ok(DomainSpec {
            name: name.to_string(),
            dim,
            smoothness,
            bbox: [lo, hi],
            rho,
            anchor: None,
            scale: OnceLock::new(),
            found_anchor: OnceLock::new(),
        })
    }

    /// Supplies a known interior point, skipping the grid scan.
    pub fn with_anchor(mut self, anchor: Vec<f64>) -> Self {
        self.anchor = Some(anchor);
        self.found_anchor = OnceLock::new();
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }
    pub fn rho(&self) -> &ScalarField {
        &self.rho
    }
    pub fn lo(&self) -> &[f64] {
        &self.bbox[0]
    }
    pub fn hi(&self) -> &[f64] {
        &self.bbox[1]
    }
    pub fn anchor_hint(&self) -> Option<&[f64]> {
        self.anchor.as_deref()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.rho.value(x)
    }

    /// Length of the bounding box diagonal.
    pub fn diameter(&self) -> f64 {
        self.lo().iter().zip(self.hi()).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo().iter().zip(self.hi()).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// max |rho| over the finite values at bbox corners (1 if none).
    pub fn scale(&self) -> f64 {
        *self.scale.get_or_init(|| {
            let n = self.dim;
            let mut best: f64 = 0.0;
            for mask in 0..(1usize << n) {
                let c: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.bbox[1][i] } else { self.bbox[0][i] })
                    .collect();
                let v = self.rho.value(&c).abs();
                if v.is_finite() {
                    best = best.max(v);
                }
            }
            if best > 0.0 {
                best
            } else {
                1.0
            }
        })
    }

    pub fn boundary_tol(&self) -> f64 {
        1e-10 * self.scale()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Interior point used as the ray origin for sampling.
    ///
    /// Scans a grid of 33 points per axis (fewer above 4D); uses the centroid
    /// of the interior grid points when it is interior, else the deepest one.
    pub fn interior_anchor(&self) -> Result<Vec<f64>> {
        self.found_anchor
            .get_or_init(|| {
                if let Some(a) = &self.anchor {
                    if self.value(a) < 0.0 {
                        return Some(a.clone());
                    }
                }
                self.scan_anchor()
            })
            .clone()
            .ok_or(Error::NoInteriorPoint)
    }

    fn scan_anchor(&self) -> Option<Vec<f64>> {
        let n = self.dim;
        let per = if n <= 4 { 33usize } else { (2e6f64.powf(1.0 / n as f64) as usize).max(3) };
        let total = per.pow(n as u32);
        let (lo, hi) = (self.lo(), self.hi());
        let point = |mut k: usize| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let j = k % per;
                    k /= per;
                    lo[i] + (hi[i] - lo[i]) * j as f64 / (per - 1) as f64
                })
                .collect()
        };
        let vals: Vec<f64> = (0..total).into_par_iter().map(|k| self.value(&point(k))).collect();
        let mut sum = vec![0.0; n];
        let mut count = 0usize;
        let mut deepest: Option<(f64, usize)> = None;
        for (k, &v) in vals.iter().enumerate() {
            if v < 0.0 {
                count += 1;
                for (s, c) in sum.iter_mut().zip(point(k)) {
                    *s += c;
                }
                if deepest.is_none_or(|(dv, _)| v < dv) {
                    deepest = Some((v, k));
                }
            }
        }
        let (_, kd) = deepest?;
        let centroid: Vec<f64> = sum
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let q = 1e-9 * (hi[i] - lo[i]);
                ((s / count as f64) / q).round() * q
            })
            .collect();
        if self.value(&centroid) < 0.0 {
            Some(centroid)
        } else {
            Some(point(kd))
        }
    }

    /// Parameter where the ray leaves the bounding box.
    fn ray_exit(&self, x0: &[f64], dir: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..self.dim {
            if dir[i] > 0.0 {
                t = t.min((self.bbox[1][i] - x0[i]) / dir[i]);
            } else if dir[i] < 0.0 {
                t = t.min((self.bbox[0][i] - x0[i]) / dir[i]);
            }
        }
        t
    }

    /// First boundary crossing along x0 + t·dir, as a raw location.
    pub fn first_crossing(&self, x0: &[f64], dir: &[f64], steps: usize) -> Result<Vec<f64>> {
        let miss = || Error::RayMissesBoundary { origin: x0.to_vec(), direction: dir.to_vec() };
        let at = |t: f64| -> Vec<f64> { x0.iter().zip(dir).map(|(a, d)| a + t * d).collect() };
        let f = |t: f64| {
            let v = self.value(&at(t));
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let t_exit = self.ray_exit(x0, dir);
        if !t_exit.is_finite() || t_exit <= 0.0 {
            return Err(miss());
        }
        let mut a = 0.0;
        let mut fa = f(0.0);
        if !(fa < 0.0) {
            return Err(Error::OutsideDomain(x0.to_vec()));
        }
        let mut bracket = None;
        for i in 1..=steps {
            let t = if i == steps { t_exit } else { t_exit * i as f64 / steps as f64 };
            let ft = f(t);
            if ft >= 0.0 {
                bracket = Some((t, ft));
                break;
            }
            a = t;
            fa = ft;
        }
        let (mut b, mut fb) = bracket.ok_or_else(miss)?;
        let tol = self.boundary_tol();
        let (mut ga, mut gb) = (fa, fb);
        let mut side = 0i8;
        for it in 0..300 {
            let mut t = if ga.is_finite() && gb.is_finite() && it % 4 != 3 {
                (a * gb - b * ga) / (gb - ga)
            } else {
                0.5 * (a + b)
            };
            if !(t > a && t < b) {
                t = 0.5 * (a + b);
            }
            let ft = f(t);
            if ft.abs() <= tol {
                return Ok(at(t));
            }
            if ft < 0.0 {
                a = t;
                fa = ft;
                ga = ft;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                b = t;
                fb = ft;
                gb = ft;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
            if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                break;
            }
        }
        Ok(if fa.abs() <= fb.abs() { at(a) } else { at(b) })
    }

    pub fn project_to_boundary(&self, x0: &Point, dir: &Vector) -> Result<BoundaryPoint> {
        self.project_with_steps(x0.as_slice(), dir.as_slice(), 128)
    }

    pub fn project_with_steps(&self, x0: &[f64], dir: &[f64], steps: usize) -> Result<BoundaryPoint> {
        self.check_point(x0)?;
        self.check_point(dir)?;
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidInput("zero direction".into()));
        }
        let u: Vec<f64> = dir.iter().map(|v| v / n).collect();
        let p = self.first_crossing(x0, &u, steps)?;
        self.tangent_basis(&Point::from_vec(p))
    }

    /// Normal and orthonormal tangent frame at a boundary point.
    pub fn tangent_basis(&self, p: &Point) -> Result<BoundaryPoint> {
        self.check_point(p.as_slice())?;
        let r = self.value(p.as_slice());
        if !(r.abs() <= 1e-8 * self.scale()) {
            return Err(Error::NotOnBoundary { point: p.as_slice().to_vec(), residual: r.abs() });
        }
        let g = self.rho.grad(p.as_slice());
        let gn = g.norm();
        if !(gn >= 1e-8) {
            return Err(Error::DegenerateGradient(p.as_slice().to_vec()));
        }
        let normal = &g / gn;
        Ok(BoundaryPoint {
            location: p.clone(),
            tangent_basis: complete_frame(&normal),
            normal,
            gradient: g,
        })
    }

    /// `count` boundary points along quasi-uniform rays from the anchor.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Result<Vec<BoundaryPoint>> {
        self.sample_boundary_with_steps(count, seed, 128)
    }

    pub fn sample_boundary_with_steps(
        &self,
        count: usize,
        seed: u64,
        steps: usize,
    ) -> Result<Vec<BoundaryPoint>> {
        if count == 0 {
            return Err(Error::InvalidInput("count must be >= 1".into()));
        }
        let anchor = self.interior_anchor()?;
        let dirs = unit_directions(self.dim, count, seed);
        let found: Vec<Option<BoundaryPoint>> = dirs
            .par_iter()
            .map(|d| self.project_with_steps(&anchor, d, steps).ok())
            .collect();
        let mut out: Vec<BoundaryPoint> = Vec::with_capacity(count);
        for bp in found.into_iter().flatten() {
            if !out.iter().any(|q| (&q.location - &bp.location).norm() <= 1e-8) {
                out.push(bp);
            }
        }
        if out.is_empty() {
            return Err(Error::RayMissesBoundary { origin: anchor, direction: vec![] });
        }
        Ok(out)
    }

    /// The same zero set with defining function h·rho.
    pub fn multiply_by_h(&self, h: &ScalarField) -> Result<DomainSpec> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: h.dim() });
        }
        for bp in self.sample_boundary(64, 0)? {
            let v = h.value(bp.location.as_slice());
            if !(v > 1e-6) {
                return Err(Error::NonPositiveMultiplier {
                    point: bp.location.as_slice().to_vec(),
                    value: v,
                });
            }
        }
        let rho = match (h.as_polynomial(), self.rho.as_polynomial()) {
            (Some(a), Some(b)) => a.mul(b).into(),
            _ => ScalarField::product(vec![h.clone(), self.rho.clone()])?,
        };
        let mut d = DomainSpec::new(
            &format!("{}*h", self.name),
            rho,
            self.lo().to_vec(),
            self.hi().to_vec(),
            self.smoothness,
        )?;
        if let Ok(a) = self.interior_anchor() {
            d = d.with_anchor(a);
        }
        Ok(d)
    }

    /// Domain given by a polynomial: shorthand for the gallery.
    pub fn polynomial(name: &str, p: Polynomial, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        DomainSpec::new(name, p.into(), lo, hi, 32)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Gram-Schmidt completion of a unit normal; returns the N-1 tangent vectors.
///
/// Coordinate axes least aligned with the normal are used first.
pub fn complete_frame(normal: &Vector) -> Vec<Vector> {
    let n = normal.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()));
    let mut frame = vec![normal.clone()];
    for i in order {
        if frame.len() == n {
            break;
        }
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for f in &frame {
                let c = f.dot(&v);
                v -= f * c;
            }
        }
        let vn = v.norm();
        if vn > 1e-6 {
            frame.push(v / vn);
        }
    }
    frame.remove(0);
    frame
}

impl Region for DomainSpec {
    fn dim(&self) -> usize {
        self.dim
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.bbox[0].clone(), self.bbox[1].clone())
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.value(x) < 0.0
    }
    fn contains_closed(&self, x: &[f64]) -> bool {
        self.value(x) <= self.boundary_tol()
    }
}
