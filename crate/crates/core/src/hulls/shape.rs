//! Shapes with exact membership: polygons, the rounded square, and domains.

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, Region};
use crate::error::{Error, Result};
use crate::field::Vector;

/// Convex polygon, vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polytope {
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("polygon needs 3 vertices".into()));
        }
        let area: f64 = (0..vertices.len())
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0.0 {
                return Err(Error::InvalidInput("polygon is not strictly convex".into()));
            }
        }
        Ok(Polytope { vertices })
    }

    /// [-h, h]^2
    pub fn square(h: f64) -> Self {
        Polytope::new(vec![[-h, -h], [h, -h], [h, h], [-h, h]]).expect("square is convex")
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> Vec<([f64; 2], [f64; 2])> {
        let n = self.vertices.len();
        (0..n).map(|i| (self.vertices[i], self.vertices[(i + 1) % n])).collect()
    }

    /// Outward unit normals and offsets: n.x <= c on the polygon.
    pub fn half_planes(&self) -> Vec<([f64; 2], f64)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let l = (dx * dx + dy * dy).sqrt();
                let n = [dy / l, -dx / l];
                (n, n[0] * a[0] + n[1] * a[1])
            })
            .collect()
    }

    /// max_i (n_i.x - c_i): negative inside, zero on the boundary.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.half_planes()
            .iter()
            .map(|(n, c)| n[0] * x[0] + n[1] * x[1] - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact reach from x along u inside the closed polygon.
    pub fn reach(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut r = f64::INFINITY;
        for (n, c) in self.half_planes() {
            let nu = n[0] * u[0] + n[1] * u[1];
            if nu > 0.0 {
                r = r.min(((c - n[0] * x[0] - n[1] * x[1]) / nu).max(0.0));
            }
        }
        r
    }

    pub fn perimeter(&self) -> f64 {
        self.edges()
            .iter()
            .map(|(a, b)| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt())
            .sum()
    }

    fn at_arclength(&self, mut s: f64) -> [f64; 2] {
        for (a, b) in self.edges() {
            let l = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if s <= l {
                let t = s / l;
                return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            }
            s -= l;
        }
        self.vertices[0]
    }
}

/// [-half, half]^2 with corners replaced by quarter circles of `radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundedSquare {
    pub half: f64,
    pub radius: f64,
}

impl RoundedSquare {
    pub fn new(half: f64, radius: f64) -> Result<Self> {
        if !(half > 0.0 && radius > 0.0 && radius <= half) {
            return Err(Error::InvalidInput("need 0 < radius <= half".into()));
        }
        Ok(RoundedSquare { half, radius })
    }

    /// Exact signed distance: negative inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let c = self.half - self.radius;
        let qx = x[0].abs() - c;
        let qy = x[1].abs() - c;
        let ox = qx.max(0.0);
        let oy = qy.max(0.0);
        (ox * ox + oy * oy).sqrt() + qx.max(qy).min(0.0) - self.radius
    }

    pub fn normal(&self, x: &[f64]) -> [f64; 2] {
        let c = self.half - self.radius;
        let (ax, ay) = (x[0].abs(), x[1].abs());
        let (nx, ny) = if ax > c && ay > c {
            let (dx, dy) = (ax - c, ay - c);
            let l = (dx * dx + dy * dy).sqrt();
            (dx / l, dy / l)
        } else if ax - c >= ay - c {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        [nx * sign(x[0]), ny * sign(x[1])]
    }

    pub fn perimeter(&self) -> f64 {
        8.0 * (self.half - self.radius) + 2.0 * std::f64::consts::PI * self.radius
    }

    fn at_arclength(&self, s: f64) -> [f64; 2] {
        let c = self.half - self.radius;
        let side = 2.0 * c;
        let arc = 0.5 * std::f64::consts::PI * self.radius;
        let piece = side + arc;
        let k = ((s / piece).floor() as usize).min(3);
        let mut t = s - k as f64 * piece;
        // piece k: a straight side then the arc that follows it, counter-clockwise
        // starting from the bottom of the right side.
        let (p, rot) = if t <= side {
            ([self.half, -c + t], k)
        } else {
            t -= side;
            let a = t / self.radius;
            ([c + self.radius * a.cos(), c + self.radius * a.sin()], k)
        };
        let mut q = p;
        for _ in 0..rot {
            q = [-q[1], q[0]];
        }
        q
    }
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// A closed bounded shape used by the extreme-point and support routines.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Domain(DomainSpec),
    Polytope(Polytope),
    RoundedSquare(RoundedSquare),
}

impl Shape {
    pub fn name(&self) -> String {
        match self {
            Shape::Domain(d) => d.name().to_string(),
            Shape::Polytope(_) => "polytope".into(),
            Shape::RoundedSquare(_) => "rounded-square".into(),
        }
    }

    pub fn as_domain(&self) -> Option<&DomainSpec> {
        match self {
            Shape::Domain(d) => Some(d),
            _ => None,
        }
    }

    /// Box diagonal.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    /// Distance-like residual that vanishes on the boundary.
    pub fn boundary_residual(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Domain(d) => d.value(x).abs() / d.scale(),
            Shape::Polytope(p) => p.margin(x).abs(),
            Shape::RoundedSquare(r) => r.signed_distance(x).abs(),
        }
    }

    /// Unit outward normal at a boundary point (averaged at polygon vertices).
    pub fn normal_at(&self, x: &[f64]) -> Result<Vector> {
        match self {
            Shape::Domain(d) => {
                let g = d.rho().grad(x);
                let n = g.norm();
                if !(n >= 1e-8) {
                    return Err(Error::DegenerateGradient(x.to_vec()));
                }
                Ok(g / n)
            }
            Shape::Polytope(p) => {
                let mut v = Vector::zeros(2);
                for (n, c) in p.half_planes() {
                    if (n[0] * x[0] + n[1] * x[1] - c).abs() <= 1e-9 {
                        v += Vector::from_vec(n.to_vec());
                    }
                }
                if v.norm() == 0.0 {
                    return Err(Error::NotOnBoundary { point: x.to_vec(), residual: p.margin(x).abs() });
                }
                Ok(v.normalize())
            }
            Shape::RoundedSquare(r) => Ok(Vector::from_vec(r.normal(x).to_vec())),
        }
    }

    /// Deterministic boundary samples.
    pub fn boundary_samples(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let phase = crate::seq::seed_phase(seed);
        match self {
            Shape::Domain(d) => Ok(d
                .sample_boundary(count, seed)?
                .into_iter()
                .map(|b| b.location.as_slice().to_vec())
                .collect()),
            Shape::Polytope(p) => {
                let l = p.perimeter();
                Ok((0..count).map(|i| p.at_arclength(l * (i as f64 + phase) / count as f64).to_vec()).collect())
            }
            Shape::RoundedSquare(r) => {
                let l = r.perimeter();
                Ok((0..count).map(|i| r.at_arclength(l * (i as f64 + phase) / count as f64).to_vec()).collect())
            }
        }
    }

    /// sup { r : x + s u in the closed shape for s in [0, r] }, capped at r_max.
    pub fn reach(&self, x: &[f64], u: &[f64], r_max: f64) -> f64 {
        if let Shape::Polytope(p) = self {
            return p.reach(x, u).min(r_max);
        }
        let at = |r: f64| -> Vec<f64> { x.iter().zip(u).map(|(a, b)| a + r * b).collect() };
        if self.contains_closed(&at(r_max)) {
            return r_max;
        }
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.contains_closed(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Distance from an interior point to the boundary (exact for polygons and
    /// the rounded square).
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        match self {
            Shape::Domain(d) => crate::exhaust::distance_to_boundary(d, x),
            Shape::Polytope(p) => Ok(-p.margin(x)),
            Shape::RoundedSquare(r) => Ok(-r.signed_distance(x)),
        }
    }
}

impl Region for Shape {
    fn dim(&self) -> usize {
        match self {
            Shape::Domain(d) => d.dim(),
            _ => 2,
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Domain(d) => d.bounds(),
            Shape::Polytope(p) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in p.vertices() {
                    for i in 0..2 {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
            Shape::RoundedSquare(r) => (vec![-r.half; 2], vec![r.half; 2]),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Domain(d) => d.contains(x),
            Shape::Polytope(p) => p.margin(x) < 0.0,
            Shape::RoundedSquare(r) => r.signed_distance(x) < 0.0,
        }
    }

    fn contains_closed(&self, x: &[f64]) -> bool {
        match self {
            Shape::Domain(d) => d.value(x) <= 1e-12 * d.scale(),
            Shape::Polytope(p) => p.margin(x) <= 1e-12,
            Shape::RoundedSquare(r) => r.signed_distance(x) <= 1e-12,
        }
    }
}
