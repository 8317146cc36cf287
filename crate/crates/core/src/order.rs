//! Order of contact of the tangent plane at convex boundary points.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{classify_point, restricted_hessian, ConvexityClass};
use crate::domain::{BoundaryPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::field::{Point, Vector};
use crate::seq::{unit_directions, Halton};

pub const DEFAULT_CUTOFF: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactOrder {
    Finite(u32),
    Infinite(u32),
}

impl ContactOrder {
    pub fn finite(self) -> Option<u32> {
        match self {
            ContactOrder::Finite(k) => Some(k),
            ContactOrder::Infinite(_) => None,
        }
    }

    fn rank(self) -> u64 {
        match self {
            ContactOrder::Finite(k) => k as u64,
            ContactOrder::Infinite(_) => u64::MAX,
        }
    }
}

impl std::fmt::Display for ContactOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContactOrder::Finite(k) => write!(f, "{k}"),
            ContactOrder::Infinite(c) => write!(f, "infinite(>{c})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirectionProbe {
    pub direction: Vector,
    /// (s, |rho(P + s t) - rho(P)|) for s = 2^-4 .. 2^-20.
    pub table: Vec<(f64, f64)>,
    /// Least-squares slope over the usable tail of the table.
    pub slope: f64,
    /// Slope over every usable probe.
    pub full_slope: f64,
    pub order: ContactOrder,
}

#[derive(Clone, Debug)]
pub struct OrderVerdict {
    pub order: ContactOrder,
    pub direction_orders: Vec<DirectionProbe>,
}

fn lsq_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn probe_direction(d: &DomainSpec, p: &BoundaryPoint, t: &Vector, cutoff: u32) -> Result<DirectionProbe> {
    let x = p.location.as_slice();
    let r0 = d.value(x);
    let mut table = Vec::with_capacity(17);
    let mut usable = Vec::new();
    let mut all_tiny = true;
    for i in 4..=20 {
        let s = 2f64.powi(-i);
        let y = &p.location + t * s;
        let v = (d.value(y.as_slice()) - r0).abs();
        table.push((s, v));
        if v >= 1e-14 {
            all_tiny = false;
        }
        if v > 1e-13 * d.rho().roundoff_scale(y.as_slice()) {
            usable.push((s.ln(), v.ln()));
        }
    }
    let infinite = |slope: f64, full: f64| DirectionProbe {
        direction: t.clone(),
        table: table.clone(),
        slope,
        full_slope: full,
        order: ContactOrder::Infinite(cutoff),
    };
    if all_tiny || usable.len() < 2 {
        return Ok(infinite(f64::INFINITY, f64::INFINITY));
    }
    let full_slope = lsq_slope(&usable);
    let tail = &usable[usable.len().saturating_sub(8)..];
    let slope = lsq_slope(tail);
    let k = slope.round();
    if (slope - k).abs() > 0.2 {
        return Err(Error::IndeterminateOrder { slope, probes: table });
    }
    if k > cutoff as f64 {
        return Ok(infinite(slope, full_slope));
    }
    Ok(DirectionProbe {
        direction: t.clone(),
        table,
        slope,
        full_slope,
        order: ContactOrder::Finite(k.max(0.0) as u32),
    })
}

/// Tangent probe directions: basis, 16 quasi-random combinations and the
/// eigenvectors of the restricted Hessian, with +-duplicates removed.
pub fn probe_directions(d: &DomainSpec, p: &BoundaryPoint) -> Result<Vec<Vector>> {
    let m = p.tangent_basis.len();
    let mut dirs: Vec<Vector> = p.tangent_basis.clone();
    for c in unit_directions(m, 16, 1) {
        let v = p.tangent_basis.iter().zip(&c).fold(Vector::zeros(d.dim()), |acc, (b, w)| acc + b * *w);
        dirs.push(v.normalize());
    }
    let (_, r) = restricted_hessian(d, p)?;
    let eig = SymmetricEigen::new(r);
    for c in eig.eigenvectors.column_iter() {
        let v = p.tangent_basis.iter().zip(c.iter()).fold(Vector::zeros(d.dim()), |acc, (b, w)| acc + b * *w);
        dirs.push(v.normalize());
    }
    let mut out: Vec<Vector> = Vec::new();
    for v in dirs {
        if !out.iter().any(|u| u.dot(&v).abs() > 1.0 - 1e-12) {
            out.push(v);
        }
    }
    Ok(out)
}

pub fn contact_order(d: &DomainSpec, p: &BoundaryPoint, cutoff: u32) -> Result<OrderVerdict> {
    if cutoff % 2 != 0 || cutoff < 2 {
        return Err(Error::InvalidInput("cutoff must be even and >= 2".into()));
    }
    if (cutoff as u64) > 2 * d.smoothness() as u64 {
        return Err(Error::InvalidInput("cutoff exceeds twice the smoothness".into()));
    }
    let v = classify_point(d, p)?;
    if v.class == ConvexityClass::NotConvex {
        return Err(Error::NotConvexPoint { point: p.location.as_slice().to_vec() });
    }
    let dirs = probe_directions(d, p)?;
    let probes: Vec<DirectionProbe> = dirs
        .par_iter()
        .map(|t| probe_direction(d, p, t, cutoff))
        .collect::<Result<_>>()?;
    let order = probes.iter().map(|q| q.order).max_by_key(|o| o.rank()).expect("at least one direction");
    Ok(OrderVerdict { order, direction_orders: probes })
}

/// True iff the order is finite and even.
pub fn evenness_check(v: &OrderVerdict) -> bool {
    matches!(v.order, ContactOrder::Finite(k) if k % 2 == 0)
}

#[derive(Clone, Debug)]
pub struct StabilityScan {
    pub center_order: ContactOrder,
    pub neighbours: Vec<(Point, ContactOrder)>,
    pub max_order: ContactOrder,
}

/// Orders at boundary points within `radius` of P; errors if any exceeds P's order.
pub fn order_stability_scan(
    d: &DomainSpec,
    p: &BoundaryPoint,
    radius: f64,
    count: usize,
) -> Result<StabilityScan> {
    let center = contact_order(d, p, DEFAULT_CUTOFF)?.order;
    let m = match center {
        ContactOrder::Finite(m) => m,
        ContactOrder::Infinite(_) => {
            return Err(Error::InvalidInput("center order is not finite".into()));
        }
    };
    let anchor = Vector::from_vec(d.interior_anchor()?);
    let k = p.tangent_basis.len();
    let mut h = Halton::new(k + 1, 5);
    let targets: Vec<Vector> = (0..count)
        .map(|_| {
            let u = h.next_point();
            let r = radius * (0.05 + 0.9 * u[0]);
            let mut off = Vector::zeros(d.dim());
            for (j, b) in p.tangent_basis.iter().enumerate() {
                off += b * (2.0 * u[j + 1] - 1.0);
            }
            let off = if off.norm() > 1e-12 { off.normalize() } else { p.tangent_basis[0].clone() };
            &p.location + off * r
        })
        .collect();
    let found: Vec<Option<(Point, ContactOrder)>> = targets
        .par_iter()
        .map(|q| {
            let dir = q - &anchor;
            let bp = d.project_with_steps(anchor.as_slice(), dir.as_slice(), 256).ok()?;
            if (&bp.location - &p.location).norm() > radius {
                return None;
            }
            let o = contact_order(d, &bp, DEFAULT_CUTOFF).ok()?.order;
            Some((bp.location, o))
        })
        .collect();
    let neighbours: Vec<(Point, ContactOrder)> = found.into_iter().flatten().collect();
    let mut max_order = ContactOrder::Finite(0);
    for (x, o) in &neighbours {
        if o.rank() > max_order.rank() {
            max_order = *o;
        }
        if o.rank() > m as u64 {
            return Err(Error::OrderIncreased {
                point: x.as_slice().to_vec(),
                order: o.finite().unwrap_or(u32::MAX),
                bound: m,
            });
        }
    }
    Ok(StabilityScan { center_order: center, neighbours, max_order })
}

#[derive(Clone, Debug)]
pub struct FarthestPatch {
    pub point: BoundaryPoint,
    pub origin: Point,
    pub neighbours: Vec<BoundaryPoint>,
}

/// Boundary sample farthest from a far-away origin, with a strongly convex
/// neighbourhood.
pub fn farthest_point_patch(d: &DomainSpec) -> Result<FarthestPatch> {
    let n = d.dim();
    let diam = d.diameter();
    let c = Vector::from_vec(d.center());
    let origin = &c - Vector::from_element(n, 1.0 / (n as f64).sqrt()) * (10.0 * diam + 10.0);
    let samples = d.sample_boundary(256 * (n - 1).max(1), 0)?;
    let dist = |b: &BoundaryPoint| (&b.location - &origin).norm();
    let best = samples
        .iter()
        .max_by(|a, b| dist(a).total_cmp(&dist(b)))
        .expect("non-empty sample")
        .clone();
    let mut ranked: Vec<&BoundaryPoint> = samples.iter().filter(|b| b.location != best.location).collect();
    ranked.sort_by(|a, b| {
        (&a.location - &best.location).norm().total_cmp(&(&b.location - &best.location).norm())
    });
    let neighbours: Vec<BoundaryPoint> = ranked.into_iter().take(20).cloned().collect();
    for q in std::iter::once(&best).chain(&neighbours) {
        if classify_point(d, q)?.class != ConvexityClass::StronglyConvex {
            return Err(Error::PatchNotStronglyConvex(q.location.as_slice().to_vec()));
        }
    }
    Ok(FarthestPatch { point: best, origin, neighbours })
}
