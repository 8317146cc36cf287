//! Pointwise convexity verdicts, the segment oracle and convexification.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPoint, DomainSpec, Region};
use crate::error::{Error, Result};
use crate::field::{Composite, Matrix, Point, Polynomial, ScalarField, Vector};
use crate::seq::{unit_directions, Halton};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexityClass {
    NotConvex,
    WeaklyConvex,
    StronglyConvex,
}

impl ConvexityClass {
    pub fn is_convex(self) -> bool {
        self != ConvexityClass::NotConvex
    }
}

#[derive(Clone, Debug)]
pub struct ConvexityVerdict {
    pub class: ConvexityClass,
    /// Smallest eigenvalue of B^T H B.
    pub min_tangential_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    /// Unit tangent direction with a negative form value (NotConvex only).
    pub witness: Option<Vector>,
    pub strict_tol: f64,
}

fn basis_matrix(p: &BoundaryPoint) -> Matrix {
    let n = p.location.len();
    Matrix::from_fn(n, p.tangent_basis.len(), |r, c| p.tangent_basis[c][r])
}

/// Hessian at P and its restriction to the tangent space.
pub fn restricted_hessian(d: &DomainSpec, p: &BoundaryPoint) -> Result<(Matrix, Matrix)> {
    if d.rho().class() < 2 {
        return Err(Error::NotDifferentiable { class: d.rho().class(), needed: 2 });
    }
    let h = d.rho().hess(p.location.as_slice());
    let b = basis_matrix(p);
    let r = b.transpose() * &h * &b;
    Ok((h, (&r + r.transpose()) * 0.5))
}

/// Hessian quadratic form of rho at P on a tangent vector w.
pub fn restricted_form(d: &DomainSpec, p: &BoundaryPoint, w: &Vector) -> Result<f64> {
    let g = &p.gradient;
    let dot = g.dot(w);
    if dot.abs() > 1e-6 * g.norm() * w.norm() {
        return Err(Error::NotTangent(dot.abs()));
    }
    if d.rho().class() < 2 {
        return Err(Error::NotDifferentiable { class: d.rho().class(), needed: 2 });
    }
    let h = d.rho().hess(p.location.as_slice());
    Ok(w.dot(&(h * w)))
}

pub fn classify_point(d: &DomainSpec, p: &BoundaryPoint) -> Result<ConvexityVerdict> {
    let (h, r) = restricted_hessian(d, p)?;
    let strict_tol = 1e-8 * h.norm();
    let n = r.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("tangent space is trivial in 1D".into()));
    }
    let eig = SymmetricEigen::new(r);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let min = eigenvalues[0];
    let class = if min > strict_tol {
        ConvexityClass::StronglyConvex
    } else if min < -strict_tol {
        ConvexityClass::NotConvex
    } else {
        ConvexityClass::WeaklyConvex
    };
    let witness = (class == ConvexityClass::NotConvex).then(|| {
        let v = eig.eigenvectors.column(idx[0]).into_owned();
        (basis_matrix(p) * v).normalize()
    });
    Ok(ConvexityVerdict { class, min_tangential_eigenvalue: min, eigenvalues, witness, strict_tol })
}

/// Classifies every point, in order.
pub fn classify_all(d: &DomainSpec, points: &[BoundaryPoint]) -> Result<Vec<ConvexityVerdict>> {
    points.par_iter().map(|p| classify_point(d, p)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleVerdict {
    Convex,
    NotConvex { a: Vec<f64>, b: Vec<f64>, exit: Vec<f64> },
}

impl OracleVerdict {
    pub fn is_convex(&self) -> bool {
        matches!(self, OracleVerdict::Convex)
    }
}

/// Quasi-random interior points of a region.
pub fn interior_points<R: Region + ?Sized>(region: &R, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let (lo, hi) = region.bounds();
    let mut h = Halton::new(region.dim(), seed);
    let mut out = Vec::with_capacity(count);
    let max_tries = 400 * count + 10_000;
    let mut tries = 0;
    while out.len() < count && tries < max_tries {
        tries += 1;
        let x = h.next_in_box(&lo, &hi);
        if region.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// First sample of the segment a-b (64 equispaced samples) that leaves the region.
pub fn segment_exit<R: Region + ?Sized>(region: &R, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    (0..64).find_map(|i| {
        let t = i as f64 / 63.0;
        let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
        (!region.contains(&x)).then_some(x)
    })
}

/// Distance along the unit direction u from x to the first exit, by bisection.
fn ray_reach<R: Region + ?Sized>(region: &R, x: &[f64], u: &[f64], limit: f64) -> f64 {
    let at = |t: f64| -> Vec<f64> { x.iter().zip(u).map(|(a, b)| a + t * b).collect() };
    let steps = 64;
    let mut lo = 0.0;
    let mut hi = limit;
    for k in 1..=steps {
        let t = limit * k as f64 / steps as f64;
        if !region.contains(&at(t)) {
            hi = t;
            break;
        }
        lo = t;
    }
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if region.contains(&at(m)) {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Two points just inside the boundary, seen from c along nearby directions.
fn rim_chord<R: Region + ?Sized>(region: &R, c: &[f64], seed: u64, i: usize) -> (Vec<f64>, Vec<f64>) {
    let n = c.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let g: Vector = Vector::from_fn(n, |_, _| gaussian(&mut rng)).normalize();
    let mut h: Vector = Vector::from_fn(n, |_, _| gaussian(&mut rng));
    h -= &g * g.dot(&h);
    let h = if h.norm() > 1e-9 { h.normalize() } else { complete_frame_any(&g) };
    let spread = [0.05, 0.1, 0.2, 0.4, 0.8][i % 5];
    let u1 = (&g + &h * spread).normalize();
    let u2 = (&g - &h * spread).normalize();
    let (lo, hi) = region.bounds();
    let diag = lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    let frac = 1.0 - 1e-3;
    let a: Vec<f64> = c.iter().zip(u1.iter()).map(|(x, u)| x + frac * ray_reach(region, c, u1.as_slice(), diag) * u).collect();
    let b: Vec<f64> = c.iter().zip(u2.iter()).map(|(x, u)| x + frac * ray_reach(region, c, u2.as_slice(), diag) * u).collect();
    (a, b)
}

fn complete_frame_any(g: &Vector) -> Vector {
    let n = g.len();
    let k = (0..n).min_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs())).unwrap_or(0);
    let mut e = Vector::zeros(n);
    e[k] = 1.0;
    (e - g * g[k]).normalize()
}

/// Checks `pairs` interior segments for containment: even-numbered pairs join
/// quasi-random interior points, odd-numbered pairs are short chords just
/// inside the boundary, which catch shallow dents.
pub fn geometric_convexity_oracle<R: Region + ?Sized>(
    region: &R,
    pairs: usize,
    seed: u64,
) -> Result<OracleVerdict> {
    if pairs == 0 {
        return Err(Error::InvalidInput("pairs must be >= 1".into()));
    }
    let pool = interior_points(region, 2 * pairs, seed);
    if pool.len() < 2 {
        return Err(Error::NoInteriorPoint);
    }
    let m = pool.len();
    let half = (m / 2).max(1);
    let found = (0..pairs).into_par_iter().find_map_first(|i| {
        let (a, b) = if i % 2 == 0 {
            (pool[i % m].clone(), pool[(i + half) % m].clone())
        } else {
            rim_chord(region, &pool[i % m], seed, i)
        };
        if !(region.contains(&a) && region.contains(&b)) {
            return None;
        }
        segment_exit(region, &a, &b).map(|exit| (a, b, exit))
    });
    Ok(match found {
        Some((a, b, exit)) => OracleVerdict::NotConvex { a, b, exit },
        None => OracleVerdict::Convex,
    })
}

#[derive(Clone, Debug)]
pub struct IndependencePoint {
    pub location: Point,
    pub under_rho: ConvexityVerdict,
    pub under_h_rho: ConvexityVerdict,
}

#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub points: Vec<IndependencePoint>,
    /// Indices whose classes differ.
    pub disagreements: Vec<usize>,
}

/// Compares verdicts for rho and h·rho at sampled boundary points.
pub fn defining_function_independence(
    d: &DomainSpec,
    h: &ScalarField,
    samples: usize,
) -> Result<IndependenceReport> {
    let dh = d.multiply_by_h(h)?;
    let pts = d.sample_boundary(samples, 0)?;
    verdicts_under_both(d, &dh, &pts)
}

pub(crate) fn verdicts_under_both(
    d: &DomainSpec,
    dh: &DomainSpec,
    pts: &[BoundaryPoint],
) -> Result<IndependenceReport> {
    let points: Vec<IndependencePoint> = pts
        .par_iter()
        .map(|p| {
            let q = dh.tangent_basis(&p.location)?;
            Ok(IndependencePoint {
                location: p.location.clone(),
                under_rho: classify_point(d, p)?,
                under_h_rho: classify_point(dh, &q)?,
            })
        })
        .collect::<Result<_>>()?;
    let disagreements = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.under_rho.class != p.under_h_rho.class)
        .map(|(i, _)| i)
        .collect();
    Ok(IndependenceReport { points, disagreements })
}

/// h = 0.5 + (a.x + c)^2 + b|x|^2 with seeded random a, b, c.
pub fn random_positive_multiplier(dim: usize, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lin = Polynomial::constant(dim, rng.gen_range(-1.0..1.0));
    for i in 0..dim {
        lin = lin.add(&Polynomial::var(dim, i).scale(rng.gen_range(-1.0..1.0)));
    }
    let b: f64 = rng.gen_range(0.0..1.0);
    Polynomial::constant(dim, 0.5)
        .add(&lin.mul(&lin))
        .add(&Polynomial::norm_squared(dim).scale(b))
}

#[derive(Clone, Debug)]
pub struct ConvexifyOptions {
    pub boundary_samples: usize,
    pub sphere_samples: usize,
    pub seed: u64,
    /// Offsets along the normal at which the Hessian is also certified.
    pub band: f64,
}

impl Default for ConvexifyOptions {
    fn default() -> Self {
        ConvexifyOptions { boundary_samples: 200, sphere_samples: 4096, seed: 0, band: 0.01 }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexificationResult {
    pub lambda: f64,
    pub rho_tilde: ScalarField,
    pub certified_c: f64,
    /// Smallest full Hessian eigenvalue on the boundary samples alone.
    pub boundary_min_eigenvalue: f64,
    pub samples: usize,
}

pub fn strong_convexify(d: &DomainSpec, sphere_samples: usize) -> Result<ConvexificationResult> {
    strong_convexify_with(d, &ConvexifyOptions { sphere_samples, ..Default::default() })
}

pub fn strong_convexify_with(d: &DomainSpec, opts: &ConvexifyOptions) -> Result<ConvexificationResult> {
    let pts = d.sample_boundary(opts.boundary_samples, opts.seed)?;
    for (p, v) in pts.iter().zip(classify_all(d, &pts)?) {
        if v.class != ConvexityClass::StronglyConvex {
            return Err(Error::NotStronglyConvex {
                point: p.location.as_slice().to_vec(),
                reason: format!("{:?} with min eigenvalue {:e}", v.class, v.min_tangential_eigenvalue),
            });
        }
    }
    let n = d.dim();
    let sphere: Vec<Vector> = unit_directions(n, opts.sphere_samples.max(4096), opts.seed)
        .into_iter()
        .map(Vector::from_vec)
        .collect();
    let per_point: Vec<Option<f64>> = pts
        .par_iter()
        .map(|p| -> Result<Option<f64>> {
            let h = d.rho().hess(p.location.as_slice());
            let eig = SymmetricEigen::new(h.clone());
            let mut dirs: Vec<Vector> = Vec::with_capacity(sphere.len() + 2 * n);
            for c in eig.eigenvectors.column_iter() {
                dirs.push(c.into_owned());
                dirs.push(-c.into_owned());
            }
            dirs.extend(sphere.iter().cloned());
            let mut min_form = f64::INFINITY;
            let mut mu = f64::INFINITY;
            let mut hit = false;
            for w in &dirs {
                let form = w.dot(&(&h * w));
                if form <= 0.0 {
                    hit = true;
                    min_form = min_form.min(form);
                    mu = mu.min(p.gradient.dot(w).abs());
                }
            }
            if !hit {
                return Ok(None);
            }
            if mu <= 1e-8 {
                return Err(Error::NotStronglyConvex {
                    point: p.location.as_slice().to_vec(),
                    reason: format!("a direction with form <= 0 has |grad . w| = {mu:e}"),
                });
            }
            Ok(Some(-min_form / (mu * mu) + 1.0))
        })
        .collect::<Result<_>>()?;
    let mut lambda = per_point.iter().flatten().fold(1.0f64, |a, &b| a.max(b));
    for _ in 0..30 {
        let rho_tilde: ScalarField =
            Composite::ExpConvexified { inner: Box::new(d.rho().clone()), lambda }.into();
        let (bmin, cmin) = certify(&rho_tilde, &pts, opts.band);
        if cmin >= 1e-10 {
            return Ok(ConvexificationResult {
                lambda,
                rho_tilde,
                certified_c: cmin,
                boundary_min_eigenvalue: bmin,
                samples: pts.len(),
            });
        }
        lambda *= 2.0;
    }
    Err(Error::CheckFailed("convexified Hessian never became positive definite".into()))
}

/// Minimum full Hessian eigenvalue on the boundary and on the normal band.
fn certify(f: &ScalarField, pts: &[BoundaryPoint], band: f64) -> (f64, f64) {
    let offsets = [0.0, band, -band, 0.5 * band, -0.5 * band];
    let mins: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let mut b = f64::INFINITY;
            let mut c = f64::INFINITY;
            for (k, s) in offsets.iter().enumerate() {
                let x = &p.location + &p.normal * *s;
                let e = SymmetricEigen::new(f.hess(x.as_slice())).eigenvalues.min();
                if k == 0 {
                    b = e;
                }
                c = c.min(e);
            }
            (b, c)
        })
        .collect();
    mins.iter().fold((f64::INFINITY, f64::INFINITY), |(a, b), (x, y)| (a.min(*x), b.min(*y)))
}

/// Full Hessian eigenvalue minimum of a field at the given points.
pub fn min_hessian_eigenvalue(f: &ScalarField, points: &[Point]) -> f64 {
    points
        .par_iter()
        .map(|x| SymmetricEigen::new(f.hess(x.as_slice())).eigenvalues.min())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
pub struct TaylorWitness {
    pub t: f64,
    pub eps: f64,
    /// Q^0 = P + eps·nu, outside the domain.
    pub q_out: Point,
    /// Q^t, inside.
    pub q_in: Point,
    /// Q^-t, inside; its midpoint with q_in is q_out.
    pub q_in_mirror: Point,
}

/// Sign pattern rho(Q^0) > 0, rho(Q^±t) < 0 along a negative tangent direction.
pub fn nonconvexity_witness(d: &DomainSpec, p: &BoundaryPoint, w: &Vector) -> Result<TaylorWitness> {
    let w = w.normalize();
    let form = restricted_form(d, p, &w)?;
    if form >= 0.0 {
        return Err(Error::NonNegativeForm(form));
    }
    let k = -form / (2.0 * p.gradient.norm());
    let mut eps = 1e-2;
    for _ in 0..80 {
        let t = (2.0 * eps / k).sqrt();
        let base = &p.location + &p.normal * eps;
        let q_in = &base + &w * t;
        let q_mirror = &base - &w * t;
        if d.value(base.as_slice()) > 0.0
            && d.value(q_in.as_slice()) < 0.0
            && d.value(q_mirror.as_slice()) < 0.0
        {
            return Ok(TaylorWitness { t, eps, q_out: base, q_in, q_in_mirror: q_mirror });
        }
        eps *= 0.5;
    }
    Err(Error::Inconclusive)
}

/// {rho + eps|x|^(2M)/M < 0}, contained in the original domain.
pub fn inner_strongly_convex_approx(d: &DomainSpec, eps: f64, m: u32) -> Result<DomainSpec> {
    if !(eps > 0.0) || m < 1 {
        return Err(Error::InvalidInput("need eps > 0 and M >= 1".into()));
    }
    let n = d.dim();
    if !(d.value(&vec![0.0; n]) < 0.0) {
        return Err(Error::OriginNotInterior);
    }
    let extra = Polynomial::norm_squared(n).pow(m).scale(eps / m as f64);
    let rho = match d.rho().as_polynomial() {
        Some(p) => p.add(&extra).into(),
        None => ScalarField::sum(vec![d.rho().clone(), extra.into()])?,
    };
    Ok(DomainSpec::new(
        &format!("{}_eps{}", d.name(), eps),
        rho,
        d.lo().to_vec(),
        d.hi().to_vec(),
        d.smoothness(),
    )?
    .with_anchor(vec![0.0; n]))
}

/// {x : rho(A^-1 (x - b)) < 0}.
pub fn transform_domain(d: &DomainSpec, a: &Matrix, b: &Vector) -> Result<DomainSpec> {
    let n = d.dim();
    if a.nrows() != n || a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    let det = a.determinant();
    if !(det.abs() > 1e-12) {
        return Err(Error::Singular(det.abs()));
    }
    let ai = a.clone().try_inverse().ok_or(Error::Singular(det.abs()))?;
    let rho: ScalarField = Composite::AffinePullback {
        inner: Box::new(d.rho().clone()),
        a_inv: (0..n).map(|r| (0..n).map(|c| ai[(r, c)]).collect()).collect(),
        shift: b.as_slice().to_vec(),
    }
    .into();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for mask in 0..(1usize << n) {
        let c = Vector::from_fn(n, |i, _| if mask >> i & 1 == 1 { d.hi()[i] } else { d.lo()[i] });
        let y = a * c + b;
        for i in 0..n {
            lo[i] = lo[i].min(y[i]);
            hi[i] = hi[i].max(y[i]);
        }
    }
    let mut out = DomainSpec::new(&format!("{}_affine", d.name()), rho, lo, hi, d.smoothness())?;
    if let Ok(anchor) = d.interior_anchor() {
        let y = a * Vector::from_vec(anchor) + b;
        out = out.with_anchor(y.as_slice().to_vec());
    }
    Ok(out)
}
