//! Distance to the boundary, convex exhaustion functions, mollification and
//! the sublevel decomposition.

use std::sync::{Arc, OnceLock};

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{classify_point, geometric_convexity_oracle, interior_points, ConvexityVerdict, OracleVerdict};
use crate::domain::{BoundaryPoint, DomainSpec, Region};
use crate::error::{Error, Result};
use crate::field::{fd_hessian_from_gradient, Composite, Jet, Kernel, Matrix, Polynomial, ScalarField, Vector, SMOOTH};
use crate::hulls::grid_points;
use crate::seq::Halton;

/// Default points per axis for mollifier quadrature.
pub const DEFAULT_GRID: usize = 65;
/// Grid used when smoothing exhaustion functions.
pub const EXHAUSTION_GRID: usize = 49;
pub const EXHAUSTION_EPS: f64 = 0.05;

/// Distance to the boundary of a fixed domain, from a cached boundary cloud
/// refined by a Newton solve of the foot-point conditions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryDistance {
    pub domain: Box<DomainSpec>,
    pub samples: usize,
    #[serde(skip)]
    cloud: OnceLock<Arc<Vec<Vec<f64>>>>,
}

impl BoundaryDistance {
    pub fn new(d: &DomainSpec) -> Self {
        BoundaryDistance { domain: Box::new(d.clone()), samples: 512, cloud: OnceLock::new() }
    }

    fn cloud(&self) -> &[Vec<f64>] {
        self.cloud.get_or_init(|| {
            let pts = self
                .domain
                .sample_boundary(self.samples, 0)
                .map(|v| v.into_iter().map(|b| b.location.as_slice().to_vec()).collect())
                .unwrap_or_default();
            Arc::new(pts)
        })
    }

    /// Nearest boundary point of an interior x, or None outside.
    pub fn foot_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = &self.domain;
        if !(d.value(x) < 0.0) {
            return None;
        }
        let dist2 = |p: &[f64]| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let best = self.cloud().iter().min_by(|a, b| dist2(a).total_cmp(&dist2(b)))?.clone();
        let refined = newton_foot(d, x, &best);
        match refined {
            Some(p) if dist2(&p) <= dist2(&best) * (1.0 + 1e-12) => Some(p),
            _ => Some(best),
        }
    }

    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        self.foot_point(x)
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    pub fn into_field(self) -> ScalarField {
        Composite::NegLogDistance(self).into()
    }
}

/// Newton iteration on P - x + mu grad rho(P) = 0, rho(P) = 0.
fn newton_foot(d: &DomainSpec, x: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let n = x.len();
    let xv = Vector::from_column_slice(x);
    let mut p = Vector::from_column_slice(start);
    let g0 = d.rho().grad(p.as_slice());
    let mut mu = -(&p - &xv).dot(&g0) / g0.norm_squared();
    let tol = 1e-15 * xv.norm().max(1.0);
    for _ in 0..40 {
        let r = d.value(p.as_slice());
        let g = d.rho().grad(p.as_slice());
        let h = d.rho().hess(p.as_slice());
        let f1 = &p - &xv + &g * mu;
        let mut m = Matrix::zeros(n + 1, n + 1);
        let top = Matrix::identity(n, n) + h * mu;
        m.view_mut((0, 0), (n, n)).copy_from(&top);
        for i in 0..n {
            m[(i, n)] = g[i];
            m[(n, i)] = g[i];
        }
        let mut rhs = Vector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = -f1[i];
        }
        rhs[n] = -r;
        let step = m.lu().solve(&rhs)?;
        let dp = step.rows(0, n).into_owned();
        p += &dp;
        mu += step[n];
        if !p.iter().all(|v| v.is_finite()) {
            return None;
        }
        if dp.norm() <= tol {
            break;
        }
    }
    let r = d.value(p.as_slice());
    (r.abs() <= 1e-9 * d.scale()).then(|| p.as_slice().to_vec())
}

impl Kernel for BoundaryDistance {
    fn kernel_dim(&self) -> usize {
        self.domain.dim()
    }
    /// C^2 off the medial axis.
    fn kernel_class(&self) -> u32 {
        2
    }
    fn kernel_jet(&self, x: &[f64], order: u8) -> Jet {
        let n = x.len();
        let grad_at = |y: &[f64]| -> Vector {
            match self.foot_point(y) {
                Some(p) => {
                    let v = Vector::from_fn(n, |i, _| y[i] - p[i]);
                    let d2 = v.norm_squared();
                    -v / d2
                }
                None => Vector::from_element(n, f64::NAN),
            }
        };
        let v = match self.distance(x) {
            Some(dx) => -dx.ln(),
            None => f64::INFINITY,
        };
        Jet {
            v,
            g: (order >= 1).then(|| grad_at(x)),
            h: (order >= 2).then(|| fd_hessian_from_gradient(grad_at, x)),
        }
    }
}

/// Distance from an interior point to the boundary.
pub fn distance_to_boundary(d: &DomainSpec, x: &[f64]) -> Result<f64> {
    if x.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: x.len() });
    }
    BoundaryDistance::new(d).distance(x).ok_or_else(|| Error::OutsideDomain(x.to_vec()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExhaustionBase {
    NegLogDistance,
    /// max(-log delta, |x|^2)
    MaxForm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SublevelCheck {
    pub level: f64,
    pub grid_points: usize,
    pub min_distance: f64,
    pub margin: f64,
    /// None when the sublevel set has fewer than two grid points.
    pub convex: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ExhaustionFunction {
    pub domain: DomainSpec,
    pub base: ExhaustionBase,
    pub field: ScalarField,
    /// (eps, grid) used by the sublevel decomposition.
    pub mollification: Option<(f64, usize)>,
    pub checks: Vec<SublevelCheck>,
}

impl ExhaustionFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.field.value(x)
    }

    pub fn with_mollification(mut self, eps: f64, grid: usize) -> Self {
        self.mollification = Some((eps, grid));
        self
    }

    pub fn smoothed(&self) -> Result<ScalarField> {
        let (eps, grid) = self.mollification.unwrap_or((EXHAUSTION_EPS, EXHAUSTION_GRID));
        mollify(&self.field, eps, &MollifierProfile, grid)
    }
}

fn require_convex(d: &DomainSpec) -> Result<()> {
    if let OracleVerdict::NotConvex { a, b, exit } = geometric_convexity_oracle(d, 1000, 0)? {
        return Err(Error::NotConvex { a, b, exit });
    }
    Ok(())
}

/// x -> -log delta(x), refused for non-convex domains.
pub fn neg_log_distance_field(d: &DomainSpec) -> Result<ExhaustionFunction> {
    require_convex(d)?;
    let field = BoundaryDistance::new(d).into_field();
    if let Some((a, b)) = midpoint_convexity_test(&field, d, 10_000, 0, 1e-9) {
        return Err(Error::CheckFailed(format!("-log delta fails midpoint convexity at {a:?}, {b:?}")));
    }
    Ok(ExhaustionFunction {
        domain: d.clone(),
        base: ExhaustionBase::NegLogDistance,
        field,
        mollification: None,
        checks: vec![],
    })
}

/// max(-log delta, |x|^2), with compactness and convexity checks of the
/// sublevel sets at c = 0, 1, 2, 4.
pub fn max_exhaustion(d: &DomainSpec) -> Result<ExhaustionFunction> {
    require_convex(d)?;
    let field = ScalarField::max(vec![
        BoundaryDistance::new(d).into_field(),
        Polynomial::norm_squared(d.dim()).into(),
    ])?;
    let mut e = ExhaustionFunction {
        domain: d.clone(),
        base: ExhaustionBase::MaxForm,
        field,
        mollification: None,
        checks: vec![],
    };
    e.checks = exhaustion_checks(&e, &[0.0, 1.0, 2.0, 4.0], 64)?;
    for c in &e.checks {
        if c.min_distance < c.margin || c.convex == Some(false) {
            return Err(Error::CheckFailed(format!("sublevel {} failed: {:?}", c.level, c)));
        }
    }
    Ok(e)
}

struct Sublevel<'a> {
    e: &'a ExhaustionFunction,
    c: f64,
}

impl Region for Sublevel<'_> {
    fn dim(&self) -> usize {
        self.e.domain.dim()
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.e.domain.bounds()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.e.value(x) < self.c
    }
    fn contains_closed(&self, x: &[f64]) -> bool {
        self.e.value(x) <= self.c
    }
}

/// Minimum boundary distance over grid points with E <= c, and oracle convexity of {E < c}.
pub fn exhaustion_checks(e: &ExhaustionFunction, levels: &[f64], grid: usize) -> Result<Vec<SublevelCheck>> {
    let d = &e.domain;
    let dist = BoundaryDistance::new(d);
    let pts = grid_points(d.lo(), d.hi(), grid);
    let vals: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|x| match dist.distance(x) {
            Some(dx) => (e.value(x), dx),
            None => (f64::INFINITY, 0.0),
        })
        .collect();
    levels
        .iter()
        .map(|&c| {
            let inside: Vec<f64> = vals.iter().filter(|(v, _)| *v <= c).map(|(_, dx)| *dx).collect();
            let convex = if inside.len() >= 2 {
                match geometric_convexity_oracle(&Sublevel { e, c }, 200, 0) {
                    Ok(v) => Some(v.is_convex()),
                    Err(Error::NoInteriorPoint) => None,
                    Err(err) => return Err(err),
                }
            } else {
                None
            };
            Ok(SublevelCheck {
                level: c,
                grid_points: inside.len(),
                min_distance: inside.iter().cloned().fold(f64::INFINITY, f64::min),
                margin: (-c).exp() / 2.0,
                convex,
            })
        })
        .collect()
}

/// The bump c_N exp(-1/(1-|u|^2)) on the unit ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MollifierProfile;

fn gamma_half(n: usize) -> f64 {
    // Gamma(n/2)
    let mut g = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

impl MollifierProfile {
    /// Unnormalized exp(-1/(1-|u|^2)).
    pub fn raw(u: &[f64]) -> f64 {
        let q = 1.0 - u.iter().map(|v| v * v).sum::<f64>();
        if q <= 0.0 {
            0.0
        } else {
            (-1.0 / q).exp()
        }
    }

    /// Integral of |u|^k raw(u) over R^N by radial Simpson quadrature.
    pub fn raw_radial_moment(dim: usize, k: u32) -> f64 {
        let area = 2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / gamma_half(dim);
        let m = 20_000;
        let h = 1.0 / m as f64;
        let f = |r: f64| {
            if r >= 1.0 {
                0.0
            } else {
                r.powi(dim as i32 - 1 + k as i32) * (-1.0 / (1.0 - r * r)).exp()
            }
        };
        let mut s = f(0.0) + f(1.0);
        for i in 1..m {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        area * s * h / 3.0
    }

    /// c_N with c_N * integral(raw) = 1.
    pub fn normalization(dim: usize) -> f64 {
        1.0 / Self::raw_radial_moment(dim, 0)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        Self::normalization(u.len()) * Self::raw(u)
    }

    /// Tensor midpoint rule with `grid` points per axis over [-1,1]^N.
    pub fn rule(&self, dim: usize, grid: usize) -> Result<QuadratureRule> {
        QuadratureRule::new(dim, grid)
    }
}

/// Midpoint nodes in the unit ball with value, gradient and Hessian weights of
/// the profile, normalized so the value weights sum to 1.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    pub grid: usize,
    pub nodes: Vec<f64>,
    pub w: Vec<f64>,
    pub gw: Vec<f64>,
    pub hw: Vec<f64>,
    /// |c_N h^N sum(raw) - 1|
    pub integral_error: f64,
}

impl QuadratureRule {
    pub fn new(dim: usize, grid: usize) -> Result<Self> {
        if grid < 2 || dim == 0 {
            return Err(Error::InvalidInput("bad quadrature grid".into()));
        }
        let h = 2.0 / grid as f64;
        let total = grid.pow(dim as u32);
        let mut nodes = Vec::new();
        let mut raw = Vec::new();
        let mut u = vec![0.0; dim];
        for mut k in 0..total {
            for ui in u.iter_mut() {
                *ui = -1.0 + h * ((k % grid) as f64 + 0.5);
                k /= grid;
            }
            let q = 1.0 - u.iter().map(|v| v * v).sum::<f64>();
            if q > 0.0 {
                nodes.extend_from_slice(&u);
                raw.push((-1.0 / q).exp());
            }
        }
        let sum: f64 = raw.iter().sum();
        let integral_error = (MollifierProfile::normalization(dim) * sum * h.powi(dim as i32) - 1.0).abs();
        let m = raw.len();
        let mut w = Vec::with_capacity(m);
        let mut gw = Vec::with_capacity(m * dim);
        let mut hw = Vec::with_capacity(m * dim * dim);
        for i in 0..m {
            let u = &nodes[i * dim..(i + 1) * dim];
            let phi = raw[i] / sum;
            let q = 1.0 - u.iter().map(|v| v * v).sum::<f64>();
            w.push(phi);
            for j in 0..dim {
                gw.push(phi * (-2.0 * u[j] / (q * q)));
            }
            for j in 0..dim {
                for k in 0..dim {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    let t = 4.0 * u[j] * u[k] / q.powi(4) - 2.0 * delta / (q * q) - 8.0 * u[j] * u[k] / q.powi(3);
                    hw.push(phi * t);
                }
            }
        }
        Ok(QuadratureRule { dim, grid, nodes, w, gw, hw, integral_error })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }
}

/// F * phi_eps by tensor quadrature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mollified {
    pub inner: Box<ScalarField>,
    pub eps: f64,
    pub grid: usize,
    #[serde(skip)]
    rule: OnceLock<Arc<QuadratureRule>>,
}

impl Mollified {
    fn rule(&self) -> &QuadratureRule {
        self.rule.get_or_init(|| {
            Arc::new(QuadratureRule::new(self.inner.dim(), self.grid).expect("validated by mollify"))
        })
    }
}

impl Kernel for Mollified {
    fn kernel_dim(&self) -> usize {
        self.inner.dim()
    }
    fn kernel_class(&self) -> u32 {
        SMOOTH
    }
    fn kernel_jet(&self, x: &[f64], order: u8) -> Jet {
        let rule = self.rule();
        let n = x.len();
        let eps = self.eps;
        let mut v = 0.0;
        let mut g = vec![0.0; if order >= 1 { n } else { 0 }];
        let mut h = vec![0.0; if order >= 2 { n * n } else { 0 }];
        let mut y = vec![0.0; n];
        for i in 0..rule.len() {
            let u = rule.node(i);
            for k in 0..n {
                y[k] = x[k] - eps * u[k];
            }
            let f = self.inner.value(&y);
            v += rule.w[i] * f;
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += rule.gw[i * n + k] * f;
            }
            for (k, hk) in h.iter_mut().enumerate() {
                *hk += rule.hw[i * n * n + k] * f;
            }
        }
        Jet {
            v,
            g: (order >= 1).then(|| Vector::from_vec(g) / eps),
            h: (order >= 2).then(|| {
                let m = Matrix::from_row_slice(n, n, &h) / (eps * eps);
                (&m + m.transpose()) * 0.5
            }),
        }
    }
}

/// F_eps = F * phi_eps with `grid` quadrature points per axis.
pub fn mollify(f: &ScalarField, eps: f64, profile: &MollifierProfile, grid: usize) -> Result<ScalarField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let rule = profile.rule(f.dim(), grid)?;
    if rule.integral_error > 1e-6 {
        return Err(Error::QuadratureTooCoarse(rule.integral_error));
    }
    let m = Mollified { inner: Box::new(f.clone()), eps, grid, rule: OnceLock::new() };
    let _ = m.rule.set(Arc::new(rule));
    Ok(Composite::Mollified(m).into())
}

/// f_j = F_{2^-j} + 2^-j |x|^2
pub fn strongly_convex_smoothing_sequence(f: &ScalarField, j: u32) -> Result<ScalarField> {
    if j < 1 {
        return Err(Error::InvalidInput("j must be >= 1".into()));
    }
    let e = 0.5f64.powi(j as i32);
    ScalarField::sum(vec![
        mollify(f, e, &MollifierProfile, DEFAULT_GRID)?,
        Polynomial::norm_squared(f.dim()).scale(e).into(),
    ])
}

#[derive(Clone, Debug)]
pub struct SmoothingReport {
    /// min over samples of f_j - f_{j+1}
    pub min_step_gap: f64,
    /// min over samples of f_{j+1} - F
    pub min_floor_gap: f64,
    pub min_hessian_eigenvalue: f64,
    /// max over samples of |f_j - F| / (1 + |x|^2)
    pub max_scaled_error: f64,
}

/// Samples f_j >= f_{j+1} >= F and positive definiteness of f_j in a box.
pub fn verify_smoothing_sequence(
    f: &ScalarField,
    j: u32,
    lo: &[f64],
    hi: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SmoothingReport> {
    let fj = strongly_convex_smoothing_sequence(f, j)?;
    let fk = strongly_convex_smoothing_sequence(f, j + 1)?;
    let mut h = Halton::new(f.dim(), seed);
    let pts: Vec<Vec<f64>> = (0..samples).map(|_| h.next_in_box(lo, hi)).collect();
    let rows: Vec<(f64, f64, f64)> = pts
        .par_iter()
        .map(|x| {
            let (a, b, c) = (fj.value(x), fk.value(x), f.value(x));
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (a - b, b - c, (a - c).abs() / (1.0 + r2))
        })
        .collect();
    let eig: Vec<f64> = pts
        .par_iter()
        .take(100)
        .map(|x| SymmetricEigen::new(fj.hess(x)).eigenvalues.min())
        .collect();
    Ok(SmoothingReport {
        min_step_gap: rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        min_floor_gap: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        max_scaled_error: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        min_hessian_eigenvalue: eig.into_iter().fold(f64::INFINITY, f64::min),
    })
}

/// Midpoint test over quasi-random interior pairs of a region; returns the
/// first failing pair.
pub fn midpoint_convexity_test<R: Region + ?Sized>(
    f: &ScalarField,
    region: &R,
    pairs: usize,
    seed: u64,
    slack: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let pts = interior_points(region, 2 * pairs, seed);
    let m = pts.len();
    if m < 2 {
        return None;
    }
    let half = m / 2;
    (0..pairs).into_par_iter().find_map_first(|i| {
        let (a, b) = (&pts[i % m], &pts[(i + half) % m]);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let (fa, fb, fm) = (f.value(a), f.value(b), f.value(&mid));
        (fm > 0.5 * (fa + fb) + slack).then(|| (a.clone(), b.clone()))
    })
}

/// Axis-aligned box as a region.
#[derive(Clone, Debug)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn cube(dim: usize, half: f64) -> Self {
        BoxRegion { lo: vec![-half; dim], hi: vec![half; dim] }
    }
}

impl Region for BoxRegion {
    fn dim(&self) -> usize {
        self.lo.len()
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v > *a && *v < *b)
    }
    fn contains_closed(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }
}

#[derive(Clone, Debug)]
pub enum WeakConvexityOutcome {
    Pass { min_integral: f64 },
    Fail { center: Vec<f64>, value: f64 },
}

impl WeakConvexityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, WeakConvexityOutcome::Pass { .. })
    }
}

/// Second-derivative weights along the first axis of the tensor grid, with
/// each grid line corrected so that it integrates 1, t and t^2 exactly
/// (moments 0, 0 and 2 * line mass). The raw analytic weights miss these by
/// up to 1e-2 at grid 65.
fn line_corrected_weights(rule: &QuadratureRule) -> Vec<f64> {
    let n = rule.dim;
    let mut d: Vec<f64> = (0..rule.len()).map(|i| rule.hw[i * n * n]).collect();
    let mut start = 0;
    while start < rule.len() {
        let tail = &rule.node(start)[1..];
        let mut end = start + 1;
        while end < rule.len() && &rule.node(end)[1..] == tail {
            end += 1;
        }
        // a' = a - w (alpha + beta t + gamma t^2)
        let mut m = Matrix::zeros(3, 3);
        let mut rhs = Vector::zeros(3);
        let mut mass = 0.0;
        for i in start..end {
            let t = rule.node(i)[0];
            let p = [1.0, t, t * t];
            mass += rule.w[i];
            for a in 0..3 {
                rhs[a] += d[i] * p[a];
                for b in 0..3 {
                    m[(a, b)] += rule.w[i] * p[a] * p[b];
                }
            }
        }
        rhs[2] -= 2.0 * mass;
        if let Some(c) = m.clone().lu().solve(&rhs).filter(|_| end - start >= 3) {
            for i in start..end {
                let t = rule.node(i)[0];
                d[i] -= rule.w[i] * (c[0] + c[1] * t + c[2] * t * t);
            }
        } else {
            for v in &mut d[start..end] {
                *v = 0.0;
            }
        }
        start = end;
    }
    d
}

/// Orthonormal frame whose first column is w / |w|.
fn frame_from(w: &[f64]) -> Matrix {
    let n = w.len();
    let mut cols: Vec<Vector> = vec![Vector::from_column_slice(w).normalize()];
    for k in 0..n {
        let mut v = Vector::zeros(n);
        v[k] = 1.0;
        for c in &cols {
            v -= c * c.dot(&v);
        }
        if v.norm() > 1e-6 && cols.len() < n {
            cols.push(v.normalize());
        }
    }
    Matrix::from_columns(&cols)
}

/// integral F(x) D_w^2 phi_eps(x - c) dx at each center, by quadrature on a
/// grid rotated so that its first axis is w.
pub fn weak_convexity_integrals(f: &ScalarField, w: &[f64], centers: &[Vec<f64>], eps: f64) -> Result<Vec<f64>> {
    let n = f.dim();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let scale: f64 = w.iter().map(|v| v * v).sum();
    if !(scale > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidInput("w must be nonzero and eps positive".into()));
    }
    let rule = QuadratureRule::new(n, DEFAULT_GRID)?;
    if rule.integral_error > 1e-6 {
        return Err(Error::QuadratureTooCoarse(rule.integral_error));
    }
    let d = line_corrected_weights(&rule);
    let r = frame_from(w);
    let offsets: Vec<Vector> = (0..rule.len()).map(|i| &r * Vector::from_column_slice(rule.node(i)) * eps).collect();
    Ok(centers
        .par_iter()
        .map(|c| {
            let mut y = vec![0.0; n];
            let mut acc = 0.0;
            for (o, di) in offsets.iter().zip(&d) {
                for k in 0..n {
                    y[k] = c[k] + o[k];
                }
                acc += f.value(&y) * di;
            }
            acc * scale / (eps * eps)
        })
        .collect())
}

pub fn weak_convexity_test(
    f: &ScalarField,
    w: &[f64],
    centers: &[Vec<f64>],
    eps: f64,
) -> Result<WeakConvexityOutcome> {
    let vals = weak_convexity_integrals(f, w, centers, eps)?;
    for (c, v) in centers.iter().zip(&vals) {
        if *v < -1e-8 {
            return Ok(WeakConvexityOutcome::Fail { center: c.clone(), value: *v });
        }
    }
    Ok(WeakConvexityOutcome::Pass { min_integral: vals.iter().cloned().fold(f64::INFINITY, f64::min) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubharmonicVerdict {
    ConvexAndSubharmonic,
    SubharmonicNotConvex,
    NotSubharmonic,
}

#[derive(Clone, Debug)]
pub struct SubharmonicReport {
    pub min_laplacian: f64,
    /// min over points of (sphere mean - F(x)).
    pub min_sphere_gap: f64,
    pub midpoint_convex: bool,
    pub verdict: SubharmonicVerdict,
    pub samples: usize,
}

impl SubharmonicReport {
    pub fn passed(&self) -> bool {
        self.verdict != SubharmonicVerdict::NotSubharmonic
    }
}

pub fn subharmonicity_check(f: &ScalarField, samples: usize) -> Result<SubharmonicReport> {
    let n = f.dim();
    subharmonicity_check_in(f, &BoxRegion::cube(n, 1.0), samples, 0)
}

/// Laplacian at `samples` points of the region, sphere means (radius 0.01) at
/// 100 of them, and a midpoint convexity test.
pub fn subharmonicity_check_in<R: Region + ?Sized>(
    f: &ScalarField,
    region: &R,
    samples: usize,
    seed: u64,
) -> Result<SubharmonicReport> {
    if f.class() < 2 {
        return Err(Error::NotDifferentiable { class: f.class(), needed: 2 });
    }
    let n = f.dim();
    let pts = interior_points(region, samples, seed);
    let laps: Vec<f64> = pts
        .par_iter()
        .map(|x| f.hess(x).trace())
        .filter(|v| v.is_finite())
        .collect();
    let min_laplacian = laps.iter().cloned().fold(f64::INFINITY, f64::min);
    let r = 0.01;
    let mut sphere: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let mut v = vec![0.0; n];
            v[i] = s * r;
            sphere.push(v);
        }
    }
    for mask in 0..(1usize << n) {
        sphere.push((0..n).map(|i| if mask >> i & 1 == 1 { r } else { -r } / (n as f64).sqrt()).collect());
    }
    let gaps: Vec<f64> = pts
        .par_iter()
        .take(100)
        .filter_map(|x| {
            let fx = f.value(x);
            let mean = sphere
                .iter()
                .map(|v| {
                    let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
                    f.value(&y)
                })
                .sum::<f64>()
                / sphere.len() as f64;
            let g = mean - fx;
            g.is_finite().then_some(g)
        })
        .collect();
    let min_sphere_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let midpoint_convex = midpoint_convexity_test(f, region, 1000, seed, 1e-9).is_none();
    let sub = min_laplacian >= -1e-8 && min_sphere_gap >= -1e-10;
    let verdict = match (sub, midpoint_convex) {
        (false, _) => SubharmonicVerdict::NotSubharmonic,
        (true, true) => SubharmonicVerdict::ConvexAndSubharmonic,
        (true, false) => SubharmonicVerdict::SubharmonicNotConvex,
    };
    Ok(SubharmonicReport { min_laplacian, min_sphere_gap, midpoint_convex, verdict, samples: laps.len() })
}

#[derive(Clone, Debug)]
pub struct SublevelDomain {
    pub level: f64,
    pub domain: DomainSpec,
    pub boundary: Vec<BoundaryPoint>,
    pub verdicts: Vec<ConvexityVerdict>,
    pub min_gradient: f64,
}

/// Boundary points sampled per sublevel set.
pub const SUBLEVEL_SAMPLES: usize = 16;

/// {E_smoothed < c} for each level, with boundary samples and verdicts.
pub fn sublevel_decomposition(e: &ExhaustionFunction, levels: &[f64]) -> Result<Vec<SublevelDomain>> {
    if levels.is_empty() || levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::LevelsNotIncreasing);
    }
    let smooth = e.smoothed()?;
    let d = &e.domain;
    let anchor = d.interior_anchor()?;
    let base = smooth.value(&anchor);
    levels
        .iter()
        .map(|&c| {
            if !(base < c) {
                return Err(Error::EmptySublevel(c));
            }
            let dom = DomainSpec::new(
                &format!("{}_sublevel_{}", d.name(), c),
                smooth.clone().plus_constant(-c),
                d.lo().to_vec(),
                d.hi().to_vec(),
                32,
            )?
            .with_anchor(anchor.clone());
            let boundary = dom.sample_boundary_with_steps(SUBLEVEL_SAMPLES, 0, 16)?;
            let mut min_gradient = f64::INFINITY;
            for b in &boundary {
                let g = b.gradient.norm();
                min_gradient = min_gradient.min(g);
                if g < 1e-6 {
                    return Err(Error::CriticalLevel {
                        level: c,
                        gradient: g,
                        point: b.location.as_slice().to_vec(),
                    });
                }
            }
            let verdicts = boundary.iter().map(|b| classify_point(&dom, b)).collect::<Result<Vec<_>>>()?;
            Ok(SublevelDomain { level: c, domain: dom, boundary, verdicts, min_gradient })
        })
        .collect()
}
