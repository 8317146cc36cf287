//! Outward bumping of a 2D boundary near a convex point of finite order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{geometric_convexity_oracle, OracleVerdict};
use crate::domain::{BoundaryPoint, DomainSpec, Region};
use crate::error::{Error, Result};
use crate::field::{fd_hessian_from_gradient, Composite, Jet, Kernel, Matrix, Point, Polynomial, ScalarField, Vector};
use crate::order::{contact_order, ContactOrder, DEFAULT_CUTOFF};

/// s = phi(t) with rho(origin + t*tangent + s*normal) = 0, solved near s = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImplicitGraph {
    pub domain: Box<DomainSpec>,
    pub origin: Vec<f64>,
    pub tangent: Vec<f64>,
    pub normal: Vec<f64>,
}

impl ImplicitGraph {
    fn at(&self, t: f64, s: f64) -> Vec<f64> {
        (0..self.origin.len()).map(|i| self.origin[i] + t * self.tangent[i] + s * self.normal[i]).collect()
    }

    pub fn solve(&self, t: f64) -> f64 {
        let d = &self.domain;
        let g = |s: f64| {
            let v = d.value(&self.at(t, s));
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let step = 1e-3 * d.diameter().max(1e-12);
        let (mut lo, mut hi) = (0.0, 0.0);
        let (mut glo, mut ghi);
        let g0 = g(0.0);
        if g0 == 0.0 {
            return 0.0;
        }
        if g0 > 0.0 {
            ghi = g0;
            let mut h = step;
            loop {
                lo = -h;
                glo = g(lo);
                if glo < 0.0 {
                    break;
                }
                h *= 2.0;
                if h > 1e3 * d.diameter() {
                    return f64::NAN;
                }
            }
        } else {
            glo = g0;
            let mut h = step;
            loop {
                hi = h;
                ghi = g(hi);
                if ghi > 0.0 {
                    break;
                }
                h *= 2.0;
                if h > 1e3 * d.diameter() {
                    return f64::NAN;
                }
            }
        }
        // Illinois with a bisection every fourth step.
        let mut side = 0i32;
        for it in 0..300 {
            if (hi - lo).abs() <= 1e-16 * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
            let mut m = if it % 4 == 3 || !ghi.is_finite() {
                0.5 * (lo + hi)
            } else {
                (lo * ghi - hi * glo) / (ghi - glo)
            };
            if !(m > lo.min(hi) && m < lo.max(hi)) {
                m = 0.5 * (lo + hi);
            }
            let gm = g(m);
            if gm == 0.0 {
                return m;
            }
            if gm < 0.0 {
                lo = m;
                glo = gm;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = m;
                ghi = gm;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
        if glo.abs() <= ghi.abs() {
            lo
        } else {
            hi
        }
    }

    pub fn into_field(self) -> ScalarField {
        Composite::ImplicitGraph(self).into()
    }
}

impl Kernel for ImplicitGraph {
    fn kernel_dim(&self) -> usize {
        1
    }
    fn kernel_class(&self) -> u32 {
        self.domain.smoothness()
    }
    fn kernel_jet(&self, x: &[f64], order: u8) -> Jet {
        let t = x[0];
        let s = self.solve(t);
        let mut jet = Jet { v: s, g: None, h: None };
        if order == 0 {
            return jet;
        }
        let y = self.at(t, s);
        let gr = self.domain.rho().grad(&y);
        let tv = Vector::from_column_slice(&self.tangent);
        let nv = Vector::from_column_slice(&self.normal);
        let (ft, fs) = (gr.dot(&tv), gr.dot(&nv));
        let d1 = -ft / fs;
        jet.g = Some(Vector::from_element(1, d1));
        if order >= 2 {
            let h = self.domain.rho().hess(&y);
            let ftt = tv.dot(&(&h * &tv));
            let fts = tv.dot(&(&h * &nv));
            let fss = nv.dot(&(&h * &nv));
            let d2 = -(ftt + 2.0 * fts * d1 + fss * d1 * d1) / fs;
            jet.h = Some(Matrix::from_element(1, 1, d2));
        }
        jet
    }
}

/// Hermite data for the concave bump polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpData {
    pub a: f64,
    /// Value and k derivatives at -a.
    pub alpha: Vec<f64>,
    /// Value and k derivatives at +a.
    pub beta: Vec<f64>,
    pub gamma0: f64,
    pub k: usize,
    /// Also require p^(i)(0) = 0 for i = 1..=center_flat.
    #[serde(default)]
    pub center_flat: usize,
}

impl BumpData {
    pub fn new(a: f64, alpha: Vec<f64>, beta: Vec<f64>, gamma0: f64, k: usize) -> Self {
        BumpData { a, alpha, beta, gamma0, k, center_flat: 0 }
    }

    /// Data matched to a graph at +-a with p(0) = phi(0) + height.
    pub fn from_graph(phi: &ScalarField, a: f64, k: usize, height: f64) -> Result<Self> {
        let side = |t: f64| graph_derivatives(phi, t, k);
        Ok(BumpData::new(a, side(-a)?, side(a)?, phi.value(&[0.0]) + height, k))
    }

    fn conditions(&self) -> Vec<(f64, usize, f64)> {
        let mut c = Vec::new();
        for i in 0..=self.k {
            c.push((-self.a, i, self.alpha[i]));
            c.push((self.a, i, self.beta[i]));
        }
        c.push((0.0, 0, self.gamma0));
        for i in 1..=self.center_flat {
            c.push((0.0, i, 0.0));
        }
        c
    }
}

/// Value and derivatives up to k of a one-variable field.
pub fn graph_derivatives(phi: &ScalarField, t: f64, k: usize) -> Result<Vec<f64>> {
    if k > 2 {
        return Err(Error::InvalidInput("matching order above 2 is not supported".into()));
    }
    let j = phi.jet(&[t], k as u8);
    let mut out = vec![j.v];
    if k >= 1 {
        out.push(j.g.as_ref().map_or(f64::NAN, |g| g[0]));
    }
    if k >= 2 {
        out.push(j.h.as_ref().map_or(f64::NAN, |h| h[(0, 0)]));
    }
    Ok(out)
}

fn falling(j: usize, i: usize) -> f64 {
    (0..i).map(|r| (j - r) as f64).product()
}

/// Value of the i-th derivative of sum c_j x^j.
pub fn poly_derivative(c: &[f64], i: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for j in (i..c.len()).rev() {
        acc = acc * x + c[j] * falling(j, i);
    }
    acc
}

/// Coefficients of the interpolant of minimal degree, residual checked.
fn hermite_coefficients(data: &BumpData) -> Result<Vec<f64>> {
    let a = data.a;
    let cond = data.conditions();
    let n = cond.len();
    // Solve in u = x / a for conditioning.
    let mut m = Matrix::zeros(n, n);
    let mut rhs = Vector::zeros(n);
    for (r, &(x, i, v)) in cond.iter().enumerate() {
        let u = x / a;
        for j in i..n {
            m[(r, j)] = falling(j, i) * u.powi((j - i) as i32);
        }
        rhs[r] = v * a.powi(i as i32);
    }
    let cu = m.lu().solve(&rhs).ok_or(Error::Singular(0.0))?;
    let c: Vec<f64> = (0..n).map(|j| cu[j] / a.powi(j as i32)).collect();
    let residual = cond
        .iter()
        .map(|&(x, i, v)| (poly_derivative(&c, i, x) - v).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max);
    if !(residual <= 1e-9) {
        return Err(Error::Singular(residual));
    }
    Ok(c)
}

/// Concave-down polynomial through the Hermite data.
pub fn bump_polynomial(data: &BumpData) -> Result<Polynomial> {
    let a = data.a;
    if !(a > 0.0) || data.k < 1 || data.alpha.len() != data.k + 1 || data.beta.len() != data.k + 1 {
        return Err(Error::InvalidInput("bump data needs a > 0, k >= 1 and k + 1 values per side".into()));
    }
    let chord = 0.5 * (data.alpha[0] + data.beta[0]);
    if data.gamma0 < chord {
        return Err(Error::Infeasible {
            reason: format!("gamma0 = {} lies below the chord midpoint {}", data.gamma0, chord),
            sample: None,
        });
    }
    let c = hermite_coefficients(data)?;
    let violation = (0..256).map(|i| -a + 2.0 * a * i as f64 / 255.0).find(|&x| poly_derivative(&c, 2, x) > 1e-10);
    if let Some(x) = violation {
        return Err(Error::Infeasible {
            reason: format!("p'' = {:e} > 0", poly_derivative(&c, 2, x)),
            sample: Some(x),
        });
    }
    Ok(Polynomial::univariate(&c))
}

/// Local frame at the bumped point: x = origin + t*tangent + s*normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFrame {
    pub origin: Vec<f64>,
    pub tangent: Vec<f64>,
    pub normal: Vec<f64>,
}

impl GraphFrame {
    pub fn to_local(&self, x: &[f64]) -> (f64, f64) {
        let mut t = 0.0;
        let mut s = 0.0;
        for i in 0..2 {
            let d = x[i] - self.origin[i];
            t += d * self.tangent[i];
            s += d * self.normal[i];
        }
        (t, s)
    }

    pub fn to_ambient(&self, t: f64, s: f64) -> Vec<f64> {
        (0..2).map(|i| self.origin[i] + t * self.tangent[i] + s * self.normal[i]).collect()
    }
}

/// The boundary near a point as a concave graph s = phi(t), optionally
/// replaced by a polynomial on [-a, a].
#[derive(Clone, Debug)]
pub struct GraphDomain2D {
    pub phi: ScalarField,
    pub half_width: f64,
    pub frame: GraphFrame,
    pub ambient: DomainSpec,
    pub patch: Option<Polynomial>,
    pub patch_height: f64,
}

impl GraphDomain2D {
    /// Graph over the tangent line at the boundary point hit by the ray from
    /// the anchor through `p`.
    pub fn at(ambient: &DomainSpec, p: &[f64]) -> Result<Self> {
        if ambient.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: ambient.dim() });
        }
        let anchor = ambient.interior_anchor()?;
        let dir: Vec<f64> = p.iter().zip(&anchor).map(|(a, b)| a - b).collect();
        let bp = ambient.project_with_steps(&anchor, &dir, 256)?;
        Ok(Self::from_boundary_point(ambient, &bp))
    }

    pub fn from_boundary_point(ambient: &DomainSpec, bp: &BoundaryPoint) -> Self {
        let nu = &bp.normal;
        let frame = GraphFrame {
            origin: bp.location.as_slice().to_vec(),
            tangent: vec![nu[1], -nu[0]],
            normal: vec![nu[0], nu[1]],
        };
        let phi = ImplicitGraph {
            domain: Box::new(ambient.clone()),
            origin: frame.origin.clone(),
            tangent: frame.tangent.clone(),
            normal: frame.normal.clone(),
        }
        .into_field();
        GraphDomain2D {
            phi,
            half_width: 0.25 * ambient.diameter(),
            frame,
            ambient: ambient.clone(),
            patch: None,
            patch_height: 0.0,
        }
    }

    pub fn center(&self) -> &[f64] {
        &self.frame.origin
    }

    pub fn phi_at(&self, t: f64) -> f64 {
        self.phi.value(&[t])
    }

    /// Boundary graph after patching.
    pub fn graph_at(&self, t: f64) -> f64 {
        match &self.patch {
            Some(p) if t.abs() < self.half_width => p.eval(&[t]),
            _ => self.phi_at(t),
        }
    }

    /// Angle between the tangent lines at -a and a.
    pub fn turning(&self, a: f64) -> f64 {
        let slope = |t: f64| self.phi.jet(&[t], 1).g.map_or(f64::NAN, |g| g[0]);
        (slope(a).atan() - slope(-a).atan()).abs()
    }

    /// Closed polyline of the (patched) boundary from rays through the anchor.
    pub fn polyline(&self, count: usize) -> Result<Vec<[f64; 2]>> {
        let anchor = self.ambient.interior_anchor()?;
        let (lo, hi) = self.bounds();
        let reach = (0..2).map(|i| (hi[i] - lo[i]).powi(2)).sum::<f64>().sqrt();
        (0..count)
            .into_par_iter()
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / count as f64;
                let u = [th.cos(), th.sin()];
                let at = |r: f64| vec![anchor[0] + r * u[0], anchor[1] + r * u[1]];
                let mut inside = 0.0;
                let mut outside = reach / 512.0;
                while self.contains(&at(outside)) {
                    inside = outside;
                    outside += reach / 512.0;
                    if outside > 2.0 * reach {
                        return Err(Error::RayMissesBoundary { origin: anchor.clone(), direction: u.to_vec() });
                    }
                }
                for _ in 0..80 {
                    let m = 0.5 * (inside + outside);
                    if self.contains(&at(m)) {
                        inside = m;
                    } else {
                        outside = m;
                    }
                }
                let x = at(inside);
                Ok([x[0], x[1]])
            })
            .collect()
    }
}

impl Region for GraphDomain2D {
    fn dim(&self) -> usize {
        2
    }
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.patch_height * 2.0;
        (
            self.ambient.lo().iter().map(|v| v - m).collect(),
            self.ambient.hi().iter().map(|v| v + m).collect(),
        )
    }
    fn contains(&self, x: &[f64]) -> bool {
        if let Some(p) = &self.patch {
            let (t, s) = self.frame.to_local(x);
            let a = self.half_width;
            if t.abs() < a && s > -a {
                let f = self.phi_at(t);
                if s > f - a {
                    return s < p.eval(&[t]);
                }
            }
        }
        self.ambient.contains(x)
    }
    fn contains_closed(&self, x: &[f64]) -> bool {
        if let Some(p) = &self.patch {
            let (t, s) = self.frame.to_local(x);
            let a = self.half_width;
            if t.abs() < a && s > -a {
                let f = self.phi_at(t);
                if s > f - a {
                    return s <= p.eval(&[t]);
                }
            }
        }
        self.ambient.contains_closed(x)
    }
}

/// Checks of a successful bump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpChecks {
    /// min(p - phi) on the window.
    pub min_gap: f64,
    /// p(0) - phi(0)
    pub center_lift: f64,
    pub max_second_derivative: f64,
    pub oracle_convex: bool,
    pub chord_convex: bool,
    pub grid_inclusion: bool,
    pub hausdorff: f64,
}

#[derive(Clone, Debug)]
pub struct BumpOutcome {
    pub graph: GraphDomain2D,
    pub polynomial: Polynomial,
    pub half_width: f64,
    pub height: f64,
    pub hausdorff: f64,
    pub center_order: ContactOrder,
    pub checks: BumpChecks,
}

/// Serializable summary: local frame and coefficients of p(t).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpCoefficients {
    pub frame: GraphFrame,
    pub half_width: f64,
    pub height: f64,
    pub hausdorff: f64,
    pub coefficients: Vec<f64>,
    pub polynomial: Polynomial,
}

impl BumpOutcome {
    pub fn coefficients(&self) -> BumpCoefficients {
        BumpCoefficients {
            frame: self.graph.frame.clone(),
            half_width: self.half_width,
            height: self.height,
            hausdorff: self.hausdorff,
            coefficients: self.polynomial.coefficients_1d(),
            polynomial: self.polynomial.clone(),
        }
    }

    /// Defining function s - p(t) in ambient coordinates, bounded to the window.
    pub fn patch_domain(&self) -> Result<DomainSpec> {
        patch_domain(&self.graph.frame, &self.polynomial, self.half_width)
    }
}

fn patch_domain(frame: &GraphFrame, p: &Polynomial, a: f64) -> Result<DomainSpec> {
    // s - p(t) in local coordinates (t, s)
    let local = Polynomial::var(2, 1).add(&lift_1d(p).scale(-1.0));
    let rho: ScalarField = Composite::AffinePullback {
        inner: Box::new(local.into()),
        a_inv: vec![frame.tangent.clone(), frame.normal.clone()],
        shift: frame.origin.clone(),
    }
    .into();
    let p0 = p.eval(&[0.0]);
    let corners = [
        frame.to_ambient(-a, p0 + a),
        frame.to_ambient(a, p0 + a),
        frame.to_ambient(-a, p0 - 2.0 * a),
        frame.to_ambient(a, p0 - 2.0 * a),
    ];
    let lo: Vec<f64> = (0..2).map(|i| corners.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..2).map(|i| corners.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    Ok(DomainSpec::new("bump_patch", rho, lo, hi, 32)?.with_anchor(frame.to_ambient(0.0, p0 - 0.5 * a)))
}

/// p(t) as a polynomial in (t, s).
fn lift_1d(p: &Polynomial) -> Polynomial {
    let terms: Vec<(f64, Vec<u32>)> = p.monomials().iter().map(|m| (m.coef, vec![m.exp[0], 0])).collect();
    let refs: Vec<(f64, &[u32])> = terms.iter().map(|(c, e)| (*c, e.as_slice())).collect();
    Polynomial::from_terms(2, &refs).expect("two variables")
}

fn center_order(g: &GraphDomain2D) -> Result<ContactOrder> {
    let d = &g.ambient;
    let bp = d.tangent_basis(&Point::from_column_slice(g.center()))?;
    let cutoff = DEFAULT_CUTOFF.min(2 * (d.smoothness().min(DEFAULT_CUTOFF / 2)));
    Ok(contact_order(d, &bp, cutoff)?.order)
}

/// Window half-width with tangent turning below pi/6.
fn admissible_window(g: &GraphDomain2D) -> f64 {
    let mut a = g.half_width;
    for _ in 0..40 {
        if g.turning(a) < std::f64::consts::FRAC_PI_6 {
            break;
        }
        a *= 0.5;
    }
    a
}

/// Largest chord violation of the patched graph sampled on [-2a, 2a], as a
/// segment between interior points whose midpoint is outside.
fn chord_witness(g: &GraphDomain2D) -> Option<(Vec<f64>, Vec<f64>)> {
    let a = g.half_width;
    let n = 257;
    let ts: Vec<f64> = (0..n).map(|i| -2.0 * a + 4.0 * a * i as f64 / (n - 1) as f64).collect();
    let psi: Vec<f64> = ts.par_iter().map(|&t| g.graph_at(t)).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in (i + 2..n).step_by(2) {
            let m = (i + j) / 2;
            let gap = 0.5 * (psi[i] + psi[j]) - psi[m];
            if gap.is_finite() && gap > 1e-13 && best.map_or(true, |b| gap > b.0) {
                best = Some((gap, i, j));
            }
        }
    }
    let (gap, i, j) = best?;
    let drop = gap / 4.0;
    let x = g.frame.to_ambient(ts[i], psi[i] - drop);
    let y = g.frame.to_ambient(ts[j], psi[j] - drop);
    let mid: Vec<f64> = x.iter().zip(&y).map(|(p, q)| 0.5 * (p + q)).collect();
    (g.contains(&x) && g.contains(&y) && !g.contains(&mid)).then_some((x, y))
}

fn with_patch(g: &GraphDomain2D, p: Polynomial, a: f64, height: f64) -> GraphDomain2D {
    let mut out = g.clone();
    out.patch = Some(p);
    out.half_width = a;
    out.patch_height = height;
    out
}

/// Verifies (a)-(d) for a candidate patch.
fn check_bump(g: &GraphDomain2D, cand: &GraphDomain2D, eps: f64) -> Result<BumpChecks> {
    let a = cand.half_width;
    let p = cand.patch.as_ref().expect("patched");
    // odd count so the center, where p - phi peaks, is sampled
    let ts: Vec<f64> = (0..257).map(|i| -a + 2.0 * a * i as f64 / 256.0).collect();
    let gaps: Vec<f64> = ts.par_iter().map(|&t| p.eval(&[t]) - cand.phi_at(t)).collect();
    let coeffs = p.coefficients_1d();
    let max_second_derivative = ts.iter().map(|&t| poly_derivative(&coeffs, 2, t)).fold(f64::NEG_INFINITY, f64::max);
    let oracle_convex = matches!(geometric_convexity_oracle(cand, 1000, 0)?, OracleVerdict::Convex);
    let chord_convex = chord_witness(cand).is_none();
    let (lo, hi) = g.ambient.bounds();
    let grid = 256;
    let grid_inclusion = (0..grid * grid).into_par_iter().all(|k| {
        let x = [
            lo[0] + (hi[0] - lo[0]) * ((k % grid) as f64 + 0.5) / grid as f64,
            lo[1] + (hi[1] - lo[1]) * ((k / grid) as f64 + 0.5) / grid as f64,
        ];
        !g.ambient.contains(&x) || cand.contains(&x)
    });
    let _ = eps;
    Ok(BumpChecks {
        min_gap: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
        center_lift: p.eval(&[0.0]) - cand.phi_at(0.0),
        max_second_derivative,
        oracle_convex,
        chord_convex,
        grid_inclusion,
        hausdorff: gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn accepted(c: &BumpChecks, eps: f64) -> bool {
    c.min_gap >= -1e-10
        && c.center_lift > 0.0
        && c.max_second_derivative <= 1e-10
        && c.oracle_convex
        && c.chord_convex
        && c.grid_inclusion
        && c.hausdorff < eps
}

fn flat_point(g: &GraphDomain2D, eps: f64, cutoff: u32) -> Error {
    // The largest window on which the graph stays on its tangent line.
    let mut a = admissible_window(g);
    for _ in 0..40 {
        let f0 = g.phi_at(0.0);
        if (g.phi_at(a) - f0).abs() <= 1e-12 && (g.phi_at(-a) - f0).abs() <= 1e-12 {
            break;
        }
        a *= 0.5;
    }
    let height = eps / 2.0;
    let witness = BumpData::from_graph(&g.phi, a, 2, height).ok().and_then(|data| {
        let p = Polynomial::univariate(&hermite_coefficients(&data).ok()?);
        chord_witness(&with_patch(g, p, a, height))
    });
    Error::FlatPoint {
        cutoff,
        detail: format!("no concave bump of height {height} exists over the flat window |t| < {a}"),
        witness,
    }
}

/// Bumps the boundary outward at the graph center by less than eps, matching
/// k derivatives at the window ends.
pub fn bump_domain_2d(g: &GraphDomain2D, eps: f64, k: usize) -> Result<BumpOutcome> {
    bump_search(g, eps, k, 0, None)
}

fn bump_search(
    g: &GraphDomain2D,
    eps: f64,
    k: usize,
    center_flat: usize,
    target: Option<u32>,
) -> Result<BumpOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let order = center_order(g)?;
    if let ContactOrder::Infinite(c) = order {
        return Err(flat_point(g, eps, c));
    }
    let mut last = String::from("no attempt");
    let mut a = admissible_window(g);
    for _ in 0..4 {
        for e in 1..=10 {
            let height = eps * 0.5f64.powi(e);
            let mut data = BumpData::from_graph(&g.phi, a, k, height)?;
            data.center_flat = center_flat;
            let p = match bump_polynomial(&data) {
                Ok(p) => p,
                Err(err @ (Error::Infeasible { .. } | Error::Singular(_))) => {
                    last = err.to_string();
                    continue;
                }
                Err(err) => return Err(err),
            };
            let cand = with_patch(g, p.clone(), a, height);
            let checks = check_bump(g, &cand, eps)?;
            if !accepted(&checks, eps) {
                last = format!("checks failed: {checks:?}");
                continue;
            }
            let out = BumpOutcome {
                hausdorff: checks.hausdorff,
                graph: cand,
                polynomial: p,
                half_width: a,
                height,
                center_order: order,
                checks,
            };
            if let Some(t) = target {
                let pd = out.patch_domain()?;
                let q = pd.tangent_basis(&Point::from_vec(out.graph.frame.to_ambient(0.0, out.polynomial.eval(&[0.0]))))?;
                let got = contact_order(&pd, &q, DEFAULT_CUTOFF)?.order;
                if got != ContactOrder::Finite(t) {
                    last = format!("bumped center has order {got}");
                    continue;
                }
            }
            return Ok(out);
        }
        a *= 0.5;
    }
    Err(Error::Infeasible { reason: last, sample: None })
}

/// Bump whose new center has the given even order, at most the current one.
pub fn bump_order_choice(g: &GraphDomain2D, target: u32, eps: f64) -> Result<BumpOutcome> {
    if target < 2 || target % 2 != 0 {
        return Err(Error::InvalidInput("target order must be even and >= 2".into()));
    }
    match center_order(g)? {
        ContactOrder::Infinite(c) => Err(flat_point(g, eps, c)),
        ContactOrder::Finite(m) if target > m => Err(Error::TargetExceedsOrder { target, order: m }),
        ContactOrder::Finite(_) => bump_search(g, eps, 2, target as usize - 1, Some(target)),
    }
}

/// Second derivative of phi by differencing its first derivative.
pub fn graph_curvature_fd(phi: &ScalarField, t: f64) -> f64 {
    let g = |x: &[f64]| phi.jet(x, 1).g.expect("gradient");
    fd_hessian_from_gradient(g, &[t])[(0, 0)]
}
