//! Scalar fields on R^N: exact polynomials and closed-form composites.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Differentiability class of an analytic field.
pub const SMOOTH: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exp: Vec<u32>,
    pub coef: f64,
}

impl Monomial {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coef;
        for (xi, &e) in x.iter().zip(&self.exp) {
            if e > 0 {
                v *= xi.powi(e as i32);
            }
        }
        v
    }

    // coef * d/dx_j of the monomial, without the coefficient shortcut
    fn d1(&self, x: &[f64], j: usize) -> f64 {
        let ej = self.exp[j];
        if ej == 0 {
            return 0.0;
        }
        let mut v = self.coef * ej as f64;
        for (i, (xi, &e)) in x.iter().zip(&self.exp).enumerate() {
            let e = if i == j { e - 1 } else { e };
            if e > 0 {
                v *= xi.powi(e as i32);
            }
        }
        v
    }

    fn d2(&self, x: &[f64], j: usize, k: usize) -> f64 {
        let mut exp = self.exp.clone();
        let mut c = self.coef;
        for idx in [j, k] {
            if exp[idx] == 0 {
                return 0.0;
            }
            c *= exp[idx] as f64;
            exp[idx] -= 1;
        }
        let mut v = c;
        for (xi, &e) in x.iter().zip(&exp) {
            if e > 0 {
                v *= xi.powi(e as i32);
            }
        }
        v
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialRepr {
    dim: usize,
    monomials: Vec<Monomial>,
}

impl TryFrom<PolynomialRepr> for Polynomial {
    type Error = String;
    fn try_from(r: PolynomialRepr) -> std::result::Result<Self, String> {
        Polynomial::new(r.dim, r.monomials).map_err(|e| e.to_string())
    }
}

/// Sum of monomials with integer exponents and f64 coefficients.
///
/// Monomials are kept in the order given; algebra results are merged and
/// sorted by exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr")]
pub struct Polynomial {
    dim: usize,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, monomials: Vec<Monomial>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("polynomial dimension must be >= 1".into()));
        }
        for m in &monomials {
            if m.exp.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.exp.len() });
            }
            if !m.coef.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
        }
        Ok(Polynomial { dim, monomials })
    }

    /// Build from `(coef, exponents)` pairs.
    pub fn from_terms(dim: usize, terms: &[(f64, &[u32])]) -> Result<Self> {
        Self::new(
            dim,
            terms.iter().map(|(c, e)| Monomial { exp: e.to_vec(), coef: *c }).collect(),
        )
    }

    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, monomials: vec![] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial { dim, monomials: vec![Monomial { exp: vec![0; dim], coef: c }] }
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut exp = vec![0; dim];
        exp[i] = 1;
        Polynomial { dim, monomials: vec![Monomial { exp, coef: 1.0 }] }
    }

    /// |x|^2
    pub fn norm_squared(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut exp = vec![0; dim];
            exp[i] = 2;
            p.monomials.push(Monomial { exp, coef: 1.0 });
        }
        p
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let monomials = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| Monomial { exp: vec![k as u32], coef: *c })
            .collect();
        Polynomial { dim: 1, monomials }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.monomials
            .iter()
            .filter(|m| m.coef != 0.0)
            .map(|m| m.exp.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x)).sum()
    }

    /// Sum of absolute monomial values; a round-off scale for `eval`.
    pub fn abs_eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x).abs()).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        Vector::from_fn(self.dim, |j, _| self.monomials.iter().map(|m| m.d1(x, j)).sum())
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let n = self.dim;
        let mut h = Matrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v: f64 = self.monomials.iter().map(|m| m.d2(x, j, k)).sum();
                h[(j, k)] = v;
                h[(k, j)] = v;
            }
        }
        h
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Vec::new();
        for m in &self.monomials {
            if m.exp[var] > 0 {
                let mut exp = m.exp.clone();
                let c = m.coef * exp[var] as f64;
                exp[var] -= 1;
                out.push(Monomial { exp, coef: c });
            }
        }
        Polynomial { dim: self.dim, monomials: out }.normalized()
    }

    /// Merge equal exponents, drop zeros, sort.
    pub fn normalized(&self) -> Polynomial {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for m in &self.monomials {
            *acc.entry(m.exp.clone()).or_insert(0.0) += m.coef;
        }
        Polynomial {
            dim: self.dim,
            monomials: acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(exp, coef)| Monomial { exp, coef })
                .collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim);
        let mut monomials = self.monomials.clone();
        monomials.extend(other.monomials.iter().cloned());
        Polynomial { dim: self.dim, monomials }.normalized()
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial { exp: m.exp.clone(), coef: m.coef * c })
                .collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim);
        let mut monomials = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                let exp = a.exp.iter().zip(&b.exp).map(|(x, y)| x + y).collect();
                monomials.push(Monomial { exp, coef: a.coef * b.coef });
            }
        }
        Polynomial { dim: self.dim, monomials }.normalized()
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.dim, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Ascending coefficients of a univariate polynomial.
    pub fn coefficients_1d(&self) -> Vec<f64> {
        assert_eq!(self.dim, 1);
        let deg = self.monomials.iter().map(|m| m.exp[0]).max().unwrap_or(0) as usize;
        let mut c = vec![0.0; deg + 1];
        for m in &self.monomials {
            c[m.exp[0] as usize] += m.coef;
        }
        c
    }
}

/// Value with optional first and second derivatives.
#[derive(Clone, Debug)]
pub struct Jet {
    pub v: f64,
    pub g: Option<Vector>,
    pub h: Option<Matrix>,
}

impl Jet {
    fn grad(&self) -> &Vector {
        self.g.as_ref().expect("gradient requested")
    }
    fn hess(&self) -> &Matrix {
        self.h.as_ref().expect("hessian requested")
    }
}

/// Fields implemented outside this module.
pub(crate) trait Kernel {
    fn kernel_dim(&self) -> usize;
    fn kernel_class(&self) -> u32;
    fn kernel_jet(&self, x: &[f64], order: u8) -> Jet;
}

/// A scalar field: a plain polynomial or a tagged composite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarField {
    Polynomial(Polynomial),
    Composite(Composite),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Composite {
    Sum { terms: Vec<ScalarField> },
    Product { factors: Vec<ScalarField> },
    Scaled { factor: f64, inner: Box<ScalarField> },
    Exp { inner: Box<ScalarField> },
    /// inner^exponent, defined where inner >= 0.
    Power { inner: Box<ScalarField>, exponent: f64 },
    /// Pointwise maximum; C^0.
    Max { terms: Vec<ScalarField> },
    /// max(|x_axis| - half_width, 0)^power, class C^(power-1).
    FlatSide { dim: usize, axis: usize, half_width: f64, power: u32 },
    /// inner(direction . x - offset) for a one-variable inner field.
    Ridge { inner: Box<ScalarField>, direction: Vec<f64>, offset: f64 },
    /// (exp(lambda * inner) - 1) / lambda
    ExpConvexified { inner: Box<ScalarField>, lambda: f64 },
    /// inner(A^-1 (x - shift))
    AffinePullback { inner: Box<ScalarField>, a_inv: Vec<Vec<f64>>, shift: Vec<f64> },
    NegLogDistance(crate::exhaust::BoundaryDistance),
    MinkowskiGaugeMinusOne(crate::hulls::MinkowskiGauge),
    Mollified(crate::exhaust::Mollified),
    ImplicitGraph(crate::bump::ImplicitGraph),
}

impl From<Polynomial> for ScalarField {
    fn from(p: Polynomial) -> Self {
        ScalarField::Polynomial(p)
    }
}

impl From<Composite> for ScalarField {
    fn from(c: Composite) -> Self {
        ScalarField::Composite(c)
    }
}

fn check_same_dim(fields: &[ScalarField]) -> Result<usize> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidInput("empty field list".into()))?
        .dim();
    for f in fields {
        if f.dim() != first {
            return Err(Error::DimensionMismatch { expected: first, got: f.dim() });
        }
    }
    Ok(first)
}

impl ScalarField {
    pub fn sum(terms: Vec<ScalarField>) -> Result<Self> {
        check_same_dim(&terms)?;
        Ok(Composite::Sum { terms }.into())
    }

    pub fn product(factors: Vec<ScalarField>) -> Result<Self> {
        check_same_dim(&factors)?;
        Ok(Composite::Product { factors }.into())
    }

    pub fn max(terms: Vec<ScalarField>) -> Result<Self> {
        check_same_dim(&terms)?;
        Ok(Composite::Max { terms }.into())
    }

    pub fn scaled(self, factor: f64) -> Self {
        Composite::Scaled { factor, inner: Box::new(self) }.into()
    }

    pub fn exp(self) -> Self {
        Composite::Exp { inner: Box::new(self) }.into()
    }

    pub fn power(self, exponent: f64) -> Self {
        Composite::Power { inner: Box::new(self), exponent }.into()
    }

    pub fn flat_side(dim: usize, axis: usize, half_width: f64, power: u32) -> Result<Self> {
        if axis >= dim || power == 0 || half_width < 0.0 {
            return Err(Error::InvalidInput("bad flat_side parameters".into()));
        }
        Ok(Composite::FlatSide { dim, axis, half_width, power }.into())
    }

    pub fn ridge(inner: ScalarField, direction: Vec<f64>, offset: f64) -> Result<Self> {
        if inner.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: inner.dim() });
        }
        Ok(Composite::Ridge { inner: Box::new(inner), direction, offset }.into())
    }

    /// Adds a constant, folding into the polynomial when possible.
    pub fn plus_constant(self, c: f64) -> Self {
        let n = self.dim();
        match self {
            ScalarField::Polynomial(p) => p.add(&Polynomial::constant(n, c)).into(),
            other => Composite::Sum {
                terms: vec![other, Polynomial::constant(n, c).into()],
            }
            .into(),
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            ScalarField::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarField::Polynomial(p) => p.dim,
            ScalarField::Composite(c) => match c {
                Composite::Sum { terms } | Composite::Max { terms } => terms[0].dim(),
                Composite::Product { factors } => factors[0].dim(),
                Composite::Scaled { inner, .. }
                | Composite::Exp { inner }
                | Composite::Power { inner, .. }
                | Composite::ExpConvexified { inner, .. } => inner.dim(),
                Composite::FlatSide { dim, .. } => *dim,
                Composite::Ridge { direction, .. } => direction.len(),
                Composite::AffinePullback { shift, .. } => shift.len(),
                Composite::NegLogDistance(k) => k.kernel_dim(),
                Composite::MinkowskiGaugeMinusOne(k) => k.kernel_dim(),
                Composite::Mollified(k) => k.kernel_dim(),
                Composite::ImplicitGraph(k) => k.kernel_dim(),
            },
        }
    }

    /// Declared differentiability class (SMOOTH for C^infinity).
    pub fn class(&self) -> u32 {
        match self {
            ScalarField::Polynomial(_) => SMOOTH,
            ScalarField::Composite(c) => match c {
                Composite::Sum { terms } => terms.iter().map(|t| t.class()).min().unwrap_or(SMOOTH),
                Composite::Product { factors } => {
                    factors.iter().map(|t| t.class()).min().unwrap_or(SMOOTH)
                }
                Composite::Scaled { inner, .. }
                | Composite::Exp { inner }
                | Composite::Power { inner, .. }
                | Composite::ExpConvexified { inner, .. }
                | Composite::Ridge { inner, .. }
                | Composite::AffinePullback { inner, .. } => inner.class(),
                Composite::Max { .. } => 0,
                Composite::FlatSide { power, .. } => power - 1,
                Composite::NegLogDistance(k) => k.kernel_class(),
                Composite::MinkowskiGaugeMinusOne(k) => k.kernel_class(),
                Composite::Mollified(k) => k.kernel_class(),
                Composite::ImplicitGraph(k) => k.kernel_class(),
            },
        }
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value(x.as_slice()))
    }

    pub fn gradient(&self, x: &Point) -> Result<Vector> {
        self.check_dim(x)?;
        if self.class() < 1 {
            return Err(Error::NotDifferentiable { class: self.class(), needed: 1 });
        }
        Ok(self.grad(x.as_slice()))
    }

    pub fn hessian(&self, x: &Point) -> Result<Matrix> {
        self.check_dim(x)?;
        if self.class() < 2 {
            return Err(Error::NotDifferentiable { class: self.class(), needed: 2 });
        }
        Ok(self.hess(x.as_slice()))
    }

    /// Value without dimension checks.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Polynomial(p) => p.eval(x),
            _ => self.jet(x, 0).v,
        }
    }

    /// Gradient without dimension or class checks.
    pub fn grad(&self, x: &[f64]) -> Vector {
        match self {
            ScalarField::Polynomial(p) => p.gradient(x),
            _ => self.jet(x, 1).g.expect("gradient"),
        }
    }

    /// Hessian without dimension or class checks.
    pub fn hess(&self, x: &[f64]) -> Matrix {
        match self {
            ScalarField::Polynomial(p) => p.hessian(x),
            _ => self.jet(x, 2).h.expect("hessian"),
        }
    }

    /// Round-off scale of `value` at x: the absolute monomial sum for
    /// polynomials, 1 otherwise.
    pub fn roundoff_scale(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Polynomial(p) => p.abs_eval(x).max(1e-300),
            _ => 1.0,
        }
    }

    pub fn jet(&self, x: &[f64], order: u8) -> Jet {
        let n = x.len();
        let c = match self {
            ScalarField::Polynomial(p) => {
                return Jet {
                    v: p.eval(x),
                    g: (order >= 1).then(|| p.gradient(x)),
                    h: (order >= 2).then(|| p.hessian(x)),
                };
            }
            ScalarField::Composite(c) => c,
        };
        match c {
            Composite::Sum { terms } => {
                let mut out = Jet {
                    v: 0.0,
                    g: (order >= 1).then(|| Vector::zeros(n)),
                    h: (order >= 2).then(|| Matrix::zeros(n, n)),
                };
                for t in terms {
                    let j = t.jet(x, order);
                    out.v += j.v;
                    if let Some(g) = out.g.as_mut() {
                        *g += j.grad();
                    }
                    if let Some(h) = out.h.as_mut() {
                        *h += j.hess();
                    }
                }
                out
            }
            Composite::Product { factors } => {
                let mut acc = factors[0].jet(x, order);
                for f in &factors[1..] {
                    let b = f.jet(x, order);
                    let h = (order >= 2).then(|| {
                        let (ga, gb) = (acc.grad(), b.grad());
                        acc.hess() * b.v
                            + b.hess() * acc.v
                            + ga * gb.transpose()
                            + gb * ga.transpose()
                    });
                    let g = (order >= 1).then(|| acc.grad() * b.v + b.grad() * acc.v);
                    acc = Jet { v: acc.v * b.v, g, h };
                }
                acc
            }
            Composite::Scaled { factor, inner } => {
                let j = inner.jet(x, order);
                Jet { v: j.v * factor, g: j.g.map(|g| g * *factor), h: j.h.map(|h| h * *factor) }
            }
            Composite::Exp { inner } => {
                let j = inner.jet(x, order);
                let e = j.v.exp();
                let h = (order >= 2).then(|| (j.hess() + j.grad() * j.grad().transpose()) * e);
                Jet { v: e, g: j.g.map(|g| g * e), h }
            }
            Composite::Power { inner, exponent } => {
                let j = inner.jet(x, order);
                let p = *exponent;
                let f = j.v;
                if f < 0.0 {
                    return nan_jet(n, order);
                }
                let d1 = p * f.powf(p - 1.0);
                let h = (order >= 2).then(|| {
                    let d2 = p * (p - 1.0) * f.powf(p - 2.0);
                    j.hess() * d1 + j.grad() * j.grad().transpose() * d2
                });
                Jet { v: f.powf(p), g: j.g.as_ref().map(|g| g * d1), h }
            }
            Composite::Max { terms } => {
                let v = terms.iter().map(|t| t.value(x)).fold(f64::NEG_INFINITY, f64::max);
                if order == 0 {
                    Jet { v, g: None, h: None }
                } else {
                    fd_jet(|y| self.value(y), x, order)
                }
            }
            Composite::FlatSide { axis, half_width, power, .. } => {
                let a = *axis;
                let s = x[a].abs() - half_width;
                let mut out = Jet {
                    v: 0.0,
                    g: (order >= 1).then(|| Vector::zeros(n)),
                    h: (order >= 2).then(|| Matrix::zeros(n, n)),
                };
                if s > 0.0 {
                    let p = *power as i32;
                    out.v = s.powi(p);
                    if let Some(g) = out.g.as_mut() {
                        g[a] = p as f64 * s.powi(p - 1) * x[a].signum();
                    }
                    if let Some(h) = out.h.as_mut() {
                        h[(a, a)] = if p >= 2 { (p * (p - 1)) as f64 * s.powi(p - 2) } else { 0.0 };
                    }
                }
                out
            }
            Composite::Ridge { inner, direction, offset } => {
                let d = Vector::from_column_slice(direction);
                let y = d.dot(&Vector::from_column_slice(x)) - offset;
                let j = inner.jet(&[y], order);
                let g = j.g.as_ref().map(|g| &d * g[0]);
                let h = j.h.as_ref().map(|h| &d * d.transpose() * h[(0, 0)]);
                Jet { v: j.v, g, h }
            }
            Composite::ExpConvexified { inner, lambda } => {
                let l = *lambda;
                let j = inner.jet(x, order);
                let e = (l * j.v).exp();
                let h = (order >= 2).then(|| (j.hess() + j.grad() * j.grad().transpose() * l) * e);
                Jet { v: (l * j.v).exp_m1() / l, g: j.g.as_ref().map(|g| g * e), h }
            }
            Composite::AffinePullback { inner, a_inv, shift } => {
                let ai = Matrix::from_fn(n, n, |r, c| a_inv[r][c]);
                let y = &ai * (Vector::from_column_slice(x) - Vector::from_column_slice(shift));
                let j = inner.jet(y.as_slice(), order);
                let g = j.g.as_ref().map(|g| ai.transpose() * g);
                let h = j.h.as_ref().map(|h| ai.transpose() * h * &ai);
                Jet { v: j.v, g, h }
            }
            Composite::NegLogDistance(k) => k.kernel_jet(x, order),
            Composite::MinkowskiGaugeMinusOne(k) => k.kernel_jet(x, order),
            Composite::Mollified(k) => k.kernel_jet(x, order),
            Composite::ImplicitGraph(k) => k.kernel_jet(x, order),
        }
    }
}

fn nan_jet(n: usize, order: u8) -> Jet {
    Jet {
        v: f64::NAN,
        g: (order >= 1).then(|| Vector::from_element(n, f64::NAN)),
        h: (order >= 2).then(|| Matrix::from_element(n, n, f64::NAN)),
    }
}

fn step_scale(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
}

/// Central-difference gradient, step max(1,|x|)·eps^(1/3).
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vector {
    let h = step_scale(x) * f64::EPSILON.cbrt();
    let mut y = x.to_vec();
    Vector::from_fn(x.len(), |j, _| {
        y[j] = x[j] + h;
        let fp = f(&y);
        y[j] = x[j] - h;
        let fm = f(&y);
        y[j] = x[j];
        (fp - fm) / (2.0 * h)
    })
}

/// Second-order central-difference Hessian, step max(1,|x|)·eps^(1/4).
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Matrix {
    let n = x.len();
    let h = step_scale(x) * f64::EPSILON.powf(0.25);
    let f0 = f(x);
    let mut y = x.to_vec();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        y[j] = x[j] + h;
        let fp = f(&y);
        y[j] = x[j] - h;
        let fm = f(&y);
        y[j] = x[j];
        m[(j, j)] = (fp - 2.0 * f0 + fm) / (h * h);
        for k in (j + 1)..n {
            let mut q = |sj: f64, sk: f64| {
                y[j] = x[j] + sj * h;
                y[k] = x[k] + sk * h;
                let v = f(&y);
                y[j] = x[j];
                y[k] = x[k];
                v
            };
            let v = (q(1.0, 1.0) - q(1.0, -1.0) - q(-1.0, 1.0) + q(-1.0, -1.0)) / (4.0 * h * h);
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    m
}

/// Hessian by central differences of an analytic gradient, symmetrized.
pub fn fd_hessian_from_gradient(g: impl Fn(&[f64]) -> Vector, x: &[f64]) -> Matrix {
    let n = x.len();
    let h = step_scale(x) * f64::EPSILON.cbrt();
    let mut y = x.to_vec();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        y[j] = x[j] + h;
        let gp = g(&y);
        y[j] = x[j] - h;
        let gm = g(&y);
        y[j] = x[j];
        let col = (gp - gm) / (2.0 * h);
        m.set_column(j, &col);
    }
    (&m + m.transpose()) * 0.5
}

pub(crate) fn fd_jet(f: impl Fn(&[f64]) -> f64, x: &[f64], order: u8) -> Jet {
    Jet {
        v: f(x),
        g: (order >= 1).then(|| fd_gradient(&f, x)),
        h: (order >= 2).then(|| fd_hessian(&f, x)),
    }
}
