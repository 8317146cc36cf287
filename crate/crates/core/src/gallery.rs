//! Named built-in domains.

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::field::{Polynomial, ScalarField};
use crate::hulls::{Polytope, RoundedSquare, Shape};

pub const NAMES: &[&str] = &[
    "ball2",
    "ball3",
    "em:<m>",
    "ellipse",
    "distorted-ball",
    "annulus",
    "square",
    "rounded-square",
    "flatcap",
    "peanut",
    "e3d",
    "cap",
    "cubic",
];

fn poly(dim: usize, terms: &[(f64, &[u32])]) -> Polynomial {
    Polynomial::from_terms(dim, terms).expect("well-formed gallery polynomial")
}

fn sq(v: f64) -> Vec<f64> {
    vec![v, v]
}

/// x1^2 + x2^(2m) - 1
pub fn em(m: u32) -> Result<DomainSpec> {
    if m == 0 {
        return Err(Error::UnknownDomain("em:0".into()));
    }
    let p = poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 2 * m]), (-1.0, &[0, 0])]);
    Ok(DomainSpec::polynomial(&format!("em:{m}"), p, sq(-1.5), sq(1.5))?.with_anchor(vec![0.0, 0.0]))
}

pub fn ball(dim: usize) -> DomainSpec {
    let p = Polynomial::norm_squared(dim).add(&Polynomial::constant(dim, -1.0));
    DomainSpec::polynomial(&format!("ball{dim}"), p, vec![-1.5; dim], vec![1.5; dim])
        .expect("valid box")
        .with_anchor(vec![0.0; dim])
}

/// The domain of a gallery entry, for entries defined by a function.
pub fn domain(name: &str) -> Result<DomainSpec> {
    match shape(name)? {
        Shape::Domain(d) => Ok(d),
        _ => Err(Error::InvalidInput(format!("{name} is not given by a defining function"))),
    }
}

pub fn shape(name: &str) -> Result<Shape> {
    if let Some(m) = name.strip_prefix("em:") {
        let m: u32 = m.parse().map_err(|_| Error::UnknownDomain(name.into()))?;
        return Ok(Shape::Domain(em(m)?));
    }
    let d = match name {
        "ball2" => ball(2),
        "ball3" => ball(3),
        "ellipse" => {
            let p = poly(2, &[(0.25, &[2, 0]), (1.0, &[0, 2]), (-1.0, &[0, 0])]);
            DomainSpec::polynomial(name, p, vec![-2.5, -1.5], vec![2.5, 1.5])?.with_anchor(vec![0.0, 0.0])
        }
        "distorted-ball" => {
            let f = poly(2, &[(2.0, &[0, 0]), (1.0, &[1, 0])]);
            let g = Polynomial::norm_squared(2).add(&Polynomial::constant(2, -1.0));
            DomainSpec::polynomial(name, f.mul(&g), sq(-1.5), sq(1.5))?.with_anchor(vec![0.0, 0.0])
        }
        "annulus" => {
            let outer = Polynomial::norm_squared(2).add(&Polynomial::constant(2, -4.0));
            let inner = poly(2, &[(1.0, &[2, 0]), (-2.0, &[1, 0]), (1.0, &[0, 2])]);
            DomainSpec::polynomial(name, outer.mul(&inner), sq(-2.5), sq(2.5))?.with_anchor(vec![1.0, 1.5])
        }
        "square" => return Ok(Shape::Polytope(Polytope::square(1.0))),
        "rounded-square" => return Ok(Shape::RoundedSquare(RoundedSquare::new(1.0, 0.25)?)),
        "flatcap" => {
            let rho = ScalarField::sum(vec![
                poly(2, &[(1.0, &[0, 2]), (-1.0, &[0, 0])]).into(),
                ScalarField::flat_side(2, 0, 0.25, 4)?,
            ])?;
            DomainSpec::new(name, rho, vec![-1.75, -1.5], vec![1.75, 1.5], 3)?.with_anchor(vec![0.0, 0.0])
        }
        "peanut" => {
            let p = poly(2, &[(1.0, &[0, 2]), (-1.0, &[2, 0]), (1.0, &[4, 0]), (-0.05, &[0, 0])]);
            DomainSpec::polynomial(name, p, vec![-1.5, -1.0], vec![1.5, 1.0])?.with_anchor(vec![0.0, 0.0])
        }
        "e3d" => {
            let p = poly(3, &[(1.0, &[2, 0, 0]), (1.0, &[0, 4, 0]), (1.0, &[0, 0, 4]), (-1.0, &[0, 0, 0])]);
            DomainSpec::polynomial(name, p, vec![-1.5; 3], vec![1.5; 3])?.with_anchor(vec![0.0; 3])
        }
        "cap" => {
            // x1^4 + (x2 - x1^2)^2 - 1
            let p = poly(2, &[(2.0, &[4, 0]), (1.0, &[0, 2]), (-2.0, &[2, 1]), (-1.0, &[0, 0])]);
            DomainSpec::polynomial(name, p, vec![-1.5, -1.5], vec![1.5, 2.5])?.with_anchor(vec![0.0, 0.5])
        }
        "cubic" => {
            let p = poly(2, &[(1.0, &[0, 1]), (-1.0, &[3, 0]), (1.0, &[4, 0]), (1.0, &[0, 4])]);
            DomainSpec::polynomial(name, p, sq(-1.5), sq(1.5))?.with_anchor(vec![0.0, -0.5])
        }
        _ => return Err(Error::UnknownDomain(name.into())),
    };
    Ok(Shape::Domain(d))
}
