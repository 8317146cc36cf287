//! Convexity analysis of domains given by defining functions.

pub mod bump;
pub mod convexity;
pub mod domain;
pub mod error;
pub mod exhaust;
pub mod field;
pub mod gallery;
pub mod hulls;
pub mod order;
pub mod seq;

pub use domain::{BoundaryPoint, DomainSpec, Region};
pub use error::{Error, Result};
pub use field::{Composite, Matrix, Monomial, Point, Polynomial, ScalarField, Vector};
