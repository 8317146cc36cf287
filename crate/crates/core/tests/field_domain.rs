use approx::assert_abs_diff_eq;
use convexlab::exhaust::BoundaryDistance;
use convexlab::gallery;
use convexlab::{DomainSpec, Point, Polynomial, ScalarField, Vector};

fn pt(x: &[f64]) -> Point {
    Point::from_vec(x.to_vec())
}

fn em2() -> ScalarField {
    gallery::em(2).unwrap().rho().clone()
}

#[test]
fn eval_examples() {
    assert_eq!(em2().eval(&pt(&[1.0, 0.0])).unwrap(), 0.0);
    assert_eq!(gallery::ball(2).rho().eval(&pt(&[0.0, 0.0])).unwrap(), -1.0);
    let db = gallery::domain("distorted-ball").unwrap();
    assert_eq!(db.rho().eval(&pt(&[0.0, 1.0])).unwrap(), 0.0);
}

#[test]
fn eval_rejects_wrong_dimension() {
    assert!(em2().eval(&pt(&[1.0, 0.0, 0.0])).is_err());
}

#[test]
fn gradient_examples() {
    let g = gallery::ball(2).rho().gradient(&pt(&[1.0, 0.0])).unwrap();
    assert_eq!(g.as_slice(), &[2.0, 0.0]);
    let g = em2().gradient(&pt(&[0.0, 1.0])).unwrap();
    assert_eq!(g.as_slice(), &[0.0, 4.0]);
}

#[test]
fn neg_log_distance_gradient_matches_radial_formula() {
    // -log(1 - r) has radial derivative 1 / (1 - r)
    let f = BoundaryDistance::new(&gallery::ball(2)).into_field();
    for r in [0.1, 0.3, 0.5, 0.8] {
        let g = f.gradient(&pt(&[r, 0.0])).unwrap();
        assert_abs_diff_eq!(g[0], 1.0 / (1.0 - r), epsilon = 1e-6);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.value(&[r, 0.0]), -(1.0 - r).ln(), epsilon = 1e-9);
    }
}

#[test]
fn hessian_examples() {
    let h = gallery::ball(2).rho().hessian(&pt(&[0.3, -0.2])).unwrap();
    assert_eq!(h, convexlab::Matrix::identity(2, 2) * 2.0);
    let h = em2().hessian(&pt(&[1.0, 0.0])).unwrap();
    assert_eq!(h.as_slice(), &[2.0, 0.0, 0.0, 0.0]);
    let h = em2().hessian(&pt(&[0.0, 1.0])).unwrap();
    assert_eq!(h.as_slice(), &[2.0, 0.0, 0.0, 12.0]);
}

#[test]
fn composite_derivatives_agree_with_finite_differences() {
    let db = gallery::domain("distorted-ball").unwrap();
    let f = ScalarField::sum(vec![db.rho().clone().exp(), em2().scaled(0.5)]).unwrap();
    for x in [[0.2, 0.1], [-0.4, 0.7], [0.9, -0.3]] {
        let g = f.grad(&x);
        let h = f.hess(&x);
        let gf = convexlab::field::fd_gradient(|y| f.value(y), &x);
        let hf = convexlab::field::fd_hessian(|y| f.value(y), &x);
        assert!((g - gf).norm() < 1e-6);
        assert!((h - hf).norm() < 1e-4);
    }
}

#[test]
fn polynomial_json_round_trip_is_bit_exact() {
    let p = Polynomial::from_terms(2, &[(0.1, &[2, 0]), (1.0 / 3.0, &[0, 4]), (-std::f64::consts::PI, &[1, 1])]).unwrap();
    let s = serde_json::to_string(&p).unwrap();
    let q: Polynomial = serde_json::from_str(&s).unwrap();
    assert_eq!(p, q);
    for (a, b) in p.monomials().iter().zip(q.monomials()) {
        assert_eq!(a.coef.to_bits(), b.coef.to_bits());
    }
    assert_eq!(s, serde_json::to_string(&q).unwrap());
}

#[test]
fn domain_json_round_trip() {
    for name in ["ball2", "annulus", "flatcap", "e3d"] {
        let d = gallery::domain(name).unwrap();
        let e = DomainSpec::from_json(&d.to_json()).unwrap();
        assert_eq!(d.to_json(), e.to_json());
        for x in [[0.3, 0.2], [1.1, -0.4]] {
            let x: Vec<f64> = x.iter().copied().chain(std::iter::repeat(0.1)).take(d.dim()).collect();
            assert_eq!(d.value(&x).to_bits(), e.value(&x).to_bits());
        }
    }
}

#[test]
fn projection_examples() {
    let b = gallery::ball(2);
    let p = b.project_to_boundary(&pt(&[0.0, 0.0]), &Vector::from_vec(vec![1.0, 0.0])).unwrap();
    assert_abs_diff_eq!(p.location[0], 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(p.normal[0], 1.0, epsilon = 1e-10);
    let e = gallery::em(2).unwrap();
    let p = e.project_to_boundary(&pt(&[0.0, 0.0]), &Vector::from_vec(vec![0.0, 1.0])).unwrap();
    assert_abs_diff_eq!(p.location[1], 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(p.normal[1], 1.0, epsilon = 1e-10);
}

#[test]
fn projection_hits_the_inner_annulus_circle() {
    // from (-1, 0) along +x the first crossing is the removed disk at the origin
    let a = gallery::domain("annulus").unwrap();
    let p = a.project_to_boundary(&pt(&[-1.0, 0.0]), &Vector::from_vec(vec![1.0, 0.0])).unwrap();
    assert_abs_diff_eq!(p.location[0], 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(p.location[1], 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(p.normal[0], 1.0, epsilon = 1e-9);
}

#[test]
fn tangent_bases() {
    let b = gallery::ball(2).tangent_basis(&pt(&[1.0, 0.0])).unwrap();
    assert_eq!(b.tangent_basis.len(), 1);
    assert_abs_diff_eq!(b.tangent_basis[0][1].abs(), 1.0, epsilon = 1e-12);
    let b3 = gallery::ball(3).tangent_basis(&pt(&[0.0, 0.0, 1.0])).unwrap();
    assert_eq!(b3.tangent_basis.len(), 2);
    for (i, u) in b3.tangent_basis.iter().enumerate() {
        assert!(u[2].abs() < 1e-12);
        for (j, v) in b3.tangent_basis.iter().enumerate() {
            assert_abs_diff_eq!(u.dot(v), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
        }
    }
    let e = gallery::em(2).unwrap().tangent_basis(&pt(&[1.0, 0.0])).unwrap();
    assert_abs_diff_eq!(e.tangent_basis[0][1].abs(), 1.0, epsilon = 1e-12);
    assert!(gallery::ball(2).tangent_basis(&pt(&[0.5, 0.0])).is_err());
}

#[test]
fn boundary_samples() {
    let e = gallery::em(2).unwrap();
    let s = e.sample_boundary(100, 0).unwrap();
    assert_eq!(s.len(), 100);
    for p in &s {
        assert!(e.value(p.location.as_slice()).abs() <= e.boundary_tol());
        let n = &p.normal;
        assert!(e.value((&p.location - n * 1e-4).as_slice()) < 0.0);
        assert!(e.value((&p.location + n * 1e-4).as_slice()) > 0.0);
        for t in &p.tangent_basis {
            assert!(p.gradient.dot(t).abs() <= 1e-8);
        }
    }
    assert_eq!(s, e.sample_boundary(100, 0).unwrap());
}

#[test]
fn annulus_samples_reach_both_circles() {
    let a = gallery::domain("annulus").unwrap();
    let s = a.sample_boundary(200, 0).unwrap();
    let outer = s.iter().filter(|p| (p.location.norm() - 2.0).abs() < 1e-7).count();
    let inner = s
        .iter()
        .filter(|p| ((p.location[0] - 1.0).hypot(p.location[1]) - 1.0).abs() < 1e-7)
        .count();
    assert_eq!(outer + inner, s.len());
    assert!(outer >= 40 && inner >= 40, "outer {outer} inner {inner}");
}

#[test]
fn multiply_by_h_examples() {
    let b = gallery::ball(2);
    let one: ScalarField = Polynomial::constant(2, 1.0).into();
    let same = b.multiply_by_h(&one).unwrap();
    let h: ScalarField = Polynomial::from_terms(2, &[(2.0, &[0, 0]), (1.0, &[1, 0])]).unwrap().into();
    let bh = b.multiply_by_h(&h).unwrap();
    for x in convexlab::hulls::grid_points(b.lo(), b.hi(), 32) {
        assert_eq!(same.value(&x), b.value(&x));
        assert_eq!(bh.value(&x).signum(), b.value(&x).signum());
    }
    let e = gallery::em(2).unwrap();
    let h2: ScalarField = Polynomial::from_terms(2, &[(1.0, &[0, 0]), (1.0, &[0, 2])]).unwrap().into();
    let eh = e.multiply_by_h(&h2).unwrap();
    // h >= 1, so |rho| <= |h rho|
    for p in eh.sample_boundary(100, 3).unwrap() {
        assert!(e.value(p.location.as_slice()).abs() <= eh.boundary_tol());
    }
    let neg: ScalarField = Polynomial::constant(2, -1.0).into();
    assert!(b.multiply_by_h(&neg).is_err());
}

#[test]
fn tangency_and_normal_are_multiplier_independent() {
    let d = gallery::domain("ellipse").unwrap();
    let pts = d.sample_boundary(50, 0).unwrap();
    for seed in 1..=5 {
        let h: ScalarField = convexlab::convexity::random_positive_multiplier(2, seed).into();
        let dh = d.multiply_by_h(&h).unwrap();
        for p in &pts {
            let g = dh.rho().grad(p.location.as_slice());
            for t in &p.tangent_basis {
                assert!(g.dot(t).abs() <= 1e-6);
            }
            assert!((g.normalize() - &p.normal).norm() <= 1e-8);
        }
    }
}

