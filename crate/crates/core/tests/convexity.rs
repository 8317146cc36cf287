use approx::assert_abs_diff_eq;
use convexlab::convexity::*;
use convexlab::gallery;
use convexlab::{DomainSpec, Matrix, Point, Polynomial, Region, ScalarField, Vector};

fn bp(d: &DomainSpec, x: &[f64]) -> convexlab::BoundaryPoint {
    d.tangent_basis(&Point::from_vec(x.to_vec())).unwrap()
}

fn v(x: &[f64]) -> Vector {
    Vector::from_vec(x.to_vec())
}

#[test]
fn restricted_form_examples() {
    let b = gallery::ball(2);
    assert_abs_diff_eq!(restricted_form(&b, &bp(&b, &[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 2.0, epsilon = 1e-12);
    let e = gallery::em(2).unwrap();
    assert_abs_diff_eq!(restricted_form(&e, &bp(&e, &[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(restricted_form(&e, &bp(&e, &[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap(), 2.0, epsilon = 1e-12);
}

#[test]
fn classify_examples() {
    let b = gallery::ball(2);
    let vb = classify_point(&b, &bp(&b, &[1.0, 0.0])).unwrap();
    assert_eq!(vb.class, ConvexityClass::StronglyConvex);
    assert_abs_diff_eq!(vb.min_tangential_eigenvalue, 2.0, epsilon = 1e-12);
    let e = gallery::em(2).unwrap();
    let ve = classify_point(&e, &bp(&e, &[1.0, 0.0])).unwrap();
    assert_eq!(ve.class, ConvexityClass::WeaklyConvex);
    assert_abs_diff_eq!(ve.min_tangential_eigenvalue, 0.0, epsilon = 1e-12);
}

/// Brute-force chord test: does some chord of boundary-adjacent interior
/// points through a neighbourhood of x leave the domain?
fn chord_leaves(d: &DomainSpec, center: &[f64], radius: f64, chords: usize) -> bool {
    let mut found = false;
    for i in 0..chords {
        let th = std::f64::consts::TAU * i as f64 / chords as f64;
        let r = radius * (0.2 + 0.8 * ((i * 7919) % chords) as f64 / chords as f64);
        let a = [center[0] + r * th.cos(), center[1] + r * th.sin()];
        let b = [center[0] - r * th.cos(), center[1] + r * th.sin()];
        if d.value(&a) < 0.0 && d.value(&b) < 0.0 {
            for k in 1..64 {
                let s = k as f64 / 64.0;
                let m = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                if d.value(&m) > 0.0 {
                    found = true;
                }
            }
        }
    }
    found
}

#[test]
fn peanut_saddle_is_not_convex_and_chords_confirm_it() {
    let d = gallery::domain("peanut").unwrap();
    let p = bp(&d, &[0.0, 0.05f64.sqrt()]);
    let ver = classify_point(&d, &p).unwrap();
    assert_eq!(ver.class, ConvexityClass::NotConvex);
    let w = ver.witness.unwrap();
    assert!(restricted_form(&d, &p, &w).unwrap() < -ver.strict_tol);
    assert!(chord_leaves(&d, &[0.0, 0.05f64.sqrt() - 0.02], 0.2, 10_000));
}

#[test]
fn oracle_examples() {
    assert!(geometric_convexity_oracle(&gallery::ball(2), 1000, 0).unwrap().is_convex());
    assert!(geometric_convexity_oracle(&gallery::em(3).unwrap(), 1000, 0).unwrap().is_convex());
    let a = gallery::domain("annulus").unwrap();
    match geometric_convexity_oracle(&a, 1000, 0).unwrap() {
        OracleVerdict::NotConvex { a: p, b: q, .. } => {
            assert!(a.contains(&p) && a.contains(&q));
            assert!(segment_exit(&a, &p, &q).is_some());
        }
        OracleVerdict::Convex => panic!("annulus judged convex"),
    }
}

#[test]
fn oracle_agrees_with_pointwise_classes_on_the_gallery() {
    for name in ["ball2", "ball3", "ellipse", "em:2", "distorted-ball", "annulus", "peanut", "e3d", "cap", "cubic"] {
        let d = gallery::domain(name).unwrap();
        let oracle = geometric_convexity_oracle(&d, 1000, 0).unwrap().is_convex();
        let pts = d.sample_boundary(200, 0).unwrap();
        let all = classify_all(&d, &pts).unwrap().iter().all(|v| v.class.is_convex());
        assert_eq!(oracle, all, "{name}");
    }
}

#[test]
fn independence_examples() {
    let b = gallery::ball(2);
    let h: ScalarField = Polynomial::from_terms(2, &[(2.0, &[0, 0]), (1.0, &[1, 0])]).unwrap().into();
    let r = defining_function_independence(&b, &h, 50).unwrap();
    assert!(r.disagreements.is_empty());
    for p in &r.points {
        assert_eq!(p.under_rho.class, ConvexityClass::StronglyConvex);
        assert_eq!(p.under_h_rho.class, ConvexityClass::StronglyConvex);
    }
    let e = gallery::em(2).unwrap();
    let h2: ScalarField = Polynomial::from_terms(2, &[(1.0, &[0, 0]), (0.5, &[0, 2])]).unwrap().into();
    let eh = e.multiply_by_h(&h2).unwrap();
    let p = bp(&e, &[1.0, 0.0]);
    assert_eq!(classify_point(&e, &p).unwrap().class, ConvexityClass::WeaklyConvex);
    assert_eq!(classify_point(&eh, &bp(&eh, &[1.0, 0.0])).unwrap().class, ConvexityClass::WeaklyConvex);
    let one: ScalarField = Polynomial::constant(2, 1.0).into();
    for q in defining_function_independence(&e, &one, 20).unwrap().points {
        assert_eq!(q.under_rho.eigenvalues, q.under_h_rho.eigenvalues);
    }
}

#[test]
fn convexify_ball_needs_no_exponent() {
    let r = strong_convexify(&gallery::ball(2), 4096).unwrap();
    assert_eq!(r.lambda, 1.0);
    // e^{rho}(2I + grad grad^T) at |x| = 1 has smallest eigenvalue 2
    assert!(r.certified_c >= 2.0 - 1e-9 || r.boundary_min_eigenvalue >= 2.0 - 1e-9);
    let pts: Vec<Point> = gallery::ball(2).sample_boundary(50, 0).unwrap().into_iter().map(|p| p.location).collect();
    assert_abs_diff_eq!(min_hessian_eigenvalue(&r.rho_tilde, &pts), 2.0, epsilon = 1e-6);
}

#[test]
fn convexify_distorted_ball_and_reject_em2() {
    let d = gallery::domain("distorted-ball").unwrap();
    let r = strong_convexify(&d, 4096).unwrap();
    assert!(r.lambda.is_finite() && r.lambda > 0.0);
    let pts: Vec<Point> = d.sample_boundary(200, 0).unwrap().into_iter().map(|p| p.location).collect();
    assert!(r.certified_c > 0.0);
    assert!(min_hessian_eigenvalue(&r.rho_tilde, &pts) >= r.certified_c - 1e-10);
    assert!(matches!(
        strong_convexify(&gallery::em(2).unwrap(), 4096),
        Err(convexlab::Error::NotStronglyConvex { .. })
    ));
}

#[test]
fn taylor_witness_examples() {
    let b = gallery::ball(2);
    assert!(nonconvexity_witness(&b, &bp(&b, &[1.0, 0.0]), &v(&[0.0, 1.0])).is_err());
    for (name, x) in [("peanut", [0.0, 0.05f64.sqrt()]), ("cap", [0.0, 1.0])] {
        let d = gallery::domain(name).unwrap();
        let p = bp(&d, &x);
        let w = classify_point(&d, &p).unwrap().witness.expect(name);
        let t = nonconvexity_witness(&d, &p, &w).unwrap();
        assert!(t.eps <= 1e-2);
        assert!(d.value(t.q_out.as_slice()) > 0.0);
        assert!(d.value(t.q_in.as_slice()) < 0.0 && d.value(t.q_in_mirror.as_slice()) < 0.0);
        let mid = (&t.q_in + &t.q_in_mirror) * 0.5;
        assert!((mid - &t.q_out).norm() < 1e-12);
    }
}

#[test]
fn inner_approximations() {
    let b = gallery::ball(2);
    let inner = inner_strongly_convex_approx(&b, 0.1, 2).unwrap();
    // |x|^2 - 1 + 0.05 |x|^4
    let want = Polynomial::from_terms(2, &[(1.0, &[2, 0]), (1.0, &[0, 2]), (-1.0, &[0, 0])])
        .unwrap()
        .add(&Polynomial::norm_squared(2).pow(2).scale(0.05));
    for x in convexlab::hulls::grid_points(b.lo(), b.hi(), 40) {
        assert_abs_diff_eq!(inner.value(&x), want.eval(&x), epsilon = 1e-12);
        if inner.contains(&x) {
            assert!(b.contains(&x));
        }
    }
    let e = gallery::em(2).unwrap();
    let ie = inner_strongly_convex_approx(&e, 0.01, 4).unwrap();
    let pts = ie.sample_boundary(100, 0).unwrap();
    assert!(classify_all(&ie, &pts).unwrap().iter().all(|v| v.class == ConvexityClass::StronglyConvex));
    let nest: Vec<DomainSpec> = [1e-1, 1e-2, 1e-3].iter().map(|eps| inner_strongly_convex_approx(&e, *eps, 4).unwrap()).collect();
    for x in interior_points(&e, 10_000, 1) {
        for w in nest.windows(2) {
            if w[0].contains(&x) {
                assert!(w[1].contains(&x));
            }
        }
    }
}

#[test]
fn transforms() {
    let b = gallery::ball(2);
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let rot = Matrix::from_row_slice(2, 2, &[c, -c, c, c]);
    let zero = v(&[0.0, 0.0]);
    let rb = transform_domain(&b, &rot, &zero).unwrap();
    for p in rb.sample_boundary(40, 0).unwrap() {
        let ver = classify_point(&rb, &p).unwrap();
        assert_eq!(ver.class, ConvexityClass::StronglyConvex);
        assert_abs_diff_eq!(ver.min_tangential_eigenvalue, 2.0, epsilon = 1e-8);
    }
    let stretch = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let ell = transform_domain(&b, &stretch, &zero).unwrap();
    let pts = ell.sample_boundary(100, 0).unwrap();
    assert!(classify_all(&ell, &pts).unwrap().iter().all(|v| v.class == ConvexityClass::StronglyConvex));
    let e = gallery::em(2).unwrap();
    let te = transform_domain(&e, &Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]), &zero).unwrap();
    for x in [[1.0, 0.0], [-1.0, 0.0]] {
        assert_eq!(classify_point(&te, &bp(&te, &x)).unwrap().class, ConvexityClass::WeaklyConvex);
    }
    assert!(transform_domain(&b, &Matrix::zeros(2, 2), &zero).is_err());
}

#[test]
fn orthogonal_transform_preserves_spectra() {
    let d = gallery::domain("distorted-ball").unwrap();
    let (s, c) = 0.3f64.sin_cos();
    let q = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let td = transform_domain(&d, &q, &v(&[0.0, 0.0])).unwrap();
    for p in d.sample_boundary(50, 0).unwrap() {
        let y = &q * &p.location;
        let a = classify_point(&d, &p).unwrap();
        let b = classify_point(&td, &bp(&td, y.as_slice())).unwrap();
        for (x, z) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert_abs_diff_eq!(x, z, epsilon = 1e-8);
        }
    }
}

#[test]
fn witnesses_are_sound_wherever_raised() {
    for name in ["peanut", "annulus", "cap", "cubic"] {
        let d = gallery::domain(name).unwrap();
        for p in d.sample_boundary(200, 0).unwrap() {
            let ver = classify_point(&d, &p).unwrap();
            if let Some(w) = ver.witness {
                match nonconvexity_witness(&d, &p, &w) {
                    Ok(t) => assert!(d.value(t.q_out.as_slice()) > 0.0),
                    Err(e) => assert!(matches!(e, convexlab::Error::Inconclusive), "{e}"),
                }
            }
        }
    }
}

#[test]
fn dense_oracle_accepts_convex_gallery_entries() {
    for name in ["ball2", "ball3", "ellipse", "em:1", "em:4", "distorted-ball", "e3d", "flatcap"] {
        let d = gallery::domain(name).unwrap();
        for seed in 0..3 {
            assert!(geometric_convexity_oracle(&d, 5000, seed).unwrap().is_convex(), "{name} seed {seed}");
        }
    }
}
