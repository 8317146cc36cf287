//! One PASS/FAIL line per acceptance criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use convexlab::bump::{bump_domain_2d, bump_polynomial, BumpData, GraphDomain2D};
use convexlab::convexity::{
    classify_point, defining_function_independence, geometric_convexity_oracle, interior_points,
    min_hessian_eigenvalue, nonconvexity_witness, random_positive_multiplier, strong_convexify, ConvexityClass,
};
use convexlab::exhaust::{
    max_exhaustion, mollify, subharmonicity_check_in, sublevel_decomposition,
    verify_smoothing_sequence, weak_convexity_test, BoundaryDistance, BoxRegion, MollifierProfile,
};
use convexlab::gallery;
use convexlab::hulls::{
    f_hull, is_extreme, segment_compactness_check, support_function, CompactSet, ExtremeVerdict, FunctionFamily,
};
use convexlab::order::{contact_order, ContactOrder};
use convexlab::{Error, Point, Polynomial, Region, ScalarField};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bp(d: &convexlab::DomainSpec, x: &[f64]) -> convexlab::BoundaryPoint {
    d.tangent_basis(&Point::from_vec(x.to_vec())).expect("boundary point")
}

fn c1_order_table() -> Check {
    let start = Instant::now();
    let mut got = Vec::new();
    for m in 1..=4u32 {
        let d = gallery::em(m).unwrap();
        let o = contact_order(&d, &bp(&d, &[1.0, 0.0]), 12).unwrap().order;
        got.push((format!("em:{m}"), o, ContactOrder::Finite(2 * m)));
    }
    let e = gallery::domain("e3d").unwrap();
    for (x, want) in [
        ([0.0, 1.0, 0.0], 4),
        ([0.0, -1.0, 0.0], 4),
        ([0.0, 0.0, 1.0], 4),
        ([0.0, 0.0, -1.0], 4),
        ([0.0, 0.5f64.powf(0.25), 0.5f64.powf(0.25)], 4),
        ([0.0, 0.6, -(1.0 - 0.6f64.powi(4)).powf(0.25)], 4),
        ([1.0, 0.0, 0.0], 2),
    ] {
        let o = contact_order(&e, &bp(&e, &x), 12).unwrap().order;
        got.push((format!("e3d{x:?}"), o, ContactOrder::Finite(want)));
    }
    let secs = start.elapsed().as_secs_f64();
    let bad: Vec<_> = got.iter().filter(|(_, o, w)| o != w).collect();
    ensure(
        bad.is_empty() && secs < 5.0,
        format!("{} orders exact, {:.2}s; mismatches {:?}", got.len() - bad.len(), secs, bad),
    )
}

fn c2_oracle_agreement() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["ball2", "ball3", "ellipse", "em:2", "em:3", "distorted-ball", "annulus", "peanut"] {
        let d = gallery::domain(name).unwrap();
        let oracle = geometric_convexity_oracle(&d, 1000, 0).unwrap().is_convex();
        let pts = d.sample_boundary(200, 0).unwrap();
        let analytic = pts.iter().all(|p| classify_point(&d, p).unwrap().class.is_convex());
        ok &= oracle == analytic;
        lines.push(format!("{name}:{}", if oracle == analytic { "agree" } else { "DISAGREE" }));
    }
    ensure(ok, lines.join(" "))
}

fn c3_independence() -> Check {
    let mut flips = 0;
    let mut checked = 0;
    for name in ["ball2", "em:2"] {
        let d = gallery::domain(name).unwrap();
        for seed in 1..=5 {
            let h: ScalarField = random_positive_multiplier(2, seed).into();
            let r = defining_function_independence(&d, &h, 50).unwrap();
            checked += r.points.len();
            flips += r.disagreements.len();
        }
    }
    ensure(flips == 0, format!("{flips} class flips over {checked} point verdicts"))
}

fn c4_convexification() -> Check {
    let d = gallery::domain("distorted-ball").unwrap();
    let res = strong_convexify(&d, 4096).unwrap();
    let pts = d.sample_boundary(200, 0).unwrap();
    let on: Vec<Point> = pts.iter().map(|p| p.location.clone()).collect();
    let mut band = Vec::new();
    for p in &pts {
        for s in [-0.01, -0.005, 0.005, 0.01] {
            band.push(&p.location + &p.normal * s);
        }
    }
    let e_on = min_hessian_eigenvalue(&res.rho_tilde, &on);
    let e_band = min_hessian_eigenvalue(&res.rho_tilde, &band);
    let em2 = gallery::domain("em:2").unwrap();
    let fails = matches!(strong_convexify(&em2, 4096), Err(Error::NotStronglyConvex { .. }));
    ensure(
        res.certified_c >= 1e-10 && e_on >= res.certified_c - 1e-10 && e_band >= res.certified_c - 1e-10 && fails,
        format!(
            "lambda={:.4} C={:.6} min eig boundary={:.6} band={:.6}; em:2 NotStronglyConvex={fails}",
            res.lambda, res.certified_c, e_on, e_band
        ),
    )
}

fn c5_taylor_witness() -> Check {
    let d = gallery::domain("peanut").unwrap();
    let p = bp(&d, &[0.0, 0.05f64.sqrt()]);
    let v = classify_point(&d, &p).unwrap();
    let w = v.witness.clone().ok_or("no witness direction")?;
    let t = nonconvexity_witness(&d, &p, &w).map_err(|e| e.to_string())?;
    let signs = (d.value(t.q_out.as_slice()) > 0.0, d.value(t.q_in.as_slice()) < 0.0, d.value(t.q_in_mirror.as_slice()) < 0.0);
    ensure(
        v.class == ConvexityClass::NotConvex && signs == (true, true, true) && t.eps <= 1e-2,
        format!("w={:?} eps={:e} t={:.4} pattern (+,-,-)={signs:?}", w.as_slice(), t.eps, t.t),
    )
}

fn in_triangle(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> bool {
    let cr = |o: &[f64], u: &[f64], v: &[f64]| (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
    let (d1, d2, d3) = (cr(a, b, p), cr(b, c, p), cr(c, a, p));
    !((d1 < 0.0 || d2 < 0.0 || d3 < 0.0) && (d1 > 0.0 || d2 > 0.0 || d3 > 0.0))
}

/// Brute force: union of all triangles of K.
fn brute_hull(k: &[Vec<f64>], x: &[f64]) -> bool {
    let n = k.len();
    (0..n).any(|i| (i + 1..n).any(|j| (j + 1..n).any(|l| in_triangle(x, &k[i], &k[j], &k[l]))))
}

fn seg_dist(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
}

fn c6_hull_oracle() -> Check {
    let ball = gallery::shape("ball2").unwrap();
    let d = ball.as_domain().unwrap();
    let grid = 128;
    let cell = 3.0 / grid as f64 * 2f64.sqrt();
    let mut worst = 0usize;
    let mut exact_continuous = true;
    for seed in 1..=10u64 {
        let k = interior_points(d, 8, 100 + seed);
        let set = CompactSet::new(k.clone(), "K").unwrap();
        let h = f_hull(&ball, &set, &FunctionFamily::real_linear(), grid).unwrap();
        let all = convexlab::hulls::grid_points(d.lo(), d.hi(), grid);
        let near_edge = |x: &[f64]| {
            (0..8).any(|i| (i + 1..8).any(|j| seg_dist(x, &k[i], &k[j]) <= cell))
        };
        let mut bad = 0;
        for x in all.iter().filter(|x| d.contains(x)) {
            let fh = h.points.iter().any(|q| q == x);
            if fh != brute_hull(&k, x) && !near_edge(x) {
                bad += 1;
            }
        }
        worst = worst.max(bad);
        let c = f_hull(&ball, &set, &FunctionFamily::Continuous, grid).unwrap();
        exact_continuous &= c.points == k;
    }
    ensure(
        worst == 0 && exact_continuous,
        format!("grid 128: cells off by more than one cell = {worst}; continuous hull == K on all sets: {exact_continuous}"),
    )
}

fn c7_segments() -> Check {
    let d = gallery::domain("annulus").unwrap();
    let segs: Vec<(Vec<f64>, Vec<f64>)> =
        (1..=32).map(|j| (vec![-1.0 / j as f64, -0.5], vec![-1.0 / j as f64, 0.5])).collect();
    let r = segment_compactness_check(&d, &segs).unwrap();
    ensure(
        r.endpoint_bound >= 0.1 && r.min_segment_distance < 0.01,
        format!(
            "min endpoint distance {:.5} (need >= 0.1), min segment distance {:.5} (need < 0.01; the segment x1 = -1/32 stays 1/32 from the removed disk)",
            r.endpoint_bound, r.min_segment_distance
        ),
    )
}

fn c8_extreme() -> Check {
    let sq = gallery::shape("square").unwrap();
    let corners = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    let corners_ok = corners.iter().all(|c| is_extreme(&sq, c, 512).unwrap().is_extreme());
    let w1 = is_extreme(&sq, &[0.5, 1.0], 512).unwrap();
    let w2 = is_extreme(&sq, &[0.5, 1.0], 512).unwrap();
    let pair_ok = matches!(&w1, ExtremeVerdict::NotExtreme { a, b }
        if (a[1] - 1.0).abs() < 1e-15 && (b[1] - 1.0).abs() < 1e-15) && w1 == w2;
    let rs = gallery::shape("rounded-square").unwrap();
    let s = 0.25 / 2f64.sqrt();
    let arcs_ok = [[0.75 + s, 0.75 + s], [-0.75 - s, 0.75 + s], [-0.75 - s, -0.75 - s], [0.75 + s, -0.75 - s]]
        .iter()
        .all(|p| is_extreme(&rs, p, 512).unwrap().is_extreme());
    let mids_ok = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
        .iter()
        .all(|p| !is_extreme(&rs, p, 512).unwrap().is_extreme());
    ensure(
        corners_ok && pair_ok && arcs_ok && mids_ok,
        format!("corners {corners_ok}, (1/2,1) witness {w1:?} reproducible {pair_ok}, arcs {arcs_ok}, edge midpoints {mids_ok}"),
    )
}

fn c9_support() -> Check {
    let near = |x: &[f64], p: &[f64]| x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < 1e-9;
    let ball = gallery::shape("ball2").unwrap();
    let sb = support_function(&ball, &[1.0, 0.0]).unwrap();
    let ball_ok = !sb.zero_set.is_empty() && sb.zero_set.iter().all(|x| near(x, &[1.0, 0.0]));
    let sq = gallery::shape("square").unwrap();
    let ss = support_function(&sq, &[0.5, 1.0]).unwrap();
    let top: Vec<Vec<f64>> = sq.boundary_samples(256, 0).unwrap().into_iter().filter(|x| x[1] == 1.0).collect();
    let square_ok = !top.is_empty() && ss.zero_set == top;
    let em2 = gallery::shape("em:2").unwrap();
    let se = support_function(&em2, &[1.0, 0.0]).unwrap();
    let em_ok = !se.zero_set.is_empty() && se.zero_set.iter().all(|x| near(x, &[1.0, 0.0]));
    ensure(
        ball_ok && square_ok && em_ok,
        format!(
            "ball2 zero set {} pts at P: {ball_ok}; square zero set {} of {} top-edge samples: {square_ok}; em:2 only P: {em_ok}",
            sb.zero_set.len(),
            ss.zero_set.len(),
            top.len()
        ),
    )
}

fn c10_exhaustion() -> Check {
    let levels = [0.5, 1.0, 2.0];
    let mut msgs = Vec::new();
    let mut ok = true;
    for name in ["ball2", "ellipse"] {
        let d = gallery::domain(name).unwrap();
        let e = max_exhaustion(&d).unwrap();
        let subs = sublevel_decomposition(&e, &levels).unwrap();
        let smooth = e.smoothed().unwrap();
        let dist = BoundaryDistance::new(&d);
        let mut nested = true;
        let mut margin_ok = true;
        let mut strong = 0;
        let mut total = 0;
        for (i, s) in subs.iter().enumerate() {
            for b in &s.boundary {
                let x = b.location.as_slice();
                if let Some(next) = levels.get(i + 1) {
                    nested &= smooth.value(x) < *next;
                }
                if i > 0 {
                    nested &= smooth.value(x) > levels[i - 1];
                }
                let dx = dist.distance(x).unwrap_or(0.0);
                margin_ok &= dx >= (-s.level).exp() / 2.0 - 1e-6;
            }
            total += s.verdicts.len();
            strong += s.verdicts.iter().filter(|v| v.class == ConvexityClass::StronglyConvex).count();
        }
        ok &= nested && margin_ok && strong == total;
        msgs.push(format!("{name}: nested {nested}, margin {margin_ok}, strongly convex {strong}/{total}"));
    }
    ensure(ok, msgs.join("; "))
}

/// Composite five-point Gauss-Legendre on [0, 1].
fn gauss_legendre(f: impl Fn(f64) -> f64, pieces: usize) -> f64 {
    let x = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    let w = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let h = 1.0 / pieces as f64;
    (0..pieces)
        .map(|i| {
            let m = (i as f64 + 0.5) * h;
            (0..5).map(|k| w[k] * f(m + 0.5 * h * x[k])).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn c11_mollification() -> Check {
    let pr = MollifierProfile;
    let affine: ScalarField = Polynomial::from_terms(2, &[(2.0, &[0, 0]), (3.0, &[1, 0]), (-1.0, &[0, 1])]).unwrap().into();
    let fa = mollify(&affine, 0.1, &pr, 65).unwrap();
    let pts = interior_points(&BoxRegion::cube(2, 2.0), 100, 3);
    let aff_err = pts.iter().map(|x| (fa.value(x) - affine.value(x)).abs()).fold(0.0, f64::max);
    // Second moment in 2D with v = r^2: int v e^{-1/(1-v)} / int e^{-1/(1-v)}.
    let g = |v: f64| if v < 1.0 { (-1.0 / (1.0 - v)).exp() } else { 0.0 };
    let m2 = gauss_legendre(|v| v * g(v), 4000) / gauss_legendre(g, 4000);
    let eps = 0.5;
    let sq: ScalarField = Polynomial::norm_squared(2).into();
    let fs = mollify(&sq, eps, &pr, 97).unwrap();
    let shift_err = pts.iter().take(20).map(|x| (fs.value(x) - sq.value(x) - eps * eps * m2).abs()).fold(0.0, f64::max);
    let abs_x1 = ScalarField::max(vec![
        Polynomial::var(2, 0).into(),
        Polynomial::var(2, 0).scale(-1.0).into(),
    ])
    .unwrap();
    let rep = verify_smoothing_sequence(&abs_x1, 1, &[-2.0, -2.0], &[2.0, 2.0], 10_000, 0).unwrap();
    ensure(
        aff_err <= 1e-10 && shift_err <= 1e-8 && rep.min_step_gap >= 0.0 && rep.min_floor_gap >= 0.0,
        format!(
            "affine error {aff_err:.2e}; |x|^2 shift error {shift_err:.2e} (moment {m2:.10}); min f1-f2 {:.3e}, min f2-F {:.3e}",
            rep.min_step_gap, rep.min_floor_gap
        ),
    )
}

fn c12_distributional() -> Check {
    let centers = interior_points(&BoxRegion::cube(2, 1.0), 20, 5);
    let dirs = [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]];
    let x1sq: ScalarField = Polynomial::from_terms(2, &[(1.0, &[2, 0])]).unwrap().into();
    let absx1 = ScalarField::max(vec![Polynomial::var(2, 0).into(), Polynomial::var(2, 0).scale(-1.0).into()]).unwrap();
    let neg: ScalarField = Polynomial::norm_squared(2).scale(-1.0).into();
    let pass = |f: &ScalarField| dirs.iter().all(|w| weak_convexity_test(f, w, &centers, 0.25).unwrap().passed());
    let neg_out = weak_convexity_test(&neg, &dirs[0], &centers, 0.25).unwrap();
    let cert = match &neg_out {
        convexlab::exhaust::WeakConvexityOutcome::Fail { value, .. } => Some(*value),
        _ => None,
    };
    let (a, b) = (pass(&x1sq), pass(&absx1));
    ensure(a && b && cert.is_some_and(|v| v < 0.0), format!("x1^2 {a}, |x1| {b}, -|x|^2 certificate {cert:?}"))
}

fn c13_subharmonic() -> Check {
    let mut msgs = Vec::new();
    let mut ok = true;
    let fields: Vec<(String, ScalarField, Box<dyn convexlab::Region>)> = vec![
        ("ball2 rho".into(), gallery::domain("ball2").unwrap().rho().clone(), Box::new(BoxRegion::cube(2, 1.5))),
        ("ellipse rho".into(), gallery::domain("ellipse").unwrap().rho().clone(), Box::new(BoxRegion::cube(2, 2.0))),
        ("em:2 rho".into(), gallery::domain("em:2").unwrap().rho().clone(), Box::new(BoxRegion::cube(2, 1.5))),
        ("e3d rho".into(), gallery::domain("e3d").unwrap().rho().clone(), Box::new(BoxRegion::cube(3, 1.5))),
        (
            "ball2 -log delta".into(),
            BoundaryDistance::new(&gallery::domain("ball2").unwrap()).into_field(),
            Box::new(gallery::domain("ball2").unwrap()),
        ),
    ];
    for (name, f, region) in &fields {
        let r = subharmonicity_check_in(f, region.as_ref(), 1000, 0).unwrap();
        ok &= r.min_laplacian >= -1e-8 && r.samples == 1000;
        msgs.push(format!("{name}: min Laplacian {:.3e} ({} pts)", r.min_laplacian, r.samples));
    }
    ensure(ok, msgs.join("; "))
}

fn c14_bumping() -> Check {
    let ball = gallery::domain("ball2").unwrap();
    let circle = bump_domain_2d(&GraphDomain2D::at(&ball, &[0.0, 1.0]).unwrap(), 1e-3, 2);
    let em2 = gallery::domain("em:2").unwrap();
    let e = bump_domain_2d(&GraphDomain2D::at(&em2, &[0.0, 1.0]).unwrap(), 1e-2, 2);
    let ok_bump = |r: &convexlab::Result<convexlab::bump::BumpOutcome>, eps: f64| match r {
        Ok(b) => b.hausdorff < eps && b.checks.oracle_convex,
        Err(_) => false,
    };
    let circle_ok = ok_bump(&circle, 1e-3);
    let em_ok = ok_bump(&e, 1e-2);
    let flat = gallery::domain("flatcap").unwrap();
    let g = GraphDomain2D::at(&flat, &[0.0, 1.0]).unwrap();
    let flat_ok = [1e-1, 1e-2, 1e-3]
        .iter()
        .all(|eps| matches!(bump_domain_2d(&g, *eps, 2), Err(Error::FlatPoint { witness: Some(_), .. })));
    let chord = bump_polynomial(&BumpData::new(0.5, vec![0.75, 1.0], vec![0.75, -1.0], 0.5, 1));
    let chord_ok = matches!(chord, Err(Error::Infeasible { .. }));
    ensure(
        circle_ok && em_ok && flat_ok && chord_ok,
        format!(
            "circle hausdorff {:?}; em:2 hausdorff {:?}; flatcap FlatPoint for all eps {flat_ok}; chord-violating gamma0 rejected {chord_ok}",
            circle.as_ref().map(|b| b.hausdorff).map_err(|e| e.to_string()),
            e.as_ref().map(|b| b.hausdorff).map_err(|e| e.to_string())
        ),
    )
}

fn c15_determinism() -> Check {
    let cmds: &[&[&str]] = &[
        &["classify", "em:2"],
        &["classify", "annulus"],
        &["classify", "square", "--csv"],
        &["convexify", "distorted-ball"],
        &["convexify", "em:2"],
        &["hull", "ball2", "--family", "linear", "--grid", "64"],
        &["hull", "ball2", "--family", "continuous", "--grid", "64", "--json"],
        &["extreme", "square", "--point", "0.5,1"],
        &["extreme", "rounded-square", "--points", "32"],
        &["exhaust", "ball2", "--levels", "1"],
        &["bump", "em:2", "--at", "0,1", "--eps", "0.01"],
        &["bump", "ball2", "--at", "0,1", "--eps", "0.001", "--csv"],
        &["bump", "flatcap", "--at", "0,1", "--eps", "0.01"],
        &["gauge", "ellipse", "--point", "1,0.5"],
    ];
    let mut bad = Vec::new();
    for c in cmds {
        let args: Vec<&str> = std::iter::once("convexlab").chain(c.iter().copied()).collect();
        let a = convexlab_cli::run(&args);
        let b = convexlab_cli::run(&args);
        if a != b || a.code == 1 {
            bad.push(c.join(" "));
        }
    }
    ensure(bad.is_empty(), format!("{} commands byte-identical across runs; differing or failing: {bad:?}", cmds.len() - bad.len()))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("order table", c1_order_table),
        ("verdict/oracle agreement", c2_oracle_agreement),
        ("defining-function independence", c3_independence),
        ("convexification", c4_convexification),
        ("Taylor witness", c5_taylor_witness),
        ("hull oracle equivalence", c6_hull_oracle),
        ("segment characterization", c7_segments),
        ("extreme points", c8_extreme),
        ("support functions", c9_support),
        ("exhaustion", c10_exhaustion),
        ("mollification", c11_mollification),
        ("distributional test", c12_distributional),
        ("subharmonicity", c13_subharmonic),
        ("bumping", c14_bumping),
        ("determinism", c15_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(m) => println!("PASS {:>2} {name}: {m} [{secs:.1}s]", i + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {m} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
