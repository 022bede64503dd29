use super::catalog::*;
use super::*;
use crate::expr::parse;
use crate::sampling::{random_vector, Sampler};

fn golden() -> MetallicParams {
    MetallicParams::golden()
}

fn pt(chart: &ChartManifold, x: &[f64]) -> PointSample {
    chart.point(x).unwrap()
}

fn e(i: usize, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
}

#[test]
fn metric_examples() {
    let p = golden();
    let flat = euclidean(2);
    assert_eq!(metric_at(&flat, &pt(&flat, &[0.3, -0.2]), &p).unwrap(), DMatrix::identity(2, 2));
    let polar = polar_plane();
    let g = metric_at(&polar, &pt(&polar, &[2.0, 1.0]), &p).unwrap();
    assert_eq!(g, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]));
    let ex = ChartManifold::parse(
        "example",
        &["u", "a1", "a2"],
        &[(0.5, 2.0), (0.1, 1.4), (0.1, 1.4)],
        &[&["2", "0", "0"], &["0", "u^2", "0"], &["0", "0", "u^2"]],
    )
    .unwrap();
    let g = metric_at(&ex, &pt(&ex, &[1.0, 0.5, 0.5]), &p).unwrap();
    assert_eq!(g, DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 1.0, 1.0])));
}

#[test]
fn degenerate_metrics_are_rejected() {
    let p = golden();
    let bad = ChartManifold::parse("bad", &["u"], &[(-1.0, 1.0)], &[&["u"]]).unwrap();
    assert!(matches!(
        metric_at(&bad, &pt(&bad, &[-0.5]), &p),
        Err(GeometryError::NotPositiveDefinite { .. })
    ));
    let asym = ChartManifold::parse("asym", &["u", "v"], &[(-1.0, 1.0); 2], &[&["1", "u"], &["0", "1"]]).unwrap();
    assert!(matches!(
        LocalGeometry::at(&asym, &pt(&asym, &[0.5, 0.0]), &p),
        Err(GeometryError::NonSymmetric { .. })
    ));
    assert!(ChartManifold::parse("foreign", &["u"], &[(0.0, 1.0)], &[&["v"]]).is_err());
    assert!(matches!(
        ChartManifold::parse("empty", &["u"], &[(1.0, 1.0)], &[&["1"]]),
        Err(GeometryError::EmptyDomain { .. })
    ));
    assert!(polar_plane().point(&[0.0, 1.0]).is_err());
}

#[test]
fn christoffel_examples() {
    let p = golden();
    let flat = euclidean(3);
    let gam = christoffel_at(&flat, &pt(&flat, &[0.1, 0.2, 0.3]), &p).unwrap();
    assert!(gam.data.iter().all(|v| *v == 0.0));

    let polar = polar_plane();
    let u = 1.7;
    let gam = christoffel_at(&polar, &pt(&polar, &[u, 0.4]), &p).unwrap();
    assert!((gam.get(0, 1, 1) + u).abs() < 1e-14);
    assert!((gam.get(1, 0, 1) - 1.0 / u).abs() < 1e-14);
    assert!((gam.get(1, 1, 0) - 1.0 / u).abs() < 1e-14);
    for (k, i, j) in [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)] {
        assert_eq!(gam.get(k, i, j), 0.0);
    }

    let sphere = unit_sphere();
    let th: f64 = 0.9;
    let gam = christoffel_at(&sphere, &pt(&sphere, &[th, 1.0]), &p).unwrap();
    assert!((gam.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-14);
}

#[test]
fn curvature_examples() {
    let p = golden();
    let flat = euclidean(3);
    let r = riemann_at(&flat, &pt(&flat, &[0.0, 0.5, -0.5]), &p).unwrap();
    assert!(r.data.iter().all(|v| *v == 0.0));

    let polar = polar_plane();
    let r = riemann_at(&polar, &pt(&polar, &[1.3, 2.0]), &p).unwrap();
    assert!(r.data.iter().all(|v| v.abs() <= 1e-9));

    let sphere = unit_sphere();
    let th: f64 = 1.1;
    let x = pt(&sphere, &[th, 0.5]);
    let geom = LocalGeometry::at(&sphere, &x, &p).unwrap();
    let r = geom.riemann();
    let k = r.sectional(&geom.metric, &e(0, 2), &e(1, 2));
    assert!((k - 1.0).abs() <= 1e-9, "K = {k}");
    // g(R(d_th, d_ph) d_th, d_ph) = K |d_th ^ d_ph|^2 = sin^2
    let low = r.lowered(&geom.metric, &e(0, 2), &e(1, 2), &e(0, 2), &e(1, 2));
    assert!((low - th.sin().powi(2)).abs() <= 1e-9);
    let s = r.ricci();
    assert!((s - &geom.metric).abs().max() <= 1e-9);

    let hyp = hyperbolic_plane();
    for x in [[-0.5, 0.0], [0.3, 0.7]] {
        let geom = LocalGeometry::at(&hyp, &pt(&hyp, &x), &p).unwrap();
        let s = geom.riemann().ricci();
        assert!((s + &geom.metric).abs().max() <= 1e-8);
    }
}

#[test]
fn gradient_and_hessian_examples() {
    let p = golden();
    let line = ChartManifold::parse("line", &["u"], &[(-2.0, 2.0)], &[&["1"]]).unwrap();
    let x = pt(&line, &[0.7]);
    let (grad, n2) = gradient_at(&line, &parse("u").unwrap(), &x, &p).unwrap();
    assert_eq!((grad.components[0], n2), (1.0, 1.0));
    let (h, lap) = hessian_at(&line, &parse("u^2").unwrap(), &x, &p).unwrap();
    assert_eq!((h[(0, 0)], lap), (2.0, 2.0));
    let (grad, _) = gradient_at(&line, &parse("3").unwrap(), &x, &p).unwrap();
    assert_eq!(grad.components[0], 0.0);

    let base = ChartManifold::parse("base", &["u"], &[(0.5, 2.0)], &[&["3"]]).unwrap();
    let (grad, n2) = gradient_at(&base, &parse("u").unwrap(), &pt(&base, &[1.0]), &p).unwrap();
    assert!((grad.components[0] - 1.0 / 3.0).abs() < 1e-15 && (n2 - 1.0 / 3.0).abs() < 1e-15);

    let polar = polar_plane();
    let u = 1.25;
    let (h, lap) = hessian_at(&polar, &parse("u").unwrap(), &pt(&polar, &[u, 3.0]), &p).unwrap();
    assert!((h[(1, 1)] - u).abs() < 1e-14 && h[(0, 0)] == 0.0 && h[(0, 1)] == 0.0);
    assert!((lap - 1.0 / u).abs() < 1e-14);

    let flat = euclidean(2);
    let (h, _) = hessian_at(&flat, &parse("2*x1 - 3*x2 + 1").unwrap(), &pt(&flat, &[0.1, 0.1]), &p).unwrap();
    assert!(h.iter().all(|v| *v == 0.0));
}

#[test]
fn hessian_is_coordinate_invariant() {
    // phi = x^2 + 3 y on the plane, in Cartesian and in polar coordinates.
    let p = golden();
    let cart = euclidean(2);
    let polar = polar_plane();
    let phi_c = parse("x1^2 + 3*x2").unwrap();
    let phi_p = parse("(u*cos(a))^2 + 3*u*sin(a)").unwrap();
    let (u, a): (f64, f64) = (0.9, 0.6);
    let (hc, lc) = hessian_at(&cart, &phi_c, &pt(&cart, &[u * a.cos(), u * a.sin()]), &p).unwrap();
    let (hp, lp) = hessian_at(&polar, &phi_p, &pt(&polar, &[u, a]), &p).unwrap();
    // Jacobian d(x, y)/d(u, a)
    let jac = DMatrix::from_row_slice(2, 2, &[a.cos(), -u * a.sin(), a.sin(), u * a.cos()]);
    let pulled = jac.transpose() * hc * &jac;
    assert!((pulled - hp).abs().max() < 1e-12);
    assert!((lc - lp).abs() < 1e-12);
}

#[test]
fn nabla_operator_examples() {
    let p = MetallicParams::new(2, 1).unwrap();
    let flat = euclidean(2);
    let c = LinearOperatorField::parse(&flat, &[&["sigma", "1"], &["0", "sigbar"]]).unwrap();
    assert_eq!(nabla_operator_residual(&flat, &c, &p, 10).unwrap().max, 0.0);
    let diag = LinearOperatorField::parse(&flat, &[&["sigma", "0"], &["0", "sigbar"]]).unwrap();
    assert_eq!(nabla_operator_residual(&flat, &diag, &p, 10).unwrap().max, 0.0);
    // d/dx1 of 3*x1 is 3 everywhere
    let var = LinearOperatorField::parse(&flat, &[&["3*x1", "0"], &["0", "1"]]).unwrap();
    assert_eq!(nabla_operator_residual(&flat, &var, &p, 10).unwrap().max, 3.0);
    let polar = polar_plane();
    assert!(nabla_operator_residual(&polar, &var, &p, 1).is_err());
}

fn registered_charts() -> Vec<ChartManifold> {
    vec![
        euclidean(3),
        polar_plane(),
        unit_sphere(),
        hyperbolic_plane(),
        line(),
        ChartManifold::parse(
            "curved3",
            &["x", "y", "z"],
            &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            &[
                &["1 + x^2", "0.1*y", "0"],
                &["0.1*y", "2 + sin(z)", "0.2*x*z"],
                &["0", "0.2*x*z", "exp(0.3*y)"],
            ],
        )
        .unwrap(),
    ]
}

#[test]
fn metric_is_parallel_on_registered_charts() {
    let p = golden();
    for chart in registered_charts() {
        let s = Sampler::new(0, chart.name());
        for i in 0..50 {
            let geom = LocalGeometry::at(&chart, &PointSample(s.point(i, chart.domain())), &p).unwrap();
            assert!(metric_compatibility_residual(&geom) <= ORACLE_SELF_TOL, "{}", chart.name());
        }
    }
}

#[test]
fn riemann_symmetries() {
    let p = golden();
    for chart in registered_charts() {
        let s = Sampler::new(1, chart.name());
        let d = chart.dim();
        for i in 0..20 {
            let geom = LocalGeometry::at(&chart, &PointSample(s.point(i, chart.domain())), &p).unwrap();
            let r = geom.riemann();
            let g = &geom.metric;
            let mut rng = s.rng(i);
            let [x, y, z, w] = std::array::from_fn(|_| random_vector(&mut rng, d));
            assert_eq!(r.apply(&x, &y, &z), -r.apply(&y, &x, &z));
            let bianchi = r.apply(&x, &y, &z) + r.apply(&y, &z, &x) + r.apply(&z, &x, &y);
            assert!(bianchi.amax() <= 1e-9, "{}: {bianchi}", chart.name());
            let pair = r.lowered(g, &x, &y, &z, &w) - r.lowered(g, &z, &w, &x, &y);
            assert!(pair.abs() <= 1e-9);
            let skew = r.lowered(g, &x, &y, &z, &w) + r.lowered(g, &x, &y, &w, &z);
            assert!(skew.abs() <= 1e-9);
            let s = r.ricci();
            assert!((&s - s.transpose()).amax() <= 1e-9);
        }
    }
}

#[test]
fn christoffel_matches_finite_differences() {
    let p = golden();
    for chart in registered_charts() {
        let d = chart.dim();
        let s = Sampler::new(2, chart.name());
        for i in 0..10 {
            let x = s.point(i, chart.domain());
            let geom = LocalGeometry::at(&chart, &PointSample(x.clone()), &p).unwrap();
            let h = 1e-4;
            let dg: Vec<DMatrix<f64>> = (0..d)
                .map(|m| {
                    let mut a = x.clone();
                    a[m] += h;
                    let mut b = x.clone();
                    b[m] -= h;
                    (chart.metric_values(&PointSample(a), &p).unwrap() - chart.metric_values(&PointSample(b), &p).unwrap())
                        / (2.0 * h)
                })
                .collect();
            for k in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let mut v = 0.0;
                        for l in 0..d {
                            v += 0.5 * geom.inverse[(k, l)] * (dg[a][(b, l)] + dg[b][(a, l)] - dg[l][(a, b)]);
                        }
                        let jet = geom.christoffel.get(k, a, b);
                        assert!((v - jet).abs() <= 1e-5 * (1.0 + jet.abs()), "{} {k}{a}{b}: {v} vs {jet}", chart.name());
                    }
                }
            }
        }
    }
}

#[test]
fn polar_and_cartesian_planes_are_both_flat() {
    let p = golden();
    for chart in [euclidean(2), polar_plane()] {
        let s = Sampler::new(3, chart.name());
        for i in 0..20 {
            let r = riemann_at(&chart, &PointSample(s.point(i, chart.domain())), &p).unwrap();
            assert!(r.data.iter().all(|v| v.abs() <= 1e-9));
        }
    }
}
