//! Acceptance criteria 1 to 10. Each criterion prints one line:
//!
//! ```text
//! criterion 3 [pass] warped connection ... (0.41 s)
//! ```
//!
//! Runtime budgets are enforced for optimized builds only; debug builds
//! print the elapsed time but do not fail on it.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use metallic_warp::algebra::{induced_metallic, induced_product, projectors, LinearOperator, MetallicParams, Sign};
use metallic_warp::expr::{parse, Constant, Expr};
use metallic_warp::gallery::{
    ambient_j, example_warped_spec, frame_at, frame_slant_cosine, gram, jz0_orthogonality_residual, slant_cosine,
    ConjugateRoot, ExampleConfig,
};
use metallic_warp::geometry::{catalog, metric_compatibility_residual, ChartManifold, LinearOperatorField, LocalGeometry, PointSample};
use metallic_warp::sampling::{random_vector, Sampler};
use metallic_warp::structures::{curvature_identity_residuals, j_pm_product, locally_metallic_conditions, ricci_invariance_residuals};
use metallic_warp::verify::{resolve_spec, BUILTINS, SUITES};
use metallic_warp::warped::{
    build_warped_chart, connection_check, lemma_curvature_check, lemma_ricci_check, product_case_residuals, WarpedProductSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| if v.is_nan() { f64::INFINITY } else { a.max(v.abs()) })
}

fn params(p: u32, q: u32) -> MetallicParams {
    MetallicParams::new(p, q).unwrap()
}

fn spec(base: ChartManifold, fiber: ChartManifold, warp: &str) -> WarpedProductSpec {
    WarpedProductSpec::new(base, fiber, parse(warp).unwrap()).unwrap()
}

fn field(chart: &ChartManifold, rows: &[&[&str]]) -> LinearOperatorField {
    LinearOperatorField::parse(chart, rows).unwrap()
}

fn root(chart: &ChartManifold, c: Constant) -> LinearOperatorField {
    LinearOperatorField::scalar(chart, Expr::Const(c))
}

fn plane(c: [&str; 2]) -> ChartManifold {
    ChartManifold::parse("plane", &c, &[(-1.0, 1.0), (-1.0, 1.0)], &[&["1", "0"], &["0", "1"]]).unwrap()
}

fn the_three_specs() -> Vec<(&'static str, WarpedProductSpec)> {
    vec![
        ("polar", WarpedProductSpec::polar_plane()),
        ("hyperbolic3", WarpedProductSpec::hyperbolic_space()),
        ("example3 n=2", example_warped_spec(2).unwrap()),
    ]
}

/// `P S P^{-1}` with mixed signs and `P = I + A`, `|A| <= 0.4`.
fn conjugated_almost_product(sampler: &Sampler, i: usize, d: usize) -> DMatrix<f64> {
    let mut rng = sampler.rng(i);
    let a = DMatrix::from_fn(d, d, |_, _| 0.4 / d as f64 * random_vector(&mut rng, 1)[0]);
    let p = DMatrix::identity(d, d) + a;
    let plus = 1 + i % (d - 1);
    let s = DMatrix::from_fn(d, d, |r, c| if r != c { 0.0 } else if r < plus { 1.0 } else { -1.0 });
    &p * s * p.clone().try_inverse().unwrap()
}

/// Power identity with independently computed Fibonacci numbers:
/// `J^{n+1} - g_{n+1} J - q g_n I`, relative to `|J^{n+1}|`.
fn power_residual(j: &DMatrix<f64>, p: f64, q: f64, n: usize) -> f64 {
    let mut g = vec![0.0, 1.0];
    for k in 1..=n {
        g.push(p * g[k] + q * g[k - 1]);
    }
    let d = j.nrows();
    let lhs = (0..n).fold(j.clone(), |acc, _| &acc * j);
    max_abs(&(&lhs - j * g[n + 1] - DMatrix::identity(d, d) * (q * g[n]))) / max_abs(&lhs).max(1.0)
}

fn criterion_1() -> Outcome {
    let sampler = Sampler::new(1, "acceptance/1");
    let (mut metallic, mut trip, mut proj, mut power): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..20 {
        let d = 2 + i % 5;
        let f = conjugated_almost_product(&sampler, i, d);
        let id = DMatrix::identity(d, d);
        for p in 1..=5 {
            for q in 1..=5 {
                let mp = params(p, q);
                let (pf, qf) = (p as f64, q as f64);
                for sign in [Sign::Plus, Sign::Minus] {
                    let j = induced_metallic(&LinearOperator::new(f.clone()), sign, &mp).unwrap();
                    let jm = j.matrix();
                    metallic = metallic.max(max_abs(&(jm * jm - jm * pf - &id * qf)));
                    let back = induced_product(&j, sign, &mp).unwrap();
                    trip = trip.max(max_abs(&(back.matrix() - &f)));
                    let again = induced_metallic(&back, sign, &mp).unwrap();
                    trip = trip.max(max_abs(&(again.matrix() - jm)));
                    let pr = projectors(&j, &mp).unwrap();
                    let (l, m) = (pr.l.matrix(), pr.m.matrix());
                    for r in [&(l + m - &id), &(l * l - l), &(m * m - m), &(l * m), &(m * l)] {
                        proj = proj.max(max_abs(r));
                    }
                    for n in 1..=10 {
                        power = power.max(power_residual(jm, pf, qf, n));
                    }
                }
            }
        }
    }
    outcome(
        metallic <= 1e-10 && trip <= 1e-10 && proj <= 1e-12 && power <= 1e-8,
        format!("metallic {metallic:.1e}, round trip {trip:.1e}, projectors {proj:.1e}, powers {power:.1e}"),
    )
}

fn over_points(chart: &ChartManifold, id: &str, samples: usize, f: impl Fn(&LocalGeometry) -> f64) -> f64 {
    let sampler = Sampler::new(2, id);
    let p = MetallicParams::golden();
    (0..samples)
        .map(|i| f(&LocalGeometry::at(chart, &PointSample::unchecked(sampler.point(i, chart.domain())), &p).unwrap()))
        .fold(0.0, f64::max)
}

fn coordinate_sectional_defect(geom: &LocalGeometry, k: f64) -> f64 {
    let r = geom.riemann();
    let d = geom.dim();
    let e = |i: usize| DVector::from_fn(d, |a, _| f64::from(a == i));
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((r.sectional(&geom.metric, &e(i), &e(j)) - k).abs());
        }
    }
    worst
}

fn criterion_2() -> Outcome {
    let sphere = over_points(&catalog::unit_sphere(), "sphere", 30, |g| coordinate_sectional_defect(g, 1.0));
    let hyp = over_points(&catalog::hyperbolic_plane(), "hyperbolic", 30, |g| max_abs(&(g.riemann().ricci() + &g.metric)));
    let polar = over_points(&catalog::polar_plane(), "polar", 30, |g| coordinate_sectional_defect(g, 0.0));
    let mut charts = vec![catalog::euclidean(3), catalog::polar_plane(), catalog::unit_sphere(), catalog::hyperbolic_plane(), catalog::line()];
    for (name, _) in BUILTINS {
        let s = resolve_spec(&format!("builtin:{name}")).unwrap();
        charts.extend(s.manifolds.values().cloned());
        charts.push(s.chart("warped").unwrap());
    }
    let nabla_g = charts
        .iter()
        .map(|c| over_points(c, "nabla-g", 30, metric_compatibility_residual))
        .fold(0.0, f64::max);
    outcome(
        sphere <= 1e-9 && hyp <= 1e-8 && polar <= 1e-9 && nabla_g <= 1e-9,
        format!("|K-1| {sphere:.1e}, |S+g| {hyp:.1e}, polar |K| {polar:.1e}, |nabla g| {nabla_g:.1e} on {} charts", charts.len()),
    )
}

fn criterion_3() -> Outcome {
    let g = MetallicParams::golden();
    let mut worst: f64 = 0.0;
    let mut all = true;
    for (_, s) in the_three_specs() {
        let r = connection_check(&s, &g, 3, 30).unwrap();
        all &= r.evaluated == 30 && r.aborted == 0;
        worst = worst.max(r.max);
    }
    outcome(all && worst <= 1e-8, format!("3 specs x 30 samples x 4 lift combinations, max {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let g = MetallicParams::golden();
    let mut worst: f64 = 0.0;
    let mut covered_curv = [0; 5];
    let mut covered_ricci = [0; 3];
    let mut ok = true;
    for (_, s) in the_three_specs() {
        for case in 1..=5u8 {
            if s.m() < 2 && [2, 4, 5].contains(&case) {
                continue;
            }
            let r = lemma_curvature_check(&s, case, &g, 4, 30).unwrap();
            ok &= r.aborted == 0;
            worst = worst.max(r.max);
            covered_curv[case as usize - 1] += 1;
        }
        if s.m() >= 2 {
            for case in 1..=3u8 {
                let r = lemma_ricci_check(&s, case, &g, 4, 30).unwrap();
                ok &= r.aborted == 0;
                worst = worst.max(r.max);
                covered_ricci[case as usize - 1] += 1;
            }
        }
    }
    let hyp = build_warped_chart(&WarpedProductSpec::hyperbolic_space(), &g).unwrap();
    let k = over_points(&hyp, "hyperbolic3", 30, |geom| coordinate_sectional_defect(geom, -1.0));
    let covered = covered_curv.iter().chain(&covered_ricci).all(|&c| c >= 2);
    outcome(
        ok && covered && worst <= 1e-8 && k <= 1e-8,
        format!(
            "max {worst:.1e}; curvature cases run on {covered_curv:?} specs, Ricci cases on {covered_ricci:?} (m = 1 excludes the fiber cases on polar); |K+1| {k:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let g = MetallicParams::golden();
    let mut worst: f64 = 0.0;
    for s in [
        spec(catalog::unit_sphere(), catalog::line(), "1"),
        spec(catalog::unit_sphere(), catalog::hyperbolic_plane(), "1"),
    ] {
        let r = product_case_residuals(&s, &g, 5, 30).unwrap();
        worst = worst.max(r.curvature.max).max(r.ricci.max);
    }
    outcome(worst <= 1e-9, format!("block curvature and Ricci residual {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let sphere_line = spec(catalog::unit_sphere(), catalog::line(), "1");
    let sphere_hyp = spec(catalog::unit_sphere(), catalog::hyperbolic_plane(), "1");
    let mut holds: f64 = 0.0;
    let mut literal_p2 = 0.0;
    for (s, sign) in [(&sphere_line, Sign::Plus), (&sphere_hyp, Sign::Minus)] {
        for (p, q) in [(1, 1), (2, 1)] {
            let mp = params(p, q);
            let j = j_pm_product(s, sign, &mp).unwrap();
            let r = curvature_identity_residuals(&j.chart, &j.assembled, &mp, 6, 30, 8).unwrap();
            holds = holds.max(r.max());
            if p == 2 {
                literal_p2 = f64::max(literal_p2, r.quadratic_swapped.max);
            }
        }
    }
    outcome(
        holds <= 1e-8 && literal_p2 > 0.1,
        format!("identities max {holds:.1e}; literal quadratic form at p=2, q=1: {literal_p2:.2} (expected to fail)"),
    )
}

fn criterion_7() -> Outcome {
    let flat = spec(plane(["b1", "b2"]), catalog::line(), "1");
    let polar = WarpedProductSpec::polar_plane();
    let hyp = WarpedProductSpec::hyperbolic_space();
    let along = spec(plane(["b1", "b2"]), catalog::line(), "exp(b1)");
    let across = spec(plane(["b1", "b2"]), catalog::line(), "exp(b2)");
    let split = |s: &WarpedProductSpec| field(s.base(), &[&["sigma", "0"], &["0", "sigbar"]]);
    let battery: Vec<(&str, &WarpedProductSpec, LinearOperatorField, LinearOperatorField)> = vec![
        ("f = 1", &flat, split(&flat), root(flat.fiber(), Constant::Sigma)),
        ("J = sigma I", &polar, root(polar.base(), Constant::Sigma), root(polar.fiber(), Constant::Sigma)),
        ("sigma/sigbar mix", &polar, root(polar.base(), Constant::Sigma), root(polar.fiber(), Constant::Sigbar)),
        (
            "reflection",
            &polar,
            LinearOperatorField::scalar(polar.base(), Expr::num(1.0)),
            LinearOperatorField::scalar(polar.fiber(), Expr::num(-1.0)),
        ),
        ("J = sigbar I", &hyp, root(hyp.base(), Constant::Sigbar), root(hyp.fiber(), Constant::Sigbar)),
        ("split fiber", &hyp, root(hyp.base(), Constant::Sigma), field(hyp.fiber(), &[&["sigma", "0"], &["0", "sigbar"]])),
        ("warp along sigma", &along, split(&along), root(along.fiber(), Constant::Sigma)),
        ("warp along sigbar", &across, split(&across), root(across.fiber(), Constant::Sigma)),
    ];
    let tol = 1e-9;
    let mut agree = 0;
    let mut parallel = 0;
    let mut total = 0;
    for mp in [params(1, 1), params(2, 3)] {
        for (_, s, j1, j2) in &battery {
            let r = locally_metallic_conditions(s, j1, j2, &mp, 7, 30).unwrap();
            let conditions = r.a.max <= tol && r.b.max <= tol;
            let direct = r.c.max <= tol;
            total += 1;
            agree += usize::from(conditions == direct);
            parallel += usize::from(direct);
        }
    }
    outcome(
        agree == total && parallel > 0 && parallel < total,
        format!("{agree}/{total} cases agree ({} specs/structures x 2 parameter pairs, {parallel} parallel)", battery.len()),
    )
}

fn criterion_8() -> Outcome {
    let mp = MetallicParams::golden();
    let tol = 1e-8;
    let product = spec(catalog::unit_sphere(), catalog::hyperbolic_plane(), "1");
    let warped = spec(catalog::unit_sphere(), catalog::hyperbolic_plane(), "2 + cos(th)*sin(ph)");
    let counter = spec(plane(["b1", "b2"]), catalog::euclidean(2), "2 + b1*b2");
    let einstein = [
        ricci_invariance_residuals(
            &product,
            &field(product.base(), &[&["sigma", "0"], &["0", "sigbar"]]),
            &root(product.fiber(), Constant::Sigbar),
            &mp,
            8,
            30,
        )
        .unwrap(),
        ricci_invariance_residuals(&warped, &root(warped.base(), Constant::Sigma), &root(warped.fiber(), Constant::Sigbar), &mp, 8, 30)
            .unwrap(),
    ];
    let bad = ricci_invariance_residuals(
        &counter,
        &field(counter.base(), &[&["sigma", "0"], &["0", "sigbar"]]),
        &root(counter.fiber(), Constant::Sigma),
        &mp,
        8,
        30,
    )
    .unwrap();
    let implication = einstein.iter().all(|r| r.hessian_defect.max <= 1e-12 && r.ricci_defect.max <= tol);
    let counter_ok = bad.hessian_defect.max > 10.0 * tol && bad.ricci_defect.max > 10.0 * tol;
    let vertical = einstein.iter().chain([&bad]).map(|r| r.vertical_defect.max).fold(0.0, f64::max);
    outcome(
        implication && counter_ok && vertical <= tol,
        format!(
            "Einstein cases Ricci defect {:.1e}; counterexample defects {:.2}, {:.2}; vertical {vertical:.1e}",
            einstein.iter().map(|r| r.ricci_defect.max).fold(0.0, f64::max),
            bad.hessian_defect.max,
            bad.ricci_defect.max
        ),
    )
}

fn criterion_9() -> Outcome {
    let sampler = Sampler::new(9, "acceptance/9");
    let (mut gram_err, mut orth): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let n = 2 + i % 5;
        let mut dom = vec![(0.1, 4.0)];
        dom.extend(vec![(0.0, std::f64::consts::FRAC_PI_2); n]);
        let x = sampler.point(i, &dom);
        let c = ExampleConfig::new(n, 1 + i % (n - 1), MetallicParams::golden(), x[0], x[1..].to_vec()).unwrap();
        let mut expected = DMatrix::identity(n + 1, n + 1) * (c.u * c.u);
        expected[(0, 0)] = n as f64;
        gram_err = gram_err.max(max_abs(&(gram(&frame_at(&c)) - expected)));
        orth = orth.max(jz0_orthogonality_residual(&c).unwrap());
    }
    let golden = params(1, 1);
    let cos = slant_cosine(2, 1, &golden).unwrap();
    let direct = frame_slant_cosine(&ExampleConfig::new(2, 1, golden, 1.3, vec![0.4, 1.1]).unwrap()).unwrap();
    let (mut ambient, mut literal): (f64, f64) = (0.0, 0.0);
    for p in 1..=5 {
        for q in 1..=5 {
            let mp = params(p, q);
            let residual = |j: DMatrix<f64>| {
                let d = j.nrows();
                max_abs(&(&j * &j - &j * mp.pf() - DMatrix::identity(d, d) * mp.qf()))
            };
            ambient = ambient.max(residual(ambient_j(3, 2, &mp, ConjugateRoot::PMinusSigma).unwrap()));
            if p >= 2 {
                literal = literal.max(residual(ambient_j(3, 2, &mp, ConjugateRoot::OneMinusSigma).unwrap()));
            }
        }
    }
    let pass = gram_err <= 1e-12
        && orth <= 1e-12
        && (cos - 0.408_248_290_4).abs() <= 1e-9
        && (cos - direct).abs() <= 1e-12
        && ambient <= 1e-12
        && literal > 0.1;
    outcome(
        pass,
        format!(
            "Gram {gram_err:.1e}, <JZ0,Zi> {orth:.1e}, cos {cos:.10} (direct differs by {:.1e}), ambient {ambient:.1e}, 1 - sigma variant {literal:.2} (expected to fail)",
            (cos - direct).abs()
        ),
    )
}

fn metwarp(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_metwarp")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_10() -> Outcome {
    let mut identical = 0;
    let mut runs = 0;
    let mut codes_ok = true;
    for spec in ["builtin:example3?n=2&k=1&p=2&q=1", "builtin:hyperbolic3"] {
        for (suite, _) in SUITES {
            let args = ["verify", "--spec", spec, "--suite", suite, "--seed", "11", "--samples", "8", "--format", "json"];
            let (c1, a) = metwarp(&args);
            let mut threaded = args.to_vec();
            threaded.extend(["--threads", "3"]);
            let (c2, b) = metwarp(&threaded);
            runs += 1;
            identical += usize::from(a == b && c1 == c2);
            let records: serde_json::Value = serde_json::from_slice(&a).unwrap();
            let any_fail = records.as_array().unwrap().iter().any(|r| r["verdict"] == "fail");
            codes_ok &= c1 == i32::from(any_fail);
        }
    }
    let (bad_spec, _) = metwarp(&["verify", "--spec", "builtin:nowhere"]);
    let (bad_suite, _) = metwarp(&["verify", "--spec", "builtin:polar", "--suite", "nope"]);
    codes_ok &= bad_spec == 2 && bad_suite == 2;
    outcome(identical == runs && codes_ok, format!("{identical}/{runs} suite runs byte-identical across reruns and thread counts; exit codes honored: {codes_ok}"))
}

#[test]
fn acceptance_criteria() {
    let optimized = !cfg!(debug_assertions);
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 10] = [
        ("metallic algebra", criterion_1, Some(1)),
        ("oracle self-check", criterion_2, Some(2)),
        ("warped connection", criterion_3, Some(5)),
        ("warped curvature and Ricci closed forms", criterion_4, Some(20)),
        ("unit-warp product case", criterion_5, Some(5)),
        ("curvature identities of parallel structures", criterion_6, None),
        ("locally metallic equivalence", criterion_7, Some(10)),
        ("Ricci invariance", criterion_8, None),
        ("slant cone example", criterion_9, None),
        ("CLI determinism and exit codes", criterion_10, None),
    ];
    let mut failed = Vec::new();
    for (k, (title, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > Duration::from_secs(b));
        let pass = o.pass && !(optimized && over);
        let timing = match budget {
            Some(b) if over && !optimized => format!("{:.2} s, budget {b} s applies to optimized builds", elapsed.as_secs_f64()),
            Some(b) => format!("{:.2} s, budget {b} s", elapsed.as_secs_f64()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        println!("criterion {} [{}] {title}: {} ({timing})", k + 1, if pass { "pass" } else { "FAIL" }, o.detail);
        if !pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
