use super::*;

fn spec_with(builtin: &str, extra: &str) -> SpecFile {
    let text = format!("{}\n{extra}", builtin_text(builtin).unwrap());
    parse_spec(&text, builtin).unwrap()
}

fn opts(seed: u64, samples: usize) -> RunOptions {
    RunOptions {
        seed,
        samples,
        ..RunOptions::default()
    }
}

fn record<'a>(r: &'a Report, id: &str) -> &'a Record {
    r.records().iter().find(|x| x.check_id == id).unwrap_or_else(|| panic!("no record {id}"))
}

#[test]
fn lemma_curvature_on_the_polar_plane() {
    let spec = resolve_spec("builtin:polar").unwrap();
    let r = run_suite(&spec, "lemma-curvature", &opts(42, 30)).unwrap();
    for c in [1, 3] {
        let rec = record(&r, &format!("lemma-curvature/case-{c}"));
        assert_eq!(rec.verdict, Verdict::Pass);
        assert_eq!(rec.samples, 30);
        assert_eq!(rec.tolerance, 1e-8);
    }
    for c in [2, 4, 5] {
        let rec = record(&r, &format!("lemma-curvature/case-{c}"));
        assert_eq!(rec.verdict, Verdict::Skipped);
        assert!(rec.note.contains("m>1 required"));
    }
}

#[test]
fn hyperbolic_space_has_constant_curvature() {
    let spec = resolve_spec("builtin:hyperbolic3").unwrap();
    let r = run(&spec, &["lemma-curvature".into(), "lemma-ricci".into()], &opts(0, 20)).unwrap();
    assert_eq!(r.records().len(), 9);
    assert!(r.records().iter().all(|x| x.verdict == Verdict::Pass), "{}", r.to_text());
    assert!(record(&r, "lemma-curvature/constant-curvature").max_residual <= 1e-8);
}

#[test]
fn quadratic_identity_and_its_swapped_form() {
    let spec = spec_with("sphere-line", "[suite proposition-identities]\np = 2\nq = 1\n");
    let r = run_suite(&spec, "proposition-identities", &opts(0, 30)).unwrap();
    for id in ["parallel", "commutes", "symmetric", "quadratic", "powers"] {
        assert_eq!(record(&r, &format!("proposition-identities/{id}")).verdict, Verdict::Pass, "{id}");
    }
    let literal = record(&r, "proposition-identities/quadratic-literal");
    assert_eq!(literal.verdict, Verdict::Fail);
    assert!(literal.max_residual > 0.1);
    assert_eq!(r.exit_code(), 1);

    let golden = spec_with("sphere-line", "");
    let r = run_suite(&golden, "proposition-identities", &opts(0, 30)).unwrap();
    assert!(!r.has_failures(), "{}", r.to_text());
}

#[test]
fn proposition_identities_on_a_non_parallel_structure() {
    let spec = resolve_spec("builtin:polar").unwrap();
    let r = run_suite(&spec, "proposition-identities", &opts(0, 10)).unwrap();
    assert_eq!(record(&r, "proposition-identities/parallel").verdict, Verdict::Fail);
    assert_eq!(record(&r, "proposition-identities/quadratic").verdict, Verdict::Skipped);
}

#[test]
fn example3_slant_cosine() {
    let spec = resolve_spec("builtin:example3?n=2&k=1&p=1&q=1").unwrap();
    let r = run_suite(&spec, "example3", &opts(0, 30)).unwrap();
    assert!(!r.has_failures(), "{}", r.to_text());
    let slant = record(&r, "example3/slant-cosine");
    let value: f64 = slant.note.split_whitespace().nth(2).unwrap().trim_end_matches(',').parse().unwrap();
    assert!((value - 0.408_248_290_4).abs() < 1e-9);
    assert!(slant.max_residual <= 1e-12);

    let spec = resolve_spec("builtin:example3?n=3&k=2&p=3&q=2").unwrap();
    let r = run_suite(&spec, "example3", &opts(0, 10)).unwrap();
    let literal = record(&r, "example3/ambient-metallic-literal");
    assert_eq!(literal.verdict, Verdict::Fail);
    assert!(literal.max_residual > 0.1);
    assert_eq!(record(&r, "example3/ambient-metallic").verdict, Verdict::Pass);
}

#[test]
fn product_case_needs_a_unit_warp() {
    let r = run_suite(&resolve_spec("builtin:sphere-hyperbolic").unwrap(), "product-case", &opts(0, 20)).unwrap();
    assert_eq!(r.count(Verdict::Pass), 2);
    let r = run_suite(&resolve_spec("builtin:polar").unwrap(), "product-case", &opts(0, 20)).unwrap();
    assert_eq!(r.count(Verdict::Skipped), 2);
}

#[test]
fn locally_metallic_with_named_structures() {
    let mixed = "
[structure J1]
chart = time
p = 2
q = 1
matrix = [[sigma]]

[structure J2]
chart = plane
p = 2
q = 1
matrix = [[sigma, 0], [0, sigbar]]

[suite locally-metallic]
pair = J1, J2
";
    let spec = spec_with("hyperbolic3", mixed);
    let r = run_suite(&spec, "locally-metallic", &opts(0, 20)).unwrap();
    assert_eq!(record(&r, "locally-metallic/agreement").verdict, Verdict::Pass);
    assert_eq!(record(&r, "locally-metallic/direct").verdict, Verdict::Fail);
    assert_eq!(record(&r, "locally-metallic/condition-b").verdict, Verdict::Fail);
    assert_eq!(record(&r, "locally-metallic/projection-base").verdict, Verdict::Pass);
    assert_eq!(record(&r, "locally-metallic/projection-fiber").verdict, Verdict::Pass);

    let r = run_suite(&resolve_spec("builtin:hyperbolic3").unwrap(), "locally-metallic", &opts(0, 20)).unwrap();
    assert!(!r.has_failures(), "{}", r.to_text());

    let bad = spec_with("hyperbolic3", &mixed.replace("pair = J1, J2", "pair = J2, J1"));
    assert!(matches!(run_suite(&bad, "locally-metallic", &opts(0, 5)), Err(VerifyError::Param { .. })));
}

#[test]
fn ricci_invariance_records() {
    let spec = spec_with(
        "sphere-hyperbolic",
        "[structure J1]\nchart = sphere\np = 1\nq = 1\nmatrix = [[sigma, 0], [0, sigbar]]\n\n\
         [structure J2]\nchart = hyperbolic\np = 1\nq = 1\nmatrix = [[sigbar, 0], [0, sigbar]]\n\n\
         [suite ricci-invariance]\npair = J1, J2\n",
    );
    let r = run_suite(&spec, "ricci-invariance", &opts(0, 20)).unwrap();
    assert!(!r.has_failures(), "{}", r.to_text());
    assert_eq!(r.records().len(), 4);
}

#[test]
fn every_suite_reports_on_every_builtin() {
    for (b, _) in BUILTINS {
        let spec = resolve_spec(&format!("builtin:{b}")).unwrap();
        for (suite, _) in SUITES {
            let r = run_suite(&spec, suite, &opts(1, 3)).unwrap();
            assert!(!r.records().is_empty(), "{b} {suite}");
            assert!(r.records().iter().all(|x| x.check_id.starts_with(&format!("{suite}/"))));
        }
    }
}

#[test]
fn suites_without_a_warp_skip() {
    let spec = parse_spec("[manifold M]\ncoords = [x]\ndomain = [[0, 1]]\nmetric = [[1]]\n", "m").unwrap();
    let r = run_suite(&spec, "lemma-ricci", &opts(0, 3)).unwrap();
    assert_eq!(r.records().len(), 1);
    assert_eq!(r.records()[0].verdict, Verdict::Skipped);
    let r = run_suite(&spec, "oracle-selfcheck", &opts(0, 3)).unwrap();
    assert!(r.records().iter().any(|x| x.check_id == "oracle-selfcheck/chart/M/metric-compatible"));
}

#[test]
fn metallic_algebra_covers_spec_structures_and_maps() {
    let extra = "
[structure A]
chart = sphere
p = 1
q = 1
matrix = [[sigma, 0], [0, sigbar]]

[structure B]
chart = warped
p = 1
q = 1
matrix = [[sigma, 0, 0], [0, sigbar, 0], [0, 0, sigma]]

[map proj]
source = warped
target = sphere
components = [th, ph]
";
    let spec = spec_with("sphere-line", extra);
    let r = run_suite(&spec, "metallic-algebra", &opts(0, 10)).unwrap();
    assert!(!r.has_failures(), "{}", r.to_text());
    for id in ["structure/A/metallic", "structure/B/compatible", "map/proj/B-A", "power-identity", "round-trip"] {
        record(&r, &format!("metallic-algebra/{id}"));
    }
}

#[test]
fn unknown_suites_and_parameters() {
    let spec = resolve_spec("builtin:polar").unwrap();
    assert!(matches!(run_suite(&spec, "nope", &opts(0, 1)), Err(VerifyError::UnknownSuite(_))));
    let spec = spec_with("polar", "[suite example3]\nwidth = 3\n");
    assert!(matches!(run_suite(&spec, "example3", &opts(0, 1)), Err(VerifyError::Param { .. })));
    let spec = spec_with("polar", "[suite example3]\nn = 2\nk = 3\n");
    assert!(run_suite(&spec, "example3", &opts(0, 1)).is_err());
}

#[test]
fn tolerance_overrides() {
    let mut t = Tolerances::default();
    assert_eq!(t.get("algebraic"), 1e-12);
    assert_eq!(t.get("conjugation"), 1e-10);
    assert_eq!(t.get("oracle-curvature"), 1e-8);
    t.set_pair("oracle-curvature=1e-30").unwrap();
    assert!(t.set_pair("made-up=1").is_err());
    assert!(t.set_pair("algebraic").is_err());
    assert!(t.set_pair("algebraic=-1").is_err());
    let spec = resolve_spec("builtin:hyperbolic3").unwrap();
    let o = RunOptions { tolerances: t, ..opts(0, 10) };
    let r = run_suite(&spec, "lemma-ricci", &o).unwrap();
    assert!(r.records().iter().all(|x| x.tolerance == 1e-30));
}

#[test]
fn reports_are_independent_of_thread_count() {
    let spec = resolve_spec("builtin:example3?n=2&k=1&p=2&q=1").unwrap();
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run(&spec, &[], &opts(7, 12)).unwrap().to_json())
    };
    let one = render(1);
    assert_eq!(one, render(4));
    assert_eq!(one, render(3));
}

#[test]
fn residuals_grow_with_nested_sample_sets() {
    let spec = resolve_spec("builtin:hyperbolic3").unwrap();
    let small = run(&spec, &[], &opts(3, 8)).unwrap();
    let large = run(&spec, &[], &opts(3, 16)).unwrap();
    assert_eq!(small.records().len(), large.records().len());
    for (a, b) in small.records().iter().zip(large.records()) {
        assert_eq!(a.check_id, b.check_id);
        if a.max_residual.is_finite() && a.verdict != Verdict::Skipped && a.samples == 8 {
            assert!(b.max_residual >= a.max_residual, "{}", a.check_id);
        }
    }
}
