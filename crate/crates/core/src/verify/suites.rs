//! The named verification suites.
//!
//! Every suite turns its checks into [`Record`]s. A check that cannot run
//! on the given spec yields a skipped record with the reason, and a failed
//! precondition yields a failed record; neither aborts the run.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{
    compatibility_residual, induced_metallic, induced_product, max_abs, metallic_residual, power_identity_residual,
    projectors, LinearOperator, MetallicParams, Sign,
};
use crate::expr::Constant;
use crate::gallery::{
    ambient_j, frame_at, frame_slant_cosine, gram, immersion_pullback_residual, jz0_orthogonality_residual,
    slant_cosine, ConjugateRoot, ExampleConfig,
};
use crate::geometry::{catalog, metric_compatibility_residual, ChartManifold, LocalGeometry, PointSample};
use crate::sampling::{max_over, Reduction, Sampler};
use crate::structures::{
    curvature_identity_residuals, fiber_invariance_residual, j_pair, j_pm_product, locally_metallic_conditions,
    metallic_map_residual, parallel_residual, ricci_invariance_residuals, CoordinateMap, FactorStructure,
    ProductMetallicStructure, StructureError,
};
use crate::warped::{
    build_warped_chart, connection_check, lemma_curvature_check, lemma_ricci_check, mixed_christoffel_residual,
    product_case_residuals, WarpedError, WarpedProductSpec,
};

use super::report::{Record, Report};
use super::spec_file::{SpecFile, WARPED_CHART};
use super::VerifyError;

/// Suite names with one-line descriptions.
pub const SUITES: [(&str, &str); 11] = [
    ("example3", "slant cone over n angles in R^{2n}: frame, slant angle, induced metric"),
    ("fiber-invariance", "Hessian relation for a product structure preserving the fibers"),
    ("lemma-curvature", "closed-form warped curvature against the oracle, five lift patterns"),
    ("lemma-ricci", "closed-form warped Ricci tensor against the oracle, three lift patterns"),
    ("locally-metallic", "factor conditions for the pairwise structure to be parallel"),
    ("metallic-algebra", "induced structures, projectors and powers on random almost-product structures"),
    ("oracle-selfcheck", "oracle against known space forms; metric compatibility of every chart"),
    ("product-case", "unit-warp products split curvature and Ricci by factor"),
    ("proposition-identities", "curvature identities of a parallel metallic structure"),
    ("ricci-invariance", "Ricci invariance of the pairwise structure and the Hessian criterion"),
    ("warped-connection", "closed-form warped connection against the oracle"),
];

/// Tolerance keys, defaults and what they bound.
pub const TOLERANCE_KEYS: [(&str, f64, &str); 6] = [
    ("algebraic", 1e-12, "exact algebraic identities"),
    ("conjugation", 1e-10, "identities after conjugation or inversion"),
    ("oracle-curvature", 1e-8, "closed forms against the curvature oracle"),
    ("oracle-self", 1e-9, "the oracle against itself and known geometries"),
    ("parallel", 1e-9, "|nabla J| for a structure to count as parallel"),
    ("power", 1e-8, "relative residual of the power identity"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances(TOLERANCE_KEYS.iter().map(|(k, v, _)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), VerifyError> {
        if !self.0.contains_key(key) {
            return Err(VerifyError::Tolerance(format!("unknown tolerance key `{key}`")));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(VerifyError::Tolerance(format!("tolerance `{key}` must be finite and non-negative")));
        }
        self.0.insert(key.to_string(), value);
        Ok(())
    }

    /// Parses `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), VerifyError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| VerifyError::Tolerance(format!("`{pair}` is not key=value")))?;
        let value = v
            .trim()
            .parse::<f64>()
            .map_err(|_| VerifyError::Tolerance(format!("`{v}` is not a number")))?;
        self.set(k.trim(), value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions {
            seed: 0,
            samples: 30,
            tolerances: Tolerances::default(),
        }
    }
}

/// Runs `suites` (all suites when empty) and collects one report.
pub fn run(spec: &SpecFile, suites: &[String], opts: &RunOptions) -> Result<Report, VerifyError> {
    let mut names: Vec<&str> = if suites.is_empty() {
        SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        suites.iter().map(String::as_str).collect()
    };
    names.sort_unstable();
    names.dedup();
    let mut records = Vec::new();
    for name in names {
        records.extend(run_suite(spec, name, opts)?.records().iter().cloned());
    }
    Ok(Report::new(records))
}

pub fn run_suite(spec: &SpecFile, suite: &str, opts: &RunOptions) -> Result<Report, VerifyError> {
    let (name, _) = SUITES
        .iter()
        .find(|(n, _)| *n == suite)
        .ok_or_else(|| VerifyError::UnknownSuite(suite.to_string()))?;
    let ctx = Ctx {
        spec,
        opts,
        suite: name,
        params: spec.suite_params(name),
    };
    let records = match *name {
        "metallic-algebra" => metallic_algebra(&ctx)?,
        "oracle-selfcheck" => oracle_selfcheck(&ctx)?,
        "warped-connection" => warped_connection(&ctx)?,
        "lemma-curvature" => lemma_curvature(&ctx)?,
        "lemma-ricci" => lemma_ricci(&ctx)?,
        "product-case" => product_case(&ctx)?,
        "proposition-identities" => proposition_identities(&ctx)?,
        "locally-metallic" => locally_metallic(&ctx)?,
        "fiber-invariance" => fiber_invariance(&ctx)?,
        "ricci-invariance" => ricci_invariance(&ctx)?,
        _ => example3(&ctx)?,
    };
    Ok(Report::new(records))
}

struct Ctx<'a> {
    spec: &'a SpecFile,
    opts: &'a RunOptions,
    suite: &'static str,
    params: BTreeMap<String, String>,
}

impl Ctx<'_> {
    fn id(&self, check: &str) -> String {
        format!("{}/{check}", self.suite)
    }

    fn tol(&self, key: &str) -> f64 {
        self.opts.tolerances.get(key)
    }

    fn sampler(&self, check: &str) -> Sampler {
        Sampler::new(self.opts.seed, &self.id(check))
    }

    fn reduced(&self, check: &str, r: &Reduction, tol: &str, note: &str) -> Record {
        Record::from_reduction(self.suite, self.id(check), r, self.tol(tol), note)
    }

    fn skip(&self, check: &str, note: impl Into<String>) -> Record {
        Record::skipped(self.suite, self.id(check), note)
    }

    fn failed(&self, check: &str, tol: &str, note: impl Into<String>) -> Record {
        Record::failed(self.suite, self.id(check), self.tol(tol), note)
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> VerifyError {
        VerifyError::Param {
            suite: self.suite.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<(), VerifyError> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(self.bad(k, "unknown parameter")),
            None => Ok(()),
        }
    }

    fn uint(&self, key: &str, default: u32) -> Result<u32, VerifyError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| self.bad(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn metallic(&self) -> Result<MetallicParams, VerifyError> {
        let (p, q) = (self.uint("p", 1)?, self.uint("q", 1)?);
        MetallicParams::new(p, q).map_err(|e| self.bad("p", e.to_string()))
    }

    fn warp(&self) -> Option<&WarpedProductSpec> {
        self.spec.warp.as_ref()
    }

    fn no_warp(&self) -> Vec<Record> {
        vec![self.skip("warp", "spec has no [warp] section")]
    }

    /// A named spec structure, checked to live on `chart`.
    fn structure_on(&self, key: &str, name: &str, chart: &str) -> Result<FactorStructure, VerifyError> {
        let def = self
            .spec
            .structures
            .get(name)
            .ok_or_else(|| self.bad(key, format!("no structure named `{name}`")))?;
        if def.chart != chart {
            return Err(self.bad(key, format!("structure `{name}` lives on `{}`, expected `{chart}`", def.chart)));
        }
        Ok(FactorStructure::new(def.field.clone(), def.params))
    }

    /// The factor structures named by `pair = J1, J2`, or `sigma I` on
    /// both factors.
    fn pair(&self, warp: &WarpedProductSpec) -> Result<(FactorStructure, FactorStructure), VerifyError> {
        match self.params.get("pair") {
            None => {
                let p = self.metallic()?;
                Ok((
                    FactorStructure::scalar(warp.base(), Constant::Sigma, p),
                    FactorStructure::scalar(warp.fiber(), Constant::Sigma, p),
                ))
            }
            Some(v) => {
                let names: Vec<&str> = v.split(',').map(str::trim).collect();
                let [a, b] = names.as_slice() else {
                    return Err(self.bad("pair", "expected two structure names"));
                };
                let j1 = self.structure_on("pair", a, warp.base().name())?;
                let j2 = self.structure_on("pair", b, warp.fiber().name())?;
                if j1.params != j2.params {
                    return Err(self.bad("pair", "the two structures use different (p, q)"));
                }
                Ok((j1, j2))
            }
        }
    }

    /// The structure named by `structure =`: `plus`, `minus`, `pair`, or a
    /// spec structure on the product chart.
    fn product_structure(&self, warp: &WarpedProductSpec, default: &str) -> Result<Result<ProductMetallicStructure, StructureError>, VerifyError> {
        let which = self.params.get("structure").map_or(default, |s| s.trim());
        Ok(match which {
            "plus" => j_pm_product(warp, Sign::Plus, &self.metallic()?),
            "minus" => j_pm_product(warp, Sign::Minus, &self.metallic()?),
            "pair" => {
                let (j1, j2) = self.pair(warp)?;
                j_pair(warp, &j1, &j2)
            }
            name => {
                let s = self.structure_on("structure", name, WARPED_CHART)?;
                let chart = build_warped_chart(warp, &s.params).map_err(|e| self.bad("structure", e.to_string()))?;
                Ok(ProductMetallicStructure {
                    variant: crate::structures::StructureVariant::Pairwise,
                    params: s.params,
                    assembled: s.field,
                    chart,
                })
            }
        })
    }
}

/// `P S P^{-1}` with `S = diag(±1)` of mixed signs and `P = I + A`,
/// `|A| <= 0.4`, so the conjugation stays well conditioned.
fn random_almost_product(rng: &mut impl Rng, d: usize) -> LinearOperator {
    let plus = rng.random_range(1..d);
    let scale = 0.4 / d as f64;
    let p = DMatrix::identity(d, d) + DMatrix::from_fn(d, d, |_, _| scale * rng.random_range(-1.0..=1.0));
    let inv = p.clone().try_inverse().expect("|A| < 1 keeps I + A invertible");
    let s = DMatrix::from_fn(d, d, |i, j| match (i == j, i < plus) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => -1.0,
    });
    LinearOperator::new(p * s * inv)
}

fn metallic_algebra(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q"])?;
    let pairs: Vec<MetallicParams> = if ctx.params.contains_key("p") || ctx.params.contains_key("q") {
        vec![ctx.metallic()?]
    } else {
        (1..=5).flat_map(|p| (1..=5).map(move |q| MetallicParams::new(p, q).unwrap())).collect()
    };
    let sampler = ctx.sampler("random");
    let n = ctx.opts.samples;
    let each = |which: u8| {
        max_over(n, |i| -> Result<f64, crate::algebra::AlgebraError> {
            let mut rng = sampler.rng(i);
            let f = random_almost_product(&mut rng, 2 + i % 5);
            let mut worst: f64 = 0.0;
            for params in &pairs {
                for sign in [Sign::Plus, Sign::Minus] {
                    let j = induced_metallic(&f, sign, params)?;
                    let r = match which {
                        0 => metallic_residual(&j, params),
                        1 => max_abs(&(induced_product(&j, sign, params)?.into_matrix() - f.matrix())),
                        2 => projectors(&j, params)?.residual(),
                        _ => (1..=10)
                            .map(|k| power_identity_residual(&j, params, k))
                            .collect::<Result<Vec<_>, _>>()?
                            .into_iter()
                            .fold(0.0, f64::max),
                    };
                    worst = crate::sampling::fmax(worst, r);
                }
            }
            Ok(worst)
        })
    };
    let note = format!("{} (p, q) pairs, dims 2..6", pairs.len());
    let mut out = vec![
        ctx.reduced("induced-metallic", &each(0), "conjugation", &note),
        ctx.reduced("round-trip", &each(1), "conjugation", &note),
        ctx.reduced("projectors", &each(2), "algebraic", &note),
        ctx.reduced("power-identity", &each(3), "power", &format!("{note}, powers 1..10")),
    ];

    for (name, def) in &ctx.spec.structures {
        let Some(chart) = ctx.spec.chart(&def.chart) else { continue };
        let check = format!("structure/{name}");
        let sampler = ctx.sampler(&check);
        let compute = |compat: bool| {
            max_over(n, |i| -> Result<f64, VerifyError> {
                let x = PointSample::unchecked(sampler.point(i, chart.domain()));
                let j = LinearOperator::new(def.field.value_at(x.coords(), &def.params).map_err(|e| VerifyError::Check(e.to_string()))?);
                if compat {
                    let g = crate::geometry::metric_at(&chart, &x, &def.params).map_err(|e| VerifyError::Check(e.to_string()))?;
                    Ok(compatibility_residual(&j, &g, &def.params).map_err(|e| VerifyError::Check(e.to_string()))?.max())
                } else {
                    Ok(metallic_residual(&j, &def.params))
                }
            })
        };
        let note = format!("p={}, q={} on `{}`", def.params.p(), def.params.q(), def.chart);
        out.push(ctx.reduced(&format!("{check}/metallic"), &compute(false), "conjugation", &note));
        out.push(ctx.reduced(&format!("{check}/compatible"), &compute(true), "conjugation", &note));
    }

    for (name, m) in &ctx.spec.maps {
        let mut any = false;
        for (a, da) in ctx.spec.structures.iter().filter(|(_, d)| d.chart == m.source) {
            for (b, db) in ctx.spec.structures.iter().filter(|(_, d)| d.chart == m.target) {
                if da.params != db.params {
                    continue;
                }
                any = true;
                let check = format!("map/{name}/{a}-{b}");
                let r = metallic_map_residual(&m.map, &da.field, &db.field, &da.params, ctx.opts.seed, n);
                out.push(match r {
                    Ok(r) => ctx.reduced(&check, &r, "conjugation", "TPhi J1 - J2 TPhi"),
                    Err(e) => ctx.failed(&check, "conjugation", e.to_string()),
                });
            }
        }
        if !any {
            out.push(ctx.skip(&format!("map/{name}"), "no structures with equal (p, q) on source and target"));
        }
    }
    Ok(out)
}

fn max_curvature_entry(geom: &LocalGeometry) -> f64 {
    let r = geom.riemann();
    let d = geom.dim();
    let mut worst: f64 = 0.0;
    for l in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = crate::sampling::fmax(worst, r.get(l, k, i, j).abs());
                }
            }
        }
    }
    worst
}

/// Max over coordinate pairs `i < j` of `|K(e_i, e_j) - k|`.
fn sectional_defect(geom: &LocalGeometry, k: f64) -> f64 {
    let r = geom.riemann();
    let d = geom.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let (ei, ej) = (DVector::from_fn(d, |a, _| f64::from(a == i)), DVector::from_fn(d, |a, _| f64::from(a == j)));
            worst = crate::sampling::fmax(worst, (r.sectional(&geom.metric, &ei, &ej) - k).abs());
        }
    }
    worst
}

fn over_chart<F>(ctx: &Ctx, check: &str, chart: &ChartManifold, params: &MetallicParams, f: F) -> Reduction
where
    F: Fn(&LocalGeometry) -> f64 + Sync,
{
    let sampler = ctx.sampler(check);
    max_over(ctx.opts.samples, |i| -> Result<f64, crate::geometry::GeometryError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        Ok(f(&LocalGeometry::at(chart, &x, params)?))
    })
}

fn oracle_selfcheck(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q"])?;
    let params = ctx.metallic()?;
    let g = MetallicParams::golden();
    let mut out = vec![
        ctx.reduced(
            "catalog/sphere-sectional",
            &over_chart(ctx, "catalog/sphere-sectional", &catalog::unit_sphere(), &g, |geom| sectional_defect(geom, 1.0)),
            "oracle-self",
            "|K - 1| on the unit sphere",
        ),
        ctx.reduced(
            "catalog/hyperbolic-ricci",
            &over_chart(ctx, "catalog/hyperbolic-ricci", &catalog::hyperbolic_plane(), &g, |geom| {
                max_abs(&(geom.riemann().ricci() + &geom.metric))
            }),
            "oracle-curvature",
            "|S + g| on the hyperbolic plane",
        ),
        ctx.reduced(
            "catalog/polar-flat",
            &over_chart(ctx, "catalog/polar-flat", &catalog::polar_plane(), &g, max_curvature_entry),
            "oracle-self",
            "max |R| on the plane in polar coordinates",
        ),
    ];
    let catalog_charts = [catalog::euclidean(3), catalog::polar_plane(), catalog::unit_sphere(), catalog::hyperbolic_plane()];
    for chart in &catalog_charts {
        let check = format!("catalog/{}/metric-compatible", chart.name());
        let r = over_chart(ctx, &check, chart, &g, metric_compatibility_residual);
        out.push(ctx.reduced(&check, &r, "oracle-self", "max |nabla g|"));
    }
    let mut charts: Vec<ChartManifold> = ctx.spec.manifolds.values().cloned().collect();
    if let Some(w) = ctx.warp() {
        charts.push(build_warped_chart(w, &params).map_err(|e| VerifyError::Check(e.to_string()))?);
    }
    for chart in &charts {
        let check = format!("chart/{}/metric-compatible", chart.name());
        let r = over_chart(ctx, &check, chart, &params, metric_compatibility_residual);
        out.push(ctx.reduced(&check, &r, "oracle-self", "max |nabla g|"));
    }
    Ok(out)
}

fn warped_connection(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q"])?;
    let params = ctx.metallic()?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let seed = ctx.opts.seed;
    let n = ctx.opts.samples;
    Ok(vec![
        match connection_check(w, &params, seed, n) {
            Ok(r) => ctx.reduced("closed-form", &r, "oracle-curvature", "four horizontal/vertical combinations"),
            Err(e) => ctx.failed("closed-form", "oracle-curvature", e.to_string()),
        },
        match mixed_christoffel_residual(w, &params, seed, n) {
            Ok(r) => ctx.reduced("leaves", &r, "oracle-self", "mixed Christoffel symbols of the base leaves"),
            Err(e) => ctx.failed("leaves", "oracle-self", e.to_string()),
        },
    ])
}

fn case_record(ctx: &Ctx, check: &str, r: Result<Reduction, WarpedError>) -> Record {
    match r {
        Ok(r) => ctx.reduced(check, &r, "oracle-curvature", ""),
        Err(WarpedError::FiberTooSmall { m, .. }) => ctx.skip(check, format!("m>1 required (m = {m})")),
        Err(e) => ctx.failed(check, "oracle-curvature", e.to_string()),
    }
}

fn lemma_curvature(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q", "sectional"])?;
    let params = ctx.metallic()?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let mut out: Vec<Record> = (1..=5)
        .map(|c| {
            let check = format!("case-{c}");
            case_record(ctx, &check, lemma_curvature_check(w, c, &params, ctx.opts.seed, ctx.opts.samples))
        })
        .collect();
    if let Some(v) = ctx.params.get("sectional") {
        let k: f64 = v.trim().parse().map_err(|_| ctx.bad("sectional", format!("`{v}` is not a number")))?;
        let chart = build_warped_chart(w, &params).map_err(|e| VerifyError::Check(e.to_string()))?;
        let r = over_chart(ctx, "constant-curvature", &chart, &params, |geom| sectional_defect(geom, k));
        out.push(ctx.reduced("constant-curvature", &r, "oracle-curvature", &format!("|K - ({k})| on coordinate planes")));
    }
    Ok(out)
}

fn lemma_ricci(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q"])?;
    let params = ctx.metallic()?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    Ok((1..=3)
        .map(|c| {
            let check = format!("case-{c}");
            case_record(ctx, &check, lemma_ricci_check(w, c, &params, ctx.opts.seed, ctx.opts.samples))
        })
        .collect())
}

fn product_case(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q"])?;
    let params = ctx.metallic()?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    Ok(match product_case_residuals(w, &params, ctx.opts.seed, ctx.opts.samples) {
        Ok(r) => vec![
            ctx.reduced("curvature", &r.curvature, "oracle-self", "R against (R1, R2)"),
            ctx.reduced("ricci", &r.ricci, "oracle-self", "S against S1 + S2"),
        ],
        Err(WarpedError::NonUnitWarp(f)) => vec![
            ctx.skip("curvature", format!("warp `{f}` is not identically 1")),
            ctx.skip("ricci", format!("warp `{f}` is not identically 1")),
        ],
        Err(e) => vec![ctx.failed("curvature", "oracle-self", e.to_string()), ctx.failed("ricci", "oracle-self", e.to_string())],
    })
}

fn proposition_identities(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q", "structure", "pair", "powers"])?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let powers = ctx.uint("powers", 8)?;
    if !(1..=11).contains(&powers) {
        return Err(ctx.bad("powers", "must lie in 1..=11"));
    }
    let s = match ctx.product_structure(w, "plus")? {
        Ok(s) => s,
        Err(e) => return Ok(vec![ctx.failed("structure", "conjugation", e.to_string())]),
    };
    let (seed, n) = (ctx.opts.seed, ctx.opts.samples);
    let parallel = parallel_residual(&s.chart, &s.assembled, &s.params, seed, n);
    let mut out = vec![ctx.reduced("parallel", &parallel, "parallel", "|nabla J|")];
    let checks = ["commutes", "symmetric", "quadratic", "quadratic-literal", "powers"];
    match curvature_identity_residuals(&s.chart, &s.assembled, &s.params, seed, n, powers) {
        Ok(r) => {
            let swapped = if s.params.p() == s.params.q() {
                "p and q exchanged; agrees with the quadratic identity since p = q"
            } else {
                "p and q exchanged; expected to fail since p != q"
            };
            out.extend([
                ctx.reduced("commutes", &r.commutes, "oracle-curvature", "R(X,Y)J = J R(X,Y)"),
                ctx.reduced("symmetric", &r.symmetric, "oracle-curvature", "R(JX,Y) = R(X,JY)"),
                ctx.reduced("quadratic", &r.quadratic, "oracle-curvature", "R(JX,JY) = p R(JX,Y) + q R(X,Y)"),
                ctx.reduced("quadratic-literal", &r.quadratic_swapped, "oracle-curvature", swapped),
                ctx.reduced("powers", &r.powers, "oracle-curvature", &format!("R(J^k X, Y) for k <= {powers}, relative")),
            ]);
        }
        Err(e) if e.is_precondition() => {
            out.extend(checks.iter().map(|c| ctx.skip(c, "structure is not parallel")));
            if out[0].verdict != super::report::Verdict::Fail {
                out[0] = ctx.failed("parallel", "parallel", e.to_string());
            }
        }
        Err(e) => out.extend(checks.iter().map(|c| ctx.failed(c, "oracle-curvature", e.to_string()))),
    }
    Ok(out)
}

fn locally_metallic(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q", "pair"])?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let (j1, j2) = ctx.pair(w)?;
    let params = j1.params;
    let (seed, n) = (ctx.opts.seed, ctx.opts.samples);
    let pair = match j_pair(w, &j1, &j2) {
        Ok(p) => p,
        Err(e) => return Ok(vec![ctx.failed("pair", "conjugation", e.to_string())]),
    };
    let mut out = Vec::new();
    for (check, map, factor) in [
        ("projection-base", CoordinateMap::base_projection(w, &params), &j1.field),
        ("projection-fiber", CoordinateMap::fiber_projection(w, &params), &j2.field),
    ] {
        let r = map.and_then(|m| metallic_map_residual(&m, &pair.assembled, factor, &params, seed, n));
        out.push(match r {
            Ok(r) => ctx.reduced(check, &r, "conjugation", "the projection is a metallic map"),
            Err(e) => ctx.failed(check, "conjugation", e.to_string()),
        });
    }
    let tol = ctx.tol("parallel");
    let checks = ["condition-a", "condition-b", "direct", "agreement"];
    match locally_metallic_conditions(w, &j1.field, &j2.field, &params, seed, n) {
        Ok(r) => {
            let conditions = r.a.first_error.is_none() && r.b.first_error.is_none() && r.a.max <= tol && r.b.max <= tol;
            let direct = r.c.first_error.is_none() && r.c.max <= tol;
            let outcome = if direct { "parallel" } else { "not parallel" };
            out.extend([
                ctx.reduced("condition-a", &r.a, "parallel", "df(J1 X) V = df(X) J2 V"),
                ctx.reduced("condition-b", &r.b, "parallel", "g2(U, J2 V) grad f = g2(U, V) J1 grad f"),
                ctx.reduced("direct", &r.c, "parallel", "|nabla J~| on the product"),
                Record::measured(
                    ctx.suite,
                    ctx.id("agreement"),
                    n,
                    if conditions == direct { 0.0 } else { 1.0 },
                    0.0,
                    format!("conditions and direct check agree: {outcome}"),
                ),
            ]);
        }
        Err(e) if e.is_precondition() => {
            out.push(ctx.failed("precondition", "parallel", e.to_string()));
            out.extend(checks.iter().map(|c| ctx.skip(c, "factor structures are not parallel")));
        }
        Err(e) => out.extend(checks.iter().map(|c| ctx.failed(c, "parallel", e.to_string()))),
    }
    Ok(out)
}

fn fiber_invariance(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q", "structure", "pair"])?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let s = match ctx.product_structure(w, "plus")? {
        Ok(s) => s,
        Err(e) => return Ok(vec![ctx.failed("structure", "conjugation", e.to_string())]),
    };
    Ok(vec![match fiber_invariance_residual(w, &s, ctx.opts.seed, ctx.opts.samples) {
        Ok(r) => ctx.reduced("hessian", &r, "oracle-curvature", "Hess f(X,Y) JU = Hess f(JX,Y) U and J keeps fibers"),
        Err(e) => ctx.failed("hessian", "oracle-curvature", e.to_string()),
    }])
}

fn ricci_invariance(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["p", "q", "pair"])?;
    let Some(w) = ctx.warp() else { return Ok(ctx.no_warp()) };
    let (j1, j2) = ctx.pair(w)?;
    let tol = ctx.tol("oracle-curvature");
    let checks = ["hessian-defect", "ricci-defect", "vertical-symmetry", "implication"];
    let mut out = Vec::new();
    match ricci_invariance_residuals(w, &j1.field, &j2.field, &j1.params, ctx.opts.seed, ctx.opts.samples) {
        Ok(r) => {
            let symmetric_hessian = r.hessian_defect.first_error.is_none() && r.hessian_defect.max <= tol;
            let implication = match (symmetric_hessian, r.ricci_defect.first_error.is_none()) {
                (false, _) => 0.0,
                (true, true) => r.ricci_defect.max,
                (true, false) => f64::INFINITY,
            };
            out.extend([
                ctx.reduced("hessian-defect", &r.hessian_defect, "oracle-curvature", "Hess f(J1 X, Y) - Hess f(X, J1 Y)"),
                ctx.reduced("ricci-defect", &r.ricci_defect, "oracle-curvature", "S(JV, W) - S(V, JW)"),
                ctx.reduced("vertical-symmetry", &r.vertical_defect, "oracle-curvature", "S(JV, W) - S(V, JW) for vertical V, W"),
                Record::measured(
                    ctx.suite,
                    ctx.id("implication"),
                    r.ricci_defect.evaluated + r.ricci_defect.aborted,
                    implication,
                    tol,
                    if symmetric_hessian {
                        "symmetric Hessian: the Ricci defect must vanish"
                    } else {
                        "Hessian not J1-symmetric: nothing to check"
                    },
                ),
            ]);
        }
        Err(e) if e.is_precondition() => {
            out.push(ctx.failed("precondition", "oracle-curvature", e.to_string()));
            out.extend(checks.iter().map(|c| ctx.skip(c, "factor Ricci tensors are not invariant")));
        }
        Err(e) => out.extend(checks.iter().map(|c| ctx.failed(c, "oracle-curvature", e.to_string()))),
    }
    Ok(out)
}

fn example3(ctx: &Ctx) -> Result<Vec<Record>, VerifyError> {
    ctx.allow(&["n", "k", "p", "q"])?;
    let n = ctx.uint("n", 2)? as usize;
    let k = ctx.uint("k", 1)? as usize;
    if n == 0 {
        return Err(ctx.bad("n", "must be at least 1"));
    }
    if k > n {
        return Err(ctx.bad("k", format!("must lie in 0..={n}")));
    }
    let params = ctx.metallic()?;
    let samples = ctx.opts.samples;
    let closed = slant_cosine(n, k, &params).map_err(|e| ctx.bad("k", e.to_string()))?;
    let mut domain = vec![(0.5, 2.0)];
    domain.extend(std::iter::repeat_n((0.0, std::f64::consts::FRAC_PI_2), n));
    let sampler = ctx.sampler("configurations");
    let at = |i: usize| {
        let x = sampler.point(i, &domain);
        ExampleConfig::new(n, k, params, x[0], x[1..].to_vec())
    };
    let frame = max_over(samples, |i| -> Result<f64, crate::gallery::GalleryError> {
        let c = at(i)?;
        let mut expected = DMatrix::identity(n + 1, n + 1) * (c.u * c.u);
        expected[(0, 0)] = n as f64;
        Ok(max_abs(&(gram(&frame_at(&c)) - expected)))
    });
    let orth = max_over(samples, |i| jz0_orthogonality_residual(&at(i)?));
    let slant = max_over(samples, |i| Ok::<_, crate::gallery::GalleryError>((frame_slant_cosine(&at(i)?)? - closed).abs()));
    let ambient = |c: ConjugateRoot| {
        ambient_j(n, k, &params, c).map(|j| metallic_residual(&LinearOperator::new(j), &params))
    };
    let mut out = vec![
        ctx.reduced("gram", &frame, "algebraic", &format!("diag({n}, u^2, ...)")),
        ctx.reduced("orthogonality", &orth, "algebraic", "<JZ0, Zi>"),
        ctx.reduced("slant-cosine", &slant, "algebraic", &format!("cos = {closed:.16e}, frame against closed form")),
    ];
    let split = if 2 <= k && k < n { "split" } else { "unsplit" };
    for (check, conj, note) in [
        ("ambient-metallic", ConjugateRoot::PMinusSigma, format!("conjugate root p - sigma, k = {k} ({split})")),
        ("ambient-metallic-literal", ConjugateRoot::OneMinusSigma, "conjugate root 1 - sigma; a root only when p = 1".into()),
    ] {
        out.push(match ambient(conj) {
            Ok(r) => Record::measured(ctx.suite, ctx.id(check), 1, r, ctx.tol("algebraic"), note),
            Err(e) => ctx.failed(check, "algebraic", e.to_string()),
        });
    }
    out.push(match immersion_pullback_residual(n, &params, ctx.opts.seed, samples) {
        Ok(r) => ctx.reduced("pullback", &r, "conjugation", "immersion pullback against n du^2 + u^2 sum da^2"),
        Err(e) => ctx.failed("pullback", "conjugation", e.to_string()),
    });
    Ok(out)
}
