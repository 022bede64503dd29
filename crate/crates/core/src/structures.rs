//! Metallic structures on warped products.
//!
//! Two families are built on `M1 x_f M2`: the projector-induced structures
//! `J~± = ±((2 sigma - p)/2) F + (p/2) I` with `F = pi1 - pi2`, and the
//! pairwise structure `J~ = (J1, J2)` from metallic structures on the
//! factors. The rest of the module measures the identities and the
//! conditions that decide when these structures are parallel or preserve
//! the Ricci tensor.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{
    compatibility_residual, fibonacci, max_abs, metallic_residual, AlgebraError, LinearOperator,
    MetallicParams, Sign, CONJUGATION_TOL,
};
use crate::expr::{CompiledExpr, Constant, Expr};
use crate::geometry::{
    metric_at, nabla_operator_residual_at, ricci_operator, ChartManifold, GeometryError,
    LinearOperatorField, LocalGeometry, PointSample,
};
use crate::sampling::{fmax, max_over, random_vector, Reduction, Sampler};
use crate::warped::{build_warped_chart, WarpedError, WarpedPoint, WarpedProductSpec};

/// Bound on `|nabla J|` for a structure to count as parallel.
pub const PARALLEL_TOL: f64 = 1e-9;
/// Bound on `|QJ - JQ|` and `|S(J.,.) - S(.,J.)|` for factor Ricci tensors.
pub const RICCI_INVARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Warped(#[from] WarpedError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("factor structures use different parameters: ({0}, {1}) and ({2}, {3})")]
    ParamsMismatch(u32, u32, u32, u32),
    #[error("{factor} structure is not metallic (residual {residual:e})")]
    NotMetallic { factor: &'static str, residual: f64 },
    #[error("{factor} structure is not compatible with its metric (residual {residual:e})")]
    NotCompatible { factor: &'static str, residual: f64 },
    #[error("precondition failed: {factor} structure is not parallel (|nabla J| = {residual:e})")]
    NotParallel { factor: &'static str, residual: f64 },
    #[error("precondition failed: {factor} Ricci tensor is not J-invariant (residual {residual:e})")]
    RicciNotInvariant { factor: &'static str, residual: f64 },
    #[error("evaluation failed at sample {index}: {message}")]
    SampleFailed { index: usize, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl StructureError {
    /// Precondition failures are reported apart from residual failures.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            StructureError::NotParallel { .. } | StructureError::RicciNotInvariant { .. }
        )
    }
}

impl From<crate::expr::EvalError> for StructureError {
    fn from(e: crate::expr::EvalError) -> StructureError {
        StructureError::Geometry(e.into())
    }
}

fn block_diagonal(chart: &ChartManifold, n: usize, base: &[Vec<Expr>], fiber: &[Vec<Expr>]) -> Result<LinearOperatorField, GeometryError> {
    let d = chart.dim();
    let entries = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match (i < n, j < n) {
                    (true, true) => base[i][j].clone(),
                    (false, false) => fiber[i - n][j - n].clone(),
                    _ => Expr::num(0.0),
                })
                .collect()
        })
        .collect();
    LinearOperatorField::new(chart, entries)
}

fn scalar_block(d: usize, k: Expr) -> Vec<Vec<Expr>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { k.clone() } else { Expr::num(0.0) }).collect())
        .collect()
}

/// `F = pi1 - pi2 = diag(I_n, -I_m)` on the warped chart.
pub fn product_structure_f(spec: &WarpedProductSpec, params: &MetallicParams) -> Result<LinearOperatorField, StructureError> {
    let chart = build_warped_chart(spec, params)?;
    Ok(block_diagonal(
        &chart,
        spec.n(),
        &scalar_block(spec.n(), Expr::num(1.0)),
        &scalar_block(spec.m(), Expr::num(-1.0)),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureVariant {
    /// `J~± = ±((2 sigma - p)/2) F + (p/2) I`.
    ProjectorInduced(Sign),
    /// `J~ = (J1, J2)`.
    Pairwise,
}

/// A metallic structure assembled on the chart of a warped product.
#[derive(Debug, Clone)]
pub struct ProductMetallicStructure {
    pub variant: StructureVariant,
    pub params: MetallicParams,
    pub assembled: LinearOperatorField,
    pub chart: ChartManifold,
}

/// A structure on one factor, with the parameters it is metallic for.
#[derive(Debug, Clone)]
pub struct FactorStructure {
    pub field: LinearOperatorField,
    pub params: MetallicParams,
}

impl FactorStructure {
    pub fn new(field: LinearOperatorField, params: MetallicParams) -> FactorStructure {
        FactorStructure { field, params }
    }

    /// `k I` on `chart`, with `k` one of the two metallic roots.
    pub fn scalar(chart: &ChartManifold, root: Constant, params: MetallicParams) -> FactorStructure {
        FactorStructure::new(LinearOperatorField::scalar(chart, Expr::Const(root)), params)
    }
}

/// `J~+ = diag(sigma I_n, sigbar I_m)` or `J~- = diag(sigbar I_n, sigma I_m)`.
///
/// The entries are the symbolic roots, so the field evaluates to
/// `±((2 sigma - p)/2) F + (p/2) I` for whichever parameters it is
/// evaluated with.
pub fn j_pm_product(spec: &WarpedProductSpec, sign: Sign, params: &MetallicParams) -> Result<ProductMetallicStructure, StructureError> {
    let chart = build_warped_chart(spec, params)?;
    let (on_base, on_fiber) = match sign {
        Sign::Plus => (Constant::Sigma, Constant::Sigbar),
        Sign::Minus => (Constant::Sigbar, Constant::Sigma),
    };
    let assembled = block_diagonal(
        &chart,
        spec.n(),
        &scalar_block(spec.n(), Expr::Const(on_base)),
        &scalar_block(spec.m(), Expr::Const(on_fiber)),
    )?;
    Ok(ProductMetallicStructure {
        variant: StructureVariant::ProjectorInduced(sign),
        params: *params,
        assembled,
        chart,
    })
}

/// Largest metallic and compatibility residuals of `j` against the metric
/// of `chart` over `samples` points.
fn factor_residuals(
    chart: &ChartManifold,
    j: &FactorStructure,
    seed: u64,
    samples: usize,
) -> (Reduction, Reduction) {
    let sampler = Sampler::new(seed, &format!("factor-structure/{}", chart.name()));
    let at = |i: usize, compat: bool| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let m = LinearOperator::new(j.field.value_at(x.coords(), &j.params)?);
        if compat {
            let g = metric_at(chart, &x, &j.params)?;
            Ok(compatibility_residual(&m, &g, &j.params)?.max())
        } else {
            Ok(metallic_residual(&m, &j.params))
        }
    };
    (max_over(samples, |i| at(i, false)), max_over(samples, |i| at(i, true)))
}

fn require_below(r: &Reduction, tol: f64, err: impl Fn(f64) -> StructureError) -> Result<(), StructureError> {
    if let Some((index, message)) = &r.first_error {
        return Err(StructureError::SampleFailed {
            index: *index,
            message: message.clone(),
        });
    }
    if !(r.max <= tol) {
        return Err(err(r.max));
    }
    Ok(())
}

/// Number of factor points checked by [`j_pair`].
pub const FACTOR_CHECK_SAMPLES: usize = 32;

/// `J~(X, Y) = (J1 X, J2 Y)`, after checking that both factor structures
/// share `(p, q)` and are metallic and metric-compatible.
pub fn j_pair(
    spec: &WarpedProductSpec,
    j1: &FactorStructure,
    j2: &FactorStructure,
) -> Result<ProductMetallicStructure, StructureError> {
    let (a, b) = (j1.params, j2.params);
    if (a.p(), a.q()) != (b.p(), b.q()) {
        return Err(StructureError::ParamsMismatch(a.p(), a.q(), b.p(), b.q()));
    }
    j1.field.check_chart(spec.base())?;
    j2.field.check_chart(spec.fiber())?;
    for (factor, chart, j) in [("base", spec.base(), j1), ("fiber", spec.fiber(), j2)] {
        let (metallic, compat) = factor_residuals(chart, j, 0, FACTOR_CHECK_SAMPLES);
        require_below(&metallic, CONJUGATION_TOL, |residual| StructureError::NotMetallic { factor, residual })?;
        require_below(&compat, CONJUGATION_TOL, |residual| StructureError::NotCompatible { factor, residual })?;
    }
    let chart = build_warped_chart(spec, &a)?;
    let assembled = block_diagonal(&chart, spec.n(), j1.field.entries(), j2.field.entries())?;
    Ok(ProductMetallicStructure {
        variant: StructureVariant::Pairwise,
        params: a,
        assembled,
        chart,
    })
}

impl ProductMetallicStructure {
    pub fn value_at(&self, x: &PointSample) -> Result<DMatrix<f64>, StructureError> {
        Ok(self.assembled.value_at(x.coords(), &self.params)?)
    }

    /// Max over samples of the metallic residual and of the compatibility
    /// residual with the warped metric.
    pub fn residuals(&self, seed: u64, samples: usize) -> (Reduction, Reduction) {
        factor_residuals(
            &self.chart,
            &FactorStructure::new(self.assembled.clone(), self.params),
            seed,
            samples,
        )
    }

    /// Max over samples of `|nabla~ J~|` on the warped chart.
    pub fn parallel_residual(&self, seed: u64, samples: usize) -> Reduction {
        parallel_residual(&self.chart, &self.assembled, &self.params, seed, samples)
    }
}

/// Max over samples of `|nabla J|` for a field on `chart`.
pub fn parallel_residual(
    chart: &ChartManifold,
    field: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Reduction {
    let sampler = Sampler::new(seed, &format!("parallel/{}", chart.name()));
    max_over(samples, |i| {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        nabla_operator_residual_at(chart, field, params, &x)
    })
}

/// A smooth map between charts, one component expression per target
/// coordinate in the source coordinates.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    source: ChartManifold,
    target: ChartManifold,
    components: Vec<Expr>,
    compiled: Vec<CompiledExpr>,
}

impl CoordinateMap {
    pub fn new(source: ChartManifold, target: ChartManifold, components: Vec<Expr>) -> Result<CoordinateMap, StructureError> {
        if components.len() != target.dim() {
            return Err(StructureError::Dimension(format!(
                "map into `{}` needs {} components, got {}",
                target.name(),
                target.dim(),
                components.len()
            )));
        }
        let compiled = components
            .iter()
            .map(|e| {
                CompiledExpr::new(e, source.coords()).map_err(|err| GeometryError::ForeignVariable {
                    chart: source.name().to_string(),
                    detail: err.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CoordinateMap {
            source,
            target,
            components,
            compiled,
        })
    }

    pub fn identity(chart: &ChartManifold) -> CoordinateMap {
        let comps = chart.coords().iter().map(|c| Expr::var(c.clone())).collect();
        CoordinateMap::new(chart.clone(), chart.clone(), comps).expect("identity map is well-formed")
    }

    /// The projection of the warped chart onto the base.
    pub fn base_projection(spec: &WarpedProductSpec, params: &MetallicParams) -> Result<CoordinateMap, StructureError> {
        let comps = spec.base().coords().iter().map(|c| Expr::var(c.clone())).collect();
        CoordinateMap::new(build_warped_chart(spec, params)?, spec.base().clone(), comps)
    }

    /// The projection of the warped chart onto the fiber.
    pub fn fiber_projection(spec: &WarpedProductSpec, params: &MetallicParams) -> Result<CoordinateMap, StructureError> {
        let comps = spec.fiber().coords().iter().map(|c| Expr::var(c.clone())).collect();
        CoordinateMap::new(build_warped_chart(spec, params)?, spec.fiber().clone(), comps)
    }

    pub fn source(&self) -> &ChartManifold {
        &self.source
    }

    pub fn target(&self) -> &ChartManifold {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Image point and Jacobian `D[(a, i)] = d_i Phi^a`.
    pub fn jet_at(&self, x: &[f64], params: &MetallicParams) -> Result<(Vec<f64>, DMatrix<f64>), StructureError> {
        let mut y = Vec::with_capacity(self.compiled.len());
        let mut d = DMatrix::zeros(self.compiled.len(), x.len());
        for (a, c) in self.compiled.iter().enumerate() {
            let jet = c.eval_jet2(x, params)?;
            y.push(jet.value);
            for i in 0..x.len() {
                d[(a, i)] = jet.gradient[i];
            }
        }
        Ok((y, d))
    }
}

/// Max over samples of `|D Phi J1 - J2(Phi(x)) D Phi|`.
pub fn metallic_map_residual(
    map: &CoordinateMap,
    j1: &LinearOperatorField,
    j2: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, StructureError> {
    j1.check_chart(&map.source)?;
    j2.check_chart(&map.target)?;
    let sampler = Sampler::new(seed, "metallic-map");
    Ok(max_over(samples, |i| -> Result<f64, StructureError> {
        let x = sampler.point(i, map.source.domain());
        let (y, d) = map.jet_at(&x, params)?;
        let a = j1.value_at(&x, params)?;
        let b = j2.value_at(&y, params)?;
        Ok(max_abs(&(&d * a - b * &d)))
    }))
}

/// The three residuals deciding whether a pairwise structure is parallel
/// on the warped product.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyMetallicResiduals {
    /// `|df^2(J1 X) V - df^2(X) J2 V|`.
    pub a: Reduction,
    /// `|g2(U, J2 V) grad f^2 - g2(U, V) J1 grad f^2|`.
    pub b: Reduction,
    /// `|nabla~ J~|` computed by the oracle on the warped chart.
    pub c: Reduction,
}

fn require_parallel(
    factor: &'static str,
    chart: &ChartManifold,
    field: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<(), StructureError> {
    let r = parallel_residual(chart, field, params, seed, samples);
    require_below(&r, PARALLEL_TOL, |residual| StructureError::NotParallel { factor, residual })
}

pub fn locally_metallic_conditions(
    spec: &WarpedProductSpec,
    j1: &LinearOperatorField,
    j2: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<LocallyMetallicResiduals, StructureError> {
    j1.check_chart(spec.base())?;
    j2.check_chart(spec.fiber())?;
    require_parallel("base", spec.base(), j1, params, seed, samples)?;
    require_parallel("fiber", spec.fiber(), j2, params, seed, samples)?;
    let chart = build_warped_chart(spec, params)?;
    let assembled = block_diagonal(&chart, spec.n(), j1.entries(), j2.entries())?;
    let sampler = Sampler::new(seed, "locally-metallic");
    let (n, m) = (spec.n(), spec.m());

    let pieces = |i: usize| -> Result<(WarpedPoint, DMatrix<f64>, DMatrix<f64>, PointSample), StructureError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let w = WarpedPoint::at(spec, &x, params)?;
        let a = j1.value_at(&x.coords()[..n], params)?;
        let b = j2.value_at(&x.coords()[n..], params)?;
        Ok((w, a, b, x))
    };
    let a = max_over(samples, |i| -> Result<f64, StructureError> {
        let (w, ja, jb, _) = pieces(i)?;
        let mut rng = sampler.rng(i);
        let x1 = random_vector(&mut rng, n);
        let v = random_vector(&mut rng, m);
        let d_f_sq = &w.warp.differential * (2.0 * w.warp.value);
        let lhs = &v * d_f_sq.dot(&(&ja * &x1));
        let rhs = (&jb * &v) * d_f_sq.dot(&x1);
        Ok(max_abs_vec(&(lhs - rhs)))
    });
    let b = max_over(samples, |i| -> Result<f64, StructureError> {
        let (w, ja, jb, _) = pieces(i)?;
        let mut rng = sampler.rng(i);
        let u = random_vector(&mut rng, m);
        let v = random_vector(&mut rng, m);
        let g2 = &w.fiber.metric;
        let grad_f_sq = &w.warp.gradient * (2.0 * w.warp.value);
        let lhs = &grad_f_sq * (g2 * &u).dot(&(&jb * &v));
        let rhs = (&ja * &grad_f_sq) * (g2 * &u).dot(&v);
        Ok(max_abs_vec(&(lhs - rhs)))
    });
    let c = max_over(samples, |i| -> Result<f64, StructureError> {
        let (_, _, _, x) = pieces(i)?;
        Ok(nabla_operator_residual_at(&chart, &assembled, params, &x)?)
    });
    Ok(LocallyMetallicResiduals { a, b, c })
}

fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| if x.is_nan() { f64::INFINITY } else { acc.max(x.abs()) })
}

/// Residuals of the curvature identities of a parallel metallic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureIdentityResiduals {
    /// `R(X,Y)J = J R(X,Y)`.
    pub commutes: Reduction,
    /// `R(JX,Y) = R(X,JY)`.
    pub symmetric: Reduction,
    /// `R(JX,JY) = p R(JX,Y) + q R(X,Y)`.
    pub quadratic: Reduction,
    /// `R(JX,JY) = q R(JX,Y) + p R(X,Y)`, which only holds when `p = q`;
    /// evaluated for comparison.
    pub quadratic_swapped: Reduction,
    /// `R(J^{k+1}X,Y) = g_{k+1} R(JX,Y) + q g_k R(X,Y)` for `k = 1..=n_max`,
    /// relative to the largest of the three terms (floored at 1).
    pub powers: Reduction,
}

impl CurvatureIdentityResiduals {
    /// Largest of the four identities that hold for every `(p, q)`.
    pub fn max(&self) -> f64 {
        [&self.commutes, &self.symmetric, &self.quadratic, &self.powers]
            .iter()
            .fold(0.0, |acc, r| fmax(acc, r.max))
    }
}

pub fn curvature_identity_residuals(
    chart: &ChartManifold,
    j: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
    n_max: u32,
) -> Result<CurvatureIdentityResiduals, StructureError> {
    require_parallel("given", chart, j, params, seed, samples)?;
    let fib = (0..=n_max + 1)
        .map(|k| fibonacci(params.p(), params.q(), k).map(|g| g as f64))
        .collect::<Result<Vec<_>, _>>()?;
    let sampler = Sampler::new(seed, "curvature-identities");
    let (p, q) = (params.pf(), params.qf());
    let d = chart.dim();
    let eval = |i: usize, which: u8| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let r = LocalGeometry::at(chart, &x, params)?.riemann();
        let jm = j.value_at(x.coords(), params)?;
        let mut rng = sampler.rng(i);
        let u = random_vector(&mut rng, d);
        let v = random_vector(&mut rng, d);
        let (ju, jv) = (&jm * &u, &jm * &v);
        let out = match which {
            0 => {
                let ruv = r.operator(&u, &v);
                max_abs(&(&ruv * &jm - &jm * &ruv))
            }
            1 => max_abs(&(r.operator(&ju, &v) - r.operator(&u, &jv))),
            2 => max_abs(&(r.operator(&ju, &jv) - r.operator(&ju, &v) * p - r.operator(&u, &v) * q)),
            3 => max_abs(&(r.operator(&ju, &jv) - r.operator(&ju, &v) * q - r.operator(&u, &v) * p)),
            _ => {
                let (rjuv, ruv) = (r.operator(&ju, &v), r.operator(&u, &v));
                let mut power = ju.clone();
                let mut worst: f64 = 0.0;
                for k in 1..=n_max as usize {
                    power = &jm * power;
                    let lhs = r.operator(&power, &v);
                    let (a, b) = (&rjuv * fib[k + 1], &ruv * (q * fib[k]));
                    let scale = [max_abs(&lhs), max_abs(&a), max_abs(&b), 1.0].into_iter().fold(0.0, f64::max);
                    worst = fmax(worst, max_abs(&(&lhs - a - b)) / scale);
                }
                worst
            }
        };
        Ok(out)
    };
    let run = |which: u8| max_over(samples, |i| eval(i, which));
    Ok(CurvatureIdentityResiduals {
        commutes: run(0),
        symmetric: run(1),
        quadratic: run(2),
        quadratic_swapped: run(3),
        powers: run(4),
    })
}

/// Max over samples of two residuals folded by max: the base block of
/// `J~` applied to vertical vectors, and
/// `|Hess f(X,Y) J~U - Hess f(J~X,Y) U|` for lifted `X, Y, U`.
pub fn fiber_invariance_residual(
    spec: &WarpedProductSpec,
    structure: &ProductMetallicStructure,
    seed: u64,
    samples: usize,
) -> Result<Reduction, StructureError> {
    structure.assembled.check_chart(&structure.chart)?;
    if structure.chart.dim() != spec.dim() {
        return Err(StructureError::Dimension("structure does not live on this product".into()));
    }
    let sampler = Sampler::new(seed, "fiber-invariance");
    let (n, m) = (spec.n(), spec.m());
    let domain = spec.domain();
    Ok(max_over(samples, |i| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(sampler.point(i, &domain));
        let w = WarpedPoint::at(spec, &x, &structure.params)?;
        let jm = structure.value_at(&x)?;
        let mixed = max_abs(&jm.view((0, n), (n, m)).into_owned());
        let mut rng = sampler.rng(i);
        let lift = |v: DVector<f64>, offset: usize| {
            let mut full = DVector::zeros(n + m);
            full.rows_mut(offset, v.len()).copy_from(&v);
            full
        };
        let xh = lift(random_vector(&mut rng, n), 0);
        let yh = lift(random_vector(&mut rng, n), 0);
        let uv = lift(random_vector(&mut rng, m), n);
        let hess = |a: &DVector<f64>, b: &DVector<f64>| {
            (&w.warp.hessian * a.rows(0, n)).dot(&b.rows(0, n))
        };
        let lhs = (&jm * &uv) * hess(&xh, &yh);
        let rhs = &uv * hess(&(&jm * &xh), &yh);
        Ok(fmax(mixed, max_abs_vec(&(lhs - rhs))))
    }))
}

/// Defects of the Ricci-invariance criterion for a pairwise structure.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciInvarianceResiduals {
    /// `|Hess f(J1 X, Y) - Hess f(X, J1 Y)|` on the base.
    pub hessian_defect: Reduction,
    /// `|S~(J~V, W) - S~(V, J~W)|` on the warped chart (oracle Ricci).
    pub ricci_defect: Reduction,
    /// The same for vertical `V, W` only.
    pub vertical_defect: Reduction,
}

fn require_ricci_invariant(
    factor: &'static str,
    chart: &ChartManifold,
    j: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<(), StructureError> {
    let sampler = Sampler::new(seed, &format!("ricci-precondition/{}", chart.name()));
    let r = max_over(samples, |i| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let geom = LocalGeometry::at(chart, &x, params)?;
        let s = geom.riemann().ricci();
        let q = ricci_operator(&geom);
        let jm = j.value_at(x.coords(), params)?;
        let commutator = max_abs(&(&q * &jm - &jm * &q));
        let symmetry = max_abs(&(jm.transpose() * &s - &s * &jm));
        Ok(commutator.max(symmetry))
    });
    require_below(&r, RICCI_INVARIANCE_TOL, |residual| StructureError::RicciNotInvariant { factor, residual })
}

pub fn ricci_invariance_residuals(
    spec: &WarpedProductSpec,
    j1: &LinearOperatorField,
    j2: &LinearOperatorField,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<RicciInvarianceResiduals, StructureError> {
    j1.check_chart(spec.base())?;
    j2.check_chart(spec.fiber())?;
    require_ricci_invariant("base", spec.base(), j1, params, seed, samples)?;
    require_ricci_invariant("fiber", spec.fiber(), j2, params, seed, samples)?;
    let chart = build_warped_chart(spec, params)?;
    let assembled = block_diagonal(&chart, spec.n(), j1.entries(), j2.entries())?;
    let (n, m) = (spec.n(), spec.m());

    let base_sampler = Sampler::new(seed, "ricci-invariance/base");
    let hessian_defect = max_over(samples, |i| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(base_sampler.point(i, spec.base().domain()));
        let geom = LocalGeometry::at(spec.base(), &x, params)?;
        let warp = CompiledExpr::new(spec.warp(), spec.base().coords())?;
        let h = crate::geometry::ScalarDerivatives::compute(&geom, &warp, params)?.hessian;
        let jm = j1.value_at(x.coords(), params)?;
        let mut rng = base_sampler.rng(i);
        let (u, v) = (random_vector(&mut rng, n), random_vector(&mut rng, n));
        Ok(((&h * (&jm * &u)).dot(&v) - (&h * &u).dot(&(&jm * &v))).abs())
    });

    let sampler = Sampler::new(seed, "ricci-invariance/product");
    let defect = |i: usize, vertical: bool| -> Result<f64, StructureError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let s = LocalGeometry::at(&chart, &x, params)?.riemann().ricci();
        let jm = assembled.value_at(x.coords(), params)?;
        let mut rng = sampler.rng(i);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            if vertical {
                let mut v = DVector::zeros(n + m);
                v.rows_mut(n, m).copy_from(&random_vector(rng, m));
                v
            } else {
                random_vector(rng, n + m)
            }
        };
        let (v, w) = (draw(&mut rng), draw(&mut rng));
        Ok(((&s * &w).dot(&(&jm * &v)) - (&s * (&jm * &w)).dot(&v)).abs())
    };
    Ok(RicciInvarianceResiduals {
        hessian_defect,
        ricci_defect: max_over(samples, |i| defect(i, false)),
        vertical_defect: max_over(samples, |i| defect(i, true)),
    })
}
