//! Warped products `M1 x_f M2` and the closed forms of their connection,
//! curvature and Ricci tensor in terms of the factors and the warping
//! function.
//!
//! Every closed form here is evaluated from factor data only: the base and
//! fiber charts and the derivatives of `f` on the base. The `*_check`
//! functions compare them with the brute-force oracle applied to the
//! assembled chart from [`build_warped_chart`].
//!
//! ```
//! use metallic_warp::algebra::MetallicParams;
//! use metallic_warp::warped::{build_warped_chart, WarpedProductSpec};
//!
//! let spec = WarpedProductSpec::polar_plane();
//! let chart = build_warped_chart(&spec, &MetallicParams::golden()).unwrap();
//! assert_eq!(chart.metric_exprs()[1][1].to_string(), "u ^ 2.0");
//! ```

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::algebra::MetallicParams;
use crate::expr::{BinOp, CompiledExpr, Expr, Func};
use crate::geometry::{
    catalog, ChartManifold, GeometryError, LocalGeometry, PointSample, ScalarDerivatives,
    TangentVector,
};
use crate::sampling::{max_over, random_vector, Reduction, Sampler};

/// Base points at which the warping function is checked for positivity.
pub const WARP_CHECK_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarpedError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("coordinate `{0}` appears in both the base and the fiber")]
    CoordinateCollision(String),
    #[error("warping function uses `{0}`, which is not a base coordinate")]
    ForeignWarpVariable(String),
    #[error("warping function is not positive at base point {point:?} (f = {value})")]
    NonPositiveWarp { point: Vec<f64>, value: f64 },
    #[error("there is no {family} case {case}")]
    UnknownCase { family: &'static str, case: u8 },
    #[error("{family} case {case} expects {expected} arguments")]
    LiftKinds {
        family: &'static str,
        case: u8,
        expected: &'static str,
    },
    #[error("{family} case {case} requires a fiber of dimension m > 1 (m = {m})")]
    FiberTooSmall {
        family: &'static str,
        case: u8,
        m: usize,
    },
    #[error("the product case needs the warping function 1, got `{0}`")]
    NonUnitWarp(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl From<crate::expr::EvalError> for WarpedError {
    fn from(e: crate::expr::EvalError) -> WarpedError {
        WarpedError::Geometry(e.into())
    }
}

/// A base chart, a fiber chart and a warping function on the base.
#[derive(Debug, Clone)]
pub struct WarpedProductSpec {
    base: ChartManifold,
    fiber: ChartManifold,
    warp: Expr,
    compiled_warp: CompiledExpr,
}

impl WarpedProductSpec {
    pub fn new(base: ChartManifold, fiber: ChartManifold, warp: Expr) -> Result<WarpedProductSpec, WarpedError> {
        if let Some(c) = base.coords().iter().find(|c| fiber.coords().contains(c)) {
            return Err(WarpedError::CoordinateCollision(c.clone()));
        }
        if let Some(v) = warp.free_vars().into_iter().find(|v| !base.coords().contains(v)) {
            return Err(WarpedError::ForeignWarpVariable(v));
        }
        let compiled_warp = CompiledExpr::new(&warp, base.coords())?;
        Ok(WarpedProductSpec {
            base,
            fiber,
            warp,
            compiled_warp,
        })
    }

    /// The polar plane as `(0, inf) x_u S^1`.
    pub fn polar_plane() -> WarpedProductSpec {
        WarpedProductSpec::new(catalog::ray(), catalog::circle(), Expr::var("u"))
            .expect("polar spec is well-formed")
    }

    /// Hyperbolic 3-space as `R x_{e^t} R^2`.
    pub fn hyperbolic_space() -> WarpedProductSpec {
        let base = ChartManifold::parse("time", &["t"], &[(-1.0, 1.0)], &[&["1"]])
            .expect("time chart is well-formed");
        WarpedProductSpec::new(base, catalog::euclidean(2), Expr::call(Func::Exp, Expr::var("t")))
            .expect("hyperbolic spec is well-formed")
    }

    pub fn base(&self) -> &ChartManifold {
        &self.base
    }

    pub fn fiber(&self) -> &ChartManifold {
        &self.fiber
    }

    pub fn warp(&self) -> &Expr {
        &self.warp
    }

    /// Base dimension.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// Fiber dimension.
    pub fn m(&self) -> usize {
        self.fiber.dim()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m()
    }

    /// Coordinates of the product chart: base first, then fiber.
    pub fn coords(&self) -> Vec<String> {
        self.base.coords().iter().chain(self.fiber.coords()).cloned().collect()
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        self.base.domain().iter().chain(self.fiber.domain()).copied().collect()
    }

    pub fn warp_at(&self, base_point: &[f64], params: &MetallicParams) -> Result<f64, WarpedError> {
        Ok(self.compiled_warp.eval(base_point, params)?)
    }

    /// Checks `f > 0` on [`WARP_CHECK_SAMPLES`] points of the base domain.
    pub fn check_warp(&self, params: &MetallicParams) -> Result<(), WarpedError> {
        let sampler = Sampler::new(0, "warp-positivity");
        for i in 0..WARP_CHECK_SAMPLES {
            let x = sampler.point(i, self.base.domain());
            let value = self.warp_at(&x, params)?;
            if !(value > 0.0) {
                return Err(WarpedError::NonPositiveWarp { point: x, value });
            }
        }
        Ok(())
    }

    /// Splits a product point into its base and fiber points.
    pub fn split_point(&self, x: &PointSample) -> Result<(PointSample, PointSample), WarpedError> {
        let c = x.coords();
        if c.len() != self.dim() {
            return Err(WarpedError::Dimension(format!(
                "product point has {} coordinates, expected {}",
                c.len(),
                self.dim()
            )));
        }
        Ok((
            PointSample::unchecked(c[..self.n()].to_vec()),
            PointSample::unchecked(c[self.n()..].to_vec()),
        ))
    }

    fn is_unit_warp(&self, params: &MetallicParams) -> bool {
        self.warp.free_vars().is_empty()
            && self.compiled_warp.eval(&vec![0.0; self.n()], params) == Ok(1.0)
    }
}

/// The chart of `M1 x_f M2` with metric `diag(g1, f^2 g2)`.
pub fn build_warped_chart(spec: &WarpedProductSpec, params: &MetallicParams) -> Result<ChartManifold, WarpedError> {
    spec.check_warp(params)?;
    let (n, m) = (spec.n(), spec.m());
    let warp_sq = Expr::binary(BinOp::Pow, spec.warp.clone(), Expr::num(2.0));
    let metric = (0..n + m)
        .map(|i| {
            (0..n + m)
                .map(|j| {
                    if i < n && j < n {
                        spec.base.metric_exprs()[i][j].clone()
                    } else if i >= n && j >= n {
                        let e = &spec.fiber.metric_exprs()[i - n][j - n];
                        if e.is_zero_literal() {
                            Expr::num(0.0)
                        } else if *e == Expr::num(1.0) {
                            warp_sq.clone()
                        } else {
                            warp_sq.clone() * e.clone()
                        }
                    } else {
                        Expr::num(0.0)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ChartManifold::new("warped", spec.coords(), spec.domain(), metric)?)
}

/// Base and fiber components of a product tangent vector.
pub fn projections(spec: &WarpedProductSpec, v: &TangentVector) -> Result<(TangentVector, TangentVector), WarpedError> {
    let (bp, fp) = spec.split_point(&v.base)?;
    if v.components.len() != spec.dim() {
        return Err(WarpedError::Dimension(format!(
            "vector has {} components, expected {}",
            v.components.len(),
            spec.dim()
        )));
    }
    let n = spec.n();
    Ok((
        TangentVector {
            base: bp,
            components: v.components.rows(0, n).into_owned(),
        },
        TangentVector {
            base: fp,
            components: v.components.rows(n, spec.m()).into_owned(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Horizontal,
    Vertical,
}

/// A base or fiber vector lifted to the product.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVector {
    pub kind: LiftKind,
    pub underlying: TangentVector,
    pub assembled: TangentVector,
}

impl LiftedVector {
    /// Lifts base components at the product point `x`.
    pub fn horizontal(spec: &WarpedProductSpec, x: &PointSample, v: DVector<f64>) -> Result<LiftedVector, WarpedError> {
        LiftedVector::lift(spec, x, v, LiftKind::Horizontal)
    }

    /// Lifts fiber components at the product point `x`.
    pub fn vertical(spec: &WarpedProductSpec, x: &PointSample, v: DVector<f64>) -> Result<LiftedVector, WarpedError> {
        LiftedVector::lift(spec, x, v, LiftKind::Vertical)
    }

    fn lift(spec: &WarpedProductSpec, x: &PointSample, v: DVector<f64>, kind: LiftKind) -> Result<LiftedVector, WarpedError> {
        let (bp, fp) = spec.split_point(x)?;
        let (expected, offset, point) = match kind {
            LiftKind::Horizontal => (spec.n(), 0, bp),
            LiftKind::Vertical => (spec.m(), spec.n(), fp),
        };
        if v.len() != expected {
            return Err(WarpedError::Dimension(format!(
                "lift needs {expected} components, got {}",
                v.len()
            )));
        }
        let mut full = DVector::zeros(spec.dim());
        full.rows_mut(offset, expected).copy_from(&v);
        Ok(LiftedVector {
            kind,
            underlying: TangentVector {
                base: point,
                components: v,
            },
            assembled: TangentVector {
                base: x.clone(),
                components: full,
            },
        })
    }

    fn part(&self) -> &DVector<f64> {
        &self.underlying.components
    }

    fn full(&self) -> &DVector<f64> {
        &self.assembled.components
    }
}

/// A product vector field `(Y1, Y2)` with `Y1` depending on base
/// coordinates only and `Y2` on fiber coordinates only.
#[derive(Debug, Clone)]
pub struct VectorFieldPair {
    base: Vec<Expr>,
    fiber: Vec<Expr>,
    compiled_base: Vec<CompiledExpr>,
    compiled_fiber: Vec<CompiledExpr>,
}

impl VectorFieldPair {
    pub fn new(spec: &WarpedProductSpec, base: Vec<Expr>, fiber: Vec<Expr>) -> Result<VectorFieldPair, WarpedError> {
        if base.len() != spec.n() || fiber.len() != spec.m() {
            return Err(WarpedError::Dimension(format!(
                "vector field needs {} + {} components, got {} + {}",
                spec.n(),
                spec.m(),
                base.len(),
                fiber.len()
            )));
        }
        let compile = |es: &[Expr], chart: &ChartManifold| {
            es.iter()
                .map(|e| {
                    CompiledExpr::new(e, chart.coords()).map_err(|err| {
                        WarpedError::Geometry(GeometryError::ForeignVariable {
                            chart: chart.name().to_string(),
                            detail: err.to_string(),
                        })
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let compiled_base = compile(&base, &spec.base)?;
        let compiled_fiber = compile(&fiber, &spec.fiber)?;
        Ok(VectorFieldPair {
            base,
            fiber,
            compiled_base,
            compiled_fiber,
        })
    }

    /// Components on the product chart.
    pub fn assembled(&self) -> Vec<Expr> {
        self.base.iter().chain(&self.fiber).cloned().collect()
    }
}

/// Value and Jacobian `J[(k, i)] = d_i Y^k` of compiled components.
fn field_jet(
    comps: &[CompiledExpr],
    x: &[f64],
    params: &MetallicParams,
) -> Result<(DVector<f64>, DMatrix<f64>), WarpedError> {
    let d = x.len();
    let mut y = DVector::zeros(comps.len());
    let mut dy = DMatrix::zeros(comps.len(), d);
    for (k, c) in comps.iter().enumerate() {
        let jet = c.eval_jet2(x, params)?;
        y[k] = jet.value;
        for i in 0..d {
            dy[(k, i)] = jet.gradient[i];
        }
    }
    Ok((y, dy))
}

/// Factor data at one product point: base and fiber geometry and the
/// derivatives of the warping function on the base.
#[derive(Debug, Clone)]
pub struct WarpedPoint {
    pub base: LocalGeometry,
    pub fiber: LocalGeometry,
    pub warp: ScalarDerivatives,
    point: PointSample,
    n: usize,
    m: usize,
}

impl WarpedPoint {
    pub fn at(spec: &WarpedProductSpec, x: &PointSample, params: &MetallicParams) -> Result<WarpedPoint, WarpedError> {
        let (bp, fp) = spec.split_point(x)?;
        let base = LocalGeometry::at(&spec.base, &bp, params)?;
        let fiber = LocalGeometry::at(&spec.fiber, &fp, params)?;
        let warp = ScalarDerivatives::compute(&base, &spec.compiled_warp, params)?;
        if !(warp.value > 0.0) {
            return Err(WarpedError::NonPositiveWarp {
                point: bp.coords().to_vec(),
                value: warp.value,
            });
        }
        Ok(WarpedPoint {
            base,
            fiber,
            warp,
            point: x.clone(),
            n: spec.n(),
            m: spec.m(),
        })
    }

    pub fn point(&self) -> &PointSample {
        &self.point
    }

    fn f(&self) -> f64 {
        self.warp.value
    }

    fn horizontal(&self, v: DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n + self.m);
        out.rows_mut(0, self.n).copy_from(&v);
        out
    }

    fn vertical(&self, v: DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n + self.m);
        out.rows_mut(self.n, self.m).copy_from(&v);
        out
    }

    /// `g2(U, V)` on fiber components.
    fn fiber_metric(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.fiber.metric * u).dot(v)
    }

    /// `g~(U, V) = f^2 g2(U, V)` for vertical vectors.
    fn warped_fiber_metric(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.f() * self.f() * self.fiber_metric(u, v)
    }

    /// `Hess(f)(X, Y)` on base components.
    fn hess(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (&self.warp.hessian * x).dot(y)
    }

    /// `nabla_X grad f` on base components.
    fn nabla_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.base.inverse * (&self.warp.hessian * x)
    }

    /// Levi-Civita derivative of `(Y1, Y2)` along `(X1, X2)`, from the
    /// factor connections and the warping function.
    pub fn connection(
        &self,
        x1: &DVector<f64>,
        x2: &DVector<f64>,
        field: &VectorFieldPair,
        params: &MetallicParams,
    ) -> Result<DVector<f64>, WarpedError> {
        let (y1, dy1) = field_jet(&field.compiled_base, self.base.point().coords(), params)?;
        let (y2, dy2) = field_jet(&field.compiled_fiber, self.fiber.point().coords(), params)?;
        let f = self.f();
        let f_sq = f * f;
        let grad_f_sq = &self.warp.gradient * (2.0 * f);
        let d_f_sq = &self.warp.differential * (2.0 * f);
        let base_part = self.base.covariant_derivative(x1, &y1, &dy1) - grad_f_sq * (0.5 * self.fiber_metric(x2, &y2));
        let fiber_part = self.fiber.covariant_derivative(x2, &y2, &dy2)
            + &y2 * (d_f_sq.dot(x1) / (2.0 * f_sq))
            + x2 * (d_f_sq.dot(&y1) / (2.0 * f_sq));
        let mut out = DVector::zeros(self.n + self.m);
        out.rows_mut(0, self.n).copy_from(&base_part);
        out.rows_mut(self.n, self.m).copy_from(&fiber_part);
        Ok(out)
    }

    /// Closed form of `R(a, b)c` for lifted arguments matching curvature
    /// case `case`:
    ///
    /// 1. `R(X,Y)Z` is the lift of the base curvature;
    /// 2. `R(U,X)Y = Hess f(X,Y) U / f`;
    /// 3. `R(X,Y)U = R(U,V)X = 0`;
    /// 4. `R(U,V)W` is the fiber curvature minus
    ///    `|grad f|^2 / f^2 (g(U,W)V - g(V,W)U)`;
    /// 5. `R(X,U)V = g(U,V) nabla_X grad f / f`.
    ///
    /// `X, Y, Z` are horizontal and `U, V, W` vertical; `g` in cases 4 and
    /// 5 is the warped metric.
    pub fn riemann(&self, case: u8, a: &LiftedVector, b: &LiftedVector, c: &LiftedVector) -> Result<DVector<f64>, WarpedError> {
        use LiftKind::{Horizontal as H, Vertical as V};
        let kinds = (a.kind, b.kind, c.kind);
        let family = "curvature";
        let bad = |expected| WarpedError::LiftKinds {
            family,
            case,
            expected,
        };
        if !(1..=5).contains(&case) {
            return Err(WarpedError::UnknownCase { family, case });
        }
        if matches!(case, 2 | 4 | 5) && self.m < 2 {
            return Err(WarpedError::FiberTooSmall { family, case, m: self.m });
        }
        let f = self.f();
        match case {
            1 => {
                if kinds != (H, H, H) {
                    return Err(bad("(horizontal, horizontal, horizontal)"));
                }
                let r = self.base.riemann();
                Ok(self.horizontal(r.apply(a.part(), b.part(), c.part())))
            }
            2 => {
                if kinds != (V, H, H) {
                    return Err(bad("(vertical, horizontal, horizontal)"));
                }
                let k = self.hess(b.part(), c.part()) / f;
                Ok(self.vertical(a.part() * k))
            }
            3 => {
                if kinds != (H, H, V) && kinds != (V, V, H) {
                    return Err(bad("(horizontal, horizontal, vertical) or (vertical, vertical, horizontal)"));
                }
                Ok(DVector::zeros(self.n + self.m))
            }
            4 => {
                if kinds != (V, V, V) {
                    return Err(bad("(vertical, vertical, vertical)"));
                }
                let (u, v, w) = (a.part(), b.part(), c.part());
                let lifted = self.fiber.riemann().apply(u, v, w);
                let k = self.warp.grad_norm_sq / (f * f);
                let bracket = v * self.warped_fiber_metric(u, w) - u * self.warped_fiber_metric(v, w);
                Ok(self.vertical(lifted - bracket * k))
            }
            _ => {
                if kinds != (H, V, V) {
                    return Err(bad("(horizontal, vertical, vertical)"));
                }
                let k = self.warped_fiber_metric(b.part(), c.part()) / f;
                Ok(self.horizontal(self.nabla_grad(a.part()) * k))
            }
        }
    }

    /// Closed form of `S(a, b)` for Ricci case `case`:
    ///
    /// 1. `S(X,Y) = S1(X,Y) - m Hess f(X,Y) / f`;
    /// 2. `S(X,V) = 0`;
    /// 3. `S(V,W) = S2(V,W) - (Lap f / f + (m-1)|grad f|^2 / f^2) g(V,W)`,
    ///    with `g` the warped metric.
    pub fn ricci(&self, case: u8, a: &LiftedVector, b: &LiftedVector) -> Result<f64, WarpedError> {
        use LiftKind::{Horizontal as H, Vertical as V};
        let family = "Ricci";
        if !(1..=3).contains(&case) {
            return Err(WarpedError::UnknownCase { family, case });
        }
        if self.m < 2 {
            return Err(WarpedError::FiberTooSmall { family, case, m: self.m });
        }
        let bad = |expected| WarpedError::LiftKinds {
            family,
            case,
            expected,
        };
        let kinds = (a.kind, b.kind);
        let f = self.f();
        let m = self.m as f64;
        match case {
            1 => {
                if kinds != (H, H) {
                    return Err(bad("(horizontal, horizontal)"));
                }
                let s1 = (self.base.riemann().ricci() * b.part()).dot(a.part());
                Ok(s1 - m / f * self.hess(a.part(), b.part()))
            }
            2 => {
                if kinds != (H, V) && kinds != (V, H) {
                    return Err(bad("(horizontal, vertical)"));
                }
                Ok(0.0)
            }
            _ => {
                if kinds != (V, V) {
                    return Err(bad("(vertical, vertical)"));
                }
                let (v, w) = (a.part(), b.part());
                let s2 = (self.fiber.riemann().ricci() * w).dot(v);
                let k = self.warp.laplacian / f + (m - 1.0) * self.warp.grad_norm_sq / (f * f);
                Ok(s2 - k * self.warped_fiber_metric(v, w))
            }
        }
    }
}

/// Closed-form `nabla~_X (Y1, Y2)` at the product point `x`; `xvec` has
/// product components.
pub fn connection_closed_form(
    spec: &WarpedProductSpec,
    x: &PointSample,
    xvec: &DVector<f64>,
    field: &VectorFieldPair,
    params: &MetallicParams,
) -> Result<TangentVector, WarpedError> {
    let w = WarpedPoint::at(spec, x, params)?;
    let (n, m) = (spec.n(), spec.m());
    if xvec.len() != n + m {
        return Err(WarpedError::Dimension(format!("direction needs {} components", n + m)));
    }
    let x1 = xvec.rows(0, n).into_owned();
    let x2 = xvec.rows(n, m).into_owned();
    Ok(TangentVector {
        base: x.clone(),
        components: w.connection(&x1, &x2, field, params)?,
    })
}

/// Closed-form `R(a, b)c`; see [`WarpedPoint::riemann`].
pub fn riemann_closed_form(
    spec: &WarpedProductSpec,
    case: u8,
    inputs: [&LiftedVector; 3],
    params: &MetallicParams,
) -> Result<TangentVector, WarpedError> {
    let x = inputs[0].assembled.base.clone();
    let w = WarpedPoint::at(spec, &x, params)?;
    Ok(TangentVector {
        components: w.riemann(case, inputs[0], inputs[1], inputs[2])?,
        base: x,
    })
}

/// Closed-form `S(a, b)`; see [`WarpedPoint::ricci`].
pub fn ricci_closed_form(
    spec: &WarpedProductSpec,
    case: u8,
    inputs: [&LiftedVector; 2],
    params: &MetallicParams,
) -> Result<f64, WarpedError> {
    let w = WarpedPoint::at(spec, &inputs[0].assembled.base, params)?;
    w.ricci(case, inputs[0], inputs[1])
}

fn max_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |acc, v| if v.is_nan() { f64::INFINITY } else { acc.max(v.abs()) })
}

/// Draws lifted arguments of the given kinds at `x`.
fn draw_lifts(
    spec: &WarpedProductSpec,
    x: &PointSample,
    kinds: &[LiftKind],
    rng: &mut impl Rng,
) -> Result<Vec<LiftedVector>, WarpedError> {
    kinds
        .iter()
        .map(|k| match k {
            LiftKind::Horizontal => LiftedVector::horizontal(spec, x, random_vector(rng, spec.n())),
            LiftKind::Vertical => LiftedVector::vertical(spec, x, random_vector(rng, spec.m())),
        })
        .collect()
}

fn curvature_patterns(case: u8) -> Vec<[LiftKind; 3]> {
    use LiftKind::{Horizontal as H, Vertical as V};
    match case {
        1 => vec![[H, H, H]],
        2 => vec![[V, H, H]],
        3 => vec![[H, H, V], [V, V, H]],
        4 => vec![[V, V, V]],
        _ => vec![[H, V, V]],
    }
}

fn ricci_patterns(case: u8) -> Vec<[LiftKind; 2]> {
    use LiftKind::{Horizontal as H, Vertical as V};
    match case {
        1 => vec![[H, H]],
        2 => vec![[H, V], [V, H]],
        _ => vec![[V, V]],
    }
}

/// Rejects a case before sampling, so a bad case is an error rather than
/// a run of aborted samples.
fn precheck(spec: &WarpedProductSpec, family: &'static str, case: u8, cases: u8, fiber_cases: &[u8]) -> Result<(), WarpedError> {
    if !(1..=cases).contains(&case) {
        return Err(WarpedError::UnknownCase { family, case });
    }
    if fiber_cases.contains(&case) && spec.m() < 2 {
        return Err(WarpedError::FiberTooSmall { family, case, m: spec.m() });
    }
    Ok(())
}

/// Max over samples of `|closed form - oracle|` for curvature case `case`.
pub fn lemma_curvature_check(
    spec: &WarpedProductSpec,
    case: u8,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, WarpedError> {
    precheck(spec, "curvature", case, 5, &[2, 4, 5])?;
    let chart = build_warped_chart(spec, params)?;
    let sampler = Sampler::new(seed, &format!("lemma-curvature/{case}"));
    Ok(max_over(samples, |i| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let mut rng = sampler.rng(i);
        let closed = WarpedPoint::at(spec, &x, params)?;
        let oracle = LocalGeometry::at(&chart, &x, params)?.riemann();
        let mut worst: f64 = 0.0;
        for kinds in curvature_patterns(case) {
            let v = draw_lifts(spec, &x, &kinds, &mut rng)?;
            let lhs = oracle.apply(v[0].full(), v[1].full(), v[2].full());
            let rhs = closed.riemann(case, &v[0], &v[1], &v[2])?;
            worst = crate::sampling::fmax(worst, max_diff(&lhs, &rhs));
        }
        Ok(worst)
    }))
}

/// Max over samples of `|closed form - oracle|` for Ricci case `case`.
pub fn lemma_ricci_check(
    spec: &WarpedProductSpec,
    case: u8,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, WarpedError> {
    precheck(spec, "Ricci", case, 3, &[1, 2, 3])?;
    let chart = build_warped_chart(spec, params)?;
    let sampler = Sampler::new(seed, &format!("lemma-ricci/{case}"));
    Ok(max_over(samples, |i| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let mut rng = sampler.rng(i);
        let closed = WarpedPoint::at(spec, &x, params)?;
        let ricci = LocalGeometry::at(&chart, &x, params)?.riemann().ricci();
        let mut worst: f64 = 0.0;
        for kinds in ricci_patterns(case) {
            let v = draw_lifts(spec, &x, &kinds, &mut rng)?;
            let lhs = (&ricci * v[1].full()).dot(v[0].full());
            let rhs = closed.ricci(case, &v[0], &v[1])?;
            worst = crate::sampling::fmax(worst, (lhs - rhs).abs());
        }
        Ok(worst)
    }))
}

/// A smooth test field over `coords`: component `k` is
/// `c0 + sum_i c_i x_i + s sin(x_k)` with random coefficients.
fn random_field(coords: &[String], rng: &mut impl Rng) -> Vec<Expr> {
    (0..coords.len())
        .map(|k| {
            let mut e = Expr::num(rng.random_range(-1.0..=1.0));
            for c in coords {
                e = e + Expr::num(rng.random_range(-1.0..=1.0)) * Expr::var(c.clone());
            }
            e + Expr::num(rng.random_range(-1.0..=1.0)) * Expr::call(Func::Sin, Expr::var(coords[k].clone()))
        })
        .collect()
}

/// Max over samples and over the four horizontal/vertical combinations of
/// direction and field, of `|closed-form connection - oracle|`.
pub fn connection_check(
    spec: &WarpedProductSpec,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, WarpedError> {
    let chart = build_warped_chart(spec, params)?;
    let sampler = Sampler::new(seed, "warped-connection");
    let coords = spec.coords();
    Ok(max_over(samples, |i| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let mut rng = sampler.rng(i);
        let closed = WarpedPoint::at(spec, &x, params)?;
        let geom = LocalGeometry::at(&chart, &x, params)?;
        let (n, m) = (spec.n(), spec.m());
        let mut worst: f64 = 0.0;
        for dir in [LiftKind::Horizontal, LiftKind::Vertical] {
            for fld in [LiftKind::Horizontal, LiftKind::Vertical] {
                let (x1, x2) = match dir {
                    LiftKind::Horizontal => (random_vector(&mut rng, n), DVector::zeros(m)),
                    LiftKind::Vertical => (DVector::zeros(n), random_vector(&mut rng, m)),
                };
                let zeros = |k: usize| vec![Expr::num(0.0); k];
                let (y1, y2) = match fld {
                    LiftKind::Horizontal => (random_field(spec.base.coords(), &mut rng), zeros(m)),
                    LiftKind::Vertical => (zeros(n), random_field(spec.fiber.coords(), &mut rng)),
                };
                let field = VectorFieldPair::new(spec, y1, y2)?;
                let rhs = closed.connection(&x1, &x2, &field, params)?;
                let compiled = field
                    .assembled()
                    .iter()
                    .map(|e| CompiledExpr::new(e, &coords))
                    .collect::<Result<Vec<_>, _>>()?;
                let (y, dy) = field_jet(&compiled, x.coords(), params)?;
                let mut xv = DVector::zeros(n + m);
                xv.rows_mut(0, n).copy_from(&x1);
                xv.rows_mut(n, m).copy_from(&x2);
                let lhs = geom.covariant_derivative(&xv, &y, &dy);
                worst = crate::sampling::fmax(worst, max_diff(&lhs, &rhs));
            }
        }
        Ok(worst)
    }))
}

/// Curvature and Ricci residuals of a plain product against the factor
/// values `(R1(X1,Y1)Z1, R2(X2,Y2)Z2)` and `S1(X1,Y1) + S2(X2,Y2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCaseResiduals {
    pub curvature: Reduction,
    pub ricci: Reduction,
}

pub fn product_case_residuals(
    spec: &WarpedProductSpec,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<ProductCaseResiduals, WarpedError> {
    if !spec.is_unit_warp(params) {
        return Err(WarpedError::NonUnitWarp(spec.warp.to_string()));
    }
    let chart = build_warped_chart(spec, params)?;
    let sampler = Sampler::new(seed, "product-case");
    let (n, m) = (spec.n(), spec.m());
    let residual = |i: usize, ricci: bool| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let mut rng = sampler.rng(i);
        let w = WarpedPoint::at(spec, &x, params)?;
        let r = LocalGeometry::at(&chart, &x, params)?.riemann();
        let vs: Vec<DVector<f64>> = (0..3).map(|_| random_vector(&mut rng, n + m)).collect();
        let b = |v: &DVector<f64>| v.rows(0, n).into_owned();
        let f = |v: &DVector<f64>| v.rows(n, m).into_owned();
        if ricci {
            let lhs = (r.ricci() * &vs[1]).dot(&vs[0]);
            let s1 = (w.base.riemann().ricci() * b(&vs[1])).dot(&b(&vs[0]));
            let s2 = (w.fiber.riemann().ricci() * f(&vs[1])).dot(&f(&vs[0]));
            Ok((lhs - (s1 + s2)).abs())
        } else {
            let lhs = r.apply(&vs[0], &vs[1], &vs[2]);
            let mut rhs = DVector::zeros(n + m);
            rhs.rows_mut(0, n)
                .copy_from(&w.base.riemann().apply(&b(&vs[0]), &b(&vs[1]), &b(&vs[2])));
            rhs.rows_mut(n, m)
                .copy_from(&w.fiber.riemann().apply(&f(&vs[0]), &f(&vs[1]), &f(&vs[2])));
            Ok(max_diff(&lhs, &rhs))
        }
    };
    Ok(ProductCaseResiduals {
        curvature: max_over(samples, |i| residual(i, false)),
        ricci: max_over(samples, |i| residual(i, true)),
    })
}

/// Max-abs mixed Christoffel symbol `Gamma^fiber_{base,base}` or
/// `Gamma^base_{base,fiber}` of the assembled chart.
pub fn mixed_christoffel_residual(
    spec: &WarpedProductSpec,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, WarpedError> {
    let chart = build_warped_chart(spec, params)?;
    let sampler = Sampler::new(seed, "leaves");
    let n = spec.n();
    let d = spec.dim();
    Ok(max_over(samples, |i| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let gam = LocalGeometry::at(&chart, &x, params)?.christoffel;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for k in n..d {
                    worst = worst.max(gam.get(k, a, b).abs());
                    worst = worst.max(gam.get(a, b, k).abs());
                }
            }
        }
        Ok(worst)
    }))
}
