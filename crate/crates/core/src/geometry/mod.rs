//! Brute-force tensor calculus on coordinate charts.
//!
//! Everything here is computed directly from the metric-component
//! expressions of a [`ChartManifold`]: the metric jets (value, gradient and
//! Hessian of every `g_ij`) give the Christoffel symbols and their first
//! derivatives, which in turn give the curvature tensor. No closed-form
//! knowledge of any particular geometry is used, which is what makes this
//! module usable as an oracle for the closed forms in [`crate::warped`] and
//! [`crate::structures`].

pub mod catalog;
mod chart;
mod field;
mod tensors;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use chart::{ChartManifold, PointSample, TangentVector, DOMAIN_MARGIN};
pub use field::{nabla_operator_residual, nabla_operator_residual_at, LinearOperatorField};
pub use tensors::{Christoffel, Riemann};

use crate::algebra::MetallicParams;
use crate::expr::{CompiledExpr, EvalError, Expr, Jet2};

/// Tolerance for checks of the oracle against itself.
pub const ORACLE_SELF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expression parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("empty domain for `{coord}`: [{lo}, {hi}]")]
    EmptyDomain { coord: String, lo: f64, hi: f64 },
    #[error("coordinate `{coord}` = {value} lies outside the chart domain")]
    OutOfDomain { coord: String, value: f64 },
    #[error("expression on chart `{chart}` uses a foreign variable: {detail}")]
    ForeignVariable { chart: String, detail: String },
    #[error("metric is not symmetric at {point:?} (|g_ij - g_ji| = {gap:e})")]
    NonSymmetric { point: Vec<f64>, gap: f64 },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
}

/// Tolerance for numerical symmetry of metric components.
const SYMMETRY_TOL: f64 = 1e-12;

/// Metric, inverse metric, Christoffel symbols and their derivatives at one
/// point. The curvature and all derived quantities are computed from this.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub christoffel: Christoffel,
    /// `d_m Gamma^k_{ij}` stored as one `Christoffel` per direction `m`.
    pub christoffel_derivatives: Vec<Christoffel>,
    /// `d_m g_{ij}`, one matrix per `m`.
    pub metric_derivatives: Vec<DMatrix<f64>>,
    point: PointSample,
}

fn check_spd(g: &DMatrix<f64>, x: &PointSample) -> Result<DMatrix<f64>, GeometryError> {
    let d = g.nrows();
    let mut gap: f64 = 0.0;
    for i in 0..d {
        for j in 0..i {
            gap = gap.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    let scale = g.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if gap > SYMMETRY_TOL * scale {
        return Err(GeometryError::NonSymmetric {
            point: x.coords().to_vec(),
            gap,
        });
    }
    let chol = g.clone().cholesky().ok_or_else(|| GeometryError::NotPositiveDefinite {
        point: x.coords().to_vec(),
    })?;
    let inv = chol.inverse();
    // Exact symmetry of the inverse.
    Ok(DMatrix::from_fn(d, d, |i, j| if i <= j { inv[(i, j)] } else { inv[(j, i)] }))
}

impl LocalGeometry {
    pub fn at(
        chart: &ChartManifold,
        x: &PointSample,
        params: &MetallicParams,
    ) -> Result<LocalGeometry, GeometryError> {
        let d = chart.dim();
        if x.coords().len() != d {
            return Err(GeometryError::Dimension(format!(
                "point has {} coordinates, chart `{}` has {d}",
                x.coords().len(),
                chart.name()
            )));
        }
        let jets = chart.metric_jets(x, params)?;
        let jet = |i: usize, j: usize| -> &Jet2 { &jets[i * d + j] };
        let g = DMatrix::from_fn(d, d, |i, j| jet(i, j).value);
        let ginv = check_spd(&g, x)?;
        // Symmetrised accessors for derivatives: use the upper triangle.
        let dg = |m: usize, i: usize, j: usize| -> f64 {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            jet(a, b).gradient[m]
        };
        let ddg = |m: usize, n: usize, i: usize, j: usize| -> f64 {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            jet(a, b).hessian(m, n)
        };

        // First kind: Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        let mut first = vec![0.0; d * d * d];
        let mut first_deriv = vec![0.0; d * d * d * d];
        for l in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                    first[(l * d + i) * d + j] = v;
                    first[(l * d + j) * d + i] = v;
                    for m in 0..d {
                        let dv = 0.5 * (ddg(m, i, j, l) + ddg(m, j, i, l) - ddg(m, l, i, j));
                        first_deriv[((m * d + l) * d + i) * d + j] = dv;
                        first_deriv[((m * d + l) * d + j) * d + i] = dv;
                    }
                }
            }
        }

        let metric_derivatives: Vec<DMatrix<f64>> = (0..d)
            .map(|m| DMatrix::from_fn(d, d, |i, j| dg(m, i, j)))
            .collect();
        // d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
        let inverse_derivatives: Vec<DMatrix<f64>> = metric_derivatives
            .iter()
            .map(|dgm| -(&ginv * dgm * &ginv))
            .collect();

        let mut christoffel = Christoffel::zeros(d);
        let mut christoffel_derivatives = vec![Christoffel::zeros(d); d];
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut v = 0.0;
                    for l in 0..d {
                        v += ginv[(k, l)] * first[(l * d + i) * d + j];
                    }
                    christoffel.set(k, i, j, v);
                    christoffel.set(k, j, i, v);
                    for m in 0..d {
                        let mut dv = 0.0;
                        for l in 0..d {
                            dv += inverse_derivatives[m][(k, l)] * first[(l * d + i) * d + j]
                                + ginv[(k, l)] * first_deriv[((m * d + l) * d + i) * d + j];
                        }
                        christoffel_derivatives[m].set(k, i, j, dv);
                        christoffel_derivatives[m].set(k, j, i, dv);
                    }
                }
            }
        }

        Ok(LocalGeometry {
            metric: g,
            inverse: ginv,
            christoffel,
            christoffel_derivatives,
            metric_derivatives,
            point: x.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn point(&self) -> &PointSample {
        &self.point
    }

    pub fn riemann(&self) -> Riemann {
        let d = self.dim();
        let gam = &self.christoffel;
        let dgam = &self.christoffel_derivatives;
        let mut r = Riemann::zeros(d);
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in (i + 1)..d {
                        // Standard-sign component, then flipped.
                        let mut v = dgam[i].get(l, j, k) - dgam[j].get(l, i, k);
                        for m in 0..d {
                            v += gam.get(l, i, m) * gam.get(m, j, k)
                                - gam.get(l, j, m) * gam.get(m, i, k);
                        }
                        r.set(l, k, i, j, -v);
                        r.set(l, k, j, i, v);
                    }
                }
            }
        }
        r
    }

    /// Levi-Civita derivative `nabla_X Y` of a vector field with values
    /// `y` and Jacobian `dy[(k, i)] = d_i Y^k` at this point.
    pub fn covariant_derivative(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        dy: &DMatrix<f64>,
    ) -> DVector<f64> {
        dy * x + self.christoffel.contract(x, y)
    }
}

pub fn metric_at(
    chart: &ChartManifold,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<DMatrix<f64>, GeometryError> {
    let g = chart.metric_values(x, params)?;
    check_spd(&g, x)?;
    Ok(g)
}

pub fn christoffel_at(
    chart: &ChartManifold,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<Christoffel, GeometryError> {
    Ok(LocalGeometry::at(chart, x, params)?.christoffel)
}

pub fn riemann_at(
    chart: &ChartManifold,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<Riemann, GeometryError> {
    Ok(LocalGeometry::at(chart, x, params)?.riemann())
}

pub fn ricci_at(
    chart: &ChartManifold,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<DMatrix<f64>, GeometryError> {
    Ok(riemann_at(chart, x, params)?.ricci())
}

/// Raises the Ricci tensor to the Ricci operator `Q = g^{-1} S`.
pub fn ricci_operator(geom: &LocalGeometry) -> DMatrix<f64> {
    &geom.inverse * geom.riemann().ricci()
}

/// First- and second-order data of a scalar function at a point.
#[derive(Debug, Clone)]
pub struct ScalarDerivatives {
    pub value: f64,
    /// `d_i phi`.
    pub differential: DVector<f64>,
    /// `g^{kl} d_l phi`.
    pub gradient: DVector<f64>,
    pub grad_norm_sq: f64,
    /// `d_i d_j phi - Gamma^k_{ij} d_k phi`.
    pub hessian: DMatrix<f64>,
    /// `g^{ij} Hess_{ij}`.
    pub laplacian: f64,
}

impl ScalarDerivatives {
    pub fn compute(
        geom: &LocalGeometry,
        phi: &CompiledExpr,
        params: &MetallicParams,
    ) -> Result<ScalarDerivatives, GeometryError> {
        let d = geom.dim();
        let jet = phi.eval_jet2(geom.point().coords(), params)?;
        let differential = DVector::from_column_slice(&jet.gradient);
        let gradient = &geom.inverse * &differential;
        let grad_norm_sq = differential.dot(&gradient);
        let hessian = DMatrix::from_fn(d, d, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            let mut h = jet.hessian(a, b);
            for k in 0..d {
                h -= geom.christoffel.get(k, a, b) * differential[k];
            }
            h
        });
        let laplacian = geom.inverse.component_mul(&hessian).sum();
        Ok(ScalarDerivatives {
            value: jet.value,
            differential,
            gradient,
            grad_norm_sq,
            hessian,
            laplacian,
        })
    }
}

fn compile_on(chart: &ChartManifold, phi: &Expr) -> Result<CompiledExpr, GeometryError> {
    CompiledExpr::new(phi, chart.coords()).map_err(|e| GeometryError::ForeignVariable {
        chart: chart.name().to_string(),
        detail: e.to_string(),
    })
}

/// Gradient vector of `phi` and its squared norm.
pub fn gradient_at(
    chart: &ChartManifold,
    phi: &Expr,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<(TangentVector, f64), GeometryError> {
    let geom = LocalGeometry::at(chart, x, params)?;
    let s = ScalarDerivatives::compute(&geom, &compile_on(chart, phi)?, params)?;
    Ok((
        TangentVector {
            base: x.clone(),
            components: s.gradient,
        },
        s.grad_norm_sq,
    ))
}

/// Hessian matrix of `phi` and its Laplacian.
pub fn hessian_at(
    chart: &ChartManifold,
    phi: &Expr,
    x: &PointSample,
    params: &MetallicParams,
) -> Result<(DMatrix<f64>, f64), GeometryError> {
    let geom = LocalGeometry::at(chart, x, params)?;
    let s = ScalarDerivatives::compute(&geom, &compile_on(chart, phi)?, params)?;
    Ok((s.hessian, s.laplacian))
}

/// Max-abs entry of `nabla g`: `d_m g_ij - Gamma^a_{mi} g_aj - Gamma^a_{mj} g_ia`.
pub fn metric_compatibility_residual(geom: &LocalGeometry) -> f64 {
    let d = geom.dim();
    let mut worst: f64 = 0.0;
    for m in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = geom.metric_derivatives[m][(i, j)];
                for a in 0..d {
                    v -= geom.christoffel.get(a, m, i) * geom.metric[(a, j)]
                        + geom.christoffel.get(a, m, j) * geom.metric[(i, a)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests;
