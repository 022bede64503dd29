use nalgebra::DMatrix;

use super::{ChartManifold, GeometryError, LocalGeometry, PointSample};
use crate::algebra::MetallicParams;
use crate::expr::{parse, CompiledExpr, Expr};
use crate::sampling::{max_over, Reduction, Sampler};

/// A `(1,1)`-tensor field on a chart: entry `(k, j)` is the component
/// `J^k_j` as an expression in the chart coordinates.
#[derive(Debug, Clone)]
pub struct LinearOperatorField {
    chart: String,
    coords: Vec<String>,
    entries: Vec<Vec<Expr>>,
    compiled: Vec<CompiledExpr>,
}

impl LinearOperatorField {
    pub fn new(chart: &ChartManifold, entries: Vec<Vec<Expr>>) -> Result<LinearOperatorField, GeometryError> {
        let d = chart.dim();
        if entries.len() != d || entries.iter().any(|r| r.len() != d) {
            return Err(GeometryError::Dimension(format!(
                "operator field on `{}` must be {d}x{d}",
                chart.name()
            )));
        }
        let compiled = entries
            .iter()
            .flatten()
            .map(|e| {
                CompiledExpr::new(e, chart.coords()).map_err(|err| GeometryError::ForeignVariable {
                    chart: chart.name().to_string(),
                    detail: err.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearOperatorField {
            chart: chart.name().to_string(),
            coords: chart.coords().to_vec(),
            entries,
            compiled,
        })
    }

    pub fn parse(chart: &ChartManifold, rows: &[&[&str]]) -> Result<LinearOperatorField, GeometryError> {
        let entries = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| parse(t).map_err(|e| GeometryError::Parse(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        LinearOperatorField::new(chart, entries)
    }

    /// The constant field `k I`.
    pub fn scalar(chart: &ChartManifold, k: Expr) -> LinearOperatorField {
        let d = chart.dim();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { k.clone() } else { Expr::num(0.0) })
                    .collect()
            })
            .collect();
        LinearOperatorField::new(chart, entries).expect("constant entries are valid on any chart")
    }

    /// A constant diagonal field.
    pub fn diagonal(chart: &ChartManifold, diag: Vec<Expr>) -> Result<LinearOperatorField, GeometryError> {
        let d = diag.len();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { diag[i].clone() } else { Expr::num(0.0) })
                    .collect()
            })
            .collect();
        LinearOperatorField::new(chart, entries)
    }

    pub fn chart_name(&self) -> &str {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    pub(crate) fn check_chart(&self, chart: &ChartManifold) -> Result<(), GeometryError> {
        if chart.coords() != self.coords.as_slice() {
            return Err(GeometryError::Dimension(format!(
                "operator field belongs to chart `{}`, not `{}`",
                self.chart,
                chart.name()
            )));
        }
        Ok(())
    }

    pub fn value_at(&self, x: &[f64], params: &MetallicParams) -> Result<DMatrix<f64>, GeometryError> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for k in 0..d {
            for j in 0..d {
                m[(k, j)] = self.compiled[k * d + j].eval(x, params)?;
            }
        }
        Ok(m)
    }

    /// Value and partial derivatives `d_i J`, one matrix per coordinate.
    pub fn jet_at(
        &self,
        x: &[f64],
        params: &MetallicParams,
    ) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), GeometryError> {
        let d = self.dim();
        let mut value = DMatrix::zeros(d, d);
        let mut partials = vec![DMatrix::zeros(d, d); d];
        for k in 0..d {
            for j in 0..d {
                let jet = self.compiled[k * d + j].eval_jet2(x, params)?;
                value[(k, j)] = jet.value;
                for (i, p) in partials.iter_mut().enumerate() {
                    p[(k, j)] = jet.gradient[i];
                }
            }
        }
        Ok((value, partials))
    }
}

/// Max over directions `i` of the max-abs entry of
/// `nabla_i J = d_i J + Gamma_i J - J Gamma_i`, at one point.
pub fn nabla_operator_residual_at(
    chart: &ChartManifold,
    field: &LinearOperatorField,
    params: &MetallicParams,
    x: &PointSample,
) -> Result<f64, GeometryError> {
    field.check_chart(chart)?;
    let geom = LocalGeometry::at(chart, x, params)?;
    let (value, partials) = field.jet_at(x.coords(), params)?;
    let mut worst: f64 = 0.0;
    for (i, di) in partials.iter().enumerate() {
        let gamma = geom.christoffel.direction_matrix(i);
        let nabla = di + &gamma * &value - &value * &gamma;
        worst = worst.max(crate::algebra::max_abs(&nabla));
    }
    Ok(worst)
}

/// [`nabla_operator_residual_at`] maximised over `samples` deterministic
/// points of the chart domain.
pub fn nabla_operator_residual(
    chart: &ChartManifold,
    field: &LinearOperatorField,
    params: &MetallicParams,
    samples: usize,
) -> Result<Reduction, GeometryError> {
    field.check_chart(chart)?;
    let sampler = Sampler::new(0, &format!("nabla/{}", chart.name()));
    Ok(max_over(samples, |i| {
        let x = PointSample(sampler.point(i, chart.domain()));
        nabla_operator_residual_at(chart, field, params, &x)
    }))
}
