use nalgebra::DMatrix;

use super::GeometryError;
use crate::algebra::MetallicParams;
use crate::expr::{parse, CompiledExpr, Expr, Jet2};

/// Distance kept from the boundary of a chart's sampling box.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// A coordinate chart carrying a metric given by component expressions.
#[derive(Debug, Clone)]
pub struct ChartManifold {
    name: String,
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
    metric: Vec<Vec<Expr>>,
    compiled: Vec<CompiledExpr>,
}

impl ChartManifold {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Vec<(f64, f64)>,
        metric: Vec<Vec<Expr>>,
    ) -> Result<ChartManifold, GeometryError> {
        let name = name.into();
        let d = coords.len();
        if d == 0 {
            return Err(GeometryError::Dimension(format!("chart `{name}` has no coordinates")));
        }
        if domain.len() != d {
            return Err(GeometryError::Dimension(format!(
                "chart `{name}`: {d} coordinates but {} domain intervals",
                domain.len()
            )));
        }
        if let Some((i, (lo, hi))) = domain.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(GeometryError::EmptyDomain {
                coord: coords[i].clone(),
                lo: *lo,
                hi: *hi,
            });
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(GeometryError::Dimension(format!(
                    "chart `{name}`: duplicate coordinate `{c}`"
                )));
            }
        }
        if metric.len() != d || metric.iter().any(|row| row.len() != d) {
            return Err(GeometryError::Dimension(format!(
                "chart `{name}`: metric must be {d}x{d}"
            )));
        }
        let mut compiled = Vec::with_capacity(d * d);
        for row in &metric {
            for e in row {
                compiled.push(CompiledExpr::new(e, &coords).map_err(|err| {
                    GeometryError::ForeignVariable {
                        chart: name.clone(),
                        detail: err.to_string(),
                    }
                })?);
            }
        }
        Ok(ChartManifold {
            name,
            coords,
            domain,
            metric,
            compiled,
        })
    }

    /// Builds a chart from expression text.
    pub fn parse(
        name: &str,
        coords: &[&str],
        domain: &[(f64, f64)],
        metric: &[&[&str]],
    ) -> Result<ChartManifold, GeometryError> {
        let metric = metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| parse(t).map_err(|e| GeometryError::Parse(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        ChartManifold::new(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            domain.to_vec(),
            metric,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn metric_exprs(&self) -> &[Vec<Expr>] {
        &self.metric
    }

    /// A point of this chart, checked against the sampling box.
    pub fn point(&self, coords: &[f64]) -> Result<PointSample, GeometryError> {
        if coords.len() != self.dim() {
            return Err(GeometryError::Dimension(format!(
                "point has {} coordinates, chart `{}` has {}",
                coords.len(),
                self.name,
                self.dim()
            )));
        }
        for (i, (&x, &(lo, hi))) in coords.iter().zip(&self.domain).enumerate() {
            if !(x >= lo + DOMAIN_MARGIN && x <= hi - DOMAIN_MARGIN) {
                return Err(GeometryError::OutOfDomain {
                    coord: self.coords[i].clone(),
                    value: x,
                });
            }
        }
        Ok(PointSample(coords.to_vec()))
    }

    pub(crate) fn metric_jets(
        &self,
        x: &PointSample,
        params: &MetallicParams,
    ) -> Result<Vec<Jet2>, GeometryError> {
        self.compiled
            .iter()
            .map(|c| c.eval_jet2(x.coords(), params).map_err(GeometryError::from))
            .collect()
    }

    pub(crate) fn metric_values(
        &self,
        x: &PointSample,
        params: &MetallicParams,
    ) -> Result<DMatrix<f64>, GeometryError> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                g[(i, j)] = self.compiled[i * d + j].eval(x.coords(), params)?;
            }
        }
        Ok(g)
    }
}

/// Coordinates of a point of some chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample(pub(crate) Vec<f64>);

impl PointSample {
    /// A point that has not been checked against any chart domain.
    pub fn unchecked(coords: Vec<f64>) -> PointSample {
        PointSample(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// A tangent vector at a point, in coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: PointSample,
    pub components: nalgebra::DVector<f64>,
}
