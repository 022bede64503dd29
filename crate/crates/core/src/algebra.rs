//! Pointwise linear algebra of metallic structures.
//!
//! A metallic structure is an endomorphism `J` with `J^2 = pJ + qI` for
//! positive integers `p, q`. Its eigenvalues are the two roots of
//! `x^2 - px - q`: the metallic number `sigma = (p + sqrt(p^2 + 4q)) / 2` and
//! its conjugate `sigbar = p - sigma < 0`.

use nalgebra::DMatrix;
use thiserror::Error;

/// Tolerance for pure arithmetic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance once inversion or conjugation is involved.
pub const CONJUGATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("metallic parameters must be positive integers (got p={p}, q={q})")]
    InvalidParams { p: u32, q: u32 },
    #[error("fibonacci term g_{n} overflows u64 for p={p}, q={q}")]
    Overflow { p: u32, q: u32, n: u32 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator is not an almost product structure (|F^2 - I| = {residual:e})")]
    NotAlmostProduct { residual: f64 },
    #[error("operator is not metallic for (p, q) = ({p}, {q}) (residual {residual:e})")]
    NotMetallic { p: u32, q: u32, residual: f64 },
    #[error("power index {0} outside 1..=12")]
    PowerOutOfRange(u32),
}

/// The pair `(p, q)` together with its two derived roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetallicParams {
    p: u32,
    q: u32,
    sigma: f64,
    sigbar: f64,
}

impl MetallicParams {
    pub fn new(p: u32, q: u32) -> Result<MetallicParams, AlgebraError> {
        if p == 0 || q == 0 {
            return Err(AlgebraError::InvalidParams { p, q });
        }
        let sigma = metallic_number(p, q);
        Ok(MetallicParams {
            p,
            q,
            sigma,
            sigbar: p as f64 - sigma,
        })
    }

    /// `p = q = 1`, the golden ratio.
    pub fn golden() -> MetallicParams {
        MetallicParams::new(1, 1).expect("valid")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn pf(&self) -> f64 {
        self.p as f64
    }

    pub fn qf(&self) -> f64 {
        self.q as f64
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigbar(&self) -> f64 {
        self.sigbar
    }

    /// `2 sigma - p = sqrt(p^2 + 4q)`, the gap between the two roots.
    pub fn root_gap(&self) -> f64 {
        2.0 * self.sigma - self.pf()
    }
}

/// Positive root of `x^2 - px - q = 0`.
pub fn metallic_number(p: u32, q: u32) -> f64 {
    let (p, q) = (p as f64, q as f64);
    (p + (p * p + 4.0 * q).sqrt()) / 2.0
}

/// `g_n` of the recurrence `g_{n+1} = p g_n + q g_{n-1}`, `g_0 = 0`, `g_1 = 1`.
pub fn fibonacci(p: u32, q: u32, n: u32) -> Result<u64, AlgebraError> {
    let overflow = || AlgebraError::Overflow { p, q, n };
    let (mut prev, mut cur) = (0u64, 1u64);
    if n == 0 {
        return Ok(0);
    }
    for _ in 1..n {
        let next = (p as u64)
            .checked_mul(cur)
            .and_then(|a| (q as u64).checked_mul(prev).and_then(|b| a.checked_add(b)))
            .ok_or_else(overflow)?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A constant-coefficient `(1,1)`-tensor on a `d`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator(DMatrix<f64>);

impl LinearOperator {
    /// Panics if `matrix` is not square.
    pub fn new(matrix: DMatrix<f64>) -> LinearOperator {
        assert!(matrix.is_square(), "linear operator must be square");
        LinearOperator(matrix)
    }

    pub fn identity(d: usize) -> LinearOperator {
        LinearOperator(DMatrix::identity(d, d))
    }

    pub fn scalar(d: usize, k: f64) -> LinearOperator {
        LinearOperator(DMatrix::identity(d, d) * k)
    }

    pub fn diagonal(entries: &[f64]) -> LinearOperator {
        LinearOperator(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> LinearOperator {
        let d = rows.len();
        LinearOperator::new(DMatrix::from_fn(d, rows.first().map_or(0, |r| r.len()), |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| if v.is_nan() { f64::INFINITY } else { acc.max(v.abs()) })
}

fn affine(a: f64, m: &DMatrix<f64>, b: f64) -> DMatrix<f64> {
    let d = m.nrows();
    m * a + DMatrix::identity(d, d) * b
}

/// Max-abs entry of `J^2 - pJ - qI`.
pub fn metallic_residual(j: &LinearOperator, params: &MetallicParams) -> f64 {
    let m = j.matrix();
    max_abs(&(m * m - affine(params.pf(), m, params.qf())))
}

fn almost_product_residual(f: &LinearOperator) -> f64 {
    let m = f.matrix();
    let d = m.nrows();
    max_abs(&(m * m - DMatrix::identity(d, d)))
}

/// Both parts of the compatibility check between `J` and a metric `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityResidual {
    /// `|GJ - J^T G|`: symmetry of `g(J., .)`.
    pub symmetry: f64,
    /// `|J^T G J - p G J - q G|`.
    pub quadratic: f64,
}

impl CompatibilityResidual {
    pub fn max(&self) -> f64 {
        self.symmetry.max(self.quadratic)
    }
}

pub fn compatibility_residual(
    j: &LinearOperator,
    g: &DMatrix<f64>,
    params: &MetallicParams,
) -> Result<CompatibilityResidual, AlgebraError> {
    let jm = j.matrix();
    if g.nrows() != jm.nrows() || g.ncols() != jm.ncols() {
        return Err(AlgebraError::Dimension(format!(
            "operator is {}x{}, metric is {}x{}",
            jm.nrows(),
            jm.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let gj = g * jm;
    let symmetry = max_abs(&(&gj - jm.transpose() * g));
    let quadratic = max_abs(&(jm.transpose() * &gj - &gj * params.pf() - g * params.qf()));
    Ok(CompatibilityResidual { symmetry, quadratic })
}

/// `±((2 sigma - p)/2) F + (p/2) I`.
pub fn induced_metallic(
    f: &LinearOperator,
    sign: Sign,
    params: &MetallicParams,
) -> Result<LinearOperator, AlgebraError> {
    let residual = almost_product_residual(f);
    if residual > CONJUGATION_TOL {
        return Err(AlgebraError::NotAlmostProduct { residual });
    }
    Ok(LinearOperator(affine(
        sign.factor() * params.root_gap() / 2.0,
        f.matrix(),
        params.pf() / 2.0,
    )))
}

fn require_metallic(j: &LinearOperator, params: &MetallicParams) -> Result<(), AlgebraError> {
    let residual = metallic_residual(j, params);
    if residual > CONJUGATION_TOL * (1.0 + max_abs(j.matrix()).powi(2)) {
        return Err(AlgebraError::NotMetallic {
            p: params.p(),
            q: params.q(),
            residual,
        });
    }
    Ok(())
}

/// `±(2/(2 sigma - p)) J - (p/(2 sigma - p)) I`.
pub fn induced_product(
    j: &LinearOperator,
    sign: Sign,
    params: &MetallicParams,
) -> Result<LinearOperator, AlgebraError> {
    require_metallic(j, params)?;
    let s = sign.factor();
    let gap = params.root_gap();
    Ok(LinearOperator(affine(
        s * 2.0 / gap,
        j.matrix(),
        -s * params.pf() / gap,
    )))
}

/// The complementary projectors onto the two eigen-distributions of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    /// Projects onto the `sigbar`-eigenspace.
    pub l: LinearOperator,
    /// Projects onto the `sigma`-eigenspace.
    pub m: LinearOperator,
}

impl ProjectorPair {
    /// Largest violation among `l + m = I`, `l^2 = l`, `m^2 = m`, `lm = ml = 0`.
    pub fn residual(&self) -> f64 {
        let (l, m) = (self.l.matrix(), self.m.matrix());
        let d = l.nrows();
        [
            max_abs(&(l + m - DMatrix::identity(d, d))),
            max_abs(&(l * l - l)),
            max_abs(&(m * m - m)),
            max_abs(&(l * m)),
            max_abs(&(m * l)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn projectors(j: &LinearOperator, params: &MetallicParams) -> Result<ProjectorPair, AlgebraError> {
    require_metallic(j, params)?;
    let gap = params.root_gap();
    Ok(ProjectorPair {
        l: LinearOperator(affine(-1.0 / gap, j.matrix(), params.sigma() / gap)),
        m: LinearOperator(affine(1.0 / gap, j.matrix(), (params.sigma() - params.pf()) / gap)),
    })
}

/// Residual of `J^{n+1} = g_{n+1} J + q g_n I`, relative to the largest of
/// the three terms (floored at 1): absolute residuals of large powers sit at
/// the rounding level of their entries, which exceeds any fixed bound, and
/// when `J` has only the eigenvalue `sigbar` the two right-hand terms cancel.
pub fn power_identity_residual(
    j: &LinearOperator,
    params: &MetallicParams,
    n: u32,
) -> Result<f64, AlgebraError> {
    power_residual(j, params, n, params.qf())
}

/// The same residual for `J^{n+1} = g_{n+1} J + g_n I`, which drops the
/// factor `q` and so holds only for `q = 1`.
pub fn power_identity_literal_residual(
    j: &LinearOperator,
    params: &MetallicParams,
    n: u32,
) -> Result<f64, AlgebraError> {
    power_residual(j, params, n, 1.0)
}

fn power_residual(j: &LinearOperator, params: &MetallicParams, n: u32, q: f64) -> Result<f64, AlgebraError> {
    if !(1..=12).contains(&n) {
        return Err(AlgebraError::PowerOutOfRange(n));
    }
    let m = j.matrix();
    let mut power = m.clone();
    for _ in 0..n {
        power = &power * m;
    }
    let g_next = fibonacci(params.p(), params.q(), n + 1)? as f64;
    let g_n = fibonacci(params.p(), params.q(), n)? as f64;
    let scale = [max_abs(&power), g_next * max_abs(m), q * g_n, 1.0].into_iter().fold(0.0, f64::max);
    Ok(max_abs(&(&power - affine(g_next, m, q * g_n))) / scale)
}
