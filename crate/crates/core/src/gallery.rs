//! A worked example: the cone-like submanifold of `R^{2n}` given by the
//! immersion `(u, a_1..a_n) -> (u cos a_1, u sin a_1, ..., u cos a_n, u sin a_n)`.
//!
//! Its coordinate frame `Z_0, Z_1..Z_n` is orthogonal with
//! `|Z_0|^2 = n` and `|Z_i|^2 = u^2`, so the induced metric is the warped
//! product `n du^2 + u^2 sum da_i^2`. The ambient metallic structure scales
//! the first `k` coordinate planes by `sigma` and the rest by `sigbar`, and
//! the angle between `J Z_0` and `Z_0` depends on `n, k, p, q` only.
//!
//! ```
//! use metallic_warp::algebra::MetallicParams;
//! use metallic_warp::gallery::slant_cosine;
//!
//! let c = slant_cosine(2, 1, &MetallicParams::golden()).unwrap();
//! assert!((c - 1.0 / 6f64.sqrt()).abs() < 1e-15);
//! ```

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::MetallicParams;
use crate::expr::{CompiledExpr, Expr, Func};
use crate::geometry::{metric_at, ChartManifold, PointSample};
use crate::sampling::{max_over, Reduction, Sampler};
use crate::warped::{build_warped_chart, WarpedError, WarpedProductSpec};

/// Margin kept from the ends of `[0, pi/2]` by the angle chart.
pub const ANGLE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("split index k = {k} outside 0..={n}")]
    SplitOutOfRange { k: usize, n: usize },
    #[error("invalid example configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Warped(#[from] WarpedError),
}

/// Which value stands for the conjugate root in the ambient structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConjugateRoot {
    /// `p - sigma`, the other root of `x^2 - px - q`.
    #[default]
    PMinusSigma,
    /// `1 - sigma`, which is a root only when `p = 1`.
    OneMinusSigma,
}

impl ConjugateRoot {
    pub fn value(self, params: &MetallicParams) -> f64 {
        match self {
            ConjugateRoot::PMinusSigma => params.sigbar(),
            ConjugateRoot::OneMinusSigma => 1.0 - params.sigma(),
        }
    }
}

/// A point of the example together with the split of the ambient planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleConfig {
    pub n: usize,
    pub k: usize,
    pub params: MetallicParams,
    pub u: f64,
    pub alpha: Vec<f64>,
}

impl ExampleConfig {
    pub fn new(n: usize, k: usize, params: MetallicParams, u: f64, alpha: Vec<f64>) -> Result<ExampleConfig, GalleryError> {
        if n == 0 {
            return Err(GalleryError::InvalidConfig("n must be at least 1".into()));
        }
        if k > n {
            return Err(GalleryError::SplitOutOfRange { k, n });
        }
        if !(u > 0.0) {
            return Err(GalleryError::InvalidConfig(format!("u = {u} must be positive")));
        }
        if alpha.len() != n {
            return Err(GalleryError::InvalidConfig(format!("{} angles given, expected {n}", alpha.len())));
        }
        if let Some(a) = alpha.iter().find(|a| !(0.0..=FRAC_PI_2).contains(*a)) {
            return Err(GalleryError::InvalidConfig(format!("angle {a} outside [0, pi/2]")));
        }
        Ok(ExampleConfig { n, k, params, u, alpha })
    }

    /// True when `2 <= k <= n - 1`, the range in which both roots occur
    /// on at least two planes each side.
    pub fn is_split(&self) -> bool {
        self.k >= 2 && self.k < self.n
    }
}

/// `Z_0 = sum_i (cos a_i, sin a_i)` and `Z_i = u (-sin a_i, cos a_i)` in
/// plane `i`, as vectors of `R^{2n}` ordered `(x_1, y_1, ..., x_n, y_n)`.
pub fn frame_at(cfg: &ExampleConfig) -> Vec<DVector<f64>> {
    let n = cfg.n;
    let mut frame = Vec::with_capacity(n + 1);
    let mut z0 = DVector::zeros(2 * n);
    for (i, a) in cfg.alpha.iter().enumerate() {
        z0[2 * i] = a.cos();
        z0[2 * i + 1] = a.sin();
    }
    frame.push(z0);
    for (i, a) in cfg.alpha.iter().enumerate() {
        let mut zi = DVector::zeros(2 * n);
        zi[2 * i] = -cfg.u * a.sin();
        zi[2 * i + 1] = cfg.u * a.cos();
        frame.push(zi);
    }
    frame
}

/// Gram matrix of the frame.
pub fn gram(frame: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(frame.len(), frame.len(), |i, j| frame[i].dot(&frame[j]))
}

/// The diagonal ambient structure on `R^{2n}`: `sigma` on the first `k`
/// planes and the conjugate root on the rest.
pub fn ambient_j(n: usize, k: usize, params: &MetallicParams, conjugate: ConjugateRoot) -> Result<DMatrix<f64>, GalleryError> {
    if k > n {
        return Err(GalleryError::SplitOutOfRange { k, n });
    }
    let low = conjugate.value(params);
    Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < 2 * k) {
        (false, _) => 0.0,
        (true, true) => params.sigma(),
        (true, false) => low,
    }))
}

pub fn ambient_j_apply(
    v: &DVector<f64>,
    k: usize,
    params: &MetallicParams,
    conjugate: ConjugateRoot,
) -> Result<DVector<f64>, GalleryError> {
    if !v.len().is_multiple_of(2) {
        return Err(GalleryError::InvalidConfig(format!("ambient vectors have even length, got {}", v.len())));
    }
    let n = v.len() / 2;
    if k > n {
        return Err(GalleryError::SplitOutOfRange { k, n });
    }
    let low = conjugate.value(params);
    Ok(DVector::from_fn(v.len(), |i, _| if i < 2 * k { params.sigma() * v[i] } else { low * v[i] }))
}

/// `(k sigma + (n-k) sigbar) / sqrt(n (k sigma^2 + (n-k) sigbar^2))`.
pub fn slant_cosine(n: usize, k: usize, params: &MetallicParams) -> Result<f64, GalleryError> {
    if n == 0 || k > n {
        return Err(GalleryError::SplitOutOfRange { k, n });
    }
    let (s, b) = (params.sigma(), params.sigbar());
    let (k, m) = (k as f64, (n - k) as f64);
    Ok((k * s + m * b) / (n as f64 * (k * s * s + m * b * b)).sqrt())
}

/// The same cosine computed from the frame as `<JZ_0, Z_0> / (|JZ_0| |Z_0|)`.
pub fn frame_slant_cosine(cfg: &ExampleConfig) -> Result<f64, GalleryError> {
    let z0 = &frame_at(cfg)[0];
    let jz0 = ambient_j_apply(z0, cfg.k, &cfg.params, ConjugateRoot::PMinusSigma)?;
    Ok(jz0.dot(z0) / (jz0.norm() * z0.norm()))
}

/// `max_i |<JZ_0, Z_i>|`.
pub fn jz0_orthogonality_residual(cfg: &ExampleConfig) -> Result<f64, GalleryError> {
    let frame = frame_at(cfg);
    let jz0 = ambient_j_apply(&frame[0], cfg.k, &cfg.params, ConjugateRoot::PMinusSigma)?;
    Ok(frame[1..].iter().map(|z| jz0.dot(z).abs()).fold(0.0, f64::max))
}

/// The induced metric as a warped product: base `u` with metric `n du^2`
/// on `[0.5, 2]`, fiber the angles `a1..an` with the flat metric, and
/// warping function `u`.
pub fn example_warped_spec(n: usize) -> Result<WarpedProductSpec, GalleryError> {
    if n == 0 {
        return Err(GalleryError::InvalidConfig("n must be at least 1".into()));
    }
    let base = ChartManifold::new(
        "radial",
        vec!["u".into()],
        vec![(0.5, 2.0)],
        vec![vec![Expr::num(n as f64)]],
    )
    .map_err(WarpedError::from)?;
    let coords: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let metric = (0..n)
        .map(|i| (0..n).map(|j| Expr::num(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let fiber = ChartManifold::new(
        "angles",
        coords,
        vec![(ANGLE_MARGIN, FRAC_PI_2 - ANGLE_MARGIN); n],
        metric,
    )
    .map_err(WarpedError::from)?;
    Ok(WarpedProductSpec::new(base, fiber, Expr::var("u"))?)
}

/// Components of the immersion over the coordinates `(u, a1..an)`.
pub fn immersion_components(n: usize) -> Vec<Expr> {
    (1..=n)
        .flat_map(|i| {
            let a = Expr::var(format!("a{i}"));
            [
                Expr::var("u") * Expr::call(Func::Cos, a.clone()),
                Expr::var("u") * Expr::call(Func::Sin, a),
            ]
        })
        .collect()
}

/// Max over samples of `|D^T D - g|`, with `D` the Jacobian of the
/// immersion and `g` the metric of the warped chart.
pub fn immersion_pullback_residual(
    n: usize,
    params: &MetallicParams,
    seed: u64,
    samples: usize,
) -> Result<Reduction, GalleryError> {
    let spec = example_warped_spec(n)?;
    let chart = build_warped_chart(&spec, params)?;
    let coords = spec.coords();
    let comps = immersion_components(n)
        .iter()
        .map(|e| CompiledExpr::new(e, &coords))
        .collect::<Result<Vec<_>, _>>()
        .map_err(WarpedError::from)?;
    let sampler = Sampler::new(seed, "example3/pullback");
    Ok(max_over(samples, |i| -> Result<f64, WarpedError> {
        let x = PointSample::unchecked(sampler.point(i, chart.domain()));
        let mut d = DMatrix::zeros(2 * n, n + 1);
        for (a, c) in comps.iter().enumerate() {
            let jet = c.eval_jet2(x.coords(), params)?;
            for j in 0..=n {
                d[(a, j)] = jet.gradient[j];
            }
        }
        let g = metric_at(&chart, &x, params)?;
        Ok(crate::algebra::max_abs(&(d.transpose() * d - g)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{metallic_residual, LinearOperator};
    use proptest::prelude::*;

    fn cfg(n: usize, k: usize, u: f64, alpha: Vec<f64>) -> ExampleConfig {
        ExampleConfig::new(n, k, MetallicParams::golden(), u, alpha).unwrap()
    }

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn frame_at_zero_angles() {
        let f = frame_at(&cfg(2, 1, 1.0, vec![0.0, 0.0]));
        assert_eq!(f[0], dv(&[1.0, 0.0, 1.0, 0.0]));
        assert_eq!(f[1], dv(&[-0.0, 1.0, 0.0, 0.0]));
        assert_eq!(f[2], dv(&[0.0, 0.0, -0.0, 1.0]));
        assert_eq!(gram(&f), DMatrix::from_diagonal(&dv(&[2.0, 1.0, 1.0])));
    }

    #[test]
    fn gram_for_three_planes() {
        let g = gram(&frame_at(&cfg(3, 2, 2.0, vec![0.3, 1.1, 0.7])));
        let expected = DMatrix::from_diagonal(&dv(&[3.0, 4.0, 4.0, 4.0]));
        assert!((g - expected).abs().max() < 1e-12);
    }

    #[test]
    fn config_is_validated() {
        let p = MetallicParams::golden();
        assert!(ExampleConfig::new(2, 3, p, 1.0, vec![0.0, 0.0]).is_err());
        assert!(ExampleConfig::new(2, 1, p, 0.0, vec![0.0, 0.0]).is_err());
        assert!(ExampleConfig::new(2, 1, p, 1.0, vec![0.0, 2.0]).is_err());
        assert!(ExampleConfig::new(2, 1, p, 1.0, vec![0.0]).is_err());
        assert!(!cfg(3, 1, 1.0, vec![0.0; 3]).is_split());
        assert!(cfg(3, 2, 1.0, vec![0.0; 3]).is_split());
        assert!(!cfg(3, 3, 1.0, vec![0.0; 3]).is_split());
    }

    #[test]
    fn ambient_structure_on_the_frame() {
        let c = ExampleConfig::new(4, 2, MetallicParams::new(2, 3).unwrap(), 1.3, vec![0.2, 0.5, 0.9, 1.4]).unwrap();
        let f = frame_at(&c);
        for (i, z) in f.iter().enumerate().skip(1) {
            let jz = ambient_j_apply(z, c.k, &c.params, ConjugateRoot::PMinusSigma).unwrap();
            let root = if i <= c.k { c.params.sigma() } else { c.params.sigbar() };
            assert!((jz - z * root).abs().max() < 1e-15);
        }
        let v = dv(&[1.0, 2.0, 3.0, 4.0]);
        let all = ambient_j_apply(&v, 2, &c.params, ConjugateRoot::PMinusSigma).unwrap();
        assert_eq!(all, &v * c.params.sigma());
        assert!(ambient_j_apply(&v, 3, &c.params, ConjugateRoot::PMinusSigma).is_err());
    }

    #[test]
    fn ambient_structure_is_metallic_only_with_the_true_conjugate() {
        for p in 1..=5 {
            for q in 1..=5 {
                let params = MetallicParams::new(p, q).unwrap();
                let j = ambient_j(3, 2, &params, ConjugateRoot::PMinusSigma).unwrap();
                assert!(metallic_residual(&LinearOperator::new(j.clone()), &params) <= 1e-12);
                assert_eq!(j, j.transpose());
                let literal = ambient_j(3, 2, &params, ConjugateRoot::OneMinusSigma).unwrap();
                let r = metallic_residual(&LinearOperator::new(literal), &params);
                // (1 - sigma)^2 - p(1 - sigma) - q = (p - 1)(2 sigma - 1).
                let expected = (p as f64 - 1.0) * (2.0 * params.sigma() - 1.0);
                assert!((r - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slant_cosine_values() {
        let g = MetallicParams::golden();
        assert!((slant_cosine(2, 1, &g).unwrap() - 0.408_248_290_463_863).abs() < 1e-12);
        for n in 1..6 {
            assert!((slant_cosine(n, n, &g).unwrap() - 1.0).abs() < 1e-15);
            assert!((slant_cosine(n, 0, &g).unwrap() + 1.0).abs() < 1e-15);
        }
        assert!(slant_cosine(2, 3, &g).is_err());
    }

    #[test]
    fn induced_metric_at_unit_radius() {
        let spec = example_warped_spec(2).unwrap();
        let p = MetallicParams::golden();
        let chart = build_warped_chart(&spec, &p).unwrap();
        let g = metric_at(&chart, &PointSample::unchecked(vec![1.0, 0.4, 0.9]), &p).unwrap();
        let frame = gram(&frame_at(&cfg(2, 1, 1.0, vec![0.4, 0.9])));
        assert!((g - frame).abs().max() < 1e-15);
    }

    #[test]
    fn single_angle_example_is_flat() {
        let spec = example_warped_spec(1).unwrap();
        let p = MetallicParams::golden();
        let chart = build_warped_chart(&spec, &p).unwrap();
        let sampler = Sampler::new(0, "flat");
        for i in 0..20 {
            let x = PointSample::unchecked(sampler.point(i, chart.domain()));
            let r = crate::geometry::riemann_at(&chart, &x, &p).unwrap();
            assert!(r.data.iter().all(|v| v.abs() <= 1e-9));
        }
    }

    #[test]
    fn pullback_matches_the_warped_metric() {
        for n in 1..=4 {
            let r = immersion_pullback_residual(n, &MetallicParams::golden(), 0, 30).unwrap();
            assert_eq!(r.evaluated, 30);
            assert!(r.max <= 1e-10, "n={n}: {}", r.max);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn frame_gram_is_diagonal(
            n in 2usize..7,
            u in 0.1f64..5.0,
            seed in proptest::collection::vec(0.0f64..=FRAC_PI_2, 6),
        ) {
            let c = cfg(n, 1, u, seed[..n].to_vec());
            let g = gram(&frame_at(&c));
            for i in 0..=n {
                for j in 0..=n {
                    let expected = match (i, j) {
                        (0, 0) => n as f64,
                        _ if i == j => u * u,
                        _ => 0.0,
                    };
                    prop_assert!((g[(i, j)] - expected).abs() <= 1e-12 * expected.max(1.0));
                }
            }
        }

        #[test]
        fn slant_cosine_depends_on_n_k_p_q_only(
            n in 1usize..7,
            k_frac in 0.0f64..=1.0,
            p in 1u32..=5,
            q in 1u32..=5,
            u in 0.1f64..5.0,
            angles in proptest::collection::vec(0.0f64..=FRAC_PI_2, 6),
        ) {
            let k = ((n as f64) * k_frac).round() as usize;
            let params = MetallicParams::new(p, q).unwrap();
            let c = ExampleConfig::new(n, k, params, u, angles[..n].to_vec()).unwrap();
            let closed = slant_cosine(n, k, &params).unwrap();
            prop_assert!((frame_slant_cosine(&c).unwrap() - closed).abs() <= 1e-12);
            prop_assert!(jz0_orthogonality_residual(&c).unwrap() <= 1e-12 * u.max(1.0));
            prop_assert!(closed.abs() <= 1.0 + 1e-15);
            if k != 0 && k != n {
                prop_assert!(closed.abs() < 1.0 - 1e-9);
            }
        }
    }
}
