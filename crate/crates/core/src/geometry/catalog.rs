//! Reference charts with classical curvature.

use super::ChartManifold;

fn build(name: &str, coords: &[&str], domain: &[(f64, f64)], metric: &[&[&str]]) -> ChartManifold {
    ChartManifold::parse(name, coords, domain, metric).expect("catalog charts are well-formed")
}

/// `R^d` with the identity metric on the box `[-1, 1]^d`.
pub fn euclidean(d: usize) -> ChartManifold {
    let coords: Vec<String> = (0..d).map(|i| format!("x{}", i + 1)).collect();
    let metric: Vec<Vec<&str>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { "1" } else { "0" }).collect())
        .collect();
    let refs: Vec<&[&str]> = metric.iter().map(|r| r.as_slice()).collect();
    let names: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    build("euclidean", &names, &vec![(-1.0, 1.0); d], &refs)
}

/// Polar coordinates on the plane: `du^2 + u^2 da^2`.
pub fn polar_plane() -> ChartManifold {
    build(
        "polar",
        &["u", "a"],
        &[(0.2, 3.0), (0.1, 6.0)],
        &[&["1", "0"], &["0", "u^2"]],
    )
}

/// The unit sphere: `dth^2 + sin(th)^2 dph^2`.
pub fn unit_sphere() -> ChartManifold {
    build(
        "sphere",
        &["th", "ph"],
        &[(0.3, 2.8), (0.0, 6.0)],
        &[&["1", "0"], &["0", "sin(th)^2"]],
    )
}

/// The hyperbolic plane in horospherical coordinates: `dt^2 + e^{2t} dx^2`.
pub fn hyperbolic_plane() -> ChartManifold {
    build(
        "hyperbolic",
        &["t", "x"],
        &[(-1.0, 1.0), (-1.0, 1.0)],
        &[&["1", "0"], &["0", "exp(2*t)"]],
    )
}

/// A line with coordinate `s`.
pub fn line() -> ChartManifold {
    build("line", &["s"], &[(-1.0, 1.0)], &[&["1"]])
}

/// An interval of the positive half-line with coordinate `u`: `du^2`.
pub fn ray() -> ChartManifold {
    build("ray", &["u"], &[(0.2, 3.0)], &[&["1"]])
}

/// An arc of the unit circle with angle `a`: `da^2`.
pub fn circle() -> ChartManifold {
    build("circle", &["a"], &[(0.1, 6.0)], &[&["1"]])
}

/// A line with a chosen coordinate name.
pub fn line_named(coord: &str) -> ChartManifold {
    build("line", &[coord], &[(-1.0, 1.0)], &[&["1"]])
}
