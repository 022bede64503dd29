//! Built-in specs, addressed as `builtin:<name>` with optional
//! `?key=value&...` parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::spec_file::{parse_spec, SpecFile};
use super::VerifyError;

/// Names and one-line descriptions of the built-in specs.
pub const BUILTINS: [(&str, &str); 5] = [
    ("polar", "the plane in polar coordinates, ray x_u circle"),
    ("hyperbolic3", "hyperbolic 3-space as an interval x_{exp(t)} plane"),
    ("sphere-line", "unit sphere x line, unit warp"),
    ("sphere-hyperbolic", "unit sphere x hyperbolic plane, unit warp"),
    ("example3", "the cone over n angles in R^{2n}; n, k, p, q"),
];

const SPHERE: &str = "\
[manifold sphere]
coords = [th, ph]
domain = [[0.3, 2.8], [0.0, 6.0]]
metric = [[1, 0], [0, sin(th)^2]]
";

const POLAR: &str = "\
[manifold ray]
coords = [u]
domain = [[0.2, 3.0]]
metric = [[1]]

[manifold circle]
coords = [a]
domain = [[0.1, 6.0]]
metric = [[1]]

[warp]
base = ray
fiber = circle
f = u
";

const HYPERBOLIC3: &str = "\
[manifold time]
coords = [t]
domain = [[-1, 1]]
metric = [[1]]

[manifold plane]
coords = [x, y]
domain = [[-1, 1], [-1, 1]]
metric = [[1, 0], [0, 1]]

[warp]
base = time
fiber = plane
f = exp(t)

[suite lemma-curvature]
sectional = -1
";

/// Spec text of a built-in, e.g. `example3?n=2&k=1`.
pub fn builtin_text(address: &str) -> Result<String, VerifyError> {
    let (name, query) = address.split_once('?').unwrap_or((address, ""));
    let mut args = BTreeMap::new();
    for pair in query.split('&').filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| VerifyError::Builtin(format!("`{pair}` is not key=value")))?;
        if args.insert(k.to_string(), v.to_string()).is_some() {
            return Err(VerifyError::Builtin(format!("`{k}` given twice")));
        }
    }
    let allowed: &[&str] = if name == "example3" { &["n", "k", "p", "q"] } else { &[] };
    if let Some(k) = args.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(VerifyError::Builtin(format!("builtin `{name}` takes no parameter `{k}`")));
    }
    Ok(match name {
        "polar" => POLAR.to_string(),
        "hyperbolic3" => HYPERBOLIC3.to_string(),
        "sphere-line" => format!("{SPHERE}\n[manifold line]\ncoords = [s]\ndomain = [[-1, 1]]\nmetric = [[1]]\n\n[warp]\nbase = sphere\nfiber = line\nf = 1\n"),
        "sphere-hyperbolic" => format!(
            "{SPHERE}\n[manifold hyperbolic]\ncoords = [t, x]\ndomain = [[-1, 1], [-1, 1]]\nmetric = [[1, 0], [0, exp(2*t)]]\n\n[warp]\nbase = sphere\nfiber = hyperbolic\nf = 1\n"
        ),
        "example3" => example3_text(&args)?,
        _ => return Err(VerifyError::Builtin(format!("unknown builtin `{name}`"))),
    })
}

fn count(args: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize, VerifyError> {
    match args.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| VerifyError::Builtin(format!("`{key}={v}` is not a non-negative integer"))),
    }
}

fn example3_text(args: &BTreeMap<String, String>) -> Result<String, VerifyError> {
    let n = count(args, "n", 2)?;
    let k = count(args, "k", 1)?;
    let (p, q) = (count(args, "p", 1)?, count(args, "q", 1)?);
    if n == 0 || k > n {
        return Err(VerifyError::Builtin(format!("example3 needs n >= 1 and k <= n, got n={n}, k={k}")));
    }
    if p == 0 || q == 0 {
        return Err(VerifyError::Builtin("example3 needs p, q >= 1".into()));
    }
    let mut s = String::new();
    writeln!(s, "[manifold radial]\ncoords = [u]\ndomain = [[0.5, 2.0]]\nmetric = [[{n}]]\n").unwrap();
    let coords: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let domain = vec!["[0.1, pi/2 - 0.1]"; n].join(", ");
    let metric: Vec<String> = (0..n)
        .map(|i| format!("[{}]", (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(", ")))
        .collect();
    writeln!(
        s,
        "[manifold angles]\ncoords = [{}]\ndomain = [{domain}]\nmetric = [{}]\n",
        coords.join(", "),
        metric.join(", ")
    )
    .unwrap();
    writeln!(s, "[warp]\nbase = radial\nfiber = angles\nf = u\n").unwrap();
    for (suite, _) in super::suites::SUITES {
        if suite == "example3" {
            writeln!(s, "[suite example3]\nn = {n}\nk = {k}\np = {p}\nq = {q}\n").unwrap();
        } else if suite != "metallic-algebra" {
            writeln!(s, "[suite {suite}]\np = {p}\nq = {q}\n").unwrap();
        }
    }
    Ok(s)
}

/// Loads `builtin:<address>` or a file path.
pub fn resolve_spec(spec: &str) -> Result<SpecFile, VerifyError> {
    match spec.strip_prefix("builtin:") {
        Some(address) => Ok(parse_spec(&builtin_text(address)?, spec)?),
        None => Ok(super::spec_file::load_spec(std::path::Path::new(spec))?),
    }
}
