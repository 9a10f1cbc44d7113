//! Parsing of objective ids.
//!
//! Grammar: a base objective followed by optional wrappers separated by `|`:
//!
//! ```text
//! sphere | ellipsoid:kappa=<v> | quadratic:file=<path> | linf
//! wrappers: |log1p   |sqrt   |rot=<seed>
//! ```
//!
//! Quadratic files are whitespace-separated text, row-major, with the
//! dimension on the first line.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use onefifth_core::objectives::{
    compose_monotone, make_ellipsoid, make_linf, make_quadratic, make_sphere, rotate, Objective,
    QuadraticSpec,
};
use onefifth_core::sampling::{random_rotation, RngStream};

/// Parses `spec` into an objective of dimension `d` (quadratic files carry
/// their own dimension, which must match `d` when both are given).
pub fn parse_objective(spec: &str, d: usize) -> Result<Objective> {
    let mut parts = spec.split('|');
    let base = parts.next().unwrap_or_default().trim();
    let mut obj = parse_base(base, d)?;
    for wrapper in parts {
        obj = apply_wrapper(&obj, wrapper.trim())?;
    }
    Ok(obj)
}

fn parse_base(base: &str, d: usize) -> Result<Objective> {
    if base == "sphere" {
        return Ok(make_sphere(d));
    }
    if base == "linf" {
        return Ok(make_linf(d));
    }
    if let Some(rest) = base.strip_prefix("ellipsoid:") {
        let kappa = rest
            .strip_prefix("kappa=")
            .ok_or_else(|| anyhow!("ellipsoid takes `kappa=<v>`, got `{rest}`"))?;
        let kappa: f64 = kappa.parse().context("invalid kappa value")?;
        return Ok(make_ellipsoid(d, kappa)?);
    }
    if let Some(rest) = base.strip_prefix("quadratic:") {
        let path = rest
            .strip_prefix("file=")
            .ok_or_else(|| anyhow!("quadratic takes `file=<path>`, got `{rest}`"))?;
        return load_quadratic(Path::new(path), d);
    }
    bail!("unknown objective `{base}` (expected sphere, ellipsoid:kappa=<v>, quadratic:file=<path>, or linf)")
}

fn apply_wrapper(obj: &Objective, wrapper: &str) -> Result<Objective> {
    match wrapper {
        "log1p" => Ok(compose_monotone(obj, |t: f64| t.ln_1p(), "log1p")),
        "sqrt" => Ok(compose_monotone(obj, |t: f64| t.sqrt(), "sqrt")),
        _ => {
            if let Some(seed) = wrapper.strip_prefix("rot=") {
                let seed: u64 = seed.parse().context("invalid rotation seed")?;
                let mut rng = RngStream::new(seed, 0);
                let r = random_rotation(obj.dim(), &mut rng);
                return Ok(rotate(obj, &r)?);
            }
            bail!("unknown objective wrapper `{wrapper}` (expected log1p, sqrt, or rot=<seed>)")
        }
    }
}

fn load_quadratic(path: &Path, d: usize) -> Result<Objective> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read quadratic file {}", path.display()))?;
    let mut tokens = text.split_whitespace();
    let file_d: usize = tokens
        .next()
        .ok_or_else(|| anyhow!("quadratic file is empty"))?
        .parse()
        .context("first token must be the dimension")?;
    if file_d != d {
        bail!("quadratic file has dimension {file_d}, the command line asked for {d}");
    }
    let mut entries = Vec::with_capacity(d * d);
    for token in tokens {
        entries.push(token.parse::<f64>().context("invalid matrix entry")?);
    }
    if entries.len() != d * d {
        bail!(
            "quadratic file has {} entries, expected {}",
            entries.len(),
            d * d
        );
    }
    let hessian = DMatrix::from_row_slice(d, d, &entries);
    let spec = QuadraticSpec::new(hessian, DVector::zeros(d))?;
    Ok(make_quadratic(spec)?)
}

/// Condition number of the underlying quadratic, when known: used for the
/// `kappa_f` column of hitting-time files.
pub fn objective_kappa_f(obj: &Objective) -> Option<f64> {
    let geo = obj.geometry()?;
    match (geo.l_lower, geo.l_upper) {
        (Some(lo), Some(hi)) => Some(hi / lo),
        _ => None,
    }
}
