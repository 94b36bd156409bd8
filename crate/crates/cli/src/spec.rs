//! Text and table forms of norm and domain specifications.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use wulff_robin::geometry::{wulff_polygon, Domain};
use wulff_robin::AnisotropicNorm;

pub const NORM_SCHEMA: &str = "expected `euclidean`, `quadratic:a,b,c,d` (row-major SPD matrix) or `pnorm:q[,eps]`; \
     see README section \"Norm specs\"";
pub const DOMAIN_SCHEMA: &str = "expected `square`, `rect:W,H`, `ellipse:a,b`, `regular:k`, `triangle[:side]`, \
     `wulff:R` or `file:PATH`; see README section \"Domain specs\"";

/// Samples used for curved boundaries (ellipses, Wulff shapes).
const CURVE_SAMPLES: usize = 512;

/// A norm given either as `quadratic:4,0,0,1` or as a table
/// `{ family = "quadratic", matrix = [[4, 0], [0, 1]] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Text(String),
    Table(NormTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormTable {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("`{v}` is not a number"))).collect()
}

impl NormSpec {
    pub fn build(&self) -> Result<AnisotropicNorm> {
        match self {
            NormSpec::Text(s) => parse_norm(s),
            NormSpec::Table(t) => {
                let norm = match t.family.as_str() {
                    "euclidean" => AnisotropicNorm::euclidean(2),
                    "quadratic" => {
                        let m =
                            t.matrix.as_ref().ok_or_else(|| anyhow!("quadratic norm needs `matrix`; {NORM_SCHEMA}"))?;
                        AnisotropicNorm::quadratic(m)
                    }
                    "pnorm" => {
                        let q = t.q.ok_or_else(|| anyhow!("pnorm needs `q`; {NORM_SCHEMA}"))?;
                        AnisotropicNorm::smoothed_pnorm(2, q, t.eps.unwrap_or(0.0))
                    }
                    other => bail!("unknown norm family `{other}`; {NORM_SCHEMA}"),
                };
                Ok(norm?)
            }
        }
    }
}

pub fn parse_norm(spec: &str) -> Result<AnisotropicNorm> {
    let spec = spec.trim();
    let (family, args) = spec.split_once(':').unwrap_or((spec, ""));
    let norm = match (family, args) {
        ("euclidean", "") => AnisotropicNorm::euclidean(2),
        ("quadratic", a) => {
            let v = numbers(a).with_context(|| format!("invalid norm spec `{spec}`; {NORM_SCHEMA}"))?;
            if v.len() != 4 {
                bail!("invalid norm spec `{spec}`: quadratic needs 4 entries; {NORM_SCHEMA}");
            }
            AnisotropicNorm::quadratic2([v[0], v[1], v[2], v[3]])
        }
        ("pnorm", a) => {
            let v = numbers(a).with_context(|| format!("invalid norm spec `{spec}`; {NORM_SCHEMA}"))?;
            match v.as_slice() {
                [q] => AnisotropicNorm::smoothed_pnorm(2, *q, 0.0),
                [q, eps] => AnisotropicNorm::smoothed_pnorm(2, *q, *eps),
                _ => bail!("invalid norm spec `{spec}`: pnorm takes q and optional eps; {NORM_SCHEMA}"),
            }
        }
        _ => bail!("invalid norm spec `{spec}`; {NORM_SCHEMA}"),
    };
    norm.with_context(|| format!("invalid norm spec `{spec}`"))
}

/// Builds a domain; `wulff:R` uses `norm`. Relative `file:` paths resolve
/// against `base`.
pub fn parse_domain(spec: &str, norm: &AnisotropicNorm, base: &Path) -> Result<Domain> {
    let spec = spec.trim();
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = || anyhow!("invalid domain spec `{spec}`; {DOMAIN_SCHEMA}");
    let d = match (kind, args) {
        ("square", "") => Ok(Domain::unit_square()),
        ("triangle", "") => Domain::equilateral_triangle(1.0),
        ("triangle", a) => Domain::equilateral_triangle(a.trim().parse().map_err(|_| bad())?),
        ("rect", a) => match numbers(a).map_err(|_| bad())?.as_slice() {
            [w, h] => Domain::rect(*w, *h),
            _ => return Err(bad()),
        },
        ("ellipse", a) => match numbers(a).map_err(|_| bad())?.as_slice() {
            [x, y] => Domain::ellipse(*x, *y, CURVE_SAMPLES),
            _ => return Err(bad()),
        },
        ("regular", a) => Domain::regular(a.trim().parse().map_err(|_| bad())?, 1.0),
        ("wulff", a) => wulff_polygon(norm, a.trim().parse().map_err(|_| bad())?, [0.0, 0.0], CURVE_SAMPLES),
        ("file", path) if !path.is_empty() => {
            let p = base.join(path);
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading domain file {}", p.display()))?;
            Domain::from_text(&text, spec)
        }
        _ => return Err(bad()),
    };
    d.with_context(|| format!("invalid domain spec `{spec}`"))
}

/// `NAME=START:STOP[:SCALE]`, SCALE being `lin` (default) or `log10`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse_sweep(spec: &str, points: usize) -> Result<SweepSpec> {
    let bad = || anyhow!("invalid sweep `{spec}`: expected NAME=START:STOP[:lin|log10] with NAME one of beta, R, p");
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let name = name.trim();
    if !matches!(name, "beta" | "R" | "p") {
        return Err(bad());
    }
    let parts: Vec<&str> = range.split(':').collect();
    let (start, stop, scale) = match parts.as_slice() {
        [a, b] => (*a, *b, "lin"),
        [a, b, s] => (*a, *b, *s),
        _ => return Err(bad()),
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    if points < 1 {
        bail!("sweep needs at least one point");
    }
    let frac = |k: usize| if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
    let values = match scale.trim() {
        "lin" => (0..points).map(|k| start + frac(k) * (stop - start)).collect(),
        "log10" => {
            if !(start > 0.0 && stop > 0.0) {
                bail!("log10 sweep needs positive bounds");
            }
            let (a, b) = (start.log10(), stop.log10());
            (0..points).map(|k| 10f64.powf(a + frac(k) * (b - a))).collect()
        }
        _ => return Err(bad()),
    };
    Ok(SweepSpec { name: name.to_string(), values })
}
