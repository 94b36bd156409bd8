//! Subcommand implementations. Each returns CSV text, a short summary and
//! whether a verdict was violated.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use wulff_robin::analysis::{self, Verdict};
use wulff_robin::checks::{self, Suite};
use wulff_robin::fem::{self, generate_mesh, Init, SolveOptions};
use wulff_robin::radial::{first_eigenvalue_radial, RadialProblem, DEFAULT_TOL};
use wulff_robin::AnisotropicNorm;

use crate::config::RunConfig;
use crate::spec::{parse_domain, parse_sweep, NormSpec};

pub struct Report {
    pub csv: String,
    pub summary: String,
    pub violated: bool,
    /// Extra files to write, relative to the output directory when one is
    /// set.
    pub artifacts: Vec<(PathBuf, String)>,
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn norm_of(cfg: &RunConfig) -> Result<AnisotropicNorm> {
    cfg.norm.clone().unwrap_or(NormSpec::Text("euclidean".into())).build()
}

fn options(cfg: &RunConfig) -> SolveOptions {
    let d = SolveOptions::default();
    SolveOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        max_iters: cfg.max_iters.unwrap_or(d.max_iters),
        init: cfg.seed.map_or(Init::Default, Init::Random),
    }
}

#[derive(Serialize)]
struct RadialRow {
    n: usize,
    p: f64,
    #[serde(rename = "R")]
    radius: f64,
    beta: f64,
    lambda: f64,
    bc_residual: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    rho: f64,
    rho_prime: f64,
    beta_r: f64,
}

pub fn radial(cfg: &RunConfig) -> Result<Report> {
    let base = RadialProblem::new(
        cfg.n.unwrap_or(2),
        cfg.p.unwrap_or(2.0),
        cfg.radius.unwrap_or(1.0),
        cfg.beta.unwrap_or(1.0),
    )?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let problems = match &cfg.sweep {
        None => vec![base],
        Some(s) => {
            let sweep = parse_sweep(s, cfg.points.unwrap_or(5))?;
            sweep
                .values
                .iter()
                .map(|&v| {
                    let mut p = base;
                    match sweep.name.as_str() {
                        "beta" => p.beta = v,
                        "R" => p.radius = v,
                        _ => p.p = v,
                    }
                    p.validate().map(|_| p)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let mut rows = Vec::new();
    let mut last = None;
    for prob in &problems {
        let sol = first_eigenvalue_radial(prob, tol)?;
        rows.push(RadialRow {
            n: prob.n,
            p: prob.p,
            radius: prob.radius,
            beta: prob.beta,
            lambda: sol.lambda,
            bc_residual: sol.bc_residual,
        });
        last = Some(sol);
    }
    let mut artifacts = Vec::new();
    if let (Some(path), Some(sol)) = (&cfg.profile, &last) {
        let prof: Vec<ProfileRow> = (0..sol.r.len())
            .map(|i| ProfileRow {
                r: sol.r[i],
                rho: sol.rho[i],
                rho_prime: sol.rho_prime[i],
                beta_r: sol.beta_profile[i],
            })
            .collect();
        artifacts.push((path.clone(), to_csv(&prof)?));
    }
    let summary =
        format!("radial: {} solve(s), last lambda = {}", rows.len(), rows.last().map_or(f64::NAN, |r| r.lambda));
    Ok(Report { csv: to_csv(&rows)?, summary, violated: false, artifacts })
}

#[derive(Serialize)]
struct SolveRow {
    domain: String,
    norm: String,
    p: f64,
    beta: f64,
    h: f64,
    nodes: usize,
    triangles: usize,
    lambda: f64,
    iterations: usize,
    rq_residual: f64,
    weak_residual: f64,
    converged: bool,
    upper_bound: f64,
}

pub fn solve(cfg: &RunConfig, base: &Path) -> Result<Report> {
    let norm = norm_of(cfg)?;
    let domain_spec = cfg.domain.clone().unwrap_or_else(|| "square".into());
    let d = parse_domain(&domain_spec, &norm, base)?;
    let (p, beta, h) = (cfg.p.unwrap_or(2.0), cfg.beta.unwrap_or(1.0), cfg.h.unwrap_or(0.02));
    let mesh = generate_mesh(&d, h)?;
    let res = fem::solve_first(&mesh, &norm, p, beta, &options(cfg))?;
    let row = SolveRow {
        domain: domain_spec.clone(),
        norm: norm.label(),
        p,
        beta,
        h,
        nodes: mesh.node_count(),
        triangles: mesh.triangles.len(),
        lambda: res.lambda,
        iterations: res.iterations,
        rq_residual: res.rq_residual,
        weak_residual: res.weak_residual,
        converged: res.converged,
        upper_bound: fem::constant_upper_bound(&mesh, &norm, beta),
    };
    let mut artifacts = Vec::new();
    if let Some(path) = &cfg.mesh_out {
        artifacts.push((path.clone(), mesh.to_text()));
    }
    if let Some(path) = &cfg.u_out {
        artifacts.push((path.clone(), fem::eigenfunction_csv(&mesh, &res.u)?));
    }
    let mut summary = format!(
        "solve: {domain_spec} with {} (p = {p}, beta = {beta}, h = {h}): lambda = {} after {} iterations",
        norm.label(),
        res.lambda,
        res.iterations
    );
    if !res.converged {
        summary.push_str(" [not converged]");
    }
    Ok(Report { csv: to_csv(&[row])?, summary, violated: false, artifacts })
}

#[derive(Serialize)]
struct FaberKrahnRow {
    domain: String,
    norm: String,
    p: f64,
    beta: f64,
    h: f64,
    lambda: f64,
    lambda_wulff: f64,
    ratio: f64,
    verdict: &'static str,
}

pub fn faber_krahn(cfg: &RunConfig, base: &Path) -> Result<Report> {
    let norm = norm_of(cfg)?;
    let domain_spec = cfg.domain.clone().unwrap_or_else(|| "square".into());
    let d = parse_domain(&domain_spec, &norm, base)?;
    let (p, beta, h) = (cfg.p.unwrap_or(2.0), cfg.beta.unwrap_or(1.0), cfg.h.unwrap_or(0.02));
    let rep = analysis::faber_krahn(&d, &norm, p, beta, h, &options(cfg))?;
    let row = FaberKrahnRow {
        domain: domain_spec.clone(),
        norm: norm.label(),
        p,
        beta,
        h,
        lambda: rep.lambda_domain,
        lambda_wulff: rep.lambda_wulff,
        ratio: rep.ratio,
        verdict: rep.verdict.as_str(),
    };
    let summary = format!(
        "faber-krahn: {domain_spec}: ratio {} (tolerance {}) -> {}",
        rep.ratio,
        rep.tolerance,
        rep.verdict.as_str()
    );
    Ok(Report { csv: to_csv(&[row])?, summary, violated: rep.verdict == Verdict::Violated, artifacts: vec![] })
}

pub fn sweep(cfg: &RunConfig) -> Result<Report> {
    let norm = norm_of(cfg)?;
    let ratios = cfg.ratios.clone().unwrap_or_else(|| vec![1.0, 4.0, 16.0]);
    if ratios.is_empty() {
        bail!("sweep needs at least one aspect ratio");
    }
    let rows = analysis::unboundedness_sweep(
        &ratios,
        cfg.area.unwrap_or(1.0),
        &norm,
        cfg.p.unwrap_or(2.0),
        cfg.beta.unwrap_or(1.0),
        cfg.h.unwrap_or(0.02),
        &options(cfg),
    )?;
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let increasing = analysis::strictly_increasing(&lambdas);
    let summary = format!(
        "sweep: {} rectangles, lambda {}",
        rows.len(),
        if increasing { "strictly increasing" } else { "NOT strictly increasing" }
    );
    Ok(Report { csv: to_csv(&rows)?, summary, violated: !increasing, artifacts: vec![] })
}

pub fn check(cfg: &RunConfig) -> Result<Report> {
    let suite: Suite = cfg.suite.as_deref().unwrap_or("all").parse()?;
    let outcomes = checks::run(suite)?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    let summary = if failed.is_empty() {
        format!("check {suite}: {} checks passed", outcomes.len())
    } else {
        format!("check {suite}: {} of {} checks FAILED: {}", failed.len(), outcomes.len(), failed.join("; "))
    };
    Ok(Report { csv: to_csv(&outcomes)?, summary, violated: !failed.is_empty(), artifacts: vec![] })
}

pub fn run(cfg: &RunConfig, base: &Path) -> Result<Report> {
    let sub = cfg.subcommand.as_deref().context("no subcommand given on the command line or in the config")?;
    match sub {
        "radial" => radial(cfg),
        "solve" => solve(cfg, base),
        "faber-krahn" => faber_krahn(cfg, base),
        "sweep" => sweep(cfg),
        "check" => check(cfg),
        other => bail!("unknown subcommand `{other}`; expected radial, solve, faber-krahn, sweep or check"),
    }
}
