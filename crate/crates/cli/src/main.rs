mod commands;
mod config;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use spec::NormSpec;

/// First Robin eigenvalue of the anisotropic p-Laplacian and Faber-Krahn
/// checks against Wulff shapes.
#[derive(Parser, Debug)]
#[command(name = "wulff-robin", version)]
struct Cli {
    /// TOML file with run settings; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory receiving the CSV output, artifacts and the effective
    /// configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial eigenvalue on the Wulff shape (any dimension).
    Radial(RadialArgs),
    /// Finite-element eigenpair on a polygon.
    Solve(SolveArgs),
    /// Compare a domain with the Wulff shape of equal area.
    FaberKrahn(ProblemArgs),
    /// Eigenvalues on rectangles of fixed area and growing aspect ratio.
    Sweep(SweepArgs),
    /// Run invariant suites.
    Check(CheckArgs),
}

#[derive(Args, Debug, Default)]
struct ProblemArgs {
    /// euclidean | quadratic:a,b,c,d | pnorm:q[,eps]
    #[arg(long)]
    norm: Option<String>,
    /// square | rect:W,H | ellipse:a,b | regular:k | triangle[:side] | wulff:R | file:PATH
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Target mesh edge length.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed for a random initial field (descent solver).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct RadialArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "R", alias = "radius")]
    radius: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// NAME=START:STOP[:lin|log10] with NAME in beta, R, p.
    #[arg(long)]
    sweep: Option<String>,
    /// Number of sweep values.
    #[arg(long)]
    points: Option<usize>,
    /// Write r,rho,rho_prime,beta_r for the (last) solve.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Write the mesh (`n`, `t`, `b` records).
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Write the eigenfunction as node,x,y,u.
    #[arg(long)]
    u_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated aspect ratios, each >= 1.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long)]
    area: Option<f64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// norms | geometry | radial | fem | analysis | all
    #[arg(long)]
    suite: Option<String>,
}

fn problem_config(a: &ProblemArgs) -> RunConfig {
    RunConfig {
        norm: a.norm.clone().map(NormSpec::Text),
        domain: a.domain.clone(),
        p: a.p,
        beta: a.beta,
        h: a.h,
        tol: a.tol,
        max_iters: a.max_iters,
        seed: a.seed,
        ..Default::default()
    }
}

fn flag_config(cli: &Cli) -> RunConfig {
    let mut cfg = match &cli.command {
        None => RunConfig::default(),
        Some(Command::Radial(a)) => RunConfig {
            subcommand: Some("radial".into()),
            n: a.n,
            p: a.p,
            radius: a.radius,
            beta: a.beta,
            tol: a.tol,
            sweep: a.sweep.clone(),
            points: a.points,
            profile: a.profile.clone(),
            ..Default::default()
        },
        Some(Command::Solve(a)) => RunConfig {
            subcommand: Some("solve".into()),
            mesh_out: a.mesh_out.clone(),
            u_out: a.u_out.clone(),
            ..problem_config(&a.problem)
        },
        Some(Command::FaberKrahn(a)) => RunConfig { subcommand: Some("faber-krahn".into()), ..problem_config(a) },
        Some(Command::Sweep(a)) => RunConfig {
            subcommand: Some("sweep".into()),
            ratios: a.ratios.clone(),
            area: a.area,
            ..problem_config(&a.problem)
        },
        Some(Command::Check(a)) => {
            RunConfig { subcommand: Some("check".into()), suite: a.suite.clone(), ..Default::default() }
        }
    };
    cfg.output = cli.out.clone();
    cfg
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Returns whether a verdict was violated.
fn run(cli: &Cli) -> Result<bool> {
    let (file_cfg, base) = match &cli.config {
        Some(path) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (RunConfig::load(path)?, base)
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    let cfg = file_cfg.overlay(&flag_config(cli));
    let report = commands::run(&cfg, &base)?;

    print!("{}", report.csv);
    eprintln!("{}", report.summary);
    let out_dir = cfg.output.clone();
    let resolve = |p: &Path| match &out_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    };
    for (path, text) in &report.artifacts {
        write_file(&resolve(path), text)?;
    }
    if let Some(dir) = &out_dir {
        let sub = cfg.subcommand.as_deref().unwrap_or("run");
        write_file(&dir.join(format!("{sub}.csv")), &report.csv)?;
        write_file(&dir.join("effective_config.toml"), &cfg.to_toml())?;
    }
    Ok(report.violated)
}

fn main() -> ExitCode {
    // Usage errors are input errors (exit 1); exit 2 is reserved for
    // violated verdicts.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
