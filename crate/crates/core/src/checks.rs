//! Invariant suites run by the command line `check` subcommand.
//!
//! Each check produces a measured value and the limit it is compared with,
//! so a failing run shows by how much it missed. Meshes are coarse
//! (`h = 0.05`) to keep the whole collection under a few seconds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{self, HardyWeights};
use crate::fem::{self, generate_mesh, SolveOptions};
use crate::geometry::{self, wulff_polygon, Domain};
use crate::norms::AnisotropicNorm;
use crate::radial::{self, RadialProblem, DEFAULT_TOL};
use crate::special;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Norms,
    Geometry,
    Radial,
    Fem,
    Analysis,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "norms" => Suite::Norms,
            "geometry" => Suite::Geometry,
            "radial" => Suite::Radial,
            "fem" => Suite::Fem,
            "analysis" => Suite::Analysis,
            "all" => Suite::All,
            other => {
                return Err(Error::input(format!(
                    "unknown suite `{other}`; expected norms, geometry, radial, fem, analysis or all"
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Norms => "norms",
            Suite::Geometry => "geometry",
            Suite::Radial => "radial",
            Suite::Fem => "fem",
            Suite::Analysis => "analysis",
            Suite::All => "all",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

struct Collector {
    suite: &'static str,
    out: Vec<CheckOutcome>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Self { suite, out: Vec::new() }
    }

    /// Records `value <= limit`.
    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, limit, value <= limit);
    }

    /// Records `value >= limit`.
    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, limit, value >= limit);
    }

    fn push(&mut self, name: String, value: f64, limit: f64, passed: bool) {
        self.out.push(CheckOutcome { suite: self.suite.to_string(), name, value, limit, passed });
    }
}

fn test_norms() -> Result<Vec<AnisotropicNorm>> {
    Ok(vec![
        AnisotropicNorm::euclidean(2)?,
        AnisotropicNorm::quadratic2([4.0, 0.0, 0.0, 1.0])?,
        AnisotropicNorm::quadratic2([2.0, 1.0, 1.0, 2.0])?,
    ])
}

pub fn run(suite: Suite) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Norms => norms_suite(),
        Suite::Geometry => geometry_suite(),
        Suite::Radial => radial_suite(),
        Suite::Fem => fem_suite(),
        Suite::Analysis => analysis_suite(),
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Norms, Suite::Geometry, Suite::Radial, Suite::Fem, Suite::Analysis] {
                all.extend(run(s)?);
            }
            Ok(all)
        }
    }
}

/// Largest relative gap between `H_ξ` and central differences of `H` at
/// step `1e-6·|ξ|`, over seeded random planar arguments.
pub fn gradient_fd_error(h: &AnisotropicNorm, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let xi: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = h.gradient(&xi)?;
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let step = 1e-6 * r;
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..xi.len() {
            let mut a = xi.clone();
            let mut b = xi.clone();
            a[i] += step;
            b[i] -= step;
            let fd = (h.evaluate(&a)? - h.evaluate(&b)?) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / gn);
        }
    }
    Ok(worst)
}

fn norms_suite() -> Result<Vec<CheckOutcome>> {
    let mut c = Collector::new("norms");
    let mut families = test_norms()?;
    families.push(AnisotropicNorm::smoothed_pnorm(2, 4.0, 0.0)?);
    for h in &families {
        let label = h.label();
        let closed = h.has_closed_form_polar();
        let rep = h.verify_identities(1000, 1, 2.0)?;
        c.at_most(format!("{label} euler"), rep.euler, 1e-9);
        c.at_most(format!("{label} polar unit"), rep.polar_unit, if closed { 1e-10 } else { 1e-6 });
        c.at_most(format!("{label} inverse map"), rep.inverse_map, if closed { 1e-8 } else { 1e-6 });
        c.at_most(format!("{label} homogeneity"), rep.homogeneity, 1e-10);
        c.at_most(format!("{label} bounds"), rep.bounds, 1e-12);
        c.at_most(format!("{label} gradient vs finite differences"), gradient_fd_error(h, 100, 2)?, 1e-5);
        if closed {
            c.at_least(format!("{label} ellipticity"), rep.gamma_estimate, 1e-3);
        }
    }
    Ok(c.out)
}

fn geometry_suite() -> Result<Vec<CheckOutcome>> {
    let mut c = Collector::new("geometry");
    let norms = test_norms()?;
    let pi = std::f64::consts::PI;
    c.at_most("kappa euclidean", (geometry::kappa(&norms[0])? - pi).abs(), 1e-6);
    c.at_most("kappa quadratic:4,0,0,1", (geometry::kappa(&norms[1])? - 2.0 * pi).abs(), 1e-5);
    let sq = Domain::unit_square();
    c.at_most("square perimeter quadratic:4,0,0,1", (sq.aniso_perimeter(&norms[1])? - 6.0).abs(), 1e-14);
    c.at_most("square inradius", (geometry::inradius(&sq, &norms[0])?.value - 0.5).abs(), 1e-9);
    for h in &norms {
        let w = wulff_polygon(h, 1.0, [0.0, 0.0], 2048)?;
        let r = geometry::isoperimetric_ratio(&w, h)?;
        c.at_most(format!("{} wulff isoperimetric ratio", h.label()), (r - 1.0).abs(), 1e-3);
        for (name, d) in [("square", sq.clone()), ("triangle", Domain::equilateral_triangle(1.0)?)] {
            let r = geometry::isoperimetric_ratio(&d, h)?;
            c.at_least(format!("{} {name} isoperimetric ratio", h.label()), r, 1.0 - 1e-9);
        }
    }
    Ok(c.out)
}

fn radial_suite() -> Result<Vec<CheckOutcome>> {
    let mut c = Collector::new("radial");
    for n in [2, 3] {
        for radius in [0.5, 1.0, 2.0] {
            for beta in [0.1, 1.0, 10.0] {
                let lam = radial::first_eigenvalue_radial(&RadialProblem::new(n, 2.0, radius, beta)?, DEFAULT_TOL)?;
                let oracle = special::robin_ball_eigenvalue(n, radius, beta);
                c.at_most(format!("bessel n={n} R={radius} beta={beta}"), (lam.lambda / oracle - 1.0).abs(), 1e-8);
            }
        }
    }
    let dir = radial::first_eigenvalue_radial(&RadialProblem::new(2, 2.0, 1.0, 1e6)?, DEFAULT_TOL)?.lambda;
    c.at_most("dirichlet limit", (dir - special::first_bessel_zero(0.0).powi(2)).abs(), 1e-3);
    for (t, p, n) in [(2.0, 2.0, 2), (0.5, 3.0, 3), (1.7, 1.5, 2)] {
        let s = radial::verify_scaling(&RadialProblem::new(n, p, 1.0, 1.0)?, t, DEFAULT_TOL)?;
        c.at_most(format!("scaling t={t} p={p} n={n}"), s.residual, 1e-7);
    }
    let e = AnisotropicNorm::euclidean(2)?;
    for p in [1.5, 2.0, 3.0] {
        let m = radial::verify_wulff_monotonicity(&e, 2, p, 1.0, &[0.5, 1.0, 2.0, 4.0], DEFAULT_TOL)?;
        c.at_least(format!("wulff monotonicity p={p}"), f64::from(u8::from(m.holds())), 1.0);
    }
    Ok(c.out)
}

fn fem_suite() -> Result<Vec<CheckOutcome>> {
    let mut c = Collector::new("fem");
    let norms = test_norms()?;
    let disk = Domain::regular(256, 1.0)?;
    let mesh = generate_mesh(&disk, 0.05)?;
    let direct = fem::solve_p2_quadratic(&mesh, &norms[0], 1.0, 1e-12)?;
    let oracle = special::robin_ball_eigenvalue(2, 1.0, 1.0);
    c.at_most("disk vs bessel (h=0.05)", (direct.lambda / oracle - 1.0).abs(), 5e-3);
    c.at_least("disk eigenfunction sign", direct.min_relative_value(), -1e-10);
    c.at_most("constant upper bound", direct.lambda - fem::constant_upper_bound(&mesh, &norms[0], 1.0), 1e-12);
    let descent = fem::minimize_rayleigh(&mesh, &norms[0], 2.0, 1.0, &SolveOptions::default())?;
    c.at_most("descent vs direct (p=2)", (descent.lambda / direct.lambda - 1.0).abs(), 1e-6);
    let j = |u: &[f64]| fem::rayleigh(&mesh, &norms[0], 2.0, 1.0, u).map(|r| r.j);
    let scaled: Vec<f64> = direct.u.iter().map(|v| -3.0 * v).collect();
    c.at_most("rayleigh 0-homogeneity", (j(&scaled)? - j(&direct.u)?).abs() / direct.lambda, 1e-13);
    let g = fem::gradient_check(&mesh, &norms[1], 2.5, 1.0, &direct.u, 20, 3)?;
    c.at_most("gradient check p=2.5 quadratic:4,0,0,1", g, 1e-5);
    let neumann = fem::solve_p2_quadratic(&mesh, &norms[0], 0.0, 1e-12)?;
    c.at_most("neumann eigenvalue", neumann.lambda.abs(), 1e-10);
    Ok(c.out)
}

fn analysis_suite() -> Result<Vec<CheckOutcome>> {
    let mut c = Collector::new("analysis");
    let e = AnisotropicNorm::euclidean(2)?;
    let sq = Domain::unit_square();
    let mesh = generate_mesh(&sq, 0.05)?;
    let res = fem::solve_p2_quadratic(&mesh, &e, 1.0, 1e-12)?;
    let fk = analysis::faber_krahn_from(&sq, &e, 2.0, 1.0, 0.05, res.lambda)?;
    c.at_least("faber-krahn square ratio", fk.ratio, 1.0 + fk.tolerance);
    let ib = analysis::inradius_bound(&sq, &e, 2.0, 1.0, res.lambda)?;
    c.at_least("inradius bound slack", ib.slack, -1e-9);
    let weights = HardyWeights::new(&sq, &mesh, &e)?;
    let ones = vec![1.0; mesh.node_count()];
    let hardy = analysis::hardy_check(&mesh, &weights, &e, 2.0, &ones, 0.25, 1.0)?;
    c.at_least("hardy u=1 (lhs - rhs)", hardy.lhs - hardy.rhs, 0.0);
    let mut worst: f64 = 0.0;
    let mut sigma_gap: f64 = f64::NEG_INFINITY;
    for t in [0.2, 0.35, 0.5, 0.65, 0.8] {
        let (s, f) = analysis::representation_functional(&mesh, &e, 2.0, 1.0, &res.u, t)?;
        worst = worst.max((f / res.lambda - 1.0).abs());
        sigma_gap = sigma_gap.max(s.sigma_boundary - s.sigma_st - s.sigma_gt);
    }
    c.at_most("representation formula spread", worst, 0.05);
    c.at_most("level-set perimeter split", sigma_gap, 1e-9);
    let tc = analysis::transplant_comparison(&mesh, &e, 2.0, 1.0, &res.u, 0.8)?;
    c.at_least("transplant f_domain - f_wulff", tc.f_domain - tc.f_wulff, -fk.tolerance * res.lambda);
    Ok(c.out)
}
