//! First-eigenpair solvers: inverse iteration for the quadratic case and
//! preconditioned Barzilai–Borwein descent on the Rayleigh quotient.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assembly::{assemble_quadratic, dot, euclidean_preconditioner, spmv, Functional, SpdSolver};
use super::mesh::Mesh;
use crate::norms::{AnisotropicNorm, NormFamily};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// Nodal values with discrete `‖u‖_p = 1`.
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Relative decrease of the eigenvalue estimate at the stopping step.
    pub rq_residual: f64,
    /// Dual-norm size of the discrete weak-form residual.
    pub weak_residual: f64,
    pub converged: bool,
}

impl EigenResult {
    /// Most negative nodal value relative to the largest one; nonnegative
    /// for a sign-definite field.
    pub fn min_relative_value(&self) -> f64 {
        let max = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.u.iter().fold(f64::INFINITY, |m, &v| m.min(v)) / max
    }
}

/// Starting field for [`minimize_rayleigh`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    /// `u ≡ 1` with a 1% perturbation from a fixed seed.
    Default,
    /// Independent uniform values in `[0.1, 1]` from the given seed.
    Random(u64),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub init: Init,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iters: 20_000, init: Init::Default }
    }
}

/// `A` with `H(ξ)² = ξᵀAξ`, for the norms that have one.
pub fn quadratic_matrix(h: &AnisotropicNorm) -> Option<[[f64; 2]; 2]> {
    if h.dim() != 2 {
        return None;
    }
    match h.family() {
        NormFamily::Euclidean => Some([[1.0, 0.0], [0.0, 1.0]]),
        NormFamily::Quadratic(q) => {
            let m = q.matrix();
            Some([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
        }
        _ => None,
    }
}

fn lp_normalize(f: &Functional, u: &mut [f64]) -> Result<()> {
    let den = f.evaluate(u)?.den;
    let s = den.powf(-1.0 / f.p);
    u.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

fn flip_to_positive_mean(u: &mut [f64]) {
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Smallest eigenpair of `(K + βB) u = λ M u` for `H(ξ)² = ξᵀAξ`, `p = 2`.
///
/// Inverse iteration with a sparse Cholesky factor. For `β = 0` the
/// operator is shifted by `M/|Ω|` so that it stays definite. Stops when the
/// relative eigenvalue increment falls below `tol`.
pub fn solve_p2_quadratic(mesh: &Mesh, h: &AnisotropicNorm, beta: f64, tol: f64) -> Result<EigenResult> {
    let a = quadratic_matrix(h).ok_or_else(|| {
        Error::Unsupported(format!("the p = 2 direct solver needs a quadratic norm, got {}", h.label()))
    })?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::input(format!("β must be finite and nonnegative, got {beta}")));
    }
    let mats = assemble_quadratic(mesh, a, h)?;
    let op = &mats.stiffness + &(&mats.boundary * beta);
    let sigma = if beta == 0.0 { 1.0 / mesh.area() } else { 0.0 };
    let shifted = &op + &(&mats.mass * sigma);
    let solver = SpdSolver::new(&shifted).map_err(|e| match e {
        Error::Numeric { residual, .. } => Error::numeric("operator is singular or indefinite", residual),
        other => other,
    })?;

    let n = mesh.node_count();
    let mut u = vec![1.0; n];
    let mut lambda = f64::INFINITY;
    let mut increment = f64::INFINITY;
    let mut iterations = 0;
    let max_iters = 1000;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let mu = spmv(&mats.mass, &u);
        let mut w = solver.solve(&mu);
        let mw = spmv(&mats.mass, &w);
        let s = dot(&w, &mw).sqrt();
        w.iter_mut().for_each(|v| *v /= s);
        let next = dot(&w, &spmv(&op, &w));
        increment = (lambda - next).abs() / (next.abs() + sigma).max(f64::MIN_POSITIVE);
        lambda = next;
        u = w;
        if increment <= tol {
            converged = true;
            break;
        }
    }
    flip_to_positive_mean(&mut u);
    let f = Functional::new(mesh, h, 2.0, beta)?;
    lp_normalize(&f, &mut u)?;
    let lambda = f.evaluate(&u)?.j;
    let mu = spmv(&mats.mass, &u);
    let r: Vec<f64> = spmv(&op, &u).iter().zip(&mu).map(|(a, b)| a - lambda * b).collect();
    let weak_residual = dot(&r, &solver.solve(&r)).max(0.0).sqrt();
    if !converged {
        return Err(Error::numeric("inverse iteration did not converge", increment));
    }
    Ok(EigenResult { lambda, u, iterations, rq_residual: increment, weak_residual, converged })
}

fn initial_field(init: &Init, n: usize) -> Result<Vec<f64>> {
    match init {
        Init::Default => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            Ok((0..n).map(|_| 1.0 + 0.01 * (rng.gen::<f64>() - 0.5)).collect())
        }
        Init::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..n).map(|_| rng.gen_range(0.1..1.0)).collect())
        }
        Init::Values(v) => {
            if v.len() != n {
                return Err(Error::input(format!("initial field has {} values, mesh has {n} nodes", v.len())));
            }
            if v.iter().all(|x| *x == 0.0) || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::input("initial field must be finite and not identically zero"));
            }
            Ok(v.clone())
        }
    }
}

/// Minimizes the discrete Rayleigh quotient for general `(H, p, β)`.
///
/// Steps are preconditioned by the Euclidean stiffness-plus-mass matrix,
/// sized by the Barzilai–Borwein rule and safeguarded by a nonmonotone
/// Armijo test over the last 10 values; the iterate is rescaled to
/// `‖u‖_p = 1` after each step. For `p < 2` the derivatives (never `J`
/// itself) use `H_ε = (H² + ε²)^{1/2}` with `ε = 1e-10 / diam`. The run stops
/// once the best `J` improved by less than `tol` (relative) over 10
/// iterations. Running out of iterations returns the best iterate with
/// `converged = false`.
pub fn minimize_rayleigh(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    opts: &SolveOptions,
) -> Result<EigenResult> {
    let f = Functional::new(mesh, h, p, beta)?;
    let n = mesh.node_count();
    let mut u = initial_field(&opts.init, n)?;
    lp_normalize(&f, &mut u)?;
    let eps = if p < 2.0 { 1e-10 / mesh.diameter_scale() } else { 0.0 };

    let pre = euclidean_preconditioner(mesh)?;
    let pmat = {
        let e = AnisotropicNorm::euclidean(2)?;
        let m = assemble_quadratic(mesh, [[1.0, 0.0], [0.0, 1.0]], &e)?;
        &m.stiffness + &m.mass
    };

    let (mut r, mut g) = f.evaluate_with_gradient(&u, eps)?;
    let mut recent: VecDeque<f64> = VecDeque::from([r.j]);
    let mut best_history: VecDeque<f64> = VecDeque::from([r.j]);
    let mut best = (r.j, u.clone());
    let mut alpha = 1.0;
    let mut iterations = 0;
    let mut rq_residual = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let d = pre.solve(&g);
        let gd = dot(&g, &d);
        if !(gd > 0.0) {
            rq_residual = 0.0;
            converged = true;
            break;
        }
        let reference = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let mut v: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - step * b).collect();
            if lp_normalize(&f, &mut v).is_ok() {
                let rv = f.evaluate(&v)?;
                if rv.j <= reference - 1e-4 * step * gd {
                    accepted = Some(v);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(v) = accepted else {
            // No descent at machine precision: the iterate is stationary.
            rq_residual = 0.0;
            converged = true;
            break;
        };
        let (rv, gv) = f.evaluate_with_gradient(&v, eps)?;
        let s: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gv.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let sps = dot(&s, &spmv(&pmat, &s));
        alpha = if sy > 0.0 { (sps / sy).clamp(1e-12, 1e12) } else { (2.0 * step).min(1e12) };

        u = v;
        r = rv;
        g = gv;
        if r.j < best.0 {
            best = (r.j, u.clone());
        }
        recent.push_back(r.j);
        if recent.len() > 10 {
            recent.pop_front();
        }
        best_history.push_back(best.0);
        if best_history.len() > 11 {
            let old = best_history.pop_front().expect("history is nonempty");
            rq_residual = (old - best.0) / best.0.abs().max(f64::MIN_POSITIVE);
            if rq_residual < opts.tol {
                converged = true;
                break;
            }
        }
    }

    let mut u = best.1;
    u.iter_mut().for_each(|v| *v = v.abs());
    flip_to_positive_mean(&mut u);
    lp_normalize(&f, &mut u)?;
    let (r, g) = f.evaluate_with_gradient(&u, eps)?;
    let scaled: Vec<f64> = g.iter().map(|v| v * r.den / p).collect();
    let weak_residual = dot(&scaled, &pre.solve(&scaled)).max(0.0).sqrt();
    Ok(EigenResult { lambda: r.j, u, iterations, rq_residual, weak_residual, converged })
}

/// Direct solver when `p = 2` and `H` is quadratic, descent otherwise.
pub fn solve_first(mesh: &Mesh, h: &AnisotropicNorm, p: f64, beta: f64, opts: &SolveOptions) -> Result<EigenResult> {
    if p == 2.0 && quadratic_matrix(h).is_some() {
        solve_p2_quadratic(mesh, h, beta, opts.tol)
    } else {
        minimize_rayleigh(mesh, h, p, beta, opts)
    }
}

/// Largest discrepancy between `∂J/∂uᵢ` and central differences with step
/// `1e-6·max(1, |uᵢ|)` at `probe_count` seeded random nodes, relative to the
/// largest analytic entry among the probes.
pub fn gradient_check(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    u: &[f64],
    probe_count: usize,
    seed: u64,
) -> Result<f64> {
    let f = Functional::new(mesh, h, p, beta)?;
    let (_, g) = f.evaluate_with_gradient(u, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = u.to_vec();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for _ in 0..probe_count {
        let i = rng.gen_range(0..u.len());
        let delta = 1e-6 * u[i].abs().max(1.0);
        work[i] = u[i] + delta;
        let jp = f.evaluate(&work)?.j;
        work[i] = u[i] - delta;
        let jm = f.evaluate(&work)?.j;
        work[i] = u[i];
        let fd = (jp - jm) / (2.0 * delta);
        worst = worst.max((fd - g[i]).abs());
        scale = scale.max(g[i].abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// `β σ_H(∂Ω) / |Ω|` on the mesh: the Rayleigh quotient of `u ≡ 1`, an
/// upper bound for the first eigenvalue.
pub fn constant_upper_bound(mesh: &Mesh, h: &AnisotropicNorm, beta: f64) -> f64 {
    let sigma: f64 = mesh.boundary_edges.iter().map(|e| e.length * h.h2(e.normal)).sum();
    beta * sigma / mesh.area()
}
