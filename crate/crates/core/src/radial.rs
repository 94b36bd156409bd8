//! Radial Robin eigenvalue problem on Wulff shapes.
//!
//! On `W_R = {H° < R}` the first eigenfunction is `ρ(H°(x))` where `ρ`
//! solves, for every admissible norm `H`, the same ODE as the Euclidean
//! p-Laplacian on the ball `B_R ⊂ ℝⁿ`:
//!
//! ```text
//! −(r^{n−1} (−ρ')^{p−1})' = λ r^{n−1} ρ^{p−1},   ρ'(0) = 0,
//! (−ρ'(R))^{p−1} = β ρ(R)^{p−1}.
//! ```
//!
//! With the flux `m = (−ρ')^{p−1}` this is the first-order system
//! `ρ' = −m^{1/(p−1)}`, `(r^{n−1} m)' = λ r^{n−1} ρ^{p−1}`, shot from
//! `ρ(0) = 1` and solved for the smallest `λ` that meets the Robin
//! condition.

use serde::{Deserialize, Serialize};

use crate::norms::AnisotropicNorm;
use crate::rootfind::brent;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Parameters of the radial problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    /// Space dimension, at least 2.
    pub n: usize,
    pub p: f64,
    /// Wulff radius `R`.
    pub radius: f64,
    /// Robin parameter. Zero is accepted as the Neumann limit.
    pub beta: f64,
}

impl RadialProblem {
    pub fn new(n: usize, p: f64, radius: f64, beta: f64) -> Result<Self> {
        let prob = Self { n, p, radius, beta };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::input(format!("dimension must be at least 2, got {}", self.n)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::input(format!("p must be in (1, inf), got {}", self.p)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::input(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::input(format!("beta must be non-negative, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingConfig {
    /// RK4 steps on `[r0, R]`.
    pub steps: usize,
    /// `r0 / R`, the end of the series start.
    pub series_fraction: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { steps: 10_000, series_fraction: 1e-4 }
    }
}

/// Sampled radial profile. `r[0] = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Profile {
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    /// `m = (−ρ')^{p−1}`.
    pub flux: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ShootOutcome {
    /// `g(λ) = −m(R) + β ρ(R)^{p−1}`. When `ρ` reaches zero before `R`
    /// the integration stops there and this is `−m` at that radius.
    pub residual: f64,
    pub profile: Profile,
    /// Whether `ρ > 0` held on all of `[0, R]`.
    pub positive: bool,
}

/// First eigenpair of the radial problem.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub problem: RadialProblem,
    pub lambda: f64,
    pub r: Vec<f64>,
    /// Normalized by `ρ(0) = 1`.
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    pub flux: Vec<f64>,
    /// `β_r = (−ρ'(r))^{p−1} / ρ(r)^{p−1}`.
    pub beta_profile: Vec<f64>,
    /// `|−(−ρ'(R))^{p−1} + β ρ(R)^{p−1}|`.
    pub bc_residual: f64,
}

fn rhs(n: usize, p: f64, lambda: f64, r: f64, rho: f64, w: f64) -> (f64, f64) {
    let rn = r.powi(n as i32 - 1);
    let m = (w / rn).max(0.0);
    let drho = -m.powf(1.0 / (p - 1.0));
    let dw = lambda * rn * rho.max(0.0).powf(p - 1.0);
    (drho, dw)
}

fn grid_point(r0: f64, radius: f64, steps: usize, i: usize) -> f64 {
    if i == steps {
        return radius;
    }
    let s = i as f64 / steps as f64;
    r0 + (radius - r0) * s * s
}

/// Integrates the radial system at eigenvalue candidate `lambda` with the
/// default integrator settings.
pub fn shoot(prob: &RadialProblem, lambda: f64) -> Result<ShootOutcome> {
    shoot_with(&ShootingConfig::default(), prob, lambda)
}

pub fn shoot_with(cfg: &ShootingConfig, prob: &RadialProblem, lambda: f64) -> Result<ShootOutcome> {
    prob.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::input(format!("shooting needs lambda > 0, got {lambda}")));
    }
    if cfg.steps < 2 || !(cfg.series_fraction > 0.0 && cfg.series_fraction < 1.0) {
        return Err(Error::input("invalid shooting configuration"));
    }
    let RadialProblem { n, p, radius, beta } = *prob;
    let q = 1.0 / (p - 1.0);
    let r0 = cfg.series_fraction * radius;

    let mut profile = Profile::default();
    profile.r.reserve(cfg.steps + 2);
    profile.r.push(0.0);
    profile.rho.push(1.0);
    profile.rho_prime.push(0.0);
    profile.flux.push(0.0);

    // Leading-order expansion about the removable singularity at r = 0:
    // m ≈ λ r / n and ρ ≈ 1 − (λ/n)^{1/(p−1)} (p−1)/p r^{p/(p−1)}.
    let m0 = lambda * r0 / n as f64;
    let mut rho = 1.0 - (lambda / n as f64).powf(q) * ((p - 1.0) / p) * r0.powf(p / (p - 1.0));
    let mut w = r0.powi(n as i32 - 1) * m0;
    let push = |profile: &mut Profile, r: f64, rho: f64, w: f64| {
        let m = (w / r.powi(n as i32 - 1)).max(0.0);
        profile.r.push(r);
        profile.rho.push(rho);
        profile.rho_prime.push(-m.powf(q));
        profile.flux.push(m);
    };
    push(&mut profile, r0, rho, w);
    if rho <= 0.0 {
        return Ok(ShootOutcome { residual: -m0, profile, positive: false });
    }

    let mut r = r0;
    for i in 1..=cfg.steps {
        let r_next = grid_point(r0, radius, cfg.steps, i);
        let h = r_next - r;
        let f = |r: f64, rho: f64, w: f64| rhs(n, p, lambda, r, rho, w);
        let (k1a, k1b) = f(r, rho, w);
        let (k2a, k2b) = f(r + 0.5 * h, rho + 0.5 * h * k1a, w + 0.5 * h * k1b);
        let (k3a, k3b) = f(r + 0.5 * h, rho + 0.5 * h * k2a, w + 0.5 * h * k2b);
        let (k4a, k4b) = f(r_next, rho + h * k3a, w + h * k3b);
        rho += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        w += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        r = r_next;
        if !rho.is_finite() || !w.is_finite() {
            return Err(Error::numeric(format!("radial integration blew up at r = {r}"), f64::NAN));
        }
        push(&mut profile, r, rho, w);
        if rho <= 0.0 && i < cfg.steps {
            let m = *profile.flux.last().unwrap();
            return Ok(ShootOutcome { residual: -m, profile, positive: false });
        }
    }
    let m_end = *profile.flux.last().unwrap();
    let residual = -m_end + beta * rho.max(0.0).powf(p - 1.0);
    Ok(ShootOutcome { residual, profile, positive: rho > 0.0 })
}

/// First eigenpair with the default integrator settings.
pub fn first_eigenvalue_radial(prob: &RadialProblem, tol: f64) -> Result<RadialSolution> {
    first_eigenvalue_radial_with(&ShootingConfig::default(), prob, tol)
}

/// Brackets the smallest `λ > 0` with `g(λ) = 0` and a positive profile,
/// then refines it with Brent's method to relative tolerance `tol`.
pub fn first_eigenvalue_radial_with(cfg: &ShootingConfig, prob: &RadialProblem, tol: f64) -> Result<RadialSolution> {
    prob.validate()?;
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    if prob.beta == 0.0 {
        return Ok(neumann_solution(cfg, prob));
    }

    // λ is "above" the first eigenvalue when g < 0 or the profile has
    // already lost positivity inside [0, R].
    let mut lo = 0.0;
    let mut hi = tol;
    let mut hi_shot = shoot_with(cfg, prob, hi)?;
    let mut doublings = 0;
    while hi_shot.positive && hi_shot.residual > 0.0 {
        lo = hi;
        hi *= 2.0;
        hi_shot = shoot_with(cfg, prob, hi)?;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::Internal("no sign change found while bracketing".into()));
        }
    }
    let mut g_lo = if lo == 0.0 { prob.beta } else { shoot_with(cfg, prob, lo)?.residual };
    // Pull the upper end below the positivity-loss threshold.
    let mut halvings = 0;
    while !hi_shot.positive {
        let mid = 0.5 * (lo + hi);
        let s = shoot_with(cfg, prob, mid)?;
        if !s.positive || s.residual < 0.0 {
            hi = mid;
            hi_shot = s;
        } else {
            lo = mid;
            g_lo = s.residual;
        }
        halvings += 1;
        if halvings > 200 {
            return Err(Error::Internal("no sign change below the positivity-loss threshold".into()));
        }
    }
    let g_hi = hi_shot.residual;
    let lambda = brent(
        |l| {
            if l <= 0.0 {
                return Ok(prob.beta);
            }
            Ok(shoot_with(cfg, prob, l)?.residual)
        },
        lo,
        hi,
        g_lo,
        g_hi,
        tol * hi,
        500,
    )?;
    let shot = shoot_with(cfg, prob, lambda)?;
    if !shot.positive {
        return Err(Error::Internal(format!("first eigenfunction at λ = {lambda} is not positive")));
    }
    Ok(build_solution(prob, lambda, shot))
}

fn build_solution(prob: &RadialProblem, lambda: f64, shot: ShootOutcome) -> RadialSolution {
    let p = prob.p;
    let Profile { r, rho, rho_prime, flux } = shot.profile;
    let beta_profile = flux.iter().zip(&rho).map(|(m, rho)| m / rho.powf(p - 1.0)).collect();
    RadialSolution { problem: *prob, lambda, r, rho, rho_prime, flux, beta_profile, bc_residual: shot.residual.abs() }
}

fn neumann_solution(cfg: &ShootingConfig, prob: &RadialProblem) -> RadialSolution {
    let steps = cfg.steps;
    let r0 = cfg.series_fraction * prob.radius;
    let mut r = vec![0.0];
    r.extend((0..=steps).map(|i| grid_point(r0, prob.radius, steps, i)));
    let len = r.len();
    RadialSolution {
        problem: *prob,
        lambda: 0.0,
        r,
        rho: vec![1.0; len],
        rho_prime: vec![0.0; len],
        flux: vec![0.0; len],
        beta_profile: vec![0.0; len],
        bc_residual: 0.0,
    }
}

impl RadialSolution {
    fn locate(&self, r: f64) -> (usize, f64) {
        let r = r.clamp(0.0, self.problem.radius);
        let i = match self.r.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(i) => i.min(self.r.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.r.len() - 2),
        };
        let h = self.r[i + 1] - self.r[i];
        (i, if h > 0.0 { (r - self.r[i]) / h } else { 0.0 })
    }

    /// `ρ(r)` by cubic Hermite interpolation.
    pub fn rho_at(&self, r: f64) -> f64 {
        let (i, s) = self.locate(r);
        let h = self.r[i + 1] - self.r[i];
        let (y0, y1) = (self.rho[i], self.rho[i + 1]);
        let (d0, d1) = (self.rho_prime[i] * h, self.rho_prime[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
    }

    /// `ρ'(r)`, linearly interpolated.
    pub fn rho_prime_at(&self, r: f64) -> f64 {
        let (i, s) = self.locate(r);
        (1.0 - s) * self.rho_prime[i] + s * self.rho_prime[i + 1]
    }

    /// `β_r`, linearly interpolated.
    pub fn beta_at(&self, r: f64) -> f64 {
        let (i, s) = self.locate(r);
        (1.0 - s) * self.beta_profile[i] + s * self.beta_profile[i + 1]
    }

    /// `∫_0^{r_max} β_s^{exponent} s^{n−1} ds` by the trapezoid rule on the
    /// integration grid.
    pub fn beta_moment(&self, r_max: f64, exponent: f64) -> f64 {
        let n = self.problem.n as i32;
        let f = |r: f64, b: f64| b.powf(exponent) * r.powi(n - 1);
        let r_max = r_max.clamp(0.0, self.problem.radius);
        let mut acc = 0.0;
        for i in 0..self.r.len() - 1 {
            let (a, b) = (self.r[i], self.r[i + 1]);
            if a >= r_max {
                break;
            }
            let fa = f(a, self.beta_profile[i]);
            if b <= r_max {
                acc += 0.5 * (b - a) * (fa + f(b, self.beta_profile[i + 1]));
            } else {
                acc += 0.5 * (r_max - a) * (fa + f(r_max, self.beta_at(r_max)));
            }
        }
        acc
    }

    /// True when `β_r` is nondecreasing along the grid.
    pub fn beta_profile_nondecreasing(&self) -> bool {
        self.beta_profile.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1e-300))
    }
}

/// `λ₁(W_R)` for the norm `H`.
///
/// The first eigenvalue of every Wulff shape `{H° < R}` equals the
/// Euclidean ball value with the same `R`, so `H` only has to match the
/// dimension; the radial solve is the whole computation.
pub fn lambda_of_wulff(h: &AnisotropicNorm, prob: &RadialProblem, tol: f64) -> Result<f64> {
    if h.dim() != prob.n {
        return Err(Error::input(format!("norm is {}-dimensional but the radial problem has n = {}", h.dim(), prob.n)));
    }
    Ok(first_eigenvalue_radial(prob, tol)?.lambda)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingCheck {
    /// `λ₁` on radius `tR` with Robin parameter `β`.
    pub lhs: f64,
    /// `t^{−p} λ₁` on radius `R` with Robin parameter `t^{p−1} β`.
    pub rhs: f64,
    pub residual: f64,
}

/// Compares both sides of `λ₁(tΩ, β) = t^{−p} λ₁(Ω, t^{p−1} β)` on a
/// Wulff shape.
pub fn verify_scaling(prob: &RadialProblem, t: f64, tol: f64) -> Result<ScalingCheck> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::input(format!("scale factor must be positive, got {t}")));
    }
    let lhs = first_eigenvalue_radial(&prob.with_radius(prob.radius * t), tol)?.lambda;
    let inner = first_eigenvalue_radial(&prob.with_beta(prob.beta * t.powf(prob.p - 1.0)), tol)?.lambda;
    let rhs = t.powf(-prob.p) * inner;
    let residual = if lhs == rhs { 0.0 } else { (lhs - rhs).abs() / lhs.abs() };
    Ok(ScalingCheck { lhs, rhs, residual })
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub lambda_strictly_decreasing: bool,
    /// Per radius: `β_r` nondecreasing with `β_0 = 0` and `β_R = β`
    /// within 1e-8.
    pub beta_profiles_ok: Vec<bool>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.lambda_strictly_decreasing && self.beta_profiles_ok.iter().all(|&b| b)
    }
}

/// Checks that `λ₁(W_r)` strictly decreases in `r` and that each `β_r`
/// profile rises monotonically from 0 to `β`.
pub fn verify_wulff_monotonicity(
    h: &AnisotropicNorm,
    n: usize,
    p: f64,
    beta: f64,
    radii: &[f64],
    tol: f64,
) -> Result<MonotonicityReport> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    let mut lambdas = Vec::with_capacity(radii.len());
    let mut beta_profiles_ok = Vec::with_capacity(radii.len());
    for &radius in radii {
        let prob = RadialProblem::new(n, p, radius, beta)?;
        lambdas.push(lambda_of_wulff(h, &prob, tol)?);
        let sol = first_eigenvalue_radial(&prob, tol)?;
        let b0 = sol.beta_profile[0];
        let b_end = *sol.beta_profile.last().unwrap();
        beta_profiles_ok
            .push(b0 == 0.0 && (b_end - beta).abs() <= 1e-8 * beta.max(1.0) && sol.beta_profile_nondecreasing());
    }
    let lambda_strictly_decreasing = lambdas.windows(2).all(|w| w[1] < w[0]);
    Ok(MonotonicityReport { radii: radii.to_vec(), lambdas, lambda_strictly_decreasing, beta_profiles_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(n: usize, p: f64, r: f64, b: f64) -> RadialProblem {
        RadialProblem::new(n, p, r, b).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialProblem::new(1, 2.0, 1.0, 1.0).is_err());
        assert!(RadialProblem::new(2, 1.0, 1.0, 1.0).is_err());
        assert!(RadialProblem::new(2, 2.0, 0.0, 1.0).is_err());
        assert!(RadialProblem::new(2, 2.0, 1.0, -1.0).is_err());
        assert!(matches!(shoot(&prob(2, 2.0, 1.0, 1.0), 0.0), Err(Error::Input(_))));
        assert!(matches!(shoot(&prob(2, 2.0, 1.0, 1.0), -3.0), Err(Error::Input(_))));
    }

    #[test]
    fn small_lambda_residual_tends_to_beta() {
        let s = shoot(&prob(2, 2.0, 1.0, 0.7), 1e-14).unwrap();
        assert!(s.positive);
        assert!((s.residual - 0.7).abs() < 1e-12);
    }

    #[test]
    fn neumann_is_constant() {
        let sol = first_eigenvalue_radial(&prob(2, 2.0, 1.0, 0.0), DEFAULT_TOL).unwrap();
        assert_eq!(sol.lambda, 0.0);
        assert!(sol.rho.iter().all(|&v| v == 1.0));
        // g(λ) → 0 as λ → 0 when β = 0.
        let s = shoot(&prob(2, 2.0, 1.0, 0.0), 1e-14).unwrap();
        assert!(s.residual.abs() < 1e-13);
    }

    #[test]
    fn profile_is_positive_and_decreasing() {
        for p in [1.5, 2.0, 3.0] {
            let sol = first_eigenvalue_radial(&prob(2, p, 1.0, 1.0), DEFAULT_TOL).unwrap();
            assert!(sol.rho.windows(2).all(|w| w[1] < w[0]), "p = {p}");
            assert!(sol.rho.iter().all(|&v| v > 0.0));
            assert_eq!(sol.rho_prime[0], 0.0);
            assert!(sol.bc_residual < 1e-8);
            assert!(sol.beta_profile_nondecreasing());
        }
    }

    #[test]
    fn lambda_increases_with_beta() {
        for (n, p) in [(2, 2.0), (3, 3.0), (2, 1.5)] {
            let l: Vec<f64> = [0.1, 1.0, 10.0]
                .iter()
                .map(|&b| first_eigenvalue_radial(&prob(n, p, 1.0, b), DEFAULT_TOL).unwrap().lambda)
                .collect();
            assert!(l[0] < l[1] && l[1] < l[2], "{l:?}");
        }
    }

    #[test]
    fn wulff_lambda_ignores_the_norm() {
        let pr = prob(2, 2.0, 1.0, 1.0);
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let q = AnisotropicNorm::quadratic2([4.0, 0.0, 0.0, 1.0]).unwrap();
        let base = first_eigenvalue_radial(&pr, DEFAULT_TOL).unwrap().lambda;
        assert_eq!(lambda_of_wulff(&e, &pr, DEFAULT_TOL).unwrap(), base);
        assert_eq!(lambda_of_wulff(&q, &pr, DEFAULT_TOL).unwrap(), base);
        let e3 = AnisotropicNorm::euclidean(3).unwrap();
        assert!(lambda_of_wulff(&e3, &pr, DEFAULT_TOL).is_err());
    }

    #[test]
    fn scaling_identity() {
        let c = verify_scaling(&prob(2, 2.0, 1.0, 1.0), 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn monotonicity_rejects_unsorted_radii() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        assert!(verify_wulff_monotonicity(&e, 2, 2.0, 1.0, &[1.0, 0.5], DEFAULT_TOL).is_err());
        let single = verify_wulff_monotonicity(&e, 2, 2.0, 1.0, &[1.0], DEFAULT_TOL).unwrap();
        assert!(single.holds());
    }

    #[test]
    fn interpolation_hits_nodes() {
        let sol = first_eigenvalue_radial(&prob(2, 2.0, 1.0, 1.0), DEFAULT_TOL).unwrap();
        let i = sol.r.len() / 2;
        assert!((sol.rho_at(sol.r[i]) - sol.rho[i]).abs() < 1e-15);
        assert!((sol.beta_at(1.0) - 1.0).abs() < 1e-8);
        assert_eq!(sol.beta_at(0.0), 0.0);
    }
}
