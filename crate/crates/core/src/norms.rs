//! Anisotropic norms `H`, their polar norms `H°` and the identities linking
//! them.
//!
//! A norm here is an even, 1-homogeneous function with strictly convex
//! sublevel sets. Three families have closed forms for `H` and its gradient
//! (Euclidean, quadratic `sqrt(ξᵀAξ)`, and the ℓ_q family); the polar norm
//! has a closed form only for the first two and is otherwise computed as
//! `sup_{|u|=1} x·u / H(u)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rootfind::{brent, golden_max};
use crate::{Error, Result};

/// Gradients of the numerically evaluated families are refused below this
/// magnitude instead of being regularized.
pub const TINY_ARGUMENT: f64 = 1e-12;

/// Number of multi-start directions for the planar numeric polar.
const POLAR_STARTS: usize = 64;
const POLAR_ANGLE_TOL: f64 = 1e-10;

/// Evaluator backing a [`NormFamily::Custom`] norm.
pub type NormFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomNorm {
    pub name: String,
    pub eval: NormFn,
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNorm").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub enum NormFamily {
    Euclidean,
    /// `H(ξ) = sqrt(ξᵀ A ξ)` with `A` symmetric positive definite.
    Quadratic(Quadratic),
    /// `H(ξ) = (Σ (ξᵢ² + ε²)^{q/2})^{1/q} − n^{1/q} ε`.
    ///
    /// Only 1-homogeneous for `ε = 0`, which is the default. For `q > 2`
    /// the Hessian of `H^p` degenerates on the coordinate axes, so the
    /// ellipticity constant γ may vanish there.
    SmoothedPNorm {
        q: f64,
        eps: f64,
    },
    Custom(CustomNorm),
}

#[derive(Clone, Debug)]
pub struct Quadratic {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    eig_min: f64,
    eig_max: f64,
}

impl Quadratic {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn eig_min(&self) -> f64 {
        self.eig_min
    }
}

/// An anisotropic norm on ℝⁿ. Immutable after construction.
#[derive(Clone, Debug)]
pub struct AnisotropicNorm {
    family: NormFamily,
    dim: usize,
}

/// Maximum residuals of the structural identities over a random sample.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// `H_ξ(ξ)·ξ = H(ξ)` and `H°_ξ(ξ)·ξ = H°(ξ)`, relative.
    pub euler: f64,
    /// `H(H°_ξ(ξ)) = 1` and `H°(H_ξ(ξ)) = 1`.
    pub polar_unit: f64,
    /// `H°(ξ) H_ξ(H°_ξ(ξ)) = ξ` and `H(ξ) H°_ξ(H_ξ(ξ)) = ξ`, relative to `|ξ|`.
    pub inverse_map: f64,
    /// `H(tξ) = |t| H(ξ)` for `t ∈ {−2, −1, 0.5, 3}`, relative.
    pub homogeneity: f64,
    /// Largest violation of `a|ξ| ≤ H(ξ) ≤ b|ξ|`, relative to `|ξ|`.
    pub bounds: f64,
    pub sample_count: usize,
    /// Smallest eigenvalue of `D²(H^p)(η)/p` divided by `|η|^{p−2}` over the
    /// sample. An estimate, not a certificate.
    pub gamma_estimate: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [self.euler, self.polar_unit, self.inverse_map, self.homogeneity, self.bounds]
            .into_iter()
            .fold(0.0, |m: f64, r| if r.is_nan() { f64::NAN } else { m.max(r) })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl AnisotropicNorm {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { family: NormFamily::Euclidean, dim })
    }

    /// Quadratic norm from a symmetric positive-definite matrix given by rows.
    pub fn quadratic(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input(format!("quadratic norm matrix must be {n}x{n}")));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("quadratic norm matrix has non-finite entries"));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * matrix.amax().max(1.0) {
            return Err(Error::input("quadratic norm matrix is not symmetric"));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let eig_min = eig.eigenvalues.min();
        let eig_max = eig.eigenvalues.max();
        if eig_min <= 0.0 {
            return Err(Error::input("quadratic norm matrix is not positive definite"));
        }
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::input("quadratic norm matrix is not positive definite"))?
            .inverse();
        Ok(Self { family: NormFamily::Quadratic(Quadratic { matrix, inverse, eig_min, eig_max }), dim: n })
    }

    /// Planar quadratic norm from the row-major entries `[a11, a12, a21, a22]`.
    pub fn quadratic2(entries: [f64; 4]) -> Result<Self> {
        Self::quadratic(&[vec![entries[0], entries[1]], vec![entries[2], entries[3]]])
    }

    pub fn smoothed_pnorm(dim: usize, q: f64, eps: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::input(format!("p-norm exponent q must be in (1, inf), got {q}")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::input(format!("p-norm regularization must be >= 0, got {eps}")));
        }
        Ok(Self { family: NormFamily::SmoothedPNorm { q, eps }, dim })
    }

    pub fn custom(dim: usize, name: impl Into<String>, eval: NormFn) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { family: NormFamily::Custom(CustomNorm { name: name.into(), eval }), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    /// True when both `H` and `H°` have closed forms.
    pub fn has_closed_form_polar(&self) -> bool {
        matches!(self.family, NormFamily::Euclidean | NormFamily::Quadratic(_))
    }

    /// Short stable label, e.g. `euclidean` or `quadratic:4,0,0,1`.
    pub fn label(&self) -> String {
        match &self.family {
            NormFamily::Euclidean => "euclidean".to_string(),
            NormFamily::Quadratic(q) => {
                let entries: Vec<String> = (0..self.dim)
                    .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
                    .map(|(i, j)| format!("{}", q.matrix[(i, j)]))
                    .collect();
                format!("quadratic:{}", entries.join(","))
            }
            NormFamily::SmoothedPNorm { q, eps } if *eps == 0.0 => format!("pnorm:{q}"),
            NormFamily::SmoothedPNorm { q, eps } => format!("pnorm:{q},{eps}"),
            NormFamily::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// The polar norm as a norm object, when it has a closed form.
    pub fn polar_norm(&self) -> Option<AnisotropicNorm> {
        match &self.family {
            NormFamily::Euclidean => Some(self.clone()),
            NormFamily::Quadratic(q) => {
                let rows: Vec<Vec<f64>> =
                    (0..self.dim).map(|i| (0..self.dim).map(|j| q.inverse[(i, j)]).collect()).collect();
                AnisotropicNorm::quadratic(&rows).ok()
            }
            _ => None,
        }
    }

    fn check_arg(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::input(format!(
                "dimension mismatch: norm is {}-dimensional, argument has {} components",
                self.dim,
                xi.len()
            )));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("argument has non-finite components"));
        }
        Ok(())
    }

    /// `H(ξ)`.
    pub fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        self.check_arg(xi)?;
        Ok(self.value(xi))
    }

    /// `H(ξ)` without argument validation.
    pub(crate) fn value(&self, xi: &[f64]) -> f64 {
        match &self.family {
            NormFamily::Euclidean => norm2(xi),
            NormFamily::Quadratic(q) => quad_form(&q.matrix, xi).max(0.0).sqrt(),
            NormFamily::SmoothedPNorm { q, eps } => pnorm_value(xi, *q, *eps),
            NormFamily::Custom(c) => (c.eval)(xi),
        }
    }

    /// `H_ξ(ξ)`. Undefined at the origin.
    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_arg(xi)?;
        let r = norm2(xi);
        let threshold = match self.family {
            NormFamily::Euclidean | NormFamily::Quadratic(_) => 0.0,
            _ => TINY_ARGUMENT,
        };
        if r <= threshold {
            return Err(Error::Domain(format!("gradient of the norm is undefined at |ξ| = {r:e}")));
        }
        Ok(self.grad_unchecked(xi))
    }

    /// `H_ξ(ξ)` for `ξ ≠ 0`, no validation.
    pub(crate) fn grad_unchecked(&self, xi: &[f64]) -> Vec<f64> {
        match &self.family {
            NormFamily::Euclidean => {
                let r = norm2(xi);
                xi.iter().map(|v| v / r).collect()
            }
            NormFamily::Quadratic(q) => {
                let ax = mat_vec(&q.matrix, xi);
                let h = dot(&ax, xi).sqrt();
                ax.into_iter().map(|v| v / h).collect()
            }
            NormFamily::SmoothedPNorm { q, eps } => pnorm_gradient(xi, *q, *eps),
            NormFamily::Custom(c) => central_gradient(&*c.eval, xi),
        }
    }

    /// `H°(x) = sup_{ξ≠0} x·ξ / H(ξ)`.
    pub fn polar_evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_arg(x)?;
        match &self.family {
            NormFamily::Euclidean => Ok(norm2(x)),
            NormFamily::Quadratic(q) => Ok(quad_form(&q.inverse, x).max(0.0).sqrt()),
            _ => Ok(self.numeric_polar(x)?.0),
        }
    }

    /// `H°_ξ(x)`. Undefined at the origin.
    pub fn polar_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arg(x)?;
        if norm2(x) == 0.0 {
            return Err(Error::Domain("polar gradient is undefined at the origin".into()));
        }
        match &self.family {
            NormFamily::Euclidean => {
                let r = norm2(x);
                Ok(x.iter().map(|v| v / r).collect())
            }
            NormFamily::Quadratic(q) => {
                let ax = mat_vec(&q.inverse, x);
                let h = dot(&ax, x).sqrt();
                Ok(ax.into_iter().map(|v| v / h).collect())
            }
            _ => {
                // The sup is attained at a unique direction u*; by the
                // envelope theorem the gradient is u*/H(u*).
                let (_, arg) = self.numeric_polar(x)?;
                let h = self.value(&arg);
                Ok(arg.into_iter().map(|v| v / h).collect())
            }
        }
    }

    /// Returns `(H°(x), argmax unit vector)`.
    fn numeric_polar(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let xn = norm2(x);
        if xn == 0.0 {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            return Ok((0.0, e));
        }
        let value = if self.dim == 2 { self.numeric_polar_planar(x) } else { self.numeric_polar_sphere(x)? };
        if !value.0.is_finite() {
            return Err(Error::numeric("polar evaluation produced a non-finite value", f64::NAN));
        }
        Ok(value)
    }

    fn numeric_polar_planar(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let ratio = |theta: f64| {
            let u = [theta.cos(), theta.sin()];
            (x[0] * u[0] + x[1] * u[1]) / self.value(&u)
        };
        let step = std::f64::consts::TAU / POLAR_STARTS as f64;
        let (best_k, _) = (0..POLAR_STARTS)
            .map(|k| (k, ratio(k as f64 * step)))
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        let centre = best_k as f64 * step;
        let (mut theta, mut value) = golden_max(ratio, centre - step, centre + step, POLAR_ANGLE_TOL);
        // The ratio is flat at its maximum, so golden section only pins the
        // angle to ~sqrt(eps). Polish on the stationarity condition.
        let slope = |t: f64| {
            let u = [t.cos(), t.sin()];
            let du = [-t.sin(), t.cos()];
            let h = self.value(&u);
            let g = self.grad_unchecked(&u);
            let xu = x[0] * u[0] + x[1] * u[1];
            (x[0] * du[0] + x[1] * du[1]) / h - xu * (g[0] * du[0] + g[1] * du[1]) / (h * h)
        };
        // Near flat stretches of the unit ball the golden estimate can miss
        // by more than 1e-6, so the bracket grows until it straddles the root.
        let mut width = 1e-6;
        while width < step {
            let (lo, hi) = (theta - width, theta + width);
            let (slo, shi) = (slope(lo), slope(hi));
            if slo > 0.0 && shi < 0.0 {
                if let Ok(t) = brent(|t| Ok(slope(t)), lo, hi, slo, shi, 1e-15, 200) {
                    // At the maximum the ratio only resolves to rounding, so
                    // the root wins unless it is clearly worse.
                    let v = ratio(t);
                    if v >= value - 8.0 * f64::EPSILON * value.abs() {
                        theta = t;
                        value = value.max(v);
                    }
                }
                break;
            }
            width *= 8.0;
        }
        (value, vec![theta.cos(), theta.sin()])
    }

    fn numeric_polar_sphere(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.dim;
        let ratio = |u: &[f64]| dot(x, u) / self.value(u);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut best = normalized(x);
        let mut best_val = ratio(&best);
        for _ in 0..256 * n {
            let u = normalized(&(0..n).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<_>>());
            for cand in [u.clone(), u.iter().map(|v| -v).collect()] {
                let v = ratio(&cand);
                if v > best_val {
                    best_val = v;
                    best = cand;
                }
            }
        }
        // Projected gradient ascent on the sphere with backtracking.
        let mut step = 0.1;
        let mut tangent_norm = f64::INFINITY;
        for _ in 0..20_000 {
            let h = self.value(&best);
            let grad_h = self.grad_unchecked(&best);
            let xu = dot(x, &best);
            let g: Vec<f64> = (0..n).map(|i| x[i] / h - xu * grad_h[i] / (h * h)).collect();
            let radial = dot(&g, &best);
            let tangent: Vec<f64> = (0..n).map(|i| g[i] - radial * best[i]).collect();
            tangent_norm = norm2(&tangent);
            if tangent_norm <= 1e-13 * norm2(x) / h {
                return Ok((best_val, best));
            }
            loop {
                let trial = normalized(&(0..n).map(|i| best[i] + step * tangent[i]).collect::<Vec<_>>());
                let v = ratio(&trial);
                if v >= best_val {
                    best = trial;
                    best_val = v;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
                if step < 1e-18 {
                    return Ok((best_val, best));
                }
            }
        }
        Err(Error::numeric("numeric polar did not converge", tangent_norm))
    }

    /// Constants `0 < a ≤ b` with `a|ξ| ≤ H(ξ) ≤ b|ξ|`.
    ///
    /// Exact for the closed-form families; sampled over directions for
    /// custom norms.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.dim as f64;
        match &self.family {
            NormFamily::Euclidean => (1.0, 1.0),
            NormFamily::Quadratic(q) => (q.eig_min.sqrt(), q.eig_max.sqrt()),
            NormFamily::SmoothedPNorm { q, eps } if *eps == 0.0 => {
                let c = n.powf(1.0 / q - 0.5);
                if *q >= 2.0 {
                    (c, 1.0)
                } else {
                    (1.0, c)
                }
            }
            _ => self.sampled_bounds(),
        }
    }

    fn sampled_bounds(&self) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..4096 {
            let u = normalized(&(0..self.dim).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<_>>());
            let v = self.value(&u);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Samples random nonzero vectors and records the worst residual of each
    /// structural identity together with an estimate of the ellipticity
    /// constant γ for exponent `p`.
    pub fn verify_identities(&self, samples: usize, seed: u64, p: f64) -> Result<IdentityReport> {
        if samples == 0 {
            return Err(Error::input("verify_identities needs at least one sample"));
        }
        if !(p > 1.0) {
            return Err(Error::input(format!("exponent p must exceed 1, got {p}")));
        }
        let n = self.dim;
        let (a, b) = self.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = IdentityReport {
            euler: 0.0,
            polar_unit: 0.0,
            inverse_map: 0.0,
            homogeneity: 0.0,
            bounds: 0.0,
            sample_count: samples,
            gamma_estimate: f64::INFINITY,
        };
        // NaN must survive the running max so a broken evaluator shows up.
        let upd = |slot: &mut f64, v: f64| {
            if v.is_nan() || slot.is_nan() {
                *slot = f64::NAN;
            } else if v > *slot {
                *slot = v;
            }
        };
        for _ in 0..samples {
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let dir = normalized(&(0..n).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<_>>());
            let xi: Vec<f64> = dir.iter().map(|v| v * scale).collect();
            let r = scale;
            let h = self.value(&xi);
            let hg = self.grad_unchecked(&xi);
            let h0 = self.polar_evaluate(&xi)?;
            let h0g = self.polar_gradient(&xi)?;

            upd(&mut report.euler, (dot(&hg, &xi) - h).abs() / h);
            upd(&mut report.euler, (dot(&h0g, &xi) - h0).abs() / h0);

            upd(&mut report.polar_unit, (self.value(&h0g) - 1.0).abs());
            upd(&mut report.polar_unit, (self.polar_evaluate(&hg)? - 1.0).abs());

            let back = self.grad_unchecked(&h0g);
            let e1: Vec<f64> = (0..n).map(|i| h0 * back[i] - xi[i]).collect();
            upd(&mut report.inverse_map, norm2(&e1) / r);
            let back = self.polar_gradient(&hg)?;
            let e2: Vec<f64> = (0..n).map(|i| h * back[i] - xi[i]).collect();
            upd(&mut report.inverse_map, norm2(&e2) / r);

            for t in [-2.0, -1.0, 0.5, 3.0] {
                let txi: Vec<f64> = xi.iter().map(|v| t * v).collect();
                upd(&mut report.homogeneity, (self.value(&txi) - t.abs() * h).abs() / h);
            }

            let viol = (a * r - h).max(h - b * r).max(0.0) / r;
            upd(&mut report.bounds, viol);

            let g = self.ellipticity_at(&xi, p);
            if g.is_nan() {
                report.gamma_estimate = f64::NAN;
            } else if g < report.gamma_estimate {
                report.gamma_estimate = g;
            }
        }
        Ok(report)
    }

    /// `λ_min(D²(H^p)(η)/p) / |η|^{p−2}` by central differences of the
    /// analytic `H^{p−1} H_ξ` at relative step 1e-5.
    fn ellipticity_at(&self, eta: &[f64], p: f64) -> f64 {
        let n = self.dim;
        let r = norm2(eta);
        let delta = 1e-5 * r;
        let flux = |z: &[f64]| {
            let h = self.value(z);
            let g = self.grad_unchecked(z);
            g.into_iter().map(|v| h.powf(p - 1.0) * v).collect::<Vec<_>>()
        };
        let mut hess = DMatrix::zeros(n, n);
        let mut zp = eta.to_vec();
        let mut zm = eta.to_vec();
        for j in 0..n {
            zp[j] = eta[j] + delta;
            zm[j] = eta[j] - delta;
            let (fp, fm) = (flux(&zp), flux(&zm));
            for i in 0..n {
                hess[(i, j)] = (fp[i] - fm[i]) / (2.0 * delta);
            }
            zp[j] = eta[j];
            zm[j] = eta[j];
        }
        let sym = (&hess + hess.transpose()) * 0.5;
        if sym.iter().any(|v| !v.is_finite()) {
            return f64::NAN;
        }
        SymmetricEigen::new(sym).eigenvalues.min() / r.powf(p - 2.0)
    }

    // Planar fast paths used in assembly loops.

    #[inline]
    pub(crate) fn h2(&self, xi: [f64; 2]) -> f64 {
        match &self.family {
            NormFamily::Euclidean => xi[0].hypot(xi[1]),
            NormFamily::Quadratic(q) => {
                let m = &q.matrix;
                (m[(0, 0)] * xi[0] * xi[0] + (m[(0, 1)] + m[(1, 0)]) * xi[0] * xi[1] + m[(1, 1)] * xi[1] * xi[1])
                    .max(0.0)
                    .sqrt()
            }
            _ => self.value(&xi),
        }
    }

    /// `(H(ξ), H_ξ(ξ))`; the gradient is zero at the origin.
    #[inline]
    pub(crate) fn h2_grad(&self, xi: [f64; 2]) -> (f64, [f64; 2]) {
        let h = self.h2(xi);
        if h == 0.0 {
            return (0.0, [0.0, 0.0]);
        }
        match &self.family {
            NormFamily::Euclidean => (h, [xi[0] / h, xi[1] / h]),
            NormFamily::Quadratic(q) => {
                let m = &q.matrix;
                let ax = [m[(0, 0)] * xi[0] + m[(0, 1)] * xi[1], m[(1, 0)] * xi[0] + m[(1, 1)] * xi[1]];
                (h, [ax[0] / h, ax[1] / h])
            }
            _ => {
                if xi[0].hypot(xi[1]) < TINY_ARGUMENT {
                    return (h, [0.0, 0.0]);
                }
                let g = self.grad_unchecked(&xi);
                (h, [g[0], g[1]])
            }
        }
    }

    /// `H°(x)` for planar `x`. Panics only if the numeric polar fails, which
    /// the planar golden-section path cannot do for finite input.
    #[inline]
    pub(crate) fn polar2(&self, x: [f64; 2]) -> f64 {
        match &self.family {
            NormFamily::Euclidean => x[0].hypot(x[1]),
            NormFamily::Quadratic(q) => {
                let m = &q.inverse;
                (m[(0, 0)] * x[0] * x[0] + (m[(0, 1)] + m[(1, 0)]) * x[0] * x[1] + m[(1, 1)] * x[1] * x[1])
                    .max(0.0)
                    .sqrt()
            }
            _ => {
                if x[0] == 0.0 && x[1] == 0.0 {
                    0.0
                } else {
                    self.numeric_polar_planar(&x).0
                }
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::input(format!("norm dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let r = norm2(v);
    v.iter().map(|x| x / r).collect()
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let v = m * DVector::from_column_slice(x);
    v.iter().copied().collect()
}

fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    dot(&mat_vec(m, x), x)
}

fn pnorm_value(xi: &[f64], q: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        let m = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        // Scale by the largest component to avoid overflow for large q.
        let s: f64 = xi.iter().map(|v| (v.abs() / m).powf(q)).sum();
        return m * s.powf(1.0 / q);
    }
    let s: f64 = xi.iter().map(|v| (v * v + eps * eps).powf(q / 2.0)).sum();
    s.powf(1.0 / q) - (xi.len() as f64).powf(1.0 / q) * eps
}

fn pnorm_gradient(xi: &[f64], q: f64, eps: f64) -> Vec<f64> {
    if eps == 0.0 {
        let h = pnorm_value(xi, q, 0.0);
        return xi
            .iter()
            .map(|v| {
                let t = v.abs() / h;
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(q - 1.0) * v.signum()
                }
            })
            .collect();
    }
    let s: f64 = xi.iter().map(|v| (v * v + eps * eps).powf(q / 2.0)).sum();
    let outer = s.powf(1.0 / q - 1.0);
    xi.iter().map(|v| outer * (v * v + eps * eps).powf(q / 2.0 - 1.0) * v).collect()
}

fn central_gradient(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), xi: &[f64]) -> Vec<f64> {
    let step = 1e-6 * norm2(xi);
    let mut z = xi.to_vec();
    (0..xi.len())
        .map(|i| {
            z[i] = xi[i] + step;
            let fp = f(&z);
            z[i] = xi[i] - step;
            let fm = f(&z);
            z[i] = xi[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag41() -> AnisotropicNorm {
        AnisotropicNorm::quadratic2([4.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn euclidean_pythagoras() {
        let h = AnisotropicNorm::euclidean(2).unwrap();
        assert_eq!(h.evaluate(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(h.polar_evaluate(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(h.gradient(&[0.0, 2.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(h.polar_gradient(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_argument() {
        for h in
            [AnisotropicNorm::euclidean(2).unwrap(), diag41(), AnisotropicNorm::smoothed_pnorm(2, 4.0, 0.0).unwrap()]
        {
            assert_eq!(h.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
            assert_eq!(h.polar_evaluate(&[0.0, 0.0]).unwrap(), 0.0);
            assert!(matches!(h.gradient(&[0.0, 0.0]), Err(Error::Domain(_))));
            assert!(matches!(h.polar_gradient(&[0.0, 0.0]), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn tiny_arguments_rejected_for_numeric_families() {
        let h = AnisotropicNorm::smoothed_pnorm(2, 3.0, 0.0).unwrap();
        assert!(matches!(h.gradient(&[1e-13, 0.0]), Err(Error::Domain(_))));
        // Closed forms stay defined all the way down.
        assert!(diag41().gradient(&[1e-13, 0.0]).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let h = AnisotropicNorm::euclidean(2).unwrap();
        assert!(matches!(h.evaluate(&[1.0, 2.0, 3.0]), Err(Error::Input(_))));
        assert!(matches!(h.polar_evaluate(&[1.0]), Err(Error::Input(_))));
    }

    #[test]
    fn quadratic_rejects_bad_matrices() {
        assert!(AnisotropicNorm::quadratic2([1.0, 2.0, 0.0, 1.0]).is_err());
        assert!(AnisotropicNorm::quadratic2([1.0, 0.0, 0.0, -1.0]).is_err());
        assert!(AnisotropicNorm::quadratic(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn quadratic_closed_forms() {
        let h = diag41();
        assert_eq!(h.evaluate(&[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(h.gradient(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(h.polar_evaluate(&[1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(h.polar_gradient(&[1.0, 0.0]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(h.bounds(), (1.0, 2.0));
        assert_eq!(h.label(), "quadratic:4,0,0,1");
    }

    #[test]
    fn pnorm_limits() {
        let h = AnisotropicNorm::smoothed_pnorm(2, 2.0, 0.0).unwrap();
        assert!((h.evaluate(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-14);
        assert!((h.polar_evaluate(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
        // ℓ_4 and ℓ_{4/3} are dual.
        let h4 = AnisotropicNorm::smoothed_pnorm(2, 4.0, 0.0).unwrap();
        let x = [0.3f64, -1.1];
        let dual = (x[0].abs().powf(4.0 / 3.0) + x[1].abs().powf(4.0 / 3.0)).powf(0.75);
        assert!((h4.polar_evaluate(&x).unwrap() - dual).abs() < 1e-12);
    }

    #[test]
    fn regularized_pnorm_vanishes_at_origin() {
        let h = AnisotropicNorm::smoothed_pnorm(2, 3.0, 0.1).unwrap();
        assert!(h.evaluate(&[0.0, 0.0]).unwrap().abs() < 1e-15);
        assert!(h.evaluate(&[1.0, 1.0]).unwrap() > 0.0);
    }

    #[test]
    fn custom_norm_uses_numeric_polar() {
        let h = AnisotropicNorm::custom(2, "ellipse", Arc::new(|x: &[f64]| (4.0 * x[0] * x[0] + x[1] * x[1]).sqrt()))
            .unwrap();
        let x = [0.7f64, -0.2];
        let exact = (x[0] * x[0] / 4.0 + x[1] * x[1]).sqrt();
        assert!((h.polar_evaluate(&x).unwrap() - exact).abs() < 1e-12);
        let g = h.gradient(&[1.0, 0.0]).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && g[1].abs() < 1e-8);
    }

    #[test]
    fn broken_custom_norm_reports_nan() {
        let h = AnisotropicNorm::custom(2, "broken", Arc::new(|_x: &[f64]| f64::NAN)).unwrap();
        let rep = h.verify_identities(3, 1, 2.0);
        match rep {
            Ok(r) => assert!(r.max_residual().is_nan()),
            Err(e) => assert!(matches!(e, Error::Numeric { .. })),
        }
    }

    #[test]
    fn three_dimensional_numeric_polar() {
        let h = AnisotropicNorm::smoothed_pnorm(3, 2.0, 0.0).unwrap();
        let x = [0.2, -0.5, 0.9];
        let v = h.polar_evaluate(&x).unwrap();
        assert!((v - norm2(&x)).abs() < 1e-10, "{v}");
    }
}
