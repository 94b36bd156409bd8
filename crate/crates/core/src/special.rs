//! Bessel functions by power series, for the p = 2 radial oracle.
//!
//! For `p = 2` the radial profile on a ball in ℝⁿ is
//! `ρ(r) = Λ_ν(√λ r)` with `ν = n/2 − 1` and the normalized Bessel function
//! `Λ_ν(z) = Γ(ν+1) (2/z)^ν J_ν(z)`, so `Λ_ν(0) = 1`. Nothing here shares
//! code with the shooting integrator; the two are meant to cross-check.

/// `Λ_ν(z) = Σ_k (−z²/4)^k / (k! (ν+1)_k)`.
///
/// Accurate to roughly 1e-11 relative for `|z| ≤ 12`.
pub fn normalized_bessel(nu: f64, z: f64) -> f64 {
    let x = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= x / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    sum
}

/// `J_ν(z)` for `z ≥ 0` and `ν ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    (z / 2.0).powf(nu) / gamma_pos(nu + 1.0) * normalized_bessel(nu, z)
}

/// `Λ_ν'(z) = −z Λ_{ν+1}(z) / (2(ν+1))`.
pub fn normalized_bessel_derivative(nu: f64, z: f64) -> f64 {
    -z * normalized_bessel(nu + 1.0, z) / (2.0 * (nu + 1.0))
}

/// Gamma function for integer and half-integer arguments > 0, by recursion
/// from Γ(1) = 1 and Γ(1/2) = √π.
fn gamma_pos(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && x > 0.0, "gamma_pos supports positive integers and half-integers only");
    let (mut g, mut a) = if twice as i64 % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while a < x - 0.25 {
        g *= a;
        a += 1.0;
    }
    g
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of `J_ν`, by scanning then bisection.
pub fn first_bessel_zero(nu: f64) -> f64 {
    let step = 0.05;
    let mut z = step;
    while normalized_bessel(nu, z + step) > 0.0 {
        z += step;
    }
    bisect(|x| normalized_bessel(nu, x), z, z + step)
}

/// Robin characteristic function of the unit-normalized radial profile:
/// `β ρ(R) + ρ'(R)` with `ρ(r) = Λ_ν(√λ r)`, `ν = n/2 − 1`.
///
/// Positive at `λ = 0` and vanishing at the first Robin eigenvalue.
pub fn robin_characteristic(n: usize, radius: f64, beta: f64, lambda: f64) -> f64 {
    let nu = n as f64 / 2.0 - 1.0;
    let k = lambda.sqrt();
    let z = k * radius;
    beta * normalized_bessel(nu, z) + k * normalized_bessel_derivative(nu, z)
}

/// First eigenvalue of the p = 2 Robin Laplacian on the ball of radius
/// `radius` in ℝⁿ: the smallest root of [`robin_characteristic`], which
/// lies below the Dirichlet value `(j_{ν,1}/R)²`.
pub fn robin_ball_eigenvalue(n: usize, radius: f64, beta: f64) -> f64 {
    let nu = n as f64 / 2.0 - 1.0;
    let dirichlet = (first_bessel_zero(nu) / radius).powi(2);
    bisect(|l| robin_characteristic(n, radius, beta, l), 0.0, dirichlet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables.
        assert!((bessel_j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1.0, 2.5) - 0.497_094_102_464_274_4).abs() < 1e-14);
        assert!((first_bessel_zero(0.0) - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((first_bessel_zero(1.0) - 3.831_705_970_207_512).abs() < 1e-12);
    }

    #[test]
    fn half_integer_orders_are_spherical_bessel() {
        // Λ_{1/2}(z) = sin z / z.
        for z in [0.1, 1.0, 2.7] {
            assert!((normalized_bessel(0.5, z) - z.sin() / z).abs() < 1e-14);
        }
        assert!((first_bessel_zero(0.5) - std::f64::consts::PI).abs() < 1e-12);
        assert!((bessel_j(0.5, 1.3) - (2.0 / (std::f64::consts::PI * 1.3)).sqrt() * 1.3f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for nu in [0.0, 0.5] {
            let z = 1.7;
            let h = 1e-6;
            let fd = (normalized_bessel(nu, z + h) - normalized_bessel(nu, z - h)) / (2.0 * h);
            assert!((normalized_bessel_derivative(nu, z) - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn robin_root_limits() {
        // Small β: λ ≈ nβ/R.
        let l = robin_ball_eigenvalue(2, 1.0, 1e-4);
        assert!((l - 2e-4).abs() < 1e-7);
        // Large β: Dirichlet limit j₀₁².
        let l = robin_ball_eigenvalue(2, 1.0, 1e8);
        assert!((l - 2.404_825_557_695_773f64.powi(2)).abs() < 1e-6);
    }
}
