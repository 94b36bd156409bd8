use approx::assert_relative_eq;
use proptest::prelude::*;
use wulff_robin::radial::{self, first_eigenvalue_radial, RadialProblem, DEFAULT_TOL};
use wulff_robin::AnisotropicNorm;

#[test]
fn neumann_limit_is_zero() {
    let sol = first_eigenvalue_radial(&RadialProblem::new(2, 3.0, 1.0, 0.0).unwrap(), DEFAULT_TOL).unwrap();
    assert!(sol.lambda.abs() < 1e-10);
}

#[test]
fn small_beta_asymptotics() {
    // λ ≈ β |∂B| / |B| = nβ/R for β → 0 (constant test function, any p).
    for (n, p) in [(2, 2.0), (3, 3.0), (2, 1.5)] {
        let beta = 1e-6;
        let sol = first_eigenvalue_radial(&RadialProblem::new(n, p, 2.0, beta).unwrap(), DEFAULT_TOL).unwrap();
        assert_relative_eq!(sol.lambda, n as f64 * beta / 2.0, max_relative = 1e-3);
    }
}

#[test]
fn profile_is_positive_and_decreasing() {
    let sol = first_eigenvalue_radial(&RadialProblem::new(3, 2.5, 1.0, 2.0).unwrap(), DEFAULT_TOL).unwrap();
    assert!(sol.rho.iter().all(|&v| v > 0.0));
    assert!(sol.rho.windows(2).all(|w| w[1] <= w[0]));
    assert!(sol.beta_profile_nondecreasing());
    assert_relative_eq!(sol.beta_at(1.0), 2.0, max_relative = 1e-8);
}

#[test]
fn wulff_eigenvalue_does_not_depend_on_the_norm() {
    let prob = RadialProblem::new(2, 2.5, 1.0, 1.0).unwrap();
    let a = radial::lambda_of_wulff(&AnisotropicNorm::euclidean(2).unwrap(), &prob, DEFAULT_TOL).unwrap();
    let b = radial::lambda_of_wulff(&AnisotropicNorm::quadratic2([4.0, 0.0, 0.0, 1.0]).unwrap(), &prob, DEFAULT_TOL)
        .unwrap();
    assert_eq!(a, b);
    assert!(radial::lambda_of_wulff(&AnisotropicNorm::euclidean(3).unwrap(), &prob, DEFAULT_TOL).is_err());
}

#[test]
fn rejects_invalid_problems() {
    assert!(RadialProblem::new(1, 2.0, 1.0, 1.0).is_err());
    assert!(RadialProblem::new(2, 1.0, 1.0, 1.0).is_err());
    assert!(RadialProblem::new(2, 2.0, 0.0, 1.0).is_err());
    assert!(RadialProblem::new(2, 2.0, 1.0, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_law_holds(t in 0.3..3.0f64, p in 1.3..4.0f64, beta in 0.1..5.0f64) {
        let s = radial::verify_scaling(&RadialProblem::new(2, p, 1.0, beta).unwrap(), t, DEFAULT_TOL).unwrap();
        prop_assert!(s.residual <= 1e-7, "{:?}", s);
    }

    #[test]
    fn monotone_in_beta(p in 1.3..4.0f64, b in 0.1..5.0f64) {
        let l1 = first_eigenvalue_radial(&RadialProblem::new(2, p, 1.0, b).unwrap(), DEFAULT_TOL).unwrap().lambda;
        let l2 = first_eigenvalue_radial(&RadialProblem::new(2, p, 1.0, 1.5 * b).unwrap(), DEFAULT_TOL).unwrap().lambda;
        prop_assert!(l2 > l1);
    }
}
