//! Acceptance matrix. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails. Expected values come from the oracles
//! below, written independently of the library.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wulff_robin::analysis::{self, HardyWeights};
use wulff_robin::fem::{self, assemble_quadratic, generate_mesh, Init, SolveOptions};
use wulff_robin::geometry::Domain;
use wulff_robin::radial::{self, first_eigenvalue_radial, RadialProblem, DEFAULT_TOL};
use wulff_robin::{AnisotropicNorm, Mesh};

type Outcome = Result<String, String>;

mod oracle {
    use std::f64::consts::PI;

    /// `J_ν(x)` for integer `ν` from the power series; accurate for `x < 10`.
    pub fn bessel_j(nu: u32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(nu as i32);
        for k in 1..=nu {
            term /= k as f64;
        }
        let mut sum = term;
        for k in 1..80 {
            term *= -(x * x / 4.0) / (k as f64 * (k + nu) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa0 = f(a);
        assert!(fa0 * f(b) < 0.0, "oracle bracket does not change sign");
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == (fa0 > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    pub fn j01() -> f64 {
        bisect(|x| bessel_j(0, x), 2.0, 3.0)
    }

    /// First Robin eigenvalue of the Laplacian on the Euclidean ball of
    /// radius `r` in dimension 2 or 3. With `u = r^{−ν} J_ν(kr)` the
    /// boundary condition reads `k J_{ν+1}(kR) = β J_ν(kR)`; for `n = 3`
    /// the half-integer Bessel functions are written with sin and cos.
    pub fn robin_ball(n: usize, r: f64, beta: f64) -> f64 {
        let x = match n {
            2 => bisect(|x| x * bessel_j(1, x) - beta * r * bessel_j(0, x), 1e-9, j01() - 1e-12),
            3 => bisect(|x| (x.sin() / x - x.cos()) - beta * r * x.sin() / x, 1e-6, PI - 1e-12),
            _ => unreachable!(),
        };
        (x / r).powi(2)
    }

    /// Anisotropic inradius of a convex polygon `{n_i·x ≤ b_i}`. The
    /// distance to the line of edge `i` is `(b_i − n_i·x)/H(n_i)`, so the
    /// inradius is the linear program max r s.t. `n_i·x + r H(n_i) ≤ b_i`,
    /// solved exactly by enumerating vertices (triples of active rows).
    pub fn inradius(vertices: &[[f64; 2]], h: impl Fn([f64; 2]) -> f64) -> f64 {
        let m = vertices.len();
        let mut rows = Vec::new();
        for i in 0..m {
            let (a, b) = (vertices[i], vertices[(i + 1) % m]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let nrm = [(b[1] - a[1]) / len, (a[0] - b[0]) / len];
            rows.push([nrm[0], nrm[1], h(nrm), nrm[0] * a[0] + nrm[1] * a[1]]);
        }
        let det3 = |c: [[f64; 3]; 3]| {
            c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
        };
        let mut best = 0.0f64;
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let sel = [rows[i], rows[j], rows[k]];
                    let a = sel.map(|r| [r[0], r[1], r[2]]);
                    let d = det3(a);
                    if d.abs() < 1e-12 {
                        continue;
                    }
                    // Cramer's rule for the r component.
                    let ar = sel.map(|r| [r[0], r[1], r[3]]);
                    let ax = sel.map(|r| [r[3], r[1], r[2]]);
                    let ay = sel.map(|r| [r[0], r[3], r[2]]);
                    let (x, y, r) = (det3(ax) / d, det3(ay) / d, det3(ar) / d);
                    if rows.iter().all(|q| q[0] * x + q[1] * y + r * q[2] <= q[3] + 1e-12) {
                        best = best.max(r);
                    }
                }
            }
        }
        best
    }

    pub fn inradius_bound(p: f64, beta: f64, r: f64) -> f64 {
        ((p - 1.0) / p).powf(p) * beta / (r * (1.0 + beta.powf(1.0 / (p - 1.0)) * r).powf(p - 1.0))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn norms() -> Vec<(AnisotropicNorm, [[f64; 2]; 2])> {
    [[4.0, 0.0, 0.0, 1.0], [2.0, 1.0, 1.0, 2.0]]
        .iter()
        .map(|m| (AnisotropicNorm::quadratic2(*m).unwrap(), [[m[0], m[1]], [m[2], m[3]]]))
        .fold(vec![(AnisotropicNorm::euclidean(2).unwrap(), [[1.0, 0.0], [0.0, 1.0]])], |mut v, x| {
            v.push(x);
            v
        })
}

fn quad_norm(a: [[f64; 2]; 2], x: [f64; 2]) -> f64 {
    (a[0][0] * x[0] * x[0] + (a[0][1] + a[1][0]) * x[0] * x[1] + a[1][1] * x[1] * x[1]).sqrt()
}

fn inverse(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2, 3] {
        for r in [0.5, 1.0, 2.0] {
            for beta in [0.1, 1.0, 10.0] {
                let sol = first_eigenvalue_radial(&RadialProblem::new(n, 2.0, r, beta).unwrap(), DEFAULT_TOL)
                    .map_err(|e| e.to_string())?;
                worst = worst.max(rel(sol.lambda, oracle::robin_ball(n, r, beta)));
            }
        }
    }
    check(worst <= 1e-8, format!("18 cases, worst relative error {worst:.2e} (limit 1e-8)"))
}

fn criterion_2() -> Outcome {
    let sol = first_eigenvalue_radial(&RadialProblem::new(2, 2.0, 1.0, 1e6).unwrap(), DEFAULT_TOL)
        .map_err(|e| e.to_string())?;
    let target = oracle::j01().powi(2);
    let gap = (sol.lambda - target).abs();
    check(gap <= 1e-3, format!("lambda {:.8} vs j01^2 {target:.8}, gap {gap:.2e} (limit 1e-3)", sol.lambda))
}

fn criterion_3() -> Outcome {
    let aniso = AnisotropicNorm::quadratic2([4.0, 0.0, 0.0, 1.0]).unwrap();
    let e = AnisotropicNorm::euclidean(2).unwrap();
    // Wulff shape of diag(4,1) at R = 1: the ellipse x²/4 + y² < 1.
    let wulff = Domain::ellipse(2.0, 1.0, 512).map_err(|e| e.to_string())?;
    let disk = Domain::ellipse(1.0, 1.0, 512).map_err(|e| e.to_string())?;
    let opts = SolveOptions::default();
    let lw = fem::solve_first(&generate_mesh(&wulff, 0.02).map_err(|e| e.to_string())?, &aniso, 2.0, 1.0, &opts)
        .map_err(|e| e.to_string())?
        .lambda;
    let ld = fem::solve_first(&generate_mesh(&disk, 0.02).map_err(|e| e.to_string())?, &e, 2.0, 1.0, &opts)
        .map_err(|e| e.to_string())?
        .lambda;
    let lr = first_eigenvalue_radial(&RadialProblem::new(2, 2.0, 1.0, 1.0).unwrap(), DEFAULT_TOL)
        .map_err(|e| e.to_string())?
        .lambda;
    let worst = rel(lw, ld).max(rel(lw, lr)).max(rel(ld, lr));
    check(
        worst <= 2e-3,
        format!("wulff {lw:.6}, disk {ld:.6}, radial {lr:.6}; worst pairwise gap {worst:.2e} (limit 2e-3)"),
    )
}

fn criterion_4() -> Outcome {
    let domains = [
        ("square", Domain::unit_square()),
        ("rect 2:1", Domain::rect(2.0, 1.0).unwrap()),
        ("rect 4:1", Domain::rect(4.0, 1.0).unwrap()),
        ("triangle", Domain::equilateral_triangle(1.0).unwrap()),
    ];
    let mut min_ratio = f64::INFINITY;
    let mut worst_oracle = 0.0f64;
    for (h, a) in norms() {
        for (_, d) in &domains {
            let rep =
                analysis::faber_krahn(d, &h, 2.0, 1.0, 0.02, &SolveOptions::default()).map_err(|e| e.to_string())?;
            // |W_R| = π sqrt(det A) R², and λ(W_R) is the disk eigenvalue.
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let r = (d.area() / (PI * det.sqrt())).sqrt();
            let lw = oracle::robin_ball(2, r, 1.0);
            worst_oracle = worst_oracle.max(rel(rep.lambda_wulff, lw));
            min_ratio = min_ratio.min(rep.lambda_domain / lw);
        }
    }
    check(
        min_ratio > 1.0 + 5e-3 && worst_oracle <= 1e-6,
        format!(
            "12 cases, smallest ratio {min_ratio:.5} (limit > 1.005); Wulff eigenvalue vs oracle {worst_oracle:.1e}"
        ),
    )
}

fn max_abs(m: &nalgebra_sparse::CscMatrix<f64>) -> f64 {
    m.values().iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn scaled_gap(a: &nalgebra_sparse::CscMatrix<f64>, b: &nalgebra_sparse::CscMatrix<f64>, s: f64) -> f64 {
    let diff = a - &(b * s);
    max_abs(&diff) / max_abs(a)
}

fn criterion_5() -> Outcome {
    let mut radial_worst = 0.0f64;
    for (t, p, n) in [(2.0, 2.0, 2), (0.5, 2.0, 3), (1.7, 1.5, 2), (0.6, 3.0, 2), (3.0, 3.0, 3), (0.8, 1.5, 3)] {
        let s = radial::verify_scaling(&RadialProblem::new(n, p, 1.0, 1.0).unwrap(), t, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        radial_worst = radial_worst.max(s.residual);
    }
    let (h, a) = norms().remove(2);
    let mesh = generate_mesh(&Domain::equilateral_triangle(1.0).unwrap(), 0.05).map_err(|e| e.to_string())?;
    let t = 1.7;
    let big = mesh.dilate(t).map_err(|e| e.to_string())?;
    let m0 = assemble_quadratic(&mesh, a, &h).map_err(|e| e.to_string())?;
    let m1 = assemble_quadratic(&big, a, &h).map_err(|e| e.to_string())?;
    // In the plane K is scale invariant, B scales by t and M by t².
    let matrix_gap = scaled_gap(&m1.stiffness, &m0.stiffness, 1.0)
        .max(scaled_gap(&m1.boundary, &m0.boundary, t))
        .max(scaled_gap(&m1.mass, &m0.mass, t * t));
    let beta = 0.7;
    let l_big = fem::solve_p2_quadratic(&big, &h, beta, 1e-14).map_err(|e| e.to_string())?.lambda;
    let l_small = fem::solve_p2_quadratic(&mesh, &h, t * beta, 1e-14).map_err(|e| e.to_string())?.lambda;
    let eig_gap = rel(l_big, l_small / (t * t));
    check(
        radial_worst <= 1e-7 && matrix_gap <= 1e-10 && eig_gap <= 1e-10,
        format!("radial worst {radial_worst:.1e} (limit 1e-7); FEM matrices {matrix_gap:.1e}, eigenvalue {eig_gap:.1e} (limit 1e-10)"),
    )
}

fn criterion_6() -> Outcome {
    let radii = [0.5, 1.0, 2.0, 4.0];
    let beta = 1.0;
    let mut worst_end = 0.0f64;
    let mut all = true;
    for p in [1.5, 2.0, 3.0] {
        let mut prev = f64::INFINITY;
        for &r in &radii {
            let sol = first_eigenvalue_radial(&RadialProblem::new(2, p, r, beta).unwrap(), DEFAULT_TOL)
                .map_err(|e| e.to_string())?;
            all &= sol.lambda < prev;
            prev = sol.lambda;
            let b = &sol.beta_profile;
            all &= b.windows(2).all(|w| w[1] >= w[0] - 1e-12);
            worst_end = worst_end.max(b[0].abs()).max((b[b.len() - 1] - beta).abs());
        }
        let e = AnisotropicNorm::euclidean(2).unwrap();
        all &=
            radial::verify_wulff_monotonicity(&e, 2, p, beta, &radii, DEFAULT_TOL).map_err(|e| e.to_string())?.holds();
    }
    check(
        all && worst_end <= 1e-8,
        format!("lambda decreasing and profiles nondecreasing: {all}; worst endpoint gap {worst_end:.1e} (limit 1e-8)"),
    )
}

fn criterion_7() -> Outcome {
    let e = AnisotropicNorm::euclidean(2).unwrap();
    let levels = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let disk = Domain::ellipse(1.0, 1.0, 512).map_err(|e| e.to_string())?;
    let mesh = generate_mesh(&disk, 0.02).map_err(|e| e.to_string())?;
    let lambda = oracle::robin_ball(2, 1.0, 1.0);
    let k = lambda.sqrt();
    let u: Vec<f64> = mesh.nodes.iter().map(|x| oracle::bessel_j(0, k * x[0].hypot(x[1]))).collect();
    let mut disk_worst = 0.0f64;
    for &t in &levels {
        let (_, f) = analysis::representation_functional(&mesh, &e, 2.0, 1.0, &u, t).map_err(|e| e.to_string())?;
        disk_worst = disk_worst.max(rel(f, lambda));
    }
    let sq = generate_mesh(&Domain::unit_square(), 0.02).map_err(|e| e.to_string())?;
    let res = fem::solve_first(&sq, &e, 2.0, 1.0, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let mut sq_worst = 0.0f64;
    for &t in &levels {
        let (_, f) = analysis::representation_functional(&sq, &e, 2.0, 1.0, &res.u, t).map_err(|e| e.to_string())?;
        sq_worst = sq_worst.max(rel(f, res.lambda));
    }
    check(
        disk_worst <= 0.03 && sq_worst <= 0.05,
        format!("Bessel disk spread {disk_worst:.1e} (limit 3e-2); square FEM spread {sq_worst:.1e} (limit 5e-2)"),
    )
}

fn random_field(mesh: &Mesh, rng: &mut ChaCha8Rng, rough: bool) -> Vec<f64> {
    if rough {
        return mesh.nodes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    }
    let modes: Vec<[f64; 4]> = (0..4)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.3)])
        .collect();
    mesh.nodes.iter().map(|x| modes.iter().map(|m| m[0] * (m[1] * x[0] + m[2] * x[1] + m[3]).cos()).sum()).collect()
}

fn criterion_8() -> Outcome {
    let domains = [
        Domain::unit_square(),
        Domain::rect(2.0, 1.0).unwrap(),
        Domain::rect(4.0, 1.0).unwrap(),
        Domain::equilateral_triangle(1.0).unwrap(),
        Domain::regular(6, 1.0).unwrap(),
    ];
    let (p, beta) = (2.0, 1.0);
    let mut min_slack = f64::INFINITY;
    let mut max_upper_gap = f64::NEG_INFINITY;
    let mut inradius_gap = 0.0f64;
    for (h, a) in norms() {
        for d in &domains {
            let mesh = generate_mesh(d, 0.05).map_err(|e| e.to_string())?;
            let lambda =
                fem::solve_first(&mesh, &h, p, beta, &SolveOptions::default()).map_err(|e| e.to_string())?.lambda;
            let r = oracle::inradius(d.vertices(), |n| quad_norm(a, n));
            let lib = analysis::inradius_bound(d, &h, p, beta, lambda).map_err(|e| e.to_string())?;
            inradius_gap = inradius_gap.max(rel(lib.inradius, r));
            min_slack = min_slack.min(lambda - oracle::inradius_bound(p, beta, r));
            // Constant test function: λ ≤ β σ_H(∂Ω) / |Ω| with σ_H = Σ |e| H(ν_e).
            let sigma: f64 = d.edges().map(|e| e.length * quad_norm(a, e.normal)).sum();
            max_upper_gap = max_upper_gap.max(lambda - beta * sigma / d.area());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hardy_ok = 0;
    let mut hardy_min = f64::INFINITY;
    let cases = [(Domain::unit_square(), 0usize), (Domain::equilateral_triangle(1.0).unwrap(), 1)];
    for (d, ni) in &cases {
        let (h, _) = norms().remove(*ni);
        let mesh = generate_mesh(d, 0.05).map_err(|e| e.to_string())?;
        let weights = HardyWeights::new(d, &mesh, &h).map_err(|e| e.to_string())?;
        for k in 0..10 {
            let u = random_field(&mesh, &mut rng, k % 4 == 0);
            let p = [1.5, 2.0, 3.0][k % 3];
            let alpha = rng.gen_range(0.05..1.0);
            let theta = rng.gen_range(0.1..0.95 / alpha);
            let hc = analysis::hardy_check(&mesh, &weights, &h, p, &u, alpha, theta).map_err(|e| e.to_string())?;
            hardy_ok += usize::from(hc.holds);
            hardy_min = hardy_min.min((hc.lhs - hc.rhs) / hc.lhs);
        }
    }
    check(
        min_slack >= 0.0 && max_upper_gap <= 1e-9 && hardy_ok == 20 && inradius_gap <= 1e-3,
        format!(
            "15 cases: min inradius slack {min_slack:.3}, max lambda - upper bound {max_upper_gap:.3}, inradius vs oracle {inradius_gap:.1e}; Hardy {hardy_ok}/20 (min relative margin {hardy_min:.3})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_sign = f64::INFINITY;
    let sq = generate_mesh(&Domain::unit_square(), 0.05).map_err(|e| e.to_string())?;
    let tri = generate_mesh(&Domain::equilateral_triangle(1.0).unwrap(), 0.05).map_err(|e| e.to_string())?;
    for (mesh, ni, p) in [(&sq, 0usize, 3.0), (&tri, 1, 1.5), (&sq, 2, 2.5)] {
        let (h, _) = norms().remove(ni);
        let mut lambdas = Vec::new();
        for seed in [11, 12] {
            let opts = SolveOptions { init: Init::Random(seed), ..SolveOptions::default() };
            let r = fem::minimize_rayleigh(mesh, &h, p, 1.0, &opts).map_err(|e| e.to_string())?;
            if !r.converged {
                return Err(format!("descent did not converge (p = {p}, seed {seed})"));
            }
            worst_sign = worst_sign.min(r.min_relative_value());
            lambdas.push(r.lambda);
        }
        worst_gap = worst_gap.max(rel(lambdas[0], lambdas[1]));
    }
    check(
        worst_gap <= 1e-6 && worst_sign >= -1e-10,
        format!("3 problems, worst seed gap {worst_gap:.1e} (limit 1e-6); min u/max u {worst_sign:.2e} (limit -1e-10)"),
    )
}

fn fd_gradient_error(h: &AnisotropicNorm, rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let g = h.gradient(&xi).unwrap();
        let step = 1e-6 * xi[0].hypot(xi[1]);
        for i in 0..2 {
            let (mut a, mut b) = (xi, xi);
            a[i] += step;
            b[i] -= step;
            let fd = (h.evaluate(&a).unwrap() - h.evaluate(&b).unwrap()) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / g[0].hypot(g[1]));
        }
    }
    worst
}

type ClosedForm = Box<dyn Fn([f64; 2]) -> f64>;

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut families: Vec<(AnisotropicNorm, ClosedForm, ClosedForm)> = Vec::new();
    for (h, a) in norms() {
        let ai = inverse(a);
        families.push((h, Box::new(move |x| quad_norm(a, x)), Box::new(move |x| quad_norm(ai, x))));
    }
    // ℓ4 and its dual ℓ_{4/3}.
    families.push((
        AnisotropicNorm::smoothed_pnorm(2, 4.0, 0.0).unwrap(),
        Box::new(|x: [f64; 2]| (x[0].powi(4) + x[1].powi(4)).powf(0.25)),
        Box::new(|x: [f64; 2]| (x[0].abs().powf(4.0 / 3.0) + x[1].abs().powf(4.0 / 3.0)).powf(0.75)),
    ));
    let mut worst_identity = 0.0f64;
    let mut worst_closed = 0.0f64;
    let mut worst_fd = 0.0f64;
    for (h, h_exact, polar_exact) in &families {
        let rep = h.verify_identities(1000, 5, 2.0).map_err(|e| e.to_string())?;
        let limit = if h.has_closed_form_polar() { 1e-8 } else { 1e-6 };
        worst_identity = worst_identity.max(rep.max_residual() / limit);
        for _ in 0..200 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            worst_closed = worst_closed.max(rel(h.evaluate(&x).unwrap(), h_exact(x)));
            worst_closed = worst_closed.max(rel(h.polar_evaluate(&x).unwrap(), polar_exact(x)));
        }
        worst_fd = worst_fd.max(fd_gradient_error(h, &mut rng));
    }
    check(
        worst_identity <= 1.0 && worst_closed <= 1e-6 && worst_fd <= 1e-5,
        format!(
            "4 norms: identity residual / limit {worst_identity:.2}, H and polar vs closed forms {worst_closed:.1e}, gradient vs finite differences {worst_fd:.1e} (limit 1e-5)"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    // Respect `cargo test -- --list` and filters gracefully.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [Criterion; 10] = [
        ("radial vs Bessel", criterion_1, Duration::from_secs(5)),
        ("Dirichlet limit", criterion_2, Duration::from_secs(1)),
        ("Wulff ellipse = disk = radial", criterion_3, Duration::from_secs(60)),
        ("Faber-Krahn matrix", criterion_4, Duration::from_secs(600)),
        ("scaling law", criterion_5, Duration::from_secs(30)),
        ("Wulff monotonicity", criterion_6, Duration::from_secs(10)),
        ("representation formula", criterion_7, Duration::from_secs(60)),
        ("inradius, upper and Hardy bounds", criterion_8, Duration::from_secs(60)),
        ("simplicity and positivity", criterion_9, Duration::from_secs(120)),
        ("norm identities", criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<34} {}  {detail}; {:.2} s (budget {} s{})",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
