use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wulff-robin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

// Smallest root of x J1(x) = J0(x) on (0, j_{0,1}) via power series and bisection.
fn bessel_oracle_lambda() -> f64 {
    fn j(nu: i32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(nu) / (1..=nu).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * (k as f64 + nu as f64));
            sum += term;
        }
        sum
    }
    let f = |x: f64| x * j(1, x) - j(0, x);
    let (mut a, mut b) = (0.1, 2.4);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let x = 0.5 * (a + b);
    x * x
}

#[test]
fn radial_row_matches_bessel() {
    let o = run(&["radial", "--n", "2", "--p", "2", "--R", "1", "--beta", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0], ["n", "p", "R", "beta", "lambda", "bc_residual"]);
    let lambda: f64 = r[1][4].parse().unwrap();
    let oracle = bessel_oracle_lambda();
    assert!((lambda - oracle).abs() < 1e-8 * oracle, "{lambda} vs {oracle}");
}

#[test]
fn radial_sweep_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("profile.csv");
    let o = run(&["radial", "--sweep", "beta=0.1:10:log10", "--points", "4", "--profile", prof.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 5);
    let lambdas: Vec<f64> = r[1..].iter().map(|row| row[4].parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
    let text = std::fs::read_to_string(&prof).unwrap();
    assert_eq!(text.lines().next().unwrap(), "r,rho,rho_prime,beta_r");
    assert!(text.lines().count() > 10);
}

#[test]
fn check_norms_exits_zero() {
    let o = run(&["check", "--suite", "norms"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["suite", "name", "value", "limit", "passed"]);
    assert!(r[1..].iter().all(|row| row.last().unwrap() == "true"));
}

#[test]
fn malformed_norm_exits_one_with_schema() {
    let o = run(&["solve", "--norm", "quadratic:1,2"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("Norm specs"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn malformed_domain_exits_one_with_schema() {
    let o = run(&["faber-krahn", "--domain", "blob"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Domain specs"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["radial", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "subcommand = \"radial\"\nbetta = 2\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("betta"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_and_config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "subcommand = \"radial\"\np = 3\nbeta = 0.5\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "radial", "--beta", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[1][1], "3.0");
    assert_eq!(r[1][3], "2.0");
    assert_eq!(std::fs::read_to_string(out.join("radial.csv")).unwrap(), stdout(&o));
    let echoed = std::fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(echoed.contains("beta = 2.0") && echoed.contains("p = 3.0"), "{echoed}");

    // Re-running the echoed config reproduces the CSV byte for byte.
    let again = run(&["--config", out.join("effective_config.toml").to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn solve_is_deterministic_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let args = |tag: &str| {
        vec![
            "solve".to_string(),
            "--domain".into(),
            "square".into(),
            "--h".into(),
            "0.1".into(),
            "--p".into(),
            "3".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            dir.path().join(tag).to_str().unwrap().to_string(),
            "--mesh-out".into(),
            "mesh.txt".into(),
            "--u-out".into(),
            "u.csv".into(),
        ]
    };
    let a = bin().args(args("a")).output().unwrap();
    let b = bin().args(args("b")).output().unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    for f in ["mesh.txt", "u.csv", "solve.csv"] {
        let fa = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let fb = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(fa, fb, "{f}");
    }
    let u = std::fs::read_to_string(dir.path().join("a/u.csv")).unwrap();
    assert_eq!(u.lines().next().unwrap(), "node,x,y,u");
    assert!(u.lines().skip(1).all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() > 0.0));
}

#[test]
fn faber_krahn_row_and_sweep() {
    let o = run(&["faber-krahn", "--domain", "rect:2,0.5", "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "domain,norm,p,beta,h,lambda,lambda_wulff,ratio,verdict");
    assert!(text.contains("holds"));

    let o = run(&["sweep", "--ratios", "1,4", "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][0], "aspect_ratio");
}

#[test]
fn missing_domain_file_is_an_input_error() {
    let o = run(&["solve", "--domain", &format!("file:{}", Path::new("/nonexistent/d.txt").display())]);
    assert_eq!(o.status.code(), Some(1));
}
