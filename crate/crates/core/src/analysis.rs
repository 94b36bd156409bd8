//! Comparisons between a domain and the Wulff shape of the same area.
//!
//! Level sets `U_t = {ũ > t}` of the max-normalized eigenfunction `ũ` split
//! into the interior level curve `S_t` and the wet boundary
//! `Γ_t = ∂Ω ∩ {ũ > t}`. For a nonnegative weight `φ` the functional
//!
//! `𝓕(U_t, φ) = (−(p−1) ∫_{U_t} φ^{p′} + ∫_{S_t} φ H(ν) + β ∫_{Γ_t} H(ν)) / |U_t|`
//!
//! equals `λ₁` for every `t` when `φ = H(∇ũ)^{p−1} / ũ^{p−1}`.

use std::collections::HashMap;

use serde::Serialize;

use crate::fem::{
    self, constant_upper_bound, element_gradient, elements, generate_mesh, EigenResult, Mesh, SolveOptions, EDGE_RULE,
    TRI_RULE,
};
use crate::geometry::{self, kappa, Domain};
use crate::norms::AnisotropicNorm;
use crate::radial::{first_eigenvalue_radial, RadialProblem, RadialSolution, DEFAULT_TOL};
use crate::{Error, Point, Result};

/// Integrals over one level set of the max-normalized field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelSetSlice {
    /// Level actually used, after nudging off nodal values.
    pub t: f64,
    pub area_ut: f64,
    /// `∫_{S_t} H(ν)`.
    pub sigma_st: f64,
    /// `∫_{Γ_t} H(ν)`.
    pub sigma_gt: f64,
    /// `∫_{S_t} φ H(ν)`.
    pub integral_phi_st: f64,
    /// `∫_{U_t} φ^{p′}`.
    pub integral_phi_pow: f64,
    /// `σ_H(∂U_t)` measured from the boundary of the clipped region
    /// directly, independently of the `S_t`/`Γ_t` split.
    pub sigma_boundary: f64,
}

/// Symmetric 7-point rule on triangles, exact to degree 5: barycentric
/// points and weights summing to 1.
fn seven_point_rule() -> [([f64; 3], f64); 7] {
    let r = 15f64.sqrt();
    let (a, b) = ((6.0 - r) / 21.0, (6.0 + r) / 21.0);
    let (wa, wb) = ((155.0 - r) / 1200.0, (155.0 + r) / 1200.0);
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([a, a, 1.0 - 2.0 * a], wa),
        ([a, 1.0 - 2.0 * a, a], wa),
        ([1.0 - 2.0 * a, a, a], wa),
        ([b, b, 1.0 - 2.0 * b], wb),
        ([b, 1.0 - 2.0 * b, b], wb),
        ([1.0 - 2.0 * b, b, b], wb),
    ]
}

/// Identity of a vertex of a clipped triangle: a mesh node, or the level
/// crossing on the mesh edge between two nodes (smaller index first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum VertexKey {
    Node(usize),
    Cross(usize, usize),
}

#[derive(Clone, Copy, Debug)]
struct ClipVertex {
    key: VertexKey,
    x: Point,
    value: f64,
}

/// Part of triangle `tri` where the P1 field exceeds `t`, as a convex
/// polygon (counter-clockwise, 0, 3 or 4 vertices).
fn clip_triangle(mesh: &Mesh, tri: &[usize; 3], u: &[f64], t: f64) -> Vec<ClipVertex> {
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let (i, j) = (tri[k], tri[(k + 1) % 3]);
        let (vi, vj) = (u[i], u[j]);
        if vi > t {
            out.push(ClipVertex { key: VertexKey::Node(i), x: mesh.nodes[i], value: vi });
        }
        if (vi > t) != (vj > t) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            let s = (t - u[a]) / (u[b] - u[a]);
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            out.push(ClipVertex {
                key: VertexKey::Cross(a, b),
                x: [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])],
                value: t,
            });
        }
    }
    out
}

fn area2(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// `∫ f(value)` over a clipped polygon, fan-triangulated, 7-point rule.
fn integrate_piece<F: Fn(f64) -> f64>(poly: &[ClipVertex], f: F) -> f64 {
    let rule = seven_point_rule();
    let mut acc = 0.0;
    for k in 1..poly.len().saturating_sub(1) {
        let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
        let area = area2(a.x, b.x, c.x);
        for (bary, w) in &rule {
            let v = bary[0] * a.value + bary[1] * b.value + bary[2] * c.value;
            acc += area * w * f(v);
        }
    }
    acc
}

fn polygon_area(poly: &[ClipVertex]) -> f64 {
    (1..poly.len().saturating_sub(1)).map(|k| area2(poly[0].x, poly[k].x, poly[k + 1].x)).sum()
}

/// `ũ = u / max u`, rejecting fields without a positive maximum.
fn max_normalized(u: &[f64]) -> Result<Vec<f64>> {
    let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::input("field needs a positive finite maximum"));
    }
    Ok(u.iter().map(|v| v / max).collect())
}

/// Moves `t` off nodal values by steps of 1e-12.
fn nudge_level(u: &[f64], t: f64) -> f64 {
    let mut t = t;
    while u.iter().any(|v| (v - t).abs() < 1e-12) {
        t += 1e-12;
    }
    t
}

fn check_inputs(mesh: &Mesh, h: &AnisotropicNorm, p: f64, beta: f64, u: &[f64], t: f64) -> Result<()> {
    if h.dim() != 2 {
        return Err(Error::Unsupported("level-set analysis is planar".into()));
    }
    if !(p > 1.0) || !(beta >= 0.0) {
        return Err(Error::input(format!("need p > 1 and β >= 0, got p = {p}, β = {beta}")));
    }
    if u.len() != mesh.node_count() {
        return Err(Error::input("field length does not match the mesh"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::input(format!("level t must lie in (0, 1), got {t}")));
    }
    Ok(())
}

/// Walks the clipped triangles of `{ũ > t}` and accumulates the slice
/// geometry; `weight(ũ)` is integrated over `U_t`.
fn slice_with<W: Fn(f64, f64) -> f64>(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    ut: &[f64],
    t: f64,
    weight: W,
) -> Result<LevelSetSlice> {
    let mut s = LevelSetSlice {
        t,
        area_ut: 0.0,
        sigma_st: 0.0,
        sigma_gt: 0.0,
        integral_phi_st: 0.0,
        integral_phi_pow: 0.0,
        sigma_boundary: 0.0,
    };
    let mut edge_count: HashMap<(VertexKey, VertexKey), (usize, f64)> = HashMap::new();
    for (e, tri) in elements(mesh).iter().zip(&mesh.triangles) {
        let poly = clip_triangle(mesh, tri, ut, t);
        if poly.len() < 3 {
            continue;
        }
        let g = element_gradient(e, tri, ut);
        let hg = h.h2(g);
        s.area_ut += polygon_area(&poly);
        s.integral_phi_pow += integrate_piece(&poly, |v| weight(v, hg));
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            let d = [b.x[0] - a.x[0], b.x[1] - a.x[1]];
            let len = d[0].hypot(d[1]);
            if len == 0.0 {
                continue;
            }
            let outward = h.h2([d[1] / len, -d[0] / len]) * len;
            let key = if a.key < b.key { (a.key, b.key) } else { (b.key, a.key) };
            let entry = edge_count.entry(key).or_insert((0, outward));
            entry.0 += 1;
            if let (VertexKey::Cross(..), VertexKey::Cross(..)) = (a.key, b.key) {
                // Level segment; ν = −∇ũ/|∇ũ| points out of U_t.
                let gn = g[0].hypot(g[1]);
                let h_nu = h.h2([-g[0] / gn, -g[1] / gn]);
                s.sigma_st += len * h_nu;
                s.integral_phi_st += len * h_nu * (hg / t).powf(p - 1.0);
            }
        }
    }
    s.sigma_boundary = edge_count.values().filter(|(c, _)| *c == 1).map(|(_, w)| w).sum();
    for edge in &mesh.boundary_edges {
        let (ua, ub) = (ut[edge.a], ut[edge.b]);
        let wet = match (ua > t, ub > t) {
            (true, true) => 1.0,
            (false, false) => 0.0,
            (true, false) => (ua - t) / (ua - ub),
            (false, true) => (ub - t) / (ub - ua),
        };
        s.sigma_gt += wet * edge.length * h.h2(edge.normal);
    }
    if !(s.area_ut > 0.0) {
        return Err(Error::input(format!("level set {{u > {t}}} is empty")));
    }
    Ok(s)
}

fn functional_value(p: f64, beta: f64, s: &LevelSetSlice) -> f64 {
    (-(p - 1.0) * s.integral_phi_pow + s.integral_phi_st + beta * s.sigma_gt) / s.area_ut
}

/// `𝓕(U_t, φ)` with `φ = H(∇ũ)^{p−1}/ũ^{p−1}` for the field `u`, after
/// rescaling to `max ũ = 1`. Returns the slice and the functional value.
pub fn representation_functional(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    u: &[f64],
    t: f64,
) -> Result<(LevelSetSlice, f64)> {
    check_inputs(mesh, h, p, beta, u, t)?;
    let ut = max_normalized(u)?;
    let t = nudge_level(&ut, t);
    // φ^{p′} = H(∇ũ)^p / ũ^p.
    let s = slice_with(mesh, h, p, &ut, t, |v, hg| (hg / v).powf(p))?;
    Ok((s, functional_value(p, beta, &s)))
}

/// Area of `{ũ > s}` for a P1 field, tabulated on a uniform grid in `s`.
struct DistributionFunction {
    values: Vec<f64>,
}

impl DistributionFunction {
    const LEVELS: usize = 4096;

    fn new(mesh: &Mesh, ut: &[f64]) -> Self {
        let mut values = vec![0.0; Self::LEVELS + 1];
        for t in 0..mesh.triangles.len() {
            let tri = mesh.triangles[t];
            let area = mesh.triangle_area(t);
            let mut v = [ut[tri[0]], ut[tri[1]], ut[tri[2]]];
            v.sort_by(f64::total_cmp);
            for (k, slot) in values.iter_mut().enumerate() {
                *slot += area * fraction_above(v, k as f64 / Self::LEVELS as f64);
            }
        }
        Self { values }
    }

    fn at(&self, s: f64) -> f64 {
        let x = s.clamp(0.0, 1.0) * Self::LEVELS as f64;
        let k = (x.floor() as usize).min(Self::LEVELS - 1);
        let w = x - k as f64;
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }
}

/// Fraction of a triangle where a linear function with sorted nodal values
/// `v` exceeds `s`.
fn fraction_above(v: [f64; 3], s: f64) -> f64 {
    let [a, b, c] = v;
    if s <= a {
        1.0
    } else if s >= c {
        0.0
    } else if s >= b {
        (c - s).powi(2) / ((c - a) * (c - b))
    } else {
        1.0 - (s - a).powi(2) / ((b - a) * (c - a))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransplantComparison {
    pub slice: LevelSetSlice,
    /// `r(t)` with `|W_{r(t)}| = |U_t|`.
    pub r_t: f64,
    /// `κ r(t)²`.
    pub wulff_area: f64,
    /// `𝓕_Ω(U_t, φ)` with `φ(x) = β_{r(ũ(x))}`.
    pub f_domain: f64,
    /// `𝓕_{W_R}(W_{r(t)}, φ⋆)` with `φ⋆(x) = β_{H°(x)}`.
    pub f_wulff: f64,
}

/// Transplants the radial weight `β_r` of the Wulff shape with the same
/// area onto the level sets of `u`.
///
/// With `φ(x) = β_{r(ũ(x))}` both functionals see the same distribution of
/// `φ`, so the anisotropic isoperimetric inequality gives
/// `f_domain ≥ f_wulff`; the variational characterization gives
/// `f_domain ≤ λ₁(Ω)`. Only `n = 2` is supported.
pub fn transplant_comparison(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    u: &[f64],
    t: f64,
) -> Result<TransplantComparison> {
    check_inputs(mesh, h, p, beta, u, t)?;
    let kap = kappa(h)?;
    let radius = (mesh.area() / kap).sqrt();
    let radial = first_eigenvalue_radial(&RadialProblem::new(2, p, radius, beta)?, DEFAULT_TOL)?;
    transplant_with(mesh, h, p, beta, u, t, kap, &radial)
}

#[allow(clippy::too_many_arguments)]
fn transplant_with(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    u: &[f64],
    t: f64,
    kap: f64,
    radial: &RadialSolution,
) -> Result<TransplantComparison> {
    let ut = max_normalized(u)?;
    let t = nudge_level(&ut, t);
    let dist = DistributionFunction::new(mesh, &ut);
    let r_of = |s: f64| (dist.at(s) / kap).sqrt().min(radial.problem.radius);
    let pp = p / (p - 1.0);
    let mut slice = slice_with(mesh, h, p, &ut, t, |v, _| radial.beta_at(r_of(v)).powf(pp))?;
    let r_t = (slice.area_ut / kap).sqrt();
    let beta_t = radial.beta_at(r_t);
    slice.integral_phi_st = beta_t * slice.sigma_st;
    let f_domain = functional_value(p, beta, &slice);
    // On W_r: ∫ g(H°) = 2κ ∫_0^r g(s) s ds and σ_H(∂W_r) = 2κ r.
    let f_wulff = 2.0 / (r_t * r_t) * (-(p - 1.0) * radial.beta_moment(r_t, pp) + beta_t * r_t);
    Ok(TransplantComparison { slice, r_t, wulff_area: kap * r_t * r_t, f_domain, f_wulff })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Ratio above `1 + ε`.
    HoldsWithMargin,
    /// Ratio within `ε` of 1, as for Wulff shapes.
    Holds,
    /// Ratio below `1 − ε`.
    Violated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::HoldsWithMargin => "holds_with_margin",
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaberKrahnReport {
    pub lambda_domain: f64,
    pub lambda_wulff: f64,
    /// Radius with `|W_R| = |Ω|`.
    pub r_equiv: f64,
    /// `λ_domain / λ_wulff`.
    pub ratio: f64,
    pub mesh_h: f64,
    /// Declared discretization tolerance `ε(h)`.
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// `ε(h) = 2e-3 · max(1, (h/0.02)²)`: P1 eigenvalue errors scale like `h²`.
pub fn mesh_tolerance(h: f64) -> f64 {
    2e-3 * (h / 0.02).powi(2).max(1.0)
}

pub fn verdict_for(ratio: f64, tolerance: f64) -> Verdict {
    if ratio < 1.0 - tolerance {
        Verdict::Violated
    } else if ratio > 1.0 + tolerance {
        Verdict::HoldsWithMargin
    } else {
        Verdict::Holds
    }
}

/// Compares `λ₁(Ω)` from finite elements with `λ₁(W_R)` from the radial
/// solver, `|W_R| = |Ω|`.
pub fn faber_krahn(
    d: &Domain,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    mesh_h: f64,
    opts: &SolveOptions,
) -> Result<FaberKrahnReport> {
    let mesh = generate_mesh(d, mesh_h)?;
    let res = fem::solve_first(&mesh, h, p, beta, opts)?;
    faber_krahn_from(d, h, p, beta, mesh_h, res.lambda)
}

/// [`faber_krahn`] for an eigenvalue that is already known.
pub fn faber_krahn_from(
    d: &Domain,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    mesh_h: f64,
    lambda_domain: f64,
) -> Result<FaberKrahnReport> {
    let r_equiv = (d.area() / kappa(h)?).sqrt();
    let lambda_wulff = first_eigenvalue_radial(&RadialProblem::new(2, p, r_equiv, beta)?, DEFAULT_TOL)?.lambda;
    let ratio = lambda_domain / lambda_wulff;
    let tolerance = mesh_tolerance(mesh_h);
    Ok(FaberKrahnReport {
        lambda_domain,
        lambda_wulff,
        r_equiv,
        ratio,
        mesh_h,
        tolerance,
        verdict: verdict_for(ratio, tolerance),
    })
}

/// `((p−1)/p)^p β / (R (1 + β^{1/(p−1)} R)^{p−1})`.
pub fn inradius_bound_value(p: f64, beta: f64, r_h: f64) -> f64 {
    ((p - 1.0) / p).powf(p) * beta / (r_h * (1.0 + beta.powf(1.0 / (p - 1.0)) * r_h).powf(p - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InradiusBound {
    pub inradius: f64,
    pub bound: f64,
    pub lambda: f64,
    /// `λ − bound`; nonnegative when the bound holds.
    pub slack: f64,
}

/// Lower bound on `λ₁` through the anisotropic inradius of a convex
/// domain, against the finite-element eigenvalue `lambda`.
pub fn inradius_bound(d: &Domain, h: &AnisotropicNorm, p: f64, beta: f64, lambda: f64) -> Result<InradiusBound> {
    let r = geometry::inradius(d, h)?.value;
    let bound = inradius_bound_value(p, beta, r);
    Ok(InradiusBound { inradius: r, bound, lambda, slack: lambda - bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Anisotropic distance at the interior quadrature points of a mesh of a
/// convex domain, reusable across fields.
pub struct HardyWeights {
    /// `d_H` per triangle and per point of the 3-point rule.
    distance: Vec<[f64; 3]>,
}

impl HardyWeights {
    pub fn new(d: &Domain, mesh: &Mesh, h: &AnisotropicNorm) -> Result<Self> {
        if !d.is_convex() {
            return Err(Error::Unsupported("the Hardy inequality is checked on convex domains only".into()));
        }
        let mut distance = Vec::with_capacity(mesh.triangles.len());
        for t in 0..mesh.triangles.len() {
            let c = mesh.corners(t);
            let mut row = [0.0; 3];
            for (slot, bary) in row.iter_mut().zip(&TRI_RULE) {
                let x = [
                    bary[0] * c[0][0] + bary[1] * c[1][0] + bary[2] * c[2][0],
                    bary[0] * c[0][1] + bary[1] * c[1][1] + bary[2] * c[2][1],
                ];
                *slot = geometry::aniso_distance(d, h, x)?.value;
            }
            distance.push(row);
        }
        Ok(Self { distance })
    }
}

/// Checks `∫ H(∇u)^p + θ^{p−1} ∫_{∂Ω} |u|^p H(ν) ≥
/// (p−1)(αθ)^{p−1}(1−αθ) ∫ |u|^p / (d_H + α)^p`.
#[allow(clippy::too_many_arguments)]
pub fn hardy_check(
    mesh: &Mesh,
    weights: &HardyWeights,
    h: &AnisotropicNorm,
    p: f64,
    u: &[f64],
    alpha: f64,
    theta: f64,
) -> Result<HardyCheck> {
    if !(alpha > 0.0 && theta > 0.0) {
        return Err(Error::input("α and θ must be positive"));
    }
    if u.len() != mesh.node_count() || weights.distance.len() != mesh.triangles.len() {
        return Err(Error::input("field or weights do not match the mesh"));
    }
    if u.iter().all(|v| *v == 0.0) {
        return Err(Error::input("the field vanishes identically"));
    }
    let mut energy = 0.0;
    let mut weighted = 0.0;
    for ((e, tri), dist) in elements(mesh).iter().zip(&mesh.triangles).zip(&weights.distance) {
        energy += e.area * h.h2(element_gradient(e, tri, u)).powf(p);
        for (bary, dh) in TRI_RULE.iter().zip(dist) {
            let uq = bary[0] * u[tri[0]] + bary[1] * u[tri[1]] + bary[2] * u[tri[2]];
            weighted += e.area / 3.0 * uq.abs().powf(p) / (dh + alpha).powf(p);
        }
    }
    let mut boundary = 0.0;
    for edge in &mesh.boundary_edges {
        for &s in &EDGE_RULE {
            let uq = (1.0 - s) * u[edge.a] + s * u[edge.b];
            boundary += 0.5 * edge.length * h.h2(edge.normal) * uq.abs().powf(p);
        }
    }
    let at = alpha * theta;
    let lhs = energy + theta.powf(p - 1.0) * boundary;
    let rhs = (p - 1.0) * at.powf(p - 1.0) * (1.0 - at) * weighted;
    Ok(HardyCheck { lhs, rhs, holds: lhs >= rhs - 1e-9 * lhs.abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub aspect_ratio: f64,
    pub width: f64,
    pub height: f64,
    pub lambda: f64,
    /// Constant-function upper bound `β σ_H(∂Ω)/|Ω|`.
    pub upper_bound: f64,
    pub inradius_bound: f64,
}

/// First eigenvalue on rectangles `[0, √(A a)] × [0, √(A/a)]` for each
/// aspect ratio `a`.
pub fn unboundedness_sweep(
    aspect_ratios: &[f64],
    area: f64,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    mesh_h: f64,
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>> {
    if !(area > 0.0) {
        return Err(Error::input("area must be positive"));
    }
    aspect_ratios
        .iter()
        .map(|&a| {
            if !(a >= 1.0) {
                return Err(Error::input(format!("aspect ratios must be >= 1, got {a}")));
            }
            let (width, height) = ((area * a).sqrt(), (area / a).sqrt());
            let d = Domain::rect(width, height)?;
            let mesh = generate_mesh(&d, mesh_h)?;
            let res = fem::solve_first(&mesh, h, p, beta, opts)?;
            let ib = inradius_bound(&d, h, p, beta, res.lambda)?;
            Ok(SweepRow {
                aspect_ratio: a,
                width,
                height,
                lambda: res.lambda,
                upper_bound: constant_upper_bound(&mesh, h, beta),
                inradius_bound: ib.bound,
            })
        })
        .collect()
}

/// True when every entry exceeds its predecessor.
pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

/// Functional values over several levels, for constancy checks.
pub fn representation_sweep(
    mesh: &Mesh,
    h: &AnisotropicNorm,
    p: f64,
    beta: f64,
    result: &EigenResult,
    levels: &[f64],
) -> Result<Vec<(LevelSetSlice, f64)>> {
    levels.iter().map(|&t| representation_functional(mesh, h, p, beta, &result.u, t)).collect()
}
