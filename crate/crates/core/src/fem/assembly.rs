//! P1 element data, matrix assembly and the discrete Rayleigh quotient.

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::mesh::Mesh;
use crate::norms::AnisotropicNorm;
use crate::{Error, Result};

/// Barycentric coordinates of the 3-point triangle rule (weights 1/3),
/// exact for quadratics.
pub(crate) const TRI_RULE: [[f64; 3]; 3] =
    [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];

/// Edge parameters of the 2-point Gauss rule on `[0, 1]` (weights 1/2).
pub(crate) const EDGE_RULE: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Element {
    pub area: f64,
    /// Constant gradients of the three hat functions.
    pub grads: [[f64; 2]; 3],
}

pub(crate) fn elements(mesh: &Mesh) -> Vec<Element> {
    (0..mesh.triangles.len())
        .map(|t| {
            let p = mesh.corners(t);
            let area = mesh.triangle_area(t);
            let mut grads = [[0.0; 2]; 3];
            for i in 0..3 {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                grads[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
            }
            Element { area, grads }
        })
        .collect()
}

pub(crate) fn element_gradient(e: &Element, tri: &[usize; 3], u: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for k in 0..3 {
        g[0] += u[tri[k]] * e.grads[k][0];
        g[1] += u[tri[k]] * e.grads[k][1];
    }
    g
}

/// Stiffness `K`, anisotropic boundary mass `B` and mass `M` for
/// `H(ξ)² = ξᵀAξ`.
#[derive(Clone, Debug)]
pub struct Matrices {
    pub stiffness: CscMatrix<f64>,
    pub boundary: CscMatrix<f64>,
    pub mass: CscMatrix<f64>,
}

/// `K_ij = ∫ ∇φᵢᵀ A ∇φⱼ`, `B_ij = ∫_{∂Ω} φᵢ φⱼ H(ν)`, `M_ij = ∫ φᵢ φⱼ`.
pub fn assemble_quadratic(mesh: &Mesh, a: [[f64; 2]; 2], h: &AnisotropicNorm) -> Result<Matrices> {
    if h.dim() != 2 {
        return Err(Error::Unsupported("finite elements are planar".into()));
    }
    let n = mesh.node_count();
    let mut k = CooMatrix::new(n, n);
    let mut m = CooMatrix::new(n, n);
    let mut b = CooMatrix::new(n, n);
    for (e, tri) in elements(mesh).iter().zip(&mesh.triangles) {
        for i in 0..3 {
            let ag =
                [a[0][0] * e.grads[i][0] + a[0][1] * e.grads[i][1], a[1][0] * e.grads[i][0] + a[1][1] * e.grads[i][1]];
            for j in 0..3 {
                let kij = e.area * (ag[0] * e.grads[j][0] + ag[1] * e.grads[j][1]);
                k.push(tri[i], tri[j], kij);
                m.push(tri[i], tri[j], e.area / if i == j { 6.0 } else { 12.0 });
            }
        }
    }
    for e in &mesh.boundary_edges {
        let w = e.length * h.h2(e.normal);
        for (i, j, c) in [(e.a, e.a, 3.0), (e.b, e.b, 3.0), (e.a, e.b, 6.0), (e.b, e.a, 6.0)] {
            b.push(i, j, w / c);
        }
    }
    Ok(Matrices { stiffness: CscMatrix::from(&k), boundary: CscMatrix::from(&b), mass: CscMatrix::from(&m) })
}

/// `y = A x` for a CSC matrix.
pub(crate) fn spmv(a: &CscMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (j, col) in a.col_iter().enumerate() {
        let xj = x[j];
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            y[i] += v * xj;
        }
    }
    y
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse Cholesky factor of an SPD matrix.
pub(crate) struct SpdSolver(CscCholesky<f64>);

impl SpdSolver {
    pub fn new(a: &CscMatrix<f64>) -> Result<Self> {
        CscCholesky::factor(a)
            .map(SpdSolver)
            .map_err(|e| Error::numeric(format!("sparse Cholesky failed: {e:?}"), f64::NAN))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = DVector::from_column_slice(rhs);
        self.0.solve_mut(&mut x);
        x.as_slice().to_vec()
    }
}

/// Euclidean stiffness plus mass; the metric used to precondition descent
/// and to measure weak residuals.
pub(crate) fn euclidean_preconditioner(mesh: &Mesh) -> Result<SpdSolver> {
    let e = AnisotropicNorm::euclidean(2)?;
    let mats = assemble_quadratic(mesh, [[1.0, 0.0], [0.0, 1.0]], &e)?;
    SpdSolver::new(&(&mats.stiffness + &mats.mass))
}

/// Terms of the discrete Rayleigh quotient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rayleigh {
    /// `Σ_T |T| H(∇u|_T)^p + β Σ_e ∫_e |u|^p H(ν_e)`.
    pub num: f64,
    /// `∫_Ω |u|^p`.
    pub den: f64,
    /// `num / den`.
    pub j: f64,
}

/// Evaluates the Rayleigh quotient and, when `grad` is given, the gradients
/// of `num` and `den` with respect to the nodal values.
///
/// `eps > 0` regularizes the derivatives only: `H` becomes
/// `(H² + ε²)^{1/2}` and `|u|` becomes `(u² + ε²)^{1/2}` inside them.
pub(crate) struct Functional<'a> {
    pub mesh: &'a Mesh,
    pub elements: Vec<super::assembly::Element>,
    pub norm: &'a AnisotropicNorm,
    pub p: f64,
    pub beta: f64,
    pub edge_weights: Vec<f64>,
}

impl<'a> Functional<'a> {
    pub fn new(mesh: &'a Mesh, norm: &'a AnisotropicNorm, p: f64, beta: f64) -> Result<Self> {
        if norm.dim() != 2 {
            return Err(Error::Unsupported("finite elements are planar".into()));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::input(format!("p must be in (1, ∞), got {p}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::input(format!("β must be finite and nonnegative, got {beta}")));
        }
        let edge_weights = mesh.boundary_edges.iter().map(|e| e.length * norm.h2(e.normal)).collect();
        Ok(Self { mesh, elements: elements(mesh), norm, p, beta, edge_weights })
    }

    pub fn evaluate(&self, u: &[f64]) -> Result<Rayleigh> {
        self.eval_inner(u, None, 0.0)
    }

    /// Returns the quotient and `∂J/∂u`.
    pub fn evaluate_with_gradient(&self, u: &[f64], eps: f64) -> Result<(Rayleigh, Vec<f64>)> {
        let n = u.len();
        let mut gn = vec![0.0; n];
        let mut gd = vec![0.0; n];
        let r = self.eval_inner(u, Some((&mut gn, &mut gd)), eps)?;
        let g = gn.iter().zip(&gd).map(|(a, b)| (a - r.j * b) / r.den).collect();
        Ok((r, g))
    }

    fn eval_inner(&self, u: &[f64], mut grad: Option<(&mut Vec<f64>, &mut Vec<f64>)>, eps: f64) -> Result<Rayleigh> {
        if u.len() != self.mesh.node_count() {
            return Err(Error::input(format!(
                "field has {} values but the mesh has {} nodes",
                u.len(),
                self.mesh.node_count()
            )));
        }
        let p = self.p;
        let (mut energy, mut den) = (0.0, 0.0);
        for (e, tri) in self.elements.iter().zip(&self.mesh.triangles) {
            let g = element_gradient(e, tri, u);
            let (hv, hg) = self.norm.h2_grad(g);
            energy += e.area * hv.powf(p);
            let vals = [u[tri[0]], u[tri[1]], u[tri[2]]];
            for bary in &TRI_RULE {
                let uq = bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2];
                den += e.area / 3.0 * uq.abs().powf(p);
                if let Some((_, gd)) = grad.as_mut() {
                    let d = e.area / 3.0 * p * reg_pow(uq, p - 2.0, eps) * uq;
                    for k in 0..3 {
                        gd[tri[k]] += d * bary[k];
                    }
                }
            }
            if let Some((gn, _)) = grad.as_mut() {
                // d/dg H_ε(g)^p = p H_ε^{p−2} H H_ξ.
                let he2 = hv * hv + eps * eps;
                if he2 > 0.0 {
                    let c = e.area * p * he2.powf(0.5 * p - 1.0) * hv;
                    for k in 0..3 {
                        gn[tri[k]] += c * (hg[0] * e.grads[k][0] + hg[1] * e.grads[k][1]);
                    }
                }
            }
        }
        let mut boundary = 0.0;
        if self.beta > 0.0 {
            for (edge, &w) in self.mesh.boundary_edges.iter().zip(&self.edge_weights) {
                let (ua, ub) = (u[edge.a], u[edge.b]);
                for &s in &EDGE_RULE {
                    let uq = (1.0 - s) * ua + s * ub;
                    boundary += 0.5 * w * uq.abs().powf(p);
                    if let Some((gn, _)) = grad.as_mut() {
                        let d = self.beta * 0.5 * w * p * reg_pow(uq, p - 2.0, eps) * uq;
                        gn[edge.a] += d * (1.0 - s);
                        gn[edge.b] += d * s;
                    }
                }
            }
        }
        if !(den > 0.0) {
            return Err(Error::input("the field vanishes identically (zero L^p norm)"));
        }
        let num = energy + self.beta * boundary;
        Ok(Rayleigh { num, den, j: num / den })
    }
}

/// `(u² + ε²)^{e/2}`, or `|u|^e` when `ε = 0` (0 at `u = 0`).
fn reg_pow(u: f64, e: f64, eps: f64) -> f64 {
    let s = u * u + eps * eps;
    if s == 0.0 {
        0.0
    } else {
        s.powf(0.5 * e)
    }
}

/// Discrete Rayleigh quotient `J(u)` of nodal field `u`.
pub fn rayleigh(mesh: &Mesh, h: &AnisotropicNorm, p: f64, beta: f64, u: &[f64]) -> Result<Rayleigh> {
    Functional::new(mesh, h, p, beta)?.evaluate(u)
}
