//! P1 finite elements for the first Robin eigenpair on planar polygons.
//!
//! The discrete eigenvalue is the minimum over nodal fields of
//! `J(u) = (Σ_T |T| H(∇u)^p + β ∫_{∂Ω} |u|^p H(ν)) / ∫_Ω |u|^p`, with a
//! one-point rule for the gradient term, 2-point Gauss on edges and the
//! 3-point rule on triangles.

mod assembly;
mod mesh;
mod solve;

pub use assembly::{assemble_quadratic, rayleigh, Matrices, Rayleigh};
pub use mesh::{generate_mesh, BoundaryEdge, Mesh, MIN_ANGLE_DEGREES};
pub use solve::{
    constant_upper_bound, gradient_check, minimize_rayleigh, quadratic_matrix, solve_first, solve_p2_quadratic,
    EigenResult, Init, SolveOptions,
};

pub(crate) use assembly::{element_gradient, elements, EDGE_RULE, TRI_RULE};

use crate::Result;

/// Writes `node,x,y,u` rows with a header.
pub fn eigenfunction_csv(mesh: &Mesh, u: &[f64]) -> Result<String> {
    if u.len() != mesh.node_count() {
        return Err(crate::Error::Input(format!(
            "field has {} values but the mesh has {} nodes",
            u.len(),
            mesh.node_count()
        )));
    }
    let mut out = String::from("node,x,y,u\n");
    for (i, (p, v)) in mesh.nodes.iter().zip(u).enumerate() {
        out.push_str(&format!("{i},{},{},{}\n", p[0], p[1], v));
    }
    Ok(out)
}
