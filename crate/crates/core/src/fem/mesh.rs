//! Triangulation of polygonal domains.

use std::fmt::Write as _;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::geometry::Domain;
use crate::{Error, Point, Result};

/// Smallest interior angle accepted from the generator, in degrees.
pub const MIN_ANGLE_DEGREES: f64 = 20.0;

/// Boundary segment between nodes `a` and `b`, oriented with the domain
/// on its left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub normal: Point,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counter-clockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
}

fn tri_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn min_angle(p: [Point; 3]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..3 {
        let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
        m = m.min(ang);
    }
    m.to_degrees()
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    (x[0] - a[0] - s * d[0]).hypot(x[1] - a[1] - s * d[1])
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[t];
        [self.nodes[i], self.nodes[j], self.nodes[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        tri_area(self.corners(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|e| e.length).sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle(&self) -> f64 {
        (0..self.triangles.len()).map(|t| min_angle(self.corners(t))).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter_scale(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    pub fn is_boundary_node(&self) -> Vec<bool> {
        let mut flag = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            flag[e.a] = true;
            flag[e.b] = true;
        }
        flag
    }

    /// The same connectivity with every node multiplied by `t`.
    pub fn dilate(&self, t: f64) -> Result<Mesh> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::input(format!("dilation factor must be positive, got {t}")));
        }
        Ok(Mesh {
            nodes: self.nodes.iter().map(|p| [t * p[0], t * p[1]]).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.iter().map(|e| BoundaryEdge { length: t * e.length, ..*e }).collect(),
            h: t * self.h,
        })
    }

    /// Line-oriented export: `n x y`, `t i j k`, `b i j nx ny`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# h {}\n", self.h);
        for p in &self.nodes {
            let _ = writeln!(out, "n {:e} {:e}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(out, "b {} {} {:e} {:e}", e.a, e.b, e.normal[0], e.normal[1]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut mesh = Mesh { nodes: vec![], triangles: vec![], boundary_edges: vec![], h: f64::NAN };
        let mut pending = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let bad = |what: &str| Error::input(format!("mesh line {}: {what}: `{line}`", lineno + 1));
            let f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            let u = |s: &str| s.parse::<usize>().map_err(|_| bad("bad index"));
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [] => {}
                ["#", "h", v] => mesh.h = f(v)?,
                [c, ..] if c.starts_with('#') => {}
                ["n", x, y] => mesh.nodes.push([f(x)?, f(y)?]),
                ["t", i, j, k] => mesh.triangles.push([u(i)?, u(j)?, u(k)?]),
                ["b", i, j, nx, ny] => pending.push((u(i)?, u(j)?, [f(nx)?, f(ny)?])),
                _ => return Err(bad("unrecognized record")),
            }
        }
        let n = mesh.nodes.len();
        if mesh.triangles.iter().flatten().chain(pending.iter().flat_map(|p| [&p.0, &p.1])).any(|&i| i >= n) {
            return Err(Error::input("mesh references a node index out of range"));
        }
        for (a, b, normal) in pending {
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            mesh.boundary_edges.push(BoundaryEdge { a, b, normal, length: (pb[0] - pa[0]).hypot(pb[1] - pa[1]) });
        }
        Ok(mesh)
    }
}

/// Triangulates `d` with target edge length `h`.
///
/// Polygon edges are split into equal pieces no longer than `h`. Interior
/// nodes come from a square lattice anchored at the lower-left corner of
/// the bounding box, keeping points at least `h/2` from the boundary. A
/// constrained Delaunay triangulation joins them, faces outside the polygon
/// are dropped, and a few Laplacian smoothing sweeps move interior nodes
/// when this improves the worst incident angle. If the result still has an
/// angle below [`MIN_ANGLE_DEGREES`] (boundaries sampled much finer than
/// `h`), the triangulation is rebuilt with Delaunay refinement. Nodes are
/// numbered along the longer side of the bounding box so the stiffness
/// matrix is banded.
pub fn generate_mesh(d: &Domain, h: f64) -> Result<Mesh> {
    let (lo, hi) = d.bounding_box();
    let short = (hi[0] - lo[0]).min(hi[1] - lo[1]);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::input(format!("mesh size must be positive, got {h}")));
    }
    if h > 0.5 * short {
        return Err(Error::input(format!(
            "mesh size {h} too large for a domain of width {short}; need h <= {}",
            0.5 * short
        )));
    }

    // Boundary loop.
    let mut points: Vec<Point> = Vec::new();
    for e in d.edges() {
        let k = ((e.length / h) - 1e-9).ceil().max(1.0) as usize;
        for j in 0..k {
            let s = j as f64 / k as f64;
            points.push([e.a[0] + s * (e.b[0] - e.a[0]), e.a[1] + s * (e.b[1] - e.a[1])]);
        }
    }
    let nb = points.len();

    // Interior lattice.
    let poly = d.vertices();
    let nx = ((hi[0] - lo[0]) / h).floor() as usize;
    let ny = ((hi[1] - lo[1]) / h).floor() as usize;
    for i in 1..=nx {
        for j in 1..=ny {
            let x = [lo[0] + i as f64 * h, lo[1] + j as f64 * h];
            if !d.contains(x) {
                continue;
            }
            let dist = (0..poly.len())
                .map(|k| segment_distance(x, poly[k], poly[(k + 1) % poly.len()]))
                .fold(f64::INFINITY, f64::min);
            if dist >= 0.5 * h * (1.0 - 1e-9) {
                points.push(x);
            }
        }
    }

    let mut mesh = triangulate(d, &points, nb, h, false)?;
    smooth(&mut mesh, 4);
    if mesh.min_angle() < MIN_ANGLE_DEGREES {
        mesh = triangulate(d, &points, nb, h, true)?;
        smooth(&mut mesh, 4);
    }

    let worst = mesh.min_angle();
    if worst < MIN_ANGLE_DEGREES {
        return Err(Error::numeric(format!("mesh quality too low: minimum angle {worst:.2} degrees"), worst));
    }
    Ok(mesh)
}

/// Angle targeted by the refinement fallback, above the acceptance limit so
/// that smoothing has room.
const REFINE_ANGLE_DEGREES: f64 = 25.0;

/// Constrained Delaunay triangulation of `points`, whose first `nb` entries
/// form the boundary loop in order.
fn triangulate(d: &Domain, points: &[Point], nb: usize, h: f64, refine: bool) -> Result<Mesh> {
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut handles = Vec::with_capacity(points.len());
    for p in points {
        let hdl = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Internal(format!("triangulation insert failed: {e:?}")))?;
        handles.push(hdl);
    }
    if cdt.num_vertices() != points.len() {
        return Err(Error::Internal("duplicate mesh node".into()));
    }
    for j in 0..nb {
        cdt.add_constraint(handles[j], handles[(j + 1) % nb]);
    }
    if refine {
        let params = RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEGREES))
            .with_max_additional_vertices(4 * points.len() + 1000)
            .exclude_outer_faces(true);
        if !cdt.refine(params).refinement_complete {
            return Err(Error::numeric("mesh refinement did not complete", f64::NAN));
        }
    }

    // Faces reachable from the hull without crossing a constraint lie
    // outside the polygon.
    let mut outside = vec![false; cdt.num_inner_faces() + 1];
    let mut stack = Vec::new();
    for f in cdt.inner_faces() {
        let touches_hull = f.adjacent_edges().iter().any(|e| e.rev().face().is_outer() && !e.is_constraint_edge());
        if touches_hull {
            outside[f.fix().index()] = true;
            stack.push(f);
        }
    }
    while let Some(f) = stack.pop() {
        for e in f.adjacent_edges() {
            if e.is_constraint_edge() {
                continue;
            }
            if let Some(g) = e.rev().face().as_inner() {
                if !outside[g.fix().index()] {
                    outside[g.fix().index()] = true;
                    stack.push(g);
                }
            }
        }
    }
    let inside_faces: Vec<_> = cdt.inner_faces().filter(|f| !outside[f.fix().index()]).collect();

    // Banded numbering of the vertices that carry triangles: sort along the
    // long axis.
    let (lo, hi) = d.bounding_box();
    let axis = usize::from(hi[1] - lo[1] > hi[0] - lo[0]);
    let position = |i: usize| {
        let p = cdt.vertex(spade::handles::FixedVertexHandle::from_index(i)).position();
        [p.x, p.y]
    };
    let mut used = vec![false; cdt.num_vertices()];
    for f in &inside_faces {
        for v in f.vertices() {
            used[v.fix().index()] = true;
        }
    }
    let mut order: Vec<usize> = (0..cdt.num_vertices()).filter(|&i| used[i]).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (position(a), position(b));
        pa[axis].total_cmp(&pb[axis]).then(pa[1 - axis].total_cmp(&pb[1 - axis]))
    });
    let mut new_index = vec![usize::MAX; cdt.num_vertices()];
    for (k, &o) in order.iter().enumerate() {
        new_index[o] = k;
    }
    let nodes: Vec<Point> = order.iter().map(|&o| position(o)).collect();

    let mut triangles = Vec::with_capacity(inside_faces.len());
    for f in &inside_faces {
        let v = f.vertices();
        let mut t = [0usize; 3];
        for k in 0..3 {
            t[k] = new_index[v[k].fix().index()];
        }
        if tri_area([nodes[t[0]], nodes[t[1]], nodes[t[2]]]) < 0.0 {
            t.swap(1, 2);
        }
        triangles.push(t);
    }
    triangles.sort_unstable();

    // Boundary loop: constraint edges with an inside face on their left,
    // walked from the first polygon vertex. Normals are taken from the
    // polygon edge carrying each piece.
    let mut next = vec![usize::MAX; cdt.num_vertices()];
    let mut pieces = 0;
    for e in cdt.directed_edges() {
        if !e.is_constraint_edge() {
            continue;
        }
        if let Some(f) = e.face().as_inner() {
            if !outside[f.fix().index()] {
                next[e.from().fix().index()] = e.to().fix().index();
                pieces += 1;
            }
        }
    }
    let edges: Vec<_> = d.edges().collect();
    let start = handles[0].index();
    let mut boundary_edges = Vec::with_capacity(pieces);
    let mut cur = start;
    loop {
        let nxt = next[cur];
        if nxt == usize::MAX || boundary_edges.len() > pieces {
            return Err(Error::Internal("boundary loop is not closed".into()));
        }
        let (a, b) = (new_index[cur], new_index[nxt]);
        let (pa, pb) = (nodes[a], nodes[b]);
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let carrier = edges
            .iter()
            .min_by(|e, f| segment_distance(mid, e.a, e.b).total_cmp(&segment_distance(mid, f.a, f.b)))
            .expect("domains have edges");
        boundary_edges.push(BoundaryEdge {
            a,
            b,
            normal: carrier.normal,
            length: (pb[0] - pa[0]).hypot(pb[1] - pa[1]),
        });
        cur = nxt;
        if cur == start {
            break;
        }
    }
    if boundary_edges.len() != pieces {
        return Err(Error::Internal("boundary has more than one loop".into()));
    }

    Ok(Mesh { nodes, triangles, boundary_edges, h })
}

/// Laplacian smoothing with move rejection: an interior node goes to the
/// centroid of its neighbours only if the worst angle of its incident
/// triangles improves and none of them flips.
fn smooth(mesh: &mut Mesh, sweeps: usize) {
    let n = mesh.nodes.len();
    let boundary = mesh.is_boundary_node();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            incident[tri[k]].push(t);
            for l in 1..3 {
                let o = tri[(k + l) % 3];
                if !neighbours[tri[k]].contains(&o) {
                    neighbours[tri[k]].push(o);
                }
            }
        }
    }
    let quality = |mesh: &Mesh, i: usize| {
        incident[i].iter().fold(f64::INFINITY, |m, &t| {
            let c = mesh.corners(t);
            if tri_area(c) <= 0.0 {
                f64::NEG_INFINITY
            } else {
                m.min(min_angle(c))
            }
        })
    };
    for _ in 0..sweeps {
        for i in 0..n {
            if boundary[i] || neighbours[i].is_empty() {
                continue;
            }
            let k = neighbours[i].len() as f64;
            let target = neighbours[i]
                .iter()
                .fold([0.0, 0.0], |acc, &j| [acc[0] + mesh.nodes[j][0] / k, acc[1] + mesh.nodes[j][1] / k]);
            let before = quality(mesh, i);
            let old = mesh.nodes[i];
            mesh.nodes[i] = target;
            if quality(mesh, i) <= before {
                mesh.nodes[i] = old;
            }
        }
    }
}
