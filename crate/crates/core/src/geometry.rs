//! Planar polygonal domains, Wulff shapes and their anisotropic measures.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::norms::AnisotropicNorm;
use crate::rootfind::golden_min;
use crate::{Error, Point, Result};

/// A simple polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    vertices: Vec<Point>,
    tag: String,
    convex: bool,
}

/// Boundary edge from `a` to `b` with unit outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: Point,
    pub b: Point,
    pub normal: Point,
    pub length: f64,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d == 0.0 && c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

impl Domain {
    /// Validates and stores a polygon. Clockwise input is reversed; a
    /// repeated closing vertex is dropped.
    pub fn new(vertices: Vec<Point>, tag: impl Into<String>) -> Result<Self> {
        let mut v = vertices;
        if v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::input(format!("a polygon needs at least 3 vertices, got {}", v.len())));
        }
        if v.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::input("polygon has non-finite coordinates"));
        }
        let n = v.len();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if a == b {
                return Err(Error::input(format!("degenerate zero-length edge at vertex {i}")));
            }
        }
        let area = signed_area(&v);
        if area == 0.0 {
            return Err(Error::input("polygon has zero area"));
        }
        if area < 0.0 {
            v.reverse();
        }
        for i in 0..n {
            for j in i + 1..n {
                // Adjacent edges share a vertex by construction.
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return Err(Error::input(format!("polygon is self-intersecting (edges {i} and {j})")));
                }
            }
        }
        let scale = v.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        let convex = (0..n).all(|i| cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) >= -1e-12 * scale * scale);
        Ok(Self { vertices: v, tag: tag.into(), convex })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let d = [b[0] - a[0], b[1] - a[1]];
            let length = d[0].hypot(d[1]);
            Edge { a, b, normal: [d[1] / length, -d[0] / length], length }
        })
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|e| e.length).sum()
    }

    /// `σ_H(∂Ω) = Σ_e |e| H(ν_e)`.
    pub fn aniso_perimeter(&self, h: &AnisotropicNorm) -> Result<f64> {
        require_planar(h)?;
        Ok(self.edges().map(|e| e.length * h.h2(e.normal)).sum())
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i][0] - v[j][0]).hypot(v[i][1] - v[j][1]));
            }
        }
        d
    }

    /// Point-in-polygon by the even-odd rule; boundary points count as
    /// inside.
    pub fn contains(&self, x: Point) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let c = cross(a, b, x);
            if c == 0.0
                && x[0] >= a[0].min(b[0])
                && x[0] <= a[0].max(b[0])
                && x[1] >= a[1].min(b[1])
                && x[1] <= a[1].max(b[1])
            {
                return true;
            }
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x[0] < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Dilation about the origin.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::input(format!("dilation factor must be positive, got {t}")));
        }
        let v = self.vertices.iter().map(|p| [t * p[0], t * p[1]]).collect();
        Domain::new(v, self.tag.clone())
    }

    pub fn unit_square() -> Self {
        Self::rect(1.0, 1.0).expect("unit square is valid")
    }

    /// `[0, width] × [0, height]`.
    pub fn rect(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::input("rectangle sides must be positive"));
        }
        Domain::new(vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]], format!("rect:{width},{height}"))
    }

    /// Equilateral triangle with the given side, base on the x-axis.
    pub fn equilateral_triangle(side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::input("triangle side must be positive"));
        }
        Domain::new(vec![[0.0, 0.0], [side, 0.0], [0.5 * side, 0.75f64.sqrt() * side]], format!("triangle:{side}"))
    }

    /// Regular `k`-gon inscribed in the circle of radius `circumradius`
    /// about the origin, first vertex on the positive x-axis.
    pub fn regular(k: usize, circumradius: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::input("a regular polygon needs at least 3 sides"));
        }
        if !(circumradius > 0.0) {
            return Err(Error::input("circumradius must be positive"));
        }
        let v = (0..k)
            .map(|j| {
                let t = TAU * j as f64 / k as f64;
                [circumradius * t.cos(), circumradius * t.sin()]
            })
            .collect();
        Domain::new(v, format!("regular:{k}"))
    }

    /// Ellipse `x²/a² + y²/b² ≤ 1` sampled at `m` points.
    pub fn ellipse(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::input("ellipse semi-axes must be positive"));
        }
        if m < 3 {
            return Err(Error::input("an ellipse polygon needs at least 3 samples"));
        }
        let v = (0..m)
            .map(|j| {
                let t = TAU * j as f64 / m as f64;
                [a * t.cos(), b * t.sin()]
            })
            .collect();
        Domain::new(v, format!("ellipse:{a},{b}"))
    }

    /// Parses the line-oriented format: `v x y` per vertex, `#` comments,
    /// blank lines ignored.
    pub fn from_text(text: &str, tag: impl Into<String>) -> Result<Self> {
        let mut vertices = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let coords: Vec<&str> = parts.collect();
            if kind != "v" || coords.len() != 2 {
                return Err(Error::input(format!("line {}: expected `v x y`, got `{line}`", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::input(format!("line {}: bad coordinate `{s}`", lineno + 1)))
            };
            vertices.push([parse(coords[0])?, parse(coords[1])?]);
        }
        Domain::new(vertices, tag)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.tag);
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {}", v[0], v[1]);
        }
        out
    }
}

fn require_planar(h: &AnisotropicNorm) -> Result<()> {
    if h.dim() != 2 {
        return Err(Error::Unsupported(format!("polygonal geometry is planar; norm has dimension {}", h.dim())));
    }
    Ok(())
}

/// Polygon with vertices `center + R u_k / H°(u_k)`, `u_k` equally spaced
/// in angle; an inscribed approximation of `W_R(center) = {H°(x − c) < R}`.
pub fn wulff_polygon(h: &AnisotropicNorm, radius: f64, center: Point, m: usize) -> Result<Domain> {
    require_planar(h)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::input(format!("Wulff radius must be positive, got {radius}")));
    }
    if m < 3 {
        return Err(Error::input(format!("need at least 3 boundary samples, got {m}")));
    }
    let mut v = Vec::with_capacity(m);
    for k in 0..m {
        let t = TAU * k as f64 / m as f64;
        let u = [t.cos(), t.sin()];
        let h0 = h.polar_evaluate(&u)?;
        v.push([center[0] + radius * u[0] / h0, center[1] + radius * u[1] / h0]);
    }
    Domain::new(v, format!("wulff:{radius}"))
}

/// `κ = |W|`, the area of the unit Wulff shape, by Richardson extrapolation
/// of inscribed-polygon areas at 512, 1024 and 2048 samples.
pub fn kappa(h: &AnisotropicNorm) -> Result<f64> {
    let a: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&m| wulff_polygon(h, 1.0, [0.0, 0.0], m).map(|d| d.area()))
        .collect::<Result<_>>()?;
    // Inscribed-polygon error expands in even powers of 1/m.
    let r1 = (4.0 * a[1] - a[0]) / 3.0;
    let r2 = (4.0 * a[2] - a[1]) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

/// `d_H(x)` together with whether `x` lies in the closed domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisoDistance {
    pub value: f64,
    pub inside: bool,
}

/// `d_H(x) = min_{y∈∂Ω} H°(x − y)` on a convex polygon.
///
/// Each edge is a one-dimensional convex problem solved by golden section.
/// The half-plane value `(c_e − ν_e·x)/H(ν_e)` bounds the edge distance from
/// below, so only edges whose bound beats the running minimum are searched.
/// Points outside the polygon get `value = 0, inside = false`.
pub fn aniso_distance(d: &Domain, h: &AnisotropicNorm, x: Point) -> Result<AnisoDistance> {
    require_planar(h)?;
    if !d.is_convex() {
        return Err(Error::Unsupported("anisotropic distance needs a convex domain".into()));
    }
    if !d.contains(x) {
        return Ok(AnisoDistance { value: 0.0, inside: false });
    }
    Ok(AnisoDistance { value: convex_distance(d, h, x), inside: true })
}

fn convex_distance(d: &Domain, h: &AnisotropicNorm, x: Point) -> f64 {
    let edges: Vec<(Edge, f64)> = d
        .edges()
        .map(|e| {
            let gap = e.normal[0] * (e.a[0] - x[0]) + e.normal[1] * (e.a[1] - x[1]);
            (e, gap.max(0.0) / h.h2(e.normal))
        })
        .collect();
    let edge_min = |e: &Edge| {
        let f = |s: f64| {
            let y = [e.a[0] + s * (e.b[0] - e.a[0]), e.a[1] + s * (e.b[1] - e.a[1])];
            h.polar2([x[0] - y[0], x[1] - y[1]])
        };
        golden_min(f, 0.0, 1.0, 1e-10).1
    };
    let first =
        edges.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, _)| i).expect("polygon has edges");
    let mut best = edge_min(&edges[first].0);
    for (i, (e, lower)) in edges.iter().enumerate() {
        if i != first && *lower < best {
            best = best.min(edge_min(e));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inradius {
    pub value: f64,
    pub center: Point,
}

/// `R_{H,Ω} = sup_x d_H(x)` on a convex polygon.
///
/// A 64×64 grid over the bounding box locates the maximum of the concave
/// `d_H`; zoomed grids around the incumbent then refine it.
pub fn inradius(d: &Domain, h: &AnisotropicNorm) -> Result<Inradius> {
    require_planar(h)?;
    if !d.is_convex() {
        return Err(Error::Unsupported("inradius needs a convex domain".into()));
    }
    let (lo, hi) = d.bounding_box();
    let eval = |p: Point| if d.contains(p) { convex_distance(d, h, p) } else { f64::NEG_INFINITY };
    let coarse = 64;
    let cell = [(hi[0] - lo[0]) / coarse as f64, (hi[1] - lo[1]) / coarse as f64];
    let mut best = Inradius { value: f64::NEG_INFINITY, center: lo };
    for i in 0..coarse {
        for j in 0..coarse {
            let p = [lo[0] + (i as f64 + 0.5) * cell[0], lo[1] + (j as f64 + 0.5) * cell[1]];
            let v = eval(p);
            if v > best.value {
                best = Inradius { value: v, center: p };
            }
        }
    }
    if !best.value.is_finite() {
        return Err(Error::numeric("no interior grid point found for the inradius search", 0.0));
    }
    let fine = 6i32;
    let mut half = [3.0 * cell[0], 3.0 * cell[1]];
    let stop = 1e-13 * d.diameter();
    while half[0].max(half[1]) > stop {
        let c = best.center;
        for i in -fine..=fine {
            for j in -fine..=fine {
                let p = [c[0] + half[0] * i as f64 / fine as f64, c[1] + half[1] * j as f64 / fine as f64];
                let v = eval(p);
                if v > best.value {
                    best = Inradius { value: v, center: p };
                }
            }
        }
        half = [half[0] * 0.5, half[1] * 0.5];
    }
    Ok(best)
}

/// `σ_H(∂Ω) / (2 κ^{1/2} |Ω|^{1/2})`; at least 1 by the anisotropic
/// isoperimetric inequality, with equality exactly on Wulff shapes.
pub fn isoperimetric_ratio(d: &Domain, h: &AnisotropicNorm) -> Result<f64> {
    let sigma = d.aniso_perimeter(h)?;
    let k = kappa(h)?;
    Ok(sigma / (2.0 * k.sqrt() * d.area().sqrt()))
}
