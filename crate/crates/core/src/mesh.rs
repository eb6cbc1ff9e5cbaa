//! Structured triangulations of axis-aligned rectangles.
//!
//! Every square cell of an `n x n` grid is cut along its lower-left to
//! upper-right diagonal. Edges carry a global orientation (lower vertex
//! index to higher) and each triangle records, per local edge, whether its
//! outward normal agrees with the global edge normal. Local edge `i` of a
//! triangle is the edge opposite local vertex `i`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rectangle {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let r = Rectangle { x0, y0, x1, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn unit_square() -> Self {
        Rectangle {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRectangle {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
            })
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p[0] >= self.x0 - tol && p[0] <= self.x1 + tol && p[1] >= self.y0 - tol && p[1] <= self.y1 + tol
    }
}

/// Reference from a triangle to one of its edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub edge: usize,
    /// +1 when the triangle's outward normal matches the global edge normal.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub rect: Rectangle,
    pub n: usize,
    pub h: f64,
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `[lo, hi]` with `lo < hi`.
    pub edges: Vec<[usize; 2]>,
    /// Per triangle, local edge `i` is opposite local vertex `i`.
    pub triangle_edges: Vec<[EdgeRef; 3]>,
    pub boundary_edges: Vec<bool>,
}

pub fn build_structured_mesh(rect: Rectangle, n: usize) -> Result<Mesh> {
    rect.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "subdivision count must be at least 1".into(),
        ));
    }
    let dx = (rect.x1 - rect.x0) / n as f64;
    let dy = (rect.y1 - rect.y0) / n as f64;
    let stride = n + 1;

    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        // Pin the last row/column to the exact boundary coordinate.
        let y = if j == n { rect.y1 } else { rect.y0 + j as f64 * dy };
        for i in 0..=n {
            let x = if i == n { rect.x1 } else { rect.x0 + i as f64 * dx };
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(3 * n * n + 2 * n);
    let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    let mut use_count = Vec::with_capacity(3 * n * n + 2 * n);
    for tri in &triangles {
        let mut refs = [EdgeRef { edge: 0, sign: 1 }; 3];
        for (local, r) in refs.iter_mut().enumerate() {
            let a = tri[(local + 1) % 3];
            let b = tri[(local + 2) % 3];
            let key = [a.min(b), a.max(b)];
            let edge = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                use_count.push(0u8);
                edges.len() - 1
            });
            use_count[edge] += 1;
            let sign = orientation_sign(&vertices, *tri, local, key);
            *r = EdgeRef { edge, sign };
        }
        triangle_edges.push(refs);
    }
    let boundary_edges = use_count.iter().map(|&c| c == 1).collect();

    let h = edges
        .iter()
        .map(|&[a, b]| distance(vertices[a], vertices[b]))
        .fold(0.0, f64::max);

    Ok(Mesh {
        rect,
        n,
        h,
        vertices,
        triangles,
        edges,
        triangle_edges,
        boundary_edges,
    })
}

/// Regenerates the structured mesh with twice the subdivision count.
pub fn refine(mesh: &Mesh) -> Mesh {
    build_structured_mesh(mesh.rect, 2 * mesh.n).expect("a valid mesh refines to a valid mesh")
}

fn orientation_sign(vertices: &[Point], tri: [usize; 3], local: usize, key: [usize; 2]) -> i8 {
    let opposite = vertices[tri[local]];
    let normal = global_normal(vertices[key[0]], vertices[key[1]]);
    let a = vertices[key[0]];
    let b = vertices[key[1]];
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let outward = [mid[0] - opposite[0], mid[1] - opposite[1]];
    if outward[0] * normal[0] + outward[1] * normal[1] > 0.0 {
        1
    } else {
        -1
    }
}

/// Unit normal of the directed edge `a -> b`, rotated 90 degrees counterclockwise.
pub fn global_normal(a: Point, b: Point) -> [f64; 2] {
    let len = distance(a, b);
    [-(b[1] - a[1]) / len, (b[0] - a[0]) / len]
}

pub fn distance(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

pub fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_signs(&self, t: usize) -> [i8; 3] {
        let r = &self.triangle_edges[t];
        [r[0].sign, r[1].sign, r[2].sign]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_points(t))
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e];
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        distance(a, b)
    }

    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edge_points(e);
        global_normal(a, b)
    }

    /// Plain-text dump with VERTICES, TRIANGLES and EDGES sections.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("VERTICES\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.17e} {:.17e}", v[0], v[1]);
        }
        out.push_str("TRIANGLES\n");
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        out.push_str("EDGES\n");
        for (i, (e, b)) in self.edges.iter().zip(&self.boundary_edges).enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", e[0], e[1], u8::from(*b));
        }
        out
    }
}
