//! Triangle and edge quadrature.

use crate::error::{Error, Result};
use crate::mesh::{signed_area, Point};

/// Barycentric rule; weights sum to one and are scaled by the triangle area at use.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn triangle_rule(degree: usize) -> Result<QuadratureRule> {
    let third = 1.0 / 3.0;
    let rule = match degree {
        1 => QuadratureRule {
            points: vec![[third, third, third]],
            weights: vec![1.0],
            degree,
        },
        2 => QuadratureRule {
            points: vec![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
            weights: vec![third; 3],
            degree,
        },
        3 => QuadratureRule {
            points: vec![
                [third, third, third],
                [0.6, 0.2, 0.2],
                [0.2, 0.6, 0.2],
                [0.2, 0.2, 0.6],
            ],
            weights: vec![-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0],
            degree,
        },
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unsupported triangle quadrature degree {degree} (expected 1, 2 or 3)"
            )))
        }
    };
    Ok(rule)
}

/// Conical (collapsed) Gauss product rule with `order^2` points, exact to degree `2*order - 2`.
///
/// Used where integrals of smooth non-polynomial data need to be resolved
/// well below the discretization error.
pub fn collapsed_gauss_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument("collapsed rule order must be >= 1".into()));
    }
    let g = gauss_legendre(order);
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for (&s, &ws) in g.nodes.iter().zip(&g.weights) {
        for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
            let xi = s;
            let eta = t * (1.0 - s);
            points.push([1.0 - xi - eta, xi, eta]);
            // Reference area is 1/2, so the Jacobian (1 - s) is doubled.
            weights.push(2.0 * ws * wt * (1.0 - s));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree: 2 * order - 2,
    })
}

pub fn edge_rule(npts: usize) -> Result<EdgeRule> {
    match npts {
        2 | 3 => Ok(gauss_legendre(npts)),
        _ => Err(Error::InvalidArgument(format!(
            "unsupported edge rule size {npts} (expected 2 or 3)"
        ))),
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(npts: usize) -> EdgeRule {
    let n = npts;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        // Nodes come out descending on [-1, 1]; store ascending on [0, 1].
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    EdgeRule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[inline]
pub fn barycentric_to_point(tri: &[Point; 3], l: &[f64; 3]) -> Point {
    [
        l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
        l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
    ]
}

pub fn integrate_triangle<F: Fn(Point) -> f64>(f: F, tri: &[Point; 3], rule: &QuadratureRule) -> f64 {
    let area = signed_area(tri).abs();
    let sum: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| w * f(barycentric_to_point(tri, l)))
        .sum();
    area * sum
}

/// Integral over the segment `a -> b` with respect to arc length.
pub fn integrate_edge<F: Fn(Point) -> f64>(f: F, a: Point, b: Point, rule: &EdgeRule) -> f64 {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let sum: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))
        .sum();
    len * sum
}
