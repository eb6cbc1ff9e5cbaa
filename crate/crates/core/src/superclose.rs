//! Mixed projection of exact eigenfunctions and the distances to discrete ones.
//!
//! The projection pair is the P0 elementwise mean for `u` and the RT0 edge-flux
//! interpolant for `sigma = A grad u`. Exact eigenpairs are available for
//! problems whose spectrum is a shifted Dirichlet Laplacian on a rectangle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::rt0_basis;
use crate::coefficients::ProblemSpec;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Rectangle};
use crate::quadrature::{integrate_edge, integrate_triangle, EdgeRule, QuadratureRule};

/// `u = 2/sqrt(ab) sin(m pi (x - x0)/a) sin(n pi (y - y0)/b)`, normalized in L2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEigenpair {
    pub lambda: f64,
    pub m: usize,
    pub n: usize,
    pub domain: Rectangle,
    /// Multiplicity of `lambda` in the exact spectrum.
    pub multiplicity: usize,
}

impl AnalyticEigenpair {
    fn parts(&self, p: Point) -> (f64, f64, f64, f64, f64) {
        let a = self.domain.x1 - self.domain.x0;
        let b = self.domain.y1 - self.domain.y0;
        let kx = self.m as f64 * PI / a;
        let ky = self.n as f64 * PI / b;
        let amp = 2.0 / (a * b).sqrt();
        let (sx, cx) = (kx * (p[0] - self.domain.x0)).sin_cos();
        let (sy, cy) = (ky * (p[1] - self.domain.y0)).sin_cos();
        (amp, kx * cx, sx, ky * cy, sy)
    }

    pub fn u(&self, p: Point) -> f64 {
        let (amp, _, sx, _, sy) = self.parts(p);
        amp * sx * sy
    }

    pub fn grad_u(&self, p: Point) -> [f64; 2] {
        let (amp, dx, sx, dy, sy) = self.parts(p);
        [amp * dx * sy, amp * sx * dy]
    }

    /// `div grad u = -(kx^2 + ky^2) u`.
    pub fn laplacian_u(&self, p: Point) -> f64 {
        let a = self.domain.x1 - self.domain.x0;
        let b = self.domain.y1 - self.domain.y0;
        let k2 = (self.m as f64 * PI / a).powi(2) + (self.n as f64 * PI / b).powi(2);
        -k2 * self.u(p)
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }
}

/// The `count` smallest exact eigenpairs, ordered by `(lambda, m, n)`, when the
/// problem is a shifted Laplacian.
pub fn analytic_eigenpairs(prob: &ProblemSpec, count: usize) -> Option<Vec<AnalyticEigenpair>> {
    let shift = prob.coefficients.laplace_shift()?;
    let d = prob.domain;
    let a = d.x1 - d.x0;
    let b = d.y1 - d.y0;
    let lam = |m: usize, n: usize| PI * PI * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b)) + shift;
    let bound = count + 1;
    let mut modes: Vec<(f64, usize, usize)> = (1..=bound)
        .flat_map(|m| (1..=bound).map(move |n| (m, n)))
        .map(|(m, n)| (lam(m, n), m, n))
        .collect();
    modes.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    modes.truncate(count);
    Some(
        modes
            .into_iter()
            .map(|(lambda, m, n)| {
                // Every mode with this eigenvalue has both indices below
                // sqrt(lambda - shift) * side / pi.
                let mmax = ((lambda - shift).sqrt() * a / PI).ceil() as usize + 1;
                let nmax = ((lambda - shift).sqrt() * b / PI).ceil() as usize + 1;
                let multiplicity = (1..=mmax)
                    .flat_map(|i| (1..=nmax).map(move |j| (i, j)))
                    .filter(|&(i, j)| (lam(i, j) - lambda).abs() <= 1e-12 * lambda.abs().max(1.0))
                    .count();
                AnalyticEigenpair {
                    lambda,
                    m,
                    n,
                    domain: d,
                    multiplicity,
                }
            })
            .collect(),
    )
}

/// Elementwise means.
pub fn p0_project<F: Fn(Point) -> f64>(u: F, mesh: &Mesh, rule: &QuadratureRule) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangle_points(t);
            integrate_triangle(&u, &tri, rule) / mesh.triangle_area(t)
        })
        .collect()
}

/// Edge fluxes `int_e sigma . n_e ds` against the global edge normal.
pub fn fortin_interpolate<F: Fn(Point) -> [f64; 2]>(sigma: F, mesh: &Mesh, rule: &EdgeRule) -> Vec<f64> {
    (0..mesh.num_edges())
        .map(|e| {
            let [a, b] = mesh.edge_points(e);
            let n = mesh.edge_normal(e);
            integrate_edge(
                |x| {
                    let s = sigma(x);
                    s[0] * n[0] + s[1] * n[1]
                },
                a,
                b,
                rule,
            )
        })
        .collect()
}

/// Converts edge fluxes to coefficients of the assembled RT0 basis, whose
/// functions carry unit normal component (total flux `|e|`).
pub fn fortin_coefficients(mesh: &Mesh, fluxes: &[f64]) -> Vec<f64> {
    fluxes
        .iter()
        .enumerate()
        .map(|(e, f)| f / mesh.edge_length(e))
        .collect()
}

/// Evaluates the RT0 field with edge coefficients `coef` at `x` in triangle `t`.
pub fn rt0_field(mesh: &Mesh, coef: &[f64], t: usize, x: Point) -> [f64; 2] {
    let tri = mesh.triangle_points(t);
    let signs = mesh.triangle_signs(t);
    let mut v = [0.0; 2];
    for (i, r) in mesh.triangle_edges[t].iter().enumerate() {
        let phi = rt0_basis(&tri, signs, i, x);
        v[0] += coef[r.edge] * phi[0];
        v[1] += coef[r.edge] * phi[1];
    }
    v
}

fn weighted_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| x * w * y).sum()
}

/// `sqrt((u_h - Pu)^T W (u_h - Pu))` after scaling both to unit `W`-norm and
/// flipping `u_h` when it points away from `Pu`.
pub fn superclose_distance(u_h: &[f64], pu: &[f64], weights: &[f64]) -> Result<f64> {
    let pn = weighted_dot(pu, pu, weights).sqrt();
    if !(pn > 0.0) {
        return Err(Error::InvalidArgument("projection of the exact eigenfunction is zero".into()));
    }
    let un = weighted_dot(u_h, u_h, weights).sqrt();
    if !(un > 0.0) {
        return Err(Error::InvalidArgument("discrete eigenfunction is zero".into()));
    }
    let sign = if weighted_dot(u_h, pu, weights) < 0.0 { -1.0 } else { 1.0 };
    let d2: f64 = u_h
        .iter()
        .zip(pu)
        .zip(weights)
        .map(|((u, p), w)| w * (sign * u / un - p / pn).powi(2))
        .sum();
    Ok(d2.max(0.0).sqrt())
}

/// Sign (+1 or -1) aligning `u_h` with `Pu` in the `weights` inner product.
pub fn alignment_sign(u_h: &[f64], pu: &[f64], weights: &[f64]) -> f64 {
    if weighted_dot(u_h, pu, weights) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Errors {
    pub err_u: f64,
    pub err_sigma: f64,
}

/// Broken L2 errors of the scalar and flux eigenfunctions against an exact
/// Laplacian eigenpair (`sigma = grad u`), with the discrete pair sign-aligned
/// to the P0 projection in the `D` inner product.
pub fn l2_errors(
    u_h: &[f64],
    sigma_h: &[f64],
    exact: &AnalyticEigenpair,
    mesh: &Mesh,
    d: &[f64],
    rule: &QuadratureRule,
) -> L2Errors {
    let pu = p0_project(|x| exact.u(x), mesh, rule);
    let sign = alignment_sign(u_h, &pu, d);
    let mut eu = 0.0;
    let mut es = 0.0;
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle_points(t);
        let ut = sign * u_h[t];
        eu += integrate_triangle(|x| (exact.u(x) - ut).powi(2), &tri, rule);
        es += integrate_triangle(
            |x| {
                let g = exact.grad_u(x);
                let s = rt0_field(mesh, sigma_h, t, x);
                (g[0] - sign * s[0]).powi(2) + (g[1] - sign * s[1]).powi(2)
            },
            &tri,
            rule,
        );
    }
    L2Errors {
        err_u: eu.sqrt(),
        err_sigma: es.sqrt(),
    }
}
