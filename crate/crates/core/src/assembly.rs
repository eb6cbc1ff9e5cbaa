//! RT0 x P0 mixed matrices.
//!
//! On a triangle with vertices `p0, p1, p2` the flux basis function attached
//! to the edge `e_i` opposite `p_i` is
//!
//! ```text
//! phi_i(x) = s_i |e_i| / (2 |T|) (x - p_i)
//! ```
//!
//! with `s_i` the global orientation sign, so `phi_i . n_i = s_i` on `e_i` and
//! `div phi_i = s_i |e_i| / |T|`. The discrete problem is
//!
//! ```text
//! (A^{-1} sigma, tau) + (u, div tau)              = 0
//! (div sigma, v)      - (c u, v) = -lambda (b u, v)
//! ```
//!
//! giving the blocks `M`, `B`, `C`, `D` below. Dirichlet data is natural, so
//! every edge carries an unknown.

use rayon::prelude::*;

use crate::coefficients::{ProblemSpec, Tensor};
use crate::error::{Error, Result};
use crate::mesh::{distance, signed_area, Mesh, Point};
use crate::quadrature::{barycentric_to_point, triangle_rule, QuadratureRule};
use crate::sparse::{CooMatrix, CsrMatrix};

pub const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// `E x E`, entries `(A^{-1} phi_i, phi_j)`.
    pub m: CsrMatrix,
    /// `T x E`, entries `int_T div phi_j`.
    pub b: CsrMatrix,
    /// Diagonal of the reaction mass, `int_T c`.
    pub c: Vec<f64>,
    /// Diagonal of the weight mass, `int_T b`.
    pub d: Vec<f64>,
}

impl AssembledSystem {
    pub fn num_edges(&self) -> usize {
        self.m.nrows
    }

    pub fn num_triangles(&self) -> usize {
        self.b.nrows
    }
}

fn checked_area(tri: &[Point; 3]) -> Result<f64> {
    let area = signed_area(tri);
    if area.abs() < DEGENERATE_AREA {
        return Err(Error::DegenerateTriangle { area });
    }
    Ok(area.abs())
}

fn edge_lengths(tri: &[Point; 3]) -> [f64; 3] {
    [
        distance(tri[1], tri[2]),
        distance(tri[2], tri[0]),
        distance(tri[0], tri[1]),
    ]
}

/// Value of the local RT0 basis function `i` at `x`.
pub fn rt0_basis(tri: &[Point; 3], signs: [i8; 3], i: usize, x: Point) -> [f64; 2] {
    let area = signed_area(tri).abs();
    let len = edge_lengths(tri)[i];
    let scale = f64::from(signs[i]) * len / (2.0 * area);
    [scale * (x[0] - tri[i][0]), scale * (x[1] - tri[i][1])]
}

pub fn element_flux_mass<F>(
    tri: &[Point; 3],
    signs: [i8; 3],
    ainv: F,
    rule: &QuadratureRule,
) -> Result<[[f64; 3]; 3]>
where
    F: Fn(Point) -> Result<Tensor>,
{
    let area = checked_area(tri)?;
    let mut local = [[0.0; 3]; 3];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let x = barycentric_to_point(tri, l);
        let k = ainv(x)?;
        let phi: [[f64; 2]; 3] = std::array::from_fn(|i| rt0_basis(tri, signs, i, x));
        for i in 0..3 {
            let kphi = [
                k[0][0] * phi[i][0] + k[0][1] * phi[i][1],
                k[1][0] * phi[i][0] + k[1][1] * phi[i][1],
            ];
            for j in 0..3 {
                local[i][j] += w * area * (kphi[0] * phi[j][0] + kphi[1] * phi[j][1]);
            }
        }
    }
    // Symmetrize the rounding.
    for i in 0..3 {
        for j in 0..i {
            let avg = 0.5 * (local[i][j] + local[j][i]);
            local[i][j] = avg;
            local[j][i] = avg;
        }
    }
    Ok(local)
}

pub fn element_div(tri: &[Point; 3], signs: [i8; 3]) -> Result<[f64; 3]> {
    checked_area(tri)?;
    let len = edge_lengths(tri);
    Ok(std::array::from_fn(|i| f64::from(signs[i]) * len[i]))
}

pub fn element_scalar_mass<F: Fn(Point) -> f64>(tri: &[Point; 3], coeff: F, rule: &QuadratureRule) -> f64 {
    crate::quadrature::integrate_triangle(coeff, tri, rule)
}

pub fn assemble(mesh: &Mesh, prob: &ProblemSpec) -> Result<AssembledSystem> {
    assemble_with_rule(mesh, prob, &triangle_rule(2)?)
}

struct ElementBlocks {
    flux: [[f64; 3]; 3],
    div: [f64; 3],
    reaction: f64,
    weight: f64,
}

pub fn assemble_with_rule(mesh: &Mesh, prob: &ProblemSpec, rule: &QuadratureRule) -> Result<AssembledSystem> {
    let (r, d) = (mesh.rect, prob.domain);
    let tol = 1e-12 * (r.x1 - r.x0).abs().max((r.y1 - r.y0).abs());
    if (r.x0 - d.x0).abs() > tol || (r.x1 - d.x1).abs() > tol || (r.y0 - d.y0).abs() > tol || (r.y1 - d.y1).abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "mesh rectangle {r:?} differs from problem domain {d:?}"
        )));
    }

    let blocks: Vec<ElementBlocks> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle_points(t);
            let signs = mesh.triangle_signs(t);
            let flux = element_flux_mass(&tri, signs, |x| prob.check_point(x), rule)?;
            let div = element_div(&tri, signs)?;
            let reaction = element_scalar_mass(&tri, |x| prob.reaction(x), rule);
            let weight = element_scalar_mass(&tri, |x| prob.weight(x), rule);
            Ok(ElementBlocks {
                flux,
                div,
                reaction,
                weight,
            })
        })
        .collect::<Result<_>>()?;

    let ne = mesh.num_edges();
    let nt = mesh.num_triangles();
    let mut m = CooMatrix::with_capacity(ne, ne, 9 * nt);
    let mut b = CooMatrix::with_capacity(nt, ne, 3 * nt);
    let mut c = Vec::with_capacity(nt);
    let mut dm = Vec::with_capacity(nt);
    for (t, blk) in blocks.iter().enumerate() {
        let dofs = mesh.triangle_edges[t].map(|r| r.edge);
        for i in 0..3 {
            for j in 0..3 {
                m.push(dofs[i], dofs[j], blk.flux[i][j]);
            }
            b.push(t, dofs[i], blk.div[i]);
        }
        c.push(blk.reaction);
        dm.push(blk.weight);
    }
    Ok(AssembledSystem {
        m: m.to_csr(),
        b: b.to_csr(),
        c,
        d: dm,
    })
}
