#![allow(dead_code)]

use nalgebra::DMatrix;

use mixed_eigen::assembly::{assemble, AssembledSystem};
use mixed_eigen::coefficients::preset;
use mixed_eigen::mesh::{build_structured_mesh, signed_area, Mesh, Point, Rectangle};
use mixed_eigen::quadrature::{collapsed_gauss_rule, edge_rule, integrate_triangle};
use mixed_eigen::superclose::{analytic_eigenpairs, fortin_coefficients, fortin_interpolate};

pub fn unit_mesh(n: usize) -> Mesh {
    build_structured_mesh(Rectangle::unit_square(), n).unwrap()
}

/// Eigenvalues of the full pencil `[M B^T; B -C] x = lambda [0 0; 0 -D] x`,
/// ascending. Computed from the nonzero eigenvalues `mu = 1/lambda` of
/// `K^{-1} G`, without forming any Schur complement.
pub fn saddle_point_eigenvalues(sys: &AssembledSystem) -> Vec<f64> {
    let ne = sys.num_edges();
    let nt = sys.num_triangles();
    let dim = ne + nt;
    let m = sys.m.to_dense();
    let b = sys.b.to_dense();
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..ne {
        for j in 0..ne {
            k[(i, j)] = m[i][j];
        }
    }
    for t in 0..nt {
        for e in 0..ne {
            k[(ne + t, e)] = b[t][e];
            k[(e, ne + t)] = b[t][e];
        }
        k[(ne + t, ne + t)] = -sys.c[t];
        g[(ne + t, ne + t)] = -sys.d[t];
    }
    let kinv = k.lu().try_inverse().expect("saddle-point matrix is nonsingular");
    let a = kinv * g;
    let mu = a.complex_eigenvalues();
    let scale = mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lambdas: Vec<f64> = mu
        .iter()
        .filter(|z| z.norm() > 1e-10 * scale)
        .map(|z| {
            assert!(z.im.abs() <= 1e-10 * z.norm(), "complex eigenvalue {z}");
            1.0 / z.re
        })
        .collect();
    lambdas.sort_by(f64::total_cmp);
    assert_eq!(lambdas.len(), nt);
    lambdas
}

/// Exact flux-mass matrix for `A = I`, from the affine map `x = p0 + J xi`
/// and the reference moments `int 1 = 1/2`, `int xi_k = 1/6`,
/// `int xi_k^2 = 1/12`, `int xi_1 xi_2 = 1/24`.
pub fn symbolic_flux_mass(tri: &[Point; 3], signs: [i8; 3]) -> [[f64; 3]; 3] {
    let p0 = tri[0];
    let jac = [
        [tri[1][0] - p0[0], tri[2][0] - p0[0]],
        [tri[1][1] - p0[1], tri[2][1] - p0[1]],
    ];
    let det = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]).abs();
    let area = 0.5 * det;
    let len = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let lens = [len(tri[1], tri[2]), len(tri[2], tri[0]), len(tri[0], tri[1])];
    let coef: [f64; 3] = std::array::from_fn(|i| f64::from(signs[i]) * lens[i] / (2.0 * area));
    // J^T J and the offsets a_i = p0 - p_i.
    let jtj = [
        [
            jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0],
            jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1],
        ],
        [
            jac[0][1] * jac[0][0] + jac[1][1] * jac[1][0],
            jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1],
        ],
    ];
    let offs: [[f64; 2]; 3] = std::array::from_fn(|i| [p0[0] - tri[i][0], p0[1] - tri[i][1]]);
    let jt = |a: [f64; 2]| [jac[0][0] * a[0] + jac[1][0] * a[1], jac[0][1] * a[0] + jac[1][1] * a[1]];
    let quad = jtj[0][0] / 12.0 + jtj[1][1] / 12.0 + (jtj[0][1] + jtj[1][0]) / 24.0;
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (ai, aj) = (offs[i], offs[j]);
            let lin = jt([ai[0] + aj[0], ai[1] + aj[1]]);
            let reference = (ai[0] * aj[0] + ai[1] * aj[1]) / 2.0 + (lin[0] + lin[1]) / 6.0 + quad;
            coef[i] * coef[j] * det * reference
        })
    })
}

pub fn random_triangle(rng: &mut impl rand::Rng) -> [Point; 3] {
    loop {
        let tri: [Point; 3] = std::array::from_fn(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
        if signed_area(&tri).abs() > 0.05 {
            return tri;
        }
    }
}

/// `max_T |(B Pi_h sigma)_T - int_T div sigma|` for the first laplace mode, `sigma = grad u`.
pub fn commuting_residual(n: usize) -> f64 {
    let prob = preset("laplace").unwrap();
    let mesh = unit_mesh(n);
    let sys = assemble(&mesh, &prob).unwrap();
    let mode = analytic_eigenpairs(&prob, 1).unwrap().remove(0);
    let fluxes = fortin_interpolate(|x| mode.grad_u(x), &mesh, &edge_rule(3).unwrap());
    let coef = fortin_coefficients(&mesh, &fluxes);
    let bpi = sys.b.mul_vec(&coef);
    let rule = collapsed_gauss_rule(8).unwrap();
    (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangle_points(t);
            let div = integrate_triangle(|x| mode.laplacian_u(x), &tri, &rule);
            (bpi[t] - div).abs()
        })
        .fold(0.0, f64::max)
}
