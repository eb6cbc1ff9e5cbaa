//! Eigenpairs of the reduced problem `S u = lambda D u` with `S = B M^{-1} B^T + C`.
//!
//! The flux is eliminated exactly, so the spectrum equals the finite part of
//! the saddle-point pencil. The flux eigenfunction is recovered afterwards as
//! `sigma = -M^{-1} B^T u`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, AssembledSystem};
use crate::coefficients::ProblemSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::{norm2, SkylineCholesky};

/// Residual contract: `||S u - lambda D u||_2 <= RESIDUAL_TOL * ||S||_F`.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const ITERATION_BUDGET: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverPath {
    #[default]
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub path: SolverPath,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            path: SolverPath::Dense,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda_h: f64,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub n: usize,
    pub h: f64,
    pub num_edges: usize,
    pub num_triangles: usize,
    pub pairs: Vec<EigenPair>,
    /// `||S||_F`, the scale of the residual contract.
    pub s_norm: f64,
    /// Diagonal of the weight mass `D`.
    pub d: Vec<f64>,
}

/// Dense Schur complement together with the flux-mass factorization used to build it.
pub struct ReducedOperator {
    pub s: Mat<f64>,
    pub m_factor: SkylineCholesky,
}

pub fn schur_complement(sys: &AssembledSystem) -> Result<ReducedOperator> {
    let m_factor = SkylineCholesky::factor(&sys.m)?;
    let nt = sys.num_triangles();
    let ne = sys.num_edges();
    let columns: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![0.0; ne];
            for (e, v) in sys.b.row(j) {
                x[e] = v;
            }
            m_factor.solve_in_place(&mut x);
            let mut col = sys.b.mul_vec(&x);
            col[j] += sys.c[j];
            col
        })
        .collect();
    let mut s = Mat::from_fn(nt, nt, |i, j| columns[j][i]);

    let mut scale: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for j in 0..nt {
        for i in 0..nt {
            scale = scale.max(s[(i, j)].abs());
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asym > 1e-11 * scale {
        return Err(Error::Factorization(format!(
            "Schur complement asymmetry {asym:e} exceeds tolerance (scale {scale:e})"
        )));
    }
    for j in 0..nt {
        for i in 0..j {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    Ok(ReducedOperator { s, m_factor })
}

/// `k` smallest eigenpairs of `S u = lambda D u`, ascending, `D`-orthonormal,
/// each vector signed so that its largest-magnitude entry is positive.
pub fn solve_gevp(s: &Mat<f64>, d: &[f64], k: usize, opts: &SolveOptions) -> Result<Vec<(f64, Vec<f64>)>> {
    let nt = d.len();
    if s.nrows() != nt || s.ncols() != nt {
        return Err(Error::InvalidArgument(format!(
            "operator is {}x{} but weight has length {nt}",
            s.nrows(),
            s.ncols()
        )));
    }
    if k == 0 || k > nt {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from a problem of dimension {nt}"
        )));
    }
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("weight entry {i} is not positive")));
    }
    let mut pairs = match opts.path {
        SolverPath::Dense => dense_smallest(s, d, k)?,
        SolverPath::Iterative => subspace_iteration(s, d, k, opts.seed)?,
    };
    for (_, u) in &mut pairs {
        normalize_and_sign(u, d);
    }

    let s_norm = frobenius(s);
    for (i, (lambda, u)) in pairs.iter().enumerate() {
        let r = residual(s, d, *lambda, u);
        if !(r <= RESIDUAL_TOL * s_norm) {
            return Err(Error::EigenSolve {
                index: i,
                reason: format!("residual {r:e} exceeds {:e}", RESIDUAL_TOL * s_norm),
            });
        }
    }
    Ok(pairs)
}

fn dense_smallest(s: &Mat<f64>, d: &[f64], k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let nt = d.len();
    let isq: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let sym = Mat::from_fn(nt, nt, |i, j| isq[i] * s[(i, j)] * isq[j]);
    let evd = sym.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigenSolve {
        index: 0,
        reason: format!("dense symmetric eigensolver did not converge: {e:?}"),
    })?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let mut order: Vec<usize> = (0..nt).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(order
        .into_iter()
        .take(k)
        .map(|j| {
            let u = (0..nt).map(|i| isq[i] * vectors[(i, j)]).collect();
            (values[j], u)
        })
        .collect())
}

/// Block inverse iteration with Rayleigh-Ritz on `span(S^{-1} D X)`.
fn subspace_iteration(s: &Mat<f64>, d: &[f64], k: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
    let nt = d.len();
    let p = nt.min((2 * k).max(k + 8));
    let llt = s.llt(Side::Lower).map_err(|e| {
        Error::Factorization(format!("Schur complement is not positive definite: {e:?}"))
    })?;
    let s_norm = frobenius(s);
    let tol = 0.1 * RESIDUAL_TOL * s_norm;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Mat::from_fn(nt, p, |_, _| rng.gen_range(-1.0..1.0));
    let mut worst = (0usize, f64::INFINITY);
    for _ in 0..ITERATION_BUDGET {
        let dx = Mat::from_fn(nt, p, |i, j| d[i] * x[(i, j)]);
        let y = llt.solve(&dx);
        let sy = s * &y;
        let sp = y.transpose() * &sy;
        let dp = Mat::from_fn(p, p, |i, j| (0..nt).map(|r| y[(r, i)] * d[r] * y[(r, j)]).sum::<f64>());
        let (theta, z) = small_gevp(&sp, &dp)?;
        x = &y * &z;
        let sx = &sy * &z;

        worst = (0, 0.0);
        let mut converged = true;
        for j in 0..k {
            let r: f64 = (0..nt)
                .map(|i| (sx[(i, j)] - theta[j] * d[i] * x[(i, j)]).powi(2))
                .sum::<f64>()
                .sqrt();
            if r > tol {
                converged = false;
                if r > worst.1 {
                    worst = (j, r);
                }
            }
        }
        if converged {
            return Ok((0..k)
                .map(|j| (theta[j], (0..nt).map(|i| x[(i, j)]).collect()))
                .collect());
        }
    }
    Err(Error::EigenSolve {
        index: worst.0,
        reason: format!(
            "subspace iteration did not converge in {ITERATION_BUDGET} iterations (residual {:e})",
            worst.1
        ),
    })
}

/// Ascending eigenpairs of the small pencil `(a, b)` with `b` SPD; vectors are `b`-orthonormal.
fn small_gevp(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let p = a.nrows();
    let llt = b.llt(Side::Lower).map_err(|e| Error::EigenSolve {
        index: 0,
        reason: format!("Ritz basis lost rank: {e:?}"),
    })?;
    let li = lower_inverse(&llt.L().to_owned());
    // C = L^{-1} A L^{-T}
    let c = &li * a * li.transpose();
    let c = Mat::from_fn(p, p, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigenSolve {
        index: 0,
        reason: format!("Ritz eigenproblem did not converge: {e:?}"),
    })?;
    let vals = evd.S().column_vector();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]));
    let w = li.transpose() * evd.U();
    let theta = order.iter().map(|&j| vals[j]).collect();
    let z = Mat::from_fn(p, p, |i, j| w[(i, order[j])]);
    Ok((theta, z))
}

fn lower_inverse(l: &Mat<f64>) -> Mat<f64> {
    let p = l.nrows();
    let mut inv = Mat::<f64>::zeros(p, p);
    for j in 0..p {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in j + 1..p {
            let s: f64 = (j..i).map(|m| l[(i, m)] * inv[(m, j)]).sum();
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Scales `u` to `u^T D u = 1` and makes its largest-magnitude entry positive
/// (lowest index on ties).
pub fn normalize_and_sign(u: &mut [f64], d: &[f64]) {
    let norm: f64 = u.iter().zip(d).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        u.iter_mut().for_each(|x| *x /= norm);
    }
    let mut best = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    if u.get(best).is_some_and(|&x| x < 0.0) {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn frobenius(s: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..s.ncols() {
        for i in 0..s.nrows() {
            acc += s[(i, j)] * s[(i, j)];
        }
    }
    acc.sqrt()
}

pub fn residual(s: &Mat<f64>, d: &[f64], lambda: f64, u: &[f64]) -> f64 {
    let nt = d.len();
    let mut r = vec![0.0; nt];
    for (j, &uj) in u.iter().enumerate() {
        if uj != 0.0 {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += s[(i, j)] * uj;
            }
        }
    }
    for i in 0..nt {
        r[i] -= lambda * d[i] * u[i];
    }
    norm2(&r)
}

/// `sigma = -M^{-1} B^T u`.
pub fn recover_flux(u: &[f64], sys: &AssembledSystem, m_factor: &SkylineCholesky) -> Vec<f64> {
    let mut sigma = sys.b.transpose_mul_vec(u);
    m_factor.solve_in_place(&mut sigma);
    sigma.iter_mut().for_each(|x| *x = -*x);
    sigma
}

/// Assemble, reduce and solve one mesh level.
pub fn solve_level(mesh: &Mesh, prob: &ProblemSpec, k: usize, opts: &SolveOptions) -> Result<EigenResult> {
    let run = || -> Result<EigenResult> {
        let sys = assemble(mesh, prob)?;
        let reduced = schur_complement(&sys)?;
        let raw = solve_gevp(&reduced.s, &sys.d, k, opts)?;
        let s_norm = frobenius(&reduced.s);
        let pairs = raw
            .into_iter()
            .map(|(lambda_h, u)| {
                let sigma = recover_flux(&u, &sys, &reduced.m_factor);
                let residual = residual(&reduced.s, &sys.d, lambda_h, &u);
                EigenPair {
                    lambda_h,
                    u,
                    sigma,
                    residual,
                }
            })
            .collect();
        Ok(EigenResult {
            n: mesh.n,
            h: mesh.h,
            num_edges: mesh.num_edges(),
            num_triangles: mesh.num_triangles(),
            pairs,
            s_norm,
            d: sys.d,
        })
    };
    run().map_err(|e| e.at_level(mesh.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::preset;
    use crate::mesh::{build_structured_mesh, Rectangle};

    fn unit(n: usize) -> Mesh {
        build_structured_mesh(Rectangle::unit_square(), n).unwrap()
    }

    #[test]
    fn identity_pencil() {
        let d = vec![0.5, 2.0, 1.0, 4.0];
        let s = Mat::from_fn(4, 4, |i, j| if i == j { d[i] } else { 0.0 });
        let pairs = solve_gevp(&s, &d, 4, &SolveOptions::default()).unwrap();
        for (lambda, _) in &pairs {
            assert!((lambda - 1.0).abs() < 1e-14);
        }
        for (i, (_, ui)) in pairs.iter().enumerate() {
            for (j, (_, uj)) in pairs.iter().enumerate() {
                let ip: f64 = (0..4).map(|r| ui[r] * d[r] * uj[r]).sum();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let s = Mat::<f64>::identity(3, 3);
        let d = vec![1.0; 3];
        assert!(solve_gevp(&s, &d, 0, &SolveOptions::default()).is_err());
        assert!(solve_gevp(&s, &d, 4, &SolveOptions::default()).is_err());
        assert!(solve_gevp(&s, &[1.0, 0.0, 1.0], 1, &SolveOptions::default()).is_err());
    }

    #[test]
    fn sign_convention() {
        let d = [1.0, 1.0, 1.0];
        let mut u = vec![0.5, -2.0, 1.0];
        normalize_and_sign(&mut u, &d);
        assert!(u[1] > 0.0);
        let nrm: f64 = u.iter().map(|x| x * x).sum();
        assert!((nrm - 1.0).abs() < 1e-15);
        // Tie: lowest index decides.
        let mut t = vec![-1.0, 1.0];
        normalize_and_sign(&mut t, &[1.0, 1.0]);
        assert!(t[0] > 0.0 && t[1] < 0.0);
    }

    #[test]
    fn laplace_schur_properties() {
        let mesh = unit(4);
        let sys = assemble(&mesh, &preset("laplace").unwrap()).unwrap();
        let red = schur_complement(&sys).unwrap();
        for i in 0..mesh.num_triangles() {
            assert!(red.s[(i, i)] > 0.0);
        }
        let shifted = schur_complement(&assemble(&mesh, &preset("shifted").unwrap()).unwrap()).unwrap();
        for i in 0..mesh.num_triangles() {
            for j in 0..mesh.num_triangles() {
                let expect = red.s[(i, j)] + if i == j { 5.0 * sys.d[i] } else { 0.0 };
                assert!((shifted.s[(i, j)] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn flux_recovery_residual() {
        let mesh = unit(4);
        let sys = assemble(&mesh, &preset("variable").unwrap()).unwrap();
        let red = schur_complement(&sys).unwrap();
        let pairs = solve_gevp(&red.s, &sys.d, 3, &SolveOptions::default()).unwrap();
        for (_, u) in &pairs {
            let sigma = recover_flux(u, &sys, &red.m_factor);
            let btu = sys.b.transpose_mul_vec(u);
            let ms = sys.m.mul_vec(&sigma);
            let r: Vec<f64> = ms.iter().zip(&btu).map(|(a, b)| a + b).collect();
            assert!(norm2(&r) <= 1e-11 * norm2(&btu));
        }
        let zero = recover_flux(&vec![0.0; mesh.num_triangles()], &sys, &red.m_factor);
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn iterative_matches_dense() {
        let mesh = unit(6);
        let prob = preset("variable").unwrap();
        let dense = solve_level(&mesh, &prob, 5, &SolveOptions::default()).unwrap();
        let iter = solve_level(
            &mesh,
            &prob,
            5,
            &SolveOptions {
                path: SolverPath::Iterative,
                seed: 11,
            },
        )
        .unwrap();
        for (a, b) in dense.pairs.iter().zip(&iter.pairs) {
            assert!((a.lambda_h - b.lambda_h).abs() < 1e-9 * a.lambda_h);
            assert!(b.residual <= RESIDUAL_TOL * iter.s_norm);
        }
        // Simple eigenvalues: identical vectors after the sign convention.
        let diff: f64 = dense.pairs[0]
            .u
            .iter()
            .zip(&iter.pairs[0].u)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-7);
    }

    #[test]
    fn eigenvalues_positive_and_ascending() {
        let res = solve_level(&unit(4), &preset("variable").unwrap(), 6, &SolveOptions::default()).unwrap();
        assert_eq!(res.pairs.len(), 6);
        assert!(res.pairs[0].lambda_h > 0.0);
        assert!(res.pairs.windows(2).all(|w| w[0].lambda_h <= w[1].lambda_h));
    }
}
