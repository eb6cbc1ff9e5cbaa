mod common;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{commuting_residual, saddle_point_eigenvalues, symbolic_flux_mass, unit_mesh};
use mixed_eigen::assembly::{assemble, element_flux_mass};
use mixed_eigen::coefficients::preset;
use mixed_eigen::eigensolver::{schur_complement, solve_level, SolveOptions, SolverPath};
use mixed_eigen::mesh::Point;
use mixed_eigen::quadrature::triangle_rule;

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

fn flux_mass_error(tri: &[Point; 3], signs: [i8; 3]) -> f64 {
    let rule = triangle_rule(2).unwrap();
    let got = element_flux_mass(tri, signs, |_| Ok(IDENTITY), &rule).unwrap();
    let want = symbolic_flux_mass(tri, signs);
    let scale = want.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (got[i][j] - want[i][j]).abs())
        .fold(0.0, f64::max);
    err / scale
}

#[test]
fn flux_mass_reference_triangle() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    assert!(flux_mass_error(&tri, [1, 1, 1]) < 1e-12);
    assert!(flux_mass_error(&tri, [1, -1, 1]) < 1e-12);
    // Diagonal entry for the hypotenuse: (sqrt 2)^2 * int |x|^2 = 2 * 1/6.
    let m = symbolic_flux_mass(&tri, [1, 1, 1]);
    assert_relative_eq!(m[0][0], 1.0 / 3.0, max_relative = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flux_mass_matches_symbolic_oracle(
        coords in prop::array::uniform6(-3.0f64..3.0),
        flips in prop::array::uniform3(any::<bool>()),
    ) {
        let tri = [[coords[0], coords[1]], [coords[2], coords[3]], [coords[4], coords[5]]];
        let area = mixed_eigen::mesh::signed_area(&tri).abs();
        let longest = (0..3)
            .map(|i| mixed_eigen::mesh::distance(tri[i], tri[(i + 1) % 3]))
            .fold(0.0, f64::max);
        prop_assume!(area > 1e-2 * longest * longest);
        let signs = flips.map(|f| if f { -1 } else { 1 });
        prop_assert!(flux_mass_error(&tri, signs) < 1e-12);
    }
}

#[test]
fn schur_matches_saddle_point_pencil() {
    for name in ["laplace", "shifted", "variable"] {
        let prob = preset(name).unwrap();
        for n in [1, 2, 3] {
            let mesh = unit_mesh(n);
            let sys = assemble(&mesh, &prob).unwrap();
            let full = saddle_point_eigenvalues(&sys);
            let reduced = solve_level(&mesh, &prob, sys.num_triangles(), &SolveOptions::default()).unwrap();
            for (pair, want) in reduced.pairs.iter().zip(&full) {
                assert_relative_eq!(pair.lambda_h, *want, max_relative = 1e-9);
            }
        }
    }
}

#[test]
fn two_by_two_schur_by_hand() {
    // n = 1: two triangles, five edges. Eliminate the flux densely.
    let prob = preset("shifted").unwrap();
    let sys = assemble(&unit_mesh(1), &prob).unwrap();
    let m = DMatrix::from_fn(5, 5, |i, j| sys.m.get(i, j));
    let b = DMatrix::from_fn(2, 5, |i, j| sys.b.get(i, j));
    let want = &b * m.try_inverse().unwrap() * b.transpose() + DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sys.c.clone()));
    let got = schur_complement(&sys).unwrap().s;
    for i in 0..2 {
        for j in 0..2 {
            assert_relative_eq!(got[(i, j)], want[(i, j)], max_relative = 1e-13);
        }
    }
}

#[test]
fn iterative_path_matches_oracle() {
    let prob = preset("laplace").unwrap();
    let mesh = unit_mesh(3);
    let sys = assemble(&mesh, &prob).unwrap();
    let full = saddle_point_eigenvalues(&sys);
    let opts = SolveOptions {
        path: SolverPath::Iterative,
        seed: 7,
    };
    let res = solve_level(&mesh, &prob, 5, &opts).unwrap();
    for (pair, want) in res.pairs.iter().zip(&full) {
        assert_relative_eq!(pair.lambda_h, *want, max_relative = 1e-9);
    }
}

#[test]
fn commuting_diagram_converges() {
    let r8 = commuting_residual(8);
    assert!(r8 <= 1e-8, "residual {r8:e}");
    // Edge-quadrature error only: shrinks quickly with h.
    assert!(commuting_residual(16) < r8);
}
