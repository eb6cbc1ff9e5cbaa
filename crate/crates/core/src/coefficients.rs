//! Coefficient fields of the operator `-div(A grad u) + c u = lambda b u`
//! with homogeneous Dirichlet data on a rectangle.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Point, Rectangle};

pub type Tensor = [[f64; 2]; 2];

/// Pointwise coefficient evaluation. Implementations must be pure functions of the point.
pub trait Coefficients: Send + Sync {
    fn diffusion(&self, p: Point) -> Tensor;
    fn reaction(&self, p: Point) -> f64;
    fn weight(&self, p: Point) -> f64;

    /// `Some(c)` when `A = I`, `b = 1` and `c` is the constant returned, so the
    /// exact spectrum is the Dirichlet Laplacian's shifted by `c`.
    fn laplace_shift(&self) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Rectangle,
    pub coefficients: Arc<dyn Coefficients>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

pub const SPD_FLOOR: f64 = 1e-12;

impl ProblemSpec {
    pub fn new(name: impl Into<String>, domain: Rectangle, coefficients: Arc<dyn Coefficients>) -> Result<Self> {
        domain.validate()?;
        Ok(ProblemSpec {
            name: name.into(),
            domain,
            coefficients,
        })
    }

    pub fn diffusion(&self, p: Point) -> Tensor {
        self.coefficients.diffusion(p)
    }

    pub fn reaction(&self, p: Point) -> f64 {
        self.coefficients.reaction(p)
    }

    pub fn weight(&self, p: Point) -> f64 {
        self.coefficients.weight(p)
    }

    /// Checks the coefficient invariants at `p` and returns `A^{-1}` there.
    pub fn check_point(&self, p: Point) -> Result<Tensor> {
        let a = self.diffusion(p);
        let fail = |what: String| Error::Coefficient {
            problem: self.name.clone(),
            x: p[0],
            y: p[1],
            what,
        };
        let scale = a[0][1].abs().max(a[1][0].abs()).max(1.0);
        if (a[0][1] - a[1][0]).abs() > 1e-14 * scale {
            return Err(fail(format!("diffusion tensor not symmetric: {a:?}")));
        }
        let (lo, _) = sym_eigenvalues(&a);
        if !(lo >= SPD_FLOOR) {
            return Err(fail(format!("diffusion tensor smallest eigenvalue {lo:e} below {SPD_FLOOR:e}")));
        }
        let c = self.reaction(p);
        if !(c >= 0.0) {
            return Err(fail(format!("reaction coefficient {c} is negative")));
        }
        let b = self.weight(p);
        if !(b >= SPD_FLOOR) {
            return Err(fail(format!("weight coefficient {b} below {SPD_FLOOR:e}")));
        }
        invert_spd(&a).ok_or_else(|| fail("diffusion tensor determinant below 1e-12".into()))
    }
}

/// Closed-form inverse of a symmetric 2x2 matrix; `None` when `det < 1e-12`.
pub fn invert_spd(a: &Tensor) -> Option<Tensor> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det >= SPD_FLOOR) {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

fn sym_eigenvalues(a: &Tensor) -> (f64, f64) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let r = (0.5 * (a[0][0] - a[1][1])).hypot(a[0][1]);
    (mean - r, mean + r)
}

/// `A = I`, constant `c`, `b = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedLaplace {
    pub shift: f64,
}

impl Coefficients for ShiftedLaplace {
    fn diffusion(&self, _: Point) -> Tensor {
        [[1.0, 0.0], [0.0, 1.0]]
    }
    fn reaction(&self, _: Point) -> f64 {
        self.shift
    }
    fn weight(&self, _: Point) -> f64 {
        1.0
    }
    fn laplace_shift(&self) -> Option<f64> {
        Some(self.shift)
    }
}

/// `A = diag(1 + x, 1 + y)`, `c = x y`, `b = 1 + (x + y) / 4`.
#[derive(Debug, Clone, Copy)]
pub struct VariableCoefficients;

impl Coefficients for VariableCoefficients {
    fn diffusion(&self, p: Point) -> Tensor {
        [[1.0 + p[0], 0.0], [0.0, 1.0 + p[1]]]
    }
    fn reaction(&self, p: Point) -> f64 {
        p[0] * p[1]
    }
    fn weight(&self, p: Point) -> f64 {
        1.0 + 0.25 * (p[0] + p[1])
    }
}

pub const PRESETS: [(&str, &str); 3] = [
    ("laplace", "A = I, c = 0, b = 1 on the unit square (analytic eigenpairs)"),
    ("shifted", "A = I, c = 5, b = 1 on the unit square (analytic eigenpairs)"),
    ("variable", "A = diag(1+x, 1+y), c = x*y, b = 1 + (x+y)/4 on the unit square"),
];

pub fn preset(name: &str) -> Result<ProblemSpec> {
    let coefficients: Arc<dyn Coefficients> = match name {
        "laplace" => Arc::new(ShiftedLaplace { shift: 0.0 }),
        "shifted" => Arc::new(ShiftedLaplace { shift: 5.0 }),
        "variable" => Arc::new(VariableCoefficients),
        _ => {
            let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(Error::Config(format!(
                "unknown preset `{name}` (known: {})",
                known.join(", ")
            )));
        }
    };
    ProblemSpec::new(name, Rectangle::unit_square(), coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn presets_satisfy_invariants_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (name, _) in PRESETS {
            let prob = preset(name).unwrap();
            let d = prob.domain;
            for _ in 0..10_000 {
                let p = [rng.gen_range(d.x0..=d.x1), rng.gen_range(d.y0..=d.y1)];
                let inv = prob.check_point(p).unwrap();
                let a = prob.diffusion(p);
                let id = [
                    a[0][0] * inv[0][0] + a[0][1] * inv[1][0],
                    a[0][0] * inv[0][1] + a[0][1] * inv[1][1],
                    a[1][0] * inv[0][0] + a[1][1] * inv[1][0],
                    a[1][0] * inv[0][1] + a[1][1] * inv[1][1],
                ];
                assert!((id[0] - 1.0).abs() < 1e-14 && id[1].abs() < 1e-14);
                assert!(id[2].abs() < 1e-14 && (id[3] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("helmholtz"), Err(Error::Config(_))));
    }

    struct Bad;
    impl Coefficients for Bad {
        fn diffusion(&self, p: Point) -> Tensor {
            [[1.0, 0.0], [0.0, p[0] - 0.5]]
        }
        fn reaction(&self, _: Point) -> f64 {
            0.0
        }
        fn weight(&self, _: Point) -> f64 {
            1.0
        }
    }

    #[test]
    fn violations_name_the_location() {
        let prob = ProblemSpec::new("bad", Rectangle::unit_square(), Arc::new(Bad)).unwrap();
        assert!(prob.check_point([0.9, 0.1]).is_ok());
        match prob.check_point([0.25, 0.75]) {
            Err(Error::Coefficient { x, y, .. }) => assert_eq!((x, y), (0.25, 0.75)),
            other => panic!("expected coefficient error, got {other:?}"),
        }
        let neg = ProblemSpec::new(
            "neg",
            Rectangle::unit_square(),
            Arc::new(ShiftedLaplace { shift: -1.0 }),
        )
        .unwrap();
        assert!(neg.check_point([0.5, 0.5]).is_err());
    }

    #[test]
    fn inverse_guard() {
        assert!(invert_spd(&[[1e-7, 0.0], [0.0, 1e-7]]).is_none());
        let inv = invert_spd(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!((inv[0][0] - 2.0 / 3.0).abs() < 1e-15 && (inv[0][1] + 1.0 / 3.0).abs() < 1e-15);
    }
}
