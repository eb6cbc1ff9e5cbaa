//! Study configuration, read from a strict TOML file.
//!
//! ```toml
//! [study]
//! preset = "laplace"
//! levels = [8, 16, 32]
//! k = 4
//! order = 2.0
//!
//! [solver]
//! path = "dense"      # or "iterative"
//! seed = 0
//!
//! [output]
//! dir = "out"
//! superclose = true
//! dump_matrices = false
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::preset;
use crate::eigensolver::SolverPath;
use crate::error::{Error, Result};
use crate::extrapolation::validate_levels;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub preset: String,
    pub levels: Vec<usize>,
    pub k: usize,
    pub order: f64,
    pub compute_superclose: bool,
    pub dump_matrices: bool,
    pub solver: SolverPath,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            preset: "laplace".into(),
            levels: vec![8, 16, 32],
            k: 4,
            order: 2.0,
            compute_superclose: true,
            dump_matrices: false,
            solver: SolverPath::Dense,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    study: StudySection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudySection {
    preset: String,
    levels: Vec<usize>,
    k: usize,
    #[serde(default = "default_order")]
    order: f64,
}

fn default_order() -> f64 {
    2.0
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    #[serde(default)]
    path: SolverPath,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default = "yes")]
    superclose: bool,
    #[serde(default)]
    dump_matrices: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            superclose: true,
            dump_matrices: false,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = StudyConfig {
            preset: file.study.preset,
            levels: file.study.levels,
            k: file.study.k,
            order: file.study.order,
            compute_superclose: file.output.superclose,
            dump_matrices: file.output.dump_matrices,
            solver: file.solver.path,
            seed: file.solver.seed,
            output_dir: file.output.dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        preset(&self.preset)?;
        validate_levels(&self.levels)?;
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let coarsest = 2 * self.levels[0] * self.levels[0];
        if self.k > coarsest {
            return Err(Error::Config(format!(
                "k = {} exceeds the {coarsest} unknowns of the coarsest level",
                self.k
            )));
        }
        if !(self.order > 0.0) || !self.order.is_finite() {
            return Err(Error::Config(format!("expansion order must be positive, got {}", self.order)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[study]
preset = "shifted"
levels = [4, 8]
k = 3
order = 2.0

[solver]
path = "iterative"
seed = 42

[output]
dir = "results"
superclose = false
dump_matrices = true
"#;

    #[test]
    fn parses_full_file() {
        let cfg = StudyConfig::from_toml_str(FULL).unwrap();
        assert_eq!(cfg.preset, "shifted");
        assert_eq!(cfg.levels, vec![4, 8]);
        assert_eq!(cfg.solver, SolverPath::Iterative);
        assert_eq!(cfg.seed, 42);
        assert!(!cfg.compute_superclose && cfg.dump_matrices);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn defaults() {
        let cfg = StudyConfig::from_toml_str("[study]\npreset = \"laplace\"\nlevels = [8, 16]\nk = 2\n").unwrap();
        assert_eq!(cfg.order, 2.0);
        assert_eq!(cfg.solver, SolverPath::Dense);
        assert!(cfg.compute_superclose);
    }

    #[test]
    fn strictness() {
        let unknown = FULL.replace("seed = 42", "seed = 42\nthreads = 4");
        assert!(matches!(StudyConfig::from_toml_str(&unknown), Err(Error::Config(_))));
        let bad_levels = FULL.replace("[4, 8]", "[8, 24]");
        assert!(StudyConfig::from_toml_str(&bad_levels).is_err());
        let one_level = FULL.replace("[4, 8]", "[4]");
        assert!(StudyConfig::from_toml_str(&one_level).is_err());
        let zero_k = FULL.replace("k = 3", "k = 0");
        assert!(StudyConfig::from_toml_str(&zero_k).is_err());
        let bad_order = FULL.replace("order = 2.0", "order = -1.0");
        assert!(StudyConfig::from_toml_str(&bad_order).is_err());
        let bad_preset = FULL.replace("shifted", "poisson");
        assert!(StudyConfig::from_toml_str(&bad_preset).is_err());
        let bad_path = FULL.replace("iterative", "lanczos");
        assert!(StudyConfig::from_toml_str(&bad_path).is_err());
        let too_many = FULL.replace("k = 3", "k = 40");
        assert!(StudyConfig::from_toml_str(&too_many).is_err());
    }
}
