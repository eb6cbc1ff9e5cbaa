//! Eigenvalue matching across levels, Richardson extrapolation and observed orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Errors at or below this are reported as saturated instead of producing an order.
pub const SATURATION: f64 = 1e-13;
/// Relative gap on the finest level below which neighbours form one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

/// `(2^p fine - coarse) / (2^p - 1)` for mesh sizes `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64, p: f64) -> f64 {
    let r = 2f64.powf(p);
    (r * fine - coarse) / (r - 1.0)
}

/// `log2(e_i / e_{i+1})` per consecutive pair; `None` when either error is
/// non-positive or saturated.
pub fn observed_order(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| {
            if w[0] > SATURATION && w[1] > SATURATION {
                Some((w[0] / w[1]).log2())
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub h: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSequence {
    pub levels: Vec<Level>,
    /// Adjacent eigenvalue indices grouped by the finest-level gap test.
    pub clusters: Vec<Vec<usize>>,
}

impl LevelSequence {
    /// Cluster mean on each level.
    pub fn cluster_values(&self, cluster: usize) -> Vec<f64> {
        let members = &self.clusters[cluster];
        self.levels
            .iter()
            .map(|l| members.iter().map(|&i| l.eigenvalues[i]).sum::<f64>() / members.len() as f64)
            .collect()
    }

    /// Eigenvalue `i` across levels.
    pub fn matched(&self, i: usize) -> Vec<f64> {
        self.levels.iter().map(|l| l.eigenvalues[i]).collect()
    }
}

pub fn validate_levels(ns: &[usize]) -> Result<()> {
    if ns.len() < 2 {
        return Err(Error::Config(format!(
            "at least two mesh levels are required, got {}",
            ns.len()
        )));
    }
    if ns[0] == 0 {
        return Err(Error::Config("mesh level n must be positive".into()));
    }
    for w in ns.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Config(format!(
                "mesh levels must double: {} is followed by {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

pub fn match_and_cluster(levels: Vec<Level>) -> Result<LevelSequence> {
    let ns: Vec<usize> = levels.iter().map(|l| l.n).collect();
    validate_levels(&ns)?;
    let k = levels[0].eigenvalues.len();
    for l in &levels {
        if l.eigenvalues.len() != k {
            return Err(Error::InvalidArgument(format!(
                "level n={} has {} eigenvalues, expected {k}",
                l.n,
                l.eigenvalues.len()
            )));
        }
        if l.eigenvalues.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalues on level n={} are not ascending",
                l.n
            )));
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        let joins = i > 0 && same_limit(&levels, i - 1, i);
        match clusters.last_mut() {
            Some(c) if joins => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    Ok(LevelSequence { levels, clusters })
}

/// Whether eigenvalues `i` and `j = i + 1` approximate one multiple eigenvalue.
///
/// Either they agree to `CLUSTER_TOL` on the finest level, or their gap is
/// collapsing: it shrinks at least twofold between the two finest levels and
/// is smaller than the coarse-to-fine movement of either member. The second
/// test catches pairs that a mesh without the domain's full symmetry splits
/// at the discretization order.
fn same_limit(levels: &[Level], i: usize, j: usize) -> bool {
    let fine = &levels[levels.len() - 1].eigenvalues;
    let coarse = &levels[levels.len() - 2].eigenvalues;
    let gap_fine = (fine[j] - fine[i]).abs();
    if gap_fine <= CLUSTER_TOL * fine[i].abs().max(1.0) {
        return true;
    }
    let gap_coarse = (coarse[j] - coarse[i]).abs();
    let moved = (fine[i] - coarse[i]).abs().max((fine[j] - coarse[j]).abs());
    gap_coarse >= GAP_COLLAPSE * gap_fine && gap_fine < moved
}

/// Minimum coarse/fine gap ratio for a collapsing pair (gap order at least 1).
pub const GAP_COLLAPSE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Analytic,
    SelfReferenced,
}

/// One (cluster, level) row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelRow {
    pub level_n: usize,
    pub h: f64,
    pub lambda_h: f64,
    /// From the pair (previous level, this level).
    pub lambda_extrap: Option<f64>,
    pub err_raw: Option<f64>,
    pub err_extrap: Option<f64>,
    pub order_raw: Option<f64>,
    pub order_extrap: Option<f64>,
    /// `D`-weighted distance between the projected exact and discrete eigenfunction.
    pub superclose: Option<f64>,
    /// Same distance in the unweighted L2 norm.
    pub superclose_l2: Option<f64>,
    pub err_u: Option<f64>,
    pub err_sigma: Option<f64>,
    /// Largest eigen residual among the cluster members.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub members: Vec<usize>,
    pub reference: f64,
    pub reference_kind: ReferenceKind,
    pub rows: Vec<LevelRow>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub order: f64,
    pub entries: Vec<ClusterEntry>,
}

impl ConvergenceTable {
    /// `analytic[i]` is the exact eigenvalue for index `i`, when known.
    pub fn build(seq: &LevelSequence, analytic: Option<&[f64]>, p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Config(format!("expansion order must be positive, got {p}")));
        }
        let mut entries = Vec::with_capacity(seq.clusters.len());
        for (c, members) in seq.clusters.iter().enumerate() {
            let values = seq.cluster_values(c);
            let nl = values.len();
            let extrap: Vec<Option<f64>> = (0..nl)
                .map(|l| (l > 0).then(|| richardson(values[l - 1], values[l], p)))
                .collect();
            let (reference, reference_kind) = match analytic {
                Some(a) => (
                    members.iter().map(|&i| a[i]).sum::<f64>() / members.len() as f64,
                    ReferenceKind::Analytic,
                ),
                None => (
                    richardson(values[nl - 2], values[nl - 1], p),
                    ReferenceKind::SelfReferenced,
                ),
            };
            let err_raw: Vec<f64> = values.iter().map(|v| (v - reference).abs()).collect();
            let err_extrap: Vec<Option<f64>> = extrap.iter().map(|e| e.map(|v| (v - reference).abs())).collect();
            let raw_orders = observed_order(&err_raw);
            let rows = (0..nl)
                .map(|l| {
                    let level = &seq.levels[l];
                    let order_extrap = if l >= 2 {
                        match (err_extrap[l - 1], err_extrap[l]) {
                            (Some(a), Some(b)) => observed_order(&[a, b])[0],
                            _ => None,
                        }
                    } else {
                        None
                    };
                    LevelRow {
                        level_n: level.n,
                        h: level.h,
                        lambda_h: values[l],
                        lambda_extrap: extrap[l],
                        err_raw: Some(err_raw[l]),
                        err_extrap: err_extrap[l],
                        order_raw: if l > 0 { raw_orders[l - 1] } else { None },
                        order_extrap,
                        ..LevelRow::default()
                    }
                })
                .collect();
            entries.push(ClusterEntry {
                members: members.clone(),
                reference,
                reference_kind,
                rows,
            });
        }
        Ok(ConvergenceTable { order: p, entries })
    }
}
