//! Mesh-sequence study: solve every level, extrapolate, measure, report.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::assemble;
use crate::coefficients::preset;
use crate::config::StudyConfig;
use crate::eigensolver::{solve_level, EigenResult, SolveOptions};
use crate::error::{Error, Result};
use crate::extrapolation::{match_and_cluster, ConvergenceTable, Level};
use crate::mesh::{build_structured_mesh, Mesh};
use crate::quadrature::triangle_rule;
use crate::report::{emit_reports, LevelSummary, LevelTiming, Status, StudyReport};
use crate::superclose::{analytic_eigenpairs, l2_errors, p0_project, superclose_distance, AnalyticEigenpair};

pub struct StudyOutcome {
    pub report: StudyReport,
    pub timings: Vec<LevelTiming>,
    pub results: Vec<EigenResult>,
}

struct LevelRun {
    mesh: Mesh,
    result: Result<EigenResult>,
    seconds: f64,
}

/// Runs the study and writes its reports into `config.output_dir`.
///
/// On a numerical failure the partial report (status `failed`) is still
/// written before the error is returned.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome> {
    let (outcome, failure) = compute_study(config)?;
    emit_reports(&outcome.report, &outcome.timings, &config.output_dir)?;
    if config.dump_matrices {
        dump_matrices(config, &outcome.results)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

/// Pure computation; the error slot carries a numerical failure alongside the partial outcome.
pub fn compute_study(config: &StudyConfig) -> Result<(StudyOutcome, Option<Error>)> {
    config.validate()?;
    let prob = preset(&config.preset)?;
    let opts = SolveOptions {
        path: config.solver,
        seed: config.seed,
    };

    let runs: Vec<LevelRun> = config
        .levels
        .par_iter()
        .map(|&n| -> Result<LevelRun> {
            let start = Instant::now();
            let mesh = build_structured_mesh(prob.domain, n)?;
            let result = solve_level(&mesh, &prob, config.k, &opts);
            Ok(LevelRun {
                mesh,
                result,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let mut report = StudyReport {
        preset: config.preset.clone(),
        levels: config.levels.clone(),
        k: config.k,
        order: config.order,
        solver: config.solver,
        seed: config.seed,
        status: Status::Ok,
        error: None,
        level_results: Vec::new(),
        table: ConvergenceTable {
            order: config.order,
            entries: Vec::new(),
        },
    };
    let mut timings = Vec::new();
    let mut results = Vec::new();
    let mut meshes = Vec::new();
    let mut failure = None;
    for run in runs {
        timings.push(LevelTiming {
            n: run.mesh.n,
            assemble_and_solve_s: run.seconds,
            postprocess_s: 0.0,
        });
        match run.result {
            Ok(res) => {
                report.level_results.push(summary(&res));
                results.push(res);
                meshes.push(run.mesh);
            }
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }
    if let Some(e) = failure {
        report.status = Status::Failed;
        report.error = Some(e.to_string());
        return Ok((
            StudyOutcome {
                report,
                timings,
                results,
            },
            Some(e),
        ));
    }

    let levels = results
        .iter()
        .map(|r| Level {
            n: r.n,
            h: r.h,
            eigenvalues: r.pairs.iter().map(|p| p.lambda_h).collect(),
        })
        .collect();
    let seq = match_and_cluster(levels)?;
    let exact = analytic_eigenpairs(&prob, config.k);
    let exact_values: Option<Vec<f64>> = exact.as_ref().map(|v| v.iter().map(|p| p.lambda).collect());
    let mut table = ConvergenceTable::build(&seq, exact_values.as_deref(), config.order)?;

    for entry in &mut table.entries {
        for (row, res) in entry.rows.iter_mut().zip(&results) {
            row.residual = entry.members.iter().map(|&i| res.pairs[i].residual).fold(0.0, f64::max);
        }
    }

    if config.compute_superclose {
        if let Some(exact) = &exact {
            for entry in &mut table.entries {
                let [i] = entry.members[..] else { continue };
                if !exact[i].is_simple() {
                    continue;
                }
                for (l, row) in entry.rows.iter_mut().enumerate() {
                    let start = Instant::now();
                    let m = measure(&meshes[l], &results[l], i, &exact[i])?;
                    row.superclose = Some(m.0);
                    row.superclose_l2 = Some(m.1);
                    row.err_u = Some(m.2);
                    row.err_sigma = Some(m.3);
                    timings[l].postprocess_s += start.elapsed().as_secs_f64();
                }
            }
        }
    }
    report.table = table;
    Ok((
        StudyOutcome {
            report,
            timings,
            results,
        },
        None,
    ))
}

/// (D-weighted superclose, unweighted superclose, err_u, err_sigma)
fn measure(
    mesh: &Mesh,
    res: &EigenResult,
    index: usize,
    exact: &AnalyticEigenpair,
) -> Result<(f64, f64, f64, f64)> {
    let rule = triangle_rule(3)?;
    let pair = &res.pairs[index];
    let pu = p0_project(|x| exact.u(x), mesh, &rule);
    let weighted = superclose_distance(&pair.u, &pu, &res.d)?;
    let areas: Vec<f64> = (0..mesh.num_triangles()).map(|t| mesh.triangle_area(t)).collect();
    let plain = superclose_distance(&pair.u, &pu, &areas)?;
    let errs = l2_errors(&pair.u, &pair.sigma, exact, mesh, &res.d, &rule);
    Ok((weighted, plain, errs.err_u, errs.err_sigma))
}

fn summary(res: &EigenResult) -> LevelSummary {
    LevelSummary {
        n: res.n,
        h: res.h,
        num_edges: res.num_edges,
        num_triangles: res.num_triangles,
        eigenvalues: res.pairs.iter().map(|p| p.lambda_h).collect(),
        residuals: res.pairs.iter().map(|p| p.residual).collect(),
        s_norm: res.s_norm,
    }
}

/// Per level: `n<N>/mesh.txt` and coordinate dumps of `M`, `B`, `C`, `D`.
fn dump_matrices(config: &StudyConfig, results: &[EigenResult]) -> Result<()> {
    let prob = preset(&config.preset)?;
    for res in results {
        let dir = config.output_dir.join(format!("n{}", res.n));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mesh = build_structured_mesh(prob.domain, res.n)?;
        let sys = assemble(&mesh, &prob)?;
        let diag = |v: &[f64]| -> String {
            v.iter()
                .enumerate()
                .map(|(i, x)| format!("{i} {i} {x:.16e}\n"))
                .collect()
        };
        let files = [
            ("mesh.txt", mesh.dump()),
            ("M.coo", sys.m.to_coordinate_text()),
            ("B.coo", sys.b.to_coordinate_text()),
            ("C.coo", diag(&sys.c)),
            ("D.coo", diag(&sys.d)),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Reads a study file; a thin wrapper used by the binary.
pub fn load_config(path: &Path) -> Result<StudyConfig> {
    StudyConfig::from_file(path)
}
