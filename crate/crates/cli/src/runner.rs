//! Builds the problem, runs every configured preconditioned GMRES(30)
//! solver and emits the comparison table as CSV.

use crate::config::{BenchConfig, ProblemSource};
use mgd_solver::block::BlockSystem;
use mgd_solver::krylov::{gmres, IdentityOperator, LinearOperator, SolveReport};
use mgd_solver::mgdgen;
use mgd_solver::precond::{
    parse_precond_name, CountingPrecondOperator, OperationCounters, PrecondConfig, Preconditioner,
};
use mgd_solver::sparse::{CsrMatrix, DenseVector};
use mgd_solver::Result;
use std::time::Instant;

pub const CSV_HEADER: &str = "problem,preconditioner,G,N,iterations,converged,setup_seconds,\
solve_seconds,matrix_inverse_count,inner_cycles_total,final_relative_residual,error";

struct RowData {
    name: String,
    report: Option<SolveReport>,
    error: Option<String>,
}

fn build_problem(cfg: &BenchConfig) -> Result<BlockSystem> {
    match &cfg.problem {
        ProblemSource::Preset {
            preset,
            nx,
            ny,
            groups,
            seed,
        } => {
            let coef = mgdgen::capsule_profile(*preset, *nx, *ny, *groups);
            mgdgen::generate(&coef, *seed)
        }
        ProblemSource::Manifest(path) => mgdgen::load_system(path),
    }
}

fn solve_one(
    name: &str,
    system: &BlockSystem,
    mono: &CsrMatrix,
    cfg: &BenchConfig,
    verbose: bool,
) -> RowData {
    let (kind, adaptive) = match parse_precond_name(name) {
        Ok(ka) => ka,
        Err(e) => {
            return RowData {
                name: name.to_string(),
                report: None,
                error: Some(e.to_string()),
            }
        }
    };
    let pc_cfg = PrecondConfig {
        kind,
        adaptive,
        ..cfg.base.clone()
    };

    let t_setup = Instant::now();
    let precond = match Preconditioner::for_system(system, &pc_cfg) {
        Ok(p) => p,
        Err(e) => {
            return RowData {
                name: name.to_string(),
                report: None,
                error: Some(format!("setup failed: {e}")),
            }
        }
    };
    let setup_seconds = t_setup.elapsed().as_secs_f64();
    if verbose {
        if let Some(summary) = precond.mono_summary() {
            eprintln!("[{name}] hierarchy:\n{summary}");
        }
        if let Some(info) = precond.adaptive_info() {
            eprintln!(
                "[{name}] adaptive: extracted {:?}, ion active {}, coarse correction skipped {}",
                info.extracted, info.ion_active, info.coarse_correction_skipped
            );
        }
    }

    let b = system.rhs().flatten();
    let x0 = DenseVector::zeros(mono.n_rows());
    let op = CountingPrecondOperator::new(&precond);
    let t_solve = Instant::now();
    let solved = if name == "none" {
        gmres(mono, &IdentityOperator(mono.n_rows()), &b, &x0, &cfg.gmres)
    } else {
        gmres(mono, &op as &dyn LinearOperator, &b, &x0, &cfg.gmres)
    };
    let solve_seconds = t_solve.elapsed().as_secs_f64();

    match solved {
        Ok((_, mut report)) => {
            report.setup_seconds = setup_seconds;
            report.solve_seconds = solve_seconds;
            let mut counters = OperationCounters::new();
            counters.merge(precond.setup_counters());
            counters.merge(&op.take_counters());
            report.counters = counters;
            if verbose {
                eprintln!(
                    "[{name}] iterations {} converged {} residual {:.3e}",
                    report.iterations,
                    report.converged,
                    report.final_relative_residual()
                );
                eprint!("{}", report.history_csv());
            }
            RowData {
                name: name.to_string(),
                report: Some(report),
                error: None,
            }
        }
        Err(e) => RowData {
            name: name.to_string(),
            report: None,
            error: Some(format!("solve failed: {e}")),
        },
    }
}

fn format_row(
    problem: &str,
    g: usize,
    n: usize,
    row: &RowData,
    no_timings: bool,
) -> String {
    match (&row.report, &row.error) {
        (Some(rep), None) => {
            let (setup, solve) = if no_timings {
                (0.0, 0.0)
            } else {
                (rep.setup_seconds, rep.solve_seconds)
            };
            format!(
                "{},{},{},{},{},{},{:.6},{:.6},{},{},{:.10e},",
                problem,
                row.name,
                g,
                n,
                rep.iterations,
                rep.converged,
                setup,
                solve,
                rep.counters.matrix_inverse,
                rep.counters.inner_cycles_total(),
                rep.final_relative_residual()
            )
        }
        (_, Some(err)) => format!(
            "{},{},{},{},0,false,0.000000,0.000000,0,0,,{}",
            problem,
            row.name,
            g,
            n,
            err.replace(',', ";")
        ),
        (None, None) => unreachable!("row carries either a report or an error"),
    }
}

/// Runs the whole benchmark, writes the CSV to `cfg.output` and returns the
/// CSV text.  Solver failures become rows with an error column; they do not
/// abort the run.
pub fn run_bench(cfg: &BenchConfig) -> Result<String> {
    let system = build_problem(cfg)?;
    let mono = system.to_monolithic();
    let problem_name = cfg.problem.name();
    if cfg.verbose {
        eprintln!(
            "problem {problem_name}: G = {}, N = {}, total unknowns {}",
            system.groups(),
            system.block_size(),
            system.total_size()
        );
    }

    let rows: Vec<RowData> = if cfg.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfg
                .precond_names
                .iter()
                .map(|name| {
                    let (system, mono) = (&system, &mono);
                    scope.spawn(move || solve_one(name, system, mono, cfg, false))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        cfg.precond_names
            .iter()
            .map(|name| solve_one(name, &system, &mono, cfg, cfg.verbose))
            .collect()
    };

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format_row(
            &problem_name,
            system.groups(),
            system.block_size(),
            row,
            cfg.no_timings,
        ));
        csv.push('\n');
    }
    if let Some(dir) = cfg.output.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&cfg.output, &csv)?;
    Ok(csv)
}
