use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ipzo_core::oracle::ObjectiveModel;
use ipzo_core::problems::{
    gen_lasso, initial_point, lasso_blackbox, read_libsvm, sigmoid_objective, ClassificationInstance, SparseDataset,
};
use ipzo_core::solvers::{
    solve, tune_zopg, DeltaRule, EpsilonRule, SigmaRule, SolverConfig, SolverKind, SolverReport, StepsizeRule,
    ZOPG_ETA_GRID,
};
use rayon::prelude::*;

use crate::spec::{EtaChoice, ExperimentSpec, ProblemSpec, SigmaChoice};
use crate::CliError;

pub const TRACE_HEADER: [&str; 11] = [
    "iter",
    "h",
    "evals",
    "delta",
    "sigma",
    "epsilon",
    "inner_iters",
    "gap_bound",
    "stationarity",
    "step_norm",
    "wall_ms",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "solver",
    "repeat",
    "seed",
    "eta",
    "iterations",
    "final_h",
    "total_evals",
    "termination",
    "message",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub solver: SolverKind,
    pub repeat: usize,
    pub seed: u64,
    /// ZOPG stepsize actually used.
    pub eta: Option<f64>,
    pub iterations: usize,
    pub final_h: f64,
    pub total_evals: u64,
    pub termination: String,
    pub message: String,
    pub trace: Option<PathBuf>,
    /// Final `h` per trace row, kept for callers that compare runs.
    pub h_trace: Vec<f64>,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.termination == "error"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outcomes: Vec<RunOutcome>,
    pub summary_path: PathBuf,
}

impl RunSummary {
    pub fn all_failed(&self) -> bool {
        self.outcomes.iter().all(RunOutcome::failed)
    }

    pub fn outcome(&self, solver: SolverKind, repeat: usize) -> Option<&RunOutcome> {
        self.outcomes
            .iter()
            .find(|o| o.solver == solver && o.repeat == repeat)
    }
}

pub fn trace_file_name(solver: SolverKind, repeat: usize) -> String {
    format!("{}_r{repeat}.csv", solver.name())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trace rows; floats use Rust's shortest round-trip formatting.
pub fn write_trace(out: impl Write, report: &SolverReport, timing: bool) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &report.records {
        w.write_record([
            r.k.to_string(),
            r.h_value.to_string(),
            r.evals.to_string(),
            r.delta.to_string(),
            opt(r.sigma),
            opt(r.epsilon),
            opt(r.inner_iters),
            opt(r.gap_bound),
            r.stationarity.to_string(),
            opt(r.step_norm),
            if timing { r.wall_ms.to_string() } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, outcomes: &[RunOutcome]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io)?;
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    for o in outcomes {
        w.write_record([
            o.solver.name().to_string(),
            o.repeat.to_string(),
            o.seed.to_string(),
            opt(o.eta),
            o.iterations.to_string(),
            o.final_h.to_string(),
            o.total_evals.to_string(),
            o.termination.clone(),
            o.message.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

enum Problem {
    Lasso,
    Classify(SparseDataset),
}

struct Job {
    solver: SolverKind,
    repeat: usize,
    seed: u64,
}

fn base_config(spec: &ExperimentSpec, seed: u64) -> SolverConfig {
    SolverConfig {
        delta: spec.delta.map_or(DeltaRule::InvSqrt, DeltaRule::Constant),
        sigma: match spec.sigma {
            SigmaChoice::Paper | SigmaChoice::Theoretical => SigmaRule::PAPER,
            SigmaChoice::Constant(s) => SigmaRule::Constant(s),
        },
        epsilon: spec.epsilon.map_or(EpsilonRule::InvSquare, EpsilonRule::Constant),
        termination_tol: spec.tol,
        max_iter: spec.max_iter,
        max_inner: spec.max_inner,
        seed,
        ..SolverConfig::default()
    }
}

fn build(spec: &ExperimentSpec, problem: &Problem, seed: u64) -> ipzo_core::Result<(ObjectiveModel, Vec<f64>, SolverConfig)> {
    let mut config = base_config(spec, seed);
    let model = match (&spec.problem, problem) {
        (ProblemSpec::Lasso { n, m, mu }, _) => {
            let inst = gen_lasso(*n, *m, *mu, seed)?;
            if spec.sigma == SigmaChoice::Theoretical {
                config.sigma = SigmaRule::theoretical(inst.grad_lipschitz(), inst.hess_diag_bound());
            }
            lasso_blackbox(&inst)
        }
        (ProblemSpec::Classify { lambda, mu, fold_l2, .. }, Problem::Classify(dataset)) => {
            let inst = ClassificationInstance {
                dataset: dataset.clone(),
                lambda: *lambda,
                mu: *mu,
            };
            sigmoid_objective(&inst, *fold_l2)?
        }
        (ProblemSpec::Classify { .. }, Problem::Lasso) => unreachable!("dataset is loaded before jobs start"),
    };
    let x0 = initial_point(model.dimension(), seed);
    Ok((model, x0, config))
}

fn run_job(spec: &ExperimentSpec, problem: &Problem, job: &Job) -> Result<RunOutcome, CliError> {
    let mut outcome = RunOutcome {
        solver: job.solver,
        repeat: job.repeat,
        seed: job.seed,
        eta: None,
        iterations: 0,
        final_h: f64::NAN,
        total_evals: 0,
        termination: "error".into(),
        message: String::new(),
        trace: None,
        h_trace: Vec::new(),
    };
    let (model, x0, config) = match build(spec, problem, job.seed) {
        Ok(parts) => parts,
        Err(e) => {
            outcome.message = e.to_string();
            return Ok(outcome);
        }
    };
    let report = match (job.solver, spec.eta) {
        (SolverKind::Ipzopm, _) => solve(SolverKind::Ipzopm, &model, &config, &x0),
        (SolverKind::Zopg, EtaChoice::Value(eta)) => {
            outcome.eta = Some(eta);
            let config = SolverConfig {
                zopg_stepsize: StepsizeRule::Constant(eta),
                ..config
            };
            solve(SolverKind::Zopg, &model, &config, &x0)
        }
        (SolverKind::Zopg, EtaChoice::Grid) => {
            let (eta, report) = tune_zopg(&model, &config, &x0, &ZOPG_ETA_GRID).into_report();
            outcome.eta = Some(eta);
            report
        }
    };

    let path = spec.out.join(trace_file_name(job.solver, job.repeat));
    let file = fs::File::create(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    write_trace(std::io::BufWriter::new(file), &report, !spec.no_timing).map_err(|source| CliError::Csv {
        path: path.clone(),
        source,
    })?;

    outcome.iterations = report.iterations();
    outcome.final_h = report.h;
    outcome.total_evals = report.total_evals;
    outcome.termination = report.termination.label().to_string();
    if let ipzo_core::solvers::Termination::Error(e) = &report.termination {
        outcome.message = e.to_string();
    }
    outcome.trace = Some(path);
    outcome.h_trace = report.h_trace();
    Ok(outcome)
}

/// Runs every (solver, repeat) pair, writes one trace per pair plus
/// `summary.csv`, and returns the outcomes in (repeat, solver) order.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&spec.out).map_err(|source| CliError::Io {
        path: spec.out.clone(),
        source,
    })?;
    let problem = match &spec.problem {
        ProblemSpec::Lasso { .. } => Problem::Lasso,
        ProblemSpec::Classify { path, n_features, .. } => Problem::Classify(read_libsvm(path, *n_features)?),
    };
    let jobs: Vec<Job> = (0..spec.repeat)
        .flat_map(|repeat| {
            spec.solvers.iter().map(move |&solver| Job {
                solver,
                repeat,
                seed: spec.seed.wrapping_add(repeat as u64),
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let outcomes = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_job(spec, &problem, job))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let summary_path = spec.out.join("summary.csv");
    write_summary(&summary_path, &outcomes)?;
    Ok(RunSummary {
        outcomes,
        summary_path,
    })
}
