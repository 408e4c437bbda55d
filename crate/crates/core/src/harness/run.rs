use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{LoadedProblem, RunConfig, SolverKind, SolverParams};
use crate::baselines::{dual_ascent_alm_run, linearized_penalty_admm_run};
use crate::error::{Error, Result};
use crate::monitor::MonitorLog;
use crate::sdd;
use crate::trace::{Granularity, RunStatus, Trace};
use crate::udd_affine;
use crate::udd_nonlinear;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Exit code for an error that ended a command.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvariantViolation { .. } | Error::EquivalenceViolation { .. } | Error::OracleFailure { .. } => {
            EXIT_INVARIANT
        }
        _ => EXIT_CONFIG,
    }
}

/// Solver-independent view of a finished run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub status: RunStatus,
    pub k_star: Option<usize>,
    pub iterations: usize,
    /// Penalty actually used (after `eps`-based rules).
    pub rho: f64,
    pub x: DVector<f64>,
    pub trace: Trace,
    pub certificate: serde_json::Value,
    pub monitors: MonitorLog,
    /// Theorem ceiling on the number of steps, for the solvers that have one.
    pub theorem_bound: Option<f64>,
}

impl SolverRun {
    /// Steps needed to reach `eps`, counting the successful one.
    pub fn iterations_to_eps(&self) -> Option<usize> {
        self.k_star.map(|k| k + 1)
    }

    pub fn exit_code(&self) -> i32 {
        if !self.monitors.is_clean() || self.status == RunStatus::Diverged {
            EXIT_INVARIANT
        } else if self.status == RunStatus::MaxIters {
            EXIT_MAX_ITERS
        } else {
            EXIT_SUCCESS
        }
    }
}

pub fn solve(
    problem: &LoadedProblem,
    solver: SolverKind,
    params: &SolverParams,
    granularity: Granularity,
) -> Result<SolverRun> {
    let inst = &problem.instance;
    let reference = problem.reference_value();
    let run = match solver {
        SolverKind::SddAdmm => {
            let p = params.sdd(granularity);
            let o = sdd::run(inst, &p)?;
            SolverRun {
                status: o.status,
                k_star: o.k_star,
                iterations: o.iterations,
                rho: o.rho,
                x: o.x,
                certificate: json!({ "kind": "stationarity", "certificate": o.certificate, "mu": o.mu.as_slice() }),
                trace: o.trace,
                monitors: o.monitors,
                theorem_bound: o.theorem_bound,
            }
        }
        SolverKind::UddAffine => {
            let p = params.udd_affine(granularity);
            let o = udd_affine::run(inst, &p)?;
            let bound = o.theorem_bound(p.theta, p.rho, reference, p.eps);
            SolverRun {
                status: o.status,
                k_star: o.k_star,
                iterations: o.iterations,
                rho: p.rho,
                certificate: json!({ "kind": "affine", "certificate": o.certificate, "robinson": o.robinson }),
                x: o.x,
                trace: o.trace,
                monitors: o.monitors,
                theorem_bound: Some(bound),
            }
        }
        SolverKind::UddNonlinear => {
            let p = params.udd_nonlinear(granularity);
            let o = udd_nonlinear::run(inst, &p)?;
            let bound = o.theorem_bound(reference, p.eps);
            SolverRun {
                status: o.status,
                k_star: o.k_star,
                iterations: o.iterations,
                rho: p.rho,
                certificate: json!({
                    "kind": "kkt",
                    "certificate": o.certificate,
                    "licq": o.licq_final,
                    "c": o.c,
                    "nu": o.nu,
                    "varrho": o.varrho,
                }),
                x: o.x,
                trace: o.trace,
                monitors: o.monitors,
                theorem_bound: Some(bound),
            }
        }
        SolverKind::DualAscent => {
            let p = params.dual_ascent(granularity);
            let o = dual_ascent_alm_run(inst, &p)?;
            SolverRun {
                status: o.status,
                k_star: o.k_star,
                iterations: o.iterations,
                rho: p.rho,
                certificate: json!({ "kind": "stationarity", "certificate": o.certificate, "mu": o.mu.as_slice() }),
                x: o.x,
                trace: o.trace,
                monitors: MonitorLog::default(),
                theorem_bound: None,
            }
        }
        SolverKind::PenaltyAdmm => {
            let p = params.penalty_admm(granularity);
            let o = linearized_penalty_admm_run(inst, &p)?;
            let mu = &o.lambda + &o.z * p.rho;
            SolverRun {
                status: o.status,
                k_star: o.k_star,
                iterations: o.iterations,
                rho: p.rho,
                certificate: json!({
                    "kind": "penalty_admm",
                    "z": o.z.as_slice(),
                    "lambda": o.lambda.as_slice(),
                    "mu": mu.as_slice(),
                    "max_identity_gap": o.max_identity_gap,
                }),
                x: o.x,
                trace: o.trace,
                monitors: MonitorLog::default(),
                theorem_bound: None,
            }
        }
    };
    Ok(run)
}

/// Contents of `summary.json`. The residual fields are copied from the last
/// trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub solver: SolverKind,
    pub status: RunStatus,
    pub exit_code: i32,
    pub iterations: usize,
    pub k_star: Option<usize>,
    pub eps: f64,
    pub rho: f64,
    pub resid_max: f64,
    pub feas: f64,
    pub h_norm: f64,
    pub mu_norm: f64,
    pub potential: f64,
    pub objective: f64,
    pub theorem_bound: Option<f64>,
    pub monitor_checks: usize,
    pub monitor_violations: usize,
    pub x: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub run: SolverRun,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    /// Writes `trace.csv`, `certificate.json` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.run.trace.write_csv(&dir.join("trace.csv"))?;
        std::fs::write(dir.join("certificate.json"), serde_json::to_string_pretty(&self.run.certificate)?)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.summary)?)?;
        Ok(())
    }
}

/// Runs one configuration and writes its artifacts when `cfg.out` is set.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    let problem = cfg.problem.load()?;
    let start = Instant::now();
    let run = solve(&problem, cfg.solver, &cfg.params, cfg.granularity())?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let last = run
        .trace
        .last()
        .copied()
        .ok_or_else(|| Error::Config("run produced an empty trace".into()))?;
    let summary = Summary {
        problem: cfg.problem.label(),
        solver: cfg.solver,
        status: run.status,
        exit_code: run.exit_code(),
        iterations: run.iterations,
        k_star: run.k_star,
        eps: cfg.params.eps,
        rho: run.rho,
        resid_max: last.resid_max,
        feas: last.feas,
        h_norm: last.h_norm,
        mu_norm: last.mu_norm,
        potential: last.potential,
        objective: problem.instance.objective_value(&run.x).to_f64(),
        theorem_bound: run.theorem_bound,
        monitor_checks: run.monitors.checks,
        monitor_violations: run.monitors.violations.len(),
        x: run.x.iter().cloned().collect(),
        wall_time_s,
    };
    log::info!(
        "{} on {}: {:?} after {} steps",
        cfg.solver,
        summary.problem,
        summary.status,
        summary.iterations
    );
    let report = RunReport { summary, run };
    if let Some(dir) = &cfg.out {
        report.write(dir)?;
    }
    Ok(report)
}
