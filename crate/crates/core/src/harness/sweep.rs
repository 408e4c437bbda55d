use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::{LoadedProblem, SolverKind, SolverParams};
use super::run::solve;
use crate::error::{Error, Result};
use crate::trace::{Granularity, RunStatus};

/// Smallest number of tolerances in a sweep.
pub const MIN_SWEEP_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub eps: f64,
    pub status: RunStatus,
    pub k_star: Option<usize>,
    /// `k_star + 1`.
    pub iterations: Option<usize>,
    pub bound: Option<f64>,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub problem: String,
    pub solver: SolverKind,
    pub rows: Vec<RateRow>,
    /// OLS slope of `ln(iterations)` against `ln(1 / eps)`.
    pub slope: Option<f64>,
    /// Two-sided 95% Student-t interval for the slope.
    pub slope_ci: Option<(f64, f64)>,
    pub failures: Vec<String>,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `solver` once per tolerance, largest first.
pub fn rate_sweep(
    problem: &LoadedProblem,
    label: &str,
    solver: SolverKind,
    params: &SolverParams,
    eps_list: &[f64],
) -> Result<RateReport> {
    if eps_list.len() < MIN_SWEEP_POINTS {
        return Err(Error::Config(format!(
            "a sweep needs at least {MIN_SWEEP_POINTS} tolerances, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("tolerances must be positive and strictly decreasing: {eps_list:?}")));
    }

    let mut rows = Vec::with_capacity(eps_list.len());
    let mut failures = Vec::new();
    for &eps in eps_list {
        let p = SolverParams { eps, ..params.clone() };
        let run = solve(problem, solver, &p, Granularity { every: usize::MAX })?;
        let iterations = run.iterations_to_eps();
        let within_bound = match (iterations, run.theorem_bound) {
            (Some(it), Some(b)) => it as f64 <= b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        match (iterations, run.theorem_bound) {
            (None, _) => failures.push(format!("eps={eps:e}: no convergence ({:?}) in {} steps", run.status, run.iterations)),
            (Some(it), Some(b)) if !within_bound => {
                failures.push(format!("eps={eps:e}: {it} iterations exceed the ceiling K={b:e}"))
            }
            _ => {}
        }
        log::info!("sweep {solver} eps={eps:e}: {:?} in {:?} steps", run.status, iterations);
        rows.push(RateRow {
            eps,
            status: run.status,
            k_star: run.k_star,
            iterations,
            bound: run.theorem_bound,
            within_bound,
        });
    }
    for w in rows.windows(2) {
        if let (Some(a), Some(b)) = (w[0].iterations, w[1].iterations) {
            if b < a {
                failures.push(format!(
                    "iterations decreased from {a} at eps={:e} to {b} at eps={:e}",
                    w[0].eps, w[1].eps
                ));
            }
        }
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.iterations.map(|it| ((1.0 / r.eps).ln(), (it as f64).ln())))
        .collect();
    let (slope, slope_ci) = match ols_slope(&points) {
        Some((s, ci)) => (Some(s), ci),
        None => (None, None),
    };
    Ok(RateReport {
        problem: label.to_string(),
        solver,
        rows,
        slope,
        slope_ci,
        failures,
    })
}

/// Least-squares slope and, with three or more points, its 95% interval.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<(f64, Option<(f64, f64)>)> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if n < 3 {
        return Some((slope, None));
    }
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.975);
    Some((slope, Some((slope - t * se, slope + t * se))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&x| (x, 2.0 * x + 0.5)).collect();
        let (s, ci) = ols_slope(&pts).unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-12);
        let (lo, hi) = ci.unwrap();
        assert_relative_eq!(lo, 2.0, epsilon = 1e-9);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn slope_interval_matches_hand_computation() {
        // x = 0..3, y = (0, 1, 1, 3): slope 0.9, sse 0.7, se = sqrt(0.35 / 5)
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 3.0)];
        let (s, ci) = ols_slope(&pts).unwrap();
        assert_relative_eq!(s, 0.9, epsilon = 1e-12);
        let (lo, hi) = ci.unwrap();
        // t_{0.975, 2} from scipy.stats.t.ppf
        let half = 4.302652729696142 * (0.35f64 / 5.0).sqrt();
        assert_relative_eq!(hi - s, half, epsilon = 1e-9);
        assert_relative_eq!(s - lo, half, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ols_slope(&[(1.0, 1.0)]).is_none());
        assert!(ols_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }
}
