//! Reference methods: the classic dual-ascent ALM and the linearized
//! multi-block ADMM on the penalty relaxation
//! `min f(x) + g(x) + (beta/2)||z||^2 s.t. h(x) + z = 0`,
//! plus the trajectory check that ties the latter to SDD-ADMM.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::monitor::MonitorPolicy;
use crate::problem::ProblemInstance;
use crate::sdd::{self, block_certificate, primal_sweep, sweep_constant, SddParams, StationarityCertificate, Sweep};
use crate::trace::{Granularity, IterationRecord, RunStatus, Trace, TraceKind};

/// `||mu||` above which the dual-ascent baseline reports divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;
/// Relative tolerance of the trajectory comparison.
pub const EQUIVALENCE_REL_TOL: f64 = 1e-8;

/// `mu + varrho h`, the classic ascent direction.
pub fn dual_ascent_update(mu: &DVector<f64>, h: &DVector<f64>, varrho: f64) -> DVector<f64> {
    mu + h * varrho
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualAscentParams {
    pub rho: f64,
    /// Dual step; `rho` when absent.
    pub varrho: Option<f64>,
    pub theta: f64,
    pub sweep: Sweep,
    pub eps: f64,
    pub max_iters: usize,
    pub granularity: Granularity,
}

impl Default for DualAscentParams {
    fn default() -> Self {
        Self {
            rho: 10.0,
            varrho: None,
            theta: 2.0,
            sweep: Sweep::GaussSeidel,
            eps: 1e-3,
            max_iters: 100_000,
            granularity: Granularity::default(),
        }
    }
}

impl DualAscentParams {
    pub fn varrho(&self) -> f64 {
        self.varrho.unwrap_or(self.rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(param_err(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.varrho() > 0.0) {
            return Err(param_err("varrho must be positive"));
        }
        if !(self.theta > 1.0) {
            return Err(param_err(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.eps > 0.0) || self.max_iters == 0 {
            return Err(param_err("eps and max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutput {
    pub status: RunStatus,
    pub k_star: Option<usize>,
    pub iterations: usize,
    pub x: DVector<f64>,
    pub mu: DVector<f64>,
    pub trace: Trace,
    pub certificate: Option<StationarityCertificate>,
}

/// Proximal-linearized ALM with `mu^{k+1} = mu^k + varrho h(x^{k+1})`.
/// No convergence guarantee; the run stops with `Diverged` once
/// `||mu|| > DIVERGENCE_THRESHOLD`.
pub fn dual_ascent_alm_run(inst: &ProblemInstance, params: &DualAscentParams) -> Result<BaselineOutput> {
    params.validate()?;
    let s = inst.structure().clone();
    let (rho, theta, varrho) = (params.rho, params.theta, params.varrho());
    let mut x = inst.x0().clone();
    let mut mu = DVector::zeros(s.m());
    let mut trace = Trace::new(TraceKind::Basic);
    let mut lin_grads = Vec::with_capacity(s.p());
    let mut disp = vec![0.0; s.p()];
    let mut status = RunStatus::MaxIters;
    let mut k_star = None;
    let mut certificate = None;
    let mut iterations = 0;

    for k in 0..params.max_iters {
        let lip = sweep_constant(inst, params.sweep, mu.norm(), rho);
        let x_old = x.clone();
        primal_sweep(inst, params.sweep, &mut x, &mu, rho, theta, lip, &mut lin_grads)?;
        iterations = k + 1;
        let h = inst.aggregate_h(&x)?;
        let h_norm = h.norm();
        let mu_tilde = &mu + &h * rho;
        let (xi, resid_max) = block_certificate(inst, &x_old, &x, &lin_grads, &mu_tilde, theta * lip, &mut disp);
        let mu_new = dual_ascent_update(&mu, &h, varrho);
        let diverged = !(mu_new.norm() <= DIVERGENCE_THRESHOLD);
        let done = resid_max <= params.eps && h_norm <= params.eps;
        let last = done || diverged || k + 1 == params.max_iters;
        if params.granularity.keep(k, last) {
            trace.rows.push(IterationRecord {
                k,
                potential: inst.augmented_lagrangian(&x, &mu_new, rho)?.to_f64(),
                lip,
                h_norm,
                mu_norm: mu_new.norm(),
                max_block_disp: disp.iter().cloned().fold(0.0, f64::max),
                resid_max,
                feas: h_norm,
                l_aug: None,
                inner: None,
            });
        }
        if last {
            certificate = Some(StationarityCertificate {
                lambda: mu_tilde.iter().cloned().collect(),
                xi: xi.iter().map(|v| v.iter().cloned().collect()).collect(),
                residual: resid_max,
                feasibility: h_norm,
            });
        }
        mu = mu_new;
        if diverged {
            log::warn!("dual ascent diverged at k={k}: ||mu|| = {:e}", mu.norm());
            status = RunStatus::Diverged;
            break;
        }
        if done {
            status = RunStatus::Converged;
            k_star = Some(k);
            break;
        }
    }
    Ok(BaselineOutput {
        status,
        k_star,
        iterations,
        x,
        mu,
        trace,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyAdmmParams {
    pub rho: f64,
    pub beta: f64,
    pub theta: f64,
    pub sweep: Sweep,
    pub eps: f64,
    pub max_iters: usize,
    pub granularity: Granularity,
}

impl Default for PenaltyAdmmParams {
    fn default() -> Self {
        Self {
            rho: 10.0,
            beta: 5.0,
            theta: 2.0,
            sweep: Sweep::GaussSeidel,
            eps: 1e-3,
            max_iters: 100_000,
            granularity: Granularity::default(),
        }
    }
}

impl PenaltyAdmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(param_err(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.rho > self.beta && self.rho.is_finite()) {
            return Err(param_err(format!(
                "rho must exceed beta, got rho = {} and beta = {}",
                self.rho, self.beta
            )));
        }
        if !(self.theta > 1.0) {
            return Err(param_err(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.eps > 0.0) || self.max_iters == 0 {
            return Err(param_err("eps and max_iters must be positive"));
        }
        Ok(())
    }
}

/// `(-lambda - rho h) / (beta + rho)`.
pub fn slack_update(lambda: &DVector<f64>, h: &DVector<f64>, beta: f64, rho: f64) -> DVector<f64> {
    (-lambda - h * rho) / (beta + rho)
}

#[derive(Debug, Clone)]
pub struct PenaltyAdmmOutput {
    pub status: RunStatus,
    pub k_star: Option<usize>,
    pub iterations: usize,
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub lambda: DVector<f64>,
    pub trace: Trace,
    /// Largest `||beta z^k + lambda^k|| / ||lambda^k||` seen (0 when `lambda^k = 0`).
    pub max_identity_gap: f64,
    /// Every iterate `(x^k, z^k, lambda^k)`.
    pub history: Vec<(DVector<f64>, DVector<f64>, DVector<f64>)>,
}

/// Linearized multi-block ADMM on the penalty relaxation, from `z^0 = lambda^0 = 0`.
/// The `x`-step is the SDD block step with `mu^k = lambda^k + rho z^k`.
pub fn linearized_penalty_admm_run(inst: &ProblemInstance, params: &PenaltyAdmmParams) -> Result<PenaltyAdmmOutput> {
    params.validate()?;
    let s = inst.structure().clone();
    let (rho, beta, theta) = (params.rho, params.beta, params.theta);
    let mut x = inst.x0().clone();
    let mut z = DVector::zeros(s.m());
    let mut lambda = DVector::zeros(s.m());
    let mut history = vec![(x.clone(), z.clone(), lambda.clone())];
    let mut trace = Trace::new(TraceKind::Basic);
    let mut lin_grads = Vec::with_capacity(s.p());
    let mut disp = vec![0.0; s.p()];
    let mut status = RunStatus::MaxIters;
    let mut k_star = None;
    let mut iterations = 0;
    let mut max_identity_gap: f64 = 0.0;

    for k in 0..params.max_iters {
        let mu = &lambda + &z * rho;
        let lip = sweep_constant(inst, params.sweep, mu.norm(), rho);
        let x_old = x.clone();
        primal_sweep(inst, params.sweep, &mut x, &mu, rho, theta, lip, &mut lin_grads)?;
        iterations = k + 1;
        let h = inst.aggregate_h(&x)?;
        let z_new = slack_update(&lambda, &h, beta, rho);
        let lambda_new = &lambda + (&h + &z_new) * rho;

        let gap = (&z_new * beta + &lambda_new).norm();
        let ln = lambda_new.norm();
        if ln > 0.0 {
            max_identity_gap = max_identity_gap.max(gap / ln);
        } else if gap > 0.0 {
            max_identity_gap = f64::INFINITY;
        }

        let mu_tilde = &mu + &h * rho;
        let (_, resid_max) = block_certificate(inst, &x_old, &x, &lin_grads, &mu_tilde, theta * lip, &mut disp);
        let feas = (&h + &z_new).norm();
        let h_norm = h.norm();
        let done = resid_max <= params.eps && h_norm <= params.eps;
        let last = done || k + 1 == params.max_iters;
        if params.granularity.keep(k, last) {
            let obj = inst.objective_value(&x).to_f64();
            let merit = obj + 0.5 * beta * z_new.norm_squared() + lambda_new.dot(&(&h + &z_new)) + 0.5 * rho * feas * feas;
            trace.rows.push(IterationRecord {
                k,
                potential: merit,
                lip,
                h_norm,
                mu_norm: (&lambda_new + &z_new * rho).norm(),
                max_block_disp: disp.iter().cloned().fold(0.0, f64::max),
                resid_max,
                feas,
                l_aug: None,
                inner: None,
            });
        }
        z = z_new;
        lambda = lambda_new;
        history.push((x.clone(), z.clone(), lambda.clone()));
        if done {
            status = RunStatus::Converged;
            k_star = Some(k);
            break;
        }
    }
    Ok(PenaltyAdmmOutput {
        status,
        k_star,
        iterations,
        x,
        z,
        lambda,
        trace,
        max_identity_gap,
        history,
    })
}

/// `(tau, omega, beta)` for a given `gamma > 0`: `tau = 1/(gamma+1)`,
/// `omega = (gamma+1)/gamma`, `beta = rho/(gamma+1)`.
pub fn equivalence_mapping(gamma: f64, rho: f64) -> (f64, f64, f64) {
    (1.0 / (gamma + 1.0), (gamma + 1.0) / gamma, rho / (gamma + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub gamma: f64,
    pub rho: f64,
    pub iters: usize,
    pub max_dev_x: f64,
    pub max_dev_mu: f64,
    /// Largest `||beta z + lambda|| / ||lambda||` along the ADMM run.
    pub max_identity_gap: f64,
    pub pass: bool,
    #[serde(skip)]
    worst: Option<(usize, f64, f64)>,
}

/// Runs SDD-ADMM and the penalty ADMM side by side for `iters` steps and
/// compares `x^k` and `mu^k` against `-gamma lambda^k`.
pub fn equivalence_report(inst: &ProblemInstance, gamma: f64, rho: f64, theta: f64, iters: usize) -> Result<EquivalenceReport> {
    if !(gamma > 0.0) {
        return Err(param_err(format!("gamma must be positive, got {gamma}")));
    }
    if iters == 0 {
        return Err(param_err("iters must be positive"));
    }
    let (tau, omega, beta) = equivalence_mapping(gamma, rho);
    let sdd_params = SddParams {
        rho,
        omega,
        tau,
        theta,
        sweep: Sweep::GaussSeidel,
        max_iters: iters,
        eps: f64::MIN_POSITIVE,
        strict: false,
        policy: MonitorPolicy::Record,
        ..SddParams::default()
    };
    let a = sdd::run_with_history(inst, &sdd_params)?;
    let b = linearized_penalty_admm_run(
        inst,
        &PenaltyAdmmParams {
            rho,
            beta,
            theta,
            sweep: Sweep::GaussSeidel,
            eps: f64::MIN_POSITIVE,
            max_iters: iters,
            granularity: Granularity::default(),
        },
    )?;
    let ha = a.history.expect("history requested");
    let mut max_dev_x: f64 = 0.0;
    let mut max_dev_mu: f64 = 0.0;
    let mut worst: Option<(usize, f64, f64)> = None;
    for (k, ((xa, mua), (xb, _, lb))) in ha.iter().zip(&b.history).enumerate() {
        let dx = (xa - xb).norm();
        let dmu = (mua + lb * gamma).norm();
        max_dev_x = max_dev_x.max(dx);
        max_dev_mu = max_dev_mu.max(dmu);
        let threshold = EQUIVALENCE_REL_TOL * (1.0 + xa.norm() + mua.norm());
        let excess = dx + dmu - threshold;
        if excess > 0.0 && worst.map_or(true, |(_, e, _)| excess > e) {
            worst = Some((k, excess, threshold));
        }
    }
    let pass = worst.is_none() && ha.len() == b.history.len() && b.max_identity_gap <= 1e-12;
    Ok(EquivalenceReport {
        gamma,
        rho,
        iters,
        max_dev_x,
        max_dev_mu,
        max_identity_gap: b.max_identity_gap,
        pass,
        worst,
    })
}

/// Like [`equivalence_report`] but fails with [`Error::EquivalenceViolation`].
pub fn equivalence_check(inst: &ProblemInstance, gamma: f64, rho: f64, theta: f64, iters: usize) -> Result<EquivalenceReport> {
    let r = equivalence_report(inst, gamma, rho, theta, iters)?;
    if let Some((iteration, excess, threshold)) = r.worst {
        return Err(Error::EquivalenceViolation {
            iteration,
            deviation: excess + threshold,
            threshold,
        });
    }
    if !r.pass {
        return Err(Error::EquivalenceViolation {
            iteration: iters,
            deviation: r.max_identity_gap,
            threshold: 1e-12,
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascent_and_descent_signs_oppose() {
        let mu = DVector::from_element(1, 0.0);
        let r = DVector::from_element(1, 3.0);
        assert_eq!(dual_ascent_update(&mu, &r, 2.0)[0], 6.0);
        assert_eq!(crate::udd_affine::udd_dual_update(&mu, &r, 2.0)[0], -6.0);
    }

    #[test]
    fn mapping_values() {
        let (tau, omega, beta) = equivalence_mapping(1.0, 8.0);
        assert_eq!((tau, omega, beta), (0.5, 2.0, 4.0));
    }

    #[test]
    fn slack_first_step() {
        let h = DVector::from_element(2, 1.0);
        let z = slack_update(&DVector::zeros(2), &h, 2.0, 6.0);
        assert_eq!(z.as_slice(), &[-0.75, -0.75]);
    }

    #[test]
    fn rho_must_exceed_beta() {
        let p = PenaltyAdmmParams {
            rho: 1.0,
            beta: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
