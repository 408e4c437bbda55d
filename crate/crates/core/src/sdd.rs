//! Scaled dual descent ADMM (SDD-ADMM; SDD-ALM when `p = 1`).
//!
//! Each iteration takes one proximal gradient step per block on the smooth
//! part `K_rho` with step `1 / (theta Lip(mu^k, rho))`, then updates
//! `mu^{k+1} = (tau mu^k - rho h(x^{k+1}) / omega) / (1 + tau)`.
//! The potential `P = L_rho + (omega / 2 rho) ||mu||^2` is monitored every step.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::monitor::{slack, DualSign, Monitor, MonitorLog, MonitorPolicy};
use crate::problem::{ExtReal, ProblemInstance};
use crate::trace::{Granularity, IterationRecord, RunStatus, Trace, TraceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    #[default]
    GaussSeidel,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMode {
    #[default]
    Explicit,
    /// `rho = 4 dP / eps^2`.
    Eps2Rule,
    /// `rho = max(1, C / eps)`.
    Eps1Rule,
}

/// Pilot penalty for estimating the `eps1_rule` constant.
pub const PILOT_RHO: f64 = 1.0;
/// Pilot run length for estimating the `eps1_rule` constant.
pub const PILOT_ITERS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SddParams {
    pub rho: f64,
    pub omega: f64,
    pub theta: f64,
    pub tau: f64,
    pub sweep: Sweep,
    pub max_iters: usize,
    pub eps: f64,
    pub rho_mode: RhoMode,
    /// Constant `C` of `eps1_rule`; estimated by a pilot run when absent.
    pub eps1_c: Option<f64>,
    /// Enforce `omega >= 4`. The penalty-ADMM correspondence needs smaller
    /// `omega`; with the guard off the boundedness monitors are skipped.
    pub strict: bool,
    pub policy: MonitorPolicy,
    pub dual_sign: DualSign,
    pub granularity: Granularity,
}

impl Default for SddParams {
    fn default() -> Self {
        Self {
            rho: 10.0,
            omega: 4.0,
            theta: 2.0,
            tau: 1.0,
            sweep: Sweep::GaussSeidel,
            max_iters: 100_000,
            eps: 1e-3,
            rho_mode: RhoMode::Explicit,
            eps1_c: None,
            strict: true,
            policy: MonitorPolicy::Abort,
            dual_sign: DualSign::Standard,
            granularity: Granularity::default(),
        }
    }
}

impl SddParams {
    pub fn validate(&self) -> Result<()> {
        if self.rho_mode == RhoMode::Explicit && !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(param_err(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.theta > 1.0) {
            return Err(param_err(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.tau >= 0.0) {
            return Err(param_err(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if self.strict && !(self.omega >= 4.0) {
            return Err(param_err(format!("omega must be at least 4, got {}", self.omega)));
        }
        if !(self.omega > 0.0) {
            return Err(param_err(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.eps > 0.0) {
            return Err(param_err(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters == 0 {
            return Err(param_err("max_iters must be positive"));
        }
        if let Some(c) = self.eps1_c {
            if !(c > 0.0) {
                return Err(param_err(format!("eps1 constant must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Explicit first-order certificate at `x^{k+1}`:
/// `xi_i` lies in `grad_i f(x) + dg_i(x_i) + grad h_i(x_i) lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCertificate {
    /// `mu^k + rho h(x^{k+1})`.
    pub lambda: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
    pub residual: f64,
    pub feasibility: f64,
}

#[derive(Debug, Clone)]
pub struct SddOutput {
    pub status: RunStatus,
    /// Index `k` of the step whose end point `x^{k+1}` passed the stopping test.
    pub k_star: Option<usize>,
    /// Steps performed.
    pub iterations: usize,
    pub rho: f64,
    pub x: DVector<f64>,
    pub mu: DVector<f64>,
    pub trace: Trace,
    pub certificate: Option<StationarityCertificate>,
    pub monitors: MonitorLog,
    /// Theorem ceiling on the number of steps, when `kappa1 > 0`.
    pub theorem_bound: Option<f64>,
    /// Largest `||mu^k + rho h(x^{k+1})||` seen.
    pub mu_tilde_max: f64,
    /// Every iterate, when requested with [`run_with_history`].
    pub history: Option<Vec<(DVector<f64>, DVector<f64>)>>,
}

/// `(tau mu - sign * rho h / omega) / (1 + tau)`.
pub fn sdd_dual_update(mu: &DVector<f64>, h: &DVector<f64>, tau: f64, omega: f64, rho: f64) -> DVector<f64> {
    signed_dual_update(mu, h, tau, omega, rho, DualSign::Standard)
}

pub(crate) fn signed_dual_update(
    mu: &DVector<f64>,
    h: &DVector<f64>,
    tau: f64,
    omega: f64,
    rho: f64,
    sign: DualSign,
) -> DVector<f64> {
    (mu * tau - h * (sign.factor() * rho / omega)) / (1.0 + tau)
}

/// `L_rho(x, mu) + (omega / 2 rho) ||mu||^2`.
pub fn potential(inst: &ProblemInstance, x: &DVector<f64>, mu: &DVector<f64>, rho: f64, omega: f64) -> Result<ExtReal> {
    if !(rho > 0.0) {
        return Err(param_err("potential needs rho > 0"));
    }
    Ok(inst.augmented_lagrangian(x, mu, rho)? + omega / (2.0 * rho) * mu.norm_squared())
}

/// One block update: `prox(g_i; eta = theta lip; x_i^k - grad / (theta lip))`
/// where `grad = grad_{x_i} K_rho(x_mixed, mu)`.
pub fn block_step(
    inst: &ProblemInstance,
    i: usize,
    x_mixed: &DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    theta: f64,
    lip: f64,
) -> Result<DVector<f64>> {
    let grad = inst.k_block_gradient(i, x_mixed, mu, rho)?;
    prox_gradient_block(inst, i, &inst.block(x_mixed, i), &grad, theta, lip)
}

pub(crate) fn prox_gradient_block(
    inst: &ProblemInstance,
    i: usize,
    xi: &DVector<f64>,
    grad: &DVector<f64>,
    theta: f64,
    lip: f64,
) -> Result<DVector<f64>> {
    if lip <= 0.0 {
        if grad.norm() == 0.0 {
            return Ok(xi.clone());
        }
        return Err(Error::Config(
            "Lip(mu, rho) = 0 with a nonzero gradient; constants are degenerate".into(),
        ));
    }
    let eta = theta * lip;
    let z = xi - grad / eta;
    inst.prox_terms()[i].prox(eta, &z)
}

/// Step constant for a sweep: `Lip(mu, rho)` for Gauss-Seidel; for Jacobi the
/// full-vector constant `L_f + ||mu|| L_h + rho (p J_h K_h + M_h L_h)`.
pub fn sweep_constant(inst: &ProblemInstance, sweep: Sweep, mu_norm: f64, rho: f64) -> f64 {
    match sweep {
        Sweep::GaussSeidel => inst.lip(mu_norm, rho),
        Sweep::Jacobi => {
            let a = inst.aggregate_constants();
            let p = inst.structure().p() as f64;
            inst.lf() + mu_norm * a.l_h + rho * (p * a.j_h * a.k_h + a.m_h * a.l_h)
        }
    }
}

/// `ceil(2 p (theta+1)^2 (L_f + kappa2 rho)^2 dP / (rho (theta-1) kappa1 eps^2))`.
pub fn theorem_iteration_bound(inst: &ProblemInstance, rho: f64, theta: f64, eps: f64) -> Option<f64> {
    let a = inst.aggregate_constants();
    let kappa1 = a.kappa1();
    if kappa1 <= 0.0 {
        return None;
    }
    let dp = inst.delta_p();
    let kappa2 = a.l_h * dp.sqrt() + kappa1;
    let p = inst.structure().p() as f64;
    let num = 2.0 * p * (theta + 1.0).powi(2) * (inst.lf() + kappa2 * rho).powi(2) * dp;
    let den = rho * (theta - 1.0) * kappa1 * eps * eps;
    Some((num / den).ceil())
}

/// Resolves `rho` for the chosen rule.
pub fn resolve_rho(inst: &ProblemInstance, params: &SddParams) -> Result<f64> {
    match params.rho_mode {
        RhoMode::Explicit => Ok(params.rho),
        RhoMode::Eps2Rule => {
            let dp = inst.delta_p();
            if dp <= 0.0 {
                // a zero gap means x0 already minimizes f + g over X
                return Ok(1.0);
            }
            Ok(4.0 * dp / (params.eps * params.eps))
        }
        RhoMode::Eps1Rule => {
            let c = match params.eps1_c {
                Some(c) => c,
                None => eps1_constant(inst, params)?,
            };
            Ok((c / params.eps).max(1.0))
        }
    }
}

/// `2 max(Lambda_pilot, sqrt(rho0 dP))`, where `Lambda_pilot` is the largest
/// `||mu^k + rho0 h(x^{k+1})||` over a short pilot run at `rho0 = 1`.
pub fn eps1_constant(inst: &ProblemInstance, params: &SddParams) -> Result<f64> {
    let pilot = SddParams {
        rho: PILOT_RHO,
        rho_mode: RhoMode::Explicit,
        max_iters: PILOT_ITERS,
        eps: 0.0_f64.max(f64::MIN_POSITIVE),
        policy: MonitorPolicy::Record,
        granularity: Granularity { every: usize::MAX },
        ..params.clone()
    };
    let out = run_inner(inst, &pilot, PILOT_RHO, false)?;
    let c = 2.0 * out.mu_tilde_max.max((PILOT_RHO * inst.delta_p()).sqrt());
    log::info!("eps1_rule pilot: Lambda estimate {:e}, C = {c:e}", out.mu_tilde_max);
    Ok(c.max(f64::MIN_POSITIVE))
}

/// One primal sweep in place. `lin_grads[i]` receives the block gradient at
/// the linearization point of block `i`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn primal_sweep(
    inst: &ProblemInstance,
    sweep: Sweep,
    x: &mut DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    theta: f64,
    lip: f64,
    lin_grads: &mut Vec<DVector<f64>>,
) -> Result<()> {
    let s = inst.structure().clone();
    lin_grads.clear();
    match sweep {
        Sweep::GaussSeidel => {
            // maintain h at the mixed point incrementally
            let mut h_blocks = inst.h_blocks(x)?;
            let mut h_mixed = DVector::zeros(s.m());
            for hb in &h_blocks {
                h_mixed += hb;
            }
            for i in 0..s.p() {
                let w = mu + &h_mixed * rho;
                let grad = inst.block_gradient_with_weight(i, x, &w);
                let xi_old = inst.block(x, i);
                let xi_new = prox_gradient_block(inst, i, &xi_old, &grad, theta, lip)?;
                x.rows_range_mut(s.range(i)).copy_from(&xi_new);
                let hb_new = inst.h_block(i, &xi_new);
                h_mixed += &hb_new - &h_blocks[i];
                h_blocks[i] = hb_new;
                lin_grads.push(grad);
            }
        }
        Sweep::Jacobi => {
            let x_old = x.clone();
            let h_old = inst.aggregate_h(&x_old)?;
            let w = mu + &h_old * rho;
            for i in 0..s.p() {
                let grad = inst.block_gradient_with_weight(i, &x_old, &w);
                let xi_new = prox_gradient_block(inst, i, &inst.block(&x_old, i), &grad, theta, lip)?;
                x.rows_range_mut(s.range(i)).copy_from(&xi_new);
                lin_grads.push(grad);
            }
        }
    }
    Ok(())
}

/// `xi_i = grad_i f(x+) + grad h_i(x_i+) lambda - grad_lin_i - eta (x_i+ - x_i)`
/// and `max_i ||xi_i||`; `disp[i]` receives `||x_i+ - x_i||`.
pub(crate) fn block_certificate(
    inst: &ProblemInstance,
    x_old: &DVector<f64>,
    x: &DVector<f64>,
    lin_grads: &[DVector<f64>],
    lambda: &DVector<f64>,
    eta: f64,
    disp: &mut [f64],
) -> (Vec<DVector<f64>>, f64) {
    let p = inst.structure().p();
    let mut xi = Vec::with_capacity(p);
    let mut resid_max: f64 = 0.0;
    for i in 0..p {
        let d = inst.block(x, i) - inst.block(x_old, i);
        disp[i] = d.norm();
        let v = inst.block_gradient_with_weight(i, x, lambda) - &lin_grads[i] - d * eta;
        resid_max = resid_max.max(v.norm());
        xi.push(v);
    }
    (xi, resid_max)
}

pub fn run(inst: &ProblemInstance, params: &SddParams) -> Result<SddOutput> {
    params.validate()?;
    let rho = resolve_rho(inst, params)?;
    run_inner(inst, params, rho, false)
}

/// Like [`run`] but also returns every iterate `(x^k, mu^k)`, `k = 0..=K`.
pub fn run_with_history(inst: &ProblemInstance, params: &SddParams) -> Result<SddOutput> {
    params.validate()?;
    let rho = resolve_rho(inst, params)?;
    run_inner(inst, params, rho, true)
}

fn run_inner(inst: &ProblemInstance, params: &SddParams, rho: f64, keep_history: bool) -> Result<SddOutput> {
    let s = inst.structure().clone();
    let p = s.p();
    let theta = params.theta;
    let (omega, tau) = (params.omega, params.tau);
    let agg = inst.aggregate_constants();
    let dp = inst.delta_p();
    let kappa1 = agg.kappa1();
    let kappa2 = agg.l_h * dp.max(0.0).sqrt() + kappa1;
    let bounds_apply = omega >= 4.0;

    let mut x = inst.x0().clone();
    let mut mu = DVector::zeros(s.m());
    let mut pot = potential(inst, &x, &mu, rho, omega)?
        .finite()
        .ok_or_else(|| Error::Config("potential is infinite at x0".into()))?;

    let mut monitors = MonitorLog::new(params.policy);
    let mut trace = Trace::new(TraceKind::Basic);
    let mut history = keep_history.then(|| vec![(x.clone(), mu.clone())]);
    let mut certificate = None;
    let mut status = RunStatus::MaxIters;
    let mut k_star = None;
    let mut mu_tilde_max: f64 = 0.0;
    let mut iterations = 0;

    // scratch: K-gradients at the linearization points and block displacements
    let mut lin_grads: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut disp = vec![0.0; p];

    for k in 0..params.max_iters {
        let mu_norm = mu.norm();
        let lip_std = inst.lip(mu_norm, rho);
        let lip = sweep_constant(inst, params.sweep, mu_norm, rho);
        let eta = theta * lip;

        let x_old = x.clone();
        primal_sweep(inst, params.sweep, &mut x, &mu, rho, theta, lip, &mut lin_grads)?;
        iterations = k + 1;

        let h_new = inst.aggregate_h(&x)?;
        let h_norm = h_new.norm();
        let mu_tilde = &mu + &h_new * rho;
        mu_tilde_max = mu_tilde_max.max(mu_tilde.norm());
        let (xi, resid_max) = block_certificate(inst, &x_old, &x, &lin_grads, &mu_tilde, eta, &mut disp);

        let mu_new = signed_dual_update(&mu, &h_new, tau, omega, rho, params.dual_sign);
        let pot_new = potential(inst, &x, &mu_new, rho, omega)?.to_f64();

        // one-step progress
        let sq_disp: f64 = disp.iter().map(|d| d * d).sum();
        let dmu_sq = (&mu_new - &mu).norm_squared();
        let progress = 0.5 * (theta - 1.0) * lip * sq_disp + (tau + 0.5) * (omega / rho) * dmu_sq;
        monitors.check_le(k, Monitor::PotentialDescent, pot_new + progress, pot + slack(pot))?;
        monitors.check_le(k, Monitor::PotentialMonotone, pot_new, pot + slack(pot))?;

        // dual residual bound, per block
        for i in 0..p {
            let tail: f64 = match params.sweep {
                Sweep::GaussSeidel => disp[i..].iter().sum(),
                Sweep::Jacobi => disp.iter().sum(),
            };
            let rhs = (theta + 1.0) * lip * tail;
            let lhs = xi[i].norm();
            monitors.check_le(k, Monitor::DualResidualBound, lhs, rhs + slack(rhs))?;
        }

        if bounds_apply {
            let mu_new_norm = mu_new.norm();
            monitors.check_le(k, Monitor::PotentialLowerBound, inst.p_lb(), pot_new + slack(pot_new))?;
            let h_bound = (4.0 * dp / rho).sqrt();
            monitors.check_le(k, Monitor::PrimalResidualBound, h_norm, h_bound + slack(h_bound))?;
            let mu_bound = (rho * dp).sqrt();
            monitors.check_le(k, Monitor::DualVariableBound, mu_new_norm, mu_bound + slack(mu_bound))?;
            let lower = rho * kappa1;
            let upper = inst.lf() + rho * kappa2;
            monitors.check_le(k, Monitor::LipSandwich, lower, lip_std + slack(lip_std))?;
            monitors.check_le(k, Monitor::LipSandwich, lip_std, upper + slack(upper))?;
        }

        let done = resid_max <= params.eps && h_norm <= params.eps;
        let last = done || k + 1 == params.max_iters;
        if params.granularity.keep(k, last) {
            trace.rows.push(IterationRecord {
                k,
                potential: pot_new,
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
        pot = pot_new;
        if let Some(hist) = history.as_mut() {
            hist.push((x.clone(), mu.clone()));
        }
        if done {
            status = RunStatus::Converged;
            k_star = Some(k);
            break;
        }
    }

    log::info!(
        "sdd: status {:?} after {iterations} steps, rho {rho:e}, max ||mu~|| {mu_tilde_max:e}",
        status
    );
    Ok(SddOutput {
        status,
        k_star,
        iterations,
        rho,
        x,
        mu,
        trace,
        certificate,
        monitors,
        theorem_bound: theorem_iteration_bound(inst, rho, theta, params.eps),
        mu_tilde_max,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_update_arithmetic() {
        let mu = DVector::from_element(1, 4.0);
        let h = DVector::from_element(1, 1.0);
        assert_eq!(sdd_dual_update(&mu, &h, 1.0, 4.0, 8.0)[0], 1.0);
        // tau = 0: a scaled copy of the residual
        assert_eq!(sdd_dual_update(&mu, &h, 0.0, 4.0, 8.0)[0], -2.0);
        // zero residual halves mu when tau = 1
        assert_eq!(sdd_dual_update(&mu, &DVector::zeros(1), 1.0, 4.0, 8.0)[0], 2.0);
    }

    #[test]
    fn params_guard() {
        let p = SddParams {
            omega: 2.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let relaxed = SddParams {
            omega: 2.0,
            strict: false,
            ..Default::default()
        };
        assert!(relaxed.validate().is_ok());
        let bad_theta = SddParams {
            theta: 1.0,
            ..Default::default()
        };
        assert!(bad_theta.validate().is_err());
    }
}
