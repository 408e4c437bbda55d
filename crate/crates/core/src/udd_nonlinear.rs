//! Unscaled dual descent ALM for nonlinear constraints.
//!
//! Outer step: an approximate KKT point `x^{k+1}` of
//! `min_{x in X} L_rho(x, mu^k) + (c/2)||x - x^k||^2` with `nu`-sufficient
//! descent, then `mu^{k+1} = mu^k - varrho h(x^{k+1})`.
//!
//! The descent oracle is projected gradient descent warm-started at `x^k`.
//! Every inner step decreases the subproblem objective, so
//! `L_rho(x^{k+1}, mu^k) <= L_rho(x^k, mu^k) - (c/2)||x^{k+1} - x^k||^2`
//! holds for any number of inner steps.
//!
//! `X` is described by the block kernels: boxes, balls or the whole space.
//! `g_0` must vanish.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::{nnls, singular_values};
use crate::monitor::{slack, DualSign, Monitor, MonitorLog, MonitorPolicy};
use crate::problem::ProblemInstance;
use crate::prox::ProxKernel;
use crate::sdd::{sweep_constant, Sweep};
use crate::trace::{Granularity, InnerStats, IterationRecord, RunStatus, Trace, TraceKind};

/// Absolute tolerance for the active set `{l : q_l(x) >= -T_ACT}`.
pub const T_ACT: f64 = 1e-8;
/// Full column rank iff `sigma_min > LICQ_REL_TOL * sigma_max`.
pub const LICQ_REL_TOL: f64 = 1e-8;
/// Inflation of the default proximal weight `c`.
pub const C_INFLATION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NlUddParams {
    pub rho: f64,
    /// Dual step; `rho / 8` when absent.
    pub varrho: Option<f64>,
    /// Proximal weight; `2 (L_f + rho J_h^2 + rho M_h L_h)` when absent.
    pub c: Option<f64>,
    /// Sufficient-descent modulus; `c / 2` when absent.
    pub nu: Option<f64>,
    pub inner_max_iters: usize,
    /// Inner KKT tolerance; `eps / 10` when absent.
    pub inner_tol: Option<f64>,
    pub eps: f64,
    pub max_iters: usize,
    pub mu0: Option<Vec<f64>>,
    pub policy: MonitorPolicy,
    pub dual_sign: DualSign,
    pub granularity: Granularity,
}

impl Default for NlUddParams {
    fn default() -> Self {
        Self {
            rho: 10.0,
            varrho: None,
            c: None,
            nu: None,
            inner_max_iters: 50_000,
            inner_tol: None,
            eps: 1e-3,
            max_iters: 100_000,
            mu0: None,
            policy: MonitorPolicy::Abort,
            dual_sign: DualSign::Standard,
            granularity: Granularity::default(),
        }
    }
}

impl NlUddParams {
    pub fn varrho(&self) -> f64 {
        self.varrho.unwrap_or(self.rho / 8.0)
    }

    pub fn c(&self, inst: &ProblemInstance) -> f64 {
        self.c.unwrap_or_else(|| default_c(inst, self.rho))
    }

    pub fn nu(&self, inst: &ProblemInstance) -> f64 {
        self.nu.unwrap_or_else(|| self.c(inst) / 2.0)
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner_tol.unwrap_or(self.eps / 10.0)
    }

    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(param_err(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.varrho() > 0.0) {
            return Err(param_err(format!("varrho must be positive, got {}", self.varrho())));
        }
        let c = self.c(inst);
        if !(c > 0.0 && c.is_finite()) {
            return Err(param_err(format!("c must be positive, got {c}")));
        }
        let nu = self.nu(inst);
        if !(nu > 0.0 && nu <= c / 2.0) {
            return Err(param_err(format!("nu must lie in (0, c/2], got {nu} with c = {c}")));
        }
        if !(self.eps > 0.0) {
            return Err(param_err(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.inner_tol() > 0.0) {
            return Err(param_err("inner tolerance must be positive"));
        }
        if self.max_iters == 0 || self.inner_max_iters == 0 {
            return Err(param_err("iteration budgets must be positive"));
        }
        Ok(())
    }
}

/// `C_INFLATION (L_f + rho J_h^2 + rho M_h L_h)`.
pub fn default_c(inst: &ProblemInstance, rho: f64) -> f64 {
    let a = inst.aggregate_constants();
    C_INFLATION * (inst.lf() + rho * a.j_h * a.j_h + rho * a.m_h * a.l_h)
}

/// `mu - varrho h`.
pub fn nl_dual_update(mu: &DVector<f64>, h: &DVector<f64>, varrho: f64) -> DVector<f64> {
    mu - h * varrho
}

/// One inequality `q_l(x) <= 0` describing part of `X`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ineq {
    /// `x_k - u <= 0`.
    Upper { k: usize, u: f64 },
    /// `l - x_k <= 0`.
    Lower { k: usize, l: f64 },
    /// `||x_r||^2 - r^2 <= 0`.
    Ball { range: Range<usize>, r: f64 },
}

impl Ineq {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            Ineq::Upper { k, u } => x[*k] - u,
            Ineq::Lower { k, l } => l - x[*k],
            Ineq::Ball { range, r } => x.rows_range(range.clone()).norm_squared() - r * r,
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        match self {
            Ineq::Upper { k, .. } => g[*k] = 1.0,
            Ineq::Lower { k, .. } => g[*k] = -1.0,
            Ineq::Ball { range, .. } => {
                let seg = x.rows_range(range.clone()) * 2.0;
                g.rows_range_mut(range.clone()).copy_from(&seg);
            }
        }
        g
    }
}

/// `X = {x : q_l(x) <= 0}` assembled from the block kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct IneqSet {
    pub ineqs: Vec<Ineq>,
    pub t_act: f64,
}

impl IneqSet {
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let s = inst.structure();
        let mut ineqs = Vec::new();
        for (i, g) in inst.prox_terms().iter().enumerate() {
            let r = s.range(i);
            match *g {
                ProxKernel::Zero => {}
                ProxKernel::Box { lo, hi } => {
                    for k in r {
                        ineqs.push(Ineq::Upper { k, u: hi });
                        ineqs.push(Ineq::Lower { k, l: lo });
                    }
                }
                ProxKernel::Ball { radius } => ineqs.push(Ineq::Ball { range: r, r: radius }),
                ref other => {
                    return Err(Error::Unsupported(format!(
                        "nonlinear solver needs box, ball or zero kernels, block {i} has {other:?}"
                    )))
                }
            }
        }
        Ok(Self { ineqs, t_act: T_ACT })
    }

    pub fn len(&self) -> usize {
        self.ineqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ineqs.is_empty()
    }

    pub fn values(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.ineqs.iter().map(|q| q.value(x)))
    }

    pub fn active(&self, x: &DVector<f64>) -> Vec<usize> {
        (0..self.len()).filter(|&l| self.ineqs[l].value(x) >= -self.t_act).collect()
    }

    /// Active gradients as columns.
    pub fn active_gradients(&self, x: &DVector<f64>, active: &[usize]) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = active.iter().map(|&l| self.ineqs[l].gradient(x)).collect();
        if cols.is_empty() {
            DMatrix::zeros(x.len(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

/// Multipliers `y >= 0` on the active set of `X` at `x` for a gradient `grad`,
/// with residual `r = grad + sum y_l grad q_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFit {
    pub y: DVector<f64>,
    pub residual: DVector<f64>,
}

/// Closed-form recovery: each inequality of a box or ball acts on its own
/// coordinates, so `y_l = max(0, -<grad, grad q_l> / ||grad q_l||^2)`.
pub fn recover_multipliers(set: &IneqSet, x: &DVector<f64>, grad: &DVector<f64>) -> MultiplierFit {
    let mut y = DVector::zeros(set.len());
    let mut residual = grad.clone();
    for l in set.active(x) {
        let gq = set.ineqs[l].gradient(x);
        let nsq = gq.norm_squared();
        if nsq == 0.0 {
            continue;
        }
        let yl = (-residual.dot(&gq) / nsq).max(0.0);
        if yl > 0.0 {
            residual.axpy(yl, &gq, 1.0);
            y[l] = yl;
        }
    }
    MultiplierFit { y, residual }
}

/// General recovery by nonnegative least squares over the active gradients.
pub fn recover_multipliers_nnls(set: &IneqSet, x: &DVector<f64>, grad: &DVector<f64>) -> MultiplierFit {
    let active = set.active(x);
    let gq = set.active_gradients(x, &active);
    let ya = nnls(&gq, &(-grad));
    let mut y = DVector::zeros(set.len());
    for (j, &l) in active.iter().enumerate() {
        y[l] = ya[j];
    }
    let residual = grad + &gq * &ya;
    MultiplierFit { y, residual }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// `grad L_rho(x, mu) + c (x - x^k) + sum y_l grad q_l(x)`.
    pub residual: DVector<f64>,
    pub inner_iters: usize,
    pub converged: bool,
}

/// Projected gradient on `L_rho(., mu) + (c/2)||. - x^k||^2` over `X`, warm
/// started at `x^k`, until the KKT residual drops to `tol`.
#[allow(clippy::too_many_arguments)]
pub fn subproblem_solve(
    inst: &ProblemInstance,
    set: &IneqSet,
    xk: &DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    c: f64,
    tol: f64,
    budget: usize,
) -> Result<SubproblemSolution> {
    let step = sweep_constant(inst, Sweep::Jacobi, mu.norm(), rho) + c;
    let grad_at = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(inst.k_gradient(x, mu, rho)? + (x - xk) * c) };
    let mut x = xk.clone();
    let mut grad = grad_at(&x)?;
    let mut fit = recover_multipliers(set, &x, &grad);
    let mut iters = 0;
    while fit.residual.norm() > tol && iters < budget {
        x = inst.prox_all(step, &(&x - &grad / step))?;
        grad = grad_at(&x)?;
        fit = recover_multipliers(set, &x, &grad);
        iters += 1;
    }
    let converged = fit.residual.norm() <= tol;
    Ok(SubproblemSolution {
        x,
        y: fit.y,
        residual: fit.residual,
        inner_iters: iters,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LicqReport {
    pub full_column_rank: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub active: usize,
    pub columns: usize,
}

/// Rank of `H = [grad h(x), {grad q_l(x)}_{l active}]`.
pub fn licq_diagnostic(inst: &ProblemInstance, set: &IneqSet, x: &DVector<f64>) -> LicqReport {
    let active = set.active(x);
    let h = stacked_jacobian(inst, set, x, &active);
    licq_of(&h, active.len())
}

fn stacked_jacobian(inst: &ProblemInstance, set: &IneqSet, x: &DVector<f64>, active: &[usize]) -> DMatrix<f64> {
    let jh = inst.jacobian(x);
    let gq = set.active_gradients(x, active);
    let n = x.len();
    let mut h = DMatrix::zeros(n, jh.ncols() + gq.ncols());
    h.view_mut((0, 0), (n, jh.ncols())).copy_from(&jh);
    h.view_mut((0, jh.ncols()), (n, gq.ncols())).copy_from(&gq);
    h
}

fn licq_of(h: &DMatrix<f64>, active: usize) -> LicqReport {
    let columns = h.ncols();
    if columns == 0 {
        return LicqReport {
            full_column_rank: true,
            sigma_min: f64::INFINITY,
            sigma_max: 0.0,
            active,
            columns,
        };
    }
    let s = singular_values(h);
    let sigma_max = s.first().cloned().unwrap_or(0.0);
    // more columns than rows: some singular value is zero
    let sigma_min = if columns > h.nrows() { 0.0 } else { s.last().cloned().unwrap_or(0.0) };
    LicqReport {
        full_column_rank: sigma_min > LICQ_REL_TOL * sigma_max,
        sigma_min,
        sigma_max,
        active,
        columns,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    /// `mu^{k+1}`.
    pub mu: Vec<f64>,
    pub y: Vec<f64>,
    /// `xi = grad f(x) + grad h(x) mu + sum y_l grad q_l(x)`.
    pub xi: Vec<f64>,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    /// `max_l q_l(x)`.
    pub max_ineq: f64,
}

#[derive(Debug, Clone)]
pub struct NlUddOutput {
    pub status: RunStatus,
    pub k_star: Option<usize>,
    pub iterations: usize,
    pub x: DVector<f64>,
    pub mu: DVector<f64>,
    pub y: DVector<f64>,
    pub c: f64,
    pub nu: f64,
    pub varrho: f64,
    pub l_aug0: f64,
    pub trace: Trace,
    pub certificate: Option<KktCertificate>,
    pub monitors: MonitorLog,
    /// Iterations at which the stacked Jacobian had full column rank.
    pub licq_ok: usize,
    pub licq_final: Option<LicqReport>,
    sigma2: f64,
}

impl NlUddOutput {
    /// `sigma_1 = min(nu, varrho)`.
    pub fn sigma1(&self) -> f64 {
        self.nu.min(self.varrho)
    }

    /// `sigma_2 = c + (rho + varrho) max_X ||grad h||`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Iteration ceiling for tolerance `eps`, given the optimal value `f(x*)`.
    pub fn theorem_bound(&self, optimal_value: f64, eps: f64) -> f64 {
        theorem_iteration_bound(self.sigma1(), self.sigma2, self.l_aug0 - optimal_value, eps)
    }
}

/// `ceil(max(1, sigma2)^2 gap / (sigma1 eps^2))`.
pub fn theorem_iteration_bound(sigma1: f64, sigma2: f64, gap: f64, eps: f64) -> f64 {
    (sigma2.max(1.0).powi(2) * gap.max(0.0) / (sigma1 * eps * eps)).ceil()
}

/// Upper bound on `||grad h(x)||` over `X`: `sqrt(p) J_h`.
pub fn jacobian_bound(inst: &ProblemInstance) -> f64 {
    (inst.structure().p() as f64).sqrt() * inst.aggregate_constants().j_h
}

pub fn run(inst: &ProblemInstance, params: &NlUddParams) -> Result<NlUddOutput> {
    params.validate(inst)?;
    let set = IneqSet::from_instance(inst)?;
    let s = inst.structure();
    let rho = params.rho;
    let varrho = params.varrho();
    let c = params.c(inst);
    let nu = params.nu(inst);
    let inner_tol = params.inner_tol();
    let sign = params.dual_sign.factor();
    let jbound = jacobian_bound(inst);
    let sigma2 = c + (rho + varrho) * jbound;

    let mut x = inst.x0().clone();
    let mut mu = match &params.mu0 {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(s.m()),
    };
    s.check_dual(&mu)?;
    let l_aug0 = al(inst, &x, &mu, rho)?;
    let mut l_cur = l_aug0;
    let mut y = DVector::zeros(set.len());

    let mut monitors = MonitorLog::new(params.policy);
    let mut trace = Trace::new(TraceKind::Nonlinear);
    let mut certificate = None;
    let mut status = RunStatus::MaxIters;
    let mut k_star = None;
    let mut iterations = 0;
    let mut licq_ok = 0;
    let mut licq_final = None;

    for k in 0..params.max_iters {
        let sol = subproblem_solve(inst, &set, &x, &mu, rho, c, inner_tol, params.inner_max_iters)?;
        iterations = k + 1;
        let dx = &sol.x - &x;
        let dx_sq = dx.norm_squared();

        let l_mid = al(inst, &sol.x, &mu, rho)?;
        if l_mid + nu * dx_sq > l_cur + slack(l_cur) {
            return Err(Error::OracleFailure {
                iteration: k,
                reason: format!(
                    "no {nu:e}-sufficient descent after {} inner steps: {:e} > {:e}",
                    sol.inner_iters,
                    l_mid + nu * dx_sq,
                    l_cur
                ),
            });
        }
        monitors.check_le(k, Monitor::SufficientDescent, l_mid + nu * dx_sq, l_cur + slack(l_cur))?;
        if !sol.converged {
            log::warn!(
                "inner budget exhausted at k={k}: residual {:e} > {inner_tol:e}",
                sol.residual.norm()
            );
        }

        x = sol.x;
        y = sol.y;
        let h = inst.aggregate_h(&x)?;
        let h_norm = h.norm();
        let mu_new = &mu - &h * (sign * varrho);
        let l_new = al(inst, &x, &mu_new, rho)?;

        monitors.check_le(
            k,
            Monitor::CombinedDescent,
            l_new + nu * dx_sq + varrho * h_norm * h_norm,
            l_cur + slack(l_cur),
        )?;

        // KKT quantities at x^{k+1} with multiplier mu^{k+1}
        let q = set.values(&x);
        let mut xi = inst.gradient_with_weight(&x, &mu_new);
        for (l, ineq) in set.ineqs.iter().enumerate() {
            if y[l] != 0.0 {
                xi.axpy(y[l], &ineq.gradient(&x), 1.0);
            }
        }
        let stationarity = xi.norm();
        let compl_max = y.iter().zip(q.iter()).map(|(a, b)| (a * b).abs()).fold(0.0, f64::max);
        let y_max = y.iter().cloned().fold(0.0, f64::max);
        let max_ineq = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        monitors.check_le(k, Monitor::Complementarity, compl_max, inner_tol)?;
        let y_min = y.iter().cloned().fold(0.0, f64::min);
        monitors.check_le(k, Monitor::Complementarity, -y_min, 0.0)?;

        let r_norm = sol.residual.norm();
        let bound = c * dx_sq.sqrt() + (rho + varrho) * jbound * h_norm + r_norm;
        monitors.check_le(k, Monitor::DualResidualBound, stationarity, bound + slack(bound))?;

        // ||mu^{k+1}|| <= ||H^+|| ||e|| when H has full column rank
        let active = set.active(&x);
        let hmat = stacked_jacobian(inst, &set, &x, &active);
        let licq = licq_of(&hmat, active.len());
        if licq.full_column_rank {
            licq_ok += 1;
            // e = -grad f - (rho + varrho) grad h h - c dx + r
            let e = -inst.gradient_with_weight(&x, &(&h * (rho + varrho))) - &dx * c + &sol.residual;
            let e_norm = e.norm();
            let rhs = e_norm / licq.sigma_min;
            monitors.check_le(k, Monitor::NonlinearDualBound, mu_new.norm(), rhs + slack(rhs))?;
        }

        let below_floor = l_new + slack(l_new) < inst.p_lb();
        monitors.check_le(k, Monitor::RegularityGuard, inst.p_lb(), l_new + slack(l_new))?;

        let done = stationarity <= params.eps && h_norm <= params.eps && compl_max <= params.eps && max_ineq <= T_ACT;
        let diverged = below_floor && !done;
        let last = done || diverged || k + 1 == params.max_iters;
        if params.granularity.keep(k, last) {
            trace.rows.push(IterationRecord {
                k,
                potential: l_new,
                lip: c,
                h_norm,
                mu_norm: mu_new.norm(),
                max_block_disp: (0..s.p()).map(|i| dx.rows_range(s.range(i)).norm()).fold(0.0, f64::max),
                resid_max: stationarity,
                feas: h_norm,
                l_aug: Some(l_new),
                inner: Some(InnerStats {
                    inner_iters: sol.inner_iters,
                    y_max,
                    compl_max,
                    licq_sigma_min: licq.sigma_min,
                }),
            });
        }
        if last {
            certificate = Some(KktCertificate {
                mu: mu_new.iter().cloned().collect(),
                y: y.iter().cloned().collect(),
                xi: xi.iter().cloned().collect(),
                stationarity,
                feasibility: h_norm,
                complementarity: compl_max,
                max_ineq,
            });
            licq_final = Some(licq);
        }
        mu = mu_new;
        l_cur = l_new;
        if done {
            status = RunStatus::Converged;
            k_star = Some(k);
            break;
        }
        if diverged {
            log::warn!("udd_nonlinear: L_rho fell below P_lb at k={k}; regularity likely violated");
            status = RunStatus::Diverged;
            break;
        }
    }

    log::info!("udd_nonlinear: status {status:?} after {iterations} steps, c {c:e}");
    Ok(NlUddOutput {
        status,
        k_star,
        iterations,
        x,
        mu,
        y,
        c,
        nu,
        varrho,
        l_aug0,
        trace,
        certificate,
        monitors,
        licq_ok,
        licq_final,
        sigma2,
    })
}

fn al(inst: &ProblemInstance, x: &DVector<f64>, mu: &DVector<f64>, rho: f64) -> Result<f64> {
    inst.augmented_lagrangian(x, mu, rho)?
        .finite()
        .ok_or_else(|| Error::Config("augmented Lagrangian is infinite at an iterate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_update_arithmetic() {
        let mu = DVector::from_vec(vec![1.0, 1.0]);
        let h = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(nl_dual_update(&mu, &h, 1.0).as_slice(), &[0.0, 2.0]);
        assert_eq!(nl_dual_update(&mu, &DVector::zeros(2), 1.0), mu);
    }

    #[test]
    fn box_multipliers_match_nnls() {
        let set = IneqSet {
            ineqs: vec![
                Ineq::Upper { k: 0, u: 1.0 },
                Ineq::Lower { k: 0, l: -1.0 },
                Ineq::Upper { k: 1, u: 1.0 },
                Ineq::Lower { k: 1, l: -1.0 },
            ],
            t_act: T_ACT,
        };
        let x = DVector::from_vec(vec![1.0, -1.0]);
        // pushing outward on both faces: y = clamped gradient components
        let g = DVector::from_vec(vec![-3.0, 2.0]);
        let a = recover_multipliers(&set, &x, &g);
        let b = recover_multipliers_nnls(&set, &x, &g);
        assert_eq!(a.y.as_slice(), &[3.0, 0.0, 0.0, 2.0]);
        assert!((a.y - b.y).norm() < 1e-12);
        assert!(a.residual.norm() < 1e-15);
        // pulling inward: no multiplier, residual is the gradient
        let g2 = DVector::from_vec(vec![3.0, 0.0]);
        assert_eq!(recover_multipliers(&set, &x, &g2).residual, g2);
    }

    #[test]
    fn ball_multiplier() {
        let set = IneqSet {
            ineqs: vec![Ineq::Ball { range: 0..2, r: 1.0 }],
            t_act: T_ACT,
        };
        let x = DVector::from_vec(vec![0.6, 0.8]);
        let g = DVector::from_vec(vec![-1.2, -1.6]);
        let fit = recover_multipliers(&set, &x, &g);
        assert!((fit.y[0] - 1.0).abs() < 1e-12);
        assert!(fit.residual.norm() < 1e-12);
    }

    #[test]
    fn licq_rank_cases() {
        let single = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        assert!(licq_of(&single, 0).full_column_rank);
        let dup = DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(!licq_of(&dup, 0).full_column_rank);
        let wide = DMatrix::from_column_slice(1, 2, &[1.0, 2.0]);
        let r = licq_of(&wide, 1);
        assert!(!r.full_column_rank);
        assert_eq!(r.sigma_min, 0.0);
    }
}
