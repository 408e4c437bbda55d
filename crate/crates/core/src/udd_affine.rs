//! Unscaled dual descent ALM for affine constraints `h(x) = Ax - b`.
//!
//! One proximal gradient step on `L_rho(., mu^k)` with the constant step
//! `1 / (theta L_K)`, `L_K = L_f + rho ||A^T A||`, followed by
//! `mu^{k+1} = mu^k - varrho (A x^{k+1} - b)`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::{numerical_rank, power_iteration_ata, PowerEstimate};
use crate::monitor::{slack, DualSign, Monitor, MonitorLog, MonitorPolicy};
use crate::problem::ProblemInstance;
use crate::prox::{Domain, ProxKernel};
use crate::trace::{Granularity, IterationRecord, RunStatus, Trace, TraceKind};

/// Relative tolerance of the exact dual-update identity.
pub const IDENTITY_REL_TOL: f64 = 1e-10;
/// Singular values below `RANK_REL_TOL * sigma_max` count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UddParams {
    pub rho: f64,
    /// Dual step; `rho / 8` when absent.
    pub varrho: Option<f64>,
    pub theta: f64,
    pub eps: f64,
    pub max_iters: usize,
    /// Initial multiplier; zero when absent.
    pub mu0: Option<Vec<f64>>,
    pub policy: MonitorPolicy,
    pub dual_sign: DualSign,
    pub granularity: Granularity,
}

impl Default for UddParams {
    fn default() -> Self {
        Self {
            rho: 10.0,
            varrho: None,
            theta: 2.0,
            eps: 1e-3,
            max_iters: 100_000,
            mu0: None,
            policy: MonitorPolicy::Abort,
            dual_sign: DualSign::Standard,
            granularity: Granularity::default(),
        }
    }
}

impl UddParams {
    pub fn varrho(&self) -> f64 {
        self.varrho.unwrap_or(self.rho / 8.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(param_err(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if !(self.varrho() > 0.0) {
            return Err(param_err(format!("varrho must be positive, got {}", self.varrho())));
        }
        if !(self.theta > 1.0) {
            return Err(param_err(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.eps > 0.0) {
            return Err(param_err(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iters == 0 {
            return Err(param_err("max_iters must be positive"));
        }
        Ok(())
    }
}

/// `A`, `b` and the spectral data the solver needs.
#[derive(Debug, Clone)]
pub struct AffineConstraint {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Power-iteration estimate of `||A^T A||`; `inflated` is used as the bound.
    pub ata: PowerEstimate,
}

impl AffineConstraint {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let ata = power_iteration_ata(&a);
        Self { a, b, ata }
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let (a, b) = inst
            .affine_data()
            .ok_or_else(|| Error::Unsupported("affine solver needs affine constraint blocks".into()))?;
        Ok(Self::new(a, b))
    }

    pub fn ata_norm(&self) -> f64 {
        self.ata.inflated
    }

    /// `||A|| = sqrt(||A^T A||)`.
    pub fn a_norm(&self) -> f64 {
        self.ata.inflated.sqrt()
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }
}

/// `mu - varrho r`.
pub fn udd_dual_update(mu: &DVector<f64>, residual: &DVector<f64>, varrho: f64) -> DVector<f64> {
    mu - residual * varrho
}

/// `prox(g; theta L_K; x - (grad f(x) + A^T(mu + rho (Ax - b))) / (theta L_K))`.
pub fn udd_primal_step(
    inst: &ProblemInstance,
    op: &AffineConstraint,
    x: &DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    theta: f64,
    l_k: f64,
) -> Result<DVector<f64>> {
    let grad = inst.grad_f(x) + op.a.tr_mul(&(mu + op.residual(x) * rho));
    if l_k <= 0.0 {
        return Err(Error::Config("L_K = 0; the step is undefined".into()));
    }
    let eta = theta * l_k;
    inst.prox_all(eta, &(x - grad / eta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCertificate {
    /// `mu^{k+1}`.
    pub mu: Vec<f64>,
    pub xi: Vec<f64>,
    pub residual: f64,
    pub feasibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobinsonStatus {
    /// Full row rank and an interior point of `X` in `x + Null(A)`.
    Satisfied,
    /// The sufficient condition fails (rank or interior probe).
    NotVerified,
    /// `X` is not a box or a ball.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinsonReport {
    pub rank_ok: bool,
    pub rank: usize,
    pub m: usize,
    /// Largest interior margin `t` of a point of `x + Null(A)` inside `X`.
    pub interior_margin: Option<f64>,
    pub status: RobinsonStatus,
}

/// Checks the sufficient condition for the modified Robinson condition:
/// `A` has full row rank and `(x + Null(A))` meets `int X`. Diagnostic only.
pub fn robinson_diagnostic(x: &DVector<f64>, domain: &[(std::ops::Range<usize>, Domain)], a: &DMatrix<f64>) -> RobinsonReport {
    let m = a.nrows();
    let rank = numerical_rank(a, RANK_REL_TOL);
    let rank_ok = rank == m;
    let n = a.ncols();

    let all_box = domain.iter().all(|(_, d)| matches!(d, Domain::Box { .. }));
    let single_ball = domain.len() == 1 && matches!(domain[0].1, Domain::Ball { .. });
    let interior_margin = if all_box {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for (r, d) in domain {
            if let Domain::Box { lo: l, hi: u } = *d {
                for k in r.clone() {
                    lo[k] = l;
                    hi[k] = u;
                }
            }
        }
        box_interior_margin(x, a, &lo, &hi)
    } else if single_ball {
        let Domain::Ball { radius } = domain[0].1 else { unreachable!() };
        // the minimum-norm point of x + Null(A) is the row-space component of x
        let svd = a.clone().svd(true, true);
        let ax = a * x;
        let y = svd.solve(&ax, 1e-12).ok();
        y.map(|y| radius - y.norm())
    } else {
        None
    };
    let status = match interior_margin {
        None => RobinsonStatus::Unknown,
        Some(t) if rank_ok && t > 0.0 => RobinsonStatus::Satisfied,
        Some(_) => RobinsonStatus::NotVerified,
    };
    RobinsonReport {
        rank_ok,
        rank,
        m,
        interior_margin,
        status,
    }
}

/// `max t` s.t. `A y = A x`, `lo + t <= y <= hi - t`, `t <= 1`, as a small LP.
fn box_interior_margin(x: &DVector<f64>, a: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> Option<f64> {
    let n = a.ncols();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let ys: Vec<_> = (0..n).map(|k| lp.add_var(0.0, (lo[k], hi[k]))).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    let ax = a * x;
    for j in 0..a.nrows() {
        let expr: Vec<_> = (0..n).map(|k| (ys[k], a[(j, k)])).collect();
        lp.add_constraint(expr, ComparisonOp::Eq, ax[j]);
    }
    for k in 0..n {
        lp.add_constraint([(ys[k], 1.0), (t, -1.0)], ComparisonOp::Ge, lo[k]);
        lp.add_constraint([(ys[k], 1.0), (t, 1.0)], ComparisonOp::Le, hi[k]);
    }
    let sol = lp.solve().ok()?.into_solution().ok()?;
    Some(sol.var_value(t))
}

/// Domain descriptor of every block, for [`robinson_diagnostic`].
pub fn block_domains(inst: &ProblemInstance) -> Vec<(std::ops::Range<usize>, Domain)> {
    let s = inst.structure();
    (0..s.p()).map(|i| (s.range(i), inst.prox_terms()[i].domain())).collect()
}

/// `ceil(max(1, d2)^2 (L_rho(x0, mu0) - f* - g*) / (d1 eps^2))` with
/// `d1 = min((2 theta - 1) L_K / 2, varrho)` and `d2 = (theta + 1) L_K + (rho + varrho) ||A||`.
pub fn theorem_iteration_bound(l_k: f64, theta: f64, rho: f64, varrho: f64, a_norm: f64, gap: f64, eps: f64) -> f64 {
    let d1 = ((2.0 * theta - 1.0) * l_k / 2.0).min(varrho);
    let d2 = (theta + 1.0) * l_k + (rho + varrho) * a_norm;
    (d2.max(1.0).powi(2) * gap / (d1 * eps * eps)).ceil()
}

#[derive(Debug, Clone)]
pub struct UddOutput {
    pub status: RunStatus,
    pub k_star: Option<usize>,
    pub iterations: usize,
    pub x: DVector<f64>,
    pub mu: DVector<f64>,
    pub l_k: f64,
    pub varrho: f64,
    pub a_norm: f64,
    /// `L_rho(x^0, mu^0)`.
    pub l_aug0: f64,
    pub trace: Trace,
    pub certificate: Option<AffineCertificate>,
    pub monitors: MonitorLog,
    pub robinson: RobinsonReport,
}

impl UddOutput {
    /// Theorem ceiling given the optimal value `f(x*) + g(x*)`.
    pub fn theorem_bound(&self, theta: f64, rho: f64, optimal_value: f64, eps: f64) -> f64 {
        theorem_iteration_bound(self.l_k, theta, rho, self.varrho, self.a_norm, self.l_aug0 - optimal_value, eps)
    }
}

fn require_convex(inst: &ProblemInstance) -> Result<()> {
    if inst.prox_terms().iter().all(ProxKernel::is_convex) {
        Ok(())
    } else {
        Err(Error::Unsupported("the affine UDD solver needs convex g".into()))
    }
}

pub fn run(inst: &ProblemInstance, params: &UddParams) -> Result<UddOutput> {
    params.validate()?;
    require_convex(inst)?;
    let op = AffineConstraint::from_instance(inst)?;
    let s = inst.structure().clone();
    let rho = params.rho;
    let theta = params.theta;
    let varrho = params.varrho();
    let l_k = inst.lf() + rho * op.ata_norm();
    let a_norm = op.a_norm();

    let mut x = inst.x0().clone();
    let mut mu = match &params.mu0 {
        Some(v) => {
            let mu = DVector::from_vec(v.clone());
            s.check_dual(&mu)?;
            mu
        }
        None => DVector::zeros(s.m()),
    };
    let l_of = |x: &DVector<f64>, mu: &DVector<f64>| -> Result<f64> {
        inst.augmented_lagrangian(x, mu, rho)?
            .finite()
            .ok_or_else(|| Error::Config("iterate left dom g".into()))
    };
    let l_aug0 = l_of(&x, &mu)?;
    let mut l_cur = l_aug0;

    let mut monitors = MonitorLog::new(params.policy);
    let mut trace = Trace::new(TraceKind::Affine);
    let mut certificate = None;
    let mut status = RunStatus::MaxIters;
    let mut k_star = None;
    let mut iterations = 0;
    let mut r_old = op.residual(&x);

    for k in 0..params.max_iters {
        let x_new = udd_primal_step(inst, &op, &x, &mu, rho, theta, l_k)?;
        iterations = k + 1;
        let r_new = op.residual(&x_new);
        let r_norm = r_new.norm();
        let mu_new = mu.clone() - &r_new * (params.dual_sign.factor() * varrho);
        let dx = &x_new - &x;
        let dx_norm = dx.norm();

        let l_mid = l_of(&x_new, &mu)?;
        let l_new = l_of(&x_new, &mu_new)?;

        // xi = (grad f(x+) - grad f(x)) - theta L_K dx - varrho A^T r+ - rho A^T r
        let xi = inst.grad_f(&x_new) - inst.grad_f(&x)
            - &dx * (theta * l_k)
            - op.a.tr_mul(&(&r_new * varrho + &r_old * rho));
        let resid = xi.norm();

        let progress = (2.0 * theta - 1.0) / 2.0 * l_k * dx_norm * dx_norm + varrho * r_norm * r_norm;
        monitors.check_le(k, Monitor::AugLagDescent, l_new + progress, l_cur + slack(l_cur))?;
        let identity_gap = (l_new - l_mid + varrho * r_norm * r_norm).abs();
        monitors.check_le(
            k,
            Monitor::DualUpdateIdentity,
            identity_gap,
            IDENTITY_REL_TOL * (1.0 + l_mid.abs()),
        )?;
        let bound = (theta + 1.0) * l_k * dx_norm + (rho + varrho) * a_norm * r_norm;
        monitors.check_le(k, Monitor::DualResidualBound, resid, bound + slack(bound))?;
        // L_rho decreases monotonically and tends to f + g >= P_lb along any
        // subsequence with bounded multipliers, so crossing P_lb rules that out
        let below_floor = l_new + slack(l_new) < inst.p_lb();
        monitors.check_le(k, Monitor::RegularityGuard, inst.p_lb(), l_new + slack(l_new))?;

        let done = resid.max(r_norm) <= params.eps;
        let diverged = below_floor && !done;
        let last = done || diverged || k + 1 == params.max_iters;
        if params.granularity.keep(k, last) {
            trace.rows.push(IterationRecord {
                k,
                potential: l_new,
                lip: l_k,
                h_norm: r_norm,
                mu_norm: mu_new.norm(),
                max_block_disp: (0..s.p())
                    .map(|i| inst.block(&dx, i).norm())
                    .fold(0.0, f64::max),
                resid_max: resid,
                feas: r_norm,
                l_aug: Some(l_new),
                inner: None,
            });
        }
        if last {
            certificate = Some(AffineCertificate {
                mu: mu_new.iter().cloned().collect(),
                xi: xi.iter().cloned().collect(),
                residual: resid,
                feasibility: r_norm,
            });
        }
        x = x_new;
        mu = mu_new;
        l_cur = l_new;
        r_old = r_new;
        if done {
            status = RunStatus::Converged;
            k_star = Some(k);
            break;
        }
        if diverged {
            log::warn!("udd_affine: L_rho fell below P_lb at k={k}; regularity likely violated");
            status = RunStatus::Diverged;
            break;
        }
    }

    let robinson = robinson_diagnostic(&x, &block_domains(inst), &op.a);
    if robinson.status != RobinsonStatus::Satisfied {
        log::warn!("udd_affine: Robinson sufficient condition not verified at the final iterate: {robinson:?}");
    }
    log::info!("udd_affine: status {status:?} after {iterations} steps, L_K {l_k:e}");
    Ok(UddOutput {
        status,
        k_star,
        iterations,
        x,
        mu,
        l_k,
        varrho,
        a_norm,
        l_aug0,
        trace,
        certificate,
        monitors,
        robinson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_update_sign() {
        let mu = DVector::from_element(1, 0.0);
        let r = DVector::from_element(1, 3.0);
        assert_eq!(udd_dual_update(&mu, &r, 2.0)[0], -6.0);
        assert_eq!(udd_dual_update(&mu, &DVector::zeros(1), 2.0)[0], 0.0);
    }

    #[test]
    fn robinson_identity_rows_in_box() {
        let a = DMatrix::identity(2, 3);
        let dom = vec![(0..3, Domain::Box { lo: -1.0, hi: 1.0 })];
        let rep = robinson_diagnostic(&DVector::zeros(3), &dom, &a);
        assert!(rep.rank_ok);
        assert_eq!(rep.status, RobinsonStatus::Satisfied);
        assert!((rep.interior_margin.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn robinson_duplicated_rows() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0]);
        let dom = vec![(0..3, Domain::Box { lo: -1.0, hi: 1.0 })];
        let rep = robinson_diagnostic(&DVector::zeros(3), &dom, &a);
        assert!(!rep.rank_ok);
        assert_eq!(rep.status, RobinsonStatus::NotVerified);
    }

    #[test]
    fn robinson_boundary_point_without_interior_slice() {
        // x1 = 1 pins the first coordinate to the face of the box
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let dom = vec![(0..2, Domain::Box { lo: -1.0, hi: 1.0 })];
        let rep = robinson_diagnostic(&DVector::from_vec(vec![1.0, 0.0]), &dom, &a);
        assert!(rep.interior_margin.unwrap() <= 1e-9);
        assert_eq!(rep.status, RobinsonStatus::NotVerified);
    }

    #[test]
    fn robinson_ball_and_unknown() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let ball = vec![(0..2, Domain::Ball { radius: 1.0 })];
        let rep = robinson_diagnostic(&DVector::from_vec(vec![0.5, 0.0]), &ball, &a);
        assert_eq!(rep.status, RobinsonStatus::Satisfied);
        let sphere = vec![(0..2, Domain::Sphere { radius: 1.0 })];
        assert_eq!(
            robinson_diagnostic(&DVector::zeros(2), &sphere, &a).status,
            RobinsonStatus::Unknown
        );
    }
}
