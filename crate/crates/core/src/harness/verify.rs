use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::equivalence_report;
use crate::error::{Error, Result};
use crate::gallery::{self, GalleryId};
use crate::monitor::{DualSign, Monitor, MonitorLog, MonitorPolicy};
use crate::problem::checks::{constant_check, finite_difference_check};
use crate::problem::ExtReal;
use crate::prox::ProxKernel;
use crate::sdd::{self, RhoMode, SddParams, Sweep};
use crate::trace::Granularity;
use crate::udd_affine::{self, UddParams};
use crate::udd_nonlinear::{self, NlUddParams};

/// Grid spacing of the brute-force prox check.
pub const PROX_GRID_STEP: f64 = 1e-4;
/// Half-width of the brute-force grid, centred at zero.
pub const PROX_GRID_HALF_WIDTH: f64 = 6.0;
/// Allowed distance between the closed-form prox and the grid minimizer.
pub const PROX_GRID_TOL: f64 = 2e-4;
/// Dual step that keeps the unscaled runs on the gallery away from the
/// unstable direction long enough to converge.
pub const GALLERY_UDD_VARRHO: f64 = 1e-6;
/// Iterations within which a flipped dual sign must trip a monitor.
pub const MUTATION_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Fast,
    Full,
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Scope::Fast),
            "full" => Ok(Scope::Full),
            _ => Err(Error::Config(format!("scope must be fast or full, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scope: Scope,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Scalar kernels covered by the brute-force prox check, with `eta`.
pub fn scalar_kernels() -> Vec<(ProxKernel, f64)> {
    vec![
        (ProxKernel::Zero, 1.0),
        (ProxKernel::Box { lo: -1.0, hi: 2.0 }, 1.0),
        (ProxKernel::Ball { radius: 1.5 }, 1.0),
        (ProxKernel::Sphere { radius: 1.0 }, 1.0),
        (ProxKernel::Annulus { inner: 0.5, outer: 2.0 }, 1.0),
        (ProxKernel::L1 { weight: 0.7 }, 1.0),
        (ProxKernel::L1 { weight: 0.7 }, 3.0),
        (ProxKernel::L1Box { weight: 0.5, lo: -1.0, hi: 1.0 }, 1.0),
        (ProxKernel::Scad { a: 3.7, lambda: 1.0 }, 1.0),
        (ProxKernel::Mcp { b: 2.5, lambda: 1.0 }, 1.0),
        (ProxKernel::CappedL1 { lambda: 1.0, cap: 1.5 }, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxGridResult {
    /// Largest distance to the grid minimizer over inputs without ties.
    pub max_distance: f64,
    /// Inputs whose prox lies farther than the tolerance.
    pub failures: usize,
    /// Inputs with a second grid minimizer away from the closed form.
    pub ties: usize,
    pub inputs: usize,
}

/// Compares `kernel.prox(eta, z)` with brute-force minimization of
/// `g(x) + (eta / 2)(x - z)^2` on a uniform grid, for scalar `z`.
///
/// An input far from the grid minimizer still passes when the grid around the
/// closed form is as good as the grid minimizer (ties of the nonconvex kernels).
pub fn prox_grid_check(kernel: &ProxKernel, eta: f64, inputs: &[f64]) -> Result<ProxGridResult> {
    let steps = (2.0 * PROX_GRID_HALF_WIDTH / PROX_GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| -PROX_GRID_HALF_WIDTH + i as f64 * PROX_GRID_STEP)
        .collect();
    let g: Vec<Option<f64>> = grid
        .iter()
        .map(|&x| match kernel.value(&DVector::from_element(1, x)) {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        })
        .collect();
    let mut max_distance: f64 = 0.0;
    let mut failures = 0;
    let mut ties = 0;
    for &z in inputs {
        let obj = |x: f64, gx: f64| gx + 0.5 * eta * (x - z) * (x - z);
        let mut best = (f64::NAN, f64::INFINITY);
        for (&x, gx) in grid.iter().zip(&g) {
            if let Some(gx) = gx {
                let v = obj(x, *gx);
                if v < best.1 {
                    best = (x, v);
                }
            }
        }
        let p = kernel.prox(eta, &DVector::from_element(1, z))?[0];
        let dist = (p - best.0).abs();
        if dist <= PROX_GRID_TOL {
            max_distance = max_distance.max(dist);
            continue;
        }
        // a tie: the grid near p is as good as the grid minimizer
        let level = best.1 + eta * PROX_GRID_TOL * PROX_GRID_TOL;
        let near_p = grid.iter().zip(&g).any(|(&x, gx)| {
            (x - p).abs() <= PROX_GRID_TOL && gx.is_some_and(|gx| obj(x, gx) <= level)
        });
        if near_p {
            ties += 1;
        } else {
            failures += 1;
            max_distance = max_distance.max(dist);
        }
    }
    Ok(ProxGridResult {
        max_distance,
        failures,
        ties,
        inputs: inputs.len(),
    })
}

/// Uniform random inputs on `[-5, 5]`.
pub fn prox_inputs(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(-5.0..5.0)).collect()
}

/// Monitors that encode descent or boundedness lemmas (everything except the
/// regularity guard, which detects divergence rather than a proof step).
pub fn lemma_violations(log: &MonitorLog) -> usize {
    log.violations.iter().filter(|v| v.monitor != Monitor::RegularityGuard).count()
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    log::info!("verify {name}: {} ({detail})", if passed { "pass" } else { "FAIL" });
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn from_result(name: &str, r: Result<CheckResult>) -> CheckResult {
    r.unwrap_or_else(|e| check(name, false, format!("error: {e}")))
}

pub fn verify_suite(scope: Scope) -> Result<VerifyReport> {
    let full = scope == Scope::Full;
    let mut checks = Vec::new();

    checks.push(from_result("prox_brute_force", (|| {
        let inputs = prox_inputs(if full { 1000 } else { 100 }, 7);
        let mut worst: f64 = 0.0;
        let (mut failures, mut ties) = (0, 0);
        for (k, eta) in scalar_kernels() {
            let r = prox_grid_check(&k, eta, &inputs)?;
            worst = worst.max(r.max_distance);
            failures += r.failures;
            ties += r.ties;
        }
        Ok(check(
            "prox_brute_force",
            failures == 0,
            format!("max distance {worst:e}, {failures} failures, {ties} ties"),
        ))
    })()));

    let instances: Vec<_> = GalleryId::ALL.iter().map(|&id| gallery::make(id, 0)).collect::<Result<_>>()?;
    let points = if full { 100 } else { 20 };
    for g in &instances {
        let fd = finite_difference_check(&g.problem, points, 11);
        checks.push(check(
            &format!("finite_differences_{}", g.id),
            fd.passed(),
            format!("max rel err f {:e}, h {:e}", fd.max_rel_err_f, fd.max_rel_err_h),
        ));
        let cc = constant_check(&g.problem, if full { 10_000 } else { 1_000 }, 13);
        checks.push(check(
            &format!("declared_constants_{}", g.id),
            cc.passed(),
            format!("lip ratio {:.3}", cc.lip_ratio),
        ));
    }

    let eps = if full { 1e-3 } else { 1e-2 };
    let g1 = &instances[0].problem;
    let g2 = &instances[1].problem;
    let g3 = &instances[2].problem;
    let g4 = &instances[3].problem;

    for (name, inst, p) in [
        ("sdd_monitors_G1", g1, SddParams { eps, rho_mode: RhoMode::Eps2Rule, ..Default::default() }),
        ("sdd_monitors_G1_jacobi", g1, SddParams { eps: eps * 10.0, sweep: Sweep::Jacobi, rho_mode: RhoMode::Eps2Rule, ..Default::default() }),
        ("sdd_monitors_G4", g4, SddParams { eps, rho_mode: RhoMode::Eps1Rule, ..Default::default() }),
    ] {
        checks.push(from_result(name, (|| {
            let p = SddParams { policy: MonitorPolicy::Record, max_iters: 2_000_000, granularity: Granularity { every: usize::MAX }, ..p };
            let o = sdd::run(inst, &p)?;
            let v = lemma_violations(&o.monitors);
            Ok(check(name, v == 0 && o.status.is_converged(), format!("{:?} after {} steps, {v} violations", o.status, o.iterations)))
        })()));
    }

    checks.push(from_result("udd_affine_monitors_G2", (|| {
        let p = UddParams {
            eps,
            varrho: Some(GALLERY_UDD_VARRHO),
            policy: MonitorPolicy::Record,
            max_iters: 1_000_000,
            granularity: Granularity { every: usize::MAX },
            ..Default::default()
        };
        let o = udd_affine::run(g2, &p)?;
        let v = lemma_violations(&o.monitors);
        Ok(check("udd_affine_monitors_G2", v == 0 && o.status.is_converged(), format!("{:?} after {} steps, {v} violations", o.status, o.iterations)))
    })()));

    checks.push(from_result("udd_nonlinear_monitors_G3", (|| {
        let p = NlUddParams {
            eps,
            varrho: Some(GALLERY_UDD_VARRHO),
            policy: MonitorPolicy::Record,
            max_iters: 1_000_000,
            granularity: Granularity { every: usize::MAX },
            ..Default::default()
        };
        let o = udd_nonlinear::run(g3, &p)?;
        let v = lemma_violations(&o.monitors);
        Ok(check("udd_nonlinear_monitors_G3", v == 0 && o.status.is_converged(), format!("{:?} after {} steps, {v} violations", o.status, o.iterations)))
    })()));

    checks.push(from_result("equivalence_G1", (|| {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for gamma in [1.0 / 3.0, 1.0, 3.0] {
            let r = equivalence_report(g1, gamma, 10.0, 2.0, 50)?;
            worst = worst.max(r.max_dev_x).max(r.max_dev_mu);
            ok &= r.pass;
        }
        Ok(check("equivalence_G1", ok, format!("max relative deviation {worst:e}")))
    })()));

    checks.push(from_result("mutation_sdd_G1", (|| {
        let p = SddParams {
            dual_sign: DualSign::Flipped,
            policy: MonitorPolicy::Record,
            max_iters: MUTATION_WINDOW,
            eps: f64::MIN_POSITIVE,
            ..Default::default()
        };
        let o = sdd::run(g1, &p)?;
        let v = lemma_violations(&o.monitors);
        Ok(check("mutation_sdd_G1", v > 0, format!("{v} violations in {MUTATION_WINDOW} steps")))
    })()));

    checks.push(from_result("mutation_udd_G2", (|| {
        let p = UddParams {
            dual_sign: DualSign::Flipped,
            policy: MonitorPolicy::Record,
            max_iters: MUTATION_WINDOW,
            eps: f64::MIN_POSITIVE,
            ..Default::default()
        };
        let o = udd_affine::run(g2, &p)?;
        let v = lemma_violations(&o.monitors);
        Ok(check("mutation_udd_G2", v > 0, format!("{v} violations in {MUTATION_WINDOW} steps")))
    })()));

    checks.push(from_result("determinism_G1", (|| {
        let p = SddParams { eps: 1e-2, ..Default::default() };
        let a = sdd::run(g1, &p)?.trace.to_csv();
        let b = sdd::run(&gallery::make(GalleryId::G1, 0)?.problem, &p)?.trace.to_csv();
        Ok(check("determinism_G1", a == b, format!("{} bytes", a.len())))
    })()));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { scope, checks, passed })
}
