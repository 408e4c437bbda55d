//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use dualdescent::baselines::{dual_ascent_alm_run, equivalence_report, DualAscentParams};
use dualdescent::gallery::{self, trusted_l1_box_qp, GalleryId};
use dualdescent::harness::verify::lemma_violations;
use dualdescent::harness::{prox_grid_check, prox_inputs, scalar_kernels, solve, ProblemSource, SolverKind, SolverParams};
use dualdescent::monitor::{DualSign, Monitor, MonitorLog, MonitorPolicy};
use dualdescent::problem::checks::finite_difference_check;
use dualdescent::problem::SmoothObjective;
use dualdescent::prox::ProxKernel;
use dualdescent::sdd::{self, RhoMode, SddParams, Sweep};
use dualdescent::trace::Granularity;
use dualdescent::udd_affine::{self, UddParams};
use dualdescent::udd_nonlinear::{self, NlUddParams};
use dualdescent::{ProblemInstance, Result};

const UDD_VARRHO: f64 = dualdescent::harness::GALLERY_UDD_VARRHO;

fn every_step() -> Granularity {
    Granularity { every: 1 }
}

fn sdd_settings() -> [SddParams; 3] {
    let base = SddParams {
        policy: MonitorPolicy::Record,
        granularity: every_step(),
        ..Default::default()
    };
    [
        SddParams { rho: 10.0, eps: 1e-4, max_iters: 3_000, ..base.clone() },
        SddParams { eps: 1e-2, rho_mode: RhoMode::Eps2Rule, max_iters: 200_000, ..base.clone() },
        SddParams { rho: 50.0, omega: 6.0, tau: 0.5, theta: 1.5, sweep: Sweep::Jacobi, eps: 1e-4, max_iters: 3_000, ..base },
    ]
}

fn udd_settings() -> [UddParams; 3] {
    let base = UddParams {
        varrho: Some(UDD_VARRHO),
        policy: MonitorPolicy::Record,
        eps: 1e-4,
        max_iters: 20_000,
        granularity: every_step(),
        ..Default::default()
    };
    [
        base.clone(),
        UddParams { rho: 20.0, ..base.clone() },
        UddParams { rho: 5.0, theta: 1.5, varrho: Some(1e-5), ..base },
    ]
}

fn nl_settings() -> [NlUddParams; 3] {
    let base = NlUddParams {
        varrho: Some(UDD_VARRHO),
        policy: MonitorPolicy::Record,
        eps: 1e-3,
        max_iters: 20_000,
        granularity: every_step(),
        ..Default::default()
    };
    [
        base.clone(),
        NlUddParams { rho: 20.0, ..base.clone() },
        NlUddParams { c: Some(2_000.0), ..base },
    ]
}

/// Every monitored run of criterion 1, kept for criteria 2 and 6.
struct Runs {
    sdd: Vec<(String, ProblemInstance, sdd::SddOutput)>,
    logs: Vec<(String, usize, MonitorLog)>,
}

fn monitored_runs() -> Result<Runs> {
    let mut sdd_runs = Vec::new();
    let mut logs = Vec::new();
    for (id, seed) in [(GalleryId::G1, 0), (GalleryId::G1, 1), (GalleryId::G4, 0)] {
        let inst = gallery::make(id, seed)?.problem;
        for (s, p) in sdd_settings().iter().enumerate() {
            let o = sdd::run(&inst, p)?;
            let name = format!("sdd {id}/{seed} setting {s}");
            logs.push((name.clone(), o.iterations, o.monitors.clone()));
            sdd_runs.push((name, inst.clone(), o));
        }
    }
    let g2 = gallery::make(GalleryId::G2, 0)?.problem;
    for (s, p) in udd_settings().iter().enumerate() {
        let o = udd_affine::run(&g2, p)?;
        logs.push((format!("udd_affine G2/0 setting {s}"), o.iterations, o.monitors));
    }
    let g3 = gallery::make(GalleryId::G3, 0)?.problem;
    for (s, p) in nl_settings().iter().enumerate() {
        let o = udd_nonlinear::run(&g3, p)?;
        logs.push((format!("udd_nonlinear G3/0 setting {s}"), o.iterations, o.monitors));
    }
    Ok(Runs { sdd: sdd_runs, logs })
}

fn criterion_1(runs: &Runs) -> (bool, String) {
    let descent = [Monitor::PotentialDescent, Monitor::AugLagDescent, Monitor::CombinedDescent];
    let total: usize = runs.logs.iter().map(|l| l.1).sum();
    let mut bad = Vec::new();
    for (name, _, log) in &runs.logs {
        let v: usize = descent.iter().map(|&m| log.count(m)).sum();
        if v > 0 {
            bad.push(format!("{name}: {v}"));
        }
    }
    let other: usize = runs.logs.iter().map(|l| lemma_violations(&l.2)).sum();
    let ok = bad.is_empty() && other == 0 && total >= 10_000 && runs.logs.len() == 15;
    (ok, format!("{} runs, {total} iterations, descent violations {bad:?}, all lemma monitors {other}", runs.logs.len()))
}

fn criterion_2(runs: &Runs) -> (bool, String) {
    let mut rows = 0;
    let mut bad = Vec::new();
    for (name, inst, o) in &runs.sdd {
        let dp = inst.delta_p();
        let h_bound = (4.0 * dp / o.rho).sqrt();
        let mu_bound = (o.rho * dp).sqrt();
        for r in &o.trace.rows {
            rows += 1;
            if !(r.h_norm <= h_bound && r.mu_norm <= mu_bound) {
                bad.push(format!("{name} k={}", r.k));
            }
        }
        let monitored = o.monitors.count(Monitor::PrimalResidualBound) + o.monitors.count(Monitor::DualVariableBound);
        if monitored > 0 {
            bad.push(format!("{name}: {monitored} monitor violations"));
        }
    }
    (bad.is_empty() && rows > 0, format!("{rows} iterates checked without slack, failures: {:?}", &bad[..bad.len().min(5)]))
}

fn criterion_3() -> Result<(bool, String)> {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases = [
        ("G1", SolverKind::SddAdmm, SolverParams { rho_mode: RhoMode::Eps2Rule, ..Default::default() }),
        ("G2", SolverKind::UddAffine, SolverParams { varrho: Some(UDD_VARRHO), ..Default::default() }),
        ("G3", SolverKind::UddNonlinear, SolverParams { varrho: Some(UDD_VARRHO), ..Default::default() }),
    ];
    for (id, solver, params) in cases {
        let problem = ProblemSource::parse(id, 0).load()?;
        for eps in [1e-1, 1e-2, 1e-3] {
            let p = SolverParams { eps, ..params.clone() };
            let run = solve(&problem, solver, &p, Granularity { every: usize::MAX })?;
            let within = match (run.iterations_to_eps(), run.theorem_bound) {
                (Some(it), Some(k)) => it as f64 <= k,
                _ => false,
            };
            ok &= within;
            lines.push(format!("{id} {eps:e}: {:?}<={:.2e}", run.iterations_to_eps(), run.theorem_bound.unwrap_or(f64::NAN)));
        }
    }
    Ok((ok, lines.join(", ")))
}

fn criterion_4() -> Result<(bool, String)> {
    let g1 = gallery::make(GalleryId::G1, 0)?.problem;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for gamma in [1.0 / 3.0, 1.0, 3.0] {
        let r = equivalence_report(&g1, gamma, 10.0, 2.0, 50)?;
        ok &= r.pass && r.iters == 50;
        worst = worst.max(r.max_dev_x).max(r.max_dev_mu);
        gap = gap.max(r.max_identity_gap);
    }
    Ok((ok, format!("max |x - x'|, |mu + gamma lambda| = {worst:e}; max |beta z + lambda| / |lambda| = {gap:e}")))
}

fn criterion_5() -> Result<(bool, String)> {
    let inputs = prox_inputs(1000, 2024);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut ties = 0;
    let kernels = scalar_kernels();
    for (k, eta) in &kernels {
        let r = prox_grid_check(k, *eta, &inputs)?;
        worst = worst.max(r.max_distance);
        failures += r.failures;
        ties += r.ties;
    }
    Ok((
        failures == 0,
        format!("{} kernels x 1000 inputs, max distance {worst:.2e}, {failures} failures, {ties} exact ties", kernels.len()),
    ))
}

fn criterion_6(runs: &Runs) -> (bool, String) {
    let checked = runs.logs.len();
    let v: usize = runs.logs.iter().map(|l| l.2.count(Monitor::DualResidualBound)).sum();
    (v == 0, format!("{checked} runs, {v} dual residual violations"))
}

fn criterion_7() -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (id, seed) in [(GalleryId::G1, 0), (GalleryId::G1, 1), (GalleryId::G2, 0), (GalleryId::G3, 0), (GalleryId::G4, 0)] {
        let inst = gallery::make(id, seed)?.problem;
        let r = finite_difference_check(&inst, 100, 99);
        ok &= r.passed();
        worst = worst.max(r.max_rel_err_f).max(r.max_rel_err_h);
    }
    Ok((ok, format!("5 instances x 100 points, max relative error {worst:.2e}")))
}

fn criterion_8() -> Result<(bool, String)> {
    let g2 = gallery::make(GalleryId::G2, 0)?.problem;
    let SmoothObjective::Quadratic { q, c, .. } = g2.objective();
    let ProxKernel::L1Box { weight, lo, hi } = g2.prox_terms()[0] else {
        return Ok((false, "G2 kernel changed".into()));
    };
    let (a, b) = g2.affine_data().expect("affine");
    let (x_ref, _) = trusted_l1_box_qp(q, c, weight, lo, hi, &a, &b);
    let f_ref = g2.objective_value(&x_ref).to_f64();

    let udd = udd_affine::run(
        &g2,
        &UddParams {
            eps: 1e-5,
            varrho: Some(UDD_VARRHO),
            max_iters: 1_000_000,
            granularity: Granularity { every: usize::MAX },
            ..Default::default()
        },
    )?;
    let f_udd = g2.objective_value(&udd.x).to_f64();
    let da = dual_ascent_alm_run(
        &g2,
        &DualAscentParams {
            eps: 1e-5,
            max_iters: 1_000_000,
            granularity: Granularity { every: usize::MAX },
            ..Default::default()
        },
    )?;
    let f_da = g2.objective_value(&da.x).to_f64();
    let ok = udd.status.is_converged()
        && da.status.is_converged()
        && (f_udd - f_ref).abs() <= 1e-4
        && (f_da - f_ref).abs() <= 1e-4;
    Ok((
        ok,
        format!(
            "trusted {f_ref:.10}, UDD {f_udd:.10} ({:?}), dual ascent {f_da:.10} ({:?})",
            udd.status, da.status
        ),
    ))
}

fn criterion_9() -> Result<(bool, String)> {
    let window = dualdescent::harness::verify::MUTATION_WINDOW;
    let g1 = gallery::make(GalleryId::G1, 0)?.problem;
    let g2 = gallery::make(GalleryId::G2, 0)?.problem;
    let sdd_run = |sign| {
        let p = SddParams { dual_sign: sign, policy: MonitorPolicy::Record, max_iters: window, eps: f64::MIN_POSITIVE, ..Default::default() };
        sdd::run(&g1, &p).map(|o| lemma_violations(&o.monitors))
    };
    let udd_run = |sign| {
        let p = UddParams { dual_sign: sign, policy: MonitorPolicy::Record, max_iters: window, eps: f64::MIN_POSITIVE, ..Default::default() };
        udd_affine::run(&g2, &p).map(|o| lemma_violations(&o.monitors))
    };
    let (sdd_clean, sdd_flip) = (sdd_run(DualSign::Standard)?, sdd_run(DualSign::Flipped)?);
    let (udd_clean, udd_flip) = (udd_run(DualSign::Standard)?, udd_run(DualSign::Flipped)?);
    let ok = sdd_clean == 0 && udd_clean == 0 && sdd_flip > 0 && udd_flip > 0;
    Ok((
        ok,
        format!("violations in {window} steps: SDD G1 {sdd_clean} -> {sdd_flip} flipped, UDD G2 {udd_clean} -> {udd_flip} flipped"),
    ))
}

fn criterion_10() -> Result<(bool, String)> {
    let mut ok = true;
    let mut bytes = 0;
    for (id, solver, params) in [
        ("G1", SolverKind::SddAdmm, SolverParams { eps: 1e-2, ..Default::default() }),
        ("G2", SolverKind::UddAffine, SolverParams { eps: 1e-3, varrho: Some(UDD_VARRHO), ..Default::default() }),
        ("G3", SolverKind::UddNonlinear, SolverParams { eps: 1e-2, varrho: Some(UDD_VARRHO), ..Default::default() }),
    ] {
        let csv = |seed| -> Result<String> {
            let problem = ProblemSource::parse(id, seed).load()?;
            Ok(solve(&problem, solver, &params, every_step())?.trace.to_csv())
        };
        let (a, b) = (csv(5)?, csv(5)?);
        ok &= a == b && a != csv(6)?;
        bytes += a.len();
    }
    Ok((ok, format!("3 solvers, {bytes} trace bytes compared")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = monitored_runs().expect("monitored runs");
    let results: Vec<(&str, Result<(bool, String)>)> = vec![
        ("descent inequalities as monitors", Ok(criterion_1(&runs))),
        ("primal residual and dual variable bounds", Ok(criterion_2(&runs))),
        ("iteration ceilings", criterion_3()),
        ("penalty ADMM equivalence", criterion_4()),
        ("prox brute force", criterion_5()),
        ("dual residual certificate bounds", Ok(criterion_6(&runs))),
        ("finite differences", criterion_7()),
        ("convex reference solve", criterion_8()),
        ("mutation sensitivity", criterion_9()),
        ("determinism", criterion_10()),
    ];
    let mut all = true;
    for (i, (name, r)) in results.into_iter().enumerate() {
        let (ok, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= ok;
        println!("criterion {:>2} {:<42} {}  {detail}", i + 1, name, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} in {:.1} s", if all { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
