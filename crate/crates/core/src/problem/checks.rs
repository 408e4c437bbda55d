//! Sampling-based verification of oracles and declared constants.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ConstraintBlock, ConstraintConstants, ProblemInstance};
use crate::prox::{Domain, ProxKernel};

/// Relative tolerance for finite-difference agreement.
pub const FD_REL_TOL: f64 = 1e-5;
/// Pairs drawn by [`estimate_constants`].
pub const ESTIMATOR_PAIRS: usize = 10_000;
/// Inflation applied to the largest observed ratio by [`estimate_constants`].
pub const ESTIMATOR_INFLATION: f64 = 1.5;

/// Draws a point of the kernel's domain. Unconstrained kernels sample `[-2, 2]^n`.
pub fn sample_domain_point<R: Rng>(kernel: &ProxKernel, dim: usize, rng: &mut R) -> DVector<f64> {
    match kernel.domain() {
        Domain::Unconstrained => DVector::from_fn(dim, |_, _| rng.random_range(-2.0..=2.0)),
        Domain::Box { lo, hi } => DVector::from_fn(dim, |_, _| rng.random_range(lo..=hi)),
        Domain::Ball { radius } => {
            let dir = unit_direction(dim, rng);
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            dir * r
        }
        Domain::Sphere { radius } => unit_direction(dim, rng) * radius,
        Domain::Annulus { inner, outer } => unit_direction(dim, rng) * rng.random_range(inner..=outer),
    }
}

/// A domain point near the boundary, where curvature-driven constants peak.
fn sample_extreme_point<R: Rng>(kernel: &ProxKernel, dim: usize, rng: &mut R) -> DVector<f64> {
    match kernel.domain() {
        Domain::Box { lo, hi } => DVector::from_fn(dim, |_, _| if rng.random::<bool>() { hi } else { lo }),
        Domain::Ball { radius } | Domain::Annulus { outer: radius, .. } => unit_direction(dim, rng) * radius,
        _ => sample_domain_point(kernel, dim, rng),
    }
}

fn unit_direction<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Projects onto the kernel's domain (identity for unconstrained kernels).
fn clamp_to_domain(kernel: &ProxKernel, x: &DVector<f64>) -> DVector<f64> {
    match kernel.domain() {
        Domain::Unconstrained => x.clone(),
        _ => ProxKernel::prox_unchecked(&indicator_of(kernel), 1.0, x),
    }
}

fn indicator_of(kernel: &ProxKernel) -> ProxKernel {
    match kernel.domain() {
        Domain::Unconstrained => ProxKernel::Zero,
        Domain::Box { lo, hi } => ProxKernel::Box { lo, hi },
        Domain::Ball { radius } => ProxKernel::Ball { radius },
        Domain::Sphere { radius } => ProxKernel::Sphere { radius },
        Domain::Annulus { inner, outer } => ProxKernel::Annulus { inner, outer },
    }
}

pub fn sample_point<R: Rng>(inst: &ProblemInstance, rng: &mut R) -> DVector<f64> {
    let s = inst.structure();
    let mut x = DVector::zeros(s.n());
    for i in 0..s.p() {
        let xi = sample_domain_point(&inst.prox_terms()[i], s.dim(i), rng);
        x.rows_range_mut(s.range(i)).copy_from(&xi);
    }
    x
}

fn rel_err(approx: &DVector<f64>, exact: &DVector<f64>) -> f64 {
    (approx - exact).norm() / exact.norm().max(1.0)
}

fn fd_step(v: f64) -> f64 {
    1e-6 * (1.0 + v.abs())
}

fn fd_gradient(x: &DVector<f64>, mut f: impl FnMut(&DVector<f64>) -> f64) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let h = fd_step(x[k]);
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of a constraint block, `n_i x m`.
pub fn fd_jacobian(block: &ConstraintBlock, x: &DVector<f64>) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(block.dim(), block.m());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let h = fd_step(x[k]);
        xp[k] = x[k] + h;
        let hp = block.value(&xp);
        xp[k] = x[k] - h;
        let hm = block.value(&xp);
        xp[k] = x[k];
        let col = (hp - hm) / (2.0 * h);
        jac.row_mut(k).copy_from(&col.transpose());
    }
    jac
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct GradientCheck {
    pub points: usize,
    pub max_rel_err_f: f64,
    pub max_rel_err_h: f64,
    pub max_rel_err_k: f64,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_err_f <= FD_REL_TOL && self.max_rel_err_h <= FD_REL_TOL && self.max_rel_err_k <= FD_REL_TOL
    }
}

/// Compares `grad f`, every `grad h_i` and every `grad_{x_i} K_rho` with central
/// differences at `points` random domain points (random `mu`, `rho`).
pub fn finite_difference_check(inst: &ProblemInstance, points: usize, seed: u64) -> GradientCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = inst.structure().clone();
    let mut out = GradientCheck {
        points,
        ..Default::default()
    };
    for _ in 0..points {
        let x = sample_point(inst, &mut rng);
        let mu = DVector::from_fn(s.m(), |_, _| rng.random_range(-2.0..=2.0));
        let rho = rng.random_range(0.0..=10.0);

        let fd = fd_gradient(&x, |y| inst.f(y));
        out.max_rel_err_f = out.max_rel_err_f.max(rel_err(&fd, &inst.grad_f(&x)));

        for i in 0..s.p() {
            let xi = inst.block(&x, i);
            let blk = &inst.constraints()[i];
            let fdj = fd_jacobian(blk, &xi);
            let exact = blk.jacobian(&xi);
            let err = (&fdj - &exact).norm() / exact.norm().max(1.0);
            out.max_rel_err_h = out.max_rel_err_h.max(err);

            let r = s.range(i);
            let fdk = fd_gradient(&xi, |yi| {
                let mut y = x.clone();
                y.rows_range_mut(r.clone()).copy_from(yi);
                inst.k_value(&y, &mu, rho).expect("dimensions checked")
            });
            let exact_k = inst.k_block_gradient(i, &x, &mu, rho).expect("dimensions checked");
            out.max_rel_err_k = out.max_rel_err_k.max(rel_err(&fdk, &exact_k));
        }
    }
    out
}

/// Largest observed ratios for the constants of one constraint block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ObservedConstants {
    pub m: f64,
    pub k: f64,
    pub j: f64,
    pub l: f64,
}

/// Samples `pairs` pairs of points in the block domain (half of them local
/// perturbations of boundary points) and records the largest ratios.
pub fn observe_block_constants(
    kernel: &ProxKernel,
    block: &ConstraintBlock,
    pairs: usize,
    seed: u64,
) -> ObservedConstants {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = block.dim();
    let mut obs = ObservedConstants::default();
    for t in 0..pairs {
        let (x, y) = if t % 2 == 0 {
            (
                sample_domain_point(kernel, dim, &mut rng),
                sample_domain_point(kernel, dim, &mut rng),
            )
        } else {
            let x = sample_extreme_point(kernel, dim, &mut rng);
            let step = DVector::from_fn(dim, |_, _| rng.random_range(-1e-2..=1e-2));
            let y = clamp_to_domain(kernel, &(&x + step));
            (x, y)
        };
        let d = (&x - &y).norm();
        let hx = block.value(&x);
        let jx = block.jacobian(&x);
        obs.m = obs.m.max(hx.norm()).max(block.value(&y).norm());
        obs.j = obs.j.max(crate::linalg::spectral_norm(&jx));
        if d > 1e-12 {
            obs.k = obs.k.max((hx - block.value(&y)).norm() / d);
            obs.l = obs.l.max(crate::linalg::spectral_norm(&(jx - block.jacobian(&y))) / d);
        }
    }
    obs
}

/// Estimates constants for a user block: `1.5 x` the largest ratio over
/// [`ESTIMATOR_PAIRS`] sampled pairs.
pub fn estimate_constants(kernel: &ProxKernel, block: &ConstraintBlock, seed: u64) -> ConstraintConstants {
    let obs = observe_block_constants(kernel, block, ESTIMATOR_PAIRS, seed);
    ConstraintConstants {
        m: obs.m * ESTIMATOR_INFLATION,
        k: obs.k * ESTIMATOR_INFLATION,
        j: obs.j * ESTIMATOR_INFLATION,
        l: obs.l * ESTIMATOR_INFLATION,
    }
}

/// Outcome of the sampled constant checks for a whole instance.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantCheck {
    pub pairs: usize,
    /// Largest `||grad f(x) - grad f(z)|| / ||x - z||` over the pairs.
    pub observed_lf: f64,
    pub declared_lf: f64,
    pub observed: Vec<ObservedConstants>,
    pub declared: Vec<ConstraintConstants>,
    /// Largest ratio of the blockwise K-gradient difference to `Lip(mu, rho) ||x_i - z_i||`.
    pub lip_ratio: f64,
    /// Largest `P_lb - (f + g)` over sampled feasible-set proxies (must be <= 0).
    pub lower_bound_gap: f64,
}

impl ConstantCheck {
    /// Declared constants dominate everything observed.
    pub fn passed(&self) -> bool {
        let tol = 1e-9;
        self.observed_lf <= self.declared_lf * (1.0 + tol) + tol
            && self.lip_ratio <= 1.0 + tol
            && self.lower_bound_gap <= 0.0
            && self.observed.iter().zip(&self.declared).all(|(o, d)| {
                o.m <= d.m * (1.0 + tol) + tol
                    && o.k <= d.k * (1.0 + tol) + tol
                    && o.j <= d.j * (1.0 + tol) + tol
                    && o.l <= d.l * (1.0 + tol) + tol
            })
    }

    /// Declared constants are within a factor two of the largest observation.
    /// Zero constants count as tight when nothing was observed.
    pub fn tight_within_two(&self) -> bool {
        let tight = |o: f64, d: f64| d == 0.0 || o > d / 2.0;
        tight(self.observed_lf, self.declared_lf)
            && self
                .observed
                .iter()
                .zip(&self.declared)
                .all(|(o, d)| tight(o.m, d.m) && tight(o.k, d.k) && tight(o.j, d.j) && tight(o.l, d.l))
    }
}

/// Checks `L_f`, the block constants, the blockwise Lipschitz bound of the
/// K-gradient and the objective lower bound on sampled points.
pub fn constant_check(inst: &ProblemInstance, pairs: usize, seed: u64) -> ConstantCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = inst.structure().clone();

    let mut observed_lf: f64 = 0.0;
    let mut lip_ratio: f64 = 0.0;
    let mut lower_bound_gap = f64::NEG_INFINITY;
    for t in 0..pairs {
        let x = sample_point(inst, &mut rng);
        let z = sample_point(inst, &mut rng);
        let d = (&x - &z).norm();
        if d > 0.0 {
            observed_lf = observed_lf.max((inst.grad_f(&x) - inst.grad_f(&z)).norm() / d);
        }
        if let Some(v) = inst.objective_value(&x).finite() {
            lower_bound_gap = lower_bound_gap.max(inst.p_lb() - v);
        }

        let i = t % s.p();
        let mu = DVector::from_fn(s.m(), |_, _| rng.random_range(-3.0..=3.0));
        let rho = rng.random_range(0.0..=20.0);
        let mut xz = x.clone();
        xz.rows_range_mut(s.range(i)).copy_from(&inst.block(&z, i));
        let di = (inst.block(&x, i) - inst.block(&z, i)).norm();
        if di > 0.0 {
            let gx = inst.k_block_gradient(i, &x, &mu, rho).expect("dims");
            let gz = inst.k_block_gradient(i, &xz, &mu, rho).expect("dims");
            let bound = inst.lip(mu.norm(), rho) * di;
            if bound > 0.0 {
                lip_ratio = lip_ratio.max((gx - gz).norm() / bound);
            }
        }
    }
    // the objective lower bound must also hold at the start
    lower_bound_gap = lower_bound_gap.max(inst.p_lb() - inst.objective_value(inst.x0()).to_f64());

    let observed = (0..s.p())
        .map(|i| observe_block_constants(&inst.prox_terms()[i], &inst.constraints()[i], pairs, seed ^ (i as u64 + 1)))
        .collect();
    let declared = inst.constraints().iter().map(|h| h.constants()).collect();
    ConstantCheck {
        pairs,
        observed_lf,
        declared_lf: inst.lf(),
        observed,
        declared,
        lip_ratio,
        lower_bound_gap,
    }
}

/// Full problem-model invariant suite.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub gradients: GradientCheck,
    pub constants: ConstantCheck,
    pub start_feasibility: f64,
    /// Largest `|L_rho - K_rho - g| / (1 + |L_rho|)` over the sampled points.
    pub split_error: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.gradients.passed()
            && self.constants.passed()
            && self.start_feasibility <= super::instance::FEASIBLE_START_TOL
            && self.split_error <= 1e-12
    }
}

pub fn invariant_suite(inst: &ProblemInstance, points: usize, seed: u64) -> InvariantReport {
    let gradients = finite_difference_check(inst, points, seed);
    let constants = constant_check(inst, points, seed.wrapping_add(1));
    let start_feasibility = inst.aggregate_h(inst.x0()).map(|h| h.norm()).unwrap_or(f64::INFINITY);

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut split_error: f64 = 0.0;
    for _ in 0..points {
        let x = sample_point(inst, &mut rng);
        let mu = DVector::from_fn(inst.structure().m(), |_, _| rng.random_range(-3.0..=3.0));
        let rho = rng.random_range(0.0..=20.0);
        let al = inst.augmented_lagrangian(&x, &mu, rho).expect("dims").to_f64();
        let k = inst.k_value(&x, &mu, rho).expect("dims");
        let g = inst.g(&x).to_f64();
        split_error = split_error.max(((al - k) - g).abs() / (1.0 + al.abs()));
    }
    InvariantReport {
        gradients,
        constants,
        start_feasibility,
        split_error,
    }
}
