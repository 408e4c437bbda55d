//! Seeded test problems with closed-form constants and known ground truth.
//!
//! | id | structure | target |
//! |---|---|---|
//! | G1 | `p` blocks, indefinite quadratic `f`, box `X_i`, diagonal-quadratic `h_i` | SDD-ADMM |
//! | G2 | convex quadratic, `w ||x||_1` plus box, affine `h`, planted minimizer | UDD-ALM (affine) |
//! | G3 | convex quadratic, box `X`, quadratic `h`, planted global minimizer | UDD-ALM (nonlinear) |
//! | G4 | two blocks, full-row-rank affine `h`, box `X_i` | `eps1_rule` |
//!
//! Every generator runs the problem-model invariant suite before returning.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::{null_space, singular_values, spectral_norm, symmetric_eigen_range};
use crate::problem::checks::invariant_suite;
use crate::problem::{BlockStructure, ConstraintBlock, ProblemInstance, SmoothObjective};
use crate::prox::{soft_threshold, ProxKernel};

/// Scale applied to the G1 constraint maps.
pub const G1_CONSTRAINT_SCALE: f64 = 0.005;
/// Points used by the invariant suite run inside each generator.
pub const GENERATOR_CHECK_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GalleryId {
    G1,
    G2,
    G3,
    G4,
}

impl GalleryId {
    pub const ALL: [GalleryId; 4] = [GalleryId::G1, GalleryId::G2, GalleryId::G3, GalleryId::G4];
}

impl std::str::FromStr for GalleryId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "G1" => Ok(GalleryId::G1),
            "G2" => Ok(GalleryId::G2),
            "G3" => Ok(GalleryId::G3),
            "G4" => Ok(GalleryId::G4),
            _ => Err(Error::Config(format!("unknown gallery id {s:?}; expected G1..G4"))),
        }
    }
}

impl std::fmt::Display for GalleryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GalleryMetadata {
    pub description: String,
    pub sizes: Vec<(String, usize)>,
    pub constants: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_star: Option<Vec<f64>>,
    /// `f(x*) + g(x*)` when a ground-truth solution is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub licq: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robinson: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct GalleryInstance {
    pub id: GalleryId,
    pub seed: u64,
    pub problem: ProblemInstance,
    pub metadata: GalleryMetadata,
}

/// Builds an instance with its default sizes.
pub fn make(id: GalleryId, seed: u64) -> Result<GalleryInstance> {
    match id {
        GalleryId::G1 => make_g1(seed, 3, 4, 2),
        GalleryId::G2 => make_g2(seed, 10, 3),
        GalleryId::G3 => make_g3(seed, 8, 2, 2),
        GalleryId::G4 => make_g4(seed),
    }
}

/// One line per gallery id with its description and default sizes.
pub fn list() -> Vec<(GalleryId, GalleryMetadata)> {
    [GalleryId::G1, GalleryId::G2, GalleryId::G3, GalleryId::G4]
        .into_iter()
        .map(|id| (id, make(id, 0).map(|g| g.metadata).unwrap_or_default()))
        .collect()
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let r = uniform_matrix(rng, n, n, -1.0, 1.0);
    (&r + r.transpose()) * (0.5 / (n as f64).sqrt())
}

/// Lower bound of `0.5 x^T Q x + c^T x` over `[lo, hi]^n`: the better of the
/// eigenvalue bound and the entrywise bound.
pub fn box_quadratic_lower_bound(q: &DMatrix<f64>, c: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    let n = c.len();
    let r = lo.abs().max(hi.abs());
    let lin: f64 = c.iter().map(|&ck| (ck * lo).min(ck * hi)).sum();
    let (lmin, _) = symmetric_eigen_range(q);
    let eig = 0.5 * lmin.min(0.0) * r * r * n as f64;
    let mut entry = 0.0;
    for j in 0..n {
        for k in 0..n {
            let v = q[(j, k)];
            entry += if j == k { 0.5 * (v * lo * lo).min(v * hi * hi).min(0.0) } else { -0.5 * v.abs() * r * r };
        }
    }
    eig.max(entry) + lin
}

fn finish(id: GalleryId, seed: u64, problem: ProblemInstance, metadata: GalleryMetadata) -> Result<GalleryInstance> {
    let report = invariant_suite(&problem, GENERATOR_CHECK_POINTS, seed);
    if !report.passed() {
        return Err(Error::Config(format!("{id} (seed {seed}) failed its invariant suite: {report:?}")));
    }
    Ok(GalleryInstance {
        id,
        seed,
        problem,
        metadata,
    })
}

/// Multi-block nonconvex instance with nonlinear coupling.
///
/// `f(x) = 0.5 x^T Q x + c^T x` with indefinite `Q`, `X_i = [-1, 1]^{n_i}`,
/// `h_i(x_i) = s (B_i x_i + C_i x_i.^2 + d_i)` with `sum d_i = 0`, `x^0 = 0`.
pub fn make_g1(seed: u64, p: usize, n_i: usize, m: usize) -> Result<GalleryInstance> {
    if !(1..=5).contains(&p) || !(1..=20).contains(&n_i) || !(1..=5).contains(&m) {
        return Err(param_err(format!(
            "G1 sizes must satisfy p <= 5, n_i <= 20, m <= 5; got p={p}, n_i={n_i}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p * n_i;
    let q = random_symmetric(&mut rng, n);
    let c = uniform_vector(&mut rng, n, -0.5, 0.5);
    let kernel = ProxKernel::Box { lo: -1.0, hi: 1.0 };
    let s = G1_CONSTRAINT_SCALE;
    let mut offsets: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut blocks = Vec::with_capacity(p);
    let mut running = DVector::zeros(m);
    for i in 0..p {
        let b = uniform_matrix(&mut rng, m, n_i, -1.0, 1.0) * s;
        let cq = uniform_matrix(&mut rng, m, n_i, -0.5, 0.5) * s;
        let d = if i + 1 < p {
            let d = uniform_vector(&mut rng, m, -0.2, 0.2) * s;
            running += &d;
            d
        } else {
            // cancels the other offsets exactly in summation order
            -&running
        };
        offsets.push(d.clone());
        blocks.push(ConstraintBlock::quadratic(b, cq, d, kernel.domain())?);
    }
    let p_lb = box_quadratic_lower_bound(&q, &c, -1.0, 1.0);
    let structure = BlockStructure::new(vec![n_i; p], m)?;
    let objective = SmoothObjective::quadratic(q, c, None)?;
    let problem = ProblemInstance::new(structure, objective, vec![kernel; p], blocks, DVector::zeros(n), p_lb)?;
    let metadata = GalleryMetadata {
        description: "multi-block nonconvex quadratic, box blocks, diagonal-quadratic coupling".into(),
        sizes: vec![("p".into(), p), ("n_i".into(), n_i), ("m".into(), m)],
        constants: format!(
            "L_f = ||Q||; per block on [-1,1]: M = ||max |h_ij|||, J = K = sqrt(sum (|B| + 2|C|)^2), \
             L = 2 max_k ||C[:,k]||; constraint scale s = {s}"
        ),
        ..Default::default()
    };
    finish(GalleryId::G1, seed, problem, metadata)
}

/// Convex quadratic with `w ||x||_1` over `[-1, 1]^n` and `A x = b`.
///
/// `x*` is planted as the minimizer of `f + g` over the box, with some
/// coordinates at zero, and `b` makes it feasible, so the constraint
/// multiplier at the solution is zero. `x^0 = x* + N z` with `N` a null-space
/// basis of `A`; it is interior and exactly feasible.
pub fn make_g2(seed: u64, n: usize, m: usize) -> Result<GalleryInstance> {
    build_g2(seed, n, m, false)
}

/// G2 with the last row of `A` duplicating the first (rank deficient).
pub fn make_g2_duplicated_row(seed: u64, n: usize, m: usize) -> Result<GalleryInstance> {
    if m < 2 {
        return Err(param_err("the duplicated-row variant needs m >= 2"));
    }
    build_g2(seed, n, m, true)
}

/// Weight of the `l1` term in G2.
pub const G2_L1_WEIGHT: f64 = 0.1;
/// Sup-norm distance between the G2 start and the planted minimizer.
pub const G2_START_OFFSET: f64 = 0.4;

fn build_g2(seed: u64, n: usize, m: usize, duplicate: bool) -> Result<GalleryInstance> {
    if !(2..=100).contains(&n) || !(1..=5).contains(&m) || m >= n {
        return Err(param_err(format!("G2 sizes must satisfy m < n <= 100, m <= 5; got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = uniform_matrix(&mut rng, n, n, -1.0, 1.0);
    let q = r.tr_mul(&r) / n as f64 + DMatrix::identity(n, n) * 0.1;
    let mut a = uniform_matrix(&mut rng, m, n, -1.0, 1.0);
    if duplicate {
        let first = a.row(0).into_owned();
        a.row_mut(m - 1).copy_from(&first);
    }
    let w = G2_L1_WEIGHT;
    let mut x_star = DVector::zeros(n);
    let mut subgrad = DVector::zeros(n);
    for k in 0..n {
        if rng.random_bool(0.3) {
            subgrad[k] = rng.random_range(-0.8..0.8);
        } else {
            let v: f64 = rng.random_range(0.1..0.5);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            x_star[k] = sign * v;
            subgrad[k] = sign;
        }
    }
    // 0 = Q x* + c + w s with s in the subdifferential of ||.||_1 at x*
    let c = -(&q * &x_star) - &subgrad * w;
    let basis = null_space(&a, 1e-10);
    let z = uniform_vector(&mut rng, basis.ncols(), -1.0, 1.0);
    let dir = &basis * z;
    let x0 = &x_star + &dir * (G2_START_OFFSET / dir.amax());
    let b = &a * &x0;
    let (lo, hi) = (-1.0, 1.0);
    let kernel = ProxKernel::L1Box { weight: w, lo, hi };
    let block = ConstraintBlock::affine(a, -&b, kernel.domain())?;

    // unconstrained minimum of the convex quadratic; g >= 0
    let p_lb = -0.5 * c.dot(&q.clone().cholesky().expect("Q is positive definite").solve(&c));
    let f_star = 0.5 * x_star.dot(&(&q * &x_star)) + c.dot(&x_star) + w * x_star.lp_norm(1);

    let structure = BlockStructure::single(n, m)?;
    let objective = SmoothObjective::quadratic(q, c, None)?;
    let problem = ProblemInstance::new(structure, objective, vec![kernel], vec![block], x0, p_lb)?;
    let metadata = GalleryMetadata {
        description: if duplicate {
            "G2 with a duplicated constraint row (rank deficient)".into()
        } else {
            "convex quadratic, l1 plus box, affine constraints, planted interior minimizer".into()
        },
        sizes: vec![("n".into(), n), ("m".into(), m)],
        constants: "L_f = ||Q||; affine h: M = max over the box, J = K = ||A||_F bound, L = 0".into(),
        x_star: Some(x_star.iter().cloned().collect()),
        mu_star: Some(vec![0.0; m]),
        optimal_value: Some(f_star),
        robinson: Some(!duplicate),
        ..Default::default()
    };
    finish(GalleryId::G2, seed, problem, metadata)
}

/// Reference solve of `min 0.5 x^T Q x + c^T x + w ||x||_1` over `[lo, hi]^n`
/// with `A x = b`: classical multiplier method with accelerated proximal
/// gradient inner solves to near machine precision.
pub fn trusted_l1_box_qp(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    w: f64,
    lo: f64,
    hi: f64,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let n = c.len();
    let rho = 10.0;
    let step = 1.0 / (spectral_norm(q) + rho * spectral_norm(a).powi(2));
    let prox = |z: &DVector<f64>| z.map(|v| soft_threshold(v, w * step).clamp(lo, hi));
    let mut x = DVector::zeros(n);
    let mut lambda = DVector::zeros(b.len());
    for _outer in 0..500 {
        let grad = |x: &DVector<f64>| q * x + c + a.tr_mul(&(&lambda + (a * x - b) * rho));
        let mut yv = x.clone();
        let mut t: f64 = 1.0;
        for _inner in 0..20_000 {
            let x_next = prox(&(&yv - grad(&yv) * step));
            let mapping = (&yv - &x_next).norm() / step;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let mut y_next = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
            // restart when momentum points uphill
            if (&yv - &x_next).dot(&(&x_next - &x)) > 0.0 {
                y_next = x_next.clone();
                t = 1.0;
            } else {
                t = t_next;
            }
            x = x_next;
            yv = y_next;
            if mapping < 1e-13 {
                break;
            }
        }
        let r = a * &x - b;
        lambda += &r * rho;
        if r.norm() < 1e-13 {
            break;
        }
    }
    (x, lambda)
}

/// Quadratic equality constraints with a planted global minimizer.
///
/// `X = [-1, 1]^n` is written as `2n` affine inequalities. `x*` sits on
/// `faces` box faces with `y* > 0` there, `c` is back-solved so that `x*`
/// minimizes the strongly convex `f` over the box, and `B` is corrected so
/// that `h(x*) = 0`. The feasible set is nonconvex; `x*` is a global
/// minimizer with `mu* = 0`. `h(0) = 0` and `x^0 = 0`.
pub fn make_g3(seed: u64, n: usize, m: usize, faces: usize) -> Result<GalleryInstance> {
    if !(2..=20).contains(&n) || !(1..=5).contains(&m) || faces + m > n {
        return Err(param_err(format!(
            "G3 sizes must satisfy n <= 20, m <= 5, faces + m <= n; got n={n}, m={m}, faces={faces}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_star = uniform_vector(&mut rng, n, -0.5, 0.5);
    let mut y_star = vec![0.0; 2 * n];
    for k in 0..faces {
        let up = rng.random_bool(0.5);
        x_star[k] = if up { 1.0 } else { -1.0 };
        // inequality order per coordinate: upper face, then lower face
        y_star[2 * k + usize::from(!up)] = rng.random_range(0.5..1.0);
    }
    let mut cq = DMatrix::zeros(m, n);
    for j in 0..m {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for k in 0..n {
            cq[(j, k)] = sign * rng.random_range(0.2..0.5);
        }
    }
    let b_hat = uniform_matrix(&mut rng, m, n, -1.0, 1.0);
    let sq = x_star.map(|v| v * v);
    let miss = &b_hat * &x_star + &cq * &sq;
    let b = &b_hat - &miss * x_star.transpose() / x_star.norm_squared();
    let d = DVector::zeros(m);
    let r = uniform_matrix(&mut rng, n, n, -1.0, 1.0);
    let q = r.tr_mul(&r) / n as f64 + DMatrix::identity(n, n) * 0.1;

    let lo = -1.0;
    let hi = 1.0;
    let kernel = ProxKernel::Box { lo, hi };
    let block = ConstraintBlock::quadratic(b, cq, d, kernel.domain())?;
    let jac = block.jacobian(&x_star);
    let mut ineq_grad = DVector::zeros(n);
    for k in 0..n {
        ineq_grad[k] = y_star[2 * k] - y_star[2 * k + 1];
    }
    let c = -(&q * &x_star) - ineq_grad;
    let p_lb = box_quadratic_lower_bound(&q, &c, lo, hi);
    let f_star = 0.5 * x_star.dot(&(&q * &x_star)) + c.dot(&x_star);

    // LICQ at x*: [grad h(x*), active face normals]
    let mut h = DMatrix::zeros(n, m + faces);
    h.view_mut((0, 0), (n, m)).copy_from(&jac);
    for k in 0..faces {
        h[(k, m + k)] = x_star[k];
    }
    let s = singular_values(&h);
    let licq = s.last().copied().unwrap_or(0.0) > 1e-8 * s.first().copied().unwrap_or(0.0);

    let structure = BlockStructure::single(n, m)?;
    let objective = SmoothObjective::quadratic(q, c, None)?;
    let problem = ProblemInstance::new(structure, objective, vec![kernel], vec![block], DVector::zeros(n), p_lb)?;
    let metadata = GalleryMetadata {
        description: "convex quadratic, box as inequalities, quadratic h, planted global minimizer".into(),
        sizes: vec![("n".into(), n), ("m".into(), m), ("faces".into(), faces)],
        constants: "L_f = ||Q||; block constants in closed form on [-1,1]^n".into(),
        x_star: Some(x_star.iter().cloned().collect()),
        mu_star: Some(vec![0.0; m]),
        y_star: Some(y_star),
        optimal_value: Some(f_star),
        licq: Some(licq),
        ..Default::default()
    };
    finish(GalleryId::G3, seed, problem, metadata)
}

/// Two blocks of size 3, `h_i(x_i) = A_i x_i` with `[A_1 A_2]` of full row
/// rank (`sigma_min >= 0.1`), indefinite quadratic `f`, `X_i = [-1, 1]^3`, `x^0 = 0`.
pub fn make_g4(seed: u64) -> Result<GalleryInstance> {
    let (p, n_i, m) = (2, 3, 2);
    let n = p * n_i;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_symmetric(&mut rng, n);
    let c = uniform_vector(&mut rng, n, -0.5, 0.5);
    let a = loop {
        let a = uniform_matrix(&mut rng, m, n, -1.0, 1.0);
        if singular_values(&a).last().copied().unwrap_or(0.0) >= 0.1 {
            break a;
        }
    };
    let kernel = ProxKernel::Box { lo: -1.0, hi: 1.0 };
    let blocks = (0..p)
        .map(|i| {
            let ai = a.columns(i * n_i, n_i).into_owned();
            ConstraintBlock::affine(ai, DVector::zeros(m), kernel.domain())
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma_min = singular_values(&a).last().copied().unwrap_or(0.0);
    let p_lb = box_quadratic_lower_bound(&q, &c, -1.0, 1.0);
    let structure = BlockStructure::new(vec![n_i; p], m)?;
    let objective = SmoothObjective::quadratic(q, c, None)?;
    let problem = ProblemInstance::new(structure, objective, vec![kernel; p], blocks, DVector::zeros(n), p_lb)?;
    let metadata = GalleryMetadata {
        description: format!("two-block affine coupling with full row rank (sigma_min {sigma_min:.3}), box blocks"),
        sizes: vec![("p".into(), p), ("n_i".into(), n_i), ("m".into(), m)],
        constants: "L_f = ||Q||; affine h_i: L = 0, J = K = ||A_i||_F bound".into(),
        robinson: Some(true),
        ..Default::default()
    };
    finish(GalleryId::G4, seed, problem, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        assert_eq!("g3".parse::<GalleryId>().unwrap(), GalleryId::G3);
        assert!("G9".parse::<GalleryId>().is_err());
    }

    #[test]
    fn g1_size_guard() {
        assert!(make_g1(0, 6, 2, 2).is_err());
        assert!(make_g1(0, 2, 21, 2).is_err());
    }

    #[test]
    fn lower_bound_is_valid_on_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_symmetric(&mut rng, 4);
        let c = uniform_vector(&mut rng, 4, -1.0, 1.0);
        let lb = box_quadratic_lower_bound(&q, &c, -1.0, 1.0);
        for mask in 0..16u32 {
            let x = DVector::from_fn(4, |k, _| if mask >> k & 1 == 1 { 1.0 } else { -1.0 });
            assert!(0.5 * x.dot(&(&q * &x)) + c.dot(&x) >= lb);
        }
    }
}
