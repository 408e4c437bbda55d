use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{param_err, structure_err, Error, Result};
use crate::prox::Domain;

/// Bounds of one constraint block over its domain `X_i`:
/// `||h_i|| <= M`, `||h_i(x) - h_i(y)|| <= K ||x - y||`,
/// `||grad h_i|| <= J`, `||grad h_i(x) - grad h_i(y)|| <= L ||x - y||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintConstants {
    pub m: f64,
    pub k: f64,
    pub j: f64,
    pub l: f64,
}

impl ConstraintConstants {
    fn validate(&self) -> Result<()> {
        let all = [self.m, self.k, self.j, self.l];
        if all.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(param_err(format!("constraint constants must be finite and nonnegative: {self:?}")))
        }
    }
}

/// `h_i(x_i)_j = sum_k B_jk x_k + sum_k C_jk x_k^2 + d_j`.
///
/// With `C = 0` this is an affine block. The Jacobian is returned in the
/// `n_i x m` orientation, so `grad h_i(x_i) mu` is a block-sized vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock {
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DVector<f64>,
    constants: ConstraintConstants,
}

impl ConstraintBlock {
    /// Builds the block and derives its constants in closed form over `domain`.
    pub fn quadratic(b: DMatrix<f64>, c: DMatrix<f64>, d: DVector<f64>, domain: Domain) -> Result<Self> {
        check_shapes(&b, &c, &d)?;
        let constants = closed_form_constants(&b, &c, &d, domain)?;
        Ok(Self { b, c, d, constants })
    }

    pub fn affine(b: DMatrix<f64>, d: DVector<f64>, domain: Domain) -> Result<Self> {
        let c = DMatrix::zeros(b.nrows(), b.ncols());
        Self::quadratic(b, c, d, domain)
    }

    /// Builds the block with caller-supplied constants.
    pub fn with_constants(
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DVector<f64>,
        constants: ConstraintConstants,
    ) -> Result<Self> {
        check_shapes(&b, &c, &d)?;
        constants.validate()?;
        Ok(Self { b, c, d, constants })
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn linear_part(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn quadratic_part(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn constants(&self) -> ConstraintConstants {
        self.constants
    }

    pub fn is_affine(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    pub fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        let sq = x.map(|v| v * v);
        &self.b * x + &self.c * sq + &self.d
    }

    /// `grad h_i(x_i)`, an `n_i x m` matrix.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut jt = self.b.clone();
        for k in 0..self.dim() {
            let two_x = 2.0 * x[k];
            for j in 0..self.m() {
                jt[(j, k)] += self.c[(j, k)] * two_x;
            }
        }
        jt.transpose()
    }

    /// `grad h_i(x_i) v` without forming the Jacobian.
    pub fn jacobian_apply(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = self.b.tr_mul(v);
        let cv = self.c.tr_mul(v);
        for k in 0..self.dim() {
            out[k] += 2.0 * x[k] * cv[k];
        }
        out
    }
}

fn check_shapes(b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DVector<f64>) -> Result<()> {
    if b.shape() != c.shape() || b.nrows() != d.len() {
        return Err(structure_err(format!(
            "constraint block: B is {:?}, C is {:?}, d has length {}",
            b.shape(),
            c.shape(),
            d.len()
        )));
    }
    Ok(())
}

/// Coordinate radius `r` with `|x_k| <= r` on the domain, plus per-coordinate bounds.
fn coordinate_bounds(domain: Domain) -> Option<(f64, f64)> {
    match domain {
        Domain::Unconstrained => None,
        Domain::Box { lo, hi } => Some((lo, hi)),
        Domain::Ball { radius } | Domain::Sphere { radius } => Some((-radius, radius)),
        Domain::Annulus { outer, .. } => Some((-outer, outer)),
    }
}

fn closed_form_constants(
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
    domain: Domain,
) -> Result<ConstraintConstants> {
    let (lo, hi) = coordinate_bounds(domain).ok_or_else(|| {
        Error::Config("closed-form constraint constants need a bounded domain".into())
    })?;
    let r = lo.abs().max(hi.abs());
    let (m_rows, n) = b.shape();

    // ||grad h(x)||_2 <= ||grad h(x)||_F <= sqrt(sum (|b| + 2|c| r)^2)
    let mut frob = 0.0;
    for j in 0..m_rows {
        for k in 0..n {
            let e = b[(j, k)].abs() + 2.0 * c[(j, k)].abs() * r;
            frob += e * e;
        }
    }
    let jac = frob.sqrt();

    // grad h(x) - grad h(y) = 2 diag(x - y) C^T, whose norm is at most
    // 2 max_k ||C[:, k]|| ||x - y||
    let l = 2.0 * (0..n).map(|k| c.column(k).norm()).fold(0.0, f64::max);

    // each component is separable in k; take exact 1-D extremes over [lo, hi]
    let mut m_sq = 0.0;
    for j in 0..m_rows {
        let mut max = d[j];
        let mut min = d[j];
        for k in 0..n {
            let (qmin, qmax) = quadratic_range(c[(j, k)], b[(j, k)], lo, hi);
            max += qmax;
            min += qmin;
        }
        let a = max.abs().max(min.abs());
        m_sq += a * a;
    }

    Ok(ConstraintConstants {
        m: m_sq.sqrt(),
        k: jac,
        j: jac,
        l,
    })
}

/// Range of `a t^2 + b t` over `t in [lo, hi]`.
fn quadratic_range(a: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let q = |t: f64| a * t * t + b * t;
    let mut vals = vec![q(lo), q(hi)];
    if a != 0.0 {
        let t = -b / (2.0 * a);
        if t > lo && t < hi {
            vals.push(q(t));
        }
    }
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_circle_constants() {
        // h(x) = x^2 - 1 on [-1, 1]
        let blk = ConstraintBlock::quadratic(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, -1.0),
            Domain::Box { lo: -1.0, hi: 1.0 },
        )
        .unwrap();
        let k = blk.constants();
        assert_eq!(k.m, 1.0);
        assert_eq!(k.j, 2.0);
        assert_eq!(k.l, 2.0);
        assert_eq!(blk.value(&DVector::from_element(1, 1.0))[0], 0.0);
        assert_eq!(blk.jacobian(&DVector::from_element(1, 0.5))[(0, 0)], 1.0);
    }

    #[test]
    fn affine_block_has_zero_curvature() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let blk = ConstraintBlock::affine(b.clone(), DVector::zeros(2), Domain::Box { lo: 0.0, hi: 1.0 }).unwrap();
        assert!(blk.is_affine());
        assert_eq!(blk.constants().l, 0.0);
        assert_eq!(blk.jacobian(&DVector::zeros(2)), b.transpose());
        // h over [0,1]^2: components range [0,3] and [0,1]
        assert!((blk.constants().m - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jacobian_apply_matches_matrix() {
        let blk = ConstraintBlock::quadratic(
            DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.5, 0.0, 2.0, 1.0]),
            DMatrix::from_row_slice(2, 3, &[0.3, 0.0, -0.2, 0.1, 0.4, 0.0]),
            DVector::from_vec(vec![0.1, -0.2]),
            Domain::Box { lo: -1.0, hi: 1.0 },
        )
        .unwrap();
        let x = DVector::from_vec(vec![0.2, -0.7, 0.4]);
        let v = DVector::from_vec(vec![1.5, -0.5]);
        let direct = blk.jacobian(&x) * &v;
        assert!((direct - blk.jacobian_apply(&x, &v)).norm() < 1e-14);
    }

    #[test]
    fn unbounded_domain_rejected_for_closed_form() {
        let r = ConstraintBlock::affine(DMatrix::identity(1, 1), DVector::zeros(1), Domain::Unconstrained);
        assert!(r.is_err());
    }
}
