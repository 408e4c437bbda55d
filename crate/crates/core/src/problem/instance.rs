use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BlockStructure, ConstraintBlock, ExtReal, SmoothObjective};
use crate::error::{param_err, structure_err, Error, Result};
use crate::prox::ProxKernel;

/// Feasibility tolerance required of the starting point.
pub const FEASIBLE_START_TOL: f64 = 1e-10;

/// `M_h = sum M_i`, `K_h = max K_i`, `J_h = max J_i`, `L_h = max L_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateConstants {
    pub m_h: f64,
    pub k_h: f64,
    pub j_h: f64,
    pub l_h: f64,
}

impl AggregateConstants {
    /// `J_h K_h + M_h L_h`.
    pub fn kappa1(&self) -> f64 {
        self.j_h * self.k_h + self.m_h * self.l_h
    }
}

/// An immutable problem `min f(x) + sum g_i(x_i) s.t. sum h_i(x_i) = 0`
/// with a feasible start and an objective lower bound.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    structure: Arc<BlockStructure>,
    objective: SmoothObjective,
    prox_terms: Vec<ProxKernel>,
    constraints: Vec<ConstraintBlock>,
    x0: DVector<f64>,
    p_lb: f64,
    aggregate: AggregateConstants,
}

impl ProblemInstance {
    pub fn new(
        structure: BlockStructure,
        objective: SmoothObjective,
        prox_terms: Vec<ProxKernel>,
        constraints: Vec<ConstraintBlock>,
        x0: DVector<f64>,
        p_lb: f64,
    ) -> Result<Self> {
        let p = structure.p();
        if prox_terms.len() != p || constraints.len() != p {
            return Err(structure_err(format!(
                "{p} blocks but {} prox terms and {} constraint blocks",
                prox_terms.len(),
                constraints.len()
            )));
        }
        if objective.dim() != structure.n() {
            return Err(structure_err(format!(
                "objective has dimension {}, structure has n = {}",
                objective.dim(),
                structure.n()
            )));
        }
        for (i, (g, h)) in prox_terms.iter().zip(&constraints).enumerate() {
            g.validate()?;
            if h.dim() != structure.dim(i) || h.m() != structure.m() {
                return Err(structure_err(format!(
                    "constraint block {i} maps R^{} to R^{}, expected R^{} to R^{}",
                    h.dim(),
                    h.m(),
                    structure.dim(i),
                    structure.m()
                )));
            }
        }
        structure.check_vector(&x0)?;
        if !p_lb.is_finite() {
            return Err(param_err("objective lower bound must be finite"));
        }
        let aggregate = AggregateConstants {
            m_h: constraints.iter().map(|h| h.constants().m).sum(),
            k_h: constraints.iter().map(|h| h.constants().k).fold(0.0, f64::max),
            j_h: constraints.iter().map(|h| h.constants().j).fold(0.0, f64::max),
            l_h: constraints.iter().map(|h| h.constants().l).fold(0.0, f64::max),
        };
        let inst = Self {
            structure: Arc::new(structure),
            objective,
            prox_terms,
            constraints,
            x0,
            p_lb,
            aggregate,
        };
        let feas = inst.aggregate_h(&inst.x0)?.norm();
        if feas > FEASIBLE_START_TOL {
            return Err(Error::Config(format!("starting point is infeasible: ||h(x0)|| = {feas:e}")));
        }
        if !inst.g(&inst.x0).is_finite() {
            return Err(Error::Config("starting point lies outside dom g".into()));
        }
        let obj0 = inst.objective_value(&inst.x0).to_f64();
        if obj0 < p_lb {
            return Err(Error::Config(format!(
                "lower bound {p_lb} exceeds the starting objective {obj0}"
            )));
        }
        Ok(inst)
    }

    pub fn structure(&self) -> &Arc<BlockStructure> {
        &self.structure
    }

    pub fn objective(&self) -> &SmoothObjective {
        &self.objective
    }

    pub fn prox_terms(&self) -> &[ProxKernel] {
        &self.prox_terms
    }

    pub fn constraints(&self) -> &[ConstraintBlock] {
        &self.constraints
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn p_lb(&self) -> f64 {
        self.p_lb
    }

    pub fn aggregate_constants(&self) -> AggregateConstants {
        self.aggregate
    }

    pub fn lf(&self) -> f64 {
        self.objective.lipschitz()
    }

    /// `f(x0) + g(x0) - P_lb`.
    pub fn delta_p(&self) -> f64 {
        self.objective_value(&self.x0).to_f64() - self.p_lb
    }

    pub fn block(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        self.structure.block(x, i).into_owned()
    }

    pub fn h_block(&self, i: usize, xi: &DVector<f64>) -> DVector<f64> {
        self.constraints[i].value(xi)
    }

    pub fn h_blocks(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.structure.check_vector(x)?;
        Ok((0..self.structure.p())
            .map(|i| self.h_block(i, &self.block(x, i)))
            .collect())
    }

    /// `h(x) = sum_i h_i(x_i)`.
    pub fn aggregate_h(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.structure.m());
        for hi in self.h_blocks(x)? {
            out += hi;
        }
        Ok(out)
    }

    pub fn f(&self, x: &DVector<f64>) -> f64 {
        self.objective.value(x)
    }

    pub fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        self.objective.gradient(x)
    }

    pub fn g_block(&self, i: usize, xi: &DVector<f64>) -> ExtReal {
        self.prox_terms[i].value(xi)
    }

    pub fn g(&self, x: &DVector<f64>) -> ExtReal {
        (0..self.structure.p())
            .map(|i| self.g_block(i, &self.block(x, i)))
            .sum()
    }

    /// `f(x) + g(x)`.
    pub fn objective_value(&self, x: &DVector<f64>) -> ExtReal {
        self.g(x) + self.f(x)
    }

    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        (0..self.structure.p()).all(|i| self.prox_terms[i].contains(&self.block(x, i)))
    }

    /// Smooth part `K_rho(x, mu) = f(x) + <mu, h(x)> + (rho/2)||h(x)||^2`.
    pub fn k_value(&self, x: &DVector<f64>, mu: &DVector<f64>, rho: f64) -> Result<f64> {
        self.structure.check_dual(mu)?;
        let h = self.aggregate_h(x)?;
        Ok(self.f(x) + mu.dot(&h) + 0.5 * rho * h.norm_squared())
    }

    /// `L_rho(x, mu) = K_rho(x, mu) + g(x)`.
    pub fn augmented_lagrangian(&self, x: &DVector<f64>, mu: &DVector<f64>, rho: f64) -> Result<ExtReal> {
        if rho < 0.0 {
            return Err(param_err(format!("rho must be nonnegative, got {rho}")));
        }
        let g = self.g(x);
        if !g.is_finite() {
            return Ok(ExtReal::PosInf);
        }
        Ok(g + self.k_value(x, mu, rho)?)
    }

    /// `grad h_i(x_i)`, an `n_i x m` matrix.
    pub fn jacobian_block(&self, i: usize, xi: &DVector<f64>) -> DMatrix<f64> {
        self.constraints[i].jacobian(xi)
    }

    /// Stacked `n x m` Jacobian of `h`.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.structure.n(), self.structure.m());
        for i in 0..self.structure.p() {
            let r = self.structure.range(i);
            let jb = self.jacobian_block(i, &self.block(x, i));
            out.view_mut((r.start, 0), (r.len(), self.structure.m())).copy_from(&jb);
        }
        out
    }

    /// `grad_{x_i} K_rho(x, mu) = grad_i f(x) + grad h_i(x_i)(mu + rho h(x))`.
    pub fn k_block_gradient(&self, i: usize, x: &DVector<f64>, mu: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        if i >= self.structure.p() {
            return Err(structure_err(format!("block index {i} out of range")));
        }
        self.structure.check_dual(mu)?;
        let h = self.aggregate_h(x)?;
        let w = mu + h * rho;
        Ok(self.block_gradient_with_weight(i, x, &w))
    }

    /// `grad_i f(x) + grad h_i(x_i) w` for a precomputed multiplier weight `w`.
    pub(crate) fn block_gradient_with_weight(&self, i: usize, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let r = self.structure.range(i);
        let gf = self.grad_f(x).rows_range(r).into_owned();
        gf + self.constraints[i].jacobian_apply(&self.block(x, i), w)
    }

    /// Full gradient of `K_rho` in `x`.
    pub fn k_gradient(&self, x: &DVector<f64>, mu: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
        self.structure.check_dual(mu)?;
        let h = self.aggregate_h(x)?;
        let w = mu + h * rho;
        Ok(self.gradient_with_weight(x, &w))
    }

    /// `grad f(x) + grad h(x) w`.
    pub(crate) fn gradient_with_weight(&self, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let mut out = self.grad_f(x);
        for i in 0..self.structure.p() {
            let r = self.structure.range(i);
            let add = self.constraints[i].jacobian_apply(&self.block(x, i), w);
            let mut view = out.rows_range_mut(r);
            view += add;
        }
        out
    }

    /// `Lip(mu, rho) = L_f + ||mu|| L_h + rho (J_h K_h + M_h L_h)`.
    pub fn lip(&self, mu_norm: f64, rho: f64) -> f64 {
        lip_formula(self.lf(), mu_norm, rho, &self.aggregate)
    }

    /// True when every constraint block is affine.
    pub fn is_affine(&self) -> bool {
        self.constraints.iter().all(|h| h.is_affine())
    }

    /// `(A, b)` with `h(x) = A x - b`, when every block is affine.
    pub fn affine_data(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        if !self.is_affine() {
            return None;
        }
        let s = &self.structure;
        let mut a = DMatrix::zeros(s.m(), s.n());
        let mut b = DVector::zeros(s.m());
        for (i, h) in self.constraints.iter().enumerate() {
            let r = s.range(i);
            a.view_mut((0, r.start), (s.m(), r.len())).copy_from(h.linear_part());
            b -= h.offset();
        }
        Some((a, b))
    }

    /// Applies every block's prox to the matching slice of `z`.
    pub fn prox_all(&self, eta: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.structure.check_vector(z)?;
        let mut out = z.clone();
        for i in 0..self.structure.p() {
            let r = self.structure.range(i);
            let xi = self.prox_terms[i].prox(eta, &self.block(z, i))?;
            out.rows_range_mut(r).copy_from(&xi);
        }
        Ok(out)
    }
}

/// `L_f + ||mu|| L_h + rho (J_h K_h + M_h L_h)`.
pub fn lip_formula(lf: f64, mu_norm: f64, rho: f64, agg: &AggregateConstants) -> f64 {
    lf + mu_norm * agg.l_h + rho * agg.kappa1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::Domain;

    fn two_block() -> ProblemInstance {
        // h_1(x_1) = x_1^2 - 1, h_2(x_2) = x_2, start at (1, 0)
        let s = BlockStructure::new(vec![1, 1], 1).unwrap();
        let dom = Domain::Box { lo: -2.0, hi: 2.0 };
        let h1 = ConstraintBlock::quadratic(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, -1.0),
            dom,
        )
        .unwrap();
        let h2 = ConstraintBlock::affine(DMatrix::identity(1, 1), DVector::zeros(1), dom).unwrap();
        let g = ProxKernel::Box { lo: -2.0, hi: 2.0 };
        ProblemInstance::new(
            s,
            SmoothObjective::zero(2),
            vec![g.clone(), g],
            vec![h1, h2],
            DVector::from_vec(vec![1.0, 0.0]),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn aggregate_h_sums_blocks() {
        let inst = two_block();
        assert_eq!(inst.aggregate_h(&DVector::from_vec(vec![1.0, 0.0])).unwrap()[0], 0.0);
        assert_eq!(inst.aggregate_h(&DVector::from_vec(vec![2.0, 1.0])).unwrap()[0], 4.0);
        assert!(inst.aggregate_h(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn lip_formula_arithmetic() {
        let agg = AggregateConstants {
            m_h: 1.0,
            k_h: 1.0,
            j_h: 2.0,
            l_h: 1.0,
        };
        assert_eq!(lip_formula(1.0, 2.0, 10.0, &agg), 33.0);
        assert_eq!(lip_formula(1.0, 0.0, 0.0, &agg), 1.0);
    }

    #[test]
    fn augmented_lagrangian_outside_domain_is_infinite() {
        let inst = two_block();
        let mu = DVector::zeros(1);
        let x = DVector::from_vec(vec![3.0, 0.0]);
        assert_eq!(inst.augmented_lagrangian(&x, &mu, 1.0).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn augmented_lagrangian_arithmetic() {
        let inst = two_block();
        // h = 0.25 - 1 + 0.5 = -0.25, <mu,h> = -0.5, (rho/2)h^2 = 0.0625
        let x = DVector::from_vec(vec![0.5, 0.5]);
        let mu = DVector::from_element(1, 2.0);
        let v = inst.augmented_lagrangian(&x, &mu, 2.0).unwrap().finite().unwrap();
        assert!((v - (-0.5 + 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn infeasible_start_rejected() {
        let s = BlockStructure::single(1, 1).unwrap();
        let dom = Domain::Box { lo: -1.0, hi: 1.0 };
        let h = ConstraintBlock::affine(DMatrix::identity(1, 1), DVector::from_element(1, -0.5), dom).unwrap();
        let r = ProblemInstance::new(
            s,
            SmoothObjective::zero(1),
            vec![ProxKernel::Box { lo: -1.0, hi: 1.0 }],
            vec![h],
            DVector::zeros(1),
            0.0,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn affine_data_assembles_blocks() {
        let s = BlockStructure::new(vec![1, 2], 1).unwrap();
        let dom = Domain::Box { lo: -1.0, hi: 1.0 };
        let h1 = ConstraintBlock::affine(DMatrix::from_element(1, 1, 2.0), DVector::from_element(1, -1.0), dom).unwrap();
        let h2 = ConstraintBlock::affine(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::from_element(1, 0.0), dom)
            .unwrap();
        let g = ProxKernel::Box { lo: -1.0, hi: 1.0 };
        let inst = ProblemInstance::new(
            s,
            SmoothObjective::zero(3),
            vec![g.clone(), g],
            vec![h1, h2],
            DVector::from_vec(vec![0.5, 0.0, 0.0]),
            0.0,
        )
        .unwrap();
        let (a, b) = inst.affine_data().unwrap();
        assert_eq!(a, DMatrix::from_row_slice(1, 3, &[2.0, 1.0, 1.0]));
        assert_eq!(b[0], 1.0);
    }
}
