use nalgebra::{DMatrix, DVector};

use crate::error::{param_err, structure_err, Result};

/// Smooth part `f` of the objective.
///
/// Only the quadratic family `f(x) = 0.5 x^T Q x + c^T x` is provided; it covers
/// every instance in the gallery and serializes to the problem JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothObjective {
    Quadratic {
        q: DMatrix<f64>,
        c: DVector<f64>,
        lipschitz: f64,
    },
}

impl SmoothObjective {
    /// Builds a quadratic; `Q` is symmetrized and `L_f = ||Q||` unless given.
    pub fn quadratic(q: DMatrix<f64>, c: DVector<f64>, lipschitz: Option<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() != c.len() {
            return Err(structure_err(format!(
                "quadratic objective: Q is {}x{}, c has length {}",
                q.nrows(),
                q.ncols(),
                c.len()
            )));
        }
        let q = (&q + q.transpose()) * 0.5;
        let lipschitz = match lipschitz {
            Some(l) if l >= 0.0 => l,
            Some(l) => return Err(param_err(format!("negative Lipschitz constant {l}"))),
            None => crate::linalg::spectral_norm(&q),
        };
        Ok(SmoothObjective::Quadratic { q, c, lipschitz })
    }

    pub fn zero(n: usize) -> Self {
        SmoothObjective::Quadratic {
            q: DMatrix::zeros(n, n),
            c: DVector::zeros(n),
            lipschitz: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothObjective::Quadratic { c, .. } => c.len(),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            SmoothObjective::Quadratic { q, c, .. } => 0.5 * x.dot(&(q * x)) + c.dot(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            SmoothObjective::Quadratic { q, c, .. } => q * x + c,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            SmoothObjective::Quadratic { lipschitz, .. } => *lipschitz,
        }
    }
}
