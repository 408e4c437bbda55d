//! Block-structured problem class
//! `min f(x) + sum_i g_i(x_i)  s.t.  sum_i h_i(x_i) = 0`
//! and the augmented-Lagrangian quantities shared by every solver.

mod block;
pub mod checks;
mod constraint;
mod instance;
pub mod json;
mod objective;

pub use block::{BlockStructure, BlockVector};
pub use constraint::{ConstraintBlock, ConstraintConstants};
pub use instance::{AggregateConstants, ProblemInstance};
pub use objective::SmoothObjective;

use std::ops::Add;

use serde::{Deserialize, Serialize};

/// A value in `R ∪ {+inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Converts to `f64`, mapping `+inf` to `f64::INFINITY`. Only for reporting.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::Finite(0.0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreal_arithmetic() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Finite(2.0), ExtReal::Finite(3.0));
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
        let s: ExtReal = [ExtReal::Finite(1.0), ExtReal::Finite(-4.0)].into_iter().sum();
        assert_eq!(s, ExtReal::Finite(-3.0));
        assert_eq!(ExtReal::PosInf.finite(), None);
    }
}
