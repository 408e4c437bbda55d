//! Runtime checks of the descent and boundedness inequalities.
//!
//! Every solver feeds each per-iteration inequality through a [`MonitorLog`].
//! Under [`MonitorPolicy::Abort`] the first failure ends the run with
//! [`Error::InvariantViolation`]; under [`MonitorPolicy::Record`] failures are
//! collected so that a harness can count them across many runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ViolationDetail};

/// Relative slack granted to inequalities that hold exactly in real arithmetic.
pub const RELATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    /// One-step progress of the SDD potential.
    PotentialDescent,
    /// The SDD potential never increases.
    PotentialMonotone,
    /// The SDD potential stays above the objective lower bound.
    PotentialLowerBound,
    /// `||h(x^k)|| <= sqrt(4 dP / rho)`.
    PrimalResidualBound,
    /// `||mu^k|| <= sqrt(rho dP)`.
    DualVariableBound,
    /// `rho kappa1 <= Lip(mu^k, rho) <= L_f + rho kappa2`.
    LipSandwich,
    /// Certificate residual bounded by the displacement.
    DualResidualBound,
    /// One-step progress of the augmented Lagrangian (unscaled dual descent).
    AugLagDescent,
    /// `L(x+, mu+) - L(x+, mu) = -varrho ||Ax+ - b||^2`.
    DualUpdateIdentity,
    /// Combined primal and dual progress with a nonlinear constraint map.
    CombinedDescent,
    /// The inner oracle achieved `nu`-sufficient descent.
    SufficientDescent,
    /// Inequality multipliers are nonnegative and complementary.
    Complementarity,
    /// `||mu|| <= ||H^+|| ||e||` whenever the stacked Jacobian has full column rank.
    NonlinearDualBound,
    /// The augmented Lagrangian dropped below the a-priori floor.
    RegularityGuard,
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Monitor::PotentialDescent => "potential_descent",
            Monitor::PotentialMonotone => "potential_monotone",
            Monitor::PotentialLowerBound => "potential_lower_bound",
            Monitor::PrimalResidualBound => "primal_residual_bound",
            Monitor::DualVariableBound => "dual_variable_bound",
            Monitor::LipSandwich => "lip_sandwich",
            Monitor::DualResidualBound => "dual_residual_bound",
            Monitor::AugLagDescent => "aug_lag_descent",
            Monitor::DualUpdateIdentity => "dual_update_identity",
            Monitor::CombinedDescent => "combined_descent",
            Monitor::SufficientDescent => "sufficient_descent",
            Monitor::Complementarity => "complementarity",
            Monitor::NonlinearDualBound => "nonlinear_dual_bound",
            Monitor::RegularityGuard => "regularity_guard",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorPolicy {
    #[default]
    Abort,
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub iteration: usize,
    pub monitor: Monitor,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MonitorLog {
    pub policy: MonitorPolicy,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl MonitorLog {
    pub fn new(policy: MonitorPolicy) -> Self {
        Self {
            policy,
            checks: 0,
            violations: Vec::new(),
        }
    }

    /// Checks `lhs <= rhs`. NaN on either side counts as a violation.
    pub fn check_le(&mut self, iteration: usize, monitor: Monitor, lhs: f64, rhs: f64) -> Result<()> {
        self.checks += 1;
        if lhs <= rhs {
            return Ok(());
        }
        let v = Violation {
            iteration,
            monitor,
            lhs,
            rhs,
        };
        match self.policy {
            MonitorPolicy::Abort => Err(Error::InvariantViolation {
                iteration,
                monitor,
                detail: ViolationDetail { lhs, rhs },
            }),
            MonitorPolicy::Record => {
                log::debug!("monitor {monitor} failed at k={iteration}: {lhs:e} > {rhs:e}");
                self.violations.push(v);
                Ok(())
            }
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, monitor: Monitor) -> usize {
        self.violations.iter().filter(|v| v.monitor == monitor).count()
    }
}

/// `1e-9 * (1 + |scale|)`.
pub fn slack(scale: f64) -> f64 {
    RELATIVE_SLACK * (1.0 + scale.abs())
}

/// Sign of the dual step. `Flipped` exists only to let the verification
/// harness confirm that the monitors catch a wrong-direction update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualSign {
    #[default]
    Standard,
    Flipped,
}

impl DualSign {
    pub(crate) fn factor(self) -> f64 {
        match self {
            DualSign::Standard => 1.0,
            DualSign::Flipped => -1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abort_policy_errors_on_first_failure() {
        let mut log = MonitorLog::new(MonitorPolicy::Abort);
        assert!(log.check_le(0, Monitor::PotentialDescent, 1.0, 2.0).is_ok());
        let err = log.check_le(3, Monitor::PotentialDescent, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { iteration: 3, .. }));
    }

    #[test]
    fn record_policy_collects() {
        let mut log = MonitorLog::new(MonitorPolicy::Record);
        log.check_le(0, Monitor::DualVariableBound, 2.0, 1.0).unwrap();
        log.check_le(1, Monitor::DualVariableBound, f64::NAN, 1.0).unwrap();
        log.check_le(2, Monitor::LipSandwich, 0.0, 1.0).unwrap();
        assert_eq!(log.checks, 3);
        assert_eq!(log.count(Monitor::DualVariableBound), 2);
        assert!(!log.is_clean());
    }
}
