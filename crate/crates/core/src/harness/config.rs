use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{DualAscentParams, PenaltyAdmmParams};
use crate::error::{Error, Result};
use crate::gallery::{self, GalleryId};
use crate::monitor::{DualSign, MonitorPolicy};
use crate::problem::{json, ProblemInstance};
use crate::sdd::{RhoMode, SddParams, Sweep};
use crate::trace::Granularity;
use crate::udd_affine::UddParams;
use crate::udd_nonlinear::NlUddParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    SddAdmm,
    UddAffine,
    UddNonlinear,
    DualAscent,
    PenaltyAdmm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::SddAdmm,
        SolverKind::UddAffine,
        SolverKind::UddNonlinear,
        SolverKind::DualAscent,
        SolverKind::PenaltyAdmm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SddAdmm => "sdd_admm",
            SolverKind::UddAffine => "udd_affine",
            SolverKind::UddNonlinear => "udd_nonlinear",
            SolverKind::DualAscent => "dual_ascent",
            SolverKind::PenaltyAdmm => "penalty_admm",
        }
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown solver {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSource {
    Gallery { id: GalleryId, seed: u64 },
    File { path: PathBuf },
}

impl ProblemSource {
    /// `G1`..`G4` name gallery instances; anything else is a JSON path.
    pub fn parse(spec: &str, seed: u64) -> Self {
        match spec.parse::<GalleryId>() {
            Ok(id) => ProblemSource::Gallery { id, seed },
            Err(_) => ProblemSource::File { path: PathBuf::from(spec) },
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::Gallery { id, seed } => format!("{id}:seed={seed}"),
            ProblemSource::File { path } => path.display().to_string(),
        }
    }

    pub fn load(&self) -> Result<LoadedProblem> {
        match self {
            ProblemSource::Gallery { id, seed } => {
                let g = gallery::make(*id, *seed)?;
                Ok(LoadedProblem {
                    instance: g.problem,
                    optimal_value: g.metadata.optimal_value,
                })
            }
            ProblemSource::File { path } => Ok(LoadedProblem {
                instance: json::load(path)?,
                optimal_value: None,
            }),
        }
    }
}

pub struct LoadedProblem {
    pub instance: ProblemInstance,
    /// `f(x*) + g(x*)` when known.
    pub optimal_value: Option<f64>,
}

impl LoadedProblem {
    /// Value used in place of `f(x*) + g(x*)` in theorem ceilings; `P_lb`
    /// gives a larger, still valid ceiling when the optimum is unknown.
    pub fn reference_value(&self) -> f64 {
        self.optimal_value.unwrap_or(self.instance.p_lb())
    }
}

/// Solver parameters shared by the CLI and JSON configs. Absent entries take
/// each solver's default, except that SDD-ADMM defaults to `eps2_rule`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub eps: f64,
    pub max_iters: usize,
    pub rho: Option<f64>,
    pub omega: Option<f64>,
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub varrho: Option<f64>,
    pub c: Option<f64>,
    /// Slack penalty of the penalty ADMM; `rho / 2` when absent.
    pub beta: Option<f64>,
    pub rho_mode: RhoMode,
    pub sweep: Sweep,
    pub mu0: Option<Vec<f64>>,
    pub policy: MonitorPolicy,
    pub dual_sign: DualSign,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iters: 1_000_000,
            rho: None,
            omega: None,
            theta: None,
            tau: None,
            varrho: None,
            c: None,
            beta: None,
            rho_mode: RhoMode::Eps2Rule,
            sweep: Sweep::GaussSeidel,
            mu0: None,
            policy: MonitorPolicy::Abort,
            dual_sign: DualSign::Standard,
        }
    }
}

impl SolverParams {
    pub fn sdd(&self, granularity: Granularity) -> SddParams {
        let d = SddParams::default();
        SddParams {
            rho: self.rho.unwrap_or(d.rho),
            omega: self.omega.unwrap_or(d.omega),
            theta: self.theta.unwrap_or(d.theta),
            tau: self.tau.unwrap_or(d.tau),
            sweep: self.sweep,
            max_iters: self.max_iters,
            eps: self.eps,
            rho_mode: self.rho_mode,
            policy: self.policy,
            dual_sign: self.dual_sign,
            granularity,
            ..d
        }
    }

    pub fn udd_affine(&self, granularity: Granularity) -> UddParams {
        let d = UddParams::default();
        UddParams {
            rho: self.rho.unwrap_or(d.rho),
            varrho: self.varrho,
            theta: self.theta.unwrap_or(d.theta),
            eps: self.eps,
            max_iters: self.max_iters,
            mu0: self.mu0.clone(),
            policy: self.policy,
            dual_sign: self.dual_sign,
            granularity,
        }
    }

    pub fn udd_nonlinear(&self, granularity: Granularity) -> NlUddParams {
        let d = NlUddParams::default();
        NlUddParams {
            rho: self.rho.unwrap_or(d.rho),
            varrho: self.varrho,
            c: self.c,
            eps: self.eps,
            max_iters: self.max_iters,
            mu0: self.mu0.clone(),
            policy: self.policy,
            dual_sign: self.dual_sign,
            granularity,
            ..d
        }
    }

    pub fn dual_ascent(&self, granularity: Granularity) -> DualAscentParams {
        let d = DualAscentParams::default();
        DualAscentParams {
            rho: self.rho.unwrap_or(d.rho),
            varrho: self.varrho,
            theta: self.theta.unwrap_or(d.theta),
            sweep: self.sweep,
            eps: self.eps,
            max_iters: self.max_iters,
            granularity,
        }
    }

    pub fn penalty_admm(&self, granularity: Granularity) -> PenaltyAdmmParams {
        let d = PenaltyAdmmParams::default();
        let rho = self.rho.unwrap_or(d.rho);
        PenaltyAdmmParams {
            rho,
            beta: self.beta.unwrap_or(rho / 2.0),
            theta: self.theta.unwrap_or(d.theta),
            sweep: self.sweep,
            eps: self.eps,
            max_iters: self.max_iters,
            granularity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub solver: SolverKind,
    #[serde(default)]
    pub params: SolverParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Keep every `trace_every`-th trace row plus the last.
    #[serde(default = "one")]
    pub trace_every: usize,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn new(problem: ProblemSource, solver: SolverKind) -> Self {
        Self {
            problem,
            solver,
            params: SolverParams::default(),
            out: None,
            trace_every: 1,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn granularity(&self) -> Granularity {
        Granularity {
            every: self.trace_every.max(1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_rejected() {
        let ok = r#"{"problem": {"kind": "gallery", "id": "G1", "seed": 0}, "solver": "sdd_admm"}"#;
        assert!(RunConfig::from_json_str(ok).is_ok());
        let bad = r#"{"problem": {"kind": "gallery", "id": "G1", "seed": 0}, "solver": "sdd_admm", "rho": 3}"#;
        assert!(RunConfig::from_json_str(bad).is_err());
        let bad_param = r#"{"problem": {"kind": "gallery", "id": "G1", "seed": 0}, "solver": "sdd_admm",
            "params": {"step": 1}}"#;
        assert!(RunConfig::from_json_str(bad_param).is_err());
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("admm".parse::<SolverKind>().is_err());
    }

    #[test]
    fn problem_spec_parsing() {
        assert_eq!(ProblemSource::parse("g3", 4), ProblemSource::Gallery { id: GalleryId::G3, seed: 4 });
        assert!(matches!(ProblemSource::parse("inst.json", 0), ProblemSource::File { .. }));
    }
}
