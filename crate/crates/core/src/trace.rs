//! Per-iteration records and their CSV form.
//!
//! Row `k` describes the step from iterate `k` to iterate `k+1`:
//!
//! | column | meaning |
//! |---|---|
//! | `k` | step index |
//! | `potential` | merit value at `(x^{k+1}, mu^{k+1})` (SDD potential, otherwise `L_rho`) |
//! | `lip` | step constant used (`Lip(mu^k, rho)` or `L_K`; `c` for the nonlinear solver) |
//! | `h_norm` | `||h(x^{k+1})||` |
//! | `mu_norm` | `||mu^{k+1}||` |
//! | `max_block_disp` | `max_i ||x_i^{k+1} - x_i^k||` |
//! | `resid_max` | certificate residual at `x^{k+1}` |
//! | `feas` | certificate feasibility; `||h(x^{k+1}) + z^{k+1}||` for the penalty ADMM, else `h_norm` |
//!
//! The affine UDD solver appends `L_aug`; the nonlinear UDD solver appends
//! `L_aug, inner_iters, y_max, compl_max, licq_sigma_min`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// The stopping test passed.
    Converged,
    /// The iteration budget ran out first.
    MaxIters,
    /// Multiplier blow-up (baselines) or the augmented Lagrangian fell
    /// below `P_lb` (unscaled dual descent).
    Diverged,
}

impl RunStatus {
    pub fn is_converged(self) -> bool {
        self == RunStatus::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Basic,
    Affine,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerStats {
    pub inner_iters: usize,
    pub y_max: f64,
    pub compl_max: f64,
    pub licq_sigma_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub potential: f64,
    pub lip: f64,
    pub h_norm: f64,
    pub mu_norm: f64,
    pub max_block_disp: f64,
    pub resid_max: f64,
    pub feas: f64,
    pub l_aug: Option<f64>,
    pub inner: Option<InnerStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub kind: TraceKind,
    pub rows: Vec<IterationRecord>,
}

impl Trace {
    pub fn new(kind: TraceKind) -> Self {
        Self { kind, rows: Vec::new() }
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.rows.last()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header(&self) -> &'static str {
        match self.kind {
            TraceKind::Basic => "k,potential,lip,h_norm,mu_norm,max_block_disp,resid_max,feas",
            TraceKind::Affine => "k,potential,lip,h_norm,mu_norm,max_block_disp,resid_max,feas,L_aug",
            TraceKind::Nonlinear => {
                "k,potential,lip,h_norm,mu_norm,max_block_disp,resid_max,feas,L_aug,inner_iters,y_max,compl_max,licq_sigma_min"
            }
        }
    }

    /// CSV text. Floats use the shortest representation that round-trips, so
    /// equal runs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(self.header());
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.k, r.potential, r.lip, r.h_norm, r.mu_norm, r.max_block_disp, r.resid_max, r.feas
            );
            if matches!(self.kind, TraceKind::Affine | TraceKind::Nonlinear) {
                let _ = write!(out, ",{}", r.l_aug.unwrap_or(f64::NAN));
            }
            if self.kind == TraceKind::Nonlinear {
                let s = r.inner.unwrap_or(InnerStats {
                    inner_iters: 0,
                    y_max: f64::NAN,
                    compl_max: f64::NAN,
                    licq_sigma_min: f64::NAN,
                });
                let _ = write!(out, ",{},{},{},{}", s.inner_iters, s.y_max, s.compl_max, s.licq_sigma_min);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Keeps every `every`-th row plus the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Granularity {
    pub every: usize,
}

impl Default for Granularity {
    fn default() -> Self {
        Self { every: 1 }
    }
}

impl Granularity {
    pub(crate) fn keep(&self, k: usize, last: bool) -> bool {
        last || self.every <= 1 || k % self.every == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize) -> IterationRecord {
        IterationRecord {
            k,
            potential: 0.1 + k as f64,
            lip: 2.0,
            h_norm: 1e-7,
            mu_norm: 0.0,
            max_block_disp: 0.5,
            resid_max: 1.0 / 3.0,
            feas: 1e-7,
            l_aug: Some(-1.5),
            inner: None,
        }
    }

    #[test]
    fn csv_columns_follow_kind() {
        let mut t = Trace::new(TraceKind::Affine);
        t.rows.push(row(0));
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 9);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[6].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[8], "-1.5");
    }

    #[test]
    fn granularity_keeps_last() {
        let g = Granularity { every: 10 };
        assert!(g.keep(0, false));
        assert!(!g.keep(3, false));
        assert!(g.keep(3, true));
    }
}
