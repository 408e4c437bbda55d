//! Closed-form proximal operators.
//!
//! `prox(eta, z)` returns a global minimizer of `g(x) + (eta/2)||x - z||^2`.
//! For nonconvex kernels the minimizer can be non-unique; ties are broken by
//! smallest Euclidean norm, then by preferring the positive sign.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::problem::ExtReal;

/// Absolute tolerance for domain membership of indicator kernels.
pub const DOMAIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxKernel {
    Zero,
    /// Indicator of `[l, u]^n`.
    Box {
        #[serde(rename = "l")]
        lo: f64,
        #[serde(rename = "u")]
        hi: f64,
    },
    /// Indicator of the closed Euclidean ball of radius `r`.
    Ball {
        #[serde(rename = "r")]
        radius: f64,
    },
    Sphere {
        #[serde(rename = "r")]
        radius: f64,
    },
    Annulus {
        #[serde(rename = "r1")]
        inner: f64,
        #[serde(rename = "r2")]
        outer: f64,
    },
    /// `w ||x||_1`.
    L1 {
        #[serde(rename = "w")]
        weight: f64,
    },
    /// `w ||x||_1` plus the indicator of `[l, u]^n`.
    L1Box {
        #[serde(rename = "w")]
        weight: f64,
        #[serde(rename = "l")]
        lo: f64,
        #[serde(rename = "u")]
        hi: f64,
    },
    Scad {
        a: f64,
        lambda: f64,
    },
    Mcp {
        b: f64,
        lambda: f64,
    },
    CappedL1 {
        lambda: f64,
        #[serde(rename = "t")]
        cap: f64,
    },
}

/// Effective domain of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Unconstrained,
    Box { lo: f64, hi: f64 },
    Ball { radius: f64 },
    Sphere { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl ProxKernel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProxKernel::Zero => true,
            ProxKernel::Box { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            ProxKernel::Ball { radius } | ProxKernel::Sphere { radius } => radius > 0.0 && radius.is_finite(),
            ProxKernel::Annulus { inner, outer } => inner > 0.0 && inner < outer && outer.is_finite(),
            ProxKernel::L1 { weight } => weight >= 0.0 && weight.is_finite(),
            ProxKernel::L1Box { weight, lo, hi } => weight >= 0.0 && lo <= hi && lo.is_finite() && hi.is_finite(),
            ProxKernel::Scad { a, lambda } => a > 2.0 && lambda > 0.0,
            ProxKernel::Mcp { b, lambda } => b > 0.0 && lambda > 0.0,
            ProxKernel::CappedL1 { lambda, cap } => lambda > 0.0 && cap > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(param_err(format!("invalid kernel parameters: {self:?}")))
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            ProxKernel::Zero
                | ProxKernel::Box { .. }
                | ProxKernel::Ball { .. }
                | ProxKernel::L1 { .. }
                | ProxKernel::L1Box { .. }
        )
    }

    /// Kernels that act coordinate by coordinate.
    pub fn is_separable(&self) -> bool {
        !matches!(
            self,
            ProxKernel::Ball { .. } | ProxKernel::Sphere { .. } | ProxKernel::Annulus { .. }
        )
    }

    pub fn domain(&self) -> Domain {
        match *self {
            ProxKernel::Box { lo, hi } | ProxKernel::L1Box { lo, hi, .. } => Domain::Box { lo, hi },
            ProxKernel::Ball { radius } => Domain::Ball { radius },
            ProxKernel::Sphere { radius } => Domain::Sphere { radius },
            ProxKernel::Annulus { inner, outer } => Domain::Annulus { inner, outer },
            _ => Domain::Unconstrained,
        }
    }

    /// Checks that the scalar subproblem is convex within each branch of the
    /// closed form. The prox itself stays exact when this fails because branch
    /// endpoints are always evaluated; the check is a diagnostic.
    pub fn check_well_posed(&self, eta: f64) -> Result<()> {
        match *self {
            ProxKernel::Scad { a, .. } if eta * (a - 1.0) <= 1.0 => Err(param_err(format!(
                "scad: eta*(a-1) = {} must exceed 1",
                eta * (a - 1.0)
            ))),
            ProxKernel::Mcp { b, .. } if eta * b <= 1.0 => {
                Err(param_err(format!("mcp: eta*b = {} must exceed 1", eta * b)))
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self.domain() {
            Domain::Unconstrained => x.iter().all(|v| v.is_finite()),
            Domain::Box { lo, hi } => x.iter().all(|&v| v >= lo - DOMAIN_TOL && v <= hi + DOMAIN_TOL),
            Domain::Ball { radius } => x.norm() <= radius + DOMAIN_TOL,
            Domain::Sphere { radius } => (x.norm() - radius).abs() <= DOMAIN_TOL,
            Domain::Annulus { inner, outer } => {
                let r = x.norm();
                r >= inner - DOMAIN_TOL && r <= outer + DOMAIN_TOL
            }
        }
    }

    /// `g(x)`, `+inf` outside the domain.
    pub fn value(&self, x: &DVector<f64>) -> ExtReal {
        if !self.contains(x) {
            return ExtReal::PosInf;
        }
        let v = match *self {
            ProxKernel::L1 { weight } | ProxKernel::L1Box { weight, .. } => weight * x.lp_norm(1),
            ProxKernel::Scad { a, lambda } => x.iter().map(|&t| scad_penalty(t.abs(), a, lambda)).sum(),
            ProxKernel::Mcp { b, lambda } => x.iter().map(|&t| mcp_penalty(t.abs(), b, lambda)).sum(),
            ProxKernel::CappedL1 { lambda, cap } => x.iter().map(|&t| lambda * t.abs().min(cap)).sum(),
            _ => 0.0,
        };
        ExtReal::Finite(v)
    }

    pub fn prox(&self, eta: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(param_err(format!("prox step parameter eta must be positive, got {eta}")));
        }
        Ok(self.prox_unchecked(eta, z))
    }

    pub(crate) fn prox_unchecked(&self, eta: f64, z: &DVector<f64>) -> DVector<f64> {
        match *self {
            ProxKernel::Zero => z.clone(),
            ProxKernel::Box { lo, hi } => z.map(|v| v.clamp(lo, hi)),
            ProxKernel::Ball { radius } => {
                let r = z.norm();
                if r <= radius {
                    z.clone()
                } else {
                    z * (radius / r)
                }
            }
            ProxKernel::Sphere { radius } => radial(z, radius, radius),
            ProxKernel::Annulus { inner, outer } => radial(z, inner, outer),
            ProxKernel::L1 { weight } => z.map(|v| soft_threshold(v, weight / eta)),
            ProxKernel::L1Box { weight, lo, hi } => z.map(|v| soft_threshold(v, weight / eta).clamp(lo, hi)),
            ProxKernel::Scad { a, lambda } => z.map(|v| signed(v, scad_magnitude(v.abs(), eta, a, lambda))),
            ProxKernel::Mcp { b, lambda } => z.map(|v| signed(v, mcp_magnitude(v.abs(), eta, b, lambda))),
            ProxKernel::CappedL1 { lambda, cap } => {
                z.map(|v| signed(v, capped_l1_magnitude(v.abs(), eta, lambda, cap)))
            }
        }
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn signed(z: f64, magnitude: f64) -> f64 {
    if z < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Projection onto `{inner <= ||x|| <= outer}`; the origin maps to `inner * e_1`.
fn radial(z: &DVector<f64>, inner: f64, outer: f64) -> DVector<f64> {
    let r = z.norm();
    if r == 0.0 {
        let mut e = DVector::zeros(z.len());
        if !e.is_empty() {
            e[0] = inner;
        }
        return e;
    }
    let target = r.clamp(inner, outer);
    if target == r {
        z.clone()
    } else {
        z * (target / r)
    }
}

pub fn scad_penalty(t: f64, a: f64, lambda: f64) -> f64 {
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * lambda * lambda / 2.0
    }
}

pub fn mcp_penalty(t: f64, b: f64, lambda: f64) -> f64 {
    if t <= b * lambda {
        lambda * t - t * t / (2.0 * b)
    } else {
        b * lambda * lambda / 2.0
    }
}

/// Picks the candidate with the lowest objective; on exact ties the smaller
/// magnitude wins because candidates are scanned in increasing order.
fn best_candidate(mut candidates: Vec<f64>, objective: impl Fn(f64) -> f64) -> f64 {
    candidates.sort_by(f64::total_cmp);
    let mut best = candidates[0];
    let mut best_val = objective(best);
    for &c in &candidates[1..] {
        let v = objective(c);
        if v < best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

fn scad_magnitude(s: f64, eta: f64, a: f64, lambda: f64) -> f64 {
    let al = a * lambda;
    let mut cands = vec![0.0, lambda, al];
    cands.push((s - lambda / eta).clamp(0.0, lambda));
    let denom = (a - 1.0) * eta - 1.0;
    if denom > 0.0 {
        cands.push((((a - 1.0) * eta * s - al) / denom).clamp(lambda, al));
    }
    cands.push(s.max(al));
    best_candidate(cands, |t| scad_penalty(t, a, lambda) + 0.5 * eta * (t - s) * (t - s))
}

fn mcp_magnitude(s: f64, eta: f64, b: f64, lambda: f64) -> f64 {
    let bl = b * lambda;
    let mut cands = vec![0.0, bl];
    let denom = eta - 1.0 / b;
    if denom > 0.0 {
        cands.push(((eta * s - lambda) / denom).clamp(0.0, bl));
    }
    cands.push(s.max(bl));
    best_candidate(cands, |t| mcp_penalty(t, b, lambda) + 0.5 * eta * (t - s) * (t - s))
}

fn capped_l1_magnitude(s: f64, eta: f64, lambda: f64, cap: f64) -> f64 {
    let cands = vec![(s - lambda / eta).clamp(0.0, cap), s.max(cap)];
    best_candidate(cands, |t| lambda * t.min(cap) + 0.5 * eta * (t - s) * (t - s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn zero_kernel_is_identity() {
        let z = v(&[1.5, -2.0, 0.0]);
        assert_eq!(ProxKernel::Zero.prox(3.0, &z).unwrap(), z);
    }

    #[test]
    fn box_projection() {
        let k = ProxKernel::Box { lo: 0.0, hi: 1.0 };
        assert_eq!(k.prox(1.0, &v(&[-0.5, 0.3, 2.0])).unwrap(), v(&[0.0, 0.3, 1.0]));
    }

    #[test]
    fn sphere_projection_and_tie_break() {
        let k = ProxKernel::Sphere { radius: 1.0 };
        let on = k.prox(1.0, &v(&[0.6, 0.8])).unwrap();
        assert!((on - v(&[0.6, 0.8])).norm() < 1e-15);
        let out = k.prox(1.0, &v(&[3.0, 4.0])).unwrap();
        assert!((out - v(&[0.6, 0.8])).norm() < 1e-15);
        assert_eq!(k.prox(1.0, &v(&[0.0, 0.0, 0.0])).unwrap(), v(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn annulus_origin_and_interior() {
        let k = ProxKernel::Annulus { inner: 1.0, outer: 2.0 };
        assert_eq!(k.prox(1.0, &v(&[0.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(k.prox(1.0, &v(&[1.5, 0.0])).unwrap(), v(&[1.5, 0.0]));
        assert_eq!(k.prox(1.0, &v(&[0.0, 4.0])).unwrap(), v(&[0.0, 2.0]));
    }

    #[test]
    fn nonpositive_eta_rejected() {
        assert!(ProxKernel::Zero.prox(0.0, &v(&[1.0])).is_err());
        assert!(ProxKernel::L1 { weight: 1.0 }.prox(-1.0, &v(&[1.0])).is_err());
    }

    #[test]
    fn values() {
        let b = ProxKernel::Box { lo: 0.0, hi: 1.0 };
        assert_eq!(b.value(&v(&[0.5])), ExtReal::Finite(0.0));
        assert_eq!(b.value(&v(&[1.5])), ExtReal::PosInf);
        assert_eq!(ProxKernel::L1 { weight: 2.0 }.value(&v(&[1.0, -3.0])), ExtReal::Finite(8.0));
    }

    #[test]
    fn scad_branches() {
        let k = ProxKernel::Scad { a: 3.7, lambda: 1.0 };
        // soft-threshold region
        assert!((k.prox(1.0, &v(&[1.5])).unwrap()[0] - 0.5).abs() < 1e-15);
        // identity region
        assert_eq!(k.prox(1.0, &v(&[5.0])).unwrap()[0], 5.0);
        // middle region: ((a-1) s - a lambda) / (a - 2)
        let s = 3.0;
        let expect = (2.7 * s - 3.7) / 1.7;
        assert!((k.prox(1.0, &v(&[-s])).unwrap()[0] + expect).abs() < 1e-12);
    }

    #[test]
    fn capped_l1_switches_branch() {
        let k = ProxKernel::CappedL1 { lambda: 1.0, cap: 1.0 };
        // s = 1.2: A -> 0.2 (obj 0.2 + 0.5) = 0.7 ; B -> 1.2 (obj 1.0) => A
        assert!((k.prox(1.0, &v(&[1.2])).unwrap()[0] - 0.2).abs() < 1e-15);
        // s = 2.0: A -> 1.0 (obj 1 + 0.5) ; B -> 2.0 (obj 1.0) => B
        assert_eq!(k.prox(1.0, &v(&[2.0])).unwrap()[0], 2.0);
    }

    #[test]
    fn well_posedness_diagnostic() {
        assert!(ProxKernel::Scad { a: 3.7, lambda: 1.0 }.check_well_posed(1.0).is_ok());
        assert!(ProxKernel::Scad { a: 3.0, lambda: 1.0 }.check_well_posed(0.4).is_err());
        assert!(ProxKernel::Mcp { b: 0.5, lambda: 1.0 }.check_well_posed(1.0).is_err());
    }

    #[test]
    fn json_kind_tags() {
        let k: ProxKernel = serde_json::from_str(r#"{"kind":"scad","a":3.7,"lambda":1.0}"#).unwrap();
        assert_eq!(k, ProxKernel::Scad { a: 3.7, lambda: 1.0 });
        let k: ProxKernel = serde_json::from_str(r#"{"kind":"capped_l1","lambda":1.0,"t":2.0}"#).unwrap();
        assert_eq!(k, ProxKernel::CappedL1 { lambda: 1.0, cap: 2.0 });
        assert!(serde_json::from_str::<ProxKernel>(r#"{"kind":"box","l":0,"u":1,"x":2}"#).is_err());
    }
}
