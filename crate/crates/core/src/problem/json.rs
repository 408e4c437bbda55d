//! Problem JSON schema:
//! `{"structure":{..},"objective":{"kind":..},"prox_terms":[..],"constraints":[..],"x0":[..],"p_lb":..}`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BlockStructure, ConstraintBlock, ConstraintConstants, ProblemInstance, SmoothObjective};
use crate::error::{structure_err, Result};
use crate::prox::ProxKernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub structure: StructureJson,
    pub objective: ObjectiveJson,
    pub prox_terms: Vec<ProxKernel>,
    pub constraints: Vec<ConstraintJson>,
    pub x0: Vec<f64>,
    pub p_lb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub dims: Vec<usize>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveJson {
    /// `0.5 x^T Q x + c^T x`, `Q` given row by row.
    Quadratic {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

/// How the constants of a constraint block are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantsJson {
    Given(ConstraintConstants),
    /// `"estimate"`: sampled estimate with the default inflation.
    Keyword(ConstantsKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsKeyword {
    Estimate,
    ClosedForm,
}

/// `h_i(x)_j = (B x)_j + (C x.^2)_j + d_j`; matrices are `m x n_i`, row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintJson {
    Affine {
        b: Vec<Vec<f64>>,
        d: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constants: Option<ConstantsJson>,
    },
    DiagQuadratic {
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        d: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constants: Option<ConstantsJson>,
    },
}

fn matrix_from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(structure_err(format!("{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

impl ProblemJson {
    pub fn into_instance(self) -> Result<ProblemInstance> {
        let structure = BlockStructure::new(self.structure.dims.clone(), self.structure.m)?;
        let n = structure.n();
        let m = structure.m();
        let objective = match self.objective {
            ObjectiveJson::Quadratic { q, c, lipschitz } => {
                let q = matrix_from_rows(&q, n, n, "objective q")?;
                if c.len() != n {
                    return Err(structure_err(format!("objective c must have length {n}")));
                }
                SmoothObjective::quadratic(q, DVector::from_vec(c), lipschitz)?
            }
        };
        if self.prox_terms.len() != structure.p() || self.constraints.len() != structure.p() {
            return Err(structure_err("prox_terms and constraints need one entry per block"));
        }
        let mut blocks = Vec::with_capacity(structure.p());
        for (i, cj) in self.constraints.into_iter().enumerate() {
            let ni = structure.dim(i);
            let kernel = &self.prox_terms[i];
            let (b, c, d, constants) = match cj {
                ConstraintJson::Affine { b, d, constants } => {
                    (matrix_from_rows(&b, m, ni, "constraint b")?, DMatrix::zeros(m, ni), d, constants)
                }
                ConstraintJson::DiagQuadratic { b, c, d, constants } => (
                    matrix_from_rows(&b, m, ni, "constraint b")?,
                    matrix_from_rows(&c, m, ni, "constraint c")?,
                    d,
                    constants,
                ),
            };
            if d.len() != m {
                return Err(structure_err(format!("constraint d must have length {m}")));
            }
            let d = DVector::from_vec(d);
            let block = match constants {
                None | Some(ConstantsJson::Keyword(ConstantsKeyword::ClosedForm)) => {
                    ConstraintBlock::quadratic(b, c, d, kernel.domain())?
                }
                Some(ConstantsJson::Given(k)) => ConstraintBlock::with_constants(b, c, d, k)?,
                Some(ConstantsJson::Keyword(ConstantsKeyword::Estimate)) => {
                    let zero = ConstraintConstants {
                        m: 0.0,
                        k: 0.0,
                        j: 0.0,
                        l: 0.0,
                    };
                    let raw = ConstraintBlock::with_constants(b.clone(), c.clone(), d.clone(), zero)?;
                    let est = super::checks::estimate_constants(kernel, &raw, i as u64);
                    ConstraintBlock::with_constants(b, c, d, est)?
                }
            };
            blocks.push(block);
        }
        ProblemInstance::new(
            structure,
            objective,
            self.prox_terms,
            blocks,
            DVector::from_vec(self.x0),
            self.p_lb,
        )
    }

    /// Serializes an instance with every constant written out, so that loading
    /// the result reproduces the instance exactly.
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let s = inst.structure();
        let objective = match inst.objective() {
            SmoothObjective::Quadratic { q, c, lipschitz } => ObjectiveJson::Quadratic {
                q: matrix_to_rows(q),
                c: c.iter().cloned().collect(),
                lipschitz: Some(*lipschitz),
            },
        };
        let constraints = inst
            .constraints()
            .iter()
            .map(|h| {
                let constants = Some(ConstantsJson::Given(h.constants()));
                let b = matrix_to_rows(h.linear_part());
                let d = h.offset().iter().cloned().collect();
                if h.is_affine() {
                    ConstraintJson::Affine { b, d, constants }
                } else {
                    ConstraintJson::DiagQuadratic {
                        b,
                        c: matrix_to_rows(h.quadratic_part()),
                        d,
                        constants,
                    }
                }
            })
            .collect();
        ProblemJson {
            structure: StructureJson {
                dims: s.dims().to_vec(),
                m: s.m(),
            },
            objective,
            prox_terms: inst.prox_terms().to_vec(),
            constraints,
            x0: inst.x0().iter().cloned().collect(),
            p_lb: inst.p_lb(),
        }
    }
}

pub fn load(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    let pj: ProblemJson = serde_json::from_str(&text)?;
    pj.into_instance()
}

pub fn to_string_pretty(inst: &ProblemInstance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProblemJson::from_instance(inst))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "structure": {"dims": [1, 1], "m": 1},
        "objective": {"kind": "quadratic", "q": [[1.0, 0.0], [0.0, -1.0]], "c": [0.0, 0.5]},
        "prox_terms": [{"kind": "box", "l": -1.0, "u": 1.0}, {"kind": "scad", "a": 3.7, "lambda": 1.0}],
        "constraints": [
            {"kind": "diag_quadratic", "b": [[0.0]], "c": [[1.0]], "d": [-0.25]},
            {"kind": "affine", "b": [[1.0]], "d": [0.0], "constants": {"m": 2.0, "k": 1.0, "j": 1.0, "l": 0.0}}
        ],
        "x0": [0.5, 0.0],
        "p_lb": -10.0
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let pj: ProblemJson = serde_json::from_str(SAMPLE).unwrap();
        let inst = pj.into_instance().unwrap();
        assert_eq!(inst.lf(), 1.0);
        assert_eq!(inst.constraints()[0].constants().j, 2.0);
        let text = to_string_pretty(&inst).unwrap();
        let again: ProblemJson = serde_json::from_str(&text).unwrap();
        let inst2 = again.clone().into_instance().unwrap();
        assert_eq!(ProblemJson::from_instance(&inst2), again);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = SAMPLE.replace("\"p_lb\"", "\"extra\": 1, \"p_lb\"");
        assert!(serde_json::from_str::<ProblemJson>(&bad).is_err());
    }

    #[test]
    fn estimated_constants_cover_closed_form() {
        let est = SAMPLE.replace(r#""d": [-0.25]}"#, r#""d": [-0.25], "constants": "estimate"}"#);
        let inst = serde_json::from_str::<ProblemJson>(&est).unwrap().into_instance().unwrap();
        let k = inst.constraints()[0].constants();
        // exact values on [-1, 1]: M = 0.75, K = J = L = 2
        assert!(k.m >= 0.75 && k.j >= 2.0 && k.l >= 2.0);
    }
}
