//! A two-block problem written as JSON, loaded, solved with SDD-ADMM and
//! written back out.
//!
//! cargo run --release --example problem_json

use dualdescent::problem::json::{self, ProblemJson};
use dualdescent::sdd::{self, SddParams};

// minimize 0.5 ||x||^2 - x1 + x2 x3 over [-1, 1]^3, blocks {x1} and {x2, x3},
// subject to x1 + x2 - 0.5 x3^2 = 0.2
const PROBLEM: &str = r#"{
  "structure": {"dims": [1, 2], "m": 1},
  "objective": {
    "kind": "quadratic",
    "q": [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]],
    "c": [-1.0, 0.0, 0.0]
  },
  "prox_terms": [{"kind": "box", "l": -1.0, "u": 1.0}, {"kind": "box", "l": -1.0, "u": 1.0}],
  "constraints": [
    {"kind": "affine", "b": [[1.0]], "d": [-0.2]},
    {"kind": "diag_quadratic", "b": [[1.0, 0.0]], "c": [[0.0, -0.5]], "d": [0.0]}
  ],
  "x0": [0.2, 0.0, 0.0],
  "p_lb": -2.0
}"#;

fn main() -> dualdescent::Result<()> {
    let spec: ProblemJson = serde_json::from_str(PROBLEM)?;
    let inst = spec.into_instance()?;
    println!("n = {}, m = {}, L_f = {}", inst.structure().n(), inst.structure().m(), inst.lf());

    let out = sdd::run(
        &inst,
        &SddParams {
            eps: 1e-2,
            rho: 10.0,
            max_iters: 200_000,
            ..Default::default()
        },
    )?;
    println!("{:?} after {} steps: x = {:?}", out.status, out.iterations, out.x.as_slice());
    println!("h(x) = {:?}", inst.aggregate_h(&out.x)?.as_slice());

    let text = json::to_string_pretty(&inst)?;
    let again: ProblemJson = serde_json::from_str(&text)?;
    assert_eq!(again, ProblemJson::from_instance(&again.clone().into_instance()?));
    println!("round trip ok ({} bytes)", text.len());
    Ok(())
}


