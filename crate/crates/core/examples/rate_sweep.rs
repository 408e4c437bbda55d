//! Iterations to reach eps over a decreasing list of tolerances, with the
//! fitted slope of log(iterations) against log(1/eps).
//!
//! cargo run --release --example rate_sweep

use dualdescent::harness::{rate_sweep, ProblemSource, SolverKind, SolverParams, GALLERY_UDD_VARRHO};

fn main() -> dualdescent::Result<()> {
    let source = ProblemSource::parse("G2", 0);
    let problem = source.load()?;
    let params = SolverParams {
        varrho: Some(GALLERY_UDD_VARRHO),
        ..Default::default()
    };
    let report = rate_sweep(&problem, &source.label(), SolverKind::UddAffine, &params, &[1e-1, 1e-2, 1e-3, 1e-4])?;
    println!("{:>8} {:>10} {:>12}", "eps", "steps", "ceiling");
    for row in &report.rows {
        println!(
            "{:>8.0e} {:>10} {:>12.3e}",
            row.eps,
            row.iterations.map_or("-".into(), |v| v.to_string()),
            row.bound.unwrap_or(f64::NAN)
        );
    }
    println!("slope {:?}, 95% interval {:?}", report.slope, report.slope_ci);
    for f in &report.failures {
        println!("failure: {f}");
    }
    Ok(())
}
