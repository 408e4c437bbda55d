//! SDD-ADMM on the multi-block gallery instance, Gauss-Seidel against Jacobi.
//!
//! cargo run --release --example sdd_admm_multiblock

use dualdescent::gallery::{self, GalleryId};
use dualdescent::sdd::{self, RhoMode, SddParams, Sweep};

fn main() -> dualdescent::Result<()> {
    let g1 = gallery::make(GalleryId::G1, 0)?;
    println!("{}", g1.metadata.description);

    for sweep in [Sweep::GaussSeidel, Sweep::Jacobi] {
        let params = SddParams {
            eps: 1e-2,
            rho_mode: RhoMode::Eps2Rule,
            sweep,
            max_iters: 1_000_000,
            ..Default::default()
        };
        let out = sdd::run(&g1.problem, &params)?;
        let cert = out.certificate.as_ref().expect("converged runs carry a certificate");
        println!(
            "{sweep:?}: {:?} after {} steps (rho = {:.3e}, bound {:?})",
            out.status, out.iterations, out.rho, out.theorem_bound
        );
        println!(
            "  certificate residual {:.2e}, feasibility {:.2e}, {} monitor checks",
            cert.residual, cert.feasibility, out.monitors.checks
        );
    }
    Ok(())
}
