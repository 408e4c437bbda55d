//! Unscaled dual descent on the affine l1-box QP.
//!
//! With the default dual step `rho / 8` the KKT point repels the iterates and
//! the augmented Lagrangian falls below the objective floor; the regularity
//! guard stops the run. A small dual step converges to the planted solution.
//!
//! cargo run --release --example udd_affine_qp

use dualdescent::gallery::{self, GalleryId};
use dualdescent::harness::GALLERY_UDD_VARRHO;
use dualdescent::monitor::{Monitor, MonitorPolicy};
use dualdescent::udd_affine::{self, UddParams};

fn main() -> dualdescent::Result<()> {
    let g2 = gallery::make(GalleryId::G2, 0)?;
    let f_star = g2.metadata.optimal_value.unwrap();

    let aggressive = UddParams {
        eps: 1e-4,
        policy: MonitorPolicy::Record,
        ..Default::default()
    };
    let out = udd_affine::run(&g2.problem, &aggressive)?;
    println!(
        "varrho = {:.3}: {:?} after {} steps, guard fired {} time(s)",
        out.varrho,
        out.status,
        out.iterations,
        out.monitors.count(Monitor::RegularityGuard)
    );

    let stable = UddParams {
        eps: 1e-4,
        varrho: Some(GALLERY_UDD_VARRHO),
        max_iters: 1_000_000,
        ..Default::default()
    };
    let out = udd_affine::run(&g2.problem, &stable)?;
    let bound = out.theorem_bound(stable.theta, stable.rho, f_star, stable.eps);
    let value = g2.problem.objective_value(&out.x).to_f64();
    println!(
        "varrho = {:.0e}: {:?}, k* = {:?}, ceiling {bound:.3e}",
        out.varrho, out.status, out.k_star
    );
    println!("  objective {value:.8} vs planted {f_star:.8}");
    println!("  Robinson check at the end point: {:?}", out.robinson.status);
    Ok(())
}
