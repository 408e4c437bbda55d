//! Unscaled dual descent with quadratic equality constraints (gallery G3),
//! followed by the KKT certificate and the LICQ check at the end point.
//!
//! cargo run --release --example udd_nonlinear

use dualdescent::gallery::{self, GalleryId};
use dualdescent::harness::GALLERY_UDD_VARRHO;
use dualdescent::udd_nonlinear::{self, NlUddParams};

fn main() -> dualdescent::Result<()> {
    let g3 = gallery::make(GalleryId::G3, 0)?;
    let params = NlUddParams {
        eps: 1e-3,
        varrho: Some(GALLERY_UDD_VARRHO),
        max_iters: 200_000,
        ..Default::default()
    };
    let out = udd_nonlinear::run(&g3.problem, &params)?;
    println!("{:?} after {} steps, c = {:.3}, nu = {:.3}", out.status, out.iterations, out.c, out.nu);

    if let Some(cert) = &out.certificate {
        println!("stationarity    {:.3e}", cert.stationarity);
        println!("feasibility     {:.3e}", cert.feasibility);
        println!("complementarity {:.3e}", cert.complementarity);
        println!("max q_l(x)      {:.3e}", cert.max_ineq);
        println!("inequality multipliers {:?}", cert.y);
    }
    if let Some(licq) = &out.licq_final {
        println!(
            "LICQ: full column rank {} ({} active, sigma_min {:.3e})",
            licq.full_column_rank, licq.active, licq.sigma_min
        );
    }
    let f_star = g3.metadata.optimal_value.unwrap();
    println!("objective {:.8} vs planted {f_star:.8}", g3.problem.objective_value(&out.x).to_f64());
    Ok(())
}
