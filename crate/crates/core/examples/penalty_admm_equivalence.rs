//! SDD-ADMM and the linearized penalty ADMM produce the same iterates under
//! `tau = 1/(gamma+1)`, `omega = (gamma+1)/gamma`, `beta = rho/(gamma+1)`,
//! with `mu = -gamma lambda`.
//!
//! cargo run --release --example penalty_admm_equivalence

use dualdescent::baselines::{equivalence_check, equivalence_mapping};
use dualdescent::gallery::{self, GalleryId};

fn main() -> dualdescent::Result<()> {
    let g1 = gallery::make(GalleryId::G1, 0)?;
    let rho = 10.0;
    for gamma in [1.0 / 3.0, 1.0, 3.0] {
        let (tau, omega, beta) = equivalence_mapping(gamma, rho);
        let r = equivalence_check(&g1.problem, gamma, rho, 2.0, 50)?;
        println!(
            "gamma {gamma:.3}: tau {tau:.3} omega {omega:.3} beta {beta:.3} | max |dx| {:.1e} max |dmu| {:.1e}",
            r.max_dev_x, r.max_dev_mu
        );
    }
    Ok(())
}
