//! Closed-form proximal operators on a handful of inputs, checked against
//! brute-force grid minimization.
//!
//! cargo run --release --example prox_gallery

use dualdescent::harness::{prox_grid_check, prox_inputs, scalar_kernels};
use dualdescent::prox::ProxKernel;
use nalgebra::DVector;

fn main() -> dualdescent::Result<()> {
    let zs = [-3.0, -0.8, 0.3, 1.2, 4.0];
    println!("{:<48} prox at -3, -0.8, 0.3, 1.2, 4", "kernel (eta)");
    for (kernel, eta) in scalar_kernels() {
        let values: Vec<String> = zs
            .iter()
            .map(|&z| kernel.prox(eta, &DVector::from_element(1, z)).map(|p| format!("{:7.3}", p[0])))
            .collect::<Result<_, _>>()?;
        println!("{:<48} {}", format!("{kernel:?} ({eta})"), values.join(" "));
    }

    let inputs = prox_inputs(200, 1);
    for (kernel, eta) in scalar_kernels() {
        let r = prox_grid_check(&kernel, eta, &inputs)?;
        println!(
            "{kernel:?}: max distance {:.1e}, {} failures, {} ties",
            r.max_distance, r.failures, r.ties
        );
    }

    // sphere prox of a vector: radial projection
    let sphere = ProxKernel::Sphere { radius: 2.0 };
    let p = sphere.prox(1.0, &DVector::from_vec(vec![3.0, 4.0]))?;
    println!("sphere prox of (3, 4): ({:.3}, {:.3})", p[0], p[1]);
    Ok(())
}
