//! Values computed outside this crate and frozen here.

use approx::assert_abs_diff_eq;
use dualdescent::gallery::{self, trusted_l1_box_qp, GalleryId};
use dualdescent::problem::SmoothObjective;
use dualdescent::prox::ProxKernel;
use nalgebra::DVector;

// cvxpy 1.x with Clarabel (gap and feasibility tolerances 1e-12) on the JSON
// dump of G2 seed 0
const G2_SEED0_OPTIMUM: f64 = -0.09035588518467964;
const G2_SEED0_SUPPORT: [usize; 4] = [0, 2, 3, 9];

#[test]
fn g2_planted_optimum_matches_conic_solver() {
    let g2 = gallery::make(GalleryId::G2, 0).unwrap();
    let planted = g2.metadata.optimal_value.unwrap();
    assert_abs_diff_eq!(planted, G2_SEED0_OPTIMUM, epsilon = 1e-10);
    let x_star = g2.metadata.x_star.unwrap();
    let support: Vec<usize> = (0..x_star.len()).filter(|&i| x_star[i] != 0.0).collect();
    assert_eq!(support, G2_SEED0_SUPPORT);
}

#[test]
fn trusted_solve_recovers_planted_point() {
    for seed in [0, 1, 2] {
        let g2 = gallery::make(GalleryId::G2, seed).unwrap();
        let SmoothObjective::Quadratic { q, c, .. } = g2.problem.objective();
        let ProxKernel::L1Box { weight, lo, hi } = g2.problem.prox_terms()[0] else {
            panic!("G2 uses the l1-box kernel")
        };
        let (a, b) = g2.problem.affine_data().unwrap();
        let (x, _) = trusted_l1_box_qp(q, c, weight, lo, hi, &a, &b);
        let x_star = DVector::from_vec(g2.metadata.x_star.clone().unwrap());
        assert!((&x - &x_star).amax() < 1e-7, "seed {seed}: {}", (&x - &x_star).amax());
        let value = g2.problem.objective_value(&x).to_f64();
        assert_abs_diff_eq!(value, g2.metadata.optimal_value.unwrap(), epsilon = 1e-9);
    }
}

#[test]
fn g3_planted_point_is_feasible() {
    let g3 = gallery::make(GalleryId::G3, 0).unwrap();
    let x_star = DVector::from_vec(g3.metadata.x_star.clone().unwrap());
    assert!(g3.problem.aggregate_h(&x_star).unwrap().norm() < 1e-12);
    assert!(g3.problem.in_domain(&x_star));
    assert_abs_diff_eq!(
        g3.problem.objective_value(&x_star).to_f64(),
        g3.metadata.optimal_value.unwrap(),
        epsilon = 1e-12
    );
}

// scipy bounded scalar minimization around the best point of a 1e-5 grid on
// [-8, 8], with the penalties written out independently
#[test]
fn nonconvex_prox_values() {
    let scad = ProxKernel::Scad { a: 3.7, lambda: 1.0 };
    let mcp = ProxKernel::Mcp { b: 2.5, lambda: 1.0 };
    let capped = ProxKernel::CappedL1 { lambda: 1.0, cap: 1.5 };
    let cases: &[(&ProxKernel, f64, f64, f64)] = &[
        (&scad, 1.0, 0.5, 0.0),
        (&scad, 1.0, 1.5, 0.5000000148),
        (&scad, 1.0, 2.5, 1.7941176205),
        (&scad, 1.0, 3.0, 2.5882352786),
        (&scad, 1.0, 5.0, 5.0),
        (&scad, 1.0, -2.5, -1.7941176736),
        (&scad, 2.0, 0.3, 0.0),
        (&scad, 2.0, 1.5, 1.0000000023),
        (&scad, 2.0, 2.5, 2.2272727273),
        (&scad, 2.0, -4.0, -4.0),
        (&mcp, 1.0, 0.5, 0.0),
        (&mcp, 1.0, 1.7, 1.166666684),
        (&mcp, 1.0, 2.0, 1.6666666667),
        (&mcp, 1.0, 3.0, 3.0),
        (&mcp, 1.0, -2.2, -2.0),
        (&mcp, 3.0, 0.2, 0.0),
        (&mcp, 3.0, 0.5, 0.1923076923),
        (&mcp, 3.0, 1.0, 0.7692307692),
        (&mcp, 3.0, -2.0, -1.9230769231),
        (&capped, 1.0, 0.5, 0.0),
        (&capped, 1.0, 1.8, 0.8000000119),
        (&capped, 1.0, 2.2, 2.2),
        (&capped, 1.0, 2.8, 2.8),
        (&capped, 1.0, -3.0, -3.0),
        (&capped, 2.0, 0.3, 0.0),
        (&capped, 2.0, 1.0, 0.5000000074),
        (&capped, 2.0, 1.7, 1.2),
        (&capped, 2.0, 2.5, 2.5),
    ];
    for &(k, eta, z, expected) in cases {
        let p = k.prox(eta, &DVector::from_element(1, z)).unwrap()[0];
        assert!((p - expected).abs() < 1e-7, "{k:?} eta={eta} z={z}: {p} vs {expected}");
    }
}

#[test]
fn scad_sweep_matches_grid_minimization() {
    let inputs: Vec<f64> = (0..=1000).map(|i| -5.0 + 0.01 * i as f64).collect();
    let r = dualdescent::harness::prox_grid_check(&ProxKernel::Scad { a: 3.7, lambda: 1.0 }, 1.0, &inputs).unwrap();
    assert_eq!(r.failures, 0);
    assert!(r.max_distance <= 2e-4, "{}", r.max_distance);
}
