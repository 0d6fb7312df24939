//! `reduce`: print the quadratic manifold map — coefficient triples, the
//! derived per-agent forms, and residual diagnostics.

use anyhow::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarmlab_core::manifold::{coeff_system_residual, pde_residual, solve_coeffs};

pub fn run() -> Result<u8> {
    let coeffs = solve_coeffs();
    println!("quadratic manifold map, centered monomial basis (p^2, pq, q^2):");
    println!(
        "  c_x   = [{}, {}, {}]  ({:?})",
        coeffs.c_x[0], coeffs.c_x[1], coeffs.c_x[2],
        coeffs.c_x_f64()
    );
    println!(
        "  c_z   = [{}, {}, {}]  ({:?})",
        coeffs.c_z[0], coeffs.c_z[1], coeffs.c_z[2],
        coeffs.c_z_f64()
    );
    println!(
        "  c_bar = [{}, {}, {}]  ({:?})",
        coeffs.c_bar[0], coeffs.c_bar[1], coeffs.c_bar[2],
        coeffs.c_bar_f64()
    );
    // Per-agent z-form: c_z on monomials plus (c_bar - c_z) on the means.
    let cz = coeffs.c_z_f64();
    let cb = coeffs.c_bar_f64();
    println!(
        "  z_k   = {:.4} w^2 + {:.4} wy + {:.4} y^2 + ({:.4} s_ww + {:.4} s_wy + {:.4} s_yy)",
        cz[0], cz[1], cz[2],
        cb[0] - cz[0], cb[1] - cz[1], cb[2] - cz[2],
    );
    // Tangential feedback -2 z_k - w_k^2 as used by the reduced flow.
    println!(
        "  s_k   = {:.4} w^2 + {:.4} wy + {:.4} y^2 + ({:.4} s_ww + {:.4} s_wy + {:.4} s_yy)",
        -2.0 * cz[0] - 1.0, -2.0 * cz[1], -2.0 * cz[2],
        -2.0 * (cb[0] - cz[0]), -2.0 * (cb[1] - cz[1]), -2.0 * (cb[2] - cz[2]),
    );
    println!("  linear-system residual: {:.2e}", coeff_system_residual(&coeffs));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..8);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        worst = worst.max(pde_residual(&coeffs, &w, &y));
    }
    println!("  invariance-equation residual (100 random points): {worst:.2e}");
    Ok(0)
}
