//! Resolution ladder: finds the smallest grid whose solution agrees with the
//! next finer one in the Fock-like norm.

use std::f64::consts::PI;

use wigner_mra::diagnostics::coherent_state;
use wigner_mra::gdr::{cutoff_level, evolve, EvolveOptions};
use wigner_mra::moyal::{assemble_moyal, poly_potential, PhaseSpaceGrid};
use wigner_mra::wavelets::make_family;

fn main() {
    let family = make_family("daubechies-6").unwrap();
    let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
    let base = PhaseSpaceGrid::symmetric(8.0, 6).unwrap();
    let result = cutoff_level(
        |n| {
            let j = n.trailing_zeros();
            let grid = base.with_levels(j, j)?;
            let op = assemble_moyal(&u, &grid, 1, &family)?;
            let w0 = coherent_state(1.0, 0.5, 1.0, &grid);
            let t = evolve(&op, &w0, PI / 2.0, op.stable_dt(0.5), &EvolveOptions::default())?;
            Ok(t.last().clone())
        },
        &[32, 64, 128, 256],
        1e-4,
    )
    .unwrap();
    for (n, d) in &result.differences {
        println!("N = {n:>4}: difference to next {d:.3e}");
    }
    println!("cutoff N = {} (converged: {})", result.n, result.converged);
}
