//! Space-time Galerkin solve over short windows, compared with the
//! method-of-lines integrator at the same final time.

use wigner_mra::diagnostics::{coherent_state, compare};
use wigner_mra::gdr::{evolve, march, EvolveOptions, GmresSettings, DEFAULT_IC_WEIGHT};
use wigner_mra::moyal::{assemble_moyal, poly_potential, PhaseSpaceGrid};
use wigner_mra::wavelets::make_family;

fn main() {
    let grid = PhaseSpaceGrid::symmetric(6.0, 5).unwrap();
    let family = make_family("daubechies-6").unwrap();
    let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
    let op = assemble_moyal(&u, &grid, 1, &family).unwrap();
    let w0 = coherent_state(1.0, 0.0, 1.0, &grid);
    let t_end = 0.75;

    let windows = march(&op, &w0, t_end, 0.25, 64, &family, DEFAULT_IC_WEIGHT, &GmresSettings::default()).unwrap();
    for (field, sys) in &windows {
        println!(
            "window {:?}: {} unknowns, {} iterations, residual {:.2e}, t = {:.3}",
            sys.window(),
            sys.unknown_count(),
            sys.iterations,
            sys.residual_norm.unwrap_or(f64::NAN),
            field.time
        );
    }
    let mol = evolve(&op, &w0, t_end, op.stable_dt(0.5), &EvolveOptions::default()).unwrap();
    let last = &windows.last().unwrap().0;
    println!("galerkin vs method of lines at t = {t_end}: {:.3e}", compare(last, mol.last()).unwrap());
}
