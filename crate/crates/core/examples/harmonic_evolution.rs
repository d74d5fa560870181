//! Coherent state in a harmonic well over one period, against the rotating
//! closed-form solution.

use std::f64::consts::PI;

use wigner_mra::diagnostics::{coherent_state, compare, oracle_harmonic, report};
use wigner_mra::gdr::{evolve, EvolveOptions};
use wigner_mra::moyal::{assemble_moyal, poly_potential, PhaseSpaceGrid};
use wigner_mra::wavelets::make_family;

fn main() {
    let grid = PhaseSpaceGrid::symmetric(8.0, 7).unwrap();
    let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
    let op = assemble_moyal(&u, &grid, 1, &make_family("daubechies-6").unwrap()).unwrap();
    let w0 = coherent_state(1.0, 0.0, 1.0, &grid);
    let dt = op.stable_dt(0.5);
    let opts = EvolveOptions {
        stride: ((PI / 4.0) / dt).ceil() as usize,
        ..EvolveOptions::default()
    };
    let traj = evolve(&op, &w0, 2.0 * PI, dt, &opts).unwrap();
    println!("{} steps of {:.4e} with {}", traj.steps, traj.dt, traj.integrator_name);
    println!("{:>7} {:>12} {:>10} {:>9} {:>9} {:>10}", "t", "norm", "purity", "<q>", "<p>", "err");
    for f in &traj.fields {
        let r = report(f, &u);
        let err = compare(f, &oracle_harmonic(1.0, 0.0, 1.0, f.time, &grid)).unwrap();
        println!(
            "{:>7.4} {:>12.9} {:>10.6} {:>9.4} {:>9.4} {:>10.2e}",
            f.time, r.normalization, r.purity, r.centroid.0, r.centroid.1, err
        );
    }
}
