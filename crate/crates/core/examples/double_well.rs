//! Cat state in a double well with and without momentum diffusion.
//! Interference fringes keep the field negative in the closed system and
//! wash out under decoherence.

use wigner_mra::diagnostics::{cat_state, report};
use wigner_mra::gdr::{evolve, EvolveOptions};
use wigner_mra::moyal::{add_decoherence, assemble_moyal, poly_potential, PhaseSpaceGrid};
use wigner_mra::wavelets::make_family;

fn main() {
    let grid = PhaseSpaceGrid::symmetric(8.0, 7).unwrap();
    let u = poly_potential(&[0.0, 0.0, -1.0, 0.0, 0.1]).unwrap();
    let closed = assemble_moyal(&u, &grid, 1, &make_family("daubechies-6").unwrap()).unwrap();
    let w0 = cat_state(5f64.sqrt(), 2.0, &grid);

    for strength in [0.0, 0.1] {
        let op = add_decoherence(&closed, strength).unwrap();
        let opts = EvolveOptions {
            stride: 400,
            ..EvolveOptions::default()
        };
        let traj = evolve(&op, &w0, 5.0, op.stable_dt(0.5), &opts).unwrap();
        println!("D = {strength}");
        println!("{:>7} {:>10} {:>12} {:>10} {:>10}", "t", "purity", "negativity", "energy", "boundary");
        for f in &traj.fields {
            let r = report(f, &u);
            println!(
                "{:>7.3} {:>10.5} {:>12.3e} {:>10.5} {:>10.2e}",
                r.time, r.purity, r.negativity_volume, r.energy, r.boundary_mass
            );
        }
    }
}
