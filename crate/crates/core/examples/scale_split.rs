//! Slow/fast split of an evolved cat state and the Fock-like norm of the parts.

use wigner_mra::diagnostics::cat_state;
use wigner_mra::gdr::{evolve, EvolveOptions};
use wigner_mra::moyal::{assemble_moyal, poly_potential, PhaseSpaceGrid};
use wigner_mra::scales::{fock_norm, slow_fast_split, FockComponent, FockStateList};
use wigner_mra::wavelets::make_family;

fn main() {
    let grid = PhaseSpaceGrid::symmetric(8.0, 7).unwrap();
    let family = make_family("daubechies-6").unwrap();
    let u = poly_potential(&[0.0, 0.0, -1.0, 0.0, 0.1]).unwrap();
    let op = assemble_moyal(&u, &grid, 1, &family).unwrap();
    let w0 = cat_state(5f64.sqrt(), 2.0, &grid);
    let w = evolve(&op, &w0, 1.0, op.stable_dt(0.5), &EvolveOptions::default()).unwrap().last().clone();

    let split = slow_fast_split(&w, &family, 2, 5).unwrap();
    println!("reconstruction error {:.2e}", split.reconstruction_error);
    println!("{:>6} {:>14} {:>9}", "level", "energy", "fraction");
    for (level, energy, fraction) in split.energy_rows() {
        let label = level.map_or("slow".to_string(), |l| l.to_string());
        println!("{label:>6} {energy:>14.6e} {fraction:>9.5}");
    }
    println!("fast fraction {:.4}", split.fast_fraction());

    let norm_of = |states: Vec<FockComponent>| fock_norm(&FockStateList { w0: 0.0, states }).unwrap();
    let slow = norm_of(vec![FockComponent::from_field(&split.slow_part)]);
    let whole = norm_of(vec![FockComponent::from_field(&w)]);
    let pair = norm_of(vec![FockComponent::from_field(&w), FockComponent::product(&w, &w)]);
    println!("fock norm: whole {whole:.6}, slow part {slow:.6}, with two-particle product {pair:.6}");
}
