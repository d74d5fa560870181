//! Tabulates a Daubechies scaling function on a dyadic grid and checks the
//! refinement relation.
//!
//! cargo run --example cascade -- daubechies-4

use wigner_mra::wavelets::{cascade_table, make_family, supported_family_names};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "daubechies-6".into());
    let family = match make_family(&name) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}; known: {}", supported_family_names().join(", "));
            std::process::exit(2);
        }
    };
    println!(
        "{}: {} taps, {} vanishing moments, sobolev estimate {:.3}",
        family.name(),
        family.len(),
        family.vanishing_moments(),
        family.sobolev_estimate()
    );

    let table = cascade_table(&family, 8).expect("cascade converges");
    let (lo, hi) = table.support();
    println!("support [{lo}, {hi}], spacing {}", table.spacing());
    println!("integral of phi {:.12}, of psi {:.3e}", table.phi_integral(), table.psi_integral());
    println!("refinement residual {:.3e}", table.refinement_residual());

    // coarse ASCII profile of phi
    let values = table.phi_values();
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let every = values.len() / 24;
    for (n, v) in values.iter().enumerate().step_by(every) {
        let x = lo as f64 + n as f64 * table.spacing();
        let width = ((v / peak) * 30.0).round() as i64;
        let bar = if width >= 0 {
            format!("{:>30}|{}", "", "#".repeat(width as usize))
        } else {
            format!("{:>30}|", "#".repeat((-width) as usize))
        };
        println!("{x:>6.2} {v:>9.4} {bar}");
    }
}
