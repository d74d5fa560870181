//! Connection coefficients and derivative stencils, checked against the
//! polynomial moment rule and a Fourier mode.

use std::f64::consts::PI;

use wigner_mra::connection::{connection_coefficients, derivative_matrix, derivative_stencil};
use wigner_mra::wavelets::make_family;

fn main() {
    let family = make_family("daubechies-8").unwrap();
    let table = connection_coefficients(&family, 0, 1).unwrap();
    println!("{} orders {:?}, half width {}", table.family_name(), table.orders(), table.half_width());
    for (k, v) in table.entries() {
        println!("  k = {k:>3}  {v:+.15e}");
    }

    for d in 1..=3 {
        let s = derivative_stencil(&family, d).unwrap();
        let moment: f64 = s.iter().map(|(k, w)| (*k as f64).powi(d as i32) * w).sum();
        println!("order {d}: {} taps, moment {moment:+.12}", s.len());
    }

    let n = 256;
    let x: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
    let f: Vec<f64> = x.iter().map(|v| (3.0 * v).sin()).collect();
    let d1 = derivative_matrix(&family, 1, 8, 2.0 * PI).unwrap();
    let got = d1.apply(&f);
    let err = got.iter().zip(&x).fold(0.0f64, |m, (g, v)| m.max((g - 3.0 * (3.0 * v).cos()).abs()));
    println!("d/dx sin(3x) on {n} points: max error {err:.3e}");
}
