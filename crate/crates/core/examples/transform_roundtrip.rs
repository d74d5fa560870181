//! Periodic multilevel transform of a noisy chirp: energy per level,
//! reconstruction and a crude threshold compression.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigner_mra::transform::{fwt_forward_1d, fwt_inverse_1d};
use wigner_mra::wavelets::make_family;

fn main() {
    let n = 1024;
    let family = make_family("daubechies-4").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            (2.0 * PI * 40.0 * t * t).sin() + 0.05 * rng.gen_range(-1.0..1.0)
        })
        .collect();

    let dec = fwt_forward_1d(&x, &family, 2).unwrap();
    println!("level  energy");
    println!("coarse {:.6}", dec.coarse_energy());
    for (level, e) in dec.energy_per_level() {
        println!("{level:>6} {e:.6}");
    }
    let total: f64 = x.iter().map(|v| v * v).sum();
    println!("signal energy {total:.6}, coefficient energy {:.6}", dec.total_energy());

    let back = fwt_inverse_1d(&dec, &family).unwrap();
    let err = back.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max reconstruction error {err:.2e}");

    // keep the largest 10% of detail coefficients
    let mut kept = dec.clone();
    let mut mags: Vec<f64> = kept.detail_blocks().values().flatten().flat_map(|b| b.iter().map(|v| v.abs())).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let cut = mags[mags.len() / 10];
    for blocks in kept.detail_blocks_mut().values_mut() {
        for b in blocks {
            b.mapv_inplace(|v| if v.abs() >= cut { v } else { 0.0 });
        }
    }
    let approx = fwt_inverse_1d(&kept, &family).unwrap();
    let num: f64 = approx.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum();
    println!("10% of details kept: relative error {:.3e}", (num / total).sqrt());
}
