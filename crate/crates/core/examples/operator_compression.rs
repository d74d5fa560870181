//! Nonstandard form of a periodic derivative matrix: sparsity against the
//! threshold and the matvec error it costs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigner_mra::connection::derivative_matrix;
use wigner_mra::transform::{compress_operator, nonstandard_form};
use wigner_mra::wavelets::make_family;

fn main() {
    let family = make_family("daubechies-6").unwrap();
    let dense = derivative_matrix(&family, 1, 9, 1.0).unwrap().to_dense();
    let coarse = 2;
    let ns = nonstandard_form(dense.view(), &family, coarse).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..dense.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let exact = dense.dot(&ndarray::Array1::from(x.clone()));
    let scale = exact.iter().map(|v| v * v).sum::<f64>().sqrt();

    println!("{} x {} first-derivative matrix", dense.nrows(), dense.ncols());
    println!("{:>8} {:>9} {:>11}", "tau", "sparsity", "rel error");
    for tau in [1e-10, 1e-8, 1e-6, 1e-4, 1e-2] {
        let op = compress_operator(ns.view(), tau).unwrap();
        let y = op.apply_nonstandard(&x, &family, coarse).unwrap();
        let err = y.iter().zip(exact.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / scale;
        println!("{tau:>8.0e} {:>9.4} {err:>11.3e}", op.sparsity());
    }
}
