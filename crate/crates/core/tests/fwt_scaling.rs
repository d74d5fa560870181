//! The periodic transform does O(N) work: doubling N at most ~doubles the time.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigner_mra::transform::{fwt_forward_1d, fwt_inverse_1d};
use wigner_mra::wavelets::make_family;

fn best_time(x: &[f64]) -> f64 {
    let family = make_family("daubechies-6").unwrap();
    (0..7)
        .map(|_| {
            let start = Instant::now();
            let dec = fwt_forward_1d(x, &family, 0).unwrap();
            std::hint::black_box(fwt_inverse_1d(&dec, &family).unwrap());
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn doubling_the_length_at_most_doubles_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let times: Vec<(usize, f64)> = (14..=18)
        .map(|j| {
            let n = 1usize << j;
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (n, best_time(&x))
        })
        .collect();
    for w in times.windows(2) {
        let ratio = w[1].1 / w[0].1;
        println!("N {} -> {}: ratio {ratio:.2}", w[0].0, w[1].0);
        assert!(ratio <= 2.8, "time ratio {ratio:.2} from N = {} to {}", w[0].0, w[1].0);
    }
}
