//! Polynomial potentials, phase-space fields and the truncated Moyal operator.

mod grid;
mod operator;
mod potential;

pub use grid::{CoefficientField, PhaseSpaceGrid, MIN_LEVEL};
pub use operator::{add_decoherence, assemble_moyal, assemble_moyal_with, AxisAction, MoyalOperator, MoyalTerm, RK4_STABILITY_RADIUS};
pub use potential::{poly_potential, Potential};

use crate::connection::ConnectionError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoyalError {
    #[error("potential needs at least one coefficient")]
    EmptyPotential,
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite field value at {0}")]
    NonFinite(String),
    #[error("decoherence strength must be a finite nonnegative number, got {0}")]
    NegativeDecoherence(f64),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::make_family;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d6() -> crate::wavelets::WaveletFamily {
        make_family("daubechies-6").unwrap()
    }

    fn random_field(grid: &PhaseSpaceGrid, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn(grid.shape(), |_| rng.gen_range(-1.0..1.0))
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn term_counts() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        for (coeffs, cut, want) in [
            (vec![0.0], 3, 0),
            (vec![0.0, 1.0], 3, 1),
            (vec![0.0, 0.0, 0.5], 0, 1),
            (vec![0.0, 0.0, 0.5], 4, 1),
            (vec![0.0, 0.0, -1.0, 0.0, 0.1], 0, 1),
            (vec![0.0, 0.0, -1.0, 0.0, 0.1], 1, 2),
            (vec![0.0, 0.0, -1.0, 0.0, 0.1], 3, 2),
            (vec![1.0, 0.0, 0.0, 1.0], 2, 2),
        ] {
            let u = poly_potential(&coeffs).unwrap();
            let op = assemble_moyal(&u, &grid, cut, &d6()).unwrap();
            assert_eq!(op.terms().len(), 1 + want, "{coeffs:?} L={cut}");
            let deg = u.degree();
            assert_eq!(want, (cut + 1).min(deg.div_ceil(2)));
        }
    }

    #[test]
    fn harmonic_quantum_equals_classical() {
        let grid = PhaseSpaceGrid::symmetric(8.0, 6).unwrap();
        let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
        let classical = assemble_moyal(&u, &grid, 0, &d6()).unwrap();
        for cut in 1..=4 {
            let quantum = assemble_moyal(&u, &grid, cut, &d6()).unwrap();
            assert_eq!(quantum.terms(), classical.terms());
            let w = random_field(&grid, cut as u64);
            let diff = &quantum.apply_array(&w) - &classical.apply_array(&w);
            assert!(max_abs(&diff) <= 1e-14);
        }
    }

    #[test]
    fn quartic_series_terminates() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let u = poly_potential(&[0.0, 0.0, -1.0, 0.0, 0.1]).unwrap();
        let a = assemble_moyal(&u, &grid, 1, &d6()).unwrap();
        let b = assemble_moyal(&u, &grid, 5, &d6()).unwrap();
        let w = random_field(&grid, 3);
        assert!(max_abs(&(&a.apply_array(&w) - &b.apply_array(&w))) <= 1e-12);
    }

    #[test]
    fn free_particle_kills_q_independent_fields() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let op = assemble_moyal(&poly_potential(&[0.0]).unwrap(), &grid, 1, &d6()).unwrap();
        assert_eq!(op.terms().len(), 1);
        let w = CoefficientField::from_fn(&grid, |_, p| (-p * p).exp());
        assert!(max_abs(&op.apply(&w).unwrap().data) < 1e-10);
        let zero = CoefficientField::zeros(&grid);
        assert!(op.apply(&zero).unwrap().data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn harmonic_ground_state_is_stationary() {
        let grid = PhaseSpaceGrid::symmetric(8.0, 8).unwrap();
        let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
        let op = assemble_moyal(&u, &grid, 1, &d6()).unwrap();
        let w = CoefficientField::from_fn(&grid, |q, p| (-(q * q + p * p)).exp() / std::f64::consts::PI);
        let rhs = op.apply(&w).unwrap();
        assert!(rhs.l2() <= 1e-3 * w.l2(), "{}", rhs.l2() / w.l2());
    }

    #[test]
    fn free_advection_commutes_with_q_shifts() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let op = assemble_moyal(&poly_potential(&[0.0]).unwrap(), &grid, 0, &d6()).unwrap();
        let w = random_field(&grid, 8);
        let shift = |a: &Array2<f64>| {
            let n = a.nrows();
            Array2::from_shape_fn(a.dim(), |(i, j)| a[((i + 5) % n, j)])
        };
        let lhs = op.apply_array(&shift(&w));
        let rhs = shift(&op.apply_array(&w));
        assert!(max_abs(&(&lhs - &rhs)) <= 1e-12);
    }

    #[test]
    fn decoherence_contract() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
        let op = assemble_moyal(&u, &grid, 1, &d6()).unwrap();
        let same = add_decoherence(&op, 0.0).unwrap();
        assert_eq!(same, op);
        let w = random_field(&grid, 2);
        assert!(max_abs(&(&same.apply_array(&w) - &op.apply_array(&w))) <= 1e-15);

        let noisy = add_decoherence(&op, 0.3).unwrap();
        let flat_in_p = CoefficientField::from_fn(&grid, |q, _| (-q * q).exp());
        let diff = &noisy.apply(&flat_in_p).unwrap().data - &op.apply(&flat_in_p).unwrap().data;
        assert!(max_abs(&diff) < 1e-10);
        assert!(matches!(add_decoherence(&op, -1.0), Err(MoyalError::NegativeDecoherence(_))));
        assert!(noisy.stable_dt(0.5) <= op.stable_dt(0.5));
        assert!(add_decoherence(&op, 10.0).unwrap().stable_dt(0.5) < op.stable_dt(0.5));
    }

    #[test]
    fn stability_bound_matches_advective_formula() {
        let grid = PhaseSpaceGrid::symmetric(8.0, 8).unwrap();
        let op = assemble_moyal(&poly_potential(&[0.0, 0.0, 0.5]).unwrap(), &grid, 1, &d6()).unwrap();
        // p_max = 8, max|U'| = 8, Δq = Δp = 1/16
        assert!((op.stable_dt(0.5) - 0.5 / 128.0).abs() < 1e-15);
        assert_eq!(MoyalOperator::zero(&grid, &d6()).stable_dt(0.5), f64::INFINITY);
    }

    #[test]
    fn grid_mismatch() {
        let grid = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let other = PhaseSpaceGrid::symmetric(5.0, 6).unwrap();
        let op = assemble_moyal(&poly_potential(&[0.0]).unwrap(), &grid, 0, &d6()).unwrap();
        assert!(matches!(op.apply(&CoefficientField::zeros(&other)), Err(MoyalError::GridMismatch(_))));
        assert!(PhaseSpaceGrid::symmetric(6.0, 4).is_err());
        assert!(PhaseSpaceGrid::new(0.0, -1.0, 0.0, 1.0, 5, 5, 1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn operator_is_linear(seed in 0u64..10_000, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let grid = PhaseSpaceGrid::symmetric(6.0, 5).unwrap();
            let u = poly_potential(&[0.0, 0.0, -1.0, 0.0, 0.1]).unwrap();
            let op = add_decoherence(&assemble_moyal(&u, &grid, 1, &d6()).unwrap(), 0.1).unwrap();
            let w1 = random_field(&grid, seed);
            let w2 = random_field(&grid, seed + 1);
            let combo = &w1 * alpha + &w2 * beta;
            let lhs = op.apply_array(&combo);
            let rhs = op.apply_array(&w1) * alpha + op.apply_array(&w2) * beta;
            let scale = max_abs(&lhs).max(1.0);
            prop_assert!(max_abs(&(&lhs - &rhs)) <= 1e-12 * scale);
        }
    }
}
