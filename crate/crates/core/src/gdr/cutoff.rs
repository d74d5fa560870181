//! Choosing the finest resolution level from a ladder of solves.

use ndarray::Array2;

use super::GdrError;
use crate::moyal::{CoefficientField, MoyalError, PhaseSpaceGrid};
use crate::scales::{fock_norm, FockComponent, FockStateList};

/// Samples `field` at the points of a coarser grid over the same box.
pub fn restrict(field: &CoefficientField, coarse: &PhaseSpaceGrid) -> Result<CoefficientField, GdrError> {
    let fine = &field.grid;
    let same_box = fine.q0 == coarse.q0
        && fine.lq == coarse.lq
        && fine.p0 == coarse.p0
        && fine.lp == coarse.lp
        && fine.hbar == coarse.hbar
        && fine.mass == coarse.mass;
    if !same_box || coarse.jq > fine.jq || coarse.jp > fine.jp {
        return Err(MoyalError::GridMismatch("restriction needs a coarser grid over the same box".into()).into());
    }
    let sq = 1usize << (fine.jq - coarse.jq);
    let sp = 1usize << (fine.jp - coarse.jp);
    Ok(CoefficientField {
        grid: coarse.clone(),
        data: Array2::from_shape_fn(coarse.shape(), |(i, j)| field.data[(i * sq, j * sp)]),
        time: field.time,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResult {
    /// Smallest per-axis count whose difference to the next rung is within
    /// tolerance, or the last rung when none is.
    pub n: usize,
    pub converged: bool,
    /// `(N, ‖W^{next} restricted - W^{N}‖)` in the Fock-like norm.
    pub differences: Vec<(usize, f64)>,
}

/// Solves at each per-axis count of `ladder` (increasing powers of two)
/// until successive results differ by at most `eps`.
pub fn cutoff_level<F>(mut solve_at: F, ladder: &[usize], eps: f64) -> Result<CutoffResult, GdrError>
where
    F: FnMut(usize) -> Result<CoefficientField, GdrError>,
{
    if ladder.len() < 2 {
        return Err(GdrError::LadderTooShort(ladder.len()));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.iter().any(|n| !n.is_power_of_two()) {
        return Err(GdrError::InvalidArgument(
            "cutoff ladder must be increasing powers of two".into(),
        ));
    }
    let norm = |f: &CoefficientField| {
        fock_norm(&FockStateList {
            w0: 0.0,
            states: vec![FockComponent::from_field(f)],
        })
    };
    let mut differences = Vec::new();
    let mut previous = solve_at(ladder[0])?;
    for pair in ladder.windows(2) {
        let next = solve_at(pair[1])?;
        let mut diff = restrict(&next, &previous.grid)?;
        diff.data -= &previous.data;
        let gap = norm(&diff)?;
        differences.push((pair[0], gap));
        if gap <= eps {
            return Ok(CutoffResult {
                n: pair[0],
                converged: true,
                differences,
            });
        }
        previous = next;
    }
    Ok(CutoffResult {
        n: *ladder.last().expect("ladder checked"),
        converged: false,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::coherent_state;

    fn grid_for(n: usize) -> PhaseSpaceGrid {
        let level = n.trailing_zeros();
        PhaseSpaceGrid::symmetric(6.0, 5).unwrap().with_levels(level, level).unwrap()
    }

    #[test]
    fn restriction_samples_coarse_points() {
        let fine = PhaseSpaceGrid::symmetric(4.0, 7).unwrap();
        let coarse = fine.with_levels(5, 6).unwrap();
        let w = CoefficientField::from_fn(&fine, |q, p| q + 10.0 * p);
        let r = restrict(&w, &coarse).unwrap();
        for ((i, j), v) in r.data.indexed_iter() {
            assert!((v - (coarse.q(i) + 10.0 * coarse.p(j))).abs() < 1e-12);
        }
        assert!(restrict(&r, &fine).is_err());
    }

    #[test]
    fn identical_solutions_stop_at_the_first_rung() {
        let mut calls = Vec::new();
        let result = cutoff_level(
            |n| {
                calls.push(n);
                Ok(coherent_state(0.5, 0.0, 1.0, &grid_for(n)))
            },
            &[32, 64, 128, 256],
            1e-4,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.n, 32);
        assert_eq!(calls, vec![32, 64]);
    }

    #[test]
    fn zero_tolerance_does_not_converge() {
        let result = cutoff_level(
            |n| {
                let g = grid_for(n);
                Ok(CoefficientField::from_fn(&g, |q, _| (q * n as f64).sin()))
            },
            &[32, 64, 128],
            0.0,
        )
        .unwrap();
        assert!(!result.converged);
        assert_eq!(result.n, 128);
        assert_eq!(result.differences.len(), 2);
    }

    #[test]
    fn ladder_is_validated() {
        let never = |_: usize| -> Result<CoefficientField, GdrError> { unreachable!() };
        assert!(matches!(cutoff_level(never, &[32], 1e-3), Err(GdrError::LadderTooShort(1))));
        assert!(cutoff_level(never, &[64, 32], 1e-3).is_err());
        assert!(cutoff_level(never, &[32, 48], 1e-3).is_err());
    }
}
