//! Thresholded operator representations.

use ndarray::{Array2, ArrayView2};

use super::fwt::{analysis_step, dyadic_level, fwt_2d, pyramid_layout, synthesis_step};
use super::TransformError;
use crate::wavelets::WaveletFamily;

/// Sparse (row, col, value) operator kept after thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedOperator {
    threshold: f64,
    original_dim: usize,
    retained_entries: Vec<(usize, usize, f64)>,
}

impl CompressedOperator {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn original_dim(&self) -> usize {
        self.original_dim
    }

    pub fn retained_entries(&self) -> &[(usize, usize, f64)] {
        &self.retained_entries
    }

    pub fn sparsity(&self) -> f64 {
        if self.original_dim == 0 {
            return 0.0;
        }
        self.retained_entries.len() as f64 / (self.original_dim * self.original_dim) as f64
    }

    /// Product with the retained entries, in the representation the matrix was given in.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.original_dim, "vector length");
        let mut y = vec![0.0; self.original_dim];
        for &(r, c, v) in &self.retained_entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Worst-case ∞-norm gap between [`Self::matvec`] and the dense product.
    pub fn error_bound(&self, x: &[f64]) -> f64 {
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.threshold * self.original_dim as f64 * xmax
    }

    /// Applies an operator compressed from its [`nonstandard_form`] to a
    /// vector of physical samples and returns physical samples.
    ///
    /// Each level contributes `P^T (X d) + Q^T (Y s + Z d)` on top of the
    /// coarser result, where `s`, `d` are the lowpass and highpass parts of
    /// the input at that level.
    pub fn apply_nonstandard(
        &self,
        x: &[f64],
        family: &WaveletFamily,
        coarse_level: usize,
    ) -> Result<Vec<f64>, TransformError> {
        let n = self.original_dim;
        if x.len() != n {
            return Err(TransformError::StructuralMismatch(format!(
                "vector of length {} for a {n}x{n} operator",
                x.len()
            )));
        }
        let finest = dyadic_level(n)?;
        if coarse_level >= finest {
            return Err(TransformError::CoarseLevel { coarse: coarse_level, finest });
        }
        // smooth[j] and detail[j] have length 2^j, for coarse_level <= j < finest
        let mut smooth = vec![Vec::new(); finest];
        let mut detail = vec![Vec::new(); finest];
        let mut current = x.to_vec();
        for j in (coarse_level..finest).rev() {
            let half = 1 << j;
            let mut a = vec![0.0; half];
            let mut d = vec![0.0; half];
            analysis_step(&current, family, &mut a, &mut d);
            smooth[j] = a.clone();
            detail[j] = d;
            current = a;
        }

        let coarse = 1usize << coarse_level;
        let mut y_coarse = vec![0.0; coarse];
        let mut y_low = vec![Vec::new(); finest];
        let mut y_high = vec![Vec::new(); finest];
        for j in coarse_level..finest {
            y_low[j] = vec![0.0; 1 << j];
            y_high[j] = vec![0.0; 1 << j];
        }
        for &(r, c, v) in &self.retained_entries {
            let m = r.max(c);
            if m < coarse {
                y_coarse[r] += v * smooth[coarse_level][c];
                continue;
            }
            let j = (usize::BITS - 1 - m.leading_zeros()) as usize;
            let h = 1 << j;
            if r < h {
                y_low[j][r] += v * detail[j][c - h];
            } else if c < h {
                y_high[j][r - h] += v * smooth[j][c];
            } else {
                y_high[j][r - h] += v * detail[j][c - h];
            }
        }

        let mut y = y_coarse;
        for j in coarse_level..finest {
            let low: Vec<f64> = y.iter().zip(&y_low[j]).map(|(a, b)| a + b).collect();
            let mut out = vec![0.0; 2 << j];
            synthesis_step(&low, &y_high[j], family, &mut out);
            y = out;
        }
        Ok(y)
    }
}

/// Drops every entry with `|value| <= tau` (exact zeros always go).
pub fn compress_operator(dense: ArrayView2<'_, f64>, tau: f64) -> Result<CompressedOperator, TransformError> {
    let (rows, cols) = dense.dim();
    if rows != cols {
        return Err(TransformError::NotSquare { rows, cols });
    }
    let retained_entries = dense
        .indexed_iter()
        .filter(|(_, v)| v.abs() > tau && **v != 0.0)
        .map(|((r, c), v)| (r, c, *v))
        .collect();
    Ok(CompressedOperator {
        threshold: tau,
        original_dim: rows,
        retained_entries,
    })
}

/// Two-dimensional pyramid of an operator matrix: at each level the
/// current block `B` becomes `S B S^T` and the recursion continues on the
/// top-left quarter.
pub fn nonstandard_form(
    matrix: ArrayView2<'_, f64>,
    family: &WaveletFamily,
    coarse_level: usize,
) -> Result<Array2<f64>, TransformError> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(TransformError::NotSquare { rows, cols });
    }
    Ok(pyramid_layout(&fwt_2d(matrix, family, coarse_level)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::make_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_keeps_diagonal() {
        let id = Array2::<f64>::eye(16);
        let op = compress_operator(id.view(), 0.5).unwrap();
        assert_eq!(op.retained_entries().len(), 16);
        assert!((op.sparsity() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn infinite_threshold_is_empty() {
        let a = Array2::from_elem((8, 8), 3.0);
        let op = compress_operator(a.view(), f64::INFINITY).unwrap();
        assert!(op.retained_entries().is_empty());
        assert!(op.matvec(&[1.0; 8]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn non_square_rejected() {
        let a = Array2::<f64>::zeros((4, 8));
        assert!(matches!(
            compress_operator(a.view(), 0.0),
            Err(TransformError::NotSquare { rows: 4, cols: 8 })
        ));
    }

    #[test]
    fn nonstandard_apply_is_exact_without_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = Array2::from_shape_fn((64, 64), |_| rng.gen_range(-1.0..1.0));
        let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense = a.dot(&ndarray::Array1::from(x.clone()));
        for name in ["haar", "daubechies-4"] {
            let f = make_family(name).unwrap();
            for c in [0, 2, 5] {
                let ns = nonstandard_form(a.view(), &f, c).unwrap();
                let op = compress_operator(ns.view(), 0.0).unwrap();
                let y = op.apply_nonstandard(&x, &f, c).unwrap();
                y.iter().zip(&dense).for_each(|(p, q)| assert!((p - q).abs() < 1e-12));
            }
        }
    }
}
