//! Periodized pyramid transforms.

use std::collections::BTreeMap;

use ndarray::{s, Array2, ArrayView2, Axis};

use super::TransformError;
use crate::wavelets::WaveletFamily;

/// One analysis step with circular convolution:
/// `a[n] = sum_k h_k x[(2n+k) mod N]`, `d[n] = sum_k g_k x[(2n+k) mod N]`.
pub(crate) fn analysis_step(input: &[f64], family: &WaveletFamily, approx: &mut [f64], detail: &mut [f64]) {
    let n = input.len();
    let half = n / 2;
    let lo = family.lowpass();
    let hi = family.highpass();
    for m in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (k, (h, g)) in lo.iter().zip(hi).enumerate() {
            let x = input[(2 * m + k) % n];
            a += h * x;
            d += g * x;
        }
        approx[m] = a;
        detail[m] = d;
    }
}

/// Adjoint of [`analysis_step`]; `out` is overwritten.
pub(crate) fn synthesis_step(approx: &[f64], detail: &[f64], family: &WaveletFamily, out: &mut [f64]) {
    let n = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    let lo = family.lowpass();
    let hi = family.highpass();
    for m in 0..approx.len() {
        let a = approx[m];
        let d = detail[m];
        for (k, (h, g)) in lo.iter().zip(hi).enumerate() {
            out[(2 * m + k) % n] += h * a + g * d;
        }
    }
}

pub(crate) fn dyadic_level(len: usize) -> Result<usize, TransformError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(TransformError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

fn sum_sq<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().map(|v| v * v).sum()
}

/// Coarse block `V_c` plus detail blocks `D_j` for `c <= j < J`.
///
/// In one dimension every block is a single row. In two dimensions each level
/// holds three sub-bands in the fixed order (horizontal, vertical, diagonal):
/// horizontal is lowpass along q and highpass along p, vertical the reverse,
/// diagonal highpass along both.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiresolutionDecomposition {
    family: String,
    coarse_level: usize,
    finest_level: usize,
    shape: (usize, usize),
    two_dimensional: bool,
    coarse_block: Array2<f64>,
    detail_blocks: BTreeMap<usize, Vec<Array2<f64>>>,
}

impl MultiresolutionDecomposition {
    pub fn family_name(&self) -> &str {
        &self.family
    }

    pub fn coarse_level(&self) -> usize {
        self.coarse_level
    }

    pub fn finest_level(&self) -> usize {
        self.finest_level
    }

    pub fn is_two_dimensional(&self) -> bool {
        self.two_dimensional
    }

    /// Shape of the transformed input; `(1, N)` for signals.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn coarse_block(&self) -> &Array2<f64> {
        &self.coarse_block
    }

    pub fn coarse_block_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coarse_block
    }

    pub fn detail_blocks(&self) -> &BTreeMap<usize, Vec<Array2<f64>>> {
        &self.detail_blocks
    }

    pub fn detail_blocks_mut(&mut self) -> &mut BTreeMap<usize, Vec<Array2<f64>>> {
        &mut self.detail_blocks
    }

    /// Coarse coefficients of a one-dimensional decomposition.
    pub fn coarse_1d(&self) -> &[f64] {
        self.coarse_block
            .as_slice()
            .expect("coarse block is stored contiguously")
    }

    /// Detail coefficients of level `j` of a one-dimensional decomposition.
    pub fn detail_1d(&self, level: usize) -> Option<&[f64]> {
        self.detail_blocks
            .get(&level)
            .and_then(|b| b.first())
            .and_then(|b| b.as_slice())
    }

    pub fn coarse_energy(&self) -> f64 {
        sum_sq(self.coarse_block.iter())
    }

    /// Squared norm of the detail blocks at each level.
    pub fn energy_per_level(&self) -> BTreeMap<usize, f64> {
        self.detail_blocks
            .iter()
            .map(|(&j, blocks)| (j, blocks.iter().map(|b| sum_sq(b.iter())).sum()))
            .collect()
    }

    pub fn total_energy(&self) -> f64 {
        self.coarse_energy() + self.energy_per_level().values().sum::<f64>()
    }

    pub fn coefficient_count(&self) -> usize {
        self.coarse_block.len()
            + self
                .detail_blocks
                .values()
                .flat_map(|b| b.iter().map(|a| a.len()))
                .sum::<usize>()
    }

    /// Zeroes every detail block (projection onto `V_c`).
    pub fn clear_details(&mut self) {
        for blocks in self.detail_blocks.values_mut() {
            blocks.iter_mut().for_each(|b| b.fill(0.0));
        }
    }

    /// Flattens a one-dimensional decomposition as `[V_c, D_c, D_{c+1}, ...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.coarse_block.iter().copied().collect::<Vec<_>>();
        for blocks in self.detail_blocks.values() {
            for b in blocks {
                out.extend(b.iter().copied());
            }
        }
        out
    }
}

fn check_levels(len: usize, coarse_level: usize) -> Result<usize, TransformError> {
    let finest = dyadic_level(len)?;
    if coarse_level >= finest {
        return Err(TransformError::CoarseLevel {
            coarse: coarse_level,
            finest,
        });
    }
    Ok(finest)
}

/// Periodic forward transform of a length-`2^J` signal down to level `c`.
pub fn fwt_forward_1d(
    samples: &[f64],
    family: &WaveletFamily,
    coarse_level: usize,
) -> Result<MultiresolutionDecomposition, TransformError> {
    let finest = check_levels(samples.len(), coarse_level)?;
    let mut current = samples.to_vec();
    let mut details = BTreeMap::new();
    for level in (coarse_level..finest).rev() {
        let half = current.len() / 2;
        let mut approx = vec![0.0; half];
        let mut detail = vec![0.0; half];
        analysis_step(&current, family, &mut approx, &mut detail);
        details.insert(level, vec![Array2::from_shape_vec((1, half), detail).expect("row shape")]);
        current = approx;
    }
    let n = current.len();
    Ok(MultiresolutionDecomposition {
        family: family.name().to_string(),
        coarse_level,
        finest_level: finest,
        shape: (1, samples.len()),
        two_dimensional: false,
        coarse_block: Array2::from_shape_vec((1, n), current).expect("row shape"),
        detail_blocks: details,
    })
}

fn check_structure(decomp: &MultiresolutionDecomposition, family: &WaveletFamily, two_d: bool) -> Result<(), TransformError> {
    let mismatch = |msg: String| Err(TransformError::StructuralMismatch(msg));
    if decomp.family != family.name() {
        return mismatch(format!("decomposition built with `{}`, inverted with `{}`", decomp.family, family.name()));
    }
    if decomp.two_dimensional != two_d {
        return mismatch("dimension differs from the requested inverse".into());
    }
    let steps = decomp.finest_level - decomp.coarse_level;
    let (rows, cols) = decomp.shape;
    let coarse_shape = if two_d {
        (rows >> steps, cols >> steps)
    } else {
        (1, cols >> steps)
    };
    if decomp.coarse_block.dim() != coarse_shape {
        return mismatch(format!("coarse block {:?}, expected {coarse_shape:?}", decomp.coarse_block.dim()));
    }
    let levels: Vec<usize> = decomp.detail_blocks.keys().copied().collect();
    let expected: Vec<usize> = (decomp.coarse_level..decomp.finest_level).collect();
    if levels != expected {
        return mismatch(format!("detail levels {levels:?}, expected {expected:?}"));
    }
    for (&j, blocks) in &decomp.detail_blocks {
        let shift = decomp.finest_level - j;
        let shape = if two_d {
            (rows >> shift, cols >> shift)
        } else {
            (1, cols >> shift)
        };
        let count = if two_d { 3 } else { 1 };
        if blocks.len() != count || blocks.iter().any(|b| b.dim() != shape) {
            return mismatch(format!("detail level {j} does not have {count} blocks of shape {shape:?}"));
        }
    }
    Ok(())
}

/// Inverse of [`fwt_forward_1d`].
pub fn fwt_inverse_1d(decomp: &MultiresolutionDecomposition, family: &WaveletFamily) -> Result<Vec<f64>, TransformError> {
    check_structure(decomp, family, false)?;
    let mut current: Vec<f64> = decomp.coarse_block.iter().copied().collect();
    for blocks in decomp.detail_blocks.values() {
        let detail = blocks[0].as_slice().expect("row block is contiguous");
        let mut out = vec![0.0; 2 * current.len()];
        synthesis_step(&current, detail, family, &mut out);
        current = out;
    }
    Ok(current)
}

fn transform_rows(block: &mut Array2<f64>, family: &WaveletFamily, inverse: bool) {
    let n = block.ncols();
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    let mut out = vec![0.0; n];
    for mut row in block.rows_mut() {
        let input: Vec<f64> = row.iter().copied().collect();
        if inverse {
            synthesis_step(&input[..half], &input[half..], family, &mut out);
        } else {
            analysis_step(&input, family, &mut a, &mut d);
            out[..half].copy_from_slice(&a);
            out[half..].copy_from_slice(&d);
        }
        row.iter_mut().zip(&out).for_each(|(r, v)| *r = *v);
    }
}

fn transform_columns(block: &mut Array2<f64>, family: &WaveletFamily, inverse: bool) {
    let mut t = block.t().to_owned();
    transform_rows(&mut t, family, inverse);
    block.assign(&t.t());
}

/// One separable step on `block` in place: rows (p axis) then columns (q axis).
pub(crate) fn step_2d(block: &mut Array2<f64>, family: &WaveletFamily) {
    transform_rows(block, family, false);
    transform_columns(block, family, false);
}

pub(crate) fn inverse_step_2d(block: &mut Array2<f64>, family: &WaveletFamily) {
    transform_columns(block, family, true);
    transform_rows(block, family, true);
}

/// Separable periodic 2-D pyramid of a `2^{Jq} x 2^{Jp}` field.
///
/// The number of steps is `min(Jq, Jp) - c`; levels are labelled on the
/// shorter axis.
pub fn fwt_2d(
    field: ArrayView2<'_, f64>,
    family: &WaveletFamily,
    coarse_level: usize,
) -> Result<MultiresolutionDecomposition, TransformError> {
    let (rows, cols) = field.dim();
    dyadic_level(rows)?;
    let finest = check_levels(rows.min(cols), coarse_level)?;
    let mut work = field.to_owned();
    let mut details = BTreeMap::new();
    let (mut r, mut c) = (rows, cols);
    for level in (coarse_level..finest).rev() {
        let mut block = work.slice(s![..r, ..c]).to_owned();
        step_2d(&mut block, family);
        let (hr, hc) = (r / 2, c / 2);
        let horizontal = block.slice(s![..hr, hc..]).to_owned();
        let vertical = block.slice(s![hr.., ..hc]).to_owned();
        let diagonal = block.slice(s![hr.., hc..]).to_owned();
        details.insert(level, vec![horizontal, vertical, diagonal]);
        work.slice_mut(s![..r, ..c]).assign(&block);
        r = hr;
        c = hc;
    }
    Ok(MultiresolutionDecomposition {
        family: family.name().to_string(),
        coarse_level,
        finest_level: finest,
        shape: (rows, cols),
        two_dimensional: true,
        coarse_block: work.slice(s![..r, ..c]).to_owned(),
        detail_blocks: details,
    })
}

/// Inverse of [`fwt_2d`].
pub fn fwt_inverse_2d(decomp: &MultiresolutionDecomposition, family: &WaveletFamily) -> Result<Array2<f64>, TransformError> {
    check_structure(decomp, family, true)?;
    let mut current = decomp.coarse_block.clone();
    for blocks in decomp.detail_blocks.values() {
        let (hr, hc) = current.dim();
        let mut block = Array2::zeros((2 * hr, 2 * hc));
        block.slice_mut(s![..hr, ..hc]).assign(&current);
        block.slice_mut(s![..hr, hc..]).assign(&blocks[0]);
        block.slice_mut(s![hr.., ..hc]).assign(&blocks[1]);
        block.slice_mut(s![hr.., hc..]).assign(&blocks[2]);
        inverse_step_2d(&mut block, family);
        current = block;
    }
    Ok(current)
}

/// Packs a 2-D decomposition back into the in-place pyramid layout
/// (coarse block top-left, each level's sub-bands around it).
pub fn pyramid_layout(decomp: &MultiresolutionDecomposition) -> Array2<f64> {
    let (rows, cols) = decomp.shape;
    let mut out = Array2::zeros((rows, cols));
    let (cr, cc) = decomp.coarse_block.dim();
    out.slice_mut(s![..cr, ..cc]).assign(&decomp.coarse_block);
    for blocks in decomp.detail_blocks.values() {
        let (hr, hc) = blocks[0].dim();
        out.slice_mut(s![..hr, hc..2 * hc]).assign(&blocks[0]);
        out.slice_mut(s![hr..2 * hr, ..hc]).assign(&blocks[1]);
        out.slice_mut(s![hr..2 * hr, hc..2 * hc]).assign(&blocks[2]);
    }
    out
}

/// Full 1-D decomposition of every row, then of every column
/// (the "standard" tensor basis).
pub fn standard_tensor_transform(
    field: ArrayView2<'_, f64>,
    family: &WaveletFamily,
    coarse_level: usize,
) -> Result<Array2<f64>, TransformError> {
    let mut out = field.to_owned();
    for axis in [Axis(1), Axis(0)] {
        for mut lane in out.lanes_mut(axis) {
            let v: Vec<f64> = lane.iter().copied().collect();
            let coeffs = fwt_forward_1d(&v, family, coarse_level)?.to_vec();
            lane.iter_mut().zip(coeffs).for_each(|(a, b)| *a = b);
        }
    }
    Ok(out)
}
