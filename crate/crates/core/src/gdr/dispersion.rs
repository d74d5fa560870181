//! Space–time Galerkin system on one time window.
//!
//! The time axis uses the non-periodic basis `φ((t - t₀)/h - l)`,
//! `l = -(2K-2) .. M-1`, with `h = (t₁ - t₀)/M`, so that every scaling
//! function overlapping the window is kept. Testing `∂_t Ψ - AΨ` against the
//! same functions gives
//!
//! `(C ⊗ I - h G ⊗ A) a = 0`,
//!
//! with `G`, `C` the exact window integrals of `φ_k φ_l` and `φ_k φ'_l`.
//! The initial trace `Ψ(t₀) = W₀` enters as the weighted term
//! `w e₀ (e₀ᵀ a - W₀)` with `e₀_l = φ(-l)`, which keeps the system square.

use nalgebra::{DMatrix, LU};
use ndarray::{Array2, ArrayView2};

use super::gmres::{gmres, GmresSettings};
use super::GdrError;
use crate::connection::{half_line_integrals, interval_matrix};
use crate::moyal::{CoefficientField, MoyalOperator};
use crate::wavelets::{integer_values, WaveletFamily};

/// Default weight of the initial-condition term relative to the Galerkin rows.
pub const DEFAULT_IC_WEIGHT: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct DispersionSystem {
    op: MoyalOperator,
    family_t: WaveletFamily,
    window: (f64, f64),
    n_t: usize,
    cells: usize,
    step: f64,
    ic_weight: f64,
    mass: Array2<f64>,
    derivative: Array2<f64>,
    start_trace: Vec<f64>,
    rhs: Vec<f64>,
    preconditioner: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub solution: Option<Vec<f64>>,
    pub residual_norm: Option<f64>,
    pub iterations: usize,
}

/// Builds the window system; `n_t` is the number of time basis functions.
pub fn assemble_dispersion_system(
    op: &MoyalOperator,
    window: (f64, f64),
    n_t: usize,
    family_t: &WaveletFamily,
    initial: &CoefficientField,
) -> Result<DispersionSystem, GdrError> {
    assemble_dispersion_system_weighted(op, window, n_t, family_t, initial, DEFAULT_IC_WEIGHT)
}

pub fn assemble_dispersion_system_weighted(
    op: &MoyalOperator,
    window: (f64, f64),
    n_t: usize,
    family_t: &WaveletFamily,
    initial: &CoefficientField,
    ic_weight: f64,
) -> Result<DispersionSystem, GdrError> {
    let (t0, t1) = window;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(GdrError::DegenerateWindow { t0, t1 });
    }
    if initial.grid != *op.grid() {
        return Err(GdrError::GridMismatch);
    }
    if !(ic_weight > 0.0) {
        return Err(GdrError::InvalidArgument(format!("initial-condition weight must be positive, got {ic_weight}")));
    }
    let overlap = family_t.support_width() - 1;
    if n_t < 4 || !n_t.is_power_of_two() || n_t <= overlap {
        return Err(GdrError::TimeBasisTooSmall {
            n_t,
            min: (overlap + 1).next_power_of_two().max(4),
        });
    }
    let cells = n_t - overlap;
    let step = (t1 - t0) / cells as f64;
    let mass = interval_matrix(&half_line_integrals(family_t, 0)?, cells);
    let derivative = interval_matrix(&half_line_integrals(family_t, 1)?, cells);
    let phi = integer_values(family_t)?;
    // basis index i <-> shift l = i - overlap; e₀_i = φ(overlap - i)
    let start_trace: Vec<f64> = (0..n_t)
        .map(|i| overlap.checked_sub(i).and_then(|x| phi.get(x)).copied().unwrap_or(0.0))
        .collect();

    let spatial = initial.data.len();
    let mut rhs = vec![0.0; n_t * spatial];
    for (k, e) in start_trace.iter().enumerate() {
        if *e != 0.0 {
            let block = &mut rhs[k * spatial..(k + 1) * spatial];
            block.iter_mut().zip(initial.data.iter()).for_each(|(r, w)| *r = ic_weight * e * w);
        }
    }
    let pre = DMatrix::from_fn(n_t, n_t, |k, l| derivative[(k, l)] + ic_weight * start_trace[k] * start_trace[l]);
    let preconditioner = pre.lu();
    if !preconditioner.is_invertible() {
        return Err(GdrError::InvalidArgument("time operator with initial condition is singular".into()));
    }
    Ok(DispersionSystem {
        op: op.clone(),
        family_t: family_t.clone(),
        window,
        n_t,
        cells,
        step,
        ic_weight,
        mass,
        derivative,
        start_trace,
        rhs,
        preconditioner,
        solution: None,
        residual_norm: None,
        iterations: 0,
    })
}

/// `out[k] = Σ_l M[k,l] blocks[l]` over contiguous spatial blocks.
fn mix_blocks(matrix: ArrayView2<'_, f64>, input: &[f64], out: &mut [f64], spatial: usize, scale: f64) {
    let n = matrix.nrows();
    for k in 0..n {
        let dst = &mut out[k * spatial..(k + 1) * spatial];
        for l in 0..n {
            let c = scale * matrix[(k, l)];
            if c != 0.0 {
                let src = &input[l * spatial..(l + 1) * spatial];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += c * s);
            }
        }
    }
}

impl DispersionSystem {
    /// `d · N_t · N_q · N_p` with `d = 1` for the scalar equation.
    pub fn unknown_count(&self) -> usize {
        self.n_t * self.spatial_len()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        let (nq, np) = self.op.grid().shape();
        (self.n_t, nq, np)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn time_family(&self) -> &WaveletFamily {
        &self.family_t
    }

    pub fn time_step(&self) -> f64 {
        self.step
    }

    pub fn ic_weight(&self) -> f64 {
        self.ic_weight
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn spatial_len(&self) -> usize {
        let (nq, np) = self.op.grid().shape();
        nq * np
    }

    /// System matrix times a coefficient vector (time-major layout).
    pub fn apply(&self, a: &[f64], out: &mut [f64]) {
        let spatial = self.spatial_len();
        let shape = self.op.grid().shape();
        out.fill(0.0);
        mix_blocks(self.derivative.view(), a, out, spatial, 1.0);
        let mut applied = vec![0.0; a.len()];
        let mut image = Array2::zeros(shape);
        let mut scratch = Array2::zeros(shape);
        for l in 0..self.n_t {
            let block = ArrayView2::from_shape(shape, &a[l * spatial..(l + 1) * spatial]).expect("block shape");
            self.op.apply_into(&block.to_owned(), &mut image, &mut scratch);
            applied[l * spatial..(l + 1) * spatial].copy_from_slice(image.as_slice().expect("standard layout"));
        }
        mix_blocks(self.mass.view(), &applied, out, spatial, -self.step);
        let mut start = vec![0.0; spatial];
        for (l, e) in self.start_trace.iter().enumerate() {
            if *e != 0.0 {
                start.iter_mut().zip(&a[l * spatial..(l + 1) * spatial]).for_each(|(s, v)| *s += e * v);
            }
        }
        for (k, e) in self.start_trace.iter().enumerate() {
            let c = self.ic_weight * e;
            if c != 0.0 {
                out[k * spatial..(k + 1) * spatial].iter_mut().zip(&start).for_each(|(o, s)| *o += c * s);
            }
        }
    }

    /// Inverts the time-only part `(C + w e₀e₀ᵀ) ⊗ I`.
    pub fn precondition(&self, y: &[f64], out: &mut [f64]) {
        let spatial = self.spatial_len();
        let rhs = DMatrix::from_fn(self.n_t, spatial, |k, s| y[k * spatial + s]);
        let x = self.preconditioner.solve(&rhs).expect("invertibility checked at assembly");
        for k in 0..self.n_t {
            for s in 0..spatial {
                out[k * spatial + s] = x[(k, s)];
            }
        }
    }

    /// `‖b - K a‖ / ‖b‖`.
    pub fn relative_residual(&self, a: &[f64]) -> f64 {
        let mut r = vec![0.0; a.len()];
        self.apply(a, &mut r);
        let num: f64 = r.iter().zip(&self.rhs).map(|(x, b)| (b - x).powi(2)).sum();
        let den: f64 = self.rhs.iter().map(|b| b * b).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Field `Σ_l a_l φ(n - l)` at the grid time `t₀ + n h`, `n = 0..=M`.
    pub fn field_at_slot(&self, n: usize) -> Result<CoefficientField, GdrError> {
        let a = self.solution.as_ref().ok_or(GdrError::NotSolved)?;
        if n > self.cells {
            return Err(GdrError::InvalidArgument(format!("time slot {n} beyond {}", self.cells)));
        }
        // φ(n - l) is the start trace shifted by n basis indices
        let trace: Vec<f64> = (0..self.n_t)
            .map(|i| if i >= n { self.start_trace[i - n] } else { 0.0 })
            .collect();
        let spatial = self.spatial_len();
        let mut data = vec![0.0; spatial];
        for (l, e) in trace.iter().enumerate() {
            if *e != 0.0 {
                data.iter_mut().zip(&a[l * spatial..(l + 1) * spatial]).for_each(|(d, v)| *d += e * v);
            }
        }
        let grid = self.op.grid().clone();
        Ok(CoefficientField {
            data: Array2::from_shape_vec(grid.shape(), data).expect("grid shape"),
            grid,
            time: self.window.0 + n as f64 * self.step,
        })
    }

    /// Number of interior time slots `M`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn final_field(&self) -> Result<CoefficientField, GdrError> {
        self.field_at_slot(self.cells)
    }
}

/// Solves the window system by preconditioned restarted GMRES.
pub fn solve_system(mut sys: DispersionSystem, settings: &GmresSettings) -> Result<DispersionSystem, GdrError> {
    let outcome = gmres(
        |x, y| sys.apply(x, y),
        |x, y| sys.precondition(x, y),
        &sys.rhs,
        sys.solution.as_deref(),
        settings,
    )?;
    sys.residual_norm = Some(sys.relative_residual(&outcome.solution));
    sys.iterations = outcome.iterations;
    sys.solution = Some(outcome.solution);
    Ok(sys)
}

/// Solves consecutive windows of length `window` from `initial.time` to
/// `t_end`, each seeded with the end trace of the previous one.
///
/// Returns the field at every window end.
pub fn march(
    op: &MoyalOperator,
    initial: &CoefficientField,
    t_end: f64,
    window: f64,
    n_t: usize,
    family_t: &WaveletFamily,
    ic_weight: f64,
    settings: &GmresSettings,
) -> Result<Vec<(CoefficientField, DispersionSystem)>, GdrError> {
    if !(window > 0.0) || !(t_end > initial.time) {
        return Err(GdrError::DegenerateWindow {
            t0: initial.time,
            t1: t_end,
        });
    }
    let count = ((t_end - initial.time) / window - 1e-9).ceil().max(1.0) as usize;
    let length = (t_end - initial.time) / count as f64;
    let mut current = initial.clone();
    let mut out = Vec::with_capacity(count);
    for w in 0..count {
        let t0 = initial.time + w as f64 * length;
        let t1 = if w + 1 == count { t_end } else { t0 + length };
        let sys = assemble_dispersion_system_weighted(op, (t0, t1), n_t, family_t, &current, ic_weight)?;
        let solved = solve_system(sys, settings)?;
        current = solved.final_field()?;
        out.push((current.clone(), solved));
    }
    Ok(out)
}
