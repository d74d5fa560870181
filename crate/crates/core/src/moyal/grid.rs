use ndarray::Array2;

use super::MoyalError;

/// Periodic phase-space lattice `q_i = q0 + i Lq / Nq`, `p_j = p0 + j Lp / Np`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub q0: f64,
    pub lq: f64,
    pub p0: f64,
    pub lp: f64,
    pub jq: u32,
    pub jp: u32,
    pub hbar: f64,
    pub mass: f64,
}

/// Smallest dyadic level accepted on either axis (32 points).
pub const MIN_LEVEL: u32 = 5;

impl PhaseSpaceGrid {
    pub fn new(q0: f64, lq: f64, p0: f64, lp: f64, jq: u32, jp: u32, hbar: f64, mass: f64) -> Result<Self, MoyalError> {
        let grid = Self { q0, lq, p0, lp, jq, jp, hbar, mass };
        grid.validate()?;
        Ok(grid)
    }

    /// Square grid centred on the origin, `ħ = m = 1`.
    pub fn symmetric(half_width: f64, level: u32) -> Result<Self, MoyalError> {
        Self::new(-half_width, 2.0 * half_width, -half_width, 2.0 * half_width, level, level, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), MoyalError> {
        let bad = |m: String| Err(MoyalError::InvalidGrid(m));
        let all = [self.q0, self.lq, self.p0, self.lp, self.hbar, self.mass];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("grid parameters must be finite".into());
        }
        if self.lq <= 0.0 || self.lp <= 0.0 {
            return bad(format!("periods must be positive (Lq = {}, Lp = {})", self.lq, self.lp));
        }
        if self.hbar <= 0.0 || self.mass <= 0.0 {
            return bad(format!("hbar and mass must be positive (hbar = {}, mass = {})", self.hbar, self.mass));
        }
        if self.jq < MIN_LEVEL || self.jp < MIN_LEVEL || self.jq > 14 || self.jp > 14 {
            return bad(format!("levels ({}, {}) must lie in {MIN_LEVEL}..=14", self.jq, self.jp));
        }
        Ok(())
    }

    pub fn nq(&self) -> usize {
        1 << self.jq
    }

    pub fn np(&self) -> usize {
        1 << self.jp
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nq(), self.np())
    }

    pub fn dq(&self) -> f64 {
        self.lq / self.nq() as f64
    }

    pub fn dp(&self) -> f64 {
        self.lp / self.np() as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q0 + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p0 + j as f64 * self.dp()
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.nq()).map(|i| self.q(i)).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        (0..self.np()).map(|j| self.p(j)).collect()
    }

    /// Same box at other dyadic levels.
    pub fn with_levels(&self, jq: u32, jp: u32) -> Result<Self, MoyalError> {
        Self::new(self.q0, self.lq, self.p0, self.lp, jq, jp, self.hbar, self.mass)
    }
}

/// Finest-level scaling coefficients of `W(q, p)` on a grid, rows indexed by `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub grid: PhaseSpaceGrid,
    pub data: Array2<f64>,
    pub time: f64,
}

impl CoefficientField {
    pub fn new(grid: PhaseSpaceGrid, data: Array2<f64>, time: f64) -> Result<Self, MoyalError> {
        if data.dim() != grid.shape() {
            return Err(MoyalError::GridMismatch(format!(
                "data is {:?}, grid is {:?}",
                data.dim(),
                grid.shape()
            )));
        }
        if let Some(idx) = data.indexed_iter().find(|(_, v)| !v.is_finite()).map(|(i, _)| i) {
            return Err(MoyalError::NonFinite(format!("entry {idx:?}")));
        }
        Ok(Self { grid, data, time })
    }

    pub fn zeros(grid: &PhaseSpaceGrid) -> Self {
        Self {
            data: Array2::zeros(grid.shape()),
            grid: grid.clone(),
            time: 0.0,
        }
    }

    /// Samples `f(q, p)` at the grid points.
    pub fn from_fn(grid: &PhaseSpaceGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let q = grid.q_values();
        let p = grid.p_values();
        Self {
            data: Array2::from_shape_fn(grid.shape(), |(i, j)| f(q[i], p[j])),
            grid: grid.clone(),
            time: 0.0,
        }
    }

    /// `∬ W dq dp` by one-point quadrature.
    pub fn normalization(&self) -> f64 {
        self.data.sum() * self.grid.cell_area()
    }

    /// Discrete L2 norm (no cell weight).
    pub fn l2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self - other‖₂ / ‖other‖₂`.
    pub fn relative_l2(&self, other: &CoefficientField) -> f64 {
        let diff: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum();
        diff.sqrt() / other.l2()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
