//! Observables of Wigner fields and closed-form reference solutions.
//!
//! Integrals use one-point quadrature on the grid: `∬ f dq dp ≈ Σ f_ij Δq Δp`.

use std::f64::consts::PI;

use crate::moyal::{CoefficientField, MoyalError, PhaseSpaceGrid, Potential};

/// Cells on each side of a seam counted by `boundary_mass` in [`report`]
/// (four widths of the default `daubechies-6` filter).
pub const DEFAULT_SEAM_CELLS: usize = 44;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub time: f64,
    pub normalization: f64,
    /// `2πħ ∬ W²`.
    pub purity: f64,
    /// `∬ max(-W, 0)`.
    pub negativity_volume: f64,
    /// `∬ (p²/2m + U(q)) W`.
    pub energy: f64,
    /// `∫ W dp` at each `q`.
    pub position_marginal: Vec<f64>,
    /// `∫ W dq` at each `p`.
    pub momentum_marginal: Vec<f64>,
    /// `∬ |W|` over cells within the seam band of either axis.
    pub boundary_mass: f64,
    /// Centroid of `|W|`.
    pub centroid: (f64, f64),
    /// Smallest radius around the centroid holding 95% of `∬ |W|`.
    pub radius95: f64,
}

impl DiagnosticsReport {
    /// Column names of [`Self::csv_row`].
    pub const CSV_HEADER: &'static str =
        "time,normalization,purity,negativity_volume,energy,boundary_mass,centroid_q,centroid_p,radius95";

    pub fn csv_row(&self) -> String {
        [
            self.time,
            self.normalization,
            self.purity,
            self.negativity_volume,
            self.energy,
            self.boundary_mass,
            self.centroid.0,
            self.centroid.1,
            self.radius95,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Observables with a seam band of [`DEFAULT_SEAM_CELLS`], capped at an eighth of each axis.
pub fn report(field: &CoefficientField, potential: &Potential) -> DiagnosticsReport {
    let grid = &field.grid;
    let cells = DEFAULT_SEAM_CELLS.min(grid.nq().min(grid.np()) / 8);
    report_with_seam(field, potential, cells)
}

pub fn report_with_seam(field: &CoefficientField, potential: &Potential, seam_cells: usize) -> DiagnosticsReport {
    let grid = &field.grid;
    let w = &field.data;
    let area = grid.cell_area();
    let q = grid.q_values();
    let p = grid.p_values();
    let (nq, np) = grid.shape();

    let mut square = 0.0;
    let mut negative = 0.0;
    let mut energy = 0.0;
    let mut boundary = 0.0;
    let mut abs_mass = 0.0;
    let mut cq = 0.0;
    let mut cp = 0.0;
    let u: Vec<f64> = q.iter().map(|&x| potential.eval(x)).collect();
    let near_seam = |i: usize, n: usize| i < seam_cells || i + seam_cells >= n;
    for ((i, j), &v) in w.indexed_iter() {
        square += v * v;
        negative += (-v).max(0.0);
        energy += (p[j] * p[j] / (2.0 * grid.mass) + u[i]) * v;
        let a = v.abs();
        abs_mass += a;
        cq += a * q[i];
        cp += a * p[j];
        if near_seam(i, nq) || near_seam(j, np) {
            boundary += a;
        }
    }
    let centroid = if abs_mass > 0.0 {
        (cq / abs_mass, cp / abs_mass)
    } else {
        (0.0, 0.0)
    };
    let position_marginal = w.rows().into_iter().map(|r| r.sum() * grid.dp()).collect();
    let momentum_marginal = w.columns().into_iter().map(|c| c.sum() * grid.dq()).collect();

    DiagnosticsReport {
        time: field.time,
        normalization: w.sum() * area,
        purity: 2.0 * PI * grid.hbar * square * area,
        negativity_volume: negative * area,
        energy: energy * area,
        position_marginal,
        momentum_marginal,
        boundary_mass: boundary * area,
        centroid,
        radius95: mass_radius(field, centroid, 0.95),
    }
}

/// Smallest `r` with at least `fraction` of `∬|W|` inside the disc of radius `r` about `center`.
pub fn mass_radius(field: &CoefficientField, center: (f64, f64), fraction: f64) -> f64 {
    let grid = &field.grid;
    let q = grid.q_values();
    let p = grid.p_values();
    let mut cells: Vec<(f64, f64)> = field
        .data
        .indexed_iter()
        .map(|((i, j), v)| ((q[i] - center.0).hypot(p[j] - center.1), v.abs()))
        .collect();
    let total: f64 = cells.iter().map(|c| c.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for (r, m) in cells {
        acc += m;
        if acc >= fraction * total {
            return r;
        }
    }
    f64::INFINITY
}

/// Coherent-state Wigner function of the oscillator `U = mω²q²/2`, rotated to time `t`.
pub fn oracle_harmonic(q0: f64, p0: f64, omega: f64, t: f64, grid: &PhaseSpaceGrid) -> CoefficientField {
    let m = grid.mass;
    let (s, c) = (omega * t).sin_cos();
    let qc = q0 * c + p0 / (m * omega) * s;
    let pc = p0 * c - m * omega * q0 * s;
    let mut f = coherent_state(qc, pc, omega, grid);
    f.time = t;
    f
}

/// `(1/πħ) exp(-mω(q-qc)²/ħ - (p-pc)²/(mωħ))`.
pub fn coherent_state(qc: f64, pc: f64, omega: f64, grid: &PhaseSpaceGrid) -> CoefficientField {
    let (m, hbar) = (grid.mass, grid.hbar);
    CoefficientField::from_fn(grid, |q, p| {
        (-(m * omega * (q - qc).powi(2) / hbar) - (p - pc).powi(2) / (m * omega * hbar)).exp() / (PI * hbar)
    })
}

/// Free evolution of a coherent state: `W(q, p, t) = W₀(q - p t / m, p)`.
pub fn oracle_free_particle(q0: f64, p0: f64, omega: f64, t: f64, grid: &PhaseSpaceGrid) -> CoefficientField {
    let (m, hbar) = (grid.mass, grid.hbar);
    let mut f = CoefficientField::from_fn(grid, |q, p| {
        let qs = q - p * t / m;
        (-(m * omega * (qs - q0).powi(2) / hbar) - (p - p0).powi(2) / (m * omega * hbar)).exp() / (PI * hbar)
    });
    f.time = t;
    f
}

/// Even superposition of coherent states at `±q0` (zero mean momentum).
pub fn cat_state(q0: f64, omega: f64, grid: &PhaseSpaceGrid) -> CoefficientField {
    let (m, hbar) = (grid.mass, grid.hbar);
    let a = m * omega / hbar;
    let b = 1.0 / (m * omega * hbar);
    let norm = PI * hbar * 2.0 * (1.0 + (-a * q0 * q0).exp());
    CoefficientField::from_fn(grid, |q, p| {
        let g = |x: f64| (-a * x * x - b * p * p).exp();
        (g(q - q0) + g(q + q0) + 2.0 * g(q) * (2.0 * q0 * p / hbar).cos()) / norm
    })
}

/// `|ψ₀(q)|²` of the oscillator ground state.
pub fn ground_state_density(q: f64, omega: f64, grid: &PhaseSpaceGrid) -> f64 {
    let a = grid.mass * omega / grid.hbar;
    (a / PI).sqrt() * (-a * q * q).exp()
}

/// `‖a - b‖ / max(‖a‖, ‖b‖)`; zero when both fields vanish.
pub fn compare(a: &CoefficientField, b: &CoefficientField) -> Result<f64, MoyalError> {
    if a.grid != b.grid {
        return Err(MoyalError::GridMismatch("compared fields live on different grids".into()));
    }
    let scale = a.l2().max(b.l2());
    if scale == 0.0 {
        return Ok(0.0);
    }
    let diff: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).powi(2)).sum();
    Ok(diff.sqrt() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moyal::poly_potential;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::symmetric(8.0, 8).unwrap()
    }

    #[test]
    fn ground_state_observables() {
        let g = grid();
        let w = coherent_state(0.0, 0.0, 1.0, &g);
        let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
        let r = report(&w, &u);
        assert!((r.normalization - 1.0).abs() < 1e-6);
        assert!((r.purity - 1.0).abs() < 1e-4);
        assert!(r.negativity_volume <= 1e-10);
        assert!((r.energy - 0.5).abs() < 1e-6);
        assert!(r.boundary_mass < 1e-8);
        let q = g.q_values();
        for (qi, m) in q.iter().zip(&r.position_marginal) {
            assert!((m - ground_state_density(*qi, 1.0, &g)).abs() < 1e-4);
        }
    }

    #[test]
    fn cat_state_is_negative() {
        let g = grid();
        let w = cat_state(5f64.sqrt(), 2.0, &g);
        let r = report(&w, &poly_potential(&[0.0]).unwrap());
        assert!((r.normalization - 1.0).abs() < 1e-6);
        assert!(r.negativity_volume > 0.05, "{}", r.negativity_volume);
        assert!((r.purity - 1.0).abs() < 1e-4);
    }

    #[test]
    fn scaling_by_two() {
        let g = grid();
        let w = coherent_state(1.0, 0.5, 1.0, &g);
        let mut w2 = w.clone();
        w2.data *= 2.0;
        let u = poly_potential(&[0.0, 0.0, 0.5]).unwrap();
        let (a, b) = (report(&w, &u), report(&w2, &u));
        assert!((b.normalization - 2.0 * a.normalization).abs() < 1e-14);
        assert!((b.purity - 4.0 * a.purity).abs() < 1e-13);
        assert!((b.energy - 2.0 * a.energy).abs() < 1e-13);
    }

    #[test]
    fn oracle_rotation() {
        let g = grid();
        let start = oracle_harmonic(1.0, 0.0, 1.0, 0.0, &g);
        assert_eq!(start.data, coherent_state(1.0, 0.0, 1.0, &g).data);
        let full = oracle_harmonic(1.0, 0.0, 1.0, 2.0 * PI, &g);
        assert!(compare(&start, &full).unwrap() <= 1e-14);
        let half = oracle_harmonic(1.0, 0.0, 1.0, PI, &g);
        let r = report(&half, &poly_potential(&[0.0]).unwrap());
        assert!((r.centroid.0 + 1.0).abs() < 1e-10 && r.centroid.1.abs() < 1e-10);
    }

    #[test]
    fn compare_contract() {
        let g = grid();
        let x = coherent_state(0.3, 0.0, 1.0, &g);
        let mut neg = x.clone();
        neg.data *= -1.0;
        assert_eq!(compare(&x, &x).unwrap(), 0.0);
        assert!((compare(&x, &neg).unwrap() - 2.0).abs() < 1e-15);
        let z = CoefficientField::zeros(&g);
        assert_eq!(compare(&z, &z).unwrap(), 0.0);
        let other = CoefficientField::zeros(&PhaseSpaceGrid::symmetric(8.0, 7).unwrap());
        assert!(compare(&x, &other).is_err());
    }

    #[test]
    fn radius_of_ground_state() {
        // 95% of a 2-D Gaussian with variance 1/2 per axis lies within sqrt(ln 20)
        let w = coherent_state(0.0, 0.0, 1.0, &grid());
        let r = mass_radius(&w, (0.0, 0.0), 0.95);
        assert!((r - 20f64.ln().sqrt()).abs() < 0.05, "{r}");
    }
}
