use std::sync::Arc;

use ndarray::{Array2, Zip};

use super::grid::{CoefficientField, PhaseSpaceGrid};
use super::potential::Potential;
use super::MoyalError;
use crate::connection::{derivative_matrix, DerivativeMatrix};
use crate::wavelets::WaveletFamily;

/// RK4 stability interval on the imaginary and negative real axes, rounded down.
pub const RK4_STABILITY_RADIUS: f64 = 2.78;

/// Action of one factor of a separable term along a single axis.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisAction {
    Identity,
    Derivative(Arc<DerivativeMatrix>),
    /// Pointwise multiplication by values sampled at the grid points.
    Multiply(Vec<f64>),
}

impl AxisAction {
    fn magnitude(&self) -> f64 {
        match self {
            AxisAction::Identity => 1.0,
            AxisAction::Derivative(d) => d.norm_inf(),
            AxisAction::Multiply(v) => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }

    fn derivative_order(&self) -> usize {
        match self {
            AxisAction::Derivative(d) => d.order(),
            _ => 0,
        }
    }
}

/// `coefficient · (q_action ⊗ p_action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoyalTerm {
    pub coefficient: f64,
    pub q_action: AxisAction,
    pub p_action: AxisAction,
}

impl MoyalTerm {
    /// ∞-norm bound of the term as an operator on fields.
    pub fn norm_bound(&self) -> f64 {
        self.coefficient.abs() * self.q_action.magnitude() * self.p_action.magnitude()
    }

    fn max_derivative_order(&self) -> usize {
        self.q_action.derivative_order().max(self.p_action.derivative_order())
    }
}

/// Right-hand side of the truncated Wigner–Moyal equation on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MoyalOperator {
    grid: PhaseSpaceGrid,
    family: WaveletFamily,
    family_p: WaveletFamily,
    terms: Vec<MoyalTerm>,
    truncation: usize,
    decoherence: f64,
    decoherence_term: Option<MoyalTerm>,
}

fn sign(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Assembles `-(p/m) ∂_q + Σ_{ℓ≤L} (-1)^ℓ (ħ/2)^{2ℓ} / (2ℓ+1)! · U^{(2ℓ+1)}(q) ∂_p^{2ℓ+1}`.
///
/// Potential terms whose derivative vanishes identically are left out.
pub fn assemble_moyal(
    potential: &Potential,
    grid: &PhaseSpaceGrid,
    truncation: usize,
    family: &WaveletFamily,
) -> Result<MoyalOperator, MoyalError> {
    assemble_moyal_with(potential, grid, truncation, family, family)
}

/// [`assemble_moyal`] with separate families for the `q` and `p` derivatives.
pub fn assemble_moyal_with(
    potential: &Potential,
    grid: &PhaseSpaceGrid,
    truncation: usize,
    family_q: &WaveletFamily,
    family_p: &WaveletFamily,
) -> Result<MoyalOperator, MoyalError> {
    grid.validate()?;
    let dq1 = derivative_matrix(family_q, 1, grid.jq, grid.lq)?;
    let mut terms = vec![MoyalTerm {
        coefficient: -1.0 / grid.mass,
        q_action: AxisAction::Derivative(Arc::new(dq1)),
        p_action: AxisAction::Multiply(grid.p_values()),
    }];
    let q = grid.q_values();
    for l in 0..=truncation {
        let order = 2 * l + 1;
        let du = potential.derivative(order);
        if du.is_zero() {
            continue;
        }
        let dp = derivative_matrix(family_p, order, grid.jp, grid.lp)?;
        terms.push(MoyalTerm {
            coefficient: sign(l) * (grid.hbar / 2.0).powi(2 * l as i32) / factorial(order),
            q_action: AxisAction::Multiply(q.iter().map(|&x| du.eval(x)).collect()),
            p_action: AxisAction::Derivative(Arc::new(dp)),
        });
    }
    Ok(MoyalOperator {
        grid: grid.clone(),
        family: family_q.clone(),
        family_p: family_p.clone(),
        terms,
        truncation,
        decoherence: 0.0,
        decoherence_term: None,
    })
}

/// Returns `op` with the momentum-diffusion term `D ∂²_p` set to the given strength.
pub fn add_decoherence(op: &MoyalOperator, strength: f64) -> Result<MoyalOperator, MoyalError> {
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(MoyalError::NegativeDecoherence(strength));
    }
    let mut out = op.clone();
    out.decoherence = strength;
    out.decoherence_term = if strength > 0.0 {
        let dp2 = derivative_matrix(&op.family_p, 2, op.grid.jp, op.grid.lp)?;
        Some(MoyalTerm {
            coefficient: strength,
            q_action: AxisAction::Identity,
            p_action: AxisAction::Derivative(Arc::new(dp2)),
        })
    } else {
        None
    };
    Ok(out)
}

impl MoyalOperator {
    /// Operator with no terms (`∂_t W = 0`).
    pub fn zero(grid: &PhaseSpaceGrid, family: &WaveletFamily) -> Self {
        Self {
            grid: grid.clone(),
            family: family.clone(),
            family_p: family.clone(),
            terms: Vec::new(),
            truncation: 0,
            decoherence: 0.0,
            decoherence_term: None,
        }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    /// Family of the `q` derivatives.
    pub fn family(&self) -> &WaveletFamily {
        &self.family
    }

    /// Family of the `p` derivatives.
    pub fn family_p(&self) -> &WaveletFamily {
        &self.family_p
    }

    /// Closed-system terms: advection first, then potential terms by increasing ℓ.
    pub fn terms(&self) -> &[MoyalTerm] {
        &self.terms
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn decoherence(&self) -> f64 {
        self.decoherence
    }

    pub fn all_terms(&self) -> impl Iterator<Item = &MoyalTerm> {
        self.terms.iter().chain(self.decoherence_term.as_ref())
    }

    /// The same operator with every coefficient negated (time reversal).
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coefficient = -t.coefficient);
        if let Some(t) = out.decoherence_term.as_mut() {
            t.coefficient = -t.coefficient;
        }
        out.decoherence = -out.decoherence;
        out
    }

    /// Largest `dt` the explicit integrator accepts, for Courant factor `courant`.
    ///
    /// First-order terms use `min(Δq / (p_max/m), Δp / max|U'|)`; terms with
    /// second or higher derivatives use `2.78 / Σ ‖term‖∞`.
    pub fn stable_dt(&self, courant: f64) -> f64 {
        let mut bound = f64::INFINITY;
        let mut stiff = 0.0;
        for term in self.all_terms() {
            match term.max_derivative_order() {
                0 => {}
                1 => {
                    let (action, spacing) = match (&term.q_action, &term.p_action) {
                        (AxisAction::Derivative(_), other) => (other, self.grid.dq()),
                        (other, _) => (other, self.grid.dp()),
                    };
                    let speed = term.coefficient.abs() * action.magnitude();
                    if speed > 0.0 {
                        bound = bound.min(spacing / speed);
                    }
                }
                _ => stiff += term.norm_bound(),
            }
        }
        if stiff > 0.0 {
            bound = bound.min(RK4_STABILITY_RADIUS / stiff);
        }
        courant * bound
    }

    /// `out = op(input)`; both arrays have the grid shape.
    pub fn apply_into(&self, input: &Array2<f64>, out: &mut Array2<f64>, scratch: &mut Array2<f64>) {
        let shape = self.grid.shape();
        assert_eq!(input.dim(), shape, "input shape");
        out.fill(0.0);
        for term in self.all_terms() {
            apply_p(&term.p_action, input, scratch);
            accumulate_q(&term.q_action, scratch, out, term.coefficient);
        }
    }

    pub fn apply_array(&self, input: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(input.dim());
        let mut scratch = Array2::zeros(input.dim());
        self.apply_into(input, &mut out, &mut scratch);
        out
    }

    pub fn apply(&self, field: &CoefficientField) -> Result<CoefficientField, MoyalError> {
        if field.grid != self.grid {
            return Err(MoyalError::GridMismatch("field grid differs from operator grid".into()));
        }
        Ok(CoefficientField {
            grid: field.grid.clone(),
            data: self.apply_array(&field.data),
            time: field.time,
        })
    }
}

/// Periodic convolution `(D f)_m = Σ w f_{m-k}` of one contiguous row.
fn convolve_row(stencil: &[(i64, f64)], input: &[f64], out: &mut [f64]) {
    let n = input.len();
    out.fill(0.0);
    for &(k, w) in stencil {
        let s = k.rem_euclid(n as i64) as usize;
        // out[m] += w * input[m - s] for m >= s, wrapping below
        for (o, x) in out[s..].iter_mut().zip(&input[..n - s]) {
            *o += w * x;
        }
        for (o, x) in out[..s].iter_mut().zip(&input[n - s..]) {
            *o += w * x;
        }
    }
}

fn apply_p(action: &AxisAction, input: &Array2<f64>, out: &mut Array2<f64>) {
    match action {
        AxisAction::Identity => out.assign(input),
        AxisAction::Multiply(v) => {
            for (mut o, i) in out.rows_mut().into_iter().zip(input.rows()) {
                Zip::from(&mut o).and(&i).and(v).for_each(|o, &x, &m| *o = x * m);
            }
        }
        AxisAction::Derivative(d) => {
            for (mut o, i) in out.rows_mut().into_iter().zip(input.rows()) {
                convolve_row(
                    d.stencil(),
                    i.as_slice().expect("standard layout"),
                    o.as_slice_mut().expect("standard layout"),
                );
            }
        }
    }
}

fn accumulate_q(action: &AxisAction, input: &Array2<f64>, out: &mut Array2<f64>, c: f64) {
    match action {
        AxisAction::Identity => out.scaled_add(c, input),
        AxisAction::Multiply(v) => {
            for ((mut o, i), m) in out.rows_mut().into_iter().zip(input.rows()).zip(v) {
                o.scaled_add(c * m, &i);
            }
        }
        AxisAction::Derivative(d) => {
            let n = input.nrows() as i64;
            for (m, mut o) in out.rows_mut().into_iter().enumerate() {
                for &(k, w) in d.stencil() {
                    let src = (m as i64 - k).rem_euclid(n) as usize;
                    o.scaled_add(c * w, &input.row(src));
                }
            }
        }
    }
}
