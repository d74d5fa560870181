//! Connection coefficients and the derivative matrices built from them.
//!
//! Tables use the shift convention `Γ_k = ∫ φ^{(a)}(x) φ^{(b)}(x + k) dx`,
//! so that a Galerkin derivative acts as `(D c)_m = Σ_k Γ_k c_{m-k}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::wavelets::{WaveletError, WaveletFamily};

mod interval;

pub use interval::{half_line_integrals, interval_matrix, tail_integrals, HalfLineTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error(
        "derivative order {order} is not admissible for `{family}`: needs sobolev estimate above {order}, have {sobolev}"
    )]
    Inadmissible { family: String, order: usize, sobolev: f64 },
    #[error("degenerate refinement eigenspace for `{family}`: {detail}")]
    Degenerate { family: String, detail: String },
    #[error("grid of {n} points is too small for `{family}`: the stencil needs at least {min}")]
    BandOverlap { family: String, n: usize, min: usize },
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
}

/// Singular values at or below this count as zero.
const RANK_TOL: f64 = 1e-10;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

pub(crate) fn check_admissible(family: &WaveletFamily, order: usize) -> Result<(), ConnectionError> {
    if order == 0 || family.admits_derivative(order) {
        Ok(())
    } else {
        Err(ConnectionError::Inadmissible {
            family: family.name().to_string(),
            order,
            sobolev: family.sobolev_estimate(),
        })
    }
}

/// `Γ^{a,b}_k` for `|k| <= 2K-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    family: String,
    a: usize,
    b: usize,
    half_width: i64,
    values: Vec<f64>,
}

impl ConnectionTable {
    pub fn family_name(&self) -> &str {
        &self.family
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn total_order(&self) -> usize {
        self.a + self.b
    }

    /// Largest shift with a possibly nonzero value.
    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn value(&self, k: i64) -> f64 {
        if k.abs() > self.half_width {
            0.0
        } else {
            self.values[(k + self.half_width) as usize]
        }
    }

    /// `(k, Γ_k)` pairs in increasing `k`.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (i as i64 - self.half_width, *v))
    }

    pub fn moment(&self, power: u32) -> f64 {
        self.entries().map(|(k, v)| (k as f64).powi(power as i32) * v).sum()
    }

    /// Max-norm residual of `Γ_k = 2^d Σ_{i,j} h_i h_j Γ_{2k+i-j}`.
    pub fn refinement_residual(&self, family: &WaveletFamily) -> f64 {
        let t = refinement_operator(family, self.total_order());
        let g = DVector::from_column_slice(&self.values);
        (&t * &g - &g).amax()
    }
}

/// `2^d T` with `T_{k,m} = Σ_{2k+i-j=m} h_i h_j` on shifts `|k|, |m| <= 2K-2`.
fn refinement_operator(family: &WaveletFamily, d: usize) -> DMatrix<f64> {
    let h = family.lowpass();
    let off = family.support_width() as i64 - 1;
    let n = (2 * off + 1) as usize;
    let scale = 2f64.powi(d as i32);
    let mut t = DMatrix::zeros(n, n);
    for k in -off..=off {
        for (i, hi) in h.iter().enumerate() {
            for (j, hj) in h.iter().enumerate() {
                let m = 2 * k + i as i64 - j as i64;
                if m.abs() <= off {
                    t[((k + off) as usize, (m + off) as usize)] += scale * hi * hj;
                }
            }
        }
    }
    t
}

fn solve_table(family: &WaveletFamily, a: usize, b: usize) -> Result<ConnectionTable, ConnectionError> {
    let d = a + b;
    let off = family.support_width() as i64 - 1;
    let n = (2 * off + 1) as usize;
    let mut homogeneous = refinement_operator(family, d);
    for i in 0..n {
        homogeneous[(i, i)] -= 1.0;
    }
    if n > 1 {
        let mut sv: Vec<f64> = homogeneous.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        if sv[1] <= RANK_TOL {
            return Err(ConnectionError::Degenerate {
                family: family.name().to_string(),
                detail: format!("eigenvalue 2^-{d} has multiplicity above one (singular values {:e}, {:e})", sv[0], sv[1]),
            });
        }
    }
    let mut system = DMatrix::zeros(n + 1, n);
    system.rows_mut(0, n).copy_from(&homogeneous);
    for (col, k) in (-off..=off).enumerate() {
        system[(n, col)] = (k as f64).powi(d as i32);
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = if d % 2 == 0 { 1.0 } else { -1.0 } * factorial(d);
    let solution = system
        .svd(true, true)
        .solve(&rhs, RANK_TOL)
        .map_err(|e| ConnectionError::Degenerate {
            family: family.name().to_string(),
            detail: e.to_string(),
        })?;
    // The a-fold integration by parts moves derivatives across the product.
    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
    Ok(ConnectionTable {
        family: family.name().to_string(),
        a,
        b,
        half_width: off,
        values: solution.iter().map(|v| sign * v).collect(),
    })
}

type CacheKey = (String, usize, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<ConnectionTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<ConnectionTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Connection table for `∫ φ^{(a)} φ^{(b)}(· + k)`.
///
/// Both orders are gated by the family's Sobolev estimate. Results are
/// memoized per `(family, a, b)`; the first computation wins.
pub fn connection_coefficients(
    family: &WaveletFamily,
    a: usize,
    b: usize,
) -> Result<Arc<ConnectionTable>, ConnectionError> {
    check_admissible(family, a.max(b))?;
    let key = (family.name().to_string(), a, b);
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let table = Arc::new(solve_table(family, a, b)?);
    let mut guard = cache().lock().expect("cache lock");
    Ok(Arc::clone(guard.entry(key).or_insert(table)))
}

/// Table for total order `d` with the balanced split `a = ⌊d/2⌋`, `b = ⌈d/2⌉`,
/// returned in the `(0, d)` orientation.
pub fn derivative_stencil(family: &WaveletFamily, d: usize) -> Result<Vec<(i64, f64)>, ConnectionError> {
    let a = d / 2;
    let table = connection_coefficients(family, a, d - a)?;
    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
    Ok(table.entries().map(|(k, v)| (k, sign * v)).collect())
}

/// Circulant Galerkin matrix of `d/dx^d` on `2^j` periodic points over length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrix {
    order: usize,
    level: u32,
    domain_length: f64,
    stencil: Vec<(i64, f64)>,
}

impl DerivativeMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        1 << self.level
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// Nonzero `(shift, weight)` pairs: `(D f)_m = Σ w f_{m - shift}`.
    pub fn stencil(&self) -> &[(i64, f64)] {
        &self.stencil
    }

    /// Σ |w|, the ∞-norm of the matrix.
    pub fn norm_inf(&self) -> f64 {
        self.stencil.iter().map(|(_, w)| w.abs()).sum()
    }

    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.dim();
        assert_eq!(f.len(), n, "input length");
        assert_eq!(out.len(), n, "output length");
        let ni = n as i64;
        for (m, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(k, w) in &self.stencil {
                acc += w * f[(m as i64 - k).rem_euclid(ni) as usize];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_into(f, &mut out);
        out
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let n = self.dim();
        let mut m = ndarray::Array2::zeros((n, n));
        for r in 0..n {
            for &(k, w) in &self.stencil {
                m[(r, (r as i64 - k).rem_euclid(n as i64) as usize)] += w;
            }
        }
        m
    }
}

/// Assembles the order-`d` derivative on `2^j` points of a period-`L` grid.
pub fn derivative_matrix(
    family: &WaveletFamily,
    d: usize,
    j: u32,
    domain_length: f64,
) -> Result<DerivativeMatrix, ConnectionError> {
    let n = 1usize << j;
    let min = 2 * family.support_width();
    if n < min {
        return Err(ConnectionError::BandOverlap {
            family: family.name().to_string(),
            n,
            min,
        });
    }
    let raw = derivative_stencil(family, d)?;
    let scale = (n as f64 / domain_length).powi(d as i32);
    let parity = if d % 2 == 0 { 1.0 } else { -1.0 };
    let lookup: HashMap<i64, f64> = raw.iter().copied().collect();
    // Averaging with the mirrored entry makes D^T = (-1)^d D hold exactly.
    let stencil = raw
        .iter()
        .map(|&(k, v)| {
            let mirror = lookup.get(&-k).copied().unwrap_or(0.0);
            (k, scale * 0.5 * (v + parity * mirror))
        })
        .filter(|&(_, w)| w != 0.0)
        .collect();
    Ok(DerivativeMatrix {
        order: d,
        level: j,
        domain_length,
        stencil,
    })
}

/// Like [`derivative_matrix`] for any power-of-two `n`.
pub fn derivative_matrix_for_len(
    family: &WaveletFamily,
    d: usize,
    n: usize,
    domain_length: f64,
) -> Result<DerivativeMatrix, ConnectionError> {
    if !n.is_power_of_two() {
        return Err(ConnectionError::NotPowerOfTwo(n));
    }
    derivative_matrix(family, d, n.trailing_zeros(), domain_length)
}
