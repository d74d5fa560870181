//! Galerkin integrals of scaling functions over a half-line and a window.
//!
//! `Λ^{(d)}_{k,l} = ∫_0^∞ φ(s-k) φ^{(d)}(s-l) ds`. Pairs fully inside the
//! half-line reduce to the full-line table; the remaining pairs near the
//! origin follow from the refinement relation
//! `Λ_{k,l} = 2^d Σ h_i h_j Λ_{2k+i, 2l+j}` closed by the polynomial
//! reproduction identities `Σ_l φ(s-l) = 1` and `Σ_l l φ'(s-l) = 1`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use super::{connection_coefficients, ConnectionError, RANK_TOL};
use crate::wavelets::WaveletFamily;

/// `I_k = ∫_k^∞ φ` for `k = 0..=2K-1` (`I_0 = 1`, `I_{2K-1} = 0`).
pub fn tail_integrals(family: &WaveletFamily) -> Result<Vec<f64>, ConnectionError> {
    let h = family.lowpass();
    let s = family.support_width() as i64;
    let interior: Vec<i64> = (1..s).collect();
    let n = interior.len();
    let mut out = vec![0.0; s as usize + 1];
    out[0] = 1.0;
    if n == 0 {
        return Ok(out);
    }
    // I_k = 2^{-1/2} Σ_i h_i I_{2k-i}
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (r, &k) in interior.iter().enumerate() {
        for (i, hi) in h.iter().enumerate() {
            let m = 2 * k - i as i64;
            let w = hi * std::f64::consts::FRAC_1_SQRT_2;
            if m <= 0 {
                b[r] += w;
            } else if m < s {
                a[(r, (m - 1) as usize)] -= w;
            }
        }
    }
    let x = a.lu().solve(&b).ok_or_else(|| ConnectionError::Degenerate {
        family: family.name().to_string(),
        detail: "tail-integral system is singular".into(),
    })?;
    for (r, v) in x.iter().enumerate() {
        out[r + 1] = *v;
    }
    Ok(out)
}

/// Half-line table `Λ^{(d)}` for `d ∈ {0, 1}`.
#[derive(Debug, Clone)]
pub struct HalfLineTable {
    order: usize,
    half_width: i64,
    full: Vec<f64>,
    boundary: HashMap<(i64, i64), f64>,
}

enum Entry {
    Known(f64),
    Unknown(usize),
}

impl HalfLineTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self, k: i64, l: i64) -> f64 {
        let off = self.half_width;
        if (k - l).abs() > off || k < -off || l < -off {
            0.0
        } else if k >= 0 && l >= 0 {
            self.full[(k - l + off) as usize]
        } else {
            self.boundary[&(k, l)]
        }
    }
}

/// Solves for the boundary entries of `Λ^{(d)}` by least squares.
pub fn half_line_integrals(family: &WaveletFamily, d: usize) -> Result<HalfLineTable, ConnectionError> {
    assert!(d <= 1, "half-line integrals are provided for d = 0, 1");
    let h = family.lowpass();
    let off = family.support_width() as i64 - 1;
    let full_table = connection_coefficients(family, 0, d)?;
    let full: Vec<f64> = (-off..=off).map(|k| full_table.value(k)).collect();
    let unknowns: Vec<(i64, i64)> = (-off..off)
        .flat_map(|k| (-off..off).map(move |l| (k, l)))
        .filter(|&(k, l)| k.min(l) < 0 && (k - l).abs() <= off)
        .collect();
    let index: HashMap<(i64, i64), usize> = unknowns.iter().enumerate().map(|(i, u)| (*u, i)).collect();
    let classify = |k: i64, l: i64| -> Entry {
        if (k - l).abs() > off || k < -off || l < -off {
            Entry::Known(0.0)
        } else if k >= 0 && l >= 0 {
            Entry::Known(full[(k - l + off) as usize])
        } else {
            Entry::Unknown(index[&(k, l)])
        }
    };

    let n = unknowns.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let scale = 2f64.powi(d as i32);
    for &(k, l) in &unknowns {
        let mut row = vec![0.0; n];
        let mut rhs = 0.0;
        row[index[&(k, l)]] += 1.0;
        for (i, hi) in h.iter().enumerate() {
            for (j, hj) in h.iter().enumerate() {
                let c = scale * hi * hj;
                match classify(2 * k + i as i64, 2 * l + j as i64) {
                    Entry::Known(v) => rhs += c * v,
                    Entry::Unknown(u) => row[u] -= c,
                }
            }
        }
        rows.push((row, rhs));
    }
    let tails = tail_integrals(family)?;
    let tail = |k: i64| -> f64 {
        if k <= 0 {
            1.0
        } else {
            tails.get(k as usize).copied().unwrap_or(0.0)
        }
    };
    for k in -off..off {
        for power in 0..=d {
            let mut row = vec![0.0; n];
            let mut rhs = if power == d { tail(-k) } else { 0.0 };
            for l in (k - off)..=(k + off) {
                let c = (l as f64).powi(power as i32);
                match classify(k, l) {
                    Entry::Known(v) => rhs -= c * v,
                    Entry::Unknown(u) => row[u] += c,
                }
            }
            rows.push((row, rhs));
        }
    }

    let mut boundary = HashMap::new();
    if n > 0 {
        let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]);
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        let svd = a.clone().svd(true, true);
        let smallest = svd.singular_values.min();
        let degenerate = |detail: String| ConnectionError::Degenerate {
            family: family.name().to_string(),
            detail,
        };
        if smallest <= RANK_TOL {
            return Err(degenerate(format!("half-line system is rank deficient ({smallest:e})")));
        }
        let x = svd.solve(&b, RANK_TOL).map_err(|e| degenerate(e.to_string()))?;
        let residual = (&a * &x - &b).amax();
        if residual > 1e-10 {
            return Err(degenerate(format!("half-line system is inconsistent (residual {residual:e})")));
        }
        for (u, v) in unknowns.iter().zip(x.iter()) {
            boundary.insert(*u, *v);
        }
    }
    Ok(HalfLineTable {
        order: d,
        half_width: off,
        full,
        boundary,
    })
}

/// `∫_0^M φ(s-k) φ^{(d)}(s-l) ds` for `k, l` in `-(2K-2)..M`, indexed from 0.
pub fn interval_matrix(table: &HalfLineTable, m: usize) -> Array2<f64> {
    let off = table.half_width;
    let m = m as i64;
    let size = (m + off) as usize;
    Array2::from_shape_fn((size, size), |(r, c)| {
        let k = r as i64 - off;
        let l = c as i64 - off;
        table.value(k, l) - table.value(k - m, l - m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::{cascade_table, make_family};

    /// Trapezoid quadrature of the half-line integral on a dyadic table.
    fn quadrature(family: &WaveletFamily, d: usize, k: i64, l: i64) -> f64 {
        let depth = 12;
        let t = cascade_table(family, depth).unwrap();
        let phi = t.phi_values();
        let hgrid = t.spacing();
        let step = 1i64 << depth;
        let deriv: Vec<f64> = if d == 0 {
            phi.to_vec()
        } else {
            (0..phi.len())
                .map(|i| {
                    let lo = if i == 0 { 0.0 } else { phi[i - 1] };
                    let hi = phi.get(i + 1).copied().unwrap_or(0.0);
                    (hi - lo) / (2.0 * hgrid)
                })
                .collect()
        };
        let at = |arr: &[f64], idx: i64| -> f64 {
            if idx < 0 {
                0.0
            } else {
                arr.get(idx as usize).copied().unwrap_or(0.0)
            }
        };
        let s_end = (k.max(l) + 2 * family.vanishing_moments() as i64) * step;
        let mut acc = 0.0;
        for s in 0..=s_end {
            let w = if s == 0 { 0.5 } else { 1.0 };
            acc += w * at(phi, s - k * step) * at(&deriv, s - l * step);
        }
        acc * hgrid
    }

    #[test]
    fn tail_integrals_match_quadrature() {
        let f = make_family("daubechies-4").unwrap();
        let tails = tail_integrals(&f).unwrap();
        let t = cascade_table(&f, 12).unwrap();
        let step = 1usize << 12;
        for (k, tail) in tails.iter().enumerate() {
            let tail_q: f64 = t.phi_values()[k * step..].iter().sum::<f64>() * t.spacing();
            assert!((tail - tail_q).abs() < 1e-3, "k={k}");
        }
    }

    #[test]
    fn boundary_entries_match_quadrature() {
        for (name, d) in [("daubechies-3", 0), ("daubechies-3", 1), ("daubechies-6", 1)] {
            let f = make_family(name).unwrap();
            let table = half_line_integrals(&f, d).unwrap();
            let off = f.support_width() as i64 - 1;
            for k in -off..2 {
                for l in -off..2 {
                    let q = quadrature(&f, d, k, l);
                    assert!((table.value(k, l) - q).abs() < 5e-3, "{name} d={d} ({k},{l})");
                }
            }
        }
    }

    #[test]
    fn window_mass_matrix_reproduces_constants() {
        // Σ_l G_{kl} = ∫_0^M φ(s-k) ds, and Σ_k of that is M
        let f = make_family("daubechies-5").unwrap();
        let g = interval_matrix(&half_line_integrals(&f, 0).unwrap(), 20);
        let total: f64 = g.sum();
        assert!((total - 20.0).abs() < 1e-10, "{total}");
        assert!((&g - &g.t()).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn window_derivative_integrates_to_endpoints() {
        // u^T C v = ∫_0^M u v' ; with u = v = 1 this is 0, with u = 1, v = s it is M
        let f = make_family("daubechies-4").unwrap();
        let m = 16;
        let c = interval_matrix(&half_line_integrals(&f, 1).unwrap(), m);
        let off = f.support_width() as i64 - 1;
        let ones = ndarray::Array1::<f64>::ones(c.nrows());
        let mu: f64 = {
            // Σ_l l φ(s-l) = s - μ with μ = ∫ x φ
            let t = cascade_table(&f, 12).unwrap();
            t.phi_values().iter().enumerate().map(|(i, p)| i as f64 * t.spacing() * p).sum::<f64>() * t.spacing()
        };
        let lin = ndarray::Array1::from_shape_fn(c.nrows(), |i| (i as i64 - off) as f64 + mu);
        assert!(ones.dot(&c.dot(&ones)).abs() < 1e-10);
        assert!((ones.dot(&c.dot(&lin)) - m as f64).abs() < 1e-9);
    }

    #[test]
    fn haar_mass_is_identity() {
        let f = make_family("haar").unwrap();
        let g = interval_matrix(&half_line_integrals(&f, 0).unwrap(), 5);
        assert!((&g - &Array2::<f64>::eye(5)).iter().all(|v| v.abs() < 1e-14));
    }
}
