//! Compactly supported orthonormal wavelet families and their dyadic tables.
//!
//! Daubechies filters are generated by spectral factorization of the
//! maxflat half-band polynomial, keeping the zeros inside the unit circle
//! (minimum phase). Taps are ordered so that `h[0]` is the small leading tap
//! of the usual tables (`daubechies-2` starts with `0.4829...`).
//!
//! Scaling functions are evaluated with the cascade algorithm: values at the
//! integers come from the eigenvalue-1 eigenvector of the refinement matrix,
//! and every finer dyadic level is filled by applying the refinement relation
//! once.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

mod taps;

/// Largest Daubechies order (vanishing moments) that `make_family` builds.
pub const MAX_DAUBECHIES_ORDER: usize = 10;

/// Deepest dyadic refinement accepted by [`cascade_table`].
pub const MAX_CASCADE_DEPTH: u32 = 14;

/// Conservative lower bounds of the L2-Sobolev exponent of the Daubechies
/// scaling function with `K` vanishing moments, indexed by `K` (index 0 unused,
/// index 1 is Haar). Values are the Villemoes / Cohen-Daubechies estimates
/// rounded down to two decimals.
const SOBOLEV_TABLE: [f64; MAX_DAUBECHIES_ORDER + 1] =
    [0.0, 0.5, 1.0, 1.41, 1.77, 2.09, 2.38, 2.65, 2.91, 3.15, 3.39];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveletError {
    #[error("unknown wavelet family `{0}` (expected `haar` or `daubechies-K` with K in 2..={MAX_DAUBECHIES_ORDER})")]
    UnknownFamily(String),
    #[error("cascade depth {0} outside 1..={MAX_CASCADE_DEPTH}")]
    DepthOutOfRange(u32),
    #[error("refinement eigenvector for `{family}` is not unique: {detail}")]
    EigenvectorFailure { family: String, detail: String },
}

/// Orthonormal conjugate-mirror filter pair with `2K` taps.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFamily {
    name: String,
    vanishing_moments: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    sobolev_estimate: f64,
}

impl WaveletFamily {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of vanishing moments `K`.
    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Filter length `2K`.
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// Right end of the scaling-function support `[0, 2K-1]`.
    pub fn support_width(&self) -> usize {
        self.lowpass.len() - 1
    }

    /// Sobolev smoothness lower bound used to gate derivative orders.
    pub fn sobolev_estimate(&self) -> f64 {
        self.sobolev_estimate
    }

    /// Whether derivatives of order `order` of the scaling function may be
    /// placed on one factor of a Galerkin integral.
    pub fn admits_derivative(&self, order: usize) -> bool {
        (order as f64) < self.sobolev_estimate
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for WaveletFamily {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        make_family(s)
    }
}

/// Builds the family named `haar` or `daubechies-K` (`K` in `2..=10`).
pub fn make_family(name: &str) -> Result<WaveletFamily, WaveletError> {
    let order = parse_family_name(name)?;
    let lowpass = if order == 1 {
        vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]
    } else {
        taps::DAUBECHIES_TAPS[order - 2].to_vec()
    };
    let highpass = quadrature_mirror(&lowpass);
    Ok(WaveletFamily {
        name: canonical_name(order),
        vanishing_moments: order,
        lowpass,
        highpass,
        sobolev_estimate: SOBOLEV_TABLE[order],
    })
}

/// Names accepted by [`make_family`], in order of increasing smoothness.
pub fn supported_family_names() -> Vec<String> {
    (1..=MAX_DAUBECHIES_ORDER).map(canonical_name).collect()
}

fn canonical_name(order: usize) -> String {
    if order == 1 {
        "haar".to_string()
    } else {
        format!("daubechies-{order}")
    }
}

fn parse_family_name(name: &str) -> Result<usize, WaveletError> {
    let trimmed = name.trim().to_ascii_lowercase();
    if trimmed == "haar" {
        return Ok(1);
    }
    trimmed
        .strip_prefix("daubechies-")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|k| (2..=MAX_DAUBECHIES_ORDER).contains(k))
        .ok_or_else(|| WaveletError::UnknownFamily(name.to_string()))
}

/// `g_k = (-1)^k h_{2K-1-k}`.
fn quadrature_mirror(lowpass: &[f64]) -> Vec<f64> {
    let n = lowpass.len();
    (0..n)
        .map(|k| {
            let v = lowpass[n - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Spectral factorization of `|H|^2 = cos^{2K}(w/2) P(sin^2(w/2))` carried
/// out in binary64.
///
/// `make_family` uses the correctly rounded table instead; this route is kept
/// as an independent check on it and loses a few digits for large `K`.
pub fn daubechies_lowpass(order: usize) -> Vec<f64> {
    assert!(order >= 1, "order must be positive");
    // P(y) = sum_{k<K} C(K-1+k, k) y^k
    let coeffs: Vec<f64> = (0..order).map(|k| binomial(order - 1 + k, k)).collect();
    let roots = polynomial_roots(&coeffs);

    // each y-root gives a reciprocal pair z, 1/z from z + 1/z = 2 - 4y
    let inner: Vec<Complex64> = roots
        .iter()
        .map(|&y| {
            let b = Complex64::new(2.0, 0.0) - 4.0 * y;
            let disc = (b * b - 4.0).sqrt();
            let z1 = (b + disc) / 2.0;
            let z2 = (b - disc) / 2.0;
            if z1.norm() < 1.0 {
                z1
            } else {
                z2
            }
        })
        .collect();

    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let half = Complex64::new(0.5, 0.0);
    for _ in 0..order {
        poly = poly_mul(&poly, &[half, half]);
    }
    for &z in &inner {
        let scale = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - z);
        poly = poly_mul(&poly, &[-z * scale, scale]);
    }
    poly.iter()
        .rev()
        .map(|c| c.re * std::f64::consts::SQRT_2)
        .collect()
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of `sum_k coeffs[k] y^k` from the companion matrix, polished by Newton.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -coeffs[degree - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    eig.iter()
        .map(|&r| {
            let mut root = r;
            for _ in 0..8 {
                let (p, dp) = eval_with_derivative(coeffs, root);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                root -= step;
                if step.norm() <= 1e-17 * root.norm().max(1.0) {
                    break;
                }
            }
            root
        })
        .collect()
}

fn eval_with_derivative(coeffs: &[f64], y: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * y + p;
        p = p * y + c;
    }
    (p, dp)
}

/// Scaling function values at the integers `0..=2K-1`, normalized to sum 1.
///
/// Haar follows the indicator convention `phi(0) = 1`, `phi(1) = 0`.
pub fn integer_values(family: &WaveletFamily) -> Result<Vec<f64>, WaveletError> {
    let taps = family.lowpass();
    let width = family.support_width();
    if width == 1 {
        return Ok(vec![1.0, 0.0]);
    }
    // phi vanishes at both support ends; solve on the interior integers.
    let n = width - 1;
    let refinement = DMatrix::from_fn(n, n, |a, b| {
        let idx = 2 * (a as i64 + 1) - (b as i64 + 1);
        let tap = usize::try_from(idx).ok().and_then(|i| taps.get(i)).copied();
        let m = std::f64::consts::SQRT_2 * tap.unwrap_or(0.0);
        if a == b {
            m - 1.0
        } else {
            m
        }
    });
    let svd = refinement.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = svd.singular_values[order[0]];
    let second = if n > 1 {
        svd.singular_values[order[1]]
    } else {
        f64::INFINITY
    };
    if smallest > 1e-10 || second <= 1e-10 {
        return Err(WaveletError::EigenvectorFailure {
            family: family.name().to_string(),
            detail: format!("singular values {smallest:e}, {second:e}"),
        });
    }
    let row = v_t.row(order[0]);
    let total: f64 = row.iter().sum();
    let mut values = vec![0.0; width + 1];
    for (i, v) in row.iter().enumerate() {
        values[i + 1] = v / total;
    }
    Ok(values)
}

/// Scaling and wavelet functions tabulated at `m / 2^J` over `[0, 2K-1]`.
#[derive(Debug, Clone)]
pub struct DyadicFunctionTable {
    family: WaveletFamily,
    depth: u32,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

impl DyadicFunctionTable {
    pub fn family(&self) -> &WaveletFamily {
        &self.family
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Integer support `[0, 2K-1]`.
    pub fn support(&self) -> (i64, i64) {
        (0, self.family.support_width() as i64)
    }

    /// Grid spacing `2^-J`.
    pub fn spacing(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    /// `phi(m / 2^J)`, zero outside the support.
    pub fn phi_at_index(&self, m: i64) -> f64 {
        usize::try_from(m)
            .ok()
            .and_then(|i| self.phi.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Trapezoid rule over the tabulated support.
    pub fn phi_integral(&self) -> f64 {
        trapezoid(&self.phi, self.spacing())
    }

    pub fn psi_integral(&self) -> f64 {
        trapezoid(&self.psi, self.spacing())
    }

    /// Largest refinement residual `|phi(x) - sqrt2 sum_k h_k phi(2x-k)|` over
    /// the tabulated points whose doubled argument is still on the grid.
    pub fn refinement_residual(&self) -> f64 {
        let taps = self.family.lowpass();
        let unit = 1i64 << self.depth;
        let len = self.phi.len() as i64;
        let mut worst: f64 = 0.0;
        // 2x lands on the grid for every x; interior points only
        for m in 1..len - 1 {
            let rhs: f64 = taps
                .iter()
                .enumerate()
                .map(|(k, h)| h * self.phi_at_index(2 * m - k as i64 * unit))
                .sum::<f64>()
                * std::f64::consts::SQRT_2;
            worst = worst.max((self.phi[m as usize] - rhs).abs());
        }
        worst
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values.iter().sum();
    (inner - 0.5 * (values[0] + values[values.len() - 1])) * step
}

/// Evaluates `phi` and `psi` on the dyadic grid of depth `J` (`1 <= J <= 14`).
pub fn cascade_table(family: &WaveletFamily, depth: u32) -> Result<DyadicFunctionTable, WaveletError> {
    if !(1..=MAX_CASCADE_DEPTH).contains(&depth) {
        return Err(WaveletError::DepthOutOfRange(depth));
    }
    let ints = integer_values(family)?;
    let width = family.support_width();
    let unit = 1usize << depth;
    let len = width * unit + 1;
    let taps = family.lowpass();

    let mut phi = vec![0.0; len];
    for (i, v) in ints.iter().enumerate() {
        phi[i * unit] = *v;
    }
    for level in 1..=depth {
        let stride = 1usize << (depth - level);
        let mut m = stride;
        while m < len {
            let mut acc = 0.0;
            for (k, h) in taps.iter().enumerate() {
                let idx = 2 * m as i64 - (k * unit) as i64;
                if idx >= 0 && (idx as usize) < len {
                    acc += h * phi[idx as usize];
                }
            }
            phi[m] = std::f64::consts::SQRT_2 * acc;
            m += 2 * stride;
        }
    }

    let psi = (0..len)
        .map(|m| {
            let acc: f64 = family
                .highpass()
                .iter()
                .enumerate()
                .map(|(k, g)| {
                    let idx = 2 * m as i64 - (k * unit) as i64;
                    if idx >= 0 && (idx as usize) < len {
                        g * phi[idx as usize]
                    } else {
                        0.0
                    }
                })
                .sum();
            std::f64::consts::SQRT_2 * acc
        })
        .collect();

    Ok(DyadicFunctionTable {
        family: family.clone(),
        depth,
        phi,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<WaveletFamily> {
        supported_family_names()
            .iter()
            .map(|n| make_family(n).unwrap())
            .collect()
    }

    /// Exact product and compensated summation, so the only error left is
    /// the rounding of the taps themselves.
    fn moment(taps: &[f64], power: u32) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (k, &h) in taps.iter().enumerate() {
            let w = (k as f64).powi(power as i32);
            let w = if k % 2 == 0 { w } else { -w };
            let p = w * h;
            let p_err = w.mul_add(h, -p);
            let t = sum + p;
            let e = if sum.abs() >= p.abs() {
                (sum - t) + p
            } else {
                (p - t) + sum
            };
            sum = t;
            comp += e + p_err;
        }
        sum + comp
    }

    #[test]
    fn haar_taps() {
        let f = make_family("haar").unwrap();
        assert_eq!(f.lowpass(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert_eq!(f.highpass(), &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        assert_eq!(f.vanishing_moments(), 1);
    }

    #[test]
    fn daubechies_2_closed_form() {
        // (1+sqrt3, 3+sqrt3, 3-sqrt3, 1-sqrt3) / (4 sqrt2)
        let s3 = 3f64.sqrt();
        let d = 4.0 * std::f64::consts::SQRT_2;
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        let f = make_family("daubechies-2").unwrap();
        for (a, b) in f.lowpass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn daubechies_taps_match_reference_tables() {
        // Independent reference values (60-digit spectral factorization,
        // rounded to binary64).
        let d6_head = [0.11154074335010947, 0.49462389039845306];
        let d10_tail = [9.358867032006959e-05, -1.3264202894521244e-05];
        let d6 = make_family("daubechies-6").unwrap();
        let d10 = make_family("daubechies-10").unwrap();
        for (a, b) in d6.lowpass()[..2].iter().zip(d6_head) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        for (a, b) in d10.lowpass()[18..].iter().zip(d10_tail) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn table_agrees_with_runtime_factorization() {
        for k in 2..=MAX_DAUBECHIES_ORDER {
            let table = make_family(&format!("daubechies-{k}")).unwrap();
            let runtime = daubechies_lowpass(k);
            for (a, b) in table.lowpass().iter().zip(&runtime) {
                assert!((a - b).abs() < 1e-12, "K={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unknown_family_is_named() {
        let err = make_family("daubechies-99").unwrap_err();
        assert_eq!(err, WaveletError::UnknownFamily("daubechies-99".into()));
        assert!(err.to_string().contains("daubechies-99"));
        assert!(make_family("daubechies-1").is_err());
        assert!(make_family("symlet-4").is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        for name in supported_family_names() {
            let a = make_family(&name).unwrap();
            let b = make_family(&name).unwrap();
            let bits = |f: &WaveletFamily| f.lowpass().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b));
        }
    }

    #[test]
    fn lowpass_sums_to_sqrt2() {
        for f in all_families() {
            let s: f64 = f.lowpass().iter().sum();
            assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12, "{}: {s}", f.name());
        }
    }

    #[test]
    fn lowpass_is_orthonormal_under_even_shifts() {
        for f in all_families() {
            let h = f.lowpass();
            for m in 0..h.len() / 2 {
                let dot: f64 = (0..h.len() - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
                let target = if m == 0 { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-12, "{} m={m}: {dot}", f.name());
            }
        }
    }

    #[test]
    fn vanishing_moments_up_to_order_8() {
        for f in all_families().into_iter().filter(|f| f.vanishing_moments() <= 8) {
            for m in 0..f.vanishing_moments() as u32 {
                let v = moment(f.lowpass(), m);
                assert!(v.abs() < 1e-10, "{} m={m}: {v:e}", f.name());
            }
        }
    }

    /// With binary64 taps the literal sum `sum (-1)^k k^m h_k` for `K = 9, 10`
    /// bottoms out near `1e-9` / `1e-8`: the rounding of each tap is amplified
    /// by `k^m` up to `19^9`. Run with `--ignored` to see the shortfall.
    #[test]
    #[ignore = "binary64 tap rounding floor exceeds 1e-10 for K = 9, 10"]
    fn vanishing_moments_orders_9_and_10_absolute() {
        for f in all_families().into_iter().filter(|f| f.vanishing_moments() > 8) {
            for m in 0..f.vanishing_moments() as u32 {
                let v = moment(f.lowpass(), m);
                assert!(v.abs() < 1e-10, "{} m={m}: {v:e}", f.name());
            }
        }
    }

    #[test]
    fn vanishing_moments_orders_9_and_10_relative() {
        for f in all_families().into_iter().filter(|f| f.vanishing_moments() > 8) {
            for m in 0..f.vanishing_moments() as u32 {
                let scale: f64 = f
                    .lowpass()
                    .iter()
                    .enumerate()
                    .map(|(k, h)| (k as f64).powi(m as i32) * h.abs())
                    .sum();
                let v = moment(f.lowpass(), m);
                assert!(v.abs() < 1e-14 * scale.max(1.0), "{} m={m}: {v:e}", f.name());
            }
        }
    }

    #[test]
    fn haar_cascade_is_indicator() {
        let t = cascade_table(&make_family("haar").unwrap(), 4).unwrap();
        let phi = t.phi_values();
        assert_eq!(phi.len(), 17);
        assert!(phi[..16].iter().all(|&v| (v - 1.0).abs() < 1e-15), "{phi:?}");
        assert_eq!(phi[16], 0.0);
        assert!((t.phi_integral() - (1.0 - 0.5 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn daubechies_2_integer_values() {
        // Eigenvector of [[h1, h0], [h3, h2]] * sqrt2: phi(1) = (1+sqrt3)/2.
        let f = make_family("daubechies-2").unwrap();
        let v = integer_values(&f).unwrap();
        assert!((v[1] - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((v[2] - (1.0 - 3f64.sqrt()) / 2.0).abs() < 1e-14);
        let t = cascade_table(&f, 10).unwrap();
        assert_eq!(t.phi_values()[1024], v[1]);
        assert!(t.refinement_residual() < 1e-8);
    }

    #[test]
    fn cascade_integrates_to_one() {
        for f in all_families().into_iter().skip(1) {
            let t = cascade_table(&f, 10).unwrap();
            assert!((t.phi_integral() - 1.0).abs() < 1e-6, "{}", f.name());
            assert!(t.psi_integral().abs() < 1e-6, "{}", f.name());
            assert!(t.refinement_residual() < 1e-8, "{}", f.name());
        }
    }

    #[test]
    fn refinement_levels_agree() {
        for f in all_families() {
            let coarse = cascade_table(&f, 8).unwrap();
            let fine = cascade_table(&f, 9).unwrap();
            for (m, v) in coarse.phi_values().iter().enumerate() {
                assert!((fine.phi_values()[2 * m] - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn integer_translates_are_orthonormal() {
        for f in all_families().into_iter().skip(2) {
            let t = cascade_table(&f, 10).unwrap();
            let unit = 1i64 << 10;
            let len = t.phi_values().len() as i64;
            for k in 0..f.support_width() as i64 {
                let dot: f64 = (0..len)
                    .map(|m| t.phi_at_index(m) * t.phi_at_index(m - k * unit))
                    .sum::<f64>()
                    / unit as f64;
                let target = if k == 0 { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-3, "{} k={k}: {dot}", f.name());
            }
        }
    }

    #[test]
    fn depth_is_checked() {
        let f = make_family("daubechies-3").unwrap();
        assert_eq!(cascade_table(&f, 0).unwrap_err(), WaveletError::DepthOutOfRange(0));
        assert!(cascade_table(&f, 15).is_err());
    }

    #[test]
    fn admissibility_gate() {
        let haar = make_family("haar").unwrap();
        assert!(haar.admits_derivative(0));
        assert!(!haar.admits_derivative(1));
        let d6 = make_family("daubechies-6").unwrap();
        assert!(d6.admits_derivative(2));
        assert!(!d6.admits_derivative(3));
    }
}
