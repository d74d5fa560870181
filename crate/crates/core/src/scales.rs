//! Slow/fast multiresolution splitting and the Fock-like norm.

use ndarray::{ArrayD, IxDyn};

use crate::moyal::CoefficientField;
use crate::transform::{fwt_2d, fwt_inverse_2d, MultiresolutionDecomposition, TransformError};
use crate::wavelets::WaveletFamily;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalesError {
    #[error("slow level {slow} must satisfy {coarse} <= slow < {finest}")]
    LevelOutOfRange { slow: usize, coarse: usize, finest: usize },
    #[error("inconsistent component: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// 2-D pyramid of a field down to level `c`.
pub fn decompose(
    field: &CoefficientField,
    family: &WaveletFamily,
    coarse_level: usize,
) -> Result<MultiresolutionDecomposition, ScalesError> {
    Ok(fwt_2d(field.data.view(), family, coarse_level)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastPart {
    pub level: usize,
    /// Scale label `2^level`.
    pub nominal_frequency: f64,
    pub component: CoefficientField,
    /// Sum of squared detail coefficients at this level.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleDecomposition {
    pub slow_part: CoefficientField,
    pub slow_energy: f64,
    pub fast_parts: Vec<FastPart>,
    /// `‖slow + Σ fast - input‖ / ‖input‖`.
    pub reconstruction_error: f64,
}

impl ScaleDecomposition {
    pub fn total_energy(&self) -> f64 {
        self.slow_energy + self.fast_parts.iter().map(|f| f.energy).sum::<f64>()
    }

    /// `(level, energy, fraction)` rows; the slow part comes first with no level.
    pub fn energy_rows(&self) -> Vec<(Option<usize>, f64, f64)> {
        let total = self.total_energy();
        let frac = |e: f64| if total > 0.0 { e / total } else { 0.0 };
        let mut rows = vec![(None, self.slow_energy, frac(self.slow_energy))];
        rows.extend(self.fast_parts.iter().map(|f| (Some(f.level), f.energy, frac(f.energy))));
        rows
    }

    pub fn fast_fraction(&self) -> f64 {
        let total = self.total_energy();
        if total == 0.0 {
            0.0
        } else {
            (total - self.slow_energy) / total
        }
    }
}

/// Keeps `V_c` and the details below `slow_level` in the slow part; every
/// remaining detail level becomes its own fast component.
pub fn slow_fast_split(
    field: &CoefficientField,
    family: &WaveletFamily,
    coarse_level: usize,
    slow_level: usize,
) -> Result<ScaleDecomposition, ScalesError> {
    let decomp = decompose(field, family, coarse_level)?;
    let finest = decomp.finest_level();
    if slow_level < coarse_level || slow_level >= finest {
        return Err(ScalesError::LevelOutOfRange {
            slow: slow_level,
            coarse: coarse_level,
            finest,
        });
    }
    let energies = decomp.energy_per_level();
    let with_field = |data| CoefficientField {
        grid: field.grid.clone(),
        data,
        time: field.time,
    };

    let mut slow = decomp.clone();
    for (level, blocks) in slow.detail_blocks_mut().iter_mut() {
        if *level >= slow_level {
            blocks.iter_mut().for_each(|b| b.fill(0.0));
        }
    }
    let slow_energy = decomp.coarse_energy() + energies.range(..slow_level).map(|(_, e)| e).sum::<f64>();
    let slow_part = with_field(fwt_inverse_2d(&slow, family)?);

    let mut total = slow_part.data.clone();
    let mut fast_parts = Vec::new();
    for level in slow_level..finest {
        let mut only = decomp.clone();
        only.coarse_block_mut().fill(0.0);
        for (l, blocks) in only.detail_blocks_mut().iter_mut() {
            if *l != level {
                blocks.iter_mut().for_each(|b| b.fill(0.0));
            }
        }
        let component = with_field(fwt_inverse_2d(&only, family)?);
        total += &component.data;
        fast_parts.push(FastPart {
            level,
            nominal_frequency: 2f64.powi(level as i32),
            component,
            energy: energies[&level],
        });
    }
    let err: f64 = total.iter().zip(&field.data).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = field.l2();
    Ok(ScaleDecomposition {
        slow_part,
        slow_energy,
        fast_parts,
        reconstruction_error: if norm > 0.0 { err / norm } else { err },
    })
}

/// One n-particle member of a Fock-like state list, with its cell measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FockComponent {
    pub values: ArrayD<f64>,
    /// Product of the per-axis cell weights `Π μ_ℓ`.
    pub cell_weight: f64,
}

impl FockComponent {
    pub fn new(values: ArrayD<f64>, cell_weight: f64) -> Self {
        Self { values, cell_weight }
    }

    /// One-particle component with Lebesgue cell weights `Δq Δp`.
    pub fn from_field(field: &CoefficientField) -> Self {
        Self {
            values: field.data.clone().into_dyn(),
            cell_weight: field.grid.cell_area(),
        }
    }

    /// Two-particle product state `W_a(q₁, p₁) W_b(q₂, p₂)`.
    pub fn product(a: &CoefficientField, b: &CoefficientField) -> Self {
        let (n1, m1) = a.data.dim();
        let (n2, m2) = b.data.dim();
        let values = ArrayD::from_shape_fn(IxDyn(&[n1, m1, n2, m2]), |ix| a.data[(ix[0], ix[1])] * b.data[(ix[2], ix[3])]);
        Self {
            values,
            cell_weight: a.grid.cell_area() * b.grid.cell_area(),
        }
    }

    pub fn particles(&self) -> usize {
        self.values.ndim() / 2
    }

    fn weighted_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_weight
    }
}

/// `W₀` plus n-particle components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockStateList {
    pub w0: f64,
    pub states: Vec<FockComponent>,
}

/// `√(W₀² + Σ_i ∫ W_i² Π μ_ℓ)`.
pub fn fock_norm(list: &FockStateList) -> Result<f64, ScalesError> {
    let mut total = list.w0 * list.w0;
    for (i, c) in list.states.iter().enumerate() {
        if !(c.cell_weight > 0.0) || !c.cell_weight.is_finite() {
            return Err(ScalesError::Inconsistent(format!("component {i} has cell weight {}", c.cell_weight)));
        }
        let nd = c.values.ndim();
        if nd == 0 || nd % 2 != 0 || nd > 4 {
            return Err(ScalesError::Inconsistent(format!(
                "component {i} has {nd} axes; expected 2 (one particle) or 4 (two particles)"
            )));
        }
        total += c.weighted_square();
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::coherent_state;
    use crate::moyal::PhaseSpaceGrid;
    use crate::transform::{fwt_2d, fwt_inverse_2d};
    use crate::wavelets::make_family;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d6() -> WaveletFamily {
        make_family("daubechies-6").unwrap()
    }

    fn random_field(grid: &PhaseSpaceGrid, seed: u64) -> CoefficientField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CoefficientField::from_fn(grid, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn constant_field_has_no_detail_energy() {
        let g = PhaseSpaceGrid::symmetric(4.0, 6).unwrap();
        let f = CoefficientField::from_fn(&g, |_, _| 2.5);
        let d = decompose(&f, &d6(), 1).unwrap();
        assert!(d.energy_per_level().values().all(|e| *e < 1e-20));
    }

    #[test]
    fn smooth_gaussian_has_little_fine_detail() {
        let g = PhaseSpaceGrid::symmetric(8.0, 8).unwrap();
        let f = coherent_state(0.5, -0.3, 1.0, &g);
        let d = decompose(&f, &d6(), 2).unwrap();
        let fine = d.energy_per_level()[&7];
        assert!(fine <= 1e-6 * d.total_energy(), "{}", fine / d.total_energy());
    }

    #[test]
    fn single_basis_function_lands_in_one_block() {
        let g = PhaseSpaceGrid::symmetric(4.0, 6).unwrap();
        let f = d6();
        let mut d = fwt_2d(Array2::<f64>::zeros((64, 64)).view(), &f, 2).unwrap();
        d.detail_blocks_mut().get_mut(&4).unwrap()[2][(3, 5)] = 1.0;
        let field = CoefficientField::new(g, fwt_inverse_2d(&d, &f).unwrap(), 0.0).unwrap();
        let back = decompose(&field, &f, 2).unwrap();
        let e = back.energy_per_level();
        assert!((e[&4] - 1.0).abs() < 1e-12);
        assert!(e.iter().filter(|(l, _)| **l != 4).all(|(_, v)| *v < 1e-20));
    }

    #[test]
    fn split_recovers_summands() {
        let g = PhaseSpaceGrid::symmetric(6.0, 6).unwrap();
        let f = d6();
        let tau = 2.0 * std::f64::consts::PI / 12.0;
        let slow = CoefficientField::from_fn(&g, |q, p| (tau * q).cos() * (tau * p).sin());
        let mut d = fwt_2d(Array2::<f64>::zeros((64, 64)).view(), &f, 1).unwrap();
        d.detail_blocks_mut().get_mut(&5).unwrap()[0][(10, 12)] = 0.3;
        let wavelet = fwt_inverse_2d(&d, &f).unwrap();
        let mut sum = slow.clone();
        sum.data += &wavelet;
        // one period across the box has negligible level-5 content
        let split = slow_fast_split(&sum, &f, 1, 5).unwrap();
        let err_fast = (&split.fast_parts[0].component.data - &wavelet).mapv(f64::abs).fold(0.0f64, |a, b| a.max(*b));
        assert!(err_fast < 1e-6, "{err_fast}");
        assert!(split.reconstruction_error < 1e-10);
    }

    #[test]
    fn split_reconstructs_random_fields() {
        let g = PhaseSpaceGrid::symmetric(3.0, 6).unwrap();
        for seed in 0..5 {
            let w = random_field(&g, seed);
            let s = slow_fast_split(&w, &d6(), 1, 3).unwrap();
            assert!(s.reconstruction_error <= 1e-10);
            let total: f64 = w.data.iter().map(|v| v * v).sum();
            assert!((s.total_energy() - total).abs() <= 1e-10 * total);
            for part in &s.fast_parts {
                let e: f64 = part.component.data.iter().map(|v| v * v).sum();
                assert!((e - part.energy).abs() <= 1e-10 * total);
            }
        }
    }

    #[test]
    fn level_range_is_checked() {
        let g = PhaseSpaceGrid::symmetric(3.0, 5).unwrap();
        let w = random_field(&g, 1);
        assert!(matches!(
            slow_fast_split(&w, &d6(), 1, 5),
            Err(ScalesError::LevelOutOfRange { slow: 5, .. })
        ));
        assert!(slow_fast_split(&w, &d6(), 2, 1).is_err());
    }

    #[test]
    fn fock_norm_examples() {
        let vac = FockStateList { w0: 3.0, states: vec![] };
        assert_eq!(fock_norm(&vac).unwrap(), 3.0);

        let mut unit = ArrayD::zeros(IxDyn(&[8, 8]));
        unit[[2, 3]] = 1.0;
        let one = FockStateList {
            w0: 0.0,
            states: vec![FockComponent::new(unit, 1.0)],
        };
        assert!((fock_norm(&one).unwrap() - 1.0).abs() < 1e-10);

        let g = PhaseSpaceGrid::symmetric(5.0, 5).unwrap();
        let a = FockComponent::from_field(&coherent_state(0.0, 0.0, 1.0, &g));
        let b = FockComponent::product(&coherent_state(1.0, 0.0, 1.0, &g), &coherent_state(0.0, 1.0, 1.0, &g));
        let na = fock_norm(&FockStateList { w0: 0.0, states: vec![a.clone()] }).unwrap();
        let nb = fock_norm(&FockStateList { w0: 0.0, states: vec![b.clone()] }).unwrap();
        let both = fock_norm(&FockStateList { w0: 0.0, states: vec![a, b] }).unwrap();
        assert!((both * both - na * na - nb * nb).abs() <= 1e-12);
    }

    #[test]
    fn fock_rejects_bad_components() {
        let bad = FockStateList {
            w0: 0.0,
            states: vec![FockComponent::new(ArrayD::zeros(IxDyn(&[2, 2, 2])), 1.0)],
        };
        assert!(fock_norm(&bad).is_err());
        let neg = FockStateList {
            w0: 0.0,
            states: vec![FockComponent::new(ArrayD::zeros(IxDyn(&[2, 2])), -1.0)],
        };
        assert!(fock_norm(&neg).is_err());
    }

    fn list_strategy() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>)> {
        (-5.0f64..5.0, prop::collection::vec(-1.0f64..1.0, 16), prop::collection::vec(-1.0f64..1.0, 16))
    }

    fn list(w0: f64, v: &[f64]) -> FockStateList {
        FockStateList {
            w0,
            states: vec![FockComponent::new(ArrayD::from_shape_vec(IxDyn(&[4, 4]), v.to_vec()).unwrap(), 0.25)],
        }
    }

    proptest! {
        #[test]
        fn fock_norm_is_a_norm((w0, x, y) in list_strategy(), w1 in -5.0f64..5.0, alpha in -3.0f64..3.0) {
            let a = list(w0, &x);
            let b = list(w1, &y);
            let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
            let ab = list(w0 + w1, &sum);
            prop_assert!(fock_norm(&ab).unwrap() <= fock_norm(&a).unwrap() + fock_norm(&b).unwrap() + 1e-12);
            let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            let sa = list(alpha * w0, &scaled);
            prop_assert!((fock_norm(&sa).unwrap() - alpha.abs() * fock_norm(&a).unwrap()).abs() <= 1e-12);
        }
    }
}
