//! Wavelet packets and best-basis search.

use std::collections::{BTreeMap, BTreeSet};

use super::fwt::{analysis_step, dyadic_level, synthesis_step};
use super::TransformError;
use crate::wavelets::WaveletFamily;

/// Full packet tree. Node `(l, b)` splits into `(l+1, 2b)` (lowpass)
/// and `(l+1, 2b+1)` (highpass); `(0, 0)` is the signal itself.
#[derive(Debug, Clone)]
pub struct PacketTree {
    nodes: Vec<Vec<Vec<f64>>>,
}

impl PacketTree {
    pub fn build(samples: &[f64], family: &WaveletFamily, max_depth: usize) -> Result<Self, TransformError> {
        let finest = dyadic_level(samples.len())?;
        if max_depth > finest {
            return Err(TransformError::PacketDepth { depth: max_depth, finest });
        }
        let mut nodes = vec![vec![samples.to_vec()]];
        for _ in 0..max_depth {
            let parent = nodes.last().expect("root present");
            let mut next = Vec::with_capacity(2 * parent.len());
            for x in parent {
                let half = x.len() / 2;
                let mut a = vec![0.0; half];
                let mut d = vec![0.0; half];
                analysis_step(x, family, &mut a, &mut d);
                next.push(a);
                next.push(d);
            }
            nodes.push(next);
        }
        Ok(Self { nodes })
    }

    pub fn depth(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, level: usize, band: usize) -> Option<&[f64]> {
        self.nodes.get(level)?.get(band).map(Vec::as_slice)
    }

    pub fn energy(&self) -> f64 {
        self.nodes[0][0].iter().map(|v| v * v).sum()
    }
}

/// Additive Shannon cost `-sum p ln p` with `p_i = c_i^2 / total_energy`.
/// Zero coefficients contribute nothing.
pub fn shannon_cost(coeffs: &[f64], total_energy: f64) -> f64 {
    if total_energy <= 0.0 {
        return 0.0;
    }
    coeffs
        .iter()
        .map(|c| c * c / total_energy)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketBasis {
    pub tree_depth: usize,
    pub selected_nodes: BTreeSet<(usize, usize)>,
    pub entropy: f64,
}

impl PacketBasis {
    /// True when the nodes cover `[0, 2^depth)` leaf slots exactly once.
    pub fn is_tiling(&self) -> bool {
        let slots = 1usize << self.tree_depth;
        let mut hit = vec![0u32; slots];
        for &(l, b) in &self.selected_nodes {
            if l > self.tree_depth || b >= 1 << l {
                return false;
            }
            let width = slots >> l;
            hit[b * width..(b + 1) * width].iter_mut().for_each(|h| *h += 1);
        }
        hit.iter().all(|&h| h == 1)
    }

    /// Entropy of an arbitrary node set on the given tree.
    pub fn cost_of(tree: &PacketTree, nodes: &BTreeSet<(usize, usize)>) -> f64 {
        let e = tree.energy();
        nodes
            .iter()
            .filter_map(|&(l, b)| tree.node(l, b))
            .map(|c| shannon_cost(c, e))
            .sum()
    }

    /// The dyadic wavelet basis `{(1,1), (2,1), ..., (D,1), (D,0)}`.
    pub fn standard_wavelet_nodes(depth: usize) -> BTreeSet<(usize, usize)> {
        let mut set: BTreeSet<_> = (1..=depth).map(|l| (l, 1)).collect();
        set.insert((depth, 0));
        if depth == 0 {
            set = BTreeSet::from([(0, 0)]);
        }
        set
    }
}

/// Bottom-up selection of the minimum-entropy tiling; a parent wins ties.
pub fn best_basis(samples: &[f64], family: &WaveletFamily, max_depth: usize) -> Result<PacketBasis, TransformError> {
    let tree = PacketTree::build(samples, family, max_depth)?;
    let energy = tree.energy();
    let mut best: Vec<(f64, BTreeSet<(usize, usize)>)> = tree.nodes[max_depth]
        .iter()
        .enumerate()
        .map(|(b, c)| (shannon_cost(c, energy), BTreeSet::from([(max_depth, b)])))
        .collect();
    for level in (0..max_depth).rev() {
        best = tree.nodes[level]
            .iter()
            .enumerate()
            .map(|(b, c)| {
                let own = shannon_cost(c, energy);
                let split = best[2 * b].0 + best[2 * b + 1].0;
                if own <= split {
                    (own, BTreeSet::from([(level, b)]))
                } else {
                    let mut nodes = best[2 * b].1.clone();
                    nodes.extend(best[2 * b + 1].1.iter().copied());
                    (split, nodes)
                }
            })
            .collect();
    }
    let (entropy, selected_nodes) = best.pop().expect("root entry");
    Ok(PacketBasis {
        tree_depth: max_depth,
        selected_nodes,
        entropy,
    })
}

/// Rebuilds a signal of length `len` from coefficients on a packet tiling.
pub fn packet_synthesis(
    coefficients: &BTreeMap<(usize, usize), Vec<f64>>,
    family: &WaveletFamily,
    len: usize,
) -> Result<Vec<f64>, TransformError> {
    let finest = dyadic_level(len)?;
    fn rebuild(
        level: usize,
        band: usize,
        len: usize,
        finest: usize,
        coefficients: &BTreeMap<(usize, usize), Vec<f64>>,
        family: &WaveletFamily,
    ) -> Result<Vec<f64>, TransformError> {
        if let Some(c) = coefficients.get(&(level, band)) {
            if c.len() != len {
                return Err(TransformError::StructuralMismatch(format!(
                    "node ({level}, {band}) has {} coefficients, expected {len}",
                    c.len()
                )));
            }
            return Ok(c.clone());
        }
        if level >= finest {
            return Err(TransformError::StructuralMismatch(format!(
                "coefficients do not cover node ({level}, {band})"
            )));
        }
        let a = rebuild(level + 1, 2 * band, len / 2, finest, coefficients, family)?;
        let d = rebuild(level + 1, 2 * band + 1, len / 2, finest, coefficients, family)?;
        let mut out = vec![0.0; len];
        synthesis_step(&a, &d, family, &mut out);
        Ok(out)
    }
    rebuild(0, 0, len, finest, coefficients, family)
}
