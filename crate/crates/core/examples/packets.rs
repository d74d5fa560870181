//! Best-basis search over a wavelet packet tree.

use std::collections::BTreeSet;

use wigner_mra::transform::{best_basis, PacketBasis, PacketTree};
use wigner_mra::wavelets::make_family;

fn main() {
    let n = 512;
    let depth = 6;
    let family = make_family("daubechies-8").unwrap();
    // two tones sitting in the middle of packet bands, badly matched by octaves
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64;
            (0.9 * t).cos() + 0.5 * (2.3 * t).sin()
        })
        .collect();

    let tree = PacketTree::build(&x, &family, depth).unwrap();
    let basis = best_basis(&x, &family, depth).unwrap();
    let root = PacketBasis::cost_of(&tree, &BTreeSet::from([(0, 0)]));
    let wavelet = PacketBasis::cost_of(&tree, &PacketBasis::standard_wavelet_nodes(depth));

    println!("shannon cost: identity {root:.4}, wavelet {wavelet:.4}, best {:.4}", basis.entropy);
    println!("best tiling ({} nodes, valid {}):", basis.selected_nodes.len(), basis.is_tiling());
    for (level, band) in &basis.selected_nodes {
        let energy: f64 = tree.node(*level, *band).unwrap().iter().map(|c| c * c).sum();
        println!("  level {level} band {band:>2}  energy fraction {:.4}", energy / tree.energy());
    }
}
