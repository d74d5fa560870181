//! Periodic wavelet transforms, wavelet packets and operator compression.

mod compress;
mod fwt;
mod packet;

pub use compress::{compress_operator, nonstandard_form, CompressedOperator};
pub use fwt::{
    fwt_2d, fwt_forward_1d, fwt_inverse_1d, fwt_inverse_2d, pyramid_layout,
    standard_tensor_transform, MultiresolutionDecomposition,
};
pub use packet::{best_basis, packet_synthesis, shannon_cost, PacketBasis, PacketTree};


#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("coarse level {coarse} must be below the finest level {finest}")]
    CoarseLevel { coarse: usize, finest: usize },
    #[error("packet depth {depth} exceeds the finest level {finest}")]
    PacketDepth { depth: usize, finest: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),
}
