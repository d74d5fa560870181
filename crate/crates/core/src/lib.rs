#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of, clippy::too_many_arguments)]

pub mod connection;
pub mod cli;
pub mod diagnostics;
pub mod gdr;
pub mod moyal;
pub mod scales;
pub mod transform;
pub mod wavelets;
