//! Fixtures shared by the benchmarks.

use flatdpp::poly::vandermonde;
use flatdpp::{kernel_matrix, GroundSet, KernelSpec, Nnp};

pub fn ground_set(n: usize, d: usize) -> GroundSet {
    GroundSet::uniform(n, d, 7).expect("distinct uniform points")
}

/// A Gaussian-kernel pair with `V` the affine Vandermonde matrix.
pub fn kernel_pair(n: usize, d: usize) -> Nnp {
    let gs = ground_set(n, d);
    let l = kernel_matrix(&KernelSpec::gaussian(), &gs, 1.0).expect("positive ε");
    Nnp::new(l, vandermonde(&gs, 1)).expect("PSD kernel")
}
