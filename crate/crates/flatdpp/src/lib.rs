//! Determinantal point processes through extended L-ensembles, with exact
//! samplers and constructors for the flat limits of kernel L-ensembles.
//!
//! The central type is [`Nnp`], a nonnegative pair `(L, V)` that parameterizes
//! every DPP on a finite ground set. Kernel matrices built from a
//! [`KernelSpec`] on a [`GroundSet`] converge, as the length-scale grows, to
//! the processes described by [`flatlimit`].

pub mod error;
pub mod flatlimit;
mod hp;
pub mod kernels;
pub mod linalg;
pub mod nnp;
pub mod poly;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use flatlimit::{
    fixed_limit, varying_limit, FixedRegime, PhasePoint, ProcessDescriptor, VaryingRegime,
};
pub use kernels::{builtin_kernels, kernel_by_name, kernel_matrix, GroundSet, KernelSpec, Smoothness};
pub use linalg::{LogDet, Spectrum, SymMatrix};
pub use nnp::{nnp_from_kernel, Nnp, SizeLaw};
pub use poly::{MonomialBasis, Wronskian};
pub use sampling::{rng_from_seed, RngState, Sample};
pub use verify::{enumerate_pmf, tv_distance, Graph, KernelMinors, PmfTable};
