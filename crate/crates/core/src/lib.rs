//! Coherent information of finite-dimensional quantum channels and
//! perturbative tests for suboptimality of candidate input states.
//!
//! The library is layered: [`hermitian`] provides spectral data,
//! [`channel`] builds and combines channels, [`info`] evaluates entropic
//! quantities, [`perturbation`] computes derivative data for perturbed
//! states, and [`criteria`] / [`detectors`] turn that data into verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod criteria;
pub mod detectors;
pub mod error;
pub mod families;
pub mod hermitian;
pub mod info;
pub mod perturbation;
pub mod random;
pub mod tolerances;

pub use channel::{ChannelFamily, ChannelSpec, QuantumChannel};
pub use error::{Error, Result};
pub use hermitian::{
    kernel_projector, psd_min_eig, reduced_resolvent, spectral_decompose, spectral_decompose_default, CMatrix,
    DensityMatrix, HermitianOperator, Projector, SpectralDecomposition, C64,
};
pub use tolerances::Tolerances;
