//! Seeded random instances for property checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::QuantumChannel;
use crate::hermitian::{CMatrix, DensityMatrix, HermitianOperator, C64};
use crate::info::Ensemble;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn pure_state<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let v = ginibre(rng, dim, 1);
    DensityMatrix::pure(v.as_slice()).expect("non-zero Gaussian vector")
}

/// Full-rank state `(1−t)·GG†/Tr + t·I/d`; every eigenvalue is at least `t/d`.
pub fn density<R: Rng>(rng: &mut R, dim: usize, t: f64) -> DensityMatrix {
    let g = ginibre(rng, dim, dim);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mixed = HermitianOperator::identity(dim).scale(t / dim as f64);
    let op = &HermitianOperator::new(w * C64::new((1.0 - t) / tr, 0.0)).expect("Hermitian by construction") + &mixed;
    DensityMatrix::new(op).expect("state by construction")
}

/// Traceless Hermitian operator with unit Frobenius norm.
pub fn traceless<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    let h = HermitianOperator::new((&g + g.adjoint()) * C64::new(0.5, 0.0)).expect("Hermitian by construction");
    let shifted = &h - &HermitianOperator::identity(dim).scale(h.trace() / dim as f64);
    let n = shifted.frobenius_norm();
    shifted.scale(1.0 / n)
}

/// Channel from a random isometry `C^{d_in} → C^{d_out} ⊗ C^{kraus}`.
pub fn channel<R: Rng>(rng: &mut R, dim_in: usize, dim_out: usize, kraus: usize) -> QuantumChannel {
    assert!(dim_out * kraus >= dim_in, "isometry needs dim_out·kraus ≥ dim_in");
    let v = ginibre(rng, dim_out * kraus, dim_in).qr().q();
    let ops = (0..kraus)
        .map(|k| v.rows(k * dim_out, dim_out).into_owned())
        .collect();
    QuantumChannel::new(ops).expect("isometry gives a trace-preserving map")
}

/// Ensemble of `size` random states (mixed with probability 1/2) with
/// random weights.
pub fn ensemble<R: Rng>(rng: &mut R, dim: usize, size: usize) -> Ensemble {
    let raw: Vec<f64> = (0..size).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..size - 1].iter().sum();
    weights[size - 1] = 1.0 - head;
    let states = (0..size)
        .map(|_| {
            if rng.random_bool(0.5) {
                pure_state(rng, dim)
            } else {
                density(rng, dim, 0.1)
            }
        })
        .collect();
    Ensemble::new(weights, states).expect("valid by construction")
}
