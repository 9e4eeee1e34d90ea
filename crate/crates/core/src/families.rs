//! Ready-made perturbation families and parameter boundaries.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hermitian::{c, DensityMatrix, HermitianOperator, C64};
use crate::perturbation::PerturbationFamily;

/// Two-qubit family at `I/4` with `A₁ = |ψ⟩⟨ψ| − I/4`, `|ψ⟩ = |+⟩|0⟩`.
pub fn plus_zero_pair() -> PerturbationFamily {
    let zero = C64::default();
    let psi = [c(FRAC_1_SQRT_2), zero, c(FRAC_1_SQRT_2), zero];
    let a1 = &HermitianOperator::outer(&psi) - &HermitianOperator::identity(4).scale(0.25);
    PerturbationFamily::first_order(DensityMatrix::maximally_mixed(4), a1).expect("traceless by construction")
}

/// Qubit family `ρ(ε) = |0⟩⟨0| − εσ_Z`.
pub fn z_flip() -> PerturbationFamily {
    PerturbationFamily::first_order(DensityMatrix::basis(2, 0), HermitianOperator::from_real_diagonal(&[-1.0, 1.0]))
        .expect("traceless by construction")
}

/// Qutrit ⊗ qubit family at `diag(1−w, 0, w) ⊗ |0⟩⟨0|` with
/// `A₁ = wa(|11⟩⟨20| + |20⟩⟨11|)` and `A₂ = w(|11⟩⟨11| − |20⟩⟨20|)`.
/// `ρ(ε)` is a state exactly when `a² ≤ 1 − ε²`.
pub fn platypus_damping(w: f64, a: f64) -> Result<PerturbationFamily> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::ParameterRange {
            name: "w".into(),
            value: w,
            expected: "(0, 1)".into(),
        });
    }
    if !(a.abs() <= 1.0) {
        return Err(Error::ParameterRange {
            name: "a".into(),
            value: a,
            expected: "[-1, 1]".into(),
        });
    }
    const I11: usize = 3;
    const I20: usize = 4;
    let base = DensityMatrix::from_diagonal(&[1.0 - w, 0.0, 0.0, 0.0, w, 0.0])?;
    let mut a1 = vec![vec![0.0; 6]; 6];
    a1[I11][I20] = w * a;
    a1[I20][I11] = w * a;
    let rows: Vec<&[f64]> = a1.iter().map(Vec::as_slice).collect();
    let a1 = HermitianOperator::from_real_rows(&rows)?;
    let mut d2 = [0.0; 6];
    d2[I11] = w;
    d2[I20] = -w;
    PerturbationFamily::new(base, a1, HermitianOperator::from_real_diagonal(&d2))
}

/// Upper end `(1−s+sw)/(2−2s−w+2sw)` of the damping interval on which the
/// kernel second-order comparison favours the product channel.
pub fn platypus_damping_boundary(s: f64, w: f64) -> f64 {
    (1.0 - s + s * w) / (2.0 - 2.0 * s - w + 2.0 * s * w)
}

/// Erasure probability `(1−2p)²/(1+(1−2p)²)` bounding the dephrasure region
/// where the diagonal line carries positive coherent information near `|0⟩`.
pub fn dephrasure_region_boundary(p: f64) -> f64 {
    let t = (1.0 - 2.0 * p).powi(2);
    t / (1.0 + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_traceless_and_sized() {
        assert_eq!(plus_zero_pair().dim(), 4);
        assert_eq!(z_flip().dim(), 2);
        let f = platypus_damping(0.3, 0.99).unwrap();
        assert_eq!(f.dim(), 6);
        assert!(f.a1().trace().abs() < 1e-15 && f.a2().trace().abs() < 1e-15);
        assert!(platypus_damping(1.2, 0.5).is_err());
    }

    #[test]
    fn boundaries() {
        assert!((platypus_damping_boundary(0.2, 0.3) - 0.86 / 1.42).abs() < 1e-15);
        assert!((dephrasure_region_boundary(0.1) - 0.64 / 1.64).abs() < 1e-15);
    }
}
