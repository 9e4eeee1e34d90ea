//! Quantum channels in Kraus form.
//!
//! A channel `ρ ↦ Σ_k K_k ρ K_k†` carries its Kraus list; the Stinespring
//! isometry is implicit, `V|ψ⟩ = Σ_k (K_k|ψ⟩) ⊗ |k⟩`. The complement is taken in
//! that Kraus-index environment basis, so `[𝒩ᶜ(ρ)]_{kl} = Tr(K_k ρ K_l†)`.

mod builtin;
mod spec;

pub use builtin::{
    amplitude_damping, builtin, dephrasure, depolarizing, erasure, identity, pauli, pauli_matrices, platypus,
};
pub use spec::{matrix_from_json, matrix_to_json, ChannelFamily, ChannelSpec, JsonMatrix, ParamValue};

use crate::error::{Error, Result};
use crate::hermitian::{c, CMatrix, DensityMatrix, HermitianOperator};
use crate::tolerances::Tolerances;

pub const DEFAULT_DIMENSION_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    residual: f64,
    spec: Option<ChannelSpec>,
}

impl QuantumChannel {
    /// Validated channel from a Kraus list.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus, Tolerances::default().cptp)
    }

    pub fn with_tolerance(kraus: Vec<CMatrix>, cptp_tol: f64) -> Result<Self> {
        let first = kraus.first().ok_or(Error::NoKraus)?;
        let (dim_out, dim_in) = first.shape();
        if dim_out == 0 || dim_in == 0 {
            return Err(Error::NotSquare {
                rows: dim_out,
                cols: dim_in,
            });
        }
        for (index, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::KrausShape {
                    index,
                    rows: k.nrows(),
                    cols: k.ncols(),
                    expected_rows: dim_out,
                    expected_cols: dim_in,
                });
            }
        }
        let residual = cptp_residual(&kraus, dim_in);
        if !(residual <= cptp_tol) {
            return Err(Error::NotTracePreserving {
                residual,
                tolerance: cptp_tol,
            });
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            residual,
            spec: None,
        })
    }

    pub(crate) fn with_spec(mut self, spec: ChannelSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_env(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `‖Σ_k K_k†K_k − I‖_F` recorded at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The spec this channel was built from, or a `custom_kraus` spec
    /// carrying the Kraus matrices.
    pub fn to_spec(&self) -> ChannelSpec {
        self.spec
            .clone()
            .unwrap_or_else(|| ChannelSpec::custom_kraus(self.kraus.iter().map(matrix_to_json).collect()))
    }

    /// Linear action on an arbitrary Hermitian operator (traceless directions included).
    pub fn apply_operator(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: x.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::symmetrized(out))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.op())?;
        DensityMatrix::with_tolerances(out, &Tolerances::default())
    }

    /// Canonical complementary channel. Its Kraus operators are
    /// `(L_m)_{k,j} = (K_k)_{m,j}`, one per output basis vector.
    pub fn complement(&self) -> QuantumChannel {
        let env = self.dim_env();
        let kraus: Vec<CMatrix> = (0..self.dim_out)
            .map(|m| CMatrix::from_fn(env, self.dim_in, |k, j| self.kraus[k][(m, j)]))
            .collect();
        let residual = cptp_residual(&kraus, self.dim_in);
        QuantumChannel {
            dim_in: self.dim_in,
            dim_out: env,
            kraus,
            residual,
            spec: None,
        }
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        self.tensor_with_cap(other, DEFAULT_DIMENSION_CAP)
    }

    /// Kraus set `{K_i ⊗ M_j}` ordered `i·dim_env(other) + j`.
    pub fn tensor_with_cap(&self, other: &QuantumChannel, cap: usize) -> Result<QuantumChannel> {
        let dims = [
            self.dim_in * other.dim_in,
            self.dim_out * other.dim_out,
            self.dim_env() * other.dim_env(),
        ];
        if let Some(&dim) = dims.iter().find(|&&d| d > cap) {
            return Err(Error::DimensionCap { dim, cap });
        }
        let mut kraus = Vec::with_capacity(dims[2]);
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        let residual = cptp_residual(&kraus, dims[0]);
        let spec = match (&self.spec, &other.spec) {
            (Some(a), Some(b)) => Some(ChannelSpec::tensor(vec![a.clone(), b.clone()])),
            _ => None,
        };
        Ok(QuantumChannel {
            dim_in: dims[0],
            dim_out: dims[1],
            kraus,
            residual,
            spec,
        })
    }

    /// Tensor product of a non-empty list, left to right.
    pub fn tensor_all(channels: &[QuantumChannel]) -> Result<QuantumChannel> {
        let (first, rest) = channels.split_first().ok_or(Error::NoKraus)?;
        rest.iter().try_fold(first.clone(), |acc, ch| acc.tensor(ch))
    }
}

fn cptp_residual(kraus: &[CMatrix], dim_in: usize) -> f64 {
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - CMatrix::identity(dim_in, dim_in) * c(1.0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::C64;
    use approx::assert_abs_diff_eq;

    fn close(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn identity_channel_from_kraus() {
        let ch = QuantumChannel::new(vec![CMatrix::identity(2, 2)]).unwrap();
        assert_eq!(ch.dim_env(), 1);
        let rho = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        assert!(close(ch.apply(&rho).unwrap().op(), rho.op(), 1e-14));
    }

    #[test]
    fn rejects_non_trace_preserving_and_bad_shapes() {
        let k = CMatrix::identity(2, 2) * c(0.9);
        assert!(matches!(QuantumChannel::new(vec![k]), Err(Error::NotTracePreserving { .. })));
        assert!(matches!(QuantumChannel::new(vec![]), Err(Error::NoKraus)));
        let mixed = vec![CMatrix::identity(2, 2), CMatrix::zeros(3, 2)];
        assert!(matches!(QuantumChannel::new(mixed), Err(Error::KrausShape { index: 1, .. })));
    }

    #[test]
    fn complement_of_identity_is_trace() {
        let ch = identity(2);
        let comp = ch.complement();
        assert_eq!(comp.dim_out(), 1);
        let rho = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let out = comp.apply(&rho).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn complement_of_depolarizing_on_maximally_mixed() {
        let p = 0.2;
        let out = depolarizing(p).unwrap().complement().apply(&DensityMatrix::maximally_mixed(2)).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0]);
        assert!(close(out.op(), &expected, 1e-14));
    }

    #[test]
    fn complement_of_amplitude_damping_is_amplitude_damping() {
        let gamma = 0.3;
        let comp = amplitude_damping(gamma).unwrap().complement();
        let other = amplitude_damping(1.0 - gamma).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let states = [
            DensityMatrix::basis(2, 0),
            DensityMatrix::basis(2, 1),
            DensityMatrix::pure(&[c(s), c(s)]).unwrap(),
            DensityMatrix::pure(&[c(s), C64::new(0.0, s)]).unwrap(),
        ];
        for rho in &states {
            let a = comp.apply(rho).unwrap();
            let b = other.apply(rho).unwrap();
            assert!(close(a.op(), b.op(), 1e-14));
        }
        assert!(comp.residual() < 1e-14);
    }

    #[test]
    fn double_complement_reproduces_channel_action() {
        let ch = platypus(0.3).unwrap();
        let cc = ch.complement().complement();
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(close(cc.apply(&rho).unwrap().op(), ch.apply(&rho).unwrap().op(), 1e-14));
    }

    #[test]
    fn tensor_of_identities_and_unital_products() {
        let id = identity(2).tensor(&identity(2)).unwrap();
        assert_eq!((id.dim_in(), id.dim_out(), id.dim_env()), (4, 4, 1));
        let d = depolarizing(0.3).unwrap();
        let dd = d.tensor(&d).unwrap();
        let out = dd.apply(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(close(out.op(), DensityMatrix::maximally_mixed(4).op(), 1e-14));
    }

    #[test]
    fn tensor_respects_cap() {
        let d = depolarizing(0.1).unwrap();
        let dd = d.tensor(&d).unwrap();
        assert!(matches!(dd.tensor_with_cap(&d, 16), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn complement_of_tensor_is_tensor_of_complements() {
        let a = amplitude_damping(0.35).unwrap();
        let b = platypus(0.2).unwrap();
        let lhs = a.tensor(&b).unwrap().complement();
        let rhs = a.complement().tensor(&b.complement()).unwrap();
        let rho = DensityMatrix::maximally_mixed(2).tensor(&DensityMatrix::from_diagonal(&[0.5, 0.2, 0.3]).unwrap());
        let mut x = DensityMatrix::pure(&[c(0.6), c(0.8)]).unwrap().tensor(&DensityMatrix::basis(3, 2));
        assert!(close(lhs.apply(&rho).unwrap().op(), rhs.apply(&rho).unwrap().op(), 1e-13));
        x = DensityMatrix::new(&x.op().scale(0.5) + &rho.op().scale(0.5)).unwrap();
        assert!(close(lhs.apply(&x).unwrap().op(), rhs.apply(&x).unwrap().op(), 1e-13));
    }

    #[test]
    fn apply_checks_dimension() {
        let d = depolarizing(0.1).unwrap();
        assert!(matches!(
            d.apply(&DensityMatrix::maximally_mixed(3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }
}
