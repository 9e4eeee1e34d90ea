use crate::error::{Error, Result};
use crate::hermitian::{c, CMatrix, C64};

use super::spec::{matrix_from_json, ChannelFamily, ChannelSpec};
use super::QuantumChannel;

/// `[I, X, Y, Z]`.
pub fn pauli_matrices() -> [CMatrix; 4] {
    let o = C64::default();
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[o, c(1.0), c(1.0), o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), o, o, c(-1.0)]),
    ]
}

fn unit_interval(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::ParameterRange {
            name: name.into(),
            value: v,
            expected: "[0, 1]".into(),
        })
    }
}

fn from_weights(weights: &[f64], ops: &[CMatrix]) -> Vec<CMatrix> {
    weights.iter().zip(ops).map(|(&w, k)| k * c(w.sqrt())).collect()
}

/// `(1−p)ω + p·Tr(ω)·I/2` with Pauli weights `{1−3p/4, p/4, p/4, p/4}`.
pub fn depolarizing(p: f64) -> Result<QuantumChannel> {
    let p = unit_interval("p", p)?;
    let q = p / 4.0;
    let kraus = from_weights(&[1.0 - 3.0 * q, q, q, q], &pauli_matrices());
    Ok(QuantumChannel::new(kraus)?.with_spec(ChannelSpec::depolarizing(p)))
}

pub fn pauli(probs: [f64; 4]) -> Result<QuantumChannel> {
    for &w in &probs {
        unit_interval("probs", w)?;
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterRange {
            name: "probs".into(),
            value: total,
            expected: "entries summing to 1".into(),
        });
    }
    let kraus = from_weights(&probs, &pauli_matrices());
    Ok(QuantumChannel::new(kraus)?.with_spec(ChannelSpec::pauli(probs)))
}

/// Kraus pair `A₀ = |0⟩⟨0| + √(1−γ)|1⟩⟨1|`, `A₁ = √γ|0⟩⟨1|`.
pub fn amplitude_damping(gamma: f64) -> Result<QuantumChannel> {
    let g = unit_interval("gamma", gamma)?;
    let o = C64::default();
    let a0 = CMatrix::from_row_slice(2, 2, &[c(1.0), o, o, c((1.0 - g).sqrt())]);
    let a1 = CMatrix::from_row_slice(2, 2, &[o, c(g.sqrt()), o, o]);
    Ok(QuantumChannel::new(vec![a0, a1])?.with_spec(ChannelSpec::amplitude_damping(g)))
}

/// Qutrit platypus channel from the isometry
/// `F|0⟩ = √s|0⟩|0⟩ + √(1−s)|1⟩|1⟩`, `F|1⟩ = |2⟩|0⟩`, `F|2⟩ = |2⟩|1⟩`
/// (output ⊗ environment).
pub fn platypus(s: f64) -> Result<QuantumChannel> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::ParameterRange {
            name: "s".into(),
            value: s,
            expected: "(0, 1/2]".into(),
        });
    }
    let mut k0 = CMatrix::zeros(3, 3);
    let mut k1 = CMatrix::zeros(3, 3);
    k0[(0, 0)] = c(s.sqrt());
    k0[(2, 1)] = c(1.0);
    k1[(1, 0)] = c((1.0 - s).sqrt());
    k1[(2, 2)] = c(1.0);
    Ok(QuantumChannel::new(vec![k0, k1])?.with_spec(ChannelSpec::platypus(s)))
}

/// Dephasing with probability `p` followed by erasure to the flag `|2⟩`
/// with probability `q`; qubit in, qutrit out.
pub fn dephrasure(p: f64, q: f64) -> Result<QuantumChannel> {
    let p = unit_interval("p", p)?;
    let q = unit_interval("q", q)?;
    let mut embed = CMatrix::zeros(3, 2);
    embed[(0, 0)] = c(1.0);
    embed[(1, 1)] = c(1.0);
    let mut dephase = embed.clone();
    dephase[(1, 1)] = c(-1.0);
    let mut erase0 = CMatrix::zeros(3, 2);
    erase0[(2, 0)] = c(1.0);
    let mut erase1 = CMatrix::zeros(3, 2);
    erase1[(2, 1)] = c(1.0);
    let kraus = from_weights(
        &[(1.0 - q) * (1.0 - p), (1.0 - q) * p, q, q],
        &[embed, dephase, erase0, erase1],
    );
    Ok(QuantumChannel::new(kraus)?.with_spec(ChannelSpec::dephrasure(p, q)))
}

/// Qubit erasure channel with flag `|2⟩`.
pub fn erasure(q: f64) -> Result<QuantumChannel> {
    let q = unit_interval("q", q)?;
    let mut embed = CMatrix::zeros(3, 2);
    embed[(0, 0)] = c(1.0);
    embed[(1, 1)] = c(1.0);
    let mut erase0 = CMatrix::zeros(3, 2);
    erase0[(2, 0)] = c(1.0);
    let mut erase1 = CMatrix::zeros(3, 2);
    erase1[(2, 1)] = c(1.0);
    let kraus = from_weights(&[1.0 - q, q, q], &[embed, erase0, erase1]);
    Ok(QuantumChannel::new(kraus)?.with_spec(ChannelSpec::erasure(q)))
}

pub fn identity(dim: usize) -> QuantumChannel {
    QuantumChannel::new(vec![CMatrix::identity(dim, dim)])
        .expect("identity is trace preserving")
        .with_spec(ChannelSpec::identity(dim))
}

/// Builds the channel a [`ChannelSpec`] names.
pub fn builtin(spec: &ChannelSpec) -> Result<QuantumChannel> {
    match spec.family {
        ChannelFamily::Depolarizing => depolarizing(spec.scalar("p")?),
        ChannelFamily::Pauli => {
            let v = spec.vector("probs")?;
            let probs: [f64; 4] = v
                .try_into()
                .map_err(|_| Error::InvalidSpec(format!("`probs` needs 4 entries, got {}", v.len())))?;
            pauli(probs)
        }
        ChannelFamily::AmplitudeDamping => amplitude_damping(spec.scalar("gamma")?),
        ChannelFamily::Platypus => platypus(spec.scalar("s")?),
        ChannelFamily::Dephrasure => dephrasure(spec.scalar("p")?, spec.scalar("q")?),
        ChannelFamily::Erasure => erasure(spec.scalar("q")?),
        ChannelFamily::Identity => {
            let dim = match spec.scalar("dim") {
                Ok(d) => d,
                Err(Error::MissingParameter(_)) => 2.0,
                Err(e) => return Err(e),
            };
            if !(dim >= 1.0 && dim.fract() == 0.0 && dim <= super::DEFAULT_DIMENSION_CAP as f64) {
                return Err(Error::ParameterRange {
                    name: "dim".into(),
                    value: dim,
                    expected: "integer in [1, 256]".into(),
                });
            }
            Ok(identity(dim as usize))
        }
        ChannelFamily::CustomKraus => {
            let mats = spec
                .kraus
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("custom_kraus needs a `kraus` list".into()))?;
            let kraus = mats.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
            Ok(QuantumChannel::new(kraus)?.with_spec(spec.clone()))
        }
        ChannelFamily::Tensor => {
            let children = spec
                .children
                .as_ref()
                .filter(|c| !c.is_empty())
                .ok_or_else(|| Error::InvalidSpec("tensor needs a non-empty `children` list".into()))?;
            let built = children.iter().map(builtin).collect::<Result<Vec<_>>>()?;
            QuantumChannel::tensor_all(&built)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{DensityMatrix, HermitianOperator};

    fn close(a: &HermitianOperator, b: &HermitianOperator) -> bool {
        (a - b).frobenius_norm() < 1e-13
    }

    #[test]
    fn depolarizing_matches_closed_form_on_bloch_basis() {
        let p = 0.2;
        let ch = depolarizing(p).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let states = [
            DensityMatrix::basis(2, 0),
            DensityMatrix::basis(2, 1),
            DensityMatrix::pure(&[c(s), c(s)]).unwrap(),
            DensityMatrix::pure(&[c(s), C64::new(0.0, s)]).unwrap(),
        ];
        for rho in &states {
            let expected = &rho.op().scale(1.0 - p) + &HermitianOperator::identity(2).scale(p / 2.0);
            assert!(close(ch.apply(rho).unwrap().op(), &expected));
        }
        let out = ch.apply(&DensityMatrix::basis(2, 0)).unwrap();
        assert!(close(out.op(), &HermitianOperator::from_real_diagonal(&[1.0 - p / 2.0, p / 2.0])));
    }

    #[test]
    fn depolarizing_zero_is_identity_and_unital() {
        let rho = DensityMatrix::pure(&[c(0.6), C64::new(0.0, 0.8)]).unwrap();
        assert!(close(depolarizing(0.0).unwrap().apply(&rho).unwrap().op(), rho.op()));
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(close(depolarizing(0.7).unwrap().apply(&mixed).unwrap().op(), mixed.op()));
    }

    #[test]
    fn amplitude_damping_decays_excited_state() {
        let g = 0.35;
        let out = amplitude_damping(g).unwrap().apply(&DensityMatrix::basis(2, 1)).unwrap();
        assert!(close(out.op(), &HermitianOperator::from_real_diagonal(&[g, 1.0 - g])));
    }

    #[test]
    fn platypus_sends_one_to_two() {
        let out = platypus(0.3).unwrap().apply(&DensityMatrix::basis(3, 1)).unwrap();
        assert!(close(out.op(), DensityMatrix::basis(3, 2).op()));
        let out = platypus(0.3).unwrap().apply(&DensityMatrix::basis(3, 0)).unwrap();
        assert!(close(out.op(), &HermitianOperator::from_real_diagonal(&[0.3, 0.7, 0.0])));
    }

    #[test]
    fn dephrasure_flag_weight_is_q() {
        let q = 0.3;
        let ch = dephrasure(0.1, q).unwrap();
        assert_eq!((ch.dim_in(), ch.dim_out(), ch.dim_env()), (2, 3, 4));
        for rho in [
            DensityMatrix::basis(2, 0),
            DensityMatrix::maximally_mixed(2),
            DensityMatrix::pure(&[c(0.6), C64::new(0.0, 0.8)]).unwrap(),
        ] {
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix()[(2, 2)].re - q).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(depolarizing(1.2).is_err());
        assert!(platypus(0.0).is_err());
        assert!(platypus(0.6).is_err());
        assert!(amplitude_damping(-0.1).is_err());
        assert!(pauli([0.5, 0.2, 0.2, 0.2]).is_err());
    }

    #[test]
    fn builtin_dispatch_round_trips_spec() {
        let spec = ChannelSpec::tensor(vec![ChannelSpec::platypus(0.2), ChannelSpec::amplitude_damping(0.5)]);
        let ch = builtin(&spec).unwrap();
        assert_eq!((ch.dim_in(), ch.dim_out(), ch.dim_env()), (6, 6, 4));
        assert_eq!(ch.to_spec(), spec);
        let missing = ChannelSpec {
            family: ChannelFamily::Dephrasure,
            ..ChannelSpec::depolarizing(0.1)
        };
        assert!(matches!(builtin(&missing), Err(Error::MissingParameter(_))));
    }

    #[test]
    fn custom_spec_of_unlabelled_channel_rebuilds_it() {
        let ch = QuantumChannel::new(amplitude_damping(0.4).unwrap().kraus().to_vec()).unwrap();
        let rebuilt = builtin(&ch.to_spec()).unwrap();
        let rho = DensityMatrix::basis(2, 1);
        assert!(close(ch.apply(&rho).unwrap().op(), rebuilt.apply(&rho).unwrap().op()));
    }
}
