//! Entropic quantities in bits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, HermitianOperator};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFlag {
    /// An eigenvalue in `(0, kernel_tol]` was treated as zero.
    NearKernel,
    /// A small negative eigenvalue was clamped to zero.
    Clamped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoValue {
    pub value: f64,
    pub flags: BTreeSet<ConditionFlag>,
}

impl InfoValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            flags: BTreeSet::new(),
        }
    }

    fn combine(self, other: InfoValue, value: f64) -> Self {
        let mut flags = self.flags;
        flags.extend(other.flags);
        Self { value, flags }
    }
}

/// `−Σ q log₂ q` over already-validated probabilities, `0·log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

fn entropy_of(op: &HermitianOperator, tol: &Tolerances) -> Result<InfoValue> {
    let eigs = op.eigenvalues()?;
    let mut out = InfoValue::exact(0.0);
    for &l in &eigs {
        if l < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: l });
        }
        if l < 0.0 {
            out.flags.insert(ConditionFlag::Clamped);
        } else if l <= tol.kernel {
            if l > 0.0 {
                out.flags.insert(ConditionFlag::NearKernel);
            }
        } else {
            out.value -= l * l.log2();
        }
    }
    Ok(out)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<InfoValue> {
    entropy_of(rho.op(), &Tolerances::default())
}

pub fn von_neumann_entropy_with(rho: &DensityMatrix, tol: &Tolerances) -> Result<InfoValue> {
    entropy_of(rho.op(), tol)
}

/// `S(𝒩(ρ)) − S(𝒩ᶜ(ρ))`.
pub fn coherent_information(rho: &DensityMatrix, ch: &QuantumChannel) -> Result<InfoValue> {
    coherent_information_with(rho, ch, &Tolerances::default())
}

pub fn coherent_information_with(rho: &DensityMatrix, ch: &QuantumChannel, tol: &Tolerances) -> Result<InfoValue> {
    let out = entropy_of(&ch.apply_operator(rho.op())?, tol)?;
    let env = entropy_of(&ch.complement().apply_operator(rho.op())?, tol)?;
    let value = out.value - env.value;
    Ok(out.combine(env, value))
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        if weights.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidEnsemble(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// `Σ_i p_i ρ_i`.
    pub fn average(&self) -> Result<DensityMatrix> {
        let dim = self.states[0].dim();
        let sum = self
            .weights
            .iter()
            .zip(&self.states)
            .fold(HermitianOperator::zeros(dim), |acc, (&w, s)| &acc + &s.op().scale(w));
        DensityMatrix::new(sum)
    }
}

/// `I_c(ρ, 𝒩) − Σ_i p_i I_c(ρ_i, 𝒩)` with `ρ = Σ_i p_i ρ_i`.
pub fn private_information(ens: &Ensemble, ch: &QuantumChannel) -> Result<InfoValue> {
    let mut acc = coherent_information(&ens.average()?, ch)?;
    for (&w, s) in ens.weights.iter().zip(&ens.states) {
        let term = coherent_information(s, ch)?;
        let value = acc.value - w * term.value;
        acc = acc.combine(term, value);
    }
    Ok(acc)
}

/// `S(𝒩(ρ)) − Σ_i p_i S(𝒩(ρ_i))`.
pub fn holevo_information(ens: &Ensemble, ch: &QuantumChannel) -> Result<InfoValue> {
    let tol = Tolerances::default();
    let mut acc = entropy_of(&ch.apply_operator(ens.average()?.op())?, &tol)?;
    for (&w, s) in ens.weights.iter().zip(&ens.states) {
        let term = entropy_of(&ch.apply_operator(s.op())?, &tol)?;
        let value = acc.value - w * term.value;
        acc = acc.combine(term, value);
    }
    Ok(acc)
}

/// One-parameter input lines searched by [`optimal_line_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineFamily {
    /// Qubit input `(1−u)|0⟩⟨0| + u|1⟩⟨1|`, `u ∈ [0, 1]`.
    AdDiagonal,
    /// Qutrit input `(1−u)|0⟩⟨0| + u|2⟩⟨2|`, `u ∈ [0, 1]`.
    PlatypusDiagonal,
    /// `I/d`, no search.
    FixedMaximallyMixed,
}

impl LineFamily {
    pub fn name(self) -> &'static str {
        match self {
            LineFamily::AdDiagonal => "ad_diagonal",
            LineFamily::PlatypusDiagonal => "platypus_diagonal",
            LineFamily::FixedMaximallyMixed => "fixed_maximally_mixed",
        }
    }

    pub fn state(self, dim: usize, u: f64) -> Result<DensityMatrix> {
        match self {
            LineFamily::AdDiagonal => DensityMatrix::from_diagonal(&[1.0 - u, u]),
            LineFamily::PlatypusDiagonal => DensityMatrix::from_diagonal(&[1.0 - u, 0.0, u]),
            LineFamily::FixedMaximallyMixed => Ok(DensityMatrix::maximally_mixed(dim)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub state: DensityMatrix,
    pub value: InfoValue,
    /// Argmax `u`; `None` for the fixed family.
    pub parameter: Option<f64>,
    /// `max(0, value)`: the line maximum is only a lower bound on the one-shot
    /// capacity, and that capacity is never negative.
    pub capacity_lower_bound: f64,
}

const COARSE_POINTS: usize = 201;
const PARAMETER_TOL: f64 = 1e-8;

/// Maximizes `I_c` along `family`: a coarse grid locates the best bracket,
/// golden-section search refines it to 1e-8 in the parameter. Ties go to
/// the smaller parameter.
pub fn optimal_line_search(ch: &QuantumChannel, family: LineFamily) -> Result<LineSearchResult> {
    let required = match family {
        LineFamily::AdDiagonal => Some(2),
        LineFamily::PlatypusDiagonal => Some(3),
        LineFamily::FixedMaximallyMixed => None,
    };
    if required.is_some_and(|d| d != ch.dim_in()) {
        return Err(Error::FamilyMismatch {
            family: family.name().into(),
            dim_in: ch.dim_in(),
        });
    }
    let dim = ch.dim_in();
    let eval = |u: f64| -> Result<f64> { Ok(coherent_information(&family.state(dim, u)?, ch)?.value) };

    if family == LineFamily::FixedMaximallyMixed {
        let state = DensityMatrix::maximally_mixed(dim);
        let value = coherent_information(&state, ch)?;
        let bound = value.value.max(0.0);
        return Ok(LineSearchResult {
            state,
            value,
            parameter: None,
            capacity_lower_bound: bound,
        });
    }

    let step = 1.0 / (COARSE_POINTS - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..COARSE_POINTS {
        let v = eval(k as f64 * step)?;
        if v > best.1 {
            best = (k, v);
        }
    }
    let lo = (best.0 as f64 - 1.0).max(0.0) * step;
    let hi = ((best.0 + 1) as f64 * step).min(1.0);
    let (refined, refined_value) = golden_section_max(&eval, lo, hi)?;
    let u = if refined_value > best.1 { refined } else { best.0 as f64 * step };
    let state = family.state(dim, u)?;
    let info = coherent_information(&state, ch)?;
    let bound = info.value.max(0.0);
    Ok(LineSearchResult {
        state,
        value: info,
        parameter: Some(u),
        capacity_lower_bound: bound,
    })
}

fn golden_section_max(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > PARAMETER_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}
