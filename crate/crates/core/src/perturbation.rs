//! Perturbed states `ρ(ε) = ρ + εA₁ + ε²A₂` and the derivative data of
//! `f(ε) = I_c(ρ(ε), 𝒩) − I_c(ρ, 𝒩)` at `ε = 0⁺`.
//!
//! Traces involving logarithms are computed with the natural log; `f'` and
//! `f''` are reported in bits.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::hermitian::{
    hermitian_eigen, kernel_projector, reduced_resolvent, spectral_decompose_default, CMatrix, DensityMatrix,
    HermitianOperator, SpectralDecomposition,
};
use crate::info::coherent_information_with;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    base: DensityMatrix,
    a1: HermitianOperator,
    a2: HermitianOperator,
}

impl PerturbationFamily {
    pub fn new(base: DensityMatrix, a1: HermitianOperator, a2: HermitianOperator) -> Result<Self> {
        Self::with_tolerances(base, a1, a2, &Tolerances::default())
    }

    pub fn with_tolerances(
        base: DensityMatrix,
        a1: HermitianOperator,
        a2: HermitianOperator,
        tol: &Tolerances,
    ) -> Result<Self> {
        for a in [&a1, &a2] {
            if a.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    found: a.dim(),
                });
            }
            let trace = a.trace();
            if trace.abs() > tol.traceless {
                return Err(Error::NotTraceless { trace });
            }
        }
        Ok(Self { base, a1, a2 })
    }

    /// First-order family with `A₂ = 0`.
    pub fn first_order(base: DensityMatrix, a1: HermitianOperator) -> Result<Self> {
        let dim = base.dim();
        Self::new(base, a1, HermitianOperator::zeros(dim))
    }

    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    pub fn a1(&self) -> &HermitianOperator {
        &self.a1
    }

    pub fn a2(&self) -> &HermitianOperator {
        &self.a2
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn max_order(&self) -> usize {
        2
    }

    /// `ρ + εA₁ + ε²A₂` without validation.
    pub fn operator_at(&self, eps: f64) -> HermitianOperator {
        &(self.base.op() + &self.a1.scale(eps)) + &self.a2.scale(eps * eps)
    }
}

const RADIUS_BISECTION_TOL: f64 = 1e-6;

fn radius_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=60).map(|k| 10f64.powf(-9.0 + k as f64 / 10.0)).collect();
    grid.extend((2..=1000).map(|k| k as f64 / 1000.0));
    grid
}

/// Largest `ε̄ ∈ (0, 1]` such that `ρ(ε)` stays positive semi-definite on a
/// refinement grid of `(0, ε̄]`, with the first failing grid interval
/// bisected to 1e-6. Returns 0 when `ε = 1e-9` already fails.
pub fn admissible_radius(fam: &PerturbationFamily, tol: &Tolerances) -> f64 {
    let ok = |eps: f64| {
        fam.operator_at(eps)
            .eigenvalues()
            .map(|v| v[0] >= -tol.psd)
            .unwrap_or(false)
    };
    let mut good = 0.0;
    for eps in radius_grid() {
        if !ok(eps) {
            if good == 0.0 {
                return 0.0;
            }
            let (mut lo, mut hi) = (good, eps);
            while hi - lo > RADIUS_BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        good = eps;
    }
    1.0
}

pub fn state_at(fam: &PerturbationFamily, eps: f64) -> Result<DensityMatrix> {
    state_at_with(fam, eps, &Tolerances::default())
}

pub fn state_at_with(fam: &PerturbationFamily, eps: f64, tol: &Tolerances) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    DensityMatrix::with_tolerances(fam.operator_at(eps), tol).map_err(|e| match e {
        Error::NotPositive { .. } => Error::EpsilonOutOfRange(eps),
        other => other,
    })
}

fn has_kernel(decomp: &SpectralDecomposition, kernel_tol: f64) -> bool {
    !decomp.kernel_indices(kernel_tol).is_empty()
}

/// `Tr W = Σ_i Tr(P_i B V_i B P_i)` with
/// `V_i = P_i/λ_i − 2 ln(λ_i) Σ_{j≠i} (λ_j − λ_i)^{-1} P_j`.
pub fn w_trace(decomp: &SpectralDecomposition, b: &HermitianOperator, kernel_tol: f64) -> Result<f64> {
    if has_kernel(decomp, kernel_tol) {
        return Err(Error::WrongRankCase("W needs a full-rank operator".into()));
    }
    let mut total = 0.0;
    for (i, (&l, p)) in decomp.eigenvalues().iter().zip(decomp.projectors()).enumerate() {
        let pb = p.matrix() * b.matrix();
        let resolvent = reduced_resolvent(decomp, i)?;
        let diag = (&pb * &pb).trace().re;
        let cross = (&pb * resolvent.matrix() * b.matrix()).trace().re;
        total += diag / l - 2.0 * l.ln() * cross;
    }
    Ok(total)
}

/// `Tr(Π B₂) − Tr(P₀ B₁ C₀ B₁ P₀)` with `C₀ = Σ_{λ_j > 0} λ_j^{-1} P_j`.
pub fn w0_trace(
    decomp: &SpectralDecomposition,
    b1: &HermitianOperator,
    b2: &HermitianOperator,
    kernel_tol: f64,
) -> Result<f64> {
    let kernel = kernel_projector(decomp, kernel_tol)?;
    if kernel.is_zero() {
        return Err(Error::WrongRankCase("W0 needs a kernel".into()));
    }
    let kernel_idx = decomp.kernel_indices(kernel_tol);
    let mut c0 = CMatrix::zeros(decomp.dim(), decomp.dim());
    for (j, (&l, p)) in decomp.eigenvalues().iter().zip(decomp.projectors()).enumerate() {
        if !kernel_idx.contains(&j) {
            c0 += p.matrix() * crate::hermitian::c(1.0 / l);
        }
    }
    let p0 = kernel.op().matrix();
    let w0 = (p0 * b1.matrix() * c0 * b1.matrix() * p0).trace().re;
    Ok(kernel.op().trace_product(b2) - w0)
}

/// `Σ_{λ_i > kernel_tol} ln(λ_i) Tr(P_i B)`, the finite part of `Tr(B ln M)`.
pub fn log_trace(decomp: &SpectralDecomposition, b: &HermitianOperator, kernel_tol: f64) -> f64 {
    decomp
        .eigenvalues()
        .iter()
        .zip(decomp.projectors())
        .filter(|(&l, _)| l > kernel_tol)
        .map(|(&l, p)| l.ln() * p.trace_product(b))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCase {
    BothDeficient,
    OneDeficient,
    BothFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DerivativeValue {
    Finite(f64),
    PosInfinity,
    NegInfinity,
    /// Divergent terms cancel at leading order; the sign is not decided by
    /// first- and second-order data.
    Indeterminate,
}

impl DerivativeValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            DerivativeValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrace {
    pub cluster: usize,
    pub eigenvalue: f64,
    pub trace: f64,
}

/// Spectral traces of one output, `M(ρ)` with `B₁ = M(A₁)`, `B₂ = M(A₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideTraces {
    pub dim: usize,
    pub kernel_rank: usize,
    pub eigenvalues: Vec<f64>,
    /// `Tr(P_i B₁)` for every cluster, kernel included.
    pub cluster_traces: Vec<ClusterTrace>,
    /// `Tr(Π B₁)`.
    pub kernel_trace: f64,
    /// Eigenvalues of `B₁` compressed to the kernel.
    pub kernel_first_order: Vec<f64>,
    /// Finite part of `Tr(B₁ ln M(ρ))`.
    pub log_trace_b1: f64,
    /// Finite part of `Tr(B₂ ln M(ρ))`.
    pub log_trace_b2: f64,
    /// `Tr W`; present when `M(ρ)` has full rank.
    pub w_trace: Option<f64>,
    /// `Tr(Π B₂ − W⁽⁰⁾)`; present when `M(ρ)` has a kernel.
    pub w0_value: Option<f64>,
    /// Smallest clustering gap between neighbouring distinct eigenvalues.
    pub min_gap: f64,
}

impl SideTraces {
    pub fn full_rank(&self) -> bool {
        self.kernel_rank == 0
    }

    /// `Tr(Π B₂ − W⁽⁰⁾)`, zero for a full-rank side.
    pub fn second_order_kernel_value(&self) -> f64 {
        self.w0_value.unwrap_or(0.0)
    }

    /// `lim S'(ε) + Tr(Π B₁) ln ε` in nats:
    /// `−Σ_j λ_{0j} ln λ_{0j} − Σ_{λ_i > 0} Tr(P_i B₁) ln λ_i`.
    pub fn entropy_slope_remainder(&self) -> f64 {
        let kernel: f64 = self
            .kernel_first_order
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum();
        kernel - self.log_trace_b1
    }

    fn kernel_psd_min(&self) -> Option<f64> {
        self.kernel_first_order.first().copied()
    }
}

fn side_traces(
    out: &HermitianOperator,
    b1: &HermitianOperator,
    b2: &HermitianOperator,
    tol: &Tolerances,
) -> Result<SideTraces> {
    let decomp = spectral_decompose_default(out, tol)?;
    let kernel = kernel_projector(&decomp, tol.kernel)?;
    let cluster_traces = decomp
        .eigenvalues()
        .iter()
        .zip(decomp.projectors())
        .enumerate()
        .map(|(cluster, (&eigenvalue, p))| ClusterTrace {
            cluster,
            eigenvalue,
            trace: p.trace_product(b1),
        })
        .collect();
    let kernel_first_order = if kernel.is_zero() {
        Vec::new()
    } else {
        let (_, vectors) = hermitian_eigen(kernel.op().matrix())?;
        let n = vectors.ncols();
        let basis = vectors.columns(n - kernel.rank(), kernel.rank()).into_owned();
        let compressed = HermitianOperator::symmetrized(basis.adjoint() * b1.matrix() * &basis);
        compressed.eigenvalues()?
    };
    let min_gap = decomp
        .eigenvalues()
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    Ok(SideTraces {
        dim: out.dim(),
        kernel_rank: kernel.rank(),
        eigenvalues: decomp.eigenvalues().to_vec(),
        cluster_traces,
        kernel_trace: kernel.op().trace_product(b1),
        kernel_first_order,
        log_trace_b1: log_trace(&decomp, b1, tol.kernel),
        log_trace_b2: log_trace(&decomp, b2, tol.kernel),
        w_trace: if kernel.is_zero() {
            Some(w_trace(&decomp, b1, tol.kernel)?)
        } else {
            None
        },
        w0_value: if kernel.is_zero() {
            None
        } else {
            Some(w0_trace(&decomp, b1, b2, tol.kernel)?)
        },
        min_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeProfile {
    pub rank_case: RankCase,
    /// `f'(0⁺)` in bits.
    pub fprime0: DerivativeValue,
    /// `f''(0⁺)` in bits.
    pub fsecond0: DerivativeValue,
    /// Traces of `𝒩(ρ)` with `𝒩(A₁)`, `𝒩(A₂)`, natural log.
    pub channel: SideTraces,
    /// Traces of `𝒩ᶜ(ρ)` with `𝒩ᶜ(A₁)`, `𝒩ᶜ(A₂)`, natural log.
    pub complement: SideTraces,
    /// `Π B₁ Π ≥ 0` on both kernels (within the psd tolerance).
    pub kernel_psd: bool,
}

impl DerivativeProfile {
    pub fn both_full(&self) -> bool {
        self.rank_case == RankCase::BothFull
    }
}

fn sign_value(x: f64, zero: f64) -> DerivativeValue {
    if x > zero {
        DerivativeValue::PosInfinity
    } else if x < -zero {
        DerivativeValue::NegInfinity
    } else {
        DerivativeValue::Indeterminate
    }
}

pub fn derivative_profile(ch: &QuantumChannel, fam: &PerturbationFamily, tol: &Tolerances) -> Result<DerivativeProfile> {
    if fam.dim() != ch.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim_in(),
            found: fam.dim(),
        });
    }
    let comp = ch.complement();
    let side = |m: &QuantumChannel| -> Result<SideTraces> {
        side_traces(
            &m.apply_operator(fam.base().op())?,
            &m.apply_operator(fam.a1())?,
            &m.apply_operator(fam.a2())?,
            tol,
        )
    };
    let n = side(ch)?;
    let c = side(&comp)?;
    let rank_case = match (n.full_rank(), c.full_rank()) {
        (true, true) => RankCase::BothFull,
        (false, false) => RankCase::BothDeficient,
        _ => RankCase::OneDeficient,
    };
    let kernel_psd = [&n, &c]
        .iter()
        .all(|s| s.kernel_psd_min().is_none_or(|m| m >= -tol.psd));

    let (fprime0, fsecond0) = match (n.w_trace, c.w_trace) {
        (Some(wn), Some(wc)) => {
            let d1 = -n.log_trace_b1 + c.log_trace_b1;
            let d2 = -wn - 2.0 * n.log_trace_b2 + wc + 2.0 * c.log_trace_b2;
            (DerivativeValue::Finite(d1 / LN_2), DerivativeValue::Finite(d2 / LN_2))
        }
        _ => {
            let diff = n.kernel_trace - c.kernel_trace;
            let fprime = if diff.abs() > tol.first_order {
                sign_value(diff, 0.0)
            } else {
                DerivativeValue::Finite((n.entropy_slope_remainder() - c.entropy_slope_remainder()) / LN_2)
            };
            let fsecond = if diff.abs() > tol.first_order {
                sign_value(-diff, 0.0)
            } else if n.kernel_trace.abs() <= tol.first_order && c.kernel_trace.abs() <= tol.first_order {
                sign_value(
                    n.second_order_kernel_value() - c.second_order_kernel_value(),
                    tol.decision,
                )
            } else {
                DerivativeValue::Indeterminate
            };
            (fprime, fsecond)
        }
    };
    Ok(DerivativeProfile {
        rank_case,
        fprime0,
        fsecond0,
        channel: n,
        complement: c,
        kernel_psd,
    })
}

/// `f(ε) = I_c(ρ(ε), 𝒩) − I_c(ρ, 𝒩)` in bits.
pub fn f_eval(ch: &QuantumChannel, fam: &PerturbationFamily, eps: f64) -> Result<f64> {
    FEvaluator::new(ch, fam, &Tolerances::default())?.eval(eps)
}

/// [`f_eval`] with the complement and the base value computed once.
#[derive(Debug, Clone)]
pub struct FEvaluator<'a> {
    channel: &'a QuantumChannel,
    complement: QuantumChannel,
    fam: &'a PerturbationFamily,
    base_value: f64,
    tol: Tolerances,
}

impl<'a> FEvaluator<'a> {
    pub fn new(channel: &'a QuantumChannel, fam: &'a PerturbationFamily, tol: &Tolerances) -> Result<Self> {
        let base_value = coherent_information_with(fam.base(), channel, tol)?.value;
        Ok(Self {
            channel,
            complement: channel.complement(),
            fam,
            base_value,
            tol: *tol,
        })
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn eval(&self, eps: f64) -> Result<f64> {
        if eps == 0.0 {
            return Ok(0.0);
        }
        let rho = state_at_with(self.fam, eps, &self.tol)?;
        let s_out = entropy_bits(&self.channel.apply_operator(rho.op())?);
        let s_env = entropy_bits(&self.complement.apply_operator(rho.op())?);
        Ok(s_out? - s_env? - self.base_value)
    }
}

fn entropy_bits(op: &HermitianOperator) -> Result<f64> {
    Ok(op
        .eigenvalues()?
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum())
}

pub const DEFAULT_FD_STEPS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

/// Ratio of consecutive raw differences above which a sequence is read as
/// divergent rather than converging.
const DIVERGENCE_RATIO: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FdValue {
    Finite(f64),
    Divergent,
}

impl FdValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            FdValue::Finite(v) => Some(v),
            FdValue::Divergent => None,
        }
    }
}

/// One-sided finite-difference estimates of `f'(0⁺)` and `f''(0⁺)` in bits.
///
/// Uses `f(h)/h` and `(f(2h) − 2f(h))/h²` on a decreasing step list, then two
/// levels of Richardson extrapolation. Steps must be strictly decreasing and
/// `2·steps[0]` must be admissible.
pub fn fd_derivatives(ch: &QuantumChannel, fam: &PerturbationFamily, steps: &[f64]) -> Result<(FdValue, FdValue)> {
    if steps.len() < 3 || steps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::ParameterRange {
            name: "steps".into(),
            value: steps.len() as f64,
            expected: "at least 3 strictly decreasing positive steps".into(),
        });
    }
    let eval = FEvaluator::new(ch, fam, &Tolerances::default())?;
    let mut d1 = Vec::with_capacity(steps.len());
    let mut d2 = Vec::with_capacity(steps.len());
    for &h in steps {
        let f1 = eval.eval(h)?;
        let f2 = eval.eval(2.0 * h)?;
        d1.push(f1 / h);
        d2.push((f2 - 2.0 * f1) / (h * h));
    }
    Ok((richardson(steps, &d1), richardson(steps, &d2)))
}

fn richardson(steps: &[f64], raw: &[f64]) -> FdValue {
    let scale = raw.iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
    let diffs: Vec<f64> = raw.windows(2).map(|w| w[1] - w[0]).collect();
    let settled = diffs.iter().all(|d| d.abs() <= 1e-10 * scale);
    let divergent = !settled
        && diffs
            .windows(2)
            .all(|w| w[0] != 0.0 && (w[1] / w[0]).abs() > DIVERGENCE_RATIO);
    if divergent || raw.iter().any(|v| !v.is_finite()) {
        return FdValue::Divergent;
    }
    let mut level = raw.to_vec();
    let mut hs = steps.to_vec();
    for order in 1..=2 {
        if level.len() < 2 {
            break;
        }
        let next: Vec<f64> = level
            .windows(2)
            .zip(hs.windows(2))
            .map(|(v, h)| {
                let r = (h[0] / h[1]).powi(order);
                (r * v[1] - v[0]) / (r - 1.0)
            })
            .collect();
        level = next;
        hs.remove(0);
    }
    FdValue::Finite(*level.last().expect("non-empty"))
}

/// `(Σ_i Tr(P_i A), Σ_i Tr(P_i A C_i A))` over the clusters of `decomp`, with
/// `C_i` the reduced resolvent. Both vanish for traceless `A`.
pub fn sum_rules(decomp: &SpectralDecomposition, a: &HermitianOperator) -> Result<(f64, f64)> {
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, p) in decomp.projectors().iter().enumerate() {
        first += p.trace_product(a);
        let c = reduced_resolvent(decomp, i)?;
        second += (p.matrix() * a.matrix() * c.matrix() * a.matrix()).trace().re;
    }
    Ok((first, second))
}
