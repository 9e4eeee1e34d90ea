//! Application-level detectors built on the criteria.
//!
//! A detector concludes only when an analytic criterion fires and a direct
//! evaluation of `f` on a witness grid confirms the predicted sign.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, QuantumChannel};
use crate::criteria::{
    criterion1_from_profile, criterion2_from_profile, criterion3_from_profile, first_order_from_profile,
    CriterionReport, Sense,
};
use crate::error::{Error, Result};
use crate::hermitian::{c, psd_min_eig, DensityMatrix, HermitianOperator};
use crate::info::coherent_information_with;
use crate::perturbation::{admissible_radius, derivative_profile, FEvaluator, PerturbationFamily};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Superadditivity,
    PrivateGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Superadditive,
    GapDetected,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// A perturbative criterion plus a numeric `f(ε)` witness.
    Criteria,
    /// A state with positive coherent information for the complement.
    ComplementCoherentInformation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub epsilon: f64,
    /// `f(ε)` in bits.
    pub f: f64,
}

/// Qubit input `(1−u)|φ⟩⟨φ| + u|φ⊥⟩⟨φ⊥|` with `|φ⟩ = cos θ|0⟩ + sin θ|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementWitness {
    pub theta: f64,
    pub u: f64,
    /// `I_c(ρ, 𝒩ᶜ)` in bits.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub kind: DetectorKind,
    pub route: Route,
    pub channels: Vec<ChannelSpec>,
    pub base_states: String,
    /// Decisive criterion: the first that fired, else the last one evaluated.
    pub criterion_report: Option<CriterionReport>,
    /// Every criterion evaluated, in precedence order.
    pub criteria_evaluated: Vec<CriterionReport>,
    pub witness: Option<Witness>,
    pub complement_witness: Option<ComplementWitness>,
    /// `Σ_i I_c(ρ_i, 𝒩_i)` at the declared optimal states (superadditivity).
    pub single_letter_sum: Option<f64>,
    /// `I_c(ρ(ε*), ⊗𝒩_i)` at the witness (superadditivity).
    pub product_value: Option<f64>,
    /// Largest `r` with `σ − rρ(ε) ≥ 0` on the witness grid (private gap).
    pub admissible_r: Option<f64>,
    pub conclusion: Conclusion,
    pub notes: Vec<String>,
}

impl DetectorReport {
    fn new(kind: DetectorKind, route: Route, channels: Vec<ChannelSpec>, base_states: String) -> Self {
        Self {
            kind,
            route,
            channels,
            base_states,
            criterion_report: None,
            criteria_evaluated: Vec::new(),
            witness: None,
            complement_witness: None,
            single_letter_sum: None,
            product_value: None,
            admissible_r: None,
            conclusion: Conclusion::Inconclusive,
            notes: Vec::new(),
        }
    }
}

/// `10^(−8 + k/10)` for `k = 0..=70`, i.e. 1e-8 to 1e-1.
pub fn default_witness_grid() -> Vec<f64> {
    (0..=70).map(|k| 10f64.powf(-8.0 + k as f64 / 10.0)).collect()
}

/// Criteria in precedence order C1 → C2 → THM1 → C3, stopping at the first
/// that fires. Rank-case gates decide which apply.
fn run_criteria(
    ch: &QuantumChannel,
    fam: &PerturbationFamily,
    sense: Sense,
    tol: &Tolerances,
) -> Result<(Option<CriterionReport>, Vec<CriterionReport>)> {
    let profile = derivative_profile(ch, fam, tol)?;
    let mut evaluated = Vec::new();
    if profile.both_full() {
        evaluated.push(first_order_from_profile(&profile, sense, tol)?);
        if !evaluated[0].fires() {
            evaluated.push(criterion3_from_profile(&profile, sense, tol));
        }
    } else {
        evaluated.push(criterion1_from_profile(&profile, sense, tol));
        if !evaluated[0].fires() {
            evaluated.push(criterion2_from_profile(&profile, sense, tol));
        }
    }
    let decisive = evaluated.last().cloned();
    Ok((decisive, evaluated))
}

/// Best witness of the requested sign on the admissible part of `grid`.
fn search_witness(
    eval: &FEvaluator<'_>,
    grid: &[f64],
    radius: f64,
    sense: Sense,
    margin: f64,
) -> Result<Option<Witness>> {
    let mut best: Option<Witness> = None;
    for &eps in grid.iter().filter(|&&e| e > 0.0 && e <= radius) {
        let f = eval.eval(eps)?;
        let signed = match sense {
            Sense::PositiveF => f,
            Sense::NegativeF => -f,
        };
        let better = best.is_none_or(|b| {
            let prev = match sense {
                Sense::PositiveF => b.f,
                Sense::NegativeF => -b.f,
            };
            signed > prev
        });
        if signed > margin && better {
            best = Some(Witness { epsilon: eps, f });
        }
    }
    Ok(best)
}

/// Superadditivity of the one-shot quantum capacity of `⊗ channels`.
///
/// `fam.base` must equal the tensor product of `optimal_states`, which the
/// caller asserts are optimal for the respective channels.
pub fn detect_superadditivity(
    channels: &[QuantumChannel],
    optimal_states: &[DensityMatrix],
    fam: &PerturbationFamily,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<DetectorReport> {
    if channels.is_empty() || channels.len() != optimal_states.len() {
        return Err(Error::InvalidSpec(format!(
            "{} channels for {} optimal states",
            channels.len(),
            optimal_states.len()
        )));
    }
    let product = QuantumChannel::tensor_all(channels)?;
    let (first, rest) = optimal_states.split_first().expect("non-empty");
    let base = rest.iter().fold(first.clone(), |acc, s| acc.tensor(s));
    if base.dim() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: fam.dim(),
        });
    }
    let mismatch = (base.op() - fam.base().op()).frobenius_norm();
    if mismatch > tol.recon {
        return Err(Error::BaseMismatch(mismatch));
    }

    let mut report = DetectorReport::new(
        DetectorKind::Superadditivity,
        Route::Criteria,
        channels.iter().map(QuantumChannel::to_spec).collect(),
        "tensor product of declared optimal states".into(),
    );
    let mut sum = 0.0;
    for (ch, s) in channels.iter().zip(optimal_states) {
        sum += coherent_information_with(s, ch, tol)?.value;
    }
    report.single_letter_sum = Some(sum);

    let (decisive, evaluated) = run_criteria(&product, fam, Sense::PositiveF, tol)?;
    report.criteria_evaluated = evaluated;
    report.criterion_report = decisive.clone();
    if decisive.as_ref().is_some_and(CriterionReport::fires) {
        let eval = FEvaluator::new(&product, fam, tol)?;
        let radius = admissible_radius(fam, tol);
        report.witness = search_witness(&eval, grid, radius, Sense::PositiveF, tol.numeric_margin)?;
        match report.witness {
            Some(w) => {
                report.product_value = Some(eval.base_value() + w.f);
                report.conclusion = Conclusion::Superadditive;
                report.notes.push(format!(
                    "one-shot capacity of the product exceeds the sum of single-channel values: {:.12e} > {:.12e}",
                    eval.base_value() + w.f,
                    sum
                ));
            }
            None => report
                .notes
                .push("criterion fires but no grid point gives f above the numeric margin".into()),
        }
    } else {
        report.notes.push("no criterion fires in the positive sense".into());
    }
    Ok(report)
}

const R_BISECTION_TOL: f64 = 1e-6;

/// Largest `r ∈ (0, 1]` with `σ − rρ(ε) ≥ −psd` for `ε = 0` and every grid
/// point up to `radius`; 0 when none exists.
pub fn largest_admissible_r(
    sigma: &DensityMatrix,
    fam: &PerturbationFamily,
    grid: &[f64],
    radius: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let mut points = vec![0.0];
    points.extend(grid.iter().copied().filter(|&e| e > 0.0 && e <= radius));
    if radius > 0.0 && !points.contains(&radius) {
        points.push(radius);
    }
    let states: Vec<HermitianOperator> = points.iter().map(|&e| fam.operator_at(e)).collect();
    let ok = |r: f64| -> Result<bool> {
        for s in &states {
            if psd_min_eig(&(sigma.op() - &s.scale(r)))? < -tol.psd {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if ok(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > R_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Positive gap between one-shot private and quantum capacity via a pure
/// base state whose perturbation lowers coherent information, with `σ`
/// caller-asserted optimal.
pub fn detect_private_gap(
    ch: &QuantumChannel,
    sigma: &DensityMatrix,
    fam: &PerturbationFamily,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<DetectorReport> {
    let top = fam.base().largest_eigenvalue()?;
    if (top - 1.0).abs() > tol.psd {
        return Err(Error::NotPure(top));
    }
    if sigma.dim() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: fam.dim(),
        });
    }
    let mut report = DetectorReport::new(
        DetectorKind::PrivateGap,
        Route::Criteria,
        vec![ch.to_spec()],
        "pure base state; sigma declared optimal".into(),
    );
    let radius = admissible_radius(fam, tol);
    let r = largest_admissible_r(sigma, fam, grid, radius, tol)?;
    report.admissible_r = Some(r);

    let (decisive, evaluated) = run_criteria(ch, fam, Sense::NegativeF, tol)?;
    report.criteria_evaluated = evaluated;
    report.criterion_report = decisive.clone();
    let fires = decisive.as_ref().is_some_and(CriterionReport::fires);
    if fires {
        let eval = FEvaluator::new(ch, fam, tol)?;
        report.witness = search_witness(&eval, grid, radius, Sense::NegativeF, tol.numeric_margin)?;
    }
    if !(r > 0.0) {
        report.notes.push("no r > 0 keeps sigma − r·rho(eps) positive semi-definite".into());
    } else if !fires {
        report.notes.push("no criterion fires in the negative sense".into());
    } else if report.witness.is_none() {
        report
            .notes
            .push("criterion fires but no grid point gives f below minus the numeric margin".into());
    } else {
        report.conclusion = Conclusion::GapDetected;
        report.notes.push(
            "sigma splits into r·rho(eps) and a remainder whose private information exceeds the coherent information of sigma"
                .into(),
        );
        report
            .notes
            .push("a positive private-minus-quantum gap also implies positive private capacity of the complement".into());
    }
    Ok(report)
}

fn rotated_qubit(theta: f64, u: f64) -> Result<DensityMatrix> {
    let (s, co) = theta.sin_cos();
    let phi = HermitianOperator::outer(&[c(co), c(s)]);
    let perp = HermitianOperator::outer(&[c(-s), c(co)]);
    DensityMatrix::new(&phi.scale(1.0 - u) + &perp.scale(u))
}

const THETA_POINTS: usize = 33;
const U_POINTS: usize = 51;

/// Largest `I_c(ρ, 𝒩ᶜ)` over real-rotated diagonal qubit inputs
/// `θ ∈ [0, π/2]`, `u ∈ [0, 1/2]`: grid search then coordinate
/// golden-section refinement.
pub fn complement_line_search(ch: &QuantumChannel, tol: &Tolerances) -> Result<ComplementWitness> {
    if ch.dim_in() != 2 {
        return Err(Error::FamilyMismatch {
            family: "rotated_qubit".into(),
            dim_in: ch.dim_in(),
        });
    }
    let comp = ch.complement();
    let eval = |theta: f64, u: f64| -> Result<f64> { Ok(coherent_information_with(&rotated_qubit(theta, u)?, &comp, tol)?.value) };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut best = ComplementWitness {
        theta: 0.0,
        u: 0.0,
        value: f64::NEG_INFINITY,
    };
    for i in 0..THETA_POINTS {
        let theta = half_pi * i as f64 / (THETA_POINTS - 1) as f64;
        for j in 0..U_POINTS {
            let u = 0.5 * j as f64 / (U_POINTS - 1) as f64;
            let v = eval(theta, u)?;
            if v > best.value {
                best = ComplementWitness { theta, u, value: v };
            }
        }
    }
    let dt = half_pi / (THETA_POINTS - 1) as f64;
    let du = 0.5 / (U_POINTS - 1) as f64;
    for _ in 0..3 {
        let (u, v) = golden_max(|u| eval(best.theta, u), (best.u - du).max(0.0), (best.u + du).min(0.5))?;
        if v > best.value {
            best.u = u;
            best.value = v;
        }
        let (t, v) = golden_max(|t| eval(t, best.u), (best.theta - dt).max(0.0), (best.theta + dt).min(half_pi))?;
        if v > best.value {
            best.theta = t;
            best.value = v;
        }
    }
    Ok(best)
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let k = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - k * (b - a), a + k * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-8 {
        if f1 >= f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - k * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + k * (b - a);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Private-gap flag through a qubit input with positive coherent
/// information for the complement.
pub fn detect_complement_gap(ch: &QuantumChannel, tol: &Tolerances) -> Result<DetectorReport> {
    let mut report = DetectorReport::new(
        DetectorKind::PrivateGap,
        Route::ComplementCoherentInformation,
        vec![ch.to_spec()],
        "rotated diagonal qubit inputs".into(),
    );
    let w = complement_line_search(ch, tol)?;
    report.complement_witness = Some(w);
    if w.value > tol.numeric_margin {
        report.conclusion = Conclusion::GapDetected;
        report
            .notes
            .push("an input with positive complement coherent information yields a positive gap".into());
    } else {
        report
            .notes
            .push("no searched input gives positive complement coherent information".into());
    }
    Ok(report)
}
