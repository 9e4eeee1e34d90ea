//! Sign tests for `f(ε)` near `ε = 0⁺`.
//!
//! Every report keeps the two sides of its decisive inequality in the
//! positive-`f` orientation (`lhs > rhs` means `f` increases); `margin` is
//! `lhs − rhs` for [`Sense::PositiveF`] and `rhs − lhs` for
//! [`Sense::NegativeF`], so a report fires exactly when its margin exceeds
//! the decision tolerance.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::perturbation::{derivative_profile, DerivativeProfile, PerturbationFamily};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    PositiveF,
    NegativeF,
}

impl Sense {
    fn orient(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Sense::PositiveF => lhs - rhs,
            Sense::NegativeF => rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fires,
    Fails,
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionKind {
    /// Kernel first-order traces `Tr(Π𝒩(A₁))` vs `Tr(Πᶜ𝒩ᶜ(A₁))`.
    C1,
    /// Kernel second-order values `Tr(Π𝒩(A₂) − W⁽⁰⁾)` on both sides.
    C2,
    /// Full-rank second order, reducing to `Tr W_𝒩ᶜ` vs `Tr W_𝒩`.
    C3,
    /// Full-rank first order, `Tr(𝒩ᶜ(A₁) ln 𝒩ᶜ(ρ))` vs `Tr(𝒩(A₁) ln 𝒩(ρ))`.
    #[serde(rename = "THM1_FULLRANK")]
    Thm1FullRank,
    /// Full-rank second order including `A₂` log terms that do not cancel.
    #[serde(rename = "THM2_FULL2")]
    Thm2Full2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderCheck {
    /// `channel` or `complement`.
    pub side: String,
    pub cluster: usize,
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionKind,
    pub sense: Sense,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub first_order_checks: Vec<FirstOrderCheck>,
    pub warnings: Vec<String>,
    pub decision_tol: f64,
    pub first_order_tol: f64,
}

impl CriterionReport {
    pub fn fires(&self) -> bool {
        self.verdict == Verdict::Fires
    }
}

fn report(
    criterion: CriterionKind,
    sense: Sense,
    lhs: f64,
    rhs: f64,
    gate_ok: bool,
    tol: &Tolerances,
) -> CriterionReport {
    let margin = sense.orient(lhs, rhs);
    let verdict = if gate_ok && margin > tol.decision {
        Verdict::Fires
    } else {
        Verdict::Fails
    };
    let mut warnings = Vec::new();
    if margin.abs() <= 10.0 * tol.decision {
        warnings.push(format!("margin {margin:.3e} is within ten decision tolerances of zero"));
    }
    CriterionReport {
        criterion,
        sense,
        verdict,
        lhs,
        rhs,
        margin,
        first_order_checks: Vec::new(),
        warnings,
        decision_tol: tol.decision,
        first_order_tol: tol.first_order,
    }
}

fn inapplicable(criterion: CriterionKind, sense: Sense, reason: &str, tol: &Tolerances) -> CriterionReport {
    CriterionReport {
        criterion,
        sense,
        verdict: Verdict::Inapplicable,
        lhs: 0.0,
        rhs: 0.0,
        margin: 0.0,
        first_order_checks: Vec::new(),
        warnings: vec![reason.to_string()],
        decision_tol: tol.decision,
        first_order_tol: tol.first_order,
    }
}

fn profile_warnings(profile: &DerivativeProfile, tol: &Tolerances) -> Vec<String> {
    let mut out = Vec::new();
    if !profile.kernel_psd {
        out.push("first-order image is not positive semi-definite on a kernel".to_string());
    }
    for (name, side) in [("channel", &profile.channel), ("complement", &profile.complement)] {
        let scale = side.eigenvalues.first().copied().unwrap_or(1.0).abs().max(1.0);
        if side.min_gap < 1e3 * tol.cluster_for(scale) {
            out.push(format!("{name} output has near-degenerate clusters (gap {:.3e})", side.min_gap));
        }
    }
    out
}

fn with_profile_warnings(mut r: CriterionReport, profile: &DerivativeProfile, tol: &Tolerances) -> CriterionReport {
    r.warnings.extend(profile_warnings(profile, tol));
    r
}

pub fn criterion1_from_profile(profile: &DerivativeProfile, sense: Sense, tol: &Tolerances) -> CriterionReport {
    if profile.both_full() {
        return inapplicable(CriterionKind::C1, sense, "both outputs have full rank", tol);
    }
    let r = report(
        CriterionKind::C1,
        sense,
        profile.channel.kernel_trace,
        profile.complement.kernel_trace,
        true,
        tol,
    );
    with_profile_warnings(r, profile, tol)
}

pub fn criterion2_from_profile(profile: &DerivativeProfile, sense: Sense, tol: &Tolerances) -> CriterionReport {
    if profile.both_full() {
        return inapplicable(CriterionKind::C2, sense, "both outputs have full rank", tol);
    }
    let mut checks = Vec::new();
    for (name, side) in [("channel", &profile.channel), ("complement", &profile.complement)] {
        for ct in &side.cluster_traces {
            checks.push(FirstOrderCheck {
                side: name.to_string(),
                cluster: ct.cluster,
                trace: ct.trace,
            });
        }
    }
    let offending = checks.iter().find(|c| c.trace.abs() > tol.first_order).cloned();
    let mut r = report(
        CriterionKind::C2,
        sense,
        profile.channel.second_order_kernel_value(),
        profile.complement.second_order_kernel_value(),
        offending.is_none(),
        tol,
    );
    if let Some(c) = offending {
        r.warnings.push(format!(
            "first-order trace {:.3e} on {} cluster {} is not zero",
            c.trace, c.side, c.cluster
        ));
    }
    r.first_order_checks = checks;
    with_profile_warnings(r, profile, tol)
}

pub fn criterion3_from_profile(profile: &DerivativeProfile, sense: Sense, tol: &Tolerances) -> CriterionReport {
    if !profile.both_full() {
        return inapplicable(CriterionKind::C3, sense, "an output is rank deficient", tol);
    }
    let (n, c) = (&profile.channel, &profile.complement);
    let first = c.log_trace_b1 - n.log_trace_b1;
    let second_log = 2.0 * (c.log_trace_b2 - n.log_trace_b2);
    let kind = if second_log.abs() <= tol.first_order {
        CriterionKind::C3
    } else {
        CriterionKind::Thm2Full2
    };
    let lhs = 2.0 * c.log_trace_b2 + c.w_trace.unwrap_or(0.0);
    let rhs = 2.0 * n.log_trace_b2 + n.w_trace.unwrap_or(0.0);
    let gate = first.abs() <= tol.first_order;
    let mut r = report(kind, sense, lhs, rhs, gate, tol);
    r.first_order_checks = vec![
        FirstOrderCheck {
            side: "channel".into(),
            cluster: 0,
            trace: n.log_trace_b1,
        },
        FirstOrderCheck {
            side: "complement".into(),
            cluster: 0,
            trace: c.log_trace_b1,
        },
    ];
    if !gate {
        r.warnings.push(format!("first-order log traces differ by {first:.3e}; first order decides"));
    }
    with_profile_warnings(r, profile, tol)
}

pub fn first_order_from_profile(profile: &DerivativeProfile, sense: Sense, tol: &Tolerances) -> Result<CriterionReport> {
    if !profile.both_full() {
        return Err(Error::WrongRankCase("first-order log test needs full-rank outputs".into()));
    }
    let r = report(
        CriterionKind::Thm1FullRank,
        sense,
        profile.complement.log_trace_b1,
        profile.channel.log_trace_b1,
        true,
        tol,
    );
    Ok(with_profile_warnings(r, profile, tol))
}

pub fn check_criterion1(ch: &QuantumChannel, fam: &PerturbationFamily, sense: Sense, tol: &Tolerances) -> Result<CriterionReport> {
    Ok(criterion1_from_profile(&derivative_profile(ch, fam, tol)?, sense, tol))
}

pub fn check_criterion2(ch: &QuantumChannel, fam: &PerturbationFamily, sense: Sense, tol: &Tolerances) -> Result<CriterionReport> {
    Ok(criterion2_from_profile(&derivative_profile(ch, fam, tol)?, sense, tol))
}

pub fn check_criterion3(ch: &QuantumChannel, fam: &PerturbationFamily, sense: Sense, tol: &Tolerances) -> Result<CriterionReport> {
    Ok(criterion3_from_profile(&derivative_profile(ch, fam, tol)?, sense, tol))
}

/// Full-rank first-order test in the positive sense.
pub fn classify_first_order(ch: &QuantumChannel, fam: &PerturbationFamily, tol: &Tolerances) -> Result<CriterionReport> {
    first_order_from_profile(&derivative_profile(ch, fam, tol)?, Sense::PositiveF, tol)
}

/// First-order margin `Tr(𝒩ᶜ(A₁) ln 𝒩ᶜ(ρ)) − Tr(𝒩(A₁) ln 𝒩(ρ))` (nats).
/// At a product of optimal inputs to a product channel this is never
/// positive; a positive value shows some factor state is not optimal.
pub fn first_order_no_go(ch: &QuantumChannel, fam: &PerturbationFamily, tol: &Tolerances) -> Result<f64> {
    Ok(classify_first_order(ch, fam, tol)?.margin)
}

/// Raw positive-sense margin of `criterion`, ignoring first-order gates.
/// `Inapplicable` rank cases are an error.
pub fn criterion_margin(
    ch: &QuantumChannel,
    fam: &PerturbationFamily,
    criterion: CriterionKind,
    tol: &Tolerances,
) -> Result<f64> {
    let profile = derivative_profile(ch, fam, tol)?;
    let r = match criterion {
        CriterionKind::C1 => criterion1_from_profile(&profile, Sense::PositiveF, tol),
        CriterionKind::C2 => criterion2_from_profile(&profile, Sense::PositiveF, tol),
        CriterionKind::C3 | CriterionKind::Thm2Full2 => criterion3_from_profile(&profile, Sense::PositiveF, tol),
        CriterionKind::Thm1FullRank => first_order_from_profile(&profile, Sense::PositiveF, tol)?,
    };
    if r.verdict == Verdict::Inapplicable {
        return Err(Error::WrongRankCase(r.warnings.join("; ")));
    }
    Ok(r.margin)
}

pub const THRESHOLD_TOL: f64 = 1e-4;

/// Root of a continuous `margin` on `[lo, hi]` by bisection to `xtol`.
pub fn bisect_margin(margin: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa0 = margin(a)?;
    let fb0 = margin(b)?;
    if fa0 == 0.0 {
        return Ok(a);
    }
    if fb0 == 0.0 {
        return Ok(b);
    }
    if fa0.signum() == fb0.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa0,
            f_hi: fb0,
        });
    }
    let mut fa = fa0;
    while b - a > xtol {
        let m = 0.5 * (a + b);
        let fm = margin(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Channel parameter where the positive-sense margin of `criterion`
/// changes sign, to 1e-4.
pub fn threshold_scan(
    channel_at: impl Fn(f64) -> Result<QuantumChannel>,
    family_at: impl Fn(f64) -> Result<PerturbationFamily>,
    criterion: CriterionKind,
    interval: (f64, f64),
    tol: &Tolerances,
) -> Result<f64> {
    bisect_margin(
        |x| criterion_margin(&channel_at(x)?, &family_at(x)?, criterion, tol),
        interval.0,
        interval.1,
        THRESHOLD_TOL,
    )
}
