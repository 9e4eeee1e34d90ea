use approx::assert_relative_eq;
use cohpert::channel::{amplitude_damping, dephrasure, depolarizing, platypus};
use cohpert::criteria::{check_criterion1, check_criterion2, check_criterion3, CriterionKind, Sense, Verdict};
use cohpert::detectors::{default_witness_grid, detect_private_gap, detect_superadditivity, Conclusion};
use cohpert::families;
use cohpert::info::{coherent_information, optimal_line_search, LineFamily};
use cohpert::perturbation::{
    admissible_radius, derivative_profile, f_eval, fd_derivatives, state_at, DerivativeValue, RankCase, DEFAULT_FD_STEPS,
};
use cohpert::{DensityMatrix, HermitianOperator, QuantumChannel, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn pair(p: f64) -> QuantumChannel {
    let d = depolarizing(p).unwrap();
    d.tensor(&d).unwrap()
}

fn platypus_damping_channel(s: f64, gamma: f64) -> QuantumChannel {
    platypus(s).unwrap().tensor(&amplitude_damping(gamma).unwrap()).unwrap()
}

fn printed_wc(p: f64) -> f64 {
    let (q0, q1) = (1.0 - 0.75 * p, 0.25 * p);
    q0 * q0 + 12.0 * q0 * q1 + 25.0 * q1 * q1
        + 4.0 * q0 * q1 * (q0 * q0 + 7.0 * q0 * q1 + 5.0 * q1 * q1) / ((1.0 - p) * (q0 + q1)) * (q0 / q1).ln()
}

#[test]
fn depolarizing_pair_w_traces() {
    for p in [0.1, 0.146, 0.2, 0.2524] {
        let prof = derivative_profile(&pair(p), &families::plus_zero_pair(), &tol()).unwrap();
        assert_eq!(prof.rank_case, RankCase::BothFull);
        let wn = prof.channel.w_trace.unwrap();
        assert_relative_eq!(wn, (1.0 + (1.0 - p) * (1.0 - p)).powi(2) - 1.0, max_relative = 1e-10);
        // The complement trace sits exactly one below the quadratic-plus-log display.
        let wc = prof.complement.w_trace.unwrap();
        assert_relative_eq!(wc, printed_wc(p) - 1.0, max_relative = 1e-10);
    }
}

#[test]
fn depolarizing_pair_derivatives_match_finite_differences() {
    let ch = pair(0.2);
    let fam = families::plus_zero_pair();
    let prof = derivative_profile(&ch, &fam, &tol()).unwrap();
    let f1 = prof.fprime0.finite().unwrap();
    let f2 = prof.fsecond0.finite().unwrap();
    assert!(f1.abs() < 1e-12);
    let (wn, wc) = (prof.channel.w_trace.unwrap(), prof.complement.w_trace.unwrap());
    assert_relative_eq!(f2, (wc - wn) / std::f64::consts::LN_2, max_relative = 1e-12);
    let (fd1, fd2) = fd_derivatives(&ch, &fam, &DEFAULT_FD_STEPS).unwrap();
    assert!(fd1.finite().unwrap().abs() < 1e-6);
    assert_relative_eq!(fd2.finite().unwrap(), f2, max_relative = 1e-4);
}

#[test]
fn depolarizing_pair_margin_is_negative_below_hashing_point() {
    for p in [0.05, 0.1, 0.146, 0.2, 0.25] {
        let r = check_criterion3(&pair(p), &families::plus_zero_pair(), Sense::PositiveF, &tol()).unwrap();
        assert_eq!(r.criterion, CriterionKind::C3);
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.margin < 0.0);
    }
    // The sign flips only above the hashing point.
    let r = check_criterion3(&pair(0.29), &families::plus_zero_pair(), Sense::PositiveF, &tol()).unwrap();
    assert_eq!(r.verdict, Verdict::Fires);
}

#[test]
fn depolarizing_pair_f_is_negative_on_grid() {
    let ch = pair(0.2);
    let fam = families::plus_zero_pair();
    for eps in [1e-4, 1e-2, 0.05, 0.3] {
        assert!(f_eval(&ch, &fam, eps).unwrap() < 0.0, "eps {eps}");
    }
}

#[test]
fn platypus_damping_kernel_values() {
    let (s, w, gamma, a) = (0.2, 0.3, 0.5, 0.99);
    let ch = platypus_damping_channel(s, gamma);
    let fam = families::platypus_damping(w, a).unwrap();
    let prof = derivative_profile(&ch, &fam, &tol()).unwrap();
    assert_eq!(prof.rank_case, RankCase::BothDeficient);
    assert_relative_eq!(prof.channel.w0_value.unwrap(), w * (1.0 - gamma), max_relative = 1e-10);
    let vc = w * gamma - w * w * a * a * gamma / ((1.0 - s) * (1.0 - w) + w);
    assert_relative_eq!(prof.complement.w0_value.unwrap(), vc, max_relative = 1e-10);
    assert_eq!(prof.fprime0, DerivativeValue::Finite(0.0));
    assert_eq!(prof.fsecond0, DerivativeValue::PosInfinity);
    assert_eq!(prof.channel.kernel_rank, 3);
    assert_eq!(prof.complement.kernel_rank, 2);
}

#[test]
fn platypus_damping_criterion2_interval() {
    let (s, w) = (0.2, 0.3);
    let fam = families::platypus_damping(w, 0.99).unwrap();
    let at = |g: f64| check_criterion2(&platypus_damping_channel(s, g), &fam, Sense::PositiveF, &tol()).unwrap();
    assert_eq!(at(0.5).verdict, Verdict::Fires);
    let boundary = families::platypus_damping_boundary(s, w);
    assert_eq!(at(boundary + 0.01).verdict, Verdict::Fails);
    assert_eq!(at(boundary + 1e-3).verdict, Verdict::Fails);
    let near_one = families::platypus_damping(w, (1.0f64 - 1e-6).sqrt()).unwrap();
    let r = check_criterion2(&platypus_damping_channel(s, 0.999 * boundary), &near_one, Sense::PositiveF, &tol()).unwrap();
    assert_eq!(r.verdict, Verdict::Fires);
}

#[test]
fn platypus_damping_f_values() {
    let ch = platypus_damping_channel(0.2, 0.5);
    let fam = families::platypus_damping(0.3, 0.99).unwrap();
    assert_relative_eq!(f_eval(&ch, &fam, 1e-3).unwrap(), 5.450407174e-7, max_relative = 1e-6);
    assert_relative_eq!(f_eval(&ch, &fam, 1e-2).unwrap(), 2.043649179e-5, max_relative = 1e-6);
    assert!((admissible_radius(&fam, &tol()) - (1.0f64 - 0.99 * 0.99).sqrt()).abs() < 2e-6);
}

#[test]
fn platypus_damping_superadditivity() {
    let s = 0.2;
    let w = 0.3;
    let channels = [platypus(s).unwrap(), amplitude_damping(0.5).unwrap()];
    let states = [DensityMatrix::from_diagonal(&[1.0 - w, 0.0, w]).unwrap(), DensityMatrix::basis(2, 0)];
    let fam = families::platypus_damping(w, 0.99).unwrap();
    let r = detect_superadditivity(&channels, &states, &fam, &default_witness_grid(), &tol()).unwrap();
    assert_eq!(r.conclusion, Conclusion::Superadditive);
    assert_eq!(r.criterion_report.as_ref().unwrap().criterion, CriterionKind::C2);
    let wit = r.witness.unwrap();
    assert!(wit.f > 1e-8);
    assert!(r.product_value.unwrap() > r.single_letter_sum.unwrap());
}

#[test]
fn depolarizing_pair_detector_is_inconclusive() {
    for p in [0.05, 0.2] {
        let d = depolarizing(p).unwrap();
        let states = [DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2)];
        let r = detect_superadditivity(&[d.clone(), d], &states, &families::plus_zero_pair(), &default_witness_grid(), &tol())
            .unwrap();
        assert_eq!(r.conclusion, Conclusion::Inconclusive);
        assert!(r.witness.is_none());
    }
}

#[test]
fn z_flip_kernel_trace_closed_form() {
    for p in [0.05, 0.1, 0.2] {
        let r = check_criterion1(&depolarizing(p).unwrap(), &families::z_flip(), Sense::NegativeF, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Fires);
        assert!((r.rhs - p * (3.0 - 2.0 * p) / (2.0 - p)).abs() < 1e-12);
        assert!(r.lhs.abs() < 1e-12);
    }
}

#[test]
fn z_flip_f_sign_structure() {
    let ch = depolarizing(0.1).unwrap();
    let fam = families::z_flip();
    assert!(f_eval(&ch, &fam, 1e-8).unwrap() < 0.0);
    assert_relative_eq!(f_eval(&ch, &fam, 6.31e-8).unwrap(), -1.4777e-8, max_relative = 1e-3);
    assert!(f_eval(&ch, &fam, 1e-6).unwrap() > 0.0);
    assert!(f_eval(&ch, &fam, 1e-3).unwrap() > 0.0);
    let ch = depolarizing(0.2).unwrap();
    assert!(f_eval(&ch, &fam, 1e-3).unwrap() < 0.0);
}

#[test]
fn z_flip_private_gap() {
    for p in [0.1, 0.2, 0.25] {
        let r = detect_private_gap(
            &depolarizing(p).unwrap(),
            &DensityMatrix::maximally_mixed(2),
            &families::z_flip(),
            &default_witness_grid(),
            &tol(),
        )
        .unwrap();
        assert_eq!(r.conclusion, Conclusion::GapDetected, "p = {p}");
        assert!((r.admissible_r.unwrap() - 0.5).abs() <= 1e-6);
        assert!(r.witness.unwrap().f < -1e-8);
    }
}

#[test]
fn state_at_platypus_damping_matches_assembled_matrix() {
    let (w, a, eps) = (0.3, 0.99, 0.05);
    let fam = families::platypus_damping(w, a).unwrap();
    let mut rows = vec![vec![0.0; 6]; 6];
    rows[0][0] = 1.0 - w;
    rows[4][4] = w - eps * eps * w;
    rows[3][3] = eps * eps * w;
    rows[3][4] = eps * w * a;
    rows[4][3] = eps * w * a;
    let slices: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let expected = HermitianOperator::from_real_rows(&slices).unwrap();
    assert!((state_at(&fam, eps).unwrap().op() - &expected).frobenius_norm() < 1e-15);
}

#[test]
fn hashing_value_and_dephrasure_lines() {
    let ic = coherent_information(&DensityMatrix::maximally_mixed(2), &depolarizing(0.2524).unwrap()).unwrap();
    assert!(ic.value < 0.0 && ic.value > -1e-4);
    let r = optimal_line_search(&dephrasure(0.1, 0.3).unwrap(), LineFamily::AdDiagonal).unwrap();
    assert!((r.parameter.unwrap() - 0.5).abs() < 1e-6);
    assert_relative_eq!(r.value.value, 0.0717, max_relative = 2e-3);
    let q = families::dephrasure_region_boundary(0.1) + 0.02;
    let r = optimal_line_search(&dephrasure(0.1, q).unwrap(), LineFamily::AdDiagonal).unwrap();
    assert!(r.value.value <= 1e-6);
}
