use cohpert::channel::{amplitude_damping, builtin, dephrasure, depolarizing, platypus};
use cohpert::criteria::{
    bisect_margin, check_criterion1, check_criterion2, check_criterion3, first_order_from_profile, threshold_scan, CriterionKind,
    CriterionReport, Sense, Verdict,
};
use cohpert::detectors::{
    default_witness_grid, detect_complement_gap, detect_private_gap, detect_superadditivity, Conclusion, DetectorReport,
    Witness,
};
use cohpert::info::{coherent_information_with, optimal_line_search, LineFamily};
use cohpert::perturbation::{admissible_radius, derivative_profile, FEvaluator, PerturbationFamily};
use cohpert::{families, ChannelSpec, DensityMatrix, QuantumChannel, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CriterionChoice, Grid, ScenarioConfig, ScenarioName};
use crate::error::{CliError, CliResult, Context};

/// One CSV row. Empty cells mean "not applicable at this point".
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanRow {
    pub parameter: f64,
    pub criterion: Option<CriterionKind>,
    pub verdict: Option<Verdict>,
    pub margin: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ic_base: Option<f64>,
    pub ic_probe: Option<f64>,
    pub conclusion: Option<Conclusion>,
    pub witness_epsilon: Option<f64>,
    pub witness_f: Option<f64>,
    pub admissible_r: Option<f64>,
}

impl ScanRow {
    fn at(parameter: f64) -> Self {
        Self {
            parameter,
            ..Default::default()
        }
    }

    fn with_criterion(mut self, r: &CriterionReport) -> Self {
        self.criterion = Some(r.criterion);
        self.verdict = Some(r.verdict);
        self.margin = Some(r.margin);
        self.lhs = Some(r.lhs);
        self.rhs = Some(r.rhs);
        self
    }

    fn with_witness(mut self, w: Option<Witness>) -> Self {
        self.witness_epsilon = w.map(|w| w.epsilon);
        self.witness_f = w.map(|w| w.f);
        self
    }

    fn with_detector(self, d: &DetectorReport) -> Self {
        let mut row = match &d.criterion_report {
            Some(r) => self.with_criterion(r),
            None => self,
        }
        .with_witness(d.witness);
        row.conclusion = Some(d.conclusion);
        row.admissible_r = d.admissible_r;
        row
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "parameter",
    "criterion",
    "verdict",
    "margin",
    "lhs",
    "rhs",
    "ic_base",
    "ic_probe",
    "conclusion",
    "witness_epsilon",
    "witness_f",
    "admissible_r",
];

pub struct ScenarioRun {
    pub scenario: ScenarioName,
    pub rows: Vec<ScanRow>,
    pub report: Value,
}

struct Point {
    row: ScanRow,
    detail: Value,
}

/// Swept parameter, its single-point default and the default scan grid.
pub fn axis(name: ScenarioName) -> (&'static str, f64, Option<Grid>) {
    let g = |lo, hi, steps| Some(Grid { lo, hi, steps });
    match name {
        ScenarioName::DepolarizingN2 => ("p", 0.2, g(0.05, 0.26, 43)),
        ScenarioName::PlatypusAd => ("gamma", 0.5, g(0.05, 0.95, 91)),
        ScenarioName::GapDepolarizing => ("p", 0.1, g(0.05, 0.25, 5)),
        ScenarioName::DephrasureGap => ("q", 0.3, g(0.0, 0.5, 51)),
        ScenarioName::HashingCurve => ("p", 0.25, g(0.0, 0.3, 61)),
        ScenarioName::Custom => ("", 0.0, None),
    }
}

fn axis_name(cfg: &ScenarioConfig) -> CliResult<String> {
    match cfg.scenario {
        ScenarioName::Custom => cfg
            .scan_param
            .clone()
            .ok_or_else(|| CliError::Invalid("custom scan needs `scan_param`".into())),
        other => Ok(axis(other).0.to_string()),
    }
}

fn ctx(what: &str, x: f64) -> impl FnOnce() -> String + '_ {
    move || format!("{what} at {x}")
}

fn depolarizing_pair(p: f64) -> cohpert::Result<QuantumChannel> {
    let d = depolarizing(p)?;
    d.tensor(&d)
}

fn depolarizing_n2_point(p: f64, tol: &Tolerances) -> CliResult<Point> {
    let d = depolarizing(p).context(ctx("depolarizing", p))?;
    let states = [DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2)];
    let fam = families::plus_zero_pair();
    let report = detect_superadditivity(&[d.clone(), d], &states, &fam, &default_witness_grid(), tol)
        .context(ctx("superadditivity detector", p))?;
    let mut row = ScanRow::at(p).with_detector(&report);
    row.ic_base = report.single_letter_sum;
    row.ic_probe = report.product_value;
    Ok(Point {
        row,
        detail: serde_json::to_value(&report)?,
    })
}

fn platypus_ad_point(gamma: f64, cfg: &ScenarioConfig, tol: &Tolerances) -> CliResult<Point> {
    let (s, w, a) = (cfg.param("s", 0.2), cfg.param("w", 0.3), cfg.param("a", 0.99));
    let channels = [
        platypus(s).context(ctx("platypus", s))?,
        amplitude_damping(gamma).context(ctx("amplitude damping", gamma))?,
    ];
    let states = [
        DensityMatrix::from_diagonal(&[1.0 - w, 0.0, w]).context(ctx("qutrit state with w", w))?,
        DensityMatrix::basis(2, 0),
    ];
    let fam = families::platypus_damping(w, a).context(ctx("platypus-damping family with w", w))?;
    let report = detect_superadditivity(&channels, &states, &fam, &default_witness_grid(), tol)
        .context(ctx("superadditivity detector", gamma))?;
    let mut row = ScanRow::at(gamma).with_detector(&report);
    row.ic_base = report.single_letter_sum;
    row.ic_probe = report.product_value;
    Ok(Point {
        row,
        detail: serde_json::to_value(&report)?,
    })
}

fn gap_depolarizing_point(p: f64, tol: &Tolerances) -> CliResult<Point> {
    let ch = depolarizing(p).context(ctx("depolarizing", p))?;
    let sigma = DensityMatrix::maximally_mixed(2);
    let report = detect_private_gap(&ch, &sigma, &families::z_flip(), &default_witness_grid(), tol)
        .context(ctx("private-gap detector", p))?;
    let mut row = ScanRow::at(p).with_detector(&report);
    row.ic_base = Some(coherent_information_with(&sigma, &ch, tol).context(ctx("coherent information", p))?.value);
    let closed_form = p * (3.0 - 2.0 * p) / (2.0 - p);
    let kernel_trace = report.criterion_report.as_ref().map(|r| r.rhs);
    let detail = json!({
        "detector": report,
        "closed_form_kernel_trace": closed_form,
        "kernel_trace_abs_error": kernel_trace.map(|t| (t - closed_form).abs()),
    });
    Ok(Point { row, detail })
}

fn dephrasure_point(q: f64, cfg: &ScenarioConfig, tol: &Tolerances) -> CliResult<Point> {
    let p = cfg.param("p", 0.1);
    let ch = dephrasure(p, q).context(ctx("dephrasure", q))?;
    let line = optimal_line_search(&ch, LineFamily::AdDiagonal).context(ctx("line search", q))?;
    let gap = detect_complement_gap(&ch, tol).context(ctx("complement route", q))?;
    let mut row = ScanRow::at(q);
    row.ic_base = Some(line.value.value);
    row.ic_probe = gap.complement_witness.map(|w| w.value);
    row.conclusion = Some(gap.conclusion);
    let detail = json!({
        "line_search": {
            "family": LineFamily::AdDiagonal.name(),
            "parameter": line.parameter,
            "value": line.value.value,
            "capacity_lower_bound": line.capacity_lower_bound,
        },
        "complement_gap": gap,
    });
    Ok(Point { row, detail })
}

fn hashing_point(p: f64, tol: &Tolerances) -> CliResult<Point> {
    let ic = hashing_value(p, tol)?;
    let mut row = ScanRow::at(p);
    row.ic_base = Some(ic);
    Ok(Point {
        row,
        detail: json!({ "p": p, "coherent_information": ic }),
    })
}

fn hashing_value(p: f64, tol: &Tolerances) -> CliResult<f64> {
    let ch = depolarizing(p).context(ctx("depolarizing", p))?;
    Ok(coherent_information_with(&DensityMatrix::maximally_mixed(2), &ch, tol)
        .context(ctx("coherent information", p))?
        .value)
}

struct CustomSetup {
    channel: QuantumChannel,
    family: PerturbationFamily,
    criterion: CriterionChoice,
    sense: Sense,
}

/// Sets `name` wherever it already appears in the spec tree.
fn set_param(spec: &mut ChannelSpec, name: &str, x: f64) -> bool {
    let mut found = false;
    if spec.params.contains_key(name) {
        *spec = spec.with_scalar(name, x);
        found = true;
    }
    for child in spec.children.iter_mut().flatten() {
        found |= set_param(child, name, x);
    }
    found
}

fn custom_setup(cfg: &ScenarioConfig, value: Option<f64>) -> CliResult<CustomSetup> {
    let spec = cfg
        .channel
        .as_ref()
        .ok_or_else(|| CliError::Invalid("custom scenario needs `channel`".into()))?;
    let spec = match (value, &cfg.scan_param) {
        (Some(x), Some(name)) => {
            let mut spec = spec.clone();
            if !set_param(&mut spec, name, x) {
                return Err(CliError::Invalid(format!("scan_param `{name}` is not a parameter of the channel")));
            }
            spec
        }
        _ => spec.clone(),
    };
    let channel = builtin(&spec).context(|| "channel".into())?;
    let family = cfg
        .family
        .as_ref()
        .ok_or_else(|| CliError::Invalid("custom scenario needs `family`".into()))?
        .build(channel.dim_in(), cfg.seed)?;
    Ok(CustomSetup {
        channel,
        family,
        criterion: cfg.criterion.unwrap_or(CriterionChoice::C3),
        sense: cfg.sense.unwrap_or(Sense::PositiveF),
    })
}

fn custom_report(setup: &CustomSetup, tol: &Tolerances) -> CliResult<CriterionReport> {
    let (ch, fam, sense) = (&setup.channel, &setup.family, setup.sense);
    let r = match setup.criterion {
        CriterionChoice::C1 => check_criterion1(ch, fam, sense, tol),
        CriterionChoice::C2 => check_criterion2(ch, fam, sense, tol),
        CriterionChoice::C3 => check_criterion3(ch, fam, sense, tol),
        CriterionChoice::Thm1 => {
            derivative_profile(ch, fam, tol).and_then(|prof| first_order_from_profile(&prof, sense, tol))
        }
    };
    r.context(|| "criterion".into())
}

/// First grid point within the admissible radius where `f` has the sign
/// of `sense` and magnitude above the numeric margin.
fn find_witness(setup: &CustomSetup, tol: &Tolerances) -> CliResult<Option<Witness>> {
    let eval = FEvaluator::new(&setup.channel, &setup.family, tol).context(|| "f evaluator".into())?;
    let radius = admissible_radius(&setup.family, tol);
    for eps in default_witness_grid().into_iter().filter(|&e| e <= radius) {
        let f = eval.eval(eps).context(|| format!("f at eps {eps}"))?;
        let signed = match setup.sense {
            Sense::PositiveF => f,
            Sense::NegativeF => -f,
        };
        if signed > tol.numeric_margin {
            return Ok(Some(Witness { epsilon: eps, f }));
        }
    }
    Ok(None)
}

fn custom_point(x: f64, cfg: &ScenarioConfig, tol: &Tolerances) -> CliResult<Point> {
    let setup = custom_setup(cfg, Some(x))?;
    let report = custom_report(&setup, tol)?;
    let witness = if report.fires() { find_witness(&setup, tol)? } else { None };
    let mut row = ScanRow::at(x).with_criterion(&report).with_witness(witness);
    row.ic_base = Some(
        coherent_information_with(setup.family.base(), &setup.channel, tol)
            .context(ctx("coherent information", x))?
            .value,
    );
    Ok(Point {
        row,
        detail: json!({ "criterion_report": report, "witness": witness }),
    })
}

fn point(cfg: &ScenarioConfig, x: f64, tol: &Tolerances) -> CliResult<Point> {
    match cfg.scenario {
        ScenarioName::DepolarizingN2 => depolarizing_n2_point(x, tol),
        ScenarioName::PlatypusAd => platypus_ad_point(x, cfg, tol),
        ScenarioName::GapDepolarizing => gap_depolarizing_point(x, tol),
        ScenarioName::DephrasureGap => dephrasure_point(x, cfg, tol),
        ScenarioName::HashingCurve => hashing_point(x, tol),
        ScenarioName::Custom => custom_point(x, cfg, tol),
    }
}

fn root_or_error(r: cohpert::Result<f64>) -> Value {
    match r {
        Ok(x) => json!({ "root": x }),
        Err(e) => json!({ "root": null, "error": e.to_string() }),
    }
}

fn summary(cfg: &ScenarioConfig, grid: &Grid, tol: &Tolerances) -> CliResult<Value> {
    let interval = (grid.lo, grid.hi);
    Ok(match cfg.scenario {
        ScenarioName::DepolarizingN2 => json!({
            "criterion": CriterionKind::C3,
            "threshold": root_or_error(threshold_scan(
                depolarizing_pair,
                |_| Ok(families::plus_zero_pair()),
                CriterionKind::C3,
                interval,
                tol,
            )),
        }),
        ScenarioName::PlatypusAd => {
            let (s, w, a) = (cfg.param("s", 0.2), cfg.param("w", 0.3), cfg.param("a", 0.99));
            json!({
                "s": s,
                "w": w,
                "a": a,
                "boundary": families::platypus_damping_boundary(s, w),
                "criterion": CriterionKind::C2,
                "threshold": root_or_error(threshold_scan(
                    |g| platypus(s)?.tensor(&amplitude_damping(g)?),
                    |_| families::platypus_damping(w, a),
                    CriterionKind::C2,
                    interval,
                    tol,
                )),
            })
        }
        ScenarioName::DephrasureGap => {
            let p = cfg.param("p", 0.1);
            json!({ "p": p, "region_boundary": families::dephrasure_region_boundary(p) })
        }
        ScenarioName::HashingCurve => json!({
            "zero_crossing": root_or_error(bisect_margin(
                |p| hashing_value(p, tol).map_err(|e| match e {
                    CliError::Numeric { source, .. } => source,
                    other => cohpert::Error::InvalidSpec(other.to_string()),
                }),
                grid.lo,
                grid.hi,
                1e-6,
            )),
        }),
        ScenarioName::GapDepolarizing | ScenarioName::Custom => json!({}),
    })
}

/// Evaluates every grid point of `cfg` on the current rayon pool, in
/// parameter order.
pub fn run_scan(cfg: &ScenarioConfig, grid: &Grid, tol: &Tolerances) -> CliResult<ScenarioRun> {
    let param = axis_name(cfg)?;
    if cfg.scenario == ScenarioName::Custom {
        custom_setup(cfg, None)?;
    }
    let points: Vec<Point> = grid
        .points()
        .into_par_iter()
        .map(|x| point(cfg, x, tol))
        .collect::<CliResult<_>>()?;
    let (rows, details): (Vec<ScanRow>, Vec<Value>) = points.into_iter().map(|p| (p.row, p.detail)).unzip();
    let report = json!({
        "scenario": cfg.scenario,
        "parameter": param,
        "params": cfg.params,
        "grid": grid,
        "seed": cfg.seed,
        "tolerances": tol,
        "summary": summary(cfg, grid, tol)?,
        "points": rows.iter().zip(details).map(|(r, d)| json!({ "parameter": r.parameter, "result": d })).collect::<Vec<_>>(),
    });
    Ok(ScenarioRun {
        scenario: cfg.scenario,
        rows,
        report,
    })
}

/// Single evaluation. `custom` yields a bare criterion report; named
/// scenarios yield their per-point detail at the configured parameter.
pub fn run_check(cfg: &ScenarioConfig, tol: &Tolerances) -> CliResult<Value> {
    match cfg.scenario {
        ScenarioName::Custom => {
            let setup = custom_setup(cfg, None)?;
            Ok(serde_json::to_value(custom_report(&setup, tol)?)?)
        }
        other => {
            let (name, default, _) = axis(other);
            let x = cfg.param(name, default);
            Ok(point(cfg, x, tol)?.detail)
        }
    }
}
