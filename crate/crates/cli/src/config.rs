use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use cohpert::channel::{matrix_from_json, JsonMatrix};
use cohpert::criteria::Sense;
use cohpert::perturbation::PerturbationFamily;
use cohpert::{families, random, ChannelSpec, DensityMatrix, HermitianOperator};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    DepolarizingN2,
    PlatypusAd,
    GapDepolarizing,
    DephrasureGap,
    HashingCurve,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::DepolarizingN2 => "depolarizing-n2",
            ScenarioName::PlatypusAd => "platypus-ad",
            ScenarioName::GapDepolarizing => "gap-depolarizing",
            ScenarioName::DephrasureGap => "dephrasure-gap",
            ScenarioName::HashingCurve => "hashing-curve",
            ScenarioName::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> CliResult<Self> {
        let g = Self { lo, hi, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(CliError::Invalid(format!("grid needs lo < hi, got {}..{}", self.lo, self.hi)));
        }
        if self.steps < 2 {
            return Err(CliError::Invalid(format!("grid needs at least 2 steps, got {}", self.steps)));
        }
        Ok(())
    }

    /// Evenly spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|k| if k == n { self.hi } else { self.lo + (self.hi - self.lo) * k as f64 / n as f64 })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = |message: &str| CliError::Argument {
            arg: s.to_string(),
            message: message.to_string(),
        };
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(bad("expected lo:hi:steps"));
        };
        let lo = lo.trim().parse().map_err(|_| bad("lo is not a number"))?;
        let hi = hi.trim().parse().map_err(|_| bad("hi is not a number"))?;
        let steps = steps.trim().parse().map_err(|_| bad("steps is not a non-negative integer"))?;
        Grid::new(lo, hi, steps)
    }
}

/// Parses `key=value` with a real value.
pub fn parse_key_value(s: &str) -> CliResult<(String, f64)> {
    let bad = |message: &str| CliError::Argument {
        arg: s.to_string(),
        message: message.to_string(),
    };
    let (k, v) = s.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    let v: f64 = v.trim().parse().map_err(|_| bad("value is not a number"))?;
    if k.trim().is_empty() {
        return Err(bad("empty key"));
    }
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionChoice {
    C1,
    C2,
    C3,
    Thm1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyPreset {
    PlusZeroPair,
    ZFlip,
    PlatypusDamping,
    Random,
}

/// Perturbation family: a preset, or explicit `base`, `a1` and optional
/// `a2` matrices as rows of `[re, im]` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<FamilyPreset>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<JsonMatrix>,
}

impl FamilySpec {
    pub fn build(&self, dim_in: usize, seed: u64) -> CliResult<PerturbationFamily> {
        let explicit = self.base.is_some() || self.a1.is_some() || self.a2.is_some();
        match (self.preset, explicit) {
            (Some(_), true) => Err(CliError::Invalid("family: give either `preset` or matrices, not both".into())),
            (None, false) => Err(CliError::Invalid("family: needs `preset` or `base` and `a1`".into())),
            (Some(preset), false) => self.preset_family(preset, dim_in, seed),
            (None, true) => self.matrix_family(),
        }
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn preset_family(&self, preset: FamilyPreset, dim_in: usize, seed: u64) -> CliResult<PerturbationFamily> {
        match preset {
            FamilyPreset::PlusZeroPair => Ok(families::plus_zero_pair()),
            FamilyPreset::ZFlip => Ok(families::z_flip()),
            FamilyPreset::PlatypusDamping => families::platypus_damping(self.param("w", 0.3), self.param("a", 0.99))
                .context(|| "family platypus_damping".into()),
            FamilyPreset::Random => {
                let mut rng = random::rng(seed);
                let base = random::density(&mut rng, dim_in, self.param("t", 0.2));
                let a1 = random::traceless(&mut rng, dim_in).scale(self.param("scale", 0.5));
                PerturbationFamily::first_order(base, a1).context(|| "family random".into())
            }
        }
    }

    fn matrix_family(&self) -> CliResult<PerturbationFamily> {
        let (Some(base), Some(a1)) = (&self.base, &self.a1) else {
            return Err(CliError::Invalid("family: `base` and `a1` are both required".into()));
        };
        let base = DensityMatrix::from_matrix(matrix_from_json(base).context(|| "family.base".into())?)
            .context(|| "family.base".into())?;
        let a1 = HermitianOperator::new(matrix_from_json(a1).context(|| "family.a1".into())?)
            .context(|| "family.a1".into())?;
        let a2 = match &self.a2 {
            Some(m) => HermitianOperator::new(matrix_from_json(m).context(|| "family.a2".into())?)
                .context(|| "family.a2".into())?,
            None => HermitianOperator::zeros(base.dim()),
        };
        PerturbationFamily::new(base, a1, a2).context(|| "family".into())
    }
}

/// Run description. `channel`, `family`, `criterion`, `sense` and
/// `scan_param` are read only by the `custom` scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<Sense>,
    /// Channel parameter swept by `scan` for the `custom` scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_param: Option<String>,
}

fn default_seed() -> u64 {
    random::DEFAULT_SEED
}

impl ScenarioConfig {
    pub fn named(scenario: ScenarioName) -> Self {
        Self {
            scenario,
            params: BTreeMap::new(),
            grid: None,
            output: OutputPaths::default(),
            seed: default_seed(),
            channel: None,
            family: None,
            criterion: None,
            sense: None,
            scan_param: None,
        }
    }

    pub fn from_json_str(text: &str, path: &Path) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if let Some(g) = &cfg.grid {
            g.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text, path)
    }

    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.05:0.26:43".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 43);
        assert_eq!(pts[0], 0.05);
        assert_eq!(pts[42], 0.26);
        assert!((pts[1] - 0.055).abs() < 1e-15);
        assert!("0.3:0.1:5".parse::<Grid>().is_err());
        assert!("0:1:1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
    }

    #[test]
    fn key_value_parsing() {
        assert_eq!(parse_key_value("decision=1e-6").unwrap(), ("decision".into(), 1e-6));
        assert!(parse_key_value("decision").is_err());
        assert!(parse_key_value("=1").is_err());
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = ScenarioConfig::from_json_str(r#"{"scenario": "custom", "grid": {"lo": 0, "hi": "x", "steps": 3}}"#, Path::new("c.json"))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("grid.hi"), "{msg}");
        let err = ScenarioConfig::from_json_str(r#"{"scenario": "nope"}"#, Path::new("c.json")).unwrap_err();
        assert!(err.to_string().contains("scenario"));
    }

    #[test]
    fn explicit_family_round_trip() {
        let fam = FamilySpec {
            base: Some(vec![vec![[0.5, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]]),
            a1: Some(vec![vec![[0.1, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-0.1, 0.0]]]),
            ..Default::default()
        };
        let built = fam.build(2, 1).unwrap();
        assert_eq!(built.dim(), 2);
        assert!(FamilySpec::default().build(2, 1).is_err());
    }
}
