//! Scenario files.
//!
//! Scenarios are TOML documents; unknown keys are rejected. Angles accept
//! plain numbers or short expressions such as `"pi/6"`, `"-2*pi/3"` or
//! `"0.5pi"`.

use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::acquisition::SourceModel;
use crate::probes::{make_probe, reference_layout, strategy_grouping, Coherence, ModeLayout, StrategyId};
use crate::qstate::{PhotonSite, ProductState};

use super::HarnessError;

pub const DEFAULT_STEPS: usize = 61;
pub const DEFAULT_SHOTS: u64 = 7000;

/// Radians, written either as a number or as a multiple of `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(pub f64);

impl Angle {
    pub fn parse(text: &str) -> Option<f64> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.to_ascii_lowercase();
        if let Ok(v) = s.parse::<f64>() {
            return Some(v);
        }
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
        };
        let (head, den) = match body.split_once('/') {
            Some((h, d)) => (h, d.parse::<f64>().ok()?),
            None => (body, 1.0),
        };
        let coef = head.strip_suffix("pi")?;
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
        let v = sign * coef * std::f64::consts::PI / den;
        v.is_finite().then_some(v)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct AngleVisitor;
        impl Visitor<'_> for AngleVisitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or an expression like \"pi/6\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
                Ok(Angle(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Angle, E> {
                Angle::parse(v)
                    .map(Angle)
                    .ok_or_else(|| E::custom(format!("cannot read {v:?} as an angle")))
            }
        }
        d.deserialize_any(AngleVisitor)
    }
}

/// A visibility given directly or as a fitted `[V₊, V₋]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Visibility {
    Single(f64),
    Pair([f64; 2]),
}

impl Visibility {
    /// The pair collapses to `√((V₊² + V₋²)/2)`.
    pub fn value(self) -> f64 {
        match self {
            Visibility::Single(v) => v,
            Visibility::Pair([p, m]) => ((p * p + m * m) / 2.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Weighted mean phase `αᵀθ`.
    #[default]
    ThetaHat,
    /// The swept value itself.
    Parameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepTarget {
    Mode(usize),
    Named(AllModes),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllModes {
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// 1-based mode index, or `"all"` to shift every mode together.
    pub parameter: SweepTarget,
    pub start: Angle,
    pub stop: Angle,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.start.0, self.stop.0);
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    b
                } else {
                    a + (b - a) * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn modes(&self, num_modes: usize) -> Vec<usize> {
        match self.parameter {
            SweepTarget::Mode(k) => vec![k],
            SweepTarget::Named(AllModes::All) => (1..=num_modes).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub groups: usize,
    pub shots_per_group: u64,
    pub theta_true: Vec<Angle>,
    /// 1-based group whose parity is estimated.
    #[serde(default = "default_group")]
    pub group: usize,
}

fn default_group() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub strategy: StrategyId,
    pub num_modes: usize,
    pub seed: u64,
    /// Photon sites in photon order; the strategy's reference layout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<Vec<PhotonSite>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping: Option<Vec<Vec<usize>>>,
    /// One visibility for every group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<Visibility>,
    /// One visibility per group, in group order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_visibility: Option<Vec<Visibility>>,
    /// Per-mode base phases; the sweep value is added to the swept modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_fixed: Option<Vec<Angle>>,
    #[serde(default)]
    pub axis: Axis,
    /// 1-based groups to fit; every group that moves with the sweep by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fringes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_shots")]
    pub shots_per_point: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationConfig>,
    /// Post-selected acquisition; ideal shots when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceModel>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated configuration with its probe built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub layout: ModeLayout,
    pub probe: ProductState,
    pub theta_fixed: Vec<f64>,
}

fn invalid(field: &str, message: impl fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{field}: {message}"))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads a TOML scenario, or the echoed config of a JSON run report.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let report: super::RunReport = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            return Ok(report.config);
        }
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn build_layout(&self) -> Result<ModeLayout, HarnessError> {
        let layout = match &self.photons {
            Some(sites) => ModeLayout::new(self.num_modes, sites.clone())
                .map_err(|e| invalid("photons", e))?,
            None => {
                let layout = reference_layout(self.strategy).map_err(|e| invalid("photons", e))?;
                if layout.num_modes() != self.num_modes {
                    return Err(invalid(
                        "num_modes",
                        format!(
                            "{} has a {}-mode reference layout; list photons explicitly",
                            self.strategy,
                            layout.num_modes()
                        ),
                    ));
                }
                layout
            }
        };
        match &self.grouping {
            Some(g) => layout
                .with_grouping(g.clone())
                .map_err(|e| invalid("grouping", e)),
            None => Ok(layout),
        }
    }

    /// Checks every field and builds the probe.
    pub fn validate(&self) -> Result<Scenario, HarnessError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(invalid("name", "use letters, digits, '_' or '-'"));
        }
        if self.num_modes == 0 {
            return Err(invalid("num_modes", "must be at least 1"));
        }
        let layout = self.build_layout()?;
        let groups = strategy_grouping(self.strategy, &layout).map_err(|e| invalid("strategy", e))?;

        let coherence = match (&self.visibility, &self.group_visibility) {
            (Some(_), Some(_)) => {
                return Err(invalid("group_visibility", "give either visibility or group_visibility"))
            }
            (Some(v), None) => Coherence::Uniform(v.value()),
            (None, Some(list)) => {
                if list.len() != groups.len() {
                    return Err(invalid(
                        "group_visibility",
                        format!("{} entries for {} groups", list.len(), groups.len()),
                    ));
                }
                Coherence::PerGroup(list.iter().map(|v| v.value()).collect())
            }
            (None, None) => Coherence::Uniform(1.0),
        };
        let probe = make_probe(self.strategy, &layout, &coherence).map_err(|e| invalid("visibility", e))?;

        let theta_fixed = match &self.theta_fixed {
            Some(t) if t.len() != self.num_modes => {
                return Err(invalid(
                    "theta_fixed",
                    format!("{} phases for {} modes", t.len(), self.num_modes),
                ))
            }
            Some(t) => t.iter().map(|a| a.0).collect(),
            None => vec![0.0; self.num_modes],
        };
        if theta_fixed.iter().any(|t| !t.is_finite()) {
            return Err(invalid("theta_fixed", "phases must be finite"));
        }

        if let Some(sweep) = &self.sweep {
            if sweep.steps < 2 {
                return Err(invalid("sweep.steps", format!("{} < 2", sweep.steps)));
            }
            if let SweepTarget::Mode(k) = sweep.parameter {
                if k == 0 || k > self.num_modes {
                    return Err(invalid(
                        "sweep.parameter",
                        format!("mode {k} outside 1..={}", self.num_modes),
                    ));
                }
            }
            if !(sweep.start.0.is_finite() && sweep.stop.0.is_finite()) || sweep.start == sweep.stop {
                return Err(invalid("sweep", "start and stop must be finite and distinct"));
            }
        }
        if let Some(fringes) = &self.fringes {
            if fringes.is_empty() {
                return Err(invalid("fringes", "list at least one group"));
            }
            if let Some(g) = fringes.iter().find(|&&g| g == 0 || g > groups.len()) {
                return Err(invalid("fringes", format!("group {g} outside 1..={}", groups.len())));
            }
        }
        if self.shots_per_point == 0 {
            return Err(invalid("shots_per_point", "must be positive"));
        }
        if let Some(est) = &self.estimation {
            if est.groups < 2 {
                return Err(invalid("estimation.groups", format!("{} < 2", est.groups)));
            }
            if est.shots_per_group < 2 {
                return Err(invalid(
                    "estimation.shots_per_group",
                    format!("{} < 2", est.shots_per_group),
                ));
            }
            if est.theta_true.is_empty() {
                return Err(invalid("estimation.theta_true", "list at least one phase"));
            }
            if est.group == 0 || est.group > groups.len() {
                return Err(invalid(
                    "estimation.group",
                    format!("group {} outside 1..={}", est.group, groups.len()),
                ));
            }
        }
        if let Some(source) = &self.source {
            source.validate().map_err(|e| invalid("source", e))?;
            if source.num_channels() != layout.num_photons() {
                return Err(invalid(
                    "source",
                    format!(
                        "{} channels for {} photons",
                        source.num_channels(),
                        layout.num_photons()
                    ),
                ));
            }
        }
        Ok(Scenario {
            config: self.clone(),
            layout,
            probe,
            theta_fixed,
        })
    }
}
