//! Golden digests for the bundled presets.
//!
//! Every preset has one manifest entry. Exact entries pin the SHA-256 of
//! the rendered CSV and JSON outputs; statistical entries pin report metrics
//! within a tolerance and survive re-seeding.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::harness::output::{render, RenderOptions};
use crate::harness::{run_preset, HarnessError, RunReport, PRESETS};

pub const MANIFEST: &str = include_str!("../goldens/manifest.toml");
pub const MANIFEST_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/goldens/manifest.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldenClass {
    Exact,
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub name: String,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenCase {
    pub preset: String,
    pub class: GoldenClass,
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub case: Vec<GoldenCase>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("golden manifest: {e}")))
    }

    pub fn bundled() -> Result<Self, HarnessError> {
        Self::parse(MANIFEST)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoldenStatus {
    Pass,
    MissingGolden,
    /// Manifest entry without a matching preset.
    UnknownPreset,
    DigestMismatch {
        artifact: &'static str,
        expected: String,
        actual: String,
    },
    OutOfTolerance {
        metric: String,
        expected: f64,
        actual: f64,
        tolerance: f64,
    },
    UnknownMetric(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    pub preset: String,
    pub class: Option<GoldenClass>,
    pub failures: Vec<GoldenStatus>,
}

impl GoldenOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for GoldenOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.class {
            Some(GoldenClass::Exact) => "exact",
            Some(GoldenClass::Statistical) => "statistical",
            None => "-",
        };
        if self.passed() {
            return write!(f, "PASS {} ({class})", self.preset);
        }
        write!(f, "FAIL {} ({class}):", self.preset)?;
        for s in &self.failures {
            match s {
                GoldenStatus::Pass => {}
                GoldenStatus::MissingGolden => write!(f, " missing golden entry;")?,
                GoldenStatus::UnknownPreset => write!(f, " no such preset;")?,
                GoldenStatus::DigestMismatch {
                    artifact,
                    expected,
                    actual,
                } => write!(f, " {artifact} digest {actual} != {expected};")?,
                GoldenStatus::OutOfTolerance {
                    metric,
                    expected,
                    actual,
                    tolerance,
                } => write!(f, " {metric} = {actual} outside {expected} ± {tolerance};")?,
                GoldenStatus::UnknownMetric(m) => write!(f, " unknown metric {m};")?,
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical rendering (CSV plus JSON, no SVG).
pub fn output_digest(report: &RunReport) -> Result<String, HarnessError> {
    let mut h = Sha256::new();
    for a in render(report, RenderOptions::default())? {
        h.update(a.name.as_bytes());
        h.update([0]);
        h.update((a.bytes.len() as u64).to_le_bytes());
        h.update(&a.bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// Named scalar from a report.
///
/// `fi_peak_fit`, `fi_peak_model` and `db_vs_snl` read the sweep totals;
/// `estimation_ratio` is `std_dev / crb` at the first estimation point.
pub fn metric(report: &RunReport, name: &str) -> Option<f64> {
    let sweep = report.sweep.as_ref();
    match name {
        "fi_peak_fit" => sweep.map(|s| s.fi_peak_fit),
        "fi_peak_model" => sweep.map(|s| s.fi_peak_model),
        "db_vs_snl" => sweep.map(|s| s.db_vs_snl),
        "estimation_ratio" => report
            .estimation
            .as_ref()
            .and_then(|e| e.points.first())
            .map(|p| p.result.std_dev / p.result.crb),
        _ => None,
    }
}

fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn check_case(case: &GoldenCase, seed: Option<u64>) -> Result<Vec<GoldenStatus>, HarnessError> {
    let Some(text) = preset_text(&case.preset) else {
        return Ok(vec![GoldenStatus::UnknownPreset]);
    };
    let mut failures = Vec::new();
    let config = sha256_hex(text.as_bytes());
    if config != case.config_sha256 {
        failures.push(GoldenStatus::DigestMismatch {
            artifact: "config",
            expected: case.config_sha256.clone(),
            actual: config,
        });
    }
    let report = run_preset(&case.preset, seed)?;
    match case.class {
        GoldenClass::Exact => {
            let actual = output_digest(&report)?;
            let expected = case.output_sha256.clone().unwrap_or_default();
            if actual != expected {
                failures.push(GoldenStatus::DigestMismatch {
                    artifact: "output",
                    expected,
                    actual,
                });
            }
        }
        GoldenClass::Statistical => {
            for m in &case.metrics {
                match metric(&report, &m.name) {
                    None => failures.push(GoldenStatus::UnknownMetric(m.name.clone())),
                    Some(v) if (v - m.expected).abs() > m.tolerance => {
                        failures.push(GoldenStatus::OutOfTolerance {
                            metric: m.name.clone(),
                            expected: m.expected,
                            actual: v,
                            tolerance: m.tolerance,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(failures)
}

/// Re-runs every preset against `manifest`; `seed` replaces each preset's seed.
pub fn verify_goldens(manifest: &Manifest, seed: Option<u64>) -> Result<Vec<GoldenOutcome>, HarnessError> {
    let mut out = Vec::new();
    for (name, _) in PRESETS {
        let cases: Vec<&GoldenCase> = manifest.case.iter().filter(|c| c.preset == *name).collect();
        let (class, failures) = match cases.as_slice() {
            [] => (None, vec![GoldenStatus::MissingGolden]),
            [case] => (Some(case.class), check_case(case, seed)?),
            _ => {
                return Err(HarnessError::Config(format!(
                    "golden manifest: {} entries for preset {name}",
                    cases.len()
                )))
            }
        };
        out.push(GoldenOutcome {
            preset: name.to_string(),
            class,
            failures,
        });
    }
    for case in &manifest.case {
        if preset_text(&case.preset).is_none() {
            out.push(GoldenOutcome {
                preset: case.preset.clone(),
                class: Some(case.class),
                failures: vec![GoldenStatus::UnknownPreset],
            });
        }
    }
    Ok(out)
}

/// Recomputes digests for every preset, keeping classes and metrics of
/// existing entries. New presets become exact entries.
pub fn refresh_manifest(manifest: &Manifest) -> Result<Manifest, HarnessError> {
    let mut case = Vec::new();
    for (name, text) in PRESETS {
        let old = manifest.case.iter().find(|c| c.preset == *name);
        let class = old.map_or(GoldenClass::Exact, |c| c.class);
        let output_sha256 = match class {
            GoldenClass::Exact => Some(output_digest(&run_preset(name, None)?)?),
            GoldenClass::Statistical => None,
        };
        case.push(GoldenCase {
            preset: name.to_string(),
            class,
            config_sha256: sha256_hex(text.as_bytes()),
            output_sha256,
            metrics: old.map(|c| c.metrics.clone()).unwrap_or_default(),
        });
    }
    Ok(Manifest { case })
}
