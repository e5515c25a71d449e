//! Config-driven scenario runner.
//!
//! A [`ScenarioConfig`] describes a probe, a phase sweep and optionally a
//! repeated-estimation study. [`run`] executes it and returns a
//! self-contained [`RunReport`]; [`output::render`] turns a report into
//! CSV, JSON and SVG files.

pub mod config;
pub mod output;
pub mod presets;
mod run;
mod svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::estimation::{EstimationResult, FringeFit, ParityModel, TheoreticalLimit};

pub use config::{Angle, Axis, OutputFormat, Scenario, ScenarioConfig, Visibility};
pub use presets::{preset, preset_config, reproduce, run_preset, FIGURES, PRESETS};
pub use run::{run, run_estimation, run_sweep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("unknown figure {0:?}; expected one of fig3, fig4, fig5, ext1")]
    UnknownFigure(String),
}

impl HarnessError {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownFigure(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Io(_) => 4,
        }
    }
}

/// One grid point of one fringe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    /// Swept value added to the swept modes.
    pub parameter: f64,
    /// Position on the configured axis.
    pub theta_hat: f64,
    pub shots: u64,
    pub p_plus_exact: f64,
    pub p_minus_exact: f64,
    pub p_plus_sampled: f64,
    pub p_minus_sampled: f64,
    pub fi_model: f64,
    pub fi_fit: f64,
    pub fi_fit_lo90: f64,
    pub fi_fit_hi90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeReport {
    /// 1-based group index in the probe.
    pub group: usize,
    pub photons: Vec<usize>,
    /// Fringe phase per unit of the axis.
    pub multiplier: f64,
    pub visibility: f64,
    pub fit: FringeFit,
    /// `c²V²` with the configured visibility.
    pub fi_peak_model: f64,
    /// `c²V²` with the fitted visibility and its 90% band.
    pub fi_peak_fit: f64,
    pub fi_peak_lo90: f64,
    pub fi_peak_hi90: f64,
    /// Shot-noise reference of this fringe's photons.
    pub snl_fi: f64,
    pub db_vs_snl: f64,
    pub points: Vec<PointRecord>,
}

/// Sum over fitted fringes at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalRecord {
    pub theta_hat: f64,
    pub fi_model: f64,
    pub fi_fit: f64,
    pub fi_fit_lo90: f64,
    pub fi_fit_hi90: f64,
    /// Effective FI of the whole probe for the weighted mean phase.
    pub fi_effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: Axis,
    pub fringes: Vec<FringeReport>,
    pub totals: Vec<TotalRecord>,
    pub fi_peak_model: f64,
    pub fi_peak_fit: f64,
    /// Shot-noise reference of all fitted fringes' photons.
    pub snl_fi: f64,
    pub db_vs_snl: f64,
    /// Noise-free limits of the named strategies on this layout.
    pub limits: Vec<TheoreticalLimit>,
    pub total_shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationPoint {
    pub result: EstimationResult,
    /// `1/√(s·n)` with `n` the total pass count.
    pub snl_delta: f64,
    /// `1/√(s·F)` with the strategy's noise-free limit, when one exists.
    pub limit_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub group: usize,
    pub model: ParityModel,
    pub points: Vec<EstimationPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub sampler_version: String,
    pub seed: u64,
    /// The configuration as run; loading it again reproduces this report.
    pub config: ScenarioConfig,
    pub sweep: Option<SweepReport>,
    pub estimation: Option<EstimationReport>,
}
