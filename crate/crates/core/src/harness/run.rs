use rayon::prelude::*;

use crate::acquisition::simulate_run;
use crate::error::Error;
use crate::estimation::{
    db_reduction, fi_curve_for_probe, fit_fringe, group_fi, repeat_estimation, theoretical_limits,
    FringeSample, ParityModel, TheoreticalLimit,
};
use crate::evolution::{apply_phases, PhaseVector};
use crate::measurement::{outcome_distribution, sample_counts, subset_parity_marginal};
use crate::probes::{weights, StrategyId};
use crate::rng;

use super::config::{Axis, Scenario};
use super::{
    EstimationPoint, EstimationReport, FringeReport, HarnessError, PointRecord, RunReport,
    SweepReport, TotalRecord,
};

/// Dense evaluation points per grid interval when locating FI peaks.
const PEAK_OVERSAMPLING: usize = 16;

/// Runs the sweep and the estimation study, whichever are configured.
pub fn run(scenario: &Scenario) -> Result<RunReport, HarnessError> {
    if scenario.config.sweep.is_none() && scenario.config.estimation.is_none() {
        return Err(HarnessError::Config(
            "nothing to run: add a [sweep] or [estimation] table".into(),
        ));
    }
    let sweep = match scenario.config.sweep {
        Some(_) => Some(run_sweep(scenario)?),
        None => None,
    };
    let estimation = match scenario.config.estimation {
        Some(_) => Some(run_estimation(scenario)?),
        None => None,
    };
    Ok(RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        sampler_version: rng::SAMPLER_VERSION.to_string(),
        seed: scenario.config.seed,
        config: scenario.config.clone(),
        sweep,
        estimation,
    })
}

fn limit_lines(scenario: &Scenario) -> Vec<TheoreticalLimit> {
    StrategyId::ALL
        .into_iter()
        .filter(|s| !matches!(s, StrategyId::Generic | StrategyId::Individual))
        .filter_map(|s| theoretical_limits(s, &scenario.layout).ok())
        .collect()
}

struct Fringe {
    group: usize,
    photons: Vec<usize>,
    visibility: f64,
    multiplier: f64,
    snl_fi: f64,
}

struct PointData {
    parameter: f64,
    axis: f64,
    shots: u64,
    exact: Vec<(f64, f64)>,
    sampled: Vec<(f64, f64)>,
    phases: Vec<f64>,
    fi_effective: f64,
}

/// Sweeps the configured parameter, samples every grid point and fits each fringe.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepReport, HarnessError> {
    let cfg = &scenario.config;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("sweep: missing [sweep] table".into()))?;
    let layout = &scenario.layout;
    let probe = &scenario.probe;
    let swept = sweep.modes(cfg.num_modes);
    let alpha = weights(layout);
    let axis_slope = match cfg.axis {
        Axis::Parameter => 1.0,
        Axis::ThetaHat => swept.iter().map(|&k| alpha[k - 1]).sum(),
    };

    let mut fringes = Vec::new();
    for (i, g) in probe.groups().iter().enumerate() {
        let slope: f64 = g
            .members()
            .iter()
            .filter(|s| swept.contains(&s.mode))
            .map(|s| f64::from(s.passes))
            .sum();
        let listed = cfg.fringes.as_ref().map(|f| f.contains(&(i + 1)));
        if listed == Some(false) || (listed.is_none() && slope == 0.0) {
            continue;
        }
        if slope == 0.0 {
            return Err(HarnessError::Config(format!(
                "fringes: group {} does not depend on the swept modes",
                i + 1
            )));
        }
        fringes.push(Fringe {
            group: i + 1,
            photons: g.photon_ids().to_vec(),
            visibility: g.coherence(),
            multiplier: slope / axis_slope,
            snl_fi: g.members().iter().map(|s| f64::from(s.passes)).sum(),
        });
    }
    if fringes.is_empty() {
        return Err(HarnessError::Config(
            "sweep: no group depends on the swept modes".into(),
        ));
    }

    let grid = sweep.grid();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(index, &x)| -> Result<PointData, Error> {
            let mut theta = scenario.theta_fixed.clone();
            for &k in &swept {
                theta[k - 1] += x;
            }
            let theta = PhaseVector::new(theta)?;
            let evolved = apply_phases(probe, &theta)?;
            let dist = outcome_distribution(&evolved)?;
            let seed = rng::derive_seed(cfg.seed, index as u64);
            let record = match &cfg.source {
                Some(source) => simulate_run(source, probe, &theta, seed)?.0,
                None => sample_counts(&dist, cfg.shots_per_point, seed),
            };
            if record.shots == 0 {
                return Err(Error::InsufficientData { needed: 1, got: 0 });
            }
            let mut exact = Vec::with_capacity(fringes.len());
            let mut sampled = Vec::with_capacity(fringes.len());
            let mut phases = Vec::with_capacity(fringes.len());
            for f in &fringes {
                let pair = subset_parity_marginal(&dist, &f.photons)?;
                exact.push((pair.plus, pair.minus));
                let counts = record.subset_parity_counts(&f.photons)?;
                let n = counts.total() as f64;
                sampled.push((counts.plus as f64 / n, counts.minus as f64 / n));
                phases.push(evolved.groups()[f.group - 1].phase());
            }
            let axis = match cfg.axis {
                Axis::Parameter => x,
                Axis::ThetaHat => theta.dot(&alpha),
            };
            Ok(PointData {
                parameter: x,
                axis,
                shots: record.shots,
                exact,
                sampled,
                phases,
                fi_effective: fi_curve_for_probe(&evolved, layout, 0.0),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut reports = Vec::with_capacity(fringes.len());
    for (j, f) in fringes.iter().enumerate() {
        let samples: Vec<FringeSample> = points
            .iter()
            .map(|p| FringeSample {
                theta_hat: p.axis,
                p_plus: p.sampled[j].0,
                p_minus: p.sampled[j].1,
                weight: 1.0,
            })
            .collect();
        let fit = fit_fringe(&samples, f.multiplier)?;
        let c2 = f.multiplier * f.multiplier;
        let mean_square = |p: f64, m: f64| (p * p + m * m) / 2.0;
        let lo = mean_square(
            (fit.v_plus - fit.v_plus_ci90).max(0.0),
            (fit.v_minus - fit.v_minus_ci90).max(0.0),
        );
        let hi = mean_square(
            (fit.v_plus + fit.v_plus_ci90).min(1.0),
            (fit.v_minus + fit.v_minus_ci90).min(1.0),
        );
        let fi_peak_fit = c2 * fit.visibility().powi(2).min(1.0);
        let records = points
            .iter()
            .map(|p| {
                let (fi_lo, fi_hi) = fit.fi_band(p.axis);
                PointRecord {
                    parameter: p.parameter,
                    theta_hat: p.axis,
                    shots: p.shots,
                    p_plus_exact: p.exact[j].0,
                    p_minus_exact: p.exact[j].1,
                    p_plus_sampled: p.sampled[j].0,
                    p_minus_sampled: p.sampled[j].1,
                    fi_model: c2 * group_fi(f.visibility, p.phases[j]),
                    fi_fit: fit.fi(p.axis),
                    fi_fit_lo90: fi_lo,
                    fi_fit_hi90: fi_hi,
                }
            })
            .collect();
        reports.push(FringeReport {
            group: f.group,
            photons: f.photons.clone(),
            multiplier: f.multiplier,
            visibility: f.visibility,
            fi_peak_model: c2 * f.visibility * f.visibility,
            fi_peak_fit,
            fi_peak_lo90: c2 * lo,
            fi_peak_hi90: c2 * hi,
            snl_fi: f.snl_fi,
            db_vs_snl: db_reduction(fi_peak_fit, f.snl_fi),
            fit,
            points: records,
        });
    }

    let totals: Vec<TotalRecord> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let sum = |g: &dyn Fn(&PointRecord) -> f64| reports.iter().map(|r| g(&r.points[i])).sum();
            TotalRecord {
                theta_hat: p.axis,
                fi_model: sum(&|r| r.fi_model),
                fi_fit: sum(&|r| r.fi_fit),
                fi_fit_lo90: sum(&|r| r.fi_fit_lo90),
                fi_fit_hi90: sum(&|r| r.fi_fit_hi90),
                fi_effective: p.fi_effective,
            }
        })
        .collect();

    // Peaks of the summed curves on a dense grid between the sweep ends.
    let (a0, a1) = (points[0].axis, points[points.len() - 1].axis);
    let dense = PEAK_OVERSAMPLING * (points.len() - 1) + 1;
    let mut fi_peak_model = 0.0f64;
    let mut fi_peak_fit = 0.0f64;
    for i in 0..dense {
        let a = a0 + (a1 - a0) * i as f64 / (dense - 1) as f64;
        let mut model = 0.0;
        let mut fitted = 0.0;
        for (j, (f, r)) in fringes.iter().zip(&reports).enumerate() {
            let phase = points[0].phases[j] + f.multiplier * (a - a0);
            model += f.multiplier * f.multiplier * group_fi(f.visibility, phase);
            fitted += r.fit.fi(a);
        }
        fi_peak_model = fi_peak_model.max(model);
        fi_peak_fit = fi_peak_fit.max(fitted);
    }
    if let [single] = reports.as_slice() {
        fi_peak_model = single.fi_peak_model;
        fi_peak_fit = single.fi_peak_fit;
    }
    let snl_fi = fringes.iter().map(|f| f.snl_fi).sum();
    Ok(SweepReport {
        axis: cfg.axis,
        fringes: reports,
        totals,
        fi_peak_model,
        fi_peak_fit,
        snl_fi,
        db_vs_snl: db_reduction(fi_peak_fit, snl_fi),
        limits: limit_lines(scenario),
        total_shots: points.iter().map(|p| p.shots).sum(),
    })
}

/// Repeated maximum-likelihood estimation at each configured true phase.
///
/// The estimated group's parity is modelled as a fringe in the weighted
/// mean phase with the configured visibility.
pub fn run_estimation(scenario: &Scenario) -> Result<EstimationReport, HarnessError> {
    let cfg = &scenario.config;
    let est = cfg
        .estimation
        .as_ref()
        .ok_or_else(|| HarnessError::Config("estimation: missing [estimation] table".into()))?;
    let layout = &scenario.layout;
    let group = &scenario.probe.groups()[est.group - 1];
    let alpha = weights(layout);
    let c = group.phase_coefficients(layout.num_modes());
    let norm: f64 = alpha.iter().map(|a| a * a).sum();
    let projected: f64 = c.iter().zip(&alpha).map(|(c, a)| c * a).sum::<f64>() / norm;
    let model = ParityModel {
        multiplier: projected,
        visibility: group.coherence(),
        offset: group.phase(),
    };
    let s = est.shots_per_group as f64;
    let snl = f64::from(layout.total_passes());
    let limit = theoretical_limits(cfg.strategy, layout).ok();
    let points = est
        .theta_true
        .iter()
        .enumerate()
        .map(|(i, theta)| {
            let result = repeat_estimation(
                &model,
                theta.0,
                est.groups,
                est.shots_per_group,
                rng::derive_seed(cfg.seed, 1 << 32 | i as u64),
            )?;
            Ok(EstimationPoint {
                result,
                snl_delta: 1.0 / (s * snl).sqrt(),
                limit_delta: limit.map(|l| 1.0 / (s * l.fi).sqrt()),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(EstimationReport {
        group: est.group,
        model,
        points,
    })
}
