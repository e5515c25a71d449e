//! Maximum-likelihood phase estimation from parity counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{sample_counts, CountRecord, OutcomeDistribution, ParityCounts, ParityPair};
use crate::rng;
use crate::stats::{mean, sample_std};

use super::fisher::crb;
use super::limits::fringe_fi;

/// Coarse grid size over one fringe period.
pub const GRID_POINTS: usize = 2001;
/// Golden-section stopping width in radians.
pub const REFINE_TOLERANCE: f64 = 1e-9;

const TIE_TOLERANCE: f64 = 1e-9;
const LOG_FLOOR: f64 = 1e-300;

/// `P₊(θ̂) = (1 + V cos(cθ̂ + δ)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityModel {
    pub multiplier: f64,
    pub visibility: f64,
    #[serde(default)]
    pub offset: f64,
}

impl ParityModel {
    pub fn new(multiplier: f64, visibility: f64) -> Self {
        Self {
            multiplier,
            visibility,
            offset: 0.0,
        }
    }

    pub fn plus_probability(&self, theta_hat: f64) -> f64 {
        (1.0 + self.visibility * (self.multiplier * theta_hat + self.offset).cos()) / 2.0
    }

    /// Per-shot Fisher information at `theta_hat`.
    pub fn fisher(&self, theta_hat: f64) -> f64 {
        fringe_fi(self.multiplier, self.visibility, theta_hat + self.offset / self.multiplier)
    }

    fn log_likelihood(&self, counts: ParityCounts, theta_hat: f64) -> f64 {
        let p = self.plus_probability(theta_hat).clamp(0.0, 1.0);
        let term = |n: u64, q: f64| if n == 0 { 0.0 } else { n as f64 * q.max(LOG_FLOOR).ln() };
        term(counts.plus, p) + term(counts.minus, 1.0 - p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            return Err(Error::FlatLikelihood(format!(
                "visibility {} carries no phase information",
                self.visibility
            )));
        }
        if self.multiplier == 0.0 || !self.multiplier.is_finite() {
            return Err(Error::FlatLikelihood(format!("multiplier {}", self.multiplier)));
        }
        Ok(())
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > REFINE_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Maximum-likelihood `θ̂` from parity tallies.
///
/// Searches one fringe period centred on `prior_center`; among
/// equal-height maxima the one nearest the centre wins.
pub fn mle_from_parity(counts: ParityCounts, model: &ParityModel, prior_center: f64) -> Result<f64> {
    model.validate()?;
    if counts.total() == 0 {
        return Err(Error::FlatLikelihood("no counts".into()));
    }
    let half = std::f64::consts::PI / model.multiplier.abs();
    let lo = prior_center - half;
    let step = 2.0 * half / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let ll: Vec<f64> = grid.iter().map(|&t| model.log_likelihood(counts, t)).collect();

    let mut candidates = Vec::new();
    for i in 0..GRID_POINTS {
        let left = if i == 0 { f64::NEG_INFINITY } else { ll[i - 1] };
        let right = if i + 1 == GRID_POINTS { f64::NEG_INFINITY } else { ll[i + 1] };
        if ll[i] >= left && ll[i] >= right {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(GRID_POINTS - 1)];
            let t = golden_max(|t| model.log_likelihood(counts, t), a, b);
            let t = if model.log_likelihood(counts, t) >= ll[i] { t } else { grid[i] };
            candidates.push((t, model.log_likelihood(counts, t)));
        }
    }
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * best.abs().max(1.0);
    candidates
        .into_iter()
        .filter(|c| best - c.1 <= tol)
        .min_by(|a, b| {
            (a.0 - prior_center)
                .abs()
                .total_cmp(&(b.0 - prior_center).abs())
        })
        .map(|c| c.0)
        .ok_or_else(|| Error::FlatLikelihood("no likelihood maximum found".into()))
}

/// Maximum-likelihood `θ̂` from the overall parity of a count record.
pub fn mle_estimate(counts: &CountRecord, model: &ParityModel, prior_center: f64) -> Result<f64> {
    mle_from_parity(counts.parity_counts(), model, prior_center)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_true: f64,
    /// Mean of the group estimates.
    pub theta_hat: f64,
    pub std_dev: f64,
    pub std_dev_error: f64,
    pub groups: usize,
    pub shots_per_group: u64,
    pub visibility: f64,
    pub offset: f64,
    /// Per-shot FI of the model at `theta_true`.
    pub effective_fi: f64,
    pub crb: f64,
    pub estimates: Vec<f64>,
}

/// Samples `groups` blocks of `shots` parity outcomes at `theta_true` and
/// estimates each with the prior centred on `theta_true`.
///
/// Group `g` uses `derive_seed(seed, g)`, so the result does not depend on
/// thread scheduling.
pub fn repeat_estimation(
    model: &ParityModel,
    theta_true: f64,
    groups: usize,
    shots: u64,
    seed: u64,
) -> Result<EstimationResult> {
    if groups < 2 || shots < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 groups of 2 shots, got {groups} × {shots}"
        )));
    }
    model.validate()?;
    let plus = model.plus_probability(theta_true).clamp(0.0, 1.0);
    let dist = OutcomeDistribution::parity(ParityPair {
        plus,
        minus: 1.0 - plus,
    })?;
    let estimates = (0..groups)
        .into_par_iter()
        .map(|g| {
            let record = sample_counts(&dist, shots, rng::derive_seed(seed, g as u64));
            mle_estimate(&record, model, theta_true)
        })
        .collect::<Result<Vec<f64>>>()?;
    let std_dev = sample_std(&estimates);
    let effective_fi = model.fisher(theta_true);
    Ok(EstimationResult {
        theta_true,
        theta_hat: mean(&estimates),
        std_dev,
        std_dev_error: std_dev / (2.0 * (shots as f64 - 1.0)).sqrt(),
        groups,
        shots_per_group: shots,
        visibility: model.visibility,
        offset: model.offset,
        effective_fi,
        crb: crb(effective_fi, shots as f64),
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn all_plus_peaks_at_zero() {
        let m = ParityModel::new(6.0, 1.0);
        let t = mle_from_parity(ParityCounts { plus: 70, minus: 0 }, &m, 0.0).unwrap();
        assert!(t.abs() < 1e-8, "{t}");
    }

    #[test]
    fn balanced_counts_sit_on_half_fringe() {
        let m = ParityModel::new(6.0, 1.0);
        let t = mle_from_parity(ParityCounts { plus: 35, minus: 35 }, &m, PI / 12.0).unwrap();
        assert!((t - PI / 12.0).abs() < 1e-8, "{t}");
    }

    #[test]
    fn recovers_interior_point() {
        let m = ParityModel::new(6.0, 0.8);
        let truth = 0.2;
        let p = m.plus_probability(truth);
        let n = 1_000_000u64;
        let plus = (p * n as f64).round() as u64;
        let t = mle_from_parity(ParityCounts { plus, minus: n - plus }, &m, 0.25).unwrap();
        assert!((t - truth).abs() < 1e-5, "{t}");
    }

    #[test]
    fn flat_likelihoods() {
        let c = ParityCounts { plus: 3, minus: 4 };
        assert!(matches!(
            mle_from_parity(c, &ParityModel::new(6.0, 0.0), 0.0),
            Err(Error::FlatLikelihood(_))
        ));
        assert!(matches!(
            mle_from_parity(c, &ParityModel::new(0.0, 1.0), 0.0),
            Err(Error::FlatLikelihood(_))
        ));
        assert!(matches!(
            mle_from_parity(ParityCounts { plus: 0, minus: 0 }, &ParityModel::new(6.0, 1.0), 0.0),
            Err(Error::FlatLikelihood(_))
        ));
    }

    #[test]
    fn mean_is_unbiased_within_three_sigma() {
        let m = ParityModel::new(6.0, 0.76);
        let r = repeat_estimation(&m, PI / 12.0, 100, 70, 5).unwrap();
        let sem = r.std_dev / (r.groups as f64).sqrt();
        assert!((r.theta_hat - PI / 12.0).abs() < 3.0 * sem, "{} ± {sem}", r.theta_hat);
    }

    #[test]
    fn two_by_two_formula() {
        let m = ParityModel::new(6.0, 0.9);
        let r = repeat_estimation(&m, PI / 12.0, 2, 2, 1).unwrap();
        assert!((r.std_dev_error - r.std_dev / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.estimates.len(), 2);
        assert!(repeat_estimation(&m, 0.0, 1, 2, 1).is_err());
        assert!(repeat_estimation(&m, 0.0, 2, 1, 1).is_err());
    }

    #[test]
    fn deterministic_under_parallelism() {
        let m = ParityModel::new(21.0, 0.64);
        let a = repeat_estimation(&m, PI / 42.0, 50, 70, 9).unwrap();
        let b = repeat_estimation(&m, PI / 42.0, 50, 70, 9).unwrap();
        assert_eq!(a, b);
    }
}
