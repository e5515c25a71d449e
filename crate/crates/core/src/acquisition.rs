//! Pulsed pair sources, passive loss, and post-selection on full coincidences.
//!
//! Source `j` (1-based) emits at most one pair per pulse into channels
//! `2j − 1` and `2j`; photons are lost independently of their polarization.
//! Only pulses in which every source fired and every photon survived yield
//! an outcome, drawn from the evolved probe's σx distribution.
//!
//! Per-pulse Bernoulli trials are equivalent in distribution to the
//! hierarchical draw used here: a multinomial over firing patterns, a
//! binomial for joint survival, then a multinomial over outcomes. Run cost
//! therefore does not grow with the pulse count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{apply_phases, PhaseVector};
use crate::measurement::{outcome_distribution, CountRecord};
use crate::qstate::ProductState;
use crate::rng;
use crate::stats::{chi_square_homogeneity, ChiSquareTest};

/// Significance level used for post-selection invariance checks.
pub const INVARIANCE_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModel {
    /// Pair emission probability per pulse per source.
    pub pair_probability: f64,
    #[serde(default = "default_sources")]
    pub num_sources: usize,
    /// Survival probability per photon channel, `2 × num_sources` entries.
    pub channel_efficiency: Vec<f64>,
    pub pulses: u64,
}

fn default_sources() -> usize {
    3
}

impl SourceModel {
    /// Three sources with the same efficiency on every channel.
    pub fn uniform(pair_probability: f64, efficiency: f64, pulses: u64) -> Self {
        Self {
            pair_probability,
            num_sources: 3,
            channel_efficiency: vec![efficiency; 6],
            pulses,
        }
    }

    pub fn num_channels(&self) -> usize {
        2 * self.num_sources
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pair_probability) {
            return Err(Error::InvalidSource(format!(
                "pair probability {} outside [0, 1]",
                self.pair_probability
            )));
        }
        if self.num_sources == 0 {
            return Err(Error::InvalidSource("at least one source is required".into()));
        }
        if self.channel_efficiency.len() != self.num_channels() {
            return Err(Error::InvalidSource(format!(
                "{} channel efficiencies for {} channels",
                self.channel_efficiency.len(),
                self.num_channels()
            )));
        }
        if let Some(eta) = self
            .channel_efficiency
            .iter()
            .find(|e| !(0.0..=1.0).contains(*e))
        {
            return Err(Error::InvalidSource(format!(
                "channel efficiency {eta} outside [0, 1]"
            )));
        }
        Ok(())
    }

    /// Probability that a pulse produces a full post-selected coincidence.
    pub fn coincidence_probability(&self) -> f64 {
        self.pair_probability.powi(self.num_sources as i32)
            * self.channel_efficiency.iter().product::<f64>()
    }

    pub fn expected_coincidences(&self) -> f64 {
        self.pulses as f64 * self.coincidence_probability()
    }
}

/// Raw bookkeeping of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseStats {
    pub pulses: u64,
    /// Pulses per firing pattern; bit `j − 1` of the index is set when source `j` fired.
    pub pattern_counts: Vec<u64>,
    /// Pulses in which every source fired.
    pub all_fired: u64,
    /// All-fired pulses in which at least one photon was lost.
    pub lost: u64,
    pub coincidences: u64,
}

/// Simulates `source.pulses` pulses feeding `probe` evolved by `theta`.
pub fn simulate_run(
    source: &SourceModel,
    probe: &ProductState,
    theta: &PhaseVector,
    seed: u64,
) -> Result<(CountRecord, PulseStats)> {
    source.validate()?;
    if probe.num_photons() != source.num_channels() {
        return Err(Error::ChannelMismatch {
            channels: source.num_channels(),
            photons: probe.num_photons(),
        });
    }
    let dist = outcome_distribution(&apply_phases(probe, theta)?)?;
    let mut rng = rng::seeded(seed);

    let s = source.num_sources;
    let p = source.pair_probability;
    let patterns: Vec<f64> = (0..1usize << s)
        .map(|mask| {
            let fired = mask.count_ones() as i32;
            p.powi(fired) * (1.0 - p).powi(s as i32 - fired)
        })
        .collect();
    let pattern_counts = rng::multinomial(&mut rng, source.pulses, &patterns);
    let all_fired = pattern_counts[(1 << s) - 1];
    let survival: f64 = source.channel_efficiency.iter().product();
    let coincidences = rng::binomial(&mut rng, all_fired, survival);
    let counts = rng::multinomial(&mut rng, coincidences, dist.probabilities());

    let stats = PulseStats {
        pulses: source.pulses,
        pattern_counts,
        all_fired,
        lost: all_fired - coincidences,
        coincidences,
    };
    let record = CountRecord {
        shots: coincidences,
        counts,
        subset: None,
    };
    Ok((record, stats))
}

/// Homogeneity test between two post-selected count records.
pub fn conditional_distribution_test(a: &CountRecord, b: &CountRecord) -> Result<ChiSquareTest> {
    if a.counts.len() != b.counts.len() {
        return Err(Error::DimensionMismatch {
            left: a.num_bits(),
            right: b.num_bits(),
        });
    }
    Ok(chi_square_homogeneity(&a.counts, &b.counts))
}

/// Runs both sources against the same evolved probe and checks that the
/// conditional outcome distributions agree at [`INVARIANCE_SIGNIFICANCE`].
pub fn postselected_distribution_invariance(
    source_a: &SourceModel,
    source_b: &SourceModel,
    probe: &ProductState,
    theta: &PhaseVector,
    seed: u64,
) -> Result<bool> {
    if source_a.pair_probability != source_b.pair_probability
        || source_a.num_sources != source_b.num_sources
    {
        return Err(Error::InvalidArgument(
            "sources may differ only in channel efficiency".into(),
        ));
    }
    let (a, _) = simulate_run(source_a, probe, theta, rng::derive_seed(seed, 0))?;
    let (b, _) = simulate_run(source_b, probe, theta, rng::derive_seed(seed, 1))?;
    Ok(conditional_distribution_test(&a, &b)?.passes(INVARIANCE_SIGNIFICANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::{reference_probe, Coherence, StrategyId};

    fn mepe() -> ProductState {
        reference_probe(StrategyId::MePe, &Coherence::Uniform(0.9)).unwrap().1
    }

    fn theta() -> PhaseVector {
        PhaseVector::new(vec![0.3, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn lossless_deterministic_source() {
        let source = SourceModel::uniform(1.0, 1.0, 5000);
        let (rec, stats) = simulate_run(&source, &mepe(), &theta(), 1).unwrap();
        assert_eq!(stats.coincidences, 5000);
        assert_eq!(rec.shots, 5000);
        assert_eq!(rec.counts.iter().sum::<u64>(), 5000);
        assert_eq!(stats.lost, 0);
    }

    #[test]
    fn dead_channel_gives_nothing() {
        let mut source = SourceModel::uniform(0.5, 0.9, 100_000);
        source.channel_efficiency[3] = 0.0;
        let (rec, stats) = simulate_run(&source, &mepe(), &theta(), 2).unwrap();
        assert_eq!(stats.coincidences, 0);
        assert_eq!(rec.shots, 0);
        assert!(stats.all_fired > 0);
    }

    #[test]
    fn coincidence_rate_matches_independence_product() {
        let source = SourceModel::uniform(0.0195, 0.6, 10_000_000);
        let (_, stats) = simulate_run(&source, &mepe(), &theta(), 3).unwrap();
        let q = source.coincidence_probability();
        let expected = source.expected_coincidences();
        let sigma = (source.pulses as f64 * q * (1.0 - q)).sqrt();
        assert!(
            (stats.coincidences as f64 - expected).abs() < 5.0 * sigma,
            "{} vs {expected} ± {sigma}",
            stats.coincidences
        );
        assert_eq!(stats.pattern_counts.iter().sum::<u64>(), source.pulses);
    }

    #[test]
    fn channel_mismatch() {
        let source = SourceModel {
            pair_probability: 0.5,
            num_sources: 2,
            channel_efficiency: vec![1.0; 4],
            pulses: 10,
        };
        assert!(matches!(
            simulate_run(&source, &mepe(), &theta(), 0),
            Err(Error::ChannelMismatch { channels: 4, photons: 6 })
        ));
    }

    #[test]
    fn source_validation() {
        assert!(SourceModel::uniform(1.5, 1.0, 1).validate().is_err());
        assert!(SourceModel::uniform(0.5, -0.1, 1).validate().is_err());
        let mut s = SourceModel::uniform(0.5, 1.0, 1);
        s.channel_efficiency.pop();
        assert!(s.validate().is_err());
    }

    #[test]
    fn rate_is_monotone_on_grid() {
        let grid = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
        for &p in &grid {
            for w in grid.windows(2) {
                for ch in 0..6 {
                    let mut lo = SourceModel::uniform(p, 0.8, 1);
                    let mut hi = lo.clone();
                    lo.channel_efficiency[ch] = w[0];
                    hi.channel_efficiency[ch] = w[1];
                    assert!(lo.coincidence_probability() <= hi.coincidence_probability());
                }
                let lo = SourceModel::uniform(w[0], p, 1);
                let hi = SourceModel::uniform(w[1], p, 1);
                assert!(lo.coincidence_probability() <= hi.coincidence_probability());
            }
        }
    }

    #[test]
    fn invariance_same_efficiency_different_seeds() {
        let source = SourceModel::uniform(1.0, 0.8, 200_000);
        assert!(postselected_distribution_invariance(&source, &source, &mepe(), &theta(), 11).unwrap());
    }

    #[test]
    fn different_phases_are_detected() {
        let source = SourceModel::uniform(1.0, 1.0, 100_000);
        let (a, _) = simulate_run(&source, &mepe(), &theta(), 1).unwrap();
        let shifted = PhaseVector::new(vec![0.6, 0.5, 1.0]).unwrap();
        let (b, _) = simulate_run(&source, &mepe(), &shifted, 2).unwrap();
        assert!(!conditional_distribution_test(&a, &b).unwrap().passes(INVARIANCE_SIGNIFICANCE));
    }

    #[test]
    fn invariance_requires_matching_sources() {
        let a = SourceModel::uniform(0.5, 1.0, 10);
        let b = SourceModel::uniform(0.4, 1.0, 10);
        assert!(postselected_distribution_invariance(&a, &b, &mepe(), &theta(), 0).is_err());
    }
}
