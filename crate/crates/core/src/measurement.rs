//! σx-basis outcome statistics and shot sampling.
//!
//! Outcome bit strings use the [`DenseState`](crate::qstate::DenseState) bit
//! order; bit `0` is the `+1` eigenvalue. For a GHZ group `g` with
//! coherence `V_g` and phase `φ_g`, a string `x` has probability
//! `Π_g (1 + p_g(x)·V_g·cos φ_g) / 2^{|g|}` where `p_g(x)` is the parity of
//! `x` restricted to the group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{photon_bit, GhzGroup, ProductState};
use crate::rng;

const NEGATIVE_CLAMP: f64 = 1e-15;
const SUM_TOLERANCE: f64 = 1e-10;

/// Parity eigenvalue of a σx product measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    fn of_bits(ones: u32) -> Self {
        if ones.is_multiple_of(2) {
            Parity::Plus
        } else {
            Parity::Minus
        }
    }
}

/// `(P₊, P₋)` of a parity observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityPair {
    pub plus: f64,
    pub minus: f64,
}

/// Exact probabilities over all `2^N` σx outcome strings.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    num_photons: usize,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Validates and clamps tiny negatives to zero.
    pub fn from_probabilities(num_photons: usize, mut probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != 1usize << num_photons {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {num_photons} bits",
                probabilities.len()
            )));
        }
        for p in probabilities.iter_mut() {
            if !p.is_finite() || *p < -NEGATIVE_CLAMP {
                return Err(Error::InvalidArgument(format!("invalid probability {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
        }
        Ok(Self {
            num_photons,
            probabilities,
        })
    }

    /// Two-outcome distribution over a single parity bit (`0 ↔ +1`).
    pub fn parity(pair: ParityPair) -> Result<Self> {
        Self::from_probabilities(1, vec![pair.plus, pair.minus])
    }

    pub fn num_photons(&self) -> usize {
        self.num_photons
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// `(1 + parity·V·cos φ_g) / 2`.
pub fn parity_probability(group: &GhzGroup, parity: Parity) -> f64 {
    (1.0 + parity.sign() * group.coherence() * group.phase().cos()) / 2.0
}

/// Outcome distribution of the analytic engine.
pub fn outcome_distribution(state: &ProductState) -> Result<OutcomeDistribution> {
    let n = state.num_photons();
    if n > state.max_photons() {
        return Err(Error::TooLarge {
            photons: n,
            max: state.max_photons(),
        });
    }
    let factors: Vec<(usize, f64, f64)> = state
        .groups()
        .iter()
        .map(|g| {
            let mask = g.photon_ids().iter().map(|&p| photon_bit(n, p)).sum();
            let contrast = g.coherence() * g.phase().cos();
            let scale = 0.5f64.powi(g.size() as i32);
            (mask, contrast, scale)
        })
        .collect();
    let probabilities = (0..1usize << n)
        .map(|x| {
            factors
                .iter()
                .map(|&(mask, contrast, scale)| {
                    let sign = Parity::of_bits((x & mask).count_ones()).sign();
                    (1.0 + sign * contrast) * scale
                })
                .product::<f64>()
                .max(0.0)
        })
        .collect();
    Ok(OutcomeDistribution {
        num_photons: n,
        probabilities,
    })
}

fn subset_mask(num_photons: usize, subset: &[usize]) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::BadSubset("subset is empty".into()));
    }
    let mut mask = 0;
    for &p in subset {
        if p == 0 || p > num_photons {
            return Err(Error::BadSubset(format!(
                "photon {p} outside 1..={num_photons}"
            )));
        }
        let bit = photon_bit(num_photons, p);
        if mask & bit != 0 {
            return Err(Error::BadSubset(format!("photon {p} listed twice")));
        }
        mask |= bit;
    }
    Ok(mask)
}

/// Aggregates the distribution by the parity of the bits in `subset` (1-based ids).
pub fn subset_parity_marginal(dist: &OutcomeDistribution, subset: &[usize]) -> Result<ParityPair> {
    let mask = subset_mask(dist.num_photons, subset)?;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (x, &p) in dist.probabilities.iter().enumerate() {
        match Parity::of_bits((x & mask).count_ones()) {
            Parity::Plus => plus += p,
            Parity::Minus => minus += p,
        }
    }
    Ok(ParityPair { plus, minus })
}

/// Parity tallies of a count record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCounts {
    pub plus: u64,
    pub minus: u64,
}

impl ParityCounts {
    pub fn total(&self) -> u64 {
        self.plus + self.minus
    }

    pub fn plus_fraction(&self) -> f64 {
        self.plus as f64 / self.total() as f64
    }
}

/// Sampled shot counts per outcome string.
///
/// With `subset` set, `counts` runs over the `2^|subset|` strings of those
/// photons (first listed photon is the most significant bit).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub shots: u64,
    pub counts: Vec<u64>,
    pub subset: Option<Vec<usize>>,
}

impl CountRecord {
    pub fn new(counts: Vec<u64>, subset: Option<Vec<usize>>) -> Result<Self> {
        if !counts.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{} count cells is not a power of two",
                counts.len()
            )));
        }
        if let Some(s) = &subset {
            if counts.len() != 1usize << s.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} count cells for a {}-photon subset",
                    counts.len(),
                    s.len()
                )));
            }
        }
        let shots = counts.iter().sum();
        Ok(Self {
            shots,
            counts,
            subset,
        })
    }

    /// Number of bits per recorded outcome.
    pub fn num_bits(&self) -> usize {
        self.counts.len().trailing_zeros() as usize
    }

    /// Marginal record over `subset` (1-based positions of this record's bits).
    pub fn marginal(&self, subset: &[usize]) -> Result<CountRecord> {
        let n = self.num_bits();
        subset_mask(n, subset)?;
        let mut counts = vec![0u64; 1 << subset.len()];
        for (x, &c) in self.counts.iter().enumerate() {
            let mut y = 0;
            for &p in subset {
                y = (y << 1) | usize::from(x & photon_bit(n, p) != 0);
            }
            counts[y] += c;
        }
        let labels = match &self.subset {
            Some(parent) => subset.iter().map(|&p| parent[p - 1]).collect(),
            None => subset.to_vec(),
        };
        Ok(CountRecord {
            shots: self.shots,
            counts,
            subset: Some(labels),
        })
    }

    /// Parity of all recorded bits.
    pub fn parity_counts(&self) -> ParityCounts {
        let mut out = ParityCounts { plus: 0, minus: 0 };
        for (x, &c) in self.counts.iter().enumerate() {
            match Parity::of_bits(x.count_ones()) {
                Parity::Plus => out.plus += c,
                Parity::Minus => out.minus += c,
            }
        }
        out
    }

    /// Parity of the bits in `subset` (1-based positions of this record's bits).
    pub fn subset_parity_counts(&self, subset: &[usize]) -> Result<ParityCounts> {
        Ok(self.marginal(subset)?.parity_counts())
    }
}

/// Seeded multinomial draw of `shots` outcomes.
///
/// The same `(dist, shots, seed)` always yields the same record; see
/// [`rng`](crate::rng) for the generator scheme.
pub fn sample_counts(dist: &OutcomeDistribution, shots: u64, seed: u64) -> CountRecord {
    let mut rng = rng::seeded(seed);
    let counts = rng::multinomial(&mut rng, shots, &dist.probabilities);
    CountRecord {
        shots,
        counts,
        subset: None,
    }
}
