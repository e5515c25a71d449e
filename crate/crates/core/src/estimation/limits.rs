use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probes::{reference_probe, strategy_grouping, weights, Coherence, ModeLayout, StrategyId};
use crate::qstate::ProductState;

use super::fisher::group_fi;

/// Noise-free Fisher information of a strategy on a layout, with the
/// shot-noise reference alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalLimit {
    pub strategy: StrategyId,
    pub fi: f64,
    pub delta: f64,
    pub snl_fi: f64,
    pub snl_delta: f64,
}

impl TheoreticalLimit {
    fn new(strategy: StrategyId, fi: f64, snl_fi: f64) -> Self {
        Self {
            strategy,
            fi,
            delta: 1.0 / fi.sqrt(),
            snl_fi,
            snl_delta: 1.0 / snl_fi.sqrt(),
        }
    }
}

/// Closed-form limits at `V = 1`.
///
/// | strategy   | FI            |
/// |------------|---------------|
/// | MePe, MePc | `n²`          |
/// | MePs       | `N·M`         |
/// | MsPe       | `Σ_k N_k²`    |
/// | MsPc       | `Σ_k n_k²`    |
/// | MsPs       | `N`           |
/// | Individual | `N_k²` per mode (modes must be equal) |
///
/// The shot-noise reference is the total pass count `n` (`N_k` for
/// Individual).
pub fn theoretical_limits(strategy: StrategyId, layout: &ModeLayout) -> Result<TheoreticalLimit> {
    if strategy == StrategyId::Generic {
        return Err(Error::UnsupportedLayout(
            "no closed-form limit for a generic grouping".into(),
        ));
    }
    strategy_grouping(strategy, layout)?;
    let n = f64::from(layout.total_passes());
    let photons = layout.num_photons() as f64;
    let limit = match strategy {
        StrategyId::MePe | StrategyId::MePc => TheoreticalLimit::new(strategy, n * n, n),
        StrategyId::MePs => {
            TheoreticalLimit::new(strategy, photons * layout.num_modes() as f64, n)
        }
        StrategyId::MsPe => {
            let fi = layout.photon_counts().iter().map(|&c| (c * c) as f64).sum();
            TheoreticalLimit::new(strategy, fi, n)
        }
        StrategyId::MsPc => {
            let fi = layout.pass_counts().iter().map(|&c| f64::from(c * c)).sum();
            TheoreticalLimit::new(strategy, fi, n)
        }
        StrategyId::MsPs => TheoreticalLimit::new(strategy, photons, n),
        StrategyId::Individual => {
            let counts = layout.photon_counts();
            if counts.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::UnsupportedLayout(format!(
                    "Individual limit needs equal photons per mode, got {counts:?}"
                )));
            }
            let per_mode = counts[0] as f64;
            TheoreticalLimit::new(strategy, per_mode * per_mode, per_mode)
        }
        StrategyId::Generic => unreachable!("handled above"),
    };
    Ok(limit)
}

/// Fringe Fisher information `V²c² sin²(cθ̂) / (1 − V² cos²(cθ̂))`.
pub fn fringe_fi(multiplier: f64, visibility: f64, theta_hat: f64) -> f64 {
    multiplier * multiplier * group_fi(visibility, multiplier * theta_hat)
}

/// Effective FI curve of `probe` when every mode carries the phase `θ̂`.
///
/// Each group contributes `(αᵀc_g)² / (αᵀα)² · F_g(φ_g)`, which is the
/// group decomposition of the effective FI with the removable singularities
/// at `V = 1` filled in.
pub fn fi_curve_for_probe(probe: &ProductState, layout: &ModeLayout, theta_hat: f64) -> f64 {
    let alpha = weights(layout);
    let norm: f64 = alpha.iter().map(|a| a * a).sum();
    probe
        .groups()
        .iter()
        .map(|g| {
            let c = g.phase_coefficients(layout.num_modes());
            let projected: f64 = c.iter().zip(&alpha).map(|(c, a)| c * a).sum();
            let total: f64 = c.iter().sum();
            let phase = g.phase() + total * theta_hat;
            (projected / norm).powi(2) * group_fi(g.coherence(), phase)
        })
        .sum()
}

/// FI-versus-phase curve of a named strategy on its reference layout with a
/// common visibility.
pub fn fi_curve(strategy: StrategyId, visibility: f64, theta_hat: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidCoherence(visibility));
    }
    let (layout, probe) = reference_probe(strategy, &Coherence::Uniform(visibility))?;
    Ok(fi_curve_for_probe(&probe, &layout, theta_hat))
}

/// Error reduction in dB relative to a reference, `10·log₁₀(Δθ_ref/Δθ) = 5·log₁₀(F/F_ref)`.
pub fn db_reduction(fi: f64, fi_ref: f64) -> f64 {
    5.0 * (fi / fi_ref).log10()
}
