use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{apply_phases, PhaseVector};
use crate::probes::ModeLayout;
use crate::qstate::ProductState;

/// Outcome probabilities below this make the Fisher information undefined.
pub const SINGULAR_PROBABILITY: f64 = 1e-12;

/// Per-trial classical Fisher matrix `F_kl = Σ_x (∂_k P_x)(∂_l P_x) / P_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    dim: usize,
    elements: Vec<f64>,
    theta: Vec<f64>,
}

impl FisherMatrix {
    /// Row-major `dim × dim` matrix evaluated at `theta`.
    pub fn new(dim: usize, elements: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "{} elements for a {dim}×{dim} matrix",
                elements.len()
            )));
        }
        Ok(Self {
            dim,
            elements,
            theta,
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut elements = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            elements[i * dim + i] = *v;
        }
        Self {
            dim,
            elements,
            theta: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.elements[k * self.dim + l]
    }

    pub fn elements(&self) -> &[f64] {
        &self.elements
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.elements)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|k| (0..k).all(|l| (self.get(k, l) - self.get(l, k)).abs() <= tol))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Phase Fisher information of one parity fringe, `V² sin²φ / (1 − V² cos²φ)`.
///
/// At `V = 1` the value is 1 everywhere; the removable singularity at
/// `cos φ = ±1` is filled with that limit.
pub fn group_fi(visibility: f64, phase: f64) -> f64 {
    let v2 = visibility * visibility;
    let c = phase.cos();
    let denom = 1.0 - v2 * c * c;
    if denom <= f64::EPSILON {
        return v2;
    }
    v2 * (1.0 - c * c) / denom
}

/// Smallest σx outcome probability of an evolved product state.
pub fn min_outcome_probability(state: &ProductState) -> f64 {
    state
        .groups()
        .iter()
        .map(|g| (1.0 - g.coherence() * g.phase().cos().abs()) * 0.5f64.powi(g.size() as i32))
        .product()
}

fn check_layout(probe: &ProductState, layout: &ModeLayout) -> Result<()> {
    if probe.num_modes() != layout.num_modes() || probe.num_photons() != layout.num_photons() {
        return Err(Error::LayoutMismatch(format!(
            "probe has {} photons over {} modes, layout has {} over {}",
            probe.num_photons(),
            probe.num_modes(),
            layout.num_photons(),
            layout.num_modes()
        )));
    }
    for (i, site) in layout.sites().iter().enumerate() {
        if probe.site(i + 1) != Some(*site) {
            return Err(Error::LayoutMismatch(format!(
                "photon {} differs between probe and layout",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Fisher matrix of the full σx outcome distribution of `probe` evolved by `theta`.
///
/// Outcome strings factor over groups and, within a group, depend on the
/// group parity alone, so `F = Σ_g F_g c_g c_gᵀ` with `c_g = ∂φ_g/∂θ` and
/// `F_g` from [`group_fi`].
pub fn fisher_matrix(
    probe: &ProductState,
    layout: &ModeLayout,
    theta: &PhaseVector,
) -> Result<FisherMatrix> {
    check_layout(probe, layout)?;
    let evolved = apply_phases(probe, theta)?;
    let min_probability = min_outcome_probability(&evolved);
    if min_probability < SINGULAR_PROBABILITY {
        return Err(Error::SingularPoint { min_probability });
    }
    let m = layout.num_modes();
    let mut elements = vec![0.0; m * m];
    for group in evolved.groups() {
        let weight = group_fi(group.coherence(), group.phase());
        let c = group.phase_coefficients(m);
        for k in 0..m {
            for l in 0..m {
                elements[k * m + l] += weight * c[k] * c[l];
            }
        }
    }
    FisherMatrix::new(m, elements, theta.values().to_vec())
}

/// `αᵀFα / (αᵀα)²`.
pub fn effective_fi(fisher: &FisherMatrix, alpha: &[f64]) -> f64 {
    let f = fisher.to_matrix();
    let a = DVector::from_column_slice(alpha);
    let norm = a.dot(&a);
    a.dot(&(&f * &a)) / (norm * norm)
}

/// `1 / (αᵀF⁻¹α)`.
pub fn effective_fi_crb(fisher: &FisherMatrix, alpha: &[f64]) -> Result<f64> {
    let f = fisher.to_matrix();
    let scale = f.amax();
    if scale == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let chol = f.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let min_pivot = chol.l().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_pivot * min_pivot <= 1e-12 * scale {
        return Err(Error::SingularMatrix);
    }
    let a = DVector::from_column_slice(alpha);
    let x = chol.solve(&a);
    Ok(1.0 / a.dot(&x))
}

/// Cramér–Rao bound `1/√(μ·F)` for `trials` independent repetitions.
pub fn crb(effective_fi: f64, trials: f64) -> f64 {
    1.0 / (trials * effective_fi).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::{reference_probe, weights, Coherence, StrategyId};
    use std::f64::consts::PI;

    #[test]
    fn individual_pair_fi_is_four_at_half_fringe() {
        let (layout, probe) = reference_probe(StrategyId::Individual, &Coherence::Uniform(1.0)).unwrap();
        let theta = PhaseVector::new(vec![PI / 4.0; 3]).unwrap();
        let f = fisher_matrix(&probe, &layout, &theta).unwrap();
        for k in 0..3 {
            assert!((f.get(k, k) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mepe_effective_fi_is_thirty_six() {
        let (layout, probe) = reference_probe(StrategyId::MePe, &Coherence::Uniform(1.0)).unwrap();
        // 6θ̂ = π/2
        let theta = PhaseVector::new(vec![PI / 12.0; 3]).unwrap();
        let f = fisher_matrix(&probe, &layout, &theta).unwrap();
        assert!((effective_fi(&f, &weights(&layout)) - 36.0).abs() < 1e-9);
        assert!(matches!(effective_fi_crb(&f, &weights(&layout)), Err(Error::SingularMatrix)));
    }

    #[test]
    fn msps_effective_fi_is_six() {
        let (layout, probe) = reference_probe(StrategyId::MsPs, &Coherence::Uniform(1.0)).unwrap();
        let theta = PhaseVector::new(vec![0.4, 1.3, 2.0]).unwrap();
        let f = fisher_matrix(&probe, &layout, &theta).unwrap();
        assert!((effective_fi(&f, &weights(&layout)) - 6.0).abs() < 1e-12);
        assert!((effective_fi_crb(&f, &weights(&layout)).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn effective_fi_examples() {
        let third = [1.0 / 3.0; 3];
        let f = FisherMatrix::diagonal(&[4.0, 4.0, 4.0]);
        assert!((effective_fi(&f, &third) - 12.0).abs() < 1e-12);
        assert!((effective_fi_crb(&f, &third).unwrap() - 12.0).abs() < 1e-12);

        let sq: Vec<f64> = (1..=6).map(|k| (k * k) as f64).collect();
        let alpha: Vec<f64> = (1..=6).map(|k| k as f64 / 21.0).collect();
        let f = FisherMatrix::diagonal(&sq);
        assert!((effective_fi(&f, &alpha) - 2275.0 * 441.0 / 8281.0).abs() < 1e-9);
        assert!((effective_fi(&f, &alpha) - 121.16).abs() < 0.01);
        assert!((effective_fi_crb(&f, &alpha).unwrap() - 73.5).abs() < 1e-9);

        let alpha = [0.2, 0.5, 0.3];
        let norm: f64 = alpha.iter().map(|a| a * a).sum();
        let f = FisherMatrix::diagonal(&[2.5; 3]);
        assert!((effective_fi(&f, &alpha) - 2.5 / norm).abs() < 1e-12);
        let id = FisherMatrix::diagonal(&[1.0; 3]);
        assert!((effective_fi_crb(&id, &alpha).unwrap() - 1.0 / norm).abs() < 1e-12);
    }

    #[test]
    fn crb_examples() {
        assert!((crb(36.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((crb(441.0, 1.0) - 1.0 / 21.0).abs() < 1e-15);
        assert!((crb(1.0, 100.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn singular_point_is_reported() {
        let (layout, probe) = reference_probe(StrategyId::MePe, &Coherence::Uniform(1.0)).unwrap();
        let err = fisher_matrix(&probe, &layout, &PhaseVector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::SingularPoint { .. }));
        let (layout, noisy) = reference_probe(StrategyId::MePe, &Coherence::Uniform(0.9)).unwrap();
        assert!(fisher_matrix(&noisy, &layout, &PhaseVector::zeros(3)).is_ok());
    }

    #[test]
    fn layout_must_match_probe() {
        let (_, probe) = reference_probe(StrategyId::MePe, &Coherence::Uniform(0.9)).unwrap();
        let other = ModeLayout::uniform(2, 3).unwrap();
        assert!(matches!(
            fisher_matrix(&probe, &other, &PhaseVector::zeros(2)),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn matrix_is_symmetric_psd() {
        let (layout, probe) = reference_probe(StrategyId::MePs, &Coherence::PerGroup(vec![0.8, 0.6])).unwrap();
        let f = fisher_matrix(&probe, &layout, &PhaseVector::new(vec![0.3, 0.1, 0.9]).unwrap()).unwrap();
        assert!(f.is_symmetric(1e-10));
        assert!(f.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn group_fi_limits() {
        assert_eq!(group_fi(0.0, 0.7), 0.0);
        assert!((group_fi(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((group_fi(1.0, 0.3) - 1.0).abs() < 1e-12);
        assert!((group_fi(0.5, PI / 2.0) - 0.25).abs() < 1e-15);
    }
}
