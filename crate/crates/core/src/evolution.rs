//! Distributed phase encoding `U(θ) = exp(-i Σ_k θ_k σ_z/2)`, one factor per
//! photon per pass.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probes::ModeLayout;
use crate::qstate::{photon_bit, DenseState, ProductState};

/// Per-mode phase shifts `θ_1..θ_M` in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite phase {v}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(num_modes: usize) -> Self {
        Self(vec![0.0; num_modes])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `αᵀθ`.
    pub fn dot(&self, alpha: &[f64]) -> f64 {
        self.0.iter().zip(alpha).map(|(t, a)| t * a).sum()
    }
}

impl std::ops::Add for &PhaseVector {
    type Output = PhaseVector;

    fn add(self, rhs: &PhaseVector) -> PhaseVector {
        PhaseVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// `diag(e^{-iθ/2}, e^{+iθ/2})`, row-major.
pub fn phase_unitary(theta: f64) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -theta / 2.0), zero],
        [zero, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

/// Accumulates `Σ_{p∈g} passes(p)·θ_{mode(p)}` onto each group's phase.
///
/// Phases are not reduced modulo 2π.
pub fn apply_phases(state: &ProductState, theta: &PhaseVector) -> Result<ProductState> {
    if theta.len() != state.num_modes() {
        return Err(Error::LayoutMismatch(format!(
            "{} phases for a {}-mode state",
            theta.len(),
            state.num_modes()
        )));
    }
    state.map_phases(|_, group| {
        let shift: f64 = group
            .members()
            .iter()
            .map(|s| f64::from(s.passes) * theta.values()[s.mode - 1])
            .sum();
        group.phase() + shift
    })
}

/// Oracle path: applies [`phase_unitary`] to every photon, once per pass, as a
/// diagonal operator on the amplitude vector.
pub fn apply_phases_dense(
    state: &DenseState,
    layout: &ModeLayout,
    theta: &PhaseVector,
) -> Result<DenseState> {
    let n = state.num_photons();
    if layout.num_photons() != n {
        return Err(Error::LayoutMismatch(format!(
            "layout has {} photons, state has {n}",
            layout.num_photons()
        )));
    }
    if theta.len() != layout.num_modes() {
        return Err(Error::LayoutMismatch(format!(
            "{} phases for a {}-mode layout",
            theta.len(),
            layout.num_modes()
        )));
    }
    let mut amplitudes = state.amplitudes().to_vec();
    for (i, site) in layout.sites().iter().enumerate() {
        let u = phase_unitary(theta.values()[site.mode - 1]);
        let bit = photon_bit(n, i + 1);
        for _ in 0..site.passes {
            for (index, a) in amplitudes.iter_mut().enumerate() {
                *a *= if index & bit == 0 { u[0][0] } else { u[1][1] };
            }
        }
    }
    Ok(DenseState::from_raw(n, amplitudes))
}
