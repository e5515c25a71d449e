//! State engines.
//!
//! [`ProductState`] is the analytic engine: a product of independent GHZ
//! blocks. Each [`GhzGroup`] stands for the two-level mixture
//!
//! ```text
//! ½(|H…H⟩⟨H…H| + |V…V⟩⟨V…V|) + ½V(e^{iφ}|V…V⟩⟨H…H| + h.c.)
//! ```
//!
//! so visibility noise enters as one coherence factor `V` per block.
//! [`DenseState`] is a plain `2^N` amplitude vector that serves as the
//! oracle for pure states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::outcome_distribution;

/// Largest photon count accepted unless a state is built with an explicit limit.
pub const DEFAULT_MAX_PHOTONS: usize = 12;

const NORM_TOLERANCE: f64 = 1e-10;

/// Where a photon is sent and how many times it traverses that mode's phase shifter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonSite {
    pub mode: usize,
    pub passes: u32,
}

impl PhotonSite {
    pub fn new(mode: usize, passes: u32) -> Self {
        Self { mode, passes }
    }
}

/// One GHZ coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzGroup {
    photon_ids: Vec<usize>,
    members: Vec<PhotonSite>,
    coherence: f64,
    phase: f64,
}

impl GhzGroup {
    /// `photon_ids` are 1-based and must be strictly increasing; `members[i]`
    /// describes photon `photon_ids[i]`.
    pub fn new(photon_ids: Vec<usize>, members: Vec<PhotonSite>, coherence: f64) -> Result<Self> {
        if photon_ids.is_empty() {
            return Err(Error::InvalidState("GHZ group has no photons".into()));
        }
        if photon_ids.len() != members.len() {
            return Err(Error::InvalidState(format!(
                "{} photon ids but {} member records",
                photon_ids.len(),
                members.len()
            )));
        }
        if photon_ids[0] == 0 || photon_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidState(format!(
                "photon ids must be 1-based and strictly increasing, got {photon_ids:?}"
            )));
        }
        if !(0.0..=1.0).contains(&coherence) {
            return Err(Error::InvalidCoherence(coherence));
        }
        Ok(Self {
            photon_ids,
            members,
            coherence,
            phase: 0.0,
        })
    }

    /// Same group with its accumulated phase replaced.
    pub fn with_phase(mut self, phase: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::InvalidState(format!("non-finite group phase {phase}")));
        }
        self.phase = phase;
        Ok(self)
    }

    pub fn photon_ids(&self) -> &[usize] {
        &self.photon_ids
    }

    pub fn members(&self) -> &[PhotonSite] {
        &self.members
    }

    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn size(&self) -> usize {
        self.photon_ids.len()
    }

    /// `∂φ/∂θ_k` for `k = 1..=num_modes`: total passes of the group's photons through mode `k`.
    pub fn phase_coefficients(&self, num_modes: usize) -> Vec<f64> {
        let mut c = vec![0.0; num_modes];
        for site in &self.members {
            if site.mode >= 1 && site.mode <= num_modes {
                c[site.mode - 1] += f64::from(site.passes);
            }
        }
        c
    }
}

/// Analytic engine: a product of GHZ groups partitioning photons `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    num_modes: usize,
    groups: Vec<GhzGroup>,
    total_photons: usize,
    max_photons: usize,
}

impl ProductState {
    pub fn new(num_modes: usize, groups: Vec<GhzGroup>) -> Result<Self> {
        Self::with_max_photons(num_modes, groups, DEFAULT_MAX_PHOTONS)
    }

    /// Like [`ProductState::new`] with a custom photon limit.
    pub fn with_max_photons(
        num_modes: usize,
        groups: Vec<GhzGroup>,
        max_photons: usize,
    ) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidState("state needs at least one mode".into()));
        }
        if groups.is_empty() {
            return Err(Error::InvalidState("state has no groups".into()));
        }
        let total_photons: usize = groups.iter().map(GhzGroup::size).sum();
        if total_photons > max_photons {
            return Err(Error::TooLarge {
                photons: total_photons,
                max: max_photons,
            });
        }
        let mut seen = vec![false; total_photons];
        for group in &groups {
            for &id in group.photon_ids() {
                if id > total_photons || seen[id - 1] {
                    return Err(Error::InvalidState(format!(
                        "groups do not partition photons 1..={total_photons} (photon {id})"
                    )));
                }
                seen[id - 1] = true;
            }
            if let Some(site) = group
                .members()
                .iter()
                .find(|s| s.mode == 0 || s.mode > num_modes)
            {
                return Err(Error::InvalidState(format!(
                    "mode {} outside 1..={num_modes}",
                    site.mode
                )));
            }
        }
        Ok(Self {
            num_modes,
            groups,
            total_photons,
            max_photons,
        })
    }

    pub fn groups(&self) -> &[GhzGroup] {
        &self.groups
    }

    pub fn num_photons(&self) -> usize {
        self.total_photons
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn is_pure(&self) -> bool {
        self.groups.iter().all(|g| g.coherence() == 1.0)
    }

    /// Site record for 1-based photon `id`.
    pub fn site(&self, id: usize) -> Option<PhotonSite> {
        self.groups.iter().find_map(|g| {
            g.photon_ids()
                .iter()
                .position(|&p| p == id)
                .map(|i| g.members()[i])
        })
    }

    /// Replace each group's phase with `f(index, group)`.
    pub(crate) fn map_phases(&self, f: impl Fn(usize, &GhzGroup) -> f64) -> Result<Self> {
        let groups = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| g.clone().with_phase(f(i, g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            groups,
            ..self.clone()
        })
    }

    pub(crate) fn ensure_pure(&self) -> Result<()> {
        match self
            .groups
            .iter()
            .enumerate()
            .find(|(_, g)| g.coherence() < 1.0)
        {
            Some((i, g)) => Err(Error::NotPure {
                group: i + 1,
                coherence: g.coherence(),
            }),
            None => Ok(()),
        }
    }
}

/// Bit mask of 1-based photon `id` in an `n`-photon index (photon 1 is the MSB).
pub(crate) fn photon_bit(n: usize, id: usize) -> usize {
    1 << (n - id)
}

/// Pure state vector over `2^N` polarization basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    num_photons: usize,
    amplitudes: Vec<Complex64>,
}

impl DenseState {
    pub fn new(num_photons: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << num_photons {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for {num_photons} photons",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("state norm² is {norm}")));
        }
        Ok(Self {
            num_photons,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(num_photons: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_photons;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_photons} photons"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_photons,
            amplitudes,
        })
    }

    pub(crate) fn from_raw(num_photons: usize, amplitudes: Vec<Complex64>) -> Self {
        Self {
            num_photons,
            amplitudes,
        }
    }

    pub fn num_photons(&self) -> usize {
        self.num_photons
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Born probabilities for a σx measurement on every photon.
    ///
    /// Rotates each qubit with a Hadamard butterfly (`|+⟩ ↦ 0`, `|−⟩ ↦ 1`)
    /// and squares the result.
    pub fn sigma_x_probabilities(&self) -> Vec<f64> {
        let mut a = self.amplitudes.clone();
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let mut half = 1;
        while half < a.len() {
            for block in (0..a.len()).step_by(2 * half) {
                for i in block..block + half {
                    let (x, y) = (a[i], a[i + half]);
                    a[i] = (x + y) * scale;
                    a[i + half] = (x - y) * scale;
                }
            }
            half *= 2;
        }
        a.iter().map(Complex64::norm_sqr).collect()
    }
}

/// Expands a pure product state into its dense amplitude vector.
pub fn to_dense(state: &ProductState) -> Result<DenseState> {
    state.ensure_pure()?;
    let n = state.num_photons();
    if n > state.max_photons() {
        return Err(Error::TooLarge {
            photons: n,
            max: state.max_photons(),
        });
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    let groups = state.groups();
    let masks: Vec<usize> = groups
        .iter()
        .map(|g| g.photon_ids().iter().map(|&p| photon_bit(n, p)).sum())
        .collect();
    let amp = std::f64::consts::FRAC_1_SQRT_2.powi(groups.len() as i32);
    // Each group contributes either its all-H or all-V branch.
    for choice in 0usize..(1 << groups.len()) {
        let mut index = 0;
        let mut phase = 0.0;
        for (gi, group) in groups.iter().enumerate() {
            if choice >> gi & 1 == 1 {
                index |= masks[gi];
                phase += group.phase();
            }
        }
        amplitudes[index] = Complex64::from_polar(amp, phase);
    }
    Ok(DenseState::from_raw(n, amplitudes))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    if a.num_photons() != b.num_photons() {
        return Err(Error::DimensionMismatch {
            left: a.num_photons(),
            right: b.num_photons(),
        });
    }
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// True when every σx outcome probability of the two engines agrees within `tol`.
pub fn assert_equiv(analytic: &ProductState, dense: &DenseState, tol: f64) -> Result<bool> {
    analytic.ensure_pure()?;
    if analytic.num_photons() != dense.num_photons() {
        return Ok(false);
    }
    let lhs = outcome_distribution(analytic)?;
    let rhs = dense.sigma_x_probabilities();
    Ok(lhs
        .probabilities()
        .iter()
        .zip(&rhs)
        .all(|(p, q)| (p - q).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn group(ids: &[usize], modes: &[usize], v: f64) -> GhzGroup {
        GhzGroup::new(
            ids.to_vec(),
            modes.iter().map(|&m| PhotonSite::new(m, 1)).collect(),
            v,
        )
        .unwrap()
    }

    #[test]
    fn single_photon_is_plus_state() {
        let s = ProductState::new(1, vec![group(&[1], &[1], 1.0)]).unwrap();
        let d = to_dense(&s).unwrap();
        assert!((d.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((d.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn six_photon_ghz_has_two_branches() {
        let s = ProductState::new(3, vec![group(&[1, 2, 3, 4, 5, 6], &[1, 1, 2, 2, 3, 3], 1.0)])
            .unwrap();
        let d = to_dense(&s).unwrap();
        for (i, a) in d.amplitudes().iter().enumerate() {
            let expect = if i == 0 || i == 63 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((a.norm() - expect).abs() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn three_pairs_expand_to_eight_terms() {
        let s = ProductState::new(
            3,
            vec![
                group(&[1, 2], &[1, 1], 1.0),
                group(&[3, 4], &[2, 2], 1.0),
                group(&[5, 6], &[3, 3], 1.0),
            ],
        )
        .unwrap();
        let d = to_dense(&s).unwrap();
        let nonzero: Vec<_> = d.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 8);
        for a in nonzero {
            assert!((a.re - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        }
        assert!((d.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_pure_state_is_rejected() {
        let s = ProductState::new(1, vec![group(&[1, 2], &[1, 1], 0.9)]).unwrap();
        assert!(matches!(to_dense(&s), Err(Error::NotPure { group: 1, .. })));
        let d = DenseState::basis_state(2, 0).unwrap();
        assert!(matches!(assert_equiv(&s, &d, 1e-9), Err(Error::NotPure { .. })));
    }

    #[test]
    fn partition_is_checked() {
        let dup = ProductState::new(1, vec![group(&[1, 2], &[1, 1], 1.0), group(&[2], &[1], 1.0)]);
        assert!(matches!(dup, Err(Error::InvalidState(_))));
        let gap = ProductState::new(1, vec![group(&[1, 3], &[1, 1], 1.0)]);
        assert!(matches!(gap, Err(Error::InvalidState(_))));
        assert!(GhzGroup::new(vec![2, 1], vec![PhotonSite::new(1, 1); 2], 1.0).is_err());
        assert!(matches!(
            GhzGroup::new(vec![1], vec![PhotonSite::new(1, 1)], 1.5),
            Err(Error::InvalidCoherence(_))
        ));
        let bad_mode = ProductState::new(1, vec![group(&[1], &[2], 1.0)]);
        assert!(bad_mode.is_err());
    }

    #[test]
    fn too_many_photons() {
        let ids: Vec<usize> = (1..=13).collect();
        let g = GhzGroup::new(ids, vec![PhotonSite::new(1, 1); 13], 1.0).unwrap();
        assert!(matches!(
            ProductState::new(1, vec![g.clone()]),
            Err(Error::TooLarge { photons: 13, max: 12 })
        ));
        assert!(ProductState::with_max_photons(1, vec![g], 13).is_ok());
    }

    #[test]
    fn fidelity_cases() {
        let a = DenseState::basis_state(2, 1).unwrap();
        let b = DenseState::basis_state(2, 2).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);

        // ⟨ψ₀|ψ_π⟩ = (1 + e^{iπ})/2 = 0
        let ghz = |phi: f64| {
            let g = group(&[1, 2], &[1, 1], 1.0).with_phase(phi).unwrap();
            to_dense(&ProductState::new(1, vec![g]).unwrap()).unwrap()
        };
        assert!(fidelity(&ghz(0.0), &ghz(PI)).unwrap() < 1e-30);
        assert!((fidelity(&ghz(0.0), &ghz(PI / 2.0)).unwrap() - 0.5).abs() < 1e-15);

        let c = DenseState::basis_state(3, 0).unwrap();
        assert!(matches!(fidelity(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn basis_order_photon_one_is_msb() {
        // |V⟩ on photon 1 of 3 is index 0b100.
        assert_eq!(photon_bit(3, 1), 4);
        assert_eq!(photon_bit(3, 3), 1);
    }

    #[test]
    fn dense_state_validates_norm() {
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(DenseState::new(1, bad).is_err());
        assert!(DenseState::new(1, vec![Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn equivalence_with_self_at_zero_tolerance() {
        let s = ProductState::new(2, vec![group(&[1, 2, 3], &[1, 2, 2], 1.0)]).unwrap();
        let d = to_dense(&s).unwrap();
        assert!(assert_equiv(&s, &d, 1e-12).unwrap());
    }
}
