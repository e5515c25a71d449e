//! Probe-state factories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{GhzGroup, PhotonSite, ProductState, DEFAULT_MAX_PHOTONS};

/// Named probe families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    /// One entangled pair per mode; each mode's phase is estimated on its own.
    Individual,
    /// Modes entangled, particles entangled: a single GHZ block over all photons.
    MePe,
    /// Modes entangled, particles separated: `N/M` blocks, each spanning every mode.
    MePs,
    /// Modes separated, particles entangled: one block per mode.
    MsPe,
    /// Fully separable single-pass photons (shot-noise reference).
    MsPs,
    /// Modes entangled, particles coherent: one block, multi-pass photons.
    MePc,
    /// Modes separated, particles coherent: multi-pass singleton photons.
    MsPc,
    /// Grouping taken verbatim from the layout.
    Generic,
}

impl StrategyId {
    pub const ALL: [StrategyId; 8] = [
        StrategyId::Individual,
        StrategyId::MePe,
        StrategyId::MePs,
        StrategyId::MsPe,
        StrategyId::MsPs,
        StrategyId::MePc,
        StrategyId::MsPc,
        StrategyId::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Individual => "Individual",
            StrategyId::MePe => "MePe",
            StrategyId::MePs => "MePs",
            StrategyId::MsPe => "MsPe",
            StrategyId::MsPs => "MsPs",
            StrategyId::MePc => "MePc",
            StrategyId::MsPc => "MsPc",
            StrategyId::Generic => "Generic",
        }
    }

    /// Strategies whose photons make a single pass.
    pub fn is_single_pass(self) -> bool {
        !matches!(
            self,
            StrategyId::MePc | StrategyId::MsPc | StrategyId::Generic
        )
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

/// Photon-to-mode assignment plus an optional explicit entanglement grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLayout {
    num_modes: usize,
    sites: Vec<PhotonSite>,
    grouping: Option<Vec<Vec<usize>>>,
}

impl ModeLayout {
    /// `sites[p - 1]` is the assignment of photon `p`.
    pub fn new(num_modes: usize, sites: Vec<PhotonSite>) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidLayout("at least one mode is required".into()));
        }
        if sites.is_empty() {
            return Err(Error::InvalidLayout("layout has no photons".into()));
        }
        for (i, site) in sites.iter().enumerate() {
            if site.mode == 0 || site.mode > num_modes {
                return Err(Error::InvalidLayout(format!(
                    "photon {} assigned to mode {} outside 1..={num_modes}",
                    i + 1,
                    site.mode
                )));
            }
            if site.passes == 0 {
                return Err(Error::InvalidLayout(format!(
                    "photon {} has zero passes",
                    i + 1
                )));
            }
        }
        Ok(Self {
            num_modes,
            sites,
            grouping: None,
        })
    }

    /// `per_mode` single-pass photons in each of `num_modes` modes, numbered mode by mode.
    pub fn uniform(num_modes: usize, per_mode: usize) -> Result<Self> {
        let sites = (1..=num_modes)
            .flat_map(|m| std::iter::repeat_n(PhotonSite::new(m, 1), per_mode))
            .collect();
        Self::new(num_modes, sites)
    }

    /// Photon `k` alone in mode `k`, traversing it `passes[k - 1]` times.
    pub fn sequential(passes: &[u32]) -> Result<Self> {
        let sites = passes
            .iter()
            .enumerate()
            .map(|(i, &n)| PhotonSite::new(i + 1, n))
            .collect();
        Self::new(passes.len(), sites)
    }

    /// Attach an explicit partition of photons `1..=N` into entanglement groups.
    pub fn with_grouping(mut self, grouping: Vec<Vec<usize>>) -> Result<Self> {
        let n = self.sites.len();
        let mut seen = vec![false; n];
        for group in &grouping {
            if group.is_empty() {
                return Err(Error::InvalidLayout("empty group in grouping".into()));
            }
            for &p in group {
                if p == 0 || p > n || seen[p - 1] {
                    return Err(Error::InvalidLayout(format!(
                        "grouping must partition photons 1..={n} (photon {p})"
                    )));
                }
                seen[p - 1] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidLayout(format!(
                "grouping does not cover photons 1..={n}"
            )));
        }
        self.grouping = Some(grouping);
        Ok(self)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn num_photons(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[PhotonSite] {
        &self.sites
    }

    pub fn grouping(&self) -> Option<&[Vec<usize>]> {
        self.grouping.as_deref()
    }

    /// 1-based photon ids assigned to `mode`, ascending.
    pub fn photons_in_mode(&self, mode: usize) -> Vec<usize> {
        (1..=self.sites.len())
            .filter(|&p| self.sites[p - 1].mode == mode)
            .collect()
    }

    /// `N_k`: photon count per mode.
    pub fn photon_counts(&self) -> Vec<usize> {
        (1..=self.num_modes)
            .map(|m| self.photons_in_mode(m).len())
            .collect()
    }

    /// `n_k`: total passes through each mode.
    pub fn pass_counts(&self) -> Vec<u32> {
        let mut counts = vec![0; self.num_modes];
        for site in &self.sites {
            counts[site.mode - 1] += site.passes;
        }
        counts
    }

    /// `n = Σ_k n_k`.
    pub fn total_passes(&self) -> u32 {
        self.sites.iter().map(|s| s.passes).sum()
    }
}

/// Weights `α_k = n_k / n` of the estimated linear combination `θ̂ = αᵀθ`.
pub fn weights(layout: &ModeLayout) -> Vec<f64> {
    let total = f64::from(layout.total_passes());
    layout
        .pass_counts()
        .into_iter()
        .map(|n| f64::from(n) / total)
        .collect()
}

/// Group visibilities handed to [`make_probe`].
#[derive(Debug, Clone, PartialEq)]
pub enum Coherence {
    Uniform(f64),
    PerGroup(Vec<f64>),
}

impl Coherence {
    fn resolve(&self, groups: usize) -> Result<Vec<f64>> {
        let values = match self {
            Coherence::Uniform(v) => vec![*v; groups],
            Coherence::PerGroup(vs) if vs.len() == groups => vs.clone(),
            Coherence::PerGroup(vs) => {
                return Err(Error::InvalidLayout(format!(
                    "{} coherence values for {groups} groups",
                    vs.len()
                )))
            }
        };
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidCoherence(bad));
        }
        Ok(values)
    }
}

/// Groups the named strategy imposes on `layout`.
pub fn strategy_grouping(strategy: StrategyId, layout: &ModeLayout) -> Result<Vec<Vec<usize>>> {
    let n = layout.num_photons();
    let m = layout.num_modes();
    if strategy.is_single_pass() {
        if let Some(p) = layout.sites().iter().position(|s| s.passes != 1) {
            return Err(Error::InvalidLayout(format!(
                "{strategy} requires single-pass photons, photon {} has {} passes",
                p + 1,
                layout.sites()[p].passes
            )));
        }
    }
    let per_mode = || -> Result<Vec<Vec<usize>>> {
        (1..=m)
            .map(|mode| {
                let photons = layout.photons_in_mode(mode);
                if photons.is_empty() {
                    Err(Error::InvalidLayout(format!(
                        "{strategy} needs photons in every mode, mode {mode} is empty"
                    )))
                } else {
                    Ok(photons)
                }
            })
            .collect()
    };
    let grouping = match strategy {
        StrategyId::MePe | StrategyId::MePc => vec![(1..=n).collect()],
        StrategyId::MsPs | StrategyId::MsPc => (1..=n).map(|p| vec![p]).collect(),
        StrategyId::MsPe | StrategyId::Individual => per_mode()?,
        StrategyId::MePs => {
            if !n.is_multiple_of(m) {
                return Err(Error::InvalidLayout(format!(
                    "MePs requires M | N, got N={n}, M={m}"
                )));
            }
            let copies = n / m;
            let modes = per_mode()?;
            if modes.iter().any(|ps| ps.len() != copies) {
                return Err(Error::InvalidLayout(format!(
                    "MePs requires {copies} photons in every mode"
                )));
            }
            let mut groups: Vec<Vec<usize>> = (0..copies)
                .map(|j| modes.iter().map(|ps| ps[j]).collect())
                .collect();
            groups.iter_mut().for_each(|g| g.sort_unstable());
            groups
        }
        StrategyId::Generic => layout
            .grouping()
            .ok_or_else(|| Error::InvalidLayout("Generic strategy needs an explicit grouping".into()))?
            .to_vec(),
    };
    if strategy != StrategyId::Generic {
        if let Some(explicit) = layout.grouping() {
            let mut a: Vec<Vec<usize>> = explicit.to_vec();
            let mut b = grouping.clone();
            a.iter_mut().for_each(|g| g.sort_unstable());
            a.sort();
            b.sort();
            if a != b {
                return Err(Error::InvalidLayout(format!(
                    "explicit grouping {explicit:?} is inconsistent with {strategy}"
                )));
            }
        }
    }
    Ok(grouping)
}

/// Builds the probe for `strategy` on `layout`, all group phases zero.
pub fn make_probe(
    strategy: StrategyId,
    layout: &ModeLayout,
    coherence: &Coherence,
) -> Result<ProductState> {
    let grouping = strategy_grouping(strategy, layout)?;
    let visibilities = coherence.resolve(grouping.len())?;
    let groups = grouping
        .into_iter()
        .zip(visibilities)
        .map(|(mut ids, v)| {
            ids.sort_unstable();
            let members = ids.iter().map(|&p| layout.sites()[p - 1]).collect();
            GhzGroup::new(ids, members, v)
        })
        .collect::<Result<Vec<_>>>()?;
    let max = layout.num_photons().max(DEFAULT_MAX_PHOTONS);
    ProductState::with_max_photons(layout.num_modes(), groups, max)
}

/// The configurations used in the experiments this toolkit reproduces:
/// three modes with two single-pass photons each for the parallel families,
/// six modes with photon `k` passing `k` times for the combined families.
pub fn reference_layout(strategy: StrategyId) -> Result<ModeLayout> {
    match strategy {
        StrategyId::Individual
        | StrategyId::MePe
        | StrategyId::MePs
        | StrategyId::MsPe
        | StrategyId::MsPs => ModeLayout::uniform(3, 2),
        StrategyId::MePc | StrategyId::MsPc => ModeLayout::sequential(&[1, 2, 3, 4, 5, 6]),
        StrategyId::Generic => Err(Error::UnsupportedLayout(
            "Generic has no reference layout".into(),
        )),
    }
}

/// Convenience: [`make_probe`] on [`reference_layout`].
pub fn reference_probe(strategy: StrategyId, coherence: &Coherence) -> Result<(ModeLayout, ProductState)> {
    let layout = reference_layout(strategy)?;
    let probe = make_probe(strategy, &layout, coherence)?;
    Ok((layout, probe))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(state: &ProductState) -> Vec<usize> {
        state.groups().iter().map(|g| g.size()).collect()
    }

    #[test]
    fn mepe_reference_probe() {
        let layout = ModeLayout::uniform(3, 2).unwrap();
        let probe = make_probe(StrategyId::MePe, &layout, &Coherence::Uniform(1.0)).unwrap();
        assert_eq!(sizes(&probe), vec![6]);
        let modes: Vec<usize> = probe.groups()[0].members().iter().map(|s| s.mode).collect();
        assert_eq!(modes, vec![1, 1, 2, 2, 3, 3]);
        assert!(probe.groups()[0].members().iter().all(|s| s.passes == 1));
        assert_eq!(probe.groups()[0].phase(), 0.0);
    }

    #[test]
    fn mspc_has_six_multipass_singletons() {
        let layout = ModeLayout::sequential(&[1, 2, 3, 4, 5, 6]).unwrap();
        let probe = make_probe(StrategyId::MsPc, &layout, &Coherence::Uniform(1.0)).unwrap();
        assert_eq!(sizes(&probe), vec![1; 6]);
        let passes: Vec<u32> = probe.groups().iter().map(|g| g.members()[0].passes).collect();
        assert_eq!(passes, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn msps_is_fully_separable() {
        let layout = ModeLayout::uniform(3, 2).unwrap();
        let probe = make_probe(StrategyId::MsPs, &layout, &Coherence::Uniform(1.0)).unwrap();
        assert_eq!(sizes(&probe), vec![1; 6]);
    }

    #[test]
    fn meps_groups_span_all_modes() {
        let layout = ModeLayout::uniform(3, 2).unwrap();
        let probe = make_probe(StrategyId::MePs, &layout, &Coherence::Uniform(1.0)).unwrap();
        let ids: Vec<Vec<usize>> = probe.groups().iter().map(|g| g.photon_ids().to_vec()).collect();
        assert_eq!(ids, vec![vec![1, 3, 5], vec![2, 4, 6]]);
        for g in probe.groups() {
            assert_eq!(g.phase_coefficients(3), vec![1.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn meps_needs_divisible_layout() {
        let layout = ModeLayout::new(
            2,
            vec![PhotonSite::new(1, 1), PhotonSite::new(1, 1), PhotonSite::new(2, 1)],
        )
        .unwrap();
        assert!(matches!(
            make_probe(StrategyId::MePs, &layout, &Coherence::Uniform(1.0)),
            Err(Error::InvalidLayout(_))
        ));
    }

    #[test]
    fn single_pass_strategies_reject_multipass() {
        let layout = ModeLayout::sequential(&[1, 2]).unwrap();
        assert!(make_probe(StrategyId::MePe, &layout, &Coherence::Uniform(1.0)).is_err());
        assert!(make_probe(StrategyId::MePc, &layout, &Coherence::Uniform(1.0)).is_ok());
    }

    #[test]
    fn coherence_validation() {
        let layout = ModeLayout::uniform(3, 2).unwrap();
        assert!(matches!(
            make_probe(StrategyId::MsPe, &layout, &Coherence::Uniform(1.2)),
            Err(Error::InvalidCoherence(_))
        ));
        assert!(make_probe(StrategyId::MsPe, &layout, &Coherence::PerGroup(vec![0.9, 0.8])).is_err());
        let p = make_probe(StrategyId::MsPe, &layout, &Coherence::PerGroup(vec![0.9, 0.8, 0.7])).unwrap();
        let v: Vec<f64> = p.groups().iter().map(|g| g.coherence()).collect();
        assert_eq!(v, vec![0.9, 0.8, 0.7]);
    }

    #[test]
    fn generic_uses_explicit_grouping() {
        let layout = ModeLayout::uniform(2, 2)
            .unwrap()
            .with_grouping(vec![vec![1, 4], vec![2], vec![3]])
            .unwrap();
        let probe = make_probe(StrategyId::Generic, &layout, &Coherence::Uniform(1.0)).unwrap();
        assert_eq!(sizes(&probe), vec![2, 1, 1]);
        assert!(make_probe(StrategyId::MePe, &layout, &Coherence::Uniform(1.0)).is_err());
        let bare = ModeLayout::uniform(2, 2).unwrap();
        assert!(make_probe(StrategyId::Generic, &bare, &Coherence::Uniform(1.0)).is_err());
        assert!(bare.clone().with_grouping(vec![vec![1, 2], vec![2, 3, 4]]).is_err());
        assert!(bare.with_grouping(vec![vec![1, 2]]).is_err());
    }

    #[test]
    fn weight_examples() {
        let w = weights(&ModeLayout::uniform(3, 2).unwrap());
        assert!(w.iter().all(|&a| (a - 1.0 / 3.0).abs() < 1e-15));
        let w = weights(&ModeLayout::sequential(&[1, 2, 3, 4, 5, 6]).unwrap());
        for (k, a) in w.iter().enumerate() {
            assert!((a - (k + 1) as f64 / 21.0).abs() < 1e-15);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let w = weights(&ModeLayout::sequential(&[4]).unwrap());
        assert_eq!(w, vec![1.0]);
    }

    #[test]
    fn layout_validation() {
        assert!(ModeLayout::new(0, vec![PhotonSite::new(1, 1)]).is_err());
        assert!(ModeLayout::new(2, vec![PhotonSite::new(3, 1)]).is_err());
        assert!(ModeLayout::new(2, vec![PhotonSite::new(1, 0)]).is_err());
        assert!(ModeLayout::new(2, vec![]).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in StrategyId::ALL {
            assert_eq!(s.name().parse::<StrategyId>().unwrap(), s);
        }
        assert!("MeMe".parse::<StrategyId>().is_err());
    }
}
