//! Which public operation implements each model relation.
//!
//! `docs/equations.md` carries the same table; a test keeps the two in step.

/// `(relation, operation path)`.
pub const OPERATIONS: &[(&str, &str)] = &[
    ("per-photon phase encoding", "evolution::phase_unitary"),
    ("weighted mean phase", "probes::weights"),
    ("probe construction", "probes::make_probe"),
    ("multi-pass phase accumulation", "evolution::apply_phases"),
    ("dense-state evolution", "evolution::apply_phases_dense"),
    ("group parity probability", "measurement::parity_probability"),
    ("joint outcome distribution", "measurement::outcome_distribution"),
    ("parity of a photon subset", "measurement::subset_parity_marginal"),
    ("classical Fisher matrix", "estimation::fisher_matrix"),
    ("effective Fisher information", "estimation::effective_fi"),
    ("matrix-bound effective information", "estimation::effective_fi_crb"),
    ("Cramér-Rao bound", "estimation::crb"),
    ("fringe Fisher information", "estimation::fi_curve"),
    ("noise-free strategy limits", "estimation::theoretical_limits"),
    ("parity fringe fit", "estimation::fit_fringe"),
    ("maximum-likelihood phase", "estimation::mle_estimate"),
    ("grouped error bars", "estimation::repeat_estimation"),
    ("decibel reduction", "estimation::db_reduction"),
    ("post-selected coincidences", "acquisition::simulate_run"),
];
