//! Statistical core: Fisher information, Cramér–Rao bounds, strategy limits,
//! fringe fitting and maximum-likelihood phase estimation.

mod fisher;
mod fit;
mod limits;
mod mle;

pub use fisher::{
    crb, effective_fi, effective_fi_crb, fisher_matrix, group_fi, min_outcome_probability,
    FisherMatrix, SINGULAR_PROBABILITY,
};
pub use fit::{fit_fringe, FringeFit, FringeSample, Z_90};
pub use limits::{
    db_reduction, fi_curve, fi_curve_for_probe, fringe_fi, theoretical_limits, TheoreticalLimit,
};
pub use mle::{
    mle_estimate, mle_from_parity, repeat_estimation, EstimationResult, ParityModel, GRID_POINTS,
    REFINE_TOLERANCE,
};
