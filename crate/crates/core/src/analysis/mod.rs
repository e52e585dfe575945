//! Comparisons between exact and estimated influence profiles, the
//! community artefact summary, convergence-time sweeps, and the local
//! stability probe of the message fixed point.

mod rank;
mod stability;
mod sweep;

pub use rank::{
    community_artefact, compare_rankings, kendall_tau_b, spearman_rho, CommunityArtefact,
    CommunitySummary, RankingComparison,
};
pub use stability::{finite_difference_check, stability_probe, StabilityReport};
pub use sweep::{convergence_sweep, FamilyPoint, LinearFit, SweepRow, SweepTable};
