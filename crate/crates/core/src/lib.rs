//! Finite-blocklength converse bounds for two-user discrete memoryless
//! multiple access channels (DM-MACs).
//!
//! The crate computes outer bounds on the achievable rate pairs of an
//! `(n, M1, M2, epsilon)` MAC code from the per-letter statistics of the
//! three information densities, in three flavors:
//!
//! * `explicit-exact` — every term is computed from exact (or certified
//!   one-sided lattice) tail probabilities of the n-fold density sums;
//!   the result is a rigorous bound.
//! * `explicit-be` — the tail threshold is certified through a
//!   Berry-Esseen normal approximation; still rigorous.
//! * `normal` — the second-order normal approximation with the constant
//!   term dropped; labeled an approximation, not a bound.
//!
//! Supporting machinery: exact composition-enumeration sum laws,
//! directed-rounding lattice convolutions with one-sided CDF guarantees,
//! a support-function sweep that traces rate-region boundaries, and a
//! tiny-instance code simulator with an exhaustive ML decoder for
//! converse sanity checks.

pub mod bounds;
pub mod channel;
pub mod density;
pub mod error;
pub mod gauss;
pub mod numeric;
pub mod region;
pub mod rng;
pub mod sim;
pub mod tail;

pub use bounds::{
    beta_schedule, berry_esseen_gamma, bound_component, delta_normal, explicit_bound_triple,
    explicit_triple_from_table, normal_approx_triple, normal_approx_triple_ts,
    normal_triple_from_table, triple_from_table, BetaSchedule, BoundMode, BoundTriple,
    ConstraintDiag, ExplicitMode, TailPath,
};
pub use channel::{induced_laws, DmMac, InducedLaws, InputPair, TimeSharedInput};
pub use density::{
    density_table, moments, time_shared_density_table, DensityKind, DensityTable, Moments,
};
pub use error::{Error, Result};
pub use gauss::{q_function, q_inverse};
pub use region::{
    capacity_region, outer_region, pentagon_support, Pentagon, RegionBoundary, RegionPoint,
    SupportPoint, SweepConfig,
};
pub use sim::{
    converse_check, exact_error, monte_carlo_error, random_codebook, Codebook, ConverseVerdict,
    ErrorReport,
};
pub use tail::{
    cdf, exact_sum_distribution, joint_tail, lattice_sum_distribution, monte_carlo_tail,
    solve_delta, AtomicDistribution, DeltaSolution, LatticeDistribution, MonteCarloEstimate,
    Rounding, SolveMode, SumLaw, TailTarget, Threshold,
};
