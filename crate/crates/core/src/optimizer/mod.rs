//! The monotone accelerated proximal gradient solver, its plain variant, and
//! the baselines it is compared against.
//!
//! Each iteration forms an extrapolated point from the momentum sequence,
//! takes a projected gradient step from it and, as a safeguard, a second step
//! from the current iterate. The better of the two becomes the next iterate,
//! so the objective never increases.

mod baselines;
mod mapg;
mod prox;

pub use baselines::{no_ris, ris_only, static_ris, svd_precoder};
pub use mapg::{
    jpr_mapg, jpr_pg, momentum_sequence, run_algorithm, Algorithm, Branch, InitialPoint, IterationRecord,
    OptimizerConfig, RunReport, DESCENT_SLACK,
};
pub use prox::{project_phases, prox_phase, prox_precoder, quantize_phases};
