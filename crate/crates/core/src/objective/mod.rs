//! Composite channel, achievable rate, the objective `f = -ln det(...)` and
//! its closed-form Wirtinger gradients for both RIS arrangements.
//!
//! The composite channel is never formed inside the gradient path: `H F` is
//! built by a forward pass over the panel matrices and `H^H Y` by the matching
//! adjoint pass, which keeps the per-iteration cost linear in the number of
//! RIS elements.

mod eval;
mod types;

pub use eval::{
    achievable_rate, channel_times, composite_channel, configuration_rate, evaluate, grad_concat,
    grad_f, grad_phi_multihop, grad_phi_parallel, objective_f, Evaluation,
};
pub use types::{
    ChannelSet, LinkBudget, PhasePattern, Phases, Precoder, MODULUS_SLACK, PRECODER_SLACK,
};
