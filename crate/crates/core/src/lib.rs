//! Joint transmit-precoder and RIS phase optimization for MIMO links assisted
//! by several reconfigurable intelligent surfaces, in parallel or multi-hop
//! arrangements.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: dense complex matrices, Cholesky log-determinant, power
//!   iteration spectral norm.
//! * [`channel`]: geometric mmWave / sub-THz channel generation (near-field
//!   spherical and far-field clustered models).
//! * [`objective`]: composite channel, achievable rate and Wirtinger gradients.
//! * [`lipschitz`]: gradient Lipschitz bounds that fix the step size.
//! * [`optimizer`]: the monotone accelerated proximal gradient solver and the
//!   baselines it is compared against.
//! * [`harness`]: scenario configuration, Monte Carlo runs, sweeps, CSV output
//!   and self-check instruments.

pub mod channel;
pub mod error;
pub mod harness;
pub mod lipschitz;
pub mod numerics;
pub mod objective;
pub mod optimizer;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, C64};
pub use objective::{ChannelSet, LinkBudget, PhasePattern, Phases, Precoder};
