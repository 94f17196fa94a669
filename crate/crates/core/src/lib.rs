//! Simulation toolkit for a photon-recycling optical quantum computer built
//! from a single type of atom-cavity module.
//!
//! - [`fock_optics`]: exact truncated-Fock model of the module, used as the
//!   oracle for distillation probabilities and fidelities.
//! - [`loss_detection`]: the two-module loss-heralding protocol and its
//!   recycle/replace rule.
//! - [`network`]: step-by-step simulator of one cross-section of lines,
//!   sources and the shunting network.
//! - [`montecarlo`]: seeded trial runner, bias sweeps, saturation fractions
//!   and boot-up scaling fits.
//! - [`report`]: CSV/JSON writers for the result schemas.

pub mod error;
pub mod fock_optics;
pub mod loss_detection;
pub mod montecarlo;
pub mod network;
pub mod report;

pub use error::{Error, Result};
pub use network::{Metrics, NetworkState, SimParams, SourcePhasing};
