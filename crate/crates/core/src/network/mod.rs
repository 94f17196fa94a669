//! Discrete-time model of one cross-section of the perpetual network.
//!
//! Each of the `N` optical lines is a 12-step recirculation loop (four
//! preparation modules, a four-step delay, two detection modules and a
//! two-step return path) carrying photons every 2T (even lines) or 4T (odd
//! lines). Below every line sits a probabilistic source whose distilled
//! photons either enter the line directly or circulate upward through the
//! shunting network until a heralded loss needs them.

mod engine;
mod params;
mod switch;

pub use engine::{
    is_saturated, Event, EventKind, LineState, Metrics, NetworkState, PhotonToken, SimRng,
    SourceState, Totals, DETECTION_POS, PHASE_ORIGIN,
};
pub use params::{per_cycle_loss, SimParams, SourcePhasing, CYCLE_STEPS, SOURCE_PERIOD};
pub use switch::{switch_decision, Injected, Recycled, Scenario, ScenarioAction};
