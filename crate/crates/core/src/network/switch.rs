//! Injection switch of one optical line.

use serde::Serialize;

/// What the detection network reports for the slot arriving at the
/// injection boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Recycled {
    /// Detection said recycle; a photon is believed to be in the slot.
    Believed,
    /// Detection heralded a loss.
    HeraldedLoss,
    /// Nothing was ever injected into this slot. The switch treats this
    /// exactly like a heralded loss.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    /// Known-empty slot with nothing to fill it.
    Idle,
}

/// Which photon goes into the preparation network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Injected {
    Recycled,
    Shunt,
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScenarioAction {
    pub scenario: Scenario,
    pub inject: Option<Injected>,
    /// The shunt photon stays in the shunt and moves up a line.
    pub shunt_hops: bool,
    /// The source photon enters the (now free) shunt slot.
    pub source_to_shunt: bool,
    /// The source photon is routed to a termination point.
    pub terminate_source: bool,
}

/// The eight input combinations of the switch. Seven are the switching
/// scenarios a-g; the eighth is a known-empty slot with no replacement.
pub fn switch_decision(
    recycled: Recycled,
    shunt_occupied: bool,
    source_ready: bool,
) -> ScenarioAction {
    let believed = recycled == Recycled::Believed;
    let act = |scenario, inject, shunt_hops, source_to_shunt, terminate_source| ScenarioAction {
        scenario,
        inject,
        shunt_hops,
        source_to_shunt,
        terminate_source,
    };
    match (believed, shunt_occupied, source_ready) {
        (true, false, false) => act(Scenario::A, Some(Injected::Recycled), false, false, false),
        (true, true, false) => act(Scenario::B, Some(Injected::Recycled), true, false, false),
        (false, true, false) => act(Scenario::C, Some(Injected::Shunt), false, false, false),
        (false, true, true) => act(Scenario::D, Some(Injected::Shunt), false, true, false),
        (true, true, true) => act(Scenario::E, Some(Injected::Recycled), true, false, true),
        (false, false, true) => act(Scenario::F, Some(Injected::Source), false, false, false),
        (true, false, true) => act(Scenario::G, Some(Injected::Recycled), false, true, false),
        (false, false, false) => act(Scenario::Idle, None, false, false, false),
    }
}
