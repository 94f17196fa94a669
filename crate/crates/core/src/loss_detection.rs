//! Double-measurement loss detection.
//!
//! Every photon leaving the preparation network is read out twice by QND
//! modules `M1` and `M2`, with a phase flip `|±> -> |∓>` in between. A vacuum
//! reads `+` on both modules, so equal outcomes are treated as a loss and the
//! slot is refilled; differing outcomes mean the photon is recycled.

use std::fmt;

use serde::Serialize;

pub use crate::fock_optics::XOutcome as Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IncidentState {
    PlusPhoton,
    MinusPhoton,
    Vacuum,
}

impl IncidentState {
    pub const ALL: [Self; 3] = [Self::Vacuum, Self::PlusPhoton, Self::MinusPhoton];

    /// The single-photon phase flip applied between the two modules.
    pub fn rotated(self) -> Self {
        match self {
            Self::PlusPhoton => Self::MinusPhoton,
            Self::MinusPhoton => Self::PlusPhoton,
            Self::Vacuum => Self::Vacuum,
        }
    }

    fn ideal_reading(self) -> Outcome {
        match self {
            // the module cannot tell vacuum from |+>
            Self::PlusPhoton | Self::Vacuum => Outcome::Plus,
            Self::MinusPhoton => Outcome::Minus,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Self::PlusPhoton => "|+>",
            Self::MinusPhoton => "|->",
            Self::Vacuum => "|vac>",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ErrorFlags {
    pub m1_error: bool,
    pub m2_error: bool,
    pub loss_after_m1: bool,
}

impl ErrorFlags {
    pub const NONE: Self = Self {
        m1_error: false,
        m2_error: false,
        loss_after_m1: false,
    };

    pub fn count(self) -> u32 {
        self.m1_error as u32 + self.m2_error as u32 + self.loss_after_m1 as u32
    }

    /// All eight combinations, ordered by flag bits (m1, m2, loss).
    pub fn all() -> impl Iterator<Item = Self> {
        (0u8..8).map(|bits| Self {
            m1_error: bits & 0b100 != 0,
            m2_error: bits & 0b010 != 0,
            loss_after_m1: bits & 0b001 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OutcomePair {
    pub m1: Outcome,
    pub m2: Outcome,
}

impl OutcomePair {
    pub const fn new(m1: Outcome, m2: Outcome) -> Self {
        Self { m1, m2 }
    }

    /// Table order: `(+,+)`, `(+,-)`, `(-,+)`, `(-,-)`.
    pub const ALL: [Self; 4] = [
        Self::new(Outcome::Plus, Outcome::Plus),
        Self::new(Outcome::Plus, Outcome::Minus),
        Self::new(Outcome::Minus, Outcome::Plus),
        Self::new(Outcome::Minus, Outcome::Minus),
    ];
}

impl fmt::Display for OutcomePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |o: Outcome| if o == Outcome::Plus { "+" } else { "-" };
        write!(f, "|{}>_M1|{}>_M2", s(self.m1), s(self.m2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    Recycle,
    Replace,
}

fn flip(o: Outcome, error: bool) -> Outcome {
    match (o, error) {
        (o, false) => o,
        (Outcome::Plus, true) => Outcome::Minus,
        (Outcome::Minus, true) => Outcome::Plus,
    }
}

/// Readouts of both detection modules for a given incident state and set of
/// faults. Measurement errors are outcome flips applied after the ideal
/// projection.
pub fn simulate_double_measurement(incident: IncidentState, flags: ErrorFlags) -> OutcomePair {
    let m1 = incident.ideal_reading();
    let at_m2 = if flags.loss_after_m1 {
        IncidentState::Vacuum
    } else {
        incident.rotated()
    };
    OutcomePair {
        m1: flip(m1, flags.m1_error),
        m2: flip(at_m2.ideal_reading(), flags.m2_error),
    }
}

pub fn classify(outcomes: OutcomePair) -> Decision {
    if outcomes.m1 == outcomes.m2 {
        Decision::Replace
    } else {
        Decision::Recycle
    }
}

/// One physical scenario of the detection network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub incident: IncidentState,
    pub flags: ErrorFlags,
    pub outcomes: OutcomePair,
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut desc = self.incident.label().to_string();
        match (self.flags.m1_error, self.flags.m2_error) {
            (true, true) => desc.push_str(" & errors on M1 & M2"),
            (true, false) => desc.push_str(" & error on M1"),
            (false, true) => desc.push_str(" & error on M2"),
            (false, false) => {}
        }
        if self.flags.loss_after_m1 {
            desc.push_str(" & loss after M1");
        }
        write!(f, "{desc:<40} {}", self.outcomes)
    }
}

/// Every distinguishable scenario, grouped by outcome pattern in table order.
/// Within a group, rows are ordered by number of faults, so the fault-free
/// scenario leads wherever one exists. A vacuum cannot be lost again, so
/// `Vacuum` with `loss_after_m1` is not a separate scenario.
pub fn enumerate_table() -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = IncidentState::ALL
        .into_iter()
        .flat_map(|incident| ErrorFlags::all().map(move |flags| (incident, flags)))
        .filter(|(incident, flags)| !(*incident == IncidentState::Vacuum && flags.loss_after_m1))
        .map(|(incident, flags)| TableRow {
            incident,
            flags,
            outcomes: simulate_double_measurement(incident, flags),
        })
        .collect();
    let group = |p: &OutcomePair| OutcomePair::ALL.iter().position(|q| q == p).unwrap();
    // stable sort keeps incident/flag-bit order as the tie break
    rows.sort_by_key(|r| (group(&r.outcomes), r.flags.count()));
    rows
}

/// What a wrong decision does to the slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Misclassification {
    /// A photon that was still there gets thrown away.
    PhotonDiscarded,
    /// A vacuum is sent back round as if it were a photon.
    VacuumRecycled,
}

/// Compares the decision against the photon actually leaving `M2`.
pub fn misclassification(incident: IncidentState, flags: ErrorFlags) -> Option<Misclassification> {
    let survives = incident != IncidentState::Vacuum && !flags.loss_after_m1;
    match (
        survives,
        classify(simulate_double_measurement(incident, flags)),
    ) {
        (true, Decision::Replace) => Some(Misclassification::PhotonDiscarded),
        (false, Decision::Recycle) => Some(Misclassification::VacuumRecycled),
        _ => None,
    }
}
