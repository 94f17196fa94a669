use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use super::params::{SimParams, CYCLE_STEPS, SOURCE_PERIOD};
use super::switch::{switch_decision, Injected, Recycled};
use crate::error::Result;
use crate::loss_detection::{
    classify, simulate_double_measurement, Decision, ErrorFlags, IncidentState,
};

/// The generator behind every stochastic draw in the simulator.
pub type SimRng = Xoshiro256PlusPlus;

/// Ring position (steps since injection) at which both detection modules
/// have been passed. Positions 1-4 are the preparation modules, 5-8 the
/// delay before measurement, 9-10 the two detection modules and 11-12 the
/// return path.
pub const DETECTION_POS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhotonToken {
    pub id: u64,
    /// `false` for a ghost: a vacuum the network still believes is a photon.
    pub actually_present: bool,
    pub birth_time: u64,
    pub recycle_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Loss,
    Herald,
    Inject,
    Terminate,
    SourceSuccess,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Loss => "loss",
            Self::Herald => "herald",
            Self::Inject => "inject",
            Self::Terminate => "terminate",
            Self::SourceSuccess => "source_success",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Event {
    pub t: u64,
    pub line: usize,
    pub kind: EventKind,
    pub token_id: u64,
}

/// Photon counts (present photons only) plus what happened in the last step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub computational_count: usize,
    pub shunt_count: usize,
    pub total_count: usize,
    pub losses: u32,
    pub heralded_losses: u32,
    pub injections: u32,
    pub terminations: u32,
    /// Photons created by source successes.
    pub created: u32,
    /// Live photons thrown away by a wrong `Replace`.
    pub discards: u32,
}

impl Metrics {
    /// Present photons destroyed this step.
    pub fn destroyed(&self) -> u32 {
        self.losses + self.terminations + self.discards
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceState {
    pub next_attempt: u64,
    /// Distilled photon waiting out its confirmation delay.
    pub pending: Option<PhotonToken>,
    /// Confirmed photon waiting for the line's next injection slot.
    pub held: Option<PhotonToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineState {
    pub period: u64,
    pub phase: u64,
    /// Indexed by injection time mod 12; a token in slot `s` sits at ring
    /// position `(t - s) mod 12`.
    pub ring: [Option<PhotonToken>; CYCLE_STEPS as usize],
    pub source: SourceState,
}

impl LineState {
    fn new(index: usize, source_offset: u64) -> Self {
        let period = if index.is_multiple_of(2) { 2 } else { 4 };
        Self {
            period,
            phase: line_phase(index, period),
            ring: [None; CYCLE_STEPS as usize],
            source: SourceState {
                next_attempt: source_offset,
                pending: None,
                held: None,
            },
        }
    }

    pub fn is_injection_time(&self, t: u64) -> bool {
        // periods are powers of two
        t & (self.period - 1) == self.phase
    }

    pub fn ring_tokens(&self) -> impl Iterator<Item = &PhotonToken> {
        self.ring.iter().flatten()
    }
}

/// Neighbouring lines inject one step apart; line 0 injects at even steps.
pub const PHASE_ORIGIN: u64 = 0;

fn line_phase(index: usize, period: u64) -> u64 {
    (PHASE_ORIGIN + index as u64) % period
}

/// Running totals since boot, used to check conservation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub created: u64,
    pub destroyed: u64,
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    params: SimParams,
    lines: Vec<LineState>,
    clock: u64,
    rng: SimRng,
    loss: Bernoulli,
    source: Bernoulli,
    meas_error: Bernoulli,
    coin: Bernoulli,
    counters: Metrics,
    totals: Totals,
    next_id: u64,
    events: Option<Vec<Event>>,
    shunt: Vec<Option<PhotonToken>>,
}

impl NetworkState {
    /// Empty network at `t = 0`, seeded from `params.seed`.
    pub fn new(params: SimParams) -> Result<Self> {
        params.validate()?;
        let bern = |p: f64| Bernoulli::new(p).expect("validated probability");
        let n_lines = params.n_lines;
        let lines = (0..params.n_lines)
            .map(|i| LineState::new(i, params.source_phasing.offset(i)))
            .collect();
        Ok(Self {
            loss: bern(params.p_loss()),
            source: bern(params.p_s()),
            meas_error: bern(params.p_m),
            coin: bern(0.5),
            rng: SimRng::seed_from_u64(params.seed),
            params,
            lines,
            clock: 0,
            counters: Metrics::default(),
            totals: Totals::default(),
            next_id: 0,
            events: None,
            shunt: vec![None; n_lines],
        })
    }

    /// Starts collecting an event log.
    pub fn record_events(&mut self) {
        self.events.get_or_insert_with(Vec::new);
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        self.events.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn lines(&self) -> &[LineState] {
        &self.lines
    }

    /// The shunt token facing `line` at the start of the next step.
    pub fn shunt_slot(&self, line: usize) -> Option<&PhotonToken> {
        let n = self.lines.len();
        let idx = (line + n - (self.clock % n as u64) as usize) % n;
        self.shunt[idx].as_ref()
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn metrics(&self) -> Metrics {
        self.counters
    }

    pub fn totals(&self) -> Totals {
        self.totals
    }

    pub fn is_saturated(&self) -> bool {
        self.counters.total_count > self.params.capacity()
    }

    fn log(&mut self, line: usize, kind: EventKind, token_id: u64) {
        if let Some(ev) = self.events.as_mut() {
            ev.push(Event {
                t: self.clock,
                line,
                kind,
                token_id,
            });
        }
    }

    /// Samples a loss on a live token. Returns true if it just became a ghost.
    #[inline]
    fn sample_loss(&mut self, tok: &mut PhotonToken, m: &mut Metrics, in_ring: bool) -> bool {
        if tok.actually_present && self.loss.sample(&mut self.rng) {
            tok.actually_present = false;
            m.losses += 1;
            if in_ring {
                m.computational_count -= 1;
            } else {
                m.shunt_count -= 1;
            }
            true
        } else {
            false
        }
    }

    fn new_token(&mut self) -> PhotonToken {
        let id = self.next_id;
        self.next_id += 1;
        PhotonToken {
            id,
            actually_present: true,
            birth_time: self.clock,
            recycle_count: 0,
        }
    }

    /// Advances the network by one step of length T.
    ///
    /// Draw order: for each line in ascending order, the ring tokens by
    /// ascending position (one loss draw per live token; at the detection
    /// position the loss draw is followed by a polarity draw for a live
    /// photon and, when `p_m > 0`, the M1 then M2 error draws); then each
    /// shunt token's hop-loss draw by line; then per line the loss draws of
    /// the held and the pending source photon followed by the line's attempt
    /// draw if one is due.
    /// The switches consume no randomness.
    pub fn step(&mut self) -> Metrics {
        let t = self.clock;
        let mut m = Metrics {
            computational_count: self.counters.computational_count,
            shunt_count: self.counters.shunt_count,
            total_count: self.counters.total_count,
            ..Metrics::default()
        };
        let n = self.lines.len();

        // ring transport, loss and detection
        let t_mod = (t % CYCLE_STEPS) as usize;
        let cycle = CYCLE_STEPS as usize;
        for li in 0..n {
            // only slots on the line's phase can hold tokens
            let period = self.lines[li].period as usize;
            let phase = self.lines[li].phase as usize;
            let mut pos = (t_mod + cycle - phase) & (period - 1);
            if pos == 0 {
                pos = period;
            }
            while pos <= cycle {
                let s = if pos <= t_mod {
                    t_mod - pos
                } else {
                    t_mod + cycle - pos
                };
                let this_pos = pos as u64;
                pos += period;
                let Some(mut tok) = self.lines[li].ring[s] else {
                    continue;
                };
                let present_before = tok.actually_present;
                if self.sample_loss(&mut tok, &mut m, true) {
                    self.log(li, EventKind::Loss, tok.id);
                }
                if this_pos == DETECTION_POS {
                    let incident = if !present_before {
                        IncidentState::Vacuum
                    } else if self.coin.sample(&mut self.rng) {
                        IncidentState::PlusPhoton
                    } else {
                        IncidentState::MinusPhoton
                    };
                    let mut flags = ErrorFlags {
                        loss_after_m1: present_before && !tok.actually_present,
                        ..ErrorFlags::NONE
                    };
                    if self.params.p_m > 0.0 {
                        flags.m1_error = self.meas_error.sample(&mut self.rng);
                        flags.m2_error = self.meas_error.sample(&mut self.rng);
                    }
                    if classify(simulate_double_measurement(incident, flags)) == Decision::Replace {
                        if tok.actually_present {
                            m.discards += 1;
                            m.computational_count -= 1;
                        }
                        m.heralded_losses += 1;
                        self.log(li, EventKind::Herald, tok.id);
                        self.lines[li].ring[s] = None;
                        continue;
                    }
                }
                self.lines[li].ring[s] = Some(tok);
            }
        }

        // The shunt is a ring of N slots turning one line per step; line
        // `li` currently faces physical slot `(li - t) mod N`.
        let shunt_base = (n - (t % n as u64) as usize) % n;
        let shunt_idx = |li: usize| {
            let i = li + shunt_base;
            if i >= n {
                i - n
            } else {
                i
            }
        };

        // shunt hops (tokens moved up a line at the end of the last step)
        for li in 0..n {
            let idx = shunt_idx(li);
            if let Some(mut tok) = self.shunt[idx] {
                if self.sample_loss(&mut tok, &mut m, false) {
                    self.log(li, EventKind::Loss, tok.id);
                }
                self.shunt[idx] = Some(tok);
            }
        }

        // sources (confirmation delay, then new attempts) and the switch,
        // which draws nothing
        let boundary = t_mod;
        for li in 0..n {
            let mut src = None;
            if let Some(mut tok) = self.lines[li].source.held.take() {
                if self.sample_loss(&mut tok, &mut m, false) {
                    self.log(li, EventKind::Loss, tok.id);
                }
                src = Some(tok);
            }
            if let Some(mut tok) = self.lines[li].source.pending.take() {
                if self.sample_loss(&mut tok, &mut m, false) {
                    self.log(li, EventKind::Loss, tok.id);
                }
                if src.is_none() {
                    src = Some(tok);
                } else {
                    if tok.actually_present {
                        m.terminations += 1;
                        m.shunt_count -= 1;
                    }
                    self.log(li, EventKind::Terminate, tok.id);
                }
            }
            if self.lines[li].source.next_attempt == t {
                self.lines[li].source.next_attempt = t + SOURCE_PERIOD;
                if self.source.sample(&mut self.rng) {
                    let tok = self.new_token();
                    m.created += 1;
                    m.shunt_count += 1;
                    self.log(li, EventKind::SourceSuccess, tok.id);
                    self.lines[li].source.pending = Some(tok);
                }
            }

            let idx = shunt_idx(li);
            let line = &mut self.lines[li];
            let shunt = &mut self.shunt[idx];
            if !line.is_injection_time(t) {
                // a photon released off-slot could never line up with an
                // injection slot, so it waits for this line's next one
                line.source.held = src;
                continue;
            }
            let arriving = line.ring[boundary].take();
            let recycled = match arriving {
                Some(_) => Recycled::Believed,
                None => Recycled::HeraldedLoss,
            };
            let action = switch_decision(recycled, shunt.is_some(), src.is_some());
            let injected = match action.inject {
                Some(Injected::Recycled) => arriving.map(|mut tok| {
                    tok.recycle_count += 1;
                    tok
                }),
                Some(Injected::Shunt) => shunt.take(),
                Some(Injected::Source) => src,
                None => None,
            };
            if action.source_to_shunt {
                debug_assert!(shunt.is_none());
                *shunt = src;
            }
            line.ring[boundary] = injected;
            if action.terminate_source {
                let tok = src.expect("scenario e has a source photon");
                if tok.actually_present {
                    m.terminations += 1;
                    m.shunt_count -= 1;
                }
                self.log(li, EventKind::Terminate, tok.id);
            }
            if let Some(tok) = injected {
                if !matches!(action.inject, Some(Injected::Recycled)) {
                    m.injections += 1;
                    if tok.actually_present {
                        m.shunt_count -= 1;
                        m.computational_count += 1;
                    }
                    self.log(li, EventKind::Inject, tok.id);
                }
            }
        }

        self.clock += 1;
        m.total_count = m.computational_count + m.shunt_count;
        self.totals.created += m.created as u64;
        self.totals.destroyed += m.destroyed() as u64;
        self.counters = m;
        m
    }

    /// Counts live photons from scratch: ring slots are computational, shunt
    /// slots and pending source photons are shunt.
    pub fn photon_count(&self) -> Metrics {
        let mut comp = 0;
        let mut shunt = 0;
        for line in &self.lines {
            comp += line.ring_tokens().filter(|t| t.actually_present).count();
            shunt += line
                .source
                .pending
                .iter()
                .chain(line.source.held.iter())
                .filter(|t| t.actually_present)
                .count();
        }
        shunt += self
            .shunt
            .iter()
            .flatten()
            .filter(|t| t.actually_present)
            .count();
        Metrics {
            computational_count: comp,
            shunt_count: shunt,
            total_count: comp + shunt,
            ..Metrics::default()
        }
    }

    /// Runs until `t_max`, returning the last metrics.
    pub fn run_to_end(&mut self) -> Metrics {
        while self.clock < self.params.t_max {
            self.step();
        }
        self.counters
    }
}

/// True iff more than `9N/2` photons are present.
pub fn is_saturated(metrics: &Metrics, params: &SimParams) -> bool {
    metrics.total_count > params.capacity()
}
