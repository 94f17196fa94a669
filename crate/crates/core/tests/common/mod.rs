#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use perpetual_core::network::{NetworkState, SimParams, SourcePhasing, CYCLE_STEPS};

/// Follows one network step by step and checks the structural invariants.
#[derive(Default)]
pub struct InvariantChecker {
    ghost_since: HashMap<u64, u64>,
    prev_total: usize,
}

impl InvariantChecker {
    pub fn step(&mut self, net: &mut NetworkState) -> Result<(), String> {
        let before = net.totals();
        let m = net.step();
        let after = net.totals();
        let t = net.clock();

        let recount = net.photon_count();
        if (m.computational_count, m.shunt_count, m.total_count)
            != (
                recount.computational_count,
                recount.shunt_count,
                recount.total_count,
            )
        {
            return Err(format!("t={t}: incremental {m:?} vs recount {recount:?}"));
        }
        let delta =
            (after.created - before.created) as i64 - (after.destroyed - before.destroyed) as i64;
        if self.prev_total as i64 + delta != m.total_count as i64 {
            return Err(format!(
                "t={t}: conservation broken ({} + {delta} != {})",
                self.prev_total, m.total_count
            ));
        }
        if (after.created - after.destroyed) as usize != m.total_count {
            return Err(format!("t={t}: created - destroyed != total"));
        }
        self.prev_total = m.total_count;
        if m.computational_count > net.params().capacity() {
            return Err(format!(
                "t={t}: computational {} above capacity",
                m.computational_count
            ));
        }

        let mut ids = HashSet::new();
        let mut ring_ghosts = HashSet::new();
        for (li, line) in net.lines().iter().enumerate() {
            for (s, tok) in line.ring.iter().enumerate() {
                let Some(tok) = tok else { continue };
                if s as u64 % line.period != line.phase {
                    return Err(format!(
                        "t={t}: line {li} slot {s} off phase {}",
                        line.phase
                    ));
                }
                if !ids.insert(tok.id) {
                    return Err(format!("t={t}: token {} in two places", tok.id));
                }
                if !tok.actually_present {
                    ring_ghosts.insert(tok.id);
                }
            }
            for tok in line.source.pending.iter().chain(line.source.held.iter()) {
                if !ids.insert(tok.id) {
                    return Err(format!("t={t}: token {} in two places", tok.id));
                }
            }
            if let Some(tok) = net.shunt_slot(li) {
                if !ids.insert(tok.id) {
                    return Err(format!("t={t}: token {} in two places", tok.id));
                }
            }
        }

        if net.params().p_m == 0.0 {
            self.ghost_since.retain(|id, _| ring_ghosts.contains(id));
            for id in ring_ghosts {
                let since = *self.ghost_since.entry(id).or_insert(t);
                if t - since >= CYCLE_STEPS {
                    return Err(format!("t={t}: ghost {id} unheralded since {since}"));
                }
            }
        }
        Ok(())
    }
}

pub fn run_checked(params: &SimParams, steps: u64) -> Result<NetworkState, String> {
    let mut net = NetworkState::new(params.clone()).map_err(|e| e.to_string())?;
    let mut check = InvariantChecker::default();
    for _ in 0..steps {
        check.step(&mut net)?;
    }
    Ok(net)
}

/// Metric trace of a run, for determinism checks.
pub fn trace(params: &SimParams, steps: u64) -> Vec<perpetual_core::Metrics> {
    let mut net = NetworkState::new(params.clone()).unwrap();
    (0..steps).map(|_| net.step()).collect()
}

/// Lossless run: once the rings are full they stay full.
pub fn check_lossless_fixpoint(
    n: usize,
    p_s: f64,
    seed: u64,
    phasing: SourcePhasing,
    steps: u64,
) -> Result<(), String> {
    let params = SimParams::new(n, 1.0)
        .unwrap()
        .with_p_s(p_s)
        .unwrap()
        .with_p_loss(0.0)
        .unwrap()
        .with_seed(seed)
        .with_phasing(phasing);
    let capacity = params.capacity();
    let mut net = NetworkState::new(params).unwrap();
    let mut full = false;
    let mut prev = 0;
    for _ in 0..steps {
        let m = net.step();
        if m.losses + m.heralded_losses + m.discards != 0 {
            return Err(format!(
                "t={}: lossless run lost a photon: {m:?}",
                net.clock()
            ));
        }
        if m.computational_count < prev {
            return Err(format!("t={}: computational count fell", net.clock()));
        }
        prev = m.computational_count;
        if full && m.computational_count != capacity {
            return Err(format!("t={}: left the fixpoint", net.clock()));
        }
        full |= m.computational_count == capacity;
    }
    Ok(())
}
