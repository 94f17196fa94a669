//! Shared setup for the benchmarks in `benches/`.

use perpetual_core::{NetworkState, SimParams};

/// A network warmed up to its saturated steady state.
pub fn saturated_network(n_lines: usize, bias: f64, seed: u64) -> NetworkState {
    let params = SimParams::new(n_lines, bias)
        .expect("valid benchmark params")
        .with_seed(seed);
    let t = params.t_max;
    let mut net = NetworkState::new(params).expect("valid benchmark params");
    while net.clock() < t {
        net.step();
    }
    net
}
