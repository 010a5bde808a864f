//! Shared inputs for the criterion benches.

use msp_core::noise::{ConfigSampler, ErrorConfig, NoiseModel};
use msp_core::ProtocolCircuit;

/// The first `count` non-trivial configurations drawn from the uniform model at rate `p`.
pub fn nontrivial_configs(c: &ProtocolCircuit, p: f64, count: usize, seed: u64) -> Vec<ErrorConfig> {
    let s = ConfigSampler::new(&NoiseModel::uniform(p).expect("valid rate"), c).expect("valid circuit");
    (0..).map(|i| s.sample(seed, i)).filter(|c| !c.is_trivial()).take(count).collect()
}
