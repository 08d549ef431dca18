//! The twelve-node benchmark network and its default run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{NodeDynamics, PlantSpec};
use crate::error::Result;
use crate::graph::{Edge, SignedGraph};
use crate::protocol::{GainConfig, GainRule, SignalConfig};
use crate::sim::{InitSpec, SimConfig};

pub const REFERENCE_NODES: usize = 12;

/// Antagonistic links (one-based labels).
pub const ANTAGONISTIC: [(usize, usize); 11] = [
    (1, 4),
    (1, 5),
    (1, 8),
    (1, 10),
    (1, 12),
    (2, 5),
    (3, 4),
    (3, 6),
    (4, 9),
    (8, 9),
    (9, 11),
];

/// Cooperative links (one-based labels).
pub const COOPERATIVE: [(usize, usize); 9] = [
    (1, 3),
    (1, 6),
    (1, 11),
    (2, 6),
    (4, 7),
    (4, 8),
    (4, 10),
    (7, 8),
    (9, 10),
];

pub const MAGNITUDE_RANGE: (f64, f64) = (0.3, 1.0);

const MAGNITUDE_STREAM: u64 = 1;

/// Benchmark topology with magnitudes drawn uniformly from
/// [`MAGNITUDE_RANGE`]; cooperative edges first, then antagonistic, each in
/// listed order.
pub fn reference_graph(magnitude_seed: u64) -> Result<SignedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(magnitude_seed);
    rng.set_stream(MAGNITUDE_STREAM);
    let (lo, hi) = MAGNITUDE_RANGE;
    let mut edges = Vec::with_capacity(COOPERATIVE.len() + ANTAGONISTIC.len());
    for (list, sign) in [(&COOPERATIVE[..], 1.0), (&ANTAGONISTIC[..], -1.0)] {
        for &(i, j) in list {
            edges.push(Edge {
                i: i - 1,
                j: j - 1,
                w: sign * rng.gen_range(lo..=hi),
            });
        }
    }
    SignedGraph::new(REFERENCE_NODES, edges)
}

/// Benchmark run: `c1 = 13`, `κ = 1000`, default excitation, `dt = 1e-3`,
/// 200 s horizon, `x0` uniform in `[−1, 1]`, zero estimator state.
///
/// `seed` drives both the edge magnitudes and the initial state.
pub fn reference_config(seed: u64) -> Result<SimConfig> {
    let plant = PlantSpec::new(reference_graph(seed)?, NodeDynamics::CubicSoft)?;
    let mut cfg = SimConfig::new(plant);
    cfg.gains = GainConfig {
        c1: 13.0,
        rule: GainRule::NormalizedWeights,
    };
    cfg.signal = SignalConfig::default();
    cfg.dt = 1e-3;
    cfg.horizon = 200.0;
    cfg.seed = seed;
    cfg.init = InitSpec::default();
    Ok(cfg)
}
