//! Two antagonistic nodes repel each other. Below the gain threshold the
//! estimator error grows; above it, it decays.

use signet_id::dynamics::{NodeDynamics, PlantSpec};
use signet_id::graph::SignedGraph;
use signet_id::protocol::{GainConfig, GainRule, SignalConfig};
use signet_id::sim::{simulate, SimConfig};

fn main() -> signet_id::Result<()> {
    let g = SignedGraph::complete(2, -1.0)?;
    for c1 in [1.0, 2.0, 3.0] {
        let mut cfg = SimConfig::new(PlantSpec::new(g.clone(), NodeDynamics::CubicSoft)?);
        cfg.gains = GainConfig {
            c1,
            rule: GainRule::KnownSpectrum,
        };
        cfg.signal = SignalConfig {
            pe_terms: Vec::new(),
            ..Default::default()
        };
        cfg.horizon = 5.0;
        cfg.init.x0 = Some(vec![0.05, -0.03]);
        let check = cfg.gain_check()?;
        let traj = simulate(&cfg)?;
        let norm = |k: usize| traj.x_tilde(k).mapv(|v| v * v).sum().sqrt();
        println!(
            "c1 = {c1}: required > {:.4}, satisfied {:5}, |x_tilde(5)| / |x_tilde(0)| = {:.3e}",
            check.required,
            check.satisfied,
            norm(traj.len() - 1) / norm(0)
        );
    }
    Ok(())
}
