//! Tracks V1 along a small run and compares its measured slope with the
//! closed-form derivative.

use signet_id::analysis::{convergence_summary, lyapunov_series};
use signet_id::dynamics::{NodeDynamics, PlantSpec};
use signet_id::graph::{Edge, SignedGraph};
use signet_id::sim::{simulate, SimConfig};

fn main() -> signet_id::Result<()> {
    let g = SignedGraph::new(
        4,
        [
            Edge { i: 0, j: 1, w: 0.8 },
            Edge {
                i: 1,
                j: 2,
                w: -0.6,
            },
            Edge { i: 2, j: 3, w: 0.5 },
            Edge {
                i: 0,
                j: 3,
                w: -0.9,
            },
        ],
    )?;
    let mut cfg = SimConfig::new(PlantSpec::new(g, NodeDynamics::named("van_der_pol_like")?)?);
    cfg.gains.c1 = 5.0;
    cfg.horizon = 20.0;
    cfg.record_stride = 1;
    cfg.seed = 7;

    let traj = simulate(&cfg)?;
    let m = lyapunov_series(
        &traj,
        cfg.plant.weights(),
        &cfg.gains,
        cfg.plant.laplacian(),
    )?;
    println!("    t        V1     dV1/dt (pred)");
    for k in (0..m.len()).step_by(2000) {
        println!(
            "{:5.1}  {:.5e}  {:+.5e}",
            m.times[k], m.v1[k], m.v1_dot_predicted[k]
        );
    }
    let s = convergence_summary(&m, 0.1)?;
    println!("max identity residual {:.2e}", m.max_identity_residual());
    println!("{s:?}");
    Ok(())
}
