//! Runs the twelve-node benchmark and prints convergence, recovery and
//! excitation figures.
//!
//!     cargo run --release --example reproduce_network -- [seed]

use std::time::Instant;

use signet_id::analysis::{convergence_summary, lyapunov_series, recover_topology};
use signet_id::excitation::{delta_pe_check, EdgeExcitation, GramForm};
use signet_id::reference::reference_config;
use signet_id::sim::simulate;

fn main() -> signet_id::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let mut cfg = reference_config(seed)?;
    cfg.record_stride = 1;

    let start = Instant::now();
    let traj = simulate(&cfg)?;
    println!(
        "simulated {} s in {:.1} s",
        cfg.horizon,
        start.elapsed().as_secs_f64()
    );

    let plant = &cfg.plant;
    let metrics = lyapunov_series(&traj, plant.weights(), &cfg.gains, plant.laplacian())?;
    let summary = convergence_summary(&metrics, 0.1)?;
    println!("tail max |w_hat - w|   {:.4e}", summary.final_est_err);
    println!("tail max sync spread   {:.4e}", summary.final_sync_err);
    println!("V1 increases           {}", summary.v1_monotone_violations);
    println!(
        "identity residual      {:.3e}",
        metrics.max_identity_residual()
    );

    let topo = recover_topology(&traj.final_w_hat().to_owned(), 0.1, plant.weights())?;
    println!(
        "recovery @0.1: precision {:.3} recall {:.3} sign {:.3}",
        topo.precision, topo.recall, topo.sign_accuracy
    );

    let x1 = {
        let mut x1 = traj.x.clone();
        x1 -= &traj.x_hat;
        x1
    };
    let excitation = EdgeExcitation {
        t0: 0.0,
        dt: traj.sample_dt(),
        z_hat: traj.z_hat(plant.incidence()),
        incidence: plant.incidence(),
        form: GramForm::Outer,
    };
    let pe = delta_pe_check(&excitation, &x1, 0.1, 2.0, 0.5)?;
    println!(
        "delta-PE (0.1, 2 s): {} of {} windows qualify, mu {:.3e}, max |x_tilde| {:.3}",
        pe.qualified_count, pe.total_windows, pe.mu_estimate, pe.radius
    );
    Ok(())
}
