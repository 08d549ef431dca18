//! Signed Laplacian spectrum of the benchmark network and the two gain
//! thresholds it implies.

use signet_id::graph::{check_rayleigh_bound, laplacian_direct, spectral_report};
use signet_id::protocol::{required_gain, GainRule};
use signet_id::reference::reference_graph;

fn main() -> signet_id::Result<()> {
    let g = reference_graph(0)?;
    let report = spectral_report(&laplacian_direct(&g))?;
    println!("eigenvalues:");
    for (k, l) in report.eigenvalues.iter().enumerate() {
        println!("  {k:>2}  {l:>10.6}");
    }
    println!("residual |L 1| = {:.1e}", report.kernel_residual);

    let n = g.n_nodes();
    let known = required_gain(GainRule::KnownSpectrum, Some(report.lambda_min), n)?;
    let blind = required_gain(GainRule::NormalizedWeights, None, n)?;
    println!("c1 must exceed {known:.4} with the spectrum known, {blind} without");

    let (lambda_min, holds) = check_rayleigh_bound(&g)?;
    println!("lambda_min = {lambda_min:.4} >= -{n}: {holds}");
    Ok(())
}
