//! Seeded random connected signed graphs and their smallest Laplacian
//! eigenvalue against the `-N` floor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signet_id::config::GraphFile;
use signet_id::graph::{laplacian_direct, random_connected_graph, spectral_report, GraphGenParams};

fn main() -> signet_id::Result<()> {
    println!(" n  edges  negative  lambda_min");
    for (seed, n) in (0..8u64).zip([3, 4, 5, 6, 8, 10, 12, 16]) {
        let params = GraphGenParams {
            n_nodes: n,
            density: 0.4,
            negative_fraction: 0.5,
            normalized: true,
        };
        let g = random_connected_graph(&params, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let negative = g.edges().iter().filter(|e| e.w < 0.0).count();
        let lmin = spectral_report(&laplacian_direct(&g))?.lambda_min;
        println!(
            "{n:>2}  {:>5}  {negative:>8}  {lmin:>10.4}",
            g.edges().len()
        );
    }

    let params = GraphGenParams {
        n_nodes: 4,
        density: 0.6,
        negative_fraction: 0.5,
        normalized: true,
    };
    let g = random_connected_graph(&params, &mut ChaCha8Rng::seed_from_u64(1))?;
    println!("\ngraph file:\n{}", GraphFile::from_graph(&g).to_toml());
    Ok(())
}
