//! Complete-graph edge indexing, the incidence matrix and the two routes to
//! the Laplacian.

use signet_id::graph::{
    edge_index, edge_pair, embed_weights, laplacian_direct, laplacian_from_weights, Edge,
    IncidenceMatrix, SignedGraph,
};

fn main() -> signet_id::Result<()> {
    let n = 4;
    println!("slot  pair (one-based)");
    for k in 0..n * (n - 1) / 2 {
        let (i, j) = edge_pair(k, n)?;
        assert_eq!(edge_index(i, j, n)?, k);
        println!("{k:>4}  ({}, {})", i + 1, j + 1);
    }

    let g = SignedGraph::new(
        n,
        [
            Edge { i: 0, j: 1, w: 0.9 },
            Edge {
                i: 1,
                j: 2,
                w: -0.4,
            },
            Edge { i: 2, j: 3, w: 0.7 },
            Edge {
                i: 0,
                j: 3,
                w: -1.0,
            },
        ],
    )?;
    let e = IncidenceMatrix::complete(n)?;
    let w = embed_weights(&g)?;
    println!("\nincidence:\n{}", e.matrix());
    println!("embedded weights: {}", w.0);

    let via_edges = laplacian_from_weights(&e, &w)?;
    let direct = laplacian_direct(&g);
    let gap = (&via_edges - &direct)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    println!("\nL =\n{direct:.3}\nmax gap between routes: {gap:.1e}");
    Ok(())
}
