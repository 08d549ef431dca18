//! Undirected signed graphs and their repelling Laplacians.
//!
//! A [`SignedGraph`] is the ground-truth topology. The identification
//! machinery never looks at it directly; it works in the edge space of the
//! complete graph on the same node set, where every unordered pair owns one
//! slot (see [`EdgeIndexing`]) and absent edges carry weight zero.
//!
//! Node indices are zero-based throughout the library. Files and CSV headers
//! use one-based labels; conversion happens at the I/O boundary only.
//!
//! The repelling Laplacian has `ℓ_ii = Σ_k a_ik` (signed sum) and
//! `ℓ_ij = -a_ij`. It always annihilates the all-ones vector but becomes
//! indefinite once antagonistic (negative) edges dominate somewhere.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};

/// Slack applied to the `λ_min ≥ -N` comparison.
pub const RAYLEIGH_SLACK: f64 = 1e-9;

/// One undirected signed edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph with nonzero signed weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    n_nodes: usize,
    edges: Vec<Edge>,
}

impl SignedGraph {
    /// Validates and canonicalizes an edge list.
    ///
    /// Pairs given as `(j, i)` are swapped to `(i, j)`; edges are stored in
    /// lexicographic pair order.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Validation("graph needs at least one node".into()));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in edges {
            let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
            if i == j {
                return Err(Error::Validation(format!("self-loop at node {}", i + 1)));
            }
            if j >= n_nodes {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) references a node outside 1..={n_nodes}",
                    i + 1,
                    j + 1
                )));
            }
            if !e.w.is_finite() || e.w == 0.0 {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has weight {}; weights must be finite and nonzero",
                    i + 1,
                    j + 1,
                    e.w
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::Validation(format!(
                    "duplicate edge ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            out.push(Edge { i, j, w: e.w });
        }
        out.sort_by_key(|e| (e.i, e.j));
        Ok(Self {
            n_nodes,
            edges: out,
        })
    }

    pub fn empty(n_nodes: usize) -> Result<Self> {
        Self::new(n_nodes, [])
    }

    /// All pairs joined by an edge of weight `w`.
    pub fn complete(n_nodes: usize, w: f64) -> Result<Self> {
        let edges = (0..n_nodes)
            .flat_map(|i| ((i + 1)..n_nodes).map(move |j| Edge { i, j, w }))
            .collect::<Vec<_>>();
        Self::new(n_nodes, edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Every |w| ≤ 1.
    pub fn is_normalized(&self) -> bool {
        self.edges.iter().all(|e| e.w.abs() <= 1.0)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by_key(&(i, j), |e| (e.i, e.j))
            .map(|k| self.edges[k].w)
            .unwrap_or(0.0)
    }

    /// Symmetric adjacency matrix `A = [a_ij]`.
    pub fn adjacency(&self) -> Array2<f64> {
        let n = self.n_nodes;
        let mut a = Array2::zeros((n, n));
        for e in &self.edges {
            a[[e.i, e.j]] = e.w;
            a[[e.j, e.i]] = e.w;
        }
        a
    }

    /// Number of incident edges per node, ignoring sign.
    pub fn node_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_nodes];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    /// `diag(d_ii)` with `d_ii = Σ_j a_ij` (signed).
    ///
    /// Returned as N×N. This is the diagonal of [`laplacian_direct`] and is
    /// not otherwise used by the Laplacian construction.
    pub fn degree_matrix(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n_nodes, self.n_nodes));
        for e in &self.edges {
            d[[e.i, e.i]] += e.w;
            d[[e.j, e.j]] += e.w;
        }
        d
    }

    /// Connectivity via union-find over the edge list (spanning-tree test).
    pub fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n_nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.n_nodes;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }

    /// Copy with every weight replaced by `f(w)`.
    pub fn map_weights(&self, mut f: impl FnMut(&Edge) -> f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { w: f(e), ..*e })
            .collect::<Vec<_>>();
        Self::new(self.n_nodes, edges)
    }
}

/// Lexicographic bijection between unordered pairs `i < j` and the
/// `M̄ = N(N-1)/2` slots of the complete graph.
///
/// In one-based labels the slot is `k = (i-1)N - i(i+1)/2 + j`; the
/// zero-based form used here is that value minus one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIndexing {
    n_nodes: usize,
}

impl EdgeIndexing {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::arg(format!(
                "edge space needs at least 2 nodes, got {n_nodes}"
            )));
        }
        Ok(Self { n_nodes })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// `M̄`
    pub fn n_slots(&self) -> usize {
        self.n_nodes * (self.n_nodes - 1) / 2
    }

    pub fn slot(&self, i: usize, j: usize) -> Result<usize> {
        edge_index(i, j, self.n_nodes)
    }

    pub fn pair(&self, k: usize) -> Result<(usize, usize)> {
        edge_pair(k, self.n_nodes)
    }

    /// All pairs in slot order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_nodes;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }
}

/// Zero-based slot of the pair `(i, j)`, `i < j < n`.
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if !(i < j && j < n) {
        return Err(Error::arg(format!(
            "edge_index requires 0 <= i < j < n, got i={i}, j={j}, n={n}"
        )));
    }
    Ok(i * n - i * (i + 1) / 2 + (j - i - 1))
}

/// Inverse of [`edge_index`].
pub fn edge_pair(k: usize, n: usize) -> Result<(usize, usize)> {
    if n < 2 || k >= n * (n - 1) / 2 {
        return Err(Error::arg(format!("edge slot {k} out of range for n={n}")));
    }
    // row i holds n-1-i slots
    let mut i = 0;
    let mut start = 0;
    while start + (n - 1 - i) <= k {
        start += n - 1 - i;
        i += 1;
    }
    Ok((i, i + 1 + (k - start)))
}

/// Node-by-edge incidence matrix: each column has one `+1` and one `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    entries: Array2<f64>,
    // (row of +1, row of -1) per column
    ends: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    /// Incidence of the complete graph in slot order, `+1` at the lower
    /// node of each pair.
    pub fn complete(n: usize) -> Result<Self> {
        let idx = EdgeIndexing::new(n)?;
        let mut entries = Array2::zeros((n, idx.n_slots()));
        let mut ends = Vec::with_capacity(idx.n_slots());
        for (k, (i, j)) in idx.pairs().enumerate() {
            entries[[i, k]] = 1.0;
            entries[[j, k]] = -1.0;
            ends.push((i, j));
        }
        Ok(Self { entries, ends })
    }

    /// Accepts any matrix whose columns each hold exactly one `+1`, one `-1`
    /// and zeros elsewhere.
    pub fn from_dense(entries: Array2<f64>) -> Result<Self> {
        let mut ends = Vec::with_capacity(entries.ncols());
        for (k, col) in entries.columns().into_iter().enumerate() {
            let mut plus = None;
            let mut minus = None;
            for (r, &v) in col.iter().enumerate() {
                match v {
                    0.0 => {}
                    1.0 if plus.is_none() => plus = Some(r),
                    -1.0 if minus.is_none() => minus = Some(r),
                    _ => {
                        return Err(Error::arg(format!(
                            "incidence column {k} is malformed at row {r}"
                        )))
                    }
                }
            }
            match (plus, minus) {
                (Some(p), Some(m)) => ends.push((p, m)),
                _ => {
                    return Err(Error::arg(format!(
                        "incidence column {k} needs one +1 and one -1"
                    )))
                }
            }
        }
        Ok(Self { entries, ends })
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_edges(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Rows holding the `+1` and `-1` of column `k`.
    pub fn column_ends(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }

    /// Reverses the orientation of column `k`.
    pub fn flip_column(&mut self, k: usize) {
        let (p, m) = self.ends[k];
        self.entries[[p, k]] = -1.0;
        self.entries[[m, k]] = 1.0;
        self.ends[k] = (m, p);
    }

    /// `Eᵀ x`, i.e. per-edge differences `x_plus - x_minus`.
    pub fn edge_differences(&self, x: &Array1<f64>) -> Array1<f64> {
        self.ends.iter().map(|&(p, m)| x[p] - x[m]).collect()
    }

    /// `E v`
    pub fn node_sums(&self, v: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.n_nodes());
        for (k, &(p, m)) in self.ends.iter().enumerate() {
            out[p] += v[k];
            out[m] -= v[k];
        }
        out
    }
}

/// Weights of a graph laid out in the complete-graph edge space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Array1<f64>);

impl WeightVector {
    pub fn zeros(n_slots: usize) -> Self {
        Self(Array1::zeros(n_slots))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }
}

/// Places each edge weight at its slot; zero elsewhere.
pub fn embed_weights(g: &SignedGraph) -> Result<WeightVector> {
    let idx = EdgeIndexing::new(g.n_nodes())?;
    let mut w = WeightVector::zeros(idx.n_slots());
    for e in g.edges() {
        w.0[idx.slot(e.i, e.j)?] = e.w;
    }
    Ok(w)
}

/// `L = E diag(w) Eᵀ` as a dense product.
pub fn laplacian_from_weights(e: &IncidenceMatrix, w: &WeightVector) -> Result<Array2<f64>> {
    if e.n_edges() != w.len() {
        return Err(Error::arg(format!(
            "incidence has {} columns but weight vector has {} entries",
            e.n_edges(),
            w.len()
        )));
    }
    let scaled = e.matrix() * &w.0.view().insert_axis(ndarray::Axis(0));
    Ok(scaled.dot(&e.matrix().t()))
}

/// Laplacian built entrywise from the adjacency weights.
pub fn laplacian_direct(g: &SignedGraph) -> Array2<f64> {
    let a = g.adjacency();
    let n = g.n_nodes();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                l[[i, i]] = (0..n).map(|k| a[[i, k]]).sum();
            } else {
                l[[i, j]] = -a[[i, j]];
            }
        }
    }
    l
}

/// Spectrum of a symmetric matrix plus the `|L·1|` residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kernel_residual: f64,
}

pub fn spectral_report(l: &Array2<f64>) -> Result<SpectralReport> {
    let eigenvalues = symmetric_eigenvalues(l)?;
    let ones = Array1::<f64>::ones(l.nrows());
    let kernel_residual = l.dot(&ones).mapv(|v| v * v).sum().sqrt();
    Ok(SpectralReport {
        lambda_min: eigenvalues.first().copied().unwrap_or(0.0),
        lambda_max: eigenvalues.last().copied().unwrap_or(0.0),
        eigenvalues,
        kernel_residual,
    })
}

/// `λ_min(L)` for a normalized graph and whether `λ_min ≥ -N` holds.
pub fn check_rayleigh_bound(g: &SignedGraph) -> Result<(f64, bool)> {
    if !g.is_normalized() {
        return Err(Error::arg(
            "Rayleigh bound applies only to graphs with all |w| <= 1",
        ));
    }
    let report = spectral_report(&laplacian_direct(g))?;
    let bound = -(g.n_nodes() as f64) - RAYLEIGH_SLACK;
    Ok((report.lambda_min, report.lambda_min >= bound))
}

/// Upper magnitude used for edges of non-normalized generated graphs.
pub const UNNORMALIZED_MAX_MAGNITUDE: f64 = 3.0;
/// Lower magnitude for all generated edges.
pub const MIN_MAGNITUDE: f64 = 0.3;
/// Rejection-sampling budget of [`random_connected_graph`].
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Parameters of [`random_connected_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphGenParams {
    pub n_nodes: usize,
    pub density: f64,
    pub negative_fraction: f64,
    pub normalized: bool,
}

/// Erdős–Rényi style signed graph, resampled until connected.
///
/// Each pair is an edge with probability `density`; each edge is negative
/// with probability `negative_fraction`; magnitudes are uniform in
/// `[0.3, 1.0]` when normalized, `[0.3, 3.0]` otherwise.
pub fn random_connected_graph<R: Rng>(params: &GraphGenParams, rng: &mut R) -> Result<SignedGraph> {
    let GraphGenParams {
        n_nodes,
        density,
        negative_fraction,
        normalized,
    } = *params;
    if n_nodes < 2 {
        return Err(Error::arg("graph generation needs n >= 2"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::arg(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    if !(0.0..=1.0).contains(&negative_fraction) {
        return Err(Error::arg(format!(
            "negative_fraction must be in [0, 1], got {negative_fraction}"
        )));
    }
    let max_mag = if normalized {
        1.0
    } else {
        UNNORMALIZED_MAX_MAGNITUDE
    };
    let idx = EdgeIndexing::new(n_nodes)?;
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut edges = Vec::new();
        for (i, j) in idx.pairs() {
            if rng.gen::<f64>() < density {
                let mag = rng.gen_range(MIN_MAGNITUDE..=max_mag);
                let sign = if rng.gen::<f64>() < negative_fraction {
                    -1.0
                } else {
                    1.0
                };
                edges.push(Edge {
                    i,
                    j,
                    w: sign * mag,
                });
            }
        }
        let g = SignedGraph::new(n_nodes, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Generation(format!(
        "no connected graph with n={n_nodes}, density={density} after {MAX_GENERATION_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize, j: usize, w: f64) -> Edge {
        Edge { i, j, w }
    }

    // one-based closed form, evaluated independently of edge_index
    fn one_based_slot(i: usize, j: usize, n: usize) -> usize {
        (i - 1) * n + j - i * (i + 1) / 2
    }

    #[test]
    fn edge_index_examples() {
        assert_eq!(one_based_slot(1, 2, 12), 1);
        assert_eq!(one_based_slot(11, 12, 12), 66);
        assert_eq!(edge_index(0, 1, 12).unwrap(), 0);
        assert_eq!(edge_index(10, 11, 12).unwrap() + 1, 66);
        assert_eq!(edge_index(0, 1, 2).unwrap(), 0);
    }

    #[test]
    fn edge_index_rejects_bad_pairs() {
        assert!(edge_index(1, 1, 4).is_err());
        assert!(edge_index(2, 1, 4).is_err());
        assert!(edge_index(0, 4, 4).is_err());
        assert!(edge_pair(6, 4).is_err());
    }

    #[test]
    fn edge_index_matches_enumeration() {
        for n in 2..15 {
            let mut k = 0;
            for i in 1..=n {
                for j in (i + 1)..=n {
                    k += 1;
                    assert_eq!(one_based_slot(i, j, n), k);
                    assert_eq!(edge_index(i - 1, j - 1, n).unwrap() + 1, k);
                    assert_eq!(edge_pair(k - 1, n).unwrap(), (i - 1, j - 1));
                }
            }
        }
    }

    #[test]
    fn complete_incidence_small() {
        let e2 = IncidenceMatrix::complete(2).unwrap();
        assert_eq!(e2.matrix(), &array![[1.0], [-1.0]]);
        let e3 = IncidenceMatrix::complete(3).unwrap();
        assert_eq!(
            e3.matrix(),
            &array![[1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, -1.0]]
        );
        assert!(IncidenceMatrix::complete(1).is_err());
        for n in 2..8 {
            let e = IncidenceMatrix::complete(n).unwrap();
            let col_sums = e.matrix().sum_axis(ndarray::Axis(0));
            assert!(col_sums.iter().all(|&s| s == 0.0));
        }
    }

    #[test]
    fn from_dense_validates_columns() {
        assert!(IncidenceMatrix::from_dense(array![[1.0], [1.0]]).is_err());
        assert!(IncidenceMatrix::from_dense(array![[1.0], [-1.0], [0.5]]).is_err());
        let m = IncidenceMatrix::from_dense(array![[-1.0], [1.0]]).unwrap();
        assert_eq!(m.column_ends(0), (1, 0));
    }

    #[test]
    fn embed_examples() {
        let g = SignedGraph::new(3, [e(0, 1, 0.8)]).unwrap();
        assert_eq!(embed_weights(&g).unwrap().0, array![0.8, 0.0, 0.0]);
        let g = SignedGraph::new(3, [e(0, 2, -0.5), e(1, 2, 0.6)]).unwrap();
        assert_eq!(embed_weights(&g).unwrap().0, array![0.0, -0.5, 0.6]);
        let g = SignedGraph::empty(3).unwrap();
        assert_eq!(embed_weights(&g).unwrap().0, array![0.0, 0.0, 0.0]);
    }

    #[test]
    fn graph_validation() {
        assert!(SignedGraph::new(3, [e(1, 1, 1.0)]).is_err());
        assert!(SignedGraph::new(3, [e(0, 3, 1.0)]).is_err());
        assert!(SignedGraph::new(3, [e(0, 1, 0.0)]).is_err());
        assert!(SignedGraph::new(3, [e(0, 1, f64::NAN)]).is_err());
        assert!(SignedGraph::new(3, [e(0, 1, 1.0), e(1, 0, 2.0)]).is_err());
        let g = SignedGraph::new(3, [e(2, 0, 1.0)]).unwrap();
        assert_eq!(g.edges()[0], e(0, 2, 1.0));
        assert_eq!(g.weight(2, 0), 1.0);
        assert_eq!(g.weight(0, 1), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let e2 = IncidenceMatrix::complete(2).unwrap();
        let l = laplacian_from_weights(&e2, &WeightVector(array![-1.0])).unwrap();
        assert_eq!(l, array![[-1.0, 1.0], [1.0, -1.0]]);

        let e3 = IncidenceMatrix::complete(3).unwrap();
        let l = laplacian_from_weights(&e3, &WeightVector(array![-1.0, -1.0, -1.0])).unwrap();
        let direct = laplacian_direct(&SignedGraph::complete(3, -1.0).unwrap());
        assert_eq!(l, direct);
        assert_eq!(
            l,
            array![[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]]
        );

        let g = SignedGraph::new(2, [e(0, 1, 1.0)]).unwrap();
        assert_eq!(laplacian_direct(&g), array![[1.0, -1.0], [-1.0, 1.0]]);
        let g = SignedGraph::new(2, [e(0, 1, -1.0)]).unwrap();
        assert_eq!(laplacian_direct(&g), array![[-1.0, 1.0], [1.0, -1.0]]);

        assert!(laplacian_from_weights(&e3, &WeightVector::zeros(2)).is_err());
    }

    #[test]
    fn degree_matrix_is_laplacian_diagonal() {
        let g = SignedGraph::new(3, [e(0, 1, 0.5), e(1, 2, -0.25)]).unwrap();
        let d = g.degree_matrix();
        let l = laplacian_direct(&g);
        for i in 0..3 {
            assert_eq!(d[[i, i]], l[[i, i]]);
        }
        assert_eq!(g.node_degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn spectral_examples() {
        let r = spectral_report(&Array2::zeros((4, 4))).unwrap();
        assert!(r.eigenvalues.iter().all(|&v| v == 0.0));

        let g = SignedGraph::complete(2, -1.0).unwrap();
        let r = spectral_report(&laplacian_direct(&g)).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvalues[1], 0.0, epsilon = 1e-12);

        // circulant: eigenvalues of -(J - I) - (n-1)I... direct values {-3,-3,0}
        let g = SignedGraph::complete(3, -1.0).unwrap();
        let r = spectral_report(&laplacian_direct(&g)).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0], -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvalues[1], -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvalues[2], 0.0, epsilon = 1e-12);
        assert_eq!(r.lambda_min, r.eigenvalues[0]);
        assert_eq!(r.lambda_max, r.eigenvalues[2]);

        assert!(spectral_report(&array![[0.0, 1.0], [0.5, 0.0]]).is_err());
    }

    #[test]
    fn rayleigh_examples() {
        // path graph, unsigned
        let g = SignedGraph::new(4, [e(0, 1, 1.0), e(1, 2, 0.5), e(2, 3, 0.7)]).unwrap();
        let (lmin, holds) = check_rayleigh_bound(&g).unwrap();
        assert_abs_diff_eq!(lmin, 0.0, epsilon = 1e-12);
        assert!(holds);

        let (lmin, holds) = check_rayleigh_bound(&SignedGraph::complete(2, -1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(lmin, -2.0, epsilon = 1e-12);
        assert!(holds);

        let big = SignedGraph::new(2, [e(0, 1, -1.5)]).unwrap();
        assert!(check_rayleigh_bound(&big).is_err());
    }

    #[test]
    fn generator_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = GraphGenParams {
            n_nodes: 2,
            density: 1.0,
            negative_fraction: 0.5,
            normalized: true,
        };
        let g = random_connected_graph(&p, &mut rng).unwrap();
        assert_eq!(g.edges().len(), 1);

        let p = GraphGenParams {
            n_nodes: 8,
            density: 0.5,
            negative_fraction: 0.0,
            normalized: true,
        };
        let g = random_connected_graph(&p, &mut rng).unwrap();
        assert!(g.edges().iter().all(|e| e.w > 0.0));
        let r = spectral_report(&laplacian_direct(&g)).unwrap();
        assert_abs_diff_eq!(r.lambda_min, 0.0, epsilon = 1e-10);

        let sparse = GraphGenParams {
            n_nodes: 30,
            density: 0.001,
            negative_fraction: 0.0,
            normalized: true,
        };
        assert!(matches!(
            random_connected_graph(&sparse, &mut rng),
            Err(Error::Generation(_))
        ));
        let bad = GraphGenParams { density: 0.0, ..p };
        assert!(random_connected_graph(&bad, &mut rng).is_err());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = SignedGraph> {
        (2..=max_n)
            .prop_flat_map(|n| {
                let m = n * (n - 1) / 2;
                (
                    Just(n),
                    proptest::collection::vec(proptest::option::of(-1.0f64..1.0), m),
                )
            })
            .prop_map(|(n, slots)| {
                let idx = EdgeIndexing::new(n).unwrap();
                let edges = idx
                    .pairs()
                    .zip(slots)
                    .filter_map(|((i, j), w)| w.filter(|w| *w != 0.0).map(|w| Edge { i, j, w }))
                    .collect::<Vec<_>>();
                SignedGraph::new(n, edges).unwrap()
            })
    }

    proptest! {
        #[test]
        fn edge_space_route_matches_direct(g in arb_graph(8)) {
            let inc = IncidenceMatrix::complete(g.n_nodes()).unwrap();
            let l = laplacian_from_weights(&inc, &embed_weights(&g).unwrap()).unwrap();
            let d = laplacian_direct(&g);
            for (a, b) in l.iter().zip(d.iter()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert_eq!(&l, &l.t().to_owned());
            let ones = Array1::<f64>::ones(g.n_nodes());
            prop_assert!(l.dot(&ones).iter().all(|v| v.abs() <= 1e-12));
        }

        #[test]
        fn orientation_is_immaterial(g in arb_graph(7), flips in proptest::collection::vec(any::<bool>(), 21)) {
            let mut inc = IncidenceMatrix::complete(g.n_nodes()).unwrap();
            let w = embed_weights(&g).unwrap();
            let before = laplacian_from_weights(&inc, &w).unwrap();
            for (k, f) in flips.iter().enumerate().take(inc.n_edges()) {
                if *f { inc.flip_column(k); }
            }
            prop_assert_eq!(before, laplacian_from_weights(&inc, &w).unwrap());
        }

        #[test]
        fn sparse_products_match_dense(n in 2usize..7, x in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let inc = IncidenceMatrix::complete(n).unwrap();
            let x = Array1::from(x[..n].to_vec());
            let z = inc.edge_differences(&x);
            let dz = inc.matrix().t().dot(&x);
            prop_assert!(z.iter().zip(dz.iter()).all(|(a, b)| (a - b).abs() <= 1e-14));
            let s = inc.node_sums(&z);
            let ds = inc.matrix().dot(&z);
            prop_assert!(s.iter().zip(ds.iter()).all(|(a, b)| (a - b).abs() <= 1e-12));
        }
    }
}
