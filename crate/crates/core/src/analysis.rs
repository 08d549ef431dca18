//! Post-processing of recorded runs: Lyapunov monitoring, convergence
//! summaries and sign/topology recovery from the final weight estimate.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeIndexing, WeightVector};
use crate::protocol::GainConfig;
use crate::sim::Trajectory;

/// Per-step increase of `V1` tolerated before a step counts as a violation.
pub const MONOTONE_TOLERANCE: f64 = 1e-6;

/// Time series derived from a trajectory and the true weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSeries {
    pub times: Vec<f64>,
    /// `½|x̃|² + ½|w̃|²` with `w̃ = ŵ − w`.
    pub v1: Vec<f64>,
    /// Forward differences of `v1`, one per interval (length `len − 1`).
    pub v1_dot_measured: Vec<f64>,
    /// `−x̃ᵀ(c1 I + L)x̃` at each sample.
    pub v1_dot_predicted: Vec<f64>,
    pub est_err_norm: Vec<f64>,
    /// `max_k |w̃_k|`.
    pub est_err_max: Vec<f64>,
    /// `max_i x_i − min_i x_i`.
    pub sync_err: Vec<f64>,
    /// `|x̂|`.
    pub aux_norm: Vec<f64>,
}

impl MetricsSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Per-interval relative mismatch between the measured slope of `V1` and
    /// the trapezoidal mean of the predicted derivative at the interval ends.
    pub fn identity_residuals(&self) -> Vec<f64> {
        self.v1_dot_measured
            .iter()
            .enumerate()
            .map(|(k, &meas)| {
                let pred = 0.5 * (self.v1_dot_predicted[k] + self.v1_dot_predicted[k + 1]);
                (meas - pred).abs() / (1.0 + pred.abs())
            })
            .collect()
    }

    /// Largest entry of [`identity_residuals`](Self::identity_residuals).
    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals().into_iter().fold(0.0, f64::max)
    }

    /// Number of steps from index `from` on where `V1` rises by more than `tol`.
    pub fn monotone_violations(&self, from: usize, tol: f64) -> usize {
        self.v1
            .windows(2)
            .skip(from)
            .filter(|w| w[1] - w[0] > tol)
            .count()
    }

    /// Rows `t, v1, v1_dot_predicted, est_err_norm, est_err_max, sync_err, aux_norm`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"t,v1,v1_dot_predicted,est_err_norm,est_err_max,sync_err,aux_norm\n")?;
        let mut line = String::new();
        for k in 0..self.len() {
            line.clear();
            for (c, v) in [
                self.times[k],
                self.v1[k],
                self.v1_dot_predicted[k],
                self.est_err_norm[k],
                self.est_err_max[k],
                self.sync_err[k],
                self.aux_norm[k],
            ]
            .into_iter()
            .enumerate()
            {
                if c > 0 {
                    line.push(',');
                }
                crate::sim::push_num(&mut line, v);
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Computes [`MetricsSeries`] for a recorded run against the true weights.
pub fn lyapunov_series(
    traj: &Trajectory,
    truth: &WeightVector,
    gains: &GainConfig,
    laplacian: &Array2<f64>,
) -> Result<MetricsSeries> {
    let n = traj.n_nodes();
    if traj.n_slots() != truth.len() {
        return Err(Error::arg(format!(
            "trajectory has {} weight slots, truth has {}",
            traj.n_slots(),
            truth.len()
        )));
    }
    if laplacian.dim() != (n, n) {
        return Err(Error::arg(format!(
            "laplacian is {:?}, expected {n}x{n}",
            laplacian.dim()
        )));
    }
    if traj.len() < 2 {
        return Err(Error::arg("trajectory needs at least two samples"));
    }
    let h = traj.sample_dt();
    for (k, w) in traj.times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h) {
            return Err(Error::arg(format!("non-uniform sampling at sample {k}")));
        }
    }

    let m = traj.len();
    let mut s = MetricsSeries {
        times: traj.times.clone(),
        v1: Vec::with_capacity(m),
        v1_dot_measured: Vec::with_capacity(m - 1),
        v1_dot_predicted: Vec::with_capacity(m),
        est_err_norm: Vec::with_capacity(m),
        est_err_max: Vec::with_capacity(m),
        sync_err: Vec::with_capacity(m),
        aux_norm: Vec::with_capacity(m),
    };
    for k in 0..m {
        let xt = traj.x_tilde(k);
        let wt = &traj.w_hat.row(k) - &truth.0;
        let ew = norm(&wt);
        let ex = norm(&xt);
        s.v1.push(0.5 * ex * ex + 0.5 * ew * ew);
        s.v1_dot_predicted
            .push(-(gains.c1 * xt.dot(&xt) + xt.dot(&laplacian.dot(&xt))));
        s.est_err_norm.push(ew);
        s.est_err_max
            .push(wt.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
        let row = traj.x.row(k);
        let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
        s.sync_err.push(hi - lo);
        s.aux_norm
            .push(traj.x_hat.row(k).dot(&traj.x_hat.row(k)).sqrt());
    }
    for k in 0..m - 1 {
        s.v1_dot_measured
            .push((s.v1[k + 1] - s.v1[k]) / (traj.times[k + 1] - traj.times[k]));
    }
    Ok(s)
}

/// Headline numbers over the tail of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    /// Largest `max_k |w̃_k|` over the tail.
    pub final_est_err: f64,
    /// Largest synchronization spread over the tail.
    pub final_sync_err: f64,
    /// Steps over the whole run where `V1` rose by more than [`MONOTONE_TOLERANCE`].
    pub v1_monotone_violations: usize,
}

/// Summarizes the last `tail_fraction` of the run.
pub fn convergence_summary(m: &MetricsSeries, tail_fraction: f64) -> Result<ConvergenceSummary> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::arg(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    if m.is_empty() {
        return Err(Error::arg("empty metrics series"));
    }
    let start = ((m.len() as f64) * (1.0 - tail_fraction)).floor() as usize;
    let start = start.min(m.len() - 1);
    let tail_max = |v: &[f64]| v[start..].iter().cloned().fold(0.0, f64::max);
    Ok(ConvergenceSummary {
        final_est_err: tail_max(&m.est_err_max),
        final_sync_err: tail_max(&m.sync_err),
        v1_monotone_violations: m.monotone_violations(0, MONOTONE_TOLERANCE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveredEdge {
    /// One-based node labels, `i < j`.
    pub i: usize,
    pub j: usize,
    pub sign: i8,
    pub weight: f64,
}

/// Edges predicted by thresholding `|ŵ|`, scored against the truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveredTopology {
    pub threshold: f64,
    pub edges: Vec<RecoveredEdge>,
    /// Fraction of predicted edges that are true edges (1 when nothing is predicted).
    pub precision: f64,
    /// Fraction of true edges that are predicted (1 when the truth is empty).
    pub recall: f64,
    /// Fraction of correctly predicted edges whose sign matches (1 when there are none).
    pub sign_accuracy: f64,
}

/// Predicts the edge set `{k : |ŵ_k| > threshold}` and its signs.
pub fn recover_topology(
    w_hat: &Array1<f64>,
    threshold: f64,
    truth: &WeightVector,
) -> Result<RecoveredTopology> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::arg(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    if w_hat.len() != truth.len() {
        return Err(Error::arg(format!(
            "estimate has {} slots, truth has {}",
            w_hat.len(),
            truth.len()
        )));
    }
    let n = nodes_for_slots(w_hat.len())?;
    let idx = EdgeIndexing::new(n)?;
    let mut edges = Vec::new();
    let (mut hits, mut sign_hits) = (0usize, 0usize);
    for (k, (i, j)) in idx.pairs().enumerate() {
        let w = w_hat[k];
        if w.abs() > threshold {
            edges.push(RecoveredEdge {
                i: i + 1,
                j: j + 1,
                sign: if w > 0.0 { 1 } else { -1 },
                weight: w,
            });
            let t = truth.0[k];
            if t != 0.0 {
                hits += 1;
                if t.signum() == w.signum() {
                    sign_hits += 1;
                }
            }
        }
    }
    let true_edges = truth.0.iter().filter(|&&v| v != 0.0).count();
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    Ok(RecoveredTopology {
        threshold,
        precision: ratio(hits, edges.len()),
        recall: ratio(hits, true_edges),
        sign_accuracy: ratio(sign_hits, hits),
        edges,
    })
}

/// Inverts `M = N(N−1)/2`.
pub fn nodes_for_slots(m: usize) -> Result<usize> {
    let n = ((1.0 + (1.0 + 8.0 * m as f64).sqrt()) / 2.0).round() as usize;
    if n < 2 || n * (n - 1) / 2 != m {
        return Err(Error::arg(format!(
            "{m} is not a complete-graph edge count"
        )));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{embed_weights, laplacian_direct, Edge, SignedGraph};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn path3() -> SignedGraph {
        SignedGraph::new(
            3,
            [
                Edge { i: 0, j: 1, w: 0.5 },
                Edge {
                    i: 1,
                    j: 2,
                    w: -0.8,
                },
            ],
        )
        .unwrap()
    }

    fn constant_traj(x: Array1<f64>, xh: Array1<f64>, w: Array1<f64>, len: usize) -> Trajectory {
        let n = x.len();
        let m = w.len();
        let mut tx = Array2::zeros((len, n));
        let mut th = Array2::zeros((len, n));
        let mut tw = Array2::zeros((len, m));
        for k in 0..len {
            tx.row_mut(k).assign(&x);
            th.row_mut(k).assign(&xh);
            tw.row_mut(k).assign(&w);
        }
        Trajectory {
            times: (0..len).map(|k| k as f64 * 0.1).collect(),
            x: tx,
            x_hat: th,
            w_hat: tw,
            u: None,
        }
    }

    #[test]
    fn lyapunov_values_at_rest() {
        let g = path3();
        let truth = embed_weights(&g).unwrap();
        let l = laplacian_direct(&g);
        let x = array![0.3, -0.1, 0.2];
        let traj = constant_traj(x.clone(), Array1::zeros(3), Array1::zeros(3), 4);
        let gains = GainConfig {
            c1: 4.0,
            ..Default::default()
        };
        let m = lyapunov_series(&traj, &truth, &gains, &l).unwrap();
        let v1 = 0.5 * x.dot(&x) + 0.5 * (0.25 + 0.64);
        assert_abs_diff_eq!(m.v1[0], v1, epsilon = 1e-15);
        let pred = -(4.0 * x.dot(&x) + x.dot(&l.dot(&x)));
        assert_abs_diff_eq!(m.v1_dot_predicted[2], pred, epsilon = 1e-15);
        assert_eq!(m.v1_dot_measured, vec![0.0; 3]);
        assert_abs_diff_eq!(m.sync_err[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(m.est_err_max[0], 0.8, epsilon = 1e-15);
        assert_eq!(m.monotone_violations(0, MONOTONE_TOLERANCE), 0);
    }

    #[test]
    fn lyapunov_rejects_mismatched_inputs() {
        let g = path3();
        let truth = embed_weights(&g).unwrap();
        let traj = constant_traj(Array1::zeros(3), Array1::zeros(3), Array1::zeros(3), 3);
        let gains = GainConfig::default();
        assert!(lyapunov_series(&traj, &truth, &gains, &Array2::zeros((2, 2))).is_err());
        let short = WeightVector(Array1::zeros(1));
        assert!(lyapunov_series(&traj, &short, &gains, &laplacian_direct(&g)).is_err());
    }

    #[test]
    fn summary_uses_tail() {
        let m = MetricsSeries {
            times: vec![0.0, 1.0, 2.0, 3.0],
            v1: vec![4.0, 3.0, 3.5, 1.0],
            v1_dot_measured: vec![-1.0, 0.5, -2.5],
            v1_dot_predicted: vec![0.0; 4],
            est_err_norm: vec![0.0; 4],
            est_err_max: vec![5.0, 2.0, 0.3, 0.1],
            sync_err: vec![1.0, 1.0, 0.2, 0.4],
            aux_norm: vec![0.0; 4],
        };
        let s = convergence_summary(&m, 0.5).unwrap();
        assert_eq!(s.final_est_err, 0.3);
        assert_eq!(s.final_sync_err, 0.4);
        assert_eq!(s.v1_monotone_violations, 1);
        assert!(convergence_summary(&m, 0.0).is_err());
    }

    #[test]
    fn topology_examples() {
        let truth = embed_weights(&path3()).unwrap();
        // slots: (1,2), (1,3), (2,3)
        let r = recover_topology(&array![0.45, 0.01, -0.7], 0.05, &truth).unwrap();
        assert_eq!((r.precision, r.recall, r.sign_accuracy), (1.0, 1.0, 1.0));
        assert_eq!(
            r.edges[1],
            RecoveredEdge {
                i: 2,
                j: 3,
                sign: -1,
                weight: -0.7
            }
        );

        let r = recover_topology(&array![-0.45, 0.2, 0.01], 0.05, &truth).unwrap();
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.5);
        assert_eq!(r.sign_accuracy, 0.0);

        let r = recover_topology(&array![0.0, 0.0, 0.0], 0.05, &truth).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, 0.0));

        let empty = WeightVector(Array1::zeros(3));
        let r = recover_topology(&array![0.0, 0.0, 0.0], 0.05, &empty).unwrap();
        assert_eq!((r.precision, r.recall, r.sign_accuracy), (1.0, 1.0, 1.0));

        assert!(recover_topology(&array![0.0, 0.0, 0.0], 0.0, &truth).is_err());
        assert!(recover_topology(&array![0.0, 0.0], 0.1, &truth).is_err());
    }

    #[test]
    fn slot_count_inversion() {
        assert_eq!(nodes_for_slots(1).unwrap(), 2);
        assert_eq!(nodes_for_slots(66).unwrap(), 12);
        assert!(nodes_for_slots(5).is_err());
        assert!(nodes_for_slots(0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn recall_never_rises_with_threshold(
                truth in proptest::collection::vec(prop_oneof![Just(0.0), -1.0f64..-0.3, 0.3f64..1.0], 10),
                est in proptest::collection::vec(-1.2f64..1.2, 10),
                t1 in 0.01f64..1.0,
                dt in 0.0f64..1.0,
            ) {
                let truth = WeightVector(Array1::from(truth));
                let est = Array1::from(est);
                let a = recover_topology(&est, t1, &truth).unwrap();
                let b = recover_topology(&est, t1 + dt, &truth).unwrap();
                prop_assert!(b.recall <= a.recall);
                prop_assert!(b.edges.len() <= a.edges.len());
            }

            #[test]
            fn precision_monotone_when_magnitudes_separate(
                truth in proptest::collection::vec(prop_oneof![Just(0.0), -1.0f64..-0.3, 0.3f64..1.0], 10),
                noise in proptest::collection::vec(-0.1f64..0.1, 10),
                t1 in 0.01f64..0.5,
                dt in 0.0f64..0.5,
            ) {
                // every true edge outweighs every spurious one
                let est: Array1<f64> = truth.iter().zip(&noise).map(|(t, e)| t + e).collect();
                let truth = WeightVector(Array1::from(truth));
                let a = recover_topology(&est, t1, &truth).unwrap();
                let b = recover_topology(&est, t1 + dt, &truth).unwrap();
                prop_assert!(b.precision >= a.precision);
            }
        }
    }
}
