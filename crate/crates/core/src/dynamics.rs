//! Plant model `ẋ = F(x) - L x + u` and the closed-loop error system.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{embed_weights, laplacian_direct, IncidenceMatrix, SignedGraph, WeightVector};
use crate::protocol::{phi_theta, SignalConfig};
use crate::sim::{self, rk4_step, SimConfig, DIVERGENCE_LIMIT};

pub type NodeMap = fn(f64) -> f64;

/// Named smooth maps available to [`NodeDynamics::Named`].
pub const NAMED_MAPS: &[(&str, NodeMap)] = &[
    ("sin", f64::sin),
    ("tanh", f64::tanh),
    ("logistic", |x| 1.0 / (1.0 + (-x).exp())),
    ("damped_cubic", |x| -x - x * x * x),
    ("van_der_pol_like", |x| x - x * x * x / 3.0),
];

/// Intrinsic scalar dynamics `f_i`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeDynamics {
    Zero,
    Linear {
        a: f64,
    },
    /// `x - x³`
    #[default]
    CubicSoft,
    Named {
        name: String,
    },
}

impl NodeDynamics {
    pub fn named(name: &str) -> Result<Self> {
        if NAMED_MAPS.iter().any(|(n, _)| *n == name) {
            Ok(NodeDynamics::Named {
                name: name.to_string(),
            })
        } else {
            Err(Error::Validation(format!(
                "unknown node map '{name}'; known: {}",
                NAMED_MAPS
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NodeDynamics::Zero => 0.0,
            NodeDynamics::Linear { a } => a * x,
            NodeDynamics::CubicSoft => x - x * x * x,
            NodeDynamics::Named { name } => NAMED_MAPS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, f)| f(x))
                .unwrap_or(f64::NAN),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NodeDynamics::Named { name } => Self::named(name).map(|_| ()),
            NodeDynamics::Linear { a } if !a.is_finite() => {
                Err(Error::Validation("linear node gain must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The true network: topology, node maps, and the complete-graph edge space.
#[derive(Debug, Clone)]
pub struct PlantSpec {
    graph: SignedGraph,
    dynamics: Vec<NodeDynamics>,
    incidence: IncidenceMatrix,
    weights: WeightVector,
    laplacian: Array2<f64>,
}

impl PlantSpec {
    /// Every node shares `dynamics`.
    pub fn new(graph: SignedGraph, dynamics: NodeDynamics) -> Result<Self> {
        let n = graph.n_nodes();
        Self::with_node_dynamics(graph, vec![dynamics; n])
    }

    pub fn with_node_dynamics(graph: SignedGraph, dynamics: Vec<NodeDynamics>) -> Result<Self> {
        if dynamics.len() != graph.n_nodes() {
            return Err(Error::Validation(format!(
                "{} node maps for {} nodes",
                dynamics.len(),
                graph.n_nodes()
            )));
        }
        for d in &dynamics {
            d.validate()?;
        }
        let incidence = IncidenceMatrix::complete(graph.n_nodes())?;
        let weights = embed_weights(&graph)?;
        let laplacian = laplacian_direct(&graph);
        Ok(Self {
            graph,
            dynamics,
            incidence,
            weights,
            laplacian,
        })
    }

    pub fn graph(&self) -> &SignedGraph {
        &self.graph
    }

    pub fn node_dynamics(&self) -> &[NodeDynamics] {
        &self.dynamics
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    /// `w̄`, the true weights in the edge space.
    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn laplacian(&self) -> &Array2<f64> {
        &self.laplacian
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn n_slots(&self) -> usize {
        self.incidence.n_edges()
    }

    /// `F(x)`
    pub fn node_field(&self, x: &Array1<f64>) -> Array1<f64> {
        x.iter()
            .zip(&self.dynamics)
            .map(|(&v, f)| f.eval(v))
            .collect()
    }

    /// Same plant with different node maps.
    pub fn with_dynamics(&self, dynamics: NodeDynamics) -> Result<Self> {
        Self::new(self.graph.clone(), dynamics)
    }
}

/// `F(x) - Ē W̄ Ēᵀ x + u`
pub fn plant_rhs(x: &Array1<f64>, u: &Array1<f64>, spec: &PlantSpec) -> Result<Array1<f64>> {
    let n = spec.n_nodes();
    if x.len() != n || u.len() != n {
        return Err(Error::arg(format!(
            "plant_rhs: expected {n} nodes, got x={} u={}",
            x.len(),
            u.len()
        )));
    }
    let coupling = spec
        .incidence
        .node_sums(&(&spec.weights.0 * &spec.incidence.edge_differences(x)));
    Ok(spec.node_field(x) - coupling + u)
}

/// Closed-loop error system in `(x̃, w̃)` coordinates:
///
/// ```text
/// x̃' = -(c1 I + L) x̃ - Ē Ẑ w̃
/// w̃' =  Ẑ Ēᵀ x̃              Ẑ = diag(Ēᵀ x̂)
/// ```
///
/// `L` is applied as a dense matrix, independently of the edge-space route
/// the plant uses.
pub fn error_system_rhs(
    x_tilde: &Array1<f64>,
    w_tilde: &Array1<f64>,
    x_hat: &Array1<f64>,
    c1: f64,
    laplacian: &Array2<f64>,
    incidence: &IncidenceMatrix,
) -> (Array1<f64>, Array1<f64>) {
    let z_hat = incidence.edge_differences(x_hat);
    let x_tilde_dot =
        -(x_tilde * c1) - laplacian.dot(x_tilde) - incidence.node_sums(&(&z_hat * w_tilde));
    let w_tilde_dot = &z_hat * &incidence.edge_differences(x_tilde);
    (x_tilde_dot, w_tilde_dot)
}

/// Error-coordinate trajectory co-integrated with `x̂' = -x̂ + φ(t, x̃)`.
#[derive(Debug, Clone)]
pub struct ErrorTrajectory {
    pub times: Vec<f64>,
    pub x_tilde: Array2<f64>,
    pub w_tilde: Array2<f64>,
}

/// Integrates the error system from `(x̃₀, w̃₀, x̂₀)` with fixed-step RK4,
/// recording every step.
#[allow(clippy::too_many_arguments)]
pub fn simulate_error_system(
    x_tilde0: &Array1<f64>,
    w_tilde0: &Array1<f64>,
    x_hat0: &Array1<f64>,
    c1: f64,
    spec: &PlantSpec,
    signal: &SignalConfig,
    dt: f64,
    horizon: f64,
) -> Result<ErrorTrajectory> {
    let n = spec.n_nodes();
    let m = spec.n_slots();
    let steps = sim::step_count(dt, horizon)?;
    let mut y = Array1::zeros(2 * n + m);
    y.slice_mut(ndarray::s![..n]).assign(x_tilde0);
    y.slice_mut(ndarray::s![n..2 * n]).assign(x_hat0);
    y.slice_mut(ndarray::s![2 * n..]).assign(w_tilde0);

    let rhs = |t: f64, y: &Array1<f64>| -> Array1<f64> {
        let xt = y.slice(ndarray::s![..n]).to_owned();
        let xh = y.slice(ndarray::s![n..2 * n]).to_owned();
        let wt = y.slice(ndarray::s![2 * n..]).to_owned();
        let (dxt, dwt) = error_system_rhs(&xt, &wt, &xh, c1, &spec.laplacian, &spec.incidence);
        let dxh = phi_theta(t, &xt, signal) - &xh;
        let mut out = Array1::zeros(y.len());
        out.slice_mut(ndarray::s![..n]).assign(&dxt);
        out.slice_mut(ndarray::s![n..2 * n]).assign(&dxh);
        out.slice_mut(ndarray::s![2 * n..]).assign(&dwt);
        out
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut x_tilde = Array2::zeros((steps + 1, n));
    let mut w_tilde = Array2::zeros((steps + 1, m));
    let mut record = |k: usize, y: &Array1<f64>| {
        times.push(k as f64 * dt);
        x_tilde.row_mut(k).assign(&y.slice(ndarray::s![..n]));
        w_tilde.row_mut(k).assign(&y.slice(ndarray::s![2 * n..]));
    };
    record(0, &y);
    for k in 0..steps {
        let t = k as f64 * dt;
        y = rk4_step(&rhs, &y, t, dt)?;
        let peak = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if peak > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                run: "error-coordinate simulation".into(),
                t: t + dt,
                magnitude: peak,
            });
        }
        record(k + 1, &y);
    }
    Ok(ErrorTrajectory {
        times,
        x_tilde,
        w_tilde,
    })
}

/// Runs the controlled plant in original coordinates and the error system
/// from the mapped initial condition; returns
/// `max_t |x̃ᵃ - x̃ᵇ| + |w̃ᵃ - w̃ᵇ|`.
///
/// `cfg.record_stride` is ignored; both runs are compared at every step.
pub fn cross_validate(cfg: &SimConfig) -> Result<f64> {
    let mut plant_cfg = cfg.clone();
    plant_cfg.record_stride = 1;
    let traj =
        sim::simulate(&plant_cfg).map_err(|e| rename_run(e, "plant-coordinate simulation"))?;

    let init = cfg.initial_state()?;
    let x_tilde0 = init.x_tilde();
    let w_tilde0 = &cfg.plant.weights().0 - &init.w_hat;
    let err = simulate_error_system(
        &x_tilde0,
        &w_tilde0,
        &init.x_hat,
        cfg.gains.c1,
        &cfg.plant,
        &cfg.signal,
        cfg.dt,
        cfg.horizon,
    )?;

    let truth = &cfg.plant.weights().0;
    let mut worst = 0.0_f64;
    for k in 0..traj.len() {
        let xa = &traj.x.row(k) - &traj.x_hat.row(k);
        let wa = truth - &traj.w_hat.row(k);
        let dx = (&xa - &err.x_tilde.row(k)).mapv(|v| v * v).sum().sqrt();
        let dw = (&wa - &err.w_tilde.row(k)).mapv(|v| v * v).sum().sqrt();
        worst = worst.max(dx + dw);
    }
    Ok(worst)
}

fn rename_run(e: Error, run: &str) -> Error {
    match e {
        Error::Divergence { t, magnitude, .. } => Error::Divergence {
            run: run.to_string(),
            t,
            magnitude,
        },
        other => other,
    }
}
