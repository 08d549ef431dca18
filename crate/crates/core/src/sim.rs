//! Fixed-step co-integration of the plant, the auxiliary system and the
//! weight estimator.
//!
//! The coupled state is packed as `[x (N) | x̂ (N) | ŵ (M̄)]`. Each RK4 stage
//! evaluates `φ` once, at the stage time and the stage's `x̃`, and feeds the
//! resulting `x̂'` into both the auxiliary dynamics and the control input.

use std::cell::RefCell;
use std::io::{BufRead, Write};

use ndarray::{s, Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{plant_rhs, PlantSpec};
use crate::error::{Error, Result};
use crate::graph::{laplacian_direct, spectral_report, IncidenceMatrix};
use crate::protocol::{
    auxiliary_rhs, control_input, phi_theta, required_gain, weight_update_rhs, GainConfig,
    GainRule, ProtocolState, SignalConfig,
};

/// Any state entry above this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<F>(mut rhs: F, y: &Array1<f64>, t: f64, dt: f64) -> Result<Array1<f64>>
where
    F: FnMut(f64, &Array1<f64>) -> Array1<f64>,
{
    let finite = |k: &Array1<f64>, at: f64| {
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { t: at })
        }
    };
    let half = 0.5 * dt;
    let k1 = rhs(t, y);
    finite(&k1, t)?;
    let k2 = rhs(t + half, &(y + &(&k1 * half)));
    finite(&k2, t + half)?;
    let k3 = rhs(t + half, &(y + &(&k2 * half)));
    finite(&k3, t + half)?;
    let k4 = rhs(t + dt, &(y + &(&k3 * dt)));
    finite(&k4, t + dt)?;
    Ok(y + &((k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)))
}

/// `round(horizon / dt)`, validated.
pub fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= dt) {
        return Err(Error::Validation(format!(
            "horizon must be at least dt, got horizon={horizon}, dt={dt}"
        )));
    }
    Ok((horizon / dt).round() as usize)
}

/// Initial conditions. Unset vectors fall back to seeded or zero defaults.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InitSpec {
    /// Explicit `x(0)`; when absent, each entry is uniform in `[-x0_range, x0_range]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_x0_range")]
    pub x0_range: f64,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hat0: Option<Vec<f64>>,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_hat0: Option<Vec<f64>>,
}

fn default_x0_range() -> f64 {
    1.0
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            x0: None,
            x0_range: default_x0_range(),
            x_hat0: None,
            w_hat0: None,
        }
    }
}

/// Stream id of the initial-state RNG, kept apart from other seeded draws.
const INIT_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub plant: PlantSpec,
    pub gains: GainConfig,
    pub signal: SignalConfig,
    pub dt: f64,
    pub horizon: f64,
    pub record_stride: usize,
    pub seed: u64,
    pub init: InitSpec,
}

impl SimConfig {
    /// Reference settings: `c1 = 13`, `κ = 1000`, `dt = 1e-3`, 200 s,
    /// every 10th step recorded.
    pub fn new(plant: PlantSpec) -> Self {
        Self {
            plant,
            gains: GainConfig::default(),
            signal: SignalConfig::default(),
            dt: 1e-3,
            horizon: 200.0,
            record_stride: 10,
            seed: 0,
            init: InitSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        step_count(self.dt, self.horizon)?;
        if self.record_stride == 0 {
            return Err(Error::Validation("record_stride must be at least 1".into()));
        }
        if !(self.gains.c1.is_finite() && self.gains.c1 >= 0.0) {
            return Err(Error::Validation(format!(
                "c1 must be finite and non-negative, got {}",
                self.gains.c1
            )));
        }
        self.signal.validate()?;
        if !(self.init.x0_range.is_finite() && self.init.x0_range >= 0.0) {
            return Err(Error::Validation("x0_range must be non-negative".into()));
        }
        let n = self.plant.n_nodes();
        let m = self.plant.n_slots();
        for (name, v, len) in [
            ("x0", &self.init.x0, n),
            ("x_hat0", &self.init.x_hat0, n),
            ("w_hat0", &self.init.w_hat0, m),
        ] {
            if let Some(v) = v {
                if v.len() != len {
                    return Err(Error::Validation(format!(
                        "{name} has {} entries, expected {len}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Validation(format!("{name} has non-finite entries")));
                }
            }
        }
        Ok(())
    }

    /// Resolves [`InitSpec`] into a concrete state at `t = 0`.
    pub fn initial_state(&self) -> Result<ProtocolState> {
        self.validate()?;
        let n = self.plant.n_nodes();
        let m = self.plant.n_slots();
        let x = match &self.init.x0 {
            Some(v) => Array1::from(v.clone()),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(INIT_STREAM);
                let r = self.init.x0_range;
                (0..n)
                    .map(|_| if r > 0.0 { rng.gen_range(-r..=r) } else { 0.0 })
                    .collect()
            }
        };
        let x_hat = self
            .init
            .x_hat0
            .clone()
            .map(Array1::from)
            .unwrap_or_else(|| Array1::zeros(n));
        let w_hat = self
            .init
            .w_hat0
            .clone()
            .map(Array1::from)
            .unwrap_or_else(|| Array1::zeros(m));
        Ok(ProtocolState {
            x,
            x_hat,
            w_hat,
            t: 0.0,
        })
    }

    /// Gain threshold under the configured rule and whether `c1` clears it.
    pub fn gain_check(&self) -> Result<GainCheck> {
        let lambda_min = match self.gains.rule {
            GainRule::KnownSpectrum => {
                Some(spectral_report(&laplacian_direct(self.plant.graph()))?.lambda_min)
            }
            GainRule::NormalizedWeights => None,
        };
        let required = required_gain(self.gains.rule, lambda_min, self.plant.n_nodes())?;
        let mut notes = Vec::new();
        if self.gains.rule == GainRule::NormalizedWeights && !self.plant.graph().is_normalized() {
            notes.push("graph has |w| > 1; the c1 > N rule does not apply".to_string());
        }
        Ok(GainCheck {
            rule: self.gains.rule,
            c1: self.gains.c1,
            required,
            satisfied: self.gains.c1 > required,
            notes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GainCheck {
    pub rule: GainRule,
    pub c1: f64,
    pub required: f64,
    pub satisfied: bool,
    pub notes: Vec<String>,
}

/// Uniformly sampled record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Array2<f64>,
    pub x_hat: Array2<f64>,
    pub w_hat: Array2<f64>,
    /// Control input at each sample; absent for trajectories read from CSV.
    pub u: Option<Array2<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_slots(&self) -> usize {
        self.w_hat.ncols()
    }

    /// Sample spacing; zero for single-sample records.
    pub fn sample_dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn x_tilde(&self, k: usize) -> Array1<f64> {
        &self.x.row(k) - &self.x_hat.row(k)
    }

    /// `ẑ = Ēᵀ x̂` at every sample.
    pub fn z_hat(&self, incidence: &IncidenceMatrix) -> Array2<f64> {
        let mut z = Array2::zeros((self.len(), incidence.n_edges()));
        for (k, row) in self.x_hat.rows().into_iter().enumerate() {
            z.row_mut(k)
                .assign(&incidence.edge_differences(&row.to_owned()));
        }
        z
    }

    pub fn final_w_hat(&self) -> ArrayView1<'_, f64> {
        self.w_hat.row(self.len() - 1)
    }

    /// CSV with header `t,x_1..x_N,xhat_1..xhat_N,what_1..what_M`, values in
    /// `{:.16e}` (17 significant digits), LF line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.n_nodes();
        let m = self.n_slots();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=n).map(|i| format!("xhat_{i}")));
        header.extend((1..=m).map(|k| format!("what_{k}")));
        out.write_all(header.join(",").as_bytes())?;
        out.write_all(b"\n")?;
        let mut line = String::new();
        for k in 0..self.len() {
            line.clear();
            push_num(&mut line, self.times[k]);
            for v in self
                .x
                .row(k)
                .iter()
                .chain(self.x_hat.row(k).iter())
                .chain(self.w_hat.row(k).iter())
            {
                line.push(',');
                push_num(&mut line, *v);
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). Column
    /// order is taken from the header; a missing column is a format error.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty trajectory file".into()))??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let find = |name: &str| -> Result<usize> {
            cols.iter()
                .position(|c| *c == name)
                .ok_or_else(|| Error::Format(format!("missing column '{name}'")))
        };
        let t_col = find("t")?;
        let count = |prefix: &str| {
            (1..)
                .take_while(|i| cols.contains(&format!("{prefix}_{i}").as_str()))
                .count()
        };
        let n = count("x");
        if n == 0 {
            return Err(Error::Format("missing column 'x_1'".into()));
        }
        let m = n * (n - 1) / 2;
        let x_cols = (1..=n)
            .map(|i| find(&format!("x_{i}")))
            .collect::<Result<Vec<_>>>()?;
        let xh_cols = (1..=n)
            .map(|i| find(&format!("xhat_{i}")))
            .collect::<Result<Vec<_>>>()?;
        let w_cols = (1..=m)
            .map(|k| find(&format!("what_{k}")))
            .collect::<Result<Vec<_>>>()?;

        let mut times = Vec::new();
        let mut xs = Vec::new();
        let mut xhs = Vec::new();
        let mut ws = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::Format(format!("row {}: cannot parse '{}'", row + 2, f.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if fields.len() != cols.len() {
                return Err(Error::Format(format!(
                    "row {} has {} fields, header has {}",
                    row + 2,
                    fields.len(),
                    cols.len()
                )));
            }
            times.push(fields[t_col]);
            xs.extend(x_cols.iter().map(|&c| fields[c]));
            xhs.extend(xh_cols.iter().map(|&c| fields[c]));
            ws.extend(w_cols.iter().map(|&c| fields[c]));
        }
        let rows = times.len();
        let shape_err = |e: ndarray::ShapeError| Error::Format(e.to_string());
        Ok(Self {
            times,
            x: Array2::from_shape_vec((rows, n), xs).map_err(shape_err)?,
            x_hat: Array2::from_shape_vec((rows, n), xhs).map_err(shape_err)?,
            w_hat: Array2::from_shape_vec((rows, m), ws).map_err(shape_err)?,
            u: None,
        })
    }
}

pub(crate) fn push_num(buf: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(buf, "{v:.16e}");
}

fn unpack(y: &Array1<f64>, n: usize, t: f64) -> ProtocolState {
    ProtocolState {
        x: y.slice(s![..n]).to_owned(),
        x_hat: y.slice(s![n..2 * n]).to_owned(),
        w_hat: y.slice(s![2 * n..]).to_owned(),
        t,
    }
}

/// Right-hand side of the packed coupled system, plus the control input.
pub struct CoupledSystem<'a> {
    pub plant: &'a PlantSpec,
    pub gains: &'a GainConfig,
    pub signal: &'a SignalConfig,
}

impl CoupledSystem<'_> {
    /// `(ẏ, u)` at `(t, y)`.
    pub fn eval(&self, t: f64, y: &Array1<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let n = self.plant.n_nodes();
        let state = unpack(y, n, t);
        let phi = phi_theta(t, &state.x_tilde(), self.signal);
        let xhat_dot = auxiliary_rhs(&state, &phi);
        let f_vals = self.plant.node_field(&state.x);
        let u = control_input(
            &state,
            &xhat_dot,
            &f_vals,
            self.gains,
            self.plant.incidence(),
        )?;
        let x_dot = plant_rhs(&state.x, &u, self.plant)?;
        let w_dot = weight_update_rhs(&state, self.plant.incidence());
        let mut out = Array1::zeros(y.len());
        out.slice_mut(s![..n]).assign(&x_dot);
        out.slice_mut(s![n..2 * n]).assign(&xhat_dot);
        out.slice_mut(s![2 * n..]).assign(&w_dot);
        Ok((out, u))
    }
}

/// Integrates the closed loop over `[0, horizon]` and records every
/// `record_stride`-th step (including `t = 0`).
///
/// A gain below the configured rule's threshold is logged, not rejected.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    let init = cfg.initial_state()?;
    let steps = step_count(cfg.dt, cfg.horizon)?;
    let gain = cfg.gain_check()?;
    if !gain.satisfied {
        log::warn!(
            "c1 = {} does not exceed the required {} ({:?}); stability is not guaranteed",
            gain.c1,
            gain.required,
            gain.rule
        );
    }

    let n = cfg.plant.n_nodes();
    let m = cfg.plant.n_slots();
    let system = CoupledSystem {
        plant: &cfg.plant,
        gains: &cfg.gains,
        signal: &cfg.signal,
    };

    let records = steps / cfg.record_stride + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(records),
        x: Array2::zeros((records, n)),
        x_hat: Array2::zeros((records, n)),
        w_hat: Array2::zeros((records, m)),
        u: Some(Array2::zeros((records, n))),
    };

    let mut y = Array1::zeros(2 * n + m);
    y.slice_mut(s![..n]).assign(&init.x);
    y.slice_mut(s![n..2 * n]).assign(&init.x_hat);
    y.slice_mut(s![2 * n..]).assign(&init.w_hat);

    let failure = RefCell::new(None);
    let rhs = |t: f64, y: &Array1<f64>| match system.eval(t, y) {
        Ok((dy, _)) => dy,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Array1::from_elem(y.len(), f64::NAN)
        }
    };

    let mut slot = 0;
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        if k % cfg.record_stride == 0 {
            let (_, u) = system.eval(t, &y)?;
            traj.times.push(t);
            traj.x.row_mut(slot).assign(&y.slice(s![..n]));
            traj.x_hat.row_mut(slot).assign(&y.slice(s![n..2 * n]));
            traj.w_hat.row_mut(slot).assign(&y.slice(s![2 * n..]));
            if let Some(us) = traj.u.as_mut() {
                us.row_mut(slot).assign(&u);
            }
            slot += 1;
        }
        if k == steps {
            break;
        }
        y = rk4_step(&rhs, &y, t, cfg.dt).map_err(|e| failure.borrow_mut().take().unwrap_or(e))?;
        let peak = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if peak > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                run: format!("simulation (seed {})", cfg.seed),
                t: t + cfg.dt,
                magnitude: peak,
            });
        }
    }
    Ok(traj)
}
