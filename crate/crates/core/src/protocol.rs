//! The adaptive synchronization/identification protocol.
//!
//! The protocol drives the plant toward an auxiliary state `x̂` that is kept
//! excited by a signal `φ(t, x̃)`, while the weight estimate `ŵ` follows a
//! gradient-type law in the complete-graph edge space:
//!
//! ```text
//! x̂'  = -x̂ + φ(t, x̃)                      x̃ = x - x̂
//! u   = -F(x) - c1 x̃ + x̂' + Ē diag(ŵ) Ēᵀ x̂
//! ŵ'  = -diag(Ēᵀ x̂) Ēᵀ x̃
//! ```
//!
//! `φ` here depends on `x̃` only. The weight error is not measurable, so a
//! generator that needs it cannot be implemented online.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::IncidenceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Sin,
    Cos,
}

/// `amplitude · sin(omega t)` or `amplitude · cos(omega t)`, omega in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeTerm {
    pub amplitude: f64,
    pub omega: f64,
    pub kind: Waveform,
}

impl PeTerm {
    pub fn sin(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            kind: Waveform::Sin,
        }
    }

    pub fn cos(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            kind: Waveform::Cos,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            Waveform::Sin => self.amplitude * (self.omega * t).sin(),
            Waveform::Cos => self.amplitude * (self.omega * t).cos(),
        }
    }
}

/// Parameters of the excitation generator `φ(t, x̃) = tanh(κ x̃) p_e(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub kappa: f64,
    #[serde(rename = "term")]
    pub pe_terms: Vec<PeTerm>,
}

impl Default for SignalConfig {
    /// κ = 1000 with the seven-term multisine of the reference experiment.
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            kappa: 1000.0,
            pe_terms: vec![
                PeTerm::sin(0.5, 15.0 * PI),
                PeTerm::cos(0.3, 6.0 * PI),
                PeTerm::sin(-0.5, 8.0 * PI),
                PeTerm::cos(0.7, 12.0 * PI),
                PeTerm::sin(2.0, PI),
                PeTerm::cos(-0.3, 2.0 * PI),
                PeTerm::sin(-0.8, 18.0 * PI),
            ],
        }
    }
}

impl SignalConfig {
    /// `Σ |amplitude|`, a uniform bound on `|p_e(t)|` and on `|φ|_∞`.
    ///
    /// Together with `|tanh'| ≤ 1` this gives the generator's growth bound:
    /// `|∂φ/∂x̃| ≤ κ·bound` and `|∂φ/∂t| ≤ Σ |amplitude·omega|`.
    pub fn bound(&self) -> f64 {
        self.pe_terms.iter().map(|p| p.amplitude.abs()).sum()
    }

    /// `Σ |amplitude · omega|`, bound on `|∂φ/∂t|`.
    pub fn rate_bound(&self) -> f64 {
        self.pe_terms
            .iter()
            .map(|p| (p.amplitude * p.omega).abs())
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Validation(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        for (k, p) in self.pe_terms.iter().enumerate() {
            if !(p.amplitude.is_finite() && p.omega.is_finite()) {
                return Err(Error::Validation(format!("signal term {k} is not finite")));
            }
        }
        Ok(())
    }
}

/// Scalar excitation `p_e(t)`.
pub fn pe_signal(t: f64, cfg: &SignalConfig) -> f64 {
    cfg.pe_terms.iter().map(|p| p.eval(t)).sum()
}

/// `tanh(κ x̃_i) · p_e(t)` for every agent.
pub fn phi_theta(t: f64, x_tilde: &Array1<f64>, cfg: &SignalConfig) -> Array1<f64> {
    let p = pe_signal(t, cfg);
    x_tilde.mapv(|v| (cfg.kappa * v).tanh() * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainConfig {
    pub c1: f64,
    #[serde(default)]
    pub rule: GainRule,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            c1: 13.0,
            rule: GainRule::NormalizedWeights,
        }
    }
}

/// Which sufficient condition the coupling gain is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainRule {
    /// `c1 > -λ_min(L)`; needs the true spectrum.
    #[serde(alias = "prop1")]
    KnownSpectrum,
    /// `c1 > N`; valid whenever all `|w| ≤ 1`.
    #[default]
    #[serde(alias = "prop2")]
    NormalizedWeights,
}

/// Lower bound the gain must strictly exceed.
pub fn required_gain(rule: GainRule, lambda_min: Option<f64>, n: usize) -> Result<f64> {
    match rule {
        GainRule::KnownSpectrum => lambda_min
            .map(|l| -l)
            .ok_or_else(|| Error::arg("known-spectrum gain rule needs lambda_min")),
        GainRule::NormalizedWeights => Ok(n as f64),
    }
}

/// Coupled protocol state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolState {
    pub x: Array1<f64>,
    pub x_hat: Array1<f64>,
    pub w_hat: Array1<f64>,
    pub t: f64,
}

impl ProtocolState {
    pub fn x_tilde(&self) -> Array1<f64> {
        &self.x - &self.x_hat
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(self.x_hat.iter())
            .chain(self.w_hat.iter())
            .all(|v| v.is_finite())
    }
}

/// `-x̂ + φ`
pub fn auxiliary_rhs(state: &ProtocolState, phi: &Array1<f64>) -> Array1<f64> {
    phi - &state.x_hat
}

/// `u = -F(x) - c1 (x - x̂) + x̂' + Ē diag(ŵ) Ēᵀ x̂`
///
/// `xhat_dot` must be [`auxiliary_rhs`] evaluated at the same state and
/// instant; it is taken as input so one `φ` evaluation serves both.
pub fn control_input(
    state: &ProtocolState,
    xhat_dot: &Array1<f64>,
    f_vals: &Array1<f64>,
    gains: &GainConfig,
    e_bar: &IncidenceMatrix,
) -> Result<Array1<f64>> {
    let n = state.x.len();
    if state.x_hat.len() != n || xhat_dot.len() != n || f_vals.len() != n || e_bar.n_nodes() != n {
        return Err(Error::arg("control_input: node dimensions disagree"));
    }
    if state.w_hat.len() != e_bar.n_edges() {
        return Err(Error::arg(format!(
            "control_input: {} weight estimates for {} edge slots",
            state.w_hat.len(),
            e_bar.n_edges()
        )));
    }
    let z_hat = e_bar.edge_differences(&state.x_hat);
    let l_hat_xhat = e_bar.node_sums(&(&state.w_hat * &z_hat));
    Ok(-f_vals - &(state.x_tilde() * gains.c1) + xhat_dot + &l_hat_xhat)
}

/// `ŵ' = -diag(Ēᵀ x̂) Ēᵀ x̃`; slot `(i, j)` gets `-(x̂_i - x̂_j)(x̃_i - x̃_j)`.
pub fn weight_update_rhs(state: &ProtocolState, e_bar: &IncidenceMatrix) -> Array1<f64> {
    let z_hat = e_bar.edge_differences(&state.x_hat);
    let z_tilde = e_bar.edge_differences(&state.x_tilde());
    -(z_hat * z_tilde)
}
