//! Persistency-of-excitation checks on sampled signals.
//!
//! A signal `B(τ)` (vector or matrix valued) is uniformly persistently
//! exciting at level `(μ, T)` when every window Gram matrix
//! `∫_t^{t+T} B Bᵀ dτ` is bounded below by `μ I`. The δ-qualified variant only
//! asks this of windows on which a designated state stays at least `δ` away
//! from zero; other windows are exempt.
//!
//! All checks here run on recorded samples, so they certify the property on
//! the recorded horizon only. Integrals use the trapezoidal rule on the
//! sampling grid; δ-qualification uses the sampled minimum (no
//! interpolation).

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::graph::IncidenceMatrix;

/// Which Gram product a matrix-valued signal contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GramForm {
    /// `B Bᵀ` (rows of `B` span the Gram space).
    Outer,
    /// `Bᵀ B` (columns of `B` span the Gram space).
    Inner,
}

/// A uniformly sampled excitation signal.
pub trait SampledSignal {
    fn len(&self) -> usize;
    fn t0(&self) -> f64;
    fn dt(&self) -> f64;
    fn gram_dim(&self) -> usize;
    /// `gram += weight · G_k` where `G_k` is the Gram integrand at sample `k`.
    fn add_gram_term(&self, k: usize, weight: f64, gram: &mut Array2<f64>);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Vector samples `φ(t_k)` stored row-wise; integrand `φ φᵀ`.
#[derive(Debug, Clone)]
pub struct VectorSamples {
    pub t0: f64,
    pub dt: f64,
    pub values: Array2<f64>,
}

impl VectorSamples {
    /// Samples `f` at `t0 + k·dt` for `k = 0..n`.
    pub fn from_fn(t0: f64, dt: f64, n: usize, mut f: impl FnMut(f64) -> Array1<f64>) -> Self {
        let first = f(t0);
        let mut values = Array2::zeros((n, first.len()));
        if n > 0 {
            values.row_mut(0).assign(&first);
        }
        for k in 1..n {
            values.row_mut(k).assign(&f(t0 + k as f64 * dt));
        }
        Self { t0, dt, values }
    }
}

impl SampledSignal for VectorSamples {
    fn len(&self) -> usize {
        self.values.nrows()
    }
    fn t0(&self) -> f64 {
        self.t0
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn gram_dim(&self) -> usize {
        self.values.ncols()
    }
    fn add_gram_term(&self, k: usize, weight: f64, gram: &mut Array2<f64>) {
        let v = self.values.row(k);
        let d = v.len();
        for i in 0..d {
            for j in i..d {
                let c = weight * (v[i] * v[j]);
                gram[[i, j]] += c;
                if j != i {
                    gram[[j, i]] += c;
                }
            }
        }
    }
}

/// General matrix samples `B(t_k)`.
#[derive(Debug, Clone)]
pub struct MatrixSamples {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Array2<f64>>,
    pub form: GramForm,
}

impl SampledSignal for MatrixSamples {
    fn len(&self) -> usize {
        self.values.len()
    }
    fn t0(&self) -> f64 {
        self.t0
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn gram_dim(&self) -> usize {
        match (self.values.first(), self.form) {
            (Some(b), GramForm::Outer) => b.nrows(),
            (Some(b), GramForm::Inner) => b.ncols(),
            (None, _) => 0,
        }
    }
    fn add_gram_term(&self, k: usize, weight: f64, gram: &mut Array2<f64>) {
        let b = &self.values[k];
        let term = match self.form {
            GramForm::Outer => b.dot(&b.t()),
            GramForm::Inner => b.t().dot(b),
        };
        gram.scaled_add(weight, &term);
    }
}

/// `B(t) = Ē diag(ẑ(t))` built from sampled `ẑ = Ēᵀ x̂`, without forming
/// the N×M̄ matrix per sample.
///
/// Outer form: `Ē diag(ẑ²) Ēᵀ` (N×N). Inner form: `diag(ẑ) ĒᵀĒ diag(ẑ)`
/// (M̄×M̄), the weight-error observability Gram.
#[derive(Debug, Clone)]
pub struct EdgeExcitation<'a> {
    pub t0: f64,
    pub dt: f64,
    pub z_hat: Array2<f64>,
    pub incidence: &'a IncidenceMatrix,
    pub form: GramForm,
}

impl SampledSignal for EdgeExcitation<'_> {
    fn len(&self) -> usize {
        self.z_hat.nrows()
    }
    fn t0(&self) -> f64 {
        self.t0
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn gram_dim(&self) -> usize {
        match self.form {
            GramForm::Outer => self.incidence.n_nodes(),
            GramForm::Inner => self.incidence.n_edges(),
        }
    }
    fn add_gram_term(&self, k: usize, weight: f64, gram: &mut Array2<f64>) {
        let z = self.z_hat.row(k);
        let inc = self.incidence;
        match self.form {
            GramForm::Outer => {
                for (e, &zk) in z.iter().enumerate() {
                    let (p, m) = inc.column_ends(e);
                    let c = weight * zk * zk;
                    gram[[p, p]] += c;
                    gram[[m, m]] += c;
                    gram[[p, m]] -= c;
                    gram[[m, p]] -= c;
                }
            }
            GramForm::Inner => {
                // (ĒᵀĒ)_{kl} = ±1 when columns share an endpoint, 2 on the diagonal
                let m_edges = inc.n_edges();
                for a in 0..m_edges {
                    let (pa, ma) = inc.column_ends(a);
                    let za = weight * z[a];
                    for b in 0..m_edges {
                        let (pb, mb) = inc.column_ends(b);
                        let dot = (pa == pb) as i32 + (ma == mb) as i32
                            - (pa == mb) as i32
                            - (ma == pb) as i32;
                        if dot != 0 {
                            gram[[a, b]] += za * z[b] * dot as f64;
                        }
                    }
                }
            }
        }
    }
}

/// Gram matrix over one window and its smallest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramWindow {
    pub t_start: f64,
    #[serde(rename = "T")]
    pub window: f64,
    #[serde(skip)]
    pub gram: Array2<f64>,
    pub min_eig: f64,
}

/// Sample coverage of a window: whole steps from `i0`, plus a fractional
/// step when `T` is not a multiple of `dt`.
#[derive(Debug, Clone, Copy)]
struct Span {
    i0: usize,
    whole: usize,
    frac: f64,
}

impl Span {
    fn last(&self) -> usize {
        self.i0 + self.whole + usize::from(self.frac > 0.0)
    }
}

const GRID_SNAP: f64 = 1e-9;

fn window_span(dt: f64, window: f64) -> Result<(usize, f64)> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::arg(format!(
            "window length must be positive, got {window}"
        )));
    }
    let steps = window / dt;
    let whole = (steps + GRID_SNAP).floor();
    let frac = if steps - whole > GRID_SNAP {
        steps - whole
    } else {
        0.0
    };
    if whole < 1.0 {
        return Err(Error::arg(format!(
            "window {window} is shorter than one sample step {dt}"
        )));
    }
    Ok((whole as usize, frac))
}

fn window_indices<S: SampledSignal + ?Sized>(
    signal: &S,
    t_start: f64,
    window: f64,
) -> Result<Span> {
    let dt = signal.dt();
    let offset = (t_start - signal.t0()) / dt;
    if offset < -GRID_SNAP {
        return Err(Error::Range(format!(
            "window start {t_start} precedes the recording start {}",
            signal.t0()
        )));
    }
    let (whole, frac) = window_span(dt, window)?;
    let span = Span {
        i0: offset.round() as usize,
        whole,
        frac,
    };
    if signal.len() == 0 || span.last() > signal.len() - 1 {
        return Err(Error::Range(format!(
            "window [{t_start}, {}] exceeds the recording [{}, {}]",
            t_start + window,
            signal.t0(),
            signal.t0() + signal.len().saturating_sub(1) as f64 * dt
        )));
    }
    Ok(span)
}

fn gram_over<S: SampledSignal + ?Sized>(signal: &S, span: Span) -> Array2<f64> {
    let d = signal.gram_dim();
    let dt = signal.dt();
    let Span { i0, whole, frac } = span;
    let end = i0 + whole;
    let mut gram = Array2::zeros((d, d));
    for k in i0..=end {
        let w = if k == i0 || k == end { 0.5 * dt } else { dt };
        signal.add_gram_term(k, w, &mut gram);
    }
    if frac > 0.0 {
        // trapezoid to the interpolated integrand at t_start + T
        signal.add_gram_term(end, 0.5 * frac * dt * (2.0 - frac), &mut gram);
        signal.add_gram_term(end + 1, 0.5 * frac * frac * dt, &mut gram);
    }
    gram
}

/// Trapezoidal `∫_{t_start}^{t_start+T} G(τ) dτ` and its smallest eigenvalue.
///
/// `t_start` snaps to the nearest sample; a window end between samples uses
/// the linearly interpolated integrand.
pub fn windowed_gram<S: SampledSignal + ?Sized>(
    signal: &S,
    t_start: f64,
    window: f64,
) -> Result<GramWindow> {
    let span = window_indices(signal, t_start, window)?;
    let gram = gram_over(signal, span);
    let min_eig = symmetric_eigenvalues(&gram)?
        .first()
        .copied()
        .unwrap_or(0.0);
    Ok(GramWindow {
        t_start: signal.t0() + span.i0 as f64 * signal.dt(),
        window,
        gram,
        min_eig,
    })
}

/// Start times `t0, t0 + stride, …` of every window that fits the record.
pub fn window_starts<S: SampledSignal + ?Sized>(
    signal: &S,
    window: f64,
    stride: f64,
) -> Result<Vec<f64>> {
    let dt = signal.dt();
    if !(stride > 0.0) {
        return Err(Error::arg(format!("stride must be positive, got {stride}")));
    }
    let (whole, frac) = window_span(dt, window)?;
    let needed = whole + usize::from(frac > 0.0);
    let step = ((stride / dt).round() as usize).max(1);
    if signal.len() < needed + 1 {
        return Err(Error::Range(format!(
            "recording of {} s is shorter than the window {window} s",
            signal.len().saturating_sub(1) as f64 * dt
        )));
    }
    Ok((0..=(signal.len() - 1 - needed))
        .step_by(step)
        .map(|i| signal.t0() + i as f64 * dt)
        .collect())
}

/// `μ = min` over strided windows of the window Gram's smallest eigenvalue.
pub fn pe_level<S: SampledSignal + ?Sized>(signal: &S, window: f64, stride: f64) -> Result<f64> {
    let mut mu = f64::INFINITY;
    for t in window_starts(signal, window, stride)? {
        mu = mu.min(windowed_gram(signal, t, window)?.min_eig);
    }
    Ok(mu)
}

/// Outcome of a δ-qualified excitation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPeReport {
    pub delta: f64,
    #[serde(rename = "T")]
    pub window: f64,
    pub stride: f64,
    /// Smallest window eigenvalue over qualified windows; `0` when none qualify.
    pub mu_estimate: f64,
    pub qualified_count: usize,
    /// Number of windows examined, qualified or not.
    pub total_windows: usize,
    /// Largest `|x1|` seen on the record.
    pub radius: f64,
    pub windows: Vec<GramWindow>,
}

/// Checks the δ-qualified excitation condition window by window.
///
/// `x1` holds the designated state row-wise on the signal's grid. A window
/// qualifies when `min_k |x1(t_k)| ≥ δ` over its samples; only qualified
/// windows contribute to `mu_estimate`.
pub fn delta_pe_check<S: SampledSignal + ?Sized>(
    signal: &S,
    x1: &Array2<f64>,
    delta: f64,
    window: f64,
    stride: f64,
) -> Result<DeltaPeReport> {
    if x1.nrows() != signal.len() {
        return Err(Error::arg(format!(
            "x1 has {} samples, signal has {}",
            x1.nrows(),
            signal.len()
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::arg(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    let norms: Vec<f64> = x1
        .rows()
        .into_iter()
        .map(|r| r.mapv(|v| v * v).sum().sqrt())
        .collect();
    let starts = window_starts(signal, window, stride)?;
    let mut windows = Vec::new();
    for &t in &starts {
        let span = window_indices(signal, t, window)?;
        let lowest = norms[span.i0..=span.last()]
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if lowest >= delta {
            windows.push(windowed_gram(signal, t, window)?);
        }
    }
    let mu_estimate = if windows.is_empty() {
        0.0
    } else {
        windows
            .iter()
            .map(|w| w.min_eig)
            .fold(f64::INFINITY, f64::min)
    };
    Ok(DeltaPeReport {
        delta,
        window,
        stride,
        mu_estimate,
        qualified_count: windows.len(),
        total_windows: starts.len(),
        radius: norms.iter().fold(0.0, |a: f64, &b| a.max(b)),
        windows,
    })
}

/// Sweep grid for [`lemma1_frozen_check`]: window starts from `t_begin` to
/// `t_end` inclusive, quadrature step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub t_begin: f64,
    pub t_end: f64,
    pub dt: f64,
}

/// For each frozen `x`, the minimum over window starts `t` of
/// `∫_t^{t+T} |φ(τ, x)| dτ`, with `T` rounded to whole quadrature steps.
///
/// A positive value for every nonzero `x` is the frozen-state excitation
/// criterion; `x = 0` typically yields `0`.
pub fn lemma1_frozen_check<F>(
    generator: F,
    x_points: &[Array1<f64>],
    window: f64,
    grid: SweepGrid,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &Array1<f64>) -> Array1<f64>,
{
    if !(grid.dt > 0.0 && window > 0.0 && grid.t_end >= grid.t_begin) {
        return Err(Error::arg(
            "sweep grid needs dt > 0, T > 0 and t_end >= t_begin",
        ));
    }
    let count = (window / grid.dt).round() as usize;
    let starts = ((grid.t_end - grid.t_begin) / grid.dt).round() as usize + 1;
    let total = starts + count;
    let mut bounds = Vec::with_capacity(x_points.len());
    for x in x_points {
        let mags: Vec<f64> = (0..total)
            .map(|k| {
                let t = grid.t_begin + k as f64 * grid.dt;
                generator(t, x).mapv(|v| v * v).sum().sqrt()
            })
            .collect();
        let mut best = f64::INFINITY;
        for s in 0..starts {
            let seg = &mags[s..=s + count];
            let inner: f64 = seg[1..count].iter().sum();
            let integral = grid.dt * (inner + 0.5 * (seg[0] + seg[count]));
            best = best.min(integral);
        }
        bounds.push(best);
    }
    Ok(bounds)
}
