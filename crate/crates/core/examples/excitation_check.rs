//! Window Gram matrices: a textbook exciting pair, a decaying one, and the
//! frozen-state check of the protocol's excitation generator.

use std::f64::consts::PI;

use ndarray::{array, Array1};
use signet_id::excitation::{
    lemma1_frozen_check, pe_level, windowed_gram, SweepGrid, VectorSamples,
};
use signet_id::protocol::{phi_theta, SignalConfig};

fn main() -> signet_id::Result<()> {
    let dt = 1e-3;
    let steps = (30.0 / dt) as usize;
    let steady = VectorSamples::from_fn(0.0, dt, steps, |t| array![t.sin(), t.cos()]);
    let fading = VectorSamples::from_fn(0.0, dt, steps, |t| {
        array![t.sin(), t.cos()] * (-0.3 * t).exp()
    });

    let g = windowed_gram(&steady, 0.0, 2.0 * PI)?;
    println!("[sin, cos] over one period:\n{:.6}", g.gram);
    println!("mu (steady) = {:.4}", pe_level(&steady, 2.0 * PI, 1.0)?);
    println!("mu (fading) = {:.2e}", pe_level(&fading, 2.0 * PI, 1.0)?);

    let cfg = SignalConfig::default();
    let points = [
        Array1::ones(12),
        Array1::from_elem(12, 1e-3),
        Array1::zeros(12),
    ];
    let bounds = lemma1_frozen_check(
        |t, x: &Array1<f64>| phi_theta(t, x, &cfg),
        &points,
        2.0,
        SweepGrid {
            t_begin: 0.0,
            t_end: 10.0,
            dt,
        },
    )?;
    for (x, b) in ["1", "1e-3", "0"].iter().zip(bounds) {
        println!("frozen x_tilde = {x:>4} -> min window integral of |phi| = {b:.4}");
    }
    Ok(())
}
