//! Gaussian mollifiers for δ, δ′, sgn and log kernels.
//!
//! Distributional evaluations are performed at finite width h and sent to
//! h → 0 by Richardson extrapolation over a width-halving schedule.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierKind {
    Delta,
    DeltaPrime,
}

#[derive(Clone, Copy, Debug)]
pub struct Mollifier {
    pub kind: MollifierKind,
    pub width: f64,
}

impl Mollifier {
    pub fn new(kind: MollifierKind, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidWidth(width));
        }
        Ok(Mollifier { kind, width })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            MollifierKind::Delta => delta(x, self.width),
            MollifierKind::DeltaPrime => delta_prime(x, self.width),
        }
    }
}

/// Gaussian approximation of δ(x).
pub fn delta(x: f64, h: f64) -> f64 {
    let u = x / h;
    (-0.5 * u * u).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
}

/// Derivative of the Gaussian approximation, δ′(x).
pub fn delta_prime(x: f64, h: f64) -> f64 {
    -x / (h * h) * delta(x, h)
}

/// Smoothed sgn(x); tanh profile with the same width scale.
pub fn sgn_smooth(x: f64, h: f64) -> f64 {
    (x / h).tanh()
}

/// Smoothed log|x|: ½ log(x² + h²).
pub fn log_smooth(x: f64, h: f64) -> f64 {
    0.5 * (x * x + h * h).ln()
}

/// Width-halving schedule h₀, h₀/2, …, for h → 0 extrapolation.
pub fn width_schedule(h0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| h0 / 2f64.powi(k as i32)).collect()
}
