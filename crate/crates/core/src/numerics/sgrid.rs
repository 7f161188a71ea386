//! 1-D grids along the retarded-time parameter s, with power-law tail handling
//! for integrands decaying like C·(1+|s|)^(−1−ε).

use crate::error::{Error, Result};
use crate::numerics::gauss::gauss_legendre_on;

/// Sampled function of s with a declared tail decay exponent.
#[derive(Clone, Debug)]
pub struct SGrid {
    pub samples: Vec<f64>,
    pub values: Vec<f64>,
    /// decay exponent ε > 0 in |V̇(s)| ≤ C (1+|s|)^(−1−ε)
    pub eps: f64,
}

impl SGrid {
    pub fn new(samples: Vec<f64>, values: Vec<f64>, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::InconsistentInput("decay exponent must be > 0".into()));
        }
        if samples.len() != values.len() || samples.len() < 2 {
            return Err(Error::InconsistentInput("sample/value length mismatch".into()));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InconsistentInput(
                "samples must be strictly increasing".into(),
            ));
        }
        Ok(SGrid { samples, values, eps })
    }
}

/// Composite Gauss rule on [−s_max, s_max].
pub fn line_rule(s_max: f64, panels: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let h = 2.0 * s_max / panels as f64;
    for p in 0..panels {
        let a = -s_max + p as f64 * h;
        let (x, w) = gauss_legendre_on(per_panel, a, a + h);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// ∫ f(s) ds over the whole line: composite Gauss core on [−s_max, s_max] plus
/// analytic power-law tails C_±·|s|^(−1−ε) fitted on the outer 10% of the core.
pub fn integrate_line<F: Fn(f64) -> f64>(f: &F, s_max: f64, panels: usize, per_panel: usize, eps: f64) -> f64 {
    let (nodes, weights) = line_rule(s_max, panels, per_panel);
    let core: f64 = nodes.iter().zip(&weights).map(|(s, w)| w * f(*s)).sum();
    core + tail_estimate(f, s_max, eps, 1.0) + tail_estimate(f, s_max, eps, -1.0)
}

/// Closed-form tail ∫_{s_max}^∞ C s^(−1−ε) ds = C s_max^(−ε)/ε with C fitted
/// from samples in [0.9 s_max, s_max] (mirrored for sign = −1).
fn tail_estimate<F: Fn(f64) -> f64>(f: &F, s_max: f64, eps: f64, sign: f64) -> f64 {
    let mut c = 0.0;
    let m = 8;
    for k in 0..m {
        let s = s_max * (0.9 + 0.1 * (k as f64 + 0.5) / m as f64);
        c += f(sign * s) * s.powf(1.0 + eps);
    }
    c /= m as f64;
    c * s_max.powf(-eps) / eps
}
