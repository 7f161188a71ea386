//! Richardson-type limit extrapolation h → 0.

use crate::error::{Error, Result};

/// Estimate lim_{h→0} y(h) from samples (h_i, y_i) with h_i monotonically
/// decreasing towards 0, by Neville polynomial extrapolation to h = 0.
///
/// Returns the limit estimate and an error estimate taken from the last
/// correction in the tableau.
pub fn limit_extrapolate(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::InvalidSequence);
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) || w[1].0 <= 0.0 {
            return Err(Error::InvalidSequence);
        }
    }
    let n = samples.len();
    let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut tab: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mut best = tab[n - 1];
    let mut err = f64::INFINITY;
    for k in 1..n {
        for i in 0..(n - k) {
            // polynomial through (h_i..h_{i+k}) evaluated at 0
            tab[i] = (h[i] * tab[i + 1] - h[i + k] * tab[i]) / (h[i] - h[i + k]);
        }
        let correction = (tab[0] - best).abs();
        best = tab[0];
        err = correction;
    }
    Ok((best, err))
}

/// Same, but the model contains a (log 1/h)·h term in addition to powers of h;
/// used for null-infinity limits with log R/R corrections. Fits
/// y = c0 + c1·h·log(1/h) + c2·h + c3·h² by least squares and returns
/// (c0, c1) with a residual-based error estimate.
pub fn log_limit_fit(samples: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::InvalidSequence);
    }
    let basis = |h: f64| [1.0, h * (1.0 / h).ln(), h, h * h];
    // normal equations, 4x4
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for &(h, y) in samples {
        let phi = basis(h);
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] += phi[i] * phi[j];
            }
            b[i] += phi[i] * y;
        }
    }
    let c = solve4(a, b).ok_or(Error::InvalidSequence)?;
    let mut res = 0.0_f64;
    for &(h, y) in samples {
        let phi = basis(h);
        let fit: f64 = (0..4).map(|i| c[i] * phi[i]).sum();
        res = res.max((y - fit).abs());
    }
    Ok((c[0], c[1], res))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in (row + 1)..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_exact() {
        let samples: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|h| (*h, 1.0 + h)).collect();
        let (limit, _) = limit_extrapolate(&samples).unwrap();
        assert!((limit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_model() {
        let samples: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|h| (*h, 2.0 + 3.0 * h + h * h))
            .collect();
        let (limit, _) = limit_extrapolate(&samples).unwrap();
        assert!((limit - 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_samples() {
        let samples = [(0.4, 7.0), (0.2, 7.0), (0.1, 7.0)];
        let (limit, err) = limit_extrapolate(&samples).unwrap();
        assert!((limit - 7.0).abs() < 1e-12);
        assert!(err.abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone() {
        let samples = [(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)];
        assert!(matches!(
            limit_extrapolate(&samples),
            Err(Error::InvalidSequence)
        ));
    }

    #[test]
    fn quadratic_error_shrinks_under_refinement() {
        let y = |h: f64| 5.0 + 2.0 * h * h + h * h * h;
        let run = |h0: f64| {
            let hs: Vec<(f64, f64)> = (0..5).map(|k| h0 / 2f64.powi(k)).map(|h| (h, y(h))).collect();
            let (limit, _) = limit_extrapolate(&hs).unwrap();
            (limit - 5.0).abs()
        };
        let coarse = run(0.4);
        let fine = run(0.1);
        assert!(fine <= coarse / 4.0 + 1e-14);
    }

    #[test]
    fn log_fit_recovers_coefficients() {
        let y = |h: f64| 3.0 - 0.5 * h * (1.0 / h).ln() + 0.2 * h;
        let samples: Vec<(f64, f64)> =
            (0..8).map(|k| 0.2 / 2f64.powi(k)).map(|h| (h, y(h))).collect();
        let (c0, c1, _) = log_limit_fit(&samples).unwrap();
        assert!((c0 - 3.0).abs() < 1e-10);
        assert!((c1 + 0.5).abs() < 1e-8);
    }
}
