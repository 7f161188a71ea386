//! Real spherical harmonics: point evaluation, tangential gradients, and
//! quadrature-based analysis/synthesis up to a degree cutoff.
//!
//! Index convention: coefficient k = l² + l + m for degree l and order
//! m ∈ [−l, l]. Harmonics are orthonormal, ∫ Y_lm Y_l'm' dΩ = δδ.

use crate::numerics::sphere::SphereQuadrature;

pub fn coeff_index(l: usize, m: i32) -> usize {
    (l * l) as usize + (l as i32 + m) as usize
}

pub fn coeff_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Fully normalized associated Legendre functions p(l,m) for m ≥ 0 at
/// x = cosθ, flattened as p[l*(l+1)/2 + m]. Condon–Shortley phase included.
fn normalized_assoc_legendre(lmax: usize, x: f64) -> Vec<f64> {
    let sint = (1.0 - x * x).max(0.0).sqrt();
    let size = (lmax + 1) * (lmax + 2) / 2;
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; size];
    p[0] = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 1..=lmax {
        p[idx(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sint * p[idx(m - 1, m - 1)];
    }
    for m in 0..lmax {
        p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - 1.0;
            let am1 = ((4.0 * lm1 * lm1 - 1.0) / (lm1 * lm1 - mf * mf)).sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - p[idx(l - 2, m)] / am1);
        }
    }
    p
}

/// All real Y_lm(n) for l ≤ lmax at the unit vector n.
pub fn ylm_all(lmax: usize, n: [f64; 3]) -> Vec<f64> {
    let x = n[2].clamp(-1.0, 1.0);
    let phi = n[1].atan2(n[0]);
    let p = normalized_assoc_legendre(lmax, x);
    let pidx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0; coeff_count(lmax)];
    for l in 0..=lmax {
        out[coeff_index(l, 0)] = p[pidx(l, 0)];
        for m in 1..=l {
            let (s, c) = (m as f64 * phi).sin_cos();
            out[coeff_index(l, m as i32)] = sqrt2 * p[pidx(l, m)] * c;
            out[coeff_index(l, -(m as i32))] = sqrt2 * p[pidx(l, m)] * s;
        }
    }
    out
}

/// Tangential (surface) gradients ∇_{S²} Y_lm(n) as Cartesian 3-vectors.
///
/// Not defined at the poles; quadrature nodes never sit there.
pub fn ylm_grad_all(lmax: usize, n: [f64; 3]) -> Vec<[f64; 3]> {
    let x = n[2].clamp(-1.0, 1.0);
    let sint = (1.0 - x * x).max(1e-300).sqrt();
    let phi = n[1].atan2(n[0]);
    let (sphi, cphi) = phi.sin_cos();
    let theta_hat = [x * cphi, x * sphi, -sint];
    let phi_hat = [-sphi, cphi, 0.0];
    let p = normalized_assoc_legendre(lmax, x);
    let pidx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![[0.0; 3]; coeff_count(lmax)];
    for l in 0..=lmax {
        for m in 0..=l {
            let plm = p[pidx(l, m)];
            let plm1 = if l >= 1 && m <= l - 1 { p[pidx(l - 1, m)] } else { 0.0 };
            let lf = l as f64;
            let mf = m as f64;
            let e = if l >= 1 {
                (((2.0 * lf + 1.0) / (2.0 * lf - 1.0)) * (lf - mf) * (lf + mf)).sqrt()
            } else {
                0.0
            };
            // dp/dθ = [l·x·p_lm − e(l,m)·p_{l−1,m}] / sinθ
            let dpdtheta = (lf * x * plm - e * plm1) / sint;
            if m == 0 {
                let k = coeff_index(l, 0);
                for i in 0..3 {
                    out[k][i] = dpdtheta * theta_hat[i];
                }
            } else {
                let (smp, cmp_) = (mf * phi).sin_cos();
                let kc = coeff_index(l, m as i32);
                let ks = coeff_index(l, -(m as i32));
                for i in 0..3 {
                    out[kc][i] = sqrt2
                        * (dpdtheta * cmp_ * theta_hat[i] - mf * plm * smp / sint * phi_hat[i]);
                    out[ks][i] = sqrt2
                        * (dpdtheta * smp * theta_hat[i] + mf * plm * cmp_ / sint * phi_hat[i]);
                }
            }
        }
    }
    out
}

/// Spherical-harmonic workspace on a fixed quadrature: tabulated values and
/// gradients at the nodes, with analysis and synthesis transforms.
pub struct SphereBasis {
    pub lmax: usize,
    pub quad: SphereQuadrature,
    /// y[node][coeff]
    pub y: Vec<Vec<f64>>,
    /// grad[node][coeff]
    pub grad: Vec<Vec<[f64; 3]>>,
}

impl SphereBasis {
    pub fn new(quad: SphereQuadrature, lmax: usize) -> Self {
        let y = quad.nodes.iter().map(|n| ylm_all(lmax, *n)).collect();
        let grad = quad.nodes.iter().map(|n| ylm_grad_all(lmax, *n)).collect();
        SphereBasis { lmax, quad, y, grad }
    }

    /// Coefficients of a scalar given by its values at the quadrature nodes.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let nc = coeff_count(self.lmax);
        let mut c = vec![0.0; nc];
        for (i, w) in self.quad.weights.iter().enumerate() {
            let v = w * values[i];
            for k in 0..nc {
                c[k] += v * self.y[i][k];
            }
        }
        c
    }

    /// Value of Σ c_lm Y_lm at an arbitrary unit vector.
    pub fn synth(&self, coeffs: &[f64], n: [f64; 3]) -> f64 {
        let y = ylm_all(self.lmax, n);
        coeffs.iter().zip(&y).map(|(c, y)| c * y).sum()
    }

    /// Surface gradient of Σ c_lm Y_lm at an arbitrary unit vector.
    pub fn synth_grad(&self, coeffs: &[f64], n: [f64; 3]) -> [f64; 3] {
        let g = ylm_grad_all(self.lmax, n);
        let mut out = [0.0; 3];
        for (c, gv) in coeffs.iter().zip(&g) {
            for i in 0..3 {
                out[i] += c * gv[i];
            }
        }
        out
    }

    /// Coefficients of Δ_{S²} f from those of f.
    pub fn laplace_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = coeffs.to_vec();
        for l in 0..=self.lmax {
            let eig = -((l * (l + 1)) as f64);
            for m in -(l as i32)..=(l as i32) {
                out[coeff_index(l, m)] *= eig;
            }
        }
        out
    }
}
