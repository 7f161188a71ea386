//! The symplectic structure of free fields in its three equal forms (null
//! data, Cauchy slice, test currents), its shift under asymptotic gauge
//! transformations, and the vacuum Fock layer built on it: the one-particle
//! scalar product, infrared-divergence detection, and coherent-shift checks
//! on a truncated mode basis.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::asymptotics::{FourierProfile, FreeFieldData};
use crate::celestial::{NullDirection, TangentField};
use crate::currents::{AsymptoteProfile, LimitFn};
use crate::error::{Error, Result};
use crate::numerics::extrap::limit_extrapolate;
use crate::numerics::gauss::gauss_legendre_on;
use crate::numerics::sgrid::line_rule;
use crate::numerics::sphere::SphereQuadrature;
use crate::vec4::{AntiSym, Vec4, ETA};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// {V₁,V₂} = (1/4π) ∫ (V̇₁·V₂ − V̇₂·V₁)(s,l) ds d²l.
///
/// The s integral runs over a composite Gauss rule on [−s_max, s_max]; the
/// discarded tail is estimated from the endpoint values and reported as a
/// divergence when it is not negligible.
pub fn symp_null(
    p1: &AsymptoteProfile,
    p2: &AsymptoteProfile,
    quad: &SphereQuadrature,
    s_max: f64,
) -> Result<f64> {
    let sphere = |s: f64| {
        let mut acc = 0.0;
        for (n, w) in quad.nodes.iter().zip(&quad.weights) {
            let dir = NullDirection::new(*n);
            acc += w
                * (p1.vdot(s, &dir).dot(&p2.v(s, &dir))
                    - p2.vdot(s, &dir).dot(&p1.v(s, &dir)));
        }
        acc
    };
    let (nodes, weights) = line_rule(s_max, 32, 8);
    let core: f64 = nodes.iter().zip(&weights).map(|(s, w)| w * sphere(*s)).sum();
    let estimate = (sphere(s_max).abs() + sphere(-s_max).abs()) * s_max;
    let threshold = 1e-6 * (core.abs() + 1.0);
    if estimate > threshold {
        return Err(Error::Divergent {
            estimate,
            threshold,
        });
    }
    Ok(core / FOUR_PI)
}

/// Potential and field strength of a free field at the spatial point x⃗ of
/// the t = 0 slice. The sphere integrals are taken with polar axis x̂ and the
/// substitution s = −r cosθ, so the s-band of the data is resolved by a line
/// rule at every radius (a fixed celestial rule loses the band once the
/// radius exceeds its resolution).
fn slice_fields(
    data: &FreeFieldData,
    xs: [f64; 3],
    s_band: f64,
    n_phi: usize,
    s_panels: usize,
) -> (Vec4, AntiSym) {
    let r = (xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]).sqrt();
    let axis = if r > 1e-12 {
        [xs[0] / r, xs[1] / r, xs[2] / r]
    } else {
        [0.0, 0.0, 1.0]
    };
    // orthonormal pair completing the axis
    let seed = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut e1 = [0.0; 3];
    let dot: f64 = seed[0] * axis[0] + seed[1] * axis[1] + seed[2] * axis[2];
    for k in 0..3 {
        e1[k] = seed[k] - dot * axis[k];
    }
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for v in e1.iter_mut() {
        *v /= n1;
    }
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    let (s_nodes, s_weights) = line_rule(s_band.min(r.max(1e-12)), s_panels, 6);
    let dphi = TWO_PI / n_phi as f64;
    let mut a = Vec4::ZERO;
    let mut f = AntiSym::ZERO;
    for (s, ws) in s_nodes.iter().zip(&s_weights) {
        let mu = if r > 1e-12 { -s / r } else { 0.0 };
        let st = (1.0 - mu * mu).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = dphi * k as f64;
            let (c, sn) = (phi.cos(), phi.sin());
            let mut n = [0.0; 3];
            for i in 0..3 {
                n[i] = mu * axis[i] + st * (c * e1[i] + sn * e2[i]);
            }
            let dir = NullDirection::new(n);
            // dΩ = dφ dμ with dμ = ds / r
            let w = ws * dphi / r.max(1e-12);
            a += data.profile.vdot(*s, &dir).scale(w);
            let l = dir.l();
            f = f.add(&AntiSym::wedge(&l, &data.profile.vddot(*s, &dir)).scale(w));
        }
    }
    (a.scale(-1.0 / TWO_PI), f.scale(-1.0 / TWO_PI))
}

/// σ(A₁,A₂) = (1/4π) ∫_{t=0} (F₁^{ab}A₂_b − F₂^{ab}A₁_b) dσ_a over a ball,
/// with the ball radius sent to infinity through the given schedule and
/// extrapolated. Returns (value, extrapolation error estimate).
///
/// Radial midpoint rule times a sphere quadrature; the fields are
/// reconstructed from their null data at every grid point. `s_band` bounds
/// the effective s-support of the data.
pub fn symp_cauchy(
    d1: &FreeFieldData,
    d2: &FreeFieldData,
    ang_order: usize,
    s_band: f64,
    radial_step: f64,
    ball_radii: &[f64],
) -> Result<(f64, f64)> {
    if radial_step <= 0.0 || ball_radii.len() < 3 {
        return Err(Error::InvalidSequence);
    }
    let ang = SphereQuadrature::new(ang_order)?;
    let n_phi = 2 * ang_order;
    let r_max = ball_radii.iter().cloned().fold(0.0_f64, f64::max);
    let mut cumulative: Vec<(f64, f64)> = Vec::new(); // (1/R, σ(R))
    let mut acc = 0.0;
    let mut schedule: Vec<f64> = ball_radii.to_vec();
    schedule.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next = 0;
    let mut j = 0;
    while next < schedule.len() {
        let r = (j as f64 + 0.5) * radial_step;
        if r > r_max {
            break;
        }
        let mut shell = 0.0;
        for (n, w) in ang.nodes.iter().zip(&ang.weights) {
            let xs = [r * n[0], r * n[1], r * n[2]];
            let (a1, f1) = slice_fields(d1, xs, s_band, n_phi, 10);
            let (a2, f2) = slice_fields(d2, xs, s_band, n_phi, 10);
            shell += w
                * (f1.contract_first(&Vec4::T).dot(&a2)
                    - f2.contract_first(&Vec4::T).dot(&a1));
        }
        acc += shell * r * r * radial_step;
        j += 1;
        while next < schedule.len() && (j as f64 + 0.5) * radial_step > schedule[next] {
            cumulative.push((1.0 / schedule[next], acc / FOUR_PI));
            next += 1;
        }
    }
    // ascending ball radii give strictly decreasing 1/R
    limit_extrapolate(&cumulative)
}

/// A conserved Gaussian test current J^a = M^{ab} ∂_b g with antisymmetric
/// moment M and g a spherically symmetric Gaussian bump in the Euclidean
/// metric of the chosen frame. Its null asymptote has a closed form.
pub struct TestCurrent {
    /// contravariant antisymmetric moment M^{ab}
    pub moment: AntiSym,
    pub center: Vec4,
    pub sigma: f64,
}

impl TestCurrent {
    pub fn new(moment: AntiSym, center: Vec4, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::InvalidWidth(sigma));
        }
        Ok(TestCurrent {
            moment,
            center,
            sigma,
        })
    }

    fn bump(&self, x: &Vec4) -> f64 {
        let mut r2 = 0.0;
        for a in 0..4 {
            let d = x[a] - self.center[a];
            r2 += d * d;
        }
        (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// J^a(x), contravariant components.
    pub fn current(&self, x: &Vec4) -> Vec4 {
        let g = self.bump(x);
        let mut out = Vec4::ZERO;
        for a in 0..4 {
            let mut s = 0.0;
            for b in 0..4 {
                s += self.moment.0[a][b] * (x[b] - self.center[b]);
            }
            out[a] = -s * g / (self.sigma * self.sigma);
        }
        out
    }

    /// The line profile G(s,l) = ∫ g(x) δ(s − x·l) dx of the bump and its
    /// first three s-derivatives; l may be any cone point.
    fn line_gaussian(&self, s: f64, l: &Vec4) -> [f64; 4] {
        let lam2: f64 = (0..4).map(|b| l.lower(b) * l.lower(b)).sum();
        let var = self.sigma * self.sigma * lam2;
        let u = s - self.center.dot(l);
        let norm = (TWO_PI * self.sigma * self.sigma).powi(2) / (TWO_PI * var).sqrt();
        let g = norm * (-u * u / (2.0 * var)).exp();
        let g1 = -u / var * g;
        let g2 = (u * u / var - 1.0) / var * g;
        let g3 = (3.0 * u / var - u * u * u / (var * var)) / var * g;
        [g, g1, g2, g3]
    }

    /// The null asymptote V^J_a(s,l) = [Σ_b M^{ab} l_b] G′(s,l) of the
    /// radiation field of this current, as a free-field profile.
    pub fn profile(&self) -> AsymptoteProfile {
        let polar = move |tc: &TestCurrent, l: &Vec4| {
            let mut p = Vec4::ZERO;
            for a in 0..4 {
                let mut s = 0.0;
                for b in 0..4 {
                    s += tc.moment.0[a][b] * l.lower(b);
                }
                p[a] = s;
            }
            p
        };
        let mk = |order: usize| {
            let tc = TestCurrent {
                moment: self.moment,
                center: self.center,
                sigma: self.sigma,
            };
            std::sync::Arc::new(move |s: f64, n: [f64; 3]| {
                let l = Vec4::from_spatial(1.0, n);
                let g = tc.line_gaussian(s, &l);
                polar(&tc, &l).scale(g[order])
            }) as crate::currents::VecFn
        };
        let zero: crate::currents::LimitFn = std::sync::Arc::new(|_| Vec4::ZERO);
        AsymptoteProfile::from_closures(
            mk(1),
            mk(2),
            mk(3),
            0.0,
            1.0,
            Some(zero.clone()),
            Some(zero),
        )
    }

    /// Radiation potential A_a(x) = −(1/2π) ∫ V̇^J(x·l, l) d²l, contravariant.
    pub fn radiation_potential(&self, x: &Vec4, quad: &SphereQuadrature) -> Vec4 {
        let p = self.profile();
        let mut acc = Vec4::ZERO;
        for (i, w) in quad.weights.iter().enumerate() {
            let l = quad.null_dir(i);
            acc += p.vdot_cone(x.dot(&l), &l).scale(*w);
        }
        acc.scale(-1.0 / TWO_PI)
    }
}

/// The current form of the symplectic structure.
pub struct CurrentFormReport {
    /// {J₁,J₂}_c = ½∫(J₁·A₂ − J₂·A₁) dx
    pub value: f64,
    /// ∫ J₁·A₂ dx (the local-current form up to sign conventions)
    pub j1_a2: f64,
    /// ∫ J₂·A₁ dx; for local currents −j2_a1 = j1_a2
    pub j2_a1: f64,
}

pub fn symp_current(
    j1: &TestCurrent,
    j2: &TestCurrent,
    quad: &SphereQuadrature,
    grid_points: usize,
) -> Result<CurrentFormReport> {
    if grid_points < 2 {
        return Err(Error::InvalidOrder(grid_points));
    }
    let pair = |ja: &TestCurrent, jb: &TestCurrent| {
        // ∫ J_a · A_b over the Gaussian support of J_a
        let half = 5.0 * ja.sigma;
        let mut rules = Vec::new();
        for a in 0..4 {
            rules.push(gauss_legendre_on(
                grid_points,
                ja.center[a] - half,
                ja.center[a] + half,
            ));
        }
        let mut acc = 0.0;
        for (i0, w0) in rules[0].0.iter().zip(&rules[0].1) {
            for (i1, w1) in rules[1].0.iter().zip(&rules[1].1) {
                for (i2, w2) in rules[2].0.iter().zip(&rules[2].1) {
                    for (i3, w3) in rules[3].0.iter().zip(&rules[3].1) {
                        let x = Vec4::new(*i0, *i1, *i2, *i3);
                        let v = ja.current(&x).dot(&jb.radiation_potential(&x, quad));
                        acc += w0 * w1 * w2 * w3 * v;
                    }
                }
            }
        }
        acc
    };
    let j1_a2 = pair(j1, j2);
    let j2_a1 = pair(j2, j1);
    Ok(CurrentFormReport {
        value: 0.5 * (j1_a2 - j2_a1),
        j1_a2,
        j2_a1,
    })
}

/// Behavior of the null form under the asymptotic gauge shift V_i ↦ V_i + V_i⁺:
/// recomputes the form on the shifted profiles and returns it together with
/// the predicted value {V₁,V₂} − (1/4π)∫[V₁(−∞)·V₂⁺ − V₂(−∞)·V₁⁺]d²l.
pub fn symp_shift_law(
    p1: &AsymptoteProfile,
    p2: &AsymptoteProfile,
    v1_plus: &TangentField,
    v2_plus: &TangentField,
    quad: &SphereQuadrature,
    s_max: f64,
) -> Result<(f64, f64)> {
    for v in [v1_plus, v2_plus] {
        if v.charge.abs() > 1e-10 {
            return Err(Error::ChargedField(v.charge));
        }
    }
    let base = symp_null(p1, p2, quad, s_max)?;
    let as_limit = |v: &TangentField| -> LimitFn {
        let v = v.clone();
        std::sync::Arc::new(move |n| v.at(&NullDirection::new(n)))
    };
    let s1 = p1.combine(1.0, &AsymptoteProfile::constant(as_limit(v1_plus), 0.0), 1.0);
    let s2 = p2.combine(1.0, &AsymptoteProfile::constant(as_limit(v2_plus), 0.0), 1.0);
    let shifted = symp_null(&s1, &s2, quad, s_max)?;
    let m1 = p1
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit of V₁ missing".into()))?;
    let m2 = p2
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit of V₂ missing".into()))?;
    let mut corr = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        corr += w
            * (m1.at(&dir).dot(&v2_plus.at(&dir)) - m2.at(&dir).dot(&v1_plus.at(&dir)));
    }
    Ok((shifted, base - corr / FOUR_PI))
}

fn mdot(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for c in 0..4 {
        s += ETA[c] * a[c].conj() * b[c];
    }
    s
}

/// One-particle scalar product
/// (Ṽ̇₁, Ṽ̇₂) = −∫ { ∫₀^∞ conj(Ṽ̇₁)·Ṽ̇₂ (ω,l) dω/ω } d²l.
///
/// Rejects infrared-singular input (nonvanishing ω → 0 limit of the paired
/// transforms) — the product diverges there; use [`fock_product_cutoff`].
pub fn fock_product(
    f1: &FourierProfile,
    f2: &FourierProfile,
    quad: &SphereQuadrature,
    omega_max: f64,
    omega_points: usize,
) -> Result<Complex64> {
    let mut zero = 0.0_f64;
    let mut scale = 0.0_f64;
    for n in &quad.nodes {
        let dir = NullDirection::new(*n);
        let (z1, z2) = (f1.zero_plus(&dir), f2.zero_plus(&dir));
        zero = zero.max(mdot(&z1, &z2).norm());
        let mag = |z: &[Complex64; 4]| z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        scale = scale.max(mag(&z1) + mag(&z2));
    }
    if zero > 1e-10 * (scale + 1.0) {
        return Err(Error::IrDivergence);
    }
    Ok(fock_product_cutoff(f1, f2, quad, 0.0, omega_max, omega_points))
}

/// The product truncated to ω ∈ [ω_min, ω_max]; no regularity gate.
pub fn fock_product_cutoff(
    f1: &FourierProfile,
    f2: &FourierProfile,
    quad: &SphereQuadrature,
    omega_min: f64,
    omega_max: f64,
    omega_points: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if omega_min > 0.0 {
        // log substitution flattens the near-singular 1/ω factor
        let (u, wu) = gauss_legendre_on(omega_points, omega_min.ln(), omega_max.ln());
        for (n, w) in quad.nodes.iter().zip(&quad.weights) {
            let dir = NullDirection::new(*n);
            for (uu, ww) in u.iter().zip(&wu) {
                let omega = uu.exp();
                acc += w * ww * mdot(&f1.value(omega, &dir), &f2.value(omega, &dir));
            }
        }
    } else {
        let (om, wo) = gauss_legendre_on(omega_points, 0.0, omega_max);
        for (n, w) in quad.nodes.iter().zip(&quad.weights) {
            let dir = NullDirection::new(*n);
            for (omega, ww) in om.iter().zip(&wo) {
                acc +=
                    w * ww / omega * mdot(&f1.value(*omega, &dir), &f2.value(*omega, &dir));
            }
        }
    }
    -acc
}

/// Infrared divergence scan of the self-product: values of the truncated
/// product over a cutoff schedule with the fit value = slope·ln(1/ω_min) + b.
pub struct IrScan {
    /// (ln(1/ω_min), truncated product) pairs
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub fit_residual: f64,
}

pub fn ir_divergence_scan(
    fp: &FourierProfile,
    quad: &SphereQuadrature,
    omega_mins: &[f64],
    omega_max: f64,
    omega_points: usize,
) -> Result<IrScan> {
    if omega_mins.len() < 3 || omega_mins.iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidSequence);
    }
    let points: Vec<(f64, f64)> = omega_mins
        .iter()
        .map(|wm| {
            let v = fock_product_cutoff(fp, fp, quad, *wm, omega_max, omega_points);
            ((1.0 / wm).ln(), v.re)
        })
        .collect();
    // least squares y = slope·x + intercept
    let n = points.len() as f64;
    let (sx, sy): (f64, f64) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (sxx, sxy): (f64, f64) = points
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::InvalidSequence);
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let fit_residual = points
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0_f64, f64::max);
    Ok(IrScan {
        points,
        slope,
        intercept,
        fit_residual,
    })
}

// ---------------------------------------------------------------------------
// truncated mode scaffold

fn cholesky(g: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = g.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                if s.re <= 0.0 || s.im.abs() > 1e-10 * (1.0 + s.re) {
                    return None;
                }
                l[i][j] = Complex64::new(s.re.sqrt(), 0.0);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn lower_inverse(l: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = l.len();
    let mut inv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        inv[i][i] = Complex64::new(1.0, 0.0) / l[i][i];
        for j in 0..i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..i {
                s += l[i][k] * inv[k][j];
            }
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

/// An orthonormal mode family for the one-particle space, built from
/// generator free fields by Cholesky orthonormalization of their Gram matrix
/// in the one-particle product. All generators must be infrared regular.
pub struct ModeBasis {
    transforms: Vec<FourierProfile>,
    /// e_k = Σ_i coeff[k][i] g_i
    coeff: Vec<Vec<Complex64>>,
    pub gram_residual: f64,
    quad: SphereQuadrature,
    omega_max: f64,
    omega_points: usize,
}

impl ModeBasis {
    pub fn new(
        generators: &[FreeFieldData],
        quad: SphereQuadrature,
        omega_max: f64,
        omega_points: usize,
        s_max: f64,
        s_samples: usize,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidSequence);
        }
        let grid = [-1.0, 0.0, 1.0];
        let transforms: Result<Vec<FourierProfile>> = generators
            .iter()
            .map(|g| crate::asymptotics::fourier_profile(g, &grid, s_max, s_samples))
            .collect();
        let transforms = transforms?;
        let n = transforms.len();
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = fock_product(
                    &transforms[i],
                    &transforms[j],
                    &quad,
                    omega_max,
                    omega_points,
                )?;
            }
        }
        let l = cholesky(&gram).ok_or(Error::BasisTooSmall(f64::NAN))?;
        // e_k = Σ_i C_ki g_i is orthonormal iff conj(C) G Cᵀ = I, since the
        // product is conjugate-linear in its first slot; C = conj(L⁻¹).
        let coeff: Vec<Vec<Complex64>> = lower_inverse(&l)
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.conj()).collect())
            .collect();
        let mut res = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += coeff[a][i].conj() * gram[i][j] * coeff[b][j];
                    }
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                res = res.max((s - expect).norm());
            }
        }
        Ok(ModeBasis {
            transforms,
            coeff,
            gram_residual: res,
            quad,
            omega_max,
            omega_points,
        })
    }

    pub fn len(&self) -> usize {
        self.coeff.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeff.is_empty()
    }

    /// Coordinates v_k = (e_k, f) of a transform in the basis, and the
    /// squared norm left outside the span, ‖f‖² − Σ|v_k|².
    pub fn project(&self, f: &FourierProfile) -> Result<(Vec<Complex64>, f64)> {
        let n = self.len();
        let mut raw = Vec::with_capacity(n);
        for t in &self.transforms {
            raw.push(fock_product(t, f, &self.quad, self.omega_max, self.omega_points)?);
        }
        let norm2 = fock_product(f, f, &self.quad, self.omega_max, self.omega_points)?.re;
        let mut coords = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                s += self.coeff[k][i].conj() * raw[i];
            }
            coords.push(s);
        }
        let inside: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        Ok((coords, norm2 - inside))
    }
}

// dense complex matrices for the truncated Fock space

type CMat = Vec<Vec<Complex64>>;

fn cmat_zero(d: usize) -> CMat {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

fn cmat_eye(d: usize) -> CMat {
    let mut m = cmat_zero(d);
    for i in 0..d {
        m[i][i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn cmat_mul(a: &CMat, b: &CMat) -> CMat {
    let d = a.len();
    let mut out = cmat_zero(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn cmat_dagger(a: &CMat) -> CMat {
    let d = a.len();
    let mut out = cmat_zero(d);
    for i in 0..d {
        for j in 0..d {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn cmat_norm(a: &CMat) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// exp(A) by scaling and squaring with a Taylor core.
fn cmat_exp(a: &CMat) -> CMat {
    let d = a.len();
    let norm = cmat_norm(a) * d as f64;
    let s = norm.log2().ceil().max(0.0) as u32;
    let scale = 1.0 / 2f64.powi(s as i32);
    let mut term = cmat_eye(d);
    let mut out = cmat_eye(d);
    for k in 1..=24 {
        let mut next = cmat_mul(&term, a);
        for row in next.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale / k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                out[i][j] += next[i][j];
            }
        }
        term = next;
    }
    for _ in 0..s {
        out = cmat_mul(&out, &out);
    }
    out
}

/// Bosonic occupation-number space over N modes with total occupation ≤ M.
struct FockSpace {
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockSpace {
    fn new(modes: usize, cutoff: usize) -> Self {
        let mut states = Vec::new();
        let mut cur = vec![0u8; modes];
        fill(&mut states, &mut cur, 0, cutoff);
        fn fill(states: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, mode: usize, left: usize) {
            if mode == cur.len() {
                states.push(cur.clone());
                return;
            }
            for n in 0..=left {
                cur[mode] = n as u8;
                fill(states, cur, mode + 1, left - n);
            }
            cur[mode] = 0;
        }
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        FockSpace { states, index }
    }

    fn dim(&self) -> usize {
        self.states.len()
    }

    /// Field operator Φ = Σ_k conj(v_k) a_k + v_k a†_k.
    fn field(&self, coords: &[Complex64]) -> CMat {
        let d = self.dim();
        let mut m = cmat_zero(d);
        for (row, st) in self.states.iter().enumerate() {
            for (k, v) in coords.iter().enumerate() {
                let n = st[k] as f64;
                // annihilation: ⟨st − e_k| a_k |st⟩ = √n
                if st[k] > 0 {
                    let mut dst = st.clone();
                    dst[k] -= 1;
                    if let Some(col) = self.index.get(&dst) {
                        m[*col][row] += v.conj() * n.sqrt();
                    }
                }
                // creation: ⟨st + e_k| a†_k |st⟩ = √(n+1), dropped past cutoff
                let mut dst = st.clone();
                dst[k] += 1;
                if let Some(col) = self.index.get(&dst) {
                    m[*col][row] += v * (n + 1.0).sqrt();
                }
            }
        }
        m
    }
}

/// Result of the coherent-shift identity
/// exp(iΦ(V₁)) Φ(V) exp(−iΦ(V₁)) = Φ(V) + {V,V₁} on the truncated space.
pub struct CoherentReport {
    /// sup-norm of the matrix identity residual over the low-occupation
    /// block (total occupation ≤ half the cutoff). The truncation surface
    /// itself cannot satisfy the identity — the commutator of the truncated
    /// ladder operators is wrong on the top layer — but its influence on the
    /// low block shrinks rapidly with the cutoff.
    pub residual: f64,
    /// vacuum mean of the conjugated operator
    pub vacuum_mean: f64,
    /// {V,V₁} evaluated from the mode coordinates
    pub expected_shift: f64,
    /// one-particle norm squared of V and V₁ left outside the basis span
    pub projection_residual: f64,
    pub dimension: usize,
}

pub fn coherent_shift_check(
    basis: &ModeBasis,
    v: &FreeFieldData,
    v1: &FreeFieldData,
    occupation_cutoff: usize,
    projection_tol: f64,
    s_max: f64,
    s_samples: usize,
) -> Result<CoherentReport> {
    let grid = [-1.0, 0.0, 1.0];
    let fv = crate::asymptotics::fourier_profile(v, &grid, s_max, s_samples)?;
    let fv1 = crate::asymptotics::fourier_profile(v1, &grid, s_max, s_samples)?;
    let (cv, rv) = basis.project(&fv)?;
    let (cw, rw) = basis.project(&fv1)?;
    let norm_scale = cv.iter().chain(&cw).map(|c| c.norm_sqr()).sum::<f64>() + 1.0;
    let projection_residual = rv.abs().max(rw.abs());
    if projection_residual > projection_tol * norm_scale {
        return Err(Error::BasisTooSmall(projection_residual));
    }
    // {V,V₁} = −i[(v,w) − (w,v)] restricted to the span
    let z: Complex64 = cv
        .iter()
        .zip(&cw)
        .map(|(a, b)| a.conj() * b)
        .sum();
    let expected_shift = 2.0 * z.im;
    let space = FockSpace::new(basis.len(), occupation_cutoff);
    let phi = space.field(&cv);
    let phi1 = space.field(&cw);
    let d = space.dim();
    let mut iphi1 = cmat_zero(d);
    for i in 0..d {
        for j in 0..d {
            iphi1[i][j] = Complex64::new(0.0, 1.0) * phi1[i][j];
        }
    }
    let u = cmat_exp(&iphi1);
    let conj = cmat_mul(&cmat_mul(&u, &phi), &cmat_dagger(&u));
    let low_block = occupation_cutoff / 2;
    let occ: Vec<usize> = space
        .states
        .iter()
        .map(|s| s.iter().map(|n| *n as usize).sum())
        .collect();
    let mut residual = 0.0_f64;
    for i in 0..d {
        if occ[i] > low_block {
            continue;
        }
        for j in 0..d {
            if occ[j] > low_block {
                continue;
            }
            let expect = phi[i][j]
                + if i == j {
                    Complex64::new(expected_shift, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            residual = residual.max((conj[i][j] - expect).norm());
        }
    }
    // vacuum state is the all-zero occupation vector
    let vac = space.index[&vec![0u8; basis.len()]];
    Ok(CoherentReport {
        residual,
        vacuum_mean: conj[vac][vac].re,
        expected_shift,
        projection_residual,
        dimension: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celestial::Homogeneous;
    use crate::currents::{LimitFn, VecFn};
    use std::sync::Arc;

    fn quad() -> SphereQuadrature {
        SphereQuadrature::new(16).unwrap()
    }

    /// V(s,l) = (c·n, c⃗) f(s) with closures for f, f′, f″.
    fn polarized_profile(
        c: [f64; 3],
        f: fn(f64) -> f64,
        fd: fn(f64) -> f64,
        fdd: fn(f64) -> f64,
    ) -> AsymptoteProfile {
        let mk = |g: fn(f64) -> f64| -> VecFn {
            Arc::new(move |s, n| {
                let t = Vec4::new(
                    c[0] * n[0] + c[1] * n[1] + c[2] * n[2],
                    c[0],
                    c[1],
                    c[2],
                );
                t.scale(g(s))
            })
        };
        let zero: LimitFn = Arc::new(|_| Vec4::ZERO);
        AsymptoteProfile::from_closures(
            mk(f),
            mk(fd),
            mk(fdd),
            0.0,
            1.0,
            Some(zero.clone()),
            Some(zero),
        )
    }

    fn gauss0(s: f64) -> f64 {
        (-s * s / 2.0).exp()
    }
    fn gauss1(s: f64) -> f64 {
        -s * (-s * s / 2.0).exp()
    }
    fn gauss2(s: f64) -> f64 {
        (s * s - 1.0) * (-s * s / 2.0).exp()
    }
    fn sgauss0(s: f64) -> f64 {
        s * (-s * s / 2.0).exp()
    }
    fn sgauss1(s: f64) -> f64 {
        (1.0 - s * s) * (-s * s / 2.0).exp()
    }
    fn sgauss2(s: f64) -> f64 {
        s * (s * s - 3.0) * (-s * s / 2.0).exp()
    }

    #[test]
    fn null_form_antisymmetric_and_matches_closed_form() {
        let c1 = [0.4, -0.2, 0.7];
        let c2 = [0.1, 0.5, -0.3];
        let p1 = polarized_profile(c1, gauss0, gauss1, gauss2);
        let p2 = polarized_profile(c2, sgauss0, sgauss1, sgauss2);
        let q = quad();
        let self_val = symp_null(&p1, &p1, &q, 12.0).unwrap();
        assert!(self_val.abs() < 1e-12);
        let v12 = symp_null(&p1, &p2, &q, 12.0).unwrap();
        let v21 = symp_null(&p2, &p1, &q, 12.0).unwrap();
        assert!((v12 + v21).abs() < 1e-12);
        // ∫T₁·T₂ d²l = −(8π/3) c₁·c₂ and ∫(ḟ₁f₂ − ḟ₂f₁)ds = −√π for this pair
        let cdot: f64 = c1.iter().zip(&c2).map(|(a, b)| a * b).sum();
        let expect = (2.0 * std::f64::consts::PI.sqrt() / 3.0) * cdot;
        assert!((v12 - expect).abs() < 1e-8, "v12 = {v12}, expect = {expect}");
    }

    #[test]
    fn null_form_gauge_invariant() {
        let p1 = polarized_profile([0.4, -0.2, 0.7], gauss0, gauss1, gauss2);
        let p2 = polarized_profile([0.1, 0.5, -0.3], sgauss0, sgauss1, sgauss2);
        let q = quad();
        let base = symp_null(&p1, &p2, &q, 12.0).unwrap();
        // add a pure-l part α(s,l)·l to V₁
        let shift_v: VecFn = Arc::new(move |s, n| {
            Vec4::from_spatial(1.0, n).scale((1.0 + 0.3 * n[2]) * gauss0(s))
        });
        let shift_vd: VecFn = Arc::new(move |s, n| {
            Vec4::from_spatial(1.0, n).scale((1.0 + 0.3 * n[2]) * gauss1(s))
        });
        let shift_vdd: VecFn = Arc::new(move |s, n| {
            Vec4::from_spatial(1.0, n).scale((1.0 + 0.3 * n[2]) * gauss2(s))
        });
        let zero: LimitFn = Arc::new(|_| Vec4::ZERO);
        let shift = AsymptoteProfile::from_closures(
            shift_v,
            shift_vd,
            shift_vdd,
            0.0,
            1.0,
            Some(zero.clone()),
            Some(zero),
        );
        let shifted = p1.combine(1.0, &shift, 1.0);
        let val = symp_null(&shifted, &p2, &q, 12.0).unwrap();
        assert!((val - base).abs() < 1e-10, "val = {val}, base = {base}");
    }

    #[test]
    fn null_form_divergence_detection() {
        // two algebraically decaying profiles with a common polarization:
        // the pair integrand falls off like 1/(1 + s²) and the discarded
        // tail is flagged
        let embed = |f: fn(f64) -> f64| -> VecFn {
            Arc::new(move |s, n| Vec4::new(n[0], 1.0, 0.0, 0.0).scale(f(s)))
        };
        let p = AsymptoteProfile::from_closures(
            embed(|s| 1.0 / (1.0 + s * s).sqrt()),
            embed(|s| -s / (1.0 + s * s).powf(1.5)),
            embed(|s| (2.0 * s * s - 1.0) / (1.0 + s * s).powf(2.5)),
            0.0,
            0.5,
            None,
            None,
        );
        let q_prof = AsymptoteProfile::from_closures(
            embed(|s| s / (1.0 + s * s).sqrt()),
            embed(|s| 1.0 / (1.0 + s * s).powf(1.5)),
            embed(|s| -3.0 * s / (1.0 + s * s).powf(2.5)),
            0.0,
            0.5,
            None,
            None,
        );
        assert!(matches!(
            symp_null(&p, &q_prof, &quad(), 12.0),
            Err(Error::Divergent { .. })
        ));
        // against a rapidly decaying partner the integrand is fine
        let p2 = polarized_profile([1.0, 0.0, 0.0], gauss0, gauss1, gauss2);
        assert!(symp_null(&p, &p2, &quad(), 12.0).is_ok());
    }

    #[test]
    fn cauchy_form_matches_null_form() {
        let ang1 = Homogeneous::new(0, |n: [f64; 3]| 1.0 + 0.2 * n[2]);
        let d1 = FreeFieldData::mode_sech([0.5, -0.3, 0.2], 0.0, 1.2, Some(ang1)).unwrap();
        let d2 = FreeFieldData::mode_sech([-0.2, 0.4, 0.3], 0.5, 1.0, None).unwrap();
        let q = SphereQuadrature::new(24).unwrap();
        let null_val = symp_null(&d1.profile, &d2.profile, &q, 25.0).unwrap();
        let (cauchy, _err) =
            symp_cauchy(&d1, &d2, 12, 20.0, 0.5, &[8.0, 16.0, 32.0]).unwrap();
        assert!(
            (cauchy - null_val).abs() < 1e-3,
            "cauchy = {cauchy}, null = {null_val}"
        );
    }

    #[test]
    fn current_form_matches_null_form() {
        let m1 = AntiSym::wedge(&Vec4::new(1.0, 0.0, 0.0, 0.0), &Vec4::new(0.0, 1.0, 0.0, 0.0));
        let m2 = AntiSym::wedge(&Vec4::new(0.0, 0.0, 1.0, 0.0), &Vec4::new(0.0, 1.0, 0.0, 1.0));
        let j1 = TestCurrent::new(m1, Vec4::new(0.0, 0.3, -0.2, 0.1), 0.8).unwrap();
        let j2 = TestCurrent::new(m2, Vec4::new(0.4, -0.1, 0.2, 0.0), 0.7).unwrap();
        let q = SphereQuadrature::new(20).unwrap();
        let rep = symp_current(&j1, &j2, &q, 20).unwrap();
        // local conserved currents: the two orderings are equal up to sign
        assert!(
            (rep.j1_a2 + rep.j2_a1).abs() < 1e-4 * (1.0 + rep.j1_a2.abs()),
            "{} vs {}",
            rep.j1_a2,
            rep.j2_a1
        );
        let null_val = symp_null(&j1.profile(), &j2.profile(), &q, 30.0).unwrap();
        assert!(
            (rep.value - null_val).abs() < 1e-3 * (1.0 + null_val.abs()),
            "current = {}, null = {null_val}",
            rep.value
        );
        let self_rep = symp_current(&j1, &j1, &q, 10).unwrap();
        assert!(self_rep.value.abs() < 1e-10);
    }

    #[test]
    fn shift_law_identity() {
        let b = crate::numerics::sphharm::SphereBasis::new(SphereQuadrature::new(24).unwrap(), 12);
        let d1 = FreeFieldData::mode_step([0.5, -0.3, 0.2], 0.0, 1.2, None).unwrap();
        let d2 = FreeFieldData::mode_step([-0.2, 0.4, 0.3], 0.5, 1.0, None).unwrap();
        let mk_plus = |c: f64| {
            let phi = Homogeneous::new(0, move |n: [f64; 3]| c * (n[2] + 0.4 * n[0] * n[1]));
            let vals: Vec<f64> = b
                .quad
                .nodes
                .iter()
                .map(|n| phi.at(&NullDirection::new(*n)))
                .collect();
            let coeffs = b.analyze(&vals);
            let nc = coeffs.len();
            crate::celestial::tangent_from_potentials(&b, coeffs, vec![0.0; nc], None, 0.0)
        };
        let v1p = mk_plus(0.7);
        let v2p = mk_plus(-0.4);
        let q = quad();
        let (shifted, predicted) =
            symp_shift_law(&d1.profile, &d2.profile, &v1p, &v2p, &q, 25.0).unwrap();
        assert!(
            (shifted - predicted).abs() < 1e-6 * (1.0 + predicted.abs()),
            "shifted = {shifted}, predicted = {predicted}"
        );
        // zero shift is the identity
        let zero = TangentField::new(0.0, |_| Vec4::ZERO);
        let base = symp_null(&d1.profile, &d2.profile, &q, 25.0).unwrap();
        let (s0, p0) = symp_shift_law(&d1.profile, &d2.profile, &zero, &zero, &q, 25.0).unwrap();
        assert!((s0 - base).abs() < 1e-12 && (p0 - base).abs() < 1e-12);
        // the correction changes sign under swapping the pair
        let (s12, p12) = symp_shift_law(&d1.profile, &d2.profile, &v1p, &v2p, &q, 25.0).unwrap();
        let (s21, p21) = symp_shift_law(&d2.profile, &d1.profile, &v2p, &v1p, &q, 25.0).unwrap();
        assert!((s12 + s21).abs() < 1e-10);
        assert!((p12 + p21).abs() < 1e-10);
    }

    fn sech_data(c: [f64; 3], center: f64, width: f64, tilt: f64) -> FreeFieldData {
        let ang = Homogeneous::new(0, move |n: [f64; 3]| 1.0 + tilt * n[2]);
        FreeFieldData::mode_sech(c, center, width, Some(ang)).unwrap()
    }

    #[test]
    fn fock_commutator_matches_null_form() {
        let d1 = sech_data([0.5, -0.3, 0.2], 0.0, 1.2, 0.2);
        let d2 = sech_data([-0.2, 0.4, 0.3], 0.7, 1.0, -0.3);
        let grid = [-1.0, 0.0, 1.0];
        let f1 = crate::asymptotics::fourier_profile(&d1, &grid, 30.0, 2000).unwrap();
        let f2 = crate::asymptotics::fourier_profile(&d2, &grid, 30.0, 2000).unwrap();
        let q = quad();
        let p12 = fock_product(&f1, &f2, &q, 30.0, 300).unwrap();
        let p21 = fock_product(&f2, &f1, &q, 30.0, 300).unwrap();
        let null_val = symp_null(&d1.profile, &d2.profile, &q, 30.0).unwrap();
        let lhs = p12 - p21;
        let rhs = Complex64::new(0.0, null_val);
        assert!((lhs - rhs).norm() < 1e-6, "lhs = {lhs}, rhs = {rhs}");
        // self-products of regular profiles are nonnegative
        assert!(fock_product(&f1, &f1, &q, 30.0, 300).unwrap().re >= 0.0);
        assert!(fock_product(&f2, &f2, &q, 30.0, 300).unwrap().re >= 0.0);
    }

    #[test]
    fn fock_product_rejects_ir_singular() {
        let d = FreeFieldData::mode_step([0.4, 0.0, 0.1], 0.0, 1.0, None).unwrap();
        let grid = [-1.0, 0.0, 1.0];
        let f = crate::asymptotics::fourier_profile(&d, &grid, 30.0, 2000).unwrap();
        assert!(matches!(
            fock_product(&f, &f, &quad(), 30.0, 300),
            Err(Error::IrDivergence)
        ));
    }

    #[test]
    fn ir_scan_slope_matches_zero_mode() {
        let d = FreeFieldData::mode_step([0.4, -0.2, 0.1], 0.0, 1.0, None).unwrap();
        let grid = [-1.0, 0.0, 1.0];
        let f = crate::asymptotics::fourier_profile(&d, &grid, 40.0, 3000).unwrap();
        let q = quad();
        let mins: Vec<f64> = (0..6).map(|k| 1e-3 / 2f64.powi(k)).collect();
        let scan = ir_divergence_scan(&f, &q, &mins, 40.0, 400).unwrap();
        // expected slope: −∫ conj(Ṽ̇(0))·Ṽ̇(0) d²l
        let mut expect = 0.0;
        for (n, w) in q.nodes.iter().zip(&q.weights) {
            let z = f.zero_plus(&NullDirection::new(*n));
            expect -= w * mdot(&z, &z).re;
        }
        assert!(
            (scan.slope - expect).abs() < 0.05 * expect.abs(),
            "slope = {}, expect = {expect}",
            scan.slope
        );
    }

    #[test]
    fn mode_basis_orthonormal() {
        let gens = vec![
            sech_data([0.4, 0.0, 0.0], 0.0, 1.0, 0.0),
            sech_data([0.0, 0.4, 0.0], 0.5, 1.2, 0.3),
            sech_data([0.0, 0.0, 0.4], -0.5, 0.8, -0.2),
            sech_data([0.3, 0.3, 0.0], 1.0, 1.1, 0.0),
        ];
        let basis = ModeBasis::new(&gens, quad(), 30.0, 300, 30.0, 2000).unwrap();
        assert_eq!(basis.len(), 4);
        assert!(basis.gram_residual < 1e-8, "residual = {}", basis.gram_residual);
    }

    #[test]
    fn coherent_shift_identity() {
        // overlapping polarizations and offset centers so the mode brackets
        // {V_i, V_j} do not vanish by parity
        let gens = vec![
            sech_data([0.4, 0.0, 0.0], 0.0, 1.0, 0.0),
            sech_data([0.3, 0.3, 0.0], 0.5, 1.2, 0.3),
            sech_data([0.0, 0.2, 0.4], -0.5, 0.8, -0.2),
        ];
        let basis = ModeBasis::new(
            &gens,
            SphereQuadrature::new(12).unwrap(),
            30.0,
            160,
            30.0,
            400,
        )
        .unwrap();
        // small combinations of the generators stay inside the span
        let v = FreeFieldData::new(
            gens[0].profile.combine(0.10, &gens[1].profile, 0.05),
        )
        .unwrap();
        let v1 = FreeFieldData::new(
            gens[1].profile.combine(0.08, &gens[2].profile, -0.06),
        )
        .unwrap();
        let rep6 = coherent_shift_check(&basis, &v, &v1, 6, 1e-4, 30.0, 400).unwrap();
        assert!(
            rep6.expected_shift.abs() > 1e-6,
            "shift should be nontrivial: {}",
            rep6.expected_shift
        );
        assert!(rep6.residual < 1e-6, "residual = {:e}", rep6.residual);
        assert!(
            (rep6.vacuum_mean - rep6.expected_shift).abs() < 1e-6,
            "vacuum = {}, expect = {}",
            rep6.vacuum_mean,
            rep6.expected_shift
        );
        let rep4 = coherent_shift_check(&basis, &v, &v1, 4, 1e-4, 30.0, 400).unwrap();
        assert!(rep6.residual <= rep4.residual + 1e-12);
        // trivial shift
        let z = FreeFieldData::new(AsymptoteProfile::zero()).unwrap();
        let rep0 = coherent_shift_check(&basis, &v, &z, 6, 1e-4, 30.0, 400).unwrap();
        assert!(rep0.residual < 1e-10 && rep0.expected_shift.abs() < 1e-12);
    }

    #[test]
    fn coherent_shift_rejects_out_of_span() {
        let gens = vec![sech_data([0.4, 0.0, 0.0], 0.0, 1.0, 0.0)];
        let basis = ModeBasis::new(&gens, quad(), 30.0, 300, 30.0, 2000).unwrap();
        let outside = sech_data([0.0, 0.0, 0.5], 2.0, 0.6, 0.4);
        assert!(matches!(
            coherent_shift_check(&basis, &outside, &gens[0], 4, 1e-8, 30.0, 2000),
            Err(Error::BasisTooSmall(_))
        ));
    }
}
