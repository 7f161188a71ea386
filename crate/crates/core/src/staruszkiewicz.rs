//! The spacelike-infinity theory of the electromagnetic field: the
//! degree-zero phase field S(x) built from celestial data (D, c), its
//! field strength in the region x² < 0, the charge decomposition of c on
//! the sphere, the symplectic pairing ⟨D,c⟩, the quantized-charge Weyl
//! group, and the Casimir diagnostics of the charged Lorentz representation.

use std::sync::Arc;

use crate::celestial::{invariant_integral, Homogeneous, NullDirection};
use crate::error::{Error, Result};
use crate::numerics::extrap::limit_extrapolate;
use crate::numerics::gauss::gauss_legendre_on;
use crate::numerics::mollify::{log_smooth, sgn_smooth};
use crate::numerics::sphere::{spatial_triad, SphereQuadrature};
use crate::numerics::sphharm::SphereBasis;
use crate::vec4::{AntiSym, Vec4};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Quantization tolerance: Q(c) must lie in eℤ within this accuracy.
const QUANT_TOL: f64 = 1e-8;

/// Celestial data of the phase field: D homogeneous of degree 0, c of
/// degree −2, and the elementary charge e. The charge Q(c) = (1/4π)∫c d²l
/// must be an integer multiple of e.
#[derive(Clone)]
pub struct StarData {
    pub d: Homogeneous,
    pub c: Homogeneous,
    pub e: f64,
    /// Q(c), fixed at construction.
    pub charge: f64,
}

fn check_degrees(d: &Homogeneous, c: &Homogeneous) -> Result<()> {
    if d.degree != 0 {
        return Err(Error::DegreeMismatch {
            expected: 0,
            got: d.degree,
        });
    }
    if c.degree != -2 {
        return Err(Error::DegreeMismatch {
            expected: -2,
            got: c.degree,
        });
    }
    Ok(())
}

fn check_quantized(q: f64, e: f64) -> Result<()> {
    let ratio = q / e;
    if (ratio - ratio.round()).abs() >= QUANT_TOL {
        return Err(Error::QuantizationViolation { q, e });
    }
    Ok(())
}

impl StarData {
    pub fn new(d: Homogeneous, c: Homogeneous, e: f64, quad: &SphereQuadrature) -> Result<Self> {
        check_degrees(&d, &c)?;
        if e <= 0.0 || !e.is_finite() {
            return Err(Error::InvalidCoupling(e));
        }
        let charge = invariant_integral(&c, quad)? / FOUR_PI;
        check_quantized(charge, e)?;
        Ok(StarData { d, c, e, charge })
    }
}

/// Orthonormal pair completing a unit 3-vector to a right-handed frame.
fn complete_frame(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let seed = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let dot: f64 = seed[0] * axis[0] + seed[1] * axis[1] + seed[2] * axis[2];
    let mut e1 = [0.0; 3];
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
    (e1, e2)
}

/// Panel edges for the kernel variable s = x·l on [lo, hi], geometrically
/// refined toward s = 0 so the sgn/log/pole kernels are resolved.
fn kernel_panels(lo: f64, hi: f64) -> Vec<f64> {
    let scale = lo.abs().max(hi.abs());
    let h0 = 1e-9 * scale;
    let mut edges = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        edges.push(0.0);
        let mut h = h0;
        while h < hi {
            edges.push(h);
            h *= 2.0;
        }
        let mut h = -h0;
        while h > lo {
            edges.push(h);
            h *= 2.0;
        }
    } else {
        // single-signed range: a few uniform refinements toward the near end
        let near = if lo.abs() < hi.abs() { lo } else { hi };
        let mut h = (hi - lo) / 2.0;
        let mut edge = near;
        let away = 1.0 - 2.0 * ((near == lo) as i32) as f64; // −1 from hi, +1 from lo
        for _ in 0..20 {
            edge += away * h;
            if edge > lo && edge < hi {
                edges.push(edge);
            }
            h /= 2.0;
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges
}

/// Evaluator for the phase field and its field strength; holds the
/// spherical-harmonic analysis of D so ∂²D is available in closed spectral
/// form. The realization of ∂² on degree-0 data is minus the unit-sphere
/// Laplacian of the section restriction (the sign is fixed by
/// v-independence of S together with the identity
/// ∂² log(v·l) = −1/(v·l)² + 1/(t·l)²).
pub struct StarField {
    pub data: StarData,
    basis: SphereBasis,
    /// coefficients of ∂²D in the canonical frame
    ddsq: Vec<f64>,
}

impl StarField {
    pub fn new(data: StarData, lmax: usize) -> Result<Self> {
        let quad = SphereQuadrature::new(lmax + 2)?;
        let basis = SphereBasis::new(quad, lmax);
        let values: Vec<f64> = basis
            .quad
            .nodes
            .iter()
            .map(|n| data.d.at(&NullDirection::new(*n)))
            .collect();
        let d_coeffs = basis.analyze(&values);
        let ddsq = basis
            .laplace_coeffs(&d_coeffs)
            .into_iter()
            .map(|c| -c)
            .collect();
        Ok(StarField { data, basis, ddsq })
    }

    /// (∂²D)(l) at the canonical section point l = (1, n).
    fn ddsq_at(&self, n: [f64; 3]) -> f64 {
        self.basis.synth(&self.ddsq, n)
    }

    /// S_v = (e/4π)∫ D/(v·l)² d²l.
    fn s_v(&self, v: &Vec4) -> f64 {
        let mut acc = 0.0;
        for (n, w) in self.basis.quad.nodes.iter().zip(&self.basis.quad.weights) {
            let l = Vec4::from_spatial(1.0, *n);
            acc += w * self.data.d.at(&NullDirection::new(*n)) / v.dot(&l).powi(2);
        }
        acc * self.data.e / FOUR_PI
    }

    /// The phase field
    /// S(x) = −(e/4π)∫{c·sgn(x·l) + ∂²D·log(|x·l|/(v·l))}d²l + S_v,
    /// for x off the light cone; independent of the auxiliary four-velocity
    /// v and homogeneous of degree 0.
    pub fn s_field(&self, v: &Vec4, x: &Vec4) -> Result<f64> {
        if (v.norm2() - 1.0).abs() > 1e-8 || v[0] <= 0.0 {
            return Err(Error::InvalidVelocity);
        }
        let x2 = x.norm2();
        let scale2 = x.euclid_norm().powi(2);
        if x2.abs() < 1e-8 * scale2 {
            return Err(Error::OutOfDomain(
                "phase field evaluated too close to the light cone".into(),
            ));
        }
        let r = x.spatial().iter().map(|c| c * c).sum::<f64>().sqrt();
        let width = 1e-9 * (x[0].abs() + r);
        let kernel = |s: f64, n: [f64; 3]| {
            let dir = NullDirection::new(n);
            let l = Vec4::from_spatial(1.0, n);
            self.data.c.at(&dir) * sgn_smooth(s, width)
                + self.ddsq_at(n) * (log_smooth(s, width) - v.dot(&l).ln())
        };
        let mut acc = 0.0;
        if r < 1e-12 * x[0].abs() {
            // purely timelike: x·l = x⁰ on the whole sphere
            for (n, w) in self.basis.quad.nodes.iter().zip(&self.basis.quad.weights) {
                acc += w * kernel(x[0], *n);
            }
        } else {
            let axis = [x[1] / r, x[2] / r, x[3] / r];
            let (e1, e2) = complete_frame(axis);
            let n_phi = 2 * self.basis.quad.order;
            let dphi = TWO_PI / n_phi as f64;
            let edges = kernel_panels(x[0] - r, x[0] + r);
            for pair in edges.windows(2) {
                let (s_nodes, s_weights) = gauss_legendre_on(8, pair[0], pair[1]);
                for (s, ws) in s_nodes.iter().zip(&s_weights) {
                    let mu = ((x[0] - s) / r).clamp(-1.0, 1.0);
                    let st = (1.0 - mu * mu).max(0.0).sqrt();
                    for k in 0..n_phi {
                        let phi = dphi * k as f64;
                        let (cp, sp) = (phi.cos(), phi.sin());
                        let mut n = [0.0; 3];
                        for i in 0..3 {
                            n[i] = mu * axis[i] + st * (cp * e1[i] + sp * e2[i]);
                        }
                        // dΩ = dφ dμ, dμ = ds / r
                        acc += ws * dphi / r * kernel(*s, n);
                    }
                }
            }
        }
        Ok(-self.data.e / FOUR_PI * acc + self.s_v(v))
    }

    fn field_strength_eta(&self, x: &Vec4, eta: f64) -> AntiSym {
        let r = x.spatial().iter().map(|c| c * c).sum::<f64>().sqrt();
        let axis = [x[1] / r, x[2] / r, x[3] / r];
        let (e1, e2) = complete_frame(axis);
        let n_phi = 2 * self.basis.quad.order;
        let dphi = TWO_PI / n_phi as f64;
        let edges = kernel_panels(x[0] - r, x[0] + r);
        let mut acc = AntiSym::ZERO;
        for pair in edges.windows(2) {
            let (s_nodes, s_weights) = gauss_legendre_on(8, pair[0], pair[1]);
            for (s, ws) in s_nodes.iter().zip(&s_weights) {
                let mu = ((x[0] - s) / r).clamp(-1.0, 1.0);
                let st = (1.0 - mu * mu).max(0.0).sqrt();
                let lorentz = 1.0 / (s * s + eta * eta);
                for k in 0..n_phi {
                    let phi = dphi * k as f64;
                    let (cp, sp) = (phi.cos(), phi.sin());
                    let mut n = [0.0; 3];
                    for i in 0..3 {
                        n[i] = mu * axis[i] + st * (cp * e1[i] + sp * e2[i]);
                    }
                    let dir = NullDirection::new(n);
                    let l = Vec4::from_spatial(1.0, n);
                    // 1/(s − iη) against (∂²D − i(2/π)c), plus the conjugate
                    let weight = 2.0
                        * (s * self.ddsq_at(n)
                            + eta * (2.0 / std::f64::consts::PI) * self.data.c.at(&dir))
                        * lorentz;
                    acc = acc.add(&AntiSym::wedge(&l, x).scale(ws * dphi / r * weight));
                }
            }
        }
        acc.scale(1.0 / (8.0 * std::f64::consts::PI * x.norm2()))
    }

    /// Field strength in x² < 0 from the iη-regularized kernel, with the
    /// regulator sent to zero through a schedule and extrapolated.
    /// Homogeneous of degree −2 and a solution of the free Maxwell
    /// equations there.
    pub fn field_strength(&self, x: &Vec4) -> Result<AntiSym> {
        let scale2 = x.euclid_norm().powi(2);
        if x.norm2() >= -1e-8 * scale2 {
            return Err(Error::OutOfDomain(
                "field strength is defined for spacelike x only".into(),
            ));
        }
        let r = x.spatial().iter().map(|c| c * c).sum::<f64>().sqrt();
        let scale = x[0].abs() + r;
        let etas = [4e-3, 2e-3, 1e-3, 5e-4];
        let samples: Vec<(f64, AntiSym)> = etas
            .iter()
            .map(|f| {
                let eta = f * scale;
                (eta, self.field_strength_eta(x, eta))
            })
            .collect();
        let mut out = AntiSym::ZERO;
        for a in 0..4 {
            for b in 0..4 {
                let comp: Vec<(f64, f64)> =
                    samples.iter().map(|(h, m)| (*h, m.0[a][b])).collect();
                let (v, _err) = limit_extrapolate(&comp)?;
                out.0[a][b] = v;
            }
        }
        Ok(out)
    }
}

/// Decomposition c(l) = Q/(v·l)² + ∂²F_v(l) in the rest frame of v.
pub struct ChargeDecomposition {
    pub q: f64,
    /// degree-0 potential part, v-dependent
    pub f_v: Homogeneous,
    /// sup-residual of the rebuilt c over the section nodes
    pub residual: f64,
}

/// Splits a smooth degree −2 function into its charge term and a potential
/// term, by a spectral solve of ∂²F_v = c − Q/(v·l)² on the v-section
/// sphere. The ℓ = 0 obstruction of the solve is exactly the removed charge
/// term; a nonvanishing ℓ = 0 remainder signals an inconsistent charge.
pub fn charge_decompose(
    c: &Homogeneous,
    v: &Vec4,
    quad: &SphereQuadrature,
    lmax: usize,
) -> Result<ChargeDecomposition> {
    if c.degree != -2 {
        return Err(Error::DegreeMismatch {
            expected: -2,
            got: c.degree,
        });
    }
    if (v.norm2() - 1.0).abs() > 1e-8 || v[0] <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    let q = invariant_integral(c, quad)? / FOUR_PI;
    let basis = SphereBasis::new(SphereQuadrature::new(lmax + 2)?, lmax);
    let triad = spatial_triad(v);
    let section_point = |m: [f64; 3]| {
        let mut l = *v;
        for (k, e) in triad.iter().enumerate() {
            l += e.scale(m[k]);
        }
        l
    };
    let rhs: Vec<f64> = basis
        .quad
        .nodes
        .iter()
        .map(|m| c.eval_cone(&section_point(*m)) - q)
        .collect();
    let coeffs = basis.analyze(&rhs);
    // mean of the remainder: coeffs[0]·Y₀₀ with Y₀₀ = 1/√4π
    let mean = coeffs[0] / FOUR_PI.sqrt();
    let c_scale = rhs.iter().fold(q.abs(), |a, r| a.max(r.abs()));
    if mean.abs() > 1e-6 * (1.0 + c_scale) {
        return Err(Error::InconsistentCharge(mean));
    }
    let mut f_coeffs = vec![0.0; coeffs.len()];
    for l in 1..=lmax {
        let eig = (l * (l + 1)) as f64; // −∂² eigenvalue on the section
        for m in -(l as i32)..=(l as i32) {
            let idx = crate::numerics::sphharm::coeff_index(l, m);
            f_coeffs[idx] = coeffs[idx] / eig;
        }
    }
    // residual of Q/(v·l)² + ∂²F_v against c at the section nodes, with the
    // dropped ℓ = 0 remainder included
    let mut residual = 0.0_f64;
    for (i, _) in basis.quad.nodes.iter().enumerate() {
        let mut back = 0.0;
        for l in 1..=lmax {
            let eig = (l * (l + 1)) as f64;
            for mm in -(l as i32)..=(l as i32) {
                let idx = crate::numerics::sphharm::coeff_index(l, mm);
                back += eig * f_coeffs[idx] * basis.y[i][idx];
            }
        }
        residual = residual.max((back - rhs[i]).abs());
    }
    let basis = Arc::new(basis);
    let vv = *v;
    let f_v = Homogeneous::new(0, move |n: [f64; 3]| {
        // coordinates of l/(v·l) in the v rest frame
        let l = Vec4::from_spatial(1.0, n);
        let vl = vv.dot(&l);
        let mut m = [0.0; 3];
        for (k, e) in triad.iter().enumerate() {
            m[k] = -l.dot(e) / vl;
        }
        basis.synth(&f_coeffs, m)
    });
    Ok(ChargeDecomposition { q, f_v, residual })
}

/// ⟨D, c⟩ = (1/4π)∫ D(l) c(l) d²l (an invariant integral: the product is
/// homogeneous of degree −2).
pub fn star_pairing(d: &Homogeneous, c: &Homogeneous, quad: &SphereQuadrature) -> Result<f64> {
    check_degrees(d, c)?;
    let mut acc = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        acc += w * d.at(&dir) * c.at(&dir);
    }
    Ok(acc / FOUR_PI)
}

/// Element W(D, c) of the Weyl algebra over the celestial symplectic group,
/// with its accumulated composition phase (mod 2π).
#[derive(Clone)]
pub struct StarWeylElement {
    pub d: Homogeneous,
    pub c: Homogeneous,
    pub e: f64,
    pub phase: f64,
}

impl StarWeylElement {
    pub fn new(d: Homogeneous, c: Homogeneous, e: f64, quad: &SphereQuadrature) -> Result<Self> {
        check_degrees(&d, &c)?;
        let q = invariant_integral(&c, quad)? / FOUR_PI;
        check_quantized(q, e)?;
        Ok(StarWeylElement {
            d,
            c,
            e,
            phase: 0.0,
        })
    }

    pub fn identity(e: f64) -> Self {
        StarWeylElement {
            d: Homogeneous::constant(0, 0.0),
            c: Homogeneous::constant(-2, 0.0),
            e,
            phase: 0.0,
        }
    }

    pub fn inverse(&self) -> Self {
        let (d, c) = (self.d.clone(), self.c.clone());
        StarWeylElement {
            d: Homogeneous::new(0, move |n| -d.at(&NullDirection::new(n))),
            c: Homogeneous::new(-2, move |n| -c.at(&NullDirection::new(n))),
            e: self.e,
            phase: -self.phase,
        }
    }
}

/// W(D₁,c₁)W(D₂,c₂) = exp[½iσ]W(D₁+D₂, c₁+c₂) with
/// σ = ⟨D₁,c₂⟩ − ⟨D₂,c₁⟩; the phase accumulates mod 2π.
pub fn weyl_compose(
    w1: &StarWeylElement,
    w2: &StarWeylElement,
    quad: &SphereQuadrature,
) -> Result<StarWeylElement> {
    for w in [w1, w2] {
        let q = invariant_integral(&w.c, quad)? / FOUR_PI;
        check_quantized(q, w.e)?;
    }
    let sigma = star_pairing(&w1.d, &w2.c, quad)? - star_pairing(&w2.d, &w1.c, quad)?;
    let (d1, d2) = (w1.d.clone(), w2.d.clone());
    let (c1, c2) = (w1.c.clone(), w2.c.clone());
    let phase = (w1.phase + w2.phase + 0.5 * sigma).rem_euclid(TWO_PI);
    Ok(StarWeylElement {
        d: Homogeneous::new(0, move |n| {
            let dir = NullDirection::new(n);
            d1.at(&dir) + d2.at(&dir)
        }),
        c: Homogeneous::new(-2, move |n| {
            let dir = NullDirection::new(n);
            c1.at(&dir) + c2.at(&dir)
        }),
        e: w1.e,
        phase,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CasimirRegime {
    /// z < 1: one discrete supplementary-series representation appears.
    Supplementary,
    /// z = 1: boundary of the discrete addition, ν = 0.
    Boundary,
    /// z > 1: continuous direct integral of main-series representations only.
    ContinuousOnly,
}

/// Spectral data of the charged-sector Lorentz representation at coupling
/// z = α/π: the first-Casimir eigenvalue z(2 − z) and the supplementary
/// parameter ν = 1 − √z of the discrete addition, when present.
pub fn casimir(z: f64) -> Result<(Option<f64>, Option<f64>, CasimirRegime)> {
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::InvalidCoupling(z));
    }
    if (z - 1.0).abs() < 1e-12 {
        return Ok((Some(1.0), Some(0.0), CasimirRegime::Boundary));
    }
    if z < 1.0 {
        Ok((
            Some(z * (2.0 - z)),
            Some(1.0 - z.sqrt()),
            CasimirRegime::Supplementary,
        ))
    } else {
        Ok((None, None, CasimirRegime::ContinuousOnly))
    }
}
