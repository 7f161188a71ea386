//! Intrinsic calculus on the future light cone: homogeneous functions,
//! invariant integrals, the intrinsic derivative L_ab, and the scalar
//! potential decomposition of charge-free tangent fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::sphere::SphereQuadrature;
use crate::numerics::sphharm::{coeff_count, coeff_index, SphereBasis};
use crate::vec4::{AntiSym, Vec4};

/// Finite-difference step for ambient derivatives of homogeneous extensions.
pub const FD_STEP: f64 = 1e-4;

/// A point of C₊, held as the unit 3-vector n of the canonical scaling
/// l = t + n with t·l = 1.
#[derive(Clone, Copy, Debug)]
pub struct NullDirection {
    n: [f64; 3],
}

impl NullDirection {
    pub fn new(n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        NullDirection {
            n: [n[0] / norm, n[1] / norm, n[2] / norm],
        }
    }

    pub fn unit(&self) -> [f64; 3] {
        self.n
    }

    /// Scaled null vector l = t + n.
    pub fn l(&self) -> Vec4 {
        Vec4::from_spatial(1.0, self.n)
    }

    /// Canonical scaling of an arbitrary cone point.
    pub fn from_cone_point(l: &Vec4) -> Self {
        NullDirection::new(l.spatial())
    }

    /// Antipodal direction k = t − n.
    pub fn antipode(&self) -> Self {
        NullDirection {
            n: [-self.n[0], -self.n[1], -self.n[2]],
        }
    }
}

/// Scalar function on C₊ homogeneous of a declared degree; stored through its
/// restriction to the canonical section and rescaled on evaluation, so the
/// homogeneity law holds by construction.
#[derive(Clone)]
pub struct Homogeneous {
    pub degree: i32,
    f: Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>,
}

impl Homogeneous {
    pub fn new<F: Fn([f64; 3]) -> f64 + Send + Sync + 'static>(degree: i32, f: F) -> Self {
        Homogeneous {
            degree,
            f: Arc::new(f),
        }
    }

    pub fn constant(degree: i32, c: f64) -> Self {
        Homogeneous::new(degree, move |_| c)
    }

    /// Value at the canonically scaled direction.
    pub fn at(&self, dir: &NullDirection) -> f64 {
        (self.f)(dir.unit())
    }

    /// Value at an arbitrary cone point l (l² = 0, l⁰ > 0).
    pub fn eval_cone(&self, l: &Vec4) -> f64 {
        l[0].powi(self.degree) * (self.f)(NullDirection::new(l.spatial()).unit())
    }

    /// Canonical homogeneous extension to the ambient open cone x⁰ > 0:
    /// f(x) = (x⁰)^d f(t + x⃗/|x⃗|).
    pub fn eval_ext(&self, x: &Vec4) -> f64 {
        x[0].powi(self.degree) * (self.f)(NullDirection::new(x.spatial()).unit())
    }

    /// Ambient gradient ∂f/∂l^a of the canonical extension, by central
    /// differences.
    pub fn grad_ext(&self, x: &Vec4) -> Vec4 {
        let h = FD_STEP * x.euclid_norm().max(1.0);
        let mut g = Vec4::ZERO;
        for a in 0..4 {
            let mut xp = *x;
            let mut xm = *x;
            xp[a] += h;
            xm[a] -= h;
            g[a] = (self.eval_ext(&xp) - self.eval_ext(&xm)) / (2.0 * h);
        }
        g
    }

    /// Wave operator ∂² = ∂₀² − Δ₃ of the canonical extension, by second
    /// central differences; result is homogeneous of degree d − 2 and, on the
    /// cone, independent of the extension.
    pub fn wave_ext(&self, x: &Vec4) -> f64 {
        let h = 10.0 * FD_STEP * x.euclid_norm().max(1.0);
        let f0 = self.eval_ext(x);
        let mut second = [0.0; 4];
        for a in 0..4 {
            let mut xp = *x;
            let mut xm = *x;
            xp[a] += h;
            xm[a] -= h;
            second[a] = (self.eval_ext(&xp) - 2.0 * f0 + self.eval_ext(&xm)) / (h * h);
        }
        second[0] - second[1] - second[2] - second[3]
    }
}

/// Four-vector valued function on C₊, homogeneous of degree −1, with
/// l·V(l) = q everywhere (q = 0 for charge-free fields).
#[derive(Clone)]
pub struct TangentField {
    f: Arc<dyn Fn([f64; 3]) -> Vec4 + Send + Sync>,
    pub charge: f64,
}

impl TangentField {
    pub fn new<F: Fn([f64; 3]) -> Vec4 + Send + Sync + 'static>(charge: f64, f: F) -> Self {
        TangentField {
            f: Arc::new(f),
            charge,
        }
    }

    pub fn zero() -> Self {
        TangentField::new(0.0, |_| Vec4::ZERO)
    }

    pub fn at(&self, dir: &NullDirection) -> Vec4 {
        (self.f)(dir.unit())
    }

    pub fn eval_cone(&self, l: &Vec4) -> Vec4 {
        (self.f)(NullDirection::new(l.spatial()).unit()).scale(1.0 / l[0])
    }

    /// Ambient extension of homogeneity −1 satisfying x·V(x) = q exactly:
    /// the radial extension plus a multiple of t along the t-axis.
    pub fn eval_ext(&self, x: &Vec4) -> Vec4 {
        let raw = (self.f)(NullDirection::new(x.spatial()).unit()).scale(1.0 / x[0]);
        let c = (self.charge - x.dot(&raw)) / x[0];
        let mut out = raw;
        out[0] += c;
        out
    }

    /// Divergence ∂·V of the constrained extension, by central differences;
    /// on the cone independent of the admissible extension.
    pub fn divergence(&self, dir: &NullDirection) -> f64 {
        let x = dir.l();
        let h = FD_STEP;
        let mut div = 0.0;
        for a in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            div += (self.eval_ext(&xp)[a] - self.eval_ext(&xm)[a]) / (2.0 * h);
        }
        div
    }

    /// l ∧ V at a direction, the gauge-invariant content of the field.
    pub fn wedge(&self, dir: &NullDirection) -> AntiSym {
        AntiSym::wedge(&dir.l(), &self.at(dir))
    }

    /// Pointwise linear combination a·self + b·other.
    pub fn combine(&self, a: f64, other: &TangentField, b: f64) -> TangentField {
        let f1 = self.f.clone();
        let f2 = other.f.clone();
        TangentField::new(a * self.charge + b * other.charge, move |n| {
            f1(n).scale(a) + f2(n).scale(b)
        })
    }
}

/// ∫ f(l) d²l for f homogeneous of degree −2 (the Lorentz-invariant integral).
pub fn invariant_integral(f: &Homogeneous, quad: &SphereQuadrature) -> Result<f64> {
    if f.degree != -2 {
        return Err(Error::DegreeMismatch {
            expected: -2,
            got: f.degree,
        });
    }
    Ok(quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .map(|(n, w)| w * f.at(&NullDirection::new(*n)))
        .sum())
}

/// Intrinsic derivative L_ab f = l_a ∂_b f − l_b ∂_a f, as a new homogeneous
/// function of the same degree.
pub fn l_derivative(f: &Homogeneous, a: usize, b: usize) -> Homogeneous {
    assert!(a < 4 && b < 4);
    let g = f.clone();
    Homogeneous::new(f.degree, move |n| {
        let dir = NullDirection::new(n);
        let l = dir.l();
        let grad = g.grad_ext(&l);
        l.lower(a) * grad[b] - l.lower(b) * grad[a]
    })
}

/// Full antisymmetric matrix (L_ab f) at a direction.
pub fn l_derivative_matrix(f: &Homogeneous, dir: &NullDirection) -> AntiSym {
    let l = dir.l();
    let grad = f.grad_ext(&l);
    let mut m = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            m[a][b] = l.lower(a) * grad[b] - l.lower(b) * grad[a];
        }
    }
    AntiSym(m)
}

/// Result of the scalar decomposition l ∧ V = L φ − *L ψ.
pub struct Decomposition {
    pub phi_coeffs: Vec<f64>,
    pub psi_coeffs: Vec<f64>,
    /// Additive constant that turns the zero-mean φ into the special solution
    /// fixed by the kernel-integral identity ∫ φ/(t·l)² d²l = ∫ t·V/(t·l) d²l.
    pub fsp_constant: f64,
    /// Sup-norm residual of the reconstruction over the quadrature nodes.
    pub residual: f64,
}

impl Decomposition {
    pub fn phi(&self, basis: &SphereBasis) -> Homogeneous {
        let c = self.phi_coeffs.clone();
        let b = basis_clone(basis);
        Homogeneous::new(0, move |n| b.synth(&c, n))
    }

    pub fn phi_special(&self, basis: &SphereBasis) -> Homogeneous {
        let c = self.phi_coeffs.clone();
        let off = self.fsp_constant;
        let b = basis_clone(basis);
        Homogeneous::new(0, move |n| b.synth(&c, n) + off)
    }

    pub fn psi(&self, basis: &SphereBasis) -> Homogeneous {
        let c = self.psi_coeffs.clone();
        let b = basis_clone(basis);
        Homogeneous::new(0, move |n| b.synth(&c, n))
    }
}

// SphereBasis is rebuilt cheaply from its quadrature for closure capture.
fn basis_clone(b: &SphereBasis) -> SphereBasis {
    SphereBasis::new(b.quad.clone(), b.lmax)
}

/// Decompose a charge-free tangent field into its electric and magnetic
/// potentials, l_a V_b − l_b V_a = L_ab φ − *L_ab ψ, by a spherical-harmonic
/// solve in the t frame. φ and ψ are returned with zero mean; the constant of
/// the special φ solution is reported separately.
pub fn potential_decompose(v: &TangentField, basis: &SphereBasis) -> Result<Decomposition> {
    if v.charge.abs() > 1e-10 {
        return Err(Error::ChargedField(v.charge));
    }
    let quad = &basis.quad;
    let nc = coeff_count(basis.lmax);
    let mut a_coef = vec![0.0; nc];
    let mut b_coef = vec![0.0; nc];
    // tangential part V_T of the spatial components; V⁰ = n·V⃗ by l·V = 0
    let mut vt_nodes = Vec::with_capacity(quad.len());
    for (i, n) in quad.nodes.iter().enumerate() {
        let val = v.at(&NullDirection::new(*n));
        let s = [val[1], val[2], val[3]];
        let radial = s[0] * n[0] + s[1] * n[1] + s[2] * n[2];
        let vt = [s[0] - radial * n[0], s[1] - radial * n[1], s[2] - radial * n[2]];
        let cross = [
            n[1] * vt[2] - n[2] * vt[1],
            n[2] * vt[0] - n[0] * vt[2],
            n[0] * vt[1] - n[1] * vt[0],
        ];
        let w = quad.weights[i];
        for k in 0..nc {
            let g = basis.grad[i][k];
            a_coef[k] += w * (vt[0] * g[0] + vt[1] * g[1] + vt[2] * g[2]);
            b_coef[k] += w * (cross[0] * g[0] + cross[1] * g[1] + cross[2] * g[2]);
        }
        vt_nodes.push(vt);
    }
    let mut phi = vec![0.0; nc];
    let mut psi = vec![0.0; nc];
    for l in 1..=basis.lmax {
        let eig = (l * (l + 1)) as f64;
        for m in -(l as i32)..=(l as i32) {
            let k = coeff_index(l, m);
            phi[k] = -a_coef[k] / eig;
            // (n×V_T)·∇Y = −V_T·(n×∇Y), so the magnetic projection enters
            // with the opposite sign to the electric one
            psi[k] = b_coef[k] / eig;
        }
    }
    // reconstruction residual: V_T = −∇φ − n×∇ψ at the nodes
    let mut residual = 0.0_f64;
    for (i, n) in quad.nodes.iter().enumerate() {
        let gphi = synth_grad_from_table(basis, &phi, i);
        let gpsi = synth_grad_from_table(basis, &psi, i);
        let cross = [
            n[1] * gpsi[2] - n[2] * gpsi[1],
            n[2] * gpsi[0] - n[0] * gpsi[2],
            n[0] * gpsi[1] - n[1] * gpsi[0],
        ];
        for j in 0..3 {
            residual = residual.max((vt_nodes[i][j] + gphi[j] + cross[j]).abs());
        }
    }
    // fix the special-solution constant from the identity
    // ∫ φ/(t·l)² d²l = ∫ t·V/(t·l) d²l on the canonical section
    let mut rhs = 0.0;
    let mut lhs0 = 0.0;
    for (i, n) in quad.nodes.iter().enumerate() {
        let w = quad.weights[i];
        rhs += w * v.at(&NullDirection::new(*n))[0];
        let val: f64 = (0..nc).map(|k| phi[k] * basis.y[i][k]).sum();
        lhs0 += w * val;
    }
    let fsp_constant = (rhs - lhs0) / (4.0 * std::f64::consts::PI);
    Ok(Decomposition {
        phi_coeffs: phi,
        psi_coeffs: psi,
        fsp_constant,
        residual,
    })
}

fn synth_grad_from_table(basis: &SphereBasis, coeffs: &[f64], node: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, c) in coeffs.iter().enumerate() {
        let g = basis.grad[node][k];
        for j in 0..3 {
            out[j] += c * g[j];
        }
    }
    out
}

/// Special solution φ(l) = (1/4π) ∫ l·V(l′)/(l·l′) d²l′ by direct kernel
/// quadrature with the singularity subtracted at l′ = l. The kernel is
/// integrable (l·l′ ≈ γ²/2 near coincidence) and the numerator vanishes
/// there for charge-free V, so plain quadrature converges, slowly.
pub fn special_phi_kernel(v: &TangentField, quad: &SphereQuadrature, dir: &NullDirection) -> f64 {
    let l = dir.l();
    let mut acc = 0.0;
    for (np, w) in quad.nodes.iter().zip(&quad.weights) {
        let lp = Vec4::from_spatial(1.0, *np);
        let denom = l.dot(&lp);
        if denom.abs() < 1e-13 {
            continue;
        }
        acc += w * l.dot(&v.at(&NullDirection::new(*np))) / denom;
    }
    acc / (4.0 * std::f64::consts::PI)
}

/// Build a tangent field from its potentials: V = (0, −∇φ − n×∇ψ) on the
/// canonical section, plus an optional pure-l gauge part α(l)·l and a charge
/// part q·t/(t·l).
pub fn tangent_from_potentials(
    basis: &SphereBasis,
    phi_coeffs: Vec<f64>,
    psi_coeffs: Vec<f64>,
    gauge_alpha: Option<Homogeneous>,
    charge: f64,
) -> TangentField {
    let b = basis_clone(basis);
    TangentField::new(charge, move |n| {
        let gphi = b.synth_grad(&phi_coeffs, n);
        let gpsi = b.synth_grad(&psi_coeffs, n);
        let cross = [
            n[1] * gpsi[2] - n[2] * gpsi[1],
            n[2] * gpsi[0] - n[0] * gpsi[2],
            n[0] * gpsi[1] - n[1] * gpsi[0],
        ];
        let mut s = [0.0; 3];
        for j in 0..3 {
            s[j] = -gphi[j] - cross[j];
        }
        let mut out = Vec4::from_spatial(0.0, s);
        if let Some(alpha) = &gauge_alpha {
            let a = alpha.at(&NullDirection::new(n));
            out += Vec4::from_spatial(1.0, n).scale(a);
        }
        // q·t/(t·l): on the section this is q·t
        out[0] += charge;
        out
    })
}

/// ∂² of a degree-0 homogeneous function, spectrally: on the canonical
/// section ∂²f = −Δ_{S²} f, extended as homogeneous of degree −2.
pub fn wave_on_cone_spectral(basis: &SphereBasis, coeffs: &[f64]) -> Homogeneous {
    let lap = basis.laplace_coeffs(coeffs);
    let b = basis_clone(basis);
    Homogeneous::new(-2, move |n| -b.synth(&lap, n))
}
