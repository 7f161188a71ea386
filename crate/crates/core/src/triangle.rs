//! Infrared-triangle quantities: smeared asymptotic charges in two equal
//! forms, the contracted-field asymptote W and its matching, the memory phase
//! and velocity kick of a test particle, finite-radius integral analysis, and
//! the classical soft-photon relation.

use std::sync::Arc;

use crate::asymptotics::{
    fourier_profile, ir_classify, kirchhoff_eval, FreeFieldData, IrClass,
};
use crate::celestial::{potential_decompose, tangent_from_potentials, Homogeneous, NullDirection, TangentField};
use crate::currents::{AsymptoteProfile, LimitFn, ScatteringEvent, VecFn};
use crate::error::{Error, Result};
use crate::numerics::extrap::limit_extrapolate;
use crate::numerics::mollify::{Mollifier, MollifierKind};
use crate::numerics::sphere::SphereQuadrature;
use crate::numerics::sphharm::SphereBasis;
use crate::vec4::{AntiSym, Vec4};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn raise(cov: Vec4) -> Vec4 {
    Vec4::new(cov[0], -cov[1], -cov[2], -cov[3])
}

/// A charge-smearing test function: a tangent field V⁺(l), homogeneous of
/// degree −1, orthogonal to l and charge-free, together with its electric
/// scalar potential ε⁺ (the magnetic potential is fixed to zero; any magnetic
/// content shows up in the residual).
pub struct ChargeSmearing {
    pub vplus: TangentField,
    /// the special (kernel-normalized) potential, degree 0
    pub epsilon: Homogeneous,
    /// reconstruction residual of l ∧ V⁺ = L ε⁺ at the basis nodes
    pub residual: f64,
}

impl ChargeSmearing {
    /// Decompose a given charge-free smearing field; the magnetic potential
    /// of the decomposition is discarded into the residual.
    pub fn from_field(vplus: TangentField, basis: &SphereBasis) -> Result<Self> {
        let dec = potential_decompose(&vplus, basis)?;
        let psi_sup = dec
            .psi_coeffs
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()));
        let epsilon = dec.phi_special(basis);
        Ok(ChargeSmearing {
            vplus,
            epsilon,
            residual: dec.residual.max(psi_sup),
        })
    }

    /// Build the smearing field from a prescribed potential; the stored ε⁺ is
    /// renormalized to the special solution so that the two charge forms
    /// agree including the ℓ = 0 (total charge) sector.
    pub fn from_potential(epsilon: &Homogeneous, basis: &SphereBasis) -> Result<Self> {
        if epsilon.degree != 0 {
            return Err(Error::DegreeMismatch {
                expected: 0,
                got: epsilon.degree,
            });
        }
        let vals: Vec<f64> = basis
            .quad
            .nodes
            .iter()
            .map(|n| epsilon.at(&NullDirection::new(*n)))
            .collect();
        let coeffs = basis.analyze(&vals);
        let nc = coeffs.len();
        let vplus = tangent_from_potentials(basis, coeffs, vec![0.0; nc], None, 0.0);
        ChargeSmearing::from_field(vplus, basis)
    }
}

/// The smeared asymptotic charge in its two equal forms.
pub struct ChargeValues {
    /// −(1/4π) ∫ V⁺ · V(−∞) d²l
    pub form1: f64,
    /// (1/4π) ∫ ε⁺ ∂·V(−∞) d²l
    pub form2: f64,
    pub discrepancy: f64,
}

pub fn charge_functional(
    smearing: &ChargeSmearing,
    vminus: &TangentField,
    quad: &SphereQuadrature,
) -> ChargeValues {
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        q1 += w * smearing.vplus.at(&dir).dot(&vminus.at(&dir));
        q2 += w * smearing.epsilon.at(&dir) * vminus.divergence(&dir);
    }
    let form1 = -q1 / FOUR_PI;
    let form2 = q2 / FOUR_PI;
    ChargeValues {
        form1,
        form2,
        discrepancy: (form1 - form2).abs(),
    }
}

/// Contraction (L_{ba} G^a)(l) for a vector function on the cone given by an
/// ambient extension, by central differences. Each L_{ab} is tangent to the
/// cone, so the value does not depend on the extension.
fn l_contract<G: Fn(&Vec4) -> Vec4>(g: G, dir: &NullDirection) -> Vec4 {
    let l = dir.l();
    let h = 1e-5;
    let mut jac = [[0.0; 4]; 4]; // jac[a][b] = ∂G^a/∂x^b
    for b in 0..4 {
        let mut xp = l;
        let mut xm = l;
        xp[b] += h;
        xm[b] -= h;
        let vp = g(&xp);
        let vm = g(&xm);
        for a in 0..4 {
            jac[a][b] = (vp[a] - vm[a]) / (2.0 * h);
        }
    }
    let div: f64 = (0..4).map(|a| jac[a][a]).sum();
    let mut cov = Vec4::ZERO;
    for b in 0..4 {
        let mut s = 0.0;
        for a in 0..4 {
            s += l.lower(a) * jac[a][b];
        }
        cov[b] = l.lower(b) * div - s;
    }
    cov
}

/// The radiation-zone asymptote of the contracted field B_b(x) = x^a F_ab(x),
/// R B_b(x + R l) → W_b(x·l, l):
/// W_b = L_{ba}V^a − V_b + s V̇_b, returned with the index raised. The
/// l-derivative acts at fixed s on the jointly homogeneous extension.
pub fn b_asymptote(profile: &AsymptoteProfile, s: f64, dir: &NullDirection) -> Vec4 {
    let p = profile.clone();
    let lterm = raise(l_contract(|x| p.v_cone(s, x), dir));
    lterm - profile.v(s, dir) + profile.vdot(s, dir).scale(s)
}

/// W of an s-independent limit field: L_{ba}V^a − V_b (index raised). The
/// derivative uses the charged homogeneous extension with x·V = q.
pub fn w_of_limit(limit: &TangentField, dir: &NullDirection) -> Vec4 {
    raise(l_contract(|x| limit.eval_ext(x), dir)) - limit.at(dir)
}

/// Residuals of the contracted-field matching identities.
pub struct StromingerReport {
    /// sup |W(−∞,l) − W′(+∞,l)|
    pub w_matching: f64,
    /// sup |∂·V(−∞,l) − ∂·V′(+∞,l)|, the invariant form of the matching
    pub divergence_matching: f64,
    /// sup |W(−∞,l) − l ∂·V(−∞,l)|
    pub w_form: f64,
}

pub fn strominger_check(
    v: &AsymptoteProfile,
    v_prime: &AsymptoteProfile,
    quad: &SphereQuadrature,
) -> Result<StromingerReport> {
    let vminus = v
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit of V missing".into()))?;
    let vprime_plus = v_prime
        .limit_plus()
        .ok_or_else(|| Error::InconsistentInput("future limit of V′ missing".into()))?;
    let mut w_matching = 0.0_f64;
    let mut divergence_matching = 0.0_f64;
    let mut w_form = 0.0_f64;
    for n in &quad.nodes {
        let dir = NullDirection::new(*n);
        let w1 = w_of_limit(&vminus, &dir);
        let w2 = w_of_limit(&vprime_plus, &dir);
        w_matching = w_matching.max((w1 - w2).euclid_norm());
        let d1 = vminus.divergence(&dir);
        let d2 = vprime_plus.divergence(&dir);
        divergence_matching = divergence_matching.max((d1 - d2).abs());
        w_form = w_form.max((w1 - dir.l().scale(d1)).euclid_norm());
    }
    Ok(StromingerReport {
        w_matching,
        divergence_matching,
        w_form,
    })
}

/// Memory phase δ(p) = −(e/2π) ∫ p·V(−∞,l)/(p·l) d²l of a charged test
/// particle with momentum p crossing the zero-frequency field.
pub fn memory_phase(
    charge: f64,
    p: &Vec4,
    vminus: &TangentField,
    quad: &SphereQuadrature,
) -> Result<f64> {
    if p.norm2() <= 0.0 || p[0] <= 0.0 {
        return Err(Error::OutOfDomain(
            "memory phase needs future timelike momentum".into(),
        ));
    }
    let mut acc = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        acc += w * p.dot(&vminus.at(&dir)) / p.dot(&dir.l());
    }
    Ok(-charge * acc / TWO_PI)
}

/// Smeared phase Σ_Φ(v) = (e/4π) ∫ Φ(l)/(v·l)² d²l of the Coulomb-dressing
/// exchange relation, for a degree-0 potential Φ.
pub fn sigma_phase(charge: f64, v: &Vec4, phi: &Homogeneous, quad: &SphereQuadrature) -> Result<f64> {
    if (v.norm2() - 1.0).abs() > 1e-9 || v[0] <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    let mut acc = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        acc += w * phi.at(&dir) / v.dot(&dir.l()).powi(2);
    }
    Ok(charge * acc / FOUR_PI)
}

/// The three routes to the position shift of a test particle, covariant
/// components: the τ-weighted time integral of the force, the celestial
/// integral over l ∧ V(−∞), and the momentum derivative of the phase.
pub struct KickReport {
    pub time_integral: Vec4,
    pub celestial: Vec4,
    pub grad_phase: Vec4,
}

/// Δ_a = −(e/m) ∫ F_ab(x₀ + vτ) τ dτ v^b for the free field of `data`. The
/// τ integral is reduced per null direction to an s-quadrature of τ V̈ over
/// the declared support; the celestial route uses the closed form
/// (e/2πm) ∫ [l ∧ V(−∞)]_{ab} v^b/(v·l)² d²l; the third route differentiates
/// δ(p) at p = m v by central differences with relative step 1e−4.
pub fn memory_kick(
    charge: f64,
    mass: f64,
    v: &Vec4,
    x0: &Vec4,
    data: &FreeFieldData,
    quad: &SphereQuadrature,
    s_support: (f64, f64),
    tau_samples: usize,
) -> Result<KickReport> {
    if (v.norm2() - 1.0).abs() > 1e-9 || v[0] <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    if mass <= 0.0 {
        return Err(Error::OutOfDomain("test particle must be massive".into()));
    }
    let vminus = data
        .profile
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit missing".into()))?;
    let pref = charge / (TWO_PI * mass);
    let mut celestial = Vec4::ZERO;
    let mut time_integral = Vec4::ZERO;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let dir = NullDirection::new(*n);
        let l = dir.l();
        let vl = v.dot(&l);
        let vm = vminus.at(&dir);
        for a in 0..4 {
            celestial[a] +=
                w * pref * (l.lower(a) * v.dot(&vm) - vm.lower(a) * vl) / (vl * vl);
        }
        // I = ∫ τ V̈(x₀·l + τ v·l) dτ by Simpson over the mapped support;
        // analytically I = V(−∞,l)/(v·l)².
        let t0 = (s_support.0 - x0.dot(&l)) / vl;
        let t1 = (s_support.1 - x0.dot(&l)) / vl;
        let (t0, t1) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        let m = if tau_samples % 2 == 0 {
            tau_samples + 1
        } else {
            tau_samples
        };
        let h = (t1 - t0) / (m - 1) as f64;
        let mut i_tau = Vec4::ZERO;
        for j in 0..m {
            let tau = t0 + h * j as f64;
            let sw = if j == 0 || j == m - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            i_tau += data
                .profile
                .vddot(x0.dot(&l) + tau * vl, &dir)
                .scale(sw * tau);
        }
        i_tau = i_tau.scale(h / 3.0);
        for a in 0..4 {
            time_integral[a] += w * pref * (l.lower(a) * v.dot(&i_tau) - i_tau.lower(a) * vl);
        }
    }
    let p0 = v.scale(mass);
    let mut grad_phase = Vec4::ZERO;
    for a in 0..4 {
        let h = 1e-4 * (1.0 + p0[a].abs());
        let mut pp = p0;
        let mut pm = p0;
        pp[a] += h;
        pm[a] -= h;
        grad_phase[a] = (memory_phase(charge, &pp, &vminus, quad)?
            - memory_phase(charge, &pm, &vminus, quad)?)
            / (2.0 * h);
    }
    Ok(KickReport {
        time_integral,
        celestial,
        grad_phase,
    })
}

/// Finite-radius integral diagnostics of a free field. All tensors carry
/// covariant indices.
pub struct FiniteRReport {
    /// ∫_ℝ F(ut + Rk) du at the given finite radius; vanishes identically
    pub full_line: AntiSym,
    /// R-extrapolated half-line integral for null z = k
    pub half_line_null: AntiSym,
    /// its predicted limit k_b V_a(τ₀,k) − k_a V_b(τ₀,k)
    pub half_line_null_expected: AntiSym,
    pub half_line_null_err: f64,
    /// R-extrapolated half-line integral for spacelike z
    pub half_line_spacelike: AntiSym,
    /// its predicted limit, the δ(z·l) celestial integral of l ∧ V(−∞)
    pub half_line_spacelike_expected: AntiSym,
    pub half_line_spacelike_err: f64,
    /// ∫ [k ∧ V̇(u,k)] du, the postulated radiation-zone kick integral
    pub kick_integral: AntiSym,
    /// its value k_b V(−∞,k)_a − k_a V(−∞,k)_b through the future-edge limit
    pub kick_expected: AntiSym,
}

/// Half-line integral R ∫_{τ₀}^∞ F(τt + Rz) dτ reduced to the celestial
/// quadrature (R/2π) ∫ l ∧ V̇(τ₀ + R z·l) d²l on the canonical section.
fn half_line_value(
    data: &FreeFieldData,
    tau0: f64,
    r: f64,
    z: &Vec4,
    quad: &SphereQuadrature,
) -> AntiSym {
    let mut acc = AntiSym::ZERO;
    for (i, w) in quad.weights.iter().enumerate() {
        let l = quad.null_dir(i);
        let dir = NullDirection::new(quad.nodes[i]);
        let arg = tau0 + r * z.dot(&l);
        acc = acc.add(&AntiSym::wedge(&l, &data.profile.vdot(arg, &dir)).scale(*w));
    }
    acc.scale(r / TWO_PI)
}

fn extrapolate_antisym(samples: &[(f64, AntiSym)]) -> Result<(AntiSym, f64)> {
    let mut out = AntiSym::ZERO;
    let mut err = 0.0_f64;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let comp: Vec<(f64, f64)> = samples.iter().map(|(h, m)| (*h, m.0[a][b])).collect();
            let (lim, e) = limit_extrapolate(&comp)?;
            out.0[a][b] = lim;
            out.0[b][a] = -lim;
            err = err.max(e.abs());
        }
    }
    Ok((out, err))
}

#[allow(clippy::too_many_arguments)]
pub fn finite_r_integrals(
    data: &FreeFieldData,
    r_fixed: f64,
    k: &NullDirection,
    tau0: f64,
    z: &Vec4,
    quad: &SphereQuadrature,
    radii: &[f64],
    s_support: (f64, f64),
    u_samples: usize,
) -> Result<FiniteRReport> {
    if z.norm2() >= 0.0 {
        return Err(Error::OutOfDomain(
            "spacelike probe direction required".into(),
        ));
    }
    let kl = k.l();
    let vminus = data
        .profile
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit missing".into()))?;
    // full-line u integral of the reconstructed field at fixed finite R:
    // the support in u is the profile support shifted by R·k·l ∈ [0, 2R]
    let (u0, u1) = (s_support.0 - 2.0 * r_fixed - 2.0, s_support.1 + 2.0);
    let m = if u_samples % 2 == 0 {
        u_samples + 1
    } else {
        u_samples
    };
    let h = (u1 - u0) / (m - 1) as f64;
    let mut full_line = AntiSym::ZERO;
    for j in 0..m {
        let u = u0 + h * j as f64;
        let sw = if j == 0 || j == m - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let x = Vec4::T.scale(u) + kl.scale(r_fixed);
        let (_, f) = kirchhoff_eval(data, &x, quad);
        full_line = full_line.add(&f.scale(sw));
    }
    full_line = full_line.scale(h / 3.0);

    // half-line integrals, extrapolated in 1/R
    let null_samples: Vec<(f64, AntiSym)> = radii
        .iter()
        .map(|r| (1.0 / r, half_line_value(data, tau0, *r, &kl, quad)))
        .collect();
    let (half_line_null, half_line_null_err) = extrapolate_antisym(&null_samples)?;
    let half_line_null_expected =
        AntiSym::wedge(&kl, &data.profile.v(tau0, k)).scale(-1.0);

    let space_samples: Vec<(f64, AntiSym)> = radii
        .iter()
        .map(|r| (1.0 / r, half_line_value(data, tau0, *r, z, quad)))
        .collect();
    let (half_line_spacelike, half_line_spacelike_err) = extrapolate_antisym(&space_samples)?;
    // predicted limit −(1/2π)∫ l ∧ V(−∞) δ(z·l) d²l, mollified and
    // width-extrapolated
    let widths = [0.4, 0.3, 0.2, 0.15];
    let mut dsamples: Vec<(f64, AntiSym)> = Vec::new();
    for w in widths {
        let moll = Mollifier::new(MollifierKind::Delta, w)?;
        let mut acc = AntiSym::ZERO;
        for (i, wq) in quad.weights.iter().enumerate() {
            let l = quad.null_dir(i);
            let dir = NullDirection::new(quad.nodes[i]);
            acc = acc.add(
                &AntiSym::wedge(&l, &vminus.at(&dir)).scale(wq * moll.eval(z.dot(&l))),
            );
        }
        dsamples.push((w * w, acc.scale(-1.0 / TWO_PI)));
    }
    let (half_line_spacelike_expected, _) = extrapolate_antisym(&dsamples)?;

    // kick integral ∫ k ∧ V̇(u,k) du over the support (Simpson)
    let hk = (s_support.1 - s_support.0) / (m - 1) as f64;
    let mut kick = AntiSym::ZERO;
    for j in 0..m {
        let u = s_support.0 + hk * j as f64;
        let sw = if j == 0 || j == m - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        kick = kick.add(&AntiSym::wedge(&kl, &data.profile.vdot(u, k)).scale(sw));
    }
    let kick_integral = kick.scale(hk / 3.0);
    let kick_expected = AntiSym::wedge(&kl, &vminus.at(k)).scale(-1.0);
    Ok(FiniteRReport {
        full_line,
        half_line_null,
        half_line_null_expected,
        half_line_null_err,
        half_line_spacelike,
        half_line_spacelike_expected,
        half_line_spacelike_err,
        kick_integral,
        kick_expected,
    })
}

/// Both sides of the classical soft-photon relation
/// 2π lim ω a(ωl) + Σ q v/(v·l) evaluated for the outgoing and incoming free
/// fields of a scattering event, with their infrared classification.
pub struct SoftReport {
    /// sup over the sampled directions of |lhs − rhs|
    pub residual: f64,
    pub out_class: IrClass,
    pub in_class: IrClass,
}

pub fn soft_relation(
    event: &ScatteringEvent,
    out_data: &FreeFieldData,
    in_data: &FreeFieldData,
    dirs: &[NullDirection],
    quad: &SphereQuadrature,
    s_max: f64,
    s_samples: usize,
) -> Result<SoftReport> {
    let grid = [-1.0, 0.0, 1.0];
    let fp_out = fourier_profile(out_data, &grid, s_max, s_samples)?;
    let fp_in = fourier_profile(in_data, &grid, s_max, s_samples)?;
    let mut residual = 0.0_f64;
    let mut scale = 0.0_f64;
    for dir in dirs {
        let mut lhs = Vec4::ZERO;
        let mut rhs = Vec4::ZERO;
        let zo = fp_out.zero_plus(dir);
        let zi = fp_in.zero_plus(dir);
        for c in 0..4 {
            lhs[c] = -TWO_PI * zo[c].re;
            rhs[c] = -TWO_PI * zi[c].re;
        }
        for p in &event.outgoing {
            lhs += p.coulomb_term(dir.unit());
        }
        for p in &event.incoming {
            rhs += p.coulomb_term(dir.unit());
        }
        residual = residual.max((lhs - rhs).euclid_norm());
        scale = scale.max(lhs.euclid_norm());
    }
    let scale = scale.max(1e-30);
    Ok(SoftReport {
        residual,
        out_class: ir_classify(&fp_out, quad, scale / TWO_PI, 1e-6),
        in_class: ir_classify(&fp_in, quad, scale / TWO_PI, 1e-6),
    })
}

/// A pure transition profile V(s,l) = D(l)·(1 − tanh((s−c)/w))/2 toward a
/// charge-free past limit D. Useful for making an incoming free field
/// consistent with a given event and outgoing field.
pub fn step_toward(limit: &TangentField, center: f64, width: f64) -> Result<AsymptoteProfile> {
    if width <= 0.0 || !width.is_finite() {
        return Err(Error::InvalidWidth(width));
    }
    if limit.charge.abs() > 1e-10 {
        return Err(Error::ChargedField(limit.charge));
    }
    let (d1, d2, d3, d4) = (limit.clone(), limit.clone(), limit.clone(), limit.clone());
    let v: VecFn = Arc::new(move |s, n| {
        let u = (s - center) / width;
        d1.at(&NullDirection::new(n)).scale(0.5 * (1.0 - u.tanh()))
    });
    let vdot: VecFn = Arc::new(move |s, n| {
        let u = (s - center) / width;
        d2.at(&NullDirection::new(n))
            .scale(-0.5 / (width * u.cosh().powi(2)))
    });
    let vddot: VecFn = Arc::new(move |s, n| {
        let u = (s - center) / width;
        d3.at(&NullDirection::new(n))
            .scale(u.tanh() / (width * width * u.cosh().powi(2)))
    });
    let minus: LimitFn = Arc::new(move |n| d4.at(&NullDirection::new(n)));
    let plus: LimitFn = Arc::new(|_| Vec4::ZERO);
    Ok(AsymptoteProfile::from_closures(
        v,
        vdot,
        vddot,
        0.0,
        1.0,
        Some(minus),
        Some(plus),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::{current_profile, PointParticle, Transition};
    use crate::vec4::Vec4;

    fn basis() -> SphereBasis {
        SphereBasis::new(SphereQuadrature::new(32).unwrap(), 16)
    }

    fn generic_smearing(b: &SphereBasis) -> ChargeSmearing {
        let eps = Homogeneous::new(0, |n| {
            n[2] + 0.3 * n[0] * n[1] - 0.2 * n[0] * n[0] + 0.1
        });
        ChargeSmearing::from_potential(&eps, b).unwrap()
    }

    /// A generic charged past limit: two Coulomb tails plus a tangential part.
    fn generic_vminus(b: &SphereBasis) -> TangentField {
        let p1 = PointParticle::new(1.3, Vec4::boost_velocity(0.4, [1.0, 0.0, 0.0])).unwrap();
        let p2 = PointParticle::new(-0.5, Vec4::boost_velocity(0.3, [0.0, 1.0, 1.0])).unwrap();
        let phi = Homogeneous::new(0, |n: [f64; 3]| 0.6 * n[1] - 0.25 * n[0] * n[2]);
        let psi = Homogeneous::new(0, |n: [f64; 3]| 0.4 * n[0] + 0.15 * n[1] * n[2]);
        let (pc, sc) = {
            let pv: Vec<f64> = b.quad.nodes.iter().map(|n| phi.at(&NullDirection::new(*n))).collect();
            let sv: Vec<f64> = b.quad.nodes.iter().map(|n| psi.at(&NullDirection::new(*n))).collect();
            (b.analyze(&pv), b.analyze(&sv))
        };
        let tang = tangent_from_potentials(b, pc, sc, None, 0.0);
        TangentField::new(0.8, move |n| {
            p1.coulomb_term(n) + p2.coulomb_term(n) + tang.at(&NullDirection::new(n))
        })
    }

    #[test]
    fn charge_forms_agree() {
        let b = basis();
        let sm = generic_smearing(&b);
        assert!(sm.residual < 1e-8, "residual = {}", sm.residual);
        let vm = generic_vminus(&b);
        let q = charge_functional(&sm, &vm, &b.quad);
        assert!(q.form1.abs() > 1e-3, "test should be nontrivial");
        assert!(
            q.discrepancy < 1e-6 * q.form1.abs().max(1.0),
            "q1 = {}, q2 = {}",
            q.form1,
            q.form2
        );
    }

    #[test]
    fn constant_smearing_is_trivial() {
        let b = basis();
        let eps = Homogeneous::constant(0, 1.0);
        let sm = ChargeSmearing::from_potential(&eps, &b).unwrap();
        let vm = generic_vminus(&b);
        let q = charge_functional(&sm, &vm, &b.quad);
        assert!(q.form1.abs() < 1e-10 && q.form2.abs() < 1e-10);
    }

    #[test]
    fn charge_gauge_invariant() {
        let b = basis();
        let sm = generic_smearing(&b);
        let vm = generic_vminus(&b);
        let q0 = charge_functional(&sm, &vm, &b.quad).form1;
        let inner = generic_vminus(&b);
        let shifted = TangentField::new(vm.charge, move |n| {
            let alpha = 0.7 - 0.2 * n[2] + 0.3 * n[0] * n[1];
            inner.at(&NullDirection::new(n)) + Vec4::from_spatial(1.0, n).scale(alpha)
        });
        let q1 = charge_functional(&sm, &shifted, &b.quad).form1;
        assert!((q0 - q1).abs() < 1e-10, "q0 = {q0}, q1 = {q1}");
    }

    #[test]
    fn rejects_wrong_potential_degree() {
        let b = basis();
        let eps = Homogeneous::constant(-1, 1.0);
        assert!(matches!(
            ChargeSmearing::from_potential(&eps, &b),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn static_coulomb_w_is_minus_q_l() {
        let q = 1.7;
        let vm = TangentField::new(q, move |_| Vec4::new(q, 0.0, 0.0, 0.0));
        for n in [[0.0, 0.0, 1.0], [0.8, -0.6, 0.0], [0.36, 0.48, 0.8]] {
            let dir = NullDirection::new(n);
            let w = w_of_limit(&vm, &dir);
            let expect = dir.l().scale(-q);
            assert!((w - expect).euclid_norm() < 1e-8, "n = {n:?}, w = {w:?}");
        }
    }

    #[test]
    fn w_equals_l_times_divergence() {
        let b = basis();
        let vm = generic_vminus(&b);
        // directions away from the poles: the harmonic-gradient closures
        // behind the tangential part are singular there
        for n in [[-0.3, 0.9, -0.3], [0.6, -0.8, 0.0], [0.5, 0.5, 0.70710678]] {
            let dir = NullDirection::new(n);
            let w = w_of_limit(&vm, &dir);
            let expect = dir.l().scale(vm.divergence(&dir));
            assert!(
                (w - expect).euclid_norm() < 1e-5 * (1.0 + expect.euclid_norm()),
                "n = {n:?}, w = {w:?}, expect = {expect:?}"
            );
        }
    }

    #[test]
    fn b_asymptote_matches_field_contraction() {
        let angular = Homogeneous::new(0, |n: [f64; 3]| 1.0 + 0.3 * n[2] - 0.2 * n[0]);
        let data =
            FreeFieldData::mode_sech([0.5, -0.3, 0.2], 0.0, 1.5, Some(angular)).unwrap();
        let quad = SphereQuadrature::new(32).unwrap();
        let k = NullDirection::new([0.6, 0.8, 0.0]);
        let s = 0.7;
        let expect = b_asymptote(&data.profile, s, &k);
        let radii = [128.0, 256.0, 512.0, 1024.0];
        let mut samples: Vec<(f64, Vec4)> = Vec::new();
        for r in radii {
            let x = k.l().scale(r) + Vec4::T.scale(s);
            let (_, f) = kirchhoff_eval(&data, &x, &quad);
            samples.push((1.0 / r, f.contract_first(&x).scale(r)));
        }
        let mut lim = Vec4::ZERO;
        for c in 0..4 {
            let comp: Vec<(f64, f64)> = samples.iter().map(|(h, v)| (*h, v[c])).collect();
            lim[c] = limit_extrapolate(&comp).unwrap().0;
        }
        assert!(
            (lim - expect).euclid_norm() < 1e-3 * (1.0 + expect.euclid_norm()),
            "lim = {lim:?}, expect = {expect:?}"
        );
    }

    #[test]
    fn memory_phase_pure_gauge_is_momentum_independent() {
        let quad = SphereQuadrature::new(24).unwrap();
        // V(−∞) = l: δ = −(e/2π)·4π = −2e for every timelike p
        let vm = TangentField::new(0.0, |n| Vec4::from_spatial(1.0, n));
        let e = 0.7;
        let p1 = Vec4::boost_velocity(0.0, [0.0, 0.0, 1.0]).scale(2.0);
        let p2 = Vec4::boost_velocity(0.8, [1.0, -0.5, 0.3]).scale(0.4);
        let d1 = memory_phase(e, &p1, &vm, &quad).unwrap();
        let d2 = memory_phase(e, &p2, &vm, &quad).unwrap();
        assert!((d1 + 2.0 * e).abs() < 1e-10, "d1 = {d1}");
        assert!((d1 - d2).abs() < 1e-8, "d2 = {d2}");
    }

    #[test]
    fn memory_phase_rejects_spacelike_momentum() {
        let quad = SphereQuadrature::new(8).unwrap();
        let vm = TangentField::new(0.0, |_| Vec4::ZERO);
        assert!(matches!(
            memory_phase(1.0, &Vec4::new(0.5, 1.0, 0.0, 0.0), &vm, &quad),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn sigma_phase_of_constant_potential() {
        // ∫ d²l/(v·l)² = 4π for any unit timelike v, so Σ_c = e·c
        let quad = SphereQuadrature::new(32).unwrap();
        let phi = Homogeneous::constant(0, 1.3);
        let v = Vec4::boost_velocity(0.5, [0.2, -1.0, 0.4]);
        let s = sigma_phase(0.7, &v, &phi, &quad).unwrap();
        assert!((s - 0.7 * 1.3).abs() < 1e-8, "s = {s}");
    }

    #[test]
    fn kick_routes_agree() {
        let angular = Homogeneous::new(0, |n: [f64; 3]| 1.0 + 0.25 * n[1] + 0.2 * n[0] * n[2]);
        let data =
            FreeFieldData::mode_step([0.4, 0.3, -0.2], 0.0, 1.2, Some(angular)).unwrap();
        let quad = SphereQuadrature::new(32).unwrap();
        let v = Vec4::boost_velocity(0.4, [0.0, 0.3, 1.0]);
        let x0 = Vec4::new(0.5, 0.2, -0.1, 0.3);
        let rep =
            memory_kick(0.9, 1.4, &v, &x0, &data, &quad, (-30.0, 30.0), 4001).unwrap();
        let scale = rep.celestial.euclid_norm().max(1e-12);
        assert!(scale > 1e-4, "kick should be nontrivial, got {scale:e}");
        assert!(
            (rep.time_integral - rep.celestial).euclid_norm() < 1e-4 * scale,
            "time = {:?}, celestial = {:?}",
            rep.time_integral,
            rep.celestial
        );
        assert!(
            (rep.grad_phase - rep.celestial).euclid_norm() < 1e-4 * scale,
            "grad = {:?}, celestial = {:?}",
            rep.grad_phase,
            rep.celestial
        );
    }

    #[test]
    fn finite_radius_report() {
        let angular = Homogeneous::new(0, |n: [f64; 3]| 1.0 + 0.3 * n[2]);
        // step data: the past limit is nonzero, so the spacelike and kick
        // limits are nontrivial
        let data =
            FreeFieldData::mode_step([0.5, -0.3, 0.2], 0.0, 2.0, Some(angular)).unwrap();
        let quad = SphereQuadrature::new(64).unwrap();
        let k = NullDirection::new([0.6, 0.8, 0.0]);
        let z = Vec4::new(0.0, 0.0, 0.0, 1.0);
        let rep = finite_r_integrals(
            &data,
            10.0,
            &k,
            0.3,
            &z,
            &quad,
            &[6.0, 12.0, 24.0, 48.0],
            (-40.0, 40.0),
            800,
        )
        .unwrap();
        // the full-line integral of the reconstructed field vanishes at any R
        assert!(rep.full_line.max_abs() < 1e-3, "{:?}", rep.full_line);
        let scale = rep.half_line_null_expected.max_abs().max(1e-12);
        assert!(
            rep.half_line_null
                .sub(&rep.half_line_null_expected)
                .max_abs()
                < 1e-3 * scale,
            "null: {:?} vs {:?}",
            rep.half_line_null,
            rep.half_line_null_expected
        );
        // independent oracle for the spacelike limit: the δ(z·l) integral
        // collapses to the great circle n ⊥ z
        let vminus = data.profile.limit_minus().unwrap();
        let mut circle = AntiSym::ZERO;
        let m = 256;
        for j in 0..m {
            let phi = TWO_PI * j as f64 / m as f64;
            let n = [phi.cos(), phi.sin(), 0.0];
            let l = Vec4::from_spatial(1.0, n);
            circle = circle.add(&AntiSym::wedge(&l, &vminus.at(&NullDirection::new(n))));
        }
        circle = circle.scale(-1.0 / (TWO_PI * m as f64) * TWO_PI);
        let sscale = circle.max_abs().max(1e-12);
        assert!(
            rep.half_line_spacelike_expected.sub(&circle).max_abs() < 1e-3 * sscale,
            "mollified {:?} vs circle {:?}",
            rep.half_line_spacelike_expected,
            circle
        );
        assert!(
            rep.half_line_spacelike.sub(&circle).max_abs() < 2e-2 * sscale,
            "spacelike {:?} vs circle {:?}",
            rep.half_line_spacelike,
            circle
        );
        let kscale = rep.kick_expected.max_abs().max(1e-12);
        assert!(
            rep.kick_integral.sub(&rep.kick_expected).max_abs() < 1e-6 * kscale,
            "kick {:?} vs {:?}",
            rep.kick_integral,
            rep.kick_expected
        );
    }

    #[test]
    fn finite_r_rejects_non_spacelike_probe() {
        let data = FreeFieldData::mode_sech([0.1, 0.0, 0.0], 0.0, 1.0, None).unwrap();
        let quad = SphereQuadrature::new(8).unwrap();
        let k = NullDirection::new([0.0, 0.0, 1.0]);
        let bad = Vec4::new(1.0, 0.0, 0.0, 0.0);
        assert!(finite_r_integrals(
            &data, 5.0, &k, 0.0, &bad, &quad, &[4.0, 8.0, 16.0], (-10.0, 10.0), 200
        )
        .is_err());
    }

    #[test]
    fn soft_relation_and_ir_flip() {
        let event = ScatteringEvent::new(
            vec![
                PointParticle::new(1.0, Vec4::boost_velocity(0.3, [1.0, 0.0, 0.0])).unwrap(),
                PointParticle::new(-0.4, Vec4::boost_velocity(0.2, [0.0, 1.0, 0.0])).unwrap(),
            ],
            vec![
                PointParticle::new(0.3, Vec4::boost_velocity(0.5, [0.0, 0.0, 1.0])).unwrap(),
                PointParticle::new(0.3, Vec4::boost_velocity(0.1, [1.0, 1.0, 0.0])).unwrap(),
            ],
            Transition::default_step(),
        )
        .unwrap();
        let out_data = FreeFieldData::mode_sech([0.3, -0.2, 0.1], 0.0, 1.4, None).unwrap();
        // consistent incoming data: add a pure transition toward the jump of
        // the current tail, V(−∞) gains V_j(+∞) − V_j(−∞)
        let vj = current_profile(&event);
        let jp = vj.limit_plus().unwrap();
        let jm = vj.limit_minus().unwrap();
        let d = TangentField::new(0.0, move |n| {
            let dir = NullDirection::new(n);
            jp.at(&dir) - jm.at(&dir)
        });
        let step = step_toward(&d, 0.0, 1.4).unwrap();
        let in_data = FreeFieldData::new(out_data.profile.combine(1.0, &step, 1.0)).unwrap();
        let dirs: Vec<NullDirection> = [
            [0.0, 0.0, 1.0],
            [0.8, -0.6, 0.0],
            [0.5, 0.5, 0.70710678],
            [-0.3, 0.9, -0.3],
        ]
        .iter()
        .map(|n| NullDirection::new(*n))
        .collect();
        let quad = SphereQuadrature::new(24).unwrap();
        let rep = soft_relation(&event, &out_data, &in_data, &dirs, &quad, 40.0, 4000).unwrap();
        assert!(rep.residual < 1e-6, "residual = {:e}", rep.residual);
        assert_eq!(rep.out_class, IrClass::Regular);
        assert_eq!(rep.in_class, IrClass::Singular);
    }

    #[test]
    fn strominger_matching_residuals() {
        let b = basis();
        let phi = Homogeneous::new(0, |n: [f64; 3]| 0.5 * n[2] + 0.2 * n[0] * n[1]);
        let pv: Vec<f64> = b.quad.nodes.iter().map(|n| phi.at(&NullDirection::new(*n))).collect();
        let pc = b.analyze(&pv);
        let nc = pc.len();
        let limit = tangent_from_potentials(&b, pc, vec![0.0; nc], None, 0.0);
        let v = step_toward(&limit, 0.0, 1.2).unwrap();
        // rising counterpart: limit at +∞ equals the falling profile's past limit
        let lm = limit.clone();
        let rise_v: VecFn = Arc::new(move |s, n| {
            lm.at(&NullDirection::new(n)).scale(0.5 * (1.0 + (s / 1.2).tanh()))
        });
        let lm2 = limit.clone();
        let rise_vdot: VecFn = Arc::new(move |s, n| {
            lm2.at(&NullDirection::new(n))
                .scale(0.5 / (1.2 * (s / 1.2).cosh().powi(2)))
        });
        let lm3 = limit.clone();
        let rise_vddot: VecFn = Arc::new(move |s, n| {
            lm3.at(&NullDirection::new(n))
                .scale(-(s / 1.2).tanh() / (1.2 * 1.2 * (s / 1.2).cosh().powi(2)))
        });
        let lm4 = limit.clone();
        let plus: LimitFn = Arc::new(move |n| lm4.at(&NullDirection::new(n)));
        let minus: LimitFn = Arc::new(|_| Vec4::ZERO);
        let v_prime = AsymptoteProfile::from_closures(
            rise_v, rise_vdot, rise_vddot, 0.0, 1.0, Some(minus), Some(plus),
        );
        let quad = SphereQuadrature::new(16).unwrap();
        let rep = strominger_check(&v, &v_prime, &quad).unwrap();
        assert!(rep.divergence_matching < 1e-8, "{}", rep.divergence_matching);
        assert!(rep.w_matching < 1e-8, "{}", rep.w_matching);
        assert!(rep.w_form < 1e-5, "{}", rep.w_form);
    }

    #[test]
    fn step_toward_rejects_charged_limit() {
        let vm = TangentField::new(1.0, |_| Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert!(matches!(
            step_toward(&vm, 0.0, 1.0),
            Err(Error::ChargedField(_))
        ));
    }
}
