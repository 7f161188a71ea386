//! Free fields from null data: Kirchhoff-type reconstruction of Lorenz
//! potentials, numerical extraction of null and spacelike asymptotes, the
//! matching property, Fourier profiles with infrared classification, and the
//! gauge function with direction-dependent limits at infinity.

use std::sync::Arc;

use num_complex::Complex64;

use crate::celestial::{Homogeneous, NullDirection, TangentField};
use crate::currents::{current_profile, AsymptoteProfile, LimitFn, ScatteringEvent, VecFn};
use crate::error::{Error, Result};
use crate::numerics::extrap::limit_extrapolate;
use crate::numerics::mollify::{Mollifier, MollifierKind};
use crate::numerics::sphere::SphereQuadrature;
use crate::numerics::sphharm::SphereBasis;
use crate::vec4::{AntiSym, Vec4};

pub type FourierFn = Arc<dyn Fn(f64, [f64; 3]) -> [Complex64; 4] + Send + Sync>;

/// Null data of a free field, normalized to V(+∞, l) = 0 and l·V = 0, with an
/// optional closed-form Fourier transform of V̇.
#[derive(Clone)]
pub struct FreeFieldData {
    pub profile: AsymptoteProfile,
    fourier: Option<FourierFn>,
}

impl FreeFieldData {
    pub fn new(profile: AsymptoteProfile) -> Result<Self> {
        if profile.charge.abs() > 1e-10 {
            return Err(Error::ChargedField(profile.charge));
        }
        // spot-check orthogonality l·V̇ = 0 and the V(+∞) = 0 convention
        for n in [[0.0, 0.0, 1.0], [0.8, -0.6, 0.0], [0.5, 0.5, -0.70710678]] {
            let dir = NullDirection::new(n);
            for s in [-3.0, 0.0, 4.0] {
                if dir.l().dot(&profile.vdot(s, &dir)).abs() > 1e-9 {
                    return Err(Error::InconsistentInput(
                        "null data not orthogonal to l".into(),
                    ));
                }
            }
            if let Some(plus) = profile.limit_plus() {
                if plus.at(&dir).euclid_norm() > 1e-9 {
                    return Err(Error::InconsistentInput(
                        "free data must have vanishing future limit".into(),
                    ));
                }
            }
        }
        Ok(FreeFieldData {
            profile,
            fourier: None,
        })
    }

    fn with_fourier(profile: AsymptoteProfile, fourier: FourierFn) -> Self {
        FreeFieldData {
            profile,
            fourier: Some(fourier),
        }
    }

    /// Infrared-singular step mode: V(s,l) = T(l)·(1 − tanh u)/2 with
    /// u = (s − c)/w and tangent polarization T built from a spatial
    /// amplitude vector, optionally modulated by a degree-0 angular factor.
    /// V(−∞) = T, V(+∞) = 0.
    pub fn mode_step(
        amplitude: [f64; 3],
        center: f64,
        width: f64,
        angular: Option<Homogeneous>,
    ) -> Result<Self> {
        if width <= 0.0 || !width.is_finite() {
            return Err(Error::InvalidWidth(width));
        }
        let pol = polarization_fn(amplitude, angular);
        let (p1, p2, p3, p4, p5) = (
            pol.clone(),
            pol.clone(),
            pol.clone(),
            pol.clone(),
            pol.clone(),
        );
        let w = width;
        let v: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            p1(n).scale(0.5 * (1.0 - u.tanh()))
        });
        let vdot: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            p2(n).scale(-0.5 / (w * u.cosh().powi(2)))
        });
        let vddot: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            p3(n).scale(u.tanh() / (w * w * u.cosh().powi(2)))
        });
        let minus: LimitFn = Arc::new(move |n| p4(n));
        let plus: LimitFn = Arc::new(|_| Vec4::ZERO);
        let profile =
            AsymptoteProfile::from_closures(v, vdot, vddot, 0.0, 1.0, Some(minus), Some(plus));
        // (1/2π)∫ V̇ e^{iωs} ds = −T·(wω/4)·e^{iωc}/sinh(πwω/2)
        let fourier: FourierFn = Arc::new(move |omega, n| {
            let t = p5(n);
            let a = 0.5 * std::f64::consts::PI * w * omega;
            let mag = if a.abs() < 1e-8 {
                // ω/sinh(πwω/2) → 2/(πw)
                -0.25 * w * 2.0 / (std::f64::consts::PI * w)
            } else {
                -0.25 * w * omega / a.sinh()
            };
            let phase = Complex64::from_polar(1.0, omega * center);
            let c = phase * mag;
            [c * t[0], c * t[1], c * t[2], c * t[3]]
        });
        Ok(FreeFieldData::with_fourier(profile, fourier))
    }

    /// Infrared-regular pulse mode: V(s,l) = T(l)·sech u, vanishing limits on
    /// both ends.
    pub fn mode_sech(
        amplitude: [f64; 3],
        center: f64,
        width: f64,
        angular: Option<Homogeneous>,
    ) -> Result<Self> {
        if width <= 0.0 || !width.is_finite() {
            return Err(Error::InvalidWidth(width));
        }
        let pol = polarization_fn(amplitude, angular);
        let (p1, p2, p3, p4) = (pol.clone(), pol.clone(), pol.clone(), pol.clone());
        let w = width;
        let v: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            p1(n).scale(1.0 / u.cosh())
        });
        let vdot: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            p2(n).scale(-u.tanh() / (w * u.cosh()))
        });
        let vddot: VecFn = Arc::new(move |s, n| {
            let u = (s - center) / w;
            let sech = 1.0 / u.cosh();
            p3(n).scale((sech - 2.0 * sech.powi(3)) / (w * w))
        });
        let zero: LimitFn = Arc::new(|_| Vec4::ZERO);
        let profile = AsymptoteProfile::from_closures(
            v,
            vdot,
            vddot,
            0.0,
            1.0,
            Some(zero.clone()),
            Some(zero),
        );
        // (1/2π)∫ V̇ e^{iωs} ds = −(iωw/2)·T·e^{iωc}·sech(πwω/2)
        let fourier: FourierFn = Arc::new(move |omega, n| {
            let t = p4(n);
            let a = 0.5 * std::f64::consts::PI * w * omega;
            let c = Complex64::new(0.0, -0.5 * omega * w / a.cosh())
                * Complex64::from_polar(1.0, omega * center);
            [c * t[0], c * t[1], c * t[2], c * t[3]]
        });
        Ok(FreeFieldData::with_fourier(profile, fourier))
    }

    pub fn has_analytic_fourier(&self) -> bool {
        self.fourier.is_some()
    }
}

/// Tangent polarization T(l) = (c·n, c⃗)·g(n), orthogonal to l = (1, n).
fn polarization_fn(
    amplitude: [f64; 3],
    angular: Option<Homogeneous>,
) -> Arc<dyn Fn([f64; 3]) -> Vec4 + Send + Sync> {
    Arc::new(move |n| {
        let radial = amplitude[0] * n[0] + amplitude[1] * n[1] + amplitude[2] * n[2];
        let mut t = Vec4::from_spatial(radial, amplitude);
        if let Some(g) = &angular {
            t = t.scale(g.at(&NullDirection::new(n)));
        }
        t
    })
}

/// Lorenz potential and field strength of a free field at a spacetime point,
/// from its null data: A_a(x) = −(1/2π)∫ V̇_a(x·l, l) d²l and the analogous
/// second-derivative formula for F.
///
/// The integral is Lorentz invariant (degree −2 integrand), so it is taken
/// over a cone section adapted to the evaluation point: the section of the
/// unit timelike vector along x + c·t with c = 1 + max(0, |x⃗| − x⁰). For
/// far points the section nodes concentrate where the integrand does, which
/// keeps the quadrature error uniform in |x|.
pub fn kirchhoff_eval(
    data: &FreeFieldData,
    x: &Vec4,
    quad: &SphereQuadrature,
) -> (Vec4, AntiSym) {
    let spatial = x.spatial();
    let r = (spatial[0] * spatial[0] + spatial[1] * spatial[1] + spatial[2] * spatial[2]).sqrt();
    let c = 1.0 + (r - x[0]).max(0.0);
    let mut u = *x;
    u[0] += c;
    let v = u.scale(1.0 / u.norm2().sqrt());
    kirchhoff_eval_frame(data, x, quad, &v)
}

/// Kirchhoff integral over the cone section of a fixed unit timelike
/// four-velocity. Used directly when a smooth dependence on x is needed
/// (finite-difference oracles); `kirchhoff_eval` chooses the frame per point.
pub fn kirchhoff_eval_frame(
    data: &FreeFieldData,
    x: &Vec4,
    quad: &SphereQuadrature,
    v: &Vec4,
) -> (Vec4, AntiSym) {
    let section = crate::numerics::sphere::ConeSection::new(quad, v)
        .expect("adapted frame velocity is unit timelike");
    let norm = -1.0 / (2.0 * std::f64::consts::PI);
    let mut a = Vec4::ZERO;
    let mut f = AntiSym::ZERO;
    for (l, w) in section.dirs.iter().zip(&section.weights) {
        let s = x.dot(l);
        a += data.profile.vdot_cone(s, l).scale(w * norm);
        f = f.add(&AntiSym::wedge(l, &data.profile.vddot_cone(s, l)).scale(w * norm));
    }
    (a, f)
}

/// Geometric radius schedule R₀·2^k, k = 0..count.
pub fn r_schedule(r0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| r0 * 2f64.powi(k as i32)).collect()
}

/// Extracted null asymptote with extrapolation error estimates.
pub struct NullAsymptote {
    /// limit of R·A(x ± Rl)
    pub v: Vec4,
    pub v_err: f64,
    /// limit of R·F(x ± Rl), the news tensor l ∧ V̇
    pub news: AntiSym,
    pub news_err: f64,
}

/// Limit of R·A and R·F along x + sign·R·l by Richardson extrapolation over
/// a radius schedule. Fails loudly when the sequence does not converge.
pub fn extract_null_asymptote<S>(
    sampler: &S,
    x: &Vec4,
    dir: &NullDirection,
    sign: f64,
    radii: &[f64],
    rel_threshold: f64,
) -> Result<NullAsymptote>
where
    S: Fn(&Vec4) -> (Vec4, AntiSym),
{
    if radii.len() < 3 {
        return Err(Error::InvalidSequence);
    }
    let l = dir.l();
    let samples: Vec<(f64, Vec4, AntiSym)> = radii
        .iter()
        .map(|r| {
            let point = *x + l.scale(sign * r);
            let (a, f) = sampler(&point);
            (1.0 / r, a.scale(*r), f.scale(*r))
        })
        .collect();
    let mut v = Vec4::ZERO;
    let mut v_err = 0.0_f64;
    for c in 0..4 {
        let comp: Vec<(f64, f64)> = samples.iter().map(|(h, a, _)| (*h, a[c])).collect();
        let (lim, err) = limit_extrapolate(&comp)?;
        v[c] = lim;
        v_err = v_err.max(err.abs());
    }
    let mut news = AntiSym::ZERO;
    let mut news_err = 0.0_f64;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let comp: Vec<(f64, f64)> = samples.iter().map(|(h, _, f)| (*h, f.0[a][b])).collect();
            let (lim, err) = limit_extrapolate(&comp)?;
            news.0[a][b] = lim;
            news.0[b][a] = -lim;
            news_err = news_err.max(err.abs());
        }
    }
    let scale = v.euclid_norm().max(news.max_abs()).max(1e-30);
    if v_err.max(news_err) > rel_threshold * scale {
        return Err(Error::Divergent {
            estimate: v_err.max(news_err),
            threshold: rel_threshold * scale,
        });
    }
    Ok(NullAsymptote {
        v,
        v_err,
        news,
        news_err,
    })
}

/// The three mutually consistent asymptotes of a scattering field
/// configuration: total potentials at future and past null infinity and the
/// current asymptote.
pub struct ScatteringTriple {
    pub v: AsymptoteProfile,
    pub v_prime: AsymptoteProfile,
    pub vj: AsymptoteProfile,
}

/// Assemble a consistent triple from an event and free outgoing null data:
/// V = V^out + V^j(+∞); V′ is then fixed by the matching property.
pub fn assemble_scattering(
    event: &ScatteringEvent,
    out_free: &FreeFieldData,
) -> Result<ScatteringTriple> {
    let vj = current_profile(event);
    let q = event.total_charge();
    let plus = vj
        .limit_plus()
        .ok_or_else(|| Error::InconsistentInput("current limits missing".into()))?;
    let plus_fn: LimitFn = {
        let p = plus.clone();
        Arc::new(move |n| p.at(&NullDirection::new(n)))
    };
    let adv = AsymptoteProfile::constant(plus_fn, q);
    let v = out_free.profile.combine(1.0, &adv, 1.0);
    let vminus = v
        .limit_minus()
        .ok_or_else(|| Error::InconsistentInput("past limit missing".into()))?;
    let vminus_fn: LimitFn = Arc::new(move |n| vminus.at(&NullDirection::new(n)));
    let vminus_const = AsymptoteProfile::constant(vminus_fn, q);
    // V′(s,l) = V(−∞,l) + V^j(s,l) − V(s,l)
    let v_prime = vminus_const.combine(1.0, &vj, 1.0).combine(1.0, &v, -1.0);
    Ok(ScatteringTriple { v, v_prime, vj })
}

/// Sup-norm residuals of the matching identities over sample grids.
pub struct MatchReport {
    /// V(s,l) + V′(s,l) − V^j(s,l) − V(−∞,l)
    pub matching: f64,
    /// V(−∞,l) − V′(+∞,l)
    pub antipodal: f64,
    /// V(+∞,l) − V^j(+∞,l) and V′(−∞,l) − V^j(−∞,l)
    pub current_limits: f64,
    /// vanishing of V^out(+∞) and V^in′(−∞)
    pub free_normalization: f64,
    /// l·V − q and l·V′ − q over all samples
    pub gauss: f64,
}

impl MatchReport {
    pub fn max(&self) -> f64 {
        self.matching
            .max(self.antipodal)
            .max(self.current_limits)
            .max(self.free_normalization)
            .max(self.gauss)
    }
}

pub fn matching_verify(
    v: &AsymptoteProfile,
    v_prime: &AsymptoteProfile,
    vj: &AsymptoteProfile,
    quad: &SphereQuadrature,
    s_samples: &[f64],
) -> Result<MatchReport> {
    if (v.charge - vj.charge).abs() > 1e-10 || (v_prime.charge - vj.charge).abs() > 1e-10 {
        return Err(Error::InconsistentCharge(
            (v.charge - vj.charge).abs().max((v_prime.charge - vj.charge).abs()),
        ));
    }
    let need = |p: &AsymptoteProfile| -> Result<(TangentField, TangentField)> {
        match (p.limit_minus(), p.limit_plus()) {
            (Some(m), Some(pl)) => Ok((m, pl)),
            _ => Err(Error::InconsistentInput("profile limits missing".into())),
        }
    };
    let (v_m, v_p) = need(v)?;
    let (vp_m, vp_p) = need(v_prime)?;
    let (vj_m, vj_p) = need(vj)?;
    let mut rep = MatchReport {
        matching: 0.0,
        antipodal: 0.0,
        current_limits: 0.0,
        free_normalization: 0.0,
        gauss: 0.0,
    };
    let q = vj.charge;
    for n in &quad.nodes {
        let dir = NullDirection::new(*n);
        let l = dir.l();
        let vm = v_m.at(&dir);
        rep.antipodal = rep.antipodal.max((vm - vp_p.at(&dir)).euclid_norm());
        rep.current_limits = rep
            .current_limits
            .max((v_p.at(&dir) - vj_p.at(&dir)).euclid_norm())
            .max((vp_m.at(&dir) - vj_m.at(&dir)).euclid_norm());
        // V^out(+∞) = V(+∞) − V^j(+∞) = 0 and V^in′(−∞) = V′(−∞) − V^j(−∞) = 0
        rep.free_normalization = rep
            .free_normalization
            .max((v_p.at(&dir) - vj_p.at(&dir)).euclid_norm())
            .max((vp_m.at(&dir) - vj_m.at(&dir)).euclid_norm());
        for s in s_samples {
            let res = v.v(*s, &dir) + v_prime.v(*s, &dir) - vj.v(*s, &dir) - vm;
            rep.matching = rep.matching.max(res.euclid_norm());
            rep.gauss = rep
                .gauss
                .max((l.dot(&v.v(*s, &dir)) - q).abs())
                .max((l.dot(&v_prime.v(*s, &dir)) - q).abs());
        }
    }
    Ok(rep)
}

/// Spacelike asymptotes of potential and field from the past limit function:
/// A^as(y) = (1/2π)∫ V(−∞,l) δ(y·l) d²l and the δ′ formula for F^as, by
/// mollified quadrature with width-to-zero extrapolation.
pub fn spacelike_tail(
    vminus: &TangentField,
    y: &Vec4,
    quad: &SphereQuadrature,
    widths: &[f64],
) -> Result<(Vec4, AntiSym)> {
    if y.norm2() >= 0.0 {
        return Err(Error::OutOfDomain(
            "spacelike asymptote requires y² < 0".into(),
        ));
    }
    if widths.len() < 3 {
        return Err(Error::InvalidSequence);
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI);
    let mut a_samples: Vec<(f64, Vec4)> = Vec::new();
    let mut f_samples: Vec<(f64, AntiSym)> = Vec::new();
    for h in widths {
        let md = Mollifier::new(MollifierKind::Delta, *h)?;
        let mdp = Mollifier::new(MollifierKind::DeltaPrime, *h)?;
        let mut a = Vec4::ZERO;
        let mut f = AntiSym::ZERO;
        for (i, w) in quad.weights.iter().enumerate() {
            let dir = NullDirection::new(quad.nodes[i]);
            let l = dir.l();
            let arg = y.dot(&l);
            let val = vminus.at(&dir);
            a += val.scale(w * norm * md.eval(arg));
            f = f.add(&AntiSym::wedge(&l, &val).scale(w * norm * mdp.eval(arg)));
        }
        // Gaussian mollification errors are even in the width
        a_samples.push((h * h, a));
        f_samples.push((h * h, f));
    }
    let mut a = Vec4::ZERO;
    for c in 0..4 {
        let comp: Vec<(f64, f64)> = a_samples.iter().map(|(h, v)| (*h, v[c])).collect();
        a[c] = limit_extrapolate(&comp)?.0;
    }
    let mut f = AntiSym::ZERO;
    for p in 0..4 {
        for r in (p + 1)..4 {
            let comp: Vec<(f64, f64)> = f_samples.iter().map(|(h, m)| (*h, m.0[p][r])).collect();
            let lim = limit_extrapolate(&comp)?.0;
            f.0[p][r] = lim;
            f.0[r][p] = -lim;
        }
    }
    Ok((a, f))
}

/// Fourier transform Ṽ̇(ω, l) = (1/2π)∫ V̇(s,l) e^{iωs} ds on a declared ω
/// grid, together with its ω → 0⁺ value.
pub struct FourierProfile {
    eval: FourierFn,
    pub grid: Vec<f64>,
}

impl FourierProfile {
    pub fn value(&self, omega: f64, dir: &NullDirection) -> [Complex64; 4] {
        (self.eval)(omega, dir.unit())
    }

    /// One-sided limit at ω = 0⁺.
    pub fn zero_plus(&self, dir: &NullDirection) -> [Complex64; 4] {
        (self.eval)(0.0, dir.unit())
    }

    /// Sup residual of conj(Ṽ̇(ω)) = Ṽ̇(−ω) over the grid at sample
    /// directions.
    pub fn reality_residual(&self, dirs: &[NullDirection]) -> f64 {
        let mut max = 0.0_f64;
        for d in dirs {
            for w in &self.grid {
                let plus = self.value(*w, d);
                let minus = self.value(-*w, d);
                for c in 0..4 {
                    max = max.max((plus[c].conj() - minus[c]).norm());
                }
            }
        }
        max
    }
}

/// Build the Fourier profile: the closed form when the data carries one,
/// otherwise a piecewise-linear Filon rule on a uniform s grid.
pub fn fourier_profile(
    data: &FreeFieldData,
    omega_grid: &[f64],
    s_max: f64,
    s_samples: usize,
) -> Result<FourierProfile> {
    if omega_grid.is_empty()
        || omega_grid.windows(2).any(|w| w[1] <= w[0])
        || omega_grid[0] > 0.0
        || *omega_grid.last().unwrap() < 0.0
    {
        return Err(Error::InvalidGrid);
    }
    let eval: FourierFn = if let Some(f) = &data.fourier {
        f.clone()
    } else {
        let profile = data.profile.clone();
        Arc::new(move |omega, n| {
            let dir = NullDirection::new(n);
            filon_transform(|s| profile.vdot(s, &dir), omega, s_max, s_samples)
        })
    };
    Ok(FourierProfile {
        eval,
        grid: omega_grid.to_vec(),
    })
}

/// (1/2π)∫_{−s_max}^{s_max} f(s) e^{iωs} ds with piecewise-linear Filon
/// quadrature (exact oscillatory moments on each interval).
pub fn filon_transform<F: Fn(f64) -> Vec4>(
    f: F,
    omega: f64,
    s_max: f64,
    samples: usize,
) -> [Complex64; 4] {
    let n = samples.max(8);
    let h = 2.0 * s_max / n as f64;
    // moments ∫₀^h e^{iωu} du and ∫₀^h u e^{iωu} du
    let (m0, m1) = if (omega * h).abs() < 1e-5 {
        let x = omega * h;
        (
            Complex64::new(h - h * x * x / 6.0, h * x / 2.0 - h * x * x * x / 24.0),
            Complex64::new(
                h * h / 2.0 - h * h * x * x / 8.0,
                h * h * x / 3.0 - h * h * x * x * x / 30.0,
            ),
        )
    } else {
        let iw = Complex64::new(0.0, omega);
        let e = Complex64::from_polar(1.0, omega * h);
        let m0 = (e - 1.0) / iw;
        let m1 = e * h / iw - (e - 1.0) / (iw * iw);
        (m0, m1)
    };
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    let mut prev = f(-s_max);
    for k in 0..n {
        let s0 = -s_max + k as f64 * h;
        let next = f(s0 + h);
        let phase = Complex64::from_polar(1.0, omega * s0);
        for c in 0..4 {
            let a = prev[c];
            let b = (next[c] - prev[c]) / h;
            acc[c] += phase * (m0 * a + m1 * b);
        }
        prev = next;
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI);
    for c in acc.iter_mut() {
        *c *= norm;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrClass {
    Regular,
    Singular,
}

/// Infrared classification: singular iff the sphere average of ‖Ṽ̇(0⁺,l)‖
/// exceeds the tolerance times the profile scale.
pub fn ir_classify(
    fp: &FourierProfile,
    quad: &SphereQuadrature,
    scale: f64,
    tol: f64,
) -> IrClass {
    let mut mean = 0.0;
    let mut total_w = 0.0;
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let z = fp.zero_plus(&NullDirection::new(*n));
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        mean += w * norm;
        total_w += w;
    }
    mean /= total_w;
    if mean > tol * scale.max(1e-300) {
        IrClass::Singular
    } else {
        IrClass::Regular
    }
}

/// Sup residual of V(−∞, l) = −2π Ṽ̇(0, l) at sample directions.
pub fn zero_mode_vs_limit(data: &FreeFieldData, fp: &FourierProfile, dirs: &[NullDirection]) -> f64 {
    let mut max = 0.0_f64;
    let minus = match data.profile.limit_minus() {
        Some(m) => m,
        None => return f64::INFINITY,
    };
    for d in dirs {
        let z = fp.zero_plus(d);
        let vm = minus.at(d);
        for c in 0..4 {
            let expect = -vm[c] / (2.0 * std::f64::consts::PI);
            max = max.max((z[c] - Complex64::new(expect, 0.0)).norm());
        }
    }
    max
}

/// The gauge function with direction-dependent limits at infinity, and its
/// gradient.
pub struct LgtValue {
    pub lambda: f64,
    /// covariant components ∂λ/∂x^a
    pub grad: Vec4,
    /// set when x is within tolerance of the light cone; values are then
    /// regularized, not exact
    pub near_cone: bool,
}

/// Workspace for the gauge function: the angular function α, its harmonic
/// coefficients and its wave-operator image ∂²α on the cone section.
pub struct LgtGauge {
    alpha: Homogeneous,
    /// harmonic coefficients of Δ_{S²}α
    lap_coeffs: Vec<f64>,
    /// values of ∂²α = −Δ_{S²}α at the basis nodes
    wave_alpha: Vec<f64>,
    alpha_mean: f64,
    basis: SphereBasis,
}

impl LgtGauge {
    pub fn new(alpha: Homogeneous, basis: SphereBasis) -> Result<Self> {
        if alpha.degree != 0 {
            return Err(Error::DegreeMismatch {
                expected: 0,
                got: alpha.degree,
            });
        }
        let vals: Vec<f64> = basis
            .quad
            .nodes
            .iter()
            .map(|n| alpha.at(&NullDirection::new(*n)))
            .collect();
        let alpha_coeffs = basis.analyze(&vals);
        let lap = basis.laplace_coeffs(&alpha_coeffs);
        let wave_alpha: Vec<f64> = basis
            .quad
            .nodes
            .iter()
            .map(|n| -basis.synth(&lap, *n))
            .collect();
        let alpha_mean = alpha_coeffs[0] / (4.0 * std::f64::consts::PI).sqrt();
        Ok(LgtGauge {
            alpha,
            lap_coeffs: lap,
            wave_alpha,
            alpha_mean,
            basis,
        })
    }

    /// ∂²α(l) at a direction (degree −2 extension evaluated on the section).
    pub fn wave_alpha_at(&self, dir: &NullDirection) -> f64 {
        -self.basis.synth(&self.lap_coeffs, dir.unit())
    }

    /// λ(x) and ∂λ(x). Timelike x: boost-frame average of α (exact in the
    /// quadrature). Spacelike x: log-kernel form on a section aligned with x.
    /// Near the cone both degenerate; a smoothed log form is used and flagged.
    pub fn eval(&self, x: &Vec4) -> Result<LgtValue> {
        let x2 = x.norm2();
        let scale2 = x.euclid_norm().powi(2).max(1e-300);
        let near_cone = x2.abs() < 1e-6 * scale2;
        let quad = &self.basis.quad;
        let lambda;
        let mut grad = Vec4::ZERO;
        if x2 > 0.0 && !near_cone {
            // boost to the frame in which x points along the time axis
            let tau = x2.sqrt();
            let v = x.scale(x[0].signum() / tau);
            let section = crate::numerics::sphere::ConeSection::new(quad, &v)?;
            let mut acc = 0.0;
            for (l, w) in section.dirs.iter().zip(&section.weights) {
                acc += w * self.alpha.eval_cone(l);
            }
            lambda = acc / (4.0 * std::f64::consts::PI);
            // gradient on the fixed-time section. The kernel 1/(x·l) peaks
            // sharply along x̂ when x is nearly null, so the peak value of
            // ∂²α is subtracted and its kernel moment restored in closed form:
            // ∫ dΩ/(x⁰ − r·n·x̂) = (2π/r)·log((x⁰+r)/(x⁰−r)), and similarly
            // for the first moment.
            let pi2 = 2.0 * std::f64::consts::PI;
            let x0 = x[0];
            let r = x.spatial().iter().map(|c| c * c).sum::<f64>().sqrt();
            let (j0, jr, nx) = if r > 1e-8 * x0.abs() {
                let lr = ((x0 + r) / (x0 - r)).ln();
                let sp = x.spatial();
                let nx = [sp[0] / r, sp[1] / r, sp[2] / r];
                (pi2 / r * lr, pi2 * (-2.0 / r + x0 / (r * r) * lr), nx)
            } else {
                (2.0 * pi2 / x0, 0.0, [0.0, 0.0, 1.0])
            };
            // the kernel peaks at n = x̂ for future x and n = −x̂ for past x
            let np = if x0 > 0.0 {
                nx
            } else {
                [-nx[0], -nx[1], -nx[2]]
            };
            let peak = -self.basis.synth(&self.lap_coeffs, np);
            let mut g = Vec4::ZERO;
            for (i, w) in quad.weights.iter().enumerate() {
                let l = quad.null_dir(i);
                let rem = self.wave_alpha[i] - peak;
                let kern = w * rem / x.dot(&l);
                for c in 0..4 {
                    g[c] += kern * l.lower(c);
                }
            }
            g[0] += peak * j0;
            for c in 1..4 {
                g[c] -= peak * jr * nx[c - 1];
            }
            grad = g.scale(-1.0 / (4.0 * std::f64::consts::PI));
        } else if !near_cone {
            // spacelike: aligned log-kernel form; gradient by central
            // differences of the (smooth) aligned form
            lambda = self.log_form_aligned(x);
            let h = 1e-5 * scale2.sqrt();
            for c in 0..4 {
                let mut xp = *x;
                let mut xm = *x;
                xp[c] += h;
                xm[c] -= h;
                grad[c] = (self.log_form_aligned(&xp) - self.log_form_aligned(&xm)) / (2.0 * h);
            }
        } else {
            // within the near-cone band both exact forms degenerate; fall back
            // to a smoothed log kernel and flag the value as regularized
            lambda = self.log_form_smoothed(x);
            let h = 1e-5 * scale2.sqrt();
            for c in 0..4 {
                let mut xp = *x;
                let mut xm = *x;
                xp[c] += h;
                xm[c] -= h;
                grad[c] = (self.log_form_smoothed(&xp) - self.log_form_smoothed(&xm)) / (2.0 * h);
            }
        }
        Ok(LgtValue {
            lambda,
            grad,
            near_cone,
        })
    }

    /// λ(x) = −(1/4π)∫ {log(|x·l|/t·l) ∂²α(l) − α(l)/(t·l)²} d²l for
    /// spacelike x, on a cone section adapted to x: the section velocity v is
    /// orthogonal to x and the third axis of its frame is along x, so
    /// x·l = −ρ·m_z with ρ = √(−x²) and m_z the Gauss coordinate of the base
    /// rule. The log singularity then sits exactly on the equator m_z = 0 and
    /// is removed by subtracting the equator value in the m_z integral
    /// (∫₋₁¹ log|m_z| dm_z = −2 exactly).
    fn log_form_aligned(&self, x: &Vec4) -> f64 {
        let x2 = x.norm2();
        debug_assert!(x2 < 0.0);
        let rho = (-x2).sqrt();
        let e3 = x.scale(1.0 / rho);
        let mut v = Vec4::T + e3.scale(Vec4::T.dot(&e3));
        v = v.scale(1.0 / v.norm2().sqrt());
        // complete (e1, e2, e3) to a spatial triad of the v frame
        let mut pair: Vec<Vec4> = Vec::new();
        for s in [
            Vec4::new(0.0, 1.0, 0.0, 0.0),
            Vec4::new(0.0, 0.0, 1.0, 0.0),
            Vec4::new(0.0, 0.0, 0.0, 1.0),
            Vec4::new(0.0, 1.0, 1.0, 1.0),
        ] {
            let mut e = s - v.scale(s.dot(&v)) + e3.scale(s.dot(&e3));
            for p in &pair {
                e = e + p.scale(e.dot(p));
            }
            let n2 = -e.norm2();
            if n2 > 1e-12 {
                pair.push(e.scale(1.0 / n2.sqrt()));
            }
            if pair.len() == 2 {
                break;
            }
        }
        let (e1, e2) = (pair[0], pair[1]);
        let quad = &self.basis.quad;
        let nphi = 2 * quad.order;
        let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
        // equator values of ∂²α on this section, at the azimuthal nodes
        let mut w_eq = vec![0.0; nphi];
        for (j, we) in w_eq.iter_mut().enumerate() {
            let phi = dphi * j as f64;
            let l = v + e1.scale(phi.cos()) + e2.scale(phi.sin());
            *we = self.wave_alpha_cone(&l);
        }
        let mut acc = 0.0;
        let mut eq_sum = 0.0;
        for (i, w) in quad.weights.iter().enumerate() {
            let m = quad.nodes[i];
            let l = v + e1.scale(m[0]) + e2.scale(m[1]) + e3.scale(m[2]);
            let wa = self.wave_alpha_cone(&l);
            let a = self.alpha.eval_cone(&l);
            let l0 = l[0];
            let w0 = w_eq[i % nphi];
            // smooth part: log(ρ/t·l)·∂²α − α/(t·l)², plus the regular
            // remainder (∂²α − ∂²α|eq)·log|m_z|
            acc += w * ((rho.ln() - l0.ln()) * wa - a / (l0 * l0));
            acc += w * m[2].abs().ln() * (wa - w0);
        }
        for w0 in &w_eq {
            eq_sum += dphi * w0;
        }
        acc += -2.0 * eq_sum;
        -acc / (4.0 * std::f64::consts::PI)
    }

    /// λ(x) = ᾱ − (1/4π)∫ log|x·l| ∂²α(l) d²l on the fixed-time section,
    /// with the logarithm smoothed at a scale tied to the near-cone band.
    fn log_form_smoothed(&self, x: &Vec4) -> f64 {
        let quad = &self.basis.quad;
        let eta = 1e-4 * x.euclid_norm().max(1e-30);
        let mut acc = 0.0;
        for (i, w) in quad.weights.iter().enumerate() {
            let l = quad.null_dir(i);
            let arg = x.dot(&l);
            acc += w * 0.5 * (arg * arg + eta * eta).ln() * self.wave_alpha[i];
        }
        self.alpha_mean - acc / (4.0 * std::f64::consts::PI)
    }

    fn wave_alpha_cone(&self, l: &Vec4) -> f64 {
        -self.basis.synth(&self.lap_coeffs, NullDirection::new(l.spatial()).unit()) / (l[0] * l[0])
    }
}

/// Fit of the large-R behavior of λ and ∂λ along x ± Rl.
pub struct LgtDiagnostics {
    pub lambda_limit: f64,
    pub lambda_err: f64,
    pub alpha_value: f64,
    /// fitted coefficient of (log R)/R in ∂λ, covariant components
    pub log_slope: Vec4,
    /// ∓ ½ l_a ∂²α(l)
    pub expected_slope: Vec4,
    pub fit_residual: f64,
}

pub fn asymptote_diagnostics(
    gauge: &LgtGauge,
    x: &Vec4,
    dir: &NullDirection,
    sign: f64,
    radii: &[f64],
) -> Result<LgtDiagnostics> {
    let l = dir.l();
    let mut lam_samples: Vec<(f64, f64)> = Vec::new();
    let mut grad_samples: Vec<(f64, Vec4)> = Vec::new();
    for r in radii {
        let point = *x + l.scale(sign * r);
        let val = gauge.eval(&point)?;
        lam_samples.push((1.0 / r, val.lambda));
        grad_samples.push((1.0 / r, val.grad));
    }
    let (lambda_limit, lambda_err) = limit_extrapolate(&lam_samples)?;
    // slope of the (log R)/R term by geometric differencing: the schedule must
    // double, so that with f(R) = R·∂λ and the expansion
    // f(R) = c₀R + c₁ log R + c₂ + O((log R)/R), the double difference
    // [f(4R) − 2f(2R)] − [f(2R) − 2f(R)] = −c₁ log 2 + O((log R)/R);
    // the leftover decay is extrapolated away.
    let n = radii.len();
    if n < 5 {
        return Err(Error::InvalidSequence);
    }
    for k in 1..n {
        if (radii[k] / radii[k - 1] - 2.0).abs() > 1e-9 {
            return Err(Error::InconsistentInput(
                "slope fit needs a doubling radius schedule".into(),
            ));
        }
    }
    let mut log_slope = Vec4::ZERO;
    let mut fit_residual = 0.0_f64;
    for c in 0..4 {
        let f: Vec<f64> = grad_samples
            .iter()
            .zip(radii)
            .map(|((_, g), r)| r * g[c])
            .collect();
        let mut est: Vec<(f64, f64)> = Vec::new();
        for k in 0..n - 2 {
            let d = (f[k + 2] - 2.0 * f[k + 1]) - (f[k + 1] - 2.0 * f[k]);
            est.push((radii[k].ln() / radii[k], -d / std::f64::consts::LN_2));
        }
        let (c1, err) = limit_extrapolate(&est)?;
        log_slope[c] = c1;
        fit_residual = fit_residual.max(err);
    }
    let d2a = gauge.wave_alpha_at(dir);
    let mut expected_slope = Vec4::ZERO;
    for c in 0..4 {
        expected_slope[c] = -sign * 0.5 * l.lower(c) * d2a;
    }
    Ok(LgtDiagnostics {
        lambda_limit,
        lambda_err,
        alpha_value: gauge.alpha.at(dir),
        log_slope,
        expected_slope,
        fit_residual,
    })
}

/// Spacelike asymptotes of the general Coulomb-decay class, from the complex
/// zero-frequency data Ṽ̇(0⁺, l) = R(l) + i·I(l): kernels (y·l − iη)⁻¹ and
/// (y·l − iη)⁻² plus complex conjugate, η-halving extrapolated. The even and
/// odd parts in y are reported separately.
pub struct GeneralTail {
    pub a: Vec4,
    pub f: AntiSym,
    pub a_even: Vec4,
    pub a_odd: Vec4,
    pub f_even: AntiSym,
    pub f_odd: AntiSym,
}

pub fn general_coulomb_tail(
    re0: &TangentField,
    im0: &TangentField,
    y: &Vec4,
    quad: &SphereQuadrature,
    etas: &[f64],
) -> Result<GeneralTail> {
    if y.norm2() >= 0.0 {
        return Err(Error::OutOfDomain(
            "spacelike asymptote requires y² < 0".into(),
        ));
    }
    if etas.len() < 3 {
        return Err(Error::InvalidSequence);
    }
    let eval = |point: &Vec4| -> Result<(Vec4, AntiSym)> {
        let mut a_samples: Vec<(f64, Vec4)> = Vec::new();
        let mut f_samples: Vec<(f64, AntiSym)> = Vec::new();
        for eta in etas {
            let mut a = Vec4::ZERO;
            let mut f = AntiSym::ZERO;
            for (i, w) in quad.weights.iter().enumerate() {
                let dir = NullDirection::new(quad.nodes[i]);
                let l = quad.null_dir(i);
                let x = point.dot(&l);
                let den = x * x + eta * eta;
                let r = re0.at(&dir);
                let im = im0.at(&dir);
                // 2·Re[(i/2π)(R+iI)/(x−iη)] = (1/π)(−R η − I x)/(x²+η²)
                a += (r.scale(-eta) + im.scale(-x)).scale(w / (std::f64::consts::PI * den));
                // 2·Re[−(i/2π)(l∧(R+iI))/(x−iη)²]
                //   = (1/π)[(l∧R)·2xη + (l∧I)(x²−η²)]/(x²+η²)²
                let wr = AntiSym::wedge(&l, &r).scale(2.0 * x * eta);
                let wi = AntiSym::wedge(&l, &im).scale(x * x - eta * eta);
                f = f.add(&wr.add(&wi).scale(w / (std::f64::consts::PI * den * den)));
            }
            a_samples.push((*eta, a));
            f_samples.push((*eta, f));
        }
        let mut a = Vec4::ZERO;
        for c in 0..4 {
            let comp: Vec<(f64, f64)> = a_samples.iter().map(|(h, v)| (*h, v[c])).collect();
            a[c] = limit_extrapolate(&comp)?.0;
        }
        let mut f = AntiSym::ZERO;
        for p in 0..4 {
            for r in (p + 1)..4 {
                let comp: Vec<(f64, f64)> =
                    f_samples.iter().map(|(h, m)| (*h, m.0[p][r])).collect();
                let lim = limit_extrapolate(&comp)?.0;
                f.0[p][r] = lim;
                f.0[r][p] = -lim;
            }
        }
        Ok((a, f))
    };
    let (a_plus, f_plus) = eval(y)?;
    let (a_minus, f_minus) = eval(&-*y)?;
    Ok(GeneralTail {
        a: a_plus,
        f: f_plus,
        a_even: (a_plus + a_minus).scale(0.5),
        a_odd: (a_plus - a_minus).scale(0.5),
        f_even: f_plus.add(&f_minus).scale(0.5),
        f_odd: f_plus.sub(&f_minus).scale(0.5),
    })
}

/// Pauli-Jordan function D(x) = −(1/8π²)∫ δ′(x·l) d²l by mollified
/// quadrature at a fixed width.
pub fn pauli_jordan_mollified(x: &Vec4, quad: &SphereQuadrature, width: f64) -> Result<f64> {
    let m = Mollifier::new(MollifierKind::DeltaPrime, width)?;
    let norm = -1.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI);
    Ok(quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .map(|(n, w)| {
            let l = Vec4::from_spatial(1.0, *n);
            w * m.eval(x.dot(&l))
        })
        .sum::<f64>()
        * norm)
}
