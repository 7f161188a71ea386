//! Scattering-event currents and their null-infinity profiles: the
//! interpolated current asymptote V(s,l) of a many-particle scattering event
//! and the retarded/advanced/radiation bookkeeping.

use std::sync::Arc;

use crate::celestial::{NullDirection, TangentField};
use crate::error::{Error, Result};
use crate::vec4::Vec4;

/// Free massive point charge.
#[derive(Clone, Copy, Debug)]
pub struct PointParticle {
    pub charge: f64,
    pub velocity: Vec4,
}

impl PointParticle {
    pub fn new(charge: f64, velocity: Vec4) -> Result<Self> {
        if (velocity.norm2() - 1.0).abs() > 1e-10 || velocity[0] <= 0.0 {
            return Err(Error::InvalidVelocity);
        }
        Ok(PointParticle { charge, velocity })
    }

    /// Coulomb-type asymptote q·v/(v·l) of the free particle, at scaled l.
    pub fn coulomb_term(&self, n: [f64; 3]) -> Vec4 {
        let l = Vec4::from_spatial(1.0, n);
        self.velocity.scale(self.charge / self.velocity.dot(&l))
    }
}

/// Smooth monotone switch χ(s) with χ(−∞) = 0, χ(+∞) = 1, realized as a
/// scaled hyperbolic-tangent step.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub center: f64,
    pub width: f64,
    /// Half-width of the declared transition window around `center`.
    pub window: f64,
}

impl Transition {
    pub fn new(center: f64, width: f64, window: f64) -> Result<Self> {
        if width <= 0.0 || !width.is_finite() {
            return Err(Error::InvalidWidth(width));
        }
        // the switch must be exhausted well inside the declared window
        if window < 14.0 * width {
            return Err(Error::InconsistentInput(
                "transition window narrower than the switch support".into(),
            ));
        }
        Ok(Transition {
            center,
            width,
            window,
        })
    }

    pub fn default_step() -> Self {
        Transition::new(0.0, 1.0, 20.0).unwrap()
    }

    pub fn chi(&self, s: f64) -> f64 {
        0.5 * (1.0 + ((s - self.center) / self.width).tanh())
    }

    pub fn chi_dot(&self, s: f64) -> f64 {
        let u = (s - self.center) / self.width;
        0.5 / (self.width * u.cosh().powi(2))
    }

    pub fn chi_ddot(&self, s: f64) -> f64 {
        let u = (s - self.center) / self.width;
        -u.tanh() / (self.width * self.width * u.cosh().powi(2))
    }
}

/// A scattering event: n′ incoming and n outgoing free charges, joined by a
/// smooth transition in retarded time.
#[derive(Clone, Debug)]
pub struct ScatteringEvent {
    pub incoming: Vec<PointParticle>,
    pub outgoing: Vec<PointParticle>,
    pub transition: Transition,
}

impl ScatteringEvent {
    pub fn new(
        incoming: Vec<PointParticle>,
        outgoing: Vec<PointParticle>,
        transition: Transition,
    ) -> Result<Self> {
        let qin: f64 = incoming.iter().map(|p| p.charge).sum();
        let qout: f64 = outgoing.iter().map(|p| p.charge).sum();
        if (qin - qout).abs() > 1e-12 * (1.0 + qin.abs().max(qout.abs())) {
            return Err(Error::InconsistentEvent {
                incoming: qin,
                outgoing: qout,
            });
        }
        Ok(ScatteringEvent {
            incoming,
            outgoing,
            transition,
        })
    }

    pub fn total_charge(&self) -> f64 {
        self.outgoing.iter().map(|p| p.charge).sum()
    }
}

pub type VecFn = Arc<dyn Fn(f64, [f64; 3]) -> Vec4 + Send + Sync>;
pub type LimitFn = Arc<dyn Fn([f64; 3]) -> Vec4 + Send + Sync>;

/// Null asymptote V(s,l) of a potential, stored through its restriction to
/// the canonical section (s, n) with l = t + n, together with its analytic
/// s-derivatives and, when declared, the limits V(±∞, l).
#[derive(Clone)]
pub struct AsymptoteProfile {
    v: VecFn,
    vdot: VecFn,
    vddot: VecFn,
    pub charge: f64,
    /// decay exponent of V̇: |V̇(s,l)| ≤ C (1 + |s|)^(−1−ε)
    pub eps: f64,
    limit_minus: Option<LimitFn>,
    limit_plus: Option<LimitFn>,
}

impl AsymptoteProfile {
    pub fn from_closures(
        v: VecFn,
        vdot: VecFn,
        vddot: VecFn,
        charge: f64,
        eps: f64,
        limit_minus: Option<LimitFn>,
        limit_plus: Option<LimitFn>,
    ) -> Self {
        AsymptoteProfile {
            v,
            vdot,
            vddot,
            charge,
            eps,
            limit_minus,
            limit_plus,
        }
    }

    /// s-independent profile V(s,l) = W(l).
    pub fn constant(field: LimitFn, charge: f64) -> Self {
        let f = field.clone();
        let v: VecFn = Arc::new(move |_, n| f(n));
        let z: VecFn = Arc::new(|_, _| Vec4::ZERO);
        AsymptoteProfile::from_closures(
            v,
            z.clone(),
            z,
            charge,
            1.0,
            Some(field.clone()),
            Some(field),
        )
    }

    pub fn zero() -> Self {
        let z: VecFn = Arc::new(|_, _| Vec4::ZERO);
        let zl: LimitFn = Arc::new(|_| Vec4::ZERO);
        AsymptoteProfile::from_closures(
            z.clone(),
            z.clone(),
            z,
            0.0,
            1.0,
            Some(zl.clone()),
            Some(zl),
        )
    }

    /// V(s, l) at the canonically scaled direction.
    pub fn v(&self, s: f64, dir: &NullDirection) -> Vec4 {
        (self.v)(s, dir.unit())
    }

    pub fn vdot(&self, s: f64, dir: &NullDirection) -> Vec4 {
        (self.vdot)(s, dir.unit())
    }

    pub fn vddot(&self, s: f64, dir: &NullDirection) -> Vec4 {
        (self.vddot)(s, dir.unit())
    }

    /// Joint homogeneity V(s, λl) = λ⁻¹ V(s/λ, l): value at an arbitrary
    /// cone point l with l⁰ > 0.
    pub fn v_cone(&self, s: f64, l: &Vec4) -> Vec4 {
        let lam = l[0];
        (self.v)(s / lam, NullDirection::new(l.spatial()).unit()).scale(1.0 / lam)
    }

    /// V̇ at an arbitrary cone point; V̇(s, λl) = λ⁻² V̇(s/λ, l).
    pub fn vdot_cone(&self, s: f64, l: &Vec4) -> Vec4 {
        let lam = l[0];
        (self.vdot)(s / lam, NullDirection::new(l.spatial()).unit()).scale(1.0 / (lam * lam))
    }

    pub fn vddot_cone(&self, s: f64, l: &Vec4) -> Vec4 {
        let lam = l[0];
        (self.vddot)(s / lam, NullDirection::new(l.spatial()).unit()).scale(1.0 / lam.powi(3))
    }

    pub fn has_limits(&self) -> bool {
        self.limit_minus.is_some() && self.limit_plus.is_some()
    }

    /// Limit V(−∞, l) as a tangent field of the profile's charge.
    pub fn limit_minus(&self) -> Option<TangentField> {
        let f = self.limit_minus.clone()?;
        Some(TangentField::new(self.charge, move |n| f(n)))
    }

    /// Limit V(+∞, l) as a tangent field of the profile's charge.
    pub fn limit_plus(&self) -> Option<TangentField> {
        let f = self.limit_plus.clone()?;
        Some(TangentField::new(self.charge, move |n| f(n)))
    }

    /// Pointwise a·self + b·other, with limits combined when both declared.
    pub fn combine(&self, a: f64, other: &AsymptoteProfile, b: f64) -> AsymptoteProfile {
        let comb = |f1: &VecFn, f2: &VecFn| -> VecFn {
            let (f1, f2) = (f1.clone(), f2.clone());
            Arc::new(move |s, n| f1(s, n).scale(a) + f2(s, n).scale(b))
        };
        let comb_l = |f1: &Option<LimitFn>, f2: &Option<LimitFn>| -> Option<LimitFn> {
            match (f1, f2) {
                (Some(f1), Some(f2)) => {
                    let (f1, f2) = (f1.clone(), f2.clone());
                    Some(Arc::new(move |n| f1(n).scale(a) + f2(n).scale(b)))
                }
                _ => None,
            }
        };
        AsymptoteProfile {
            v: comb(&self.v, &other.v),
            vdot: comb(&self.vdot, &other.vdot),
            vddot: comb(&self.vddot, &other.vddot),
            charge: a * self.charge + b * other.charge,
            eps: self.eps.min(other.eps),
            limit_minus: comb_l(&self.limit_minus, &other.limit_minus),
            limit_plus: comb_l(&self.limit_plus, &other.limit_plus),
        }
    }

    /// Profile with the future limit removed: V(s,l) − V(+∞,l). This is the
    /// free-field normalization with V(+∞, l) = 0.
    pub fn subtract_plus_limit(&self) -> Result<AsymptoteProfile> {
        let plus = self
            .limit_plus
            .clone()
            .ok_or_else(|| Error::InconsistentInput("future limit not declared".into()))?;
        let v = self.v.clone();
        let new_v: VecFn = Arc::new(move |s, n| v(s, n) - plus(n));
        let zero: LimitFn = Arc::new(|_| Vec4::ZERO);
        let new_minus: Option<LimitFn> = match (&self.limit_minus, &self.limit_plus) {
            (Some(m), Some(p)) => {
                let (m, p) = (m.clone(), p.clone());
                Some(Arc::new(move |n| m(n) - p(n)))
            }
            _ => None,
        };
        Ok(AsymptoteProfile {
            v: new_v,
            vdot: self.vdot.clone(),
            vddot: self.vddot.clone(),
            charge: 0.0,
            eps: self.eps,
            limit_minus: new_minus,
            limit_plus: Some(zero),
        })
    }
}

/// The null asymptote of the Lorenz potential of the event's current:
/// V(s,l) = (1−χ(s)) Σ q′v′/(v′·l) + χ(s) Σ qv/(v·l).
pub fn current_profile(event: &ScatteringEvent) -> AsymptoteProfile {
    let sum_in = coulomb_sum(&event.incoming);
    let sum_out = coulomb_sum(&event.outgoing);
    let tr = event.transition;
    let q = event.total_charge();
    let (si, so) = (sum_in.clone(), sum_out.clone());
    let v: VecFn = Arc::new(move |s, n| {
        let c = tr.chi(s);
        si(n).scale(1.0 - c) + so(n).scale(c)
    });
    let (si, so) = (sum_in.clone(), sum_out.clone());
    let vdot: VecFn = Arc::new(move |s, n| (so(n) - si(n)).scale(tr.chi_dot(s)));
    let (si, so) = (sum_in.clone(), sum_out.clone());
    let vddot: VecFn = Arc::new(move |s, n| (so(n) - si(n)).scale(tr.chi_ddot(s)));
    AsymptoteProfile::from_closures(v, vdot, vddot, q, 1.0, Some(sum_in), Some(sum_out))
}

fn coulomb_sum(particles: &[PointParticle]) -> LimitFn {
    let ps = particles.to_vec();
    Arc::new(move |n| {
        let mut acc = Vec4::ZERO;
        for p in &ps {
            acc += p.coulomb_term(n);
        }
        acc
    })
}

/// The six null asymptotes attached to an event: retarded, advanced and
/// radiation potentials at future (unprimed) and past (primed) null infinity.
pub struct RetAdvRad {
    pub ret: AsymptoteProfile,
    pub ret_prime: AsymptoteProfile,
    pub adv: AsymptoteProfile,
    pub adv_prime: AsymptoteProfile,
    pub rad: AsymptoteProfile,
    pub rad_prime: AsymptoteProfile,
}

pub fn ret_adv_rad_asymptotes(event: &ScatteringEvent) -> RetAdvRad {
    let vj = current_profile(event);
    let minus = vj.limit_minus.clone().unwrap();
    let plus = vj.limit_plus.clone().unwrap();
    let q = event.total_charge();
    let adv = AsymptoteProfile::constant(plus, q);
    let ret_prime = AsymptoteProfile::constant(minus, q);
    let rad = vj.combine(1.0, &adv, -1.0);
    let rad_prime = vj.combine(-1.0, &ret_prime, 1.0);
    RetAdvRad {
        ret: vj.clone(),
        ret_prime,
        adv,
        adv_prime: vj,
        rad,
        rad_prime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celestial::NullDirection;

    fn dirs() -> Vec<NullDirection> {
        vec![
            NullDirection::new([0.0, 0.0, 1.0]),
            NullDirection::new([1.0, 1.0, -1.0]),
            NullDirection::new([-0.3, 0.9, 0.2]),
            NullDirection::new([0.7, -0.1, -0.6]),
        ]
    }

    fn sample_event() -> ScatteringEvent {
        let vin = Vec4::boost_velocity(0.4, [0.0, 0.0, 1.0]);
        let vout1 = Vec4::boost_velocity(0.7, [1.0, 0.0, 0.3]);
        let vout2 = Vec4::boost_velocity(0.2, [-1.0, 0.5, 0.0]);
        ScatteringEvent::new(
            vec![PointParticle::new(2.0, vin).unwrap()],
            vec![
                PointParticle::new(1.5, vout1).unwrap(),
                PointParticle::new(0.5, vout2).unwrap(),
            ],
            Transition::default_step(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_velocity() {
        assert!(PointParticle::new(1.0, Vec4::new(1.1, 0.0, 0.0, 0.0)).is_err());
        assert!(PointParticle::new(1.0, Vec4::new(-1.0, 0.0, 0.0, 0.0)).is_err());
        assert!(PointParticle::new(1.0, Vec4::T).is_ok());
    }

    #[test]
    fn rejects_charge_nonconservation() {
        let p = PointParticle::new(1.0, Vec4::T).unwrap();
        let q = PointParticle::new(2.0, Vec4::T).unwrap();
        assert!(matches!(
            ScatteringEvent::new(vec![p], vec![q], Transition::default_step()),
            Err(Error::InconsistentEvent { .. })
        ));
    }

    #[test]
    fn transition_limits_and_monotone() {
        let t = Transition::default_step();
        assert!(t.chi(-30.0) < 1e-12);
        assert!((t.chi(30.0) - 1.0).abs() < 1e-12);
        assert!((t.chi(0.0) - 0.5).abs() < 1e-14);
        let mut prev = -1.0;
        for k in -50..=50 {
            let c = t.chi(k as f64 * 0.3);
            assert!(c >= prev);
            prev = c;
        }
        // analytic derivatives against finite differences
        let h = 1e-5;
        for s in [-2.0, 0.0, 0.7, 3.1] {
            let fd1 = (t.chi(s + h) - t.chi(s - h)) / (2.0 * h);
            let fd2 = (t.chi(s + h) - 2.0 * t.chi(s) + t.chi(s - h)) / (h * h);
            assert!((fd1 - t.chi_dot(s)).abs() < 1e-9);
            assert!((fd2 - t.chi_ddot(s)).abs() < 1e-5);
        }
    }

    #[test]
    fn transition_window_validation() {
        assert!(Transition::new(0.0, 1.0, 5.0).is_err());
        assert!(Transition::new(0.0, -1.0, 20.0).is_err());
    }

    #[test]
    fn free_particle_profile_is_static_coulomb() {
        let v = Vec4::boost_velocity(0.6, [0.2, -1.0, 0.5]);
        let p = PointParticle::new(1.3, v).unwrap();
        let ev = ScatteringEvent::new(vec![p], vec![p], Transition::default_step()).unwrap();
        let prof = current_profile(&ev);
        for d in dirs() {
            let expect = v.scale(1.3 / v.dot(&d.l()));
            for s in [-5.0, 0.0, 2.0, 40.0] {
                assert!((prof.v(s, &d) - expect).euclid_norm() < 1e-13);
            }
            assert!(prof.vdot(0.3, &d).euclid_norm() < 1e-13);
        }
    }

    #[test]
    fn gauss_constraint_everywhere() {
        let ev = sample_event();
        let prof = current_profile(&ev);
        for d in dirs() {
            for s in [-12.0, -1.0, 0.0, 0.4, 3.0, 25.0] {
                let lv = d.l().dot(&prof.v(s, &d));
                assert!((lv - 2.0).abs() < 1e-12, "s={s} lv={lv}");
            }
        }
    }

    #[test]
    fn limits_match_coulomb_sums() {
        let ev = sample_event();
        let prof = current_profile(&ev);
        let minus = prof.limit_minus().unwrap();
        let plus = prof.limit_plus().unwrap();
        for d in dirs() {
            let vin = ev.incoming[0].coulomb_term(d.unit());
            let vout =
                ev.outgoing[0].coulomb_term(d.unit()) + ev.outgoing[1].coulomb_term(d.unit());
            assert!((minus.at(&d) - vin).euclid_norm() < 1e-13);
            assert!((plus.at(&d) - vout).euclid_norm() < 1e-13);
            // far samples approach the limits
            assert!((prof.v(-40.0, &d) - vin).euclid_norm() < 1e-12);
            assert!((prof.v(40.0, &d) - vout).euclid_norm() < 1e-12);
        }
    }

    #[test]
    fn joint_homogeneity_of_cone_evaluation() {
        let prof = current_profile(&sample_event());
        let d = NullDirection::new([0.3, -0.5, 0.8]);
        let l2 = d.l().scale(2.5);
        let s = 1.7;
        let lhs = prof.v_cone(s, &l2);
        let rhs = prof.v(s / 2.5, &d).scale(1.0 / 2.5);
        assert!((lhs - rhs).euclid_norm() < 1e-14);
        let lhs = prof.vdot_cone(s, &l2);
        let rhs = prof.vdot(s / 2.5, &d).scale(1.0 / 2.5_f64.powi(2));
        assert!((lhs - rhs).euclid_norm() < 1e-14);
    }

    #[test]
    fn six_asymptotes_identities() {
        let ev = sample_event();
        let six = ret_adv_rad_asymptotes(&ev);
        for d in dirs() {
            for s in [-8.0, -0.5, 0.0, 1.2, 9.0] {
                // V^rad = V^ret − V^adv pointwise
                let lhs = six.rad.v(s, &d);
                let rhs = six.ret.v(s, &d) - six.adv.v(s, &d);
                assert!((lhs - rhs).euclid_norm() < 1e-13);
                // V^adv is s-independent
                assert!((six.adv.v(s, &d) - six.adv.v(0.0, &d)).euclid_norm() < 1e-14);
                // V^rad′ = −V^j + V^j(−∞)
                let lhs = six.rad_prime.v(s, &d);
                let rhs = six.ret_prime.v(s, &d) - six.adv_prime.v(s, &d);
                assert!((lhs - rhs).euclid_norm() < 1e-13);
            }
            // free-field boundary conditions of the radiation profiles
            assert!(six.rad.limit_plus().unwrap().at(&d).euclid_norm() < 1e-14);
            assert!(six.rad_prime.limit_minus().unwrap().at(&d).euclid_norm() < 1e-14);
            // radiation profiles are charge-free
            assert!(d.l().dot(&six.rad.v(0.3, &d)).abs() < 1e-13);
        }
        assert_eq!(six.rad.charge, 0.0);
    }

    #[test]
    fn static_particle_radiates_nothing() {
        let p = PointParticle::new(1.0, Vec4::T).unwrap();
        let ev = ScatteringEvent::new(vec![p], vec![p], Transition::default_step()).unwrap();
        let six = ret_adv_rad_asymptotes(&ev);
        for d in dirs() {
            for s in [-3.0, 0.0, 5.0] {
                assert!(six.rad.v(s, &d).euclid_norm() < 1e-14);
            }
        }
    }

    #[test]
    fn limit_fields_are_electric_type() {
        // full antisymmetrization of l_a ∂_b V_c vanishes for the limit
        // fields of any event: no magnetic charges
        let ev = sample_event();
        let prof = current_profile(&ev);
        let particles = ev.outgoing.clone();
        // natural homogeneous extension Σ q v/(v·x)
        let vext = move |x: &Vec4| -> Vec4 {
            let mut acc = Vec4::ZERO;
            for p in &particles {
                acc += p.velocity.scale(p.charge / p.velocity.dot(x));
            }
            acc
        };
        let h = 1e-5;
        for d in dirs() {
            let l = d.l();
            // covariant gradient matrix m[b][c] = ∂_b V_c
            let mut m = [[0.0; 4]; 4];
            for b in 0..4 {
                let mut xp = l;
                let mut xm = l;
                xp[b] += h;
                xm[b] -= h;
                let (vp, vm) = (vext(&xp), vext(&xm));
                for c in 0..4 {
                    // ∂/∂x^b is naturally covariant; only c needs lowering
                    m[b][c] = crate::vec4::ETA[c] * (vp[c] - vm[c]) / (2.0 * h);
                }
            }
            let lc = [l.lower(0), l.lower(1), l.lower(2), l.lower(3)];
            let mut max = 0.0_f64;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let t = lc[a] * (m[b][c] - m[c][b])
                            + lc[b] * (m[c][a] - m[a][c])
                            + lc[c] * (m[a][b] - m[b][a]);
                        max = max.max(t.abs());
                    }
                }
            }
            assert!(max < 1e-7, "residual {max}");
        }
        let _ = prof;
    }

    #[test]
    fn subtract_plus_limit_normalizes_free_field() {
        let prof = current_profile(&sample_event());
        let free = prof.subtract_plus_limit().unwrap();
        assert_eq!(free.charge, 0.0);
        for d in dirs() {
            assert!(free.limit_plus().unwrap().at(&d).euclid_norm() < 1e-14);
            assert!((free.v(35.0, &d)).euclid_norm() < 1e-12);
            assert!(d.l().dot(&free.v(0.0, &d)).abs() < 1e-13);
        }
    }
}
