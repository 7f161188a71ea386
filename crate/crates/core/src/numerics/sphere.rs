//! Quadrature on the unit sphere (the celestial sphere of null directions).
//!
//! Product rule: Gauss–Legendre in cosθ times a uniform trapezoid in φ. For
//! `order` p the rule has p Gauss nodes and 2p azimuthal nodes and integrates
//! spherical harmonics exactly up to degree 2p − 1.

use crate::error::{Error, Result};
use crate::numerics::gauss::gauss_legendre;
use crate::vec4::Vec4;

#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    /// Unit 3-vectors n_i.
    pub nodes: Vec<[f64; 3]>,
    /// Positive weights, summing to 4π.
    pub weights: Vec<f64>,
    /// Declared order p; exact for harmonics of degree ≤ 2p − 1.
    pub order: usize,
}

impl SphereQuadrature {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        let (ct, wt) = gauss_legendre(order);
        let nphi = 2 * order;
        let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
        let mut nodes = Vec::with_capacity(order * nphi);
        let mut weights = Vec::with_capacity(order * nphi);
        for (c, w) in ct.iter().zip(&wt) {
            let st = (1.0 - c * c).sqrt();
            for k in 0..nphi {
                let phi = dphi * k as f64;
                nodes.push([st * phi.cos(), st * phi.sin(), *c]);
                weights.push(w * dphi);
            }
        }
        Ok(SphereQuadrature {
            nodes,
            weights,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f(n) dΩ over the unit sphere.
    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * f(*n))
            .sum()
    }

    /// ∫ f(n) dΩ for a four-vector valued integrand.
    pub fn integrate_vec<F: Fn([f64; 3]) -> Vec4>(&self, f: F) -> Vec4 {
        let mut acc = Vec4::ZERO;
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*n).scale(*w);
        }
        acc
    }

    /// Scaled null direction l = t + n_i for node i, in the frame of `t`.
    pub fn null_dir(&self, i: usize) -> Vec4 {
        let n = self.nodes[i];
        Vec4::from_spatial(1.0, n)
    }
}

/// Quadrature over the section v·l = 1 of the light cone, for a unit timelike
/// four-velocity v. Nodes are l_i = v + m_i·e with (e₁,e₂,e₃) an orthonormal
/// spatial triad of the v rest frame; weights are the solid-angle weights of
/// the base rule. For a degree −2 homogeneous integrand the result equals the
/// invariant integral in any frame.
#[derive(Clone, Debug)]
pub struct ConeSection {
    pub dirs: Vec<Vec4>,
    pub weights: Vec<f64>,
    pub velocity: Vec4,
    pub triad: [Vec4; 3],
}

impl ConeSection {
    pub fn new(base: &SphereQuadrature, v: &Vec4) -> Result<Self> {
        if (v.norm2() - 1.0).abs() > 1e-8 || v[0] <= 0.0 {
            return Err(Error::InvalidVelocity);
        }
        let triad = spatial_triad(v);
        let dirs = base
            .nodes
            .iter()
            .map(|m| {
                let mut l = *v;
                for (k, e) in triad.iter().enumerate() {
                    l += e.scale(m[k]);
                }
                l
            })
            .collect();
        Ok(ConeSection {
            dirs,
            weights: base.weights.clone(),
            velocity: *v,
            triad,
        })
    }

    /// ∫ f(l) d²l for f homogeneous of degree −2, evaluated on the v-section.
    pub fn integrate<F: Fn(&Vec4) -> f64>(&self, f: F) -> f64 {
        self.dirs
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * f(l))
            .sum()
    }
}

/// Orthonormal spatial triad orthogonal to the unit timelike vector v.
pub fn spatial_triad(v: &Vec4) -> [Vec4; 3] {
    let seeds = [
        Vec4::new(0.0, 1.0, 0.0, 0.0),
        Vec4::new(0.0, 0.0, 1.0, 0.0),
        Vec4::new(0.0, 0.0, 0.0, 1.0),
        Vec4::new(0.0, 1.0, 1.0, 1.0),
    ];
    let mut triad: Vec<Vec4> = Vec::new();
    for s in seeds.iter() {
        // project out v (timelike, +) and previous triad members (spacelike, −)
        let mut e = *s - v.scale(s.dot(v));
        for p in &triad {
            e = e + p.scale(e.dot(p)); // subtract (e·p/p·p) p with p·p = −1
        }
        let n2 = -e.norm2();
        if n2 > 1e-12 {
            triad.push(e.scale(1.0 / n2.sqrt()));
        }
        if triad.len() == 3 {
            break;
        }
    }
    [triad[0], triad[1], triad[2]]
}
