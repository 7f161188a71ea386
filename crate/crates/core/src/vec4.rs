//! Minkowski four-vectors and antisymmetric rank-2 tensors.
//!
//! Metric signature is (+,-,-,-). Components are stored contravariantly,
//! `v[0]` the time component.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

/// Metric diagonal, used when raising/lowering single indices.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec4(pub [f64; 4]);

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0.0; 4]);

    /// Unit vector along the chosen time axis.
    pub const T: Vec4 = Vec4([1.0, 0.0, 0.0, 0.0]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Vec4([t, x, y, z])
    }

    pub fn from_spatial(t: f64, s: [f64; 3]) -> Self {
        Vec4([t, s[0], s[1], s[2]])
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Minkowski inner product x·y = x⁰y⁰ − x⃗·y⃗.
    pub fn dot(&self, other: &Vec4) -> f64 {
        self.0[0] * other.0[0]
            - self.0[1] * other.0[1]
            - self.0[2] * other.0[2]
            - self.0[3] * other.0[3]
    }

    /// Minkowski square x·x.
    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean norm of the components, used for step scaling and residuals.
    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Covariant component v_a.
    pub fn lower(&self, a: usize) -> f64 {
        ETA[a] * self.0[a]
    }

    pub fn scale(&self, s: f64) -> Vec4 {
        Vec4([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    /// Future unit timelike vector with rapidity `chi` along the spatial
    /// direction `dir` (need not be normalized).
    pub fn boost_velocity(chi: f64, dir: [f64; 3]) -> Vec4 {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let (sh, ch) = (chi.sinh(), chi.cosh());
        Vec4([ch, sh * dir[0] / n, sh * dir[1] / n, sh * dir[2] / n])
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        for a in 0..4 {
            self.0[a] += o.0[a];
        }
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        self + o.scale(-1.0)
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        self.scale(s)
    }
}

/// Antisymmetric rank-2 tensor with lower indices, F_ab.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AntiSym(pub [[f64; 4]; 4]);

impl AntiSym {
    pub const ZERO: AntiSym = AntiSym([[0.0; 4]; 4]);

    /// (x ∧ y)_ab = x_a y_b − x_b y_a, built from contravariant inputs.
    pub fn wedge(x: &Vec4, y: &Vec4) -> AntiSym {
        let mut m = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] = x.lower(a) * y.lower(b) - x.lower(b) * y.lower(a);
            }
        }
        AntiSym(m)
    }

    /// Dual tensor (*F)_ab = ½ ε_abcd F^cd with ε_0123 = +1.
    pub fn dual(&self) -> AntiSym {
        // F^cd = η^cc η^dd F_cd (no sum, diagonal metric)
        let up = |c: usize, d: usize| ETA[c] * ETA[d] * self.0[c][d];
        let mut m = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for c in 0..4 {
                    for d in 0..4 {
                        s += 0.5 * epsilon(a, b, c, d) * up(c, d);
                    }
                }
                m[a][b] = s;
            }
        }
        AntiSym(m)
    }

    /// Contraction x^a F_ab, returned with the index raised (contravariant).
    pub fn contract_first(&self, x: &Vec4) -> Vec4 {
        let mut out = Vec4::ZERO;
        for b in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += x.0[a] * self.0[a][b];
            }
            out.0[b] = ETA[b] * s;
        }
        out
    }

    pub fn scale(&self, s: f64) -> AntiSym {
        let mut m = self.0;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        AntiSym(m)
    }

    pub fn add(&self, o: &AntiSym) -> AntiSym {
        let mut m = self.0;
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] += o.0[a][b];
            }
        }
        AntiSym(m)
    }

    pub fn sub(&self, o: &AntiSym) -> AntiSym {
        self.add(&o.scale(-1.0))
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Totally antisymmetric symbol with ε_0123 = +1.
pub fn epsilon(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    let mut sign = 1.0;
    let mut v = idx;
    // count inversions of the permutation
    for i in 0..4 {
        for j in (i + 1)..4 {
            if v[i] == v[j] {
                return 0.0;
            }
            if v[i] > v[j] {
                v.swap(i, j);
                sign = -sign;
            }
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_signature() {
        let t = Vec4::T;
        let x = Vec4::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(t.dot(&t), 1.0);
        assert_eq!(x.dot(&x), -1.0);
        assert_eq!(t.dot(&x), 0.0);
    }

    #[test]
    fn double_dual_is_minus_identity() {
        let x = Vec4::new(0.3, 1.1, -0.4, 0.7);
        let y = Vec4::new(-0.2, 0.5, 0.9, -1.3);
        let f = AntiSym::wedge(&x, &y);
        let dd = f.dual().dual();
        assert!(dd.add(&f).max_abs() < 1e-12);
    }

    #[test]
    fn epsilon_basic() {
        assert_eq!(epsilon(0, 1, 2, 3), 1.0);
        assert_eq!(epsilon(1, 0, 2, 3), -1.0);
        assert_eq!(epsilon(0, 0, 2, 3), 0.0);
    }
}
