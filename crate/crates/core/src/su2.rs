//! SU(2) as unit quaternions: Haar sampling, relative angles, characters,
//! and the signed edge weight.
//!
//! A group element is stored as a point of the unit 3-sphere in R⁴. The real
//! part `w` equals half the trace in the defining representation, so the
//! conjugacy angle between two elements is read off a 4-dimensional dot
//! product.

use crate::graph::Spin;
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::{Mul, Neg};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Su2Error {
    #[error("cannot normalize a near-zero quaternion (norm {norm:e})")]
    NotNormalizable { norm: f64 },
}

/// A unit quaternion `w + xi + yj + zk`; renormalized on construction so the
/// norm stays within 1e-12 of 1.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct GroupElement {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalize the given components onto the unit sphere.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self, Su2Error> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if norm <= 1e-9 || !norm.is_finite() {
            return Err(Su2Error::NotNormalizable { norm });
        }
        Ok(GroupElement {
            w: w / norm,
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Components as a point of S³ ⊂ R⁴, ordered `(w, x, y, z)`.
    pub fn components(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Group inverse (quaternion conjugate on the unit sphere).
    pub fn inverse(self) -> Self {
        GroupElement {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Euclidean inner product in R⁴; equals ½·Tr(self · other⁻¹) in the
    /// defining representation.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    /// Quaternion product, renormalized to absorb rounding drift.
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self, rhs);
        GroupElement::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
        .expect("product of unit quaternions stays on the sphere")
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;

    fn neg(self) -> Self {
        GroupElement {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// An angle in `[0, π]`, stored by its cosine.
///
/// The cosine is the primary representation because it is what characters are
/// evaluated from and because negating a group element negates a dot product
/// *exactly* in floating point. Keeping the cosine primary (instead of
/// round-tripping through `acos`/`cos`) makes the sign rules under `h ↦ -h`
/// hold bit-for-bit, not just approximately.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Angle {
    cos: f64,
}

impl Angle {
    pub const ZERO: Angle = Angle { cos: 1.0 };

    /// Clamp an arbitrary radian value into `[0, π]` and take its cosine.
    pub fn from_radians(phi: f64) -> Self {
        Angle {
            cos: phi.clamp(0.0, std::f64::consts::PI).cos(),
        }
    }

    /// The angle whose cosine is `c` (clamped into `[-1, 1]` first).
    pub fn from_cos(c: f64) -> Self {
        Angle {
            cos: c.clamp(-1.0, 1.0),
        }
    }

    pub fn radians(self) -> f64 {
        self.cos.acos()
    }

    pub fn cos(self) -> f64 {
        self.cos
    }
}

impl PartialOrd for Angle {
    /// Orders by the angle itself: on `[0, π]` a larger angle has the
    /// *smaller* cosine.
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        other.cos.partial_cmp(&self.cos)
    }
}

/// Draw a Haar-uniform group element: four independent standard normals
/// normalized to the sphere (rotation invariance of the Gaussian makes the
/// result exactly uniform). The measure-zero chance of a near-zero vector is
/// handled by resampling.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        if let Ok(h) = GroupElement::new(w, x, y, z) {
            return h;
        }
    }
}

/// The angle φ ∈ [0, π] between two group elements viewed as unit vectors in
/// R⁴; the conjugacy angle of `h1 · h2⁻¹`.
pub fn relative_angle(h1: GroupElement, h2: GroupElement) -> Angle {
    Angle::from_cos(h1.dot(h2))
}

/// Character of the spin-`n` representation at conjugacy angle φ:
/// sin((n+1)φ)/sin(φ), evaluated as the Chebyshev value U_n(cos φ) by the
/// recurrence χ_{k+1} = 2cos(φ)·χ_k − χ_{k−1}, which has no singularities at
/// φ ∈ {0, π}. Bounded by n+1 in absolute value.
pub fn character(n: Spin, phi: Angle) -> f64 {
    let two_cos = 2.0 * phi.cos();
    let mut prev = 1.0; // U_0
    let mut cur = two_cos; // U_1
    if n.get() == 0 {
        return prev;
    }
    for _ in 1..n.get() {
        let next = two_cos * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Signed edge weight of an edge of spin `n` with endpoint variables `h1`,
/// `h2`: `(-1)^n · character(n, relative_angle(h1, h2))`. Symmetric in the
/// two endpoints.
pub fn edge_weight(n: Spin, h1: GroupElement, h2: GroupElement) -> f64 {
    let chi = character(n, relative_angle(h1, h2));
    if n.get().is_multiple_of(2) {
        chi
    } else {
        -chi
    }
}
