//! Reduction of a linear system to one of five normal forms by an automorphism
//! (and, for `b > 0` in the segment and cone cases, a time reversal).

use serde::Serialize;

use crate::group::{Automorphism, GroupPoint, TangentVector};
use crate::system::{larc, time_reverse, ControlRange, SystemParams};

/// The reduced system a linear system is conjugate to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalSystem {
    /// `ẋ = 0, ẏ = a(x − 1) + uxβ` (the system itself, `α = b = 0`).
    VerticalDrift { a: f64, beta: f64 },
    /// `ẋ = 0, ẏ = b(y + uxβ)`.
    Segment { b: f64, beta: f64 },
    /// `ẋ = uαx, ẏ = by`.
    Saddle { alpha: f64, b: f64 },
    /// `ẋ = uαx, ẏ = x − 1`.
    Shear { alpha: f64 },
    /// `ẋ = uαx, ẏ = by + ux`.
    Cone { alpha: f64, b: f64 },
}

impl NormalSystem {
    /// Case number 1..=5 of the classification.
    pub fn case(&self) -> u8 {
        match self {
            NormalSystem::VerticalDrift { .. } => 1,
            NormalSystem::Segment { .. } => 2,
            NormalSystem::Saddle { .. } => 3,
            NormalSystem::Shear { .. } => 4,
            NormalSystem::Cone { .. } => 5,
        }
    }

    pub fn rhs(&self, p: &GroupPoint, u: f64) -> TangentVector {
        let (x, y) = (p.x(), p.y());
        match *self {
            NormalSystem::VerticalDrift { a, beta } => TangentVector::new(0.0, a * (x - 1.0) + u * x * beta),
            NormalSystem::Segment { b, beta } => TangentVector::new(0.0, b * (y + u * x * beta)),
            NormalSystem::Saddle { alpha, b } => TangentVector::new(u * alpha * x, b * y),
            NormalSystem::Shear { alpha } => TangentVector::new(u * alpha * x, x - 1.0),
            NormalSystem::Cone { alpha, b } => TangentVector::new(u * alpha * x, b * y + u * x),
        }
    }

    /// The same system written as general coefficients `(a, b, α, β)`.
    pub fn coefficients(&self) -> [f64; 4] {
        match *self {
            NormalSystem::VerticalDrift { a, beta } => [a, 0.0, 0.0, beta],
            NormalSystem::Segment { b, beta } => [0.0, b, 0.0, b * beta],
            NormalSystem::Saddle { alpha, b } => [0.0, b, alpha, 0.0],
            NormalSystem::Shear { alpha } => [1.0, 0.0, alpha, 0.0],
            NormalSystem::Cone { alpha, b } => [0.0, b, alpha, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalForm {
    pub system: NormalSystem,
    /// Control range of the normal form (`−Ω` when reversed).
    pub omega: ControlRange,
    /// Carries original coordinates to normal coordinates.
    pub psi: Automorphism,
    /// The normal form describes the time-reversed system with control `−u`.
    pub reversed: bool,
}

impl NormalForm {
    pub fn case(&self) -> u8 {
        self.system.case()
    }

    pub fn params(&self) -> SystemParams {
        let [a, b, alpha, beta] = self.system.coefficients();
        SystemParams::new(a, b, alpha, beta, self.omega).expect("normal forms are nondegenerate")
    }

    pub fn to_normal(&self, p: &GroupPoint) -> GroupPoint {
        self.psi.apply(p)
    }

    pub fn from_normal(&self, p: &GroupPoint) -> GroupPoint {
        self.psi.inverse().apply(p)
    }

    /// `(t, u)` in original time and control ↦ `(t, u)` for the normal form.
    pub fn normal_time_control(&self, t: f64, u: f64) -> (f64, f64) {
        if self.reversed {
            (-t, -u)
        } else {
            (t, u)
        }
    }
}

/// Conjugates `params` to its normal form.
///
/// The case split is exact in the coefficients. In the segment and cone cases
/// with `b > 0` the system is first time-reversed so that the normal form
/// always has `b < 0`.
pub fn conjugate_to_normal_form(params: &SystemParams) -> NormalForm {
    let alpha = params.alpha();
    let gamma = params.gamma();
    let b = params.b();

    let reversed = b > 0.0 && (alpha == 0.0 && gamma != 0.0 || larc(params));
    let s = if reversed { time_reverse(params) } else { *params };
    let (a, b, beta, gamma) = (s.a(), s.b(), s.beta(), s.gamma());

    let (system, psi) = if alpha == 0.0 && gamma == 0.0 {
        (NormalSystem::VerticalDrift { a, beta }, Automorphism::IDENTITY)
    } else if alpha == 0.0 {
        (NormalSystem::Segment { b, beta }, automorphism(a, b))
    } else if gamma == 0.0 {
        (NormalSystem::Saddle { alpha, b }, automorphism(-beta / alpha, 1.0))
    } else if b == 0.0 {
        (NormalSystem::Shear { alpha }, automorphism(-beta / (a * alpha), 1.0 / a))
    } else {
        (NormalSystem::Cone { alpha, b }, automorphism(a / gamma, b / gamma))
    };

    NormalForm { system, omega: s.omega(), psi, reversed }
}

fn automorphism(c: f64, d: f64) -> Automorphism {
    Automorphism::new(c, d).expect("case split guarantees d != 0")
}
