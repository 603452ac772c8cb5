//! Linear control systems `ẋ = uαx, ẏ = a(x − 1) + by + uxβ` on `G`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SystemInvariant};
use crate::group::{Automorphism, GroupPoint, TangentVector};

/// Control range `Ω = [lo, hi]` with `lo < 0 < hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlRange {
    lo: f64,
    hi: f64,
}

impl ControlRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidSystem(SystemInvariant::NonFinite));
        }
        if !(lo < 0.0 && 0.0 < hi) {
            return Err(Error::InvalidSystem(SystemInvariant::ControlRange));
        }
        Ok(ControlRange { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, u: f64) -> bool {
        self.lo <= u && u <= self.hi
    }

    pub fn check(&self, u: f64) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::ControlOutOfRange { u, lo: self.lo, hi: self.hi })
        }
    }

    /// `−Ω = [−hi, −lo]`.
    pub fn negated(&self) -> ControlRange {
        ControlRange { lo: -self.hi, hi: -self.lo }
    }
}

impl Serialize for ControlRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ControlRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        ControlRange::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Coefficients `(a, b, α, β)` and control range of a linear control system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    omega: ControlRange,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    omega: [f64; 2],
}

impl SystemParams {
    pub fn new(a: f64, b: f64, alpha: f64, beta: f64, omega: ControlRange) -> Result<Self> {
        if ![a, b, alpha, beta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSystem(SystemInvariant::NonFinite));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::InvalidSystem(SystemInvariant::LinearFieldTrivial));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(Error::InvalidSystem(SystemInvariant::InvariantFieldTrivial));
        }
        Ok(SystemParams { a, b, alpha, beta, omega })
    }

    /// Convenience constructor taking `Ω` as its two endpoints.
    pub fn with_range(a: f64, b: f64, alpha: f64, beta: f64, lo: f64, hi: f64) -> Result<Self> {
        SystemParams::new(a, b, alpha, beta, ControlRange::new(lo, hi)?)
    }

    /// Parses `{"a": .., "b": .., "alpha": .., "beta": .., "omega": [lo, hi]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSystem =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("system description: {e}")))?;
        SystemParams::with_range(raw.a, raw.b, raw.alpha, raw.beta, raw.omega[0], raw.omega[1])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("system params serialize")
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn omega(&self) -> ControlRange {
        self.omega
    }

    /// `aα + bβ`.
    pub fn gamma(&self) -> f64 {
        self.a * self.alpha + self.b * self.beta
    }

    pub fn with_omega(&self, omega: ControlRange) -> SystemParams {
        SystemParams { omega, ..*self }
    }

    /// Image of the system under an automorphism: `ψ` conjugates `self` to the
    /// returned system.
    pub fn conjugated_by(&self, psi: &Automorphism) -> SystemParams {
        let (c, d) = (psi.c(), psi.d());
        SystemParams {
            a: d * self.a - self.b * c,
            b: self.b,
            alpha: self.alpha,
            beta: c * self.alpha + d * self.beta,
            omega: self.omega,
        }
    }

    /// RHS without the range check.
    #[cfg(test)]
    pub(crate) fn rhs_unchecked(&self, p: &GroupPoint, u: f64) -> TangentVector {
        TangentVector::new(
            u * self.alpha * p.x(),
            self.a * (p.x() - 1.0) + self.b * p.y() + u * p.x() * self.beta,
        )
    }
}

impl<'de> Deserialize<'de> for SystemParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSystem::deserialize(d)?;
        SystemParams::with_range(raw.a, raw.b, raw.alpha, raw.beta, raw.omega[0], raw.omega[1])
            .map_err(serde::de::Error::custom)
    }
}

/// Linear vector field `(0, a(x − 1) + by)`.
pub fn linear_field(params: &SystemParams, p: &GroupPoint) -> TangentVector {
    TangentVector::new(0.0, params.a * (p.x() - 1.0) + params.b * p.y())
}

/// Left-invariant vector field `(xα, xβ)`.
pub fn invariant_field(params: &SystemParams, p: &GroupPoint) -> TangentVector {
    TangentVector::new(p.x() * params.alpha, p.x() * params.beta)
}

pub fn system_rhs(params: &SystemParams, p: &GroupPoint, u: f64) -> Result<TangentVector> {
    params.omega.check(u)?;
    Ok(linear_field(params, p) + u * invariant_field(params, p))
}

/// Lie algebra rank condition: `α(aα + bβ) ≠ 0`, compared exactly.
pub fn larc(params: &SystemParams) -> bool {
    params.alpha * params.gamma() != 0.0
}

/// `(a, b, α, β, Ω) ↦ (−a, −b, α, β, −Ω)`. Trajectories of the result under
/// `−u` are the trajectories of `params` run backwards in time.
pub fn time_reverse(params: &SystemParams) -> SystemParams {
    SystemParams {
        a: -params.a,
        b: -params.b,
        alpha: params.alpha,
        beta: params.beta,
        omega: params.omega.negated(),
    }
}
