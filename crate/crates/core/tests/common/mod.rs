//! Instance generators and independent oracles shared by the integration tests.
//!
//! The oracles here are derived directly from the system
//! `ẋ = uαx, ẏ = a(x − 1) + by + uxβ` in original coordinates and never go
//! through the normal forms used by the library.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvlin::{GroupPoint, SystemParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(x: f64, y: f64) -> GroupPoint {
    GroupPoint::new(x, y).unwrap()
}

pub fn sys(a: f64, b: f64, alpha: f64, beta: f64, lo: f64, hi: f64) -> SystemParams {
    SystemParams::with_range(a, b, alpha, beta, lo, hi).unwrap()
}

/// Uniform on `[lo, hi]` with `|v| ≥ floor`.
pub fn nonzero<R: Rng>(rng: &mut R, lo: f64, hi: f64, floor: f64) -> f64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if v.abs() >= floor {
            return v;
        }
    }
}

/// A power of two with random sign, so that products and quotients by it are exact.
fn dyadic<R: Rng>(rng: &mut R) -> f64 {
    let v = [0.25, 0.5, 1.0, 2.0, 4.0][rng.gen_range(0..5)];
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

pub fn random_omega<R: Rng>(rng: &mut R) -> (f64, f64) {
    (-rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0))
}

/// A random system satisfying the exact constraints of `case` (1..=5).
pub fn random_system<R: Rng>(rng: &mut R, case: u8) -> SystemParams {
    let (lo, hi) = random_omega(rng);
    let r = |rng: &mut R| nonzero(rng, -2.0, 2.0, 0.1);
    match case {
        1 => sys(r(rng), 0.0, 0.0, r(rng), lo, hi),
        2 => sys(rng.gen_range(-2.0..2.0), r(rng), 0.0, r(rng), lo, hi),
        3 => {
            // aα + bβ = 0 exactly: α is a power of two and β, b are small integers.
            let alpha = dyadic(rng);
            let b = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0][rng.gen_range(0..6)];
            let beta = f64::from(rng.gen_range(-3i32..=3));
            sys(-b * beta / alpha, b, alpha, beta, lo, hi)
        }
        4 => sys(r(rng), 0.0, r(rng), rng.gen_range(-2.0..2.0), lo, hi),
        5 => loop {
            let s = sys(rng.gen_range(-2.0..2.0), r(rng), r(rng), rng.gen_range(-2.0..2.0), lo, hi);
            if s.gamma().abs() > 0.1 {
                return s;
            }
        },
        _ => unreachable!("cases are 1..=5"),
    }
}

/// `(e^z − 1)/z`.
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Variation of constants on the original equations:
/// `x(t) = e^{uαt}x`,
/// `y(t) = e^{bt}y + (a + uβ)x·t·e^{bt}φ₁((uα − b)t) − a·t·φ₁(bt)`.
pub fn oracle_flow(s: &SystemParams, p: &GroupPoint, u: f64, t: f64) -> (f64, f64) {
    let (a, b, alpha, beta) = (s.a(), s.b(), s.alpha(), s.beta());
    let (x, y) = (p.x(), p.y());
    let ebt = (b * t).exp();
    let xt = (u * alpha * t).exp() * x;
    let yt = ebt * y + (a + u * beta) * x * t * ebt * phi1((u * alpha - b) * t) - a * t * phi1(b * t);
    (xt, yt)
}

/// Slope of the line through `(0, a/b)` invariant under the constant control `u`:
/// substituting `y = sx + a/b` gives `s(uα − b) = a + uβ`.
pub fn invariant_line_slope(s: &SystemParams, u: f64) -> f64 {
    (s.a() + u * s.beta()) / (u * s.alpha() - s.b())
}

/// Equilibrium of `ẏ` on the vertical line `x` under constant `u`, when `α = 0`.
pub fn vertical_equilibrium(s: &SystemParams, x: f64, u: f64) -> f64 {
    -(s.a() * (x - 1.0) + u * x * s.beta()) / s.b()
}

/// Sign predicate of the vertical-drift case: some control pushes `y` down and another up.
/// The rate is evaluated as `(a + uβ)x − a` so that it does not round to zero for huge `x`.
pub fn drift_changes_sign(s: &SystemParams, x: f64) -> bool {
    let rates = [s.omega().lo(), s.omega().hi()].map(|u| (s.a() + u * s.beta()) * x - s.a());
    rates.iter().any(|&r| r < 0.0) && rates.iter().any(|&r| r > 0.0)
}

/// Edge of the sign-change region along the ray from `inside` toward `outside`, by bisection.
pub fn bisect_edge(s: &SystemParams, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..4096 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if drift_changes_sign(s, mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
