use rand::Rng;
use serde::Serialize;

use super::sample::{random_dwell, random_level};
use super::{check_positive, domain, task_rng, DEFAULT_BUDGET, DEFAULT_EPS, DEFAULT_HORIZON};
use crate::classify::{admissible_ray_set, cone_region, control_for_slope, slope_transition_time, AdmissibleSet, ControlSetDescription};
use crate::error::{Error, Result};
use crate::flows::{ClosedFormFlow, PiecewiseControl};
use crate::group::GroupPoint;
use crate::normal_form::NormalSystem;
use crate::system::{ControlRange, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteerOptions {
    pub eps: f64,
    /// Maximum number of flow evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Dwell times of random shooting are drawn from `(0, horizon/4]`.
    pub horizon: f64,
}

impl Default for SteerOptions {
    fn default() -> Self {
        SteerOptions { eps: DEFAULT_EPS, budget: DEFAULT_BUDGET, seed: 0, horizon: DEFAULT_HORIZON }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Steered,
    /// A one-sided invariant of the flow rules out every point within `eps` of the target.
    BarrierCertified,
    /// The search ran out of budget; this proves nothing.
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteerMethod {
    Trivial,
    Analytic,
    Shooting,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteeringResult {
    pub found: bool,
    pub control: Option<PiecewiseControl>,
    /// Distance from the target of the best endpoint seen.
    pub terminal_error: f64,
    pub expansions: usize,
    pub verdict: Verdict,
    pub method: SteerMethod,
    pub certificate: Option<String>,
}

impl SteeringResult {
    fn found(control: PiecewiseControl, terminal_error: f64, expansions: usize, method: SteerMethod) -> Self {
        SteeringResult {
            found: true,
            control: Some(control),
            terminal_error,
            expansions,
            verdict: Verdict::Steered,
            method,
            certificate: None,
        }
    }
}

pub fn steer(sys: &SystemParams, p: &GroupPoint, q: &GroupPoint, eps: f64, budget: usize, seed: u64) -> Result<SteeringResult> {
    steer_with(sys, p, q, &SteerOptions { eps, budget, seed, ..SteerOptions::default() })
}

/// Searches for a piecewise-constant control carrying `p` to within `eps` of `q`:
/// an exact construction in normal coordinates first, then random shooting.
pub fn steer_with(sys: &SystemParams, p: &GroupPoint, q: &GroupPoint, opts: &SteerOptions) -> Result<SteeringResult> {
    check_positive("eps", opts.eps)?;
    check_positive("horizon", opts.horizon)?;
    if opts.budget == 0 {
        return Err(Error::Parse("budget must be positive".into()));
    }
    let flow = ClosedFormFlow::new(sys);
    let d0 = p.distance(q);
    if d0 <= opts.eps {
        return Ok(SteeringResult::found(PiecewiseControl::empty(), d0, 0, SteerMethod::Trivial));
    }
    if let Some(cert) = barrier_certificate(sys, p, q, opts.eps) {
        return Ok(SteeringResult {
            found: false,
            control: None,
            terminal_error: d0,
            expansions: 0,
            verdict: Verdict::BarrierCertified,
            method: SteerMethod::None,
            certificate: Some(cert),
        });
    }

    let mut expansions = 1;
    let mut best = (PiecewiseControl::empty(), d0);
    if let Some(ctrl) = analytic_control(&flow, p, q) {
        if ctrl.check_range(&sys.omega()).is_ok() {
            let err = flow.endpoint_unchecked(p, &ctrl).distance(q);
            if err + rounding_bound(sys, &ctrl, q) <= opts.eps {
                return Ok(SteeringResult::found(ctrl, err, expansions, SteerMethod::Analytic));
            }
            if err < best.1 {
                best = (ctrl, err);
            }
        }
    }

    let mut rng = task_rng(opts.seed, domain::SEARCH, 0);
    let (ctrl, err) = shoot(&flow, p, q, opts, &mut rng, &mut expansions);
    if err + rounding_bound(sys, &ctrl, q) <= opts.eps {
        return Ok(SteeringResult::found(ctrl, err, expansions, SteerMethod::Shooting));
    }
    if err < best.1 {
        best = (ctrl, err);
    }
    Ok(SteeringResult {
        found: false,
        control: Some(best.0),
        terminal_error: best.1,
        expansions,
        verdict: Verdict::BudgetExhausted,
        method: SteerMethod::None,
        certificate: None,
    })
}

/// Relative error assumed per unit of forward amplification.
const ROUNDING_GROWTH: f64 = 1e-12;

/// Bound on how far rounding can move the endpoint: perturbations of `y` grow
/// like `e^{bt}` along every trajectory, so long controls with `b > 0` are
/// ill-conditioned even when their computed endpoint is accurate.
fn rounding_bound(sys: &SystemParams, ctrl: &PiecewiseControl, q: &GroupPoint) -> f64 {
    (sys.b().max(0.0) * ctrl.duration()).exp() * ROUNDING_GROWTH * (1.0 + q.norm())
}

/// Exact construction in normal coordinates. With a reversed normal form the
/// normal-coordinate problem runs from `q` to `p`.
fn analytic_control(flow: &ClosedFormFlow, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    let nf = flow.normal_form();
    let (from, to) = if nf.reversed {
        (nf.to_normal(q), nf.to_normal(p))
    } else {
        (nf.to_normal(p), nf.to_normal(q))
    };
    let c = normal_control(&nf.system, &nf.omega, &from, &to)?;
    Some(if nf.reversed { c.reversed_negated() } else { c })
}

fn normal_control(sys: &NormalSystem, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    match *sys {
        NormalSystem::VerticalDrift { a, beta } => drift_control(a, beta, omega, p, q),
        NormalSystem::Segment { b, beta } => segment_control(b, beta, omega, p, q),
        NormalSystem::Saddle { alpha, b } => saddle_control(alpha, b, omega, p, q),
        NormalSystem::Shear { alpha } => shear_control(sys, alpha, omega, p, q),
        NormalSystem::Cone { .. } => cone_control(sys, omega, p, q),
    }
}

fn single(dt: f64, u: f64) -> PiecewiseControl {
    let mut c = PiecewiseControl::empty();
    c.push(dt, u);
    c
}

fn drift_control(a: f64, beta: f64, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    let x = p.x();
    let dy = q.y() - p.y();
    if dy == 0.0 {
        return Some(PiecewiseControl::empty());
    }
    [omega.lo(), omega.hi()]
        .into_iter()
        .map(|u| (u, a * (x - 1.0) + u * x * beta))
        .filter(|&(_, rate)| rate * dy > 0.0)
        .max_by(|l, r| l.1.abs().total_cmp(&r.1.abs()))
        .map(|(u, rate)| single(dy / rate, u))
}

fn segment_control(b: f64, beta: f64, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    // y(t) = e + (y0 − e) e^{bt} with equilibrium e = −uxβ.
    if q.y() == p.y() {
        return Some(PiecewiseControl::empty());
    }
    let x = p.x();
    [omega.lo(), omega.hi()]
        .into_iter()
        .filter_map(|u| {
            let e = -u * x * beta;
            let ratio = (q.y() - e) / (p.y() - e);
            (ratio > 0.0 && ratio < 1.0).then(|| (u, ratio.ln() / b))
        })
        .min_by(|l, r| l.1.total_cmp(&r.1))
        .map(|(u, t)| single(t, u))
}

/// Control level and time moving `x0` to `x1` at the fastest admissible rate.
fn x_leg(alpha: f64, omega: &ControlRange, x0: f64, x1: f64) -> Option<(f64, f64)> {
    let l = (x1 / x0).ln();
    if l == 0.0 {
        return None;
    }
    let u = if alpha * l > 0.0 { omega.hi() } else { omega.lo() };
    Some((u, l / (u * alpha)))
}

fn saddle_control(alpha: f64, b: f64, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    let on_line = |g: &GroupPoint| g.y().abs() <= 1e-12 * (1.0 + g.x());
    if on_line(p) && on_line(q) {
        return Some(x_leg(alpha, omega, p.x(), q.x()).map_or_else(PiecewiseControl::empty, |(u, t)| single(t, u)));
    }
    // y evolves as e^{bt}y whatever the control, which fixes the total time.
    let ratio = q.y() / p.y();
    if !(ratio > 0.0) {
        return None;
    }
    let total = ratio.ln() / b;
    if !(total > 0.0) {
        return None;
    }
    let integral = (q.x() / p.x()).ln() / alpha;
    let u = if integral >= 0.0 { omega.hi() } else { omega.lo() };
    let bang = integral / u;
    if bang > total {
        return None;
    }
    let mut c = PiecewiseControl::empty();
    c.push(bang, u);
    c.push(total - bang, 0.0);
    Some(c)
}

struct Plan {
    control: PiecewiseControl,
}

impl Plan {
    fn duration(&self) -> f64 {
        self.control.duration()
    }
}

fn shortest(plans: impl Iterator<Item = Plan>) -> Option<PiecewiseControl> {
    plans
        .filter(|p| p.duration().is_finite())
        .min_by(|l, r| l.duration().total_cmp(&r.duration()))
        .map(|p| p.control)
}

/// Horizontal legs through drift stations at `x = 1/2` (y falls at rate 1/2
/// under `u = 0`) and `x = 2` (y rises at rate 1); the drift durations are
/// solved for exactly.
fn shear_control(sys: &NormalSystem, alpha: f64, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    const STATIONS: [f64; 2] = [0.5, 2.0];
    let orders: [&[f64]; 4] = [&STATIONS[..1], &STATIONS[1..], &STATIONS, &[STATIONS[1], STATIONS[0]]];
    let plan = |stations: &[f64]| -> Option<Plan> {
        let mut xs = vec![p.x()];
        xs.extend_from_slice(stations);
        xs.push(q.x());
        let legs: Vec<Option<(f64, f64)>> = xs.windows(2).map(|w| x_leg(alpha, omega, w[0], w[1])).collect();
        let mut end = *p;
        for &(u, t) in legs.iter().flatten() {
            end = sys.flow(&end, u, t);
        }
        let gap = q.y() - end.y();
        let mut drift = vec![0.0; stations.len()];
        match stations.iter().position(|&s| (s - 1.0) * gap >= 0.0) {
            Some(i) => drift[i] = gap / (stations[i] - 1.0),
            None => return None,
        }
        let mut control = PiecewiseControl::empty();
        for (i, leg) in legs.iter().enumerate() {
            if let Some((u, t)) = *leg {
                control.push(t, u);
            }
            if i < stations.len() {
                control.push(drift[i], 0.0);
            }
        }
        Some(Plan { control })
    };
    shortest(orders.iter().filter_map(|o| plan(o)))
}

/// Ray-to-ray transfers plus scaling along rays whose `uα` has a fixed sign;
/// the scaling durations are solved for exactly.
fn cone_control(sys: &NormalSystem, omega: &ControlRange, p: &GroupPoint, q: &GroupPoint) -> Option<PiecewiseControl> {
    let NormalSystem::Cone { alpha, b } = *sys else { return None };
    let set = admissible_ray_set(sys, omega).ok()?;
    let slope = |u: f64| u / (u * alpha - b);
    let (m1, m2) = (p.y() / p.x(), q.y() / q.x());

    // Scaling rays inside B: near a closed end (edge rays are only reached
    // asymptotically), halfway to an open one.
    let inner = |end: f64, closed: bool| if closed { 0.9 * end } else { 0.5 * end };
    let (lo, hi) = (inner(set.lo, set.lo_closed), inner(set.hi, set.hi_closed));
    let (grow, shrink) = if alpha > 0.0 { (hi, lo) } else { (lo, hi) };
    let transfer = |from: f64, to: f64| -> Option<Option<(f64, f64)>> {
        if from == to {
            return Some(None);
        }
        let u = far_control(&set, alpha, b, to, to > from)?;
        let t = slope_transition_time(from, to, slope(u), u * alpha - b)?;
        Some(Some((u, t)))
    };

    let plan = |stations: &[f64]| -> Option<Plan> {
        let mut slopes = vec![m1];
        slopes.extend(stations.iter().map(|&u| slope(u)));
        slopes.push(m2);
        let legs: Vec<Option<(f64, f64)>> = slopes.windows(2).map(|w| transfer(w[0], w[1])).collect::<Option<_>>()?;
        let gain: f64 = legs.iter().flatten().map(|&(u, t)| u * alpha * t).sum();
        let needed = (q.x() / p.x()).ln() - gain;
        let mut scale = vec![0.0; stations.len()];
        match stations.iter().position(|&u| u * alpha * needed >= 0.0) {
            Some(i) => scale[i] = needed / (stations[i] * alpha),
            None => return None,
        }
        let mut control = PiecewiseControl::empty();
        for (i, leg) in legs.iter().enumerate() {
            if let Some((u, t)) = *leg {
                control.push(t, u);
            }
            if i < stations.len() {
                control.push(scale[i], stations[i]);
            }
        }
        Some(Plan { control })
    };
    let orders: [&[f64]; 4] = [&[grow], &[shrink], &[grow, shrink], &[shrink, grow]];
    shortest(orders.iter().filter_map(|o| plan(o)))
}

/// A level of `B` whose ray lies beyond `target` in the direction of travel.
fn far_control(set: &AdmissibleSet, alpha: f64, b: f64, target: f64, upward: bool) -> Option<f64> {
    // m_u is increasing on B; an open end of B is where m_u diverges.
    let u = if upward {
        if set.hi_closed { Some(set.hi) } else { control_for_slope(target + 1.0 + target.abs(), alpha, b) }
    } else if set.lo_closed {
        Some(set.lo)
    } else {
        control_for_slope(target - 1.0 - target.abs(), alpha, b)
    }?;
    set.contains(u).then_some(u)
}

fn shoot<R: Rng>(
    flow: &ClosedFormFlow,
    p: &GroupPoint,
    q: &GroupPoint,
    opts: &SteerOptions,
    rng: &mut R,
    used: &mut usize,
) -> (PiecewiseControl, f64) {
    let omega = flow.params().omega();
    let eval = |levels: &[f64], dts: &[f64]| {
        let mut c = PiecewiseControl::empty();
        for (&u, &dt) in levels.iter().zip(dts) {
            c.push(dt, u);
        }
        let err = flow.endpoint_unchecked(p, &c).distance(q) + rounding_bound(flow.params(), &c, q);
        (c, if err.is_finite() { err } else { f64::INFINITY })
    };
    let mut best = (PiecewiseControl::empty(), p.distance(q));
    let raw = |c: &PiecewiseControl| flow.endpoint_unchecked(p, c).distance(q);
    while *used < opts.budget {
        let k = rng.gen_range(1..=4);
        let levels: Vec<f64> = (0..k).map(|_| random_level(rng, &omega)).collect();
        let mut dts: Vec<f64> = (0..k).map(|_| random_dwell(rng, opts.horizon)).collect();
        let mut cur = eval(&levels, &dts);
        *used += 1;
        let mut step: Vec<f64> = dts.iter().map(|d| d / 2.0).collect();
        while cur.1 > opts.eps && *used < opts.budget {
            let mut improved = false;
            'search: for i in 0..k {
                for sign in [1.0, -1.0] {
                    let cand = dts[i] + sign * step[i];
                    if !(cand > 0.0) || *used >= opts.budget {
                        continue;
                    }
                    let mut trial = dts.clone();
                    trial[i] = cand;
                    let next = eval(&levels, &trial);
                    *used += 1;
                    if next.1 < cur.1 {
                        dts = trial;
                        cur = next;
                        improved = true;
                        break 'search;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s /= 2.0);
                if step.iter().all(|&s| s < 1e-9) {
                    break;
                }
            }
        }
        if cur.1 < best.1 {
            best = cur;
        }
        if best.1 <= opts.eps {
            break;
        }
    }
    let err = raw(&best.0);
    (best.0, err)
}

/// Linear function `kx·X + ky·Y + k0` of normal coordinates whose value
/// cannot rise above `max(value at start, 0)` along forward normal-time flows.
struct Barrier {
    kx: f64,
    ky: f64,
    k0: f64,
    name: &'static str,
}

impl Barrier {
    fn value(&self, g: &GroupPoint) -> f64 {
        self.kx * g.x() + self.ky * g.y() + self.k0
    }
}

fn normal_barriers(sys: &NormalSystem, omega: &ControlRange, start: &GroupPoint) -> Vec<Barrier> {
    let mut out = Vec::new();
    match *sys {
        NormalSystem::VerticalDrift { a, beta } => {
            let x = start.x();
            let rates = [omega.lo(), omega.hi()].map(|u| a * (x - 1.0) + u * x * beta);
            if rates.iter().all(|&r| r >= 0.0) {
                out.push(Barrier { kx: 0.0, ky: -1.0, k0: start.y(), name: "y is non-decreasing on this line" });
            }
            if rates.iter().all(|&r| r <= 0.0) {
                out.push(Barrier { kx: 0.0, ky: 1.0, k0: -start.y(), name: "y is non-increasing on this line" });
            }
        }
        NormalSystem::Segment { beta, .. } => {
            let k = [-omega.lo() * beta, -omega.hi() * beta];
            let (k1, k2) = (k[0].min(k[1]), k[0].max(k[1]));
            out.push(Barrier { kx: -k2, ky: 1.0, k0: 0.0, name: "upper segment endpoint attracts from above" });
            out.push(Barrier { kx: k1, ky: -1.0, k0: 0.0, name: "lower segment endpoint attracts from below" });
        }
        NormalSystem::Saddle { b, .. } => {
            let y0 = start.y();
            if b < 0.0 || y0 == 0.0 {
                out.push(Barrier { kx: 0.0, ky: 1.0, k0: 0.0, name: "y contracts toward the invariant line" });
                out.push(Barrier { kx: 0.0, ky: -1.0, k0: 0.0, name: "y contracts toward the invariant line" });
            }
            if b > 0.0 && y0 != 0.0 {
                let s = y0.signum();
                out.push(Barrier { kx: 0.0, ky: -s, k0: 0.0, name: "y keeps its sign" });
                out.push(Barrier { kx: 0.0, ky: -s, k0: s * y0, name: "|y| is non-decreasing" });
            }
        }
        NormalSystem::Shear { .. } => {}
        NormalSystem::Cone { .. } => {
            if let Ok(ControlSetDescription::Cone { lower, upper, .. }) = cone_region(sys, omega) {
                if let Some(e) = upper {
                    out.push(Barrier { kx: -e.slope, ky: 1.0, k0: 0.0, name: "upper cone edge is a one-sided barrier" });
                }
                if let Some(e) = lower {
                    out.push(Barrier { kx: e.slope, ky: -1.0, k0: 0.0, name: "lower cone edge is a one-sided barrier" });
                }
            }
        }
    }
    out
}

/// A reason no control can carry `p` to within `eps` of `q`, if one of the
/// flow's one-sided invariants proves it.
pub fn barrier_certificate(sys: &SystemParams, p: &GroupPoint, q: &GroupPoint, eps: f64) -> Option<String> {
    let flow = ClosedFormFlow::new(sys);
    let nf = flow.normal_form();
    if matches!(nf.system, NormalSystem::VerticalDrift { .. } | NormalSystem::Segment { .. }) && (p.x() - q.x()).abs() > eps {
        return Some(format!("x is invariant: |Δx| = {:e} > eps", (p.x() - q.x()).abs()));
    }
    let (pn, qn) = (nf.to_normal(p), nf.to_normal(q));
    let (c, d) = (nf.psi.c(), nf.psi.d());
    // Normal-time flows start at ψ(p), or at ψ(q′) for q′ near q when reversed.
    let start = if nf.reversed { qn } else { pn };
    for bar in normal_barriers(&nf.system, &nf.omega, &start) {
        let lip = (bar.kx + bar.ky * c).hypot(bar.ky * d);
        let certified = if nf.reversed {
            bar.value(&pn) > (bar.value(&qn) + eps * lip).max(0.0)
        } else {
            bar.value(&qn) - eps * lip > bar.value(&pn).max(0.0)
        };
        if certified {
            return Some(bar.name.to_string());
        }
    }
    None
}
