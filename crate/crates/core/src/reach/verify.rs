use rand::Rng;
use serde::Serialize;

use super::sample::random_control;
use super::steer::{steer_with, SteerOptions, Verdict};
use super::{check_positive, domain, par_map, task_rng, Viewport, DEFAULT_BUDGET, DEFAULT_EPS, DEFAULT_HORIZON};
use crate::classify::{cone_region, ControlSetDescription, Invariance};
use crate::error::{Error, Result};
use crate::flows::{ClosedFormFlow, PiecewiseControl, Sampling};
use crate::group::GroupPoint;
use crate::normal_form::{conjugate_to_normal_form, NormalSystem};
use crate::system::SystemParams;

/// Inner margin kept between sampled steering points and the boundary.
const INTERIOR_MARGIN: f64 = 0.05;
const MAX_WITNESSES: usize = 16;
const MAX_REJECTIONS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Number of point pairs; each pair is steered in both directions.
    pub pairs: usize,
    pub invariance_samples: usize,
    pub eps: f64,
    pub budget: usize,
    pub horizon: f64,
    pub seed: u64,
    pub viewport: Viewport,
    /// Relative slack of the invariance membership test.
    pub slack: f64,
    /// Invariance samples flow for a time uniform on `(0, max_time]`.
    pub max_time: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            pairs: 10,
            invariance_samples: 1000,
            eps: DEFAULT_EPS,
            budget: DEFAULT_BUDGET,
            horizon: DEFAULT_HORIZON,
            seed: 0,
            viewport: Viewport::default(),
            slack: 1e-9,
            max_time: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteerOutcome {
    pub found: bool,
    pub verdict: Verdict,
    pub terminal_error: f64,
    pub expansions: usize,
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRecord {
    pub index: usize,
    pub p: GroupPoint,
    pub q: GroupPoint,
    pub forward: SteerOutcome,
    pub backward: SteerOutcome,
}

impl PairRecord {
    pub fn steered(&self) -> bool {
        self.forward.found && self.backward.found
    }
}

/// A sampled flow leaving the set it started in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeWitness {
    pub point: GroupPoint,
    /// Applied forward in time, or backward when `backward` is set.
    pub control: PiecewiseControl,
    pub backward: bool,
    pub end: GroupPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pairs_tested: usize,
    pub pairs_steered: usize,
    pub invariance_samples: usize,
    pub invariance_violations: usize,
    pub escape_witnesses: Vec<EscapeWitness>,
    pub max_terminal_error: f64,
    pub pairs: Vec<PairRecord>,
}

impl VerificationReport {
    /// No invariance violation and every pair steered both ways.
    pub fn clean(&self) -> bool {
        self.invariance_violations == 0 && self.pairs_steered == self.pairs_tested
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// x-range of the viewport shrunk by a margin and intersected with `I`.
fn line_range(desc: &ControlSetDescription, vp: &Viewport, margin: f64) -> (f64, f64) {
    match *desc {
        ControlSetDescription::VerticalLines { interval } => (
            vp.x0.max(interval.lo + margin),
            interval.hi.map_or(vp.x1, |h| vp.x1.min(h - margin)),
        ),
        _ => (vp.x0, vp.x1),
    }
}

/// A point of the (relative) interior, at least `margin` inside, at abscissa `x`
/// when the sets are vertical.
fn interior_point<R: Rng>(desc: &ControlSetDescription, vp: &Viewport, margin: f64, x: Option<f64>, rng: &mut R) -> Option<GroupPoint> {
    match *desc {
        ControlSetDescription::VerticalLines { .. } => {
            let (x0, x1) = line_range(desc, vp, margin);
            (x0 < x1).then(|| GroupPoint::raw(x.unwrap_or_else(|| uniform(rng, x0, x1)), uniform(rng, vp.y0, vp.y1)))
        }
        ControlSetDescription::VerticalSegments { lower, upper, .. } => {
            let x = x.unwrap_or_else(|| uniform(rng, vp.x0, vp.x1));
            let (lo, hi) = (lower.at(x), upper.at(x));
            let pad = (hi - lo) * margin;
            Some(GroupPoint::raw(x, uniform(rng, lo + pad, hi - pad)))
        }
        ControlSetDescription::Line { slope } => {
            let x = uniform(rng, vp.x0, vp.x1);
            Some(GroupPoint::raw(x, slope * (x - 1.0)))
        }
        ControlSetDescription::WholeGroup => Some(GroupPoint::raw(uniform(rng, vp.x0, vp.x1), uniform(rng, vp.y0, vp.y1))),
        ControlSetDescription::Cone { .. } => (0..MAX_REJECTIONS).find_map(|_| {
            let g = GroupPoint::raw(uniform(rng, vp.x0, vp.x1), uniform(rng, vp.y0, vp.y1));
            let deep = desc.boundary_residual(&g).map_or(true, |r| r >= margin);
            (desc.contains_interior(&g) && deep).then_some(g)
        }),
    }
}

fn sample_pair<R: Rng>(desc: &ControlSetDescription, vp: &Viewport, rng: &mut R) -> Option<(GroupPoint, GroupPoint)> {
    let p = interior_point(desc, vp, INTERIOR_MARGIN, None, rng)?;
    // vertical sets: both points on the same line or segment
    let x = matches!(desc, ControlSetDescription::VerticalLines { .. } | ControlSetDescription::VerticalSegments { .. })
        .then_some(p.x());
    let q = interior_point(desc, vp, INTERIOR_MARGIN, x, rng)?;
    Some((p, q))
}

fn outcome(sys: &SystemParams, p: &GroupPoint, q: &GroupPoint, opts: &SteerOptions) -> Result<SteerOutcome> {
    let r = steer_with(sys, p, q, opts)?;
    Ok(SteerOutcome {
        found: r.found,
        verdict: r.verdict,
        terminal_error: r.terminal_error,
        expansions: r.expansions,
        duration: r.control.filter(|_| r.found).map(|c| c.duration()),
    })
}

/// Membership after a flow, keeping vertical sets on their own line.
fn stays(desc: &ControlSetDescription, start: &GroupPoint, end: &GroupPoint, slack: f64) -> bool {
    let scaled = slack * (1.0 + end.x().abs() + end.y().abs());
    match desc {
        ControlSetDescription::VerticalLines { .. } | ControlSetDescription::VerticalSegments { .. } => {
            (end.x() - start.x()).abs() <= slack * (1.0 + start.x()) && desc.contains_with_slack(end, scaled)
        }
        ControlSetDescription::Line { .. } => desc.contains_with_slack(end, slack),
        _ => desc.contains_with_slack(end, scaled),
    }
}

/// Start point of an invariance sample: on the boundary one time in four.
fn invariance_start<R: Rng>(desc: &ControlSetDescription, vp: &Viewport, rng: &mut R) -> Option<GroupPoint> {
    if !matches!(desc, ControlSetDescription::VerticalLines { .. }) && rng.gen_bool(0.25) {
        let (x0, x1) = line_range(desc, vp, 0.0);
        let pts = desc.boundary_points(&[uniform(rng, x0, x1)]);
        if !pts.is_empty() {
            return Some(pts[rng.gen_range(0..pts.len())]);
        }
    }
    interior_point(desc, vp, 0.0, None, rng)
}

/// Empirical check that `desc` behaves like the control sets of `sys`:
/// pairwise steering in both directions inside the sets, and invariance of
/// the sets in the claimed time direction.
pub fn verify_control_set(
    sys: &SystemParams,
    desc: &ControlSetDescription,
    invariance: Invariance,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    check_positive("eps", cfg.eps)?;
    check_positive("horizon", cfg.horizon)?;
    check_positive("max_time", cfg.max_time)?;
    let flow = ClosedFormFlow::new(sys);

    let pair_results = par_map(cfg.pairs, |i| -> Result<Option<PairRecord>> {
        let mut rng = task_rng(cfg.seed, domain::PAIR, i);
        let Some((p, q)) = sample_pair(desc, &cfg.viewport, &mut rng) else { return Ok(None) };
        let opts = |k: u64| SteerOptions {
            eps: cfg.eps,
            budget: cfg.budget,
            seed: cfg.seed.wrapping_add((i as u64) << 1 | k),
            horizon: cfg.horizon,
        };
        Ok(Some(PairRecord {
            index: i,
            p,
            q,
            forward: outcome(sys, &p, &q, &opts(0))?,
            backward: outcome(sys, &q, &p, &opts(1))?,
        }))
    });
    let mut pairs = Vec::new();
    for r in pair_results {
        pairs.extend(r?);
    }

    let directions: &[bool] = match invariance {
        Invariance::PositivelyInvariant => &[false],
        Invariance::NegativelyInvariant => &[true],
        Invariance::Invariant => &[false, true],
        Invariance::NoneClaimed => &[],
    };
    let n_inv = if directions.is_empty() { 0 } else { cfg.invariance_samples };
    let omega = sys.omega();
    let checks = par_map(n_inv, |j| {
        let mut rng = task_rng(cfg.seed, domain::INVARIANCE, j);
        let start = invariance_start(desc, &cfg.viewport, &mut rng)?;
        let u = rng.gen_range(omega.lo()..=omega.hi());
        let t = cfg.max_time * (1.0 - rng.gen::<f64>());
        let backward = directions[j % directions.len()];
        let end = flow.flow_unchecked(&start, u, if backward { -t } else { t });
        (!stays(desc, &start, &end, cfg.slack)).then(|| EscapeWitness {
            point: start,
            control: PiecewiseControl::from_pairs(&[(t, u)]).expect("t > 0"),
            backward,
            end,
        })
    });
    let invariance_violations = checks.iter().flatten().count();

    Ok(VerificationReport {
        pairs_tested: pairs.len(),
        pairs_steered: pairs.iter().filter(|r| r.steered()).count(),
        invariance_samples: n_inv,
        invariance_violations,
        escape_witnesses: checks.into_iter().flatten().take(MAX_WITNESSES).collect(),
        max_terminal_error: pairs
            .iter()
            .flat_map(|r| [r.forward.terminal_error, r.backward.terminal_error])
            .fold(0.0, f64::max),
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// Largest edge violation of the start point, in normal coordinates.
    pub initial_distance: f64,
    /// Largest `e(φ(t)) − e^{bt} e(p)` over edges and samples; `≤ 0` up to rounding.
    pub max_residual: f64,
    pub samples: usize,
}

/// Checks exponential absorption toward the cone: along random normal-time
/// trajectories from `p`, each edge function `e` (vertical offset past the
/// edge, normal coordinates) obeys `e(φ(t)) ≤ e^{bt} e(p)`.
pub fn decay_to_cone_check(sys: &SystemParams, p: &GroupPoint, n: usize, seed: u64, horizon: f64) -> Result<DecayReport> {
    check_positive("horizon", horizon)?;
    let nf = conjugate_to_normal_form(sys);
    let NormalSystem::Cone { b, .. } = nf.system else {
        return Err(Error::WrongCase { expected: "the cone normal form", case: nf.case() });
    };
    let ControlSetDescription::Cone { lower, upper, .. } = cone_region(&nf.system, &nf.omega)? else {
        unreachable!("cone_region returns a cone")
    };
    let edges: Vec<(f64, f64)> = upper.iter().map(|e| (-e.slope, 1.0)).chain(lower.iter().map(|e| (e.slope, -1.0))).collect();
    let offset = |g: &GroupPoint, (kx, ky): (f64, f64)| kx * g.x() + ky * g.y();
    let start = nf.to_normal(p);
    let initial: Vec<f64> = edges.iter().map(|&e| offset(&start, e)).collect();

    let per_run = par_map(n, |i| {
        let mut rng = task_rng(seed, domain::DECAY, i);
        let ctrl = random_control(&mut rng, &nf.omega, horizon);
        let (mut worst, mut count) = (f64::NEG_INFINITY, 0usize);
        let (mut t0, mut q0) = (0.0, start);
        for s in ctrl.segments() {
            for off in Sampling::default().offsets(s.dt) {
                let q = nf.system.flow(&q0, s.u, off);
                let decay = (b * (t0 + off)).exp();
                for (k, &e) in edges.iter().enumerate() {
                    worst = worst.max(offset(&q, e) - decay * initial[k]);
                }
                count += 1;
            }
            q0 = nf.system.flow(&q0, s.u, s.dt);
            t0 += s.dt;
        }
        (worst, count)
    });
    Ok(DecayReport {
        initial_distance: initial.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_residual: per_run.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
        samples: per_run.iter().map(|r| r.1).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub x: f64,
    /// Drift rates `a(x − 1) + uxβ` at the two ends of `Ω`.
    pub rates: [f64; 2],
    /// `-1` when every rate is negative, `1` when every rate is positive.
    pub direction: Option<i8>,
    pub trajectories: usize,
    /// Every sampled trajectory moved strictly in `direction`.
    pub all_monotone: bool,
}

/// On a vertical line where every control pushes `y` the same way, sampled
/// trajectories must be strictly monotone in `y`.
pub fn monotone_escape_check(sys: &SystemParams, x: f64, n: usize, seed: u64, horizon: f64) -> Result<MonotoneReport> {
    check_positive("horizon", horizon)?;
    let flow = ClosedFormFlow::new(sys);
    let NormalSystem::VerticalDrift { a, beta } = flow.normal_form().system else {
        return Err(Error::WrongCase { expected: "the vertical-drift case", case: flow.normal_form().case() });
    };
    let start = GroupPoint::new(x, 0.0)?;
    let omega = sys.omega();
    let rates = [omega.lo(), omega.hi()].map(|u| a * (x - 1.0) + u * x * beta);
    let direction = if rates.iter().all(|&r| r < 0.0) {
        Some(-1)
    } else if rates.iter().all(|&r| r > 0.0) {
        Some(1)
    } else {
        None
    };
    let all_monotone = match direction {
        None => false,
        Some(dir) => par_map(n, |i| {
            let mut rng = task_rng(seed, domain::ESCAPE, i);
            let ctrl = random_control(&mut rng, &omega, horizon);
            let tr = flow.run(&start, &ctrl, Sampling::default()).expect("random levels lie in Ω");
            tr.samples.windows(2).all(|w| f64::from(dir) * (w[1].p.y() - w[0].p.y()) > 0.0)
        })
        .into_iter()
        .all(|ok| ok),
    };
    Ok(MonotoneReport { x, rates, direction, trajectories: n, all_monotone })
}
