//! Control-set geometry of a linear system: the five outcomes of the
//! classification, ray slopes of the cone normal form, membership queries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::SINGULAR_BRANCH_TOL;
use crate::group::{Automorphism, GroupPoint};
use crate::normal_form::{conjugate_to_normal_form, NormalForm, NormalSystem};
use crate::system::{larc, ControlRange, SystemParams};

/// Coefficients below this magnitude (but nonzero) are flagged as near-degenerate.
pub const NEAR_DEGENERATE: f64 = 1e-9;

/// Relative tolerance of membership in the (empty-interior) line control set.
pub const LINE_TOL: f64 = 1e-12;

/// Slope `m_u = u/(uα − b)` of the ray `r_u` invariant under the constant control `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RaySlope {
    pub u: f64,
    pub m: f64,
}

fn is_singular(u: f64, alpha: f64, b: f64) -> bool {
    (u * alpha - b).abs() <= SINGULAR_BRANCH_TOL * b.abs().max(1.0)
}

pub fn ray_slope(u: f64, alpha: f64, b: f64) -> Result<RaySlope> {
    if is_singular(u, alpha, b) {
        return Err(Error::SingularRay { u, alpha, b });
    }
    Ok(RaySlope { u, m: u / (u * alpha - b) })
}

/// Inverse of `u ↦ m_u`: `u = m b/(mα − 1)`. `None` at the asymptote `m = 1/α`.
pub fn control_for_slope(m: f64, alpha: f64, b: f64) -> Option<f64> {
    let den = m * alpha - 1.0;
    (den != 0.0).then(|| m * b / den)
}

/// `B = {u ∈ Ω : uα − b > 0}` for the cone normal form, an interval with
/// endpoint flags. The endpoint where `uα = b` is always open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmissibleSet {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl AdmissibleSet {
    pub fn contains(&self, u: f64) -> bool {
        let above = if self.lo_closed { u >= self.lo } else { u > self.lo };
        let below = if self.hi_closed { u <= self.hi } else { u < self.hi };
        above && below
    }

    pub fn interior_contains(&self, u: f64) -> bool {
        self.lo < u && u < self.hi
    }
}

fn cone_coefficients(nf: &NormalSystem) -> Result<(f64, f64)> {
    match *nf {
        NormalSystem::Cone { alpha, b } if b < 0.0 => Ok((alpha, b)),
        _ => Err(Error::NotConeForm),
    }
}

pub fn admissible_ray_set(nf: &NormalSystem, omega: &ControlRange) -> Result<AdmissibleSet> {
    let (alpha, b) = cone_coefficients(nf)?;
    let s = b / alpha;
    let (lo, hi) = (omega.lo(), omega.hi());
    Ok(if alpha > 0.0 {
        // u > s with s < 0 < hi
        if s < lo {
            AdmissibleSet { lo, lo_closed: true, hi, hi_closed: true }
        } else {
            AdmissibleSet { lo: s, lo_closed: false, hi, hi_closed: true }
        }
    } else if s > hi {
        AdmissibleSet { lo, lo_closed: true, hi, hi_closed: true }
    } else {
        AdmissibleSet { lo, lo_closed: true, hi: s, hi_closed: false }
    })
}

/// One straight edge of a cone: `y = apex_y + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeEdge {
    pub slope: f64,
    pub closed: bool,
}

/// `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineEdge {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineEdge {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Open interval `(lo, hi)` of the positive axis; `hi = None` is `+∞`.
/// Serialized as `[lo, hi]` with `null` for `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(into = "(f64, Option<f64>)")]
pub struct Interval {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl From<Interval> for (f64, Option<f64>) {
    fn from(i: Interval) -> Self {
        (i.lo, i.hi)
    }
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && self.hi.map_or(true, |h| x < h)
    }
}

/// The control sets of a system, in some coordinate chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSetDescription {
    /// Every vertical line `{x} × R` with `x ∈ interval` is a control set.
    VerticalLines { interval: Interval },
    /// For every `x > 0`, the segment `{x} × [lower(x), upper(x)]` is a control
    /// set; all of them cross `y = base_slope·(x − 1)`.
    VerticalSegments { base_slope: f64, lower: AffineEdge, upper: AffineEdge },
    /// The single control set `y = slope·(x − 1)`, with empty interior.
    Line { slope: f64 },
    WholeGroup,
    /// A closed cone with apex `(0, apex[1])` outside `G`.
    Cone { apex: [f64; 2], lower: Option<ConeEdge>, upper: Option<ConeEdge> },
}

impl ControlSetDescription {
    /// Image of the described sets under the automorphism `phi`.
    pub fn image_under(&self, phi: &Automorphism) -> ControlSetDescription {
        let (c, d) = (phi.c(), phi.d());
        match *self {
            ControlSetDescription::VerticalLines { interval } => ControlSetDescription::VerticalLines { interval },
            ControlSetDescription::VerticalSegments { base_slope, lower, upper } => {
                let map = |e: AffineEdge| AffineEdge { slope: c + d * e.slope, intercept: d * e.intercept - c };
                let (lower, upper) = ordered(d, map(lower), map(upper));
                ControlSetDescription::VerticalSegments { base_slope: c + d * base_slope, lower, upper }
            }
            ControlSetDescription::Line { slope } => ControlSetDescription::Line { slope: c + d * slope },
            ControlSetDescription::WholeGroup => ControlSetDescription::WholeGroup,
            ControlSetDescription::Cone { apex, lower, upper } => {
                let map = |e: Option<ConeEdge>| e.map(|e| ConeEdge { slope: c + d * e.slope, closed: e.closed });
                let (lower, upper) = ordered(d, map(lower), map(upper));
                ControlSetDescription::Cone { apex: [0.0, d * apex[1] - c], lower, upper }
            }
        }
    }

    pub fn contains(&self, p: &GroupPoint) -> bool {
        self.contains_with_slack(p, 0.0)
    }

    /// Membership with every inequality relaxed by `slack`.
    pub fn contains_with_slack(&self, p: &GroupPoint, slack: f64) -> bool {
        let (x, y) = (p.x(), p.y());
        match *self {
            ControlSetDescription::VerticalLines { interval } => {
                interval.lo - slack < x && interval.hi.map_or(true, |h| x < h + slack)
            }
            ControlSetDescription::VerticalSegments { lower, upper, .. } => {
                lower.at(x) - slack <= y && y <= upper.at(x) + slack
            }
            ControlSetDescription::Line { slope } => {
                (y - slope * (x - 1.0)).abs() <= (LINE_TOL + slack) * (1.0 + y.abs())
            }
            ControlSetDescription::WholeGroup => true,
            ControlSetDescription::Cone { apex, lower, upper } => {
                let rel = y - apex[1];
                let lower_ok = lower.map_or(true, |e| {
                    let gap = rel - e.slope * x + slack;
                    if e.closed { gap >= 0.0 } else { gap > 0.0 }
                });
                let upper_ok = upper.map_or(true, |e| {
                    let gap = e.slope * x - rel + slack;
                    if e.closed { gap >= 0.0 } else { gap > 0.0 }
                });
                lower_ok && upper_ok
            }
        }
    }

    /// Strict interior (relative interior for lines and segments).
    pub fn contains_interior(&self, p: &GroupPoint) -> bool {
        let (x, y) = (p.x(), p.y());
        match *self {
            ControlSetDescription::VerticalLines { interval } => interval.contains(x),
            ControlSetDescription::VerticalSegments { lower, upper, .. } => lower.at(x) < y && y < upper.at(x),
            ControlSetDescription::Line { .. } => self.contains(p),
            ControlSetDescription::WholeGroup => true,
            ControlSetDescription::Cone { apex, lower, upper } => {
                let rel = y - apex[1];
                lower.map_or(true, |e| rel > e.slope * x) && upper.map_or(true, |e| rel < e.slope * x)
            }
        }
    }

    /// Vertical distance from `p` to the nearest boundary curve, `None` when the
    /// description has no boundary at abscissa `p.x`.
    pub fn boundary_residual(&self, p: &GroupPoint) -> Option<f64> {
        let (x, y) = (p.x(), p.y());
        match *self {
            ControlSetDescription::VerticalLines { interval } => {
                let mut r = (x - interval.lo).abs();
                if let Some(h) = interval.hi {
                    r = r.min((x - h).abs());
                }
                Some(r)
            }
            ControlSetDescription::VerticalSegments { lower, upper, .. } => {
                Some((y - lower.at(x)).abs().min((y - upper.at(x)).abs()))
            }
            ControlSetDescription::Line { slope } => Some((y - slope * (x - 1.0)).abs()),
            ControlSetDescription::WholeGroup => None,
            ControlSetDescription::Cone { apex, lower, upper } => lower
                .iter()
                .chain(upper.iter())
                .map(|e| (y - apex[1] - e.slope * x).abs())
                .reduce(f64::min),
        }
    }

    /// Points on the boundary curves at the given abscissas.
    pub fn boundary_points(&self, xs: &[f64]) -> Vec<GroupPoint> {
        let mut out = Vec::new();
        for &x in xs {
            match *self {
                ControlSetDescription::VerticalLines { interval } => {
                    out.push(GroupPoint::raw(interval.lo.max(f64::MIN_POSITIVE), x));
                    if let Some(h) = interval.hi {
                        out.push(GroupPoint::raw(h, x));
                    }
                }
                ControlSetDescription::VerticalSegments { lower, upper, .. } => {
                    out.push(GroupPoint::raw(x, lower.at(x)));
                    out.push(GroupPoint::raw(x, upper.at(x)));
                }
                ControlSetDescription::Line { slope } => out.push(GroupPoint::raw(x, slope * (x - 1.0))),
                ControlSetDescription::WholeGroup => {}
                ControlSetDescription::Cone { apex, lower, upper } => {
                    for e in lower.iter().chain(upper.iter()) {
                        out.push(GroupPoint::raw(x, apex[1] + e.slope * x));
                    }
                }
            }
        }
        out
    }
}

fn ordered<T>(d: f64, lo: T, hi: T) -> (T, T) {
    if d > 0.0 {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

/// Which time direction the control sets are invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariance {
    PositivelyInvariant,
    NegativelyInvariant,
    Invariant,
    NoneClaimed,
}

/// Result of classifying a system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub case: u8,
    /// Geometry in original coordinates.
    pub description: ControlSetDescription,
    pub invariance: Invariance,
    pub larc: bool,
    pub normal_form: NormalForm,
    /// Geometry in normal coordinates.
    pub normal_description: ControlSetDescription,
    /// Parts of `G` the classification makes no claim about.
    pub unclassified: Vec<Interval>,
    pub warnings: Vec<String>,
}

/// The closed cone `cl ⋃_{u∈B} r_u` of the cone normal form, apex at the origin.
pub fn cone_region(nf: &NormalSystem, omega: &ControlRange) -> Result<ControlSetDescription> {
    let (alpha, b) = cone_coefficients(nf)?;
    let s = b / alpha;
    let slope = |u: f64| u / (u * alpha - b);
    let edge = |u: f64| Some(ConeEdge { slope: slope(u), closed: true });
    let (lower, upper) = if !(omega.lo() <= s && s <= omega.hi()) {
        (edge(omega.lo()), edge(omega.hi()))
    } else if alpha > 0.0 {
        (None, edge(omega.hi()))
    } else {
        (edge(omega.lo()), None)
    };
    Ok(ControlSetDescription::Cone { apex: [0.0, 0.0], lower, upper })
}

/// Maximal open interval around `x = 1` on which the drift `a(x − 1) + uxβ`
/// takes both signs over `Ω`.
fn vertical_lines_interval(a: f64, beta: f64, omega: &ControlRange) -> Interval {
    // Each endpoint rate (a + uβ)x − a is linear in x with root a/(a + uβ);
    // the rates have opposite signs at x = 1, and between the nearest roots.
    let mut lo: f64 = 0.0;
    let mut hi: Option<f64> = None;
    for u in [omega.lo(), omega.hi()] {
        let k = a + u * beta;
        if k == 0.0 {
            continue;
        }
        let r = a / k;
        if r > 0.0 && r < 1.0 {
            lo = lo.max(r);
        } else if r > 1.0 {
            hi = Some(hi.map_or(r, |h: f64| h.min(r)));
        }
    }
    Interval { lo, hi }
}

fn segment_normal_edges(b_beta: f64, x_scale: &ControlRange) -> (AffineEdge, AffineEdge) {
    // y1(x) = min{−uxβ}, y2(x) = max{−uxβ} over Ω; both linear in x.
    let k1 = -x_scale.lo() * b_beta;
    let k2 = -x_scale.hi() * b_beta;
    (
        AffineEdge { slope: k1.min(k2), intercept: 0.0 },
        AffineEdge { slope: k1.max(k2), intercept: 0.0 },
    )
}

fn degeneracy_warnings(params: &SystemParams) -> Vec<String> {
    let mut w = Vec::new();
    for (name, v) in [("α", params.alpha()), ("aα + bβ", params.gamma()), ("b", params.b())] {
        if v != 0.0 && v.abs() < NEAR_DEGENERATE {
            w.push(format!(
                "near-degenerate: |{name}| = {:e} is nonzero but below {NEAR_DEGENERATE:e}; the case split is exact",
                v.abs()
            ));
        }
    }
    w
}

pub fn classify(params: &SystemParams) -> Classification {
    let nf = conjugate_to_normal_form(params);
    let invariance_by_direction = if nf.reversed {
        Invariance::NegativelyInvariant
    } else {
        Invariance::PositivelyInvariant
    };
    let mut unclassified = Vec::new();

    let (normal_description, invariance) = match nf.system {
        NormalSystem::VerticalDrift { a, beta } => {
            let interval = vertical_lines_interval(a, beta, &nf.omega);
            if interval.lo > 0.0 {
                unclassified.push(Interval { lo: 0.0, hi: Some(interval.lo) });
            }
            if let Some(h) = interval.hi {
                unclassified.push(Interval { lo: h, hi: None });
            }
            (ControlSetDescription::VerticalLines { interval }, Invariance::Invariant)
        }
        NormalSystem::Segment { beta, .. } => {
            let (lower, upper) = segment_normal_edges(beta, &nf.omega);
            (ControlSetDescription::VerticalSegments { base_slope: 0.0, lower, upper }, invariance_by_direction)
        }
        NormalSystem::Saddle { .. } => (ControlSetDescription::Line { slope: 0.0 }, Invariance::Invariant),
        NormalSystem::Shear { .. } => (ControlSetDescription::WholeGroup, Invariance::Invariant),
        NormalSystem::Cone { .. } => {
            (cone_region(&nf.system, &nf.omega).expect("cone normal form has b < 0"), invariance_by_direction)
        }
    };

    Classification {
        case: nf.case(),
        description: normal_description.image_under(&nf.psi.inverse()),
        invariance,
        larc: larc(params),
        normal_form: nf,
        normal_description,
        unclassified,
        warnings: degeneracy_warnings(params),
    }
}

pub fn membership(desc: &ControlSetDescription, p: &GroupPoint) -> bool {
    desc.contains(p)
}

/// `g_u(t) = φ₂/φ₁` along the constant-`u` flow from a point of slope `m1`.
pub fn ray_ratio(nf: &NormalSystem, m1: f64, u: f64, t: f64) -> Result<f64> {
    let (alpha, b) = cone_coefficients(nf)?;
    let mu = ray_slope(u, alpha, b)?.m;
    Ok(mu + (-t * (u * alpha - b)).exp() * (m1 - mu))
}

/// Time `t₀ > 0` after which the constant control `u ∈ B` carries the ray
/// `r_{u1}` onto `r_{u2}`. `None` unless `m_{u2}` lies strictly between
/// `m_{u1}` and `m_u`.
pub fn transition_time(nf: &NormalSystem, u1: f64, u2: f64, u: f64) -> Result<Option<f64>> {
    let (alpha, b) = cone_coefficients(nf)?;
    if !(u * alpha - b > 0.0) {
        return Ok(None);
    }
    let m1 = ray_slope(u1, alpha, b)?.m;
    let m2 = ray_slope(u2, alpha, b)?.m;
    let mu = ray_slope(u, alpha, b)?.m;
    Ok(slope_transition_time(m1, m2, mu, u * alpha - b))
}

pub(crate) fn slope_transition_time(m1: f64, m2: f64, mu: f64, rate: f64) -> Option<f64> {
    let between = (m1 < m2 && m2 < mu) || (mu < m2 && m2 < m1);
    between.then(|| ((m1 - mu) / (m2 - mu)).ln() / rate)
}
