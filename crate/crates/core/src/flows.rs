//! Closed-form flows of the normal forms, concatenation over piecewise-constant
//! controls, and an independent RK4 integrator used as an oracle.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupPoint;
use crate::normal_form::{conjugate_to_normal_form, NormalForm, NormalSystem};
use crate::system::{ControlRange, SystemParams};

/// Relative width of the band around a singular exponent (`uα = b`, or `uα = 0`
/// in the shear form) inside which the limiting formula is used.
pub const SINGULAR_BRANCH_TOL: f64 = 1e-10;

/// Interior samples per control segment unless configured otherwise.
pub const DEFAULT_DIVISIONS: usize = 16;

/// `(e^z − 1)/z`, continuous at `z = 0`.
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

impl NormalSystem {
    /// Closed-form image of `p` under the constant control `u` after time `t`
    /// (any sign of `t`).
    pub fn flow(&self, p: &GroupPoint, u: f64, t: f64) -> GroupPoint {
        let (x, y) = (p.x(), p.y());
        match *self {
            NormalSystem::VerticalDrift { a, beta } => GroupPoint::raw(x, (a * (x - 1.0) + u * x * beta) * t + y),
            NormalSystem::Segment { b, beta } => GroupPoint::raw(x, y + (b * t).exp_m1() * (y + u * x * beta)),
            NormalSystem::Saddle { alpha, b } => GroupPoint::raw((u * alpha * t).exp() * x, (b * t).exp() * y),
            NormalSystem::Shear { alpha } => {
                let rate = u * alpha;
                if rate.abs() <= SINGULAR_BRANCH_TOL {
                    GroupPoint::raw(x, (x - 1.0) * t + y)
                } else {
                    GroupPoint::raw((rate * t).exp() * x, x * t * phi1(rate * t) - t + y)
                }
            }
            NormalSystem::Cone { alpha, b } => {
                let delta = u * alpha - b;
                let ebt = (b * t).exp();
                if delta.abs() <= SINGULAR_BRANCH_TOL * b.abs().max(1.0) {
                    GroupPoint::raw(ebt * x, ebt * (y + t * b / alpha * x))
                } else {
                    // m_u (e^{uαt} − e^{bt}) x + e^{bt} y, rewritten without cancellation.
                    GroupPoint::raw((u * alpha * t).exp() * x, ebt * (y + u * x * t * phi1(delta * t)))
                }
            }
        }
    }
}

/// One constant piece of a control: level `u` held for `dt > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub dt: f64,
    pub u: f64,
}

/// A piecewise-constant control, as an ordered list of segments.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseControl {
    segments: Vec<ControlSegment>,
}

impl PiecewiseControl {
    pub fn new(segments: Vec<ControlSegment>) -> Result<Self> {
        for (index, s) in segments.iter().enumerate() {
            if !(s.dt > 0.0) || !s.dt.is_finite() {
                return Err(Error::InvalidDwell { index, dt: s.dt });
            }
            if !s.u.is_finite() {
                return Err(Error::Parse(format!("control segment {index}: level is not finite")));
            }
        }
        Ok(PiecewiseControl { segments })
    }

    pub fn empty() -> Self {
        PiecewiseControl::default()
    }

    /// Builds from `(dt, u)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        PiecewiseControl::new(pairs.iter().map(|&(dt, u)| ControlSegment { dt, u }).collect())
    }

    pub fn segments(&self) -> &[ControlSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    pub fn check_range(&self, omega: &ControlRange) -> Result<()> {
        for (index, s) in self.segments.iter().enumerate() {
            if !omega.contains(s.u) {
                return Err(Error::SegmentOutOfRange { index, u: s.u, lo: omega.lo(), hi: omega.hi() });
            }
        }
        Ok(())
    }

    /// Appends a segment, dropping it when `dt` is zero.
    pub(crate) fn push(&mut self, dt: f64, u: f64) {
        debug_assert!(dt >= 0.0 && dt.is_finite());
        if dt > 0.0 {
            self.segments.push(ControlSegment { dt, u });
        }
    }

    /// The control that retraces this one backwards in time with `u ↦ −u`.
    pub(crate) fn reversed_negated(&self) -> PiecewiseControl {
        PiecewiseControl {
            segments: self.segments.iter().rev().map(|s| ControlSegment { dt: s.dt, u: -s.u }).collect(),
        }
    }

    /// Reads `dt,u` rows. A header line is allowed; `#` starts a comment.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_control_csv(reader)?;
        Ok(PiecewiseControl { segments: rows.into_iter().map(|(_, s)| s).collect() })
    }
}

/// Control segments with the 1-based file row each came from. Dwell times are
/// checked here so errors can name the row.
pub fn read_control_csv<R: Read>(reader: R) -> Result<Vec<(usize, ControlSegment)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("control file: {e}")))?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::Parse(format!("control file row {row}: expected `dt,u`")));
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let v = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("control file row {row}: {e}"))),
        };
        let (dt, u) = (v[0], v[1]);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parse(format!("control file row {row}: dwell time {dt} must be positive and finite")));
        }
        if !u.is_finite() {
            return Err(Error::Parse(format!("control file row {row}: level {u} is not finite")));
        }
        out.push((row, ControlSegment { dt, u }));
    }
    Ok(out)
}

/// A sample of a trajectory. `u` is the level in force on the interval ending
/// at `t` (for `t = 0`, the first level).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub p: GroupPoint,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub control: PiecewiseControl,
}

impl Trajectory {
    pub fn end(&self) -> GroupPoint {
        self.samples.last().expect("trajectory has at least one sample").p
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_csv_inner(writer, None)
    }

    /// CSV with additional `x_rk4,y_rk4` columns. `audit` must have been
    /// sampled at the same times.
    pub fn write_csv_with_audit<W: Write>(&self, writer: W, audit: &Trajectory) -> Result<()> {
        if audit.samples.len() != self.samples.len() {
            return Err(Error::Parse("audit trajectory sampled at different times".into()));
        }
        self.write_csv_inner(writer, Some(audit))
    }

    fn write_csv_inner<W: Write>(&self, writer: W, audit: Option<&Trajectory>) -> Result<()> {
        let io = |e: csv::Error| Error::Parse(format!("writing CSV: {e}"));
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        if audit.is_some() {
            w.write_record(["t", "x", "y", "u", "x_rk4", "y_rk4"]).map_err(io)?;
        } else {
            w.write_record(["t", "x", "y", "u"]).map_err(io)?;
        }
        for (i, s) in self.samples.iter().enumerate() {
            let mut row = vec![fmt_f64(s.t), fmt_f64(s.p.x()), fmt_f64(s.p.y()), fmt_f64(s.u)];
            if let Some(a) = audit {
                row.push(fmt_f64(a.samples[i].p.x()));
                row.push(fmt_f64(a.samples[i].p.y()));
            }
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(format!("writing CSV: {e}")))?;
        Ok(())
    }
}

/// One parsed row of a trajectory CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub audit: Option<(f64, f64)>,
}

pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let with_audit = headers.len() == 6;
    if !(headers.iter().take(4).eq(["t", "x", "y", "u"]) && (headers.len() == 4 || with_audit)) {
        return Err(Error::Parse(format!("unexpected trajectory header {headers:?}")));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let v: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{f}: {e}"))))
            .collect::<Result<_>>()?;
        rows.push(CsvRow { t: v[0], x: v[1], y: v[2], u: v[3], audit: with_audit.then(|| (v[4], v[5])) });
    }
    Ok(rows)
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// How densely trajectories are sampled. Samples never feed back into the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    /// Each segment is split into this many equal sub-intervals.
    pub divisions: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { divisions: DEFAULT_DIVISIONS }
    }
}

impl Sampling {
    /// Only segment boundaries.
    pub const BOUNDARIES: Sampling = Sampling { divisions: 1 };

    pub(crate) fn offsets(&self, dt: f64) -> impl Iterator<Item = f64> {
        let n = self.divisions.max(1);
        (1..=n).map(move |k| if k == n { dt } else { dt * k as f64 / n as f64 })
    }
}

/// Closed-form flow of a system, evaluated through its normal form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormFlow {
    params: SystemParams,
    nf: NormalForm,
}

impl ClosedFormFlow {
    pub fn new(params: &SystemParams) -> Self {
        ClosedFormFlow { params: *params, nf: conjugate_to_normal_form(params) }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn normal_form(&self) -> &NormalForm {
        &self.nf
    }

    /// `ψ⁻¹ ∘ φ_normal ∘ ψ`, with `(t, u) ↦ (−t, −u)` when the normal form is reversed.
    pub fn flow(&self, p: &GroupPoint, u: f64, t: f64) -> Result<GroupPoint> {
        self.params.omega().check(u)?;
        Ok(self.flow_unchecked(p, u, t))
    }

    pub(crate) fn flow_unchecked(&self, p: &GroupPoint, u: f64, t: f64) -> GroupPoint {
        if t == 0.0 {
            return *p;
        }
        let (tn, un) = self.nf.normal_time_control(t, u);
        self.nf.from_normal(&self.nf.system.flow(&self.nf.to_normal(p), un, tn))
    }

    /// Endpoint only, without recording samples.
    pub fn endpoint(&self, p: &GroupPoint, control: &PiecewiseControl) -> Result<GroupPoint> {
        control.check_range(&self.params.omega())?;
        Ok(self.endpoint_unchecked(p, control))
    }

    pub(crate) fn endpoint_unchecked(&self, p: &GroupPoint, control: &PiecewiseControl) -> GroupPoint {
        let mut q = self.nf.to_normal(p);
        for s in control.segments() {
            let (tn, un) = self.nf.normal_time_control(s.dt, s.u);
            q = self.nf.system.flow(&q, un, tn);
        }
        self.nf.from_normal(&q)
    }

    pub fn run(&self, p: &GroupPoint, control: &PiecewiseControl, sampling: Sampling) -> Result<Trajectory> {
        control.check_range(&self.params.omega())?;
        let first_u = control.segments().first().map_or(0.0, |s| s.u);
        let mut samples = vec![Sample { t: 0.0, p: *p, u: first_u }];
        let mut t0 = 0.0;
        let mut q0 = self.nf.to_normal(p);
        for s in control.segments() {
            let (sign, un) = self.nf.normal_time_control(1.0, s.u);
            for off in sampling.offsets(s.dt) {
                let q = self.nf.system.flow(&q0, un, sign * off);
                samples.push(Sample { t: t0 + off, p: self.nf.from_normal(&q), u: s.u });
            }
            // Restart each segment from the exact boundary state.
            q0 = self.nf.system.flow(&q0, un, sign * s.dt);
            t0 += s.dt;
        }
        Ok(Trajectory { samples, control: control.clone() })
    }
}

pub fn flow_constant(params: &SystemParams, p: &GroupPoint, u: f64, t: f64) -> Result<GroupPoint> {
    ClosedFormFlow::new(params).flow(p, u, t)
}

pub fn flow_piecewise(params: &SystemParams, p: &GroupPoint, control: &PiecewiseControl) -> Result<Trajectory> {
    ClosedFormFlow::new(params).run(p, control, Sampling::default())
}

pub fn flow_piecewise_with(
    params: &SystemParams,
    p: &GroupPoint,
    control: &PiecewiseControl,
    sampling: Sampling,
) -> Result<Trajectory> {
    ClosedFormFlow::new(params).run(p, control, sampling)
}

/// Classical RK4 on the original right-hand side. Steps never straddle a
/// control switch or a sample time.
pub fn rk4_flow(params: &SystemParams, p: &GroupPoint, control: &PiecewiseControl, h: f64) -> Result<Trajectory> {
    rk4_flow_with(params, p, control, h, Sampling::default())
}

pub fn rk4_flow_with(
    params: &SystemParams,
    p: &GroupPoint,
    control: &PiecewiseControl,
    h: f64,
    sampling: Sampling,
) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    control.check_range(&params.omega())?;
    let first_u = control.segments().first().map_or(0.0, |s| s.u);
    let mut samples = vec![Sample { t: 0.0, p: *p, u: first_u }];
    let (mut x, mut y) = (p.x(), p.y());
    let mut t0 = 0.0;
    for s in control.segments() {
        let mut prev = 0.0;
        for off in sampling.offsets(s.dt) {
            let span = off - prev;
            let n = (span / h).ceil().max(1.0) as usize;
            let step = span / n as f64;
            for _ in 0..n {
                (x, y) = rk4_step(params, s.u, x, y, step);
            }
            if !(x > 0.0 && x.is_normal() && y.is_finite()) {
                return Err(Error::LeftHalfPlane { t: t0 + off, x });
            }
            samples.push(Sample { t: t0 + off, p: GroupPoint::raw(x, y), u: s.u });
            prev = off;
        }
        t0 += s.dt;
    }
    Ok(Trajectory { samples, control: control.clone() })
}

fn rk4_step(params: &SystemParams, u: f64, x: f64, y: f64, h: f64) -> (f64, f64) {
    let f = |x: f64, y: f64| {
        (
            u * params.alpha() * x,
            params.a() * (x - 1.0) + params.b() * y + u * x * params.beta(),
        )
    };
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1);
    let k3 = f(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1);
    let k4 = f(x + h * k3.0, y + h * k3.1);
    (
        x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Residual of `φ(t, (x, y + y2), u) = φ(t, (x, y), u) + (0, e^{bt} y2)` for the
/// cone normal form. The uniqueness of the cone control set rests on it.
pub fn ray_translation_identity_check(nf: &NormalSystem, p: &GroupPoint, y2: f64, u: f64, t: f64) -> Result<f64> {
    let NormalSystem::Cone { b, .. } = *nf else {
        return Err(Error::NotConeForm);
    };
    let shifted = nf.flow(&GroupPoint::raw(p.x(), p.y() + y2), u, t);
    let base = nf.flow(p, u, t);
    let expected_y = base.y() + (b * t).exp() * y2;
    Ok((shifted.x() - base.x()).hypot(shifted.y() - expected_y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::time_reverse;

    fn pt(x: f64, y: f64) -> GroupPoint {
        GroupPoint::new(x, y).unwrap()
    }

    const CONE: NormalSystem = NormalSystem::Cone { alpha: 1.0, b: -1.0 };

    #[test]
    fn shear_zero_control_example() {
        let q = NormalSystem::Shear { alpha: 1.0 }.flow(&pt(2.0, 0.0), 0.0, 3.0);
        assert_eq!((q.x(), q.y()), (2.0, 3.0));
    }

    #[test]
    fn cone_example() {
        let q = CONE.flow(&pt(1.0, 0.0), 1.0, 2f64.ln());
        assert!((q.x() - 2.0).abs() < 1e-14);
        assert!((q.y() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn identity_at_zero_time() {
        let p = pt(1.3, -0.4);
        for nf in [
            NormalSystem::VerticalDrift { a: 1.0, beta: 2.0 },
            NormalSystem::Segment { b: -1.0, beta: 2.0 },
            NormalSystem::Saddle { alpha: 1.0, b: -2.0 },
            NormalSystem::Shear { alpha: -1.0 },
            CONE,
        ] {
            for u in [-1.0, 0.0, 0.5, -1.0 / 1.0] {
                assert_eq!(nf.flow(&p, u, 0.0), p);
            }
        }
        // the singular cone branch too
        assert_eq!(CONE.flow(&p, -1.0, 0.0), p);
    }

    #[test]
    fn singular_branch_formula() {
        // u α = b: (e^{bt} x, e^{bt}(y + t b α⁻¹ x))
        let q = CONE.flow(&pt(2.0, 1.0), -1.0, 0.5);
        let e = (-0.5f64).exp();
        assert!((q.x() - e * 2.0).abs() < 1e-15);
        assert!((q.y() - e * (1.0 - 0.5 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn singular_branch_is_continuous() {
        let p = pt(1.5, -0.5);
        for (alpha, b) in [(1.0, -1.0), (-2.0, -0.5), (0.5, -3.0)] {
            let nf = NormalSystem::Cone { alpha, b };
            let u0 = b / alpha;
            let sing = nf.flow(&p, u0, 2.0);
            for off in [1e-9, -1e-9, 2e-10, -2e-10, 1e-11] {
                let q = nf.flow(&p, (b + off) / alpha, 2.0);
                assert!(q.distance(&sing) <= 1e-6, "off={off}: {q:?} vs {sing:?}");
            }
        }
        let shear = NormalSystem::Shear { alpha: 1.0 };
        let sing = shear.flow(&p, 0.0, 2.0);
        for off in [1e-9, -1e-9, 1e-11] {
            assert!(shear.flow(&p, off, 2.0).distance(&sing) <= 1e-6);
        }
    }

    #[test]
    fn ray_translation_examples() {
        let p = pt(1.0, 0.0);
        assert_eq!(ray_translation_identity_check(&CONE, &p, 0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(ray_translation_identity_check(&CONE, &p, 2.0, 1.0, 1.0).unwrap() <= 1e-12);
        assert!(ray_translation_identity_check(&CONE, &pt(0.7, 3.0), -1.5, -1.0, 2.0).unwrap() <= 1e-12);
        assert_eq!(
            ray_translation_identity_check(&NormalSystem::Shear { alpha: 1.0 }, &p, 1.0, 0.0, 1.0),
            Err(Error::NotConeForm)
        );
    }

    #[test]
    fn piecewise_examples() {
        let s = SystemParams::with_range(0.0, -1.0, 1.0, 1.0, -1.0, 1.0).unwrap();
        let p = pt(1.2, 0.3);
        let tr = flow_piecewise(&s, &p, &PiecewiseControl::empty()).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.samples[0].t, 0.0);
        assert_eq!(tr.end(), p);

        let ctrl = PiecewiseControl::from_pairs(&[(1.0, 0.4), (1.0, -0.8)]).unwrap();
        let tr = flow_piecewise(&s, &p, &ctrl).unwrap();
        let twice = flow_constant(&s, &flow_constant(&s, &p, 0.4, 1.0).unwrap(), -0.8, 1.0).unwrap();
        assert!(tr.end().distance(&twice) < 1e-14);
        assert_eq!(tr.samples.len(), 1 + 2 * DEFAULT_DIVISIONS);
        assert!(tr.times().zip(tr.times().skip(1)).all(|(a, b)| b > a));
    }

    #[test]
    fn saddle_line_is_exactly_invariant() {
        let s = SystemParams::with_range(0.0, -0.7, 1.3, 0.0, -1.0, 2.0).unwrap();
        let ctrl = PiecewiseControl::from_pairs(&[(0.3, 2.0), (1.1, -1.0), (0.2, 0.0), (2.0, 1.7)]).unwrap();
        let tr = flow_piecewise(&s, &pt(0.8, 0.0), &ctrl).unwrap();
        assert!(tr.samples.iter().all(|s| s.p.y() == 0.0));
    }

    #[test]
    fn rejects_bad_controls() {
        let s = SystemParams::with_range(1.0, 0.0, 1.0, 0.0, -1.0, 1.0).unwrap();
        assert!(matches!(PiecewiseControl::from_pairs(&[(0.0, 0.5)]), Err(Error::InvalidDwell { index: 0, .. })));
        let ctrl = PiecewiseControl::from_pairs(&[(1.0, 0.5), (1.0, 1.5)]).unwrap();
        assert!(matches!(
            flow_piecewise(&s, &GroupPoint::IDENTITY, &ctrl),
            Err(Error::SegmentOutOfRange { index: 1, .. })
        ));
        assert!(matches!(flow_constant(&s, &GroupPoint::IDENTITY, 2.0, 1.0), Err(Error::ControlOutOfRange { .. })));
        assert!(matches!(rk4_flow(&s, &GroupPoint::IDENTITY, &PiecewiseControl::empty(), 0.0), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn rk4_detects_left_half_plane() {
        // e^{-2000} underflows past the normal range, so the integrated abscissa is lost.
        let s = SystemParams::with_range(0.0, -1.0, 1.0, 0.0, -1.0, 1.0).unwrap();
        let ctrl = PiecewiseControl::from_pairs(&[(2000.0, -1.0)]).unwrap();
        let r = rk4_flow_with(&s, &GroupPoint::IDENTITY, &ctrl, 0.5, Sampling::BOUNDARIES);
        assert!(matches!(r, Err(Error::LeftHalfPlane { .. })), "{r:?}");
    }

    #[test]
    fn rk4_drift_order_four() {
        // ẋ = 0, ẏ = x − 1 + uxβ with u = 0: y(t) = (x − 1)t + y0 exactly; use a curved case instead.
        let s = SystemParams::with_range(1.0, -0.5, 1.0, 0.3, -1.0, 1.0).unwrap();
        let ctrl = PiecewiseControl::from_pairs(&[(2.0, 0.9), (1.0, -0.6)]).unwrap();
        let p = pt(0.7, 0.4);
        let exact = flow_piecewise(&s, &p, &ctrl).unwrap().end();
        let err = |h| rk4_flow_with(&s, &p, &ctrl, h, Sampling::BOUNDARIES).unwrap().end().distance(&exact);
        let (e1, e2) = (err(0.1), err(0.05));
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_vertical_drift_zero_control() {
        let s = SystemParams::with_range(1.0, 0.0, 0.0, 1.0, -1.0, 1.0).unwrap();
        let p = pt(2.5, -1.0);
        let ctrl = PiecewiseControl::from_pairs(&[(4.0, 0.0)]).unwrap();
        let q = rk4_flow(&s, &p, &ctrl, 1e-2).unwrap().end();
        assert!((q.y() - (1.5 * 4.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn reversed_flow_matches_backward_flow() {
        let s = SystemParams::with_range(0.4, 1.2, -0.8, 0.5, -1.0, 2.0).unwrap();
        let r = time_reverse(&s);
        let p = pt(1.1, -0.6);
        for (u, t) in [(0.5, 0.7), (-1.0, 1.3), (2.0, 0.2)] {
            let lhs = flow_constant(&r, &p, -u, t).unwrap();
            let rhs = flow_constant(&s, &p, u, -t).unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
            let ctrl = PiecewiseControl::from_pairs(&[(t, -u)]).unwrap();
            let rk = rk4_flow(&r, &p, &ctrl, 1e-3).unwrap().end();
            assert!(rk.distance(&rhs) < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = SystemParams::with_range(1.0, 0.0, 1.0, 1.0, -1.0, 1.0).unwrap();
        let ctrl = PiecewiseControl::from_pairs(&[(0.3, 1.0), (0.7, -0.1)]).unwrap();
        let tr = flow_piecewise(&s, &pt(0.9, 0.1), &ctrl).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x,y,u\n"));
        let rows = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), tr.samples.len());
        for (r, s) in rows.iter().zip(&tr.samples) {
            assert_eq!((r.t, r.x, r.y, r.u), (s.t, s.p.x(), s.p.y(), s.u));
        }
    }

    #[test]
    fn control_csv_parsing() {
        let ctrl = PiecewiseControl::from_csv("dt,u\n1.0, 0.5\n# comment\n2,-1\n".as_bytes()).unwrap();
        assert_eq!(ctrl.segments().len(), 2);
        assert_eq!(ctrl.duration(), 3.0);
        let err = PiecewiseControl::from_csv("1.0,0.5\n-2,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let rows = read_control_csv("dt,u\n\n# c\n1,0.5\n0,1\n".as_bytes()).unwrap_err();
        assert!(rows.to_string().contains("row 5"), "{rows}");
    }
}
