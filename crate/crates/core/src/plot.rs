//! SVG figures of control sets, clipped to a viewport, with optional
//! trajectories. Output is byte-deterministic.

use std::fmt::Write;

use crate::classify::{Classification, ControlSetDescription};
use crate::flows::Trajectory;
use crate::reach::Viewport;

/// Abscissas at which vertical segments are drawn.
pub const SEGMENT_STATIONS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

#[derive(Clone, Debug)]
pub struct PlotOptions {
    pub viewport: Viewport,
    pub width: u32,
    pub height: u32,
    pub trajectories: Vec<Trajectory>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions { viewport: Viewport::default(), width: 640, height: 480, trajectories: Vec::new() }
    }
}

/// Canvas mapping with the y axis pointing up.
struct Canvas {
    vp: Viewport,
    w: f64,
    h: f64,
}

impl Canvas {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        // keep far-away points finite so the markup stays valid
        let sx = ((x - self.vp.x0) / (self.vp.x1 - self.vp.x0) * self.w).clamp(-1e6, 1e6);
        let sy = (self.h - (y - self.vp.y0) / (self.vp.y1 - self.vp.y0) * self.h).clamp(-1e6, 1e6);
        (sx, sy)
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|&(x, y)| {
                let (sx, sy) = self.px(x, y);
                format!("{sx:.3},{sy:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn line(&self, out: &mut String, class: &str, a: (f64, f64), b: (f64, f64)) {
        let (x1, y1) = self.px(a.0, a.1);
        let (x2, y2) = self.px(b.0, b.1);
        let _ = writeln!(out, r#"<line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }
}

/// Keeps the part of `poly` where `kx·x + ky·y ≤ k0`.
fn clip_half_plane(poly: &[(f64, f64)], kx: f64, ky: f64, k0: f64) -> Vec<(f64, f64)> {
    let side = |p: (f64, f64)| kx * p.0 + ky * p.1 - k0;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

/// The part of the line `y = slope·x + intercept` inside the viewport.
fn clip_line(vp: &Viewport, slope: f64, intercept: f64) -> Option<((f64, f64), (f64, f64))> {
    let (mut lo, mut hi) = (vp.x0, vp.x1);
    if slope == 0.0 {
        if intercept < vp.y0 || intercept > vp.y1 {
            return None;
        }
    } else {
        let xa = (vp.y0 - intercept) / slope;
        let xb = (vp.y1 - intercept) / slope;
        lo = lo.max(xa.min(xb));
        hi = hi.min(xa.max(xb));
    }
    (lo <= hi).then(|| ((lo, slope * lo + intercept), (hi, slope * hi + intercept)))
}

fn region(desc: &ControlSetDescription, vp: &Viewport) -> Vec<(f64, f64)> {
    let rect = vec![(vp.x0, vp.y0), (vp.x1, vp.y0), (vp.x1, vp.y1), (vp.x0, vp.y1)];
    match *desc {
        ControlSetDescription::WholeGroup => rect,
        ControlSetDescription::Line { .. } => Vec::new(),
        ControlSetDescription::VerticalLines { interval } => {
            let mut poly = clip_half_plane(&rect, -1.0, 0.0, -interval.lo);
            if let Some(h) = interval.hi {
                poly = clip_half_plane(&poly, 1.0, 0.0, h);
            }
            poly
        }
        ControlSetDescription::VerticalSegments { lower, upper, .. } => {
            let poly = clip_half_plane(&rect, lower.slope, -1.0, -lower.intercept);
            clip_half_plane(&poly, -upper.slope, 1.0, upper.intercept)
        }
        ControlSetDescription::Cone { apex, lower, upper } => {
            let mut poly = rect;
            if let Some(e) = lower {
                poly = clip_half_plane(&poly, e.slope, -1.0, -apex[1]);
            }
            if let Some(e) = upper {
                poly = clip_half_plane(&poly, -e.slope, 1.0, apex[1]);
            }
            poly
        }
    }
}

fn boundaries(desc: &ControlSetDescription, vp: &Viewport) -> Vec<((f64, f64), (f64, f64))> {
    let mut out = Vec::new();
    match *desc {
        ControlSetDescription::WholeGroup => {}
        ControlSetDescription::Line { slope } => out.extend(clip_line(vp, slope, -slope)),
        ControlSetDescription::VerticalLines { interval } => {
            for x in std::iter::once(interval.lo).chain(interval.hi) {
                if vp.x0 <= x && x <= vp.x1 {
                    out.push(((x, vp.y0), (x, vp.y1)));
                }
            }
        }
        ControlSetDescription::VerticalSegments { lower, upper, .. } => {
            out.extend(clip_line(vp, lower.slope, lower.intercept));
            out.extend(clip_line(vp, upper.slope, upper.intercept));
        }
        ControlSetDescription::Cone { apex, lower, upper } => {
            for e in lower.iter().chain(upper.iter()) {
                out.extend(clip_line(vp, e.slope, apex[1]));
            }
        }
    }
    out
}

/// Renders the control sets of a classified system as an SVG document.
pub fn render_svg(classification: &Classification, opts: &PlotOptions) -> String {
    let vp = opts.viewport;
    let canvas = Canvas { vp, w: f64::from(opts.width), h: f64::from(opts.height) };
    let desc = &classification.description;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(s, "<title>case {}</title>", classification.case);
    s.push_str(concat!(
        "<defs>\n",
        r#"<clipPath id="view"><rect x="0" y="0" width="100%" height="100%"/></clipPath>"#,
        "\n",
        r#"<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="black"/></marker>"#,
        "\n</defs>\n",
        "<style>.region{fill:#9ecae1;fill-opacity:0.6;stroke:none}.boundary{stroke:#08519c;stroke-width:2}",
        ".segment{stroke:#08519c;stroke-width:3}.base{stroke:#e6550d;stroke-dasharray:6 4}",
        ".axis{stroke:#999;stroke-width:1}.trajectory{fill:none;stroke:#333;stroke-width:1.2}</style>\n",
    ));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white" stroke="black"/>"#, opts.width, opts.height);
    s.push_str("<g clip-path=\"url(#view)\">\n");

    if vp.y0 <= 0.0 && 0.0 <= vp.y1 {
        canvas.line(&mut s, "axis", (vp.x0, 0.0), (vp.x1, 0.0));
    }
    let poly = region(desc, &vp);
    if poly.len() >= 3 {
        let _ = writeln!(s, r#"<polygon class="region" points="{}"/>"#, canvas.points(&poly));
    }
    for (a, b) in boundaries(desc, &vp) {
        canvas.line(&mut s, "boundary", a, b);
    }
    if let ControlSetDescription::VerticalSegments { base_slope, lower, upper } = *desc {
        if let Some((a, b)) = clip_line(&vp, base_slope, -base_slope) {
            canvas.line(&mut s, "base", a, b);
        }
        for x in SEGMENT_STATIONS.iter().copied().filter(|&x| vp.x0 <= x && x <= vp.x1) {
            canvas.line(&mut s, "segment", (x, lower.at(x)), (x, upper.at(x)));
        }
    }
    for tr in &opts.trajectories {
        let pts: Vec<(f64, f64)> = tr.samples.iter().map(|p| (p.p.x(), p.p.y())).collect();
        let _ = writeln!(s, r#"<polyline class="trajectory" points="{}" marker-end="url(#arrow)"/>"#, canvas.points(&pts));
    }
    s.push_str("</g>\n");

    // distinguished points, drawn unclipped
    let (ix, iy) = canvas.px(1.0, 0.0);
    let _ = writeln!(s, r#"<circle class="identity" cx="{ix:.3}" cy="{iy:.3}" r="4" fill="black"/>"#);
    if let ControlSetDescription::Cone { apex, .. } = *desc {
        // the apex lies on x = 0, left of every viewport; show it on the frame
        let (ax, ay) = canvas.px(vp.x0, apex[1].clamp(vp.y0, vp.y1));
        let _ = writeln!(s, r##"<circle class="apex" cx="{ax:.3}" cy="{ay:.3}" r="5" fill="none" stroke="#e6550d" stroke-width="2"/>"##);
    }
    s.push_str("</svg>\n");
    s
}
