//! Closed-form trajectory under a bang-bang control, checked against RK4.

use solvlin::flows::ControlSegment;
use solvlin::{flow_piecewise, rk4_flow, GroupPoint, PiecewiseControl, SystemParams};

fn main() -> solvlin::Result<()> {
    let sys = SystemParams::with_range(1.0, -1.0, 1.0, 0.0, -1.0, 1.0)?;
    let p = GroupPoint::new(1.0, 0.0)?;
    let control = PiecewiseControl::new(
        [(0.5, 1.0), (1.0, -1.0), (0.75, 1.0), (1.25, -0.5)]
            .into_iter()
            .map(|(dt, u)| ControlSegment { dt, u })
            .collect(),
    )?;

    let exact = flow_piecewise(&sys, &p, &control)?;
    let audit = rk4_flow(&sys, &p, &control, 1e-3)?;
    let worst = exact
        .samples
        .iter()
        .zip(&audit.samples)
        .map(|(a, b)| (a.p.x() - b.p.x()).abs().max((a.p.y() - b.p.y()).abs()))
        .fold(0.0, f64::max);

    exact.write_csv_with_audit(std::io::stdout().lock(), &audit)?;
    eprintln!("max |closed form - rk4| = {worst:.2e}");
    Ok(())
}
