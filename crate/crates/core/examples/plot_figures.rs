//! Write an SVG of each case with sampled trajectories overlaid.

use solvlin::plot::{render_svg, PlotOptions};
use solvlin::{classify, reach_sample, GroupPoint, SystemParams, Viewport};

fn main() -> solvlin::Result<()> {
    let dir = std::env::temp_dir().join("solvlin-figures");
    std::fs::create_dir_all(&dir).map_err(|e| solvlin::Error::Parse(e.to_string()))?;
    let viewport = Viewport::new(0.1, 4.0, -3.0, 3.0)?;
    let p = GroupPoint::new(1.0, 0.0)?;

    for (name, (a, b, alpha, beta)) in [
        ("lines", (1.0, 0.0, 0.0, 1.0)),
        ("segments", (0.0, -1.0, 0.0, 1.0)),
        ("saddle", (-1.0, 1.0, 1.0, 1.0)),
        ("shear", (1.0, 0.0, 1.0, 1.0)),
        ("cone", (1.0, -1.0, 1.0, 0.0)),
    ] {
        let sys = SystemParams::with_range(a, b, alpha, beta, -1.0, 1.0)?;
        let orbit = reach_sample(&sys, &p, 3.0, 8, 11)?;
        let opts = PlotOptions { viewport, width: 480, height: 480, trajectories: orbit.trajectories };
        let path = dir.join(format!("{name}.svg"));
        std::fs::write(&path, render_svg(&classify(&sys), &opts)).map_err(|e| solvlin::Error::Parse(e.to_string()))?;
        println!("{}", path.display());
    }
    Ok(())
}
