//! Steer between points when the control set is the whole group.

use solvlin::{classify, steer, GroupPoint, SystemParams};

fn main() -> solvlin::Result<()> {
    let sys = SystemParams::with_range(1.0, 0.0, 1.0, 1.0, -1.0, 1.0)?;
    assert_eq!(classify(&sys).case, 4);

    let p = GroupPoint::new(0.5, -1.0)?;
    for q in [(2.0, 3.0), (0.2, 5.0), (7.0, -4.0)] {
        let q = GroupPoint::new(q.0, q.1)?;
        let r = steer(&sys, &p, &q, 1e-6, 2000, 1)?;
        let ctrl = r.control.as_ref().map_or(0, |c| c.segments().len());
        println!(
            "{:?} -> {:?}: found={} error={:.1e} segments={ctrl} via {:?}",
            (p.x(), p.y()),
            (q.x(), q.y()),
            r.found,
            r.terminal_error,
            r.method
        );
    }
    Ok(())
}
