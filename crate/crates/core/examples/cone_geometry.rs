//! Cone membership and the barrier certificate for a point outside it.

use solvlin::classify::ControlSetDescription;
use solvlin::reach::barrier_certificate;
use solvlin::{classify, GroupPoint, SystemParams};

fn main() -> solvlin::Result<()> {
    let sys = SystemParams::with_range(0.0, -1.0, 1.0, 1.0, -1.0, 1.0)?;
    let c = classify(&sys);
    if let ControlSetDescription::Cone { apex, lower, upper } = c.description {
        println!("apex {apex:?}");
        println!("lower {lower:?}");
        println!("upper {upper:?}");
    }

    for (x, y) in [(1.0, 0.0), (2.0, 0.5), (1.0, 0.4), (1.0, 1.0), (3.0, -2.0)] {
        let p = GroupPoint::new(x, y)?;
        println!("({x}, {y}) inside: {}", c.description.contains(&p));
    }

    let p = GroupPoint::new(1.0, 0.4)?;
    let q = GroupPoint::new(1.0, 1.0)?;
    println!("barrier from {p:?} to {q:?}: {:?}", barrier_certificate(&sys, &p, &q, 1e-2));
    Ok(())
}
