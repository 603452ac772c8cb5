//! Classify one system from each of the five cases.

use solvlin::{classify, SystemParams};

fn main() -> solvlin::Result<()> {
    let systems = [
        ("vertical drift", SystemParams::with_range(1.0, 0.0, 0.0, 1.0, -1.0, 1.0)?),
        ("segments", SystemParams::with_range(0.0, -1.0, 0.0, 1.0, -1.0, 2.0)?),
        ("saddle", SystemParams::with_range(-1.0, 1.0, 1.0, 1.0, -1.0, 1.0)?),
        ("shear", SystemParams::with_range(1.0, 0.0, 1.0, 1.0, -1.0, 1.0)?),
        ("cone", SystemParams::with_range(1.0, -1.0, 1.0, 0.0, -1.0, 1.0)?),
    ];
    for (name, sys) in systems {
        let c = classify(&sys);
        println!("{name:>14}: case {} {:?}", c.case, c.invariance);
        println!("{:>16}{}", "", serde_json::to_string(&c.description).unwrap());
    }
    Ok(())
}
