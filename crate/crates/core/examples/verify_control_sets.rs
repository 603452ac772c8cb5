//! Empirical check of controllability and invariance for each case.

use solvlin::reach::VerifyConfig;
use solvlin::{classify, verify_control_set, SystemParams};

fn main() -> solvlin::Result<()> {
    let cfg = VerifyConfig { pairs: 6, invariance_samples: 500, seed: 3, ..VerifyConfig::default() };
    for (a, b, alpha, beta) in [(1.0, 0.0, 0.0, 1.0), (0.0, -1.0, 0.0, 1.0), (-1.0, 1.0, 1.0, 1.0), (1.0, 0.0, 1.0, 1.0), (1.0, -1.0, 1.0, 0.0)] {
        let sys = SystemParams::with_range(a, b, alpha, beta, -1.0, 1.0)?;
        let c = classify(&sys);
        let r = verify_control_set(&sys, &c.description, c.invariance, &cfg)?;
        println!(
            "case {}: steered {}/{} pairs, {} invariance violations in {} samples, max error {:.1e}",
            c.case, r.pairs_steered, r.pairs_tested, r.invariance_violations, r.invariance_samples, r.max_terminal_error
        );
    }
    Ok(())
}
