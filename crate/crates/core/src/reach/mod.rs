//! Numerical reachability: sampled positive orbits, steering between points,
//! and empirical verification of classified control sets.

mod sample;
mod steer;
mod verify;

pub use sample::{random_control, reach_sample, OrbitSample};
pub use steer::{barrier_certificate, steer, steer_with, SteerMethod, SteerOptions, SteeringResult, Verdict};
pub use verify::{
    decay_to_cone_check, monotone_escape_check, verify_control_set, DecayReport, EscapeWitness, MonotoneReport,
    PairRecord, SteerOutcome, VerificationReport, VerifyConfig,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupPoint;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SOLVLIN_THREADS";

pub const DEFAULT_HORIZON: f64 = 10.0;
pub const DEFAULT_BUDGET: usize = 4000;
pub const DEFAULT_EPS: f64 = 1e-2;

/// Rectangle used to clip unbounded control sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Default for Viewport {
    fn default() -> Self {
        Viewport { x0: 0.1, x1: 10.0, y0: -10.0, y1: 10.0 }
    }
}

impl Viewport {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
        if !finite || !(0.0 < x0 && x0 < x1 && y0 < y1) {
            return Err(Error::Parse(format!(
                "viewport [{x0}, {x1}] × [{y0}, {y1}] must satisfy 0 < x0 < x1 and y0 < y1"
            )));
        }
        Ok(Viewport { x0, x1, y0, y1 })
    }

    pub fn contains(&self, p: &GroupPoint) -> bool {
        self.x0 <= p.x() && p.x() <= self.x1 && self.y0 <= p.y() && p.y() <= self.y1
    }
}

/// Independent random stream for task `index` of kind `domain`.
pub(crate) fn task_rng(seed: u64, domain: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) | index as u64);
    rng
}

pub(crate) mod domain {
    pub const ORBIT: u64 = 1;
    pub const PAIR: u64 = 2;
    pub const SEARCH: u64 = 3;
    pub const INVARIANCE: u64 = 4;
    pub const DECAY: u64 = 5;
    pub const ESCAPE: u64 = 6;
}

/// Worker cap from `SOLVLIN_THREADS`, when set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Maps `f` over `0..n` in parallel; results are in index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    match thread_cap() {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parse(format!("{name} must be positive and finite, got {v}")))
    }
}
