use rand::Rng;
use serde::Serialize;

use super::{check_positive, domain, par_map, task_rng};
use crate::error::Result;
use crate::flows::{ClosedFormFlow, PiecewiseControl, Sampling, Trajectory};
use crate::group::GroupPoint;
use crate::system::{ControlRange, SystemParams};

/// Level drawn from `{lo, 0, hi}` with probability 3/4, uniform on `Ω` otherwise.
pub(crate) fn random_level<R: Rng>(rng: &mut R, omega: &ControlRange) -> f64 {
    if rng.gen_bool(0.75) {
        [omega.lo(), 0.0, omega.hi()][rng.gen_range(0..3)]
    } else {
        rng.gen_range(omega.lo()..=omega.hi())
    }
}

/// Dwell time uniform on `(0, horizon/4]`.
pub(crate) fn random_dwell<R: Rng>(rng: &mut R, horizon: f64) -> f64 {
    (1.0 - rng.gen::<f64>()) * horizon / 4.0
}

/// Random piecewise-constant control of total duration `horizon`.
pub fn random_control<R: Rng>(rng: &mut R, omega: &ControlRange, horizon: f64) -> PiecewiseControl {
    let mut ctrl = PiecewiseControl::empty();
    let mut left = horizon;
    while left > 0.0 {
        let dt = random_dwell(rng, horizon).min(left);
        ctrl.push(dt, random_level(rng, omega));
        left -= dt;
    }
    ctrl
}

/// Sampled trajectories approximating the positive orbit of a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub trajectories: Vec<Trajectory>,
}

impl OrbitSample {
    pub fn endpoints(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        self.trajectories.iter().map(Trajectory::end)
    }

    /// Every recorded sample, endpoints included.
    pub fn points(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        self.trajectories.iter().flat_map(|t| t.samples.iter().map(|s| s.p))
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// `n` trajectories from `p` under random controls of duration `horizon`.
pub fn reach_sample(sys: &SystemParams, p: &GroupPoint, horizon: f64, n: usize, seed: u64) -> Result<OrbitSample> {
    check_positive("horizon", horizon)?;
    let flow = ClosedFormFlow::new(sys);
    let trajectories = par_map(n, |i| {
        let mut rng = task_rng(seed, domain::ORBIT, i);
        let ctrl = random_control(&mut rng, &sys.omega(), horizon);
        flow.run(p, &ctrl, Sampling::default()).expect("random levels lie in Ω")
    });
    Ok(OrbitSample { trajectories })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_line_is_kept_exactly() {
        let s = SystemParams::with_range(0.0, -1.0, 1.0, 0.0, -1.0, 1.0).unwrap();
        let cloud = reach_sample(&s, &GroupPoint::new(2.0, 0.0).unwrap(), 5.0, 50, 3).unwrap();
        assert_eq!(cloud.len(), 50);
        assert!(cloud.points().all(|p| p.y() == 0.0));
    }

    #[test]
    fn cone_samples_stay_below_boundary() {
        let s = SystemParams::with_range(0.0, -1.0, 1.0, 1.0, -1.0, 1.0).unwrap();
        let cloud = reach_sample(&s, &GroupPoint::new(1.0, 0.0).unwrap(), 5.0, 200, 11).unwrap();
        assert!(cloud.points().all(|p| p.y() <= p.x() / 2.0 + 1e-9));
    }

    #[test]
    fn zero_trajectories() {
        let s = SystemParams::with_range(0.0, -1.0, 1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(reach_sample(&s, &GroupPoint::IDENTITY, 1.0, 0, 0).unwrap().is_empty());
        assert!(reach_sample(&s, &GroupPoint::IDENTITY, 0.0, 1, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let s = SystemParams::with_range(1.0, -0.3, 0.7, 0.2, -1.0, 2.0).unwrap();
        let a = reach_sample(&s, &GroupPoint::IDENTITY, 4.0, 20, 9).unwrap();
        let b = reach_sample(&s, &GroupPoint::IDENTITY, 4.0, 20, 9).unwrap();
        let c = reach_sample(&s, &GroupPoint::IDENTITY, 4.0, 20, 10).unwrap();
        assert!(a.points().zip(b.points()).all(|(p, q)| p == q));
        assert!(a.endpoints().zip(c.endpoints()).any(|(p, q)| p != q));
    }

    #[test]
    fn random_controls_fill_horizon() {
        let omega = ControlRange::new(-1.0, 2.0).unwrap();
        let mut rng = task_rng(1, 0, 0);
        for _ in 0..100 {
            let c = random_control(&mut rng, &omega, 3.0);
            assert!((c.duration() - 3.0).abs() < 1e-12);
            assert!(c.segments().iter().all(|s| s.dt > 0.0 && s.dt <= 0.75 && omega.contains(s.u)));
        }
    }
}
