//! Linear control systems on the two-dimensional solvable Lie group
//! `G = R₊ × R`: closed-form flows, normal forms, control-set classification
//! and a numerical reachability oracle.

pub mod classify;
pub mod cli;
pub mod error;
pub mod flows;
pub mod group;
pub mod normal_form;
pub mod plot;
pub mod reach;
pub mod system;

pub use classify::{classify, membership, Classification, ControlSetDescription, Invariance};
pub use error::{Error, Result};
pub use flows::{flow_constant, flow_piecewise, rk4_flow, ClosedFormFlow, PiecewiseControl, Trajectory};
pub use group::{Automorphism, GroupPoint, TangentVector};
pub use normal_form::{conjugate_to_normal_form, NormalForm, NormalSystem};
pub use reach::{reach_sample, steer, verify_control_set, Viewport};
pub use system::{larc, time_reverse, ControlRange, SystemParams};
