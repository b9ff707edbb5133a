//! Verification laboratory for uniform laws of large numbers for
//! subdifferentials.
//!
//! The crate has two halves. The negative half builds two explicit random
//! families — a 1-Lipschitz family on the line ([`lip_cx`]) and a convex
//! 70-smooth family in the plane ([`cvx_cx`]) — whose empirical average
//! subdifferentials stay a fixed distance 1/2 away from the expected
//! subdifferential at a data-dependent witness point, no matter how many
//! samples are drawn. The engine is exact binary-digit extraction from
//! uniform variates ([`dyadic`]): at some index `k` below an explicit bound
//! all samples share bit 1, and the construction converts that event into
//! an exact gradient gap. The positive half ([`cvx_ulln`]) verifies that
//! under convexity in one dimension, or for epsilon-subdifferentials with
//! fixed epsilon > 0, the uniform law does hold, with exact set-valued
//! metrics from [`setval`].

pub mod cvx_cx;
pub mod cvx_ulln;
pub mod dyadic;
pub mod error;
pub mod lip_cx;
pub mod seeding;
pub mod setval;

pub use cvx_cx::{gap_experiment_2d, ConvexScenario, GapOutcome2};
pub use cvx_ulln::{
    bracketing_diagnostic, eps_ulln_experiment, sup_hausdorff_gap, ulln_experiment, Atom,
    BracketDiagnostic, CertifiedSubdiffCurve, ConvergenceOutcome, ConvergenceRow,
    PiecewiseLinearConvex, ScenarioDistribution,
};
pub use dyadic::{
    find_joint_one_bit, joint_bit_trial, k_bound, shatter_witness, BitStream, DyadicRational,
};
pub use error::{CoreError, Result};
pub use lip_cx::{gap_experiment, GapOutcome, LipschitzScenario};
pub use seeding::{split_seed, GENERATOR_ID};
pub use setval::{
    excess, hausdorff, hausdorff_intervals, minkowski_average, ConvexPolygon, ConvexSet, Interval,
    Segment2, Vec2,
};
