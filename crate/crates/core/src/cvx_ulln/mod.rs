//! Positive univariate results: the convex uniform law, the fixed-epsilon
//! uniform law, and the bracketing diagnostic from their proofs.

pub mod bracketing;
pub mod curve;
pub mod experiments;
pub mod pwl;

pub use bracketing::{bracketing_diagnostic, BracketDiagnostic};
pub use curve::{sup_hausdorff_gap, CertifiedSubdiffCurve};
pub use experiments::{
    eps_ulln_experiment, ulln_experiment, Atom, ConvergenceOutcome, ConvergenceRow,
    ScenarioDistribution,
};
pub use pwl::{average, weighted_average, PiecewiseLinearConvex};
