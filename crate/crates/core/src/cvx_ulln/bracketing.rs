//! The bracketing diagnostic behind the univariate uniform law.
//!
//! For a direction `w` the map `t -> E[f'(xi, t; w)]` (taken in `t` after
//! reflecting for `w = -1`) is non-decreasing, right-continuous, and ranges
//! over `[E l, E u]` for the extreme-slope envelopes `l, u`. The levels
//!
//!   `t_n = min{ t : E[f'(xi, t; w)] >= min(E u - eps/2, E l + n eps) }`
//!
//! exist by right-continuity, and their count satisfies
//! `N <= 1 + 2 E[L] / eps`.

use crate::error::{CoreError, Result};
use crate::setval::Interval;

use super::curve::CertifiedSubdiffCurve;
use super::experiments::ScenarioDistribution;

/// The computed bracketing levels for one `(eps, w)`.
#[derive(Debug, Clone)]
pub struct BracketDiagnostic {
    pub epsilon: f64,
    pub w: i8,
    /// The levels `t_1 <= ... <= t_N`; `-inf` encodes attainment in the
    /// saturated left tail.
    pub levels: Vec<f64>,
    /// The proof's cap `1 + 2 E[L]/eps` on `N = levels.len()`.
    pub n_cap: f64,
}

/// Least `t` with the curve's right-continuous upper selection `>= tau`;
/// `None` if `tau` exceeds the maximum on the window.
fn min_level_crossing(curve: &CertifiedSubdiffCurve, tau: f64) -> Option<f64> {
    let bps = curve.breakpoints();
    for (i, &(a, b)) in curve.pieces().iter().enumerate() {
        let (lo, hi) = (bps[i], bps[i + 1]);
        // Right-continuous value at the left endpoint of the piece.
        if a + b * lo >= tau {
            return Some(lo);
        }
        if b > 0.0 && a + b * hi >= tau {
            return Some(((tau - a) / b).max(lo));
        }
    }
    let (a, b) = *curve.pieces().last().unwrap();
    let hi = *bps.last().unwrap();
    if a + b * hi >= tau {
        Some(hi)
    } else {
        None
    }
}

/// Compute the bracketing levels for the distribution's expected
/// directional-derivative map on its default window.
pub fn bracketing_diagnostic(
    dist: &ScenarioDistribution,
    epsilon: f64,
    w: i8,
    window: Interval,
) -> Result<BracketDiagnostic> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Domain("epsilon must be positive".into()));
    }
    if w != 1 && w != -1 {
        return Err(CoreError::Domain(format!("w must be +1 or -1, got {w}")));
    }
    let (e_l, e_u) = dist.expected_extreme_slopes();
    let e_lip = dist.expected_lipschitz();
    let n_cap = 1.0 + 2.0 * e_lip / epsilon;
    if e_u == e_l {
        // E[u] = E[l]: the proof's trivial case; nothing to bracket.
        return Ok(BracketDiagnostic { epsilon, w, levels: vec![], n_cap });
    }
    let base = dist.expected_curve(window)?;
    // For w = -1 bracket the reflected problem; its extreme-slope
    // expectations swap and negate. Map levels back at the end.
    let (curve, lo_val, hi_val) = match w {
        1 => (base, e_l, e_u),
        _ => (base.reflected(), -e_u, -e_l),
    };
    let mut levels = Vec::new();
    let cap_tau = hi_val - epsilon / 2.0;
    for n in 1.. {
        let tau = (lo_val + n as f64 * epsilon).min(cap_tau);
        let t = if tau <= lo_val {
            // Attained in the saturated tail below the window.
            f64::NEG_INFINITY
        } else {
            min_level_crossing(&curve, tau).ok_or_else(|| {
                CoreError::Domain(format!(
                    "window too small: level {tau} not attained on it"
                ))
            })?
        };
        levels.push(t);
        if tau >= cap_tau {
            break;
        }
    }
    if w == -1 {
        for t in levels.iter_mut() {
            *t = -*t;
        }
        levels.reverse();
    }
    let n = levels.len() as f64;
    debug_assert!(n <= n_cap + 1e-9, "N = {n} exceeds cap {n_cap}");
    Ok(BracketDiagnostic { epsilon, w, levels, n_cap })
}
