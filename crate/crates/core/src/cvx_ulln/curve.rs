//! Certified expected-subdifferential curves and the exact supremum of the
//! Hausdorff distance to an empirical PWL subdifferential.
//!
//! The expected subdifferential `x -> dE[f](x)` of the built-in
//! distributions is an interval whose two monotone selections agree on open
//! pieces and jump only at known breakpoints, so it is stored as a list of
//! affine pieces. Between merged breakpoints the empirical subdifferential
//! is a constant singleton and the expected one is affine, so the supremum
//! of the Hausdorff distance is attained at piece endpoints (one-sided
//! limits included), making the overall supremum exact.

use crate::error::{CoreError, Result};
use crate::setval::{hausdorff_intervals, Interval};

use super::pwl::PiecewiseLinearConvex;

/// `x -> dE[f](x)` on a window, as affine pieces `value = a + b x` on the
/// open intervals between consecutive breakpoints. At an interior
/// breakpoint the subdifferential is the interval between the one-sided
/// limits; at a window end it is the adjacent one-sided limit. Outside the
/// window both the expected and the empirical subdifferentials must
/// saturate (constant extreme slopes), so the sup over the whole line
/// equals the sup over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedSubdiffCurve {
    breakpoints: Vec<f64>,
    pieces: Vec<(f64, f64)>,
}

impl CertifiedSubdiffCurve {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(CoreError::Domain(
                "need n >= 2 breakpoints and n - 1 pieces".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CoreError::Domain("breakpoints must be strictly increasing".into()));
        }
        // Certify monotonicity: non-negative slope within each piece and
        // non-decreasing one-sided limits across each boundary.
        for (i, &(a, b)) in pieces.iter().enumerate() {
            if !(b >= 0.0) {
                return Err(CoreError::Unsupported(format!(
                    "piece {i} decreases (slope {b}); curve not monotone"
                )));
            }
            if i + 1 < pieces.len() {
                let x = breakpoints[i + 1];
                let left = a + b * x;
                let (a2, b2) = pieces[i + 1];
                let right = a2 + b2 * x;
                if left > right + 1e-12 {
                    return Err(CoreError::Unsupported(format!(
                        "curve drops across breakpoint {x}: {left} > {right}"
                    )));
                }
            }
        }
        Ok(CertifiedSubdiffCurve { breakpoints, pieces })
    }

    /// Piecewise-constant curve from the slopes of a PWL expected function,
    /// clipped to the window (which must contain all breakpoints).
    pub fn from_pwl(f: &PiecewiseLinearConvex, window: Interval) -> Result<Self> {
        if f.domain().is_some() {
            return Err(CoreError::Unsupported(
                "expected function must be finite on the whole line".into(),
            ));
        }
        if f.breakpoints().iter().any(|&b| !(window.lo <= b && b <= window.hi)) {
            return Err(CoreError::Domain(
                "window must contain every breakpoint of the expected function".into(),
            ));
        }
        let mut breakpoints = vec![window.lo];
        for &b in f.breakpoints() {
            if b > window.lo && b < window.hi {
                breakpoints.push(b);
            }
        }
        breakpoints.push(window.hi);
        // The i-th piece spans (breakpoints[i], breakpoints[i+1]); its value
        // is the constant PWL slope valid there.
        let curve_pieces: Vec<(f64, f64)> = (0..breakpoints.len() - 1)
            .map(|i| {
                let mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
                let j = f.breakpoints().partition_point(|&b| b < mid);
                (f.slopes()[j], 0.0)
            })
            .collect();
        Self::new(breakpoints, curve_pieces)
    }

    pub fn window(&self) -> Interval {
        Interval {
            lo: self.breakpoints[0],
            hi: *self.breakpoints.last().unwrap(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    /// Index of the piece whose open interval contains x (x strictly inside).
    fn piece_containing(&self, x: f64) -> Option<usize> {
        if x <= self.breakpoints[0] || x >= *self.breakpoints.last().unwrap() {
            return None;
        }
        let i = self.breakpoints.partition_point(|&b| b < x);
        // x in [breakpoints[i-1], breakpoints[i]); interior unless equal.
        if self.breakpoints[i] == x || self.breakpoints[i - 1] == x {
            None
        } else {
            Some(i - 1)
        }
    }

    fn piece_value(&self, i: usize, x: f64) -> f64 {
        let (a, b) = self.pieces[i];
        a + b * x
    }

    /// The expected subdifferential interval at x in the window.
    pub fn interval_at(&self, x: f64) -> Result<Interval> {
        let w = self.window();
        if !w.contains(x) {
            return Err(CoreError::Domain(format!("{x} outside curve window")));
        }
        if let Some(i) = self.piece_containing(x) {
            return Ok(Interval::singleton(self.piece_value(i, x)));
        }
        // x is a breakpoint (or window end): one-sided limits.
        let i = self.breakpoints.iter().position(|&b| b == x).unwrap();
        let left = if i == 0 { None } else { Some(self.piece_value(i - 1, x)) };
        let right = if i == self.pieces.len() { None } else { Some(self.piece_value(i, x)) };
        match (left, right) {
            (Some(l), Some(r)) => Interval::new(l.min(r), l.max(r)),
            (Some(l), None) => Ok(Interval::singleton(l)),
            (None, Some(r)) => Ok(Interval::singleton(r)),
            (None, None) => unreachable!("curve has at least one piece"),
        }
    }

    /// The curve of `x -> dE[g](x)` for `g(x) = E f(-x)`, i.e. the
    /// reflection `x -> -dE[f](-x)`; used for the w = -1 direction.
    pub fn reflected(&self) -> Self {
        let breakpoints: Vec<f64> = self.breakpoints.iter().rev().map(|&b| -b).collect();
        let pieces: Vec<(f64, f64)> = self.pieces.iter().rev().map(|&(a, b)| (-a, b)).collect();
        CertifiedSubdiffCurve { breakpoints, pieces }
    }
}

/// Exact `sup_x dl(dE[f](x), d f_hat(x))` over the curve window (equal to
/// the sup over the whole line when both sides saturate outside it).
pub fn sup_hausdorff_gap(
    expected: &CertifiedSubdiffCurve,
    empirical: &PiecewiseLinearConvex,
) -> Result<f64> {
    if empirical.domain().is_some() {
        return Err(CoreError::Unsupported(
            "empirical average must be finite on the whole line".into(),
        ));
    }
    let w = expected.window();
    let mut xs: Vec<f64> = expected.breakpoints().to_vec();
    for &b in empirical.breakpoints() {
        if b >= w.lo && b <= w.hi {
            xs.push(b);
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let mut best = 0.0f64;
    // Full intervals at every node.
    for &x in &xs {
        let e = expected.interval_at(x)?;
        let s = empirical.subdiff_interval(x)?;
        best = best.max(hausdorff_intervals(&e, &s));
    }
    // One-sided limits on each open interval between consecutive nodes:
    // expected affine, empirical a constant singleton, so the sup of
    // |affine - const| is at the endpoints.
    for win in xs.windows(2) {
        let (u, v) = (win[0], win[1]);
        let mid = 0.5 * (u + v);
        let i = expected
            .piece_containing(mid)
            .ok_or_else(|| CoreError::Domain("node grid finer than curve pieces".into()))?;
        let c = empirical.dir_deriv(mid, 1)?;
        best = best.max((expected.piece_value(i, u) - c).abs());
        best = best.max((expected.piece_value(i, v) - c).abs());
    }
    Ok(best)
}
