//! Piecewise-linear convex functions on the line: evaluation, one-sided
//! derivatives, subdifferentials, exact Legendre-Fenchel transforms, and
//! epsilon-subdifferentials via the conjugate characterization
//! `s in d^eps f(x)  <=>  f(x) + f*(s) - s x <= eps`.

use crate::error::{CoreError, Result};
use crate::setval::Interval;

/// A convex piecewise-linear function, finite on `domain` (all of the line
/// when `None`) and `+infinity` outside. Reconstructible exactly from the
/// fields: `slopes[j]` holds on the j-th piece, pieces are separated by the
/// strictly increasing `breakpoints`, and `anchor = (x0, f(x0))` pins the
/// values. Slopes are strictly increasing after canonicalization (pieces
/// with equal slopes are merged).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConvex {
    domain: Option<Interval>,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    anchor: (f64, f64),
}

impl PiecewiseLinearConvex {
    pub fn new(
        domain: Option<Interval>,
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        anchor: (f64, f64),
    ) -> Result<Self> {
        if let Some(d) = &domain {
            if d.lo == d.hi {
                // Point domain: a single conventional slope, no breakpoints.
                if !breakpoints.is_empty() || slopes.len() != 1 {
                    return Err(CoreError::Domain(
                        "point-domain function takes no breakpoints and one slope".into(),
                    ));
                }
                if anchor.0 != d.lo {
                    return Err(CoreError::Domain("anchor must sit at the point domain".into()));
                }
                return Ok(PiecewiseLinearConvex {
                    domain,
                    breakpoints,
                    slopes,
                    anchor,
                });
            }
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(CoreError::Domain(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || slopes.iter().any(|s| !s.is_finite())
            || !anchor.0.is_finite()
            || !anchor.1.is_finite()
        {
            return Err(CoreError::Domain("non-finite field".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CoreError::Domain("breakpoints must be strictly increasing".into()));
        }
        if slopes.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(CoreError::Domain("slopes must be non-decreasing (convexity)".into()));
        }
        if let Some(d) = &domain {
            if breakpoints.iter().any(|&b| !(d.lo < b && b < d.hi)) {
                return Err(CoreError::Domain(
                    "breakpoints must lie strictly inside the domain".into(),
                ));
            }
            if !d.contains(anchor.0) {
                return Err(CoreError::Domain("anchor outside the domain".into()));
            }
        }
        // Canonicalize: merge adjacent pieces with exactly equal slopes.
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut sl = vec![slopes[0]];
        for (i, &b) in breakpoints.iter().enumerate() {
            let s = slopes[i + 1];
            if s == *sl.last().unwrap() {
                continue;
            }
            bp.push(b);
            sl.push(s);
        }
        Ok(PiecewiseLinearConvex {
            domain,
            breakpoints: bp,
            slopes: sl,
            anchor,
        })
    }

    /// The affine function `value_at_anchor + slope * (x - anchor)` on the line.
    pub fn affine(slope: f64, anchor: (f64, f64)) -> Result<Self> {
        Self::new(None, vec![], vec![slope], anchor)
    }

    /// `|x - c|`.
    pub fn abs_dev(c: f64) -> Result<Self> {
        Self::new(None, vec![c], vec![-1.0, 1.0], (c, 0.0))
    }

    /// `max{x - c, 0}`.
    pub fn hinge(c: f64) -> Result<Self> {
        Self::new(None, vec![c], vec![0.0, 1.0], (c, 0.0))
    }

    pub fn domain(&self) -> Option<Interval> {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn anchor(&self) -> (f64, f64) {
        self.anchor
    }

    fn check_in_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(CoreError::Domain(format!("non-finite evaluation point {x}")));
        }
        if let Some(d) = &self.domain {
            if !d.contains(x) {
                return Err(CoreError::Domain(format!(
                    "{x} outside the domain [{}, {}]",
                    d.lo, d.hi
                )));
            }
        }
        Ok(())
    }

    /// Exact evaluation by integrating the slopes from the anchor.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_in_domain(x)?;
        let (x0, v0) = self.anchor;
        let (a, b, sign) = if x0 <= x { (x0, x, 1.0) } else { (x, x0, -1.0) };
        let mut acc = 0.0;
        for j in 0..self.slopes.len() {
            let lo = if j == 0 { f64::NEG_INFINITY } else { self.breakpoints[j - 1] };
            let hi = if j + 1 == self.slopes.len() {
                f64::INFINITY
            } else {
                self.breakpoints[j]
            };
            let l = a.max(lo);
            let h = b.min(hi);
            if h > l {
                acc += self.slopes[j] * (h - l);
            }
        }
        Ok(v0 + sign * acc)
    }

    /// Index of the slope governing the piece immediately left / right of x.
    fn slope_left_idx(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    fn slope_right_idx(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    /// Directional derivative `f'(x; w)` for `w = +1` or `w = -1`.
    ///
    /// `f'(x; +1)` is the right slope; `f'(x; -1)` is minus the left slope.
    /// At a bounded-domain endpoint the outward direction gives `+infinity`.
    pub fn dir_deriv(&self, x: f64, w: i8) -> Result<f64> {
        self.check_in_domain(x)?;
        match w {
            1 => {
                if self.domain.map_or(false, |d| x == d.hi) {
                    return Ok(f64::INFINITY);
                }
                Ok(self.slopes[self.slope_right_idx(x)])
            }
            -1 => {
                if self.domain.map_or(false, |d| x == d.lo) {
                    return Ok(f64::INFINITY);
                }
                Ok(-self.slopes[self.slope_left_idx(x)])
            }
            _ => Err(CoreError::Domain(format!("direction w must be +1 or -1, got {w}"))),
        }
    }

    /// `∂f(x) = [-f'(x; -1), f'(x; +1)]`, possibly half-infinite at a
    /// bounded-domain endpoint.
    pub fn subdiff_interval(&self, x: f64) -> Result<Interval> {
        self.check_in_domain(x)?;
        let lo = match self.dir_deriv(x, -1)? {
            v if v == f64::INFINITY => f64::NEG_INFINITY,
            v => -v,
        };
        let hi = self.dir_deriv(x, 1)?;
        Interval::new(lo, hi)
    }

    /// Exact Legendre-Fenchel transform.
    ///
    /// The conjugate of a function finite on the whole line lives on the
    /// bounded slope range `[c_0, c_m]` and vice versa; the breakpoints and
    /// slopes swap roles. `f** = f` exactly (for exactly representable
    /// inputs, all arithmetic is exact: only sums and products occur).
    pub fn legendre_transform(&self) -> Result<Self> {
        let m = self.breakpoints.len();
        match self.domain {
            None => {
                if m == 0 {
                    // Affine: the conjugate is finite only at the slope.
                    let c = self.slopes[0];
                    let (x0, v0) = self.anchor;
                    return Self::new(
                        Some(Interval::new(c, c)?),
                        vec![],
                        vec![0.0],
                        (c, c * x0 - v0),
                    );
                }
                let c0 = self.slopes[0];
                let cm = self.slopes[m];
                let t1 = self.breakpoints[0];
                Self::new(
                    Some(Interval::new(c0, cm)?),
                    self.slopes[1..m].to_vec(),
                    self.breakpoints.clone(),
                    (c0, c0 * t1 - self.eval(t1)?),
                )
            }
            Some(d) if d.lo == d.hi => {
                // f finite at one point a: f*(s) = s a - f(a), affine.
                Self::affine(d.lo, (0.0, -self.anchor.1))
            }
            Some(d) => {
                let mut conj_slopes = Vec::with_capacity(m + 2);
                conj_slopes.push(d.lo);
                conj_slopes.extend_from_slice(&self.breakpoints);
                conj_slopes.push(d.hi);
                Self::new(
                    None,
                    self.slopes.clone(),
                    conj_slopes,
                    (self.slopes[0], self.slopes[0] * d.lo - self.eval(d.lo)?),
                )
            }
        }
    }

    /// `∂^ε f(x)` with a precomputed conjugate (reuse it across many x).
    pub fn eps_subdiff_with_conjugate(
        &self,
        conj: &PiecewiseLinearConvex,
        x: f64,
        eps: f64,
    ) -> Result<Interval> {
        if !(eps >= 0.0) {
            return Err(CoreError::Domain(format!("epsilon must be >= 0, got {eps}")));
        }
        self.check_in_domain(x)?;
        let fx = self.eval(x)?;
        // phi(s) = f(x) + f*(s) - s x, convex PWL in s; the epsilon
        // subdifferential is its sublevel set at eps. The level is clamped
        // at the attained minimum so roundoff cannot empty the set.
        let nodes = conj.nodes();
        if nodes.is_empty() {
            // Point conjugate domain: f is affine beyond representation.
            return Err(CoreError::Unsupported("degenerate conjugate".into()));
        }
        let mut phi = Vec::with_capacity(nodes.len());
        let mut v = conj.eval(nodes[0])?;
        phi.push(fx + v - nodes[0] * x);
        for w in 0..nodes.len() - 1 {
            let slope = conj.slopes[conj.slope_right_idx(nodes[w])];
            v += slope * (nodes[w + 1] - nodes[w]);
            phi.push(fx + v - nodes[w + 1] * x);
        }
        let min_phi = phi.iter().cloned().fold(f64::INFINITY, f64::min);
        let level = eps.max(min_phi);

        let n = nodes.len();
        // Tail slopes of phi when the conjugate domain is unbounded.
        let (tail_left, tail_right) = match conj.domain {
            Some(_) => (None, None),
            None => (
                Some(conj.slopes[0] - x),
                Some(conj.slopes[conj.slopes.len() - 1] - x),
            ),
        };
        let lo = if phi[0] <= level {
            match tail_left {
                Some(tl) if tl < 0.0 => nodes[0] - (level - phi[0]) / (-tl),
                Some(_) => f64::NEG_INFINITY, // flat or decreasing to the left
                None => nodes[0],
            }
        } else {
            // First index with phi <= level; cross on the piece before it.
            let j = phi
                .iter()
                .position(|&p| p <= level)
                .ok_or_else(|| CoreError::Domain("empty sublevel set".into()))?;
            let (s0, s1) = (nodes[j - 1], nodes[j]);
            let (p0, p1) = (phi[j - 1], phi[j]);
            s0 + (p0 - level) / (p0 - p1) * (s1 - s0)
        };
        let hi = if phi[n - 1] <= level {
            match tail_right {
                Some(tr) if tr > 0.0 => nodes[n - 1] + (level - phi[n - 1]) / tr,
                Some(_) => f64::INFINITY,
                None => nodes[n - 1],
            }
        } else {
            let j = phi
                .iter()
                .rposition(|&p| p <= level)
                .ok_or_else(|| CoreError::Domain("empty sublevel set".into()))?;
            let (s0, s1) = (nodes[j], nodes[j + 1]);
            let (p0, p1) = (phi[j], phi[j + 1]);
            s1 - (p1 - level) / (p1 - p0) * (s1 - s0)
        };
        Interval::new(lo, hi)
    }

    /// `∂^ε f(x)`; `ε = 0` recovers `subdiff_interval`.
    pub fn eps_subdiff(&self, x: f64, eps: f64) -> Result<Interval> {
        let conj = self.legendre_transform()?;
        self.eps_subdiff_with_conjugate(&conj, x, eps)
    }

    /// All finite nodes: domain endpoints (if bounded) and breakpoints.
    fn nodes(&self) -> Vec<f64> {
        match self.domain {
            Some(d) if d.lo == d.hi => vec![d.lo],
            Some(d) => {
                let mut v = Vec::with_capacity(self.breakpoints.len() + 2);
                v.push(d.lo);
                v.extend_from_slice(&self.breakpoints);
                v.push(d.hi);
                v
            }
            None => self.breakpoints.clone(),
        }
    }
}

/// Weighted combination `sum_i w_i f_i` of full-line PWL functions; with
/// `w_i = 1/n` this is the empirical average. Exact event-merge on the
/// slope jumps.
pub fn weighted_average(terms: &[(f64, &PiecewiseLinearConvex)]) -> Result<PiecewiseLinearConvex> {
    if terms.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let mut base_slope = 0.0;
    let mut value0 = 0.0;
    let mut events: Vec<(f64, f64)> = Vec::new();
    for (w, f) in terms {
        if !(*w > 0.0) {
            return Err(CoreError::Domain("weights must be positive".into()));
        }
        if f.domain().is_some() {
            return Err(CoreError::Unsupported(
                "averaging is supported for full-line functions only".into(),
            ));
        }
        base_slope += w * f.slopes()[0];
        value0 += w * f.eval(0.0)?;
        for (i, &b) in f.breakpoints().iter().enumerate() {
            events.push((b, w * (f.slopes()[i + 1] - f.slopes()[i])));
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut breakpoints = Vec::with_capacity(events.len());
    let mut slopes = vec![base_slope];
    let mut cur = base_slope;
    let mut i = 0;
    while i < events.len() {
        let b = events[i].0;
        let mut jump = 0.0;
        while i < events.len() && events[i].0 == b {
            jump += events[i].1;
            i += 1;
        }
        cur += jump;
        breakpoints.push(b);
        slopes.push(cur);
    }
    PiecewiseLinearConvex::new(None, breakpoints, slopes, (0.0, value0))
}

/// Uniform average `(1/n) sum_i f_i`.
pub fn average(fs: &[PiecewiseLinearConvex]) -> Result<PiecewiseLinearConvex> {
    let w = 1.0 / fs.len() as f64;
    let terms: Vec<(f64, &PiecewiseLinearConvex)> = fs.iter().map(|f| (w, f)).collect();
    weighted_average(&terms)
}
