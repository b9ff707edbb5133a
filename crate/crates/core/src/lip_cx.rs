//! The random-Lipschitz counterexample family.
//!
//! A sample `xi` drives a square-wave function `g(xi, x)` that is
//! `bit_k(xi)` on the bump window `B_k = (1/k - r_k, 1/k + r_k)` with
//! `r_k = 1/(4k^2)`, and zero elsewhere. Its running integral
//! `f(xi, x) = int_0^{max(x,0)} g(xi, t) dt` is 1-Lipschitz, and on the
//! certified balls `B(p_k, Delta_k)` with `p_k = 1/k`, `Delta_k = r_k/2`
//! it is C^1 with gradient exactly `bit_k(xi)`. At the joint-bit event the
//! empirical average gradient is 1 while the expected gradient is 1/2, so
//! the gap is exactly 1/2.

use num_integer::Integer;

use crate::dyadic::{self, BitStream};
use crate::error::{CoreError, Result};
use crate::seeding;
use crate::setval::Interval;

/// Largest bump index whose bit we will materialize when locating the
/// active window for very small positive `x`.
pub const ACTIVE_K_CAP: u64 = 1 << 26;

/// Bump radius `r_k = 1/(4k^2)`.
pub fn r_k(k: u64) -> f64 {
    1.0 / (4.0 * (k as f64) * (k as f64))
}

/// Bump center `p_k = 1/k`.
pub fn p_k(k: u64) -> f64 {
    1.0 / k as f64
}

/// Certified smoothness radius `Delta_k = r_k / 2 = 1/(8k^2)`.
pub fn delta_k(k: u64) -> f64 {
    1.0 / (8.0 * (k as f64) * (k as f64))
}

/// `delta^nu = (8 * K_bound(nu)^2)^-1 = Delta_{K_bound(nu)}`.
pub fn delta_nu(nu: u32) -> Result<f64> {
    let k = dyadic::k_bound(nu)? as f64;
    Ok(1.0 / (8.0 * k * k))
}

/// Locate the bump window containing `x`, if any.
///
/// Candidate indices come from `floor(1/x) +- 1`; membership is then
/// checked directly, so no scan over k is needed. Works in f64 candidate
/// space so that tiny positive `x` cannot overflow an integer index.
fn active_index(x: f64, radius: impl Fn(f64) -> f64, cap: u64) -> Result<Option<u64>> {
    if x <= 0.0 || !x.is_finite() {
        return Ok(None);
    }
    let k0 = (1.0 / x).floor();
    for kf in [k0 - 1.0, k0, k0 + 1.0] {
        if kf < 1.0 {
            continue;
        }
        if (x - 1.0 / kf).abs() < radius(kf) {
            if kf > cap as f64 {
                return Err(CoreError::Capacity(format!(
                    "active bump index {kf} exceeds cap {cap}"
                )));
            }
            return Ok(Some(kf as u64));
        }
    }
    Ok(None)
}

/// Location of the active Lipschitz-family bump at `x`, if any.
pub fn active_bump(x: f64) -> Result<Option<u64>> {
    active_index(x, |kf| 1.0 / (4.0 * kf * kf), ACTIVE_K_CAP)
}

/// One sampled function of the family, with tail-bound control for the
/// infinite sums appearing in `f` and `E[f]`.
pub struct LipschitzScenario {
    xi: BitStream,
    truncation_tol: f64,
    trunc_k: u64,
    /// prefix[j] = sum_{k<=j} bit_k * 2 r_k, built lazily on first use.
    prefix: Option<Vec<f64>>,
}

impl LipschitzScenario {
    /// `truncation_tol` bounds the dropped tail: the truncation index K
    /// satisfies `sum_{k>K} 1/(2k^2) <= 1/(2K) <= truncation_tol`.
    pub fn new(xi: BitStream, truncation_tol: f64) -> Result<Self> {
        if !(truncation_tol > 0.0) {
            return Err(CoreError::Domain("truncation tolerance must be positive".into()));
        }
        let trunc_k = (1.0 / (2.0 * truncation_tol)).ceil().max(1.0) as u64;
        if trunc_k > (1 << 30) {
            return Err(CoreError::Capacity(format!(
                "truncation tolerance {truncation_tol} needs {trunc_k} bits per sample"
            )));
        }
        Ok(LipschitzScenario {
            xi,
            truncation_tol,
            trunc_k,
            prefix: None,
        })
    }

    pub fn from_seed(seed: u64, truncation_tol: f64) -> Result<Self> {
        Self::new(BitStream::new(seed), truncation_tol)
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    pub fn bit(&mut self, k: u64) -> Result<u8> {
        self.xi.bit(k)
    }

    /// The square wave `g(xi, x)`.
    pub fn eval_g(&mut self, x: f64) -> Result<u8> {
        match active_bump(x)? {
            Some(k) => self.xi.bit(k),
            None => Ok(0),
        }
    }

    fn ensure_prefix(&mut self) -> Result<()> {
        if self.prefix.is_some() {
            return Ok(());
        }
        let mut prefix = Vec::with_capacity(self.trunc_k as usize + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for k in 1..=self.trunc_k {
            acc += self.xi.bit(k)? as f64 * 2.0 * r_k(k);
            prefix.push(acc);
        }
        self.prefix = Some(prefix);
        Ok(())
    }

    /// Enclosure of `f(xi, x)`: the exact truncated sum plus the
    /// nonnegative tail bound, so `[v, v + tol]` contains the true value.
    pub fn eval_f(&mut self, x: f64) -> Result<Interval> {
        let m = x.max(0.0);
        if m == 0.0 {
            return Interval::new(0.0, 0.0);
        }
        self.ensure_prefix()?;
        let prefix = self.prefix.as_ref().unwrap();
        // Windows fully inside (0, m) have 1/k + r_k <= m; at most two
        // further candidates can overlap partially.
        let k_full = first_fully_covered(m, self.trunc_k);
        let mut v = prefix[self.trunc_k as usize] - prefix[(k_full - 1) as usize];
        for k in (k_full.saturating_sub(2).max(1))..k_full {
            let overlap = overlap_len(m, k);
            if overlap > 0.0 {
                v += self.xi.bit(k)? as f64 * overlap;
            }
        }
        let tail = 1.0 / (2.0 * self.trunc_k as f64);
        Interval::new(v, v + tail)
    }

    /// Clarke subdifferential of `f(xi, .)` at `x != 0`.
    ///
    /// At `x = 0`, the accumulation point of the windows, a conservative
    /// enclosure `[0, 1]` is returned with the flag set.
    pub fn clarke_subdiff(&mut self, x: f64) -> Result<ClarkeInterval> {
        if x == 0.0 {
            return Ok(ClarkeInterval {
                interval: Interval::new(0.0, 1.0)?,
                at_accumulation_point: true,
            });
        }
        let interval = match active_bump(x)? {
            Some(k) => {
                let lo_k = p_k(k) - r_k(k);
                let hi_k = p_k(k) + r_k(k);
                let bit = self.xi.bit(k)?;
                if x == lo_k || x == hi_k {
                    // Window endpoint: one-sided derivatives are bit and 0.
                    if bit == 1 {
                        Interval::new(0.0, 1.0)?
                    } else {
                        Interval::singleton(0.0)
                    }
                } else {
                    Interval::singleton(bit as f64)
                }
            }
            None => {
                // Interior of a constancy region of g; check whether x sits
                // exactly on a neighboring window's closed endpoint.
                let mut result = Interval::singleton(0.0);
                if x > 0.0 {
                    let k0 = (1.0 / x).floor();
                    for kf in [k0 - 1.0, k0, k0 + 1.0] {
                        if kf < 1.0 || kf > ACTIVE_K_CAP as f64 {
                            continue;
                        }
                        let k = kf as u64;
                        if (x == p_k(k) - r_k(k) || x == p_k(k) + r_k(k))
                            && self.xi.bit(k)? == 1
                        {
                            result = Interval::new(0.0, 1.0)?;
                        }
                    }
                }
                result
            }
        };
        Ok(ClarkeInterval {
            interval,
            at_accumulation_point: false,
        })
    }
}

/// Clarke subdifferential value with an accumulation-point flag for x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkeInterval {
    pub interval: Interval,
    pub at_accumulation_point: bool,
}

/// Smallest k <= trunc_k with window fully inside (0, m); trunc_k + 1 if none.
fn first_fully_covered(m: f64, trunc_k: u64) -> u64 {
    // 1/k + r_k <= m starts holding around k ~ 1/m; search the few
    // candidates near it.
    if m >= 1.0 + 0.25 {
        return 1;
    }
    let guess = (1.0 / m).floor().max(1.0) as u64;
    for k in guess.saturating_sub(2).max(1)..=(guess + 3) {
        if p_k(k) + r_k(k) <= m {
            return k.min(trunc_k + 1);
        }
    }
    trunc_k + 1
}

/// Length of `[0, m] ∩ B_k`.
fn overlap_len(m: f64, k: u64) -> f64 {
    let lo = (p_k(k) - r_k(k)).max(0.0);
    let hi = (p_k(k) + r_k(k)).min(m);
    (hi - lo).max(0.0)
}

/// Enclosure of the expectation `E[f(xi, x)] = (1/2) sum_k |[0, max(x,0)] ∩ B_k|`.
pub fn expected_f(x: f64, truncation_tol: f64) -> Result<Interval> {
    if !(truncation_tol > 0.0) {
        return Err(CoreError::Domain("truncation tolerance must be positive".into()));
    }
    let m = x.max(0.0);
    if m == 0.0 {
        return Interval::new(0.0, 0.0);
    }
    let trunc_k = (1.0 / (2.0 * truncation_tol)).ceil().max(1.0) as u64;
    let mut v = 0.0;
    for k in 1..=trunc_k {
        let o = overlap_len(m, k);
        if o == 0.0 && p_k(k) + r_k(k) < m {
            break;
        }
        v += 0.5 * o;
    }
    let tail = 0.5 / (2.0 * trunc_k as f64);
    Interval::new(v, v + tail)
}

/// `E[grad f(xi, y)] = E[bit_k] = 1/2` for any `y` in the certified ball.
pub fn expected_grad_ball(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(CoreError::Domain("k must be >= 1".into()));
    }
    Ok(0.5)
}

/// Exact rational average `(1/nu) sum_i bit_k(xi^i)` for `y` in the
/// certified ball `B(p_k, Delta_k)`, returned as `(sum_of_bits, nu)`.
pub fn empirical_avg_grad(
    scenarios: &mut [LipschitzScenario],
    y: f64,
    k: u64,
) -> Result<(u64, u64)> {
    if k == 0 {
        return Err(CoreError::Domain("k must be >= 1".into()));
    }
    if scenarios.is_empty() {
        return Err(CoreError::Domain("need at least one scenario".into()));
    }
    if (y - p_k(k)).abs() > delta_k(k) {
        return Err(CoreError::Domain(format!(
            "y = {y} is outside the certified ball B(p_{k}, Delta_{k})"
        )));
    }
    let mut sum = 0u64;
    for s in scenarios.iter_mut() {
        sum += s.bit(k)? as u64;
    }
    Ok((sum, scenarios.len() as u64))
}

/// The certified witness points `{p_k : k <= K_bound(nu)}` inside `D^nu`.
pub fn dnu_points(nu: u32) -> Result<Vec<f64>> {
    let k_max = dyadic::k_bound(nu)?;
    Ok((1..=k_max).map(p_k).collect())
}

/// Outcome of one seeded gap trial.
#[derive(Debug, Clone)]
pub struct GapOutcome {
    pub nu: u32,
    pub trial_seed: u64,
    pub k_bound: u64,
    pub k_event: Option<u64>,
    pub delta_nu: f64,
    /// Exact rational gap `|1/2 - (1/nu) sum bit|` as (num, den), reduced.
    pub gap: Option<(u64, u64)>,
}

impl GapOutcome {
    pub fn gap_f64(&self) -> Option<f64> {
        self.gap.map(|(n, d)| n as f64 / d as f64)
    }
}

/// Reduced rational `|1/2 - sum/nu| = |nu - 2 sum| / (2 nu)`.
pub(crate) fn half_gap_rational(sum: u64, nu: u64) -> (u64, u64) {
    let num = (nu as i128 - 2 * sum as i128).unsigned_abs() as u64;
    let den = 2 * nu;
    let g = num.gcd(&den).max(1);
    (num / g, den / g)
}

/// One seeded trial of the gradient-gap experiment: sample `nu` streams,
/// search for the joint-bit event, and evaluate the gap at the certified
/// witness `p_k` if the event holds.
pub fn gap_experiment(nu: u32, trial_seed: u64) -> Result<GapOutcome> {
    if nu == 0 {
        return Err(CoreError::Domain("nu must be >= 1".into()));
    }
    let k_max = dyadic::k_bound(nu)?;
    let tol = 1e-6;
    let mut scenarios: Vec<LipschitzScenario> = (0..nu as u64)
        .map(|i| LipschitzScenario::from_seed(seeding::split_seed(trial_seed, i), tol))
        .collect::<Result<_>>()?;
    let k_event = {
        // Search directly on the scenarios' bits.
        let mut found = None;
        'outer: for k in 1..=k_max {
            for s in scenarios.iter_mut() {
                if s.bit(k)? == 0 {
                    continue 'outer;
                }
            }
            found = Some(k);
            break;
        }
        found
    };
    let gap = match k_event {
        Some(k) => {
            let (sum, n) = empirical_avg_grad(&mut scenarios, p_k(k), k)?;
            Some(half_gap_rational(sum, n))
        }
        None => None,
    };
    Ok(GapOutcome {
        nu,
        trial_seed,
        k_bound: k_max,
        k_event,
        delta_nu: delta_nu(nu)?,
        gap,
    })
}
