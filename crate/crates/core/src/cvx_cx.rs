//! The random-convex counterexample family in the plane.
//!
//! A quintic smoothstep builds a C^2 bump `rho` with `|rho'| <= 30` and
//! `|rho''| <= 30`. Scaled copies `psi_k(t) = eta_k rho((t - 1/k)/r_k)`
//! with `r_k = 1/(8k^2)` and `eta_k = r_k^2` have disjoint supports, and
//!
//!   `g(xi, x) = x_1 + sum_k psi_k(x_2) (2 bit_k(xi) - 1)`
//!
//! is 70-Lipschitz and 70-smooth, so `f = max{g, 0} + 35 |x|^2` is convex.
//! On the certified balls `B(p_k, Delta_k)` with `p_k = (0, 1/k)` and
//! `Delta_k = 1/(2240 k^4)` the sign of `g` equals `2 bit_k - 1`, the
//! gradient of `f` is `(bit_k, 0) + 70 y`, and the joint-bit event forces
//! an exact empirical-vs-expected gradient gap of 1/2.

use crate::dyadic::{self, BitStream};
use crate::error::{CoreError, Result};
use crate::lip_cx::half_gap_rational;
use crate::seeding;
use crate::setval::{ConvexSet, Segment2, Vec2};

/// Curvature constant: `f = max{g, 0} + (C/2) |x|^2` with C = 70.
pub const C_SMOOTH: f64 = 70.0;

/// Largest bump index considered when locating the active bump.
pub const ACTIVE_K_CAP: u64 = 1 << 26;

/// Bump radius `r_k = 1/(8k^2)`.
pub fn r_k(k: u64) -> f64 {
    1.0 / (8.0 * (k as f64) * (k as f64))
}

/// Bump height `eta_k = r_k^2 = 1/(64k^4)`.
pub fn eta_k(k: u64) -> f64 {
    let kf = k as f64;
    1.0 / (64.0 * kf * kf * kf * kf)
}

/// Witness center `p_k = (0, 1/k)`.
pub fn p_k(k: u64) -> Vec2 {
    Vec2::new(0.0, 1.0 / k as f64)
}

/// Certified smoothness radius `Delta_k = 1/(32 C k^4) = 1/(2240 k^4)`.
pub fn delta_k(k: u64) -> f64 {
    let kf = k as f64;
    1.0 / (2240.0 * kf * kf * kf * kf)
}

/// `delta^nu = (2240 * K_bound(nu)^4)^-1 = Delta_{K_bound(nu)}`.
pub fn delta_nu(nu: u32) -> Result<f64> {
    let k = dyadic::k_bound(nu)? as f64;
    Ok(1.0 / (2240.0 * k * k * k * k))
}

/// The quintic smoothstep `theta(t) = 6t^5 - 15t^4 + 10t^3`.
pub fn smoothstep(t: f64) -> f64 {
    ((6.0 * t - 15.0) * t + 10.0) * t * t * t
}

pub fn smoothstep_d1(t: f64) -> f64 {
    // 30 t^2 (t - 1)^2
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

pub fn smoothstep_d2(t: f64) -> f64 {
    // 60 t (2t - 1)(t - 1)
    60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
}

/// C^2 bump: 1 on [-1/2, 1/2], 0 outside (-1, 1), `1 - theta(2|t| - 1)`
/// in between. Satisfies `|rho'| <= 30`, `|rho''| <= 30`.
pub fn bump(t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 {
        0.0
    } else if a <= 0.5 {
        1.0
    } else {
        1.0 - smoothstep(2.0 * a - 1.0)
    }
}

pub fn bump_d1(t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 || a <= 0.5 {
        0.0
    } else {
        -2.0 * smoothstep_d1(2.0 * a - 1.0) * t.signum()
    }
}

pub fn bump_d2(t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 || a <= 0.5 {
        0.0
    } else {
        -4.0 * smoothstep_d2(2.0 * a - 1.0)
    }
}

/// `psi_k(t) = eta_k rho((t - 1/k)/r_k)`.
pub fn psi(k: u64, t: f64) -> f64 {
    eta_k(k) * bump((t - 1.0 / k as f64) / r_k(k))
}

/// `psi_k'(t) = r_k rho'((t - 1/k)/r_k)` since `eta_k / r_k = r_k`.
pub fn psi_d1(k: u64, t: f64) -> f64 {
    r_k(k) * bump_d1((t - 1.0 / k as f64) / r_k(k))
}

/// `psi_k''(t) = rho''((t - 1/k)/r_k)` since `eta_k / r_k^2 = 1`.
pub fn psi_d2(k: u64, t: f64) -> f64 {
    bump_d2((t - 1.0 / k as f64) / r_k(k))
}

/// The bump whose support contains `t`, if any (supports are disjoint).
pub fn active_bump(t: f64) -> Result<Option<u64>> {
    if t <= 0.0 || !t.is_finite() {
        return Ok(None);
    }
    let k0 = (1.0 / t).floor();
    for kf in [k0 - 1.0, k0, k0 + 1.0] {
        if kf < 1.0 {
            continue;
        }
        if (t - 1.0 / kf).abs() < 1.0 / (8.0 * kf * kf) {
            if kf > ACTIVE_K_CAP as f64 {
                return Err(CoreError::Capacity(format!(
                    "active bump index {kf} exceeds cap {ACTIVE_K_CAP}"
                )));
            }
            return Ok(Some(kf as u64));
        }
    }
    Ok(None)
}

/// One sampled function of the convex family.
pub struct ConvexScenario {
    xi: BitStream,
}

impl ConvexScenario {
    pub fn new(xi: BitStream) -> Self {
        ConvexScenario { xi }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(BitStream::new(seed))
    }

    pub fn bit(&mut self, k: u64) -> Result<u8> {
        self.xi.bit(k)
    }

    fn sign_term(&mut self, k: u64) -> Result<f64> {
        Ok(2.0 * self.xi.bit(k)? as f64 - 1.0)
    }

    /// `g(xi, x) = x_1 + sum_k psi_k(x_2)(2 bit_k - 1)`; at most one bump
    /// is active because the supports are disjoint.
    pub fn eval_g(&mut self, x: Vec2) -> Result<f64> {
        let mut v = x.x;
        if let Some(k) = active_bump(x.y)? {
            v += psi(k, x.y) * self.sign_term(k)?;
        }
        Ok(v)
    }

    /// `grad g(xi, x) = (1, sum_k psi_k'(x_2)(2 bit_k - 1))`.
    pub fn grad_g(&mut self, x: Vec2) -> Result<Vec2> {
        let mut dy = 0.0;
        if let Some(k) = active_bump(x.y)? {
            dy = psi_d1(k, x.y) * self.sign_term(k)?;
        }
        Ok(Vec2::new(1.0, dy))
    }

    /// `f(xi, x) = max{g(xi, x), 0} + 35 |x|^2`.
    pub fn eval_f(&mut self, x: Vec2) -> Result<f64> {
        let g = self.eval_g(x)?;
        Ok(g.max(0.0) + 35.0 * x.dot(x))
    }

    /// Subdifferential of `f(xi, .)` by the max rule: a singleton away from
    /// the switching surface `g = 0`, and the exact segment
    /// `{t grad g + 70x : t in [0,1]}` on it.
    pub fn subdiff_f(&mut self, x: Vec2) -> Result<Segment2> {
        let g = self.eval_g(x)?;
        let quad = x.scale(C_SMOOTH);
        if g > 0.0 {
            let grad = self.grad_g(x)?;
            Ok(Segment2::point(quad.add(grad)))
        } else if g < 0.0 {
            Ok(Segment2::point(quad))
        } else {
            let grad = self.grad_g(x)?;
            Ok(Segment2::new(quad, grad))
        }
    }
}

/// `E[grad f(xi, y)] = (1/2, 0) + 70 y` for `y` in the certified ball.
pub fn expected_grad_ball(k: u64, y: Vec2) -> Result<Vec2> {
    check_certified(k, y)?;
    Ok(Vec2::new(0.5, 0.0).add(y.scale(C_SMOOTH)))
}

fn check_certified(k: u64, y: Vec2) -> Result<()> {
    if k == 0 {
        return Err(CoreError::Domain("k must be >= 1".into()));
    }
    if y.sub(p_k(k)).norm() > delta_k(k) {
        return Err(CoreError::Domain(format!(
            "y = ({}, {}) is outside the certified ball around p_{k}",
            y.x, y.y
        )));
    }
    Ok(())
}

/// Minkowski average of the gradient singletons `{(bit_k, 0) + 70 y}` over
/// the samples; always a singleton set.
pub fn empirical_avg_subdiff(
    scenarios: &mut [ConvexScenario],
    y: Vec2,
    k: u64,
) -> Result<ConvexSet> {
    check_certified(k, y)?;
    if scenarios.is_empty() {
        return Err(CoreError::Domain("need at least one scenario".into()));
    }
    let singletons: Vec<ConvexSet> = scenarios
        .iter_mut()
        .map(|s| {
            let bit = s.bit(k)? as f64;
            Ok(ConvexSet::Segment(Segment2::point(
                Vec2::new(bit, 0.0).add(y.scale(C_SMOOTH)),
            )))
        })
        .collect::<Result<_>>()?;
    crate::setval::minkowski_average(&singletons)
}

/// Outcome of one seeded 2-D gap trial.
#[derive(Debug, Clone)]
pub struct GapOutcome2 {
    pub nu: u32,
    pub trial_seed: u64,
    pub k_bound: u64,
    pub k_event: Option<u64>,
    pub delta_nu: f64,
    /// Exact rational gap (num, den); the `70y` terms cancel.
    pub gap: Option<(u64, u64)>,
    /// The worst-case perturbed lower bound `1/2 - 140 delta^nu`.
    pub perturbed_lower_bound: f64,
}

impl GapOutcome2 {
    pub fn gap_f64(&self) -> Option<f64> {
        self.gap.map(|(n, d)| n as f64 / d as f64)
    }
}

/// One seeded trial: sample `nu` streams, find the joint-bit event, and
/// evaluate the gradient gap at `y = p_k` where the `70y` terms cancel,
/// leaving `|1/2 - (1/nu) sum bit_k|` exactly.
pub fn gap_experiment_2d(nu: u32, trial_seed: u64) -> Result<GapOutcome2> {
    if nu == 0 {
        return Err(CoreError::Domain("nu must be >= 1".into()));
    }
    let k_max = dyadic::k_bound(nu)?;
    let mut scenarios: Vec<ConvexScenario> = (0..nu as u64)
        .map(|i| ConvexScenario::from_seed(seeding::split_seed(trial_seed, i)))
        .collect();
    let mut k_event = None;
    'outer: for k in 1..=k_max {
        for s in scenarios.iter_mut() {
            if s.bit(k)? == 0 {
                continue 'outer;
            }
        }
        k_event = Some(k);
        break;
    }
    let gap = match k_event {
        Some(k) => {
            let mut sum = 0u64;
            for s in scenarios.iter_mut() {
                sum += s.bit(k)? as u64;
            }
            Some(half_gap_rational(sum, nu as u64))
        }
        None => None,
    };
    let d = delta_nu(nu)?;
    Ok(GapOutcome2 {
        nu,
        trial_seed,
        k_bound: k_max,
        k_event,
        delta_nu: d,
        gap,
        perturbed_lower_bound: 0.5 - 2.0 * C_SMOOTH * d,
    })
}
