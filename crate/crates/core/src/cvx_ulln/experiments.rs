//! Uniform-law convergence experiments on univariate convex scenarios.
//!
//! The built-in continuous distribution is the median example
//! `f(xi, x) = max{x - xi_1, 0} + max{xi_2 - x, 0}` with `xi_1` uniform on
//! `[0, 1]` and `xi_2 = 2`, whose expectation `E f(x) = x^2/2 + (2 - x)_+`
//! on `[0, 1]` has the exact subdifferential curve `x - 1` there, `0` on
//! `[1, 2]`, and `1` beyond, with the kink interval `[0, 1]` at `x = 2`.
//! Discrete distributions are supported in full generality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::seeding;
use crate::setval::{hausdorff_intervals, Interval};

use super::curve::{sup_hausdorff_gap, CertifiedSubdiffCurve};
use super::pwl::{average, weighted_average, PiecewiseLinearConvex};

/// One atom of a discrete scenario distribution.
#[derive(Debug, Clone)]
pub struct Atom {
    pub prob: f64,
    pub f: PiecewiseLinearConvex,
}

/// A distribution over univariate convex Lipschitz scenarios.
#[derive(Debug, Clone)]
pub enum ScenarioDistribution {
    /// The continuous median example on the window `[0, 3]`.
    MedianExample,
    /// Finitely many PWL atoms with probabilities summing to one.
    Discrete(Vec<Atom>),
}

impl ScenarioDistribution {
    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(CoreError::EmptySet);
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| !(a.prob > 0.0)) {
            return Err(CoreError::Domain(format!(
                "atom probabilities must be positive and sum to 1 (got {total})"
            )));
        }
        if atoms.iter().any(|a| a.f.domain().is_some()) {
            return Err(CoreError::Unsupported(
                "scenario functions must be finite on the whole line".into(),
            ));
        }
        Ok(ScenarioDistribution::Discrete(atoms))
    }

    /// The natural evaluation window: all scenario and expectation
    /// breakpoints, beyond which every subdifferential saturates.
    pub fn default_window(&self) -> Interval {
        match self {
            ScenarioDistribution::MedianExample => Interval { lo: 0.0, hi: 3.0 },
            ScenarioDistribution::Discrete(atoms) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for a in atoms {
                    for &b in a.f.breakpoints() {
                        lo = lo.min(b);
                        hi = hi.max(b);
                    }
                }
                if lo > hi {
                    // All atoms affine: any window works.
                    (lo, hi) = (0.0, 1.0);
                }
                Interval { lo: lo - 1.0, hi: hi + 1.0 }
            }
        }
    }

    /// Draw one scenario.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<PiecewiseLinearConvex> {
        match self {
            ScenarioDistribution::MedianExample => {
                let xi: f64 = rng.gen_range(0.0..1.0);
                // max{x - xi, 0} + max{2 - x, 0}.
                PiecewiseLinearConvex::new(
                    None,
                    vec![xi, 2.0],
                    vec![-1.0, 0.0, 1.0],
                    (xi, 2.0 - xi),
                )
            }
            ScenarioDistribution::Discrete(atoms) => {
                let u: f64 = rng.gen_range(0.0..1.0);
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return Ok(a.f.clone());
                    }
                }
                Ok(atoms.last().unwrap().f.clone())
            }
        }
    }

    /// The expectation `E f` as a PWL function (discrete only; the median
    /// example's expectation is piecewise quadratic).
    pub fn expected_pwl(&self) -> Result<PiecewiseLinearConvex> {
        match self {
            ScenarioDistribution::MedianExample => Err(CoreError::Unsupported(
                "the median example's expectation is not piecewise linear".into(),
            )),
            ScenarioDistribution::Discrete(atoms) => {
                let terms: Vec<(f64, &PiecewiseLinearConvex)> =
                    atoms.iter().map(|a| (a.prob, &a.f)).collect();
                weighted_average(&terms)
            }
        }
    }

    /// The certified expected subdifferential curve on the window.
    pub fn expected_curve(&self, window: Interval) -> Result<CertifiedSubdiffCurve> {
        match self {
            ScenarioDistribution::MedianExample => {
                if window.lo > 0.0 || window.hi < 2.0 {
                    return Err(CoreError::Domain(
                        "median-example window must contain [0, 2]".into(),
                    ));
                }
                // dE f(x): x - 1 on (0, 1), 0 on (1, 2), [0, 1] at 2,
                // 1 beyond; -1 below 0.
                let mut breakpoints = Vec::new();
                let mut pieces = Vec::new();
                if window.lo < 0.0 {
                    breakpoints.push(window.lo);
                    pieces.push((-1.0, 0.0));
                }
                breakpoints.push(0.0);
                pieces.push((-1.0, 1.0));
                breakpoints.push(1.0);
                pieces.push((0.0, 0.0));
                breakpoints.push(2.0);
                if window.hi > 2.0 {
                    pieces.push((1.0, 0.0));
                    breakpoints.push(window.hi);
                }
                CertifiedSubdiffCurve::new(breakpoints, pieces)
            }
            ScenarioDistribution::Discrete(_) => {
                CertifiedSubdiffCurve::from_pwl(&self.expected_pwl()?, window)
            }
        }
    }

    /// `E[L(xi)]` for the per-scenario Lipschitz constants
    /// `L = max(|first slope|, |last slope|)`.
    pub fn expected_lipschitz(&self) -> f64 {
        match self {
            ScenarioDistribution::MedianExample => 1.0,
            ScenarioDistribution::Discrete(atoms) => atoms
                .iter()
                .map(|a| {
                    a.prob * a.f.slopes()[0].abs().max(a.f.slopes().last().unwrap().abs())
                })
                .sum(),
        }
    }

    /// `(E[l(xi)], E[u(xi)])`: expectations of the extreme slopes, the
    /// limits of the right directional derivative at -/+ infinity.
    pub fn expected_extreme_slopes(&self) -> (f64, f64) {
        match self {
            ScenarioDistribution::MedianExample => (-1.0, 1.0),
            ScenarioDistribution::Discrete(atoms) => {
                let l = atoms.iter().map(|a| a.prob * a.f.slopes()[0]).sum();
                let u = atoms.iter().map(|a| a.prob * a.f.slopes().last().unwrap()).sum();
                (l, u)
            }
        }
    }
}

/// One trial row of a convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub nu: u64,
    pub seed_index: u64,
    pub trial_seed: u64,
    pub gap: f64,
}

/// Full outcome: all rows plus the per-nu medians (in nu_list order).
#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub rows: Vec<ConvergenceRow>,
    pub medians: Vec<(u64, f64)>,
    /// For grid-based experiments: bound on the sup estimation error.
    pub grid_error_bound: Option<f64>,
}

fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The exact uniform-law experiment: for each `nu` and seed, draw `nu`
/// scenarios, average them, and take the exact sup of the Hausdorff
/// distance between the subdifferentials over the window.
pub fn ulln_experiment(
    dist: &ScenarioDistribution,
    nu_list: &[u64],
    n_seeds: u64,
    master_seed: u64,
    window: Interval,
) -> Result<ConvergenceOutcome> {
    if nu_list.is_empty() || n_seeds == 0 || nu_list.iter().any(|&n| n == 0) {
        return Err(CoreError::Domain("need nu >= 1 and at least one seed".into()));
    }
    let curve = dist.expected_curve(window)?;
    let mut rows = Vec::new();
    let mut medians = Vec::new();
    let mut trial_index = 0u64;
    for &nu in nu_list {
        let mut gaps = Vec::with_capacity(n_seeds as usize);
        for seed_index in 0..n_seeds {
            let trial_seed = seeding::split_seed(master_seed, trial_index);
            trial_index += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let scenarios: Vec<PiecewiseLinearConvex> = (0..nu)
                .map(|_| dist.sample(&mut rng))
                .collect::<Result<_>>()?;
            let empirical = average(&scenarios)?;
            let gap = sup_hausdorff_gap(&curve, &empirical)?;
            gaps.push(gap);
            rows.push(ConvergenceRow { nu, seed_index, trial_seed, gap });
        }
        medians.push((nu, median_of(gaps)));
    }
    Ok(ConvergenceOutcome { rows, medians, grid_error_bound: None })
}

/// The fixed-epsilon uniform law on a discrete distribution: the gap is the
/// max over a breakpoint-refined grid of the Hausdorff distance between the
/// epsilon-subdifferential intervals of `E f` and of the empirical average,
/// with a continuity-modulus bound on the grid error.
pub fn eps_ulln_experiment(
    dist: &ScenarioDistribution,
    epsilon: f64,
    nu_list: &[u64],
    n_seeds: u64,
    master_seed: u64,
    window: Interval,
    grid_points: usize,
) -> Result<ConvergenceOutcome> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Domain(
            "epsilon must be positive; epsilon = 0 is the counterexample regime".into(),
        ));
    }
    if !matches!(dist, ScenarioDistribution::Discrete(_)) {
        return Err(CoreError::Unsupported(
            "the fixed-epsilon law needs a discrete distribution (PWL expectation)".into(),
        ));
    }
    if nu_list.is_empty() || n_seeds == 0 || nu_list.iter().any(|&n| n == 0) || grid_points < 2 {
        return Err(CoreError::Domain("invalid experiment shape".into()));
    }
    let expected = dist.expected_pwl()?;
    let expected_conj = expected.legendre_transform()?;
    // Hausdorff-continuity modulus of x -> d^eps f(x): both endpoint maps
    // are S^2/eps-Lipschitz in x, where S bounds the slope spread (the
    // level function's s-slope is at least eps/S at the crossing and the
    // x-derivative of the level values is at most S).
    let slope_spread = {
        let s = expected.slopes();
        (s.last().unwrap() - s[0]).abs().max(1.0)
    };
    let h = window.width() / grid_points as f64;
    let grid_error_bound = 2.0 * slope_spread * slope_spread / epsilon * h;

    let mut grid: Vec<f64> = (0..=grid_points)
        .map(|i| window.lo + window.width() * i as f64 / grid_points as f64)
        .collect();
    grid.extend(expected.breakpoints().iter().copied().filter(|b| window.contains(*b)));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let mut rows = Vec::new();
    let mut medians = Vec::new();
    let mut trial_index = 0u64;
    for &nu in nu_list {
        let mut gaps = Vec::with_capacity(n_seeds as usize);
        for seed_index in 0..n_seeds {
            let trial_seed = seeding::split_seed(master_seed, trial_index);
            trial_index += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let scenarios: Vec<PiecewiseLinearConvex> = (0..nu)
                .map(|_| dist.sample(&mut rng))
                .collect::<Result<_>>()?;
            let empirical = average(&scenarios)?;
            let empirical_conj = empirical.legendre_transform()?;
            let mut trial_grid = grid.clone();
            trial_grid.extend(
                empirical.breakpoints().iter().copied().filter(|b| window.contains(*b)),
            );
            trial_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            trial_grid.dedup();
            let mut gap = 0.0f64;
            for &x in &trial_grid {
                let a = expected.eps_subdiff_with_conjugate(&expected_conj, x, epsilon)?;
                let b = empirical.eps_subdiff_with_conjugate(&empirical_conj, x, epsilon)?;
                gap = gap.max(hausdorff_intervals(&a, &b));
            }
            gaps.push(gap);
            rows.push(ConvergenceRow { nu, seed_index, trial_seed, gap });
        }
        medians.push((nu, median_of(gaps)));
    }
    Ok(ConvergenceOutcome {
        rows,
        medians,
        grid_error_bound: Some(grid_error_bound),
    })
}
