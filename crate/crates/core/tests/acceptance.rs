//! Acceptance suite: one test per criterion, with pinned seeds and
//! tolerances. Each test prints a single PASS line with its headline
//! numbers so `cargo test -- --nocapture` doubles as a report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subdiff_core::cvx_ulln::experiments::Atom;
use subdiff_core::{
    cvx_cx, eps_ulln_experiment, gap_experiment, gap_experiment_2d, hausdorff, joint_bit_trial,
    k_bound, lip_cx, minkowski_average, shatter_witness, split_seed, ulln_experiment, ConvexSet,
    Interval, PiecewiseLinearConvex, ScenarioDistribution, Segment2, Vec2,
};

/// Criterion 1: 1-D Lipschitz family, nu = 8, 100 trials. The joint-bit
/// event is found in >= 95% of trials and every found gap is exactly 1/2.
#[test]
fn criterion_1_gap_lip() {
    let nu = 8;
    let trials = 100u64;
    let mut found = 0u64;
    for t in 0..trials {
        let out = gap_experiment(nu, split_seed(0xACCE_0001, t)).unwrap();
        if out.k_event.is_some() {
            found += 1;
            assert_eq!(out.gap, Some((1, 2)), "trial {t}: gap must be exactly 1/2");
        }
    }
    assert!(
        found * 100 >= 95 * trials,
        "joint-bit event found in only {found}/{trials} trials"
    );
    println!("PASS criterion 1: {found}/{trials} trials found, every gap exactly 1/2");
}

/// Criterion 2: 2-D convex family, same protocol; the perturbed lower
/// bound matches 1/2 - 140 * (2240 K^4)^-1 bitwise.
#[test]
fn criterion_2_gap_cvx() {
    let nu = 8;
    let trials = 100u64;
    let k = k_bound(nu).unwrap() as f64;
    let expected_bound = 0.5 - 140.0 * (1.0 / (2240.0 * k * k * k * k));
    let mut found = 0u64;
    for t in 0..trials {
        let out = gap_experiment_2d(nu, split_seed(0xACCE_0002, t)).unwrap();
        assert_eq!(
            out.perturbed_lower_bound.to_bits(),
            expected_bound.to_bits(),
            "perturbed lower bound must match the formula to full precision"
        );
        if out.k_event.is_some() {
            found += 1;
            assert_eq!(out.gap, Some((1, 2)), "trial {t}: gap must be exactly 1/2");
        }
    }
    assert!(
        found * 100 >= 95 * trials,
        "joint-bit event found in only {found}/{trials} trials"
    );
    println!(
        "PASS criterion 2: {found}/{trials} trials found, gap 1/2, bound {expected_bound:.17}"
    );
}

/// Criterion 3: joint-bit event frequency at nu = 6 over 2000 trials;
/// empirical failure fraction <= 1/49 + 3 sqrt((1/49)/2000).
#[test]
fn criterion_3_gadget_frequency() {
    let nu = 6;
    let trials = 2000u64;
    let mut failures = 0u64;
    for t in 0..trials {
        if joint_bit_trial(nu, split_seed(0xACCE_0003, t)).unwrap().is_none() {
            failures += 1;
        }
    }
    let fraction = failures as f64 / trials as f64;
    let p = 1.0 / 49.0;
    let bound = p + 3.0 * (p / trials as f64).sqrt();
    assert!(
        fraction <= bound,
        "failure fraction {fraction} exceeds {bound}"
    );
    println!("PASS criterion 3: failure fraction {fraction:.4} <= {bound:.4}");
}

/// Criterion 4: sampled convexity of f(xi, .), Lipschitz ratios of g
/// bounded by 70, and |rho'|, |rho''| bounded by 30, all with relative
/// slack 1e-9.
#[test]
fn criterion_4_convexity_and_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let slack = 1.0 + 1e-9;
    // Convexity: f(l x + (1-l) y) <= l f(x) + (1-l) f(y) + 1e-9.
    let mut scenario = cvx_cx::ConvexScenario::from_seed(split_seed(0xACCE_0004, 1));
    for _ in 0..100_000 {
        let x = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.3..1.5));
        let y = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.3..1.5));
        let l: f64 = rng.gen_range(0.0..1.0);
        let mid = x.scale(l).add(y.scale(1.0 - l));
        let fm = scenario.eval_f(mid).unwrap();
        let fx = scenario.eval_f(x).unwrap();
        let fy = scenario.eval_f(y).unwrap();
        assert!(
            fm <= l * fx + (1.0 - l) * fy + 1e-9,
            "convexity violated at {x:?}, {y:?}, l={l}"
        );
    }
    // Lipschitz ratios of g.
    for _ in 0..100_000 {
        let x = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.2));
        let y = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.2));
        let d = x.sub(y).norm();
        if d == 0.0 {
            continue;
        }
        let gx = scenario.eval_g(x).unwrap();
        let gy = scenario.eval_g(y).unwrap();
        assert!(
            (gx - gy).abs() <= cvx_cx::C_SMOOTH * slack * d,
            "Lipschitz ratio of g exceeds 70 at {x:?}, {y:?}"
        );
    }
    // Bump derivative bounds.
    for _ in 0..100_000 {
        let t = rng.gen_range(-1.0..1.0);
        assert!(cvx_cx::bump_d1(t).abs() <= 30.0 * slack, "|rho'| > 30 at t={t}");
        assert!(cvx_cx::bump_d2(t).abs() <= 30.0 * slack, "|rho''| > 30 at t={t}");
    }
    println!("PASS criterion 4: convexity, Lipschitz(g) <= 70, |rho'|,|rho''| <= 30");
}

/// Criterion 5: median-example convergence on X = [0, 3]. Median over 20
/// seeds of the sup Hausdorff gap at nu = 2^14 is <= 0.05 and <= 1/4 of its
/// value at nu = 2^6; per-nu medians are non-increasing.
#[test]
fn criterion_5_median_example_convergence() {
    let dist = ScenarioDistribution::MedianExample;
    let nu_list = [64u64, 256, 1024, 4096, 16384];
    let out = ulln_experiment(&dist, &nu_list, 20, 0xACCE_0005, dist.default_window()).unwrap();
    let medians: Vec<f64> = out.medians.iter().map(|&(_, m)| m).collect();
    for w in medians.windows(2) {
        assert!(w[1] <= w[0], "per-nu medians must be non-increasing: {medians:?}");
    }
    let first = medians[0];
    let last = *medians.last().unwrap();
    assert!(last <= 0.05, "median gap at nu=2^14 is {last}, want <= 0.05");
    assert!(last <= first / 4.0, "median gap {last} not <= 1/4 of {first}");
    println!("PASS criterion 5: medians {medians:?}");
}

/// Criterion 6: epsilon-subdifferential convergence for a two-atom hinge
/// mixture at eps = 0.1; median gap at nu = 10^4 is <= 0.05 and per-nu
/// medians are non-increasing.
#[test]
fn criterion_6_two_atom_eps_convergence() {
    let atoms = vec![
        Atom { prob: 0.5, f: PiecewiseLinearConvex::hinge(0.25).unwrap() },
        Atom { prob: 0.5, f: PiecewiseLinearConvex::hinge(0.75).unwrap() },
    ];
    let dist = ScenarioDistribution::discrete(atoms).unwrap();
    let nu_list = [100u64, 1000, 10_000];
    let out = eps_ulln_experiment(
        &dist,
        0.1,
        &nu_list,
        20,
        0xACCE_0006,
        dist.default_window(),
        256,
    )
    .unwrap();
    let medians: Vec<f64> = out.medians.iter().map(|&(_, m)| m).collect();
    for w in medians.windows(2) {
        assert!(w[1] <= w[0], "per-nu medians must be non-increasing: {medians:?}");
    }
    let last = *medians.last().unwrap();
    assert!(last <= 0.05, "median gap at nu=10^4 is {last}, want <= 0.05");
    println!("PASS criterion 6: medians {medians:?}");
}

// ---------------------------------------------------------------------------
// Criterion 7: oracle suites.
// ---------------------------------------------------------------------------

/// Random convex PWL on the dyadic grid (multiples of 1/64 in [-4, 4]):
/// all arithmetic in eval and the double Legendre transform stays exact.
fn random_dyadic_pwl(rng: &mut ChaCha8Rng, bounded: bool) -> PiecewiseLinearConvex {
    let n_bp = rng.gen_range(0..=6usize);
    let mut grid: Vec<i64> = Vec::new();
    while grid.len() < n_bp {
        let c = rng.gen_range(-192i64..=192);
        if !grid.contains(&c) {
            grid.push(c);
        }
    }
    grid.sort_unstable();
    let breakpoints: Vec<f64> = grid.iter().map(|&c| c as f64 / 64.0).collect();
    let mut slopes: Vec<f64> = Vec::with_capacity(n_bp + 1);
    let mut s = rng.gen_range(-256i64..=0);
    for _ in 0..=n_bp {
        slopes.push(s as f64 / 64.0);
        s += rng.gen_range(1i64..=64);
    }
    let anchor_x = rng.gen_range(-192i64..=192) as f64 / 64.0;
    let anchor_y = rng.gen_range(-256i64..=256) as f64 / 64.0;
    let domain = if bounded {
        let lo = -4.0;
        let hi = 4.0;
        Some(Interval::new(lo, hi).unwrap())
    } else {
        None
    };
    PiecewiseLinearConvex::new(domain, breakpoints, slopes, (anchor_x, anchor_y)).unwrap()
}

/// Criterion 7a: f** = f exactly on 10^3 random PWL instances.
#[test]
fn criterion_7a_biconjugate_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    for i in 0..1000 {
        let f = random_dyadic_pwl(&mut rng, i % 2 == 0);
        let fss = f.legendre_transform().unwrap().legendre_transform().unwrap();
        for j in -256..=256i64 {
            let x = j as f64 / 64.0;
            if let Some(d) = f.domain() {
                if !d.contains(x) {
                    continue;
                }
            }
            assert_eq!(
                f.eval(x).unwrap(),
                fss.eval(x).unwrap(),
                "f**(x) != f(x) at x={x} (instance {i})"
            );
        }
    }
    println!("PASS criterion 7a: f** = f exact on 1000 instances");
}

/// Criterion 7b: eps_subdiff matches a slope-grid brute force within the
/// grid resolution on 10^2 instances. The brute force tests membership
/// `f(x) + f*(s) - s x <= eps` directly, with `f*` evaluated as a maximum
/// of `s y - f(y)` over breakpoints (exact for full-line PWL).
#[test]
fn criterion_7b_eps_subdiff_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0017);
    for i in 0..100 {
        let f = random_dyadic_pwl(&mut rng, false);
        let eps = [0.05, 0.1, 0.5, 1.0][i % 4];
        let x = rng.gen_range(-128i64..=128) as f64 / 64.0;
        let got = f.eps_subdiff(x, eps).unwrap();
        // Independent conjugate evaluation: sup over the finitely many
        // kink points (plus the anchor when there are no breakpoints).
        let mut probes: Vec<f64> = f.breakpoints().to_vec();
        if probes.is_empty() {
            probes.push(f.anchor().0);
        }
        let conj_at = |s: f64| -> f64 {
            probes
                .iter()
                .map(|&y| s * y - f.eval(y).unwrap())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let s_min = f.slopes()[0];
        let s_max = *f.slopes().last().unwrap();
        let m = 4000usize;
        let h = (s_max - s_min) / m as f64;
        let fx = f.eval(x).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..=m {
            let s = s_min + h * j as f64;
            if fx + conj_at(s) - s * x <= eps {
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        assert!(lo.is_finite(), "brute force found an empty eps-subdifferential");
        let tol = h + 1e-9;
        assert!(
            (got.lo - lo).abs() <= tol && (got.hi - hi).abs() <= tol,
            "instance {i}: got [{}, {}], brute [{lo}, {hi}], tol {tol}",
            got.lo,
            got.hi
        );
    }
    println!("PASS criterion 7b: eps_subdiff matches brute force on 100 instances");
}

fn random_segment(rng: &mut ChaCha8Rng) -> ConvexSet {
    let base = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let dir = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    ConvexSet::Segment(Segment2::new(base, dir))
}

fn set_vertices(s: &ConvexSet) -> Vec<Vec2> {
    match s {
        ConvexSet::Polygon(p) => p.vertices().to_vec(),
        ConvexSet::Segment(seg) => vec![seg.base, seg.end()],
        ConvexSet::Interval(_) => panic!("2-D set expected"),
    }
}

/// Criterion 7c: polygon Hausdorff distance matches an independent
/// support-function oracle on 10^2 zonotope pairs. For convex compact
/// sets dl(C, D) = sup over unit directions u of |h_C(u) - h_D(u)|; the
/// oracle samples directions, converging from below at rate R * dtheta.
#[test]
fn criterion_7c_hausdorff_support_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0027);
    for i in 0..100 {
        let n = rng.gen_range(2..=8usize);
        let a: Vec<ConvexSet> = (0..n).map(|_| random_segment(&mut rng)).collect();
        let b: Vec<ConvexSet> = (0..n).map(|_| random_segment(&mut rng)).collect();
        let c = minkowski_average(&a).unwrap();
        let d = minkowski_average(&b).unwrap();
        let exact = hausdorff(&c, &d).unwrap();
        let vc = set_vertices(&c);
        let vd = set_vertices(&d);
        let radius = vc
            .iter()
            .chain(vd.iter())
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        let m = 4000usize;
        let mut oracle = 0.0f64;
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let u = Vec2::new(th.cos(), th.sin());
            let hc = vc.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max);
            let hd = vd.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max);
            oracle = oracle.max((hc - hd).abs());
        }
        let bound = (radius + 1.0) * (2.0 * std::f64::consts::PI / m as f64);
        assert!(
            oracle <= exact + 1e-12 && exact - oracle <= bound,
            "pair {i}: exact {exact}, oracle {oracle}, bound {bound}"
        );
    }
    println!("PASS criterion 7c: Hausdorff matches support-function oracle on 100 pairs");
}

/// Criterion 7d: finite-difference gradient checks for both constructions.
#[test]
fn criterion_7d_finite_difference_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0037);
    // 2-D convex family: g is C^2, so central differences of eval_g match
    // grad_g to O(h^2 |g'''|). |psi_k'''| <= 3840 k^2, so sampling is kept
    // in x2 > 0.3 where only bumps k <= 3 are active and the truncation
    // error stays below h^2 * 3840 * 9 / 6 ~ 6e-7.
    let mut s = cvx_cx::ConvexScenario::from_seed(split_seed(0xACCE_0037, 1));
    let h = 1e-5;
    for _ in 0..2000 {
        let x = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..1.2));
        let grad = s.grad_g(x).unwrap();
        let fd_x = (s.eval_g(Vec2::new(x.x + h, x.y)).unwrap()
            - s.eval_g(Vec2::new(x.x - h, x.y)).unwrap())
            / (2.0 * h);
        let fd_y = (s.eval_g(Vec2::new(x.x, x.y + h)).unwrap()
            - s.eval_g(Vec2::new(x.x, x.y - h)).unwrap())
            / (2.0 * h);
        assert!((fd_x - grad.x).abs() <= 2e-6, "d g/dx mismatch at {x:?}");
        assert!((fd_y - grad.y).abs() <= 2e-6, "d g/dy mismatch at {x:?}");
    }
    // 1-D Lipschitz family: inside the interior of window k the derivative
    // is exactly bit_k; difference quotients of the truncated sum agree.
    let mut lip = lip_cx::LipschitzScenario::from_seed(split_seed(0xACCE_0037, 2), 1e-3).unwrap();
    for k in 1..=20u64 {
        let c = lip_cx::p_k(k);
        let step = lip_cx::r_k(k) / 4.0;
        let lo = lip.eval_f(c - step).unwrap().lo;
        let hi = lip.eval_f(c + step).unwrap().lo;
        let fd = (hi - lo) / (2.0 * step);
        let clarke = lip.clarke_subdiff(c).unwrap().interval;
        assert_eq!(clarke.lo, clarke.hi, "interior of window {k} must be smooth");
        assert!(
            (fd - clarke.lo).abs() <= 1e-6,
            "window {k}: fd {fd} vs derivative {}",
            clarke.lo
        );
    }
    println!("PASS criterion 7d: finite-difference gradients match both constructions");
}

/// Criterion 8: shatter_witness(3) realizes all 8 bit patterns at digits
/// k <= 8, exactly.
#[test]
fn criterion_8_shattering() {
    let witnesses = shatter_witness(3).unwrap();
    assert_eq!(witnesses.len(), 3);
    let mut seen = [false; 8];
    for k in 1..=8u64 {
        let mut pattern = 0usize;
        for w in &witnesses {
            pattern = (pattern << 1) | w.bit(k).unwrap() as usize;
        }
        seen[pattern] = true;
    }
    assert!(seen.iter().all(|&s| s), "patterns realized: {seen:?}");
    println!("PASS criterion 8: all 8 patterns realized for k <= 8");
}
