//! Acceptance suite: every release criterion as one test, each printing a
//! single PASS/FAIL line (visible with `--nocapture`) before asserting.
//!
//! Reference-value provenance: criteria 2 and 3 pin solve results to a
//! published reference table whose input statistics are rounded to two
//! decimals. The argmin-level results (partitions, durations) reproduce;
//! the objective values do not reproduce exactly from the rounded inputs
//! and the corresponding assertions are expected to stay red. The library's
//! own values are cross-certified by the independent discretized oracle.
//! See the repository README for the analysis summary.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slotplan_core::ambiguity::{worst_case_probs, TvBall};
use slotplan_core::bounds;
use slotplan_core::data::{generate, GenConfig, SampleSet};
use slotplan_core::domain::{
    conditional_probs, CostParams, ModeSet, ModeStats,
};
use slotplan_core::heuristics::{self, ClusterMethod, FeatureSpec};
use slotplan_core::oracle::{tv_lp, worst_case_discrete, OracleConfig};
use slotplan_core::piecewise;
use slotplan_core::solver::{self, enumerate_partitions};

fn clinic_mode_set() -> ModeSet {
    let rows = [
        (48.70, 31.15, 0.59, 0.1383),
        (73.24, 39.65, 0.47, 0.1518),
        (133.88, 42.98, 0.33, 0.1369),
        (182.87, 47.20, 0.07, 0.2774),
        (223.34, 57.07, 0.07, 0.1117),
        (258.78, 65.27, -0.005, 0.0961),
        (336.29, 66.66, -0.25, 0.0878),
    ];
    ModeSet::new(
        rows.iter()
            .map(|&(m, s, sv, p)| ModeStats::new(m, s, sv, p))
            .collect(),
    )
    .unwrap()
}

fn default_costs(rho: f64) -> CostParams {
    CostParams::new(30.0, 20.0, 80.0, 720.0, rho).unwrap()
}

/// Feasible triple with extremal witness atoms guaranteed inside the
/// default oracle support (largest atom is 2 m / (1 - s) <= 1800) and the
/// tail piece reachable below the 720-minute horizon.
fn oracle_friendly_stats(rng: &mut ChaCha8Rng) -> ModeStats {
    let mean = rng.gen_range(40.0..220.0);
    let std_dev = rng.gen_range(0.15 * mean..0.6 * mean);
    let floor = ModeStats::new(mean, std_dev, 0.0, 1.0).semivariance_floor();
    let lo = floor + 0.05 * (1.0 - floor);
    let semivariance = rng.gen_range(lo..0.6f64.max(lo + 1e-6));
    ModeStats::new(mean, std_dev, semivariance, 1.0)
}

/// Feasible triple for property suites (no support-size constraint).
fn random_stats(rng: &mut ChaCha8Rng) -> ModeStats {
    let mean = rng.gen_range(30.0..400.0);
    let std_dev = rng.gen_range(0.15 * mean..0.7 * mean);
    let floor = ModeStats::new(mean, std_dev, 0.0, 1.0).semivariance_floor();
    let lo = floor + 0.05 * (1.0 - floor);
    let hi = (floor + 0.90 * (1.0 - floor)).min(0.85);
    ModeStats::new(mean, std_dev, rng.gen_range(lo..hi.max(lo + 1e-6)), 1.0)
}

fn random_mode_set(rng: &mut ChaCha8Rng, n: usize) -> ModeSet {
    let mut probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    ModeSet::new(
        (0..n)
            .map(|i| {
                let mut s = random_stats(rng);
                s.nominal_prob = probs[i];
                s
            })
            .collect(),
    )
    .unwrap()
}

/// Synthetic L=5 instance with enough samples per mode for moments and CV.
fn synthetic_instance(seed_start: u64) -> SampleSet {
    for seed in seed_start..seed_start + 100 {
        let s = generate(&GenConfig {
            seed,
            ..GenConfig::default()
        })
        .unwrap();
        if s.train.iter().all(|xs| xs.len() >= 5) && s.estimate_mode_set().is_ok() {
            return s;
        }
    }
    panic!("no usable synthetic instance near seed {seed_start}");
}

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion:02} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_closed_form_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let costs = default_costs(0.0);
    let config = OracleConfig::default();
    let mut max_gap = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..20 {
        let stats = oracle_friendly_stats(&mut rng);
        let pw = piecewise::build(&stats, &costs).unwrap();
        let tau = pw.raw_breakpoints();
        let edges = [0.0, tau[0], tau[1], tau[2], tau[3], costs.horizon];
        let mut ts = Vec::with_capacity(20);
        'outer: loop {
            for k in 0..5 {
                let lo = edges[k].min(costs.horizon);
                let hi = edges[k + 1].min(costs.horizon);
                if hi - lo > 1e-6 {
                    ts.push(lo + rng.gen_range(0.05..0.95) * (hi - lo));
                    if ts.len() == 20 {
                        break 'outer;
                    }
                }
            }
        }
        for t in ts {
            let closed = pw.cost(t).unwrap();
            let (oracle, _) = worst_case_discrete(&stats, &costs, t, &config).unwrap();
            let gap = (oracle - closed).abs() / closed.max(1e-9);
            max_gap = max_gap.max(gap);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = max_gap <= 0.01 && elapsed.as_secs() <= 300;
    report(
        1,
        pass,
        &format!(
            "closed form vs discretized oracle on {checked} points: max relative gap \
             {max_gap:.5} (limit 0.01), elapsed {elapsed:.1?} (limit 300s)"
        ),
    );
    assert!(max_gap <= 0.01, "oracle gap {max_gap}");
    assert!(elapsed.as_secs() <= 300, "too slow: {elapsed:?}");
}

#[test]
fn criterion_02_reference_case_reproduction() {
    let start = Instant::now();
    let sol = solver::solve_exact(&clinic_mode_set(), &default_costs(0.0)).unwrap();
    let elapsed = start.elapsed();
    let groups = sol.partition.groups();
    let partition_ok = groups == [vec![0], vec![1], vec![2, 3, 4, 5, 6]];
    let durations: Vec<f64> = sol.group_solutions.iter().map(|g| g.duration).collect();
    let expected = [39.0, 60.0, 216.0];
    let durations_ok = durations
        .iter()
        .zip(expected)
        .all(|(&got, want)| (got - want).abs() <= 1.0);
    let objective_ok = (sol.objective - 1268.28).abs() <= 1.0;
    let runtime_ok = elapsed.as_secs() <= 60;
    let pass = partition_ok && durations_ok && objective_ok && runtime_ok;
    report(
        2,
        pass,
        &format!(
            "partition {:?} (ok: {partition_ok}), durations {:?} vs (39, 60, 216) +-1 \
             (ok: {durations_ok}), objective {:.2} vs 1268.28 +-1 (ok: {objective_ok}), \
             elapsed {elapsed:.1?} (ok: {runtime_ok})",
            groups, durations, sol.objective
        ),
    );
    assert!(partition_ok);
    assert!(durations_ok, "durations {durations:?}");
    assert!(runtime_ok);
    // Known red: the reference objective was produced from unrounded
    // internal statistics. From the published two-decimal inputs the
    // oracle-certified optimum is ~1270.8.
    assert!(
        objective_ok,
        "objective {:.2} vs reference 1268.28 +-1; the solver value is \
         independently certified by the discretized oracle (criterion 1)",
        sol.objective
    );
}

#[test]
fn criterion_03_reference_radius_sweep() {
    let cases: [(f64, Vec<f64>, f64); 3] = [
        (0.1, vec![39.0, 60.0, 221.0], 1313.28),
        (0.5, vec![39.0, 60.0, 218.0, 368.0], 1386.93),
        (1.0, vec![39.0, 60.0, 238.0, 368.0], 1429.20),
    ];
    let ms = clinic_mode_set();
    let mut all_durations_ok = true;
    let mut all_objectives_ok = true;
    let mut details = Vec::new();
    for (rho, expected_durations, expected_objective) in &cases {
        let sol = solver::solve_exact(&ms, &default_costs(*rho)).unwrap();
        let durations: Vec<f64> = sol.group_solutions.iter().map(|g| g.duration).collect();
        let durations_ok = durations.len() == expected_durations.len()
            && durations
                .iter()
                .zip(expected_durations)
                .all(|(&got, &want)| (got - want).abs() <= 1.0);
        let objective_ok = (sol.objective - expected_objective).abs() <= 1.0;
        all_durations_ok &= durations_ok;
        all_objectives_ok &= objective_ok;
        details.push(format!(
            "rho={rho}: durations {durations:?} vs {expected_durations:?} (ok: {durations_ok}), \
             objective {:.2} vs {expected_objective} (ok: {objective_ok})",
            sol.objective
        ));
    }
    let pass = all_durations_ok && all_objectives_ok;
    report(3, pass, &details.join("; "));
    // Known red at rho=1: the reference table's duration 238 is
    // inconsistent with its own objective value (the printed objective
    // matches the minimizer near 218.5), and all reference objectives stem
    // from unrounded internal inputs.
    assert!(all_durations_ok, "{details:?}");
    assert!(all_objectives_ok, "{details:?}");
}

#[test]
fn criterion_04_objective_monotone_in_radius() {
    let rhos = [0.0, 0.1, 0.5, 1.0];
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for seed in 0..10u64 {
        let samples = synthetic_instance(seed * 1000);
        let ms = samples.estimate_mode_set().unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &rho in &rhos {
            let sol = solver::solve_exact(&ms, &default_costs(rho)).unwrap();
            worst = worst.min(sol.objective - prev);
            if sol.objective < prev - 1e-9 {
                pass = false;
            }
            prev = sol.objective;
        }
    }
    report(
        4,
        pass,
        &format!(
            "objective nondecreasing over rho in {{0, 0.1, 0.5, 1}} on 10 seeded L=5 \
             instances (tightest increment {worst:.3e})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_boundary_corollary() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut pass = true;
    for trial in 0..20 {
        let n = rng.gen_range(1..5);
        let ms = random_mode_set(&mut rng, n);
        let rho = if trial % 2 == 0 { 0.0 } else { rng.gen_range(0.05..1.0) };
        let zero_q = CostParams::new(0.0, 20.0, 80.0, 720.0, rho).unwrap();
        let sol = solver::solve_exact(&ms, &zero_q).unwrap();
        if sol.group_solutions.iter().any(|g| g.duration != 0.0) {
            pass = false;
        }
        let zero_b = CostParams::new(30.0, 0.0, 80.0, 720.0, rho).unwrap();
        let sol = solver::solve_exact(&ms, &zero_b).unwrap();
        if sol.group_solutions.iter().any(|g| g.duration != 720.0) {
            pass = false;
        }
    }
    report(
        5,
        pass,
        "q=0 forces every duration to exactly 0 and b=0 to exactly the horizon \
         on 20 random instances",
    );
    assert!(pass);
}

#[test]
fn criterion_06_bounds_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut violations = 0usize;
    for trial in 0..100 {
        let n = rng.gen_range(1..5);
        let ms = random_mode_set(&mut rng, n);
        let rho = match trial % 3 {
            0 => 0.0,
            1 => rng.gen_range(0.01..0.5),
            _ => rng.gen_range(0.5..1.0),
        };
        let costs = default_costs(rho);
        let group: Vec<usize> = (0..n).collect();
        let sol = solver::solve_group(&group, &ms, &costs).unwrap();
        let b = bounds::group_bounds(&group, &ms, &costs);
        if sol.worst_cost < b.lower - 1e-7 || sol.worst_cost > b.upper + 1e-7 {
            violations += 1;
        }
    }
    report(
        6,
        violations == 0,
        &format!("lower <= optimum <= upper on 100 random groups ({violations} violations)"),
    );
    assert_eq!(violations, 0);
}

#[test]
fn criterion_07_grid_search_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut max_diff = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..4);
        let ms = random_mode_set(&mut rng, n);
        let costs = default_costs(0.0);
        let group: Vec<usize> = (0..n).collect();
        let sol = solver::optimize_group_rho0(&group, &ms, &costs).unwrap();
        let weights = conditional_probs(&group, &ms);
        let curves: Vec<_> = group
            .iter()
            .map(|&l| piecewise::build(ms.get(l), &costs).unwrap())
            .collect();
        let mix = |t: f64| -> f64 {
            curves
                .iter()
                .zip(&weights)
                .map(|(c, &p)| p * c.cost(t).unwrap())
                .sum()
        };
        let mut grid_best = f64::INFINITY;
        let steps = (costs.horizon / 0.01) as usize;
        for k in 0..=steps {
            grid_best = grid_best.min(mix(k as f64 * 0.01));
        }
        max_diff = max_diff.max((sol.worst_cost - grid_best).abs());
    }
    let pass = max_diff <= 1e-3;
    report(
        7,
        pass,
        &format!(
            "analytic optimizer vs 0.01-minute grid on 100 instances: \
             max cost difference {max_diff:.2e} (limit 1e-3)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_partition_counts() {
    // Independent reference: Bell numbers by the triangle recurrence. The
    // last entry of row n is B(n).
    let bell = |n: usize| -> usize {
        let mut row = vec![1usize];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                next.push(next.last().unwrap() + v);
            }
            row = next;
        }
        *row.last().unwrap()
    };
    let counts: Vec<(usize, usize, usize)> = [3usize, 5, 7]
        .iter()
        .map(|&n| {
            (
                n,
                enumerate_partitions(n).unwrap().count(),
                bell(n),
            )
        })
        .collect();
    let pass = counts.iter().all(|&(_, got, want)| got == want)
        && counts[0].1 == 5
        && counts[1].1 == 52
        && counts[2].1 == 877;
    report(
        8,
        pass,
        &format!("partition counts {counts:?} match the Bell recurrence and (5, 52, 877)"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_greedy_lp_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut max_gap = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..8);
        let mut center: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = center.iter().sum();
        center.iter_mut().for_each(|c| *c /= total);
        let radius = rng.gen_range(0.0..1.0);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let ball = TvBall::new(center.clone(), radius).unwrap();
        let p = worst_case_probs(&ball, &values);
        let greedy: f64 = p.iter().zip(&values).map(|(&a, &v)| a * v).sum();
        let lp = tv_lp(&center, &values, radius).unwrap();
        max_gap = max_gap.max((greedy - lp).abs());
    }
    let pass = max_gap <= 1e-9;
    report(
        9,
        pass,
        &format!("greedy equals the TV linear program on 1000 random balls: max gap {max_gap:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_heuristic_gap() {
    // The 30% limit mirrors a reference statistic that is a mean over ten
    // runs, so the gate is on the mean gap; the worst single instance is
    // reported alongside it.
    let costs = default_costs(0.0);
    let mut worst_ratio = 0.0f64;
    let mut total_ratio = 0.0f64;
    let mut pass = true;
    for seed in 0..10u64 {
        let samples = synthetic_instance(10_000 + seed * 97);
        let ms = samples.estimate_mode_set().unwrap();
        let exact = solver::solve_exact(&ms, &costs).unwrap();
        let (_k, heuristic) = heuristics::solve_heuristic_cv(
            &samples,
            &costs,
            &FeatureSpec::kmeans_default(),
            ClusterMethod::KMeans,
            5,
            seed,
        )
        .unwrap();
        if heuristic.objective < exact.objective - 1e-9 {
            pass = false;
        }
        let ratio = heuristic.objective / exact.objective - 1.0;
        worst_ratio = worst_ratio.max(ratio);
        total_ratio += ratio;
    }
    let mean_ratio = total_ratio / 10.0;
    let within = mean_ratio <= 0.30;
    report(
        10,
        pass && within,
        &format!(
            "cross-validated K-Means in-sample gap on 10 seeded L=5 instances: \
             mean +{:.1}% (limit 30%), worst +{:.1}%, never beats exact: {pass}",
            100.0 * mean_ratio,
            100.0 * worst_ratio
        ),
    );
    assert!(pass, "heuristic beat the exact optimum");
    assert!(within, "mean gap {mean_ratio}");
}

#[test]
fn criterion_11_piecewise_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let costs_grid = [
        default_costs(0.0),
        CostParams::new(50.0, 10.0, 80.0, 720.0, 0.0).unwrap(),
        CostParams::new(5.0, 45.0, 80.0, 720.0, 0.0).unwrap(),
    ];
    let mut continuity_failures = 0usize;
    let mut convexity_failures = 0usize;
    let mut witness_failures = 0usize;
    let mut witness_checked = 0usize;
    for trial in 0..1000 {
        let stats = random_stats(&mut rng);
        let costs = costs_grid[trial % costs_grid.len()];
        let tall = CostParams {
            horizon: 1e6,
            ..costs
        };
        let pw = piecewise::build(&stats, &tall).unwrap();
        // Continuity at interior breakpoints via one-sided slopes'
        // underlying values.
        let tau = pw.raw_breakpoints();
        for &t in &tau {
            if t <= 0.0 {
                continue;
            }
            let eps = 1e-7 * (1.0 + t);
            let a = pw.cost((t - eps).max(0.0)).unwrap();
            let b = pw.cost(t).unwrap();
            let c = pw.cost(t + eps).unwrap();
            let scale = 1.0 + b.abs();
            if (a - b).abs() > 1e-5 * scale || (c - b).abs() > 1e-5 * scale {
                continuity_failures += 1;
            }
        }
        // Convexity against random chords on the operating horizon.
        let pw720 = piecewise::build(&stats, &costs).unwrap();
        let mut ts: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..costs.horizon)).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ts[2] - ts[0] > 1e-9 {
            let lam = (ts[1] - ts[0]) / (ts[2] - ts[0]);
            let chord = (1.0 - lam) * pw720.cost(ts[0]).unwrap()
                + lam * pw720.cost(ts[2]).unwrap();
            if pw720.cost(ts[1]).unwrap() > chord + 1e-9 {
                convexity_failures += 1;
            }
        }
        // Witness attainment on a random point of every nonempty piece.
        let edges = [0.0, tau[0], tau[1], tau[2], tau[3], 1.5 * tau[3]];
        for k in 0..5 {
            let (lo, hi) = (edges[k], edges[k + 1]);
            if hi - lo < 1e-9 {
                continue;
            }
            let t = lo + rng.gen_range(0.02..0.98) * (hi - lo);
            match pw.witness(t) {
                Ok(w) => {
                    witness_checked += 1;
                    let rel = |got: f64, want: f64| (got - want).abs() / (1.0 + want.abs());
                    let (upper, lower) = w.semimoments_about(stats.mean);
                    let moments_ok = rel(w.mean(), stats.mean) < 1e-7
                        && rel(upper, pw.upper_semimoment()) < 1e-7
                        && rel(lower, pw.lower_semimoment()) < 1e-7;
                    let cost = pw.cost(t).unwrap();
                    let attained = w.expected_cost(costs.overtime_rate, costs.idle_rate, t);
                    let cost_ok = (attained - cost).abs() / (1.0 + cost.abs()) < 1e-6;
                    if !moments_ok || !cost_ok {
                        witness_failures += 1;
                    }
                }
                Err(slotplan_core::Error::UndefinedWitness { .. }) => {}
                Err(e) => panic!("witness failed: {e}"),
            }
        }
    }
    let pass =
        continuity_failures == 0 && convexity_failures == 0 && witness_failures == 0;
    report(
        11,
        pass,
        &format!(
            "1000 random instances: continuity failures {continuity_failures}, convexity \
             failures {convexity_failures}, witness failures {witness_failures} \
             ({witness_checked} witnesses at 1e-7 moment / 1e-6 cost tolerance)"
        ),
    );
    assert!(pass);
}
