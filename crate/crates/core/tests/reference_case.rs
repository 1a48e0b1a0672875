//! Cross-module checks on the seven-type reference case beyond the
//! acceptance gate: feasibility of every row, bound sandwiches on the
//! solved template, boundary diagnostics, and dominance of the worst case
//! over the empirical distribution that generated the moments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slotplan_core::bounds::{self, BoundaryForce};
use slotplan_core::domain::{
    check_feasibility, estimate_moments, CostParams, ModeSet, ModeStats,
};
use slotplan_core::piecewise;
use slotplan_core::solver;

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

#[test]
fn all_reference_rows_are_feasible() {
    let ms = clinic_mode_set();
    for stats in ms.modes() {
        assert!(check_feasibility(stats).is_feasible(), "{stats:?}");
    }
}

#[test]
fn solved_template_respects_bounds_at_every_radius() {
    let ms = clinic_mode_set();
    for rho in [0.0, 0.1, 0.5, 1.0] {
        let costs = CostParams::new(30.0, 20.0, 80.0, 720.0, rho).unwrap();
        let sol = solver::solve_exact(&ms, &costs).unwrap();
        for (group, gsol) in sol.partition.groups().iter().zip(&sol.group_solutions) {
            let b = bounds::group_bounds(group, &ms, &costs);
            assert!(
                b.lower - 1e-7 <= gsol.worst_cost && gsol.worst_cost <= b.upper + 1e-7,
                "rho={rho} group {group:?}: {} not in [{}, {}]",
                gsol.worst_cost,
                b.lower,
                b.upper
            );
        }
    }
}

#[test]
fn whole_set_as_one_group_has_interior_optimum() {
    let ms = clinic_mode_set();
    let costs = CostParams::new(30.0, 20.0, 80.0, 720.0, 0.0).unwrap();
    let group: Vec<usize> = (0..7).collect();
    let force = bounds::boundary_conditions(&group, &ms, &costs).unwrap();
    assert!(matches!(force, BoundaryForce::Interior { .. }), "{force:?}");
    let sol = solver::optimize_group_rho0(&group, &ms, &costs).unwrap();
    assert!(sol.duration > 0.0 && sol.duration < 720.0);
}

#[test]
fn worst_case_dominates_the_realizing_sample() {
    // The empirical distribution of any sample lies inside the moment set
    // built from that same sample, so its expected cost can never exceed
    // the closed-form worst case, at any duration.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let costs = CostParams::new(30.0, 20.0, 80.0, 720.0, 0.0).unwrap();
    for _ in 0..50 {
        let n = rng.gen_range(5..60);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..700.0)).collect();
        let stats = match estimate_moments(&samples, 1.0) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let pw = piecewise::build(&stats, &costs).unwrap();
        for _ in 0..20 {
            let t = rng.gen_range(0.0..720.0);
            let empirical: f64 = samples
                .iter()
                .map(|&x| 30.0 * (x - t).max(0.0) + 20.0 * (t - x).max(0.0))
                .sum::<f64>()
                / n as f64;
            let worst = pw.cost(t).unwrap();
            assert!(
                empirical <= worst + 1e-7 * (1.0 + worst),
                "empirical {empirical} exceeds worst case {worst} at t={t}"
            );
        }
    }
}

#[test]
fn exact_beats_every_fixed_k_heuristic_on_reference_case() {
    use slotplan_core::heuristics::{solve_heuristic, ClusterMethod, FeatureSpec};
    let ms = clinic_mode_set();
    let costs = CostParams::new(30.0, 20.0, 80.0, 720.0, 0.0).unwrap();
    let exact = solver::solve_exact(&ms, &costs).unwrap();
    for method in [ClusterMethod::KMeans, ClusterMethod::KMedoids] {
        for k in 1..=7 {
            let spec = match method {
                ClusterMethod::KMeans => FeatureSpec::kmeans_default(),
                ClusterMethod::KMedoids => FeatureSpec::kmedoids_default(),
            };
            let sol = solve_heuristic(&ms, &costs, &spec, method, k, 0).unwrap();
            assert!(
                sol.objective >= exact.objective - 1e-9,
                "{method:?} K={k} beat the exact optimum"
            );
        }
    }
}
