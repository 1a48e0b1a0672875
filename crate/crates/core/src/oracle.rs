//! Independent brute-force verification instruments: a dense two-phase
//! simplex solver, a discretized moment-problem oracle for the closed-form
//! worst-case cost, and an LP formulation of the total-variation
//! reweighting problem.
//!
//! These are correctness instruments, not production solvers; everything is
//! dense and favors simplicity over speed.

use crate::domain::{require_feasible, CostParams, ModeStats};
use crate::error::{Error, Result};
use crate::piecewise::DiscreteDistribution;

/// A linear program in standard form: maximize `objective . x` subject to
/// the equality rows, the `<=` rows, and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ub: Vec<(Vec<f64>, f64)>,
}

/// Optimal basic solution with the dual prices of both row blocks.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub duals_eq: Vec<f64>,
    pub duals_ub: Vec<f64>,
}

#[derive(Debug, Clone)]
enum SimplexOutcome {
    Optimal(LpSolution),
    /// Rows whose artificial variable stayed positive after phase 1,
    /// indexed into the concatenated (eq, ub) row list.
    Infeasible(Vec<usize>),
    Unbounded,
}

const REDCOST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

/// Solves `lp` by the two-phase dense simplex method with Bland's
/// anti-cycling rule. Infeasible and unbounded programs are signaled as
/// distinct errors; optimal solutions satisfy the row residual bound 1e-9
/// on the row-equilibrated system.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    match simplex(lp)? {
        SimplexOutcome::Optimal(sol) => Ok(sol),
        SimplexOutcome::Infeasible(_) => Err(Error::LpInfeasible),
        SimplexOutcome::Unbounded => Err(Error::LpUnbounded),
    }
}

fn simplex(lp: &LinearProgram) -> Result<SimplexOutcome> {
    let n = lp.objective.len();
    for (row, _) in lp.eq.iter().chain(&lp.ub) {
        if row.len() != n {
            return Err(Error::BadParameter(format!(
                "row has {} coefficients, expected {n}",
                row.len()
            )));
        }
    }
    let n_eq = lp.eq.len();
    let n_rows = n_eq + lp.ub.len();

    // Row equilibration. `multiplier[i]` is the total factor applied to the
    // original row, sign included, so original duals are recovered as
    // `y_orig = multiplier * y_scaled`.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    let mut rhs: Vec<f64> = Vec::with_capacity(n_rows);
    let mut is_eq: Vec<bool> = Vec::with_capacity(n_rows);
    let mut multiplier: Vec<f64> = Vec::with_capacity(n_rows);
    for (i, (row, b)) in lp.eq.iter().chain(&lp.ub).enumerate() {
        let scale = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        rows.push(row.iter().map(|v| v / scale).collect());
        rhs.push(b / scale);
        is_eq.push(i < n_eq);
        multiplier.push(1.0 / scale);
    }

    // Normalize RHS signs; a flipped <= row becomes a >= row.
    let mut needs_artificial: Vec<bool> = Vec::with_capacity(n_rows);
    let mut surplus: Vec<bool> = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        if rhs[i] < 0.0 {
            for v in rows[i].iter_mut() {
                *v = -*v;
            }
            rhs[i] = -rhs[i];
            multiplier[i] = -multiplier[i];
            if !is_eq[i] {
                surplus.push(true);
                needs_artificial.push(true);
            } else {
                surplus.push(false);
                needs_artificial.push(true);
            }
        } else if is_eq[i] {
            surplus.push(false);
            needs_artificial.push(true);
        } else {
            surplus.push(false);
            needs_artificial.push(false);
        }
    }

    // Column layout: structural | one slack or surplus per inequality |
    // artificials. `init_col[i]` is the +1 identity column row i starts
    // with, used later to read off dual prices.
    let mut total = n;
    let mut slack_col: Vec<Option<usize>> = vec![None; n_rows];
    for i in 0..n_rows {
        if !is_eq[i] {
            slack_col[i] = Some(total);
            total += 1;
        }
    }
    let mut art_col: Vec<Option<usize>> = vec![None; n_rows];
    let art_start = total;
    for i in 0..n_rows {
        if needs_artificial[i] {
            art_col[i] = Some(total);
            total += 1;
        }
    }

    let width = total + 1; // last column is the RHS
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    let mut basis: Vec<usize> = Vec::with_capacity(n_rows);
    let mut init_col: Vec<usize> = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let mut row = vec![0.0; width];
        row[..n].copy_from_slice(&rows[i]);
        if let Some(sc) = slack_col[i] {
            row[sc] = if surplus[i] { -1.0 } else { 1.0 };
        }
        if let Some(ac) = art_col[i] {
            row[ac] = 1.0;
            basis.push(ac);
            init_col.push(ac);
        } else {
            let sc = slack_col[i].expect("row without artificial must have a slack");
            basis.push(sc);
            init_col.push(sc);
        }
        row[total] = rhs[i];
        t.push(row);
    }

    // Phase 1: maximize minus the sum of artificials.
    if art_start < total {
        let mut cost = vec![0.0; total];
        for c in cost.iter_mut().take(total).skip(art_start) {
            *c = -1.0;
        }
        let outcome = run_pivots(&mut t, &mut basis, &cost, total, None)?;
        if matches!(outcome, PivotEnd::Unbounded) {
            // Phase-1 objective is bounded above by zero.
            return Err(Error::BadParameter("phase 1 reported unbounded".into()));
        }
        let infeas: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(i, _)| t[i][total])
            .sum();
        if infeas > 1e-7 {
            let bad: Vec<usize> = basis
                .iter()
                .enumerate()
                .filter(|(i, &b)| b >= art_start && t[*i][total] > 1e-7)
                .map(|(i, _)| i)
                .collect();
            return Ok(SimplexOutcome::Infeasible(bad));
        }
        // Drive zero-level artificials out of the basis; a row with no
        // eligible pivot column is redundant and is dropped.
        let mut drop_rows = Vec::new();
        for i in 0..t.len() {
            if basis[i] < art_start {
                continue;
            }
            let mut pivoted = false;
            for j in 0..art_start {
                if t[i][j].abs() > PIVOT_TOL {
                    pivot(&mut t, &mut basis, i, j);
                    pivoted = true;
                    break;
                }
            }
            if !pivoted {
                drop_rows.push(i);
            }
        }
        for &i in drop_rows.iter().rev() {
            t.remove(i);
            basis.remove(i);
            init_col.remove(i);
        }
    }

    // Phase 2: the true objective; artificial columns may not re-enter.
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(&lp.objective);
    let outcome = run_pivots(&mut t, &mut basis, &cost, total, Some(art_start))?;
    if matches!(outcome, PivotEnd::Unbounded) {
        return Ok(SimplexOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][total];
        }
    }
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // Dual prices: the reduced cost under row i's initial identity column
    // is -y_i in the scaled system. Rows dropped as redundant keep dual 0.
    // The column id itself identifies the original row, since slack and
    // artificial columns are unique per row.
    let obj_row = reduced_costs(&t, &basis, &cost, total);
    let mut duals_scaled = vec![0.0; n_rows];
    let mut col_to_row = vec![usize::MAX; total];
    for i in 0..n_rows {
        if let Some(sc) = slack_col[i] {
            col_to_row[sc] = i;
        }
        if let Some(ac) = art_col[i] {
            col_to_row[ac] = i;
        }
    }
    for &col in &init_col {
        let orig = col_to_row[col];
        duals_scaled[orig] = -obj_row[col];
    }
    let mut duals = vec![0.0; n_rows];
    for i in 0..n_rows {
        duals[i] = multiplier[i] * duals_scaled[i];
    }
    let (duals_eq, duals_ub) = duals.split_at(n_eq);

    Ok(SimplexOutcome::Optimal(LpSolution {
        x,
        value,
        duals_eq: duals_eq.to_vec(),
        duals_ub: duals_ub.to_vec(),
    }))
}

enum PivotEnd {
    Optimal,
    Unbounded,
}

fn reduced_costs(t: &[Vec<f64>], basis: &[usize], cost: &[f64], total: usize) -> Vec<f64> {
    let mut obj = vec![0.0; total + 1];
    obj[..total].copy_from_slice(cost);
    for (i, &b) in basis.iter().enumerate() {
        let cb = cost[b];
        if cb != 0.0 {
            for j in 0..=total {
                obj[j] -= cb * t[i][j];
            }
        }
    }
    obj
}

fn run_pivots(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    total: usize,
    banned_from: Option<usize>,
) -> Result<PivotEnd> {
    let mut obj = reduced_costs(t, basis, cost, total);
    let max_iters = 2000 + 200 * (t.len() + total);
    for _ in 0..max_iters {
        // Bland: entering column is the smallest index with positive
        // reduced cost.
        let limit = banned_from.unwrap_or(total);
        let entering = (0..limit).find(|&j| obj[j] > REDCOST_TOL);
        let Some(j) = entering else {
            return Ok(PivotEnd::Optimal);
        };
        // Ratio test; ties leave the row whose basic variable has the
        // smallest index (Bland).
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, basic var, row)
        for (i, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[total] / row[j];
                let candidate = (ratio, basis[i], i);
                best = match best {
                    None => Some(candidate),
                    Some(cur) => {
                        if candidate.0 < cur.0 - 1e-12
                            || ((candidate.0 - cur.0).abs() <= 1e-12 && candidate.1 < cur.1)
                        {
                            Some(candidate)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
        }
        let Some((_, _, row)) = best else {
            return Ok(PivotEnd::Unbounded);
        };
        pivot_with_obj(t, basis, &mut obj, row, j, total);
    }
    Err(Error::BadParameter(
        "simplex iteration limit exceeded".into(),
    ))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            r[col] = 0.0;
        }
    }
    basis[row] = col;
}

fn pivot_with_obj(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &mut [f64],
    row: usize,
    col: usize,
    total: usize,
) {
    pivot(t, basis, row, col);
    let f = obj[col];
    if f != 0.0 {
        for (o, v) in obj.iter_mut().zip(&t[row][..=total]) {
            *o -= f * v;
        }
        obj[col] = 0.0;
    }
}

/// Grid and relaxation parameters of the discretized moment oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Right end of the discretized support, in minutes. Larger than the
    /// experiment horizon so extremal atoms beyond it stay representable.
    pub support_max: f64,
    /// Grid spacing in minutes.
    pub grid_step: f64,
    /// Multiplicative half-width of the band around each moment target;
    /// equality moments are infeasible on a coarse grid, the band strictly
    /// contains them and vanishes as the grid refines.
    pub moment_band: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            support_max: 2000.0,
            grid_step: 1.0,
            moment_band: 1e-3,
        }
    }
}

impl OracleConfig {
    fn validate(&self, horizon: f64) -> Result<()> {
        if self.grid_step.is_nan() || self.grid_step <= 0.0 {
            return Err(Error::BadParameter("grid step must be positive".into()));
        }
        if self.moment_band < 0.0 {
            return Err(Error::BadParameter("moment band must be >= 0".into()));
        }
        if self.support_max < horizon {
            return Err(Error::BadParameter(format!(
                "support max {} below horizon {horizon}",
                self.support_max
            )));
        }
        Ok(())
    }
}

/// Maximizes the expected idle/overtime cost over grid-supported
/// distributions whose mean, variance and semivariance sit within the
/// configured band of the targets. Returns the optimal value and the
/// extremal atoms (at most one per binding row, by basicness).
pub fn worst_case_discrete(
    stats: &ModeStats,
    costs: &CostParams,
    t: f64,
    config: &OracleConfig,
) -> Result<(f64, DiscreteDistribution)> {
    require_feasible(stats)?;
    costs.validate()?;
    config.validate(costs.horizon)?;
    if !t.is_finite() || t < 0.0 || t > costs.horizon {
        return Err(Error::OutOfRange {
            t,
            horizon: costs.horizon,
        });
    }

    let m = stats.mean;
    let var = stats.std_dev * stats.std_dev;
    let semi = stats.semivariance * var;
    let delta = config.moment_band;

    let n_points = (config.support_max / config.grid_step).floor() as usize + 1;
    let grid: Vec<f64> = (0..n_points).map(|k| k as f64 * config.grid_step).collect();

    let objective: Vec<f64> = grid
        .iter()
        .map(|&xi| costs.overtime_rate * (xi - t).max(0.0) + costs.idle_rate * (t - xi).max(0.0))
        .collect();
    let mean_row: Vec<f64> = grid.clone();
    let var_row: Vec<f64> = grid.iter().map(|&xi| (xi - m) * (xi - m)).collect();
    let semi_row: Vec<f64> = grid
        .iter()
        .map(|&xi| {
            let d = xi - m;
            if d > 0.0 {
                d * d
            } else {
                -d * d
            }
        })
        .collect();

    let mut lp = LinearProgram {
        objective,
        eq: vec![(vec![1.0; n_points], 1.0)],
        ub: Vec::new(),
    };
    let mut band_names: Vec<String> = Vec::new();
    let push_band = |lp: &mut LinearProgram, names: &mut Vec<String>, row: Vec<f64>, target: f64, label: &str| {
        let half = delta * target.abs();
        if half == 0.0 {
            lp.eq.push((row, target));
            names.push(format!("{label} (equality)"));
        } else {
            lp.ub.push((row.clone(), target + half));
            names.push(format!("{label} upper"));
            lp.ub.push((row.iter().map(|v| -v).collect(), -(target - half)));
            names.push(format!("{label} lower"));
        }
    };
    push_band(&mut lp, &mut band_names, mean_row, m, "mean");
    push_band(&mut lp, &mut band_names, var_row, var, "variance");
    push_band(&mut lp, &mut band_names, semi_row, semi, "semivariance");

    match simplex(&lp)? {
        SimplexOutcome::Optimal(sol) => {
            let atoms: Vec<(f64, f64)> = sol
                .x
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 1e-12)
                .map(|(k, &p)| (grid[k], p))
                .collect();
            Ok((sol.value, DiscreteDistribution::new(atoms)?))
        }
        SimplexOutcome::Infeasible(bad_rows) => {
            // Row 0 of the eq block is the normalization; the rest map into
            // the band list in insertion order (eq bands first, then ubs).
            let n_eq_bands = lp.eq.len() - 1;
            let binding: Vec<String> = bad_rows
                .iter()
                .map(|&i| {
                    if i == 0 {
                        "normalization".to_string()
                    } else if i <= n_eq_bands {
                        band_names
                            .iter()
                            .filter(|n| n.contains("equality"))
                            .nth(i - 1)
                            .cloned()
                            .unwrap_or_else(|| format!("eq row {i}"))
                    } else {
                        band_names
                            .iter()
                            .filter(|n| !n.contains("equality"))
                            .nth(i - 1 - n_eq_bands)
                            .cloned()
                            .unwrap_or_else(|| format!("row {i}"))
                    }
                })
                .collect();
            Err(Error::InfeasibleOnGrid {
                binding: binding.join(", "),
            })
        }
        SimplexOutcome::Unbounded => Err(Error::LpUnbounded),
    }
}

/// Linear-programming formulation of the total-variation reweighting
/// problem, linearizing `|p - center|` with auxiliary variables. The
/// deviation budget is clamped at the TV diameter 2.
pub fn tv_lp(center: &[f64], values: &[f64], rho: f64) -> Result<f64> {
    let n = center.len();
    if values.len() != n || n == 0 {
        return Err(Error::BadParameter("length mismatch in tv_lp".into()));
    }
    // Variables: p_0..p_{n-1}, d_0..d_{n-1}.
    let mut objective = vec![0.0; 2 * n];
    objective[..n].copy_from_slice(values);
    let mut eq_row = vec![0.0; 2 * n];
    for v in eq_row.iter_mut().take(n) {
        *v = 1.0;
    }
    let mut ub = Vec::with_capacity(2 * n + 1);
    for l in 0..n {
        let mut pos = vec![0.0; 2 * n];
        pos[l] = 1.0;
        pos[n + l] = -1.0;
        ub.push((pos, center[l])); // p_l - d_l <= c_l
        let mut neg = vec![0.0; 2 * n];
        neg[l] = -1.0;
        neg[n + l] = -1.0;
        ub.push((neg, -center[l])); // -p_l - d_l <= -c_l
    }
    let mut budget = vec![0.0; 2 * n];
    for v in budget.iter_mut().skip(n) {
        *v = 1.0;
    }
    ub.push((budget, rho.min(2.0)));
    let lp = LinearProgram {
        objective,
        eq: vec![(eq_row, 1.0)],
        ub,
    };
    Ok(lp_solve(&lp)?.value)
}
