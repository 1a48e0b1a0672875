//! Worst-case mode probabilities over a total-variation ball around the
//! group's conditional nominal probabilities, and the resulting group-level
//! worst-case cost.

use crate::domain::{conditional_probs, CostParams, ModeSet, PROB_SUM_TOL};
use crate::error::{Error, Result};
use crate::piecewise::{self, PiecewiseWorstCase};

/// Probability vectors within total-variation budget `radius` of `center`:
/// `{ p >= 0 : sum p = 1, sum |p - center| <= radius }`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvBall {
    center: Vec<f64>,
    radius: f64,
}

impl TvBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::BadProbabilities("empty center".into()));
        }
        let sum: f64 = center.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::BadProbabilities(format!(
                "center sums to {sum}, expected 1"
            )));
        }
        if center.iter().any(|&p| !(0.0..=1.0 + PROB_SUM_TOL).contains(&p)) {
            return Err(Error::BadProbabilities("center entry outside [0, 1]".into()));
        }
        if !(0.0..=2.0).contains(&radius) {
            return Err(Error::BadParameter(format!(
                "tv radius {radius} outside [0, 2]"
            )));
        }
        let center = center.iter().map(|&p| p / sum).collect();
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Membership test with a small numeric slack.
    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.center.len() {
            return false;
        }
        let sum: f64 = p.iter().sum();
        let tv: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(&a, &c)| (a - c).abs())
            .sum();
        (sum - 1.0).abs() <= 1e-9
            && p.iter().all(|&x| x >= -1e-12)
            && tv <= self.radius + 1e-9
    }
}

/// Maximizes `sum p_l values_l` over the ball by the exact greedy transfer:
/// up to `radius / 2` of probability mass moves from the cheapest members
/// (drained in ascending value, ties by ascending index) to the most
/// expensive ones (filled in descending value, capped at `p <= 1`, ties by
/// ascending index), stopping once a transfer would no longer gain. The
/// result coincides with the linear-programming optimum.
pub fn worst_case_probs(ball: &TvBall, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), ball.center.len(), "value vector length mismatch");
    debug_assert!(values.iter().all(|v| v.is_finite()));
    let n = values.len();
    let mut p = ball.center.clone();
    if ball.radius == 0.0 || n < 2 {
        return p;
    }
    let mut donors: Vec<usize> = (0..n).collect();
    donors.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut recipients: Vec<usize> = (0..n).collect();
    recipients.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));

    let mut budget = ball.radius / 2.0;
    let (mut di, mut ri) = (0usize, 0usize);
    while budget > 0.0 {
        while di < n && p[donors[di]] <= 0.0 {
            di += 1;
        }
        while ri < n && p[recipients[ri]] >= 1.0 {
            ri += 1;
        }
        if di >= n || ri >= n {
            break;
        }
        let (d, r) = (donors[di], recipients[ri]);
        if d == r || values[d] >= values[r] {
            break;
        }
        let amount = budget.min(p[d]).min(1.0 - p[r]);
        p[d] -= amount;
        p[r] += amount;
        budget -= amount;
    }
    p
}

/// Worst-case expected cost of group `group` at slot duration `t`: the
/// per-member worst-case costs are reweighted adversarially over the TV
/// ball built on the group's conditional nominal probabilities. Singleton
/// groups reduce to the member's own worst-case cost for any radius.
pub fn omega(group: &[usize], mode_set: &ModeSet, costs: &CostParams, t: f64) -> Result<f64> {
    let curves = group
        .iter()
        .map(|&l| piecewise::build(mode_set.get(l), costs))
        .collect::<Result<Vec<_>>>()?;
    let ball = TvBall::new(conditional_probs(group, mode_set), costs.tv_radius)?;
    omega_from_curves(&curves, &ball, t)
}

pub(crate) fn omega_from_curves(
    curves: &[PiecewiseWorstCase],
    ball: &TvBall,
    t: f64,
) -> Result<f64> {
    let values = curves
        .iter()
        .map(|c| c.cost(t))
        .collect::<Result<Vec<_>>>()?;
    let p = worst_case_probs(ball, &values);
    Ok(p.iter().zip(&values).map(|(&pi, &v)| pi * v).sum())
}
