//! Allocation rules for the cooperative stage and checks that classify them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biform::BiformProblem;
use crate::coalition::ProfileCharacteristic;
use crate::error::{Error, Result};
use crate::game::{BoxGame, Coalition, FiniteGame, PlayerId, PureProfile};

/// Payoff vector handed to the players at one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    shares: Vec<f64>,
}

impl Allocation {
    pub fn new(shares: Vec<f64>) -> Self {
        Allocation { shares }
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn into_shares(self) -> Vec<f64> {
        self.shares
    }

    pub fn total(&self) -> f64 {
        self.shares.iter().sum()
    }
}

/// How a coalition table is turned into individual payoffs.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AllocationRule {
    #[default]
    Shapley,
    EqualSplit,
    /// Own payoff plus a share of the surplus `v(N) - sum(base)`. Without
    /// weights the surplus is split equally.
    Contribution { weights: Option<Vec<f64>> },
}

impl AllocationRule {
    pub fn contribution() -> Self {
        AllocationRule::Contribution { weights: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AllocationRule::Shapley => "shapley",
            AllocationRule::EqualSplit => "equal",
            AllocationRule::Contribution { .. } => "contribution",
        }
    }

    /// Accepts `shapley`, `equal` (or `equal-split`) and `contribution`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shapley" => Ok(AllocationRule::Shapley),
            "equal" | "equal-split" | "equalsplit" => Ok(AllocationRule::EqualSplit),
            "contribution" => Ok(AllocationRule::contribution()),
            other => Err(Error::Parse(format!(
                "unknown rule {other:?}; expected shapley, equal or contribution"
            ))),
        }
    }

    /// Applies the rule. `base` is the original payoff vector at the same
    /// profile; only the contribution rule reads it.
    pub fn allocate(&self, table: &ProfileCharacteristic, base: &[f64]) -> Result<Allocation> {
        match self {
            AllocationRule::Shapley => Ok(shapley(table)),
            AllocationRule::EqualSplit => Ok(equal_split(table)),
            AllocationRule::Contribution { weights } => contribution_with(table, base, weights.as_deref()),
        }
    }
}

/// `v(S + i) - v(S)`, or 0 when `i` is already in `S`.
pub fn marginal_contribution(table: &ProfileCharacteristic, i: PlayerId, s: Coalition) -> f64 {
    if s.contains(i) {
        return 0.0;
    }
    table.value(s.with(i)) - table.value(s)
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Shapley value by the coalition-sum formula.
///
/// Weights are kept as integers `|S|! (n-|S|-1)!` and divided by `n!` once at
/// the end, so integer-valued additive tables give back their payoffs exactly.
pub fn shapley(table: &ProfileCharacteristic) -> Allocation {
    let n = table.n();
    let fact = factorials(n);
    let shares = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for s in Coalition::all(n).filter(|s| !s.contains(i)) {
                let k = s.len();
                acc += fact[k] * fact[n - k - 1] * marginal_contribution(table, i, s);
            }
            acc / fact[n]
        })
        .collect();
    Allocation::new(shares)
}

pub fn equal_split(table: &ProfileCharacteristic) -> Allocation {
    let n = table.n();
    let share = table.grand_value() / n as f64;
    Allocation::new(vec![share; n])
}

/// Own contribution plus an equal share of the surplus.
pub fn contribution_allocation(table: &ProfileCharacteristic, base: &[f64]) -> Result<Allocation> {
    contribution_with(table, base, None)
}

pub fn contribution_with(table: &ProfileCharacteristic, base: &[f64], weights: Option<&[f64]>) -> Result<Allocation> {
    let n = table.n();
    if base.len() != n {
        return Err(Error::InvalidProfile(format!("{} base payoffs for {n} players", base.len())));
    }
    let grand = table.grand_value();
    let base_total: f64 = base.iter().sum();
    if base_total > grand + 1e-9 {
        return Err(Error::InfeasibleAllocation {
            profile: table.profile().map(|p| p.to_string()).unwrap_or_default(),
            base_total,
            grand,
        });
    }
    let surplus = grand - base_total;
    let shares = match weights {
        None => base.iter().map(|b| b + surplus / n as f64).collect(),
        Some(w) => {
            if w.len() != n || w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParams(
                    "surplus weights must be nonnegative, one per player".into(),
                ));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!("surplus weights sum to {total}, not 1")));
            }
            base.iter().zip(w).map(|(b, wi)| b + wi * surplus).collect()
        }
    };
    Ok(Allocation::new(shares))
}

/// Everything the classifiers need to know about one profile.
#[derive(Debug, Clone)]
pub struct ProfileOutcome<P> {
    pub profile: P,
    pub payoffs: Vec<f64>,
    pub grand: f64,
    pub allocation: Vec<f64>,
}

/// A pair of profiles (and usually a player) on which a property fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<P> {
    pub x: P,
    pub y: P,
    pub player: Option<PlayerId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalition: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification<P> {
    pub holds: bool,
    pub witness: Option<Witness<P>>,
}

impl<P> Classification<P> {
    fn pass() -> Self {
        Classification {
            holds: true,
            witness: None,
        }
    }

    fn fail(w: Witness<P>) -> Self {
        Classification {
            holds: false,
            witness: Some(w),
        }
    }

    pub fn map<Q>(self, f: impl Fn(P) -> Q) -> Classification<Q> {
        Classification {
            holds: self.holds,
            witness: self.witness.map(|w| Witness {
                x: f(w.x),
                y: f(w.y),
                player: w.player,
                coalition: w.coalition,
                reason: w.reason,
            }),
        }
    }
}

/// Checks that a higher grand-coalition value never lowers anyone's share.
///
/// Sorts by `v(N)` and scans once, so it scales to dense grids.
pub fn egalitarian_on<P: Clone>(outcomes: &[ProfileOutcome<P>]) -> Classification<P> {
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    order.sort_by(|&a, &b| outcomes[a].grand.total_cmp(&outcomes[b].grand));
    let n = outcomes.first().map_or(0, |o| o.allocation.len());
    for i in 0..n {
        // best share seen in strictly lower groups, and who had it
        let mut lower_best: Option<usize> = None;
        let mut start = 0;
        while start < order.len() {
            let v = outcomes[order[start]].grand;
            let mut end = start;
            while end < order.len() && outcomes[order[end]].grand == v {
                end += 1;
            }
            let group = &order[start..end];
            let lo = *group
                .iter()
                .min_by(|&&a, &&b| outcomes[a].allocation[i].total_cmp(&outcomes[b].allocation[i]))
                .unwrap();
            let hi = *group
                .iter()
                .max_by(|&&a, &&b| outcomes[a].allocation[i].total_cmp(&outcomes[b].allocation[i]))
                .unwrap();
            if outcomes[lo].allocation[i] < outcomes[hi].allocation[i] {
                return Classification::fail(Witness {
                    x: outcomes[lo].profile.clone(),
                    y: outcomes[hi].profile.clone(),
                    player: Some(i),
                    coalition: None,
                    reason: "equal v(N) but unequal shares".into(),
                });
            }
            if let Some(b) = lower_best {
                if outcomes[lo].allocation[i] < outcomes[b].allocation[i] {
                    return Classification::fail(Witness {
                        x: outcomes[lo].profile.clone(),
                        y: outcomes[b].profile.clone(),
                        player: Some(i),
                        coalition: None,
                        reason: "v(N) at x exceeds v(N) at y but the share at x is smaller".into(),
                    });
                }
            }
            if lower_best.is_none_or(|b| outcomes[hi].allocation[i] > outcomes[b].allocation[i]) {
                lower_best = Some(hi);
            }
            start = end;
        }
    }
    Classification::pass()
}

fn weakly_below(a: &[f64], b: &[f64]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x > y)
}

/// Checks that shares and original payoffs induce the same componentwise
/// order on every ordered pair of profiles.
pub fn marginalist_on<P: Clone + Send + Sync>(outcomes: &[ProfileOutcome<P>]) -> Classification<P> {
    let hit = (0..outcomes.len()).into_par_iter().find_map_first(|a| {
        let x = &outcomes[a];
        outcomes.iter().find_map(|y| {
            let a_break = weakly_below(&x.allocation, &y.allocation);
            let f_break = weakly_below(&x.payoffs, &y.payoffs);
            match (a_break, f_break) {
                (None, Some(i)) => Some(Witness {
                    x: x.profile.clone(),
                    y: y.profile.clone(),
                    player: Some(i),
                    coalition: None,
                    reason: "a(x) <= a(y) componentwise but f(x) <= f(y) fails".into(),
                }),
                (Some(i), None) => Some(Witness {
                    x: x.profile.clone(),
                    y: y.profile.clone(),
                    player: Some(i),
                    coalition: None,
                    reason: "f(x) <= f(y) componentwise but a(x) <= a(y) fails".into(),
                }),
                _ => None,
            }
        })
    });
    match hit {
        Some(w) => Classification::fail(w),
        None => Classification::pass(),
    }
}

pub fn classify_egalitarian(rule: &AllocationRule, problem: &BiformProblem<FiniteGame>) -> Result<Classification<PureProfile>> {
    Ok(egalitarian_on(&problem.outcomes_with(rule)?))
}

pub fn classify_marginalist(rule: &AllocationRule, problem: &BiformProblem<FiniteGame>) -> Result<Classification<PureProfile>> {
    Ok(marginalist_on(&problem.outcomes_with(rule)?))
}

/// Grid version for continuous games. A failure is a genuine counterexample;
/// a pass only means none was found on the grid.
pub fn classify_egalitarian_grid(
    rule: &AllocationRule,
    problem: &BiformProblem<BoxGame>,
    points_per_axis: usize,
) -> Result<Classification<Vec<f64>>> {
    Ok(egalitarian_on(&problem.grid_outcomes_with(rule, points_per_axis)?))
}

pub fn classify_marginalist_grid(
    rule: &AllocationRule,
    problem: &BiformProblem<BoxGame>,
    points_per_axis: usize,
) -> Result<Classification<Vec<f64>>> {
    Ok(marginalist_on(&problem.grid_outcomes_with(rule, points_per_axis)?))
}

/// Checks that whenever `f_i(x) > f_i(y)`, player `i`'s marginal contribution
/// under `v_f` is larger at `x` than at `y` for every coalition without `i`.
pub fn is_payoff_dominant(problem: &BiformProblem<FiniteGame>) -> Result<Classification<PureProfile>> {
    let game = &problem.game;
    let n = game.players().len();
    let profiles = problem.collab_profiles()?;
    let tables: Vec<ProfileCharacteristic> = profiles
        .iter()
        .map(|x| problem.characteristic(x))
        .collect::<Result<_>>()?;
    let payoffs: Vec<&[f64]> = profiles
        .iter()
        .map(|x| game.payoff(x))
        .collect::<Result<_>>()?;
    for i in 0..n {
        for (a, x) in profiles.iter().enumerate() {
            for (b, y) in profiles.iter().enumerate() {
                if payoffs[a][i] <= payoffs[b][i] {
                    continue;
                }
                for s in Coalition::all(n).filter(|s| !s.contains(i)) {
                    let mx = marginal_contribution(&tables[a], i, s);
                    let my = marginal_contribution(&tables[b], i, s);
                    if mx <= my {
                        return Ok(Classification::fail(Witness {
                            x: x.clone(),
                            y: y.clone(),
                            player: Some(i),
                            coalition: Some(s.to_string()),
                            reason: format!("f_i(x) > f_i(y) but m_i(S,x) = {mx} <= m_i(S,y) = {my}"),
                        }));
                    }
                }
            }
        }
    }
    Ok(Classification::pass())
}
