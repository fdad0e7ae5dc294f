//! Biform problems: a strategic game plus a synergy term, an allocation rule
//! and a collaboration set, and the non-cooperative game they induce.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{
    classify_egalitarian, classify_egalitarian_grid, classify_marginalist, classify_marginalist_grid, Allocation,
    AllocationRule, Classification, ProfileOutcome,
};
use crate::coalition::{grand_value, v_f, ProfileCharacteristic, Synergy};
use crate::equilibrium::{
    accept_residual, deviation_gains, pareto_check, pure_nash_restricted, solve_box_nash, NashResult, SolverConfig,
};
use crate::error::{Error, Result};
use crate::game::{BoxGame, FiniteGame, PlayerId, ProfilePoint, PureProfile, StrategicGame};
use crate::optimize::{grid, maximize_1d};

/// Profiles the players may agree on.
///
/// For finite games a list of profiles, for box games a sub-box. The induced
/// game only lives on this set: deviations that leave it are not available.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CollabSet {
    #[default]
    All,
    Profiles(Vec<PureProfile>),
    Box(Vec<(f64, f64)>),
}

#[derive(Debug, Clone)]
pub struct BiformProblem<G: StrategicGame> {
    pub game: G,
    pub delta: Synergy<G::Profile>,
    pub rule: AllocationRule,
    pub collab: CollabSet,
}

impl<G: StrategicGame> BiformProblem<G> {
    /// No synergy, Shapley rule, unrestricted collaboration.
    pub fn new(game: G) -> Self {
        BiformProblem {
            game,
            delta: Synergy::zero(),
            rule: AllocationRule::Shapley,
            collab: CollabSet::All,
        }
    }

    pub fn with_rule(mut self, rule: AllocationRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_delta(mut self, delta: Synergy<G::Profile>) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_collab(mut self, collab: CollabSet) -> Self {
        self.collab = collab;
        self
    }

    pub fn characteristic(&self, x: &G::Profile) -> Result<ProfileCharacteristic> {
        v_f(&self.game, x, &self.delta)
    }

    /// Allocation of `rule` at `x`.
    pub fn allocation_with(&self, rule: &AllocationRule, x: &G::Profile) -> Result<Allocation> {
        let table = self.characteristic(x)?;
        let base = self.game.payoff_vector(x)?;
        rule.allocate(&table, &base)
    }

    pub fn allocation(&self, x: &G::Profile) -> Result<Allocation> {
        self.allocation_with(&self.rule, x)
    }

    fn outcome(&self, rule: &AllocationRule, x: &G::Profile) -> Result<ProfileOutcome<G::Profile>> {
        let table = self.characteristic(x)?;
        let payoffs = self.game.payoff_vector(x)?;
        let allocation = rule.allocate(&table, &payoffs)?.into_shares();
        Ok(ProfileOutcome {
            profile: x.clone(),
            grand: table.grand_value(),
            payoffs,
            allocation,
        })
    }
}

/// Payoffs of the induced game on a finite game. Entries outside the
/// collaboration set are zero placeholders and are masked out by `allowed`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFinite {
    pub game: FiniteGame,
    pub allowed: Vec<bool>,
}

impl DerivedFinite {
    pub fn payoff(&self, x: &PureProfile) -> Result<Option<&[f64]>> {
        let k = self.game.index_of(x)?;
        Ok(self.allowed[k].then(|| self.game.payoff_at(k)))
    }

    pub fn is_restricted(&self) -> bool {
        self.allowed.iter().any(|a| !a)
    }
}

impl BiformProblem<FiniteGame> {
    /// The collaboration set as a sorted, duplicate-free list of profiles.
    pub fn collab_profiles(&self) -> Result<Vec<PureProfile>> {
        match &self.collab {
            CollabSet::All => Ok(self.game.profiles().collect()),
            CollabSet::Profiles(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidProfile("collaboration set is empty".into()));
                }
                let mut v = list.clone();
                for x in &v {
                    self.game.index_of(x)?;
                }
                v.sort();
                v.dedup();
                Ok(v)
            }
            CollabSet::Box(_) => Err(Error::UnsupportedShape(
                "a box restriction needs a continuous game".into(),
            )),
        }
    }

    pub fn allowed_mask(&self) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.game.profile_count()];
        for x in self.collab_profiles()? {
            mask[self.game.index_of(&x)?] = true;
        }
        Ok(mask)
    }

    pub fn outcomes_with(&self, rule: &AllocationRule) -> Result<Vec<ProfileOutcome<PureProfile>>> {
        self.collab_profiles()?.iter().map(|x| self.outcome(rule, x)).collect()
    }

    pub fn derive(&self) -> Result<DerivedFinite> {
        let allowed = self.allowed_mask()?;
        let n = self.game.n_players();
        let mut rows = Vec::with_capacity(allowed.len());
        for (k, x) in self.game.profiles().enumerate() {
            if !allowed[k] {
                rows.push(vec![0.0; n]);
                continue;
            }
            let a = self.allocation(&x).map_err(|e| match e {
                Error::InfeasibleAllocation { base_total, grand, .. } => Error::InfeasibleAllocation {
                    profile: self.game.format_profile(&x),
                    base_total,
                    grand,
                },
                other => other,
            })?;
            rows.push(a.into_shares());
        }
        let game = FiniteGame::new(self.game.players().to_vec(), self.game.strategies().to_vec(), rows)?;
        Ok(DerivedFinite { game, allowed })
    }

    pub fn solve(&self) -> Result<NashResult> {
        let derived = self.derive()?;
        Ok(pure_nash_restricted(&derived.game, Some(&derived.allowed)))
    }
}

impl BiformProblem<BoxGame> {
    /// The game's box intersected with the collaboration box.
    pub fn collab_game(&self) -> Result<BoxGame> {
        match &self.collab {
            CollabSet::All => Ok(self.game.clone()),
            CollabSet::Box(bounds) => self.game.restricted(bounds),
            CollabSet::Profiles(_) => Err(Error::UnsupportedShape(
                "a profile list needs a finite game".into(),
            )),
        }
    }

    /// Induced game on the collaboration box. Profiles where the rule is
    /// infeasible make the oracle fail with the offending point.
    pub fn derive(&self) -> Result<BoxGame> {
        let base = self.collab_game()?;
        let game = self.game.clone();
        let delta = self.delta.clone();
        let rule = self.rule.clone();
        let n = base.n_players();
        BoxGame::from_oracle(
            base.bounds().to_vec(),
            Arc::new(move |x: &[f64]| {
                let x = x.to_vec();
                let shares = v_f(&game, &x, &delta).and_then(|table| {
                    let f = game.payoff_vector(&x)?;
                    rule.allocate(&table, &f)
                });
                match shares {
                    Ok(a) => a.into_shares(),
                    Err(_) => vec![f64::NAN; n],
                }
            }),
        )
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<NashResult> {
        solve_box_nash(&self.derive()?, cfg)
    }

    /// Outcomes on a uniform grid with `points_per_axis` nodes per player.
    pub fn grid_outcomes_with(&self, rule: &AllocationRule, points_per_axis: usize) -> Result<Vec<ProfileOutcome<Vec<f64>>>> {
        let nodes = axis_grids(&self.collab_game()?, points_per_axis);
        grid_points(&nodes)
            .into_par_iter()
            .map(|x| self.outcome(rule, &x))
            .collect()
    }
}

fn axis_grids(game: &BoxGame, points: usize) -> Vec<Vec<f64>> {
    game.bounds().iter().map(|&(lo, hi)| grid(lo, hi, points)).collect()
}

/// Cartesian product of per-axis node lists, first axis slowest.
fn grid_points(nodes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = nodes.iter().map(Vec::len).product();
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; nodes.len()];
            for i in (0..nodes.len()).rev() {
                x[i] = nodes[i][k % nodes[i].len()];
                k /= nodes[i].len();
            }
            x
        })
        .collect()
}

/// Problems that can be turned into a non-cooperative game and solved.
pub trait Solvable {
    type Derived;

    fn derive_game(&self) -> Result<Self::Derived>;

    fn solve_with(&self, cfg: &SolverConfig) -> Result<NashResult>;
}

impl Solvable for BiformProblem<FiniteGame> {
    type Derived = DerivedFinite;

    fn derive_game(&self) -> Result<DerivedFinite> {
        self.derive()
    }

    fn solve_with(&self, _cfg: &SolverConfig) -> Result<NashResult> {
        self.solve()
    }
}

impl Solvable for BiformProblem<BoxGame> {
    type Derived = BoxGame;

    fn derive_game(&self) -> Result<BoxGame> {
        self.derive()
    }

    fn solve_with(&self, cfg: &SolverConfig) -> Result<NashResult> {
        self.solve(cfg)
    }
}

/// The induced non-cooperative game whose payoffs are the allocations.
pub fn derive<P: Solvable>(problem: &P) -> Result<P::Derived> {
    problem.derive_game()
}

/// Nash equilibria of the induced game: the biform solutions.
pub fn solve_biform<P: Solvable>(problem: &P, cfg: &SolverConfig) -> Result<NashResult> {
    problem.solve_with(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalistReport {
    pub holds: bool,
    /// Whether the rule passed the marginalist check on this problem.
    pub precondition: Classification<PureProfile>,
    pub original: Vec<PureProfile>,
    pub derived: Vec<PureProfile>,
    pub only_original: Vec<PureProfile>,
    pub only_derived: Vec<PureProfile>,
}

/// Compares the Nash set of the original game with the biform solutions for
/// a rule that should be marginalist. A rule failing that check is reported
/// as a precondition failure, never as a pass.
pub fn verify_prop_marginalist(problem: &BiformProblem<FiniteGame>) -> Result<MarginalistReport> {
    let precondition = classify_marginalist(&problem.rule, problem)?;
    let allowed = problem.allowed_mask()?;
    let original = pure_nash_restricted(&problem.game, Some(&allowed)).pure_profiles();
    let derived = problem.solve()?.pure_profiles();
    let only_original: Vec<PureProfile> = original.iter().filter(|x| !derived.contains(x)).cloned().collect();
    let only_derived: Vec<PureProfile> = derived.iter().filter(|x| !original.contains(x)).cloned().collect();
    Ok(MarginalistReport {
        holds: precondition.holds && only_original.is_empty() && only_derived.is_empty(),
        precondition,
        original,
        derived,
        only_original,
        only_derived,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxComparison {
    pub holds: bool,
    pub precondition: Classification<Vec<f64>>,
    pub original: Vec<Vec<f64>>,
    pub derived: Vec<Vec<f64>>,
}

/// Continuous counterpart of [`verify_prop_marginalist`]: solves both games
/// numerically and matches equilibria within `1e-6` per coordinate. The rule
/// is screened on a grid of `points_per_axis` nodes per player.
pub fn verify_prop_marginalist_box(
    problem: &BiformProblem<BoxGame>,
    cfg: &SolverConfig,
    points_per_axis: usize,
) -> Result<BoxComparison> {
    let precondition = classify_marginalist_grid(&problem.rule, problem, points_per_axis)?;
    let original = solve_box_nash(&problem.collab_game()?, cfg)?.points();
    let derived = problem.solve(cfg)?.points();
    let close = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-6);
    let matched = original.len() == derived.len()
        && original.iter().all(|a| derived.iter().any(|b| close(a, b)))
        && derived.iter().all(|b| original.iter().any(|a| close(a, b)));
    Ok(BoxComparison {
        holds: precondition.holds && matched && !original.is_empty(),
        precondition,
        original,
        derived,
    })
}

/// A profitable deviation away from a claimed solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationWitness {
    pub profile: ProfilePoint,
    pub player: PlayerId,
    pub deviation: ProfilePoint,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgalitarianReport<P> {
    pub holds: bool,
    pub precondition: Classification<P>,
    pub argmax: Vec<P>,
    pub grand_value: f64,
    pub failures: Vec<DeviationWitness>,
    /// Pareto optimality of the argmax payoffs in the original game; only
    /// checked when there is no synergy and no restriction.
    pub pareto_optimal: Option<bool>,
}

/// Checks that every maximizer of `v_f(N, .)` over the collaboration set is a
/// biform solution, and for zero synergy that its payoff is Pareto optimal.
pub fn verify_prop_egalitarian(problem: &BiformProblem<FiniteGame>) -> Result<EgalitarianReport<PureProfile>> {
    let precondition = classify_egalitarian(&problem.rule, problem)?;
    let profiles = problem.collab_profiles()?;
    let mut values = Vec::with_capacity(profiles.len());
    for x in &profiles {
        values.push(grand_value(&problem.game, x, &problem.delta)?);
    }
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax: Vec<PureProfile> = profiles
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v == best)
        .map(|(x, _)| x.clone())
        .collect();

    let derived = problem.derive()?;
    let counts = problem.game.strategy_counts();
    let mut failures = Vec::new();
    for x in &argmax {
        let ax = derived.payoff(x)?.expect("argmax lies in the collaboration set").to_vec();
        for (i, &k) in counts.iter().enumerate() {
            for s in 0..k {
                let y = x.deviate(i, s);
                if let Some(ay) = derived.payoff(&y)? {
                    if ay[i] > ax[i] {
                        failures.push(DeviationWitness {
                            profile: ProfilePoint::Pure(x.0.clone()),
                            player: i,
                            deviation: ProfilePoint::Pure(y.0.clone()),
                            gain: ay[i] - ax[i],
                        });
                    }
                }
            }
        }
    }

    let pareto_optimal = if problem.delta.is_zero() && matches!(problem.collab, CollabSet::All) {
        let mut all = true;
        for x in &argmax {
            all &= pareto_check(&problem.game, x)?.optimal;
        }
        Some(all)
    } else {
        None
    };
    Ok(EgalitarianReport {
        holds: precondition.holds && failures.is_empty() && pareto_optimal != Some(false),
        precondition,
        argmax,
        grand_value: best,
        failures,
        pareto_optimal,
    })
}

/// Grid nodes per axis for the argmax search: 129 up to three players,
/// fewer beyond so the grid stays near 129^3 nodes.
fn argmax_points(n: usize) -> usize {
    if n <= 3 {
        129
    } else {
        ((129f64.powi(3)).powf(1.0 / n as f64).floor() as usize).max(3)
    }
}

/// Maximizer of `v_f(N, .)` over the collaboration box by grid scan and
/// coordinate-wise polish.
pub fn grand_argmax_box(problem: &BiformProblem<BoxGame>, cfg: &SolverConfig) -> Result<(Vec<f64>, f64)> {
    let game = problem.collab_game()?;
    let nodes = axis_grids(&game, argmax_points(game.n_players()));
    let value = |x: &Vec<f64>| grand_value(&problem.game, x, &problem.delta);
    let candidates = grid_points(&nodes);
    let scored: Vec<f64> = candidates.par_iter().map(value).collect::<Result<_>>()?;
    let mut k_best = 0;
    for (k, v) in scored.iter().enumerate() {
        if *v > scored[k_best] {
            k_best = k;
        }
    }
    let mut x = candidates[k_best].clone();
    let mut best = scored[k_best];
    for _ in 0..20 {
        let before = best;
        for (i, &(lo, hi)) in game.bounds().iter().enumerate() {
            let mut y = x.clone();
            let o = maximize_1d(
                |t| {
                    y[i] = t;
                    value(&y)
                },
                lo,
                hi,
                cfg.grid_points,
                cfg.tol,
            )?;
            if o.value > best {
                x[i] = o.x;
                best = o.value;
            }
        }
        if best - before <= cfg.tol * best.abs().max(1.0) {
            break;
        }
    }
    Ok((x, best))
}

/// Continuous counterpart of [`verify_prop_egalitarian`]: the numeric argmax
/// must have a negligible deviation gain in the induced game. The rule is
/// screened on a grid of `points_per_axis` nodes per player.
pub fn verify_prop_egalitarian_box(
    problem: &BiformProblem<BoxGame>,
    cfg: &SolverConfig,
    points_per_axis: usize,
) -> Result<EgalitarianReport<Vec<f64>>> {
    cfg.validate()?;
    let precondition = classify_egalitarian_grid(&problem.rule, problem, points_per_axis)?;
    let (x, best) = grand_argmax_box(problem, cfg)?;
    let derived = problem.derive()?;
    let payoffs = derived.eval(&x)?;
    let gains = deviation_gains(&derived, &x, cfg.grid_points, cfg.tol)?;
    let failures = gains
        .iter()
        .enumerate()
        .filter(|(_, g)| !accept_residual(**g, &payoffs, cfg.tol))
        .map(|(i, &gain)| DeviationWitness {
            profile: ProfilePoint::Continuous(x.clone()),
            player: i,
            deviation: ProfilePoint::Continuous(x.clone()),
            gain,
        })
        .collect::<Vec<_>>();
    Ok(EgalitarianReport {
        holds: precondition.holds && failures.is_empty(),
        precondition,
        argmax: vec![x],
        grand_value: best,
        failures,
        pareto_optimal: None,
    })
}
