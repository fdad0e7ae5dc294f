//! Three departments deciding whether to take part in a joint regulation task.
//!
//! A task worth `R` is credited equally to all three departments once anyone
//! works on it; the participants split the cost `C`. Working together saves
//! cost: two departments pay `rC` between them, three pay `q_syn C`. Player
//! `i` chooses `x_i`, the probability of participating.

use serde::{Deserialize, Serialize};

use super::{all_finite, require, CaseModel, CaseOutput};
use crate::allocation::AllocationRule;
use crate::biform::BiformProblem;
use crate::coalition::Synergy;
use crate::equilibrium::{solve_box_nash, NashResult, SolverConfig};
use crate::error::Result;
use crate::game::{BoxGame, Coalition, FiniteGame, PureProfile};
use crate::report::Cell;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegulationParams {
    /// Value of the completed task.
    #[serde(rename = "R")]
    pub reward: f64,
    /// Cost of completing it alone.
    #[serde(rename = "C")]
    pub cost: f64,
    /// Two-department cost factor.
    pub r: f64,
    /// Three-department cost factor.
    pub q_syn: f64,
}

impl Default for RegulationParams {
    fn default() -> Self {
        RegulationParams {
            reward: 1.5,
            cost: 1.0,
            r: 0.8,
            q_syn: 0.6,
        }
    }
}

/// Participation pattern; index `i` is true when department `i` takes part.
pub type Participation = [bool; 3];

fn participation(k: usize) -> Participation {
    [k & 4 != 0, k & 2 != 0, k & 1 != 0]
}

/// Probability of a participation pattern when department `i` takes part with
/// probability `x[i]`.
fn pattern_weight(x: &[f64], p: Participation) -> f64 {
    x.iter().zip(p).map(|(&xi, on)| if on { xi } else { 1.0 - xi }).product()
}

/// Solutions of the plain game and of the two induced games.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulationSolutions {
    pub nash: NashResult,
    pub shapley: NashResult,
    pub equal: NashResult,
}

impl RegulationParams {
    pub fn validate(&self) -> Result<()> {
        all_finite(&[("R", self.reward), ("C", self.cost), ("r", self.r), ("q_syn", self.q_syn)])?;
        require(self.reward > self.cost && self.reward / 2.0 < self.cost, || {
            format!("need R > C and R/2 < C, got R = {}, C = {}", self.reward, self.cost)
        })?;
        require(self.q_syn < self.r && self.r < 1.0, || {
            format!("need q_syn < r < 1, got q_syn = {}, r = {}", self.q_syn, self.r)
        })
    }

    /// Payoffs for a pure participation pattern.
    pub fn pure_payoffs(&self, p: Participation) -> [f64; 3] {
        let k = p.iter().filter(|&&on| on).count();
        if k == 0 {
            return [0.0; 3];
        }
        let share = self.reward / 3.0;
        let cost = self.cost / k as f64;
        p.map(|on| if on { share - cost } else { share })
    }

    /// Coalition value for a pure pattern: members who both participate pool
    /// their costs.
    pub fn pure_value(&self, s: Coalition, p: Participation) -> f64 {
        let pi = self.pure_payoffs(p);
        let members: Vec<usize> = s.members().collect();
        let k = p.iter().filter(|&&on| on).count();
        match members.len() {
            2 if members.iter().all(|&i| p[i]) => {
                let per = if k == 3 { self.r * self.cost / 3.0 } else { self.r * self.cost / 2.0 };
                2.0 * (self.reward / 3.0 - per)
            }
            3 => match k {
                0 => 0.0,
                1 => self.reward - self.cost,
                2 => self.reward - self.r * self.cost,
                _ => self.reward - self.q_syn * self.cost,
            },
            _ => members.iter().map(|&i| pi[i]).sum(),
        }
    }

    /// Extra value of `s` over the sum of its members' payoffs.
    pub fn pure_delta(&self, s: Coalition, p: Participation) -> f64 {
        let pi = self.pure_payoffs(p);
        let sum: f64 = s.members().map(|i| pi[i]).sum();
        (self.pure_value(s, p) - sum).max(0.0)
    }

    /// Expected synergy under independent participation.
    pub fn mixed_delta(&self, s: Coalition, x: &[f64]) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        (0..8)
            .map(|k| {
                let p = participation(k);
                pattern_weight(x, p) * self.pure_delta(s, p)
            })
            .sum()
    }

    /// Expected payoffs under independent participation.
    pub fn payoffs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 3];
        for k in 0..8 {
            let p = participation(k);
            let w = pattern_weight(x, p);
            for (o, v) in out.iter_mut().zip(self.pure_payoffs(p)) {
                *o += w * v;
            }
        }
        out
    }

    /// Polynomial form of department `i`'s expected payoff.
    pub fn payoff_closed_form(&self, i: usize, x: &[f64]) -> f64 {
        let (own, a, b) = own_and_others(i, x);
        let (r, c) = (self.reward, self.cost);
        own * (r / 3.0 - c + c * (a + b) / 2.0 - c * a * b / 3.0) + (1.0 - own) * (r / 3.0) * (a + b - a * b)
    }

    /// Derivative of department `i`'s payoff in its own participation.
    pub fn own_slope(&self, i: usize, x: &[f64]) -> f64 {
        let (_, a, b) = own_and_others(i, x);
        let (r, c) = (self.reward, self.cost);
        (r / 3.0 - c / 3.0) * a * b - (r / 3.0 - c / 2.0) * (a + b) + (r / 3.0 - c)
    }

    /// Polynomial form of the grand-coalition value.
    pub fn grand_value_closed_form(&self, x: &[f64]) -> f64 {
        let (r, c, rr, q) = (self.reward, self.cost, self.r, self.q_syn);
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        (r - 3.0 * c + 3.0 * rr * c - q * c) * x1 * x2 * x3 - (r + rr * c - 2.0 * c) * (x1 * x2 + x1 * x3 + x2 * x3)
            + (r - c) * (x1 + x2 + x3)
    }

    /// Polynomial form of department `i`'s Shapley value.
    pub fn shapley_closed_form(&self, i: usize, x: &[f64]) -> f64 {
        let (own, a, b) = own_and_others(i, x);
        let (r, c, rr, q) = (self.reward, self.cost, self.r, self.q_syn);
        ((r - 3.0 * c + 3.0 * rr * c - q * c) * own * a * b
            - (r - 3.0 * c + 1.5 * rr * c) * (own * a + own * b)
            - r * a * b
            + (r - 3.0 * c) * own
            + r * (a + b))
            / 3.0
    }

    /// Equal-split payoff at full participation, `(R - q_syn C) / 3`.
    pub fn equal_split_value(&self) -> f64 {
        (self.reward - self.q_syn * self.cost) / 3.0
    }

    /// Participation game on `[0, 1]^3`.
    pub fn game(&self) -> Result<BoxGame> {
        self.validate()?;
        let p = self.clone();
        BoxGame::new(vec![(0.0, 1.0); 3], move |x| p.payoffs(x))
    }

    /// Participation game with the expected synergy attached.
    pub fn problem(&self, rule: AllocationRule) -> Result<BiformProblem<BoxGame>> {
        let p = self.clone();
        Ok(BiformProblem::new(self.game()?)
            .with_rule(rule)
            .with_delta(Synergy::from_fn(move |s, x: &Vec<f64>| p.mixed_delta(s, x))))
    }

    /// Pure version: strategy 0 is `p` (participate), strategy 1 is `np`.
    pub fn pure_game(&self) -> Result<FiniteGame> {
        self.validate()?;
        let p = self.clone();
        FiniteGame::from_fn_labeled(
            vec!["department 1".into(), "department 2".into(), "department 3".into()],
            vec![vec!["p".into(), "np".into()]; 3],
            move |x| p.pure_payoffs(pure_pattern(x.choices())).to_vec(),
        )
    }

    pub fn pure_problem(&self, rule: AllocationRule) -> Result<BiformProblem<FiniteGame>> {
        let p = self.clone();
        Ok(BiformProblem::new(self.pure_game()?)
            .with_rule(rule)
            .with_delta(Synergy::from_fn(move |s, x: &PureProfile| p.pure_delta(s, pure_pattern(x.choices())))))
    }

    /// Numeric solutions of the plain game and the Shapley and equal-split
    /// induced games.
    pub fn solve(&self, cfg: &SolverConfig) -> Result<RegulationSolutions> {
        Ok(RegulationSolutions {
            nash: solve_box_nash(&self.game()?, cfg)?,
            shapley: self.problem(AllocationRule::Shapley)?.solve(cfg)?,
            equal: self.problem(AllocationRule::EqualSplit)?.solve(cfg)?,
        })
    }
}

fn pure_pattern(x: &[usize]) -> Participation {
    [x[0] == 0, x[1] == 0, x[2] == 0]
}

fn own_and_others(i: usize, x: &[f64]) -> (f64, f64, f64) {
    let others: Vec<f64> = (0..3).filter(|&j| j != i).map(|j| x[j]).collect();
    (x[i], others[0], others[1])
}

/// The participation problem under `rule`.
pub fn regulation_game(p: &RegulationParams, rule: AllocationRule) -> Result<BiformProblem<BoxGame>> {
    p.problem(rule)
}

fn solution_cells(result: &NashResult, label: &str, warnings: &mut Vec<String>) -> Vec<Cell> {
    match result.equilibria.first() {
        Some(eq) => {
            if result.equilibria.len() > 1 {
                warnings.push(format!("{label}: {} equilibria, first shown", result.equilibria.len()));
            }
            let x = match &eq.profile {
                crate::game::ProfilePoint::Continuous(x) => x.clone(),
                crate::game::ProfilePoint::Pure(x) => x.iter().map(|&k| k as f64).collect(),
            };
            x.into_iter().chain(eq.payoffs.iter().copied()).map(Cell::Num).collect()
        }
        None => {
            warnings.push(format!("{label}: no equilibrium found"));
            vec![Cell::Empty; 6]
        }
    }
}

impl CaseModel for RegulationParams {
    const PARAM_NAMES: &'static [&'static str] = &["R", "C", "r", "q_syn"];
    const OUTPUT_NAMES: &'static [&'static str] = &[
        "branch",
        "nash_x1",
        "nash_x2",
        "nash_x3",
        "nash_payoff1",
        "nash_payoff2",
        "nash_payoff3",
        "shapley_x1",
        "shapley_x2",
        "shapley_x3",
        "shapley_payoff1",
        "shapley_payoff2",
        "shapley_payoff3",
        "equal_x1",
        "equal_x2",
        "equal_x3",
        "equal_payoff1",
        "equal_payoff2",
        "equal_payoff3",
        "equal_value",
    ];

    fn validate(&self) -> Result<()> {
        RegulationParams::validate(self)
    }

    fn outputs(&self, cfg: &SolverConfig) -> Result<CaseOutput> {
        let sol = self.solve(cfg)?;
        let mut warnings = Vec::new();
        let mut cells = vec![Cell::text("-")];
        cells.extend(solution_cells(&sol.nash, "nash", &mut warnings));
        cells.extend(solution_cells(&sol.shapley, "shapley", &mut warnings));
        cells.extend(solution_cells(&sol.equal, "equal", &mut warnings));
        cells.push(Cell::Num(self.equal_split_value()));
        Ok(CaseOutput { cells, warnings })
    }
}
