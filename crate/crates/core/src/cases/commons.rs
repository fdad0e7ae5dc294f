//! The herders' commons: a two-by-two table and a continuous stocking game.

use serde::{Deserialize, Serialize};

use super::{all_finite, require, CaseModel, CaseOutput};
use crate::allocation::AllocationRule;
use crate::biform::BiformProblem;
use crate::equilibrium::SolverConfig;
use crate::error::Result;
use crate::game::{BoxGame, FiniteGame};
use crate::optimize::{bisect, maximize_1d, Optimum};
use crate::report::Cell;

/// Two herders choosing to cooperate (`C`, graze moderately) or not (`NC`).
pub fn table1() -> FiniteGame {
    FiniteGame::new(
        vec!["herder 1".into(), "herder 2".into()],
        vec![vec!["C".into(), "NC".into()]; 2],
        vec![vec![10.0, 10.0], vec![0.0, 12.0], vec![12.0, 0.0], vec![5.0, 5.0]],
    )
    .expect("the commons table is well formed")
}

/// The table with no synergy under `rule`.
pub fn commons_discrete(rule: AllocationRule) -> BiformProblem<FiniteGame> {
    BiformProblem::new(table1()).with_rule(rule)
}

/// Family of the price-per-sheep curve `mu(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuKind {
    /// `mu(q) = 1 - (1 - c0) q / M`
    #[default]
    Linear,
    /// `mu(q) = 1 - (1 - c0) [s q/M + (1 - s)(q/M)^2]` with `s = mix`
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommonsParams {
    /// Carrying capacity of the pasture.
    #[serde(rename = "M")]
    pub capacity: f64,
    /// Cost of raising one sheep, in `(0, 1)`; the price of a sheep on an
    /// empty pasture is 1.
    pub c0: f64,
    pub mu_kind: MuKind,
    /// Linear weight of the quadratic family, in `[0, 1)`.
    pub mix: f64,
}

impl Default for CommonsParams {
    fn default() -> Self {
        CommonsParams {
            capacity: 3.0,
            c0: 0.4,
            mu_kind: MuKind::Linear,
            mix: 0.5,
        }
    }
}

/// Stocks and per-herder profits in the symmetric solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommonsSummary {
    /// Total stock when each herder maximizes their own profit.
    pub nash_total: f64,
    /// Total stock maximizing joint profit.
    pub coop_total: f64,
    pub nash_profit_each: f64,
    pub coop_profit_each: f64,
}

impl CommonsParams {
    pub fn linear(capacity: f64, c0: f64) -> Self {
        CommonsParams {
            capacity,
            c0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        all_finite(&[("M", self.capacity), ("c0", self.c0), ("mix", self.mix)])?;
        require(self.capacity > 0.0, || format!("M must be positive, got {}", self.capacity))?;
        require(self.c0 > 0.0 && self.c0 < 1.0, || format!("c0 must lie in (0, 1), got {}", self.c0))?;
        if self.mu_kind == MuKind::Quadratic {
            require((0.0..1.0).contains(&self.mix), || {
                format!("mix must lie in [0, 1) for the quadratic family, got {}", self.mix)
            })?;
        }
        Ok(())
    }

    fn slope_weight(&self) -> f64 {
        match self.mu_kind {
            MuKind::Linear => 1.0,
            MuKind::Quadratic => self.mix,
        }
    }

    /// Price of a sheep when `q` sheep graze.
    pub fn mu(&self, q: f64) -> f64 {
        let s = self.slope_weight();
        let t = q / self.capacity;
        1.0 - (1.0 - self.c0) * (s * t + (1.0 - s) * t * t)
    }

    pub fn mu_prime(&self, q: f64) -> f64 {
        let s = self.slope_weight();
        let t = q / self.capacity;
        -(1.0 - self.c0) * (s + 2.0 * (1.0 - s) * t) / self.capacity
    }

    pub fn mu_second(&self) -> f64 {
        let s = self.slope_weight();
        -2.0 * (1.0 - self.c0) * (1.0 - s) / (self.capacity * self.capacity)
    }

    /// Profits `(mu(q1 + q2) - c0) q_i`.
    pub fn profits(&self, q: &[f64]) -> Vec<f64> {
        let margin = self.mu(q.iter().sum()) - self.c0;
        q.iter().map(|qi| margin * qi).collect()
    }

    /// Joint profit at total stock `q`.
    pub fn total_profit(&self, q: f64) -> f64 {
        (self.mu(q) - self.c0) * q
    }

    /// Stocking game on `[0, M]^2`.
    pub fn game(&self) -> Result<BoxGame> {
        self.validate()?;
        let p = self.clone();
        BoxGame::new(vec![(0.0, self.capacity); 2], move |q| p.profits(q))
    }

    /// Symmetric Nash condition `mu'(Q) Q / 2 + mu(Q) - c0` at total `Q`.
    pub fn nash_condition(&self, q: f64) -> f64 {
        self.mu_prime(q) * q / 2.0 + self.mu(q) - self.c0
    }

    /// Joint optimum condition `mu'(Q) Q + mu(Q) - c0` at total `Q`.
    pub fn coop_condition(&self, q: f64) -> f64 {
        self.mu_prime(q) * q + self.mu(q) - self.c0
    }

    pub fn nash_total(&self) -> Result<f64> {
        self.validate()?;
        bisect(|q| self.nash_condition(q), 0.0, self.capacity, 1e-15)
    }

    pub fn coop_total(&self) -> Result<f64> {
        self.validate()?;
        bisect(|q| self.coop_condition(q), 0.0, self.capacity, 1e-15)
    }

    /// Joint optimum found by direct maximization of the joint profit.
    pub fn coop_total_numeric(&self, cfg: &SolverConfig) -> Result<Optimum> {
        self.validate()?;
        maximize_1d(|q| Ok(self.total_profit(q)), 0.0, 2.0 * self.capacity, cfg.grid_points, 1e-12)
    }

    pub fn summary(&self) -> Result<CommonsSummary> {
        let nash_total = self.nash_total()?;
        let coop_total = self.coop_total()?;
        Ok(CommonsSummary {
            nash_total,
            coop_total,
            nash_profit_each: self.total_profit(nash_total) / 2.0,
            coop_profit_each: self.total_profit(coop_total) / 2.0,
        })
    }
}

/// The continuous game and its analytic summary.
pub fn commons_continuous(p: &CommonsParams) -> Result<(BoxGame, CommonsSummary)> {
    Ok((p.game()?, p.summary()?))
}

impl CaseModel for CommonsParams {
    const PARAM_NAMES: &'static [&'static str] = &["M", "c0", "mu_kind", "mix"];
    const OUTPUT_NAMES: &'static [&'static str] = &[
        "branch",
        "nash_q1",
        "nash_q2",
        "coop_q1",
        "coop_q2",
        "nash_profit1",
        "nash_profit2",
        "coop_profit1",
        "coop_profit2",
        "nash_total_profit",
        "coop_total_profit",
    ];

    fn validate(&self) -> Result<()> {
        CommonsParams::validate(self)
    }

    fn outputs(&self, _cfg: &SolverConfig) -> Result<CaseOutput> {
        let s = self.summary()?;
        let branch = match self.mu_kind {
            MuKind::Linear => "linear",
            MuKind::Quadratic => "quadratic",
        };
        let cells = vec![
            Cell::text(branch),
            Cell::Num(s.nash_total / 2.0),
            Cell::Num(s.nash_total / 2.0),
            Cell::Num(s.coop_total / 2.0),
            Cell::Num(s.coop_total / 2.0),
            Cell::Num(s.nash_profit_each),
            Cell::Num(s.nash_profit_each),
            Cell::Num(s.coop_profit_each),
            Cell::Num(s.coop_profit_each),
            Cell::Num(2.0 * s.nash_profit_each),
            Cell::Num(2.0 * s.coop_profit_each),
        ];
        Ok(CaseOutput { cells, warnings: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let s = CommonsParams::default().summary().unwrap();
        assert!((s.nash_total - 2.0).abs() < 1e-12);
        assert!((s.coop_total - 1.5).abs() < 1e-12);
        assert!((s.nash_profit_each - 0.2).abs() < 1e-12);
        assert!((s.coop_profit_each - 0.225).abs() < 1e-12);
    }

    #[test]
    fn quadratic_family_keeps_endpoints() {
        let p = CommonsParams {
            mu_kind: MuKind::Quadratic,
            ..Default::default()
        };
        assert_eq!(p.mu(0.0), 1.0);
        assert!((p.mu(p.capacity) - p.c0).abs() < 1e-15);
        assert!(p.mu_second() < 0.0);
    }

    #[test]
    fn rejects_bad_cost() {
        assert!(CommonsParams::linear(3.0, 1.0).validate().is_err());
        assert!(CommonsParams::linear(-1.0, 0.5).validate().is_err());
    }
}
