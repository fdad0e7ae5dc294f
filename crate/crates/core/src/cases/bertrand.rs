//! Bertrand duopoly in which each firm invests in green technology.
//!
//! Demand for firm `i` is `a - b p_i + lambda A theta_i` when it is the
//! cheaper firm; equal prices split the combined demand. Investment level
//! `theta_i` in `[0, 1]` costs `mu (A theta_i)^2`. Under cooperation both firms
//! charge the joint-profit price and the induced game is played over the
//! investment levels.

use serde::{Deserialize, Serialize};

use super::{all_finite, clamp_unit, nearly_equal, require, CaseModel, CaseOutput};
use crate::allocation::AllocationRule;
use crate::biform::BiformProblem;
use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::game::BoxGame;
use crate::report::Cell;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BertrandParams {
    /// Market size.
    pub a: f64,
    /// Price sensitivity.
    pub b: f64,
    /// Marginal cost.
    pub c: f64,
    /// Demand gained per unit of green investment.
    pub lambda: f64,
    /// Maximum investment level.
    #[serde(rename = "A")]
    pub capacity: f64,
    /// Investment cost coefficient.
    pub mu: f64,
    /// Minimum demand; prices stay in `[c, (a - a0)/b]`.
    pub a0: f64,
}

impl Default for BertrandParams {
    fn default() -> Self {
        BertrandParams {
            a: 10.0,
            b: 1.0,
            c: 2.0,
            lambda: 1.0,
            capacity: 1.0,
            mu: 3.0,
            a0: 1.0,
        }
    }
}

/// An equilibrium investment level before and after clamping to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Investment {
    /// Interior formula, or 1 when the cost is low enough that investing
    /// fully dominates.
    pub raw: f64,
    pub value: f64,
    pub branch: &'static str,
    pub clamped: bool,
}

/// Both induced games side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BertrandSummary {
    /// Equilibrium of the game paid by own contribution.
    pub theta_hat: Investment,
    /// Equilibrium of the equal-split game.
    pub theta_star: Investment,
    pub price_hat: f64,
    pub price_star: f64,
    /// Per-firm profit at `theta_hat` under own contribution.
    pub phi: f64,
    /// Per-firm profit at `theta_star` under equal split.
    pub psi: f64,
    /// `psi - phi` from the interior closed form, when both levels are interior.
    pub gap_closed_form: Option<f64>,
    pub price_in_box: bool,
}

impl BertrandParams {
    pub fn validate(&self) -> Result<()> {
        all_finite(&[
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("lambda", self.lambda),
            ("A", self.capacity),
            ("mu", self.mu),
            ("a0", self.a0),
        ])?;
        require(self.b > 0.0, || format!("b must be positive, got {}", self.b))?;
        require(self.a > self.b * self.c, || {
            format!("need a > b c, got a = {}, b c = {}", self.a, self.b * self.c)
        })?;
        require(self.a0 > 0.0 && self.a0 <= self.a, || format!("need 0 < a0 <= a, got a0 = {}", self.a0))?;
        require(self.c <= self.price_cap(), || {
            format!("price box [c, (a - a0)/b] = [{}, {}] is empty", self.c, self.price_cap())
        })?;
        require(self.lambda >= 0.0, || format!("lambda must be nonnegative, got {}", self.lambda))?;
        require(self.capacity > 0.0, || format!("A must be positive, got {}", self.capacity))?;
        require(self.mu > 0.0, || format!("mu must be positive, got {}", self.mu))
    }

    /// Upper end of the price box.
    pub fn price_cap(&self) -> f64 {
        (self.a - self.a0) / self.b
    }

    /// `a - b c`
    pub fn margin(&self) -> f64 {
        self.a - self.b * self.c
    }

    /// Profits for prices `p` and investment levels `theta`.
    pub fn profits(&self, p: [f64; 2], theta: [f64; 2]) -> [f64; 2] {
        let (a, b, c, l, cap, mu) = (self.a, self.b, self.c, self.lambda, self.capacity, self.mu);
        let cost = |t: f64| mu * (cap * t).powi(2);
        let mut out = [0.0; 2];
        for i in 0..2 {
            let j = 1 - i;
            let revenue = if p[i] < p[j] {
                (p[i] - c) * (a - b * p[i] + l * cap * theta[i])
            } else if p[i] == p[j] {
                0.5 * (p[i] - c) * (a - b * p[i] + l * cap * (theta[0] + theta[1]))
            } else {
                0.0
            };
            out[i] = revenue - cost(theta[i]);
        }
        out
    }

    /// Common price maximizing joint profit at investment levels `theta`.
    pub fn coop_price(&self, theta: [f64; 2]) -> f64 {
        (self.a + self.b * self.c + self.lambda * self.capacity * (theta[0] + theta[1])) / (2.0 * self.b)
    }

    /// Profits when both firms charge the joint-profit price.
    pub fn coop_profits(&self, theta: [f64; 2]) -> [f64; 2] {
        let p = self.coop_price(theta);
        self.profits([p, p], theta)
    }

    /// Joint profit at the joint-profit price.
    pub fn grand_value(&self, theta: [f64; 2]) -> f64 {
        self.coop_profits(theta).iter().sum()
    }

    /// Investment game at the joint-profit price.
    pub fn game(&self) -> Result<BoxGame> {
        self.validate()?;
        let p = self.clone();
        BoxGame::new(vec![(0.0, 1.0); 2], move |t| p.coop_profits([t[0], t[1]]).to_vec())
    }

    /// Investment game under `rule`. Own contribution yields `phi`, equal split `psi`.
    pub fn problem(&self, rule: AllocationRule) -> Result<BiformProblem<BoxGame>> {
        Ok(BiformProblem::new(self.game()?).with_rule(rule))
    }

    fn check_boundaries(&self) -> Result<()> {
        let fb = 4.0 * self.mu * self.b;
        let l2 = self.lambda * self.lambda;
        if nearly_equal(fb, l2) {
            return Err(Error::BoundaryCase(format!("4 mu b = lambda^2 = {l2}")));
        }
        if nearly_equal(fb, 2.0 * l2) {
            return Err(Error::BoundaryCase(format!("4 mu b = 2 lambda^2 = {}", 2.0 * l2)));
        }
        Ok(())
    }

    /// Equilibrium investment when each firm keeps its own profit.
    pub fn theta_hat(&self) -> Result<Investment> {
        self.validate()?;
        self.check_boundaries()?;
        let d = 4.0 * self.mu * self.b - self.lambda * self.lambda;
        let (raw, branch) = if d > 0.0 {
            (self.lambda * self.margin() / (2.0 * self.capacity * d), "B1")
        } else {
            (1.0, "B2")
        };
        let (value, clamped) = clamp_unit(raw);
        Ok(Investment { raw, value, branch, clamped })
    }

    /// Equilibrium investment when joint profit is split equally.
    pub fn theta_star(&self) -> Result<Investment> {
        self.validate()?;
        self.check_boundaries()?;
        let d = 4.0 * self.mu * self.b - 2.0 * self.lambda * self.lambda;
        let (raw, branch) = if d > 0.0 {
            (self.lambda * self.margin() / (self.capacity * d), "C1")
        } else {
            (1.0, "C2")
        };
        let (value, clamped) = clamp_unit(raw);
        Ok(Investment { raw, value, branch, clamped })
    }

    /// Own-contribution profit at a symmetric level `theta`.
    pub fn phi_at(&self, theta: f64) -> f64 {
        self.coop_profits([theta, theta])[0]
    }

    /// Equal-split profit at `(theta1, theta2)`.
    pub fn psi_at(&self, theta: [f64; 2]) -> f64 {
        self.grand_value(theta) / 2.0
    }

    /// Interior closed form of `phi` at `theta_hat`.
    pub fn phi_closed_form(&self) -> Option<f64> {
        let d = 4.0 * self.mu * self.b - self.lambda * self.lambda;
        (d > 0.0).then(|| {
            self.mu * self.margin().powi(2) * (8.0 * self.mu * self.b - self.lambda * self.lambda) / (4.0 * d * d)
        })
    }

    /// Interior closed form of `psi` at `theta_star`.
    pub fn psi_closed_form(&self) -> Option<f64> {
        let d = 4.0 * self.mu * self.b - 2.0 * self.lambda * self.lambda;
        (d > 0.0).then(|| self.mu * self.margin().powi(2) / (2.0 * d))
    }

    /// Interior closed form of `psi - phi`.
    pub fn gap_closed_form(&self) -> Option<f64> {
        let l2 = self.lambda * self.lambda;
        let d1 = 4.0 * self.mu * self.b - l2;
        let d2 = 4.0 * self.mu * self.b - 2.0 * l2;
        (d2 > 0.0).then(|| {
            4.0 * self.mu * self.mu * self.b * l2 * self.margin().powi(2) / (4.0 * d2 * d1 * d1)
        })
    }

    pub fn summary(&self) -> Result<BertrandSummary> {
        let theta_hat = self.theta_hat()?;
        let theta_star = self.theta_star()?;
        let (h, s) = (theta_hat.value, theta_star.value);
        let price_hat = self.coop_price([h, h]);
        let price_star = self.coop_price([s, s]);
        let interior = !theta_hat.clamped && !theta_star.clamped;
        let cap = self.price_cap();
        Ok(BertrandSummary {
            theta_hat,
            theta_star,
            price_hat,
            price_star,
            phi: self.phi_at(h),
            psi: self.psi_at([s, s]),
            gap_closed_form: if interior { self.gap_closed_form() } else { None },
            price_in_box: price_hat <= cap && price_star <= cap,
        })
    }

    /// Prices and profits when the firms compete on price without
    /// cooperating: both price at cost and nobody invests.
    pub fn noncooperative_benchmark(&self) -> ([f64; 2], [f64; 2]) {
        let p = [self.c, self.c];
        (p, self.profits(p, [0.0, 0.0]))
    }
}

/// Summary of both induced investment games.
pub fn bertrand_green(p: &BertrandParams) -> Result<BertrandSummary> {
    p.summary()
}

impl CaseModel for BertrandParams {
    const PARAM_NAMES: &'static [&'static str] = &["a", "b", "c", "lambda", "A", "mu", "a0"];
    const OUTPUT_NAMES: &'static [&'static str] = &[
        "branch",
        "theta_hat",
        "theta_star",
        "price_hat",
        "price_star",
        "phi",
        "psi",
        "psi_minus_phi",
        "gap_closed_form",
        "theta_hat_clamped",
        "theta_star_clamped",
    ];

    fn validate(&self) -> Result<()> {
        BertrandParams::validate(self)
    }

    fn outputs(&self, _cfg: &SolverConfig) -> Result<CaseOutput> {
        let s = self.summary()?;
        let mut warnings = Vec::new();
        for (name, inv) in [("theta_hat", s.theta_hat), ("theta_star", s.theta_star)] {
            if inv.clamped {
                warnings.push(format!("{name} clamped from {}", inv.raw));
            }
        }
        if !s.price_in_box {
            warnings.push(format!("cooperative price above (a - a0)/b = {}", self.price_cap()));
        }
        let cells = vec![
            Cell::Text(format!("{}/{}", s.theta_hat.branch, s.theta_star.branch)),
            Cell::Num(s.theta_hat.value),
            Cell::Num(s.theta_star.value),
            Cell::Num(s.price_hat),
            Cell::Num(s.price_star),
            Cell::Num(s.phi),
            Cell::Num(s.psi),
            Cell::Num(s.psi - s.phi),
            Cell::opt(s.gap_closed_form),
            Cell::Flag(s.theta_hat.clamped),
            Cell::Flag(s.theta_star.clamped),
        ];
        Ok(CaseOutput { cells, warnings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let p = BertrandParams::default();
        let s = p.summary().unwrap();
        assert!((s.theta_hat.value - 4.0 / 11.0).abs() < 1e-15);
        assert!((s.theta_star.value - 0.8).abs() < 1e-15);
        assert_eq!(s.theta_hat.branch, "B1");
        assert_eq!(s.theta_star.branch, "C1");
        assert!((s.phi - p.phi_closed_form().unwrap()).abs() < 1e-12);
        assert!((s.psi - 9.6).abs() < 1e-12);
        assert!((s.gap_closed_form.unwrap() - 2304.0 / 4840.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_denominators() {
        let p = BertrandParams {
            mu: 0.25,
            ..Default::default()
        };
        assert!(matches!(p.theta_hat(), Err(Error::BoundaryCase(_))));
        let p = BertrandParams {
            mu: 0.5,
            ..Default::default()
        };
        assert!(matches!(p.theta_star(), Err(Error::BoundaryCase(_))));
    }

    #[test]
    fn price_war_earns_nothing() {
        let (p, profits) = BertrandParams::default().noncooperative_benchmark();
        assert_eq!(p, [2.0, 2.0]);
        assert_eq!(profits, [0.0, 0.0]);
    }
}
