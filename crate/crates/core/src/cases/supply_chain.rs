//! Supplier, manufacturer and retailer sharing the margin on one product.
//!
//! Demand is `Q = a - b p + A theta`, where the manufacturer's green
//! investment `theta` in `[0, 1]` costs `mu (A theta)^2`. Without cooperation
//! the supplier takes `beta1` of the margin, the manufacturer `beta2` less a
//! logistics share `l1`, and the retailer the rest less `l2`. Cooperating
//! removes the logistics cost; the joint profit is then split in proportions
//! `beta1 : beta2 : 1 - beta1 - beta2`.

use serde::{Deserialize, Serialize};

use super::{all_finite, clamp_unit, nearly_equal, require, CaseModel, CaseOutput};
use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::optimize::{maximize_1d, Optimum};
use crate::report::Cell;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupplyChainParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub capacity: f64,
    pub mu: f64,
    pub a0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub l1: f64,
    pub l2: f64,
}

impl Default for SupplyChainParams {
    fn default() -> Self {
        SupplyChainParams {
            a: 10.0,
            b: 1.0,
            c: 2.0,
            capacity: 4.0,
            mu: 1.0,
            a0: 1.0,
            beta1: 0.2,
            beta2: 0.5,
            l1: 0.1,
            l2: 0.05,
        }
    }
}

/// Which end of the price range the joint optimum sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PriceBranch {
    /// Joint profit is concave in price; interior optimum.
    E1,
    /// Joint profit is convex in price; optimum at the top of the box.
    E2,
}

impl PriceBranch {
    pub fn name(self) -> &'static str {
        match self {
            PriceBranch::E1 => "E1",
            PriceBranch::E2 => "E2",
        }
    }
}

/// Sensitivities of the interior optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Statics {
    pub dv_dmu: f64,
    pub dp_dmu: f64,
    pub dp_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyChainSummary {
    pub branch: PriceBranch,
    /// Retail price, clamped to the price box.
    pub price: f64,
    pub price_clamped: bool,
    /// Joint profit at `price` with unconstrained investment.
    pub v_star: f64,
    pub theta_hat: f64,
    pub theta_hat_clamped: bool,
    pub theta_star: f64,
    pub theta_star_clamped: bool,
    /// `theta* - theta_hat` before clamping.
    pub theta_gap: f64,
    /// Supplier, manufacturer, retailer profits without cooperation.
    pub noncoop: [f64; 3],
    /// Joint profit at `theta_star`.
    pub coop_total: f64,
    /// Cost-sharing split of `coop_total`.
    pub shares: [f64; 3],
    /// Only for `E1`.
    pub statics: Option<Statics>,
}

impl SupplyChainParams {
    pub fn validate(&self) -> Result<()> {
        all_finite(&[
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("A", self.capacity),
            ("mu", self.mu),
            ("a0", self.a0),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("l1", self.l1),
            ("l2", self.l2),
        ])?;
        require(self.b > 0.0, || format!("b must be positive, got {}", self.b))?;
        require(self.a > self.b * self.c, || {
            format!("need a > b c, got a = {}, b c = {}", self.a, self.b * self.c)
        })?;
        require(self.a0 > 0.0 && self.a0 <= self.a, || format!("need 0 < a0 <= a, got a0 = {}", self.a0))?;
        require(self.c <= self.price_cap(), || {
            format!("price box [c, (a - a0)/b] = [{}, {}] is empty", self.c, self.price_cap())
        })?;
        require(self.capacity > 0.0, || format!("A must be positive, got {}", self.capacity))?;
        require(self.mu > 0.0, || format!("mu must be positive, got {}", self.mu))?;
        let unit = 0.0..=1.0;
        require(unit.contains(&self.beta1) && unit.contains(&self.beta2), || {
            format!("beta1, beta2 must lie in [0, 1], got {}, {}", self.beta1, self.beta2)
        })?;
        require(self.beta1 + self.beta2 <= 1.0, || {
            format!("need beta1 + beta2 <= 1, got {}", self.beta1 + self.beta2)
        })?;
        require(self.l1 > 0.0 && self.l1 < self.beta2, || {
            format!("need 0 < l1 < beta2, got l1 = {}, beta2 = {}", self.l1, self.beta2)
        })?;
        require(self.l2 > 0.0 && self.l2 < self.retailer_share(), || {
            format!("need 0 < l2 < 1 - beta1 - beta2, got l2 = {}", self.l2)
        })
    }

    pub fn price_cap(&self) -> f64 {
        (self.a - self.a0) / self.b
    }

    pub fn margin(&self) -> f64 {
        self.a - self.b * self.c
    }

    fn retailer_share(&self) -> f64 {
        1.0 - self.beta1 - self.beta2
    }

    pub fn demand(&self, p: f64, theta: f64) -> f64 {
        self.a - self.b * p + self.capacity * theta
    }

    fn investment_cost(&self, theta: f64) -> f64 {
        self.mu * (self.capacity * theta).powi(2)
    }

    /// Supplier, manufacturer and retailer profits without cooperation.
    pub fn profits(&self, p: f64, theta: f64) -> [f64; 3] {
        let unit = (p - self.c) * self.demand(p, theta);
        [
            self.beta1 * unit,
            (self.beta2 - self.l1) * unit - self.investment_cost(theta),
            (self.retailer_share() - self.l2) * unit,
        ]
    }

    /// Joint profit with logistics cost removed.
    pub fn coop_value(&self, p: f64, theta: f64) -> f64 {
        (p - self.c) * self.demand(p, theta) - self.investment_cost(theta)
    }

    /// Manufacturer's own optimum before clamping.
    pub fn theta_hat_raw(&self, p: f64) -> f64 {
        (self.beta2 - self.l1) * (p - self.c) / (2.0 * self.mu * self.capacity)
    }

    /// Joint optimum before clamping.
    pub fn theta_star_raw(&self, p: f64) -> f64 {
        (p - self.c) / (2.0 * self.mu * self.capacity)
    }

    /// Joint profit at price `p` with the unconstrained investment optimum.
    pub fn value_of_price(&self, p: f64) -> f64 {
        let m = p - self.c;
        m * (self.a - self.b * p) + m * m / (4.0 * self.mu)
    }

    /// Cost-sharing split of a joint profit `v`.
    pub fn shares(&self, v: f64) -> [f64; 3] {
        [self.beta1 * v, self.beta2 * v, self.retailer_share() * v]
    }

    pub fn branch(&self) -> Result<PriceBranch> {
        self.validate()?;
        let k = 4.0 * self.mu * self.b;
        if nearly_equal(k, 1.0) {
            return Err(Error::BoundaryCase(format!("mu = 1/(4b) = {}", 0.25 / self.b)));
        }
        Ok(if k > 1.0 { PriceBranch::E1 } else { PriceBranch::E2 })
    }

    /// Interior price optimum `(2 mu (a + b c) - c) / (4 mu b - 1)`.
    pub fn p_star(&self) -> f64 {
        (2.0 * self.mu * (self.a + self.b * self.c) - self.c) / (4.0 * self.mu * self.b - 1.0)
    }

    /// Interior optimum value `mu (a - b c)^2 / (4 mu b - 1)`.
    pub fn v_star(&self) -> f64 {
        self.mu * self.margin().powi(2) / (4.0 * self.mu * self.b - 1.0)
    }

    pub fn statics(&self) -> Statics {
        let d = 4.0 * self.mu * self.b - 1.0;
        Statics {
            dv_dmu: -self.margin().powi(2) / (d * d),
            dp_dmu: -2.0 * self.margin() / (d * d),
            dp_db: -2.0 * self.mu * (4.0 * self.mu * self.a - self.c) / (d * d),
        }
    }

    /// Maximizes `value_of_price` over the price box numerically.
    pub fn price_numeric(&self, cfg: &SolverConfig) -> Result<Optimum> {
        self.validate()?;
        maximize_1d(|p| Ok(self.value_of_price(p)), self.c, self.price_cap(), cfg.grid_points, 1e-12)
    }

    pub fn summary(&self) -> Result<SupplyChainSummary> {
        let branch = self.branch()?;
        let cap = self.price_cap();
        let (raw_price, statics) = match branch {
            PriceBranch::E1 => (self.p_star(), Some(self.statics())),
            PriceBranch::E2 => (cap, None),
        };
        let price = raw_price.clamp(self.c, cap);
        let price_clamped = price != raw_price;
        let v_star = if branch == PriceBranch::E1 && !price_clamped {
            self.v_star()
        } else {
            self.value_of_price(price)
        };
        let (theta_hat, theta_hat_clamped) = clamp_unit(self.theta_hat_raw(price));
        let (theta_star, theta_star_clamped) = clamp_unit(self.theta_star_raw(price));
        let coop_total = self.coop_value(price, theta_star);
        Ok(SupplyChainSummary {
            branch,
            price,
            price_clamped,
            v_star,
            theta_hat,
            theta_hat_clamped,
            theta_star,
            theta_star_clamped,
            theta_gap: self.theta_star_raw(price) - self.theta_hat_raw(price),
            noncoop: self.profits(price, theta_hat),
            coop_total,
            shares: self.shares(coop_total),
            statics,
        })
    }
}

/// Summary at the jointly optimal price.
pub fn supply_chain(p: &SupplyChainParams) -> Result<SupplyChainSummary> {
    p.summary()
}

impl CaseModel for SupplyChainParams {
    const PARAM_NAMES: &'static [&'static str] = &["a", "b", "c", "A", "mu", "a0", "beta1", "beta2", "l1", "l2"];
    const OUTPUT_NAMES: &'static [&'static str] = &[
        "branch",
        "price",
        "v_star",
        "theta_hat",
        "theta_star",
        "theta_gap",
        "noncoop_S",
        "noncoop_P",
        "noncoop_R",
        "noncoop_total",
        "share_S",
        "share_P",
        "share_R",
        "coop_total",
        "dv_dmu",
        "dp_dmu",
        "dp_db",
        "price_clamped",
        "theta_hat_clamped",
        "theta_star_clamped",
    ];

    fn validate(&self) -> Result<()> {
        SupplyChainParams::validate(self)
    }

    fn outputs(&self, _cfg: &SolverConfig) -> Result<CaseOutput> {
        let s = self.summary()?;
        let mut warnings = Vec::new();
        if s.price_clamped {
            warnings.push(format!("optimal price clamped to the price box at {}", s.price));
        }
        if s.theta_hat_clamped {
            warnings.push(format!("theta_hat clamped from {}", self.theta_hat_raw(s.price)));
        }
        if s.theta_star_clamped {
            warnings.push(format!("theta_star clamped from {}", self.theta_star_raw(s.price)));
        }
        let st = s.statics;
        let mut cells = vec![
            Cell::text(s.branch.name()),
            Cell::Num(s.price),
            Cell::Num(s.v_star),
            Cell::Num(s.theta_hat),
            Cell::Num(s.theta_star),
            Cell::Num(s.theta_gap),
        ];
        cells.extend(s.noncoop.iter().map(|&x| Cell::Num(x)));
        cells.push(Cell::Num(s.noncoop.iter().sum()));
        cells.extend(s.shares.iter().map(|&x| Cell::Num(x)));
        cells.push(Cell::Num(s.coop_total));
        cells.push(Cell::opt(st.map(|t| t.dv_dmu)));
        cells.push(Cell::opt(st.map(|t| t.dp_dmu)));
        cells.push(Cell::opt(st.map(|t| t.dp_db)));
        cells.push(Cell::Flag(s.price_clamped));
        cells.push(Cell::Flag(s.theta_hat_clamped));
        cells.push(Cell::Flag(s.theta_star_clamped));
        Ok(CaseOutput { cells, warnings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let s = SupplyChainParams::default().summary().unwrap();
        assert_eq!(s.branch, PriceBranch::E1);
        assert!((s.price - 22.0 / 3.0).abs() < 1e-12);
        assert!((s.v_star - 64.0 / 3.0).abs() < 1e-12);
        assert!((s.theta_star - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.theta_hat - 0.4 * (16.0 / 3.0) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn convex_branch_goes_to_the_cap() {
        let p = SupplyChainParams {
            mu: 0.2,
            ..Default::default()
        };
        let s = p.summary().unwrap();
        assert_eq!(s.branch, PriceBranch::E2);
        assert_eq!(s.price, 9.0);
        assert!((s.v_star - 68.25).abs() < 1e-12);
        assert!(s.theta_star_clamped);
    }

    #[test]
    fn boundary_cost() {
        let p = SupplyChainParams {
            mu: 0.25,
            ..Default::default()
        };
        assert!(matches!(p.summary(), Err(Error::BoundaryCase(_))));
    }
}
