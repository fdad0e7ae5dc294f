//! The four worked models: the commons, inter-department regulation, a
//! Bertrand duopoly with green investment and a three-tier supply chain.
//!
//! Each model has a parameter type that deserializes from JSON (missing
//! fields take the reference values), closed-form results, and a flat result
//! row used by the `case` and `sweep` commands.

pub mod bertrand;
pub mod commons;
pub mod regulation;
pub mod supply_chain;

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::report::{Cell, Table};

pub use bertrand::BertrandParams;
pub use commons::{CommonsParams, MuKind};
pub use regulation::RegulationParams;
pub use supply_chain::SupplyChainParams;

/// Result cells of one model evaluation plus any warnings (clamping, prices
/// outside the admissible box).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CaseOutput {
    pub cells: Vec<Cell>,
    pub warnings: Vec<String>,
}

/// A model that can be evaluated into one result row.
pub trait CaseModel: Serialize + DeserializeOwned + Default {
    /// JSON keys of the parameters, in column order.
    const PARAM_NAMES: &'static [&'static str];
    /// Result columns between `status` and `note`.
    const OUTPUT_NAMES: &'static [&'static str];

    fn validate(&self) -> Result<()>;

    fn outputs(&self, cfg: &SolverConfig) -> Result<CaseOutput>;
}

/// Leading columns are the parameters, then `status`, the outputs and `note`.
pub fn header_of<M: CaseModel>() -> Vec<String> {
    M::PARAM_NAMES
        .iter()
        .copied()
        .chain(["status"])
        .chain(M::OUTPUT_NAMES.iter().copied())
        .chain(["note"])
        .map(String::from)
        .collect()
}

/// Parses the parameters and evaluates the model; anything that fails is
/// reported as an `invalid` row carrying the error in `note`.
pub fn row_of<M: CaseModel>(params: &Value, cfg: &SolverConfig) -> Vec<Cell> {
    let mut shown = serde_json::to_value(M::default()).unwrap_or(Value::Null);
    if let (Value::Object(base), Value::Object(given)) = (&mut shown, params) {
        for (k, v) in given {
            if base.contains_key(k) {
                base.insert(k.clone(), v.clone());
            }
        }
    }
    let mut cells: Vec<Cell> = M::PARAM_NAMES.iter().map(|k| Cell::from_json(shown.get(*k))).collect();
    let evaluated = serde_json::from_value::<M>(params.clone())
        .map_err(|e| Error::InvalidParams(e.to_string()))
        .and_then(|m| {
            m.validate()?;
            m.outputs(cfg)
        });
    match evaluated {
        Ok(out) => {
            debug_assert_eq!(out.cells.len(), M::OUTPUT_NAMES.len());
            cells.push(Cell::text("ok"));
            cells.extend(out.cells);
            cells.push(Cell::Text(out.warnings.join("; ")));
        }
        Err(e) => {
            cells.push(Cell::text("invalid"));
            cells.extend(std::iter::repeat_n(Cell::Empty, M::OUTPUT_NAMES.len()));
            cells.push(Cell::Text(e.to_string()));
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    Commons,
    Regulation,
    Bertrand,
    SupplyChain,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::Commons, Case::Regulation, Case::Bertrand, Case::SupplyChain];

    pub fn name(self) -> &'static str {
        match self {
            Case::Commons => "commons",
            Case::Regulation => "regulation",
            Case::Bertrand => "bertrand",
            Case::SupplyChain => "supplychain",
        }
    }

    pub fn header(self) -> Vec<String> {
        match self {
            Case::Commons => header_of::<CommonsParams>(),
            Case::Regulation => header_of::<RegulationParams>(),
            Case::Bertrand => header_of::<BertrandParams>(),
            Case::SupplyChain => header_of::<SupplyChainParams>(),
        }
    }

    pub fn row(self, params: &Value, cfg: &SolverConfig) -> Vec<Cell> {
        match self {
            Case::Commons => row_of::<CommonsParams>(params, cfg),
            Case::Regulation => row_of::<RegulationParams>(params, cfg),
            Case::Bertrand => row_of::<BertrandParams>(params, cfg),
            Case::SupplyChain => row_of::<SupplyChainParams>(params, cfg),
        }
    }

    pub fn default_params(self) -> Value {
        let v = match self {
            Case::Commons => serde_json::to_value(CommonsParams::default()),
            Case::Regulation => serde_json::to_value(RegulationParams::default()),
            Case::Bertrand => serde_json::to_value(BertrandParams::default()),
            Case::SupplyChain => serde_json::to_value(SupplyChainParams::default()),
        };
        v.unwrap_or(Value::Null)
    }

    /// One row per parameter object.
    pub fn table(self, params: &[Value], cfg: &SolverConfig) -> Table {
        use rayon::prelude::*;
        let mut t = Table::new(self.header());
        t.rows = params.par_iter().map(|p| self.row(p, cfg)).collect();
        t
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "commons" => Ok(Case::Commons),
            "regulation" => Ok(Case::Regulation),
            "bertrand" => Ok(Case::Bertrand),
            "supplychain" | "supply-chain" | "supply_chain" => Ok(Case::SupplyChain),
            other => Err(Error::Parse(format!(
                "unknown case {other:?}; expected commons, regulation, bertrand or supplychain"
            ))),
        }
    }
}

/// Fails with a parameter error unless `cond` holds.
pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg()))
    }
}

pub(crate) fn all_finite(xs: &[(&str, f64)]) -> Result<()> {
    for (name, x) in xs {
        require(x.is_finite(), || format!("{name} must be finite, got {x}"))?;
    }
    Ok(())
}

/// Clamps to `[0, 1]` and reports whether the bound was active.
pub(crate) fn clamp_unit(raw: f64) -> (f64, bool) {
    let v = raw.clamp(0.0, 1.0);
    (v, v != raw)
}

/// True when `a` and `b` agree to about machine precision relative to their size.
pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
