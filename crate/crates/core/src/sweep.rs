//! Parameter grids for the case studies.
//!
//! A grid file is either a JSON array of parameter objects, or
//!
//! ```json
//! {"base": {"a": 10, "b": 1}, "vary": {"mu": [2.6, 3, 4], "lambda": [0.5, 1]}}
//! ```
//!
//! which expands to every combination of the `vary` lists over `base`, the
//! first listed parameter changing slowest.

use serde_json::{Map, Value};

use crate::cases::Case;
use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::io::parse_value;
use crate::report::Table;

/// Parameter objects described by a grid document.
pub fn expand_grid(doc: &Value) -> Result<Vec<Value>> {
    match doc {
        Value::Array(items) => Ok(items.clone()),
        Value::Object(obj) => {
            if let Some(k) = obj.keys().find(|k| *k != "base" && *k != "vary") {
                return Err(Error::Parse(format!("unknown grid key {k:?}; expected base and vary")));
            }
            let base = match obj.get("base") {
                None => Map::new(),
                Some(Value::Object(m)) => m.clone(),
                Some(_) => return Err(Error::Parse("grid base must be an object".into())),
            };
            let vary = match obj.get("vary") {
                None => Map::new(),
                Some(Value::Object(m)) => m.clone(),
                Some(_) => return Err(Error::Parse("grid vary must be an object of arrays".into())),
            };
            let mut axes: Vec<(String, Vec<Value>)> = Vec::with_capacity(vary.len());
            for (k, v) in vary {
                match v {
                    Value::Array(xs) => axes.push((k, xs)),
                    _ => return Err(Error::Parse(format!("grid vary.{k} must be an array"))),
                }
            }
            let mut out = vec![base];
            for (k, values) in &axes {
                out = out
                    .into_iter()
                    .flat_map(|m| {
                        values.iter().map(move |v| {
                            let mut m = m.clone();
                            m.insert(k.clone(), v.clone());
                            m
                        })
                    })
                    .collect();
            }
            Ok(out.into_iter().map(Value::Object).collect())
        }
        _ => Err(Error::Parse("a grid is an array of parameter objects or {base, vary}".into())),
    }
}

/// Evaluates `case` at every grid point; rows come back in grid order.
pub fn run_sweep(case: Case, grid_text: &str, cfg: &SolverConfig) -> Result<Table> {
    let doc = parse_value(grid_text)?;
    let params = expand_grid(&doc)?;
    Ok(case.table(&params, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn cartesian_order() {
        let g = expand_grid(&json!({"base": {"a": 1}, "vary": {"x": [1, 2], "y": [3, 4]}})).unwrap();
        let pairs: Vec<(i64, i64)> = g.iter().map(|v| (v["x"].as_i64().unwrap(), v["y"].as_i64().unwrap())).collect();
        assert_eq!(pairs, vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
        assert!(g.iter().all(|v| v["a"] == 1));
    }

    #[test]
    fn empty_grid_has_only_a_header() {
        let t = run_sweep(Case::Bertrand, "[]", &SolverConfig::default()).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv_string().unwrap().lines().count(), 1);
    }

    #[test]
    fn invalid_rows_are_flagged() {
        let t = run_sweep(Case::Bertrand, r#"[{"a": 1}, {"mu": 4}]"#, &SolverConfig::default()).unwrap();
        let status = t.column("status").unwrap();
        assert_eq!(t.rows[0][status].render(), "invalid");
        assert_eq!(t.rows[1][status].render(), "ok");
    }
}
