//! JSON formats: normal-form games, characteristic tables, synergy files and
//! profile restrictions.
//!
//! A game file looks like
//!
//! ```json
//! {"players": ["1", "2"],
//!  "strategies": [["C", "NC"], ["C", "NC"]],
//!  "payoffs": {"C,C": [10, 10], "C,NC": [0, 12], "NC,C": [12, 0], "NC,NC": [5, 5]}}
//! ```
//!
//! Payoff keys join one strategy label per player with commas, so labels
//! cannot contain commas. Every profile must be listed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::coalition::{ProfileCharacteristic, Synergy};
use crate::error::{Error, Result};
use crate::game::{Coalition, FiniteGame, PureProfile};

/// Wraps a serde error with its line and column.
pub fn json_error(e: &serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e.to_string())))
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| json_error(&e))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    payoffs: Map<String, Value>,
}

fn split_key(key: &str) -> Vec<&str> {
    key.split(',').map(str::trim).collect()
}

/// Parses a game file.
pub fn parse_game(text: &str) -> Result<FiniteGame> {
    let file: GameFile = from_str(text)?;
    for (i, labels) in file.strategies.iter().enumerate() {
        if let Some(bad) = labels.iter().find(|l| l.contains(',') || l.trim() != l.as_str() || l.is_empty()) {
            return Err(Error::InvalidGame(format!(
                "player {} has strategy label {bad:?}; labels must be nonempty, without commas or surrounding spaces",
                i + 1
            )));
        }
    }
    if file.players.len() != file.strategies.len() {
        return Err(Error::InvalidGame(format!(
            "{} players but {} strategy lists",
            file.players.len(),
            file.strategies.len()
        )));
    }
    // shape checks happen in FiniteGame::new; build a zero game to resolve labels
    let counts: Vec<usize> = file.strategies.iter().map(Vec::len).collect();
    let shell = FiniteGame::from_fn_labeled(file.players.clone(), file.strategies.clone(), |_| {
        vec![0.0; counts.len()]
    })?;
    let mut payoffs: Vec<Option<Vec<f64>>> = vec![None; shell.profile_count()];
    for (key, value) in &file.payoffs {
        let labels = split_key(key);
        let x = shell
            .profile_from_labels(&labels)
            .map_err(|e| Error::InvalidGame(format!("payoff key {key:?}: {e}")))?;
        let k = shell.index_of(&x)?;
        let vector: Vec<f64> = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidGame(format!("payoff {key:?} must be an array of numbers: {e}")))?;
        if payoffs[k].is_some() {
            return Err(Error::InvalidGame(format!("profile {key:?} is listed twice")));
        }
        payoffs[k] = Some(vector);
    }
    let mut dense = Vec::with_capacity(payoffs.len());
    for (k, p) in payoffs.into_iter().enumerate() {
        match p {
            Some(v) => dense.push(v),
            None => {
                return Err(Error::InvalidGame(format!(
                    "missing payoffs for profile {}",
                    shell.profile_labels(&shell.profile_at(k)).join(",")
                )))
            }
        }
    }
    FiniteGame::new(file.players, file.strategies, dense)
}

/// The game as a JSON value, profiles in row-major order.
pub fn game_to_json(game: &FiniteGame) -> Value {
    let payoffs: Map<String, Value> = game
        .profiles()
        .enumerate()
        .map(|(k, x)| (game.profile_labels(&x).join(","), floats(game.payoff_at(k))))
        .collect();
    serde_json::json!({
        "players": game.players(),
        "strategies": game.strategies(),
        "payoffs": payoffs,
    })
}

/// Pretty-printed game file. Numbers use the shortest representation that
/// reads back to the same double.
pub fn export_game(game: &FiniteGame) -> String {
    serde_json::to_string_pretty(&game_to_json(game)).expect("games serialize")
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// `{"profile": [...], "values": {"{1}": ..., "{1,2}": ...}}`, coalitions in
/// mask order.
pub fn characteristic_to_json(table: &ProfileCharacteristic) -> Value {
    let values: Map<String, Value> = Coalition::all(table.n())
        .filter(|s| !s.is_empty())
        .map(|s| (s.to_string(), float(table.value(s))))
        .collect();
    let mut out = Map::new();
    out.insert(
        "profile".into(),
        table.profile().map_or(Value::Null, |p| serde_json::to_value(p).unwrap_or(Value::Null)),
    );
    out.insert("values".into(), Value::Object(values));
    Value::Object(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(default)]
    profile: Option<crate::game::ProfilePoint>,
    #[serde(default)]
    players: Option<usize>,
    values: HashMap<String, f64>,
}

fn coalition_map(values: &HashMap<String, f64>) -> Result<Vec<(Coalition, f64)>> {
    let mut out: Vec<(Coalition, f64)> = values
        .iter()
        .map(|(k, &v)| Ok((k.parse::<Coalition>()?, v)))
        .collect::<Result<_>>()?;
    out.sort_by_key(|(c, _)| c.mask());
    Ok(out)
}

/// Parses a characteristic table. The player count is `players` when given,
/// otherwise the largest player mentioned.
pub fn parse_characteristic(text: &str) -> Result<ProfileCharacteristic> {
    let file: TableFile = from_str(text)?;
    let pairs = coalition_map(&file.values)?;
    let n = file
        .players
        .unwrap_or_else(|| pairs.iter().map(|(c, _)| c.span()).max().unwrap_or(0));
    ProfileCharacteristic::from_pairs(n, &pairs, file.profile)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaFile {
    #[serde(default)]
    default: HashMap<String, f64>,
    #[serde(default)]
    profiles: HashMap<String, HashMap<String, f64>>,
}

/// Parses a synergy file:
///
/// ```json
/// {"default": {"{1,2}": 1.0}, "profiles": {"C,C": {"{1,2}": 4.0}}}
/// ```
///
/// Entries under a profile override the default for that profile; any
/// coalition not mentioned gets zero.
pub fn parse_delta(text: &str, game: &FiniteGame) -> Result<Synergy<PureProfile>> {
    let file: DeltaFile = from_str(text)?;
    let n = game.players().len();
    let check = |pairs: &[(Coalition, f64)]| -> Result<()> {
        for (c, v) in pairs {
            if c.span() > n {
                return Err(Error::InvalidCoalition(format!("{c} mentions a player beyond {n}")));
            }
            if c.is_empty() || !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidSynergy {
                    coalition: c.to_string(),
                    value: *v,
                });
            }
        }
        Ok(())
    };
    let default = coalition_map(&file.default)?;
    check(&default)?;
    let mut per_profile: HashMap<PureProfile, HashMap<Coalition, f64>> = HashMap::new();
    for (key, entries) in &file.profiles {
        let x = game
            .profile_from_labels(&split_key(key))
            .map_err(|e| Error::InvalidGame(format!("synergy profile {key:?}: {e}")))?;
        let pairs = coalition_map(entries)?;
        check(&pairs)?;
        per_profile.insert(x, pairs.into_iter().collect());
    }
    if default.is_empty() && per_profile.is_empty() {
        return Ok(Synergy::zero());
    }
    let default: HashMap<Coalition, f64> = default.into_iter().collect();
    Ok(Synergy::from_fn(move |s, x: &PureProfile| {
        per_profile
            .get(x)
            .and_then(|m| m.get(&s))
            .or_else(|| default.get(&s))
            .copied()
            .unwrap_or(0.0)
    }))
}

/// Parses a restriction file: a JSON array of profile keys such as `"C,C"`.
pub fn parse_restriction(text: &str, game: &FiniteGame) -> Result<Vec<PureProfile>> {
    let keys: Vec<String> = from_str(text)?;
    keys.iter()
        .map(|k| {
            game.profile_from_labels(&split_key(k))
                .map_err(|e| Error::InvalidGame(format!("restricted profile {k:?}: {e}")))
        })
        .collect()
}

/// Parses a JSON document into a value, with line and column on failure.
pub fn parse_value(text: &str) -> Result<Value> {
    from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::commons::table1;

    const TABLE1: &str = r#"{"players": ["1", "2"], "strategies": [["C", "NC"], ["C", "NC"]],
        "payoffs": {"C,C": [10, 10], "C,NC": [0, 12], "NC,C": [12, 0], "NC,NC": [5, 5]}}"#;

    #[test]
    fn parses_and_round_trips() {
        let g = parse_game(TABLE1).unwrap();
        assert_eq!(g.payoff(&PureProfile::new(vec![0, 1])).unwrap(), &[0.0, 12.0]);
        let again = parse_game(&export_game(&g)).unwrap();
        assert_eq!(g, again);
        let t1 = table1();
        assert_eq!(parse_game(&export_game(&t1)).unwrap(), t1);
    }

    #[test]
    fn missing_profile_is_reported() {
        let text = TABLE1.replace(r#", "NC,NC": [5, 5]"#, "");
        let err = parse_game(&text).unwrap_err();
        assert!(err.to_string().contains("NC,NC"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_game("{\n  \"players\": [\"1\",\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn characteristic_json_shape() {
        let t = ProfileCharacteristic::additive(&[10.0, 10.0], None).unwrap();
        let v = characteristic_to_json(&t);
        assert_eq!(v["values"]["{1,2}"], 20.0);
        let back = parse_characteristic(&v.to_string()).unwrap();
        assert_eq!(back.values(), t.values());
    }

    #[test]
    fn delta_overrides_default() {
        let g = parse_game(TABLE1).unwrap();
        let d = parse_delta(r#"{"default": {"{1,2}": 1}, "profiles": {"C,C": {"{1,2}": 4}}}"#, &g).unwrap();
        let grand = Coalition::grand(2);
        assert_eq!(d.value(grand, &PureProfile::new(vec![0, 0])), 4.0);
        assert_eq!(d.value(grand, &PureProfile::new(vec![1, 1])), 1.0);
        assert!(parse_delta(r#"{"default": {"{1,2}": -1}}"#, &g).is_err());
    }
}
