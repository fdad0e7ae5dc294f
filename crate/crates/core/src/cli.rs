//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on any input problem (unreadable or malformed
//! files, bad flags, invalid parameters), 2 when the requested object does not
//! exist: no equilibrium, no biform solution, or a verification batch with
//! failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::allocation::{classify_egalitarian, classify_marginalist, shapley, AllocationRule, Classification};
use crate::biform::{BiformProblem, CollabSet};
use crate::cases::Case;
use crate::coalition::{v_f, Synergy};
use crate::equilibrium::{pure_nash_restricted, NashResult, SolverConfig};
use crate::error::{Error, Result};
use crate::game::{FiniteGame, ProfilePoint, PureProfile};
use crate::io::{characteristic_to_json, export_game, parse_characteristic, parse_delta, parse_game, parse_restriction};
use crate::report::{Cell, Table};
use crate::sweep::run_sweep;
use crate::verify::{run_batch, Prop};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NONE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "biform", version, about = "Solve strategic games as biform games")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for random instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; defaults to csv for case and sweep, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Starting points for continuous solvers, e.g. "0,0;0.5,0.5".
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    /// Grid nodes per axis for continuous solvers.
    #[arg(long, global = true, default_value_t = 129)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pure Nash equilibria of a game file.
    Nash {
        #[arg(long)]
        game: PathBuf,
        /// JSON array of allowed profiles such as ["C,C", "NC,NC"].
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Also write the parsed game here in canonical form.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Shapley values of a characteristic table, or of every profile of a game.
    Shapley {
        #[arg(long, conflicts_with = "game", required_unless_present = "game")]
        table: Option<PathBuf>,
        #[arg(long)]
        game: Option<PathBuf>,
        #[arg(long, requires = "game")]
        delta: Option<PathBuf>,
        /// Only this profile, e.g. "C,NC".
        #[arg(long, requires = "game")]
        profile: Option<String>,
    },
    /// Biform solutions of a game under an allocation rule.
    #[command(visible_alias = "solve")]
    Biform {
        #[arg(long)]
        game: PathBuf,
        /// shapley, equal or contribution.
        #[arg(long, default_value = "shapley")]
        rule: String,
        #[arg(long)]
        delta: Option<PathBuf>,
        #[arg(long)]
        restrict: Option<PathBuf>,
    },
    /// Evaluate one of the built-in models.
    Case {
        /// commons, regulation, bertrand or supplychain.
        name: String,
        /// Parameter object; missing fields take the reference values.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Evaluate a model over a parameter grid, one row per grid point.
    Sweep {
        name: String,
        /// Array of parameter objects, or {"base": {...}, "vary": {...}}.
        #[arg(long)]
        params: PathBuf,
    },
    /// Check a structural property on seeded random games.
    Verify {
        /// marginalist or egalitarian.
        #[arg(long)]
        prop: String,
        #[arg(short = 'n', long = "count", default_value_t = 200)]
        count: usize,
    },
}

/// Output of a command before it is written.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => Error::Parse(format!("{}: {other}", path.display())),
    })
}

fn load_game(path: &Path) -> Result<FiniteGame> {
    with_path(path, parse_game(&read(path)?))
}

fn solver_config(g: &GlobalOpts) -> Result<SolverConfig> {
    let mut cfg = SolverConfig {
        tol: g.tol,
        grid_points: g.grid,
        ..SolverConfig::default()
    };
    if let Some(text) = &g.seeds {
        cfg.seeds = text
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidConfig(format!("seed coordinate {x:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn labels_json(game: &FiniteGame, x: &PureProfile) -> Value {
    json!(game.profile_labels(x))
}

fn point_labels(game: &FiniteGame, p: &ProfilePoint) -> Value {
    match p {
        ProfilePoint::Pure(c) => labels_json(game, &PureProfile::new(c.clone())),
        ProfilePoint::Continuous(x) => json!(x),
    }
}

fn nash_json(game: &FiniteGame, r: &NashResult) -> Value {
    let eqs: Vec<Value> = r
        .equilibria
        .iter()
        .map(|e| {
            json!({
                "profile": point_labels(game, &e.profile),
                "payoffs": e.payoffs,
            })
        })
        .collect();
    json!({
        "method": r.method,
        "status": r.status,
        "residual": r.residual,
        "equilibria": eqs,
    })
}

fn solutions_table(game: &FiniteGame, rows: &[(PureProfile, Vec<f64>)]) -> Table {
    let n = game.players().len();
    let mut header = vec!["profile".to_string()];
    header.extend((1..=n).map(|i| format!("payoff{i}")));
    let mut t = Table::new(header);
    for (x, pay) in rows {
        let mut row = vec![Cell::Text(game.profile_labels(x).join(","))];
        row.extend(pay.iter().map(|&v| Cell::Num(v)));
        t.rows.push(row);
    }
    t
}

fn render(value: &Value, table: Option<&Table>, format: Format) -> Result<String> {
    match (format, table) {
        (Format::Csv, Some(t)) => t.to_csv_string(),
        (Format::Csv, None) => Err(Error::InvalidConfig("this command has no csv form; use --format json".into())),
        (Format::Json, _) => {
            serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

fn cmd_nash(g: &GlobalOpts, game: &Path, restrict: Option<&Path>, export: Option<&Path>) -> Result<Outcome> {
    let game = load_game(game)?;
    if let Some(path) = export {
        fs::write(path, export_game(&game) + "\n").map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    let allowed = match restrict {
        Some(p) => {
            let list = with_path(p, parse_restriction(&read(p)?, &game))?;
            let mut mask = vec![false; game.profile_count()];
            for x in &list {
                mask[game.index_of(x)?] = true;
            }
            Some(mask)
        }
        None => None,
    };
    let r = pure_nash_restricted(&game, allowed.as_deref());
    let rows: Vec<(PureProfile, Vec<f64>)> = r
        .pure_profiles()
        .into_iter()
        .zip(r.equilibria.iter().map(|e| e.payoffs.clone()))
        .collect();
    let body = render(&nash_json(&game, &r), Some(&solutions_table(&game, &rows)), g.format.unwrap_or(Format::Json))?;
    Ok(Outcome {
        code: if r.is_empty() { EXIT_NONE } else { EXIT_OK },
        body,
    })
}

fn cmd_shapley(
    g: &GlobalOpts,
    table: Option<&Path>,
    game: Option<&Path>,
    delta: Option<&Path>,
    profile: Option<&str>,
) -> Result<Outcome> {
    let format = g.format.unwrap_or(Format::Json);
    if let Some(p) = table {
        let t = with_path(p, parse_characteristic(&read(p)?))?;
        let sh = shapley(&t);
        let mut out = characteristic_to_json(&t);
        out["shapley"] = json!(sh.shares());
        let mut csv = Table::new((1..=t.n()).map(|i| format!("shapley{i}")).collect());
        csv.rows.push(sh.shares().iter().map(|&v| Cell::Num(v)).collect());
        return Ok(Outcome {
            code: EXIT_OK,
            body: render(&out, Some(&csv), format)?,
        });
    }
    let gp = game.ok_or_else(|| Error::InvalidConfig("shapley needs --table or --game".into()))?;
    let game = load_game(gp)?;
    let synergy = match delta {
        Some(p) => with_path(p, parse_delta(&read(p)?, &game))?,
        None => Synergy::zero(),
    };
    let profiles: Vec<PureProfile> = match profile {
        Some(key) => vec![game.profile_from_labels(&key.split(',').map(str::trim).collect::<Vec<_>>())?],
        None => game.profiles().collect(),
    };
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for x in &profiles {
        let t = v_f(&game, x, &synergy)?;
        let sh = shapley(&t).into_shares();
        let mut item = characteristic_to_json(&t);
        item["profile"] = labels_json(&game, x);
        item["shapley"] = json!(sh);
        items.push(item);
        rows.push((x.clone(), sh));
    }
    let mut csv = solutions_table(&game, &rows);
    for h in csv.header.iter_mut().skip(1) {
        *h = h.replace("payoff", "shapley");
    }
    Ok(Outcome {
        code: EXIT_OK,
        body: render(&Value::Array(items), Some(&csv), format)?,
    })
}

fn classification_json(game: &FiniteGame, c: Classification<PureProfile>) -> Value {
    let c = c.map(|x| game.profile_labels(&x).join(","));
    serde_json::to_value(c).unwrap_or(Value::Null)
}

fn cmd_biform(
    g: &GlobalOpts,
    game: &Path,
    rule: &str,
    delta: Option<&Path>,
    restrict: Option<&Path>,
) -> Result<Outcome> {
    let rule = AllocationRule::parse(rule)?;
    let game = load_game(game)?;
    let mut problem = BiformProblem::new(game.clone()).with_rule(rule.clone());
    if let Some(p) = delta {
        problem = problem.with_delta(with_path(p, parse_delta(&read(p)?, &game))?);
    }
    if let Some(p) = restrict {
        problem = problem.with_collab(CollabSet::Profiles(with_path(p, parse_restriction(&read(p)?, &game))?));
    }
    let result = problem.solve()?;
    let mut solutions = Vec::new();
    let mut rows = Vec::new();
    for x in result.pure_profiles() {
        let table = problem.characteristic(&x)?;
        let alloc = problem.allocation(&x)?.into_shares();
        solutions.push(json!({
            "profile": labels_json(&game, &x),
            "allocation": alloc,
            "payoffs": game.payoff(&x)?,
            "grand_value": table.grand_value(),
        }));
        rows.push((x, alloc));
    }
    let report = json!({
        "rule": rule.name(),
        "status": result.status,
        "restricted": restrict.is_some(),
        "solutions": solutions,
        "classification": {
            "egalitarian": classification_json(&game, classify_egalitarian(&rule, &problem)?),
            "marginalist": classification_json(&game, classify_marginalist(&rule, &problem)?),
        },
    });
    let body = render(&report, Some(&solutions_table(&game, &rows)), g.format.unwrap_or(Format::Json))?;
    Ok(Outcome {
        code: if result.is_empty() { EXIT_NONE } else { EXIT_OK },
        body,
    })
}

fn table_output(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => table.to_csv_string(),
        Format::Json => render(&table.to_json(), None, Format::Json),
    }
}

fn cmd_case(g: &GlobalOpts, name: &str, params: Option<&Path>) -> Result<Outcome> {
    let case: Case = name.parse()?;
    let cfg = solver_config(g)?;
    let value = match params {
        Some(p) => with_path(p, crate::io::parse_value(&read(p)?))?,
        None => json!({}),
    };
    let items = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    let table = case.table(&items, &cfg);
    let status = table.column("status").expect("every case table has a status column");
    if let Some(bad) = table.rows.iter().find(|r| r[status] != Cell::text("ok")) {
        let note = bad.last().map(Cell::render).unwrap_or_default();
        return Err(Error::InvalidParams(note));
    }
    Ok(Outcome {
        code: EXIT_OK,
        body: table_output(&table, g.format.unwrap_or(Format::Csv))?,
    })
}

fn cmd_sweep(g: &GlobalOpts, name: &str, params: &Path) -> Result<Outcome> {
    let case: Case = name.parse()?;
    let cfg = solver_config(g)?;
    let table = with_path(params, run_sweep(case, &read(params)?, &cfg))?;
    Ok(Outcome {
        code: EXIT_OK,
        body: table_output(&table, g.format.unwrap_or(Format::Csv))?,
    })
}

fn cmd_verify(g: &GlobalOpts, prop: &str, count: usize) -> Result<Outcome> {
    let prop: Prop = prop.parse()?;
    let report = run_batch(prop, count, g.seed);
    let value = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Outcome {
        code: if report.holds { EXIT_OK } else { EXIT_NONE },
        body: render(&value, None, Format::Json)?,
    })
}

/// Runs a parsed command line and returns the exit code and report text.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Nash { game, restrict, export } => cmd_nash(g, game, restrict.as_deref(), export.as_deref()),
        Command::Shapley {
            table,
            game,
            delta,
            profile,
        } => cmd_shapley(g, table.as_deref(), game.as_deref(), delta.as_deref(), profile.as_deref()),
        Command::Biform {
            game,
            rule,
            delta,
            restrict,
        } => cmd_biform(g, game, rule, delta.as_deref(), restrict.as_deref()),
        Command::Case { name, params } => cmd_case(g, name, params.as_deref()),
        Command::Sweep { name, params } => cmd_sweep(g, name, params),
        Command::Verify { prop, count } => cmd_verify(g, prop, *count),
    }
}

/// Parses `args`, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let written = match &cli.global.out {
        Some(path) => fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(outcome.body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    outcome.code
}
