//! Nash equilibria: exhaustive enumeration for finite games and iterated best
//! response for games on boxes, plus Pareto checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{BoxGame, FiniteGame, PlayerId, ProfilePoint, PureProfile, StrategicGame};
use crate::optimize::{golden_max, grid, grid_argmax, maximize_1d};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    BestResponse,
    Analytic,
}

/// `NoneExists` is only reported by exhaustive methods. A numeric search that
/// comes back empty reports `NotFound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NashStatus {
    Found,
    NoneExists,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub profile: ProfilePoint,
    pub payoffs: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashResult {
    pub method: Method,
    pub status: NashStatus,
    /// Largest one-shot deviation gain over the reported equilibria.
    pub residual: f64,
    pub equilibria: Vec<Equilibrium>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl NashResult {
    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }

    pub fn pure_profiles(&self) -> Vec<PureProfile> {
        self.equilibria
            .iter()
            .filter_map(|e| match &e.profile {
                ProfilePoint::Pure(c) => Some(PureProfile::new(c.clone())),
                ProfilePoint::Continuous(_) => None,
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.equilibria
            .iter()
            .map(|e| match &e.profile {
                ProfilePoint::Pure(c) => c.iter().map(|&s| s as f64).collect(),
                ProfilePoint::Continuous(x) => x.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    /// Step toward the best response, in `(0, 1]`.
    pub damping: f64,
    pub grid_points: usize,
    /// Starting profiles; empty means box corners plus centroid.
    pub seeds: Vec<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iters: 10_000,
            damping: 1.0,
            grid_points: 129,
            seeds: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be at least 3, got {}",
                self.grid_points
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// All pure Nash equilibria, in lexicographic profile order.
pub fn pure_nash(game: &FiniteGame) -> NashResult {
    pure_nash_restricted(game, None)
}

/// Pure Nash equilibria of the game restricted to the profiles marked in
/// `allowed` (indexed like the payoff tensor). Deviations leaving the allowed
/// set are not available to the deviator.
pub fn pure_nash_restricted(game: &FiniteGame, allowed: Option<&[bool]>) -> NashResult {
    let ok = |k: usize| allowed.is_none_or(|a| a[k]);
    let counts = game.strategy_counts();
    let mut equilibria = Vec::new();
    for (k, x) in game.profiles().enumerate() {
        if !ok(k) {
            continue;
        }
        let fx = game.payoff_at(k);
        let stable = (0..counts.len()).all(|i| {
            (0..counts[i]).all(|s| {
                let y = x.deviate(i, s);
                let ky = game.index_of(&y).expect("deviation stays in range");
                !ok(ky) || game.payoff_at(ky)[i] <= fx[i]
            })
        });
        if stable {
            equilibria.push(Equilibrium {
                profile: ProfilePoint::Pure(x.0.clone()),
                payoffs: fx.to_vec(),
                residual: 0.0,
            });
        }
    }
    let status = if equilibria.is_empty() {
        NashStatus::NoneExists
    } else {
        NashStatus::Found
    };
    NashResult {
        method: Method::Enumeration,
        status,
        residual: 0.0,
        equilibria,
        notes: Vec::new(),
    }
}

/// Whether no player can strictly gain by a unilateral switch.
pub fn is_pure_nash(game: &FiniteGame, x: &PureProfile) -> Result<bool> {
    let fx = game.payoff(x)?;
    let counts = game.strategy_counts();
    for i in 0..counts.len() {
        for s in 0..counts[i] {
            if game.payoff(&x.deviate(i, s))?[i] > fx[i] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Maximizer of player `i`'s payoff over their interval with the other
/// coordinates of `x` held fixed. Ties go to the smallest coordinate.
pub fn best_response_1d(game: &BoxGame, i: PlayerId, x: &[f64], cfg: &SolverConfig) -> Result<f64> {
    let (lo, hi) = *game
        .bounds()
        .get(i)
        .ok_or_else(|| Error::InvalidProfile(format!("player {} does not exist", i + 1)))?;
    let mut y = x.to_vec();
    let opt = maximize_1d(
        |t| {
            y[i] = t;
            Ok(game.eval(&y)?[i])
        },
        lo,
        hi,
        cfg.grid_points,
        cfg.tol,
    )?;
    Ok(opt.x)
}

/// Largest gain any single player can obtain by deviating from `x`.
///
/// Uses its own grid (twice as fine as the solver's) and polishes the best
/// node, so it does not reuse the best-response path.
pub fn deviation_residual(game: &BoxGame, x: &[f64], grid_points: usize, tol: f64) -> Result<f64> {
    Ok(deviation_gains(game, x, grid_points, tol)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Per-player best deviation gain from `x`, clamped at zero.
pub fn deviation_gains(game: &BoxGame, x: &[f64], grid_points: usize, tol: f64) -> Result<Vec<f64>> {
    let fx = game.eval(x)?;
    let mut gains = vec![0.0; fx.len()];
    for (i, &(lo, hi)) in game.bounds().iter().enumerate() {
        if lo == hi {
            continue;
        }
        let mut y = x.to_vec();
        let mut f = |t: f64| -> Result<f64> {
            y[i] = t;
            Ok(game.eval(&y)?[i])
        };
        let nodes = grid(lo, hi, 2 * grid_points.max(3) - 1);
        let (k, best) = grid_argmax(&mut f, &nodes)?;
        let a = nodes[k.saturating_sub(1)];
        let b = nodes[(k + 1).min(nodes.len() - 1)];
        let polished = golden_max(&mut f, a, b, tol)?;
        gains[i] = (best.value.max(polished.value) - fx[i]).max(0.0);
    }
    Ok(gains)
}

pub(crate) fn accept_residual(residual: f64, payoffs: &[f64], tol: f64) -> bool {
    let scale = payoffs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    residual <= tol * scale
}

enum SeedOutcome {
    Converged(Vec<f64>),
    Stalled { last_change: f64 },
}

fn iterate_from(game: &BoxGame, seed: &[f64], cfg: &SolverConfig) -> Result<SeedOutcome> {
    let mut x = seed.to_vec();
    let mut change = f64::INFINITY;
    for it in 0..cfg.max_iters {
        change = 0.0;
        for i in 0..x.len() {
            let br = best_response_1d(game, i, &x, cfg)?;
            let next = x[i] + cfg.damping * (br - x[i]);
            change = change.max((next - x[i]).abs());
            x[i] = next;
        }
        if change < cfg.tol {
            return Ok(SeedOutcome::Converged(x));
        }
        // a line search cannot resolve a smooth peak below ~sqrt(eps), so a
        // tiny limit cycle is accepted once the deviation gain is negligible
        if it % 50 == 49 && change < 1e-6 {
            let fx = game.eval(&x)?;
            if accept_residual(deviation_residual(game, &x, cfg.grid_points, cfg.tol)?, &fx, cfg.tol) {
                return Ok(SeedOutcome::Converged(x));
            }
        }
    }
    Ok(SeedOutcome::Stalled { last_change: change })
}

/// Pure equilibria of a box game by damped iterated best response from each
/// seed, keeping only fixed points that pass the deviation check.
pub fn solve_box_nash(game: &BoxGame, cfg: &SolverConfig) -> Result<NashResult> {
    cfg.validate()?;
    let seeds = if cfg.seeds.is_empty() {
        let mut s = game.corners();
        s.push(game.centroid());
        s
    } else {
        cfg.seeds.clone()
    };
    for s in &seeds {
        if s.len() != game.n_players() {
            return Err(Error::InvalidConfig(format!(
                "seed has {} coordinates for {} players",
                s.len(),
                game.n_players()
            )));
        }
    }
    let outcomes: Vec<Result<SeedOutcome>> = seeds.par_iter().map(|s| iterate_from(game, s, cfg)).collect();

    let spread = game.bounds().iter().fold(1.0f64, |m, &(lo, hi)| m.max(hi - lo));
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-6 * spread);
    let mut equilibria: Vec<Equilibrium> = Vec::new();
    let mut notes = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            SeedOutcome::Converged(x) => {
                let payoffs = game.eval(&x)?;
                let residual = deviation_residual(game, &x, cfg.grid_points, cfg.tol)?;
                if !accept_residual(residual, &payoffs, cfg.tol) {
                    notes.push(format!(
                        "seed {k}: fixed point {:?} rejected, deviation gain {residual:e}",
                        x
                    ));
                    continue;
                }
                let known = equilibria.iter().any(|e| match &e.profile {
                    ProfilePoint::Continuous(y) => same(y, &x),
                    ProfilePoint::Pure(_) => false,
                });
                if !known {
                    equilibria.push(Equilibrium {
                        profile: ProfilePoint::Continuous(x),
                        payoffs,
                        residual,
                    });
                }
            }
            SeedOutcome::Stalled { last_change } => notes.push(format!(
                "seed {k}: no convergence after {} iterations (last step {last_change:e})",
                cfg.max_iters
            )),
        }
    }
    let residual = equilibria.iter().fold(0.0f64, |m, e| m.max(e.residual));
    let status = if equilibria.is_empty() {
        NashStatus::NotFound
    } else {
        NashStatus::Found
    };
    Ok(NashResult {
        method: Method::BestResponse,
        status,
        residual,
        equilibria,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoReport {
    pub optimal: bool,
    pub dominated_by: Option<PureProfile>,
}

/// Whether some profile gives everyone at least as much as `x` and someone more.
pub fn pareto_check(game: &FiniteGame, x: &PureProfile) -> Result<ParetoReport> {
    let fx = game.payoff(x)?.to_vec();
    for (k, y) in game.profiles().enumerate() {
        let fy = game.payoff_at(k);
        let weakly = fy.iter().zip(&fx).all(|(a, b)| a >= b);
        let strictly = fy.iter().zip(&fx).any(|(a, b)| a > b);
        if weakly && strictly {
            return Ok(ParetoReport {
                optimal: false,
                dominated_by: Some(y),
            });
        }
    }
    Ok(ParetoReport {
        optimal: true,
        dominated_by: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pennies_has_no_pure_equilibrium() {
        let g = FiniteGame::from_fn(&[2, 2], |x| {
            let v = if x.0[0] == x.0[1] { 1.0 } else { -1.0 };
            vec![v, -v]
        })
        .unwrap();
        let r = pure_nash(&g);
        assert!(r.is_empty());
        assert_eq!(r.status, NashStatus::NoneExists);
    }

    #[test]
    fn restriction_removes_deviations() {
        // coordination game where (1,1) is payoff dominant but (0,0) is also Nash
        let g = FiniteGame::from_fn(&[2, 2], |x| match (x.0[0], x.0[1]) {
            (0, 0) => vec![1.0, 1.0],
            (1, 1) => vec![2.0, 2.0],
            _ => vec![0.0, 0.0],
        })
        .unwrap();
        assert_eq!(pure_nash(&g).equilibria.len(), 2);
        let only_diag = [true, false, false, true];
        assert_eq!(pure_nash_restricted(&g, Some(&only_diag)).equilibria.len(), 2);
        let no_top = [true, true, true, false];
        let r = pure_nash_restricted(&g, Some(&no_top));
        assert_eq!(r.pure_profiles(), vec![PureProfile::new(vec![0, 0])]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            grid_points: 2,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            damping: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cournot_duopoly() {
        // q_i (10 - q1 - q2) - q_i has Nash q = 3 each
        let g = BoxGame::new(vec![(0.0, 10.0); 2], |q| {
            let p = 10.0 - q[0] - q[1];
            vec![q[0] * p - q[0], q[1] * p - q[1]]
        })
        .unwrap();
        let r = solve_box_nash(&g, &SolverConfig::default()).unwrap();
        assert_eq!(r.equilibria.len(), 1);
        let x = &r.points()[0];
        assert!((x[0] - 3.0).abs() < 1e-6 && (x[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn cycling_best_responses_are_reported() {
        // mixed-extension matching pennies: best responses chase each other
        let g = BoxGame::new(vec![(0.0, 1.0); 2], |x| {
            let a = x[0] * x[1] + (1.0 - x[0]) * (1.0 - x[1]);
            let v = 2.0 * a - 1.0;
            vec![v, -v]
        })
        .unwrap();
        let cfg = SolverConfig {
            max_iters: 200,
            ..SolverConfig::default()
        };
        let r = solve_box_nash(&g, &cfg).unwrap();
        assert_eq!(r.status, NashStatus::NotFound);
        assert!(!r.notes.is_empty());
    }
}
