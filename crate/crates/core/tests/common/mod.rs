//! Reference computations shared by the integration tests. None of these call
//! into the library's own solvers.
#![allow(dead_code)]

use biform::coalition::ProfileCharacteristic;
use biform::game::{Coalition, FiniteGame, PureProfile};

/// Shapley value by averaging marginal contributions over every joining order.
pub fn shapley_by_permutations(values: &[f64], n: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut acc = vec![0.0; n];
    let mut count = 0usize;
    permute(&mut order, 0, &mut |perm| {
        let mut mask = 0usize;
        for &i in perm {
            let before = values[mask];
            mask |= 1 << i;
            acc[i] += values[mask] - before;
        }
        count += 1;
    });
    acc.iter().map(|a| a / count as f64).collect()
}

fn permute(order: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == order.len() {
        visit(order);
        return;
    }
    for j in k..order.len() {
        order.swap(k, j);
        permute(order, k + 1, visit);
        order.swap(k, j);
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn table(n: usize, values: Vec<f64>) -> ProfileCharacteristic {
    ProfileCharacteristic::new(n, values, None).expect("valid table")
}

/// Every pure profile of a game with these strategy counts, row-major.
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..c).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

fn pay(game: &FiniteGame, x: &[usize]) -> Vec<f64> {
    game.payoff(&PureProfile::new(x.to_vec())).expect("profile in range").to_vec()
}

fn sum_over(f: &[f64], s: Coalition) -> f64 {
    (0..f.len()).filter(|&i| s.contains(i)).map(|i| f[i]).sum()
}

/// Profiles that agree with `x` outside the players in `s`.
fn variations(game: &FiniteGame, x: &[usize], s: Coalition) -> Vec<Vec<usize>> {
    all_profiles(&game.strategy_counts())
        .into_iter()
        .filter(|y| (0..x.len()).all(|i| s.contains(i) || y[i] == x[i]))
        .collect()
}

/// min over the complement's joint moves of max over the coalition's joint
/// replies of the coalition's total, by direct enumeration.
pub fn brute_minimax(game: &FiniteGame, s: Coalition) -> f64 {
    let n = game.players().len();
    let comp = s.complement(n);
    let profiles = all_profiles(&game.strategy_counts());
    let outside_moves: Vec<&Vec<usize>> = profiles.iter().filter(|y| (0..n).all(|i| comp.contains(i) || y[i] == 0)).collect();
    let mut worst = f64::INFINITY;
    for mv in outside_moves {
        let best = variations(game, mv, s)
            .iter()
            .map(|y| sum_over(&pay(game, y), s))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.min(best);
    }
    worst
}

/// Profiles where neither side can raise its objective by a joint change of
/// its own members' strategies.
pub fn brute_fixed_points(
    game: &FiniteGame,
    s: Coalition,
    inside: impl Fn(&[f64]) -> f64,
    outside: impl Fn(&[f64]) -> f64,
) -> Vec<Vec<usize>> {
    let n = game.players().len();
    let comp = s.complement(n);
    all_profiles(&game.strategy_counts())
        .into_iter()
        .filter(|x| {
            let fx = pay(game, x);
            let ok_in = variations(game, x, s).iter().all(|y| inside(&pay(game, y)) <= inside(&fx));
            let ok_out = variations(game, x, comp).iter().all(|y| outside(&pay(game, y)) <= outside(&fx));
            ok_in && ok_out
        })
        .collect()
}

pub fn brute_defensive(game: &FiniteGame, s: Coalition) -> Vec<Vec<usize>> {
    let comp = s.complement(game.players().len());
    brute_fixed_points(game, s, |f| f.iter().sum(), |f| sum_over(f, comp))
}

pub fn brute_rational_threat(game: &FiniteGame, s: Coalition) -> Vec<Vec<usize>> {
    let comp = s.complement(game.players().len());
    brute_fixed_points(
        game,
        s,
        |f| f.iter().sum::<f64>() - sum_over(f, comp),
        |f| sum_over(f, comp) - sum_over(f, s),
    )
}

/// Pure Nash equilibria by checking every unilateral deviation.
pub fn brute_nash(game: &FiniteGame) -> Vec<Vec<usize>> {
    let counts = game.strategy_counts();
    all_profiles(&counts)
        .into_iter()
        .filter(|x| {
            let fx = pay(game, x);
            (0..counts.len()).all(|i| {
                (0..counts[i]).all(|s| {
                    let mut y = x.clone();
                    y[i] = s;
                    pay(game, &y)[i] <= fx[i]
                })
            })
        })
        .collect()
}

/// A game with numbered players and strategies and row-major payoffs.
pub fn game_from_rows(counts: &[usize], rows: Vec<Vec<f64>>) -> FiniteGame {
    let players = (1..=counts.len()).map(|i| i.to_string()).collect();
    let strategies = counts.iter().map(|&c| (0..c).map(|s| format!("s{s}")).collect()).collect();
    FiniteGame::new(players, strategies, rows).expect("well-formed game")
}
