mod common;

use biform::allocation::{shapley, AllocationRule};
use biform::biform::{BiformProblem, CollabSet};
use biform::coalition::{minimax_characteristic, u_f};
use biform::equilibrium::{deviation_residual, pareto_check, pure_nash, pure_nash_restricted};
use biform::game::{box_game_from_finite_mixed, Coalition, FiniteGame, PureProfile};
use biform::io::{export_game, parse_game};
use biform::sweep::expand_grid;
use common::{brute_nash, game_from_rows, rel_close, shapley_by_permutations};
use proptest::prelude::*;

/// Strategy counts and an integer payoff table of matching size.
fn small_game(max_players: usize, max_strategies: usize) -> impl Strategy<Value = FiniteGame> {
    prop::collection::vec(2..=max_strategies, 2..=max_players).prop_flat_map(|counts| {
        let n = counts.len();
        let total: usize = counts.iter().product();
        prop::collection::vec(prop::collection::vec(-9i32..=9, n), total).prop_map(move |rows| {
            let rows = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            game_from_rows(&counts, rows)
        })
    })
}

fn char_table() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(-100.0f64..100.0, (1 << n) - 1).prop_map(move |rest| {
            let mut v = vec![0.0];
            v.extend(rest);
            (n, v)
        })
    })
}

fn nash_profiles(game: &FiniteGame, allowed: Option<&[bool]>) -> Vec<Vec<usize>> {
    pure_nash_restricted(game, allowed).pure_profiles().into_iter().map(|x| x.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shapley_matches_the_permutation_average((n, v) in char_table()) {
        let phi = shapley(&common::table(n, v.clone())).into_shares();
        let oracle = shapley_by_permutations(&v, n);
        for i in 0..n {
            prop_assert!(rel_close(phi[i], oracle[i], 1e-9), "{} vs {}", phi[i], oracle[i]);
        }
        prop_assert!(rel_close(phi.iter().sum(), v[(1 << n) - 1], 1e-9));
    }

    #[test]
    fn enumeration_agrees_with_brute_force(game in small_game(3, 4)) {
        prop_assert_eq!(nash_profiles(&game, None), brute_nash(&game));
    }

    #[test]
    fn minimax_bounds_pure_equilibrium_payoffs(game in small_game(2, 4)) {
        let eqs = pure_nash(&game).pure_profiles();
        for x in eqs {
            let f = game.payoff(&x).unwrap();
            for i in 0..2 {
                prop_assert!(minimax_characteristic(&game, Coalition::singleton(i)).unwrap() <= f[i]);
            }
        }
        let best = game.profiles().map(|x| u_f(&game, &x).unwrap().grand_value()).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(minimax_characteristic(&game, Coalition::grand(2)).unwrap(), best);
    }

    #[test]
    fn grand_value_maximizers_are_pareto_optimal(game in small_game(3, 3)) {
        let total = |x: &PureProfile| game.payoff(x).unwrap().iter().sum::<f64>();
        let best = game.profiles().map(|x| total(&x)).fold(f64::NEG_INFINITY, f64::max);
        for x in game.profiles().filter(|x| total(x) == best) {
            prop_assert!(pareto_check(&game, &x).unwrap().optimal);
        }
    }

    #[test]
    fn pure_equilibria_are_mixed_corners(game in small_game(3, 2)) {
        let boxed = box_game_from_finite_mixed(&game).unwrap();
        for x in pure_nash(&game).pure_profiles() {
            let corner: Vec<f64> = x.0.iter().map(|&s| if s == 0 { 1.0 } else { 0.0 }).collect();
            prop_assert_eq!(boxed.eval(&corner).unwrap(), game.payoff(&x).unwrap().to_vec());
            prop_assert!(deviation_residual(&boxed, &corner, 33, 1e-10).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn derived_payoffs_split_the_grand_value(game in small_game(3, 3)) {
        for rule in [AllocationRule::Shapley, AllocationRule::EqualSplit, AllocationRule::contribution()] {
            let derived = BiformProblem::new(game.clone()).with_rule(rule).derive().unwrap();
            for k in 0..game.profile_count() {
                let (got, f) = (derived.game.payoff_at(k), game.payoff_at(k));
                prop_assert!(rel_close(got.iter().sum(), f.iter().sum(), 1e-12));
            }
        }
        // with no synergy, Shapley and own contribution hand back the game itself
        let derived = BiformProblem::new(game.clone()).derive().unwrap();
        for k in 0..game.profile_count() {
            for (a, b) in derived.game.payoff_at(k).iter().zip(game.payoff_at(k)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn restriction_is_consistent(game in small_game(3, 3), mask in prop::collection::vec(any::<bool>(), 27)) {
        let allowed: Vec<bool> = mask[..game.profile_count()].to_vec();
        let all = vec![true; game.profile_count()];
        prop_assert_eq!(nash_profiles(&game, Some(&all)), nash_profiles(&game, None));
        let restricted = nash_profiles(&game, Some(&allowed));
        for x in &restricted {
            let k = game.index_of(&PureProfile::new(x.clone())).unwrap();
            prop_assert!(allowed[k]);
        }
        // an unrestricted equilibrium that stays allowed stays an equilibrium
        for x in nash_profiles(&game, None) {
            let k = game.index_of(&PureProfile::new(x.clone())).unwrap();
            if allowed[k] {
                prop_assert!(restricted.contains(&x));
            }
        }
        let keep: Vec<PureProfile> = game.profiles().enumerate().filter(|(k, _)| allowed[*k]).map(|(_, x)| x).collect();
        prop_assume!(!keep.is_empty());
        let problem = BiformProblem::new(game.clone()).with_collab(CollabSet::Profiles(keep));
        let solved: Vec<Vec<usize>> = problem.solve().unwrap().pure_profiles().into_iter().map(|x| x.0).collect();
        prop_assert_eq!(solved, restricted);
    }

    #[test]
    fn games_survive_export(game in small_game(3, 4)) {
        prop_assert_eq!(parse_game(&export_game(&game)).unwrap(), game);
    }

    #[test]
    fn grids_expand_to_the_product(a in 0usize..4, b in 0usize..4) {
        let doc = serde_json::json!({"base": {"c": 1}, "vary": {"x": (0..a).collect::<Vec<_>>(), "y": (0..b).collect::<Vec<_>>()}});
        prop_assert_eq!(expand_grid(&doc).unwrap().len(), a * b);
    }
}
