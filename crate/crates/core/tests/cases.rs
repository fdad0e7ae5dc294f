//! Closed forms against the generic pipeline, and first-order conditions
//! checked by central differences.

use biform::allocation::AllocationRule;
use biform::cases::bertrand::BertrandParams;
use biform::cases::commons::CommonsParams;
use biform::cases::regulation::RegulationParams;
use biform::cases::supply_chain::{PriceBranch, SupplyChainParams};
use biform::game::Coalition;

const H: f64 = 1e-6;

fn d(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + H) - f(x - H)) / (2.0 * H)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1.0)
}

fn stationary(slope: f64) -> bool {
    slope.abs() <= 1e-4
}

#[test]
fn commons_first_order_conditions() {
    for (m, c0) in [(3.0, 0.4), (1.0, 0.1), (10.0, 0.8)] {
        let p = CommonsParams::linear(m, c0);
        let q = p.nash_total().unwrap() / 2.0;
        assert!(stationary(d(|x| p.profits(&[x, q])[0], q)));
        let total = p.coop_total().unwrap();
        assert!(stationary(d(|x| p.total_profit(x), total)));
        assert!((2.0 * q - 2.0 * m / 3.0).abs() < 1e-12);
        assert!((total - m / 2.0).abs() < 1e-12);
    }
    let s = CommonsParams::linear(3.0, 0.4).summary().unwrap();
    assert!((s.nash_profit_each - 0.2).abs() < 1e-12);
    assert!((s.coop_profit_each - 0.225).abs() < 1e-12);
}

#[test]
fn quadratic_commons_still_orders() {
    let p = CommonsParams {
        mu_kind: biform::cases::commons::MuKind::Quadratic,
        mix: 0.3,
        ..CommonsParams::default()
    };
    let (nash, coop) = (p.nash_total().unwrap(), p.coop_total().unwrap());
    assert!(coop < nash);
    assert!(p.total_profit(coop) > p.total_profit(nash));
    assert!(near(d(|q| p.mu(q), 1.2), p.mu_prime(1.2)));
}

#[test]
fn regulation_closed_forms_match_the_pipeline() {
    let p = RegulationParams::default();
    let problem = p.problem(AllocationRule::Shapley).unwrap();
    let steps = [0.0, 0.3, 0.5, 0.9, 1.0];
    for &a in &steps {
        for &b in &steps {
            for &c in &steps {
                let x = vec![a, b, c];
                let f = p.payoffs(&x);
                let table = problem.characteristic(&x).unwrap();
                let alloc = problem.allocation(&x).unwrap();
                assert!(near(table.grand_value(), p.grand_value_closed_form(&x)), "{x:?}");
                for i in 0..3 {
                    assert!(near(f[i], p.payoff_closed_form(i, &x)), "{x:?}");
                    assert!(near(alloc.shares()[i], p.shapley_closed_form(i, &x)), "{x:?}");
                    let slope = d(
                        |t| {
                            let mut y = x.clone();
                            y[i] = t;
                            p.payoff_closed_form(i, &y)
                        },
                        x[i],
                    );
                    assert!(near(slope, p.own_slope(i, &x)), "{x:?}");
                }
            }
        }
    }
    assert!((p.equal_split_value() - 0.3).abs() < 1e-12);
}

#[test]
fn regulation_pure_game() {
    let p = RegulationParams::default();
    let everyone = vec![0, 0, 0];
    let equal = p.pure_problem(AllocationRule::EqualSplit).unwrap().solve().unwrap();
    assert!(equal.pure_profiles().iter().any(|x| x.0 == everyone));
    let t = p.pure_problem(AllocationRule::Shapley).unwrap();
    let grand = t.characteristic(&biform::game::PureProfile::new(everyone)).unwrap();
    assert!((grand.value(Coalition::grand(3)) - 0.9).abs() < 1e-12);
}

#[test]
fn bertrand_first_order_conditions() {
    for mu in [2.6, 3.0, 4.0] {
        let p = BertrandParams { mu, ..Default::default() };
        let s = p.summary().unwrap();
        let (h, t) = (s.theta_hat.value, s.theta_star.value);
        // joint-profit price
        let price = p.coop_price([h, h]);
        assert!(stationary(d(|q| p.profits([q, q], [h, h]).iter().sum(), price)));
        // each firm keeps its own profit
        let own = p.problem(AllocationRule::contribution()).unwrap().derive().unwrap();
        assert!(stationary(d(|x| own.eval(&[x, h]).unwrap()[0], h)), "mu = {mu}");
        // equal split of the joint profit
        let equal = p.problem(AllocationRule::EqualSplit).unwrap().derive().unwrap();
        assert!(stationary(d(|x| equal.eval(&[x, t]).unwrap()[0], t)), "mu = {mu}");
        assert!(near(s.phi, p.phi_closed_form().unwrap()));
        assert!(near(s.psi, p.psi_closed_form().unwrap()));
        assert!(near(s.psi - s.phi, p.gap_closed_form().unwrap()));
    }
}

#[test]
fn bertrand_saturated_investment() {
    let p = BertrandParams { mu: 0.2, ..Default::default() };
    let s = p.summary().unwrap();
    assert_eq!((s.theta_hat.branch, s.theta_star.branch), ("B2", "C2"));
    assert_eq!((s.theta_hat.value, s.theta_star.value), (1.0, 1.0));
    assert!((s.psi - s.phi).abs() < 1e-12);
    assert!(s.gap_closed_form.is_none());
    assert!(BertrandParams { mu: 0.25, ..Default::default() }.summary().is_err());
}

#[test]
fn supply_chain_first_order_conditions() {
    let p = SupplyChainParams::default();
    let price = p.p_star();
    assert!(stationary(d(|q| p.value_of_price(q), price)));
    let ts = p.theta_star_raw(price);
    assert!(stationary(d(|t| p.coop_value(price, t), ts)));
    let th = p.theta_hat_raw(price);
    assert!(stationary(d(|t| p.profits(price, t)[1], th)));
    assert!(near(p.coop_value(price, ts), p.v_star()));

    let st = p.statics();
    let at = |mu: f64, b: f64| SupplyChainParams { mu, b, ..p.clone() };
    assert!(near(st.dv_dmu, d(|m| at(m, p.b).v_star(), p.mu)));
    assert!(near(st.dp_dmu, d(|m| at(m, p.b).p_star(), p.mu)));
    assert!(near(st.dp_db, d(|b| at(p.mu, b).p_star(), p.b)));
}

#[test]
fn supply_chain_low_investment_cost_sits_at_the_price_cap() {
    let p = SupplyChainParams { mu: 0.2, ..Default::default() };
    let s = p.summary().unwrap();
    assert_eq!(s.branch, PriceBranch::E2);
    assert_eq!(s.price, 9.0);
    assert!((s.v_star - 68.25).abs() < 1e-12);
    assert!(s.theta_hat_clamped && s.theta_star_clamped);
    assert!((s.coop_total - 31.8).abs() < 1e-9);
    let shares: f64 = s.shares.iter().sum();
    assert!((shares - s.coop_total).abs() < 1e-9);
}
