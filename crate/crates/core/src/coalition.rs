//! Per-profile characteristic functions and the classical threat constructions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{Coalition, FiniteGame, PlayerId, ProfilePoint, PureProfile, StrategicGame, MAX_PLAYERS};

/// Coalition values at one strategy profile, stored as a dense `2^n` table
/// indexed by coalition mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCharacteristic {
    n: usize,
    values: Vec<f64>,
    profile: Option<ProfilePoint>,
}

impl ProfileCharacteristic {
    /// `values[mask]` is the worth of the coalition with that mask.
    pub fn new(n: usize, values: Vec<f64>, profile: Option<ProfilePoint>) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n));
        }
        if values.len() != 1usize << n {
            return Err(Error::IncompleteTable(format!(
                "{} values for {n} players, expected {}",
                values.len(),
                1usize << n
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::IncompleteTable(format!("empty coalition has value {}", values[0])));
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::IncompleteTable(format!(
                "coalition {} has a non-finite value",
                Coalition::from_mask(m as u32)
            )));
        }
        Ok(ProfileCharacteristic { n, values, profile })
    }

    /// Builds a table from `(coalition, value)` pairs. Every nonempty coalition
    /// must appear; the empty one may be omitted.
    pub fn from_pairs(n: usize, pairs: &[(Coalition, f64)], profile: Option<ProfilePoint>) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n));
        }
        let mut values = vec![f64::NAN; 1usize << n];
        values[0] = 0.0;
        for &(c, v) in pairs {
            if c.span() > n {
                return Err(Error::IncompleteTable(format!("coalition {c} mentions a player beyond {n}")));
            }
            values[c.index()] = v;
        }
        if let Some(m) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::IncompleteTable(format!(
                "missing value for coalition {}",
                Coalition::from_mask(m as u32)
            )));
        }
        ProfileCharacteristic::new(n, values, profile)
    }

    /// The sum-based table `S -> sum of payoffs[i] for i in S`.
    pub fn additive(payoffs: &[f64], profile: Option<ProfilePoint>) -> Result<Self> {
        let n = payoffs.len();
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n));
        }
        let values = Coalition::all(n)
            .map(|s| s.members().map(|i| payoffs[i]).sum())
            .collect();
        ProfileCharacteristic::new(n, values, profile)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, s: Coalition) -> f64 {
        self.values[s.index()]
    }

    pub fn grand_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile(&self) -> Option<&ProfilePoint> {
        self.profile.as_ref()
    }

    /// Pointwise sum of two tables over the same player set.
    pub fn plus(&self, other: &ProfileCharacteristic) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::IncompleteTable(format!(
                "cannot add tables over {} and {} players",
                self.n, other.n
            )));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        ProfileCharacteristic::new(self.n, values, self.profile.clone())
    }
}

type SynergyOracle<P> = Arc<dyn Fn(Coalition, &P) -> f64 + Send + Sync>;

/// Extra benefit `delta(S, x)` a coalition creates by cooperating.
pub struct Synergy<P> {
    kind: SynergyKind<P>,
}

enum SynergyKind<P> {
    Zero,
    Table(HashMap<Coalition, f64>),
    Oracle(SynergyOracle<P>),
}

impl<P> Clone for Synergy<P> {
    fn clone(&self) -> Self {
        let kind = match &self.kind {
            SynergyKind::Zero => SynergyKind::Zero,
            SynergyKind::Table(t) => SynergyKind::Table(t.clone()),
            SynergyKind::Oracle(f) => SynergyKind::Oracle(Arc::clone(f)),
        };
        Synergy { kind }
    }
}

impl<P> fmt::Debug for Synergy<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SynergyKind::Zero => write!(f, "Synergy::Zero"),
            SynergyKind::Table(t) => f.debug_tuple("Synergy::Table").field(t).finish(),
            SynergyKind::Oracle(_) => write!(f, "Synergy::Oracle(..)"),
        }
    }
}

impl<P> Default for Synergy<P> {
    fn default() -> Self {
        Synergy::zero()
    }
}

impl<P> Synergy<P> {
    pub fn zero() -> Self {
        Synergy { kind: SynergyKind::Zero }
    }

    /// Same extra benefit at every profile; coalitions not listed get 0.
    pub fn table<I: IntoIterator<Item = (Coalition, f64)>>(entries: I) -> Self {
        Synergy {
            kind: SynergyKind::Table(entries.into_iter().collect()),
        }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(Coalition, &P) -> f64 + Send + Sync + 'static,
    {
        Synergy {
            kind: SynergyKind::Oracle(Arc::new(f)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SynergyKind::Zero)
    }

    pub fn value(&self, s: Coalition, x: &P) -> f64 {
        match &self.kind {
            SynergyKind::Zero => 0.0,
            SynergyKind::Table(t) => t.get(&s).copied().unwrap_or(0.0),
            SynergyKind::Oracle(f) => f(s, x),
        }
    }
}

/// Sum-based coalition values `u_f(S, x)`.
pub fn u_f<G: StrategicGame>(game: &G, x: &G::Profile) -> Result<ProfileCharacteristic> {
    let f = game.payoff_vector(x)?;
    ProfileCharacteristic::additive(&f, Some(G::point(x)))
}

/// Synergy-augmented values `v_f(S, x) = u_f(S, x) + delta(S, x)`.
pub fn v_f<G: StrategicGame>(game: &G, x: &G::Profile, delta: &Synergy<G::Profile>) -> Result<ProfileCharacteristic> {
    let u = u_f(game, x)?;
    if delta.is_zero() {
        return Ok(u);
    }
    add_synergy(u, x, delta)
}

pub(crate) fn add_synergy<P>(u: ProfileCharacteristic, x: &P, delta: &Synergy<P>) -> Result<ProfileCharacteristic> {
    let n = u.n();
    let mut values = u.values;
    for s in Coalition::all(n) {
        let d = delta.value(s, x);
        let bad = if s.is_empty() { d != 0.0 } else { !d.is_finite() || d < 0.0 };
        if bad {
            return Err(Error::InvalidSynergy {
                coalition: s.to_string(),
                value: d,
            });
        }
        values[s.index()] += d;
    }
    ProfileCharacteristic::new(n, values, u.profile)
}

/// Grand-coalition value `v_f(N, x)` without building the full table.
pub fn grand_value<G: StrategicGame>(game: &G, x: &G::Profile, delta: &Synergy<G::Profile>) -> Result<f64> {
    let f = game.payoff_vector(x)?;
    let grand = Coalition::grand(f.len());
    let d = delta.value(grand, x);
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidSynergy {
            coalition: grand.to_string(),
            value: d,
        });
    }
    Ok(f.iter().sum::<f64>() + d)
}

/// A pure fixed point of one of the threat constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreatSolution {
    pub profile: PureProfile,
    /// Strategies of the coalition's members, in player order.
    pub inside_profile: Vec<usize>,
    /// Strategies of the complement's members, in player order.
    pub outside_profile: Vec<usize>,
    pub coalition_value: f64,
    pub complement_value: f64,
}

fn check_members(game: &FiniteGame, s: Coalition) -> Result<()> {
    let n = game.n_players();
    if s.span() > n {
        return Err(Error::InvalidCoalition(format!("{s} mentions a player beyond {n}")));
    }
    Ok(())
}

fn check_proper(game: &FiniteGame, s: Coalition) -> Result<()> {
    check_members(game, s)?;
    if s.is_empty() || s == Coalition::grand(game.n_players()) {
        return Err(Error::InvalidCoalition(format!(
            "{s} must be a nonempty proper subset of the players"
        )));
    }
    Ok(())
}

/// Number of joint strategies of `members` and a writer for the `t`-th one.
struct Joint<'a> {
    members: Vec<PlayerId>,
    counts: &'a [usize],
    total: usize,
}

impl<'a> Joint<'a> {
    fn new(s: Coalition, counts: &'a [usize]) -> Self {
        let members: Vec<PlayerId> = s.members().collect();
        let total = members.iter().map(|&i| counts[i]).product();
        Joint { members, counts, total }
    }

    fn write(&self, mut t: usize, choices: &mut [usize]) {
        for &i in self.members.iter().rev() {
            choices[i] = t % self.counts[i];
            t /= self.counts[i];
        }
    }
}

fn coalition_sum(f: &[f64], s: Coalition) -> f64 {
    s.members().map(|i| f[i]).sum()
}

/// Minimax value: the best total the coalition can guarantee against the
/// worst joint reply of the complement.
pub fn minimax_characteristic(game: &FiniteGame, s: Coalition) -> Result<f64> {
    check_members(game, s)?;
    if s.is_empty() {
        return Ok(0.0);
    }
    let counts = game.strategy_counts();
    let n = counts.len();
    let inside = Joint::new(s, &counts);
    let outside = Joint::new(s.complement(n), &counts);
    let mut choices = vec![0; n];
    let mut worst = f64::INFINITY;
    for t in 0..outside.total {
        outside.write(t, &mut choices);
        let mut best = f64::NEG_INFINITY;
        for u in 0..inside.total {
            inside.write(u, &mut choices);
            let f = game.payoff(&PureProfile::new(choices.clone()))?;
            best = best.max(coalition_sum(f, s));
        }
        worst = worst.min(best);
    }
    Ok(worst)
}

fn threat_fixed_points<FI, FO>(game: &FiniteGame, s: Coalition, inside_obj: FI, outside_obj: FO) -> Result<Vec<ThreatSolution>>
where
    FI: Fn(&[f64]) -> f64,
    FO: Fn(&[f64]) -> f64,
{
    check_proper(game, s)?;
    let counts = game.strategy_counts();
    let n = counts.len();
    let comp = s.complement(n);
    let inside = Joint::new(s, &counts);
    let outside = Joint::new(comp, &counts);
    let mut found = Vec::new();
    for x in game.profiles() {
        let fx = game.payoff(&x)?;
        let (in_x, out_x) = (inside_obj(fx), outside_obj(fx));
        let mut y = x.0.clone();
        let mut stable = true;
        for u in 0..inside.total {
            inside.write(u, &mut y);
            if inside_obj(game.payoff(&PureProfile::new(y.clone()))?) > in_x {
                stable = false;
                break;
            }
        }
        if stable {
            y.copy_from_slice(&x.0);
            for t in 0..outside.total {
                outside.write(t, &mut y);
                if outside_obj(game.payoff(&PureProfile::new(y.clone()))?) > out_x {
                    stable = false;
                    break;
                }
            }
        }
        if stable {
            found.push(ThreatSolution {
                inside_profile: s.members().map(|i| x.0[i]).collect(),
                outside_profile: comp.members().map(|i| x.0[i]).collect(),
                coalition_value: coalition_sum(fx, s),
                complement_value: coalition_sum(fx, comp),
                profile: x,
            });
        }
    }
    Ok(found)
}

/// All pure rational-threat points of `S`.
///
/// The coalition maximizes its advantage over the complement written as
/// `sum_N f - sum_{N\S} f`, which is just `sum_S f` as a function of the
/// coalition's own move; the complement maximizes `sum_{N\S} f - sum_S f`.
/// Results are in lexicographic profile order.
pub fn rational_threat(game: &FiniteGame, s: Coalition) -> Result<Vec<ThreatSolution>> {
    let n = game.n_players();
    let comp = s.complement(n);
    let all = Coalition::grand(n);
    threat_fixed_points(
        game,
        s,
        |f| coalition_sum(f, all) - coalition_sum(f, comp),
        |f| coalition_sum(f, comp) - coalition_sum(f, s),
    )
}

/// All pure defensive-equilibrium points of `S`: the coalition maximizes the
/// total payoff while the complement maximizes its own sum.
pub fn defensive_equilibrium(game: &FiniteGame, s: Coalition) -> Result<Vec<ThreatSolution>> {
    let n = game.n_players();
    let comp = s.complement(n);
    let all = Coalition::grand(n);
    threat_fixed_points(game, s, |f| coalition_sum(f, all), |f| coalition_sum(f, comp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> FiniteGame {
        FiniteGame::new(
            vec!["1".into(), "2".into()],
            vec![vec!["C".into(), "NC".into()], vec!["C".into(), "NC".into()]],
            vec![vec![10.0, 10.0], vec![0.0, 12.0], vec![12.0, 0.0], vec![5.0, 5.0]],
        )
        .unwrap()
    }

    #[test]
    fn additive_values() {
        let g = table1();
        let u = u_f(&g, &PureProfile::new(vec![0, 0])).unwrap();
        assert_eq!(u.value(Coalition::singleton(0)), 10.0);
        assert_eq!(u.grand_value(), 20.0);
        assert_eq!(u.value(Coalition::EMPTY), 0.0);
    }

    #[test]
    fn synergy_adds_and_rejects_negatives() {
        let g = table1();
        let x = PureProfile::new(vec![0, 0]);
        let d = Synergy::table([(Coalition::grand(2), 1.0)]);
        let v = v_f(&g, &x, &d).unwrap();
        assert_eq!(v.grand_value(), 21.0);
        assert_eq!(v.value(Coalition::singleton(0)), 10.0);
        let bad = Synergy::table([(Coalition::singleton(1), -0.5)]);
        assert!(matches!(v_f(&g, &x, &bad), Err(Error::InvalidSynergy { .. })));
        let nonzero_empty: Synergy<PureProfile> = Synergy::from_fn(|_, _| 1.0);
        assert!(v_f(&g, &x, &nonzero_empty).is_err());
    }

    #[test]
    fn incomplete_tables_are_rejected() {
        let pairs = [(Coalition::singleton(0), 1.0), (Coalition::singleton(1), 2.0)];
        assert!(matches!(
            ProfileCharacteristic::from_pairs(2, &pairs, None),
            Err(Error::IncompleteTable(_))
        ));
    }

    #[test]
    fn threat_points_need_a_proper_coalition() {
        let g = table1();
        assert!(rational_threat(&g, Coalition::EMPTY).is_err());
        assert!(defensive_equilibrium(&g, Coalition::grand(2)).is_err());
        assert_eq!(minimax_characteristic(&g, Coalition::EMPTY).unwrap(), 0.0);
    }
}
