//! Strategic games: finite normal-form games and continuous games on boxes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of players; characteristic tables have `2^n` entries.
pub const MAX_PLAYERS: usize = 24;

/// Tolerance on the sum of a mixed distribution.
pub const MIXED_SUM_TOL: f64 = 1e-12;

/// Zero-based player index.
pub type PlayerId = usize;

/// A set of players stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub fn grand(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS, "coalitions hold at most {MAX_PLAYERS} players");
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: PlayerId) -> Self {
        assert!(i < MAX_PLAYERS, "player index {i} out of range");
        Coalition(1 << i)
    }

    pub fn from_members<I: IntoIterator<Item = PlayerId>>(members: I) -> Self {
        members
            .into_iter()
            .fold(Coalition::EMPTY, |c, i| c.with(i))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, i: PlayerId) -> bool {
        i < MAX_PLAYERS && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: PlayerId) -> Self {
        assert!(i < MAX_PLAYERS, "player index {i} out of range");
        Coalition(self.0 | (1 << i))
    }

    pub fn without(self, i: PlayerId) -> Self {
        Coalition(self.0 & !(1 << i))
    }

    pub fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Self {
        Coalition(self.0 & other.0)
    }

    pub fn complement(self, n: usize) -> Self {
        Coalition(!self.0 & Coalition::grand(n).0)
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in increasing order.
    pub fn members(self) -> impl Iterator<Item = PlayerId> {
        let mask = self.0;
        (0..MAX_PLAYERS).filter(move |i| mask & (1 << i) != 0)
    }

    /// All `2^n` coalitions of an `n`-player game, ordered by mask.
    pub fn all(n: usize) -> impl Iterator<Item = Coalition> {
        assert!(n <= MAX_PLAYERS, "coalitions hold at most {MAX_PLAYERS} players");
        (0..(1u32 << n)).map(Coalition)
    }

    /// Highest player index plus one, or 0 for the empty coalition.
    pub fn span(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }
}

/// Renders as a sorted, 1-based, brace-delimited list such as `{1,3}`.
impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.members().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl FromStr for Coalition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("coalition key {s:?} is not of the form {{1,2}}")))?;
        let mut c = Coalition::EMPTY;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let k: usize = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad player {part:?} in coalition key {s:?}")))?;
            if k == 0 || k > MAX_PLAYERS {
                return Err(Error::Parse(format!(
                    "player {k} in coalition key {s:?} is outside 1..={MAX_PLAYERS}"
                )));
            }
            c = c.with(k - 1);
        }
        Ok(c)
    }
}

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PureProfile(pub Vec<usize>);

impl PureProfile {
    pub fn new(choices: Vec<usize>) -> Self {
        PureProfile(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    /// Copy with player `i` switched to strategy `s`.
    pub fn deviate(&self, i: PlayerId, s: usize) -> Self {
        let mut c = self.0.clone();
        c[i] = s;
        PureProfile(c)
    }
}

/// One probability vector per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    dists: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(dists: Vec<Vec<f64>>) -> Result<Self> {
        for (i, d) in dists.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::InvalidMixedProfile(format!("player {} has an empty distribution", i + 1)));
            }
            if d.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidMixedProfile(format!(
                    "player {} has a negative or non-finite probability",
                    i + 1
                )));
            }
            let sum: f64 = d.iter().sum();
            if (sum - 1.0).abs() > MIXED_SUM_TOL {
                return Err(Error::InvalidMixedProfile(format!(
                    "player {} probabilities sum to {sum}",
                    i + 1
                )));
            }
        }
        Ok(MixedProfile { dists })
    }

    /// The degenerate mixture concentrated on a pure profile.
    pub fn pure(profile: &PureProfile, counts: &[usize]) -> Result<Self> {
        let dists = profile
            .0
            .iter()
            .zip(counts)
            .map(|(&s, &k)| {
                let mut d = vec![0.0; k];
                if s < k {
                    d[s] = 1.0;
                }
                d
            })
            .collect();
        MixedProfile::new(dists)
    }

    pub fn dists(&self) -> &[Vec<f64>] {
        &self.dists
    }
}

/// A profile of either kind, for reports and characteristic tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfilePoint {
    Pure(Vec<usize>),
    Continuous(Vec<f64>),
}

impl fmt::Display for ProfilePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            ProfilePoint::Pure(v) => v.iter().map(|s| s.to_string()).collect(),
            ProfilePoint::Continuous(v) => v.iter().map(|s| s.to_string()).collect(),
        };
        write!(f, "({})", parts.join(","))
    }
}

/// Anything with players, profiles and a vector payoff function.
pub trait StrategicGame {
    type Profile: Clone + fmt::Debug + Send + Sync;

    fn n_players(&self) -> usize;

    fn payoff_vector(&self, x: &Self::Profile) -> Result<Vec<f64>>;

    fn point(x: &Self::Profile) -> ProfilePoint;
}

/// Finite normal-form game with a dense payoff tensor.
///
/// Profiles are stored in row-major order with player 0 varying slowest, so
/// for a 2x2 game the order is `(0,0), (0,1), (1,0), (1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    strides: Vec<usize>,
    payoffs: Vec<f64>,
}

impl FiniteGame {
    /// `payoffs[k]` is the payoff vector of the `k`-th profile in row-major order.
    pub fn new(players: Vec<String>, strategies: Vec<Vec<String>>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = strategies.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n));
        }
        if players.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} player names for {n} strategy lists",
                players.len()
            )));
        }
        if let Some(i) = strategies.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidGame(format!("player {} has no strategies", i + 1)));
        }
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(strategies[i + 1].len())
                .ok_or_else(|| Error::InvalidGame("profile count overflows".into()))?;
        }
        let count = strides[0]
            .checked_mul(strategies[0].len())
            .ok_or_else(|| Error::InvalidGame("profile count overflows".into()))?;
        if payoffs.len() != count {
            return Err(Error::InvalidGame(format!(
                "payoff tensor has {} profiles, expected {count}",
                payoffs.len()
            )));
        }
        let mut flat = Vec::with_capacity(count * n);
        for (k, row) in payoffs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGame(format!(
                    "profile {k} has {} payoffs, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGame(format!("profile {k} has a non-finite payoff")));
            }
            flat.extend_from_slice(row);
        }
        Ok(FiniteGame {
            players,
            strategies,
            strides,
            payoffs: flat,
        })
    }

    /// Builds a game by evaluating `f` at every profile. Players are named
    /// `P1, P2, ...` and strategies `0, 1, ...`.
    pub fn from_fn<F>(counts: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&PureProfile) -> Vec<f64>,
    {
        let players = (1..=counts.len()).map(|i| format!("P{i}")).collect();
        let strategies = counts
            .iter()
            .map(|&k| (0..k).map(|s| s.to_string()).collect())
            .collect();
        FiniteGame::from_fn_labeled(players, strategies, f)
    }

    pub fn from_fn_labeled<F>(players: Vec<String>, strategies: Vec<Vec<String>>, f: F) -> Result<Self>
    where
        F: Fn(&PureProfile) -> Vec<f64>,
    {
        let counts: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        let payoffs = (0..total).map(|k| f(&decode(&counts, k))).collect();
        FiniteGame::new(players, strategies, payoffs)
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn strategies(&self) -> &[Vec<String>] {
        &self.strategies
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    pub fn profile_count(&self) -> usize {
        self.payoffs.len() / self.players.len()
    }

    /// All pure profiles in row-major (lexicographic) order.
    pub fn profiles(&self) -> impl Iterator<Item = PureProfile> + '_ {
        let counts = self.strategy_counts();
        (0..self.profile_count()).map(move |k| decode(&counts, k))
    }

    pub fn profile_at(&self, k: usize) -> PureProfile {
        decode(&self.strategy_counts(), k)
    }

    pub fn index_of(&self, x: &PureProfile) -> Result<usize> {
        self.check(x)?;
        Ok(x.0.iter().zip(&self.strides).map(|(s, st)| s * st).sum())
    }

    fn check(&self, x: &PureProfile) -> Result<()> {
        if x.0.len() != self.players.len() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries for {} players",
                x.0.len(),
                self.players.len()
            )));
        }
        for (i, (&s, strat)) in x.0.iter().zip(&self.strategies).enumerate() {
            if s >= strat.len() {
                return Err(Error::InvalidProfile(format!(
                    "player {} strategy index {s} out of range (has {})",
                    i + 1,
                    strat.len()
                )));
            }
        }
        Ok(())
    }

    /// Payoff vector at a pure profile, exactly as stored.
    pub fn payoff(&self, x: &PureProfile) -> Result<&[f64]> {
        let k = self.index_of(x)?;
        Ok(self.payoff_at(k))
    }

    pub fn payoff_at(&self, k: usize) -> &[f64] {
        let n = self.players.len();
        &self.payoffs[k * n..(k + 1) * n]
    }

    /// Expected payoff vector under independent mixing.
    pub fn mixed_payoff(&self, u: &MixedProfile) -> Result<Vec<f64>> {
        let counts = self.strategy_counts();
        let dists = u.dists();
        if dists.len() != counts.len() || dists.iter().zip(&counts).any(|(d, &k)| d.len() != k) {
            return Err(Error::InvalidMixedProfile(
                "distribution shapes do not match the game's strategy sets".into(),
            ));
        }
        let n = counts.len();
        let mut out = vec![0.0; n];
        for k in 0..self.profile_count() {
            let x = decode(&counts, k);
            let prob: f64 = x.0.iter().enumerate().map(|(i, &s)| dists[i][s]).product();
            if prob == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.payoff_at(k)) {
                *o += prob * v;
            }
        }
        Ok(out)
    }

    /// Strategy labels of a profile, e.g. `(C,NC)`.
    pub fn format_profile(&self, x: &PureProfile) -> String {
        format!("({})", self.profile_labels(x).join(","))
    }

    pub fn profile_labels(&self, x: &PureProfile) -> Vec<String> {
        x.0.iter()
            .zip(&self.strategies)
            .map(|(&s, labels)| labels.get(s).cloned().unwrap_or_else(|| s.to_string()))
            .collect()
    }

    /// Looks up a profile by its strategy labels.
    pub fn profile_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureProfile> {
        if labels.len() != self.strategies.len() {
            return Err(Error::InvalidProfile(format!(
                "{} labels for {} players",
                labels.len(),
                self.strategies.len()
            )));
        }
        let mut choices = Vec::with_capacity(labels.len());
        for (i, (label, strat)) in labels.iter().zip(&self.strategies).enumerate() {
            let s = strat
                .iter()
                .position(|t| t == label.as_ref())
                .ok_or_else(|| {
                    Error::InvalidProfile(format!("player {} has no strategy {:?}", i + 1, label.as_ref()))
                })?;
            choices.push(s);
        }
        Ok(PureProfile(choices))
    }
}

impl StrategicGame for FiniteGame {
    type Profile = PureProfile;

    fn n_players(&self) -> usize {
        self.players.len()
    }

    fn payoff_vector(&self, x: &PureProfile) -> Result<Vec<f64>> {
        self.payoff(x).map(<[f64]>::to_vec)
    }

    fn point(x: &PureProfile) -> ProfilePoint {
        ProfilePoint::Pure(x.0.clone())
    }
}

/// Mixed-radix decoding of a row-major profile index.
pub(crate) fn decode(counts: &[usize], mut k: usize) -> PureProfile {
    let mut choices = vec![0; counts.len()];
    for i in (0..counts.len()).rev() {
        choices[i] = k % counts[i];
        k /= counts[i];
    }
    PureProfile(choices)
}

pub type PayoffOracle = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Continuous game: player `i` picks a point of `[lo_i, hi_i]`.
#[derive(Clone)]
pub struct BoxGame {
    bounds: Vec<(f64, f64)>,
    oracle: PayoffOracle,
}

impl fmt::Debug for BoxGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoxGame").field("bounds", &self.bounds).finish_non_exhaustive()
    }
}

impl BoxGame {
    pub fn new<F>(bounds: Vec<(f64, f64)>, payoff: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        BoxGame::from_oracle(bounds, Arc::new(payoff))
    }

    pub fn from_oracle(bounds: Vec<(f64, f64)>, oracle: PayoffOracle) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if bounds.len() > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(bounds.len()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidGame(format!(
                    "player {} has invalid interval [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(BoxGame { bounds, oracle })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn oracle(&self) -> &PayoffOracle {
        &self.oracle
    }

    /// Same payoff oracle on a sub-box; intervals are intersected with the
    /// original ones.
    pub fn restricted(&self, bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.len() != self.bounds.len() {
            return Err(Error::InvalidGame(format!(
                "restriction has {} intervals for {} players",
                bounds.len(),
                self.bounds.len()
            )));
        }
        let clipped = self
            .bounds
            .iter()
            .zip(bounds)
            .map(|(&(lo, hi), &(rlo, rhi))| (lo.max(rlo), hi.min(rhi)))
            .collect();
        BoxGame::from_oracle(clipped, Arc::clone(&self.oracle))
    }

    /// Evaluates the oracle, rejecting points outside the box and non-finite output.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.bounds.len();
        if x.len() != n {
            return Err(Error::InvalidProfile(format!("point has {} coordinates for {n} players", x.len())));
        }
        for (i, (&xi, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            if !xi.is_finite() || xi < lo - slack || xi > hi + slack {
                return Err(Error::InvalidProfile(format!(
                    "player {} coordinate {xi} outside [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        let out = (self.oracle)(x);
        if out.len() != n || out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Oracle(format!("{:?}", x)));
        }
        Ok(out)
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// All `2^n` corners, ordered by bitmask (bit `i` set means `hi_i`).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.bounds.len();
        (0..1usize << n)
            .map(|m| {
                self.bounds
                    .iter()
                    .enumerate()
                    .map(|(i, &(lo, hi))| if m & (1 << i) != 0 { hi } else { lo })
                    .collect()
            })
            .collect()
    }
}

impl StrategicGame for BoxGame {
    type Profile = Vec<f64>;

    fn n_players(&self) -> usize {
        self.bounds.len()
    }

    fn payoff_vector(&self, x: &Vec<f64>) -> Result<Vec<f64>> {
        self.eval(x)
    }

    fn point(x: &Vec<f64>) -> ProfilePoint {
        ProfilePoint::Continuous(x.clone())
    }
}

/// Mixed extension of a game in which every player has two strategies:
/// coordinate `x_i` is the probability of player `i`'s first strategy.
pub fn box_game_from_finite_mixed(game: &FiniteGame) -> Result<BoxGame> {
    if let Some(i) = game.strategies().iter().position(|s| s.len() != 2) {
        return Err(Error::UnsupportedShape(format!(
            "player {} has {} strategies; the mixed extension needs exactly 2",
            i + 1,
            game.strategies()[i].len()
        )));
    }
    let g = game.clone();
    let n = g.n_players();
    BoxGame::new(vec![(0.0, 1.0); n], move |x| {
        let mut out = vec![0.0; n];
        for k in 0..g.profile_count() {
            let mut prob = 1.0;
            for (i, &xi) in x.iter().enumerate() {
                // strategy index 0 has weight x_i; the stride of player i is 2^(n-1-i)
                let s = (k >> (n - 1 - i)) & 1;
                prob *= if s == 0 { xi } else { 1.0 - xi };
            }
            if prob == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(g.payoff_at(k)) {
                *o += prob * v;
            }
        }
        out
    })
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
    fn coalition_display_and_parse() {
        let c = Coalition::from_members([0, 2]);
        assert_eq!(c.to_string(), "{1,3}");
        assert_eq!("{1,3}".parse::<Coalition>().unwrap(), c);
        assert_eq!("{}".parse::<Coalition>().unwrap(), Coalition::EMPTY);
        assert!("{0}".parse::<Coalition>().is_err());
        assert!("1,2".parse::<Coalition>().is_err());
        assert_eq!(Coalition::grand(3).complement(3), Coalition::EMPTY);
        assert_eq!(Coalition::singleton(1).complement(3), Coalition::from_members([0, 2]));
    }

    #[test]
    fn payoff_lookup() {
        let g = table1();
        assert_eq!(g.payoff(&PureProfile::new(vec![0, 0])).unwrap(), &[10.0, 10.0]);
        assert_eq!(g.payoff(&PureProfile::new(vec![1, 0])).unwrap(), &[12.0, 0.0]);
        assert!(matches!(
            g.payoff(&PureProfile::new(vec![2, 0])),
            Err(Error::InvalidProfile(_))
        ));
        let one = FiniteGame::from_fn(&[1], |_| vec![0.0]).unwrap();
        assert_eq!(one.payoff(&PureProfile::new(vec![0])).unwrap(), &[0.0]);
    }

    #[test]
    fn mixed_payoff_average() {
        let g = table1();
        let u = MixedProfile::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(g.mixed_payoff(&u).unwrap(), vec![6.75, 6.75]);
        let v = MixedProfile::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(g.mixed_payoff(&v).unwrap(), vec![10.0, 10.0]);
        assert!(MixedProfile::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(MixedProfile::new(vec![vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn mixed_extension_corners() {
        let g = table1();
        let b = box_game_from_finite_mixed(&g).unwrap();
        assert_eq!(b.eval(&[1.0, 1.0]).unwrap(), vec![10.0, 10.0]);
        assert_eq!(b.eval(&[0.0, 1.0]).unwrap(), vec![12.0, 0.0]);
        let three = FiniteGame::from_fn(&[3, 2], |_| vec![0.0, 0.0]).unwrap();
        assert!(matches!(box_game_from_finite_mixed(&three), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn box_eval_rejects_outside_points() {
        let b = BoxGame::new(vec![(0.0, 1.0)], |x| vec![x[0]]).unwrap();
        assert!(b.eval(&[1.5]).is_err());
        let bad = BoxGame::new(vec![(0.0, 1.0)], |_| vec![f64::NAN]).unwrap();
        assert!(matches!(bad.eval(&[0.5]), Err(Error::Oracle(_))));
    }
}
