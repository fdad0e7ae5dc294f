//! Biform games built from strategic games.
//!
//! A strategic game assigns each player a payoff at every strategy profile.
//! Attach to every profile a coalition function (members' payoffs plus an
//! optional nonnegative synergy), split the grand-coalition value with an
//! allocation rule, and you get a new non-cooperative game whose payoffs are
//! the shares. Its Nash equilibria are the biform solutions.
//!
//! ```
//! use biform::allocation::AllocationRule;
//! use biform::cases::commons::commons_discrete;
//!
//! let equal = commons_discrete(AllocationRule::EqualSplit).solve().unwrap();
//! let labels: Vec<String> = equal
//!     .pure_profiles()
//!     .iter()
//!     .map(|x| biform::cases::commons::table1().format_profile(x))
//!     .collect();
//! assert_eq!(labels, ["(C,C)"]);
//! ```
//!
//! Modules:
//!
//! - [`game`]: finite games, games on boxes, coalitions and profiles
//! - [`coalition`]: per-profile coalition functions and threat constructions
//! - [`allocation`]: Shapley, equal split, own contribution, rule classification
//! - [`equilibrium`]: Nash enumeration, best response on boxes, Pareto checks
//! - [`biform`]: biform problems, induced games and the two structural checks
//! - [`cases`]: the commons, regulation, Bertrand and supply-chain models
//! - [`io`], [`report`], [`sweep`], [`verify`], [`cli`]: file formats and tooling

pub mod allocation;
pub mod biform;
pub mod cases;
pub mod cli;
pub mod coalition;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod io;
pub mod optimize;
pub mod report;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};

// The guide's snippets run as doctests so the book cannot drift from the code.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/games.md")]
    pub struct Games;
    #[doc = include_str!("../../../book/src/coalitions.md")]
    pub struct Coalitions;
    #[doc = include_str!("../../../book/src/allocation.md")]
    pub struct Allocation;
    #[doc = include_str!("../../../book/src/solving.md")]
    pub struct Solving;
    #[doc = include_str!("../../../book/src/case-studies.md")]
    pub struct CaseStudies;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
