//! Certified growth bounds `exp(c·ℓ^α)` for automata groups.
//!
//! The pipeline: describe an invertible Mealy machine ([`mealy`]), view it as
//! a group with a cover ([`group`], [`aux`]), search for a contracting
//! essentially geodesic generating set ([`egg`]) under triangular weights
//! ([`weights`]), and tune the weights ([`opt`], [`strategy`]).

pub mod aux;
pub mod egg;
pub mod equality;
pub mod error;
pub mod formats;
pub mod group;
pub mod growth;
pub mod mealy;
pub mod opt;
pub mod perm;
pub mod portrait;
pub mod session;
pub mod strategy;
pub mod superpoly;
pub mod symmetrize;
pub mod weights;

mod context;

pub use aux::{AuxGroup, AuxMode, Block, Combine};
pub use context::Context;
pub use egg::{alpha_from, eta_of, search_egg, EggSearch, SearchConfig, SearchResult, SearchStatus, WordStats};
pub use equality::{is_identity, words_equal};
pub use error::{Error, Result};
pub use group::{Gen, Group, Word, WreathImage};
pub use mealy::{MealyMachine, RawMachine, ValidationReport};
pub use perm::Perm;
pub use portrait::{ElementId, ElementTable, PortraitCaps};
pub use symmetrize::symmetrize;
pub use weights::{Constraints, Weights};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
